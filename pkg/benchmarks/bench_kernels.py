"""Timing comparison of the numba and numpy kernel backends.

Runs every hot-loop kernel, plus two library-level composites that chain
several of them, on a uniformly refined disk mesh.  Reports the best-of-N
wall time per call for each backend, the speedup ratio, and the maximum
relative disagreement between the two results.  A warmup call precedes
every timed region so JIT compilation never lands in the numbers.

    python3 benchmarks/bench_kernels.py --level 6 --repeats 5
"""

import argparse
import time

import numpy as np

import pcurl
from pcurl import kernels
from pcurl.assembly import PowerLawParams, nonlinear_term
from pcurl.estimators import step_estimators
from pcurl.mesh import disk_mesh
from pcurl.nedelec import EdgeField, tables


def best_of(fn, repeats, inner):
    """Minimum per-call wall time over ``repeats`` batches of ``inner`` calls."""
    out = fn()  # warmup; compiles on the numba path
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            out = fn()
        best = min(best, (time.perf_counter() - t0) / inner)
    return best, out


def rel_diff(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1.0e-300)
    return float(np.max(np.abs(a - b)) / scale)


def kernel_workloads(mesh, tab, rng):
    """Name -> callable(backend_module) pairs covering every dispatched kernel."""
    nt, ne = mesh.n_triangles, mesh.n_edges
    nq = tab.quad_w.size
    dofs = rng.standard_normal(ne)
    tri_vals = rng.standard_normal((nt, 3))
    vec_q = rng.standard_normal((nt, nq, 2))
    scal_q = rng.standard_normal((nt, nq))
    flux_prime = np.abs(rng.standard_normal(nt)) + 0.1
    return [
        ("element_curls",
         lambda b: b.element_curls(dofs, mesh.tri_edges, tab.signed_curls)),
        ("scatter_edge_values",
         lambda b: b.scatter_edge_values(tri_vals, mesh.tri_edges, ne)),
        ("field_at_quad",
         lambda b: b.field_at_quad(dofs, mesh.tri_edges, tab.basis_q)),
        ("quad_vec_l2_sq_per_tri",
         lambda b: b.quad_vec_l2_sq_per_tri(vec_q, tab.quad_w, mesh.areas)),
        ("quad_vec_l2_sq",
         lambda b: b.quad_vec_l2_sq(vec_q, tab.quad_w, mesh.areas)),
        ("quad_scalar_lp",
         lambda b: b.quad_scalar_lp(scal_q, tab.quad_w, mesh.areas, 5.0)),
        ("load_vector",
         lambda b: b.load_vector(vec_q, tab.basis_q, tab.quad_w, mesh.areas,
                                 mesh.tri_edges, ne)),
        ("jacobian_entries",
         lambda b: b.jacobian_entries(flux_prime, tab.signed_curls, mesh.areas)),
        ("mass_entries",
         lambda b: b.mass_entries(tab.basis_q, tab.quad_w, mesh.areas)),
        ("normal_jump_integral",
         lambda b: b.normal_jump_integral(dofs, tab.side_edge_rows,
                                          tab.normal_trace, tab.edge_gauss_w,
                                          tab.int_h_f)),
    ]


def composite_workloads(mesh, rng):
    """Library entry points that chain several kernels per call."""
    params = PowerLawParams(p=5.0)
    u_new = EdgeField(mesh, rng.standard_normal(mesh.n_edges))
    u_old = EdgeField(mesh, 0.9 * u_new.dofs + 0.1 * rng.standard_normal(mesh.n_edges))

    def forcing(x, y, t):
        out = np.empty(x.shape + (2,))
        out[..., 0] = np.sin(x + t) + 0.3 * y
        out[..., 1] = x * y - 0.5
        return out

    def flatten(br):
        return np.concatenate([br.eta_i_k, br.eta_t_f, br.eta_n_f])

    return [
        ("nonlinear_term",
         lambda: nonlinear_term(u_new, params), None),
        ("step_estimators",
         lambda: step_estimators(u_new, u_old, 1.0e-3, 1.0e-3, forcing, params),
         flatten),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--level", type=int, default=6, help="disk mesh refinement level")
    ap.add_argument("--repeats", type=int, default=5, help="timing batches per entry")
    ap.add_argument("--inner", type=int, default=3, help="calls per timing batch")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not kernels.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    mesh = disk_mesh(args.level)
    tab = tables(mesh)
    rng = np.random.default_rng(args.seed)
    print(f"pcurl {pcurl.__version__}, mesh level {args.level}: "
          f"{mesh.n_triangles} triangles, {mesh.n_edges} edges")
    print(f"best of {args.repeats} x {args.inner} calls\n")

    width = max(len(n) for n, _ in kernel_workloads(mesh, tab, rng)) + 2
    header = f"{'workload':<{width}}{'numpy':>12}{'numba':>12}{'speedup':>10}{'rel diff':>12}"
    print(header)
    print("-" * len(header))

    def show(name, t_np, t_nb, diff):
        print(f"{name:<{width}}{t_np * 1e3:>10.3f} ms{t_nb * 1e3:>10.3f} ms"
              f"{t_np / t_nb:>9.1f}x{diff:>12.1e}")

    for name, fn in kernel_workloads(mesh, tab, rng):
        t_np, out_np = best_of(lambda: fn(kernels.get_backend("numpy")),
                               args.repeats, args.inner)
        t_nb, out_nb = best_of(lambda: fn(kernels.get_backend("numba")),
                               args.repeats, args.inner)
        show(name, t_np, t_nb, rel_diff(out_np, out_nb))

    default = kernels.current()
    try:
        for name, fn, flatten in composite_workloads(mesh, rng):
            results, times = {}, {}
            for backend in ("numpy", "numba"):
                kernels.use(backend)
                times[backend], out = best_of(fn, args.repeats, args.inner)
                results[backend] = flatten(out) if flatten is not None else out
            show(name, times["numpy"], times["numba"],
                 rel_diff(results["numpy"], results["numba"]))
    finally:
        kernels.use(default)


if __name__ == "__main__":
    main()
