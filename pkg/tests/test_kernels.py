"""Backend parity: the numba kernels must match the numpy reference."""

import numpy as np
import pytest

import pcurl
from pcurl import kernels, nedelec

pytestmark = pytest.mark.skipif(
    not kernels.HAS_NUMBA, reason="numba backend not importable"
)

REL_TOL = 1.0e-13


def _rel_err(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(1.0e-300, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


@pytest.fixture(scope="module")
def workload():
    m = pcurl.disk_mesh(2)
    tab = nedelec.tables(m)
    rng = np.random.default_rng(42)
    return {
        "mesh": m,
        "tab": tab,
        "dofs": rng.standard_normal(m.n_edges),
        "tri_vals": rng.standard_normal((m.n_triangles, 3)),
        "quad_field": rng.standard_normal((m.n_triangles, len(tab.quad_w), 2)),
        "flux_prime": np.abs(rng.standard_normal(m.n_triangles)) + 0.1,
    }


def _both(name):
    return kernels.get_backend("numpy"), kernels.get_backend("numba")


def test_element_curls(workload):
    np_k, nb_k = _both("element_curls")
    m, tab = workload["mesh"], workload["tab"]
    args = (workload["dofs"], m.tri_edges, tab.signed_curls)
    assert _rel_err(np_k.element_curls(*args), nb_k.element_curls(*args)) < REL_TOL


def test_scatter_edge_values(workload):
    np_k, nb_k = _both("scatter_edge_values")
    m = workload["mesh"]
    args = (workload["tri_vals"], m.tri_edges, m.n_edges)
    a = np_k.scatter_edge_values(*args)
    b = nb_k.scatter_edge_values(*args)
    assert _rel_err(a, b) < REL_TOL
    # scatter oracle: explicit loop
    ref = np.zeros(m.n_edges)
    for t in range(m.n_triangles):
        for k in range(3):
            ref[m.tri_edges[t, k]] += workload["tri_vals"][t, k]
    assert _rel_err(a, ref) < REL_TOL


def test_field_at_quad(workload):
    np_k, nb_k = _both("field_at_quad")
    m, tab = workload["mesh"], workload["tab"]
    args = (workload["dofs"], m.tri_edges, tab.basis_q)
    assert _rel_err(np_k.field_at_quad(*args), nb_k.field_at_quad(*args)) < REL_TOL


def test_quad_vec_l2(workload):
    m, tab = workload["mesh"], workload["tab"]
    args = (workload["quad_field"], tab.quad_w, m.areas)
    np_k, nb_k = _both("quad_vec_l2_sq")
    per_np = np_k.quad_vec_l2_sq_per_tri(*args)
    per_nb = nb_k.quad_vec_l2_sq_per_tri(*args)
    assert _rel_err(per_np, per_nb) < REL_TOL
    assert _rel_err(np_k.quad_vec_l2_sq(*args), nb_k.quad_vec_l2_sq(*args)) < REL_TOL
    assert _rel_err(np_k.quad_vec_l2_sq(*args), per_np.sum()) < REL_TOL


def test_quad_scalar_lp(workload):
    np_k, nb_k = _both("quad_scalar_lp")
    m, tab = workload["mesh"], workload["tab"]
    vals = workload["quad_field"][..., 0]
    for p in (2.0, 5.0, 25.0):
        args = (vals, tab.quad_w, m.areas, p)
        assert _rel_err(np_k.quad_scalar_lp(*args), nb_k.quad_scalar_lp(*args)) < REL_TOL


def test_load_vector(workload):
    np_k, nb_k = _both("load_vector")
    m, tab = workload["mesh"], workload["tab"]
    args = (
        workload["quad_field"],
        tab.basis_q,
        tab.quad_w,
        m.areas,
        m.tri_edges,
        m.n_edges,
    )
    assert _rel_err(np_k.load_vector(*args), nb_k.load_vector(*args)) < REL_TOL


def test_jacobian_entries(workload):
    np_k, nb_k = _both("jacobian_entries")
    m, tab = workload["mesh"], workload["tab"]
    args = (workload["flux_prime"], tab.signed_curls, m.areas)
    a = np_k.jacobian_entries(*args)
    b = nb_k.jacobian_entries(*args)
    assert _rel_err(a, b) < REL_TOL
    assert _rel_err(a, np.swapaxes(a, 1, 2)) < REL_TOL  # symmetric blocks


def test_mass_entries(workload):
    np_k, nb_k = _both("mass_entries")
    m, tab = workload["mesh"], workload["tab"]
    args = (tab.basis_q, tab.quad_w, m.areas)
    assert _rel_err(np_k.mass_entries(*args), nb_k.mass_entries(*args)) < REL_TOL


def test_normal_jump_integral(workload):
    np_k, nb_k = _both("normal_jump_integral")
    tab = workload["tab"]
    args = (
        workload["dofs"],
        tab.side_edge_rows,
        tab.normal_trace,
        tab.edge_gauss_w,
        tab.int_h_f,
    )
    a = np_k.normal_jump_integral(*args)
    b = nb_k.normal_jump_integral(*args)
    assert _rel_err(a, b) < REL_TOL


def test_use_rebinds_module_functions():
    before = kernels.current()
    try:
        kernels.use("numpy")
        assert kernels.current() == "numpy"
        assert kernels.element_curls is kernels.get_backend("numpy").element_curls
        kernels.use("numba")
        assert kernels.element_curls is kernels.get_backend("numba").element_curls
    finally:
        kernels.use(before)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError, match="unknown kernel backend"):
        kernels.get_backend("fortran")
