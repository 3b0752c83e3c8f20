"""Residual a posteriori error indicators and derived quantities.

Per backward Euler step the four contributions are, with the flux evaluated
at the interval midpoint field u_mid = (u_new + u_old)/2, the forcing at the
midpoint time, and delta_t u the backward difference:

    eta_i,K = h_K ||f - delta_t u_h||_{L2(K)}     (interior residual; the
              flux-curl term vanishes elementwise at lowest order)
    eta_d,K = h_K ||div delta_t u_h||_{L2(K)}     (identically zero here)
    eta_t,F = h_F^(1/2) ||[tangential flux jump]||_{L2(F)}
    eta_n,F = h_F^(1/2) ||[normal delta_t u_h jump]||_{L2(F)}

with jumps over interior edges only.  Accumulation in time mirrors the
reliability bound: e0 term plus the composite midpoint sum of
eta_n^2 + eta_d^2 + eta_i^q + eta_t^q with q = p/(p-1).
"""

from dataclasses import dataclass

import numpy as np

from . import assembly, kernels, manufactured, nedelec


@dataclass
class EstimatorBreakdown:
    """Local indicators (full-length arrays, zero on boundary edges) and totals."""

    eta_i_k: np.ndarray
    eta_d_k: np.ndarray
    eta_t_f: np.ndarray
    eta_n_f: np.ndarray
    eta_i: float
    eta_d: float
    eta_t: float
    eta_n: float
    time: float


class ZeroErrorDenominator(ArithmeticError):
    """Effectivity is undefined: the true-error denominator is numerically zero."""


def step_estimators(u_new, u_old, dt, t_new, forcing, params):
    """Error indicators for the step ending at ``t_new``.

    ``forcing(x, y, t)`` may be None for a source-free problem.  Totals are
    the root sum of squares of the local entries.
    """
    mesh = u_new.mesh
    if u_old.mesh is not mesh:
        raise ValueError("edge fields live on different meshes")
    tab = nedelec.tables(mesh)
    t_mid = t_new - 0.5 * dt
    delta = (u_new.dofs - u_old.dofs) / dt
    mid = 0.5 * (u_new.dofs + u_old.dofs)

    # interior residual, elementwise
    dq = kernels.field_at_quad(delta, mesh.tri_edges, tab.basis_q)
    if forcing is not None:
        fq = np.asarray(forcing(tab.phys_q[..., 0], tab.phys_q[..., 1], t_mid))
        dq = fq - dq
    else:
        dq = -dq
    res_sq = kernels.quad_vec_l2_sq_per_tri(dq, tab.quad_w, mesh.areas)
    eta_i_k = mesh.h_k * np.sqrt(res_sq)

    # the basis is locally divergence-free, so this indicator vanishes exactly
    eta_d_k = np.zeros(mesh.n_triangles)

    # tangential jump of the constitutive flux (elementwise constant)
    c_mid = kernels.element_curls(mid, mesh.tri_edges, tab.signed_curls)
    flux_mid = assembly.flux(c_mid, params)
    int_idx = tab.int_edges
    jump = flux_mid[tab.side_tris[:, 0]] - flux_mid[tab.side_tris[:, 1]]
    eta_t_f = np.zeros(mesh.n_edges)
    eta_t_f[int_idx] = tab.int_h_f * np.abs(jump)

    # normal jump of the backward difference field
    jump_int = kernels.normal_jump_integral(
        delta, tab.side_edge_rows, tab.normal_trace, tab.edge_gauss_w, tab.int_h_f
    )
    eta_n_f = np.zeros(mesh.n_edges)
    eta_n_f[int_idx] = np.sqrt(tab.int_h_f * jump_int)

    return EstimatorBreakdown(
        eta_i_k=eta_i_k,
        eta_d_k=eta_d_k,
        eta_t_f=eta_t_f,
        eta_n_f=eta_n_f,
        eta_i=float(np.linalg.norm(eta_i_k)),
        eta_d=0.0,
        eta_t=float(np.linalg.norm(eta_t_f)),
        eta_n=float(np.linalg.norm(eta_n_f)),
        time=t_mid,
    )


@dataclass
class AccumulatedEstimate:
    """Composite midpoint accumulation of the reliability right-hand side."""

    total: float
    e0_sq: float
    int_eta_i_q: float
    int_eta_t_q: float
    int_eta_n_sq: float
    int_eta_d_sq: float
    per_step: np.ndarray

    @property
    def estimator_integral(self):
        """Time integral without the initial-error term."""
        return self.int_eta_n_sq + self.int_eta_d_sq + self.int_eta_i_q + self.int_eta_t_q


def _trajectory_breakdowns(history, forcing, params):
    dt = history.dt
    for n in range(1, len(history.times)):
        yield step_estimators(
            history.fields[n],
            history.fields[n - 1],
            dt,
            history.times[n],
            forcing,
            params,
        )


def accumulate(history, case, params):
    """Accumulate estimator power sums over a recorded trajectory.

    ``case`` supplies the forcing for the interior residual and the exact
    solution for the initial-error term.
    """
    dt = history.dt
    q = params.q
    int_i = int_t = int_n = 0.0
    per_step = []
    for br in _trajectory_breakdowns(history, case.forcing if case else None, params):
        ci = dt * br.eta_i**q
        ct = dt * br.eta_t**q
        cn = dt * br.eta_n**2
        int_i += ci
        int_t += ct
        int_n += cn
        per_step.append(ci + ct + cn)
    if case is not None:
        e0 = nedelec.l2_error(history.fields[0], case.field, history.times[0])
    else:
        e0 = nedelec.l2_norm(history.fields[0])
    e0_sq = e0**2
    return AccumulatedEstimate(
        total=e0_sq + int_i + int_t + int_n,
        e0_sq=e0_sq,
        int_eta_i_q=int_i,
        int_eta_t_q=int_t,
        int_eta_n_sq=int_n,
        int_eta_d_sq=0.0,
        per_step=np.asarray(per_step),
    )


def _exact_curl_lp_pow(mesh, case, t, p):
    """Integral of |exact curl|^p over the mesh domain."""
    tab = nedelec.tables(mesh)
    ref = np.asarray(case.curl(tab.phys_q[..., 0], tab.phys_q[..., 1], t))
    return kernels.quad_scalar_lp(ref, tab.quad_w, mesh.areas, float(p))


def error_measures(history, case, params):
    """True-error denominators: snapshot sup of ||e||^2 and the curl error integral.

    The time integral uses the same composite midpoint convention as the
    estimators: the midpoint field (u^n + u^{n-1})/2 against the exact curl at
    the midpoint time.
    """
    dt = history.dt
    sup_sq = 0.0
    for t, u in zip(history.times, history.fields):
        sup_sq = max(sup_sq, nedelec.l2_error(u, case.field, t) ** 2)
    int_curl = 0.0
    for n in range(1, len(history.times)):
        mid = nedelec.EdgeField(
            history.fields[n].mesh,
            0.5 * (history.fields[n].dofs + history.fields[n - 1].dofs),
        )
        t_mid = history.times[n] - 0.5 * dt
        err = nedelec.curl_lp_error(mid, case.curl, params.p, t_mid)
        int_curl += dt * err**params.p
    return sup_sq, int_curl


def effectivity_ratio(history, case, params, zero_tol=1.0e-22):
    """Estimator-to-error ratio kappa over a trajectory.

    Numerator: composite midpoint integral of eta_i^q + eta_t^q + eta_n^2.
    Denominator: snapshot sup of ||e||^2 plus the curl error power integral.
    Raises ZeroErrorDenominator when the solution is representable to round-off
    and the ratio would be meaningless.
    """
    acc = accumulate(history, case, params)
    numer = acc.int_eta_i_q + acc.int_eta_t_q + acc.int_eta_n_sq
    sup_sq, int_curl = error_measures(history, case, params)
    denom = sup_sq + int_curl
    scale = 0.0
    for t, u in zip(history.times, history.fields):
        scale = max(scale, nedelec.l2_norm(u) ** 2)
    if denom <= zero_tol * max(1.0, scale):
        raise ZeroErrorDenominator(
            f"true error {denom:.3e} is at round-off; effectivity undefined"
        )
    return numer / denom


def ac_loss_discrete(history, params):
    """AC loss (1/T) integral of ||curl u_h||_p^p by composite midpoint."""
    dt = history.dt
    horizon = history.times[-1] - history.times[0]
    total = 0.0
    for n in range(1, len(history.times)):
        mid = nedelec.EdgeField(
            history.fields[n].mesh,
            0.5 * (history.fields[n].dofs + history.fields[n - 1].dofs),
        )
        total += dt * nedelec.curl_lp_norm(mid, params.p) ** params.p
    return total / horizon


@dataclass
class AcLossReport:
    """AC loss comparison: discrete value, exact references, and bounds.

    ``q_exact`` is the true AC loss on the disk; ``q_exact_mesh`` is the same
    functional evaluated with the discrete quadrature on the mesh domain and
    is reported for diagnostics (it under-samples sharply peaked curls on
    coarse meshes).  ``delta_q`` compares the discrete value against the true
    disk value.
    """

    q_h: float
    q_exact: float
    q_exact_mesh: float
    delta_q: float
    middle_bound: float
    reliability_bound: float
    m_value: float


def ac_loss_error_bound(history, case, params):
    """Evaluate |Q(u) - Q(u_h)| against its two upper bounds.

    The middle bound is p T^(1-1/p) M^(p-1) (integral of curl error^p)^(1/p);
    the reliability variant replaces the integral with the accumulated
    estimator sum, with its unknown constants set to one ("unscaled").  M is
    the trajectory max of max(||curl u_h||_p, ||curl u||_p) with the exact
    norm taken over the disk; the curl error integral is necessarily a mesh
    quadrature, so the bound can understate unresolved exact features.
    Assumes the trajectory starts at t = 0.
    """
    dt = history.dt
    p = params.p
    horizon = history.times[-1] - history.times[0]
    mesh = history.fields[0].mesh

    q_h = ac_loss_discrete(history, params)
    q_exact = manufactured.ac_loss_exact(case, history.times[-1])
    exact_pow = 0.0
    for n in range(1, len(history.times)):
        t_mid = history.times[n] - 0.5 * dt
        exact_pow += dt * _exact_curl_lp_pow(mesh, case, t_mid, p)
    q_exact_mesh = exact_pow / horizon

    m_value = 0.0
    for u in history.fields:
        m_value = max(m_value, nedelec.curl_lp_norm(u, p))
    exact_pows = manufactured.curl_pow_disk(case, np.asarray(history.times))
    m_value = max(m_value, float(np.max(exact_pows)) ** (1.0 / p))

    _, int_curl_err = error_measures(history, case, params)
    front = p * horizon ** (1.0 - 1.0 / p) * m_value ** (p - 1.0)
    middle = front * int_curl_err ** (1.0 / p)
    acc = accumulate(history, case, params)
    reliability = front * acc.total ** (1.0 / p)
    return AcLossReport(
        q_h=q_h,
        q_exact=q_exact,
        q_exact_mesh=q_exact_mesh,
        delta_q=abs(q_exact - q_h),
        middle_bound=middle,
        reliability_bound=reliability,
        m_value=m_value,
    )
