"""Backward Euler time stepping with damped Newton solves.

Each step solves M (u - u_old)/dt + K(u) = F(t_new) for the edge coefficients
u, with boundary dofs pinned to their data before the first iteration so
Newton corrections stay in the homogeneous space.  The line search halves the
step until the residual norm decreases; convergence is declared at

    ||R|| <= max(abs_tol, rel_tol * ||R at the initial guess||).

``run`` records the trajectory together with a per-step energy ledger
(L2 norm, Lp curl norm, forcing pairing) that ``energy_check`` turns into the
discrete stability inequality

    ||u^n||^2 + 2 dt alpha ||curl u^n||_p^p
        <= ||u^{n-1}||^2 + 2 dt (f^n, u^n) + tol,

valid for homogeneous boundary runs.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import assembly, nedelec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    newton_rel_tol: float = 1.0e-10
    newton_abs_tol: float = 1.0e-12
    newton_max_iter: int = 50
    line_search_shrink: float = 0.5
    line_search_max: int = 30
    p_continuation: bool = False

    def __post_init__(self):
        if self.dt <= 0.0 or self.t_end <= 0.0:
            raise ValueError("dt and t_end must be positive")
        n = round(self.t_end / self.dt)
        if n < 1 or abs(n * self.dt - self.t_end) > 1.0e-12 * self.t_end:
            raise ValueError(
                f"t_end {self.t_end} is not an integral multiple of dt {self.dt}"
            )

    @property
    def n_steps(self):
        return round(self.t_end / self.dt)


class NonConvergence(RuntimeError):
    """Newton failed to reach tolerance; carries diagnostic state."""

    def __init__(self, message, iterations, residual_norm, time, step_index=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual_norm = residual_norm
        self.time = time
        self.step_index = step_index


@dataclass
class EnergyEntry:
    """Per-snapshot ledger: L2 norm, Lp curl norm, forcing pairing (f, u)."""

    l2: float
    curl_lp: float
    f_pair: float


@dataclass
class TimeHistory:
    """Snapshots of a backward Euler run at t0, t0+dt, ..., t_end."""

    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    newton_iters: list = field(default_factory=list)
    energy: list = field(default_factory=list)

    @property
    def dt(self):
        return self.times[1] - self.times[0]

    def final(self):
        return self.fields[-1]


def _newton_solve(u, u_old, dt, load, g, params, config, t_new):
    """Damped Newton on the backward Euler residual; returns iterations used."""
    mesh = u.mesh
    r = assembly.assemble_residual(u, u_old, dt, load, params, g)
    norm = np.linalg.norm(r)
    target = max(config.newton_abs_tol, config.newton_rel_tol * norm)
    fixed = mesh.boundary_edge_indices()
    for it in range(config.newton_max_iter):
        if norm <= target:
            return it
        jac = assembly.assemble_jacobian(u, dt, params)
        system = assembly.SparseSystem(jac, -r, fixed)
        system.rhs[fixed] = 0.0
        delta = assembly.solve_system(system)
        tau = 1.0
        for _ in range(config.line_search_max):
            trial = nedelec.EdgeField(mesh, u.dofs + tau * delta, t_new)
            r_trial = assembly.assemble_residual(trial, u_old, dt, load, params, g)
            norm_trial = np.linalg.norm(r_trial)
            if norm_trial < norm or norm_trial <= target:
                break
            tau *= config.line_search_shrink
        else:
            raise NonConvergence(
                f"line search stalled at t={t_new:g} (residual {norm:.3e})",
                iterations=it,
                residual_norm=norm,
                time=t_new,
            )
        u.dofs = trial.dofs
        r = r_trial
        norm = norm_trial
    if norm <= target:
        return config.newton_max_iter
    raise NonConvergence(
        f"Newton did not converge at t={t_new:g} (residual {norm:.3e})",
        iterations=config.newton_max_iter,
        residual_norm=norm,
        time=t_new,
    )


def _continuation_exponents(p):
    seq = []
    pk = 2.0
    while pk < p:
        seq.append(pk)
        pk *= 2.0
    seq.append(p)
    return seq


def step(u_old, t_new, forcing, boundary, params, config):
    """Advance one backward Euler step to ``t_new``.

    Parameters
    ----------
    u_old : EdgeField
    t_new : float
    forcing : callable or None
        ``forcing(x, y, t)`` with shape x.shape + (2,); None means zero.
    boundary : callable or None
        ``boundary(t)`` returning a full-length dof vector with the boundary
        entries set; None imposes the homogeneous condition.
    params : PowerLawParams
    config : StepperConfig

    Returns
    -------
    (EdgeField, int)
        The new field and the Newton iteration count.
    """
    mesh = u_old.mesh
    dt = config.dt
    if forcing is not None:
        load = assembly.assemble_load(forcing, mesh, t_new)
    else:
        load = np.zeros(mesh.n_edges)
    g = boundary(t_new) if boundary is not None else None
    fixed = mesh.boundary_edge_indices()

    u = nedelec.EdgeField(mesh, u_old.dofs.copy(), t_new)
    u.dofs[fixed] = 0.0 if g is None else g[fixed]

    iters = 0
    if config.p_continuation and params.p > 4.0:
        # warm start through a geometric exponent ramp; each solve seeds the next
        for pk in _continuation_exponents(params.p):
            pk_params = replace(params, p=pk)
            iters += _newton_solve(u, u_old, dt, load, g, pk_params, config, t_new)
    else:
        iters = _newton_solve(u, u_old, dt, load, g, params, config, t_new)
    logger.debug("step t=%g converged in %d Newton iterations", t_new, iters)
    return u, iters


def _ledger_entry(u, load, params):
    return EnergyEntry(
        l2=nedelec.l2_norm(u),
        curl_lp=nedelec.curl_lp_norm(u, params.p),
        f_pair=float(load @ u.dofs),
    )


def run(initial, forcing, boundary, params, config, t0=0.0):
    """March from ``initial`` at ``t0`` to ``t0 + t_end`` in uniform steps.

    Times accumulate as t += dt so that a restart from any recorded snapshot
    reproduces the remaining trajectory bitwise.
    """
    mesh = initial.mesh
    history = TimeHistory()
    load0 = (
        assembly.assemble_load(forcing, mesh, t0)
        if forcing is not None
        else np.zeros(mesh.n_edges)
    )
    u = nedelec.EdgeField(mesh, initial.dofs.copy(), t0)
    history.times.append(t0)
    history.fields.append(u)
    history.newton_iters.append(0)
    history.energy.append(_ledger_entry(u, load0, params))

    t = t0
    for k in range(config.n_steps):
        t = t + config.dt
        try:
            u, iters = step(u, t, forcing, boundary, params, config)
        except NonConvergence as exc:
            exc.step_index = k + 1
            raise
        load = (
            assembly.assemble_load(forcing, mesh, t)
            if forcing is not None
            else np.zeros(mesh.n_edges)
        )
        history.times.append(t)
        history.fields.append(u)
        history.newton_iters.append(iters)
        history.energy.append(_ledger_entry(u, load, params))
    return history


@dataclass
class EnergyReport:
    step: int
    lhs: float
    rhs: float
    margin: float
    tol: float
    ok: bool


def energy_check(history, params, tol_factor=1.0e-8):
    """Evaluate the per-step stability inequality from the energy ledger.

    Margin is rhs - lhs; a step passes when margin >= -tol with
    tol = tol_factor * scale and scale the largest magnitude involved.
    Meaningful for homogeneous boundary runs, where the solution itself is an
    admissible test function.
    """
    dt = history.dt
    reports = []
    for n in range(1, len(history.times)):
        prev = history.energy[n - 1]
        cur = history.energy[n]
        lhs = cur.l2**2 + 2.0 * dt * params.alpha * cur.curl_lp**params.p
        rhs = prev.l2**2 + 2.0 * dt * cur.f_pair
        scale = max(1.0, abs(lhs), abs(rhs))
        tol = tol_factor * scale
        margin = rhs - lhs
        reports.append(
            EnergyReport(
                step=n, lhs=lhs, rhs=rhs, margin=margin, tol=tol, ok=margin >= -tol
            )
        )
    return reports
