"""Weak-form assembly for the power-law curl-curl operator.

The semi-discrete problem in edge coefficients u reads

    M du/dt + K(u) = F(t),    K(u)_i = integral of flux(curl u_h) curl phi_i,

with M the edge mass matrix and flux(s) = alpha |s|^(p-2) s.  Because curls
are elementwise constant, K and its derivative reduce to one flux evaluation
per triangle.  Backward Euler residual and Jacobian assembly live here;
boundary rows are replaced by ``u_i - g_i`` so constrained dofs track their
data exactly.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels, nedelec


@dataclass(frozen=True)
class PowerLawParams:
    """Material law parameters: exponent p >= 2, scale alpha > 0.

    ``eps_reg`` floors |curl| inside the flux derivative only, keeping Newton
    matrices positive definite where the true derivative degenerates at
    curl = 0.  The residual itself is never regularized.
    """

    p: float
    alpha: float = 1.0
    eps_reg: float = 1.0e-10

    def __post_init__(self):
        if self.p < 2.0:
            raise ValueError(f"power-law exponent must be >= 2, got {self.p}")
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.eps_reg <= 0.0:
            raise ValueError(f"eps_reg must be positive, got {self.eps_reg}")

    @property
    def q(self):
        """Dual exponent p / (p - 1)."""
        return self.p / (self.p - 1.0)


def rho(s, params):
    """Scalar resistivity alpha |s|^(p-2)."""
    return params.alpha * np.abs(s) ** (params.p - 2.0)


def flux(s, params):
    """Constitutive flux alpha |s|^(p-2) s; odd and monotone increasing."""
    s = np.asarray(s, dtype=np.float64)
    return params.alpha * np.abs(s) ** (params.p - 2.0) * s


def flux_derivative(s, params):
    """Regularized derivative alpha (p-1) max(|s|, eps_reg)^(p-2); positive."""
    s = np.asarray(s, dtype=np.float64)
    mag = np.maximum(np.abs(s), params.eps_reg)
    return params.alpha * (params.p - 1.0) * mag ** (params.p - 2.0)


def mass_matrix(mesh):
    """Edge mass matrix in CSR form (cached with the mesh tables)."""
    return nedelec.tables(mesh).mass


def element_curls(field):
    """Constant scalar curl per triangle."""
    tab = nedelec.tables(field.mesh)
    return kernels.element_curls(field.dofs, field.mesh.tri_edges, tab.signed_curls)


def nonlinear_term(field, params):
    """Vector K(u): flux(curl u) tested against basis curls.

    The integral over each triangle is flux(c_K) * curl(phi_i) * |K|, one
    point being exact since both factors are constant.
    """
    mesh = field.mesh
    tab = nedelec.tables(mesh)
    c = kernels.element_curls(field.dofs, mesh.tri_edges, tab.signed_curls)
    w = flux(c, params) * mesh.areas
    vals = w[:, None] * tab.signed_curls
    return kernels.scatter_edge_values(vals, mesh.tri_edges, mesh.n_edges)


def assemble_load(fn, mesh, t):
    """Load vector of a forcing field at time t via the degree-5 rule."""
    tab = nedelec.tables(mesh)
    fq = np.asarray(fn(tab.phys_q[..., 0], tab.phys_q[..., 1], t))
    return kernels.load_vector(
        fq, tab.basis_q, tab.quad_w, mesh.areas, mesh.tri_edges, mesh.n_edges
    )


def assemble_residual(u_new, u_old, dt, load, params, bc_values=None):
    """Backward Euler residual M (u_new - u_old)/dt + K(u_new) - load.

    Rows of boundary edges are replaced by ``u_new - bc_values`` (zero data
    when ``bc_values`` is None), so a converged step satisfies the boundary
    condition exactly.
    """
    mesh = _same_mesh(u_new, u_old)
    tab = nedelec.tables(mesh)
    r = tab.mass @ ((u_new.dofs - u_old.dofs) / dt)
    r += nonlinear_term(u_new, params)
    r -= load
    idx = tab.boundary_idx
    if bc_values is None:
        r[idx] = u_new.dofs[idx]
    else:
        r[idx] = u_new.dofs[idx] - bc_values[idx]
    return r


def assemble_jacobian(u_new, dt, params):
    """Newton matrix M/dt + K'(u_new) in CSR form, before boundary elimination.

    K' has entries flux'(c_K) curl(phi_i) curl(phi_j) |K|; with the positive
    regularized derivative the matrix is symmetric positive definite.
    """
    mesh = u_new.mesh
    tab = nedelec.tables(mesh)
    c = kernels.element_curls(u_new.dofs, mesh.tri_edges, tab.signed_curls)
    fp = flux_derivative(c, params)
    data = kernels.jacobian_entries(fp, tab.signed_curls, mesh.areas)
    kprime = sp.coo_matrix(
        (data.ravel(), (tab.scatter_rows, tab.scatter_cols)),
        shape=(mesh.n_edges, mesh.n_edges),
    ).tocsr()
    return tab.mass / dt + kprime


@dataclass
class SparseSystem:
    """Linear system with a constrained (boundary) index set."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    constrained: np.ndarray


def solve_system(system):
    """Solve with the constrained dofs eliminated symmetrically.

    Constrained entries of the solution are taken from ``rhs`` directly, and
    their coupling is moved to the right-hand side, preserving symmetry of
    the reduced matrix.
    """
    n = system.matrix.shape[0]
    x = np.zeros(n)
    fixed = system.constrained
    keep = np.setdiff1d(np.arange(n), fixed, assume_unique=False)
    x[fixed] = system.rhs[fixed]
    a = system.matrix
    rhs = system.rhs[keep] - a[keep][:, fixed] @ x[fixed]
    reduced = a[keep][:, keep]
    x[keep] = spla.spsolve(reduced.tocsc(), rhs)
    return x


def _same_mesh(a, b):
    if a.mesh is not b.mesh:
        raise ValueError("edge fields live on different meshes")
    return a.mesh
