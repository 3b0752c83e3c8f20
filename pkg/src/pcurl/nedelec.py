"""Lowest-order edge elements on triangles.

Basis functions are the Whitney forms ``lam_a grad(lam_b) - lam_b grad(lam_a)``
attached to edges, oriented from the lower to the higher global vertex index.
Degrees of freedom are tangential edge integrals.  Fields built this way are
tangentially continuous, locally divergence-free, and carry an elementwise
constant scalar curl.

Quadrature is pinned: a 7-point degree-5 rule on triangles for norms and
loads, a 4-point Gauss rule on edges for degrees of freedom and trace jumps,
and the nonlinear curl terms need only one point because curls are constant.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels

_SQRT15 = np.sqrt(15.0)

# local edges (v0,v1), (v1,v2), (v2,v0)
_LOC_A = np.array([0, 1, 2])
_LOC_B = np.array([1, 2, 0])


@dataclass(frozen=True)
class QuadratureRule:
    """Reference-element quadrature nodes and weights.

    Triangle rules store barycentric points of shape (nq, 3) with weights
    summing to the reference area 1/2; edge rules store parameters on [0, 1]
    with weights summing to 1.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int


def _triangle_rule_d5():
    a1 = (6.0 + _SQRT15) / 21.0
    a2 = (6.0 - _SQRT15) / 21.0
    w1 = (155.0 + _SQRT15) / 1200.0
    w2 = (155.0 - _SQRT15) / 1200.0
    pts = np.array(
        [
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            [a1, a1, 1.0 - 2.0 * a1],
            [a1, 1.0 - 2.0 * a1, a1],
            [1.0 - 2.0 * a1, a1, a1],
            [a2, a2, 1.0 - 2.0 * a2],
            [a2, 1.0 - 2.0 * a2, a2],
            [1.0 - 2.0 * a2, a2, a2],
        ]
    )
    w = np.array([0.225, w1, w1, w1, w2, w2, w2]) * 0.5
    return QuadratureRule(points=pts, weights=w, degree=5)


def _edge_rule_g4():
    x1 = np.sqrt(3.0 / 7.0 - 2.0 / 7.0 * np.sqrt(6.0 / 5.0))
    x2 = np.sqrt(3.0 / 7.0 + 2.0 / 7.0 * np.sqrt(6.0 / 5.0))
    w1 = (18.0 + np.sqrt(30.0)) / 36.0
    w2 = (18.0 - np.sqrt(30.0)) / 36.0
    nodes = 0.5 * (1.0 + np.array([-x2, -x1, x1, x2]))
    weights = 0.5 * np.array([w2, w1, w1, w2])
    return QuadratureRule(points=nodes, weights=weights, degree=7)


TRI_D5 = _triangle_rule_d5()
EDGE_G4 = _edge_rule_g4()


@dataclass
class EdgeField:
    """Coefficient vector over mesh edges with an informational time stamp."""

    mesh: object
    dofs: np.ndarray
    time: float = 0.0

    def copy(self):
        return EdgeField(self.mesh, self.dofs.copy(), self.time)


def zero_field(mesh, time=0.0):
    return EdgeField(mesh, np.zeros(mesh.n_edges), time)


def _require_same_mesh(*fields):
    m = fields[0].mesh
    for f in fields[1:]:
        if f.mesh is not m:
            raise ValueError("edge fields live on different meshes")
    return m


class _Tables:
    """Per-mesh arrays shared by assembly, norms and estimators."""

    def __init__(self, mesh):
        self.mesh = mesh
        tris = mesh.triangles
        verts = mesh.vertices
        p = verts[tris]  # (nt, 3, 2)
        area = mesh.areas
        nt = mesh.n_triangles

        # grad(lam_i) = rot90 of the opposite edge / (2 area)
        g = np.empty((nt, 3, 2))
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            g[:, i, 0] = p[:, j, 1] - p[:, k, 1]
            g[:, i, 1] = p[:, k, 0] - p[:, j, 0]
        g /= 2.0 * area[:, None, None]
        self.grad_lam = g

        signs = mesh.tri_edge_signs.astype(np.float64)
        self.signed_curls = np.ascontiguousarray(signs / area[:, None])

        bary = TRI_D5.points
        self.quad_w = TRI_D5.weights
        self.phys_q = np.einsum("qi,tid->tqd", bary, p)
        t1 = np.einsum("qk,tkd->tkqd", bary[:, _LOC_A], g[:, _LOC_B, :])
        t2 = np.einsum("qk,tkd->tkqd", bary[:, _LOC_B], g[:, _LOC_A, :])
        self.basis_q = np.ascontiguousarray(signs[:, :, None, None] * (t1 - t2))

        self.mass_local = kernels.mass_entries(self.basis_q, self.quad_w, area)
        rows = np.repeat(mesh.tri_edges, 3, axis=1).ravel()
        cols = np.tile(mesh.tri_edges, (1, 3)).ravel()
        self.scatter_rows = rows
        self.scatter_cols = cols
        self.mass = sp.coo_matrix(
            (self.mass_local.ravel(), (rows, cols)),
            shape=(mesh.n_edges, mesh.n_edges),
        ).tocsr()

        ev = verts[mesh.edges]
        delta = ev[:, 1] - ev[:, 0]
        self.edge_delta = delta
        tangent = delta / mesh.h_f[:, None]
        self.edge_tangent = tangent
        self.edge_normal = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1)
        s = EDGE_G4.points
        self.edge_gauss_w = EDGE_G4.weights
        self.edge_gauss_xy = ev[:, None, 0, :] + s[None, :, None] * delta[:, None, :]

        self._build_interior_traces()
        self.boundary_idx = mesh.boundary_edge_indices()
        self.interior_idx = mesh.interior_edge_indices()

    def _build_interior_traces(self):
        mesh = self.mesh
        int_idx = mesh.interior_edge_indices()
        self.int_edges = int_idx
        m = len(int_idx)
        ng = len(EDGE_G4.points)
        side_tris = mesh.edge_tris[int_idx]  # (m, 2)
        self.side_tris = side_tris
        self.side_edge_rows = np.ascontiguousarray(mesh.tri_edges[side_tris])
        lo = mesh.edges[int_idx, 0]
        hi = mesh.edges[int_idx, 1]
        s = EDGE_G4.points
        trace = np.empty((m, 2, 3, ng))
        for side in range(2):
            t = side_tris[:, side]
            tv = mesh.triangles[t]
            loc_lo = np.argmax(tv == lo[:, None], axis=1)
            loc_hi = np.argmax(tv == hi[:, None], axis=1)
            bary = np.zeros((m, ng, 3))
            rows = np.arange(m)[:, None]
            cols = np.arange(ng)[None, :]
            bary[rows, cols, loc_lo[:, None]] = 1.0 - s[None, :]
            bary[rows, cols, loc_hi[:, None]] = s[None, :]
            g = self.grad_lam[t]
            signs = mesh.tri_edge_signs[t].astype(np.float64)
            v1 = np.einsum("egk,ekd->ekgd", bary[:, :, _LOC_A], g[:, _LOC_B, :])
            v2 = np.einsum("egk,ekd->ekgd", bary[:, :, _LOC_B], g[:, _LOC_A, :])
            vals = signs[:, :, None, None] * (v1 - v2)
            n = self.edge_normal[int_idx]
            trace[:, side] = np.einsum("ekgd,ed->ekg", vals, n)
        self.normal_trace = np.ascontiguousarray(trace)
        self.int_h_f = mesh.h_f[int_idx]


def tables(mesh):
    """Per-mesh finite element tables, built once and cached on the mesh."""
    tab = mesh._cache.get("fem_tables")
    if tab is None:
        tab = _Tables(mesh)
        mesh._cache["fem_tables"] = tab
    return tab


def basis_eval(mesh, tri, bary):
    """Evaluate the three oriented basis functions of one triangle.

    Parameters
    ----------
    mesh : TriMesh
    tri : int
        Triangle index.
    bary : (m, 3) array
        Barycentric evaluation points.

    Returns
    -------
    values : (3, m, 2) array
    curls : (3,) array
        Constant scalar curl of each basis function.
    """
    tab = tables(mesh)
    bary = np.atleast_2d(np.asarray(bary, dtype=np.float64))
    g = tab.grad_lam[tri]
    signs = mesh.tri_edge_signs[tri].astype(np.float64)
    v1 = np.einsum("qk,kd->kqd", bary[:, _LOC_A], g[_LOC_B])
    v2 = np.einsum("qk,kd->kqd", bary[:, _LOC_B], g[_LOC_A])
    values = signs[:, None, None] * (v1 - v2)
    return values, tab.signed_curls[tri].copy()


def eval_field(field, tri, bary):
    """Field values at barycentric points of one triangle, plus its curl there."""
    values, curls = basis_eval(field.mesh, tri, bary)
    local = field.dofs[field.mesh.tri_edges[tri]]
    return np.einsum("k,kqd->qd", local, values), float(local @ curls)


def interpolate(fn, mesh, t=0.0):
    """Edge interpolant of a vector field.

    ``fn(x, y, t)`` must accept arrays and return an array of shape
    ``x.shape + (2,)``.  Each degree of freedom is the 4-point Gauss value of
    the tangential line integral along its edge, lower to higher vertex.
    """
    tab = tables(mesh)
    xy = tab.edge_gauss_xy
    vals = np.asarray(fn(xy[..., 0], xy[..., 1], t))
    dofs = np.einsum("g,egd,ed->e", tab.edge_gauss_w, vals, tab.edge_delta)
    return EdgeField(mesh, dofs, t)


def boundary_values(fn, mesh, t=0.0):
    """Dof vector that matches ``fn`` tangentially on boundary edges, 0 inside."""
    tab = tables(mesh)
    idx = tab.boundary_idx
    xy = tab.edge_gauss_xy[idx]
    vals = np.asarray(fn(xy[..., 0], xy[..., 1], t))
    g = np.zeros(mesh.n_edges)
    g[idx] = np.einsum("g,egd,ed->e", tab.edge_gauss_w, vals, tab.edge_delta[idx])
    return g


def apply_homogeneous_bc(field):
    """Zero the boundary dofs; returns the new field and the constrained set."""
    idx = field.mesh.boundary_edge_indices()
    dofs = field.dofs.copy()
    dofs[idx] = 0.0
    return EdgeField(field.mesh, dofs, field.time), idx


def l2_norm(field):
    """L2 norm over the mesh; exact for the degree-5 rule."""
    tab = tables(field.mesh)
    vals = kernels.field_at_quad(field.dofs, field.mesh.tri_edges, tab.basis_q)
    return float(np.sqrt(kernels.quad_vec_l2_sq(vals, tab.quad_w, field.mesh.areas)))


def curl_lp_norm(field, p):
    """Lp norm of the scalar curl; exact because curls are elementwise constant."""
    c = kernels.element_curls(field.dofs, field.mesh.tri_edges,
                              tables(field.mesh).signed_curls)
    return float(np.dot(np.abs(c) ** p, field.mesh.areas) ** (1.0 / p))


def l2_error(field, fn, t=None):
    """L2 distance between the field and a callable reference."""
    tab = tables(field.mesh)
    tt = field.time if t is None else t
    vals = kernels.field_at_quad(field.dofs, field.mesh.tri_edges, tab.basis_q)
    ref = np.asarray(fn(tab.phys_q[..., 0], tab.phys_q[..., 1], tt))
    return float(
        np.sqrt(kernels.quad_vec_l2_sq(vals - ref, tab.quad_w, field.mesh.areas))
    )


def curl_lp_error(field, curl_fn, p, t=None):
    """Lp distance between the elementwise curl and a scalar reference."""
    tab = tables(field.mesh)
    tt = field.time if t is None else t
    c = kernels.element_curls(field.dofs, field.mesh.tri_edges, tab.signed_curls)
    ref = np.asarray(curl_fn(tab.phys_q[..., 0], tab.phys_q[..., 1], tt))
    diff = c[:, None] - ref
    return float(
        kernels.quad_scalar_lp(diff, tab.quad_w, field.mesh.areas, float(p))
        ** (1.0 / p)
    )
