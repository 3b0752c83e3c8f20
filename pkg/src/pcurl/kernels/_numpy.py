"""Vectorized numpy implementations of the per-element hot loops.

Every function here has a loop-for-loop twin in ``_numba``; both operate on
plain contiguous arrays so the backends can be swapped without touching the
callers.  Accumulation order is fixed (element index, then quadrature index),
which keeps results reproducible bit-for-bit within one backend.
"""

import numpy as np


def element_curls(dofs, tri_edges, signed_curls):
    """Scalar curl of an edge field, one constant value per triangle.

    Parameters
    ----------
    dofs : (ne,) float array
        Edge coefficients.
    tri_edges : (nt, 3) int array
        Global edge index per local edge.
    signed_curls : (nt, 3) float array
        Curl of each local basis function (orientation sign folded in).
    """
    return np.sum(dofs[tri_edges] * signed_curls, axis=1)


def scatter_edge_values(vals, tri_edges, n_edges):
    """Accumulate per-(triangle, local edge) values into a global edge vector."""
    return np.bincount(tri_edges.ravel(), weights=vals.ravel(), minlength=n_edges)


def field_at_quad(dofs, tri_edges, basis_q):
    """Evaluate an edge field at the volume quadrature points.

    ``basis_q`` holds the oriented basis values, shape (nt, 3, nq, 2); the
    result has shape (nt, nq, 2).
    """
    return np.einsum("tk,tkqd->tqd", dofs[tri_edges], basis_q)


def quad_vec_l2_sq_per_tri(vals, weights, areas):
    """Elementwise squared L2 norm of a vector-valued quadrature table."""
    sq = np.einsum("tqd,tqd->tq", vals, vals)
    return 2.0 * areas * (sq @ weights)


def quad_vec_l2_sq(vals, weights, areas):
    return float(np.sum(quad_vec_l2_sq_per_tri(vals, weights, areas)))


def quad_scalar_lp(vals, weights, areas, p):
    """Integral of |vals|^p over the mesh; ``vals`` sampled per quad point."""
    return float(2.0 * np.dot(areas, (np.abs(vals) ** p) @ weights))


def load_vector(fq, basis_q, weights, areas, tri_edges, n_edges):
    """Assemble the load vector from forcing values at the quadrature points."""
    loc = np.einsum("tqd,tkqd,q->tk", fq, basis_q, weights)
    loc *= 2.0 * areas[:, None]
    return scatter_edge_values(loc, tri_edges, n_edges)


def jacobian_entries(flux_prime, signed_curls, areas):
    """Local 3x3 curl-curl blocks flux'(c_K) * curl(phi_i) * curl(phi_j) * |K|."""
    w = flux_prime * areas
    return w[:, None, None] * signed_curls[:, :, None] * signed_curls[:, None, :]


def mass_entries(basis_q, weights, areas):
    """Local 3x3 mass blocks; exact for the degree-5 rule (integrand quadratic)."""
    m = np.einsum("tiqd,tjqd,q->tij", basis_q, basis_q, weights)
    return 2.0 * areas[:, None, None] * m


def normal_jump_integral(dofs, side_edges, normal_trace, gauss_w, lengths):
    """Integral over each interior edge of the squared normal-trace jump.

    Parameters
    ----------
    dofs : (ne,) float array
    side_edges : (m, 2, 3) int array
        Global edge indices of the two adjacent triangles' local edges.
    normal_trace : (m, 2, 3, ng) float array
        Normal component of each oriented basis function at the edge Gauss
        points, per side.
    gauss_w : (ng,) float array
        Reference-edge weights summing to one.
    lengths : (m,) float array
        Physical edge lengths.
    """
    left = np.einsum("ek,ekg->eg", dofs[side_edges[:, 0]], normal_trace[:, 0])
    right = np.einsum("ek,ekg->eg", dofs[side_edges[:, 1]], normal_trace[:, 1])
    jump = left - right
    return lengths * ((jump * jump) @ gauss_w)
