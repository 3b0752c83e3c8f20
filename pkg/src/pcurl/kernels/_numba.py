"""Numba-compiled twins of the numpy kernels.

Plain sequential loops under ``@njit``: no fastmath, no threading, so results
are bitwise reproducible run to run.  ``cache=True`` amortizes compilation
across processes.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def element_curls(dofs, tri_edges, signed_curls):
    nt = tri_edges.shape[0]
    out = np.empty(nt)
    for t in range(nt):
        acc = 0.0
        for k in range(3):
            acc += dofs[tri_edges[t, k]] * signed_curls[t, k]
        out[t] = acc
    return out


@njit(cache=True)
def scatter_edge_values(vals, tri_edges, n_edges):
    out = np.zeros(n_edges)
    nt = tri_edges.shape[0]
    for t in range(nt):
        for k in range(3):
            out[tri_edges[t, k]] += vals[t, k]
    return out


@njit(cache=True)
def field_at_quad(dofs, tri_edges, basis_q):
    nt, _, nq, _ = basis_q.shape
    out = np.zeros((nt, nq, 2))
    for t in range(nt):
        for k in range(3):
            c = dofs[tri_edges[t, k]]
            for q in range(nq):
                out[t, q, 0] += c * basis_q[t, k, q, 0]
                out[t, q, 1] += c * basis_q[t, k, q, 1]
    return out


@njit(cache=True)
def quad_vec_l2_sq_per_tri(vals, weights, areas):
    nt, nq, _ = vals.shape
    out = np.empty(nt)
    for t in range(nt):
        acc = 0.0
        for q in range(nq):
            acc += weights[q] * (vals[t, q, 0] ** 2 + vals[t, q, 1] ** 2)
        out[t] = 2.0 * areas[t] * acc
    return out


@njit(cache=True)
def quad_vec_l2_sq(vals, weights, areas):
    per = quad_vec_l2_sq_per_tri(vals, weights, areas)
    total = 0.0
    for t in range(per.shape[0]):
        total += per[t]
    return total


@njit(cache=True)
def quad_scalar_lp(vals, weights, areas, p):
    nt, nq = vals.shape
    total = 0.0
    for t in range(nt):
        acc = 0.0
        for q in range(nq):
            acc += weights[q] * np.abs(vals[t, q]) ** p
        total += 2.0 * areas[t] * acc
    return total


@njit(cache=True)
def load_vector(fq, basis_q, weights, areas, tri_edges, n_edges):
    nt, _, nq, _ = basis_q.shape
    out = np.zeros(n_edges)
    for t in range(nt):
        for k in range(3):
            acc = 0.0
            for q in range(nq):
                acc += weights[q] * (
                    fq[t, q, 0] * basis_q[t, k, q, 0]
                    + fq[t, q, 1] * basis_q[t, k, q, 1]
                )
            out[tri_edges[t, k]] += 2.0 * areas[t] * acc
    return out


@njit(cache=True)
def jacobian_entries(flux_prime, signed_curls, areas):
    nt = areas.shape[0]
    out = np.empty((nt, 3, 3))
    for t in range(nt):
        w = flux_prime[t] * areas[t]
        for i in range(3):
            for j in range(3):
                out[t, i, j] = w * signed_curls[t, i] * signed_curls[t, j]
    return out


@njit(cache=True)
def mass_entries(basis_q, weights, areas):
    nt, _, nq, _ = basis_q.shape
    out = np.empty((nt, 3, 3))
    for t in range(nt):
        for i in range(3):
            for j in range(3):
                acc = 0.0
                for q in range(nq):
                    acc += weights[q] * (
                        basis_q[t, i, q, 0] * basis_q[t, j, q, 0]
                        + basis_q[t, i, q, 1] * basis_q[t, j, q, 1]
                    )
                out[t, i, j] = 2.0 * areas[t] * acc
    return out


@njit(cache=True)
def normal_jump_integral(dofs, side_edges, normal_trace, gauss_w, lengths):
    m, _, _, ng = normal_trace.shape
    out = np.empty(m)
    for e in range(m):
        acc = 0.0
        for g in range(ng):
            left = 0.0
            right = 0.0
            for k in range(3):
                left += dofs[side_edges[e, 0, k]] * normal_trace[e, 0, k, g]
                right += dofs[side_edges[e, 1, k]] * normal_trace[e, 1, k, g]
            jump = left - right
            acc += gauss_w[g] * jump * jump
        out[e] = lengths[e] * acc
    return out
