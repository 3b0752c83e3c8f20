"""Exact solution families: PDE residual by finite differences, closed forms."""

import numpy as np
import pytest
from scipy import integrate

import pcurl
from pcurl import manufactured, nedelec


def _pde_residual_fd(case, x, y, t, h=1.0e-4, ht=1.0e-5):
    """du/dt + curl(flux(curl u)) - f by nested central differences.

    curl u is itself differenced, so the flux sees no analytic shortcuts; the
    vector curl of a scalar g is (dg/dy, -dg/dx).
    """
    p = case.params.p
    alpha = case.params.alpha

    def curl_u(xx, yy):
        dy = case.field(xx, yy + h, t) - case.field(xx, yy - h, t)
        dx = case.field(xx + h, yy, t) - case.field(xx - h, yy, t)
        return (dx[..., 1] - dy[..., 0]) / (2.0 * h)

    def g(xx, yy):
        c = curl_u(xx, yy)
        return alpha * np.abs(c) ** (p - 2.0) * c

    curl_g = np.stack(
        [
            (g(x, y + h) - g(x, y - h)) / (2.0 * h),
            -(g(x + h, y) - g(x - h, y)) / (2.0 * h),
        ],
        axis=-1,
    )
    dudt = (case.field(x, y, t + ht) - case.field(x, y, t - ht)) / (2.0 * ht)
    return dudt + curl_g - case.forcing(x, y, t)


def _ring_points(radii, n=8):
    theta = 2.0 * np.pi * (np.arange(n) + 0.3) / n
    x = np.concatenate([r * np.cos(theta) for r in radii])
    y = np.concatenate([r * np.sin(theta) for r in radii])
    return x, y


@pytest.mark.parametrize("a,b,p", [(1.0, 1.0, 5.0), (2.0, 2.0, 5.0), (2.0, 1.0, 3.0)])
def test_radial_smooth_solves_pde(a, b, p):
    case = pcurl.radial_smooth_case(a=a, b=b, p=p, t_end=1.0)
    x, y = _ring_points([0.35, 0.6, 0.85])
    res = _pde_residual_fd(case, x, y, 0.7)
    scale = np.max(np.abs(case.forcing(x, y, 0.7)))
    assert np.max(np.abs(res)) < 1.0e-5 * max(scale, 1.0)


@pytest.mark.parametrize("a,p", [(3.0, 3.0), (2.0, 5.0), (3.0, 25.0)])
def test_moving_front_solves_pde(a, p):
    # evaluation stays away from the front kink and the origin
    case = pcurl.moving_front_case(a=a, p=p, t_end=1.0)
    t = 0.8
    x, y = _ring_points([0.5, 0.7, 0.9])
    res = _pde_residual_fd(case, x, y, t)
    scale = np.max(np.abs(case.forcing(x, y, t)))
    assert np.max(np.abs(res)) < 1.0e-5 * max(scale, 1.0)


def test_radial_smooth_point_values():
    case = pcurl.radial_smooth_case(a=2.0, b=1.0, p=5.0, t_end=1.0)
    # r = 0.5: u = t r^(a-1) (-y, x), curl = (a+1) r^(a-1) t
    u = case.field(0.3, 0.4, 2.0)
    assert np.allclose(u, [-0.4, 0.3])
    assert case.curl(0.3, 0.4, 2.0) == pytest.approx(3.0)


def test_moving_front_point_values():
    case = pcurl.moving_front_case(a=3.0, p=25.0, t_end=1.0)
    # r=0.8, t=0.5: s=0.3, |u| = s^a, curl = s^(a-1)(a+1 - (1-t)/r)
    u = case.field(0.8, 0.0, 0.5)
    assert np.allclose(u, [0.0, 0.027], atol=1.0e-15)
    assert case.curl(0.8, 0.0, 0.5) == pytest.approx(0.09 * (4.0 - 0.5 / 0.8))
    # ahead of the front everything vanishes
    assert np.all(case.field(0.1, 0.1, 0.5) == 0.0)
    assert case.curl(0.1, 0.1, 0.5) == 0.0
    assert np.all(case.forcing(0.1, 0.1, 0.5) == 0.0)


def test_field_regular_at_origin():
    case = pcurl.radial_smooth_case(a=1.0, b=1.0, p=5.0, t_end=1.0)
    assert np.all(np.isfinite(case.field(0.0, 0.0, 1.0)))
    assert np.all(np.isfinite(case.forcing(0.0, 0.0, 1.0)))
    front = pcurl.moving_front_case(a=3.0, p=5.0, t_end=2.0)
    assert np.all(np.isfinite(front.forcing(0.0, 0.0, 1.5)))


def test_variant_validation():
    with pytest.raises(ValueError, match="radial exponent"):
        manufactured.RadialSmooth(a=0.5, b=1.0)
    with pytest.raises(ValueError, match="time exponent"):
        manufactured.RadialSmooth(a=1.0, b=0.0)
    with pytest.raises(ValueError, match="front exponent"):
        manufactured.MovingFront(a=0.9)
    with pytest.raises(ValueError, match="t_end"):
        pcurl.radial_smooth_case(a=1.0, b=1.0, p=5.0, t_end=0.0)


def test_front_regularity_marker():
    assert pcurl.moving_front_case(a=3.0, p=25.0, t_end=0.1).front_in_w1p
    assert not pcurl.moving_front_case(a=1.6, p=10.0, t_end=0.1).front_in_w1p
    assert pcurl.radial_smooth_case(a=1.0, b=1.0, p=5.0, t_end=0.1).front_in_w1p


def test_initial_fields():
    mesh = pcurl.disk_mesh(1)
    front = pcurl.moving_front_case(a=3.0, p=25.0, t_end=0.1)
    assert np.all(front.initial_field(mesh).dofs == 0.0)
    smooth = pcurl.radial_smooth_case(a=2.0, b=1.0, p=5.0, t_end=0.1)
    assert np.max(np.abs(smooth.initial_field(mesh).dofs)) < 1.0e-15


def test_boundary_fn_matches_interpolant():
    mesh = pcurl.disk_mesh(1)
    case = pcurl.radial_smooth_case(a=2.0, b=1.0, p=5.0, t_end=1.0)
    g = case.boundary_fn(mesh)(0.5)
    full = pcurl.interpolate(case.field, mesh, 0.5)
    b = mesh.boundary_edge_indices()
    assert np.allclose(g[b], full.dofs[b])
    assert np.all(g[mesh.interior_edge_indices()] == 0.0)


def test_radial_smooth_ac_loss_closed_form():
    # (1/T) int_0^T int_disk |curl u|^p = 2 pi (a+1)^p T^(bp) / ((ap-p+2)(bp+1))
    for a, b, p, T in [(2.0, 1.0, 5.0, 0.3), (1.0, 2.0, 5.0, 0.7)]:
        case = pcurl.radial_smooth_case(a=a, b=b, p=p, t_end=T)
        expect = (
            2.0 * np.pi * (a + 1.0) ** p * T ** (b * p)
            / (((a - 1.0) * p + 2.0) * (b * p + 1.0))
        )
        got = manufactured.ac_loss_exact(case)
        assert got == pytest.approx(expect, rel=1.0e-7)


def test_moving_front_ac_loss_against_adaptive_quadrature():
    case = pcurl.moving_front_case(a=2.0, p=3.0, t_end=0.4)

    def spatial(t):
        val, _ = integrate.quad(
            lambda r: np.abs(case._curl_radial(r, t)) ** 3.0 * r,
            1.0 - t,
            1.0,
            epsabs=1.0e-13,
            epsrel=1.0e-12,
        )
        return 2.0 * np.pi * val

    ref, _ = integrate.quad(spatial, 0.0, 0.4, epsabs=1.0e-13, epsrel=1.0e-11)
    ref /= 0.4
    got = manufactured.ac_loss_exact(case)
    assert got == pytest.approx(ref, rel=1.0e-7)


def test_ac_loss_horizon_override():
    case = pcurl.radial_smooth_case(a=1.0, b=1.0, p=5.0, t_end=1.0)
    full = manufactured.ac_loss_exact(case)
    half = manufactured.ac_loss_exact(case, t_end=0.5)
    # Q scales like T^(bp) here
    assert half == pytest.approx(full * 0.5**5, rel=1.0e-6)
