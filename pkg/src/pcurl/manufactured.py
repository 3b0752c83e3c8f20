"""Azimuthal manufactured solutions on the unit disk.

Both families have the form u = g(r, t) phihat with phihat = (-y/r, x/r), so
the scalar curl is (1/r) d(r g)/dr and the forcing follows from substituting
into the evolution law f = du/dt + curl(flux(curl u)).  For a radial flux
profile s(r), the vector curl of s zhat is -s'(r) phihat, which is how the
closed forms below arise.

``radial_smooth``: g = r^a t^b, curl = (a+1) r^(a-1) t^b.  With a = 1 the
flux is spatially constant, its curl drops out, and the solution lies in the
lowest-order edge space at every time, so the discrete solver reproduces it
to solver tolerance.

``moving_front``: g = (r-1+t)^a for r > 1-t, else 0.  The support is an
annulus that grows inward from the boundary at unit speed; the profile is in
W^{1,p} near the front exactly when a > 2 - 1/p (recorded, not enforced).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .assembly import PowerLawParams
from . import nedelec


@dataclass(frozen=True)
class RadialSmooth:
    """Power-law profile r^a t^b; a >= 1 keeps the curl bounded."""

    a: float
    b: float

    def __post_init__(self):
        if self.a < 1.0:
            raise ValueError(f"radial exponent a must be >= 1, got {self.a}")
        if self.b <= 0.0:
            raise ValueError(f"time exponent b must be positive, got {self.b}")


@dataclass(frozen=True)
class MovingFront:
    """Front profile (r-1+t)^a on the annulus r > 1-t."""

    a: float

    def __post_init__(self):
        if self.a < 1.0:
            raise ValueError(f"front exponent a must be >= 1, got {self.a}")


def _phihat_times(coef, x, y):
    """coef * (-y, x) stacked on a trailing axis."""
    out = np.empty(np.shape(coef) + (2,))
    out[..., 0] = -y * coef
    out[..., 1] = x * coef
    return out


@dataclass(frozen=True)
class ManufacturedCase:
    """A solution family instance together with material law and horizon."""

    variant: object
    params: PowerLawParams
    t_end: float

    def __post_init__(self):
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")

    # pointwise data ---------------------------------------------------------

    def field(self, x, y, t):
        """Exact solution, shape x.shape + (2,)."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        r = np.hypot(x, y)
        v = self.variant
        if isinstance(v, RadialSmooth):
            coef = t**v.b * r ** (v.a - 1.0)
            return _phihat_times(coef, x, y)
        s = r - (1.0 - t)
        mask = s > 0.0
        s_safe = np.where(mask, s, 1.0)
        r_safe = np.where(r > 0.0, r, 1.0)
        coef = np.where(mask, s_safe**v.a / r_safe, 0.0)
        return _phihat_times(coef, x, y)

    def curl(self, x, y, t):
        """Exact scalar curl, shape x.shape."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        r = np.hypot(x, y)
        return self._curl_radial(r, t)

    def _curl_radial(self, r, t):
        v = self.variant
        if isinstance(v, RadialSmooth):
            return (v.a + 1.0) * r ** (v.a - 1.0) * np.asarray(t) ** v.b
        s = np.asarray(r) - (1.0 - np.asarray(t))
        mask = s > 0.0
        s_safe = np.where(mask, s, 1.0)
        r_safe = np.where(np.asarray(r) > 0.0, r, 1.0)
        j = s_safe ** (v.a - 1.0) * (v.a + 1.0 - (1.0 - np.asarray(t)) / r_safe)
        return np.where(mask, j, 0.0)

    def forcing(self, x, y, t):
        """Right-hand side matching the evolution law, shape x.shape + (2,)."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        r = np.hypot(x, y)
        v = self.variant
        p = self.params.p
        alpha = self.params.alpha
        if isinstance(v, RadialSmooth):
            a, b = v.a, v.b
            # f_theta = b r^a t^(b-1) - alpha (a-1)(p-1) ((a+1) t^b)^(p-1)
            #           * r^((a-1)(p-1)-1); the second term is the radial
            #           derivative of the flux profile and vanishes for a = 1.
            coef = b * t ** (b - 1.0) * r ** (a - 1.0)
            if a > 1.0:
                e2 = (a - 1.0) * (p - 1.0) - 2.0
                mask = r > 0.0
                r_safe = np.where(mask, r, 1.0)
                c2 = alpha * (a - 1.0) * (p - 1.0) * ((a + 1.0) * t**b) ** (p - 1.0)
                coef = coef - np.where(mask, c2 * r_safe**e2, 0.0)
            return _phihat_times(coef, x, y)
        a = v.a
        s = r - (1.0 - t)
        mask = s > 0.0
        s_safe = np.where(mask, s, 1.0)
        r_safe = np.where(r > 0.0, r, 1.0)
        h_t = a * s_safe ** (a - 1.0)
        j = s_safe ** (a - 1.0) * (a + 1.0 - (1.0 - t) / r_safe)
        j_r = (a - 1.0) * s_safe ** (a - 2.0) * (
            a + 1.0 - (1.0 - t) / r_safe
        ) + s_safe ** (a - 1.0) * (1.0 - t) / r_safe**2
        f_theta = h_t - alpha * (p - 1.0) * np.abs(j) ** (p - 2.0) * j_r
        coef = np.where(mask, f_theta / r_safe, 0.0)
        return _phihat_times(coef, x, y)

    # discrete data ----------------------------------------------------------

    def initial_field(self, mesh):
        """Interpolated initial state; identically zero for the front family."""
        if isinstance(self.variant, MovingFront):
            return nedelec.zero_field(mesh, 0.0)
        return nedelec.interpolate(self.field, mesh, 0.0)

    def boundary_fn(self, mesh):
        """Callable t -> dof vector carrying the exact tangential trace."""

        def values(t):
            return nedelec.boundary_values(self.field, mesh, t)

        return values

    @property
    def front_in_w1p(self):
        """Whether the front profile sits in W^{1,p}; informational."""
        if isinstance(self.variant, MovingFront):
            return self.variant.a > 2.0 - 1.0 / self.params.p
        return True


@lru_cache(maxsize=8)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


def _curl_pow_disk(case, ts, order):
    """Integral of |curl u|^p over the exact disk at each time in ``ts``."""
    p = case.params.p
    if isinstance(case.variant, MovingFront):
        r_lo = np.maximum(1.0 - ts, 0.0)
    else:
        r_lo = np.zeros_like(ts)
    nodes, weights = _leggauss(order)
    half = 0.5 * (1.0 - r_lo)
    r = r_lo[:, None] + half[:, None] * (nodes[None, :] + 1.0)
    j = case._curl_radial(r, ts[:, None])
    integrand = np.abs(j) ** p * r
    return 2.0 * np.pi * half * (integrand @ weights)


def curl_pow_disk(case, ts, rel_tol=1.0e-9):
    """Integral of |curl u(t)|^p over the exact disk at each time in ``ts``.

    The radial Gauss order doubles until successive values agree to
    ``rel_tol`` relative; the last refinement is returned either way.
    """
    ts = np.asarray(ts, dtype=np.float64)
    prev = None
    order = 32
    while order <= 512:
        vals = _curl_pow_disk(case, ts, order)
        if prev is not None:
            scale = np.maximum(np.abs(vals), 1.0e-300)
            if np.all(np.abs(vals - prev) <= rel_tol * scale):
                return vals
        prev = vals
        order *= 2
    return prev


def ac_loss_exact(case, t_end=None, rel_tol=1.0e-8):
    """Reference AC loss (1/T) integral of ||curl u||_p^p over [0, T].

    Time integration is composite midpoint with doubling; the radial integral
    uses Gauss panels whose order doubles until stable.  Both loops stop when
    successive values agree to ``rel_tol`` relative.
    """
    t_final = case.t_end if t_end is None else t_end

    prev_q = None
    n = 64
    while n <= 2**21:
        dt = t_final / n
        total = 0.0
        for start in range(0, n, 16384):
            k = np.arange(start, min(start + 16384, n))
            tm = (k + 0.5) * dt
            total += float(np.sum(curl_pow_disk(case, tm)))
        q = total * dt / t_final
        if prev_q is not None and abs(q - prev_q) <= rel_tol * max(abs(q), 1e-300):
            return q
        prev_q = q
        n *= 2
    raise ArithmeticError("AC loss reference quadrature did not converge")


def radial_smooth_case(a, b, p, t_end, alpha=1.0):
    return ManufacturedCase(RadialSmooth(a, b), PowerLawParams(p, alpha), t_end)


def moving_front_case(a, p, t_end, alpha=1.0):
    return ManufacturedCase(MovingFront(a), PowerLawParams(p, alpha), t_end)
