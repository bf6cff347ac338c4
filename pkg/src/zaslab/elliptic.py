"""Radial harmonic functions, capacities and the Dirichlet energy.

For ``g = phi**4 delta`` the Laplace equation on radial functions reduces
to ``(r**2 phi**2 h')' = 0``, so ``h' = c / (r**2 phi**2)`` and everything
is driven by the integral

    I(a, b) = int_a^b ds / (s**2 phi(s)**2).

The outer piece is mapped by ``u = 1/s`` onto a bounded interval where the
integrand tends to ``1/phi(inf)**2 = 1``; the inner piece uses
``s = r_min + exp(t)`` so the endpoint blow-up near a singularity turns
into a smooth exponential.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, ClassVar

from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .errors import DomainError, MismatchError, QuadratureError
from .geometry import RadialProfile, profile_from_dict, profile_to_dict, register_kind
from .limits import LimitEstimate, extrapolate, shrinking_radii

__all__ = [
    "HarmonicFunction",
    "HarmonicProduct",
    "inverse_flux_integral",
    "solve_harmonic",
    "capacity_surface",
    "capacity_limit",
    "capacity_zas",
    "energy",
    "harmonic_factor_profile",
]

FOUR_PI = 4.0 * math.pi
REL_TOL = 1e-10
CAPACITY_ZERO_TOL = 1e-10


def _quad_raw(f, a, b):
    with warnings.catch_warnings():
        # QUADPACK warnings are judged by the returned error estimate instead
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=400)


def _checked(val, err, what, a, b):
    if not (math.isfinite(val) and err <= max(REL_TOL * abs(val), 1e-300)):
        raise QuadratureError(f"{what} on [{a!r}, {b!r}] did not reach rel-tol {REL_TOL}")
    return val


def _quad(f, a, b, what):
    val, err = _quad_raw(f, a, b)
    return _checked(val, err, what, a, b)


def _log_chunks(t0, t1, width=2.0):
    n = max(1, math.ceil((t1 - t0) / width))
    edges = [t0 + (t1 - t0) * k / n for k in range(n + 1)]
    return list(zip(edges, edges[1:]))


def _near_integral(f, profile: RadialProfile, a: float, b: float, what: str) -> float:
    """``int_a^b f(s, phi(s)) ds`` with ``s = r_min + exp(t)``.

    ``phi`` comes from :meth:`RadialProfile.derivs_near`, so the offset
    from the singular sphere is never recovered by cancellation.  The error
    budget applies to the whole interval.
    """
    if b <= a:
        return 0.0
    lo = profile.r_min if profile.r_min > 0 else 0.0
    t0, t1 = math.log(a - lo), math.log(b - lo)
    if lo > 0:
        def g(t):
            e = math.exp(t)
            return f(lo + e, profile.derivs_near(e)[0]) * e
    else:
        def g(t):
            e = math.exp(t)
            return f(e, profile.phi(e)) * e

    parts = [_quad_raw(g, x, y) for x, y in _log_chunks(t0, t1)]
    return _checked(sum(p[0] for p in parts), sum(p[1] for p in parts), what, a, b)


def _tail_integrand(profile: RadialProfile):
    def g(u):
        if u == 0.0:
            return 1.0
        return 1.0 / profile.phi(1.0 / u) ** 2
    return g


def inverse_flux_integral(profile: RadialProfile, a: float, b: float = math.inf) -> float:
    """``int_a^b ds / (s**2 phi**2)``; ``b`` may be infinite."""
    if not a > profile.r_min:
        raise DomainError(f"inner radius {a!r} must exceed r_min={profile.r_min!r}")
    if b <= a:
        return 0.0

    def f(s, phi):
        return 1.0 / (s * s * phi * phi)

    scale = max(profile.r_scale, a - profile.r_min)
    split = min(b, profile.r_max, max(4.0 * a, a + 4.0 * scale))
    total = _near_integral(f, profile, a, split, "flux integral")
    if b <= split:
        return total
    if profile.r_max < math.inf:
        # beyond the table: phi ~ 1 + k/s with k read off the last sample
        hi = profile.r_max
        k = hi * (profile.phi(hi) - 1.0)
        if b < math.inf:
            raise DomainError("finite outer radius beyond tabulated range")
        u = 1.0 / hi
        return total + u / (1.0 + k * u)
    if b < math.inf:
        return total + _near_integral(f, profile, split, b, "flux integral")
    return total + _quad(_tail_integrand(profile), 0.0, 1.0 / split, "flux tail")


def _monopole_ratio(profile: RadialProfile) -> float:
    """``lim r * I(r, inf)`` by Richardson extrapolation (analytically 1)."""
    if profile.r_max < math.inf:
        # the analytic tail u / (1 + k u) has exactly this limit
        return 1.0
    r = 2.0**20 * max(profile.r_scale, profile.r_min, 1e-300)
    g = _tail_integrand(profile)
    a = r * _quad(g, 0.0, 1.0 / r, "monopole")
    b = 2.0 * r * _quad(g, 0.0, 0.5 / r, "monopole")
    return 2.0 * b - a


@dataclass(frozen=True)
class HarmonicFunction:
    """Radial ``g``-harmonic function, 0 on the inner sphere.

    ``h = outer_value`` on the sphere of radius ``outer_radius`` (infinity by
    default, where ``h -> 1``).  ``c`` is the flux constant,
    ``h' = c / (r**2 phi**2)``, and ``C`` the coefficient in
    ``h = 1 - C/r + o(1/r)``.
    """

    profile: RadialProfile
    inner_radius: float
    c: float
    C: float
    outer_radius: float = math.inf

    def evaluate(self, r: float) -> float:
        if r < self.inner_radius:
            raise DomainError("harmonic function evaluated inside its inner sphere")
        return self.c * inverse_flux_integral(self.profile, self.inner_radius, r)

    def __call__(self, r: float) -> float:
        return self.evaluate(r)

    def derivative(self, r: float) -> float:
        return self.c / (r * r * self.profile.phi(r) ** 2)

    def normal_derivative(self, r: float) -> float:
        """``|grad h|_g`` on the sphere of radius ``r``."""
        return self.c / (r * r * self.profile.phi(r) ** 4)


def solve_harmonic(profile: RadialProfile, r_inner: float,
                   r_outer: float = math.inf) -> HarmonicFunction:
    integral = inverse_flux_integral(profile, r_inner, r_outer)
    if not (integral > 0 and math.isfinite(integral)):
        raise QuadratureError(f"flux integral from {r_inner!r} is {integral!r}")
    c = 1.0 / integral
    big_c = c * _monopole_ratio(profile) if r_outer == math.inf else math.nan
    return HarmonicFunction(profile, r_inner, c, big_c, r_outer)


def capacity_surface(profile: RadialProfile, r: float) -> float:
    """Capacity ``inf int |grad u|**2 dV`` of the sphere at ``r`` (flat unit sphere: 4 pi)."""
    return FOUR_PI * solve_harmonic(profile, r).c


def capacity_limit(profile: RadialProfile, radii=None) -> LimitEstimate:
    """Extrapolated capacities of spheres shrinking to ``r_min``."""
    if not profile.r_min > 0:
        raise DomainError(f"{profile.label} has no singular sphere")
    if radii is None:
        radii = shrinking_radii(profile.r_min)
    values = [capacity_surface(profile, r) for r in radii]
    est = extrapolate(values, allow_divergence=False)
    if abs(est.value) < CAPACITY_ZERO_TOL or est.value < 0:
        est.value = 0.0
    return est


def capacity_zas(profile: RadialProfile, radii=None) -> float:
    return capacity_limit(profile, radii).value


def energy(profile: RadialProfile, u: Callable[[float], float], r_inner: float,
           du: Callable[[float], float] | None = None, breakpoints=()) -> float:
    """Dirichlet energy ``4 pi int phi**2 r**2 u'**2 dr`` outside ``r_inner``.

    ``u`` must equal 1 on the inner sphere and vanish at infinity.  Without
    ``du`` a central difference is used.  ``breakpoints`` lists radii
    where ``u'`` jumps.
    """
    if abs(u(r_inner) - 1.0) > 1e-12:
        raise DomainError("test function must equal 1 on the inner sphere")
    if du is None:
        def du(r, _u=u):
            h = 1e-6 * max(r, 1e-3)
            return (_u(r + h) - _u(r - h)) / (2.0 * h)

    def f(r):
        return profile.phi(r) ** 2 * r * r * du(r) ** 2

    scale = max(profile.r_scale, r_inner)
    cut = max([4.0 * r_inner, r_inner + 4.0 * scale] + [b for b in breakpoints])
    edges = sorted({r_inner, cut, *[b for b in breakpoints if r_inner < b < cut]})
    total = sum(_quad(f, a, b, "energy") for a, b in zip(edges, edges[1:]) if b > a)

    def g(v):
        if v == 0.0:
            return 0.0
        r = 1.0 / v
        return f(r) / (v * v)

    return FOUR_PI * (total + _quad(g, 0.0, 1.0 / cut, "energy tail"))


@dataclass(frozen=True)
class HarmonicProduct(RadialProfile):
    """``base`` multiplied by the ``base``-harmonic factor ``1 + C * I(r, inf)``.

    The factor tends to ``1 + C/r`` at infinity.  For ``C < 0`` it vanishes
    on a sphere outside the base singularity, which then becomes the new
    (regular) singular sphere.
    """

    kind: ClassVar[str] = "harmonicProduct"
    base: RadialProfile
    C: float
    _zero: float = field(init=False, repr=False, compare=False)
    _cache: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_cache", {})
        zero = self.base.r_min
        if self.C < 0:
            target = -1.0 / self.C
            lo = self.base.r_min
            hi = lo + max(self.base.r_scale, 1e-3)
            while self._integral(hi) > target:
                hi *= 2.0
            probe = lo + (hi - lo) * 2.0**-30 if lo > 0 else hi * 2.0**-30
            if self._integral(probe) > target:
                zero = brentq(lambda r: self._integral(r) - target, probe, hi,
                              xtol=1e-15, rtol=1e-15)
        object.__setattr__(self, "_zero", zero)

    def _integral(self, r):
        v = self._cache.get(r)
        if v is None:
            v = inverse_flux_integral(self.base, r)
            self._cache[r] = v
        return v

    @property
    def _new_zero(self):
        return self._zero > self.base.r_min

    def _factor_near(self, delta):
        """Factor at ``zero + delta`` as ``-C * int_zero^(zero+delta)``, free of cancellation."""
        z, base = self._zero, self.base

        def g(v):
            s = z + delta * v
            return 1.0 / (s * s * base.phi(s) ** 2)

        return -self.C * delta * _quad(g, 0.0, 1.0, "harmonic factor")

    @property
    def r_min(self):
        return self._zero

    @property
    def r_max(self):
        return self.base.r_max

    @property
    def r_scale(self):
        return max(self.base.r_scale, self._zero)

    @property
    def endpoint_ok(self):
        return self._new_zero

    @property
    def label(self):
        return f"harmonicProduct({self.base.label}, C={self.C:g})"

    def params(self):
        return {"base": profile_to_dict(self.base), "C": self.C}

    def _combine(self, r, w, f, df, ddf):
        C = self.C
        dw = -C / (r * r * f * f)
        ddw = C * (2.0 / (r**3 * f * f) + 2.0 * df / (r * r * f**3))
        return f * w, df * w + f * dw, ddf * w + 2.0 * df * dw + f * ddw

    def derivs_near(self, delta):
        if not self._new_zero:
            f = self.base.derivs_near(delta)
            r = self.base.r_min + delta
            return self._combine(r, 1.0 + self.C * self._integral(r), *f)
        if not delta >= 0:
            raise DomainError("negative offset from r_min")
        r = self._zero + delta
        w = self._factor_near(delta) if delta > 0 else 0.0
        return self._combine(r, w, *self.base.derivs(r))

    def _derivs(self, r):
        if self._new_zero and r - self._zero < 0.5 * self.r_scale:
            return self.derivs_near(r - self._zero)
        return self._combine(r, 1.0 + self.C * self._integral(r), *self.base._derivs(r))


def harmonic_factor_profile(base: RadialProfile, C: float) -> HarmonicProduct:
    return HarmonicProduct(base, float(C))


def _harmonic_product(params: dict) -> HarmonicProduct:
    from .errors import ParseError

    if set(params) != {"base", "C"}:
        raise ParseError("harmonicProduct takes exactly 'base' and 'C'")
    c = params["C"]
    if isinstance(c, bool) or not isinstance(c, (int, float)):
        raise ParseError("harmonicProduct 'C' must be a number")
    return HarmonicProduct(profile_from_dict(params["base"]), float(c))


register_kind("harmonicProduct", _harmonic_product)


def check_vanishes_on(h: HarmonicFunction, r: float) -> None:
    if abs(h.inner_radius - r) > 1e-12 * max(1.0, abs(r)):
        raise MismatchError(f"harmonic function vanishes at {h.inner_radius!r}, not {r!r}")
