"""Spherically symmetric, conformally flat metrics ``g = phi(r)**4 * delta``.

A profile is the radial conformal factor ``phi`` on ``r > r_min`` together
with its first two derivatives.  Surfaces are the centered coordinate
spheres, so every geometric quantity of a surface reduces to a function of
its coordinate radius.

Resolutions of a regular zero area singularity are kept in the radial gauge:
the background metric is ``lambda(r)**4 * delta`` and the conformal function
is ``phi / lambda``.  Their product metric never depends on ``lambda``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, InterpolationError, ParseError

__all__ = [
    "RadialProfile",
    "Flat",
    "NegSchwarzschild",
    "PosSchwarzschild",
    "PowerLaw",
    "Boosted",
    "Tabulated",
    "Bumped",
    "SphereGeometry",
    "Weight",
    "Resolution",
    "ValidityReport",
    "evaluate_profile",
    "sphere_area",
    "sphere_geometry",
    "scalar_curvature",
    "is_superharmonic_at",
    "mean_curvature_transform",
    "rescale_resolution",
    "validate_profile",
    "profile_from_dict",
    "profile_to_dict",
    "register_kind",
]

FOUR_PI = 4.0 * math.pi


class RadialProfile:
    """Base class for conformal factors.

    Subclasses provide ``kind``, ``r_min`` and :meth:`_derivs`.  The
    endpoint ``r == r_min`` may be evaluated only when
    ``endpoint_ok`` is true (one-sided limits of regular singularities).
    """

    kind: ClassVar[str] = ""
    asymptotic_order: ClassVar[int] = 1

    @property
    def r_min(self) -> float:
        raise NotImplementedError

    @property
    def r_max(self) -> float:
        return math.inf

    @property
    def r_scale(self) -> float:
        return 1.0

    @property
    def endpoint_ok(self) -> bool:
        return False

    @property
    def label(self) -> str:
        args = ", ".join(f"{k}={v:g}" for k, v in self.params().items()
                         if isinstance(v, (int, float)))
        return f"{self.kind}({args})"

    def params(self) -> dict:
        return {}

    def _derivs(self, r: float) -> tuple[float, float, float]:
        raise NotImplementedError

    def check(self, r: float) -> None:
        if not r >= self.r_min:
            raise DomainError(f"r={r!r} below r_min={self.r_min!r} for {self.kind}")
        if r == self.r_min and not self.endpoint_ok:
            raise DomainError(f"{self.kind} cannot be evaluated at r_min={r!r}")
        if r > self.r_max:
            raise InterpolationError(f"r={r!r} beyond tabulated range {self.r_max!r}")

    def derivs(self, r: float) -> tuple[float, float, float]:
        r = float(r)
        self.check(r)
        return self._derivs(r)

    def derivs_near(self, delta: float) -> tuple[float, float, float]:
        """Derivatives at ``r_min + delta``, exact in ``delta`` where the kind allows.

        Closed forms override this so that ``r - r_min`` is never formed by
        cancellation close to the singular sphere.
        """
        return self.derivs(self.r_min + delta)

    def laplacian(self, r: float) -> float:
        """Flat radial Laplacian ``phi'' + 2 phi'/r``; closed forms override."""
        _, dphi, ddphi = self.derivs(r)
        return ddphi + 2.0 * dphi / r

    def phi(self, r: float) -> float:
        return self.derivs(r)[0]

    def __call__(self, r: float) -> float:
        return self.phi(r)


@dataclass(frozen=True)
class Flat(RadialProfile):
    kind: ClassVar[str] = "flat"

    @property
    def r_min(self) -> float:
        return 0.0

    def _derivs(self, r):
        return 1.0, 0.0, 0.0


@dataclass(frozen=True)
class _Schwarzschild(RadialProfile):
    m: float

    def _derivs(self, r):
        m = self.m
        return 1.0 + m / (2.0 * r), -m / (2.0 * r * r), m / r**3

    def laplacian(self, r):
        self.check(float(r))
        return 0.0

    def params(self):
        return {"m": self.m}

    @property
    def r_scale(self):
        return abs(self.m) / 2.0


@dataclass(frozen=True)
class NegSchwarzschild(_Schwarzschild):
    kind: ClassVar[str] = "negSchwarzschild"

    def __post_init__(self):
        if not self.m < 0:
            raise DomainError("negSchwarzschild requires m < 0")

    @property
    def r_min(self):
        return -self.m / 2.0

    @property
    def endpoint_ok(self):
        return True

    def derivs_near(self, delta):
        if not delta >= 0:
            raise DomainError("negative offset from r_min")
        r = self.r_min + delta
        return delta / r, -self.m / (2.0 * r * r), self.m / r**3


@dataclass(frozen=True)
class PosSchwarzschild(_Schwarzschild):
    kind: ClassVar[str] = "posSchwarzschild"

    def __post_init__(self):
        if not self.m > 0:
            raise DomainError("posSchwarzschild requires m > 0")

    @property
    def r_min(self):
        return 0.0


@dataclass(frozen=True)
class PowerLaw(RadialProfile):
    """``phi = ((r - r0) / r)**alpha``; regular at ``r0`` only for alpha = 1."""

    kind: ClassVar[str] = "powerLaw"
    alpha: float
    r0: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.r0 > 0):
            raise DomainError("powerLaw requires alpha > 0 and r0 > 0")

    @property
    def r_min(self):
        return self.r0

    @property
    def r_scale(self):
        return self.r0

    @property
    def endpoint_ok(self):
        return self.alpha == 1.0

    def params(self):
        return {"alpha": self.alpha, "r0": self.r0}

    def derivs_near(self, delta):
        if not delta > 0 and not (delta == 0 and self.endpoint_ok):
            raise DomainError("offset from r_min must be positive")
        return self._derivs(self.r0 + delta, delta)

    def _derivs(self, r, delta=None):
        a, r0 = self.alpha, self.r0
        x = ((r - r0) if delta is None else delta) / r
        dx = r0 / (r * r)
        ddx = -2.0 * r0 / r**3
        if a == 1.0:
            return x, dx, ddx
        if x == 0.0:
            # only reached for alpha > 1
            return 0.0, 0.0, (2.0 * dx * dx if a == 2.0 else 0.0)
        p = x**a
        return (p,
                a * p / x * dx,
                a * (a - 1.0) * p / (x * x) * dx * dx + a * p / x * ddx)


@dataclass(frozen=True)
class Boosted(RadialProfile):
    """``phi = (r - r0)(r + a) / r**2``, superharmonic for ``a > 0``."""

    kind: ClassVar[str] = "boosted"
    r0: float
    a: float

    def __post_init__(self):
        if not (self.r0 > 0 and self.a >= 0):
            raise DomainError("boosted requires r0 > 0 and a >= 0")

    @property
    def r_min(self):
        return self.r0

    @property
    def r_scale(self):
        return max(self.r0, self.a)

    @property
    def endpoint_ok(self):
        return True

    def params(self):
        return {"r0": self.r0, "a": self.a}

    def derivs_near(self, delta):
        if not delta >= 0:
            raise DomainError("negative offset from r_min")
        r = self.r0 + delta
        _, d1, d2 = self._derivs(r)
        return delta * (r + self.a) / (r * r), d1, d2

    def laplacian(self, r):
        # 1/r is harmonic, so only the -a r0 / r**2 term survives
        self.check(float(r))
        return -2.0 * self.a * self.r0 / r**4

    def _derivs(self, r):
        b = self.a - self.r0
        q = self.a * self.r0
        return (1.0 + b / r - q / (r * r),
                -b / (r * r) + 2.0 * q / r**3,
                2.0 * b / r**3 - 6.0 * q / r**4)


@dataclass(frozen=True)
class Tabulated(RadialProfile):
    """Natural cubic spline through ``(r, phi)`` samples.

    ``r_min`` is the first sample radius; queries beyond the last sample
    raise :class:`InterpolationError`.
    """

    kind: ClassVar[str] = "tabulated"
    samples: tuple[tuple[float, float], ...]
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple((float(r), float(p)) for r, p in self.samples)
        if len(pts) < 4:
            raise DomainError("tabulated profile needs at least 4 samples")
        rs = np.array([p[0] for p in pts])
        if np.any(np.diff(rs) <= 0):
            raise DomainError("tabulated radii must be strictly increasing")
        if rs[0] < 0:
            raise DomainError("tabulated radii must be nonnegative")
        object.__setattr__(self, "samples", pts)
        object.__setattr__(self, "_spline",
                           CubicSpline(rs, [p[1] for p in pts], bc_type="natural"))

    @property
    def r_min(self):
        return self.samples[0][0]

    @property
    def r_max(self):
        return self.samples[-1][0]

    @property
    def r_scale(self):
        r0 = self.samples[0][0]
        return r0 if r0 > 0 else self.samples[1][0]

    @property
    def endpoint_ok(self):
        return True

    @property
    def label(self):
        return f"tabulated(n={len(self.samples)})"

    def params(self):
        return {"samples": [list(p) for p in self.samples]}

    def _derivs(self, r):
        s = self._spline
        return float(s(r)), float(s(r, 1)), float(s(r, 2))


@dataclass(frozen=True)
class Bumped(RadialProfile):
    """``base`` plus ``amplitude * exp(-1/(1 - x**2))`` with ``x = (r - center)/half_width``.

    The bump is compactly supported, so asymptotic flatness, ``r_min`` and
    the behavior near the singularity are inherited from ``base``.
    """

    kind: ClassVar[str] = "bumped"
    base: RadialProfile
    amplitude: float
    center: float
    half_width: float

    def __post_init__(self):
        if self.half_width <= 0:
            raise DomainError("bump half_width must be positive")
        if self.center - self.half_width <= self.base.r_min:
            raise DomainError("bump support must stay away from r_min")
        for r in np.linspace(self.center - self.half_width,
                             self.center + self.half_width, 257)[1:-1]:
            if self.phi(float(r)) <= 0:
                raise DomainError("bump amplitude makes phi nonpositive")

    @property
    def r_min(self):
        return self.base.r_min

    @property
    def r_max(self):
        return self.base.r_max

    @property
    def r_scale(self):
        return self.base.r_scale

    @property
    def endpoint_ok(self):
        return self.base.endpoint_ok

    @property
    def asymptotic_order(self):
        return self.base.asymptotic_order

    @property
    def label(self):
        return f"bumped({self.base.label}, eps={self.amplitude:g}, rc={self.center:g})"

    def params(self):
        return {"base": profile_to_dict(self.base), "amplitude": self.amplitude,
                "center": self.center, "half_width": self.half_width}

    def derivs_near(self, delta):
        f = self.base.derivs_near(delta)
        return self._add_bump(self.base.r_min + delta, *f)

    def _derivs(self, r):
        return self._add_bump(r, *self.base._derivs(r))

    def _add_bump(self, r, f, df, ddf):
        w = self.half_width
        x = (r - self.center) / w
        if abs(x) >= 1.0:
            return f, df, ddf
        q = 1.0 - x * x
        b = self.amplitude * math.exp(-1.0 / q)
        db = b * (-2.0 * x / (q * q)) / w
        ddb = b * 2.0 * (3.0 * x**4 - 1.0) / q**4 / (w * w)
        return f + b, df + db, ddf + ddb


@dataclass(frozen=True)
class SphereGeometry:
    r: float
    area: float
    areal_radius: float
    mean_curvature: float


def evaluate_profile(profile: RadialProfile, r: float) -> tuple[float, float, float]:
    """Return ``(phi, phi', phi'')`` at coordinate radius ``r``."""
    return profile.derivs(r)


def sphere_area(profile: RadialProfile, r: float) -> float:
    phi = profile.phi(r)
    return FOUR_PI * r * r * phi**4


def mean_curvature_transform(phi_bar: float, dphi_bar_dnu: float, h_bar: float) -> float:
    """Mean curvature in ``phi_bar**4 * g_bar`` from background data.

    ``dphi_bar_dnu`` is the derivative of ``phi_bar`` along the unit
    normal of the background metric and ``h_bar`` the background mean
    curvature.
    """
    if not phi_bar > 0:
        raise DomainError("conformal function must be positive")
    return h_bar / phi_bar**2 + 4.0 * dphi_bar_dnu / phi_bar**3


def sphere_geometry(profile: RadialProfile, r: float) -> SphereGeometry:
    phi, dphi, _ = profile.derivs(r)
    if not phi > 0:
        raise DomainError(f"phi vanishes at r={r!r}")
    rho = r * phi * phi
    h = (2.0 / rho) * (1.0 + 2.0 * r * dphi / phi)
    return SphereGeometry(r=r, area=FOUR_PI * rho * rho, areal_radius=rho,
                          mean_curvature=h)


def scalar_curvature(profile: RadialProfile, r: float) -> float:
    """Scalar curvature ``-8 phi**-5 * Laplacian(phi)`` of ``phi**4 delta``."""
    phi = profile.phi(r)
    if not phi > 0:
        raise DomainError(f"phi vanishes at r={r!r}")
    return -8.0 * profile.laplacian(r) / phi**5


def _laplacian_terms(profile: RadialProfile, r: float, tol: float):
    _, dphi, ddphi = profile.derivs(r)
    lap = profile.laplacian(r)
    noise = tol * (abs(ddphi) + abs(2.0 * dphi / r))
    return lap, noise


def is_superharmonic_at(profile: RadialProfile, r: float, tol: float = 1e-9) -> bool:
    """Sign test for ``R >= 0``, relative to the size of the Laplacian terms.

    Checking the flat Laplacian of ``phi`` instead of ``R`` itself avoids
    the ``phi**-5`` amplification of rounding near a singularity.
    """
    lap, noise = _laplacian_terms(profile, r, tol)
    return lap <= noise + 1e-300


def _scalar_curvature_denoised(profile: RadialProfile, r: float, tol: float = 1e-9) -> float:
    lap, noise = _laplacian_terms(profile, r, tol)
    return 0.0 if abs(lap) <= noise else scalar_curvature(profile, r)


@dataclass(frozen=True)
class Weight:
    """Positive radial rescaling function with its derivative."""

    value: Callable[[float], float]
    derivative: Callable[[float], float]
    label: str = "1"

    def __call__(self, r):
        return self.value(r)

    @classmethod
    def constant(cls, c: float = 1.0) -> "Weight":
        c = float(c)
        return cls(lambda r: c, lambda r: 0.0, f"{c:g}")

    @classmethod
    def exponential(cls, amplitude: float, rate: float = 1.0) -> "Weight":
        """``1 + amplitude * exp(-rate * r)``."""
        a, k = float(amplitude), float(rate)
        return cls(lambda r: 1.0 + a * math.exp(-k * r),
                   lambda r: -a * k * math.exp(-k * r),
                   f"1+{a:g}exp(-{k:g}r)")

    @classmethod
    def random_smooth(cls, rng: np.random.Generator, n_terms: int = 3) -> "Weight":
        """Random ``1 + sum a_j exp(-b_j r)`` with ``sum |a_j| < 0.9``."""
        a = rng.uniform(-1.0, 1.0, n_terms)
        a *= rng.uniform(0.1, 0.9) / np.sum(np.abs(a))
        b = rng.uniform(0.2, 3.0, n_terms)
        terms = [(float(x), float(y)) for x, y in zip(a, b)]

        def value(r):
            return 1.0 + sum(x * math.exp(-y * r) for x, y in terms)

        def derivative(r):
            return -sum(x * y * math.exp(-y * r) for x, y in terms)

        label = "1" + "".join(f"{x:+.3f}exp(-{y:.3f}r)" for x, y in terms)
        return cls(value, derivative, label)

    def __mul__(self, other: "Weight") -> "Weight":
        f, df, g, dg = self.value, self.derivative, other.value, other.derivative
        return Weight(lambda r: f(r) * g(r),
                      lambda r: df(r) * g(r) + f(r) * dg(r),
                      f"({self.label})*({other.label})")


@dataclass(frozen=True)
class Resolution:
    """Radial-gauge resolution: background ``weight**4 delta``, function ``phi / weight``."""

    profile: RadialProfile
    weight: Weight = field(default_factory=Weight.constant)

    def background_factor(self, r: float) -> float:
        return self.weight(r)

    def conformal_function(self, r: float) -> tuple[float, float]:
        """``(phi_bar, d phi_bar / dr)``."""
        phi, dphi, _ = self.profile.derivs(r)
        lam, dlam = self.weight.value(r), self.weight.derivative(r)
        return phi / lam, dphi / lam - phi * dlam / (lam * lam)

    def unit_normal_derivative(self, r: float) -> float:
        """Derivative of ``phi_bar`` along the outward unit normal of the background."""
        _, dphib = self.conformal_function(r)
        return dphib / self.weight(r) ** 2

    def background_area(self, r: float) -> float:
        return FOUR_PI * r * r * self.weight(r) ** 4


def _weight_samples(profile: RadialProfile) -> list[float]:
    lo = profile.r_min
    scale = profile.r_scale
    pts = [lo] if profile.endpoint_ok else []
    pts += [lo + scale * 2.0**-k for k in range(30, -1, -1)]
    pts += [max(lo, scale) * 2.0**k for k in range(1, 17)]
    return pts


def rescale_resolution(res: Resolution, lam: Weight) -> Resolution:
    for r in _weight_samples(res.profile):
        if not lam(r) > 0:
            raise DomainError(f"rescaling weight not positive at r={r!r}")
    return Resolution(res.profile, res.weight * lam)


@dataclass
class ValidityReport:
    profile: str
    positive: bool
    min_phi: float
    asymptotically_flat: bool
    decay_sup: float
    zas: bool
    regular: bool
    dphi_at_r_min: float | None
    min_scalar_curvature: float
    nonnegative_scalar_curvature: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _near_radii(profile: RadialProfile, kmax: int = 40) -> list[float]:
    lo, s = profile.r_min, profile.r_scale
    return [lo + s * 2.0**-k for k in range(1, kmax + 1)]


def validate_profile(profile: RadialProfile) -> ValidityReport:
    """Sampled checks of positivity, decay, the singularity type and ``R >= 0``."""
    notes: list[str] = []
    lo, scale = profile.r_min, profile.r_scale
    r_hi = min(2.0**16 * scale, profile.r_max)
    start = lo if lo > 0 else scale / 16.0
    far = []
    r = start
    while r < r_hi:
        far.append(r)
        r *= 2.0**0.125
    far.append(r_hi)
    near = [r for r in _near_radii(profile) if r > lo]
    grid = sorted({r for r in near + far if lo < r <= profile.r_max})

    phis = [profile.phi(r) for r in grid]
    min_phi = min(phis)
    positive = min_phi > 0

    decay = [abs(r * (profile.phi(r) - 1.0)) for r in far if r > lo]
    decay_sup = max(decay)
    tail = decay[-4:]
    af = positive and all(math.isfinite(v) for v in decay) and (
        tail[-1] <= 1.05 * tail[-2] + 1e-12 * max(1.0, tail[-2]))
    if profile.r_max < math.inf:
        notes.append(f"decay sampled only up to tabulated r_max={profile.r_max:g}")

    zas = False
    if lo > 0:
        areas = [sphere_area(profile, r) for r in near]
        ref = sphere_area(profile, lo + scale)
        shrinking = all(a2 < a1 for a1, a2 in zip(areas[-6:], areas[-5:]))
        zas = shrinking and areas[-1] < 1e-6 * ref
    regular = False
    dphi_min = None
    if zas:
        if profile.endpoint_ok:
            dphi_min = profile.derivs(lo)[1]
        d = [profile.derivs(r)[1] for r in near]
        tail_d = d[-8:]
        finite = all(math.isfinite(v) for v in tail_d)
        settled = finite and abs(tail_d[-1] - tail_d[-2]) <= 1e-6 * abs(tail_d[-1])
        regular = settled and abs(tail_d[-1]) > 1e-12 * (1.0 / scale)
        if dphi_min is None and regular:
            dphi_min = tail_d[-1]
        if dphi_min is not None and not (math.isfinite(dphi_min) and dphi_min != 0):
            regular = False

    curv = [_scalar_curvature_denoised(profile, r) for r in grid]
    nonneg = all(is_superharmonic_at(profile, r) for r in grid)
    return ValidityReport(profile=profile.label, positive=positive, min_phi=min_phi,
                          asymptotically_flat=af, decay_sup=decay_sup, zas=zas,
                          regular=regular, dphi_at_r_min=dphi_min,
                          min_scalar_curvature=min(curv),
                          nonnegative_scalar_curvature=nonneg, notes=notes)


# -- serialization -----------------------------------------------------------

_KINDS: dict[str, Callable[[dict], RadialProfile]] = {}


def register_kind(kind: str, factory: Callable[[dict], RadialProfile]) -> None:
    _KINDS[kind] = factory


def _need(params: dict, *names: str) -> list[float]:
    missing = [n for n in names if n not in params]
    if missing:
        raise ParseError(f"profile params missing {missing}")
    extra = sorted(set(params) - set(names))
    if extra:
        raise ParseError(f"unknown profile params {extra}")
    out = []
    for n in names:
        v = params[n]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"profile param {n!r} must be a number")
        out.append(float(v))
    return out


def _tabulated(params: dict) -> Tabulated:
    if set(params) != {"samples"}:
        raise ParseError("tabulated profile takes exactly 'samples'")
    try:
        pts = tuple((float(r), float(p)) for r, p in params["samples"])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"tabulated samples must be [r, phi] pairs: {exc}") from None
    return Tabulated(pts)


def _bumped(params: dict) -> Bumped:
    if "base" not in params:
        raise ParseError("bumped profile needs 'base'")
    rest = {k: v for k, v in params.items() if k != "base"}
    eps, rc, w = _need(rest, "amplitude", "center", "half_width")
    return Bumped(profile_from_dict(params["base"]), eps, rc, w)


def _flat(params: dict) -> Flat:
    _need(params)
    return Flat()


register_kind("flat", _flat)
register_kind("negSchwarzschild", lambda p: NegSchwarzschild(*_need(p, "m")))
register_kind("posSchwarzschild", lambda p: PosSchwarzschild(*_need(p, "m")))
register_kind("powerLaw", lambda p: PowerLaw(*_need(p, "alpha", "r0")))
register_kind("boosted", lambda p: Boosted(*_need(p, "r0", "a")))
register_kind("tabulated", _tabulated)
register_kind("bumped", _bumped)


def profile_from_dict(doc: dict) -> RadialProfile:
    """Build a profile from ``{"kind": ..., "params": {...}}``."""
    if not isinstance(doc, dict):
        raise ParseError("profile must be a JSON object")
    extra = sorted(set(doc) - {"kind", "params"})
    if extra:
        raise ParseError(f"unknown profile keys {extra}")
    kind = doc.get("kind")
    if kind not in _KINDS:
        raise ParseError(f"unknown profile kind {kind!r}")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ParseError("profile params must be an object")
    return _KINDS[kind](params)


def profile_to_dict(profile: RadialProfile) -> dict:
    params = profile.params()
    if not params:
        return {"kind": profile.kind}
    return {"kind": profile.kind, "params": params}
