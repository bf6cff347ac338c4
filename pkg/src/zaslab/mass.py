"""Mass functionals: Hawking, ADM, regular, ZAS and the harmonic conformal shift.

Reported ZAS masses are sphere-family values: the supremum over families of
surfaces is taken over centered coordinate spheres only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .elliptic import HarmonicFunction, check_vanishes_on, solve_harmonic
from .errors import ConvergenceError, DomainError, NotRegularError
from .geometry import RadialProfile, Resolution, sphere_geometry, validate_profile
from .limits import extrapolate, shrinking_radii

__all__ = [
    "MassReport",
    "hawking_mass",
    "hawking_mass_closed_form",
    "adm_mass",
    "adm_report",
    "flux_integral",
    "regular_mass",
    "regular_mass_of_sphere",
    "zas_mass",
    "zas_report",
    "conformal_mass_shift",
]

FOUR_PI = 4.0 * math.pi
SIXTEEN_PI = 16.0 * math.pi
MASS_KINDS = ("hawking", "adm", "regular_zas", "zas_limit", "conformal_shift")


def _encode(x):
    if isinstance(x, float) and math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    if isinstance(x, dict):
        return {k: _encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    return x


def _decode(x):
    if x in ("-inf", "inf", "nan"):
        return float(x)
    if isinstance(x, dict):
        return {k: _decode(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_decode(v) for v in x]
    return x


@dataclass
class MassReport:
    kind: str
    value: float
    r: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MASS_KINDS:
            raise ValueError(f"unknown mass kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": _encode(self.value), "r": self.r,
                "diagnostics": _encode(self.diagnostics)}

    @classmethod
    def from_dict(cls, doc: dict) -> "MassReport":
        return cls(doc["kind"], _decode(doc["value"]), doc.get("r"),
                   _decode(doc.get("diagnostics", {})))


def hawking_mass(profile: RadialProfile, r: float) -> float:
    """``sqrt(A/16 pi) * (1 - (1/16 pi) int H**2 dA)`` on the sphere at ``r``."""
    geo = sphere_geometry(profile, r)
    willmore = geo.mean_curvature**2 * geo.area / SIXTEEN_PI
    return math.sqrt(geo.area / SIXTEEN_PI) * (1.0 - willmore)


def hawking_mass_closed_form(profile: RadialProfile, r: float) -> float:
    """``-2 r**2 phi' (phi + r phi')``, algebraically equal to :func:`hawking_mass`."""
    phi, dphi, _ = profile.derivs(r)
    return -2.0 * r * r * dphi * (phi + r * dphi)


def adm_report(profile: RadialProfile, r: float | None = None,
               rel_tol: float = 1e-8) -> MassReport:
    """ADM mass ``2 * lim r (phi - 1)`` by Richardson extrapolation.

    The monopole coefficient is sampled at ``r, 2r, 4r, 8r`` and two
    Richardson passes (orders 1 and 2) are applied.  The estimates from the
    ``(r, 2r, 4r)`` and ``(2r, 4r, 8r)`` triples must agree.
    """
    if profile.r_max < math.inf:
        r = profile.r_max / 8.0 if r is None else r
    elif r is None:
        r = 2.0**10 * max(profile.r_scale, profile.r_min)
    radii = [r * 2.0**k for k in range(4)]
    raw = [s * (profile.phi(s) - 1.0) for s in radii]
    p = profile.asymptotic_order
    first = [(2.0**p * b - a) / (2.0**p - 1.0) for a, b in zip(raw, raw[1:])]
    second = [(2.0 ** (p + 1) * b - a) / (2.0 ** (p + 1) - 1.0)
              for a, b in zip(first, first[1:])]
    coeff, check = second[1], second[0]
    scale = max(abs(coeff), abs(raw[-1]) * 1e-3, 1e-300)
    if abs(coeff - check) > rel_tol * scale and abs(coeff - check) > 1e-13:
        raise ConvergenceError(
            f"ADM extrapolation unstable for {profile.label}: {check!r} vs {coeff!r}")
    return MassReport("adm", 2.0 * coeff, None,
                      {"radii": radii, "r_phi_minus_1": raw, "C": coeff,
                       "richardson": first + second})


def adm_mass(profile: RadialProfile) -> float:
    return adm_report(profile).value


def flux_integral(profile: RadialProfile, h: HarmonicFunction, r: float) -> float:
    """``int nu(h)**(4/3) dA`` over the sphere on which ``h`` vanishes."""
    check_vanishes_on(h, r)
    geo = sphere_geometry(profile, r) if profile.phi(r) > 0 else None
    if geo is None:
        raise DomainError(f"sphere at r={r!r} is degenerate")
    nu = h.normal_derivative(r)
    assert nu >= 0, "harmonic function must increase outward"
    return geo.area * nu ** (4.0 / 3.0)


def _reg_from_flux(flux: float) -> float:
    assert flux >= 0
    return -0.25 * (flux / math.pi) ** 1.5


def regular_mass(res: Resolution) -> float:
    """``-1/4 ((1/pi) int_Pi nu_bar(phi_bar)**(4/3) dA_bar)**(3/2)``."""
    profile = res.profile
    r0 = profile.r_min
    if not (r0 > 0 and profile.endpoint_ok):
        raise NotRegularError(f"{profile.label} has no regular singular sphere")
    phi0 = profile.phi(r0)
    nu = res.unit_normal_derivative(r0)
    if abs(phi0) > 1e-12 or not (math.isfinite(nu) and nu != 0.0):
        raise NotRegularError(f"{profile.label}: phi(r_min)={phi0!r}, normal derivative {nu!r}")
    return _reg_from_flux(res.background_area(r0) * abs(nu) ** (4.0 / 3.0))


def regular_mass_of_sphere(profile: RadialProfile, r: float,
                           r_outer: float = math.inf) -> tuple[float, HarmonicFunction]:
    """Regular mass of the sphere at ``r`` resolved by its harmonic function.

    With ``r_outer`` finite the harmonic function equals 1 on that sphere
    instead of at infinity.
    """
    h = solve_harmonic(profile, r, r_outer)
    return _reg_from_flux(flux_integral(profile, h, r)), h


def zas_report(profile: RadialProfile, radii=None, r_outer: float = math.inf) -> MassReport:
    if not profile.r_min > 0:
        raise DomainError(f"{profile.label} has no singular sphere")
    if radii is None:
        radii = shrinking_radii(profile.r_min)
    radii = [float(r) for r in radii]
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be strictly decreasing")
    masses, fluxes = [], []
    for r in radii:
        m, h = regular_mass_of_sphere(profile, r, r_outer)
        masses.append(m)
        fluxes.append(h.c)
    est = extrapolate(masses)
    return MassReport("zas_limit", est.value, None,
                      {"label": "sphere-family ZAS mass",
                       "family": "centered coordinate spheres",
                       "radii": radii, "regular_masses": masses, "c": fluxes,
                       "extrapolants": est.extrapolants, "error": est.error,
                       "diverged": est.diverged, "r_outer": r_outer})


def zas_mass(profile: RadialProfile, radii=None) -> float:
    """Sphere-family ZAS mass; ``-inf`` when the regular masses diverge."""
    return zas_report(profile, radii).value


def conformal_mass_shift(m: float, C: float) -> float:
    """ADM mass after multiplying by a harmonic factor ``1 + C/r + O(1/r**2)``."""
    return m + 2.0 * C


def is_regular(profile: RadialProfile) -> bool:
    return validate_profile(profile).regular
