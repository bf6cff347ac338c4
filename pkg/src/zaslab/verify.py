"""Theorem-level suites over a catalog of profiles.

Each suite returns a :class:`~zaslab.reports.SuiteReport`.  Cases whose
hypotheses fail validation are reported as ``hypothesis-unmet`` and never
count as failures.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .elliptic import capacity_limit, capacity_surface
from .geometry import (Boosted, Bumped, Flat, NegSchwarzschild, PosSchwarzschild,
                       PowerLaw, RadialProfile, Resolution, Tabulated, Weight,
                       profile_from_dict, rescale_resolution, sphere_area,
                       validate_profile)
from .errors import ParseError, ValidationError
from .imcf import (AreaEnvelope, capacity_energy_bound, flow_energy_test, geroch_report,
                   hawking_limit_vs_adm, tail_hawking_mass, weak_flow)
from .limits import is_diverging_down
from .mass import adm_mass, hawking_mass, regular_mass, zas_report
from .reports import (FAIL, INFO, PASS, UNMET, SuiteCase, SuiteReport, equality_case,
                      inequality_case)

__all__ = [
    "Tolerances",
    "default_catalog",
    "catalog_from_doc",
    "neck_profile",
    "penrose_suite",
    "capacity_theorem_suite",
    "resolution_independence_suite",
    "locality_suite",
    "hull_monotonicity_suite",
    "geroch_suite",
    "run_suite",
    "SUITE_NAMES",
]

Catalog = list[tuple[str, RadialProfile]]
SCHWARZSCHILD_KINDS = ("negSchwarzschild", "posSchwarzschild")


@dataclass(frozen=True)
class Tolerances:
    equality: float = 1e-6     # relative
    limit: float = 1e-4
    identity: float = 1e-9
    monotone: float = 1e-8
    hull: float = 1e-10
    divergence: float = 1e3    # |m_H| a capacity-positive sequence must exceed

    def scaled(self, factor: float) -> "Tolerances":
        if not factor > 0:
            raise ValidationError("tolerance scale must be positive")
        return Tolerances(*(v * factor for k, v in asdict(self).items()
                            if k != "divergence"), divergence=self.divergence)

    def updated(self, overrides: dict) -> "Tolerances":
        unknown = set(overrides) - set(asdict(self))
        if unknown:
            raise ParseError(f"unknown tolerance keys {sorted(unknown)}")
        vals = {k: float(v) for k, v in overrides.items()}
        if any(not v > 0 for v in vals.values()):
            raise ValidationError("tolerances must be positive")
        return replace(self, **vals)

    def as_dict(self) -> dict:
        return asdict(self)


def default_catalog() -> Catalog:
    profiles = [Flat(), NegSchwarzschild(-1.0), PosSchwarzschild(1.0),
                PowerLaw(0.25, 1.0), PowerLaw(0.75, 1.0), Boosted(0.5, 1.0)]
    return [(p.label, p) for p in profiles]


def catalog_from_doc(doc) -> Catalog:
    """Catalog from a JSON list of profile documents (or ``{"profiles": [...]}``)."""
    if isinstance(doc, dict):
        extra = set(doc) - {"profiles"}
        if extra:
            raise ParseError(f"catalog: unknown keys {sorted(extra)}")
        doc = doc.get("profiles")
    if not isinstance(doc, list) or not doc:
        raise ParseError("catalog: expected a nonempty list of profiles")
    out = []
    for k, item in enumerate(doc):
        try:
            p = profile_from_dict(item)
        except ParseError as exc:
            raise ParseError(f"catalog entry {k}: {exc}") from None
        out.append((p.label, p))
    return out


def neck_profile(k: float = 0.5, n: int = 600) -> Tabulated:
    """Tabulated ``1 + (k/r)**3``: the area falls then rises, so small spheres
    have a minimal neck as hull and negative Hawking mass."""
    rs = np.geomspace(0.1 * k, 400.0 * k, n)
    return Tabulated(tuple((float(r), float(1.0 + (k / r) ** 3)) for r in rs))


def _validity(catalog: Catalog) -> dict:
    return {pid: validate_profile(p) for pid, p in catalog}


def _unmet(pid, relation, note, **q) -> SuiteCase:
    return SuiteCase(pid, relation, math.nan, 0.0, UNMET, q, note)


# -- Penrose-type inequality --------------------------------------------------

def penrose_suite(catalog: Catalog | None = None, tol: Tolerances = Tolerances()) -> SuiteReport:
    catalog = catalog or default_catalog()
    rep = SuiteReport("penrose", tolerances=tol.as_dict())
    for pid, p in catalog:
        v = validate_profile(p)
        rel = "m_ADM >= m_ZAS"
        if not v.zas:
            rep.cases.append(_unmet(pid, rel, "no zero area singularity"))
            continue
        if not v.nonnegative_scalar_curvature:
            rep.cases.append(_unmet(pid, rel, "R < 0 somewhere",
                                    min_R=v.min_scalar_curvature))
            continue
        adm = adm_mass(p)
        z = zas_report(p)
        if z.value == -math.inf:
            rep.cases.append(SuiteCase(pid, rel, math.inf, tol.limit, PASS,
                                       {"lhs": adm, "rhs": z.value},
                                       "ZAS mass -inf: holds trivially"))
        else:
            rep.cases.append(inequality_case(pid, rel, adm, z.value, tol.limit,
                                             quantities={"zas_error": z.diagnostics["error"]}))
        if v.regular:
            m_reg = regular_mass(Resolution(p))
            rep.cases.append(inequality_case(pid, "m_ADM >= m_reg", adm, m_reg,
                                             tol.equality * max(1.0, abs(m_reg))))
    return rep


# -- capacity theorems ---------------------------------------------------------

def _near_radii(p: RadialProfile, k0: int = 14, k1: int = 24) -> list[float]:
    return [p.r_min + p.r_scale * 2.0**-k for k in range(k0, k1 + 1)]


def _test_spheres(p: RadialProfile) -> list[float]:
    if p.r_min > 0:
        return [p.r_min + p.r_scale * f for f in (2.0**-8, 0.25, 1.0, 4.0)]
    return [p.r_scale * f for f in (0.25, 1.0, 4.0)]


def capacity_theorem_suite(catalog: Catalog | None = None,
                           tol: Tolerances = Tolerances()) -> SuiteReport:
    catalog = catalog or default_catalog()
    rep = SuiteReport("capacity", tolerances=tol.as_dict())
    for pid, p in catalog:
        v = validate_profile(p)
        if v.zas and not v.nonnegative_scalar_curvature:
            rep.cases.append(_unmet(pid, "capacity theorems", "R < 0 somewhere"))
        elif v.zas:
            rep.cases.extend(_capacity_cases(pid, p, tol))
        rep.cases.extend(_energy_bound_cases(pid, p, v.nonnegative_scalar_curvature, tol))
    return rep


def _capacity_cases(pid: str, p: RadialProfile, tol: Tolerances) -> list[SuiteCase]:
    cap = capacity_limit(p)
    radii = _near_radii(p)
    m = [hawking_mass(p, r) for r in radii]
    q = {"capacity": cap.value, "capacity_error": cap.error, "radii": radii[-3:],
         "hawking_tail": m[-3:]}
    positive = cap.value > tol.equality
    diverging = is_diverging_down(m)
    cases = []
    if positive:
        tail = m[-3:]
        margin = -tol.divergence - max(tail)
        ok = margin >= 0 and tail[0] > tail[1] > tail[2]
        cases.append(SuiteCase(pid, "capacity > 0 implies m_H(r_i) -> -inf", margin, 0.0,
                               PASS if ok else FAIL, q))
    elif not diverging:
        cases.append(inequality_case(pid, "m_H bounded implies capacity = 0",
                                     tol.equality, cap.value, 0.0, quantities=q))
    else:
        cases.append(SuiteCase(pid, "capacity = 0 with m_H -> -inf", 0.0, 0.0, INFO, q,
                               "contrapositive not violated"))
    return cases


def _energy_bound_cases(pid: str, p: RadialProfile, curvature_ok: bool,
                        tol: Tolerances) -> list[SuiteCase]:
    out = []
    seen = set()
    for r in _test_spheres(p):
        hull = AreaEnvelope(p, r).hull(r)
        if hull in seen:
            continue
        seen.add(hull)
        a0 = sphere_area(p, hull)
        m0 = hawking_mass(p, hull)
        bound = capacity_energy_bound(a0, m0)
        cap = capacity_surface(p, hull)
        rel = "capacity <= 2 sqrt(alpha) + 2 sqrt(beta)"
        q = {"r": hull, "A0": a0, "m0": m0}
        if not curvature_ok:
            out.append(_unmet(pid, rel, "R < 0 somewhere: flow not monotone", **q))
            continue
        e_flow = flow_energy_test(weak_flow(p, hull, 1.0, 257))
        q["flow_test_energy"] = e_flow
        out.append(inequality_case(pid, rel, bound, cap, tol.equality * bound, quantities=q))
        out.append(inequality_case(pid, "capacity <= energy of 1 - t along the flow",
                                   e_flow, cap, 1e-4 * e_flow, quantities={"r": hull}))
    return out


# -- resolution independence ---------------------------------------------------

def resolution_weights(seed: int = 0, n_random: int = 10) -> list[Weight]:
    rng = np.random.default_rng(seed)
    fixed = [Weight.constant(1.0), Weight.constant(2.0), Weight.exponential(1.0, 1.0)]
    return fixed + [Weight.random_smooth(rng) for _ in range(n_random)]


def resolution_independence_suite(catalog: Catalog | None = None,
                                  tol: Tolerances = Tolerances(), seed: int = 0,
                                  n_random: int = 10) -> SuiteReport:
    catalog = catalog or default_catalog()
    rep = SuiteReport("resolution", tolerances=tol.as_dict())
    for pid, p in catalog:
        v = validate_profile(p)
        if not v.regular:
            continue
        base = Resolution(p)
        m0 = regular_mass(base)
        for lam in resolution_weights(seed, n_random):
            m = regular_mass(rescale_resolution(base, lam))
            rep.cases.append(equality_case(pid, f"m_reg(lambda={lam.label}) = m_reg", m, m0,
                                           tol.identity))
    if not rep.cases:
        rep.cases.append(_unmet("catalog", "resolution independence",
                                "no regular ZAS in catalog"))
    return rep


# -- locality ------------------------------------------------------------------

def separation_radius(p: RadialProfile) -> float:
    return 4.0 * p.r_min


def exterior_bump(p: RadialProfile, amplitude: float = 0.25) -> Bumped:
    r_sep = separation_radius(p)
    return Bumped(p, amplitude, 2.0 * r_sep, r_sep)


def locality_suite(catalog: Catalog | None = None, tol: Tolerances = Tolerances()) -> SuiteReport:
    catalog = catalog or default_catalog()
    rep = SuiteReport("locality", tolerances=tol.as_dict())
    for pid, p in catalog:
        v = validate_profile(p)
        if not v.zas:
            continue
        r_sep = separation_radius(p)
        m0 = zas_report(p).value
        same = zas_report(exterior_bump(p, 0.0)).value
        rep.cases.append(equality_case(pid, "zero bump leaves m_ZAS unchanged", same, m0, 0.0,
                                       quantities={"r_sep": r_sep}))
        bumped = exterior_bump(p)
        m1 = zas_report(bumped).value
        rep.cases.append(equality_case(pid, "m_ZAS(bumped beyond r_sep) = m_ZAS", m1, m0,
                                       tol.limit, quantities={"r_sep": r_sep,
                                                              "bump": bumped.params()}))
        m2 = zas_report(p, r_outer=r_sep).value
        rep.cases.append(equality_case(pid, "m_ZAS(h = 1 on r_sep) = m_ZAS", m2, m0,
                                       tol.limit, quantities={"r_sep": r_sep}))
    return rep


# -- hull comparison -----------------------------------------------------------

def _hull_radii(p: RadialProfile) -> list[float]:
    if p.r_min > 0:
        return [p.r_min + p.r_scale * f for f in (2.0**-6, 0.25, 1.0)]
    return [p.r_scale * f for f in (0.2, 0.6, 1.0)]


def hull_monotonicity_suite(catalog: Catalog | None = None, tol: Tolerances = Tolerances(),
                            include_neck: bool = True) -> SuiteReport:
    jobs = [(pid, p, _hull_radii(p)) for pid, p in (catalog or default_catalog())]
    if include_neck:
        neck = neck_profile()
        jobs.append((f"neck({neck.label})", neck, [0.2, 0.4]))
    rep = SuiteReport("hull", tolerances=tol.as_dict())
    for pid, p, radii in jobs:
        for r in radii:
            env = AreaEnvelope(p, r)
            h = env.hull(r)
            m_r, m_h = hawking_mass(p, r), hawking_mass(p, h)
            q = {"r": r, "hull": h, "m_H(r)": m_r, "m_H(hull)": m_h}
            rel = "m_H(hull) >= m_H(r)"
            if h == r:
                rep.cases.append(SuiteCase(pid, rel, 0.0, tol.hull, PASS, q,
                                           "hull is the sphere itself"))
            elif m_r >= 0 and m_h >= 0:
                rep.cases.append(SuiteCase(pid, rel, m_h - m_r, tol.hull, UNMET, q,
                                           "neither Hawking mass negative"))
            else:
                rep.cases.append(inequality_case(pid, rel, m_h, m_r, tol.hull,
                                                 quantities={"r": r, "hull": h}))
    return rep


# -- Geroch monotonicity and the flow limit --------------------------------------

def flow_start(p: RadialProfile) -> float:
    return 1.2 * p.r_min if p.r_min > 0 else 0.6 * p.r_scale


def flow_horizon(p: RadialProfile, r0: float) -> float:
    """Flow time after which the trace reaches about ``2**11 * r_scale``."""
    a0 = sphere_area(p, AreaEnvelope(p, r0).hull(r0))
    return math.log(sphere_area(p, 2.0**11 * p.r_scale) / a0)


def geroch_suite(catalog: Catalog | None = None, tol: Tolerances = Tolerances(),
                 n_samples: int = 512) -> SuiteReport:
    catalog = catalog or default_catalog()
    rep = SuiteReport("geroch", tolerances=tol.as_dict())
    for pid, p in catalog:
        v = validate_profile(p)
        r0 = flow_start(p)
        trace = weak_flow(p, r0, flow_horizon(p, r0), n_samples)
        rep.extend(geroch_report(trace, tol.monotone, v.nonnegative_scalar_curvature, pid))
        rep.cases.append(inequality_case(pid, "A = A0 exp(t)", tol.identity,
                                         trace.area_law_error(), 0.0))
        if not v.nonnegative_scalar_curvature:
            rep.cases.append(_unmet(pid, "m_ADM >= lim m_H", "R < 0 somewhere"))
            continue
        rep.extend(hawking_limit_vs_adm(p, trace, tol.limit, pid))
        if p.kind in SCHWARZSCHILD_KINDS:
            rep.cases.append(equality_case(pid, "lim m_H = m_ADM", tail_hawking_mass(trace),
                                           adm_mass(p), tol.limit))
    return rep


SUITES = {
    "penrose": penrose_suite,
    "capacity": capacity_theorem_suite,
    "resolution": resolution_independence_suite,
    "locality": locality_suite,
    "geroch": geroch_suite,
    "hull": hull_monotonicity_suite,
}
SUITE_NAMES = tuple(SUITES) + ("all",)


def run_suite(name: str, catalog: Catalog | None = None,
              tol: Tolerances = Tolerances()) -> list[SuiteReport]:
    if name == "all":
        return [fn(catalog, tol) for fn in SUITES.values()]
    if name not in SUITES:
        raise ValidationError(f"unknown suite {name!r}; expected one of {SUITE_NAMES}")
    return [SUITES[name](catalog, tol)]
