"""Weak inverse mean curvature flow of centered spheres.

Radially the weak flow is the level-set flow of the outward area envelope
``M(r) = min_{s >= r} A(s)``: the surface at time ``t`` is the sphere at
the largest radius with ``A <= A0 * exp(t)``.  Areas then grow exactly
exponentially, and every jump of the flow lands on a strictly minimizing
hull.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from .errors import DomainError, EnvelopeError
from .geometry import (RadialProfile, is_superharmonic_at, sphere_area,
                       sphere_geometry)
from .mass import adm_mass, hawking_mass
from .reports import UNMET, SuiteCase, SuiteReport, inequality_case

__all__ = [
    "FlowSample",
    "Jump",
    "FlowTrace",
    "AreaEnvelope",
    "minimizing_hull_radius",
    "weak_flow",
    "flow_energy_test",
    "capacity_energy_bound",
    "geroch_report",
    "tail_hawking_mass",
    "hawking_limit_vs_adm",
    "CSV_HEADER",
]

CSV_HEADER = ("t", "r", "area", "H", "m_H")
TIE_TOL = 1e-12
POINTS_PER_UNIT = 48


def _area_slope_sign(profile: RadialProfile, r: float) -> float:
    """Sign-carrying factor of ``dA/dr``: ``1 + 2 r phi'/phi`` (same sign as ``H``)."""
    phi, dphi, _ = profile.derivs(r)
    return 1.0 + 2.0 * r * dphi / phi


class AreaEnvelope:
    """Critical points of ``A(r)`` on ``[r_start, inf)`` and envelope queries.

    Beyond the last grid radius the area must be increasing; that is
    checked, not assumed.
    """

    def __init__(self, profile: RadialProfile, r_start: float):
        if not r_start > profile.r_min:
            raise DomainError(f"r={r_start!r} must exceed r_min={profile.r_min!r}")
        if r_start > profile.r_max:
            raise DomainError(f"r={r_start!r} beyond the profile range")
        self.profile = profile
        self.r_start = r_start
        lo = profile.r_min
        far = min(profile.r_max, max(2.0**16 * profile.r_scale, 64.0 * r_start))
        self.r_far = far
        q0, q1 = math.log(r_start - lo), math.log(far - lo)
        n = int(max(64, min(8000, POINTS_PER_UNIT * (q1 - q0))))
        grid = lo + np.exp(np.linspace(q0, q1, n + 1))
        grid[0], grid[-1] = r_start, far
        signs = [_area_slope_sign(profile, float(r)) for r in grid]
        crit: list[tuple[float, str]] = []
        for k in range(n):
            s0, s1 = signs[k], signs[k + 1]
            if s0 == 0.0 and k > 0:
                continue
            if (s0 < 0 < s1) or (s0 > 0 > s1) or (s1 == 0.0 and k + 1 < n):
                a, b = float(grid[k]), float(grid[k + 1])
                if s1 == 0.0:
                    root = b
                    s1 = signs[k + 2]
                else:
                    root = brentq(lambda r: _area_slope_sign(profile, r), a, b,
                                  xtol=1e-14 * b, rtol=1e-15)
                crit.append((root, "min" if s1 > 0 else "max"))
        if signs[-1] <= 0 and profile.r_max == math.inf:
            raise EnvelopeError(f"area not increasing at r={far!r} for {profile.label}")
        self.critical = crit
        self.start_increasing = signs[0] > 0

    def area(self, r: float) -> float:
        return sphere_area(self.profile, r)

    def minima(self, r: float) -> list[float]:
        return [c for c, kind in self.critical if kind == "min" and c > r]

    def envelope(self, r: float) -> float:
        """``min_{s >= r} A(s)``."""
        return min([self.area(r)] + [self.area(q) for q in self.minima(r)])

    def hull(self, r: float) -> float:
        """Largest radius achieving ``min_{s >= r} A(s)``."""
        best_r, best_a = r, self.area(r)
        for q in self.minima(r):
            a = self.area(q)
            if a <= best_a * (1.0 + TIE_TOL):
                best_r, best_a = q, min(a, best_a)
        return best_r

    def increasing_segments(self, r: float) -> list[tuple[float, float]]:
        """Intervals ``[lo, hi]`` beyond ``r`` on which ``A`` increases."""
        pts = [c for c, _ in self.critical if c > r]
        kinds = [k for c, k in self.critical if c > r]
        edges = [r] + pts + [math.inf]
        # slope on the first piece follows from the first critical point beyond r
        first_up = (kinds[0] == "max") if kinds else True
        segs = []
        for k in range(len(edges) - 1):
            up = first_up if k % 2 == 0 else not first_up
            if up:
                segs.append((edges[k], edges[k + 1]))
        return segs

    def _bracket_above(self, lo: float, level: float) -> float:
        r_max = self.profile.r_max
        hi = max(2.0 * lo, lo + self.profile.r_scale)
        while self.area(min(hi, r_max)) < level:
            if hi >= r_max or hi > 1e300:
                raise EnvelopeError(f"area level {level!r} not bracketed below r={hi!r}")
            hi *= 2.0
        return min(hi, r_max)

    def level_radius(self, level: float, r_from: float) -> float:
        """Largest radius ``s >= r_from`` with ``A(s) <= level``."""
        for lo, hi in reversed(self.increasing_segments(r_from)):
            a_lo = self.area(lo)
            if level < a_lo * (1.0 - 1e-15):
                continue
            if hi == math.inf:
                hi = self._bracket_above(lo, level)
            if self.area(hi) <= level:
                return hi
            if level <= a_lo:
                return lo
            return brentq(lambda s: self.area(s) - level, lo, hi,
                          xtol=1e-15 * hi, rtol=1e-15, maxiter=500)
        raise EnvelopeError(f"no sphere beyond r={r_from!r} has area <= {level!r}")


def minimizing_hull_radius(profile: RadialProfile, r: float) -> float:
    return AreaEnvelope(profile, r).hull(r)


@dataclass(frozen=True)
class FlowSample:
    t: float
    r: float
    area: float
    H: float
    m_H: float


@dataclass(frozen=True)
class Jump:
    t: float
    r_before: float
    r_after: float


@dataclass
class FlowTrace:
    samples: list[FlowSample]
    jumps: list[Jump]
    A0: float
    m0: float
    profile: RadialProfile | None = field(default=None, compare=False, repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def radii(self) -> np.ndarray:
        return np.array([s.r for s in self.samples])

    @property
    def hawking_masses(self) -> np.ndarray:
        return np.array([s.m_H for s in self.samples])

    def area_law_error(self) -> float:
        """Largest relative deviation from ``A0 * exp(t)``."""
        return max(abs(s.area - self.A0 * math.exp(s.t)) / (self.A0 * math.exp(s.t))
                   for s in self.samples)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in self.samples:
            w.writerow([f"{x:.17g}" for x in (s.t, s.r, s.area, s.H, s.m_H)])
        return buf.getvalue()

    def jumps_json(self) -> str:
        doc = {"A0": f"{self.A0:.17g}", "m0": f"{self.m0:.17g}",
               "jumps": [{"t": f"{j.t:.17g}", "r_before": f"{j.r_before:.17g}",
                          "r_after": f"{j.r_after:.17g}"} for j in self.jumps]}
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_csv(cls, text: str, sidecar: str) -> "FlowTrace":
        rows = list(csv.reader(io.StringIO(text)))
        if tuple(rows[0]) != CSV_HEADER:
            raise ValueError(f"unexpected trace header {rows[0]!r}")
        samples = [FlowSample(*(float(x) for x in row)) for row in rows[1:] if row]
        doc = json.loads(sidecar)
        jumps = [Jump(float(j["t"]), float(j["r_before"]), float(j["r_after"]))
                 for j in doc["jumps"]]
        return cls(samples, jumps, float(doc["A0"]), float(doc["m0"]))

    def curvature_nonnegative(self) -> bool | None:
        """Whether ``R >= 0`` held at every sampled radius; None without a profile."""
        if self.profile is None:
            return None
        return all(is_superharmonic_at(self.profile, s.r) for s in self.samples)


def _sample(profile, t, r):
    geo = sphere_geometry(profile, r)
    return FlowSample(t, r, geo.area, geo.mean_curvature, hawking_mass(profile, r))


def weak_flow(profile: RadialProfile, r0: float, t_max: float,
              n_samples: int = 512) -> FlowTrace:
    """Weak IMCF from the sphere at ``r0`` sampled at ``n_samples`` uniform times."""
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    if n_samples < 2:
        raise DomainError("need at least two samples")
    env = AreaEnvelope(profile, r0)
    start = env.hull(r0)
    a0 = env.area(start)
    jumps = []
    if start != r0:
        jumps.append(Jump(0.0, r0, start))

    # Later jumps land on outward-minimizing local minima of the area: just
    # below their level the flow still sits behind the hump to their left.
    top = a0 * math.exp(t_max)
    for q in env.minima(start):
        aq = env.area(q)
        if a0 < aq <= top and env.hull(q) == q:
            before = env.level_radius(aq * (1.0 - 1e-13), start)
            jumps.append(Jump(math.log(aq / a0), before, q))

    times = np.linspace(0.0, t_max, n_samples)
    samples = []
    r_prev = start
    for t in times:
        t = float(t)
        r = start if t == 0.0 else env.level_radius(a0 * math.exp(t), start)
        r = max(r, r_prev)
        samples.append(_sample(profile, t, r))
        r_prev = r
    return FlowTrace(samples, jumps, a0, hawking_mass(profile, start), profile)


def flow_energy_test(trace: FlowTrace) -> float:
    """Energy of the test function ``u = 1 - t`` on ``0 <= t <= 1`` along the flow.

    By the co-area formula this is ``int_0^1 int_{N_t} |H| dA dt``; the
    integral over each round sphere is ``|H| A``.
    """
    t = trace.times
    keep = t <= 1.0 + 1e-15
    vals = np.array([abs(s.H) * s.area for s in trace.samples])[keep]
    return float(trapezoid(vals, t[keep]))


def capacity_energy_bound(A0: float, m0: float) -> float:
    """``2 sqrt(alpha) + 2 sqrt(beta)``, ``alpha = 16 pi A0``,
    ``beta = (16 pi)**1.5 sqrt(A0) |m0|``."""
    if not A0 > 0:
        raise DomainError("initial area must be positive")
    alpha = 16.0 * math.pi * A0
    beta = (16.0 * math.pi) ** 1.5 * math.sqrt(A0) * abs(m0)
    return 2.0 * math.sqrt(alpha) + 2.0 * math.sqrt(beta)


def geroch_report(trace: FlowTrace, tol: float = 1e-8,
                  curvature_ok: bool | None = None, profile_id: str | None = None) -> SuiteReport:
    """Adjacent-sample audit of ``m_H`` nondecreasing along a trace.

    Monotonicity is only asserted when ``R >= 0`` held; pass ``curvature_ok``
    explicitly for traces read back from disk.
    """
    if curvature_ok is None:
        curvature_ok = trace.curvature_nonnegative()
    pid = profile_id or (trace.profile.label if trace.profile is not None else "trace")
    m = trace.hawking_masses
    t = trace.times
    drops = [(float(t[k]), float(m[k]), float(m[k + 1]))
             for k in range(len(m) - 1) if m[k + 1] < m[k] - tol]
    steps = np.diff(m)
    worst = float(steps.min()) if steps.size else 0.0
    q = {"n_samples": len(m), "m_start": float(m[0]), "m_end": float(m[-1]),
         "worst_step": worst, "violations": drops, "curvature_nonnegative": curvature_ok}
    rel = "m_H(t_k+1) >= m_H(t_k)"
    if curvature_ok:
        case = SuiteCase(pid, rel, worst, tol, quantities=q)
    else:
        note = "scalar curvature unverified" if curvature_ok is None else "R < 0 somewhere"
        case = SuiteCase(pid, rel, worst, tol, UNMET, q, note)
    return SuiteReport("geroch", [case], {"monotonicity": tol})


def tail_hawking_mass(trace: FlowTrace) -> float:
    """Limit of ``m_H`` from a fit ``m_inf + K/r`` through two far samples."""
    r = trace.radii
    m = trace.hawking_masses
    r2, m2 = float(r[-1]), float(m[-1])
    k = int(np.argmin(np.abs(r - 0.5 * r2)))
    r1, m1 = float(r[k]), float(m[k])
    if not r1 < r2:
        return m2
    return (r2 * m2 - r1 * m1) / (r2 - r1)


def hawking_limit_vs_adm(profile: RadialProfile, trace: FlowTrace, tol: float = 1e-4,
                         profile_id: str | None = None) -> SuiteReport:
    """``lim m_H <= m_ADM`` from the tail of a trace."""
    pid = profile_id or profile.label
    lim = tail_hawking_mass(trace)
    adm = adm_mass(profile)
    far = 2.0**10 * profile.r_scale
    q = {"r_final": float(trace.radii[-1]), "r_required": far}
    rel = "m_ADM >= lim m_H"
    if trace.radii[-1] < far * (1.0 - 1e-9):
        case = inequality_case(pid, rel, adm, lim, tol, quantities=q,
                               status=UNMET, note="trace too short")
    else:
        case = inequality_case(pid, rel, adm, lim, tol, quantities=q)
    return SuiteReport("hawking_limit", [case], {"limit": tol})
