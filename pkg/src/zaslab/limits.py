"""Limits of sequences sampled on geometrically shrinking radii.

Along ``r_i = r_min * (1 + 2**-i)`` every quantity of the catalog has an
error expansion in powers of ``(r_i - r_min)``, i.e. a sum of geometric
sequences in ``i``.  Iterated Aitken extrapolation removes those terms one
at a time without having to know the exponents, which matters because
capacities converge like ``sqrt(r - r_min)`` while regular masses converge
linearly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_LEVELS = range(4, 21)
DIVERGENCE_FLOOR = -1e6


def shrinking_radii(r_min: float, levels=DEFAULT_LEVELS, base: float = 2.0) -> list[float]:
    """Radii ``r_min * (1 + base**-i)``, decreasing toward ``r_min``."""
    return [r_min * (1.0 + base ** (-i)) for i in levels]


@dataclass
class LimitEstimate:
    value: float
    error: float
    diverged: bool
    sequence: list[float] = field(default_factory=list)
    extrapolants: list[float] = field(default_factory=list)


def _aitken(x: np.ndarray) -> np.ndarray:
    d1 = x[1:-1] - x[:-2]
    d2 = x[2:] - x[1:-1]
    den = d2 - d1
    out = x[2:].copy()
    ok = np.abs(den) > 1e-300
    # Denominators at rounding level mean the tail is already constant.
    ok &= np.abs(den) > 1e-13 * np.maximum(np.abs(x[2:]), 1e-300)
    out[ok] = x[2:][ok] - d2[ok] ** 2 / den[ok]
    return out


def is_diverging_down(values, floor: float = DIVERGENCE_FLOOR) -> bool:
    """True when the tail runs off to minus infinity.

    Either the last three values sit below ``floor`` and keep decreasing,
    or the last four are decreasing with gaps that widen by a steady factor
    above one.
    """
    v = [float(x) for x in values]
    if any(math.isinf(x) and x < 0 for x in v[-3:]):
        return True
    if len(v) >= 3 and all(x < floor for x in v[-3:]) and v[-1] < v[-2] < v[-3]:
        return True
    if len(v) < 5:
        return False
    tail = v[-5:]
    gaps = [b - a for a, b in zip(tail, tail[1:])]
    if not all(g < 0 for g in gaps):
        return False
    ratios = [g2 / g1 for g1, g2 in zip(gaps, gaps[1:])]
    return all(q > 1.05 for q in ratios)


def extrapolate(values, *, levels: int = 3, allow_divergence: bool = True) -> LimitEstimate:
    """Estimate the limit of ``values`` (ordered toward the limit point)."""
    seq = [float(x) for x in values]
    if allow_divergence and is_diverging_down(seq):
        return LimitEstimate(-math.inf, math.inf, True, seq, [])
    x = np.asarray(seq, dtype=float)
    tails = [x[-1]]
    for _ in range(levels):
        if x.size < 3:
            break
        x = _aitken(x)
        tails.append(x[-1])
    best = float(tails[-1])
    if len(tails) >= 2:
        err = abs(tails[-1] - tails[-2])
        if x.size >= 2:
            err = min(err, abs(x[-1] - x[-2])) if levels > 0 else err
    else:
        err = math.inf
    return LimitEstimate(best, float(err), False, seq, [float(t) for t in tails])
