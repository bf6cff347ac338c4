"""Suite reports: one case per asserted relation, JSON and flat CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
UNMET = "hypothesis-unmet"
INFO = "informational"
STATUSES = (PASS, FAIL, UNMET, INFO)


def _jsonable(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "-inf" if x < 0 else "inf"
        return x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


def _unjson(x):
    if x in ("nan", "inf", "-inf"):
        return float(x)
    if isinstance(x, dict):
        return {k: _unjson(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_unjson(v) for v in x]
    return x


@dataclass
class SuiteCase:
    """One asserted relation.

    ``margin`` is signed: the case passes when ``margin >= -tol``.  For an
    equality the margin is ``-|difference|``.
    """

    profile: str
    relation: str
    margin: float
    tol: float
    status: str = ""
    quantities: dict = field(default_factory=dict)
    note: str = ""

    def __post_init__(self):
        if not self.status:
            self.status = PASS if self.margin >= -self.tol else FAIL
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def to_dict(self) -> dict:
        return _jsonable({"profile": self.profile, "relation": self.relation,
                          "margin": self.margin, "tol": self.tol, "status": self.status,
                          "quantities": self.quantities, "note": self.note})


def equality_case(profile, relation, lhs, rhs, tol, **kw) -> SuiteCase:
    q = kw.pop("quantities", {})
    q = {"lhs": lhs, "rhs": rhs, **q}
    if lhs == rhs:
        diff = 0.0
    else:
        diff = abs(lhs - rhs)
    return SuiteCase(profile, relation, -diff if math.isfinite(diff) else -math.inf,
                     tol, quantities=q, **kw)


def inequality_case(profile, relation, lhs, rhs, tol, **kw) -> SuiteCase:
    """``lhs >= rhs`` with margin ``lhs - rhs``."""
    q = kw.pop("quantities", {})
    q = {"lhs": lhs, "rhs": rhs, **q}
    return SuiteCase(profile, relation, lhs - rhs, tol, quantities=q, **kw)


@dataclass
class SuiteReport:
    suite: str
    cases: list[SuiteCase] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.cases)

    def failures(self) -> list[SuiteCase]:
        return [c for c in self.cases if not c.passed]

    def extend(self, other: "SuiteReport") -> "SuiteReport":
        self.cases.extend(other.cases)
        return self

    def to_dict(self) -> dict:
        return {"suite": self.suite, "overall": "pass" if self.overall else "fail",
                "tolerances": _jsonable(self.tolerances),
                "cases": [c.to_dict() for c in self.cases]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "SuiteReport":
        cases = [SuiteCase(c["profile"], c["relation"], _unjson(c["margin"]),
                           _unjson(c["tol"]), c["status"], _unjson(c["quantities"]),
                           c.get("note", "")) for c in doc["cases"]]
        return cls(doc["suite"], cases, _unjson(doc.get("tolerances", {})))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "profile", "relation", "margin", "tol", "status", "note",
                    "quantities"])
        for c in self.cases:
            w.writerow([self.suite, c.profile, c.relation, _fmt(c.margin), _fmt(c.tol),
                        c.status, c.note,
                        json.dumps(_jsonable(c.quantities), sort_keys=True)])
        return buf.getvalue()

    def summary(self) -> str:
        counts = {s: sum(c.status == s for c in self.cases) for s in STATUSES}
        parts = ", ".join(f"{v} {k}" for k, v in counts.items() if v)
        return f"{self.suite}: {'PASS' if self.overall else 'FAIL'} ({parts})"


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return f"{x:.17g}"
