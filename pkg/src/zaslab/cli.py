"""Command-line front end.

    zaslab mass --scenario F
    zaslab capacity --scenario F
    zaslab flow --scenario F
    zaslab verify --suite {penrose,capacity,resolution,locality,geroch,hull,all} [--catalog F]

Global options ``--out DIR --format {json,csv} --tol-scale X`` may appear
before or after the subcommand.  Exit codes: 0 success, 1 a verify suite
failed, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .elliptic import capacity_limit, capacity_surface, harmonic_factor_profile
from .errors import InputError, NumericalError, ParseError, ValidationError
from .geometry import (RadialProfile, Resolution, profile_from_dict, profile_to_dict,
                       sphere_area, validate_profile)
from .imcf import AreaEnvelope, capacity_energy_bound, weak_flow
from .mass import (MassReport, adm_report, conformal_mass_shift, hawking_mass,
                   hawking_mass_closed_form, regular_mass, zas_report)
from .reports import SuiteReport
from .verify import SUITE_NAMES, Tolerances, catalog_from_doc, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("mass", "capacity", "flow", "verify")
FORMATS = ("json", "csv")

# allowed params per command: name -> (type, default)
PARAMS = {
    "mass": {"r": (float, None), "C": (float, None)},
    "capacity": {"r": (float, None)},
    "flow": {"r0": (float, None), "t_max": (float, 10.0), "n_samples": (int, 512)},
    "verify": {"suite": (str, "all"), "tolerances": (dict, None)},
}
REQUIRED = {"flow": ("r0",)}
TOP_KEYS = {"profile", "command", "params", "output"}
CAPACITY_ASSUMPTION = "infimum over radial test functions"


@dataclass
class Scenario:
    profile_doc: dict
    command: str
    params: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @property
    def profile(self) -> RadialProfile:
        return profile_from_dict(self.profile_doc)

    def tolerances(self) -> Tolerances:
        return Tolerances().updated(self.params.get("tolerances") or {})

    def to_dict(self) -> dict:
        doc = {"profile": self.profile_doc, "command": self.command, "params": self.params}
        if self.output:
            doc["output"] = self.output
        return doc


def _coerce(key: str, value, kind):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"params.{key}: expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ValidationError(f"params.{key}: must be finite")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"params.{key}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        raise ParseError(f"params.{key}: expected {kind.__name__}, got {value!r}")
    return value


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("line 1: scenario must be a JSON object")
    extra = sorted(set(doc) - TOP_KEYS)
    if extra:
        raise ParseError(f"unknown keys {extra}")
    if "command" not in doc:
        raise ParseError("missing key 'command'")
    command = doc["command"]
    if command not in COMMANDS:
        raise ParseError(f"command: expected one of {COMMANDS}, got {command!r}")
    if "profile" not in doc:
        raise ParseError("missing key 'profile'")
    try:
        profile = profile_from_dict(doc["profile"])
    except ParseError as exc:
        raise ParseError(f"profile: {exc}") from None

    raw = doc.get("params", {})
    if not isinstance(raw, dict):
        raise ParseError("params: expected an object")
    allowed = PARAMS[command]
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ParseError(f"params: unknown keys {unknown} for command {command!r}")
    for key in REQUIRED.get(command, ()):
        if key not in raw:
            raise ParseError(f"params.{key}: required for command {command!r}")
    params = {}
    for key, (kind, default) in allowed.items():
        if key in raw:
            params[key] = _coerce(key, raw[key], kind)
        elif default is not None:
            params[key] = default
    _validate_params(command, params, profile)

    output = doc.get("output", {})
    if not isinstance(output, dict):
        raise ParseError("output: expected an object")
    extra = sorted(set(output) - {"path", "format"})
    if extra:
        raise ParseError(f"output: unknown keys {extra}")
    if "format" in output and output["format"] not in FORMATS:
        raise ValidationError(f"output.format: expected one of {FORMATS}")
    if "path" in output and not isinstance(output["path"], str):
        raise ParseError("output.path: expected a string")
    return Scenario(doc["profile"], command, params, dict(output))


def _validate_params(command: str, params: dict, profile: RadialProfile) -> None:
    for key in ("r", "r0"):
        if key in params and not params[key] > profile.r_min:
            raise ValidationError(f"params.{key}={params[key]!r} must exceed r_min={profile.r_min!r}")
        if key in params and params[key] > profile.r_max:
            raise ValidationError(f"params.{key}={params[key]!r} beyond r_max={profile.r_max!r}")
    if "t_max" in params and not params["t_max"] > 0:
        raise ValidationError("params.t_max must be positive")
    if "n_samples" in params and not 2 <= params["n_samples"] <= 10**6:
        raise ValidationError("params.n_samples must lie in [2, 1000000]")
    if command == "verify":
        if params["suite"] not in SUITE_NAMES:
            raise ValidationError(f"params.suite: expected one of {SUITE_NAMES}")
        Tolerances().updated(params.get("tolerances") or {})


# -- command bodies ----------------------------------------------------------

def _mass_reports(sc: Scenario) -> list[MassReport]:
    p = sc.profile
    v = validate_profile(p)
    out = []
    r = sc.params.get("r")
    if r is not None:
        out.append(MassReport("hawking", hawking_mass(p, r), r,
                              {"closed_form": hawking_mass_closed_form(p, r)}))
    adm = adm_report(p)
    out.append(adm)
    if v.regular:
        out.append(MassReport("regular_zas", regular_mass(Resolution(p)), p.r_min))
    if v.zas:
        out.append(zas_report(p))
    if "C" in sc.params:
        C = sc.params["C"]
        shifted = adm_report(harmonic_factor_profile(p, C)).value
        out.append(MassReport("conformal_shift", conformal_mass_shift(adm.value, C), None,
                              {"C": C, "adm_of_product": shifted}))
    return out


def _capacity_rows(sc: Scenario) -> list[dict]:
    p = sc.profile
    rows = []
    r = sc.params.get("r")
    if r is not None:
        row = {"kind": "surface", "r": r, "value": capacity_surface(p, r)}
        if AreaEnvelope(p, r).hull(r) == r:
            row["energy_bound"] = capacity_energy_bound(sphere_area(p, r), hawking_mass(p, r))
        rows.append(row)
    if validate_profile(p).zas:
        est = capacity_limit(p)
        rows.append({"kind": "zas", "r": p.r_min, "value": est.value, "error": est.error})
    return rows


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _encode(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("-inf" if x < 0 else "inf")
    if isinstance(x, dict):
        return {k: _encode(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_encode(v) for v in x]
    return x


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("-inf" if x < 0 else "inf")
        return f"{x:.17g}"
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(h)) for h in header])
    return buf.getvalue()


class Writer:
    """Single sink for every artifact; stdout when no directory is given."""

    def __init__(self, out_dir: Path | None, stdout=None):
        self.out_dir = out_dir
        self.stdout = stdout or sys.stdout
        self.written: list[Path] = []

    def write(self, name: str, text: str, primary: bool = True) -> None:
        if self.out_dir is None:
            if primary:
                self.stdout.write(text)
            return
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.written.append(path)


def run_command(sc: Scenario, writer: Writer, fmt: str, tol_scale: float = 1.0,
                catalog=None) -> int:
    profile_doc = profile_to_dict(sc.profile)
    if sc.command == "mass":
        reports = _mass_reports(sc)
        if fmt == "json":
            writer.write("mass.json", _dumps({"profile": profile_doc,
                                              "reports": [m.to_dict() for m in reports]}))
        else:
            rows = [{"kind": m.kind, "value": m.value, "r": m.r} for m in reports]
            writer.write("mass.csv", _csv(("kind", "value", "r"), rows))
        return EXIT_OK
    if sc.command == "capacity":
        rows = _capacity_rows(sc)
        if fmt == "json":
            writer.write("capacity.json", _dumps({"profile": profile_doc,
                                                  "assumption": CAPACITY_ASSUMPTION,
                                                  "capacities": _encode(rows)}))
        else:
            writer.write("capacity.csv",
                         _csv(("kind", "r", "value", "error", "energy_bound"), rows))
        return EXIT_OK
    if sc.command == "flow":
        prm = sc.params
        trace = weak_flow(sc.profile, prm["r0"], prm["t_max"], prm["n_samples"])
        if fmt == "json":
            doc = {"profile": profile_doc, "A0": trace.A0, "m0": trace.m0,
                   "jumps": [j.__dict__ for j in trace.jumps],
                   "samples": [s.__dict__ for s in trace.samples]}
            writer.write("flow.json", _dumps(doc))
        else:
            writer.write("flow.csv", trace.to_csv())
            writer.write("flow_jumps.json", trace.jumps_json(), primary=False)
        return EXIT_OK
    # verify
    tol = sc.tolerances().scaled(tol_scale)
    reports = run_suite(sc.params["suite"], catalog, tol)
    return _emit_suites(reports, writer, fmt)


def _emit_suites(reports: list[SuiteReport], writer: Writer, fmt: str) -> int:
    for rep in reports:
        text = rep.to_json() if fmt == "json" else rep.to_csv()
        writer.write(f"{rep.suite}.{fmt}", text)
        print(rep.summary(), file=sys.stderr)
    return EXIT_OK if all(r.overall for r in reports) else EXIT_FAIL


# -- argument parsing --------------------------------------------------------

def _global_options(parser: argparse.ArgumentParser, top: bool) -> None:
    # Subparser copies default to SUPPRESS so they never clobber values
    # given before the subcommand.
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    parser.add_argument("--out", type=Path, default=d(None),
                        help="directory for output files (default: stdout)")
    parser.add_argument("--format", choices=FORMATS, default=d(None),
                        help="output format (default: scenario value, else json)")
    parser.add_argument("--tol-scale", type=float, default=d(1.0),
                        help="multiply every verify tolerance by X")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zaslab",
        description="Masses, capacities and inverse mean curvature flow near zero area singularities.")
    _global_options(parser, True)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("mass", "Hawking, ADM, regular and ZAS masses"),
                           ("capacity", "capacity of a sphere and of the singularity"),
                           ("flow", "weak inverse mean curvature flow trace")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--scenario", type=Path, required=True, help="JSON scenario file")
        _global_options(sp, False)
    sp = sub.add_parser("verify", help="theorem suites over a catalog")
    sp.add_argument("--suite", choices=SUITE_NAMES, default=None)
    sp.add_argument("--catalog", type=Path, default=None,
                    help="JSON list of profiles (default: built-in catalog)")
    sp.add_argument("--scenario", type=Path, default=None,
                    help="verify scenario; its profile becomes a one-entry catalog")
    _global_options(sp, False)
    return parser


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_json(path: Path):
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _main(args) -> int:
    if not args.tol_scale > 0:
        raise ValidationError("--tol-scale must be positive")
    if args.command != "verify":
        sc = parse_scenario(_read(args.scenario))
        if sc.command != args.command:
            raise ValidationError(f"scenario command {sc.command!r} does not match {args.command!r}")
        fmt = args.format or sc.output.get("format", "json")
        out = args.out or (Path(sc.output["path"]) if "path" in sc.output else None)
        return run_command(sc, Writer(out), fmt, args.tol_scale)

    catalog = None
    tol = Tolerances()
    suite = args.suite
    sc = None
    if args.scenario is not None:
        sc = parse_scenario(_read(args.scenario))
        if sc.command != "verify":
            raise ValidationError(f"scenario command {sc.command!r} is not 'verify'")
        tol = sc.tolerances()
        suite = suite or sc.params["suite"]
        catalog = [(sc.profile.label, sc.profile)]
    if args.catalog is not None:
        catalog = catalog_from_doc(_load_json(args.catalog))
    suite = suite or "all"
    fmt = args.format or (sc.output.get("format") if sc else None) or "json"
    out = args.out or (Path(sc.output["path"]) if sc and "path" in sc.output else None)
    reports = run_suite(suite, catalog, tol.scaled(args.tol_scale))
    return _emit_suites(reports, Writer(out), fmt)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _main(args)
    except InputError as exc:
        print(f"zaslab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"zaslab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
