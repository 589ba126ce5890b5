"""Command-line interface.

Exit codes: 0 when every requested check passes, 1 when a check fails or a
point leaves the chart, 2 for unreadable or malformed input. Any ``<file>``
argument may also be the name of a catalog entry.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import warnings
from json.decoder import scanstring
from pathlib import Path

import numpy as np

from .algebra import LieAlgebra, algebra_from_dict, algebra_to_dict, validate
from .bch import BchConfig, bch_info
from .catalog import CatalogEntry, entry_names, get_entry
from .errors import BchDomainWarning, ChartOutOfRange, InvalidArgument, LieIntegrateError, PreconditionFailure
from .factorization import factorize
from .logderiv import SmoothPath, log_derivative, log_derivative_by_definition
from .report import CheckRecord, VerificationReport
from .representation import representation_from_dict
from .suite import DEFAULT_TOLERANCES, LEVEL_SAMPLES, run_suite

LOGDERIV_TOL = DEFAULT_TOLERANCES["logderiv_equivalence"]


class InputError(Exception):
    """Malformed input; message already carries the location."""


# -- JSON with locations ---------------------------------------------------------

_NUMBER = re.compile(r"-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][-+]?\d+)?")
_WS = re.compile(r"\s*")


def value_offsets(text: str) -> dict[str, int]:
    """Map JSON paths such as ``brackets[3]`` or ``representations.spin2`` to character offsets.

    Only called on text that already parsed, so no error handling is needed.
    """
    out: dict[str, int] = {}

    def skip(i):
        return _WS.match(text, i).end()

    def walk(i, path):
        i = skip(i)
        out[path] = i
        ch = text[i]
        if ch == "{":
            i = skip(i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = scanstring(text, skip(i) + 1)
                i = skip(i) + 1  # colon
                i = skip(walk(i, f"{path}.{key}" if path else key))
                if text[i] == "}":
                    return i + 1
                i += 1
        if ch == "[":
            i = skip(i + 1)
            if text[i] == "]":
                return i + 1
            k = 0
            while True:
                i = skip(walk(i, f"{path}[{k}]"))
                k += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        if ch == '"':
            return scanstring(text, i + 1)[1]
        for word in ("true", "false", "null"):
            if text.startswith(word, i):
                return i + len(word)
        return _NUMBER.match(text, i).end()

    walk(0, "")
    return out


def line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, offset) + 1


_PATH_IN_MESSAGE = re.compile(r"([A-Za-z_][\w.]*(?:\[\d+\])+|decompositions\.[\w+\-]+)")


class Source:
    """A parsed JSON document that can turn an error message into a line-located one."""

    def __init__(self, path: str):
        self.path = path
        try:
            self.text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"{path}: cannot read ({exc.strerror})") from None
        try:
            self.data = json.loads(self.text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        self._offsets = None

    def locate(self, message: str, path: str | None = None) -> str:
        if self._offsets is None:
            self._offsets = value_offsets(self.text)
        candidates = [path] if path else _PATH_IN_MESSAGE.findall(message)
        for p in candidates:
            # trim trailing segments until something is found
            while p:
                if p in self._offsets:
                    return f"{self.path}:{line_of(self.text, self._offsets[p])}: {message}"
                p = re.sub(r"(\[\d+\]|\.[^.\[]+)$", "", p) if re.search(r"(\[\d+\]|\.[^.\[]+)$", p) else ""
        return f"{self.path}: {message}"


# -- loading -----------------------------------------------------------------------


def _is_representation(data) -> bool:
    return isinstance(data, dict) and "matrices" in data and "brackets" not in data


def load_entry(ref: str, strict: bool = False) -> CatalogEntry:
    """Catalog entry by name, or an algebra file (optionally with representations) by path."""
    if not Path(ref).exists() and ref in entry_names(include_controls=True):
        return get_entry(ref)
    src = Source(ref)
    if _is_representation(src.data):
        L, decomps, rname, R = _load_representation_file(src, strict)
        return CatalogEntry(L.name or "file", L, decomps, {rname: R})
    return _entry_from_source(src, strict)


def _entry_from_source(src: Source, strict: bool) -> CatalogEntry:
    data = src.data
    try:
        L, decomps = algebra_from_dict(data, name=Path(src.path).stem)
    except (InvalidArgument, PreconditionFailure) as exc:
        raise InputError(src.locate(str(exc))) from None
    reps = {}
    raw = data.get("representations", {}) if isinstance(data, dict) else {}
    if not isinstance(raw, dict):
        raise InputError(src.locate("'representations' must be an object", "representations"))
    for rname, rdata in raw.items():
        try:
            reps[rname] = representation_from_dict(rdata, L, rname, strict)
        except (InvalidArgument, PreconditionFailure) as exc:
            raise InputError(src.locate(str(exc), f"representations.{rname}")) from None
    oracle = data.get("oracle")
    if oracle is not None and oracle not in reps:
        raise InputError(src.locate(f"oracle {oracle!r} is not one of the representations", "oracle"))
    return CatalogEntry(L.name, L, decomps, reps, oracle=oracle)


def _load_representation_file(src: Source, strict: bool):
    data = src.data
    ref = data.get("algebra")
    if not isinstance(ref, str):
        raise InputError(src.locate("representation file needs an 'algebra' reference", "algebra"))
    sibling = Path(src.path).parent / ref
    if sibling.exists():
        entry = _entry_from_source(Source(str(sibling)), strict)
    elif ref in entry_names(include_controls=True):
        entry = get_entry(ref)
    else:
        raise InputError(src.locate(f"unknown algebra reference {ref!r}", "algebra"))
    name = data.get("name", Path(src.path).stem)
    try:
        R = representation_from_dict(data, entry.algebra, name, strict)
    except (InvalidArgument, PreconditionFailure) as exc:
        raise InputError(src.locate(str(exc))) from None
    return entry.algebra, entry.decompositions, name, R


def parse_vector(text: str, L: LieAlgebra, flag: str) -> np.ndarray:
    try:
        vals = [float(s) for s in text.replace(" ", "").split(",") if s != ""]
        return L.vector(vals)
    except (ValueError, InvalidArgument) as exc:
        raise InputError(f"{flag}: {exc}") from None


def _fmt(v) -> list:
    return [float(a) for a in np.asarray(v).ravel()]


def _emit(obj) -> None:
    print(json.dumps(obj))


# -- subcommands -------------------------------------------------------------------


def cmd_validate(args) -> int:
    entry = load_entry(args.file, strict=False)
    report = VerificationReport(config={"source": args.file})
    for rec in validate(entry.algebra).records:
        rec.check_name = f"algebra/{rec.check_name}"
        report.add(rec)
    for dname, D in entry.decompositions.items():
        report.add(CheckRecord(f"decomp={dname}/projectors", D.projector_residual(), 1e-10,
                               details={"condition_number": D.condition_number, "blocks": list(D.block_dims)}))
    for rname, R in entry.representations.items():
        for rec in R.validate().records:
            rec.check_name = f"rep={rname}/{rec.check_name}"
            report.add(rec)
    for line in report.format_lines():
        print(line)
    for rec in report.failures:
        loc = rec.details.get("location")
        if loc is not None:
            print(f"  {rec.check_name} fails at {_describe_location(entry.algebra, loc)}", file=sys.stderr)
    return 0 if report.passed else 1


def _describe_location(L: LieAlgebra, loc) -> str:
    if isinstance(loc, dict):
        return ", ".join(f"{k}={v}" for k, v in loc.items())
    if all(isinstance(i, (int, np.integer)) for i in loc):
        return f"indices {list(loc)} ({', '.join(L.basis_names[i] for i in loc if 0 <= i < L.dim)})"
    return ", ".join(map(str, loc))


def cmd_bch(args) -> int:
    entry = load_entry(args.file)
    L = entry.algebra
    x, y = parse_vector(args.x, L, "--x"), parse_vector(args.y, L, "--y")
    cfg = BchConfig() if args.order is None else BchConfig(max_order=args.order)
    res = bch_info(L, x, y, cfg)
    for msg in res.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    _emit({"value": _fmt(res.value), "orders_used": res.orders_used, "last_term_norm": res.last_term_norm,
           "domain_violation": res.domain_violation})
    return 0


def cmd_factorize(args) -> int:
    entry = load_entry(args.file)
    L = entry.algebra
    name = args.decomposition or next(iter(entry.decompositions))
    if name not in entry.decompositions:
        raise InputError(f"--decomposition: unknown name {name!r} (have {sorted(entry.decompositions)})")
    D = entry.decompositions[name]
    z = parse_vector(args.z, L, "--z")
    try:
        pt = factorize(L, D, z)
    except ChartOutOfRange as exc:
        print(f"chart error: {exc} (residual {exc.residual})", file=sys.stderr)
        return 1
    _emit({"decomposition": name, "blocks": list(D.names), "components": [_fmt(c) for c in pt.components],
           "residual": pt.residual, "iterations": pt.iterations})
    return 0


def cmd_logderiv(args) -> int:
    entry = load_entry(args.file)
    L = entry.algebra
    try:
        coeffs = np.asarray(json.loads(args.path_spec), dtype=float)
    except json.JSONDecodeError as exc:
        raise InputError(f"--path-spec:{exc.colno}: {exc.msg}") from None
    except (TypeError, ValueError) as exc:
        raise InputError(f"--path-spec: {exc}") from None
    if coeffs.ndim != 2 or coeffs.shape[1] != L.dim or not np.all(np.isfinite(coeffs)):
        raise InputError(f"--path-spec: expected a list of coefficient vectors of length {L.dim}")
    if not 0.0 <= args.t <= 1.0:
        raise InputError("--t: must lie in [0, 1]")
    p = SmoothPath.polynomial(coeffs)
    integral = log_derivative(L, p, args.t)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BchDomainWarning)
        direct = log_derivative_by_definition(L, p, args.t)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    gap = float(np.linalg.norm(integral - direct))
    _emit({"t": args.t, "value": _fmt(integral), "by_definition": _fmt(direct), "agreement": gap,
           "tolerance": LOGDERIV_TOL})
    return 0 if gap <= LOGDERIV_TOL else 1


def _parse_tolerances(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or key not in DEFAULT_TOLERANCES:
            raise InputError(f"--tol {item!r}: expected KIND=VALUE with KIND one of {sorted(DEFAULT_TOLERANCES)}")
        try:
            out[key] = float(val)
        except ValueError:
            raise InputError(f"--tol {item!r}: value is not a number") from None
    return out


def cmd_verify(args) -> int:
    if (args.entry is None) == (args.file is None):
        raise InputError("verify needs exactly one of --entry or --file")
    if args.entry is not None:
        if args.entry not in entry_names(include_controls=True):
            raise InputError(f"--entry: unknown catalog entry {args.entry!r}")
        entry = get_entry(args.entry)
    else:
        entry = load_entry(args.file, strict=False)
    tol = _parse_tolerances(args.tol)
    report = run_suite(entry, seed=args.seed, level=args.level, tolerances=tol)
    if args.json:
        Path(args.json).write_text(report.to_json(include_timing=not args.no_timing) + "\n", encoding="utf-8")
    for line in report.format_lines():
        print(line)
    return 0 if report.passed else 1


def cmd_catalog(args) -> int:
    if args.action == "list":
        for name in entry_names(include_controls=True):
            e = get_entry(name)
            blocks = "; ".join(f"{k}: {list(D.block_dims)}" for k, D in e.decompositions.items())
            reps = ", ".join(f"{k} ({r.dim_H}{', skew' if r.skew else ''})" for k, r in e.representations.items())
            print(f"{name:<20s} dim={e.algebra.dim}  decompositions[{blocks}]  representations[{reps}]")
        return 0
    if args.name is None:
        raise InputError("catalog export needs an entry name")
    if args.name not in entry_names(include_controls=True):
        raise InputError(f"unknown catalog entry {args.name!r}")
    print(json.dumps(export_entry(get_entry(args.name)), indent=2))
    return 0


def export_entry(e: CatalogEntry) -> dict:
    out = algebra_to_dict(e.algebra, e.decompositions)
    out["representations"] = {k: dict(r.to_dict(e.name), name=k) for k, r in e.representations.items()}
    if e.oracle is not None:
        out["oracle"] = e.oracle
    return out


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lie-integrate", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check antisymmetry, Jacobi, decompositions and representations")
    p.add_argument("file", help="algebra JSON file or catalog entry name")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bch", help="evaluate x*y")
    p.add_argument("file", help="algebra JSON file or catalog entry name")
    p.add_argument("--x", required=True, help="comma-separated coordinates")
    p.add_argument("--y", required=True, help="comma-separated coordinates")
    p.add_argument("--order", type=int, choices=range(1, 17), metavar="N",
                   help="truncation order, 1 to 16 (default: stop once terms are negligible, at most 12)")
    p.set_defaults(func=cmd_bch)

    p = sub.add_parser("factorize", help="solve z = x1*...*xn with xj in block j")
    p.add_argument("file", help="algebra JSON file or catalog entry name")
    p.add_argument("--z", required=True, help="comma-separated coordinates")
    p.add_argument("--decomposition", help="name of the decomposition (default: the first one)")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("logderiv", help="log derivative of a polynomial path")
    p.add_argument("file", help="algebra JSON file or catalog entry name")
    p.add_argument("--path-spec", required=True,
                   help="JSON list of coefficient vectors c0, c1, ... for p(t) = sum ck t^k")
    p.add_argument("--t", type=float, default=0.5, help="parameter value (default 0.5)")
    p.set_defaults(func=cmd_logderiv)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--entry", help="catalog entry name")
    p.add_argument("--file", help="algebra JSON file with representations")
    p.add_argument("--level", choices=sorted(LEVEL_SAMPLES), default="quick", help="10 or 100 samples per check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", metavar="OUT", help="write the JSON report here")
    p.add_argument("--no-timing", action="store_true", help="omit wall_time fields from the JSON report")
    p.add_argument("--tol", action="append", metavar="KIND=VALUE", help="override a default tolerance")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("catalog", help="list or export built-in fixtures")
    p.add_argument("action", choices=("list", "export"))
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_catalog)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ChartOutOfRange as exc:
        print(f"chart error: {exc}", file=sys.stderr)
        return 1
    except LieIntegrateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
