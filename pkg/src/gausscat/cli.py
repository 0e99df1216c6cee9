"""Command-line interface: ``gausscat analyze|sweep|verify|circuit``.

State documents are JSON objects in one of three shapes::

    {"ordering": "xpxp", "matrix": [[...4 rows...]]}
    {"cx": [[..], [..]], "cp": [[..], [..]]}
    {"class": "symmetric", "a": 2, "c1": 1.5, "c2": -0.5}
    {"class": "balanced", "a": 2, "b": 2, "c": 1.5}
    {"class": "tmsv", "r": 1}

Exit codes: 0 success, 1 verification violation, 2 unphysical input,
3 unparseable input, 4 unsupported state class.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .errors import GaussCatError, SpecParseError, UnsupportedClass, Unphysical
from .gaussian import (
    ClassKind,
    CovarianceMatrix,
    Ordering,
    balanced_state,
    classify,
    from_blocks,
    is_block,
    pure_from_zy,
    symmetric_state,
    tmsv,
    to_block,
    validate_physical,
)
from .measures import (
    aux_h,
    balanced_kappa_tau,
    eof,
    eof_balanced,
    eof_numeric,
    ellipse_parametrize,
    sof_balanced,
    sof_block,
    sof_dispatch,
    sof_pure,
    sof_symmetric,
)
from .numerics import seeded_rng
from .potential import potential_search, potential_upper_bound, symmetric_saturating_circuit
from .sampling import (
    random_balanced_params,
    random_block_state,
    random_pure_param,
    random_symmetric_params,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_UNPHYSICAL = 2
EXIT_PARSE = 3
EXIT_UNSUPPORTED = 4

NAMED_PARAMS = {"symmetric": ("a", "c1", "c2"), "balanced": ("a", "b", "c"), "tmsv": ("r",)}
SEED_ENV = "GAUSSCAT_SEED"


# --------------------------------------------------------------------------
# state documents


def _matrix(value: Any, shape: tuple[int, int], name: str) -> np.ndarray:
    try:
        m = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecParseError(f"{name}: not a numeric matrix ({exc})") from None
    if m.shape != shape:
        raise SpecParseError(f"{name}: expected shape {shape}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise SpecParseError(f"{name}: entries must be finite")
    return m


def _number(doc: dict, key: str) -> float:
    if key not in doc:
        raise SpecParseError(f"missing parameter {key!r}")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SpecParseError(f"parameter {key!r} must be a finite number")
    return float(v)


def parse_state(doc: Any) -> CovarianceMatrix:
    """Build a covariance matrix from a state document."""
    if not isinstance(doc, dict):
        raise SpecParseError("state document must be a JSON object")
    variants = [k for k in ("matrix", "cx", "class") if k in doc]
    if len(variants) != 1:
        raise SpecParseError("state document needs exactly one of 'matrix', 'cx'/'cp' or 'class'")
    kind = variants[0]
    try:
        if kind == "matrix":
            ordering = doc.get("ordering", "xpxp")
            if ordering not in ("xpxp", "xxpp"):
                raise SpecParseError(f"unknown ordering {ordering!r}")
            return CovarianceMatrix(_matrix(doc["matrix"], (4, 4), "matrix"), Ordering(ordering))
        if kind == "cx":
            if "cp" not in doc:
                raise SpecParseError("block document needs both 'cx' and 'cp'")
            return from_blocks(_matrix(doc["cx"], (2, 2), "cx"), _matrix(doc["cp"], (2, 2), "cp"))
        name = doc["class"]
        if name not in NAMED_PARAMS:
            raise SpecParseError(f"unknown class {name!r}; expected one of {sorted(NAMED_PARAMS)}")
        args = [_number(doc, k) for k in NAMED_PARAMS[name]]
        return {"symmetric": symmetric_state, "balanced": balanced_state, "tmsv": tmsv}[name](*args)
    except SpecParseError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise SpecParseError(str(exc)) from None


def load_documents(source: str) -> list[Any]:
    """Inline JSON, ``-`` for stdin, or a file path; lists give several states."""
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith(("{", "[")):
        text = source
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise SpecParseError(f"cannot read {source}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON: {exc}") from None
    return doc if isinstance(doc, list) else [doc]


def state_document(cov: CovarianceMatrix) -> dict:
    """Full-matrix document at repr precision, so it parses back exactly."""
    return {"ordering": "xpxp", "matrix": cov.xpxp().tolist()}


# --------------------------------------------------------------------------
# analysis records


def fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.12g}"


def _round(v: float | None) -> float | None:
    return None if v is None else float(fmt(v))


@dataclass
class AnalysisRecord:
    input: dict
    state_class: str
    eof_bits: float | None = None
    sof_nats: float | None = None
    potential_lower_bits: float | None = None
    potential_upper_bits: float | None = None
    potential_closed_bits: float | None = None
    gap_bits: float | None = None
    methods: dict = field(default_factory=dict)
    best_circuit: dict | None = None

    def to_json(self) -> dict:
        raw = asdict(self)
        out = {"input": raw.pop("input"), "class": raw.pop("state_class")}
        out.update(raw)
        for k in VALUE_COLUMNS:
            out[k] = _round(out[k])
        return out


VALUE_COLUMNS = (
    "eof_bits",
    "sof_nats",
    "potential_lower_bits",
    "potential_upper_bits",
    "potential_closed_bits",
    "gap_bits",
)


@dataclass
class SearchConfig:
    grid: int = 32
    restarts: int = 2
    ancillas: int = 1


def analyze_state(
    cov: CovarianceMatrix,
    want_eof: bool,
    want_sof: bool,
    want_potential: bool,
    strict: bool,
    search: SearchConfig,
    numeric: int | None = None,
) -> AnalysisRecord:
    """Compute the requested quantities.

    With ``strict`` an unsupported quantity raises; otherwise it is left
    empty and tagged ``unsupported`` in ``methods``.
    """
    rep = validate_physical(cov)
    if not rep.is_physical:
        raise Unphysical(rep.nu_minus)
    cls = classify(cov)
    rec = AnalysisRecord(input=state_document(cov), state_class=cls.kind.value)
    if cls.balanced and cls.kind is not ClassKind.BALANCED:
        rec.methods["balanced_flag"] = True
    if want_eof:
        if numeric is not None:
            res = eof_numeric(cov, seed=numeric)
        else:
            res = eof(cov)
        rec.eof_bits = res.value
        rec.methods["eof"] = res.method.value
    if want_sof:
        try:
            res = sof_dispatch(cov)
            rec.sof_nats = res.value
            rec.methods["sof"] = res.method.value
        except UnsupportedClass:
            if strict:
                raise
            rec.methods["sof"] = "unsupported"
    if want_potential:
        report = potential_search(cov, grid=search.grid, restarts=search.restarts, ancillas=search.ancillas)
        rec.potential_lower_bits = report.lower
        rec.potential_upper_bits = report.upper
        rec.potential_closed_bits = report.closed
        rec.gap_bits = report.gap
        rec.methods["potential"] = "closed_form+search" if report.closed is not None else "search"
        if report.upper is None:
            rec.methods["potential_upper"] = "unsupported"
        if report.best_circuit is not None:
            rec.best_circuit = report.best_circuit.describe()
    return rec


CSV_COLUMNS = ("class",) + VALUE_COLUMNS + ("eof_method", "sof_method", "matrix_xpxp")


def _csv_row(rec: AnalysisRecord) -> list[str]:
    row = [rec.state_class] + [fmt(getattr(rec, k)) for k in VALUE_COLUMNS]
    row += [rec.methods.get("eof", ""), rec.methods.get("sof", ""), json.dumps(rec.input["matrix"])]
    return row


def _text(rec: AnalysisRecord) -> str:
    lines = [f"class: {rec.state_class}"]
    for k in VALUE_COLUMNS:
        v = getattr(rec, k)
        if v is not None:
            lines.append(f"{k}: {fmt(v)}")
    for k, v in rec.methods.items():
        lines.append(f"method.{k}: {v}")
    if rec.best_circuit is not None:
        lines.append(f"best_circuit: {json.dumps(rec.best_circuit)}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# commands


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SpecParseError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _search_config(args) -> SearchConfig:
    return SearchConfig(grid=args.grid, restarts=args.restarts, ancillas=getattr(args, "ancillas", 1))


def cmd_analyze(args, out) -> int:
    docs = load_documents(args.spec)
    flags = (args.eof, args.sof, args.potential)
    explicit = any(flags) and not args.all
    want = flags if explicit else (True, True, True)
    numeric = None
    if args.numeric:
        numeric = _seed(args)
        print(f"# seed: {numeric}", file=out)
    records = []
    for doc in docs:
        cov = parse_state(doc)
        records.append(analyze_state(cov, *want, strict=explicit, search=_search_config(args), numeric=numeric))
    if args.json:
        payload = [r.to_json() for r in records]
        json.dump(payload if len(payload) > 1 else payload[0], out, indent=2)
        out.write("\n")
    elif args.csv:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(_csv_row(r))
    else:
        out.write("\n\n".join(_text(r) for r in records) + "\n")
    return EXIT_OK


def _sweep_values(spec: Sequence[str]) -> tuple[str, np.ndarray]:
    name, lo, hi, steps = spec
    try:
        lo_f, hi_f, n = float(lo), float(hi), int(steps)
    except ValueError:
        raise SpecParseError(f"--param {name}: FROM/TO must be numbers and STEPS an integer") from None
    if n < 1:
        raise SpecParseError(f"--param {name}: STEPS must be >= 1")
    return name, np.linspace(lo_f, hi_f, n + 1)


SWEEP_COLUMNS = ("status", "nu_minus", "class") + VALUE_COLUMNS + ("message",)


def cmd_sweep(args, out) -> int:
    docs = load_documents(args.template)
    if len(docs) != 1:
        raise SpecParseError("sweep needs a single template document")
    template = docs[0]
    if not isinstance(template, dict) or template.get("class") not in NAMED_PARAMS:
        raise SpecParseError("sweep template must be a named-class document")
    allowed = NAMED_PARAMS[template["class"]]
    axes = [_sweep_values(p) for p in args.param]
    if not 1 <= len(axes) <= 2:
        raise SpecParseError("sweep takes one or two --param options")
    names = [n for n, _ in axes]
    for n in names:
        if n not in allowed:
            raise SpecParseError(f"parameter {n!r} is not a parameter of class {template['class']!r} {allowed}")
    if len(set(names)) != len(names):
        raise SpecParseError("swept parameters must be distinct")

    target = open(args.output, "w", newline="") if args.output else out
    try:
        w = csv.writer(target, lineterminator="\n")
        w.writerow(names + [f"{c}" for c in SWEEP_COLUMNS])
        search = _search_config(args)
        for values in itertools.product(*[v for _, v in axes]):
            doc = dict(template)
            doc.update({n: float(v) for n, v in zip(names, values)})
            row = {c: "" for c in SWEEP_COLUMNS}
            try:
                cov = parse_state(doc)
                row["nu_minus"] = fmt(validate_physical(cov).nu_minus)
                rec = analyze_state(cov, True, True, not args.no_potential, False, search)
                row["status"] = "ok"
                row["class"] = rec.state_class
                for k in VALUE_COLUMNS:
                    row[k] = fmt(getattr(rec, k))
            except Unphysical as exc:
                row["status"], row["message"] = "unphysical", str(exc)
            except UnsupportedClass as exc:
                row["status"], row["message"] = "unsupported", str(exc)
            except GaussCatError as exc:
                row["status"], row["message"] = "error", str(exc)
            w.writerow([fmt(float(v)) for v in values] + [row[c] for c in SWEEP_COLUMNS])
    finally:
        if target is not out:
            target.close()
    return EXIT_OK


@dataclass
class SuiteResult:
    name: str
    total: int = 0
    passed: int = 0
    max_violation: float = 0.0
    worst_state: dict | None = None

    def record(self, violation: float, tol: float, state: Callable[[], dict]):
        self.total += 1
        if violation <= tol:
            self.passed += 1
        elif violation > self.max_violation or self.worst_state is None:
            self.worst_state = state()
        self.max_violation = max(self.max_violation, violation)

    @property
    def ok(self) -> bool:
        return self.passed == self.total


def suite_bounds(rng, n: int, search: SearchConfig) -> SuiteResult:
    """``eof <= potential lower <= h(exp(-S))`` on random block states."""
    res = SuiteResult("bounds")
    for _ in range(n):
        cov = random_block_state(rng).to_covariance()
        rep = potential_search(cov, grid=search.grid, restarts=search.restarts, ancillas=1)
        v = max(eof(cov).value - rep.lower, rep.lower - rep.upper, 0.0)
        res.record(v, 1e-7, lambda: state_document(cov))
    return res


def suite_interlacing(rng, n: int) -> SuiteResult:
    """Removing ``y`` never increases the squeezing of a pure state."""
    res = SuiteResult("interlacing")
    for _ in range(n):
        p = random_pure_param(rng)
        full = sof_pure(pure_from_zy(p)).value
        bare = sof_pure(pure_from_zy(type(p)(p.z, np.zeros((2, 2))))).value
        res.record(max(bare - full, 0.0), 1e-10, lambda: {"z": p.z.tolist(), "y": p.y.tolist()})
    return res


def suite_kappa_tau(rng, n: int) -> SuiteResult:
    """``lambda_-^2 exp(4 r_o) = 1``, ``kappa >= 0`` and EoF = h(exp(-S)) on entangled balanced states."""
    res = SuiteResult("appendixB")
    for _ in range(n):
        a, b, c = random_balanced_params(rng)
        d = balanced_kappa_tau(a, b, c)
        ident = abs(d["lambda_minus"] ** 2 * math.exp(4.0 * d["r_o"]) - 1.0)
        equality = abs(eof_balanced(a, b, c).value - aux_h(math.exp(-sof_balanced(a, b, c).value)))
        v = max(ident, equality, max(-d["kappa"], 0.0))
        res.record(v, 1e-10, lambda: {"class": "balanced", "a": a, "b": b, "c": c})
    return res


def suite_ellipse(rng, n: int) -> SuiteResult:
    """Ellipse solver against both closed forms, plus cone residuals."""
    res = SuiteResult("ellipse")
    phis = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    for _ in range(n):
        a, c1, c2 = random_symmetric_params(rng)
        blk = to_block(symmetric_state(a, c1, c2))
        v = abs(sof_block(blk).value - sof_symmetric(a, c1, c2).value)
        try:
            ell = ellipse_parametrize(blk)
            up, down = ell.residuals(phis)
            v = max(v, float(np.max(np.abs(up))), float(np.max(np.abs(down))))
        except GaussCatError:
            pass  # outside the two-sided regime there is no ellipse
        res.record(v, 1e-7, lambda: {"class": "symmetric", "a": a, "c1": c1, "c2": c2})

        a, b, c = random_balanced_params(rng, entangled=False)
        cov = balanced_state(a, b, c)
        v = abs(sof_block(to_block(cov)).value - sof_balanced(a, b, c).value)
        res.record(v, 1e-7, lambda: {"class": "balanced", "a": a, "b": b, "c": c})
    return res


SUITES = ("bounds", "interlacing", "appendixB", "ellipse")


def cmd_verify(args, out) -> int:
    seed = _seed(args)
    print(f"seed: {seed}", file=out)
    names = SUITES if args.suite == "all" else (args.suite,)
    search = _search_config(args)
    failed = False
    for i, name in enumerate(names):
        rng = seeded_rng(seed + i)
        if name == "bounds":
            res = suite_bounds(rng, args.n, search)
        elif name == "interlacing":
            res = suite_interlacing(rng, args.n)
        elif name == "appendixB":
            res = suite_kappa_tau(rng, args.n)
        else:
            res = suite_ellipse(rng, args.n)
        status = "PASS" if res.ok else "FAIL"
        print(f"{name}: {status} {res.passed}/{res.total} max_violation={res.max_violation:.3e}", file=out)
        if not res.ok:
            failed = True
            print(f"{name}: offending state {json.dumps(res.worst_state)}", file=out)
    return EXIT_VIOLATION if failed else EXIT_OK


def _print_matrix(m: np.ndarray, out, label: str):
    print(f"{label}:", file=out)
    for row in m:
        print("  " + " ".join(f"{v: .12g}" for v in row), file=out)


def cmd_circuit(args, out) -> int:
    docs = load_documents(args.spec)
    if len(docs) != 1:
        raise SpecParseError("circuit needs a single state document")
    cov = parse_state(docs[0])
    rep = validate_physical(cov)
    if not rep.is_physical:
        raise Unphysical(rep.nu_minus)
    upper = potential_upper_bound(cov) if is_block(cov) else None
    if args.apply:
        out_cov, op = symmetric_saturating_circuit(cov)
        print(f"circuit: saturating ({'identity, already saturated' if op.label == 'I' else op.label})", file=out)
        _print_matrix(op.matrix, out, "operation (xpxp)")
    else:
        report = potential_search(cov, grid=args.grid, restarts=args.restarts, ancillas=args.ancillas)
        spec = report.best_circuit
        out_cov = spec.apply(cov)
        print(f"circuit: {json.dumps(spec.describe())}", file=out)
        for fam, val in report.by_family.items():
            print(f"best_{fam}_bits: {fmt(val)}", file=out)
    _print_matrix(out_cov.xpxp(), out, "output covariance (xpxp)")
    value = eof(out_cov).value
    print(f"input_eof_bits: {fmt(eof(cov).value)}", file=out)
    print(f"output_eof_bits: {fmt(value)}", file=out)
    if upper is not None:
        print(f"potential_upper_bits: {fmt(upper)}", file=out)
        print(f"saturated: {'yes' if abs(value - upper) <= 1e-9 else 'no'} (|diff| = {abs(value - upper):.3e})", file=out)
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gausscat", description="EoF, SoF and EoF-potential of two-mode Gaussian states.")
    sub = p.add_subparsers(dest="command", required=True)

    def search_flags(sp, grid):
        sp.add_argument("--grid", type=int, default=grid, help=f"angle grid per circuit parameter (default {grid})")
        sp.add_argument("--restarts", type=int, default=2, help="grid points refined per circuit family")

    a = sub.add_parser("analyze", help="EoF (bits), SoF (nats) and EoF-potential bounds of states")
    a.add_argument("spec", help="inline JSON, a file path, or - for stdin")
    a.add_argument("--eof", action="store_true")
    a.add_argument("--sof", action="store_true")
    a.add_argument("--potential", action="store_true")
    a.add_argument("--all", action="store_true", help="everything available for the state (default)")
    a.add_argument("--numeric", action="store_true", help="EoF by the numerical convex roof instead")
    a.add_argument("--seed", type=int, default=None)
    a.add_argument("--ancillas", type=int, choices=(0, 1), default=1)
    fmt_group = a.add_mutually_exclusive_group()
    fmt_group.add_argument("--json", action="store_true")
    fmt_group.add_argument("--csv", action="store_true")
    search_flags(a, 32)

    s = sub.add_parser("sweep", help="CSV table over one or two parameters of a named class")
    s.add_argument("template", help="named-class JSON document holding the fixed parameters")
    s.add_argument("--param", nargs=4, action="append", required=True, metavar=("NAME", "FROM", "TO", "STEPS"))
    s.add_argument("-o", "--output", help="CSV file (default stdout)")
    s.add_argument("--no-potential", action="store_true", help="skip the potential search")
    search_flags(s, 32)

    v = sub.add_parser("verify", help="randomized checks of the bound chain and identities")
    v.add_argument("--suite", choices=("all",) + SUITES, default="all")
    v.add_argument("-n", type=int, default=1000, help="samples per suite")
    v.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    search_flags(v, 4)

    c = sub.add_parser("circuit", help="apply the saturating circuit or search passive circuits")
    c.add_argument("spec")
    mode = c.add_mutually_exclusive_group(required=True)
    # "eq35" is the documented interface name; "saturate" is an alias
    mode.add_argument("--apply", choices=("saturate", "eq35"), help="apply the symmetric-state saturating circuit")
    mode.add_argument("--search", action="store_true")
    c.add_argument("--ancillas", type=int, choices=(0, 1), default=1)
    search_flags(c, 32)
    return p


COMMANDS = {"analyze": cmd_analyze, "sweep": cmd_sweep, "verify": cmd_verify, "circuit": cmd_circuit}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; here 2 means an unphysical state
        return EXIT_PARSE if exc.code == 2 else int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except SpecParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except Unphysical as exc:
        print(f"error: {exc} (nu_minus = {exc.nu_minus:.12g})", file=sys.stderr)
        return EXIT_UNPHYSICAL
    except UnsupportedClass as exc:
        print(f"error: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
