"""Command-line interface: ``hlav <subcommand> [flags]``.

Exit codes: 0 success, 1 a verification did not pass, 2 usage or
precondition error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import logging
import math
import sys
from typing import Iterable, Sequence

from . import averages as av
from .correlation import (
    TupleSpec,
    alternating_function,
    constant_function,
    pair_counts,
    prime_indicator,
    tuple_count,
)
from .errors import HlavError, PreconditionError, StoreError, StoreIOError
from .sieve import PrimeBitmap, SieveConfig, build_sieve
from .singular import (
    DEFAULT_PRIME_BOUND,
    gallagher_average,
    ktuple_gallagher_average,
    pair_constant,
    tuple_constant,
    weighted_singular_average,
)
from .store import append_reports, bitmap_cache_path, load_bitmap, resolve_cache_dir, save_bitmap

log = logging.getLogger("hlav")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
REPORT_COLUMNS = ("statement_id", "x", "params", "lhs", "rhs", "ratio", "margin", "pass", "notes")
STATEMENTS = {
    "thm1": av.StatementId.THM1_LONG,
    "thm1w": av.StatementId.THM1_WINDOW,
    "thm2": av.StatementId.THM2_WEIGHTED,
    "cor2": av.StatementId.COR2_UNWEIGHTED,
    "thm3": av.StatementId.THM3_KTUPLE,
    "thm4": av.StatementId.THM4_STRIDE,
    "lemma1": av.StatementId.LEMMA1,
    "lemma2": av.StatementId.LEMMA2,
}


class UsageError(Exception):
    pass


# ---- argument types -------------------------------------------------------

def natural(text: str) -> int:
    """Nonnegative integer; accepts ``1e6``-style literals when they are integral."""
    try:
        value = int(text)
    except ValueError:
        try:
            f = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not math.isfinite(f) or f != int(f):
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        value = int(f)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {text!r}")
    return value


def positive(text: str) -> int:
    value = natural(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def real(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return value


def int_list(text: str) -> list[int]:
    return [natural(part) for part in text.split(",") if part.strip()]


def ratio_band(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected LO,HI")
    lo, hi = real(parts[0]), real(parts[1])
    if lo > hi:
        raise argparse.ArgumentTypeError("LO must not exceed HI")
    return lo, hi


# ---- output ---------------------------------------------------------------

def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_params(params: dict) -> str:
    return ";".join(f"{k}={format_value(v)}" for k, v in params.items())


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def emit_table(header: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "csv":
        return _csv_text(header, rows)
    return "".join(json.dumps(dict(zip(header, row))) + "\n" for row in rows)


def emit_report(reports: Sequence[av.VerificationReport], fmt: str) -> str:
    """Serialise reports as CSV (fixed columns) or JSON lines."""
    if fmt == "json":
        return "".join(json.dumps(r.to_dict()) + "\n" for r in reports)
    rows = []
    for r in reports:
        d = r.to_dict()
        d["params"] = format_params(r.params)
        rows.append([d[c] for c in REPORT_COLUMNS])
    return _csv_text(REPORT_COLUMNS, rows)


# ---- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--cache-dir", help="bitmap cache (default: $HLAV_CACHE_DIR or the platform cache dir)")
    g.add_argument("--no-cache", action="store_true", help="always sieve afresh, never touch the cache")
    g.add_argument("--limit", type=positive, help="sieve limit override (must cover the operation)")
    g.add_argument("--threads", type=positive, default=1)
    g.add_argument("--ratio-band", type=ratio_band, default=(0.75, 1.25), metavar="LO,HI")
    g.add_argument("--require-margin", type=real, default=0.0, metavar="MIN")
    g.add_argument("--prime-bound", type=positive, default=DEFAULT_PRIME_BOUND,
                   help="Euler product truncation point")
    g.add_argument("--report-log", help="append reports to this JSON-lines file")
    g.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="hlav", description="Prime pair counts, singular series "
                                     "constants and averaged Hardy-Littlewood checks.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("sieve", parents=[common], help="build and save a prime bitmap")
    p.add_argument("--out", help="output file (default: the cache)")

    p = sub.add_parser("paircount", parents=[common], help="pi_{2k} counts with predictions")
    p.add_argument("--x", type=natural, required=True)
    p.add_argument("--max-shift", type=positive, required=True)
    p.add_argument("--lo", type=natural, default=0)

    p = sub.add_parser("tuplecount", parents=[common], help="prime tuple count")
    p.add_argument("--x", type=natural, required=True)
    p.add_argument("--shifts", type=int_list, required=True)

    p = sub.add_parser("constants", parents=[common], help="singular series constants")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--shift", type=positive, help="even shift 2k; prints C_{2k}")
    grp.add_argument("--tuple", type=int_list, help="comma-separated even shifts")

    p = sub.add_parser("gallagher", parents=[common], help="averages of singular series constants")
    p.add_argument("--y", type=natural)
    p.add_argument("--weighted", action="store_true", help="triangular-weight average up to E")
    p.add_argument("--E", type=real)
    p.add_argument("--k", type=positive, default=1)

    p = sub.add_parser("verify", parents=[common], help="check one averaged statement at finite x")
    p.add_argument("statement", choices=sorted(STATEMENTS))
    p.add_argument("--x", type=natural, required=True)
    p.add_argument("--theta", type=real)
    p.add_argument("--h", type=natural)
    p.add_argument("--C", type=real)
    p.add_argument("--E", type=real)
    p.add_argument("--k", type=positive, default=2)
    p.add_argument("--m", type=positive)
    p.add_argument("--B", type=int_list)
    p.add_argument("--function", choices=("prime", "one", "alternating"), default="prime",
                   help="arithmetic function for lemma2")

    p = sub.add_parser("scan", parents=[common], help="weighted short averages over a grid of x")
    p.add_argument("--x-grid", type=int_list, required=True)
    p.add_argument("--E-rule", default="log2", help="log2, sqrtlog, or a multiplier c (E = c ln x)")
    return parser


# ---- helpers --------------------------------------------------------------

def _thresholds(args) -> av.Thresholds:
    lo, hi = args.ratio_band
    return av.Thresholds(lo, hi, args.require_margin)


def get_bitmap(args, required: int) -> PrimeBitmap:
    """Load or build a bitmap of exactly ``required`` (or ``--limit``)."""
    limit = required if args.limit is None else args.limit
    if limit < required:
        raise UsageError(f"--limit {limit} is below the {required} this operation needs")
    limit = max(limit, 1)
    config = SieveConfig(parallelism=args.threads)
    if args.no_cache:
        return build_sieve(limit, config)
    path = bitmap_cache_path(resolve_cache_dir(args.cache_dir), limit)
    if path.exists():
        try:
            return load_bitmap(path)
        except StoreError as exc:
            log.warning("ignoring unusable cache file: %s", exc)
    pb = build_sieve(limit, config)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_bitmap(pb, path)
    except (OSError, StoreError) as exc:
        log.warning("could not cache bitmap: %s", exc)
    return pb


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n for n in missing)
        raise UsageError(f"{args.statement} requires {flags}")


def _short_E(args) -> tuple[float, int]:
    if args.x < 3:
        raise UsageError("--x must be >= 3")
    E = args.C * math.log(args.x) if args.E is None else args.E
    return E, math.floor(E)


# ---- commands -------------------------------------------------------------

def cmd_sieve(args) -> str:
    if args.limit is None:
        raise UsageError("sieve requires --limit")
    pb = build_sieve(args.limit, SieveConfig(parallelism=args.threads))
    if args.out:
        path = args.out
    elif args.no_cache:
        path = None
    else:
        path = bitmap_cache_path(resolve_cache_dir(args.cache_dir), args.limit)
        path.parent.mkdir(parents=True, exist_ok=True)
    if path is not None:
        save_bitmap(pb, path)
    return emit_table(("limit", "prime_count", "path"), [(pb.limit, pb.pi(pb.limit), str(path or ""))],
                      args.format)


def cmd_paircount(args) -> str:
    if args.max_shift < 2 or args.max_shift % 2:
        raise UsageError("--max-shift must be an even number >= 2")
    if args.lo >= args.x:
        raise UsageError("--lo must be below --x")
    if args.x < 2:
        raise UsageError("--x must be >= 2")
    pb = get_bitmap(args, args.x + args.max_shift)
    table = pair_counts(pb, args.lo, args.x, args.max_shift, args.threads)
    scale = (args.x - args.lo) / math.log(args.x) ** 2
    rows = [(s, c, pair_constant(s // 2, args.prime_bound).value * scale) for s, c in table.rows()]
    return emit_table(("shift", "count", "prediction"), rows, args.format)


def cmd_tuplecount(args) -> str:
    spec = TupleSpec(tuple(args.shifts))
    if args.x < 2:
        raise UsageError("--x must be >= 2")
    pb = get_bitmap(args, args.x + spec.shifts[-1])
    count = tuple_count(pb, args.x, spec)
    const = tuple_constant(spec, args.prime_bound)
    prediction = const.value * args.x / math.log(args.x) ** (len(spec) + 1)
    return emit_table(("shifts", "count", "prediction"), [(list(spec.shifts), count, prediction)], args.format)


def cmd_constants(args) -> str:
    if args.shift is not None:
        if args.shift % 2:
            raise UsageError("--shift must be even")
        name, sv = f"C_{args.shift}", pair_constant(args.shift // 2, args.prime_bound)
    else:
        spec = TupleSpec(tuple(args.tuple))
        name = "C_" + ",".join(map(str, spec.shifts))
        sv = tuple_constant(spec, args.prime_bound)
    return emit_table(("name", "value", "tail_bound", "prime_bound", "exactly_zero"),
                      [(name, sv.value, sv.tail_bound, sv.prime_bound, sv.exactly_zero)], args.format)


def cmd_gallagher(args) -> str:
    if args.weighted:
        if args.E is None:
            raise UsageError("--weighted requires --E")
        value = weighted_singular_average(args.E, args.prime_bound)
        row = ("weighted", "", args.E, 1, value)
    else:
        if args.y is None:
            raise UsageError("gallagher requires --y (or --weighted --E)")
        value = ktuple_gallagher_average(args.y, args.k, args.prime_bound)
        row = ("plain", args.y, "", args.k, value)
    return emit_table(("kind", "y", "E", "k", "value"), [row], args.format)


def _verify_reports(args) -> list[av.VerificationReport]:
    th, x, st, n = _thresholds(args), args.x, args.statement, args.threads
    if st in ("thm1", "thm1w"):
        _require(args, "theta", *(("h",) if st == "thm1w" else ()))
        M = av.long_average_shift_bound(x, args.theta)
        if st == "thm1":
            pb = get_bitmap(args, x + M)
            return [av.verify_long_average(pb, x, args.theta, th, n)]
        pb = get_bitmap(args, x + args.h + M)
        return [av.verify_window_average(pb, x, args.h, args.theta, th, n)]
    if st in ("thm2", "cor2", "thm3"):
        _require(args, "C")
        E, F = _short_E(args)
        pb = get_bitmap(args, x + 2 * F)
        if st == "thm2":
            return [av.verify_weighted_short(pb, x, args.C, E, th, n)]
        if st == "cor2":
            return [av.verify_unweighted_short(pb, x, args.C, E, th, n)]
        return [av.verify_ktuple_weighted(pb, x, args.C, E, args.k, th)]
    if st == "thm4":
        _require(args, "m", "h")
        pb = get_bitmap(args, x + 2 * args.m * (args.h // (2 * args.m)))
        return [av.verify_stride(pb, x, args.m, args.h, th, n)]
    _require(args, "B")
    B = av.ShiftSet.of(args.B)
    if st == "lemma1":
        pb = get_bitmap(args, x + B.elements[-1])
        return [av.lemma1_margin(pb, x, B, th)]
    top = x + B.elements[-1]
    if args.function == "prime":
        A = prime_indicator(get_bitmap(args, top))
    elif args.function == "one":
        A = constant_function(1, top)
    else:
        A = alternating_function(top)
    return [av.lemma2_margin(A, x, B, th)]


def cmd_verify(args):
    reports = _verify_reports(args)
    return reports, emit_report(reports, args.format)


def cmd_scan(args):
    plan = []
    for x in args.x_grid:
        if x < 3:
            raise UsageError("grid points must be >= 3")
        plan.append(x + 2 * math.floor(av.resolve_E(x, args.E_rule)))
    pb = get_bitmap(args, max(plan, default=1))
    reports = av.conjecture2_scan(pb, args.x_grid, args.E_rule, _thresholds(args), args.threads,
                                  args.prime_bound)
    return reports, emit_report(reports, args.format)


COMMANDS = {
    "sieve": cmd_sieve,
    "paircount": cmd_paircount,
    "tuplecount": cmd_tuplecount,
    "constants": cmd_constants,
    "gallagher": cmd_gallagher,
    "verify": cmd_verify,
    "scan": cmd_scan,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = logging.StreamHandler(stderr)
    handler.setFormatter(logging.Formatter("hlav: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return _dispatch(args, stdout, stderr)
    finally:
        log.removeHandler(handler)


def _dispatch(args, stdout, stderr) -> int:
    try:
        result = COMMANDS[args.command](args)
    except (UsageError, PreconditionError) as exc:
        print(f"hlav {args.command}: error: {exc}", file=stderr)
        return EXIT_USAGE
    except (StoreIOError, OSError) as exc:
        print(f"hlav {args.command}: I/O error: {exc}", file=stderr)
        return EXIT_IO
    except HlavError as exc:
        print(f"hlav {args.command}: error: {exc}", file=stderr)
        return EXIT_USAGE
    if isinstance(result, tuple):
        reports, text = result
        stdout.write(text)
        if args.report_log:
            try:
                append_reports(reports, args.report_log)
            except StoreIOError as exc:
                print(f"hlav {args.command}: I/O error: {exc}", file=stderr)
                return EXIT_IO
        return EXIT_FAILED if any(r.passed is False for r in reports) else EXIT_OK
    stdout.write(result)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
