"""Command-line interface: ``cubicpoints <command> ...``.

Exit codes: 0 success, 1 an Undetermined verdict, 2 invalid input, 3 missing or bad data.
"""

from __future__ import annotations

import argparse
import datetime
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .arith import is_squarefree
from .classifier import (
    POINT_COUNT_PRIMES,
    SURVEY_BOUND,
    UNDETERMINED,
    classify,
    load_tables,
    run_survey,
    undetermined,
)
from .ecdb import DataError, FetchError, default_db, lmfdb_fetch, load_db
from .genus import LevelError, genus_biquotient, genus_quotient, genus_x0
from .homlattice import OutOfGuarantee, PairError, gram_matrix, quadratic_form_string, represents, validate_pair
from .trace import TraceError, count_points_ec, count_points_x0, trace_hecke

EXIT_OK, EXIT_UNDETERMINED, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3

log = logging.getLogger("cubicpoints")


class UsageError(Exception):
    pass


def _prime_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of primes, got {text!r}") from None


def _global_options(suppress: bool) -> argparse.ArgumentParser:
    # the subcommand copy uses SUPPRESS so a flag given before the command is not reset
    opts = argparse.ArgumentParser(add_help=False)

    def default(value):
        return argparse.SUPPRESS if suppress else value

    opts.add_argument("--db", default=default(None), help="curve CSV (default: $CUBICPOINTS_DB or the bundled table)")
    opts.add_argument("--tables", default=default(None), help="gonality tables TSV")
    opts.add_argument("--models", default=default(None), help="genus-2 sextic models CSV")
    opts.add_argument("--quadrics", default=default(None), help="genus-4 diagonal quadrics CSV")
    opts.add_argument("--format", choices=("json", "markdown"), default=default("json"))
    opts.add_argument("--out", default=default(None), help="write the report to this file instead of stdout")
    opts.add_argument("--stamp", action="store_true", default=default(False), help="wrap the report with version and time metadata")
    opts.add_argument("--fetch", action="store_true", default=default(False), help="allow LMFDB lookups for labels missing locally")
    opts.add_argument(
        "--primes",
        type=_prime_list,
        default=default(POINT_COUNT_PRIMES),
        help="primes for the point-count condition (default: 2,3,5,7,11,13)",
    )
    opts.add_argument("-v", "--verbose", action="store_true", default=default(False))
    return opts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cubicpoints",
        description="Cubic points on X_0(N)/w_d for square-free N.",
        parents=[_global_options(suppress=False)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    shared = [_global_options(suppress=True)]

    p = sub.add_parser("classify", parents=shared, help="classify one quotient X_0(N)/w_d")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--d", type=int, required=True)

    p = sub.add_parser("survey", parents=shared, help="classify every quotient up to a level bound")
    p.add_argument("--n-max", type=int, default=SURVEY_BOUND)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("gram", parents=shared, help="degree form on maps from X_0(N)/w_M to a curve of conductor M")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--curve", required=True, help="curve label, e.g. 65a1")

    p = sub.add_parser("genus", parents=shared, help="genus of X_0(N) or of a quotient")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--r", type=int, help="second involution for a biquotient")

    p = sub.add_parser("trace", parents=shared, help="trace of T_m on weight-2 cusp forms for Gamma_0(N)")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("points", parents=shared, help="point counts of X_0(N) (and optionally a curve) over F_p and F_p^2")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, choices=(1, 2))
    p.add_argument("--curve", help="also count points on this curve")
    return parser


# ---------------------------------------------------------------- helpers


def _open_db(args):
    return load_db(args.db) if args.db else default_db()


def _open_tables(args):
    return load_tables(args.tables, args.models, args.quadrics)


def _lookup_curve(db, label: str, allow_fetch: bool):
    try:
        return db[label]
    except KeyError:
        if not allow_fetch:
            raise UsageError(f"no curve labelled {label!r} in the database (use --fetch to ask LMFDB)") from None
    return lmfdb_fetch(label)


def _markdown_table(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _emit(args, payload, markdown: str) -> None:
    if args.format == "json":
        if args.stamp:
            payload = {
                "meta": {"version": __version__, "generated": datetime.datetime.now(datetime.timezone.utc).isoformat()},
                "report": payload,
            }
        text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    else:
        text = markdown
        if args.stamp:
            text += f"\n<!-- cubicpoints {__version__}, {datetime.datetime.now(datetime.timezone.utc).isoformat()} -->\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _check_level(N):
    if N < 1 or not is_squarefree(N):
        raise UsageError(f"level must be a square-free positive integer, got {N}")


# ---------------------------------------------------------------- commands


def cmd_classify(args) -> int:
    _check_level(args.level)
    if args.level % args.d or not 1 < args.d < args.level:
        raise UsageError(f"need a divisor d of {args.level} with 1 < d < {args.level}")
    db, tables = _open_db(args), _open_tables(args)
    c = classify(args.level, args.d, db, tables, primes=args.primes)
    md = _markdown_table(["genus", "(N,w_d)", "verdict", "reason"], [[c.genus, f"({c.N},w_{c.d})", c.verdict, c.reason]])
    _emit(args, c.to_dict(), md)
    return EXIT_UNDETERMINED if c.verdict == UNDETERMINED else EXIT_OK


def cmd_survey(args) -> int:
    db, tables = _open_db(args), _open_tables(args)
    report = run_survey(db, tables, args.n_max, primes=args.primes, jobs=args.jobs)
    rows = [
        [g, ", ".join(f"({N},w_{d})" for N, d in pairs)]
        for g, pairs in report["infinite_by_genus"].items()
    ]
    md = _markdown_table(["genus", "(N,w_d) with infinitely many cubic points"], rows)
    counts = {}
    for p in report["pairs"]:
        counts[p["verdict"]] = counts.get(p["verdict"], 0) + 1
    md += "\n" + ", ".join(f"{k}: {v}" for k, v in sorted(counts.items())) + "\n"
    _emit(args, report, md)
    bad = undetermined(report)
    for p in bad:
        log.error("undetermined: (%s, %s) %s", p["N"], p["d"], p["reason"])
    if bad or not report["sieve_bound_check"]["ok"]:
        return EXIT_UNDETERMINED
    return EXIT_OK


def cmd_gram(args) -> int:
    _check_level(args.level)
    db = _open_db(args)
    curve = _lookup_curve(db, args.curve, args.fetch)
    M = curve.conductor
    pair = validate_pair(curve, M, M)
    lattice = gram_matrix(args.level, pair)
    form = quadratic_form_string(lattice)
    payload = {
        "N": args.level,
        "curve": curve.label,
        "basis": list(lattice.basis),
        "gram": [list(r) for r in lattice.gram],
        "form": form,
        "represents_3": represents(lattice, 3) is not None,
    }
    _emit(args, payload, form + "\n")
    return EXIT_OK


def cmd_genus(args) -> int:
    _check_level(args.level)
    if args.r is not None:
        if args.d is None:
            raise UsageError("--r needs --d")
        value = genus_biquotient(args.level, args.d, args.r)
        key = {"N": args.level, "d": args.d, "r": args.r}
    elif args.d is not None:
        value = genus_quotient(args.level, args.d)
        key = {"N": args.level, "d": args.d}
    else:
        value = genus_x0(args.level)
        key = {"N": args.level}
    _emit(args, {**key, "genus": value}, f"{value}\n")
    return EXIT_OK


def cmd_trace(args) -> int:
    value = trace_hecke(args.level, args.m)
    _emit(args, {"N": args.level, "m": args.m, "trace": value}, f"{value}\n")
    return EXIT_OK


def cmd_points(args) -> int:
    ks = (args.k,) if args.k else (1, 2)
    curve = None
    if args.curve:
        curve = _lookup_curve(_open_db(args), args.curve, args.fetch)
    rows = []
    for k in ks:
        row = {"k": k, "x0": count_points_x0(args.level, args.p, k)}
        if curve is not None:
            row["curve"] = count_points_ec(curve, args.p, k)
        rows.append(row)
    payload = {"N": args.level, "p": args.p, "counts": rows}
    header = ["k", f"#X_0({args.level})"] + ([f"#{curve.label}"] if curve else [])
    md = _markdown_table(header, [[r["k"], r["x0"]] + ([r["curve"]] if curve else []) for r in rows])
    _emit(args, payload, md)
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "survey": cmd_survey,
    "gram": cmd_gram,
    "genus": cmd_genus,
    "trace": cmd_trace,
    "points": cmd_points,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, LevelError, TraceError, PairError, OutOfGuarantee, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (DataError, FetchError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
