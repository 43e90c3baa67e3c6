"""Command-line front end: ``cpsm --data FILE --minsup N [constraints]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from .constraints import ConfigError, MiningConfig
from .data import DataError, concat, load, resolve_minsup, stats
from .kernel import SearchLimit
from .mining import mine

log = logging.getLogger("cpsm")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_LIMIT = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cpsm", description="Constraint-based sequential pattern mining.")
    p.add_argument("--data", required=True, metavar="PATH", help="dataset file")
    p.add_argument("--format", choices=("plain", "spmf"), default="plain")
    p.add_argument("--model", choices=("global", "decomposed"), default="global")
    p.add_argument("--projected-freq", choices=("on", "off"), default=None,
                   help="default: on for global, off for decomposed")
    p.add_argument("--minsup", default="1", metavar="N|P%")
    p.add_argument("--maxsup", type=int, metavar="N")
    p.add_argument("--minsize", type=int, metavar="N")
    p.add_argument("--maxsize", type=int, metavar="N")
    p.add_argument("--maxgap", type=int, metavar="N")
    p.add_argument("--maxspan", type=int, metavar="N")
    p.add_argument("--contains", action="append", default=[], metavar="TOK")
    p.add_argument("--excludes", action="append", default=[], metavar="TOK")
    p.add_argument("--regex", metavar="EXPR")
    p.add_argument("--discriminative", metavar="NEGPATH:ALPHA",
                   help="negative-class dataset and minimum support ratio")
    p.add_argument("--closed", action="store_true")
    p.add_argument("--witness", action="store_true", help="report embeddings (decomposed model)")
    p.add_argument("--json", action="store_true", help="emit the full report as JSON")
    p.add_argument("--stats", action="store_true", help="print dataset statistics and exit")
    p.add_argument("--time-limit", type=float, metavar="SECONDS")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def check_flags(args) -> None:
    """Reject flag combinations the chosen model cannot honour."""
    if args.model != "decomposed":
        for flag, value in (("--maxgap", args.maxgap), ("--maxspan", args.maxspan), ("--witness", args.witness)):
            if value not in (None, False):
                name = flag[2:].replace("max", "max-")
                raise ConfigError(f"{flag} conflicts with --model {args.model}: {name} requires the decomposed model")


def split_discriminative(spec: str) -> tuple[str, float]:
    path, sep, alpha = spec.rpartition(":")
    if not sep or not path:
        raise ConfigError(f"--discriminative expects NEGPATH:ALPHA, got {spec!r}")
    try:
        return path, float(alpha)
    except ValueError:
        raise ConfigError(f"--discriminative ratio is not a number: {alpha!r}") from None


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=err)
    try:
        check_flags(args)
        neg_path, alpha = (None, None)
        if args.discriminative:
            neg_path, alpha = split_discriminative(args.discriminative)
    except ConfigError as e:
        print(f"error: {e}", file=err)
        return EXIT_CONFIG

    try:
        db = load(args.data, args.format)
        positive = None
        if neg_path is not None:
            db, positive, _ = concat(db, load(neg_path, args.format))
    except (OSError, DataError) as e:
        print(f"error: {e}", file=err)
        return EXIT_IO

    if args.stats:
        print(stats(db).format(), file=out)
        return EXIT_OK

    try:
        scope_size = len(positive) if positive is not None else len(db)
        try:
            theta = resolve_minsup(args.minsup, scope_size)
        except ValueError:
            raise ConfigError(f"bad --minsup value {args.minsup!r}") from None
        pf = None if args.projected_freq is None else args.projected_freq == "on"
        config = MiningConfig(
            theta=theta,
            max_support=args.maxsup,
            min_size=args.minsize,
            max_size=args.maxsize,
            max_gap=args.maxgap,
            max_span=args.maxspan,
            discriminative=alpha,
            positive=positive,
            required=args.contains,
            forbidden=args.excludes,
            regex=args.regex,
            closed=args.closed,
            model=args.model,
            projected_frequency=pf,
        )
        report = mine(db, config, witnesses=args.witness, time_limit=args.time_limit)
    except ConfigError as e:
        print(f"error: {e}", file=err)
        return EXIT_CONFIG
    except SearchLimit:
        print(f"error: time limit of {args.time_limit}s reached", file=err)
        return EXIT_LIMIT
    except MemoryError:
        print("error: out of memory", file=err)
        return EXIT_LIMIT

    log.info("%d patterns, %d nodes, %.3fs", report.solution_count, report.nodes, report.wall_time)
    if args.json:
        json.dump(report.to_dict(), out, indent=2, ensure_ascii=False)
        out.write("\n")
    else:
        for line in report.lines():
            out.write(line + "\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())
