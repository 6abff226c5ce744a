"""Command line entry point: ``taxodev describe|hellwig|similarity|pipeline``.

Flags override config-file values. Exit codes: 0 success, 2 configuration
error, 3 data error, 4 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import TaxodevError
from .report import (
    exit_code_for,
    load_config,
    run_describe,
    run_hellwig,
    run_pipeline,
    run_similarity,
)


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--panel", help="long-format panel CSV (entity,period,variable,value)")
    parser.add_argument("--catalog", help="variable catalog CSV (variable,direction,units)")
    parser.add_argument("--grouping", help="entity-to-group CSV (entity,group)")
    parser.add_argument("--years", help="comma-separated analysis years, e.g. 2005,2009,2015,2018")
    parser.add_argument("--k-min", dest="k_min", type=int, help="smallest cluster count (default 2)")
    parser.add_argument("--k-max", dest="k_max", type=int, help="largest cluster count (default 6)")
    parser.add_argument("--methods", help="comma-separated subset of ward,kmeans,pam")
    parser.add_argument("--seed", type=int, help="master random seed (default 42)")
    parser.add_argument("--restarts", type=int, help="k-means restarts (default 50)")
    parser.add_argument("--out", help="output directory (default ./out)")
    parser.add_argument("--svg", action="store_const", const=True, default=None,
                        help="also render SVG charts")
    parser.add_argument("--verbose", action="store_true", help="log notices to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taxodev",
        description="Development-measure and cluster-similarity analysis of indicator panels",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("describe", "per-group aggregate time series"),
        ("hellwig", "development measure, paths, rankings, percent change"),
        ("similarity", "clustering with the four-index validity grid per year"),
        ("pipeline", "hellwig + similarity (+ describe when a grouping is set)"),
    ):
        _add_common_flags(sub.add_parser(name, help=help_text))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
    )
    overrides = {
        key: getattr(args, key)
        for key in (
            "panel", "catalog", "grouping", "years", "k_min", "k_max",
            "methods", "seed", "restarts", "out", "svg",
        )
    }
    try:
        config = load_config(args.config, overrides)
        failures = {}
        if args.command == "describe":
            written = run_describe(config)
        elif args.command == "hellwig":
            written = run_hellwig(config)
        elif args.command == "similarity":
            written, failures = run_similarity(config)
        else:
            written, failures = run_pipeline(config)
    except TaxodevError as exc:
        print(f"taxodev: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    for path in written:
        print(path)
    if failures:
        for year in sorted(failures):
            print(f"taxodev: error: year {year}: {failures[year]}", file=sys.stderr)
        return exit_code_for(failures[min(failures)])
    return 0


if __name__ == "__main__":
    sys.exit(main())
