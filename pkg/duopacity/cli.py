"""Command-line interface.

Commands:
    check     decide a criterion on a history
    verify    check a supplied witness
    prefixes  decide a criterion on every prefix of a history
    corpus    check the shipped histories against their expected verdicts
    fuzz      run the criteria comparison on seeded random histories

Inputs are file paths, ``-`` for standard input, ``corpus:<name>`` for a
shipped history or ``corpus:fig2_prefix:<n>`` for a generated one.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from .const import (
    CORPUS_PREFIX,
    CRITERION_DU_OPACITY,
    CRITERION_NAMES,
    DOMAIN,
    EXIT_REFUTED,
    EXIT_SATISFIED,
    EXIT_USAGE,
)
from .corpus import EXPECTED_VERDICTS, corpus_names, corpus_text, fig2_prefix, paper_history
from .criteria import check
from .exceptions import DuOpacityError, InputError, UnknownHistoryError
from .fuzz import compare_criteria, parse_config, random_history
from .history import prefix
from .models import Criterion, History, Report, Witness
from .parser import parse_history
from .report import parse_commits, parse_order, render_check, render_json, render_text
from .search import verify_witness

_LOGGER = logging.getLogger(__name__)

_FIG2_PREFIX = "fig2_prefix:"


def load_history(source: str) -> History:
    """Load a history from a path, ``-`` or a corpus pseudo-path.

    Raises:
        InputError: If the file cannot be read.
        UnknownHistoryError: For an unknown corpus name.
        HistoryParseError: If the text does not follow the grammar.
        MalformedHistoryError: If the history is not well-formed.
    """
    if source.startswith(CORPUS_PREFIX):
        name = source[len(CORPUS_PREFIX) :]
        if name.startswith(_FIG2_PREFIX):
            count = name[len(_FIG2_PREFIX) :]
            if not count.isdigit():
                raise UnknownHistoryError(f"Invalid reader count in {source!r}")
            return fig2_prefix(int(count))
        return paper_history(name)
    if source == "-":
        return parse_history(sys.stdin.read())
    try:
        text = Path(source).read_text(encoding="utf-8")
    except OSError as err:
        raise InputError(f"Cannot read {source}: {err}") from err
    return parse_history(text)


def _build_parser() -> argparse.ArgumentParser:
    """Build the argument parser."""
    parser = argparse.ArgumentParser(
        prog=DOMAIN,
        description="Decide du-opacity and related criteria on transactional memory histories.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="enable debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    check_cmd = commands.add_parser("check", help="decide a criterion on a history")
    check_cmd.add_argument("input", help="history file, '-' or corpus:<name>")
    check_cmd.add_argument("--criterion", choices=CRITERION_NAMES, default=CRITERION_DU_OPACITY)
    check_cmd.add_argument("--json", action="store_true", help="print the JSON report")
    check_cmd.add_argument("--witness", action="store_true", help="print the witness")
    check_cmd.add_argument("--budget", type=int, default=None, help="node budget per search")

    verify_cmd = commands.add_parser("verify", help="check a supplied witness")
    verify_cmd.add_argument("input", help="history file, '-' or corpus:<name>")
    verify_cmd.add_argument(
        "--criterion", choices=[str(item) for item in Criterion], default=CRITERION_DU_OPACITY
    )
    verify_cmd.add_argument("--order", required=True, help="transaction order, e.g. T2,T1")
    verify_cmd.add_argument("--commits", default="", help="pending-tryC choices, e.g. T5:C,T7:A")

    prefixes_cmd = commands.add_parser("prefixes", help="decide a criterion on every prefix")
    prefixes_cmd.add_argument("input", help="history file, '-' or corpus:<name>")
    prefixes_cmd.add_argument(
        "--criterion", choices=CRITERION_NAMES, default=CRITERION_DU_OPACITY
    )
    prefixes_cmd.add_argument("--budget", type=int, default=None, help="node budget per search")

    corpus_cmd = commands.add_parser("corpus", help="check the shipped histories")
    corpus_cmd.add_argument("--dump", metavar="NAME", help="print a shipped history instead")

    fuzz_cmd = commands.add_parser("fuzz", help="compare the criteria on random histories")
    fuzz_cmd.add_argument("--seed", type=int, default=0, help="first seed")
    fuzz_cmd.add_argument("--count", type=int, default=100, help="number of histories")
    fuzz_cmd.add_argument("--config", default="", help="generator settings, e.g. txn_count=3")
    fuzz_cmd.add_argument("--json", action="store_true", help="print a JSON summary")
    return parser


def _cmd_check(args: argparse.Namespace) -> int:
    history = load_history(args.input)
    report = Report(args.input, check(history, args.criterion, args.budget), len(history))
    _LOGGER.info("%s: %s satisfied=%s", args.input, args.criterion, report.satisfied)
    if args.json:
        print(render_json(report))
    else:
        print(render_text(report, show_witness=args.witness))
    return EXIT_SATISFIED if report.satisfied else EXIT_REFUTED


def _cmd_verify(args: argparse.Namespace) -> int:
    history = load_history(args.input)
    witness = Witness(parse_order(args.order), parse_commits(args.commits))
    outcome = verify_witness(history, witness, Criterion(args.criterion))
    print(render_check(args.input, args.criterion, outcome))
    return EXIT_SATISFIED if outcome.ok else EXIT_REFUTED


def _cmd_prefixes(args: argparse.Namespace) -> int:
    history = load_history(args.input)
    failing: list[int] = []
    for length in range(len(history) + 1):
        satisfied = check(prefix(history, length), args.criterion, args.budget).satisfied
        if not satisfied:
            failing.append(length)
        print(f"{length:>6}  {'satisfied' if satisfied else 'refuted'}")
    if failing:
        print(f"{args.input}: {args.criterion} fails on prefix length(s) {failing}")
        return EXIT_REFUTED
    print(f"{args.input}: {args.criterion} holds on every prefix")
    return EXIT_SATISFIED


def _cmd_corpus(args: argparse.Namespace) -> int:
    if args.dump is not None:
        print(corpus_text(args.dump), end="")
        return EXIT_SATISFIED
    mismatches = 0
    for name in corpus_names():
        history = paper_history(name)
        for criterion, expected in EXPECTED_VERDICTS[name].items():
            actual = check(history, criterion).satisfied
            status = "ok" if actual == expected else "MISMATCH"
            if actual != expected:
                mismatches += 1
            print(
                f"{name:<12} {criterion:<12} expected={expected!s:<5} "
                f"actual={actual!s:<5} {status}"
            )
    print(f"{mismatches} mismatch(es)")
    return EXIT_SATISFIED if mismatches == 0 else EXIT_REFUTED


def _cmd_fuzz(args: argparse.Namespace) -> int:
    cfg = parse_config(args.config)
    histories = (random_history(cfg, args.seed + offset) for offset in range(args.count))
    comparison = compare_criteria(histories)
    if args.json:
        summary = {
            "histories": len(comparison.entries),
            "violations": [
                {"seed": args.seed + item.index, "property": item.property, "detail": item.detail}
                for item in comparison.violations
            ],
            "tms2_counterexamples": [
                args.seed + index for index in comparison.tms2_counterexamples
            ],
        }
        print(json.dumps(summary, indent=2))
    else:
        for item in comparison.violations:
            print(f"seed {args.seed + item.index}: {item.property}: {item.detail}")
        print(
            f"{len(comparison.entries)} histories, {len(comparison.violations)} violation(s), "
            f"{len(comparison.tms2_counterexamples)} conflict-order counterexample(s)"
        )
    return EXIT_SATISFIED if comparison.ok else EXIT_REFUTED


_COMMANDS = {
    "check": _cmd_check,
    "verify": _cmd_verify,
    "prefixes": _cmd_prefixes,
    "corpus": _cmd_corpus,
    "fuzz": _cmd_fuzz,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return the exit code.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:].

    Returns:
        0 when satisfied, 1 when refuted or a property fails, 2 on usage
        or input errors.
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except DuOpacityError as err:
        _LOGGER.error("%s", err)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    """Console script entry point."""
    sys.exit(run())
