"""Rendering of verdicts.

Human-readable text, the machine-readable JSON report and its parser, and
the compact witness notation ``order: T2,T3,T1,T4`` / ``commits: {T5:C}``.
"""

from __future__ import annotations

import json
import re
from collections.abc import Mapping
from typing import Any

import voluptuous as vol

from .const import CRITERION_NAMES, CRITERION_OPACITY, ReportDict, StatsDict, WitnessDict
from .exceptions import MalformedWitnessError, ReportFormatError
from .models import (
    CriterionReport,
    Report,
    SearchStats,
    Verdict,
    Witness,
    WitnessCheck,
)

_TXN_LABEL_RE = re.compile(r"T([1-9][0-9]*)")

_TXN_LABEL = vol.Match(_TXN_LABEL_RE.pattern)

REPORT_SCHEMA = vol.Schema(
    {
        vol.Required("input"): str,
        vol.Required("criterion"): vol.In(CRITERION_NAMES),
        vol.Required("satisfied"): bool,
        vol.Required("witness"): vol.Any(
            None,
            {
                vol.Required("order"): [_TXN_LABEL],
                vol.Required("commits"): {_TXN_LABEL: vol.In(["C", "A"])},
            },
        ),
        vol.Required("prefix_failures"): [vol.All(int, vol.Range(min=0))],
        vol.Required("stats"): {
            vol.Required("nodes"): vol.All(int, vol.Range(min=0)),
            vol.Required("completions"): vol.All(int, vol.Range(min=0)),
            vol.Required("ms"): vol.Coerce(float),
        },
    }
)


def txn_label(txn: int) -> str:
    """Return the label of a transaction, e.g. ``T3``."""
    return f"T{txn}"


def parse_txn_label(label: str) -> int:
    """Return the transaction id of a label such as ``T3``.

    Raises:
        MalformedWitnessError: If the label is not ``T`` followed by a positive integer.
    """
    match = _TXN_LABEL_RE.fullmatch(label.strip())
    if match is None:
        raise MalformedWitnessError(f"Invalid transaction label: {label!r}")
    return int(match.group(1))


def parse_order(text: str) -> tuple[int, ...]:
    """Parse a comma-separated transaction order such as ``T2,T3,T1``."""
    return tuple(parse_txn_label(label) for label in text.split(",") if label.strip())


def parse_commits(text: str) -> dict[int, bool]:
    """Parse commit choices such as ``T5:C,T7:A``.

    Raises:
        MalformedWitnessError: If an item is not ``<label>:C`` or ``<label>:A``.
    """
    commits: dict[int, bool] = {}
    for item in filter(None, (part.strip() for part in text.strip("{} ").split(","))):
        label, sep, fate = item.partition(":")
        if not sep or fate.strip() not in ("C", "A"):
            raise MalformedWitnessError(f"Invalid commit choice: {item!r}")
        commits[parse_txn_label(label)] = fate.strip() == "C"
    return commits


def format_order(order: tuple[int, ...]) -> str:
    """Render a transaction order as ``T2,T3,T1``."""
    return ",".join(txn_label(txn) for txn in order)


def format_commits(commits: Mapping[int, bool]) -> str:
    """Render commit choices as ``{T5:C,T7:A}``."""
    items = ",".join(
        f"{txn_label(txn)}:{'C' if commits[txn] else 'A'}" for txn in sorted(commits)
    )
    return f"{{{items}}}"


def format_witness(witness: Witness) -> str:
    """Render a witness as its order line plus a commits line when choices exist."""
    lines = [f"order: {format_order(witness.order)}"]
    if witness.commits:
        lines.append(f"commits: {format_commits(witness.commits)}")
    return "\n".join(lines)


def witness_to_dict(witness: Witness) -> WitnessDict:
    """Serialize a witness."""
    return {
        "order": [txn_label(txn) for txn in witness.order],
        "commits": {
            txn_label(txn): "C" if witness.commits[txn] else "A" for txn in sorted(witness.commits)
        },
    }


def witness_from_dict(data: Mapping[str, Any]) -> Witness:
    """Deserialize a witness."""
    return Witness(
        order=tuple(parse_txn_label(label) for label in data["order"]),
        commits={parse_txn_label(label): fate == "C" for label, fate in data["commits"].items()},
    )


def report_to_dict(report: Report) -> ReportDict:
    """Serialize a report to the machine-readable schema."""
    verdict = report.result.verdict
    stats: StatsDict = {
        "nodes": verdict.stats.nodes,
        "completions": verdict.stats.completions,
        "ms": round(verdict.stats.elapsed_ms, 3),
    }
    return {
        "input": report.input,
        "criterion": report.result.criterion,
        "satisfied": verdict.satisfied,
        "witness": witness_to_dict(verdict.witness) if verdict.witness is not None else None,
        "prefix_failures": list(report.result.prefix_failures),
        "stats": stats,
    }


def render_json(report: Report) -> str:
    """Render a report as JSON."""
    return json.dumps(report_to_dict(report), indent=2)


def parse_report(text: str) -> Report:
    """Parse a JSON report back into a report.

    The verdict, witness, prefix failures and counters are restored exactly;
    refutation diagnostics are not part of the format.

    Raises:
        ReportFormatError: If the text is not JSON or does not follow the schema.
    """
    try:
        data = REPORT_SCHEMA(json.loads(text))
    except json.JSONDecodeError as err:
        raise ReportFormatError(f"Report is not valid JSON: {err}") from err
    except vol.Invalid as err:
        raise ReportFormatError(f"Report does not follow the schema: {err}") from err

    stats = data["stats"]
    witness = witness_from_dict(data["witness"]) if data["witness"] is not None else None
    verdict = Verdict(
        satisfied=data["satisfied"],
        witness=witness,
        stats=SearchStats(
            nodes=stats["nodes"], completions=stats["completions"], elapsed_ms=stats["ms"]
        ),
    )
    return Report(
        input=data["input"],
        result=CriterionReport(data["criterion"], verdict, tuple(data["prefix_failures"])),
    )


def render_text(report: Report, show_witness: bool = False) -> str:
    """Render a report for people.

    Timings are left out so the output is identical from run to run.
    """
    result = report.result
    verdict = result.verdict
    lines = [
        f"{report.input}: {result.criterion} {'satisfied' if verdict.satisfied else 'refuted'}",
        f"  nodes: {verdict.stats.nodes}, completions: {verdict.stats.completions}",
    ]
    if result.criterion == CRITERION_OPACITY and report.events is not None:
        lines.append("  prefix  final-state")
        failing = set(result.prefix_failures)
        lines.extend(
            f"  {length:>6}  {'refuted' if length in failing else 'satisfied'}"
            for length in range(report.events + 1)
        )
    if verdict.refutation is not None:
        lines.append(f"  reason: {verdict.refutation.reason}")
        for failure in verdict.refutation.failures:
            lines.append(
                f"  completion {format_commits(failure.commits)}: "
                f"deepest [{format_order(failure.deepest_order)}] {failure.reason}"
                if failure.reason
                else f"  completion {format_commits(failure.commits)}"
            )
    if show_witness and verdict.witness is not None:
        lines.extend(f"  {line}" for line in format_witness(verdict.witness).splitlines())
    return "\n".join(lines)


def render_check(source: str, criterion: str, check: WitnessCheck) -> str:
    """Render the outcome of checking a supplied witness."""
    lines = [f"{source}: witness {'accepted' if check.ok else 'rejected'} for {criterion}"]
    lines.extend(f"  {item.constraint}: {item.detail}" for item in check.violations)
    return "\n".join(lines)
