"""Named correctness criteria.

Each criterion is a predicate over histories that delegates to the
serialization search with its own constraint set. Opacity is derived from
final-state opacity of every prefix.
"""

from __future__ import annotations

import logging
from collections.abc import Callable

from .const import (
    CRITERION_DU_OPACITY,
    CRITERION_FINAL_STATE,
    CRITERION_GHS,
    CRITERION_OPACITY,
    CRITERION_TMS2,
    INITIAL_VALUE,
)
from .history import prefix
from .models import (
    Criterion,
    CriterionReport,
    History,
    OpKind,
    Refutation,
    SearchStats,
    Verdict,
)
from .search import search

_LOGGER = logging.getLogger(__name__)


def final_state_opaque(history: History, budget: int | None = None) -> CriterionReport:
    """Decide final-state opacity: some legal serialization of a completion exists."""
    return CriterionReport(CRITERION_FINAL_STATE, search(history, Criterion.FINAL_STATE, budget))


def opaque(history: History, budget: int | None = None) -> CriterionReport:
    """Decide opacity: every prefix, the history included, is final-state opaque.

    The report lists every failing prefix length; the witness, when
    satisfied, is the final-state witness of the whole history.

    Args:
        history: The history to decide.
        budget: Optional node budget for each prefix search.

    Returns:
        The opacity report.
    """
    failures: list[int] = []
    first_refutation: Refutation | None = None
    final: Verdict | None = None
    nodes = 0
    completions = 0
    elapsed = 0.0

    for length in range(len(history) + 1):
        verdict = search(prefix(history, length), Criterion.FINAL_STATE, budget)
        nodes += verdict.stats.nodes
        completions += verdict.stats.completions
        elapsed += verdict.stats.elapsed_ms
        if not verdict.satisfied:
            _LOGGER.debug("Prefix of length %d is not final-state opaque", length)
            failures.append(length)
            if first_refutation is None and verdict.refutation is not None:
                first_refutation = Refutation(
                    reason=f"prefix of length {length} is not final-state opaque: "
                    f"{verdict.refutation.reason}",
                    failures=verdict.refutation.failures,
                )
        final = verdict

    stats = SearchStats(nodes=nodes, completions=completions, elapsed_ms=elapsed)
    if failures:
        overall = Verdict(satisfied=False, refutation=first_refutation, stats=stats)
    else:
        witness = final.witness if final is not None else None
        overall = Verdict(satisfied=True, witness=witness, stats=stats)
    return CriterionReport(CRITERION_OPACITY, overall, tuple(failures))


def du_opaque(history: History, budget: int | None = None) -> CriterionReport:
    """Decide du-opacity: a serialization where every read is also legal locally."""
    return CriterionReport(CRITERION_DU_OPACITY, search(history, Criterion.DU_OPACITY, budget))


def ghs_opaque(history: History, budget: int | None = None) -> CriterionReport:
    """Decide final-state opacity under the read-commit order.

    Raises:
        NotSequentialError: If the history is not sequential.
    """
    return CriterionReport(CRITERION_GHS, search(history, Criterion.GHS, budget))


def tms2_order(history: History, budget: int | None = None) -> CriterionReport:
    """Decide final-state opacity under the committed-writer conflict order."""
    return CriterionReport(CRITERION_TMS2, search(history, Criterion.TMS2, budget))


def unique_writes(history: History) -> bool:
    """Return True if no two transactions write the same value to the same t-object.

    A write of the initial value counts as a duplicate of the initializing
    transaction's write.
    """
    writers: dict[tuple[str, int], int] = {}
    for event in history:
        action = event.action
        if not event.is_invocation or action.kind is not OpKind.WRITE:
            continue
        if action.obj is None or action.value is None:
            continue
        if action.value == INITIAL_VALUE:
            return False
        owner = writers.setdefault((action.obj, action.value), event.txn)
        if owner != event.txn:
            return False
    return True


CRITERIA: dict[str, Callable[[History, int | None], CriterionReport]] = {
    CRITERION_FINAL_STATE: final_state_opaque,
    CRITERION_OPACITY: opaque,
    CRITERION_DU_OPACITY: du_opaque,
    CRITERION_GHS: ghs_opaque,
    CRITERION_TMS2: tms2_order,
}


def check(history: History, criterion: str, budget: int | None = None) -> CriterionReport:
    """Decide a criterion given by name.

    Raises:
        ValueError: If the name is not a known criterion.
    """
    try:
        decide = CRITERIA[criterion]
    except KeyError as err:
        raise ValueError(f"Unknown criterion: {criterion}") from err
    return decide(history, budget)
