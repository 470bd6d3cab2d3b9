"""Operations on histories.

Well-formedness validation, prefixes and projections, transaction status,
the real-time and live-set orders, and the visibility sets that define local
serializations.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable

from .exceptions import MalformedHistoryError, OutOfRangeError
from .models import (
    Action,
    Event,
    History,
    Marker,
    OpKind,
    ReadRef,
    TxnStatus,
    Violation,
)

_LOGGER = logging.getLogger(__name__)

# Results each kind of t-operation may respond with
_MARKER_RESULTS: dict[OpKind, frozenset[Marker]] = {
    OpKind.READ: frozenset({Marker.ABORT}),
    OpKind.WRITE: frozenset({Marker.OK, Marker.ABORT}),
    OpKind.TRYC: frozenset({Marker.COMMIT, Marker.ABORT}),
    OpKind.TRYA: frozenset({Marker.ABORT}),
}


def _action_problem(action: Action) -> str | None:
    """Return why an action is malformed, or None."""
    if action.kind in (OpKind.READ, OpKind.WRITE) and not action.obj:
        return f"{action.kind} needs a t-object"
    if action.kind is OpKind.WRITE and (
        not isinstance(action.value, int) or isinstance(action.value, bool)
    ):
        return "write needs an integer value"
    return None


def _result_problem(action: Action, result: object) -> str | None:
    """Return why a response result does not fit its action, or None."""
    if result is None:
        return "response without a result"
    if isinstance(result, Marker):
        if result in _MARKER_RESULTS[action.kind]:
            return None
    elif action.kind is OpKind.READ and isinstance(result, int) and not isinstance(result, bool):
        return None
    return f"result {result} not allowed for {action.kind}"


def find_violations(events: Iterable[Event]) -> list[Violation]:
    """Return every well-formedness violation of an event sequence.

    Checking continues past a violation so that all of them are reported,
    each with the index of the offending event.

    Args:
        events: The raw event sequence.

    Returns:
        The violations in event order; empty for a well-formed history.
    """
    violations: list[Violation] = []
    pending: dict[int, Action | None] = {}
    finished: set[int] = set()
    reads: dict[int, set[str]] = {}

    for index, event in enumerate(events):
        txn = event.txn
        if isinstance(txn, bool) or not isinstance(txn, int) or txn < 1:
            violations.append(Violation(index, f"invalid transaction id {txn!r}"))
            continue
        if txn in finished:
            violations.append(Violation(index, f"T{txn} has an event after commit or abort"))
            continue
        outstanding = pending.get(txn)
        if event.is_invocation:
            problem = _action_problem(event.action)
            if problem is not None:
                violations.append(Violation(index, problem))
                continue
            if event.result is not None:
                violations.append(Violation(index, "invocation carries a result"))
            if outstanding is not None:
                violations.append(Violation(index, "pending response"))
                continue
            if event.action.kind is OpKind.READ and event.action.obj is not None:
                seen = reads.setdefault(txn, set())
                if event.action.obj in seen:
                    violations.append(
                        Violation(index, f"T{txn} reads {event.action.obj} more than once")
                    )
                seen.add(event.action.obj)
            pending[txn] = event.action
            continue

        if outstanding is None:
            violations.append(Violation(index, "response without invocation"))
            continue
        if event.action != outstanding:
            violations.append(
                Violation(index, f"response to {event.action} while {outstanding} is pending")
            )
            continue
        problem = _result_problem(event.action, event.result)
        if problem is not None:
            violations.append(Violation(index, problem))
        pending[txn] = None
        if event.ends_transaction:
            finished.add(txn)

    return violations


def validate(events: Iterable[Event]) -> History:
    """Validate an event sequence and return it as a history.

    Args:
        events: The raw event sequence.

    Returns:
        The well-formed history.

    Raises:
        MalformedHistoryError: Carrying every violation found.
    """
    materialized = tuple(events)
    violations = find_violations(materialized)
    if violations:
        _LOGGER.debug("Rejected history with %d violations", len(violations))
        raise MalformedHistoryError(violations)
    return History(materialized)


def prefix(history: History, length: int) -> History:
    """Return the prefix made of the first ``length`` events.

    Raises:
        OutOfRangeError: If length is negative or exceeds the history.
    """
    if not 0 <= length <= len(history):
        raise OutOfRangeError(f"prefix length {length} outside 0..{len(history)}")
    return History(history.events[:length])


def projection(history: History, txn: int) -> tuple[Event, ...]:
    """Return H|k, the events of one transaction (empty if it is absent)."""
    view = history.views.get(txn)
    return view.events if view is not None else ()


def txns(history: History) -> frozenset[int]:
    """Return the set of participating transactions."""
    return frozenset(history.views)


def status(history: History, txn: int) -> TxnStatus:
    """Return the status of a transaction at the end of the history."""
    return history.view(txn).status


def real_time_precedes(history: History, first: int, second: int) -> bool:
    """Return True if ``first`` is t-complete and ends before ``second`` begins."""
    earlier = history.view(first)
    later = history.view(second)
    return first != second and earlier.is_t_complete and earlier.last < later.first


def overlap(history: History, first: int, second: int) -> bool:
    """Return True if neither transaction precedes the other in real time."""
    return not real_time_precedes(history, first, second) and not real_time_precedes(
        history, second, first
    )


def read_write_sets(history: History, txn: int) -> tuple[frozenset[str], frozenset[str]]:
    """Return the read set and write set of a transaction.

    Invocations count, so a pending write places its object in the write set.
    """
    view = history.view(txn)
    return view.read_set, view.write_set


def live_set(history: History, txn: int) -> frozenset[int]:
    """Return the transactions that are neither wholly before nor wholly after ``txn``.

    The transaction itself is always a member.
    """
    view = history.view(txn)
    return frozenset(
        other.txn
        for other in history.views.values()
        if not other.last < view.first and not view.last < other.first
    )


def ls_precedes(history: History, first: int, second: int) -> bool:
    """Return True if ``second`` succeeds the live set of ``first``.

    Every member of the live set of ``first`` must be complete and end
    before the first event of ``second``.
    """
    start = history.view(second).first
    for member in live_set(history, first):
        view = history.views[member]
        if not view.is_complete or view.last >= start:
            return False
    return True


def visible_writers(history: History) -> dict[ReadRef, frozenset[int]]:
    """Return, per responded non-aborting read, the transactions whose tryC precedes it.

    A transaction is visible to read_k(X) when its tryC invocation occurs
    strictly before the read's response. The reader itself is not listed;
    local serializations retain it regardless.
    """
    invoked = {
        view.txn: view.tryc_invocation
        for view in history.views.values()
        if view.tryc_invocation is not None
    }
    visible: dict[ReadRef, frozenset[int]] = {}
    for view in history.views.values():
        for read in view.reads:
            if read.res_index is None or read.value is None:
                continue
            cutoff = read.res_index
            visible[read.ref] = frozenset(
                txn for txn, position in invoked.items() if position < cutoff and txn != read.txn
            )
    return visible


def is_complete(history: History) -> bool:
    """Return True if every transaction ends with a response."""
    return all(view.is_complete for view in history.views.values())


def is_t_complete(history: History) -> bool:
    """Return True if every transaction committed or aborted."""
    return all(view.is_t_complete for view in history.views.values())


def is_sequential(history: History) -> bool:
    """Return True if every invocation is immediately followed by its response.

    A pending invocation is tolerated as the final event, so prefixes of
    sequential histories stay sequential.
    """
    events = history.events
    for index, event in enumerate(events):
        if not event.is_invocation:
            continue
        if index + 1 == len(events):
            return True
        following = events[index + 1]
        if following.txn != event.txn or not following.is_response:
            return False
    return True


def is_t_sequential(history: History) -> bool:
    """Return True if the transactions appear as contiguous, non-overlapping blocks."""
    views = sorted(history.views.values(), key=lambda view: view.first)
    for earlier, later in zip(views, views[1:], strict=False):
        if earlier.last > later.first or not earlier.is_t_complete:
            return False
    return True
