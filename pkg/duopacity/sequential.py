"""Sequential semantics of histories.

Completions, the latest written value of a read in a t-sequential history,
legality, equivalence, and local serializations.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping

from .const import INITIAL_VALUE
from .exceptions import MalformedWitnessError, NoSuchReadError
from .history import visible_writers
from .models import (
    Action,
    Event,
    History,
    IllegalRead,
    LegalityCheck,
    Marker,
    OpKind,
    ReadOp,
    TxnStatus,
    TxnView,
    Witness,
    inv,
    res,
)


def commit_pending(history: History) -> tuple[int, ...]:
    """Return the commit-pending transactions in ascending id order."""
    return tuple(
        view.txn for view in history.views.values() if view.status is TxnStatus.COMMIT_PENDING
    )


def completion_for(history: History, commits: Mapping[int, bool]) -> History:
    """Build the completion of a history for one commit choice.

    Completion events are appended at the end in ascending transaction id:
    a pending read, write or tryA gets A, a complete transaction that is not
    t-complete gets tryC followed by A, and a pending tryC gets C or A as the
    choice says.

    Args:
        history: The history to complete.
        commits: True (commit) or False (abort) for every commit-pending
            transaction, and for nothing else.

    Returns:
        The t-complete history.

    Raises:
        MalformedWitnessError: If the choice does not cover exactly the
            commit-pending transactions.
    """
    pending = commit_pending(history)
    if set(commits) != set(pending):
        raise MalformedWitnessError(
            f"commit choices {sorted(commits)} do not match commit-pending "
            f"transactions {list(pending)}"
        )

    appended: list[Event] = []
    for view in history.views.values():
        txn = view.txn
        if view.status is TxnStatus.OP_INCOMPLETE:
            action = view.events[-1].action
            appended.append(res(txn, action, Marker.ABORT))
        elif view.status is TxnStatus.COMPLETE_NOT_T_COMPLETE:
            appended.append(inv(txn, Action.tryc()))
            appended.append(res(txn, Action.tryc(), Marker.ABORT))
        elif view.status is TxnStatus.COMMIT_PENDING:
            marker = Marker.COMMIT if commits[txn] else Marker.ABORT
            appended.append(res(txn, Action.tryc(), marker))
    return History(history.events + tuple(appended))


def completions(history: History) -> Iterator[tuple[dict[int, bool], History]]:
    """Enumerate every completion with the commit choice that produced it.

    Bit i of the choice number decides the i-th commit-pending transaction
    (ascending id), so choices come out in ascending binary encoding.
    """
    pending = commit_pending(history)
    for encoded in range(2 ** len(pending)):
        commits = {txn: bool(encoded >> bit & 1) for bit, txn in enumerate(pending)}
        yield commits, completion_for(history, commits)


def serialize(history: History, witness: Witness) -> History:
    """Build the t-sequential history a witness induces.

    Raises:
        MalformedWitnessError: If the order is not a permutation of the
            participating transactions or the commit choice is malformed.
    """
    completed = completion_for(history, witness.commits)
    if sorted(witness.order) != list(history.txns):
        raise MalformedWitnessError(
            f"order {list(witness.order)} is not a permutation of {list(history.txns)}"
        )
    return History(tuple(event for txn in witness.order for event in completed.views[txn].events))


def _find_read(view: TxnView, obj: str) -> ReadOp:
    """Return the read of obj by a transaction."""
    for read in view.reads:
        if read.obj == obj:
            return read
    raise NoSuchReadError(f"T{view.txn} does not read {obj}")


def latest_written_value(sequential: History, txn: int, obj: str) -> int:
    """Return the latest written value of obj for read_k(obj) in a t-sequential history.

    The transaction's own latest preceding write wins; otherwise the latest
    write among committed transactions before it; otherwise the initial value.

    Raises:
        NoSuchReadError: If the transaction does not read obj.
    """
    view = sequential.view(txn)
    read = _find_read(view, obj)

    own: int | None = None
    for index, event in zip(view.indices, view.events, strict=True):
        if index >= read.inv_index:
            break
        if event.is_invocation and event.action.kind is OpKind.WRITE and event.action.obj == obj:
            own = event.action.value
    if own is not None:
        return own

    latest = INITIAL_VALUE
    for other in sorted(sequential.views.values(), key=lambda item: item.first):
        if other.first >= view.first:
            break
        if other.status is not TxnStatus.COMMITTED:
            continue
        for event in other.events:
            if (
                event.is_invocation
                and event.action.kind is OpKind.WRITE
                and event.action.obj == obj
                and event.action.value is not None
            ):
                latest = event.action.value
    return latest


def is_legal(sequential: History) -> LegalityCheck:
    """Check that every non-aborting read returns its latest written value.

    Args:
        sequential: A t-sequential history.

    Returns:
        The check, listing every illegal read in history order.
    """
    illegal: list[IllegalRead] = []
    for view in sorted(sequential.views.values(), key=lambda item: item.first):
        for read in view.reads:
            if read.value is None:
                continue
            expected = latest_written_value(sequential, view.txn, read.obj)
            if expected != read.value:
                illegal.append(IllegalRead(read.ref, read.value, expected))
    return LegalityCheck(tuple(illegal))


def equivalent(first: History, second: History) -> bool:
    """Return True if both histories have the same transactions and projections."""
    if first.txns != second.txns:
        return False
    return all(
        first.views[txn].events == second.views[txn].events for txn in first.txns
    )


def local_serialization(sequential: History, history: History, txn: int, obj: str) -> History:
    """Build the local serialization of read_k(obj).

    The result is the prefix of the serialization up to the read's response,
    keeping only the transactions whose tryC is invoked in the history before
    that response. The reading transaction itself is always kept.

    Args:
        sequential: A serialization of the history.
        history: The history the serialization is for.
        txn: The reading transaction.
        obj: The t-object read.

    Returns:
        The local serialization, whose last block is the partial block of
        the reader.

    Raises:
        NoSuchReadError: If the read is missing, pending or aborting.
    """
    original = _find_read(history.view(txn), obj)
    if original.res_index is None or original.value is None:
        raise NoSuchReadError(f"read of {obj} by T{txn} does not return a value")
    visible = visible_writers(history)[original.ref]

    reader = sequential.view(txn)
    serialized_read = _find_read(reader, obj)
    if serialized_read.res_index is None:
        raise NoSuchReadError(f"read of {obj} by T{txn} is not answered in the serialization")

    events: list[Event] = []
    for view in sorted(sequential.views.values(), key=lambda item: item.first):
        if view.txn == txn:
            events.extend(
                event
                for index, event in zip(view.indices, view.events, strict=True)
                if index <= serialized_read.res_index
            )
            break
        if view.txn in visible:
            events.extend(view.events)
    return History(tuple(events))


def read_is_locally_legal(sequential: History, history: History, txn: int, obj: str) -> bool:
    """Return True if read_k(obj) is legal in its local serialization."""
    local = local_serialization(sequential, history, txn, obj)
    value = _find_read(local.view(txn), obj).value
    return value == latest_written_value(local, txn, obj)
