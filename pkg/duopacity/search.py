"""Serialization search.

Decides whether a history has a serialization under a criterion by searching
over completion choices and transaction orders. The pruned search places
transactions left to right and checks each transaction's reads as soon as it
is placed, since the legality of a read only depends on the blocks before it.
A naive oracle enumerates every permutation without pruning.
"""

from __future__ import annotations

import itertools
import logging
import time
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from .const import DEFAULT_NAIVE_MAX_TXNS, INITIAL_VALUE
from .exceptions import (
    BudgetExceededError,
    HypothesisViolatedError,
    InvalidWitnessError,
    MalformedWitnessError,
    NotSequentialError,
    OutOfRangeError,
    TooLargeError,
)
from .history import is_complete, is_sequential, ls_precedes, prefix, visible_writers
from .models import (
    CompletionFailure,
    ConstraintViolation,
    Criterion,
    History,
    OpKind,
    ReadRef,
    Refutation,
    SearchStats,
    TxnStatus,
    Verdict,
    Witness,
    WitnessCheck,
)
from .sequential import (
    commit_pending,
    completion_for,
    completions,
    equivalent,
    is_legal,
    read_is_locally_legal,
    serialize,
)

_LOGGER = logging.getLogger(__name__)

# Constraint names reported by verify_witness
CONSTRAINT_EQUIVALENCE = "equivalence"
CONSTRAINT_REAL_TIME = "real-time"
CONSTRAINT_LEGALITY = "legality"
CONSTRAINT_LOCAL_LEGALITY = "local-legality"
CONSTRAINT_READ_COMMIT_ORDER = "read-commit-order"
CONSTRAINT_CONFLICT_ORDER = "conflict-order"


def committed_in(history: History, commits: Mapping[int, bool]) -> frozenset[int]:
    """Return the transactions that commit in the completion chosen by ``commits``."""
    return frozenset(
        view.txn
        for view in history.views.values()
        if view.status is TxnStatus.COMMITTED
        or (view.status is TxnStatus.COMMIT_PENDING and commits.get(view.txn, False))
    )


def real_time_pairs(history: History) -> set[tuple[int, int]]:
    """Return every (k, m) with T_k preceding T_m in real time."""
    views = list(history.views.values())
    return {
        (earlier.txn, later.txn)
        for earlier in views
        if earlier.is_t_complete
        for later in views
        if earlier.last < later.first
    }


def read_commit_pairs(history: History, committed: frozenset[int]) -> set[tuple[int, int]]:
    """Return the read-commit order pairs (reader, committer).

    A responded read of X by T_k precedes the tryC invocation of a committing
    T_m that writes X.
    """
    pairs: set[tuple[int, int]] = set()
    for reader in history.views.values():
        for read in reader.reads:
            if read.res_index is None:
                continue
            for writer in history.views.values():
                if (
                    writer.txn != reader.txn
                    and writer.txn in committed
                    and read.obj in writer.write_set
                    and writer.tryc_invocation is not None
                    and read.res_index < writer.tryc_invocation
                ):
                    pairs.add((reader.txn, writer.txn))
    return pairs


def conflict_pairs(history: History) -> set[tuple[int, int]]:
    """Return the conflict order pairs (committer, reader).

    T_a committed, writes an object T_b reads, and the tryC response of T_a
    precedes the tryC invocation of T_b.
    """
    pairs: set[tuple[int, int]] = set()
    for writer in history.views.values():
        if writer.status is not TxnStatus.COMMITTED or writer.tryc_response is None:
            continue
        for reader in history.views.values():
            if (
                reader.txn != writer.txn
                and reader.tryc_invocation is not None
                and writer.tryc_response < reader.tryc_invocation
                and writer.write_set & reader.read_set
            ):
                pairs.add((writer.txn, reader.txn))
    return pairs


def order_pairs(
    history: History, criterion: Criterion, commits: Mapping[int, bool]
) -> tuple[set[tuple[int, int]], set[tuple[int, int]]]:
    """Return the real-time pairs and the criterion's extra pairs for one completion."""
    if criterion is Criterion.GHS:
        extra = read_commit_pairs(history, committed_in(history, commits))
    elif criterion is Criterion.TMS2:
        extra = conflict_pairs(history)
    else:
        extra = set()
    return real_time_pairs(history), extra


def _require_sequential(history: History, criterion: Criterion) -> None:
    """Reject non-sequential input for criteria defined on sequential histories."""
    if criterion is Criterion.GHS and not is_sequential(history):
        raise NotSequentialError("the read-commit order criterion needs a sequential history")


def _check_shape(history: History, witness: Witness) -> None:
    """Raise if the witness cannot describe a serialization of the history."""
    if sorted(witness.order) != list(history.txns):
        raise MalformedWitnessError(
            f"order {list(witness.order)} is not a permutation of {list(history.txns)}"
        )
    pending = set(commit_pending(history))
    if set(witness.commits) != pending:
        raise MalformedWitnessError(
            f"commit choices {sorted(witness.commits)} do not match commit-pending "
            f"transactions {sorted(pending)}"
        )


def verify_witness(history: History, witness: Witness, criterion: Criterion) -> WitnessCheck:
    """Check a witness against every constraint of a criterion.

    Args:
        history: The history.
        witness: Candidate order and commit choice.
        criterion: The criterion whose constraints apply.

    Returns:
        The check, listing every violated constraint.

    Raises:
        MalformedWitnessError: If the order is not a permutation of the
            transactions or the commit choice has the wrong domain.
        NotSequentialError: For the read-commit order criterion on a
            non-sequential history.
    """
    _check_shape(history, witness)
    _require_sequential(history, criterion)

    violations: list[ConstraintViolation] = []
    completed = completion_for(history, witness.commits)
    sequential = serialize(history, witness)
    if not equivalent(sequential, completed):
        violations.append(
            ConstraintViolation(CONSTRAINT_EQUIVALENCE, "serialization differs from the completion")
        )

    position = {txn: index for index, txn in enumerate(witness.order)}
    real_time, extra = order_pairs(history, criterion, witness.commits)
    for earlier, later in sorted(real_time):
        if position[earlier] > position[later]:
            violations.append(
                ConstraintViolation(
                    CONSTRAINT_REAL_TIME, f"T{earlier} precedes T{later} in real time"
                )
            )
    extra_name = (
        CONSTRAINT_READ_COMMIT_ORDER if criterion is Criterion.GHS else CONSTRAINT_CONFLICT_ORDER
    )
    for earlier, later in sorted(extra):
        if position[earlier] > position[later]:
            violations.append(
                ConstraintViolation(extra_name, f"T{earlier} must precede T{later}")
            )

    for illegal in is_legal(sequential).illegal:
        violations.append(
            ConstraintViolation(
                CONSTRAINT_LEGALITY,
                f"read of {illegal.read.obj} by T{illegal.read.txn} returns {illegal.returned}, "
                f"latest written value is {illegal.expected}",
                illegal.read,
            )
        )
    if criterion is Criterion.DU_OPACITY:
        for txn in witness.order:
            for read in sequential.views[txn].reads:
                if read.value is not None and not read_is_locally_legal(
                    sequential, history, txn, read.obj
                ):
                    violations.append(
                        ConstraintViolation(
                            CONSTRAINT_LOCAL_LEGALITY,
                            f"read of {read.obj} by T{txn} is not legal "
                            "in its local serialization",
                            read.ref,
                        )
                    )
    return WitnessCheck(tuple(violations))


@dataclass(frozen=True, slots=True)
class _Read:
    """A value-returning read, precomputed for the search."""

    obj: str
    value: int
    own: int | None
    visible: frozenset[int]


# Committed writes per object, in placement order
_Writers = dict[str, tuple[tuple[int, int], ...]]


class _OrderSearch:
    """Backtracking search for a transaction order under one completion."""

    def __init__(
        self,
        txns: tuple[int, ...],
        reads: Mapping[int, tuple[_Read, ...]],
        writes: Mapping[int, Mapping[str, int]],
        committed: frozenset[int],
        preds: Mapping[int, frozenset[int]],
        local: bool,
        counter: _NodeCounter,
    ) -> None:
        """Initialize the search for one completion."""
        self._txns = txns
        self._reads = reads
        self._writes = writes
        self._committed = committed
        self._preds = preds
        self._local = local
        self._counter = counter
        self._dead: set[tuple[object, ...]] = set()
        self.deepest: tuple[int, ...] = ()
        self.deepest_reason = ""
        self._recorded = False

    def run(self) -> tuple[int, ...] | None:
        """Return the first order found, or None if none exists."""
        placed: list[int] = []
        if self._extend(placed, {}):
            return tuple(placed)
        return None

    def _record(self, placed: list[int], reason: str) -> None:
        """Remember the deepest failing partial order."""
        if not self._recorded or len(placed) > len(self.deepest):
            self.deepest = tuple(placed)
            self.deepest_reason = reason
            self._recorded = True

    @staticmethod
    def _latest(writers: _Writers, obj: str, visible: frozenset[int] | None = None) -> int:
        """Return the latest committed value of obj, optionally among visible writers."""
        for txn, value in reversed(writers.get(obj, ())):
            if visible is None or txn in visible:
                return value
        return INITIAL_VALUE

    def _state_key(self, placed: frozenset[int], writers: _Writers) -> tuple[object, ...]:
        """Key of everything the remaining search depends on."""
        store = tuple((obj, chain[-1][1]) for obj, chain in sorted(writers.items()))
        if not self._local:
            return (placed, store)
        local = tuple(
            self._latest(writers, read.obj, read.visible)
            for txn in self._txns
            if txn not in placed
            for read in self._reads[txn]
            if read.own is None
        )
        return (placed, store, local)

    def _check_reads(self, txn: int, writers: _Writers) -> str | None:
        """Return why the reads of txn fail at the end of the partial order, or None."""
        for read in self._reads[txn]:
            if read.own is not None:
                if read.value != read.own:
                    return f"T{txn} reads {read.obj}={read.value} after writing {read.own}"
                continue
            expected = self._latest(writers, read.obj)
            if read.value != expected:
                return (
                    f"T{txn} reads {read.obj}={read.value} but the latest committed "
                    f"write is {expected}"
                )
            if self._local:
                local = self._latest(writers, read.obj, read.visible)
                if read.value != local:
                    return (
                        f"T{txn} reads {read.obj}={read.value} but its local "
                        f"serialization gives {local}"
                    )
        return None

    def _apply_writes(self, txn: int, writers: _Writers) -> _Writers:
        """Return the writer chains after placing txn."""
        if txn not in self._committed or not self._writes[txn]:
            return writers
        extended = dict(writers)
        for obj, value in self._writes[txn].items():
            extended[obj] = (*writers.get(obj, ()), (txn, value))
        return extended

    def _extend(self, placed: list[int], writers: _Writers) -> bool:
        """Try to extend the partial order to a full one."""
        if len(placed) == len(self._txns):
            return True
        placed_set = frozenset(placed)
        key = self._state_key(placed_set, writers)
        if key in self._dead:
            return False

        stuck = True
        for txn in self._txns:
            if txn in placed_set or not self._preds[txn] <= placed_set:
                continue
            stuck = False
            self._counter.tick()
            problem = self._check_reads(txn, writers)
            if problem is not None:
                self._record(placed, problem)
                continue
            placed.append(txn)
            if self._extend(placed, self._apply_writes(txn, writers)):
                return True
            placed.pop()

        if stuck:
            self._record(placed, "ordering constraints leave no transaction to place")
        self._dead.add(key)
        return False


class _NodeCounter:
    """Counts search nodes against an optional budget."""

    def __init__(self, budget: int | None) -> None:
        """Initialize with an optional node budget."""
        self.nodes = 0
        self._budget = budget

    def tick(self) -> None:
        """Count one node.

        Raises:
            BudgetExceededError: If the budget is exhausted.
        """
        self.nodes += 1
        if self._budget is not None and self.nodes > self._budget:
            _LOGGER.warning("Search budget of %d nodes exhausted", self._budget)
            raise BudgetExceededError(self.nodes)


def _precompute(
    history: History,
) -> tuple[dict[int, tuple[_Read, ...]], dict[int, dict[str, int]]]:
    """Collect the value-returning reads and the final writes of every transaction."""
    visible = visible_writers(history)
    reads: dict[int, tuple[_Read, ...]] = {}
    writes: dict[int, dict[str, int]] = {}
    for view in history.views.values():
        own: dict[str, int] = {}
        collected: list[_Read] = []
        for event in view.events:
            action = event.action
            if event.is_invocation and action.kind is OpKind.WRITE:
                if action.obj is not None and action.value is not None:
                    own[action.obj] = action.value
            elif (
                event.is_response
                and action.kind is OpKind.READ
                and action.obj is not None
                and isinstance(event.result, int)
            ):
                collected.append(
                    _Read(
                        obj=action.obj,
                        value=event.result,
                        own=own.get(action.obj),
                        visible=visible.get(ReadRef(view.txn, action.obj), frozenset()),
                    )
                )
        reads[view.txn] = tuple(collected)
        writes[view.txn] = own
    return reads, writes


def search(history: History, criterion: Criterion, budget: int | None = None) -> Verdict:
    """Search for a serialization of a history under a criterion.

    Completion choices are tried in ascending binary encoding and, within a
    completion, transactions are placed in ascending id order with
    backtracking, so the result is deterministic.

    Args:
        history: The history to decide.
        criterion: The criterion to decide.
        budget: Optional bound on the number of search nodes.

    Returns:
        The verdict with a witness or a refutation.

    Raises:
        BudgetExceededError: If the budget is exhausted before a decision.
        NotSequentialError: For the read-commit order criterion on a
            non-sequential history.
    """
    _require_sequential(history, criterion)
    started = time.perf_counter()
    counter = _NodeCounter(budget)
    reads, writes = _precompute(history)
    real_time = real_time_pairs(history)
    failures: list[CompletionFailure] = []
    tried = 0

    for commits, _ in completions(history):
        tried += 1
        _, extra = order_pairs(history, criterion, commits)
        preds: dict[int, set[int]] = {txn: set() for txn in history.txns}
        for earlier, later in real_time | extra:
            preds[later].add(earlier)
        order_search = _OrderSearch(
            txns=history.txns,
            reads=reads,
            writes=writes,
            committed=committed_in(history, commits),
            preds={txn: frozenset(before) for txn, before in preds.items()},
            local=criterion is Criterion.DU_OPACITY,
            counter=counter,
        )
        order = order_search.run()
        _LOGGER.debug(
            "Completion %s for %s: %s after %d nodes",
            commits,
            criterion,
            "found" if order is not None else "exhausted",
            counter.nodes,
        )
        if order is not None:
            return Verdict(
                satisfied=True,
                witness=Witness(order, commits),
                stats=_stats(counter.nodes, tried, started),
            )
        failures.append(
            CompletionFailure(commits, order_search.deepest, order_search.deepest_reason)
        )

    refutation = Refutation(
        reason=f"no {criterion} serialization exists under {tried} completion choice(s)",
        failures=tuple(failures),
    )
    return Verdict(
        satisfied=False,
        refutation=refutation,
        stats=_stats(counter.nodes, tried, started),
    )


def _stats(nodes: int, completions_tried: int, started: float) -> SearchStats:
    """Build search statistics."""
    return SearchStats(
        nodes=nodes,
        completions=completions_tried,
        elapsed_ms=(time.perf_counter() - started) * 1000.0,
    )


def naive_search(
    history: History, criterion: Criterion, max_txns: int = DEFAULT_NAIVE_MAX_TXNS
) -> Verdict:
    """Decide a criterion by enumerating every completion and permutation.

    Raises:
        TooLargeError: If the history has more than ``max_txns`` transactions.
    """
    if len(history.txns) > max_txns:
        raise TooLargeError(
            f"naive search is bounded to {max_txns} transactions, got {len(history.txns)}"
        )
    _require_sequential(history, criterion)
    started = time.perf_counter()
    nodes = 0
    tried = 0
    for commits, _ in completions(history):
        tried += 1
        for order in itertools.permutations(history.txns):
            nodes += 1
            witness = Witness(order, commits)
            if verify_witness(history, witness, criterion):
                return Verdict(True, witness=witness, stats=_stats(nodes, tried, started))
    refutation = Refutation(reason=f"no {criterion} serialization among {nodes} candidates")
    return Verdict(False, refutation=refutation, stats=_stats(nodes, tried, started))


def project_witness(history: History, witness: Witness, length: int) -> Witness:
    """Project a du-opaque witness onto a prefix of the history.

    Transactions that are t-complete or commit-pending in the prefix keep
    their fate from the witness; the others are aborted by the completion of
    the prefix. The order is the witness order restricted to the prefix.

    Args:
        history: The history.
        witness: A du-opacity witness for the history.
        length: The prefix length.

    Returns:
        A du-opacity witness for the prefix.

    Raises:
        InvalidWitnessError: If the witness does not verify.
        OutOfRangeError: If the prefix length is out of range.
    """
    if not 0 <= length <= len(history):
        raise OutOfRangeError(f"prefix length {length} outside 0..{len(history)}")
    if not verify_witness(history, witness, Criterion.DU_OPACITY):
        raise InvalidWitnessError("witness is not a du-opaque serialization of the history")

    committed = committed_in(history, witness.commits)
    cut = prefix(history, length)
    present = set(cut.txns)
    return Witness(
        order=tuple(txn for txn in witness.order if txn in present),
        commits={txn: txn in committed for txn in commit_pending(cut)},
    )


def live_set_normalize(history: History, witness: Witness) -> Witness:
    """Reorder a du-opaque witness so it respects the live-set order.

    Every transaction that is ordered after the earliest transaction
    succeeding its live set is moved to immediately before that transaction.
    Transactions moved before the same target keep a live-set consistent
    relative order.

    Args:
        history: A history in which every transaction is complete.
        witness: A du-opacity witness for the history.

    Returns:
        A du-opacity witness whose order respects the live-set order.

    Raises:
        HypothesisViolatedError: If some transaction is incomplete.
        InvalidWitnessError: If the witness does not verify.
    """
    if not is_complete(history):
        raise HypothesisViolatedError("live-set normalization needs every transaction complete")
    if not verify_witness(history, witness, Criterion.DU_OPACITY):
        raise InvalidWitnessError("witness is not a du-opaque serialization of the history")

    order = list(witness.order)
    position = {txn: index for index, txn in enumerate(order)}
    targets: dict[int, list[int]] = {}
    moved: set[int] = set()
    for txn in order:
        successors = [other for other in order if ls_precedes(history, txn, other)]
        if not successors:
            continue
        target = min(successors, key=position.__getitem__)
        if position[target] < position[txn]:
            targets.setdefault(target, []).append(txn)
            moved.add(txn)

    normalized: list[int] = []
    for txn in order:
        if txn in moved:
            continue
        normalized.extend(_ls_sorted(history, targets.get(txn, [])))
        normalized.append(txn)
    _LOGGER.debug("Live-set normalization moved %d transaction(s)", len(moved))
    result = Witness(tuple(normalized), dict(witness.commits))
    if not verify_witness(history, result, Criterion.DU_OPACITY):
        raise InvalidWitnessError(f"normalized order {list(result.order)} does not verify")
    return result


def _ls_sorted(history: History, group: Iterable[int]) -> list[int]:
    """Stable topological sort of a group under the live-set order."""
    remaining = list(group)
    result: list[int] = []
    while remaining:
        for txn in remaining:
            if not any(
                other != txn and ls_precedes(history, other, txn) for other in remaining
            ):
                result.append(txn)
                remaining.remove(txn)
                break
    return result
