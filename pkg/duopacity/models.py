"""Data models for the du-opacity checker.

This module defines the events and histories every criterion judges, the
per-transaction views derived from a history, and the witnesses, verdicts and
reports produced by the serialization search.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property
from typing import NamedTuple

from .const import (
    DEFAULT_ABORT_PROBABILITY,
    DEFAULT_INCOMPLETE_PROBABILITY,
    DEFAULT_MAX_OPS_PER_TXN,
    DEFAULT_OBJECT_COUNT,
    DEFAULT_TXN_COUNT,
    DEFAULT_VALUE_RANGE,
    VALUE_MODE_FROM_WRITES,
    ValueModeLiteral,
)
from .exceptions import UnknownTxnError


class Phase(StrEnum):
    """Whether an event invokes a t-operation or responds to one."""

    INVOCATION = "inv"
    RESPONSE = "res"


class OpKind(StrEnum):
    """The four t-operations."""

    READ = "read"
    WRITE = "write"
    TRYC = "tryc"
    TRYA = "trya"


class Marker(StrEnum):
    """Response values outside the integer value domain."""

    ABORT = "A"
    COMMIT = "C"
    OK = "ok"


# A response carries an integer (reads) or one of the markers
Result = int | Marker


class TxnStatus(StrEnum):
    """Status of a transaction at the end of a history."""

    COMMITTED = "committed"
    ABORTED = "aborted"
    COMMIT_PENDING = "commit-pending"
    COMPLETE_NOT_T_COMPLETE = "complete-not-t-complete"
    OP_INCOMPLETE = "op-incomplete"


class Criterion(StrEnum):
    """Criteria decided directly by the serialization search."""

    FINAL_STATE = "final-state"
    DU_OPACITY = "du-opacity"
    GHS = "ghs"
    TMS2 = "tms2"


@dataclass(frozen=True, slots=True)
class Action:
    """A t-operation together with its arguments.

    Attributes:
        kind: Which t-operation this is.
        obj: The t-object for reads and writes, None otherwise.
        value: The written value for writes, None otherwise.
    """

    kind: OpKind
    obj: str | None = None
    value: int | None = None

    @classmethod
    def read(cls, obj: str) -> Action:
        """Return a read of obj."""
        return cls(OpKind.READ, obj)

    @classmethod
    def write(cls, obj: str, value: int) -> Action:
        """Return a write of value to obj."""
        return cls(OpKind.WRITE, obj, value)

    @classmethod
    def tryc(cls) -> Action:
        """Return a commit attempt."""
        return cls(OpKind.TRYC)

    @classmethod
    def trya(cls) -> Action:
        """Return an abort request."""
        return cls(OpKind.TRYA)

    def __str__(self) -> str:
        """Render the action the way the history text format spells it."""
        if self.kind is OpKind.WRITE:
            return f"write {self.obj} {self.value}"
        if self.kind is OpKind.READ:
            return f"read {self.obj}"
        return str(self.kind)


@dataclass(frozen=True, slots=True)
class Event:
    """One invocation or response of a t-operation.

    Attributes:
        txn: Identifier of the issuing transaction (1-based).
        phase: Invocation or response.
        action: The t-operation, with its arguments.
        result: The returned value; present exactly on responses.
    """

    txn: int
    phase: Phase
    action: Action
    result: Result | None = None

    @property
    def is_invocation(self) -> bool:
        """Return True for invocation events."""
        return self.phase is Phase.INVOCATION

    @property
    def is_response(self) -> bool:
        """Return True for response events."""
        return self.phase is Phase.RESPONSE

    @property
    def ends_transaction(self) -> bool:
        """Return True for a response carrying C_k or A_k."""
        return self.is_response and self.result in (Marker.COMMIT, Marker.ABORT)


def inv(txn: int, action: Action) -> Event:
    """Build an invocation event."""
    return Event(txn, Phase.INVOCATION, action)


def res(txn: int, action: Action, result: Result) -> Event:
    """Build a response event."""
    return Event(txn, Phase.RESPONSE, action, result)


class ReadRef(NamedTuple):
    """Identifies read_k(X); unique because a transaction reads an object at most once."""

    txn: int
    obj: str


@dataclass(frozen=True, slots=True)
class ReadOp:
    """A read performed by a transaction, located in its history.

    Attributes:
        txn: The reading transaction.
        obj: The t-object read.
        inv_index: Position of the invocation in the history.
        res_index: Position of the response, None while pending.
        result: The returned value or A, None while pending.
    """

    txn: int
    obj: str
    inv_index: int
    res_index: int | None
    result: Result | None

    @property
    def value(self) -> int | None:
        """Return the integer the read returned, None if it aborted or is pending."""
        if isinstance(self.result, Marker) or self.result is None:
            return None
        return self.result

    @property
    def ref(self) -> ReadRef:
        """Return the (transaction, object) key of this read."""
        return ReadRef(self.txn, self.obj)


@dataclass(frozen=True)
class TxnView:
    """Everything a history says about one transaction.

    Attributes:
        txn: Transaction identifier.
        indices: Positions of the transaction's events in the history.
        events: The transaction's events (H|k).
        status: Status at the end of the history.
        read_set: Objects read by invocations of the transaction.
        write_set: Objects written by invocations of the transaction.
        reads: The transaction's reads in order.
        tryc_invocation: Position of the tryC invocation, if any.
        tryc_response: Position of the tryC response, if any.
    """

    txn: int
    indices: tuple[int, ...]
    events: tuple[Event, ...]
    status: TxnStatus
    read_set: frozenset[str]
    write_set: frozenset[str]
    reads: tuple[ReadOp, ...]
    tryc_invocation: int | None
    tryc_response: int | None

    @property
    def first(self) -> int:
        """Return the position of the transaction's first event."""
        return self.indices[0]

    @property
    def last(self) -> int:
        """Return the position of the transaction's last event."""
        return self.indices[-1]

    @property
    def is_complete(self) -> bool:
        """Return True if the transaction's last event is a response."""
        return self.events[-1].is_response

    @property
    def is_t_complete(self) -> bool:
        """Return True if the transaction committed or aborted."""
        return self.status in (TxnStatus.COMMITTED, TxnStatus.ABORTED)

    @property
    def pending(self) -> Action | None:
        """Return the action of an unanswered invocation, if any."""
        last = self.events[-1]
        return last.action if last.is_invocation else None


def _build_view(txn: int, indexed: list[tuple[int, Event]]) -> TxnView:
    """Derive the view of one transaction from its indexed events."""
    events = tuple(event for _, event in indexed)
    last = events[-1]
    if last.is_response:
        if last.result is Marker.COMMIT:
            status = TxnStatus.COMMITTED
        elif last.result is Marker.ABORT:
            status = TxnStatus.ABORTED
        else:
            status = TxnStatus.COMPLETE_NOT_T_COMPLETE
    elif last.action.kind is OpKind.TRYC:
        status = TxnStatus.COMMIT_PENDING
    else:
        status = TxnStatus.OP_INCOMPLETE

    read_set: set[str] = set()
    write_set: set[str] = set()
    reads: list[ReadOp] = []
    tryc_invocation: int | None = None
    tryc_response: int | None = None
    for position, (index, event) in enumerate(indexed):
        action = event.action
        if event.is_invocation:
            if action.kind is OpKind.READ and action.obj is not None:
                read_set.add(action.obj)
                response = indexed[position + 1] if position + 1 < len(indexed) else None
                reads.append(
                    ReadOp(
                        txn=txn,
                        obj=action.obj,
                        inv_index=index,
                        res_index=response[0] if response else None,
                        result=response[1].result if response else None,
                    )
                )
            elif action.kind is OpKind.WRITE and action.obj is not None:
                write_set.add(action.obj)
            elif action.kind is OpKind.TRYC:
                tryc_invocation = index
        elif action.kind is OpKind.TRYC:
            tryc_response = index

    return TxnView(
        txn=txn,
        indices=tuple(index for index, _ in indexed),
        events=events,
        status=status,
        read_set=frozenset(read_set),
        write_set=frozenset(write_set),
        reads=tuple(reads),
        tryc_invocation=tryc_invocation,
        tryc_response=tryc_response,
    )


@dataclass(frozen=True)
class History:
    """A finite sequence of events.

    Construct histories through ``history.validate`` unless the events are
    known to be well-formed (prefixes, completions and serializations of
    valid histories are).

    Attributes:
        events: The events in order.
    """

    events: tuple[Event, ...] = ()

    def __len__(self) -> int:
        """Return the number of events."""
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        """Iterate over the events in order."""
        return iter(self.events)

    @cached_property
    def views(self) -> dict[int, TxnView]:
        """Return the view of every participating transaction, keyed by id."""
        grouped: dict[int, list[tuple[int, Event]]] = {}
        for index, event in enumerate(self.events):
            grouped.setdefault(event.txn, []).append((index, event))
        return {txn: _build_view(txn, grouped[txn]) for txn in sorted(grouped)}

    @property
    def txns(self) -> tuple[int, ...]:
        """Return the participating transactions in ascending id order."""
        return tuple(self.views)

    def view(self, txn: int) -> TxnView:
        """Return the view of one transaction.

        Raises:
            UnknownTxnError: If the transaction does not participate.
        """
        try:
            return self.views[txn]
        except KeyError as err:
            raise UnknownTxnError(f"T{txn} does not participate in the history") from err


@dataclass(frozen=True, slots=True)
class Violation:
    """One well-formedness violation, located by event index."""

    index: int
    reason: str


@dataclass(frozen=True, slots=True)
class IllegalRead:
    """A read that does not return the latest written value."""

    read: ReadRef
    returned: int
    expected: int


@dataclass(frozen=True)
class LegalityCheck:
    """Outcome of a legality check on a t-sequential history.

    Attributes:
        illegal: Every illegal read, in serialization order.
    """

    illegal: tuple[IllegalRead, ...] = ()

    @property
    def first_illegal(self) -> IllegalRead | None:
        """Return the first illegal read, if any."""
        return self.illegal[0] if self.illegal else None

    @property
    def legal(self) -> bool:
        """Return True when every non-aborting read is legal."""
        return not self.illegal

    def __bool__(self) -> bool:
        """Make the check usable directly in conditions."""
        return self.legal


@dataclass(frozen=True)
class Witness:
    """Compact encoding of a candidate serialization.

    Attributes:
        order: Total order of all participating transactions.
        commits: For every commit-pending transaction, True if the
            completion commits it and False if it aborts it.
    """

    order: tuple[int, ...]
    commits: Mapping[int, bool] = field(default_factory=dict)


@dataclass(frozen=True)
class SearchStats:
    """Counters collected by a search."""

    nodes: int = 0
    completions: int = 0
    elapsed_ms: float = 0.0


@dataclass(frozen=True)
class CompletionFailure:
    """Why one completion choice admits no serialization.

    Attributes:
        commits: The completion choice that was exhausted.
        deepest_order: The longest partial order reached.
        reason: The constraint that stopped the deepest partial order.
    """

    commits: Mapping[int, bool]
    deepest_order: tuple[int, ...]
    reason: str


@dataclass(frozen=True)
class Refutation:
    """Diagnostics for an exhausted search space.

    Attributes:
        reason: Summary of why no serialization exists.
        failures: One entry per completion choice tried.
    """

    reason: str
    failures: tuple[CompletionFailure, ...] = ()


@dataclass(frozen=True)
class Verdict:
    """Outcome of a serialization search.

    Attributes:
        satisfied: Whether a serialization exists.
        witness: A serialization witness when satisfied.
        refutation: Diagnostics when not satisfied.
        stats: Search counters.
    """

    satisfied: bool
    witness: Witness | None = None
    refutation: Refutation | None = None
    stats: SearchStats = field(default_factory=SearchStats)


@dataclass(frozen=True)
class ConstraintViolation:
    """A constraint a witness fails.

    Attributes:
        constraint: One of equivalence, real-time, legality, local-legality,
            read-commit-order or conflict-order.
        detail: Human-readable description.
        read: The offending read, for legality constraints.
    """

    constraint: str
    detail: str
    read: ReadRef | None = None


@dataclass(frozen=True)
class WitnessCheck:
    """Result of checking a witness against a history and a criterion."""

    violations: tuple[ConstraintViolation, ...] = ()

    @property
    def ok(self) -> bool:
        """Return True when no constraint is violated."""
        return not self.violations

    def __bool__(self) -> bool:
        """Make the check usable directly in conditions."""
        return self.ok


@dataclass(frozen=True)
class CriterionReport:
    """Verdict of one named criterion on one history.

    Attributes:
        criterion: The criterion name (see const.CRITERION_NAMES).
        verdict: The verdict on the whole history.
        prefix_failures: For opacity, every prefix length that is not
            final-state opaque, in ascending order.
    """

    criterion: str
    verdict: Verdict
    prefix_failures: tuple[int, ...] = ()

    @property
    def satisfied(self) -> bool:
        """Return the verdict's satisfied bit."""
        return self.verdict.satisfied

    @property
    def first_failing_prefix(self) -> int | None:
        """Return the shortest failing prefix length, if any."""
        return self.prefix_failures[0] if self.prefix_failures else None


@dataclass(frozen=True)
class HistoryConfig:
    """Parameters for deterministic random history generation.

    Attributes:
        txn_count: Number of transactions.
        object_count: Number of t-objects (named X, Y, Z, ...).
        max_ops_per_txn: Upper bound on reads and writes per transaction.
        value_mode: from-writes draws write values from 1..value_range;
            unique-writes gives every write a globally distinct nonzero value.
        value_range: Largest write value in from-writes mode.
        abort_probability: Chance that a response aborts its transaction.
        incomplete_probability: Chance that a transaction stops early.
    """

    txn_count: int = DEFAULT_TXN_COUNT
    object_count: int = DEFAULT_OBJECT_COUNT
    max_ops_per_txn: int = DEFAULT_MAX_OPS_PER_TXN
    value_mode: ValueModeLiteral = VALUE_MODE_FROM_WRITES
    value_range: int = DEFAULT_VALUE_RANGE
    abort_probability: float = DEFAULT_ABORT_PROBABILITY
    incomplete_probability: float = DEFAULT_INCOMPLETE_PROBABILITY


@dataclass(frozen=True)
class HistoryVerdicts:
    """Every criterion verdict for one history of a comparison run.

    Attributes:
        index: Position of the history in the compared stream.
        verdicts: Satisfied bit per criterion name; the read-commit order
            criterion only appears for sequential histories.
        unique_writes: Whether the history has unique writes.
    """

    index: int
    verdicts: Mapping[str, bool]
    unique_writes: bool


@dataclass(frozen=True, slots=True)
class PropertyViolation:
    """A history on which a relation between criteria fails."""

    index: int
    property: str
    detail: str


@dataclass(frozen=True)
class CriteriaComparison:
    """Outcome of a differential run of the criteria over a stream of histories.

    Attributes:
        entries: Verdicts per history, in stream order.
        violations: Failed relations between criteria.
        tms2_counterexamples: Indices of histories satisfying the conflict
            order criterion but not du-opacity; counted, never a violation.
    """

    entries: tuple[HistoryVerdicts, ...] = ()
    violations: tuple[PropertyViolation, ...] = ()
    tms2_counterexamples: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        """Return True when no relation failed."""
        return not self.violations


@dataclass(frozen=True)
class Report:
    """A criterion verdict on one named input.

    Attributes:
        input: File path, ``-`` or corpus pseudo-path of the history.
        result: The criterion report.
        events: Number of events in the history, when known.
    """

    input: str
    result: CriterionReport
    events: int | None = None

    @property
    def satisfied(self) -> bool:
        """Return the verdict's satisfied bit."""
        return self.result.satisfied
