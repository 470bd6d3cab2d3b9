"""Tests for well-formedness and structural queries on histories."""

from __future__ import annotations

from collections.abc import Callable

import pytest

from duopacity.corpus import fig2_prefix
from duopacity.exceptions import MalformedHistoryError, OutOfRangeError, UnknownTxnError
from duopacity.history import (
    find_violations,
    is_complete,
    is_sequential,
    is_t_complete,
    is_t_sequential,
    live_set,
    ls_precedes,
    overlap,
    prefix,
    projection,
    read_write_sets,
    real_time_precedes,
    status,
    txns,
    validate,
    visible_writers,
)
from duopacity.models import (
    Action,
    Event,
    History,
    Marker,
    Phase,
    ReadRef,
    TxnStatus,
    Violation,
    inv,
    res,
)

READ_X = Action.read("X")
WRITE_X1 = Action.write("X", 1)
TRYC = Action.tryc()


class TestFindViolations:
    """Test detection of well-formedness violations."""

    def test_well_formed(self, fig1: History) -> None:
        """Test a well-formed history has no violations."""
        assert find_violations(fig1.events) == []

    def test_response_without_invocation(self) -> None:
        """Test a response with nothing pending is reported."""
        events = [res(1, READ_X, 0)]
        assert find_violations(events) == [Violation(0, "response without invocation")]

    def test_event_after_commit(self) -> None:
        """Test a transaction cannot continue after committing."""
        events = [inv(1, TRYC), res(1, TRYC, Marker.COMMIT), inv(1, READ_X)]
        assert find_violations(events) == [
            Violation(2, "T1 has an event after commit or abort")
        ]

    def test_event_after_abort(self) -> None:
        """Test a transaction cannot continue after an aborting read."""
        events = [inv(1, READ_X), res(1, READ_X, Marker.ABORT), inv(1, WRITE_X1)]
        assert find_violations(events) == [
            Violation(2, "T1 has an event after commit or abort")
        ]

    def test_pending_response(self) -> None:
        """Test an invocation while another one of the same transaction is pending."""
        events = [inv(1, READ_X), inv(1, WRITE_X1)]
        assert find_violations(events) == [Violation(1, "pending response")]

    def test_read_twice(self) -> None:
        """Test a transaction may read each t-object at most once."""
        events = [inv(1, READ_X), res(1, READ_X, 0), inv(1, READ_X)]
        assert find_violations(events) == [Violation(2, "T1 reads X more than once")]

    def test_result_not_allowed(self) -> None:
        """Test a write cannot respond with an integer."""
        events = [inv(1, WRITE_X1), res(1, WRITE_X1, 5)]
        assert find_violations(events) == [Violation(1, "result 5 not allowed for write")]

    def test_invalid_txn_id(self) -> None:
        """Test transaction ids start at 1."""
        events = [inv(0, READ_X)]
        assert find_violations(events) == [Violation(0, "invalid transaction id 0")]

    def test_mismatched_response(self) -> None:
        """Test a response must answer the pending invocation."""
        events = [inv(1, READ_X), res(1, WRITE_X1, Marker.OK)]
        violations = find_violations(events)
        assert len(violations) == 1
        assert violations[0].reason.startswith("response to write X 1 while read X")

    def test_invocation_with_result(self) -> None:
        """Test an invocation cannot carry a result."""
        events = [Event(1, Phase.INVOCATION, READ_X, 0)]
        assert find_violations(events) == [Violation(0, "invocation carries a result")]

    def test_reports_every_violation(self) -> None:
        """Test checking continues past the first violation."""
        events = [res(1, READ_X, 0), inv(2, READ_X), inv(2, TRYC)]
        assert [violation.index for violation in find_violations(events)] == [0, 2]


class TestValidate:
    """Test validate."""

    def test_returns_history(self, fig1: History) -> None:
        """Test a well-formed sequence becomes a history."""
        history = validate(fig1.events)
        assert history == fig1
        assert len(history) == 18

    def test_raises_with_all_violations(self) -> None:
        """Test the error carries every violation."""
        events = [res(1, READ_X, 0), inv(2, READ_X), inv(2, TRYC)]
        with pytest.raises(MalformedHistoryError, match="event 0: response without") as err:
            validate(events)
        assert len(err.value.violations) == 2


class TestPrefix:
    """Test prefixes and projections."""

    def test_prefix_length(self, fig1: History) -> None:
        """Test a prefix keeps the first events."""
        cut = prefix(fig1, 4)
        assert len(cut) == 4
        assert cut.events == fig1.events[:4]

    @pytest.mark.parametrize("length", [0, 18])
    def test_bounds_inclusive(self, fig1: History, length: int) -> None:
        """Test the empty prefix and the whole history are allowed."""
        assert len(prefix(fig1, length)) == length

    @pytest.mark.parametrize("length", [-1, 19])
    def test_out_of_range(self, fig1: History, length: int) -> None:
        """Test prefix lengths outside the history are rejected."""
        with pytest.raises(OutOfRangeError, match="outside 0..18"):
            prefix(fig1, length)

    def test_projection(self, fig1: History) -> None:
        """Test the projection holds only the events of one transaction."""
        events = projection(fig1, 4)
        assert len(events) == 4
        assert all(event.txn == 4 for event in events)

    def test_projection_absent(self, fig1: History) -> None:
        """Test the projection on an absent transaction is empty."""
        assert projection(fig1, 9) == ()

    def test_txns(self, fig1: History) -> None:
        """Test the participating transactions."""
        assert txns(fig1) == frozenset({1, 2, 3, 4})
        assert fig1.txns == (1, 2, 3, 4)


class TestStatus:
    """Test transaction status."""

    def test_committed(self, fig1: History) -> None:
        """Test every transaction of fig1 commits."""
        assert {status(fig1, txn) for txn in fig1.txns} == {TxnStatus.COMMITTED}

    def test_mixed(self, fig4: History) -> None:
        """Test aborted, committed and complete-but-not-t-complete transactions."""
        assert status(fig4, 1) is TxnStatus.ABORTED
        assert status(fig4, 2) is TxnStatus.COMPLETE_NOT_T_COMPLETE
        assert status(fig4, 3) is TxnStatus.COMMITTED

    def test_commit_pending(self) -> None:
        """Test a transaction waiting for its tryC response."""
        assert status(fig2_prefix(0), 1) is TxnStatus.COMMIT_PENDING

    def test_op_incomplete(self) -> None:
        """Test a transaction waiting for a read response."""
        history = validate([inv(1, READ_X)])
        assert status(history, 1) is TxnStatus.OP_INCOMPLETE

    def test_unknown_txn(self, fig1: History) -> None:
        """Test a non-participant is rejected."""
        with pytest.raises(UnknownTxnError, match="T7 does not participate"):
            status(fig1, 7)


class TestRealTime:
    """Test real-time order and overlap."""

    @pytest.mark.parametrize(
        ("first", "second", "expected"),
        [
            (2, 1, True),
            (2, 3, True),
            (1, 4, True),
            (3, 4, True),
            (1, 3, False),
            (3, 1, False),
            (4, 1, False),
        ],
    )
    def test_real_time_precedes(
        self, fig1: History, first: int, second: int, expected: bool
    ) -> None:
        """Test real-time precedence in fig1."""
        assert real_time_precedes(fig1, first, second) is expected

    def test_needs_t_complete(self, fig3_prefix: History) -> None:
        """Test a transaction that neither commits nor aborts precedes nothing."""
        assert real_time_precedes(fig3_prefix, 1, 2) is False

    def test_overlap(self, fig1: History) -> None:
        """Test overlap is the absence of real-time order in both directions."""
        assert overlap(fig1, 1, 3)
        assert not overlap(fig1, 2, 1)

    def test_unknown_txn(self, fig1: History) -> None:
        """Test real-time order on a non-participant is rejected."""
        with pytest.raises(UnknownTxnError):
            real_time_precedes(fig1, 1, 8)


class TestReadWriteSets:
    """Test read and write sets."""

    def test_sets(self, fig1: History) -> None:
        """Test read and write sets of fig1."""
        assert read_write_sets(fig1, 1) == (frozenset({"X"}), frozenset({"X"}))
        assert read_write_sets(fig1, 4) == (frozenset({"X"}), frozenset())
        assert read_write_sets(fig1, 2) == (frozenset(), frozenset({"X"}))

    def test_pending_write_counts(self) -> None:
        """Test a write invocation without response is in the write set."""
        history = validate([inv(1, WRITE_X1)])
        assert read_write_sets(history, 1) == (frozenset(), frozenset({"X"}))


class TestLiveSet:
    """Test live sets and the live-set order."""

    def test_live_set(self, fig1: History) -> None:
        """Test live sets in fig1."""
        assert live_set(fig1, 1) == frozenset({1, 3})
        assert live_set(fig1, 3) == frozenset({1, 3})
        assert live_set(fig1, 2) == frozenset({2})
        assert live_set(fig1, 4) == frozenset({4})

    @pytest.mark.parametrize(
        ("first", "second", "expected"),
        [
            (2, 1, True),
            (2, 3, True),
            (1, 4, True),
            (3, 4, True),
            (1, 3, False),
            (4, 2, False),
            (1, 1, False),
        ],
    )
    def test_ls_precedes(self, fig1: History, first: int, second: int, expected: bool) -> None:
        """Test the live-set order in fig1."""
        assert ls_precedes(fig1, first, second) is expected

    def test_ls_precedes_without_commit(self, late_reader: History) -> None:
        """Test the live-set order only needs complete transactions."""
        assert ls_precedes(late_reader, 1, 2)
        assert not real_time_precedes(late_reader, 1, 2)

    def test_ls_precedes_needs_complete(self) -> None:
        """Test a pending member of the live set blocks the order."""
        history = fig2_prefix(1)
        assert not ls_precedes(history, 1, 3)


class TestVisibleWriters:
    """Test the transactions visible to each read."""

    def test_fig1(self, fig1: History) -> None:
        """Test visibility follows tryC invocations before the read response."""
        visible = visible_writers(fig1)
        assert visible[ReadRef(1, "X")] == frozenset({2})
        assert visible[ReadRef(4, "X")] == frozenset({1, 2, 3})

    def test_fig4(self, fig4: History) -> None:
        """Test a tryC invoked after the read response is not visible."""
        assert visible_writers(fig4) == {ReadRef(2, "X"): frozenset({1})}

    def test_pending_read_skipped(self) -> None:
        """Test a read without a value has no entry."""
        history = validate([inv(1, READ_X)])
        assert visible_writers(history) == {}


class TestShapes:
    """Test completeness and sequentiality predicates."""

    def test_complete(self, fig1: History, fig4: History) -> None:
        """Test complete and t-complete histories."""
        assert is_complete(fig1)
        assert is_t_complete(fig1)
        assert is_complete(fig4)
        assert not is_t_complete(fig4)

    def test_not_complete(self) -> None:
        """Test a pending tryC makes a history incomplete."""
        assert not is_complete(fig2_prefix(0))

    def test_sequential(self, fig1: History, fig5: History) -> None:
        """Test sequential histories answer every invocation immediately."""
        assert is_sequential(fig5)
        assert not is_sequential(fig1)

    def test_sequential_trailing_invocation(self, parse: Callable[[str], History]) -> None:
        """Test a final pending invocation keeps a history sequential."""
        history = parse(
            """
            inv T1 read X
            res T1 read 0
            inv T1 tryc
            """
        )
        assert is_sequential(history)

    def test_t_sequential(self, fig5: History) -> None:
        """Test t-sequential histories run transactions one after another."""
        assert is_t_sequential(prefix(fig5, 6))
        assert not is_t_sequential(fig5)

    def test_empty(self) -> None:
        """Test the empty history has every shape."""
        empty = History()
        assert is_complete(empty)
        assert is_t_complete(empty)
        assert is_sequential(empty)
        assert is_t_sequential(empty)
