"""Tests for the history text format."""

from __future__ import annotations

import pytest

from duopacity.const import CORPUS_NAMES
from duopacity.corpus import paper_history
from duopacity.exceptions import HistoryParseError, MalformedHistoryError
from duopacity.models import Action, Marker, inv, res
from duopacity.parser import format_event, format_history, parse_history


class TestParseHistory:
    """Test parsing history text."""

    def test_events(self) -> None:
        """Test each line becomes one event."""
        history = parse_history(
            "inv T1 write X 1\nres T1 write ok\ninv T2 read X\nres T2 read 1\n"
        )
        write = Action.write("X", 1)
        read = Action.read("X")
        assert history.events == (
            inv(1, write),
            res(1, write, Marker.OK),
            inv(2, read),
            res(2, read, 1),
        )

    def test_comments_and_blank_lines(self) -> None:
        """Test comments and blank lines are skipped."""
        history = parse_history("# header\n\ninv T1 tryc   # commit\nres T1 tryc C\n")
        assert len(history) == 2
        assert history.events[1].result is Marker.COMMIT

    def test_response_takes_pending_action(self) -> None:
        """Test a response inherits the t-object and value of its invocation."""
        history = parse_history("inv T3 write Y -2\nres T3 write A\n")
        assert history.events[1].action == Action.write("Y", -2)
        assert history.events[1].result is Marker.ABORT

    def test_empty(self) -> None:
        """Test empty text is the empty history."""
        assert len(parse_history("")) == 0


class TestParseErrors:
    """Test syntax errors carry their location."""

    @pytest.mark.parametrize(
        ("text", "column", "message"),
        [
            ("foo T1 read X", 1, "expected 'inv' or 'res', got 'foo'"),
            ("inv T0 read X", 5, "invalid transaction 'T0'"),
            ("inv T1 scan X", 8, "unknown operation 'scan'"),
            ("inv T1 read", 12, "missing t-object"),
            ("inv T1 read 9X", 13, "invalid t-object '9X'"),
            ("inv T1 write X one", 16, "invalid value 'one'"),
            ("inv T1 read X extra", 15, "unexpected token 'extra'"),
            ("inv T1 tryc now", 13, "unexpected token 'now'"),
            ("res T1 tryc ok", 13, "invalid result 'ok' for tryc"),
            ("res T1 read", 12, "missing result"),
        ],
    )
    def test_syntax_error(self, text: str, column: int, message: str) -> None:
        """Test one malformed line."""
        with pytest.raises(HistoryParseError, match=message) as err:
            parse_history(text)
        assert err.value.line == 1
        assert err.value.column == column
        assert str(err.value) == f"line 1, column {column}: {message}"

    def test_line_number(self) -> None:
        """Test the line number counts comments and blank lines."""
        with pytest.raises(HistoryParseError) as err:
            parse_history("# header\n\ninv T1 read X\nres T1 read maybe\n")
        assert err.value.line == 4


class TestWellFormedness:
    """Test well-formedness violations name their line."""

    def test_response_without_invocation(self) -> None:
        """Test a stray response."""
        with pytest.raises(MalformedHistoryError, match="line 1: response without invocation"):
            parse_history("res T1 read 0\n")

    def test_pending_response(self) -> None:
        """Test two invocations in a row by one transaction."""
        with pytest.raises(MalformedHistoryError, match="line 3: pending response") as err:
            parse_history("# c\ninv T1 read X\ninv T1 read Y\n")
        assert err.value.violations[0].index == 1

    def test_kind_mismatch(self) -> None:
        """Test a response of the wrong kind."""
        with pytest.raises(MalformedHistoryError, match="line 2: response to write"):
            parse_history("inv T1 read X\nres T1 write ok\n")


class TestFormat:
    """Test rendering histories as text."""

    def test_format_event(self) -> None:
        """Test each event kind renders as it is parsed."""
        write = Action.write("X", 1)
        assert format_event(inv(1, write)) == "inv T1 write X 1"
        assert format_event(res(1, write, Marker.OK)) == "res T1 write ok"
        assert format_event(res(2, Action.read("X"), 0)) == "res T2 read 0"
        assert format_event(res(2, Action.tryc(), Marker.COMMIT)) == "res T2 tryc C"
        assert format_event(inv(4, Action.trya())) == "inv T4 trya"

    @pytest.mark.parametrize("name", CORPUS_NAMES)
    def test_reparse(self, name: str) -> None:
        """Test rendered text parses back to the same history."""
        history = paper_history(name)
        assert parse_history(format_history(history)) == history
