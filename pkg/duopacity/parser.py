"""Text format for histories.

One event per line, whitespace separated, ``#`` starts a comment::

    inv T1 write X 1
    res T1 write ok
    inv T2 read X
    res T2 read 1
    inv T1 tryc
    res T1 tryc C

Responses name the operation kind only; the t-object and written value are
taken from the pending invocation of the transaction.
"""

from __future__ import annotations

import re

from .exceptions import HistoryParseError, MalformedHistoryError
from .history import find_violations
from .models import Action, Event, History, Marker, OpKind, Phase, Result, Violation

_TXN_RE = re.compile(r"T[1-9][0-9]*")
_OBJECT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"-?[0-9]+")
_TOKEN_RE = re.compile(r"\S+")

# Response tokens accepted per operation kind, besides integers for reads
_RESULT_TOKENS: dict[OpKind, dict[str, Marker]] = {
    OpKind.READ: {"A": Marker.ABORT},
    OpKind.WRITE: {"ok": Marker.OK, "A": Marker.ABORT},
    OpKind.TRYC: {"C": Marker.COMMIT, "A": Marker.ABORT},
    OpKind.TRYA: {"A": Marker.ABORT},
}


class _Line:
    """Tokens of one line with their 1-based columns."""

    def __init__(self, number: int, text: str) -> None:
        """Tokenize the part of the line before any comment."""
        self.number = number
        self.end = len(text) + 1
        self.tokens = [(match.group(), match.start() + 1) for match in _TOKEN_RE.finditer(text)]

    def error(self, position: int, reason: str) -> HistoryParseError:
        """Build an error located at a token (or the end of the line)."""
        column = self.tokens[position][1] if position < len(self.tokens) else self.end
        return HistoryParseError(self.number, column, reason)

    def token(self, position: int, what: str) -> str:
        """Return a token, raising if the line ends early."""
        if position >= len(self.tokens):
            raise self.error(position, f"missing {what}")
        return self.tokens[position][0]

    def finish(self, count: int) -> None:
        """Raise if the line has more than ``count`` tokens."""
        if len(self.tokens) > count:
            raise self.error(count, f"unexpected token {self.tokens[count][0]!r}")


def _parse_result(line: _Line, kind: OpKind) -> Result:
    """Parse the result token of a response."""
    token = line.token(3, "result")
    marker = _RESULT_TOKENS[kind].get(token)
    if marker is not None:
        return marker
    if kind is OpKind.READ and _INT_RE.fullmatch(token):
        return int(token)
    raise line.error(3, f"invalid result {token!r} for {kind}")


def _parse_line(line: _Line, pending: dict[int, Action]) -> Event:
    """Parse one non-empty line into an event."""
    phase_token = line.token(0, "phase")
    try:
        phase = Phase(phase_token)
    except ValueError as err:
        raise line.error(0, f"expected 'inv' or 'res', got {phase_token!r}") from err

    txn_token = line.token(1, "transaction")
    if not _TXN_RE.fullmatch(txn_token):
        raise line.error(1, f"invalid transaction {txn_token!r}")
    txn = int(txn_token[1:])

    kind_token = line.token(2, "operation")
    try:
        kind = OpKind(kind_token)
    except ValueError as err:
        raise line.error(2, f"unknown operation {kind_token!r}") from err

    if phase is Phase.INVOCATION:
        action = _parse_invocation(line, kind)
        pending[txn] = action
        return Event(txn, phase, action)

    result = _parse_result(line, kind)
    line.finish(4)
    outstanding = pending.pop(txn, None)
    if outstanding is not None and outstanding.kind is kind:
        action = outstanding
    else:
        # Left for the well-formedness check to report
        action = Action(kind, outstanding.obj if outstanding else None)
    return Event(txn, phase, action, result)


def _parse_invocation(line: _Line, kind: OpKind) -> Action:
    """Parse the arguments of an invocation."""
    if kind in (OpKind.TRYC, OpKind.TRYA):
        line.finish(3)
        return Action(kind)
    obj = line.token(3, "t-object")
    if not _OBJECT_RE.fullmatch(obj):
        raise line.error(3, f"invalid t-object {obj!r}")
    if kind is OpKind.READ:
        line.finish(4)
        return Action.read(obj)
    value = line.token(4, "value")
    if not _INT_RE.fullmatch(value):
        raise line.error(4, f"invalid value {value!r}")
    line.finish(5)
    return Action.write(obj, int(value))


def parse_history(text: str) -> History:
    """Parse history text and validate it.

    Args:
        text: The history in the text format.

    Returns:
        The well-formed history.

    Raises:
        HistoryParseError: On the first syntax error, with line and column.
        MalformedHistoryError: With every well-formedness violation, each
            naming the line of the offending event.
    """
    events: list[Event] = []
    lines: list[int] = []
    pending: dict[int, Action] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = _Line(number, raw.split("#", 1)[0])
        if not line.tokens:
            continue
        events.append(_parse_line(line, pending))
        lines.append(number)

    violations = find_violations(events)
    if violations:
        raise MalformedHistoryError(
            [
                Violation(violation.index, f"line {lines[violation.index]}: {violation.reason}")
                for violation in violations
            ]
        )
    return History(tuple(events))


def format_event(event: Event) -> str:
    """Render one event as a line of the text format."""
    if event.is_invocation:
        return f"inv T{event.txn} {event.action}"
    return f"res T{event.txn} {event.action.kind} {event.result}"


def format_history(history: History) -> str:
    """Render a history in the text format, one event per line."""
    return "".join(f"{format_event(event)}\n" for event in history)
