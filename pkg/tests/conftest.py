"""Fixtures for du-opacity checker tests."""

from __future__ import annotations

import textwrap
from collections.abc import Callable

import pytest

from duopacity.corpus import paper_history
from duopacity.models import History
from duopacity.parser import parse_history


@pytest.fixture
def parse() -> Callable[[str], History]:
    """Return a parser for indented history text."""

    def _parse(text: str) -> History:
        return parse_history(textwrap.dedent(text))

    return _parse


@pytest.fixture
def fig1() -> History:
    """Return the du-opaque four-transaction history."""
    return paper_history("fig1")


@pytest.fixture
def fig3_full() -> History:
    """Return the final-state opaque history with a non-opaque prefix."""
    return paper_history("fig3_full")


@pytest.fixture
def fig3_prefix() -> History:
    """Return the prefix of fig3_full that is not final-state opaque."""
    return paper_history("fig3_prefix")


@pytest.fixture
def fig4() -> History:
    """Return the opaque history that is not du-opaque."""
    return paper_history("fig4")


@pytest.fixture
def fig5() -> History:
    """Return the sequential history violating the read-commit order."""
    return paper_history("fig5")


@pytest.fixture
def fig6() -> History:
    """Return the du-opaque history violating the conflict order."""
    return paper_history("fig6")


@pytest.fixture
def late_reader(parse: Callable[[str], History]) -> History:
    """Return a complete history where T2 starts after T1 ends without T1 committing."""
    return parse(
        """
        inv T1 write X 1
        res T1 write ok
        inv T2 read X
        res T2 read 0
        inv T2 tryc
        res T2 tryc C
        """
    )
