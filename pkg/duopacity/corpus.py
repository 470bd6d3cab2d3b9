"""Reference histories with known verdicts.

The named histories ship as text files in the package's ``corpus``
directory. Prefixes of an infinite history with an unbounded number of
readers are generated.
"""

from __future__ import annotations

from importlib import resources
from typing import Final

from .const import (
    CORPUS_NAMES,
    CRITERION_DU_OPACITY,
    CRITERION_FINAL_STATE,
    CRITERION_GHS,
    CRITERION_OPACITY,
    CRITERION_TMS2,
    DOMAIN,
)
from .exceptions import UnknownHistoryError
from .models import Action, Event, History, Marker, inv, res
from .parser import parse_history

# Expected verdict per corpus history and criterion
EXPECTED_VERDICTS: Final[dict[str, dict[str, bool]]] = {
    "fig1": {
        CRITERION_FINAL_STATE: True,
        CRITERION_OPACITY: True,
        CRITERION_DU_OPACITY: True,
        CRITERION_TMS2: True,
    },
    "fig3_full": {
        CRITERION_FINAL_STATE: True,
        CRITERION_OPACITY: False,
        CRITERION_DU_OPACITY: False,
    },
    "fig3_prefix": {
        CRITERION_FINAL_STATE: False,
        CRITERION_OPACITY: False,
        CRITERION_DU_OPACITY: False,
    },
    "fig4": {
        CRITERION_FINAL_STATE: True,
        CRITERION_OPACITY: True,
        CRITERION_DU_OPACITY: False,
    },
    "fig5": {
        CRITERION_FINAL_STATE: True,
        CRITERION_OPACITY: True,
        CRITERION_DU_OPACITY: True,
        CRITERION_GHS: False,
    },
    "fig6": {
        CRITERION_FINAL_STATE: True,
        CRITERION_OPACITY: True,
        CRITERION_DU_OPACITY: True,
        CRITERION_TMS2: False,
    },
}

# First failing prefix length for opacity where one exists
EXPECTED_FIRST_FAILING_PREFIX: Final[dict[str, int]] = {
    "fig3_full": 4,
    "fig3_prefix": 4,
}


def corpus_names() -> tuple[str, ...]:
    """Return the names of the shipped histories."""
    return CORPUS_NAMES


def corpus_text(name: str) -> str:
    """Return the text of a shipped history.

    Raises:
        UnknownHistoryError: If no history has that name.
    """
    if name not in CORPUS_NAMES:
        raise UnknownHistoryError(f"Unknown corpus history: {name}")
    return resources.files(DOMAIN).joinpath("corpus", f"{name}.hist").read_text(encoding="utf-8")


def paper_history(name: str) -> History:
    """Return a shipped history by name.

    Raises:
        UnknownHistoryError: If no history has that name.
    """
    return parse_history(corpus_text(name))


def fig2_prefix(readers: int) -> History:
    """Return a finite prefix of the non-limit-closed history with ``readers`` readers.

    T1 writes 1 to X and invokes tryC without a response. T2 reads 1 from X
    after that, and then T3..T(readers + 2) each read 0 from X. Every reader
    has to be serialized before T1 once T1 commits.
    """
    if readers < 0:
        raise ValueError("the number of readers must not be negative")
    write = Action.write("X", 1)
    read = Action.read("X")
    events: list[Event] = [
        inv(1, write),
        res(1, write, Marker.OK),
        inv(1, Action.tryc()),
        inv(2, read),
        res(2, read, 1),
    ]
    for txn in range(3, readers + 3):
        events.extend((inv(txn, read), res(txn, read, 0)))
    return History(tuple(events))
