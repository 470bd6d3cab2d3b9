"""Decide du-opacity, opacity and related criteria on transactional memory histories."""

from __future__ import annotations

from .criteria import (
    check,
    du_opaque,
    final_state_opaque,
    ghs_opaque,
    opaque,
    tms2_order,
    unique_writes,
)
from .exceptions import DuOpacityError
from .history import validate
from .models import Action, Criterion, Event, History, Witness, inv, res
from .parser import format_history, parse_history
from .search import search, verify_witness

__all__ = [
    "Action",
    "Criterion",
    "DuOpacityError",
    "Event",
    "History",
    "Witness",
    "check",
    "du_opaque",
    "final_state_opaque",
    "format_history",
    "ghs_opaque",
    "inv",
    "opaque",
    "parse_history",
    "res",
    "search",
    "tms2_order",
    "unique_writes",
    "validate",
    "verify_witness",
]
