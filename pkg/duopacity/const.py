"""Constants and TypedDict definitions for the du-opacity checker.

This module provides the criterion names, default bounds for the search and
the history generators, configuration keys for the fuzzer and type-safe
definitions of the machine-readable report.
"""

from __future__ import annotations

from typing import Final, Literal, TypedDict

# Package name used for the console script and corpus lookups
DOMAIN: Final = "duopacity"

# Every t-object starts with this value (the implicit initializing transaction)
INITIAL_VALUE: Final = 0

# Criterion names accepted on the command line
CRITERION_FINAL_STATE: Final = "final-state"
CRITERION_OPACITY: Final = "opacity"
CRITERION_DU_OPACITY: Final = "du-opacity"
CRITERION_GHS: Final = "ghs"
CRITERION_TMS2: Final = "tms2"

CRITERION_NAMES: Final[tuple[str, ...]] = (
    CRITERION_FINAL_STATE,
    CRITERION_OPACITY,
    CRITERION_DU_OPACITY,
    CRITERION_GHS,
    CRITERION_TMS2,
)

# CLI exit codes
EXIT_SATISFIED: Final = 0
EXIT_REFUTED: Final = 1
EXIT_USAGE: Final = 2

# Search bounds
DEFAULT_NAIVE_MAX_TXNS: Final = 7

# Small-instance enumeration defaults and hard caps
DEFAULT_ENUM_MAX_TXNS: Final = 2
DEFAULT_ENUM_MAX_OPS: Final = 2
DEFAULT_ENUM_OBJECTS: Final = 1
DEFAULT_ENUM_VALUES: Final = 2
ENUM_CAP_MAX_TXNS: Final = 3
ENUM_CAP_MAX_OPS: Final = 3
ENUM_CAP_OBJECTS: Final = 2
ENUM_CAP_VALUES: Final = 3

# Seeds are 64-bit unsigned integers
SEED_MAX: Final = 2**64 - 1

# Configuration keys for random history generation (fuzz --config k=v,...)
CONF_TXN_COUNT: Final = "txn_count"
CONF_OBJECT_COUNT: Final = "object_count"
CONF_MAX_OPS_PER_TXN: Final = "max_ops_per_txn"
CONF_VALUE_MODE: Final = "value_mode"
CONF_VALUE_RANGE: Final = "value_range"
CONF_ABORT_PROBABILITY: Final = "abort_probability"
CONF_INCOMPLETE_PROBABILITY: Final = "incomplete_probability"

# Value modes
VALUE_MODE_FROM_WRITES: Final = "from-writes"
VALUE_MODE_UNIQUE_WRITES: Final = "unique-writes"

ValueModeLiteral = Literal["from-writes", "unique-writes"]

# Default random history configuration
DEFAULT_TXN_COUNT: Final = 4
DEFAULT_OBJECT_COUNT: Final = 2
DEFAULT_MAX_OPS_PER_TXN: Final = 3
DEFAULT_VALUE_RANGE: Final = 2
DEFAULT_ABORT_PROBABILITY: Final = 0.1
DEFAULT_INCOMPLETE_PROBABILITY: Final = 0.2

# Names of the shipped corpus histories
CORPUS_NAMES: Final[tuple[str, ...]] = (
    "fig1",
    "fig3_full",
    "fig3_prefix",
    "fig4",
    "fig5",
    "fig6",
)

# Input pseudo-path prefix for corpus histories on the command line
CORPUS_PREFIX: Final = "corpus:"

# Object names handed out by the generators, in order
OBJECT_NAMES: Final[tuple[str, ...]] = ("X", "Y", "Z", "U", "V", "W")


class WitnessDict(TypedDict):
    """Serialized witness: transaction order plus pending-tryC choices."""

    order: list[str]  # e.g., ["T2", "T3", "T1", "T4"]
    commits: dict[str, Literal["C", "A"]]  # e.g., {"T5": "C", "T7": "A"}


class StatsDict(TypedDict):
    """Search statistics."""

    nodes: int
    completions: int
    ms: float


class ReportDict(TypedDict):
    """Machine-readable report for one input and one criterion."""

    input: str
    criterion: str
    satisfied: bool
    witness: WitnessDict | None
    prefix_failures: list[int]
    stats: StatsDict
