"""History generators and differential checks.

Seeded random histories, exhaustive enumeration of small histories, and a
comparison harness that runs every criterion and checks the relations that
must hold between them.
"""

from __future__ import annotations

import itertools
import logging
import random
from collections.abc import Iterable, Iterator, Mapping
from typing import Any

import voluptuous as vol

from .const import (
    CONF_ABORT_PROBABILITY,
    CONF_INCOMPLETE_PROBABILITY,
    CONF_MAX_OPS_PER_TXN,
    CONF_OBJECT_COUNT,
    CONF_TXN_COUNT,
    CONF_VALUE_MODE,
    CONF_VALUE_RANGE,
    CRITERION_DU_OPACITY,
    CRITERION_FINAL_STATE,
    CRITERION_GHS,
    CRITERION_OPACITY,
    CRITERION_TMS2,
    DEFAULT_ABORT_PROBABILITY,
    DEFAULT_ENUM_MAX_OPS,
    DEFAULT_ENUM_MAX_TXNS,
    DEFAULT_ENUM_OBJECTS,
    DEFAULT_ENUM_VALUES,
    DEFAULT_INCOMPLETE_PROBABILITY,
    DEFAULT_MAX_OPS_PER_TXN,
    DEFAULT_OBJECT_COUNT,
    DEFAULT_TXN_COUNT,
    DEFAULT_VALUE_RANGE,
    ENUM_CAP_MAX_OPS,
    ENUM_CAP_MAX_TXNS,
    ENUM_CAP_OBJECTS,
    ENUM_CAP_VALUES,
    OBJECT_NAMES,
    SEED_MAX,
    VALUE_MODE_FROM_WRITES,
    VALUE_MODE_UNIQUE_WRITES,
)
from .criteria import du_opaque, final_state_opaque, ghs_opaque, opaque, tms2_order, unique_writes
from .exceptions import BoundsTooLargeError, InvalidConfigError
from .history import is_sequential, prefix, validate
from .models import (
    Action,
    CriteriaComparison,
    Event,
    History,
    HistoryConfig,
    HistoryVerdicts,
    Marker,
    OpKind,
    PropertyViolation,
    Result,
    inv,
    res,
)

_LOGGER = logging.getLogger(__name__)

# Relations checked by compare_criteria
PROPERTY_CONTAINMENT = "containment"
PROPERTY_PREFIX_CLOSURE = "prefix-closure"
PROPERTY_UNIQUE_WRITES = "unique-writes-equivalence"
PROPERTY_GHS_STRENGTH = "ghs-strength"
PROPERTY_OPACITY_FINAL_STATE = "opacity-implies-final-state"

_PROBABILITY = vol.All(vol.Coerce(float), vol.Range(min=0.0, max=1.0))

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_TXN_COUNT, default=DEFAULT_TXN_COUNT): vol.All(
            vol.Coerce(int), vol.Range(min=0)
        ),
        vol.Optional(CONF_OBJECT_COUNT, default=DEFAULT_OBJECT_COUNT): vol.All(
            vol.Coerce(int), vol.Range(min=0, max=len(OBJECT_NAMES))
        ),
        vol.Optional(CONF_MAX_OPS_PER_TXN, default=DEFAULT_MAX_OPS_PER_TXN): vol.All(
            vol.Coerce(int), vol.Range(min=0)
        ),
        vol.Optional(CONF_VALUE_MODE, default=VALUE_MODE_FROM_WRITES): vol.In(
            [VALUE_MODE_FROM_WRITES, VALUE_MODE_UNIQUE_WRITES]
        ),
        vol.Optional(CONF_VALUE_RANGE, default=DEFAULT_VALUE_RANGE): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_ABORT_PROBABILITY, default=DEFAULT_ABORT_PROBABILITY): _PROBABILITY,
        vol.Optional(
            CONF_INCOMPLETE_PROBABILITY, default=DEFAULT_INCOMPLETE_PROBABILITY
        ): _PROBABILITY,
    }
)


def config_from_mapping(data: Mapping[str, Any]) -> HistoryConfig:
    """Validate a mapping of settings and build a generator configuration.

    Missing keys take their defaults; string values are coerced.

    Raises:
        InvalidConfigError: If a key is unknown or a value is out of range.
    """
    try:
        validated = CONFIG_SCHEMA(dict(data))
    except vol.Invalid as err:
        raise InvalidConfigError(f"Invalid history configuration: {err}") from err
    return HistoryConfig(**validated)


def parse_config(text: str) -> HistoryConfig:
    """Parse ``key=value,key=value`` settings into a generator configuration.

    Raises:
        InvalidConfigError: If an item is not a key=value pair or fails validation.
    """
    settings: dict[str, str] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise InvalidConfigError(f"Expected key=value, got {item!r}")
        settings[key.strip()] = value.strip()
    return config_from_mapping(settings)


def _program(rng: random.Random, cfg: HistoryConfig, counter: Iterator[int]) -> list[Action]:
    """Draw the t-operations of one transaction, ending with tryC."""
    objects = OBJECT_NAMES[: cfg.object_count]
    unread = list(objects)
    actions: list[Action] = []
    count = rng.randint(1, cfg.max_ops_per_txn) if objects and cfg.max_ops_per_txn else 0
    for _ in range(count):
        if unread and rng.random() < 0.5:
            obj = rng.choice(unread)
            unread.remove(obj)
            actions.append(Action.read(obj))
            continue
        if cfg.value_mode == VALUE_MODE_UNIQUE_WRITES:
            value = next(counter)
        else:
            value = rng.randint(1, cfg.value_range)
        actions.append(Action.write(rng.choice(objects), value))
    actions.append(Action.tryc())
    return actions


def random_history(cfg: HistoryConfig, seed: int) -> History:
    """Generate a well-formed history, deterministic per configuration and seed.

    Each transaction runs a random program of reads and writes followed by
    tryC. Responses abort with ``abort_probability``; with
    ``incomplete_probability`` a transaction stops early, either after a
    response or with an invocation left pending. Transactions are interleaved
    event by event. Read results are drawn afterwards from the initial value
    and every value written to the object anywhere in the history, so both
    correct and incorrect histories come out.

    Args:
        cfg: Generator configuration.
        seed: 64-bit unsigned seed.

    Returns:
        The generated history.

    Raises:
        InvalidConfigError: If the seed is out of range.
    """
    if not 0 <= seed <= SEED_MAX:
        raise InvalidConfigError(f"Seed {seed} outside 0..{SEED_MAX}")
    rng = random.Random(seed)
    counter = itertools.count(1)

    plans: dict[int, list[Action]] = {}
    limits: dict[int, int] = {}
    for txn in range(1, cfg.txn_count + 1):
        plans[txn] = _program(rng, cfg, counter)
        limit = 2 * len(plans[txn])
        if rng.random() < cfg.incomplete_probability:
            limit = rng.randint(1, limit - 1)
        limits[txn] = limit

    events: list[Event] = []
    emitted = dict.fromkeys(plans, 0)
    live = sorted(plans)
    while live:
        txn = rng.choice(live)
        step = emitted[txn]
        action = plans[txn][step // 2]
        if step % 2 == 0:
            events.append(inv(txn, action))
        else:
            result: Result
            if rng.random() < cfg.abort_probability:
                result = Marker.ABORT
            elif action.kind is OpKind.TRYC:
                result = Marker.COMMIT
            elif action.kind is OpKind.WRITE:
                result = Marker.OK
            else:
                result = 0
            events.append(res(txn, action, result))
            if result is Marker.ABORT:
                limits[txn] = step + 1
        emitted[txn] = step + 1
        if emitted[txn] >= limits[txn]:
            live.remove(txn)

    written: dict[str, set[int]] = {}
    for event in events:
        if event.is_invocation and event.action.kind is OpKind.WRITE:
            if event.action.obj is not None and event.action.value is not None:
                written.setdefault(event.action.obj, set()).add(event.action.value)
    for index, event in enumerate(events):
        if event.is_response and event.action.kind is OpKind.READ and event.result == 0:
            obj = event.action.obj or ""
            candidates = sorted({0} | written.get(obj, set()))
            events[index] = res(event.txn, event.action, rng.choice(candidates))

    history = validate(events)
    _LOGGER.debug("Generated history with %d events from seed %d", len(history), seed)
    return history


# One t-operation of an enumerated transaction; a None result leaves it pending
_Step = tuple[Action, Result | None]


def _responses(action: Action, values: int) -> tuple[Result, ...]:
    """Return every well-formed response to an invocation."""
    if action.kind is OpKind.READ:
        return (*range(values), Marker.ABORT)
    if action.kind is OpKind.WRITE:
        return (Marker.OK, Marker.ABORT)
    if action.kind is OpKind.TRYC:
        return (Marker.COMMIT, Marker.ABORT)
    return (Marker.ABORT,)


def _scripts(max_ops: int, objects: tuple[str, ...], values: int) -> list[tuple[_Step, ...]]:
    """Return every transaction script within the bounds."""
    scripts: list[tuple[_Step, ...]] = []

    def extend(script: tuple[_Step, ...], read: frozenset[str]) -> None:
        actions = [Action.read(obj) for obj in objects if obj not in read]
        actions += [Action.write(obj, value) for obj in objects for value in range(1, values)]
        actions += [Action.tryc(), Action.trya()]
        for action in actions:
            scripts.append((*script, (action, None)))
            for result in _responses(action, values):
                step: _Step = (action, result)
                scripts.append((*script, step))
                ends = result is Marker.ABORT or action.kind in (OpKind.TRYC, OpKind.TRYA)
                if not ends and len(script) + 1 < max_ops:
                    seen = (
                        read | {action.obj}
                        if action.kind is OpKind.READ and action.obj is not None
                        else read
                    )
                    extend((*script, step), seen)

    extend((), frozenset())
    return scripts


def _script_events(txn: int, script: tuple[_Step, ...]) -> list[Event]:
    """Return the events of one transaction running a script."""
    events: list[Event] = []
    for action, result in script:
        events.append(inv(txn, action))
        if result is not None:
            events.append(res(txn, action, result))
    return events


def _interleavings(lengths: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    """Yield event schedules where transaction i starts before transaction i + 1."""
    total = sum(lengths)

    def walk(remaining: list[int], started: int, schedule: list[int]) -> Iterator[tuple[int, ...]]:
        if len(schedule) == total:
            yield tuple(schedule)
            return
        for index in range(min(started + 1, len(lengths))):
            if remaining[index] == 0:
                continue
            remaining[index] -= 1
            schedule.append(index)
            yield from walk(remaining, max(started, index + 1), schedule)
            schedule.pop()
            remaining[index] += 1

    yield from walk(list(lengths), 0, [])


def enumerate_small(
    max_txns: int = DEFAULT_ENUM_MAX_TXNS,
    max_ops: int = DEFAULT_ENUM_MAX_OPS,
    objects: int = DEFAULT_ENUM_OBJECTS,
    values: int = DEFAULT_ENUM_VALUES,
) -> Iterator[History]:
    """Enumerate every small well-formed history, each exactly once.

    Histories have 1..max_txns transactions, each running 1..max_ops
    t-operations: reads (each object at most once per transaction), writes,
    tryC and tryA. Reads return 0..values-1 and writes write 1..values-1.
    Any operation may be answered with A, which ends the transaction, and
    the last operation may be left pending. Events of different transactions
    interleave freely; transactions are numbered in the order they start.

    Raises:
        BoundsTooLargeError: If a bound exceeds its hard cap.
        ValueError: If a bound is below 1.
    """
    bounds = {
        "max_txns": (max_txns, ENUM_CAP_MAX_TXNS),
        "max_ops": (max_ops, ENUM_CAP_MAX_OPS),
        "objects": (objects, ENUM_CAP_OBJECTS),
        "values": (values, ENUM_CAP_VALUES),
    }
    for name, (bound, cap) in bounds.items():
        if bound < 1:
            raise ValueError(f"{name} must be at least 1")
        if bound > cap:
            raise BoundsTooLargeError(f"{name}={bound} exceeds the cap of {cap}")

    scripts = _scripts(max_ops, OBJECT_NAMES[:objects], values)
    for count in range(1, max_txns + 1):
        for chosen in itertools.product(scripts, repeat=count):
            streams = [_script_events(index + 1, script) for index, script in enumerate(chosen)]
            for schedule in _interleavings(tuple(len(stream) for stream in streams)):
                cursor = [0] * count
                events: list[Event] = []
                for index in schedule:
                    events.append(streams[index][cursor[index]])
                    cursor[index] += 1
                yield History(tuple(events))


def compare_criteria(histories: Iterable[History]) -> CriteriaComparison:
    """Run every criterion on every history and check the relations between them.

    Checked relations: du-opacity implies opacity, opacity implies
    final-state opacity, du-opacity holds on every prefix of a du-opaque
    history, opacity and du-opacity agree under unique writes, and on
    sequential histories the read-commit order criterion implies
    du-opacity. Histories satisfying the conflict order criterion but not
    du-opacity are counted separately.
    """
    entries: list[HistoryVerdicts] = []
    violations: list[PropertyViolation] = []
    tms2_counterexamples: list[int] = []

    for index, history in enumerate(histories):
        verdicts = {
            CRITERION_FINAL_STATE: final_state_opaque(history).satisfied,
            CRITERION_OPACITY: opaque(history).satisfied,
            CRITERION_DU_OPACITY: du_opaque(history).satisfied,
            CRITERION_TMS2: tms2_order(history).satisfied,
        }
        if is_sequential(history):
            verdicts[CRITERION_GHS] = ghs_opaque(history).satisfied
        unique = unique_writes(history)
        entries.append(HistoryVerdicts(index, verdicts, unique))

        du = verdicts[CRITERION_DU_OPACITY]
        opacity = verdicts[CRITERION_OPACITY]
        if du and not opacity:
            violations.append(
                PropertyViolation(index, PROPERTY_CONTAINMENT, "du-opaque but not opaque")
            )
        if opacity and not verdicts[CRITERION_FINAL_STATE]:
            violations.append(
                PropertyViolation(
                    index, PROPERTY_OPACITY_FINAL_STATE, "opaque but not final-state opaque"
                )
            )
        if du:
            for length in range(len(history)):
                if not du_opaque(prefix(history, length)).satisfied:
                    violations.append(
                        PropertyViolation(
                            index,
                            PROPERTY_PREFIX_CLOSURE,
                            f"prefix of length {length} is not du-opaque",
                        )
                    )
                    break
        if unique and du != opacity:
            violations.append(
                PropertyViolation(
                    index,
                    PROPERTY_UNIQUE_WRITES,
                    f"unique writes but opaque={opacity} and du-opaque={du}",
                )
            )
        if verdicts.get(CRITERION_GHS) and not du:
            violations.append(
                PropertyViolation(
                    index, PROPERTY_GHS_STRENGTH, "read-commit ordered but not du-opaque"
                )
            )
        if verdicts[CRITERION_TMS2] and not du:
            tms2_counterexamples.append(index)

    if violations:
        _LOGGER.warning("Criteria comparison found %d violation(s)", len(violations))
    return CriteriaComparison(tuple(entries), tuple(violations), tuple(tms2_counterexamples))
