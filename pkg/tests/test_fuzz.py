"""Tests for history generation and the criteria comparison."""

from __future__ import annotations

from collections.abc import Callable

import pytest

from duopacity.const import (
    CORPUS_NAMES,
    CRITERION_GHS,
    CRITERION_NAMES,
    SEED_MAX,
    VALUE_MODE_UNIQUE_WRITES,
)
from duopacity.corpus import paper_history
from duopacity.criteria import unique_writes
from duopacity.exceptions import BoundsTooLargeError, InvalidConfigError
from duopacity.fuzz import (
    PROPERTY_CONTAINMENT,
    PROPERTY_GHS_STRENGTH,
    PROPERTY_OPACITY_FINAL_STATE,
    PROPERTY_PREFIX_CLOSURE,
    PROPERTY_UNIQUE_WRITES,
    compare_criteria,
    config_from_mapping,
    enumerate_small,
    parse_config,
    random_history,
)
from duopacity.history import find_violations, is_sequential
from duopacity.models import (
    CriterionReport,
    History,
    HistoryConfig,
    Marker,
    OpKind,
    TxnStatus,
    Verdict,
)
from duopacity.parser import format_history, parse_history


class TestConfig:
    """Test generator configuration validation."""

    def test_defaults(self) -> None:
        """Test missing keys take their defaults."""
        assert config_from_mapping({}) == HistoryConfig()

    def test_parse(self) -> None:
        """Test key=value settings are coerced."""
        cfg = parse_config("txn_count=3, value_mode=unique-writes,abort_probability=0.5")
        assert cfg.txn_count == 3
        assert cfg.value_mode == VALUE_MODE_UNIQUE_WRITES
        assert cfg.abort_probability == 0.5
        assert cfg.object_count == HistoryConfig().object_count

    def test_empty_text(self) -> None:
        """Test an empty setting string gives the defaults."""
        assert parse_config("") == HistoryConfig()

    def test_zero_objects_and_operations(self) -> None:
        """Test zero objects and zero operations per transaction are accepted."""
        cfg = config_from_mapping({"object_count": "0", "max_ops_per_txn": 0})
        assert cfg.object_count == 0
        assert cfg.max_ops_per_txn == 0

    @pytest.mark.parametrize(
        ("text", "message"),
        [
            ("txn_count", "Expected key=value"),
            ("=3", "Expected key=value"),
            ("colour=red", "Invalid history configuration"),
            ("txn_count=many", "Invalid history configuration"),
            ("abort_probability=2", "Invalid history configuration"),
            ("object_count=7", "Invalid history configuration"),
            ("max_ops_per_txn=-1", "Invalid history configuration"),
            ("value_mode=random", "Invalid history configuration"),
        ],
    )
    def test_invalid(self, text: str, message: str) -> None:
        """Test invalid settings are rejected."""
        with pytest.raises(InvalidConfigError, match=message):
            parse_config(text)


class TestRandomHistory:
    """Test seeded random history generation."""

    def test_deterministic(self) -> None:
        """Test the same configuration and seed give the same history."""
        cfg = HistoryConfig(txn_count=5)
        assert random_history(cfg, 42) == random_history(cfg, 42)

    def test_well_formed(self) -> None:
        """Test generated histories are well-formed."""
        cfg = HistoryConfig(txn_count=5, abort_probability=0.3, incomplete_probability=0.5)
        for seed in range(50):
            history = random_history(cfg, seed)
            assert find_violations(history.events) == []
            assert len(history.txns) == 5

    def test_reads_from_written_values(self) -> None:
        """Test every read returns the initial value or a value written to the object."""
        cfg = HistoryConfig(txn_count=4, value_range=3)
        for seed in range(50):
            history = random_history(cfg, seed)
            written = {
                (event.action.obj, event.action.value)
                for event in history
                if event.is_invocation and event.action.kind is OpKind.WRITE
            }
            for event in history:
                if (
                    event.is_response
                    and event.action.kind is OpKind.READ
                    and isinstance(event.result, int)
                ):
                    assert event.result == 0 or (event.action.obj, event.result) in written

    def test_unique_writes_mode(self) -> None:
        """Test unique-writes mode never repeats a written value."""
        cfg = HistoryConfig(txn_count=6, value_mode=VALUE_MODE_UNIQUE_WRITES)
        for seed in range(50):
            assert unique_writes(random_history(cfg, seed))

    @pytest.mark.parametrize(
        "cfg",
        [
            HistoryConfig(txn_count=3, max_ops_per_txn=0),
            HistoryConfig(txn_count=3, object_count=0),
        ],
    )
    def test_commit_only(self, cfg: HistoryConfig) -> None:
        """Test transactions only invoke tryC when there is nothing to read or write."""
        for seed in range(20):
            history = random_history(cfg, seed)
            assert find_violations(history.events) == []
            assert len(history.txns) == 3
            assert {event.action.kind for event in history} == {OpKind.TRYC}

    def test_no_transactions(self) -> None:
        """Test zero transactions give the empty history."""
        assert len(random_history(HistoryConfig(txn_count=0), 1)) == 0

    @pytest.mark.parametrize("seed", [-1, SEED_MAX + 1])
    def test_seed_range(self, seed: int) -> None:
        """Test seeds outside 64-bit unsigned range are rejected."""
        with pytest.raises(InvalidConfigError, match="outside"):
            random_history(HistoryConfig(), seed)


class TestEnumerateSmall:
    """Test exhaustive enumeration of small histories."""

    @pytest.mark.parametrize(
        ("bounds", "count"),
        [
            ((1, 1, 1, 1), 8),
            ((1, 1, 1, 2), 12),
            ((1, 2, 1, 2), 40),
            ((2, 1, 1, 2), 316),
        ],
    )
    def test_cardinality(self, bounds: tuple[int, int, int, int], count: int) -> None:
        """Test the number of enumerated histories."""
        assert sum(1 for _ in enumerate_small(*bounds)) == count

    def test_default_cardinality(self) -> None:
        """Test the number of histories under the default bounds."""
        assert sum(1 for _ in enumerate_small()) == 22464

    def test_single_operation(self) -> None:
        """Test one transaction of one operation on one value."""
        histories = {format_history(history) for history in enumerate_small(1, 1, 1, 1)}
        assert histories == {
            "inv T1 read X\n",
            "inv T1 read X\nres T1 read 0\n",
            "inv T1 read X\nres T1 read A\n",
            "inv T1 tryc\n",
            "inv T1 tryc\nres T1 tryc C\n",
            "inv T1 tryc\nres T1 tryc A\n",
            "inv T1 trya\n",
            "inv T1 trya\nres T1 trya A\n",
        }

    def test_distinct_and_well_formed(self) -> None:
        """Test enumerated histories are well-formed and pairwise distinct."""
        histories = list(enumerate_small(2, 1, 1, 2))
        assert len(set(histories)) == len(histories)
        for history in histories:
            assert find_violations(history.events) == []

    def test_covers_every_shape(self) -> None:
        """Test pending operations, aborts, tryA and overlapping operations all occur."""
        statuses: set[TxnStatus] = set()
        kinds: set[OpKind] = set()
        aborting_reads = 0
        interleaved = 0
        for history in enumerate_small(2, 1, 1, 2):
            statuses.update(view.status for view in history.views.values())
            kinds.update(event.action.kind for event in history)
            aborting_reads += sum(
                1
                for view in history.views.values()
                for read in view.reads
                if read.result is Marker.ABORT
            )
            interleaved += not is_sequential(history)
        assert statuses == set(TxnStatus)
        assert kinds == set(OpKind)
        assert aborting_reads > 0
        assert interleaved > 0

    def test_commit_pending_writer(self) -> None:
        """Test a writer left commit-pending occurs once operations chain."""
        assert any(
            history.views[txn].status is TxnStatus.COMMIT_PENDING
            and history.views[txn].write_set
            for history in enumerate_small(1, 2, 1, 2)
            for txn in history.txns
        )

    def test_canonical_numbering(self) -> None:
        """Test transactions start in id order."""
        for history in enumerate_small(2, 1, 1, 2):
            firsts = [history.views[txn].first for txn in history.txns]
            assert firsts == sorted(firsts)

    @pytest.mark.parametrize(
        ("bounds", "message"),
        [
            ((4, 1, 1, 1), "max_txns=4 exceeds the cap of 3"),
            ((1, 4, 1, 1), "max_ops=4 exceeds the cap of 3"),
            ((1, 1, 3, 1), "objects=3 exceeds the cap of 2"),
            ((1, 1, 1, 4), "values=4 exceeds the cap of 3"),
        ],
    )
    def test_caps(self, bounds: tuple[int, int, int, int], message: str) -> None:
        """Test bounds above the hard caps are rejected."""
        with pytest.raises(BoundsTooLargeError, match=message):
            next(enumerate_small(*bounds))

    def test_below_one(self) -> None:
        """Test bounds below one are rejected."""
        with pytest.raises(ValueError, match="max_ops must be at least 1"):
            next(enumerate_small(1, 0, 1, 1))


class TestCompareCriteria:
    """Test the differential comparison of the criteria."""

    def test_corpus(self) -> None:
        """Test the shipped histories satisfy every relation between criteria."""
        comparison = compare_criteria(paper_history(name) for name in CORPUS_NAMES)
        assert comparison.ok
        assert comparison.violations == ()
        assert len(comparison.entries) == len(CORPUS_NAMES)
        assert comparison.tms2_counterexamples == (
            CORPUS_NAMES.index("fig3_full"),
            CORPUS_NAMES.index("fig4"),
        )

    def test_entries(self) -> None:
        """Test every criterion is recorded, the read-commit order only when sequential."""
        comparison = compare_criteria([paper_history("fig1"), paper_history("fig5")])
        fig1, fig5 = comparison.entries
        assert set(fig1.verdicts) == set(CRITERION_NAMES) - {CRITERION_GHS}
        assert set(fig5.verdicts) == set(CRITERION_NAMES)
        assert fig5.verdicts[CRITERION_GHS] is False
        assert fig1.unique_writes is False
        assert fig5.index == 1

    def test_random(self) -> None:
        """Test a batch of random histories satisfies every relation."""
        cfg = HistoryConfig(txn_count=3)
        comparison = compare_criteria(random_history(cfg, seed) for seed in range(30))
        assert comparison.ok
        assert len(comparison.entries) == 30

    def test_empty_stream(self) -> None:
        """Test an empty stream gives an empty comparison."""
        comparison = compare_criteria([])
        assert comparison.entries == ()
        assert comparison.violations == ()
        assert comparison.tms2_counterexamples == ()
        assert comparison.ok

    @pytest.mark.parametrize(
        ("forced", "prefix_du", "prop", "detail"),
        [
            (
                {"du_opaque": True, "opaque": False},
                True,
                PROPERTY_CONTAINMENT,
                "du-opaque but not opaque",
            ),
            (
                {"final_state_opaque": False},
                True,
                PROPERTY_OPACITY_FINAL_STATE,
                "opaque but not final-state opaque",
            ),
            (
                {"du_opaque": True},
                False,
                PROPERTY_PREFIX_CLOSURE,
                "prefix of length 0 is not du-opaque",
            ),
            (
                {"unique_writes": True},
                True,
                PROPERTY_UNIQUE_WRITES,
                "unique writes but opaque=True and du-opaque=False",
            ),
            (
                {"ghs_opaque": True, "opaque": False, "final_state_opaque": False},
                True,
                PROPERTY_GHS_STRENGTH,
                "read-commit ordered but not du-opaque",
            ),
        ],
    )
    def test_each_relation_reported(
        self,
        monkeypatch: pytest.MonkeyPatch,
        forced: dict[str, bool],
        prefix_du: bool,
        prop: str,
        detail: str,
    ) -> None:
        """Test a broken relation is reported with its property and history index."""
        self._force(monkeypatch, forced, prefix_du)
        comparison = compare_criteria([History(()), self._target()])
        assert not comparison.ok
        assert [(item.index, item.property) for item in comparison.violations] == [(1, prop)]
        assert comparison.violations[0].detail == detail

    def test_tms2_counterexample_counted(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test a conflict ordered history that is not du-opaque is counted, not reported."""
        self._force(monkeypatch, {"tms2_order": True}, True)
        comparison = compare_criteria([History(()), self._target()])
        assert comparison.ok
        assert comparison.violations == ()
        assert comparison.tms2_counterexamples == (1,)

    @staticmethod
    def _target() -> History:
        """Return a committed single-write history."""
        return parse_history("inv T1 write X 1\nres T1 write ok\ninv T1 tryc\nres T1 tryc C\n")

    @staticmethod
    def _force(
        monkeypatch: pytest.MonkeyPatch, forced: dict[str, bool], prefix_du: bool
    ) -> None:
        """Replace the criteria with fixed verdicts on the four-event target.

        Without a forced value the target is opaque and final-state opaque but
        not du-opaque, and satisfies neither the conflict order nor the
        read-commit order criterion. Shorter histories are du-opaque exactly
        when prefix_du is set.
        """
        defaults = {
            "final_state_opaque": True,
            "opaque": True,
            "du_opaque": False,
            "tms2_order": False,
            "ghs_opaque": False,
        }

        def fixed(name: str) -> Callable[[History], CriterionReport]:
            def check(history: History) -> CriterionReport:
                if len(history) != 4:
                    if name == "du_opaque":
                        return CriterionReport(name, Verdict(prefix_du))
                    return CriterionReport(name, Verdict(name in ("final_state_opaque", "opaque")))
                return CriterionReport(name, Verdict(forced.get(name, defaults[name])))

            return check

        for name in defaults:
            monkeypatch.setattr(f"duopacity.fuzz.{name}", fixed(name))
        monkeypatch.setattr(
            "duopacity.fuzz.unique_writes", lambda history: forced.get("unique_writes", False)
        )
