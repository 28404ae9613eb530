import pytest

import atlas
from atlas import Atlas
from bundles import make_split, random_class
from models import ClassKind, UsageError, Verdict
from spaces import FLOP, Surface
from utils import _merge


@pytest.fixture
async def harness(config):
    instance = Atlas(config=config)
    await instance.initialize()
    yield instance
    await instance.stop()


@pytest.fixture
async def cached_harness(config):
    instance = Atlas(config=_merge(config, {"cache": {"enabled": True}}))
    await instance.initialize()
    yield instance
    await instance.stop()


class TestSeedSchedule:
    def test_defaults_from_config(self, config):
        assert Atlas(config=config).seed_schedule() == [0, 1, 2]

    def test_explicit(self, config):
        assert Atlas(config=config).seed_schedule(samples=2, seed=10) == [10, 11]

    def test_negative_rejected(self, config):
        with pytest.raises(UsageError):
            Atlas(config=config).seed_schedule(samples=-1)


class TestWitnesses:
    @pytest.mark.parametrize("n,k", [(2, 3), (2, 2), (0, 2)])
    async def test_nonempty(self, harness, n, k):
        record = await harness.witness_nonempty(n, k)
        assert record.verdict is Verdict.PASS
        assert record.report.chi == n
        assert record.space == f"zk:{k}"

    async def test_nonempty_zero_on_z1_uses_trivial_bundle(self, harness):
        record = await harness.witness_nonempty(0, 1)
        assert record.verdict is Verdict.PASS
        assert record.j == 0

    async def test_nonempty_rejects_negative(self, harness):
        with pytest.raises(UsageError):
            await harness.witness_nonempty(-1, 2)

    @pytest.mark.parametrize("j", [2, 3])
    async def test_flop_family(self, harness, j):
        record = await harness.witness_flop_family(j)
        assert record.verdict is Verdict.PASS
        assert record.report.chi == j - 1
        assert record.details == {"projDim": 4 * j - 5, "gamma1": 4 * j - 4}

    async def test_flop_family_needs_type_two(self, harness):
        with pytest.raises(UsageError):
            await harness.witness_flop_family(1)


class TestChargeSpectrum:
    async def test_gap_on_z2(self, harness):
        spectrum = await harness.instanton_gap(2, 4)
        assert spectrum.verdict is Verdict.PASS
        assert spectrum.min_chi == 1
        assert spectrum.bound_certified
        assert set(spectrum.achieved) == {2, 4}
        assert max(spectrum.achieved[2]) == 2

    async def test_no_gap_on_z1(self, harness):
        with pytest.raises(UsageError):
            await harness.instanton_gap(1, 3)

    async def test_jmax_below_k(self, harness):
        with pytest.raises(UsageError):
            await harness.instanton_gap(3, 2)

    async def test_scan(self, harness):
        scan = await harness.intermediate_value_scan(2, 3)
        assert (scan.lower, scan.upper) == (2, 4)
        assert 4 in scan.achieved
        assert set(scan.achieved) | set(scan.not_observed) >= {2, 3, 4}
        assert scan.seeds == [0, 1, 2]

    async def test_stratification_pairs(self, harness):
        pairs = await harness.stratification_pairs(2, 2)
        assert {"w": 1, "h": 1} in [{"w": p["w"], "h": p["h"]} for p in pairs]
        assert sum(p["count"] for p in pairs) == 4

    async def test_stratification_needs_multiple_of_k(self, harness):
        with pytest.raises(UsageError):
            await harness.stratification_pairs(2, 3)


class TestSweep:
    @pytest.mark.parametrize("space", [Surface(2), FLOP])
    async def test_no_violations(self, harness, space):
        rows = await harness.sweep_bounds(space, 3, samples=2)
        assert [row.j for row in rows] == [1, 2, 3]
        for row in rows:
            assert row.violations == []
            assert row.split_chi == row.upper
            assert row.lower <= row.sampled_min_chi <= row.sampled_max_chi <= row.upper

    async def test_jmax_checked(self, harness):
        with pytest.raises(UsageError):
            await harness.sweep_bounds(Surface(1), 0)


class TestTable1:
    async def test_single_space(self, harness):
        rows = await harness.table1(spaces=("Z3",))
        split, generic = rows
        assert split.kind is ClassKind.SPLIT
        assert split.values == (1, 2, 7)
        assert split.status == "ok"
        assert generic.status in ("ok", "unconverged")
        assert generic.samples == 3

    async def test_wrong_expectation_is_a_mismatch(self, config):
        config = _merge(config, {"table1": {"expected": {"Z3": {"split": [1, 2, 8]}}}})
        instance = Atlas(config=config)
        await instance.initialize()
        try:
            rows = await instance.table1(samples=1, spaces=("Z3",))
        finally:
            await instance.stop()
        assert rows[0].status == "mismatch"

    def test_generic_status(self):
        assert atlas._generic_status((0, 2, 6), (0, 2, 6)) == "ok"
        assert atlas._generic_status((0, 3, 7), (0, 2, 6)) == "unconverged"
        assert atlas._generic_status((0, 1, 6), (0, 2, 6)) == "mismatch"


class TestReports:
    async def test_cache_hit_skips_computation(self, cached_harness, mocker):
        spy = mocker.spy(atlas, "_report_task")
        E = random_class(Surface(2), 2, 0)
        first = await cached_harness.compute_report(E)
        second = await cached_harness.compute_report(E.scaled(3))
        assert first.height == second.height
        assert spy.call_count == 1
        stats = await cached_harness.get_stats()
        assert stats["cache_hits"] == 1
        assert stats["reports_computed"] == 1
        assert stats["cache"]["entries"] == 1

    async def test_errors_are_counted(self, harness, mocker):
        mocker.patch("atlas._report_task", side_effect=RuntimeError("boom"))
        with pytest.raises(RuntimeError):
            await harness.compute_report(make_split(Surface(1), 1))
        assert harness.stats["errors"] == 1

    async def test_generic_values(self, harness):
        values = await harness.generic_values(FLOP, 3, samples=2)
        assert values["w"] == 0
        assert values["h"] == 2
        assert values["seeds"] == [0, 1]
        assert len(values["reports"]) == 2

    async def test_generic_values_need_samples(self, harness):
        with pytest.raises(UsageError):
            await harness.generic_values(FLOP, 3, samples=0)
