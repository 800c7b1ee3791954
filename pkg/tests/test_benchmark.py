import json

import numpy as np
import pytest

from retrofit import benchmark as bm
from retrofit import datastore as ds
from retrofit.errors import EmptyGroup, UnknownYear

from oracles import brute_force_group, interpolated_quantile


def make_record(i, municipality="Umeå", year=1970, families=1, area=100.0,
                eui=120.0):
    return ds.EpcRecord(
        record_id=f"r{i}", municipality=municipality, construction_year=year,
        families=families, floor_area_m2=area, annual_energy_kwh=eui * area,
        latitude=63.8, longitude=20.3,
    )


def make_set(records):
    return ds.RecordSet(records=tuple(records), provenance="synthetic")


def stats_from_values(values):
    group = bm.ReferenceGroup(key=("x", "y", "z"),
                              eui_values=np.asarray(values, dtype=float),
                              widened=False, level="test")
    return bm.compute_group_stats(group)


PROFILE = bm.HouseProfile(municipality="Umeå", year_band=ds.Y1961_1980,
                          family_band=ds.ONE_OR_TWO, area_m2=120.0)


class TestSelection:
    def test_exact_match(self):
        records = [make_record(i, eui=100.0 + i) for i in range(40)]
        records += [make_record(100 + i, municipality="Lycksele") for i in range(5)]
        group = bm.select_reference_group(PROFILE, make_set(records))
        assert group.count == 40
        assert not group.widened

    def test_widening_to_region(self):
        records = [make_record(i, eui=100.0 + i) for i in range(2)]
        records += [make_record(100 + i, municipality="Lycksele", eui=90.0 + i)
                    for i in range(20)]
        group = bm.select_reference_group(PROFILE, make_set(records),
                                          min_group_size=10)
        assert group.widened
        assert group.count == 22
        assert group.level == "year_band+family_band"

    def test_second_widening_drops_year_band(self):
        records = [make_record(i, year=1950, eui=100.0 + i) for i in range(20)]
        group = bm.select_reference_group(PROFILE, make_set(records),
                                          min_group_size=10)
        assert group.widened
        assert group.level == "family_band"

    def test_empty_dataset(self):
        with pytest.raises(EmptyGroup):
            bm.select_reference_group(PROFILE, make_set([]))

    def test_empty_even_widened(self):
        records = [make_record(i, families=4) for i in range(30)]
        with pytest.raises(EmptyGroup):
            bm.select_reference_group(PROFILE, make_set(records))

    def test_widening_disabled(self):
        records = [make_record(i) for i in range(5)]
        with pytest.raises(EmptyGroup):
            bm.select_reference_group(PROFILE, make_set(records),
                                      min_group_size=10, widen=False)

    def test_brute_force_oracle_equivalence(self):
        rng = np.random.default_rng(42)
        municipalities = list(ds.MUNICIPALITIES)
        for trial in range(10):
            n = int(rng.integers(1, 200))
            records = [
                make_record(
                    i,
                    municipality=municipalities[int(rng.integers(0, 15))],
                    year=int(rng.integers(1900, 2015)),
                    families=int(rng.integers(1, 5)),
                    area=float(rng.uniform(60, 250)),
                    eui=float(rng.uniform(60, 220)),
                )
                for i in range(n)
            ]
            record_set = make_set(records)
            profile = bm.HouseProfile(
                municipality=municipalities[int(rng.integers(0, 15))],
                year_band=ds.YEAR_BANDS[int(rng.integers(0, 3))],
                family_band=ds.FAMILY_BANDS[int(rng.integers(0, 2))],
                area_m2=100.0,
            )
            expected = brute_force_group(records, profile.municipality,
                                         profile.year_band, profile.family_band)
            if expected:
                group = bm.select_reference_group(profile, record_set,
                                                  min_group_size=1, widen=False)
                assert np.allclose(group.eui_values, expected)
            else:
                with pytest.raises(EmptyGroup):
                    bm.select_reference_group(profile, record_set,
                                              min_group_size=1, widen=False)


class TestGroupStats:
    def test_five_point_group(self):
        stats = stats_from_values([10.0, 20.0, 30.0, 40.0, 50.0])
        assert stats.q20 == pytest.approx(18.0, abs=1e-12)
        assert stats.q40 == pytest.approx(26.0, abs=1e-12)
        assert stats.q60 == pytest.approx(34.0, abs=1e-12)
        assert stats.q80 == pytest.approx(42.0, abs=1e-12)
        assert stats.mean == 30.0
        assert (stats.min, stats.max) == (10.0, 50.0)
        # cross-check against the hand-rolled interpolation oracle
        for p, got in ((0.2, stats.q20), (0.4, stats.q40), (0.6, stats.q60),
                       (0.8, stats.q80)):
            assert got == pytest.approx(
                interpolated_quantile([10, 20, 30, 40, 50], p), abs=1e-12)

    def test_single_member(self):
        stats = stats_from_values([7.0])
        assert stats.q20 == stats.q40 == stats.q60 == stats.q80 == 7.0

    def test_constant_group(self):
        stats = stats_from_values([5.0, 5.0, 5.0, 5.0])
        assert stats.mean == stats.min == stats.max == 5.0
        assert stats.q20 == stats.q40 == stats.q60 == stats.q80 == 5.0

    def test_random_groups_match_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            values = rng.uniform(10, 300, size=int(rng.integers(2, 60)))
            stats = stats_from_values(values)
            assert stats.q20 == pytest.approx(
                interpolated_quantile(values, 0.2), rel=1e-12)
            assert stats.q80 == pytest.approx(
                interpolated_quantile(values, 0.8), rel=1e-12)
            assert (stats.min <= stats.q20 <= stats.q40
                    <= stats.q60 <= stats.q80 <= stats.max)


FIXED = bm.GroupStats(count=100, mean=80.0, min=10.0, max=200.0,
                      q20=50.0, q40=70.0, q60=90.0, q80=110.0)


class TestClassify:
    def test_examples(self):
        assert bm.classify_eui(40.0, FIXED) == bm.EXCELLENT
        assert bm.classify_eui(90.0, FIXED) == bm.AVERAGE
        assert bm.classify_eui(120.0, FIXED) == bm.VERY_POOR

    def test_boundaries_inclusive_on_upper_side(self):
        assert bm.classify_eui(50.0, FIXED) == bm.EXCELLENT
        assert bm.classify_eui(70.0, FIXED) == bm.GOOD
        assert bm.classify_eui(110.0, FIXED) == bm.POOR
        assert bm.classify_eui(110.0001, FIXED) == bm.VERY_POOR

    def test_monotonicity(self):
        rng = np.random.default_rng(5)
        euis = np.sort(rng.uniform(0.0, 250.0, size=10_000))
        order = {r: i for i, r in enumerate(bm.RATINGS)}  # worst -> best
        ranks = [order[bm.classify_eui(float(e), FIXED)] for e in euis]
        assert all(a >= b for a, b in zip(ranks, ranks[1:]))

    def test_quintile_occupancy_on_uniform_group(self):
        rng = np.random.default_rng(6)
        group = rng.uniform(50.0, 150.0, size=10_000)
        stats = stats_from_values(group)
        fresh = rng.uniform(50.0, 150.0, size=10_000)
        counts = {r: 0 for r in bm.RATINGS}
        for e in fresh:
            counts[bm.classify_eui(float(e), stats)] += 1
        for rating, count in counts.items():
            assert abs(count / 10_000 - 0.2) < 0.03, rating


class TestTargets:
    def test_default_and_interpolation(self):
        table = bm.EnergyTargetTable.default()
        assert table.allowed_eui(2022) == 90.0
        assert table.allowed_eui(2050) == 56.0
        mid = table.allowed_eui(2036)
        assert 56.0 < mid < 90.0
        assert mid == pytest.approx(90.0 + (56.0 - 90.0) * (2036 - 2022) / 28)

    def test_unknown_year(self):
        table = bm.EnergyTargetTable.default()
        with pytest.raises(UnknownYear):
            table.allowed_eui(2021)
        with pytest.raises(UnknownYear):
            table.allowed_eui(2051)

    def test_from_json(self):
        table = bm.EnergyTargetTable.from_json(json.dumps({"2030": 80.0,
                                                           "2040": 70.0}))
        assert table.allowed_eui(2035) == pytest.approx(75.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            bm.EnergyTargetTable(entries=((2022, 90.0), (2050, 95.0)))
        with pytest.raises(ValueError):
            bm.EnergyTargetTable(entries=((2022, 0.0),))
        with pytest.raises(ValueError):
            bm.EnergyTargetTable(entries=())


class TestAdvice:
    TABLE = bm.EnergyTargetTable.default()

    def test_good_house_needs_nothing(self):
        advice = bm.advise(40.0, bm.EXCELLENT, self.TABLE, 2022)
        assert advice.needs_renovation is False
        assert bm.REASON_BELOW_ALLOWED in advice.reasons
        assert advice.reasons

    def test_above_allowed(self):
        advice = bm.advise(95.0, bm.EXCELLENT, self.TABLE, 2022)
        assert advice.needs_renovation is True
        assert advice.reasons == (bm.REASON_ABOVE_ALLOWED,)

    def test_bad_rating(self):
        advice = bm.advise(40.0, bm.VERY_POOR, self.TABLE, 2022)
        assert advice.needs_renovation is True
        assert advice.reasons == (bm.REASON_RATING_BELOW_AVERAGE,)

    def test_exact_threshold_requires_renovation(self):
        advice = bm.advise(90.0, bm.GOOD, self.TABLE, 2022)
        assert advice.needs_renovation is True

    def test_invariant_needs_renovation_iff(self):
        for eui in (40.0, 89.999, 90.0, 150.0):
            for rating in bm.RATINGS:
                advice = bm.advise(eui, rating, self.TABLE, 2022)
                expected_ok = eui < 90.0 and rating in (bm.EXCELLENT, bm.GOOD,
                                                        bm.AVERAGE)
                assert advice.needs_renovation == (not expected_ok)
                assert advice.reasons

    def test_monotone_in_eui(self):
        rng = np.random.default_rng(8)
        for rating in bm.RATINGS:
            euis = np.sort(rng.uniform(0, 200, size=200))
            flags = [bm.advise(float(e), rating, self.TABLE, 2022).needs_renovation
                     for e in euis]
            # once true it stays true as EUI rises
            assert all(b or not a for a, b in zip(flags, flags[1:]))


class TestComparison:
    def test_extremes_and_median(self):
        stats = stats_from_values([10.0, 20.0, 30.0, 40.0, 50.0])
        assert bm.peer_comparison(10.0, stats).percentile == 0.0
        assert bm.peer_comparison(50.0, stats).percentile == 100.0
        assert bm.peer_comparison(30.0, stats).percentile == pytest.approx(50.0)

    def test_clamping_outside_range(self):
        stats = stats_from_values([10.0, 20.0, 30.0, 40.0, 50.0])
        assert bm.peer_comparison(1.0, stats).percentile == 0.0
        assert bm.peer_comparison(99.0, stats).percentile == 100.0

    def test_report_fields(self):
        stats = stats_from_values([10.0, 20.0, 30.0, 40.0, 50.0])
        report = bm.peer_comparison(25.0, stats)
        assert report.group_mean == 30.0
        assert report.delta_vs_mean == -5.0
        assert report.boundaries["q40"] == 26.0
        assert 0.0 <= report.percentile <= 100.0


class TestProfileValidation:
    def test_unknown_enum_values(self):
        with pytest.raises(ValueError):
            bm.HouseProfile("Stockholm", ds.Y1961_1980, ds.ONE_OR_TWO, 100.0)
        with pytest.raises(ValueError):
            bm.HouseProfile("Umeå", "mystery", ds.ONE_OR_TWO, 100.0)
        with pytest.raises(ValueError):
            bm.HouseProfile("Umeå", ds.Y1961_1980, ds.ONE_OR_TWO, 0.0)
