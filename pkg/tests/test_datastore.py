import io

import numpy as np
import pytest

from retrofit import datastore as ds
from retrofit.errors import CorruptStore, EmptyFile, IoFailure, SchemaMismatch

VALID_CSV = """record_id,municipality,construction_year,families,floor_area_m2,annual_energy_kwh,latitude,longitude
a1,Umeå,1955,1,120.0,14400.0,63.8258,20.263
a2,Lycksele,1975,2,95.5,12000.0,64.5951,18.6735
a3,Skellefteå,1992,3,150.0,16500.0,64.75,20.95
"""


class TestIngest:
    def test_valid_file(self):
        result = ds.ingest_epc_csv(io.StringIO(VALID_CSV))
        assert result.rows_in == 3
        assert result.rows_kept == 3
        assert result.rows_rejected == 0
        euis = result.records.eui
        assert euis[0] == pytest.approx(120.0)
        assert euis[1] == pytest.approx(12000.0 / 95.5)

    def test_row_with_zero_area_rejected_with_line(self):
        text = VALID_CSV + "bad,Umeå,1960,1,0.0,5000.0,63.8,20.2\n"
        result = ds.ingest_epc_csv(io.StringIO(text))
        assert result.rows_in == 4
        assert result.rows_kept == 3
        assert result.rows_rejected == 1
        assert result.rejections[0].line == 5
        assert "floor_area_m2" in result.rejections[0].reason

    def test_unparseable_row_rejected(self):
        text = VALID_CSV + "bad,Umeå,xxxx,1,100.0,5000.0,63.8,20.2\n"
        result = ds.ingest_epc_csv(io.StringIO(text))
        assert result.rows_kept == 3
        assert result.rows_rejected == 1

    def test_shuffled_header_accepted(self):
        lines = VALID_CSV.strip().split("\n")
        header = lines[0].split(",")
        rows = [line.split(",") for line in lines[1:]]
        order = [3, 0, 7, 2, 1, 6, 5, 4]
        text = ",".join(header[i] for i in order) + "\n"
        for row in rows:
            text += ",".join(row[i] for i in order) + "\n"
        result = ds.ingest_epc_csv(io.StringIO(text))
        assert result.rows_kept == 3
        assert result.records.records[0].municipality == "Umeå"

    def test_wrong_header(self):
        with pytest.raises(SchemaMismatch):
            ds.ingest_epc_csv(io.StringIO("a,b,c\n1,2,3\n"))

    def test_extra_column_rejected(self):
        text = VALID_CSV.replace("record_id,", "record_id,bonus,")
        with pytest.raises(SchemaMismatch):
            ds.ingest_epc_csv(io.StringIO(text))

    def test_empty_input(self):
        with pytest.raises(EmptyFile):
            ds.ingest_epc_csv(io.StringIO(""))
        header_only = VALID_CSV.split("\n")[0] + "\n"
        with pytest.raises(EmptyFile):
            ds.ingest_epc_csv(io.StringIO(header_only))

    def test_missing_file(self):
        with pytest.raises(IoFailure):
            ds.ingest_epc_csv("/nonexistent/file.csv")

    def test_accounting_invariant(self):
        text = VALID_CSV + "bad,Umeå,1960,1,0.0,5000.0,63.8,20.2\n" \
            + "x,Nowhere,1960,1,100.0,5000.0,63.8,20.2\n"
        result = ds.ingest_epc_csv(io.StringIO(text))
        assert result.rows_in == result.rows_kept + result.rows_rejected


class TestValidation:
    def test_record_invariants(self):
        good = ds.EpcRecord("id", "Umeå", 1970, 1, 100.0, 12000.0, 63.8, 20.2)
        assert ds.validate_record(good) == []
        bad_year = ds.EpcRecord("id", "Umeå", 1750, 1, 100.0, 12000.0, 63.8, 20.2)
        assert any("construction_year" in p for p in ds.validate_record(bad_year))
        bad_lat = ds.EpcRecord("id", "Umeå", 1970, 1, 100.0, 12000.0, 40.0, 20.2)
        assert any("latitude" in p for p in ds.validate_record(bad_lat))
        neg_energy = ds.EpcRecord("id", "Umeå", 1970, 1, 100.0, -1.0, 63.8, 20.2)
        assert any("annual_energy_kwh" in p for p in ds.validate_record(neg_energy))

    def test_record_set_enforces_invariants(self):
        bad = ds.EpcRecord("id", "Umeå", 1970, 1, -5.0, 12000.0, 63.8, 20.2)
        with pytest.raises(ValueError):
            ds.RecordSet(records=(bad,), provenance="synthetic")

    def test_banding(self):
        assert ds.year_band(1960) == ds.UNTIL_1960
        assert ds.year_band(1961) == ds.Y1961_1980
        assert ds.year_band(1980) == ds.Y1961_1980
        assert ds.year_band(1981) == ds.AFTER_1980
        assert ds.family_band(1) == ds.ONE_OR_TWO
        assert ds.family_band(2) == ds.ONE_OR_TWO
        assert ds.family_band(3) == ds.MORE_THAN_TWO


class TestAnonymize:
    def setup_method(self):
        self.records = ds.ingest_epc_csv(io.StringIO(VALID_CSV)).records

    def test_deterministic_ids(self):
        a = ds.anonymize(self.records, key=b"secret")
        b = ds.anonymize(self.records, key="secret")
        assert [r.record_id for r in a] == [r.record_id for r in b]
        assert all(r.record_id != orig.record_id
                   for r, orig in zip(a, self.records))

    def test_coordinate_rounding(self):
        out = ds.anonymize(self.records, key=b"k")
        assert out.records[0].latitude == 63.8
        assert out.records[0].longitude == 20.3

    def test_analytics_fields_untouched(self):
        out = ds.anonymize(self.records, key=b"k")
        for before, after in zip(self.records, out):
            assert after.annual_energy_kwh == before.annual_energy_kwh
            assert after.floor_area_m2 == before.floor_area_m2
            assert after.construction_year == before.construction_year
            assert after.families == before.families
            assert after.municipality == before.municipality

    def test_idempotent(self):
        once = ds.anonymize(self.records, key=b"k")
        twice = ds.anonymize(once, key=b"k")
        assert twice is once

    def test_different_keys_differ(self):
        a = ds.anonymize(self.records, key=b"k1")
        b = ds.anonymize(self.records, key=b"k2")
        assert [r.record_id for r in a] != [r.record_id for r in b]


class TestSynthetic:
    def test_deterministic(self):
        a = ds.generate_synthetic(ds.SynthConfig(n=200, seed=9))
        b = ds.generate_synthetic(ds.SynthConfig(n=200, seed=9))
        assert a.records == b.records
        c = ds.generate_synthetic(ds.SynthConfig(n=200, seed=10))
        assert a.records != c.records

    def test_count_and_validity(self):
        out = ds.generate_synthetic(ds.SynthConfig(n=500, seed=3))
        assert len(out) == 500
        assert out.provenance == "synthetic"
        for rec in out:
            assert ds.validate_record(rec) == []

    def test_degenerate_generator(self):
        config = ds.SynthConfig(n=100, seed=4, noise_scale=0.0, family_effect=0.0)
        out = ds.generate_synthetic(config)
        for rec in out:
            band = ds.year_band(rec.construction_year)
            assert rec.eui == pytest.approx(config.base_eui[band], rel=1e-12)

    def test_marginals_close_to_config(self):
        config = ds.SynthConfig(n=4000, seed=5)
        out = ds.generate_synthetic(config)
        bands = [ds.year_band(r.construction_year) for r in out]
        for band, weight in config.year_band_weights.items():
            share = bands.count(band) / len(bands)
            assert abs(share - weight) < 0.03
        families = [r.families for r in out]
        for fam, weight in config.family_weights.items():
            share = families.count(fam) / len(families)
            assert abs(share - weight) < 0.03
        areas = np.array([r.floor_area_m2 for r in out])
        assert areas.min() >= config.area_min
        assert areas.max() <= config.area_max

    def test_validation(self):
        with pytest.raises(ValueError):
            ds.SynthConfig(n=0).validate()
        with pytest.raises(ValueError):
            ds.SynthConfig(area_min=-1.0).validate()
        with pytest.raises(ValueError):
            ds.SynthConfig(family_weights={1: -0.5}).validate()


class TestPersistence:
    def test_round_trip(self, tmp_path):
        original = ds.generate_synthetic(ds.SynthConfig(n=100, seed=6))
        path = tmp_path / "store.csv"
        ds.save_store(original, path)
        loaded = ds.load_store(path)
        assert loaded.records == original.records
        assert loaded.provenance == original.provenance
        assert loaded.anonymized == original.anonymized

    def test_round_trip_after_anonymize(self, tmp_path):
        original = ds.ingest_epc_csv(io.StringIO(VALID_CSV)).records
        anonymized = ds.anonymize(original, key=b"k")
        path = tmp_path / "store.csv"
        ds.save_store(anonymized, path)
        loaded = ds.load_store(path)
        assert loaded.anonymized is True
        assert loaded.records == anonymized.records

    def test_truncated_payload(self, tmp_path):
        original = ds.generate_synthetic(ds.SynthConfig(n=50, seed=7))
        path = tmp_path / "store.csv"
        ds.save_store(original, path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(CorruptStore):
            ds.load_store(path)

    def test_missing_sidecar(self, tmp_path):
        original = ds.generate_synthetic(ds.SynthConfig(n=10, seed=8))
        path = tmp_path / "store.csv"
        ds.save_store(original, path)
        (tmp_path / "store.csv.meta.json").unlink()
        with pytest.raises(CorruptStore):
            ds.load_store(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoFailure):
            ds.load_store(tmp_path / "nope.csv")

    def test_empty_set_round_trips(self, tmp_path):
        empty = ds.RecordSet(records=(), provenance="ingested")
        path = tmp_path / "empty.csv"
        ds.save_store(empty, path)
        loaded = ds.load_store(path)
        assert len(loaded) == 0


class TestFactorMatrix:
    def test_columns(self):
        records = ds.ingest_epc_csv(io.StringIO(VALID_CSV)).records
        matrix = records.factor_matrix()
        assert matrix.shape == (3, 5)
        assert matrix[0].tolist() == [1955.0, 1.0, 120.0, 14400.0, 63.8258]
        assert records.eui.shape == (3,)
