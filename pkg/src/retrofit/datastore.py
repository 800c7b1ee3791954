"""EPC-style building records: ingest, anonymize, synthesize, persist.

Record sets are immutable snapshots; loading or regenerating produces a
fresh object, so concurrent readers never observe partial updates.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import hmac
import io
import json
import math
import os
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import CorruptStore, EmptyFile, IoFailure, SchemaMismatch

MUNICIPALITIES = (
    "Åsele", "Bjurholm", "Dorotea", "Lycksele", "Malå",
    "Nordmaling", "Norsjö", "Robertsfors", "Skellefteå", "Sorsele",
    "Storuman", "Umeå", "Vännäs", "Vilhelmina", "Vindeln",
)

# Approximate seat coordinates (lat, lon) per municipality; the synthetic
# generator jitters around these.
MUNICIPALITY_COORDS = {
    "Åsele": (64.16, 17.35),
    "Bjurholm": (63.93, 19.21),
    "Dorotea": (64.26, 16.84),
    "Lycksele": (64.60, 18.67),
    "Malå": (65.19, 18.73),
    "Nordmaling": (63.57, 19.50),
    "Norsjö": (64.91, 19.48),
    "Robertsfors": (64.19, 20.85),
    "Skellefteå": (64.75, 20.95),
    "Sorsele": (65.54, 17.54),
    "Storuman": (65.10, 17.12),
    "Umeå": (63.83, 20.26),
    "Vännäs": (63.91, 19.75),
    "Vilhelmina": (64.62, 16.65),
    "Vindeln": (64.20, 19.72),
}

# Rough population shares; small municipalities yield naturally sparse
# reference groups, which exercises the widening fallback.
MUNICIPALITY_WEIGHTS = {
    "Umeå": 0.33, "Skellefteå": 0.27, "Lycksele": 0.05, "Vännäs": 0.035,
    "Nordmaling": 0.03, "Vilhelmina": 0.027, "Robertsfors": 0.027,
    "Storuman": 0.024, "Vindeln": 0.022, "Norsjö": 0.016, "Malå": 0.013,
    "Åsele": 0.012, "Dorotea": 0.011, "Sorsele": 0.010, "Bjurholm": 0.010,
}

UNTIL_1960 = "until_1960"
Y1961_1980 = "y1961_1980"
AFTER_1980 = "after_1980"
YEAR_BANDS = (UNTIL_1960, Y1961_1980, AFTER_1980)

ONE_OR_TWO = "one_or_two"
MORE_THAN_TWO = "more_than_two"
FAMILY_BANDS = (ONE_OR_TWO, MORE_THAN_TWO)

CSV_HEADER = (
    "record_id", "municipality", "construction_year", "families",
    "floor_area_m2", "annual_energy_kwh", "latitude", "longitude",
)

MIN_YEAR = 1800
MIN_LATITUDE = 55.0
MAX_LATITUDE = 70.0


def year_band(year: int) -> str:
    if year <= 1960:
        return UNTIL_1960
    if year <= 1980:
        return Y1961_1980
    return AFTER_1980


def family_band(families: int) -> str:
    return ONE_OR_TWO if families <= 2 else MORE_THAN_TWO


@dataclass(frozen=True)
class EpcRecord:
    """One building: the five analysis factors plus annual energy."""

    record_id: str
    municipality: str
    construction_year: int
    families: int
    floor_area_m2: float
    annual_energy_kwh: float
    latitude: float
    longitude: float

    @property
    def eui(self) -> float:
        return self.annual_energy_kwh / self.floor_area_m2


def validate_record(rec: EpcRecord) -> list:
    """Return a list of invariant violations (empty when the record is valid)."""
    problems = []
    if rec.municipality not in MUNICIPALITIES:
        problems.append(f"unknown municipality {rec.municipality!r}")
    current_year = datetime.date.today().year
    if not MIN_YEAR <= rec.construction_year <= current_year:
        problems.append(
            f"construction_year {rec.construction_year} outside {MIN_YEAR}..{current_year}"
        )
    if rec.families < 0:
        problems.append("families must be >= 0")
    if not rec.floor_area_m2 > 0:
        problems.append("floor_area_m2 must be > 0")
    if rec.annual_energy_kwh < 0:
        problems.append("annual_energy_kwh must be >= 0")
    if not MIN_LATITUDE <= rec.latitude <= MAX_LATITUDE:
        problems.append(
            f"latitude {rec.latitude} outside {MIN_LATITUDE}..{MAX_LATITUDE}"
        )
    if not math.isfinite(rec.longitude):
        problems.append("longitude must be finite")
    return problems


@dataclass(frozen=True)
class RecordSet:
    """Immutable collection of validated records with derived EUI."""

    records: tuple
    provenance: str = "ingested"
    anonymized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        for rec in self.records:
            problems = validate_record(rec)
            if problems:
                raise ValueError(
                    f"invalid record {rec.record_id!r}: {'; '.join(problems)}"
                )

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @cached_property
    def eui(self) -> np.ndarray:
        out = np.array([rec.eui for rec in self.records], dtype=np.float64)
        out.setflags(write=False)
        return out

    def factor_matrix(self) -> np.ndarray:
        """(n, 5) array: construction year, families, area, energy, latitude."""
        out = np.array(
            [
                (rec.construction_year, rec.families, rec.floor_area_m2,
                 rec.annual_energy_kwh, rec.latitude)
                for rec in self.records
            ],
            dtype=np.float64,
        )
        return out.reshape(len(self.records), 5)

    @cached_property
    def municipality_column(self) -> np.ndarray:
        return np.array([rec.municipality for rec in self.records], dtype=object)

    @cached_property
    def year_band_column(self) -> np.ndarray:
        return np.array([year_band(rec.construction_year) for rec in self.records],
                        dtype=object)

    @cached_property
    def family_band_column(self) -> np.ndarray:
        return np.array([family_band(rec.families) for rec in self.records],
                        dtype=object)


# --- CSV ingestion ------------------------------------------------------------

@dataclass(frozen=True)
class RowRejection:
    line: int
    reason: str


@dataclass(frozen=True)
class IngestResult:
    records: RecordSet
    rejections: tuple
    rows_in: int

    @property
    def rows_kept(self) -> int:
        return len(self.records)

    @property
    def rows_rejected(self) -> int:
        return len(self.rejections)


def _parse_row(row: dict) -> EpcRecord:
    return EpcRecord(
        record_id=row["record_id"],
        municipality=row["municipality"],
        construction_year=int(row["construction_year"]),
        families=int(row["families"]),
        floor_area_m2=float(row["floor_area_m2"]),
        annual_energy_kwh=float(row["annual_energy_kwh"]),
        latitude=float(row["latitude"]),
        longitude=float(row["longitude"]),
    )


def ingest_epc_csv(source) -> IngestResult:
    """Parse and validate an EPC CSV export.

    Columns are addressed by name, so any header order is accepted. Invalid
    rows are collected with their line numbers and reported, not fatal;
    valid rows are kept in file order.
    """
    if hasattr(source, "read"):
        stream = source
    else:
        try:
            stream = open(source, encoding="utf-8", newline="")
        except OSError as exc:
            raise IoFailure(f"cannot read {source}: {exc}") from exc
    try:
        reader = csv.DictReader(stream)
        header = reader.fieldnames
        if header is None:
            raise EmptyFile("input has no header row")
        if set(header) != set(CSV_HEADER) or len(header) != len(CSV_HEADER):
            raise SchemaMismatch(
                f"expected columns {sorted(CSV_HEADER)}, got {sorted(header)}"
            )
        kept = []
        rejections = []
        rows_in = 0
        for row in reader:
            rows_in += 1
            line = reader.line_num
            try:
                rec = _parse_row(row)
            except (TypeError, ValueError) as exc:
                rejections.append(RowRejection(line=line, reason=str(exc)))
                continue
            problems = validate_record(rec)
            if problems:
                rejections.append(RowRejection(line=line, reason="; ".join(problems)))
                continue
            kept.append(rec)
        if rows_in == 0:
            raise EmptyFile("input has a header but no data rows")
        return IngestResult(
            records=RecordSet(records=tuple(kept), provenance="ingested"),
            rejections=tuple(rejections),
            rows_in=rows_in,
        )
    finally:
        if stream is not source:
            stream.close()


# --- anonymization --------------------------------------------------------------

def anonymize(record_set: RecordSet, key) -> RecordSet:
    """Replace record ids with keyed hashes and coarsen coordinates to 0.1 deg.

    Idempotent: an already anonymized set is returned unchanged, so double
    application cannot re-hash ids.
    """
    if record_set.anonymized:
        return record_set
    if isinstance(key, str):
        key = key.encode("utf-8")
    out = []
    for rec in record_set:
        digest = hmac.new(key, rec.record_id.encode("utf-8"), hashlib.sha256)
        out.append(replace(
            rec,
            record_id=digest.hexdigest()[:16],
            latitude=round(rec.latitude, 1),
            longitude=round(rec.longitude, 1),
        ))
    return RecordSet(records=tuple(out), provenance=record_set.provenance,
                     anonymized=True)


# --- synthetic data --------------------------------------------------------------

@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic EPC generator.

    Annual energy is base_eui(year band) * area * (1 + family_effect per
    extra family) * lognormal noise, so the derived EUI depends strongly on
    energy and area, weakly on family count, and negligibly on construction
    year and location.
    """

    n: int = 3182
    seed: int = 1
    year_band_weights: dict = field(default_factory=lambda: {
        UNTIL_1960: 0.35, Y1961_1980: 0.40, AFTER_1980: 0.25,
    })
    family_weights: dict = field(default_factory=lambda: {
        1: 0.55, 2: 0.33, 3: 0.12,
    })
    municipality_weights: dict = field(
        default_factory=lambda: dict(MUNICIPALITY_WEIGHTS))
    area_log_mean: float = math.log(120.0)
    area_log_sigma: float = 0.12
    area_min: float = 100.0
    area_max: float = 145.0
    base_eui: dict = field(default_factory=lambda: {
        UNTIL_1960: 123.0, Y1961_1980: 119.0, AFTER_1980: 116.0,
    })
    family_effect: float = 0.35
    noise_scale: float = 0.03

    def validate(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        for weights in (self.year_band_weights, self.family_weights,
                        self.municipality_weights):
            if not weights or any(w < 0 for w in weights.values()):
                raise ValueError("distribution weights must be non-negative")
            if sum(weights.values()) <= 0:
                raise ValueError("distribution weights must not all be zero")
        if self.area_min <= 0 or self.area_max < self.area_min:
            raise ValueError("area clip range invalid")
        if any(v <= 0 for v in self.base_eui.values()):
            raise ValueError("base EUI values must be > 0")
        if self.noise_scale < 0 or self.family_effect < 0:
            raise ValueError("noise_scale and family_effect must be >= 0")


_YEAR_RANGES = {UNTIL_1960: (1900, 1960), Y1961_1980: (1961, 1980),
                AFTER_1980: (1981, 2015)}


def generate_synthetic(config: SynthConfig | None = None) -> RecordSet:
    """Deterministically generate a schema-compatible stand-in dataset."""
    config = config or SynthConfig()
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.n

    def draw(weights: dict):
        keys = list(weights.keys())
        probs = np.array([weights[k] for k in keys], dtype=np.float64)
        probs = probs / probs.sum()
        idx = rng.choice(len(keys), size=n, p=probs)
        return [keys[i] for i in idx]

    municipalities = draw(config.municipality_weights)
    bands = draw(config.year_band_weights)
    families = draw(config.family_weights)
    areas = np.clip(
        rng.lognormal(config.area_log_mean, config.area_log_sigma, size=n),
        config.area_min, config.area_max,
    )
    noise = np.exp(rng.normal(0.0, config.noise_scale, size=n)) \
        if config.noise_scale > 0 else np.ones(n)
    lat_jitter = rng.normal(0.0, 0.06, size=n)
    lon_jitter = rng.normal(0.0, 0.12, size=n)

    records = []
    for i in range(n):
        band = bands[i]
        lo, hi = _YEAR_RANGES[band]
        year = int(rng.integers(lo, hi + 1))
        fam = int(families[i])
        eui = config.base_eui[band] * (1.0 + config.family_effect * (fam - 1)) \
            * float(noise[i])
        area = float(areas[i])
        base_lat, base_lon = MUNICIPALITY_COORDS[municipalities[i]]
        lat = float(np.clip(base_lat + lat_jitter[i], MIN_LATITUDE, MAX_LATITUDE))
        records.append(EpcRecord(
            record_id=f"synth-{i:06d}",
            municipality=municipalities[i],
            construction_year=year,
            families=fam,
            floor_area_m2=area,
            annual_energy_kwh=eui * area,
            latitude=lat,
            longitude=float(base_lon + lon_jitter[i]),
        ))
    return RecordSet(records=tuple(records), provenance="synthetic")


# --- persistence -----------------------------------------------------------------

def _sidecar_path(path: str) -> str:
    return f"{path}.meta.json"


def _csv_bytes(record_set: RecordSet) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in record_set:
        writer.writerow([
            rec.record_id, rec.municipality, rec.construction_year, rec.families,
            repr(rec.floor_area_m2), repr(rec.annual_energy_kwh),
            repr(rec.latitude), repr(rec.longitude),
        ])
    return buf.getvalue().encode("utf-8")


def save_store(record_set: RecordSet, path) -> None:
    """Write the record CSV plus a sidecar with checksum and provenance."""
    path = os.fspath(path)
    payload = _csv_bytes(record_set)
    meta = {
        "format": "retrofit-store",
        "version": 1,
        "sha256": hashlib.sha256(payload).hexdigest(),
        "provenance": record_set.provenance,
        "anonymized": record_set.anonymized,
        "count": len(record_set),
    }
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
        with open(_sidecar_path(path), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write store {path}: {exc}") from exc


def load_store(path) -> RecordSet:
    """Load a stored record set, verifying the sidecar checksum."""
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            payload = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read store {path}: {exc}") from exc
    try:
        with open(_sidecar_path(path), encoding="utf-8") as fh:
            meta = json.load(fh)
    except OSError as exc:
        raise CorruptStore(f"missing integrity sidecar for {path}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptStore(f"unreadable sidecar for {path}: {exc}") from exc
    digest = hashlib.sha256(payload).hexdigest()
    if digest != meta.get("sha256"):
        raise CorruptStore(f"checksum mismatch for {path}")
    if meta.get("count", 0) == 0:
        return RecordSet(records=(), provenance=meta.get("provenance", "ingested"),
                         anonymized=bool(meta.get("anonymized", False)))
    try:
        result = ingest_epc_csv(io.StringIO(payload.decode("utf-8")))
    except (SchemaMismatch, EmptyFile) as exc:
        raise CorruptStore(f"stored payload invalid: {exc}") from exc
    if result.rows_rejected:
        first = result.rejections[0]
        raise CorruptStore(
            f"stored payload has {result.rows_rejected} invalid rows "
            f"(first at line {first.line}: {first.reason})"
        )
    return RecordSet(
        records=result.records.records,
        provenance=meta.get("provenance", "ingested"),
        anonymized=bool(meta.get("anonymized", False)),
    )
