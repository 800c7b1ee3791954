"""Peer-group selection, EUI classification and renovation advice.

The five-class rating adapts to each reference group: class cuts are the
group's EUI quintiles, so "Excellent" always means "among the best fifth of
comparable buildings" regardless of region or vintage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .datastore import FAMILY_BANDS, MUNICIPALITIES, RecordSet, YEAR_BANDS
from .errors import EmptyGroup, UnknownYear

DEFAULT_MIN_GROUP_SIZE = 10

# Worst to best.
VERY_POOR = "very_poor"
POOR = "poor"
AVERAGE = "average"
GOOD = "good"
EXCELLENT = "excellent"
RATINGS = (VERY_POOR, POOR, AVERAGE, GOOD, EXCELLENT)
RATING_LABELS = {
    VERY_POOR: "Very poor",
    POOR: "Poor",
    AVERAGE: "Average",
    GOOD: "Good",
    EXCELLENT: "Excellent",
}

# Reason codes attached to advice.
REASON_ABOVE_ALLOWED = "above_allowed_eui"
REASON_BELOW_ALLOWED = "below_allowed_eui"
REASON_RATING_BELOW_AVERAGE = "rating_below_average"
REASON_RATING_AVERAGE_OR_BETTER = "rating_average_or_better"


@dataclass(frozen=True)
class HouseProfile:
    """The questionnaire answers that key the reference group."""

    municipality: str
    year_band: str
    family_band: str
    area_m2: float

    def __post_init__(self):
        if self.municipality not in MUNICIPALITIES:
            raise ValueError(f"unknown municipality {self.municipality!r}")
        if self.year_band not in YEAR_BANDS:
            raise ValueError(f"unknown year band {self.year_band!r}")
        if self.family_band not in FAMILY_BANDS:
            raise ValueError(f"unknown family band {self.family_band!r}")
        if not self.area_m2 > 0:
            raise ValueError("area_m2 must be > 0")


@dataclass(frozen=True)
class ReferenceGroup:
    key: tuple
    eui_values: np.ndarray
    widened: bool
    level: str  # which keys were actually applied

    @property
    def count(self) -> int:
        return len(self.eui_values)


def select_reference_group(profile: HouseProfile, record_set: RecordSet,
                           min_group_size: int = DEFAULT_MIN_GROUP_SIZE,
                           widen: bool = True) -> ReferenceGroup:
    """Records matching (municipality, year band, family band), widened if sparse.

    Widening drops the municipality first (region-wide peers), then the
    construction-year band. With widen=False the exact filter is returned
    as long as it meets min_group_size.
    """
    key = (profile.municipality, profile.year_band, profile.family_band)
    muni = record_set.municipality_column == profile.municipality
    band = record_set.year_band_column == profile.year_band
    fam = record_set.family_band_column == profile.family_band
    if len(record_set) == 0:
        raise EmptyGroup("dataset is empty")
    levels = [
        (muni & band & fam, "municipality+year_band+family_band", False),
        (band & fam, "year_band+family_band", True),
        (fam, "family_band", True),
    ]
    if not widen:
        levels = levels[:1]
    for mask, level, widened in levels:
        if int(mask.sum()) >= min_group_size:
            values = record_set.eui[mask].copy()
            values.setflags(write=False)
            return ReferenceGroup(key=key, eui_values=values, widened=widened,
                                  level=level)
    raise EmptyGroup(
        f"no reference group of at least {min_group_size} records for {key}, "
        "even fully widened"
    )


@dataclass(frozen=True)
class GroupStats:
    """Summary of a reference group's EUI distribution."""

    count: int
    mean: float
    min: float
    max: float
    q20: float
    q40: float
    q60: float
    q80: float

    def quintile_cuts(self) -> tuple:
        return (self.q20, self.q40, self.q60, self.q80)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "min": self.min,
            "max": self.max,
            "q20": self.q20,
            "q40": self.q40,
            "q60": self.q60,
            "q80": self.q80,
        }


def compute_group_stats(group: ReferenceGroup) -> GroupStats:
    """Quintiles by linear interpolation between closest order statistics."""
    values = group.eui_values
    if len(values) == 0:
        raise EmptyGroup("cannot compute statistics of an empty group")
    q = np.quantile(values, [0.2, 0.4, 0.6, 0.8], method="linear")
    return GroupStats(
        count=len(values),
        mean=float(values.mean()),
        min=float(values.min()),
        max=float(values.max()),
        q20=float(q[0]), q40=float(q[1]), q60=float(q[2]), q80=float(q[3]),
    )


def classify_eui(user_eui: float, stats: GroupStats) -> str:
    """Five-class rating against the group quintiles (upper bounds inclusive)."""
    if user_eui <= stats.q20:
        return EXCELLENT
    if user_eui <= stats.q40:
        return GOOD
    if user_eui <= stats.q60:
        return AVERAGE
    if user_eui <= stats.q80:
        return POOR
    return VERY_POOR


@dataclass(frozen=True)
class EnergyTargetTable:
    """Allowed EUI per target year; linear interpolation between entries."""

    entries: tuple  # ((year, allowed_eui), ...) sorted by year

    def __post_init__(self):
        entries = tuple(sorted((int(y), float(v)) for y, v in self.entries))
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ValueError("target table must not be empty")
        years = [y for y, _ in entries]
        values = [v for _, v in entries]
        if len(set(years)) != len(years):
            raise ValueError("target years must be distinct")
        if any(v <= 0 for v in values):
            raise ValueError("allowed EUI must be > 0")
        if any(b > a for a, b in zip(values, values[1:])):
            raise ValueError("allowed EUI must be non-increasing over years")

    @classmethod
    def default(cls) -> "EnergyTargetTable":
        # Illustrative national-target anchors; override via configuration.
        return cls(entries=((2022, 90.0), (2050, 56.0)))

    @classmethod
    def from_json(cls, source) -> "EnergyTargetTable":
        if hasattr(source, "read"):
            data = json.load(source)
        else:
            text = str(source)
            if text.lstrip().startswith("{"):
                data = json.loads(text)
            else:
                with open(text, encoding="utf-8") as fh:
                    data = json.load(fh)
        return cls(entries=tuple((int(y), float(v)) for y, v in data.items()))

    def to_json_dict(self) -> dict:
        return {str(y): v for y, v in self.entries}

    def allowed_eui(self, year: int) -> float:
        years = [y for y, _ in self.entries]
        values = [v for _, v in self.entries]
        if year < years[0] or year > years[-1]:
            raise UnknownYear(
                f"year {year} outside configured target range {years[0]}..{years[-1]}"
            )
        return float(np.interp(year, years, values))


@dataclass(frozen=True)
class Advice:
    needs_renovation: bool
    rating: str
    user_eui: float
    allowed_eui: float
    target_year: int
    reasons: tuple


def advise(user_eui: float, rating: str, targets: EnergyTargetTable,
           year: int) -> Advice:
    """Renovate when over the allowed EUI for the year or rated below Average."""
    allowed = targets.allowed_eui(year)
    reasons = []
    if user_eui >= allowed:
        reasons.append(REASON_ABOVE_ALLOWED)
    if rating in (POOR, VERY_POOR):
        reasons.append(REASON_RATING_BELOW_AVERAGE)
    needs = bool(reasons)
    if not needs:
        reasons = [REASON_BELOW_ALLOWED, REASON_RATING_AVERAGE_OR_BETTER]
    return Advice(
        needs_renovation=needs,
        rating=rating,
        user_eui=user_eui,
        allowed_eui=allowed,
        target_year=year,
        reasons=tuple(reasons),
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Where the user's EUI sits inside the reference group."""

    percentile: float
    user_eui: float
    group_mean: float
    delta_vs_mean: float
    boundaries: dict

    def to_dict(self) -> dict:
        return {
            "percentile": self.percentile,
            "user_eui": self.user_eui,
            "group_mean": self.group_mean,
            "delta_vs_mean": self.delta_vs_mean,
            "boundaries": dict(self.boundaries),
        }


def peer_comparison(user_eui: float, stats: GroupStats) -> ComparisonReport:
    """Percentile of the user inside the group, by inverting the quantile anchors.

    The piecewise-linear inverse runs through (min, q20, q40, q60, q80, max);
    values outside the group's range clamp to 0 or 100.
    """
    anchors_x = [stats.min, stats.q20, stats.q40, stats.q60, stats.q80, stats.max]
    anchors_y = [0.0, 20.0, 40.0, 60.0, 80.0, 100.0]
    if user_eui <= stats.min:
        percentile = 0.0
    elif user_eui >= stats.max:
        percentile = 100.0
    else:
        percentile = float(np.interp(user_eui, anchors_x, anchors_y))
    return ComparisonReport(
        percentile=percentile,
        user_eui=user_eui,
        group_mean=stats.mean,
        delta_vs_mean=user_eui - stats.mean,
        boundaries={
            "min": stats.min, "q20": stats.q20, "q40": stats.q40,
            "q60": stats.q60, "q80": stats.q80, "max": stats.max,
        },
    )
