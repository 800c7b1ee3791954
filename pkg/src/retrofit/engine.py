"""One benchmark request, composed end to end from the engine operations.

Both the CLI and the HTTP service call run_benchmark and serialize its
payload with the shared stable serializer, so the two surfaces produce
byte-identical JSON for the same logical request.
"""

from __future__ import annotations

from . import benchmark as bm
from . import energy
from .datastore import RecordSet

METHOD_KWH = "kwh"
METHOD_SEK = "sek"


def resolve_electricity_kwh(method: str, kwh_last_12_months=None,
                            bill: energy.BillBreakdown | None = None) -> float:
    """Annual electricity from either a direct kWh reading or a bill."""
    if method == METHOD_KWH:
        if kwh_last_12_months is None or bill is not None:
            raise ValueError("method 'kwh' requires kwh_last_12_months and no bill")
        if kwh_last_12_months < 0:
            raise ValueError("kwh_last_12_months must be >= 0")
        return float(kwh_last_12_months)
    if method == METHOD_SEK:
        if bill is None or kwh_last_12_months is not None:
            raise ValueError("method 'sek' requires a bill and no kwh_last_12_months")
        return energy.bill_to_annual_kwh(bill)
    raise ValueError(f"unknown energy input method {method!r}")


def run_benchmark(record_set: RecordSet, profile: bm.HouseProfile, *,
                  energy_input_method: str,
                  kwh_last_12_months=None,
                  bill: energy.BillBreakdown | None = None,
                  fuels=(),
                  target_year: int = 2022,
                  conversion: energy.ConversionTable | None = None,
                  targets: bm.EnergyTargetTable | None = None,
                  min_group_size: int = bm.DEFAULT_MIN_GROUP_SIZE) -> dict:
    """Convert inputs to an EUI, benchmark it, and assemble the response payload."""
    conversion = conversion or energy.ConversionTable()
    targets = targets or bm.EnergyTargetTable.default()

    electricity = resolve_electricity_kwh(energy_input_method,
                                          kwh_last_12_months, bill)
    total = energy.total_annual_kwh(electricity, fuels, conversion)
    eui = energy.compute_eui(total, profile.area_m2)

    group = bm.select_reference_group(profile, record_set,
                                      min_group_size=min_group_size)
    stats = bm.compute_group_stats(group)
    rating = bm.classify_eui(eui.eui, stats)
    advice = bm.advise(eui.eui, rating, targets, target_year)
    comparison = bm.peer_comparison(eui.eui, stats)

    return {
        "user_eui": eui.eui,
        "energy": {
            "method": energy_input_method,
            "electricity_kwh": total.electricity_kwh,
            "fuel_kwh": total.fuel_kwh,
            "total_kwh": total.total_kwh,
            "area_m2": profile.area_m2,
        },
        "rating": rating,
        "rating_label": bm.RATING_LABELS[rating],
        "advice": {
            "needs_renovation": advice.needs_renovation,
            "allowed_eui": advice.allowed_eui,
            "target_year": advice.target_year,
            "reasons": list(advice.reasons),
        },
        "comparison": comparison.to_dict(),
        "reference_group": {
            "municipality": profile.municipality,
            "year_band": profile.year_band,
            "family_band": profile.family_band,
            "count": stats.count,
            "widened": group.widened,
            "level": group.level,
        },
        "group_stats": stats.to_dict(),
    }
