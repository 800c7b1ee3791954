"""Convert user energy inputs (electricity bills, fuels) to annual kWh and EUI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import (
    NegativeNetBill,
    NonPositiveArea,
    UnknownFuelUnit,
    ZeroDenominator,
)

FUEL_OIL = "fuel_oil"
NATURAL_GAS = "natural_gas"
FIREWOOD = "firewood"
LIGNITE_BRIQUETTE = "lignite_briquette"
FUEL_KINDS = (FUEL_OIL, NATURAL_GAS, FIREWOOD, LIGNITE_BRIQUETTE)

LITER = "liter"
CUBIC_METER = "cubic_meter"
KILOGRAM = "kilogram"
FUEL_UNITS = (LITER, CUBIC_METER, KILOGRAM)

# Typical Swedish heating values per fuel unit; configuration, not physics --
# override via ConversionTable.from_json for other markets or fuel grades.
DEFAULT_FUEL_FACTORS = {
    (FUEL_OIL, LITER): 9.96,
    (NATURAL_GAS, CUBIC_METER): 11.0,
    (FIREWOOD, CUBIC_METER): 1300.0,
    (LIGNITE_BRIQUETTE, KILOGRAM): 5.6,
}


@dataclass(frozen=True)
class BillBreakdown:
    """One aggregated electricity bill in SEK with its per-kWh price parts.

    When the electricity supplier and the grid operator are separate
    companies, the fuse fee, energy tax and network charge are billed
    elsewhere and are dropped from the conversion.
    """

    sek_month: float
    sek_price: float
    sek_vat: float = 0.0
    sek_fee: float = 0.0
    sek_tax: float = 0.0
    sek_network: float = 0.0
    months_covered: int = 12
    separate_supplier_and_grid: bool = False

    def __post_init__(self):
        for name in ("sek_month", "sek_vat", "sek_fee", "sek_price", "sek_tax", "sek_network"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 1 <= self.months_covered <= 12:
            raise ValueError("months_covered must be in 1..12")


@dataclass(frozen=True)
class FuelEntry:
    """A quantity of an auxiliary fuel in a physical unit."""

    kind: str
    quantity: float
    unit: str

    def __post_init__(self):
        if self.kind not in FUEL_KINDS:
            raise ValueError(f"unknown fuel kind {self.kind!r}")
        if self.unit not in FUEL_UNITS:
            raise ValueError(f"unknown fuel unit {self.unit!r}")
        if self.quantity < 0:
            raise ValueError("quantity must be >= 0")


@dataclass(frozen=True)
class ConversionTable:
    """kWh-per-unit factors keyed by (fuel kind, unit)."""

    factors: dict = field(default_factory=lambda: dict(DEFAULT_FUEL_FACTORS))

    def __post_init__(self):
        for pair, factor in self.factors.items():
            if factor <= 0:
                raise ValueError(f"conversion factor for {pair} must be > 0")

    @classmethod
    def from_json(cls, source) -> "ConversionTable":
        """Load factors from JSON shaped {"fuel_oil": {"liter": 9.96}, ...}.

        Accepts a path, a file object, or a JSON string.
        """
        if hasattr(source, "read"):
            data = json.load(source)
        else:
            text = str(source)
            if text.lstrip().startswith("{"):
                data = json.loads(text)
            else:
                with open(text, encoding="utf-8") as fh:
                    data = json.load(fh)
        factors = {}
        for kind, units in data.items():
            for unit, factor in units.items():
                factors[(kind, unit)] = float(factor)
        return cls(factors)

    def to_json_dict(self) -> dict:
        out: dict = {}
        for (kind, unit), factor in sorted(self.factors.items()):
            out.setdefault(kind, {})[unit] = factor
        return out

    def factor(self, kind: str, unit: str) -> float:
        try:
            return self.factors[(kind, unit)]
        except KeyError:
            raise UnknownFuelUnit(
                f"no conversion factor for fuel {kind!r} in unit {unit!r}"
            ) from None


@dataclass(frozen=True)
class EnergyTotal:
    """Annual kWh split into electricity and converted fuels."""

    electricity_kwh: float
    fuel_kwh: float

    @property
    def total_kwh(self) -> float:
        return self.electricity_kwh + self.fuel_kwh


@dataclass(frozen=True)
class EuiValue:
    """Energy Use Intensity in kWh per m^2 and year."""

    eui: float
    area_m2: float


def convert_bill_to_kwh(bill: BillBreakdown) -> float:
    """kWh purchased in the billing period implied by the bill amounts.

    The net amount (after VAT/energy tax and, for a combined supplier, the
    fuse fee) is divided by the effective per-kWh price. A negative net
    amount is an error rather than clamped, so inconsistent inputs surface.
    """
    if bill.separate_supplier_and_grid:
        net = bill.sek_month - bill.sek_vat
        per_kwh = bill.sek_price
    else:
        net = bill.sek_month - bill.sek_vat - bill.sek_fee
        per_kwh = bill.sek_price + bill.sek_tax + bill.sek_network
    if net < 0:
        raise NegativeNetBill(
            f"bill of {bill.sek_month} SEK is smaller than its deductions"
        )
    if per_kwh <= 0:
        raise ZeroDenominator("effective per-kWh price is zero")
    return net / per_kwh


def annualize_kwh(period_kwh: float, months_covered: int) -> float:
    """Scale a billing-period total to a 12-month equivalent."""
    if not 1 <= months_covered <= 12:
        raise ValueError("months_covered must be in 1..12")
    return period_kwh * 12.0 / months_covered


def bill_to_annual_kwh(bill: BillBreakdown) -> float:
    return annualize_kwh(convert_bill_to_kwh(bill), bill.months_covered)


def convert_fuel_to_kwh(entry: FuelEntry, table: ConversionTable) -> float:
    return entry.quantity * table.factor(entry.kind, entry.unit)


def total_annual_kwh(electricity_kwh: float, fuels, table: ConversionTable) -> EnergyTotal:
    """Combine annual electricity with converted auxiliary fuels."""
    if electricity_kwh < 0:
        raise ValueError("electricity_kwh must be >= 0")
    fuel_kwh = 0.0
    for entry in fuels:
        fuel_kwh += convert_fuel_to_kwh(entry, table)
    return EnergyTotal(electricity_kwh=electricity_kwh, fuel_kwh=fuel_kwh)


def compute_eui(total, area_m2: float) -> EuiValue:
    """Annual kWh divided by heated floor area (basement excluded)."""
    if area_m2 <= 0:
        raise NonPositiveArea(f"area_m2 must be > 0, got {area_m2}")
    total_kwh = total.total_kwh if isinstance(total, EnergyTotal) else float(total)
    return EuiValue(eui=total_kwh / area_m2, area_m2=area_m2)
