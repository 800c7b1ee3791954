"""HTTP facade over the engine: benchmarking, reference groups, sensitivity runs.

The service performs no numeric computation of its own; every response
field is produced by an engine operation and serialized with the shared
stable serializer. Errors use the body shape
{"error": code, "detail": text, "fields": [...]}.
"""

from __future__ import annotations

import threading
from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import Response
from pydantic import BaseModel, Field, model_validator

from . import benchmark as bm
from . import datastore as ds
from . import energy, engine, sensitivity, surrogate
from .errors import EmptyGroup, RetrofitError
from .serialize import dumps_stable

API_PREFIX = "/api/v1"


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(content=dumps_stable(payload),
                    media_type="application/json", status_code=status_code)


def _error_response(status: int, code: str, detail: str, fields=()) -> Response:
    return _json_response(
        {"error": code, "detail": detail, "fields": list(fields)},
        status_code=status,
    )


# --- request models ----------------------------------------------------------

class BillPayload(BaseModel):
    sek_month: float = Field(ge=0)
    sek_price: float = Field(ge=0)
    sek_vat: float = Field(default=0.0, ge=0)
    sek_fee: float = Field(default=0.0, ge=0)
    sek_tax: float = Field(default=0.0, ge=0)
    sek_network: float = Field(default=0.0, ge=0)
    months_covered: int = Field(default=12, ge=1, le=12)
    separate_supplier_and_grid: bool = False


class FuelPayload(BaseModel):
    kind: str
    quantity: float = Field(ge=0)
    unit: str

    @model_validator(mode="after")
    def _known_kind_and_unit(self):
        if self.kind not in energy.FUEL_KINDS:
            raise ValueError(f"unknown fuel kind {self.kind!r}")
        if self.unit not in energy.FUEL_UNITS:
            raise ValueError(f"unknown fuel unit {self.unit!r}")
        return self


class BenchmarkRequest(BaseModel):
    municipality: str
    year_band: str
    family_band: str
    area_m2: float = Field(gt=0)
    energy_input_method: Literal["kwh", "sek"]
    kwh_last_12_months: Optional[float] = Field(default=None, ge=0)
    bill: Optional[BillPayload] = None
    fuels: list[FuelPayload] = Field(default_factory=list)
    target_year: int = 2022

    @model_validator(mode="after")
    def _validate_domain(self):
        if self.municipality not in ds.MUNICIPALITIES:
            raise ValueError(f"unknown municipality {self.municipality!r}")
        if self.year_band not in ds.YEAR_BANDS:
            raise ValueError(f"unknown year band {self.year_band!r}")
        if self.family_band not in ds.FAMILY_BANDS:
            raise ValueError(f"unknown family band {self.family_band!r}")
        if self.energy_input_method == "kwh":
            if self.kwh_last_12_months is None:
                raise ValueError("method 'kwh' requires kwh_last_12_months")
            if self.bill is not None:
                raise ValueError("method 'kwh' must not include a bill")
        else:
            if self.bill is None:
                raise ValueError("method 'sek' requires a bill")
            if self.kwh_last_12_months is not None:
                raise ValueError("method 'sek' must not include kwh_last_12_months")
        return self


class SensitivityRunRequest(BaseModel):
    n_samples: int = Field(default=100000, ge=2)
    estimator: Literal["jansen", "saltelli"] = "jansen"
    surrogates: list[str] = Field(
        default_factory=lambda: list(sensitivity.DEFAULT_SURROGATES))
    skip: int = Field(default=0, ge=0)
    mls_radius: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _known_surrogates(self):
        for kind in self.surrogates:
            if kind not in surrogate.ALL_KINDS:
                raise ValueError(f"unknown surrogate kind {kind!r}")
        if not self.surrogates:
            raise ValueError("at least one surrogate kind is required")
        return self

    def to_config(self) -> sensitivity.SaConfig:
        return sensitivity.SaConfig(
            n_samples=self.n_samples,
            estimator=self.estimator,
            surrogates=tuple(self.surrogates),
            skip=self.skip,
            mls_radius=self.mls_radius,
        )


# --- sensitivity run registry --------------------------------------------------

class RunBusy(Exception):
    pass


class SaRunRegistry:
    """Tracks sensitivity runs; a single execution slot at a time."""

    def __init__(self):
        self._lock = threading.Lock()
        self._runs: dict = {}
        self._busy = False
        self._seq = 0

    def submit(self, record_set, config: sensitivity.SaConfig) -> dict:
        with self._lock:
            if self._busy:
                raise RunBusy("another sensitivity run is in progress")
            self._busy = True
            self._seq += 1
            run_id = f"run-{self._seq:04d}"
            self._runs[run_id] = {
                "run_id": run_id,
                "status": "queued",
                "config": config.to_dict(),
                "reports": None,
                "error": None,
            }
        worker = threading.Thread(target=self._execute,
                                  args=(run_id, record_set, config), daemon=True)
        worker.start()
        return self.get(run_id)

    def _execute(self, run_id, record_set, config):
        with self._lock:
            self._runs[run_id]["status"] = "running"
        try:
            reports = sensitivity.run_sa_pipeline(record_set, config)
            payload = [r.to_dict() for r in reports]
            with self._lock:
                self._runs[run_id]["reports"] = payload
                self._runs[run_id]["status"] = "done"
        except Exception as exc:  # failed runs are reported, not raised
            with self._lock:
                self._runs[run_id]["error"] = str(exc)
                self._runs[run_id]["status"] = "failed"
        finally:
            with self._lock:
                self._busy = False

    def get(self, run_id) -> dict | None:
        with self._lock:
            run = self._runs.get(run_id)
            if run is None:
                return None
            snapshot = dict(run)
            if snapshot["reports"] is not None:
                snapshot["reports"] = [dict(r) for r in snapshot["reports"]]
            return snapshot


# --- application ---------------------------------------------------------------

def create_app(record_set: ds.RecordSet, *,
               targets: bm.EnergyTargetTable | None = None,
               conversion: energy.ConversionTable | None = None,
               min_group_size: int = bm.DEFAULT_MIN_GROUP_SIZE,
               ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="retrofit", docs_url=None, redoc_url=None)
    app.state.record_set = record_set
    app.state.targets = targets or bm.EnergyTargetTable.default()
    app.state.conversion = conversion or energy.ConversionTable()
    app.state.min_group_size = min_group_size
    app.state.registry = SaRunRegistry()

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        fields = []
        for err in exc.errors():
            loc = [str(part) for part in err.get("loc", ()) if part != "body"]
            fields.append({"field": ".".join(loc) or "body",
                           "message": err.get("msg", "invalid")})
        status = 422 if request.url.path.startswith(f"{API_PREFIX}/sensitivity") else 400
        return _error_response(status, "validation", "request validation failed",
                               fields)

    @app.exception_handler(RetrofitError)
    async def _domain_handler(request: Request, exc: RetrofitError):
        if isinstance(exc, EmptyGroup):
            return _error_response(404, "empty_group", str(exc))
        return _error_response(400, type(exc).__name__.lower(), str(exc))

    @app.exception_handler(Exception)
    async def _internal_handler(request: Request, exc: Exception):
        return _error_response(500, "internal", "internal server error")

    @app.post(f"{API_PREFIX}/benchmark")
    async def post_benchmark(request: BenchmarkRequest):
        profile = bm.HouseProfile(
            municipality=request.municipality,
            year_band=request.year_band,
            family_band=request.family_band,
            area_m2=request.area_m2,
        )
        bill = None
        if request.bill is not None:
            bill = energy.BillBreakdown(**request.bill.model_dump())
        fuels = [energy.FuelEntry(kind=f.kind, quantity=f.quantity, unit=f.unit)
                 for f in request.fuels]
        payload = engine.run_benchmark(
            app.state.record_set, profile,
            energy_input_method=request.energy_input_method,
            kwh_last_12_months=request.kwh_last_12_months,
            bill=bill,
            fuels=fuels,
            target_year=request.target_year,
            conversion=app.state.conversion,
            targets=app.state.targets,
            min_group_size=app.state.min_group_size,
        )
        return _json_response(payload)

    @app.get(f"{API_PREFIX}/reference-groups")
    async def get_reference_group(municipality: str, year_band: str,
                                  family_band: str):
        fields = []
        if municipality not in ds.MUNICIPALITIES:
            fields.append({"field": "municipality",
                           "message": f"unknown municipality {municipality!r}"})
        if year_band not in ds.YEAR_BANDS:
            fields.append({"field": "year_band",
                           "message": f"unknown year band {year_band!r}"})
        if family_band not in ds.FAMILY_BANDS:
            fields.append({"field": "family_band",
                           "message": f"unknown family band {family_band!r}"})
        if fields:
            return _error_response(400, "validation", "invalid enum value", fields)
        profile = bm.HouseProfile(municipality=municipality, year_band=year_band,
                                  family_band=family_band, area_m2=1.0)
        group = bm.select_reference_group(profile, app.state.record_set,
                                          min_group_size=app.state.min_group_size)
        stats = bm.compute_group_stats(group)
        return _json_response({
            "municipality": municipality,
            "year_band": year_band,
            "family_band": family_band,
            "count": stats.count,
            "widened": group.widened,
            "level": group.level,
            "stats": stats.to_dict(),
        })

    @app.post(f"{API_PREFIX}/sensitivity/runs")
    async def post_sensitivity_run(request: SensitivityRunRequest):
        try:
            handle = app.state.registry.submit(app.state.record_set,
                                               request.to_config())
        except RunBusy as exc:
            return _error_response(409, "run_in_progress", str(exc))
        return _json_response(handle, status_code=202)

    @app.get(f"{API_PREFIX}/sensitivity/runs/{{run_id}}")
    async def get_sensitivity_run(run_id: str):
        handle = app.state.registry.get(run_id)
        if handle is None:
            return _error_response(404, "unknown_run", f"no run {run_id!r}")
        return _json_response(handle)

    @app.get(f"{API_PREFIX}/config")
    async def get_config():
        fuel_kinds: dict = {}
        for (kind, unit) in sorted(app.state.conversion.factors):
            fuel_kinds.setdefault(kind, []).append(unit)
        return _json_response({
            "municipalities": list(ds.MUNICIPALITIES),
            "year_bands": list(ds.YEAR_BANDS),
            "family_bands": list(ds.FAMILY_BANDS),
            "fuel_kinds": fuel_kinds,
            "rating_classes": list(bm.RATINGS),
            "rating_labels": [bm.RATING_LABELS[r] for r in bm.RATINGS],
            "targets": app.state.targets.to_json_dict(),
            "target_years": [y for y, _ in app.state.targets.entries],
            "min_group_size": app.state.min_group_size,
            "estimators": list(sensitivity.ESTIMATORS),
            "surrogates": list(surrogate.ALL_KINDS),
            "record_count": len(app.state.record_set),
            "dataset_provenance": app.state.record_set.provenance,
        })

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
