"""Command line entry points: ingest, synth, benchmark, sa, serve.

Exit codes: 0 success, 2 usage or input error, 3 domain error (e.g. no
reference group, zero-variance model), 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import benchmark as bm
from . import datastore as ds
from . import energy, engine, sensitivity
from . import errors as err
from .serialize import dumps_stable

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_INTERNAL = 4

# Exhaustive mapping from engine errors to exit codes; test-enforced.
ERROR_EXIT_CODES = {
    err.NegativeNetBill: EXIT_USAGE,
    err.ZeroDenominator: EXIT_USAGE,
    err.UnknownFuelUnit: EXIT_USAGE,
    err.NonPositiveArea: EXIT_USAGE,
    err.UnknownYear: EXIT_USAGE,
    err.SchemaMismatch: EXIT_USAGE,
    err.EmptyFile: EXIT_USAGE,
    err.IoFailure: EXIT_USAGE,
    err.CorruptStore: EXIT_USAGE,
    err.DimensionUnsupported: EXIT_USAGE,
    err.EmptyGroup: EXIT_DOMAIN,
    err.ZeroVariance: EXIT_DOMAIN,
    err.NoSupport: EXIT_DOMAIN,
    err.ConstantResponse: EXIT_DOMAIN,
    err.Underdetermined: EXIT_DOMAIN,
    err.RankDeficient: EXIT_DOMAIN,
    err.DimensionMismatch: EXIT_DOMAIN,
}


def exit_code_for(exc: BaseException) -> int:
    for klass, code in ERROR_EXIT_CODES.items():
        if isinstance(exc, klass):
            return code
    if isinstance(exc, (ValueError, json.JSONDecodeError)):
        return EXIT_USAGE
    return EXIT_INTERNAL


def _load_json_arg(value: str):
    """Accept an inline JSON literal or a path to a JSON file."""
    if value.lstrip().startswith(("{", "[")):
        return json.loads(value)
    with open(value, encoding="utf-8") as fh:
        return json.load(fh)


def _load_store(path: str) -> ds.RecordSet:
    return ds.load_store(path)


# --- subcommands ----------------------------------------------------------------

def cmd_ingest(args) -> int:
    result = ds.ingest_epc_csv(args.input)
    records = result.records
    if args.anonymize_key:
        records = ds.anonymize(records, bytes.fromhex(args.anonymize_key))
    ds.save_store(records, args.store)
    print(f"rows in: {result.rows_in}")
    print(f"rows kept: {result.rows_kept}")
    print(f"rows rejected: {result.rows_rejected}")
    for rejection in result.rejections:
        print(f"  line {rejection.line}: {rejection.reason}")
    return EXIT_OK


def cmd_synth(args) -> int:
    overrides = _load_json_arg(args.config) if args.config else {}
    config = ds.SynthConfig(n=args.n, seed=args.seed, **overrides)
    records = ds.generate_synthetic(config)
    ds.save_store(records, args.store)
    print(f"generated {len(records)} records (seed {args.seed}) -> {args.store}")
    return EXIT_OK


def _build_profile(data: dict) -> bm.HouseProfile:
    try:
        return bm.HouseProfile(
            municipality=data["municipality"],
            year_band=data["year_band"],
            family_band=data["family_band"],
            area_m2=float(data["area_m2"]),
        )
    except KeyError as exc:
        raise ValueError(f"profile is missing field {exc.args[0]!r}") from exc


def _build_energy_inputs(data: dict):
    method = data.get("method") or data.get("energy_input_method")
    if method not in (engine.METHOD_KWH, engine.METHOD_SEK):
        raise ValueError("energy input needs \"method\": \"kwh\" or \"sek\"")
    kwh = data.get("kwh_last_12_months")
    bill = None
    if data.get("bill") is not None:
        bill = energy.BillBreakdown(**data["bill"])
    fuels = [
        energy.FuelEntry(kind=f["kind"], quantity=float(f["quantity"]),
                         unit=f["unit"])
        for f in data.get("fuels", ())
    ]
    return method, kwh, bill, fuels


def cmd_benchmark(args) -> int:
    record_set = _load_store(args.store)
    profile = _build_profile(_load_json_arg(args.profile))
    method, kwh, bill, fuels = _build_energy_inputs(_load_json_arg(args.energy))
    conversion = energy.ConversionTable.from_json(args.fuel_table) \
        if args.fuel_table else None
    targets = bm.EnergyTargetTable.from_json(args.targets) if args.targets else None
    payload = engine.run_benchmark(
        record_set, profile,
        energy_input_method=method,
        kwh_last_12_months=kwh,
        bill=bill,
        fuels=fuels,
        target_year=args.target_year,
        conversion=conversion,
        targets=targets,
        min_group_size=args.min_group_size,
    )
    print(dumps_stable(payload))
    return EXIT_OK


def _format_sa_table(reports) -> str:
    kinds = [r.surrogate_kind for r in reports]
    header = ["factor"] + [f"{k}.{col}" for k in kinds for col in ("S", "ST")]
    widths = [22] + [10] * (len(header) - 1)
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]

    def fmt(value):
        return "n/a".rjust(10) if value is None else f"{value:10.4f}"

    factors = reports[0].factors
    for i, name in enumerate(factors):
        cells = [name.ljust(22)]
        for r in reports:
            s = None if r.first_order is None else r.first_order[i]
            st = None if r.total_effect is None else r.total_effect[i]
            cells.append(fmt(s))
            cells.append(fmt(st))
        lines.append("  ".join(cells))
    cells = ["sum".ljust(22)]
    for r in reports:
        cells.append(fmt(r.sum_first_order))
        cells.append(fmt(r.sum_total_effect))
    lines.append("  ".join(cells))
    return "\n".join(lines)


def cmd_sa(args) -> int:
    record_set = _load_store(args.store)
    surrogates = tuple(args.surrogates.split(","))
    config = sensitivity.SaConfig(
        n_samples=args.samples,
        estimator=args.estimator,
        surrogates=surrogates,
        skip=args.skip,
        mls_radius=args.mls_radius,
    )
    config.validate()
    reports = sensitivity.run_sa_pipeline(record_set, config)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for report in reports:
            base = os.path.join(args.out, f"sa_{report.surrogate_kind}")
            payload = {"config": config.to_dict(), "report": report.to_dict()}
            with open(f"{base}.json", "w", encoding="utf-8") as fh:
                fh.write(dumps_stable(payload))
                fh.write("\n")
            with open(f"{base}.csv", "w", encoding="utf-8") as fh:
                fh.write(report.to_csv())
    print(_format_sa_table(reports))
    noise_floor = reports[0].noise_floor
    print(f"noise floor (3/sqrt(N)): {noise_floor:.4f}")
    if any(r.zero_variance for r in reports):
        print("model output variance is zero; indices undefined", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    record_set = _load_store(args.store)
    conversion = energy.ConversionTable.from_json(args.fuel_table) \
        if args.fuel_table else None
    targets = bm.EnergyTargetTable.from_json(args.targets) if args.targets else None
    app = create_app(record_set, targets=targets, conversion=conversion,
                     min_group_size=args.min_group_size, ui_dir=args.ui)
    host, _, port = args.addr.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port),
                log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retrofit",
        description="Building energy retrofit decision support",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest an EPC CSV into a store")
    p.add_argument("--input", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--anonymize-key", default=None,
                   help="hex key; hashes record ids and coarsens coordinates")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic store")
    p.add_argument("--n", type=int, default=3182)
    p.add_argument("--seed", type=int, default=ds.SynthConfig().seed)
    p.add_argument("--store", required=True)
    p.add_argument("--config", default=None,
                   help="JSON (inline or path) overriding generator parameters")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("benchmark", help="benchmark one house against a store")
    p.add_argument("--store", required=True)
    p.add_argument("--profile", required=True,
                   help="JSON (inline or path): municipality, year_band, "
                        "family_band, area_m2")
    p.add_argument("--energy", required=True,
                   help="JSON (inline or path): method plus kwh_last_12_months "
                        "or bill, optional fuels")
    p.add_argument("--target-year", type=int, default=2022)
    p.add_argument("--targets", default=None,
                   help="JSON target table {year: allowed_eui}")
    p.add_argument("--fuel-table", default=None,
                   help="JSON fuel conversion table")
    p.add_argument("--min-group-size", type=int, default=bm.DEFAULT_MIN_GROUP_SIZE)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("sa", help="run the sensitivity-analysis pipeline")
    p.add_argument("--store", required=True)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--estimator", choices=sensitivity.ESTIMATORS,
                   default=sensitivity.JANSEN)
    p.add_argument("--surrogates", default=",".join(sensitivity.DEFAULT_SURROGATES),
                   help="comma separated: quad,full,mls,linear")
    p.add_argument("--skip", type=int, default=0)
    p.add_argument("--mls-radius", type=float, default=None)
    p.add_argument("--out", default=None, help="directory for report JSON/CSV")
    p.set_defaults(func=cmd_sa)

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--store", default=os.environ.get("RETROFIT_STORE"),
                   required="RETROFIT_STORE" not in os.environ)
    p.add_argument("--addr", default=os.environ.get("RETROFIT_ADDR",
                                                    "127.0.0.1:8000"))
    p.add_argument("--fuel-table", default=None)
    p.add_argument("--targets", default=None)
    p.add_argument("--min-group-size", type=int, default=bm.DEFAULT_MIN_GROUP_SIZE)
    p.add_argument("--ui", default=None,
                   help="directory of built web-UI files to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except err.RetrofitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except (ValueError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return EXIT_OK
    except Exception as exc:  # unexpected: internal
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
