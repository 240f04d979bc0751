"""Command line front end.

    floodmix run --scenario 2 --n-extreme 0 --years 30 --seed 42 --out r.csv
    floodmix table1 --seed 42 --out table1.csv
    floodmix quantile --model ams --shape 0 --scale 1 --location 0 -T 100

Every result file gets a ``<out>.config.json`` sidecar with the resolved
configuration, enough to rerun it.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, fields
from pathlib import Path

from . import __version__
from .distributions import GevParams, GpdParams
from .models import AmsModel, PotModel, TmpsModel, model_quantile
from .simulation import (
    DEFAULT_RUNS,
    MODELS,
    PROCEDURES,
    RETURN_PERIODS,
    TABLE1,
    TABLE1_T,
    TABLE1_YEARS,
    ExperimentConfig,
    MetricsRow,
    build_scenario,
    default_models,
    run_experiment,
    run_records,
    aggregate,
    true_quantiles,
)

SEED_ENV = "FLOODMIX_SEED"

OUTPUT_FIELDS = (
    "scenario_id",
    "n_extreme",
    "years",
    "return_period",
    "model",
    "mean_bias",
    "rmse",
    "runs_used",
    "runs_failed",
    "master_seed",
)
TABLE1_FIELDS = (
    "procedure",
    "scenario_id",
    "n_extreme",
    "years",
    "return_period",
    "model",
    "metric",
    "reference",
    "computed",
    "deviation",
    "runs_used",
    "runs_failed",
    "master_seed",
)


class ConfigError(ValueError):
    pass


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _row_dict(row: MetricsRow, seed: int) -> dict:
    d = asdict(row)
    d["master_seed"] = seed
    return {k: d[k] for k in OUTPUT_FIELDS}


def write_rows(path: Path, rows, seed: int, fmt: str = "csv") -> None:
    records = [_row_dict(r, seed) for r in rows]
    if fmt == "json":
        clean = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in r.items()} for r in records]
        path.write_text(json.dumps(clean, indent=1) + "\n")
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(OUTPUT_FIELDS)
        for r in records:
            w.writerow([_fmt(r[k]) for k in OUTPUT_FIELDS])


def read_rows(path: Path) -> list[MetricsRow]:
    """Parse a CSV written by :func:`write_rows` back into MetricsRows."""
    ints = {"scenario_id", "n_extreme", "years", "runs_used", "runs_failed"}
    floats = {"return_period", "mean_bias", "rmse"}
    names = [f.name for f in fields(MetricsRow)]
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != OUTPUT_FIELDS:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for rec in reader:
            kw = {}
            for k in names:
                v = rec[k]
                kw[k] = int(v) if k in ints else float(v) if k in floats else v
            out.append(MetricsRow(**kw))
    return out


def write_sidecar(path: Path, payload: dict) -> Path:
    side = path.with_name(path.name + ".config.json")
    side.write_text(json.dumps({"floodmix_version": __version__, **payload}, indent=1, sort_keys=True) + "\n")
    return side


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _models(text: str) -> tuple[str, ...]:
    names = tuple(x.strip().upper() for x in text.split(",") if x.strip())
    bad = [m for m in names if m not in MODELS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown model(s) {bad}; choose from {','.join(MODELS)}")
    return names


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer")


def _resolve_run_config(args) -> ExperimentConfig:
    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
        # a result sidecar nests the config under "experiment"
        base = base.get("experiment", base)
    sc = dict(base.get("scenario", {}))
    if args.scenario is not None:
        sc["id"] = args.scenario
    if args.n_extreme is not None:
        sc["n_extreme"] = args.n_extreme
    if "id" not in sc or "n_extreme" not in sc:
        raise ConfigError("--scenario and --n-extreme are required (or give them in --config)")
    # explicit flags override the config file, which overrides the catalog
    if args.scenario is not None or args.n_extreme is not None:
        sc.pop("types", None)
    d = dict(base, scenario=sc)
    for key, val in (
        ("years", args.years),
        ("runs", args.runs),
        ("master_seed", args.seed),
        ("return_periods", args.return_periods),
        ("models", args.models),
        ("procedure", args.procedure),
    ):
        if val is not None:
            d[key] = val
    d.setdefault("years", None)
    if d["years"] is None:
        raise ConfigError("--years is required")
    d.setdefault("runs", DEFAULT_RUNS)
    d.setdefault("master_seed", _default_seed())
    d.setdefault("return_periods", list(RETURN_PERIODS))
    try:
        if "models" not in d:
            d["models"] = default_models(build_scenario(int(sc["id"]), int(sc["n_extreme"])))
        return ExperimentConfig.from_dict(d)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_run(args) -> int:
    config = _resolve_run_config(args)
    out = Path(args.out)
    records = run_records(config, workers=args.workers)
    rows = aggregate(config, records, true_quantiles(config.scenario, config.return_periods))
    write_rows(out, rows, config.master_seed, args.format)
    write_sidecar(out, {"experiment": config.to_dict(), "format": args.format})
    if args.records:
        with open(args.records, "w") as fh:
            for r in records:
                fh.write(json.dumps(
                    {"run_index": r.run_index,
                     "quantiles": {m: {_fmt(float(T)): q for T, q in qs.items()} for m, qs in r.quantiles.items()},
                     "failures": r.failures},
                    sort_keys=True) + "\n")
    failed = sum(r.runs_failed for r in rows)
    print(f"wrote {len(rows)} rows to {out} ({failed} failed model fits)")
    return 0


def table1_configs(seed: int, runs: int, procedure: str) -> list[ExperimentConfig]:
    cells = sorted({(s, e) for s, e, _ in TABLE1})
    return [
        ExperimentConfig(build_scenario(s, e), n, (TABLE1_T,), runs, seed, ("TMPS", "AMS"), procedure)
        for s, e in cells
        for n in TABLE1_YEARS
    ]


def table1_rows(seed: int, runs: int = DEFAULT_RUNS, procedures=PROCEDURES, workers: int = 1) -> list[dict]:
    out = []
    for proc in procedures:
        for cfg in table1_configs(seed, runs, proc):
            col = TABLE1_YEARS.index(cfg.years)
            for row in run_experiment(cfg, workers):
                ref = TABLE1[(row.scenario_id, row.n_extreme, row.model)]
                for metric, computed in (("bias", row.mean_bias), ("rmse", row.rmse)):
                    expected = ref[metric][col]
                    out.append({
                        "procedure": proc,
                        "scenario_id": row.scenario_id,
                        "n_extreme": row.n_extreme,
                        "years": row.years,
                        "return_period": row.return_period,
                        "model": row.model,
                        "metric": metric,
                        "reference": expected,
                        "computed": computed,
                        "deviation": abs(computed - expected),
                        "runs_used": row.runs_used,
                        "runs_failed": row.runs_failed,
                        "master_seed": seed,
                    })
    return out


def cmd_table1(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    procs = PROCEDURES if args.procedure == "both" else (args.procedure,)
    rows = table1_rows(seed, args.runs, procs, args.workers)
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE1_FIELDS)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in TABLE1_FIELDS])
    write_sidecar(out, {"table1": [c.to_dict() for p in procs for c in table1_configs(seed, args.runs, p)]})
    print(f"{'proc':9} {'sc':>2} {'nE':>2} {'n':>4} {'model':5} {'metric':6} {'ref':>7} {'computed':>9}")
    for r in rows:
        print(f"{r['procedure']:9} {r['scenario_id']:>2} {r['n_extreme']:>2} {r['years']:>4} {r['model']:5} "
              f"{r['metric']:6} {r['reference']:7.3f} {r['computed']:9.3f}")
    return 0


def _parse_model(args):
    spec = json.loads(Path(args.config).read_text()) if args.config else {}
    kind = (args.model or spec.get("model", "")).lower()
    try:
        if kind == "tmps":
            types = [dict(zip(("shape", "scale", "threshold", "p0"), t)) for t in (args.type or [])]
            types = types or spec.get("types", [])
            if not types:
                raise ConfigError("TMPS needs at least one --type shape,scale,threshold,p0")
            return TmpsModel.from_params(
                [GpdParams(float(t["shape"]), float(t["scale"]), float(t["threshold"])) for t in types],
                [float(t["p0"]) for t in types],
            )
        params = {k: getattr(args, k) if getattr(args, k) is not None else spec.get(k)
                  for k in ("shape", "scale", "location", "threshold", "rate")}
        if kind == "ams":
            return AmsModel(GevParams(float(params["shape"]), float(params["scale"]), float(params["location"])))
        if kind == "pot":
            return PotModel(GpdParams(float(params["shape"]), float(params["scale"]), float(params["threshold"])),
                            float(params["rate"]))
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"missing parameter for {kind} model: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError("--model must be one of tmps, ams, pot")


def cmd_quantile(args) -> int:
    model = _parse_model(args)
    periods = args.return_periods or list(RETURN_PERIODS)
    lines = []
    for T in periods:
        try:
            lines.append(f"{_fmt(float(T))}\t{_fmt(model_quantile(model, T))}")
        except ValueError as exc:
            raise ConfigError(f"T={T}: {exc}") from exc
    print("return_period\tquantile")
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="floodmix", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one (scenario, n_extreme, years) cell")
    r.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    r.add_argument("--scenario", type=int, choices=range(1, 6), metavar="{1..5}")
    r.add_argument("--n-extreme", type=int, choices=range(0, 6), metavar="{0..5}")
    r.add_argument("--years", type=int)
    r.add_argument("--runs", type=int, help=f"Monte Carlo runs (default {DEFAULT_RUNS})")
    r.add_argument("--seed", type=int, help=f"master seed (default ${SEED_ENV} or 0)")
    r.add_argument("--models", type=_models, help="comma list of TMPS,AMS,POT (default depends on scenario)")
    r.add_argument("--return-periods", type=_floats, help="comma list of T in years")
    r.add_argument("--procedure", choices=PROCEDURES)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--out", required=True)
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.add_argument("--records", help="also write per-run records as JSON lines")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("table1", help="rerun the T=100 comparison table cells")
    t.add_argument("--seed", type=int)
    t.add_argument("--runs", type=int, default=DEFAULT_RUNS)
    t.add_argument("--procedure", choices=PROCEDURES + ("both",), default="both")
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_table1)

    q = sub.add_parser("quantile", help="evaluate quantiles of a parameterized model")
    q.add_argument("--config", help="JSON file: {model, shape, scale, ...} or {model: tmps, types: [...]}")
    q.add_argument("--model", choices=("tmps", "ams", "pot"))
    q.add_argument("--type", type=_floats, action="append", help="TMPS flood type as shape,scale,threshold,p0")
    q.add_argument("--shape", type=float)
    q.add_argument("--scale", type=float)
    q.add_argument("--location", type=float)
    q.add_argument("--threshold", type=float)
    q.add_argument("--rate", type=float)
    q.add_argument("-T", "--return-periods", type=_floats)
    q.set_defaults(func=cmd_quantile)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"floodmix {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
