"""Command-line front end.

Every command is a pure function of (config bytes, input files) to output
bytes: outputs carry a config echo plus content hash, thread count never
changes results, and reruns produce identical files.

Subcommands: gen-data, gen-reservoir, run, sweep, timescale-sweep,
fixed-point, analyze, cost.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import costs, dataset as ds_mod, readout, sweep as sweep_mod
from .config import ConfigError, RunConfig, canonical_json, config_hash, load_config
from .dynamics import ScalingPoint, SimulationEngine, reservoir_activity
from .kernels import SynapseOrder
from .topology import ReservoirGraph, ReservoirParams, InputWiring, build_input_wiring, build_reservoir

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(text)


def _write_json(path: Path, obj):
    _write_text(path, canonical_json(obj))


def _csv(header: str, rows) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _provenance(cfg: RunConfig) -> dict:
    return {"config": cfg.raw, "config_hash": config_hash(cfg.raw)}


def _resolve_dataset(cfg: RunConfig) -> ds_mod.Dataset:
    if cfg.dataset.path is not None:
        return ds_mod.load_dataset(cfg.dataset.path)
    return ds_mod.generate_synthetic(cfg.dataset.synthetic)


def _build_topology(cfg: RunConfig) -> tuple[ReservoirGraph, InputWiring]:
    params_dict = dict(cfg.reservoir.params)
    params_dict.setdefault("seed", cfg.seed)
    params = ReservoirParams.from_dict(params_dict)
    graph = build_reservoir(params)
    wiring = build_input_wiring(cfg.reservoir.n_channels, cfg.reservoir.fan_out,
                                params.n_neurons, params.seed)
    return graph, wiring


def _resolve_topology(cfg: RunConfig) -> tuple[ReservoirGraph, InputWiring]:
    if cfg.reservoir.file is not None:
        with open(cfg.reservoir.file) as f:
            doc = json.load(f)
        return ReservoirGraph.from_dict(doc["graph"]), InputWiring.from_dict(doc["wiring"])
    return _build_topology(cfg)


def _sweep_config(cfg: RunConfig) -> sweep_mod.SweepConfig:
    return sweep_mod.SweepConfig(
        kernel=cfg.kernel,
        lif=cfg.lif,
        readout=cfg.readout,
        alpha_in_values=cfg.sweep.alpha_in_values,
        alpha_res_values=cfg.sweep.alpha_res_values,
        n_folds=cfg.sweep.n_folds,
        seed=cfg.seed,
    )


def cmd_gen_data(cfg: RunConfig, out: Path) -> int:
    if cfg.dataset.synthetic is None:
        raise ConfigError("gen-data requires a dataset.synthetic section")
    dataset = ds_mod.generate_synthetic(cfg.dataset.synthetic)
    ds_mod.save_dataset(dataset, out / "dataset")
    report = ds_mod.validate(dataset)
    report["provenance"] = _provenance(cfg)
    _write_json(out / "validation_report.json", report)
    print(f"wrote {len(dataset)} samples to {out / 'dataset'}")
    return EXIT_OK


def cmd_gen_reservoir(cfg: RunConfig, out: Path) -> int:
    graph, wiring = _build_topology(cfg)
    doc = {
        "graph": graph.to_dict(),
        "wiring": wiring.to_dict(),
        "provenance": _provenance(cfg),
    }
    _write_json(out / "reservoir.json", doc)
    print(f"wrote {graph.n_neurons}-neuron reservoir ({graph.n_edges} edges) to {out / 'reservoir.json'}")
    return EXIT_OK


def cmd_run(cfg: RunConfig, out: Path, export_rasters: bool = False) -> int:
    dataset = _resolve_dataset(cfg)
    graph, wiring = _resolve_topology(cfg)
    engine = SimulationEngine(graph, wiring, cfg.kernel, cfg.lif)
    point = ScalingPoint(cfg.sweep.fixed_alpha_in, cfg.sweep.fixed_alpha_res)
    records = [engine.run_sample(s, point) for s in dataset.samples]
    activity = reservoir_activity(records)
    fold_seed = _cell_seed(cfg.seed)
    result = readout.kfold_evaluate(records, dataset.labels, cfg.readout,
                                    n_folds=cfg.sweep.n_folds, seed=fold_seed)
    _write_json(out / "result.json", {
        "alpha_in": point.alpha_in,
        "alpha_res": point.alpha_res,
        "fold_accuracies": result.accuracies.tolist(),
        "mean_accuracy": result.mean_accuracy,
        "std_accuracy": result.std_accuracy,
        "error": result.error,
        "activity_spikes_per_sample": activity.spikes_per_sample,
        "activity_hz_per_neuron": activity.rate_hz_per_neuron,
        "confusion_matrix": result.confusion.tolist(),
        "per_sample_spikes": [r.total_spikes for r in records],
        "provenance": _provenance(cfg),
    })
    _write_text(out / "folds.csv",
                _csv("fold,accuracy", [(i, float(a)) for i, a in enumerate(result.accuracies)]))
    if export_rasters:
        for i, rec in enumerate(records):
            rows = [(n, float(t)) for n, times in enumerate(rec.raster) for t in times]
            _write_text(out / "rasters" / f"sample_{i:04d}.csv", _csv("neuron_id,time_ms", rows))
    print(f"accuracy {result.mean_accuracy:.4f} +/- {result.std_accuracy:.4f}, "
          f"activity {activity.spikes_per_sample:.1f} spikes/sample")
    return EXIT_OK


def _cell_seed(seed: int) -> int:
    from . import seeding
    return seeding.derive_seed(seed, "cell", 0, 0)


def _grid_csv(grid: sweep_mod.SweepGrid) -> str:
    rows = [(c.alpha_in, c.alpha_res, c.activity, c.mean_error, c.std_error)
            for c in grid.cells]
    return _csv("alpha_in,alpha_res,activity,mean_error,std_error", rows)


def _analysis_payload(grid: sweep_mod.SweepGrid, band_n: int) -> dict:
    analysis = sweep_mod.error_vs_activity(grid)
    payload = {
        "min_error": analysis["min_error"],
        "optimal_activity": analysis["optimal_activity"],
        "band": list(analysis["band"]) if analysis["band"] else None,
    }
    if grid.valid_cells:
        best = sweep_mod.find_optimum(grid)
        payload["optimum"] = best.to_dict()
        n = min(band_n, len(grid.valid_cells))
        mean, std = sweep_mod.optimal_activity_band(grid, n=n)
        payload["lowest_error_band"] = {"n": n, "activity_mean": mean, "activity_std": std}
    return payload


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    dataset = _resolve_dataset(cfg)
    graph, wiring = _resolve_topology(cfg)
    grid = sweep_mod.grid_sweep(dataset, graph, wiring, _sweep_config(cfg), n_workers=cfg.threads)
    _write_json(out / "grid.json", {"grid": grid.to_dict(), "provenance": _provenance(cfg)})
    _write_text(out / "grid.csv", _grid_csv(grid))
    analysis = sweep_mod.error_vs_activity(grid)
    _write_text(out / "error_vs_activity.csv",
                _csv("activity,mean_error", analysis["curve"]))
    summary = _analysis_payload(grid, cfg.sweep.band_n)
    summary["provenance"] = _provenance(cfg)
    _write_json(out / "summary.json", summary)
    if grid.valid_cells:
        best = sweep_mod.find_optimum(grid)
        print(f"optimum: alpha_in={best.alpha_in} alpha_res={best.alpha_res} "
              f"error={best.mean_error:.4f} activity={best.activity:.1f}")
    return EXIT_OK


def cmd_timescale_sweep(cfg: RunConfig, out: Path) -> int:
    dataset = _resolve_dataset(cfg)
    graph, wiring = _resolve_topology(cfg)
    result = sweep_mod.timescale_sweep(
        dataset, graph, wiring, cfg.sweep.orders, cfg.sweep.taus,
        _sweep_config(cfg), n_workers=cfg.threads, band_n=cfg.sweep.band_n)
    rows = [(c.order.value, c.tau, c.min_error, c.std_error, c.alpha_in, c.alpha_res,
             c.band_mean, c.band_std) for c in result.cells]
    _write_text(out / "timescale.csv",
                _csv("order,tau,min_error,std_error,alpha_in,alpha_res,band_mean,band_std", rows))
    _write_json(out / "summary.json", {
        "cells": [c.to_dict() for c in result.cells],
        "provenance": _provenance(cfg),
    })
    return EXIT_OK


def cmd_fixed_point(cfg: RunConfig, out: Path) -> int:
    dataset = _resolve_dataset(cfg)
    graph, wiring = _resolve_topology(cfg)
    point = ScalingPoint(cfg.sweep.fixed_alpha_in, cfg.sweep.fixed_alpha_res)
    results = sweep_mod.fixed_point_study(
        dataset, graph, wiring, point, cfg.sweep.orders, cfg.sweep.taus, _sweep_config(cfg))
    rows = [(order.value, tau, cell.alpha_in, cell.alpha_res, cell.activity,
             cell.mean_error, cell.std_error) for order, tau, cell in results]
    _write_text(out / "fixed_point.csv",
                _csv("order,tau,alpha_in,alpha_res,activity,mean_error,std_error", rows))
    _write_json(out / "summary.json", {
        "operating_point": {"alpha_in": point.alpha_in, "alpha_res": point.alpha_res},
        "cells": [{"order": o.value, "tau": t, **c.to_dict()} for o, t, c in results],
        "provenance": _provenance(cfg),
    })
    return EXIT_OK


def cmd_analyze(grid_path: str, out: Path, band_n: int = 10) -> int:
    with open(grid_path) as f:
        doc = json.load(f)
    if "grid" not in doc:
        raise ConfigError(f"{grid_path} is not a sweep grid file")
    grid = sweep_mod.SweepGrid.from_dict(doc["grid"])
    analysis = sweep_mod.error_vs_activity(grid)
    _write_text(out / "error_vs_activity.csv", _csv("activity,mean_error", analysis["curve"]))
    payload = _analysis_payload(grid, band_n)
    payload["provenance"] = doc.get("provenance")
    _write_json(out / "analysis.json", payload)
    return EXIT_OK


def cmd_cost(order: str, out: Path | None) -> int:
    report = costs.estimate(SynapseOrder(order))
    print(costs.format_table(report))
    if out is not None:
        _write_json(out / "cost.json", report.to_dict())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsmlab",
                                     description="Spiking-reservoir experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-c", "--config", help="JSON run configuration")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="dotted-path config override")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--threads", type=int,
                       help="worker processes (default: LSMLAB_THREADS or 1)")
        p.add_argument("-o", "--output-dir", help="override the config output directory")

    for name in ("gen-data", "gen-reservoir", "run", "sweep", "timescale-sweep", "fixed-point"):
        p = sub.add_parser(name)
        common(p)
        if name == "run":
            p.add_argument("--rasters", action="store_true", help="export per-sample raster CSVs")

    p = sub.add_parser("analyze")
    p.add_argument("grid", help="grid.json produced by the sweep command")
    p.add_argument("-o", "--output-dir", default="out")
    p.add_argument("--band-n", type=int, default=10)

    p = sub.add_parser("cost")
    p.add_argument("order", choices=[o.value for o in SynapseOrder])
    p.add_argument("-o", "--output-dir", default=None)
    return parser


def _load(args) -> RunConfig:
    if args.config:
        cfg = load_config(args.config, args.overrides)
    else:
        raw = {}
        if args.overrides:
            from .config import apply_overrides
            raw = apply_overrides(raw, args.overrides)
        cfg = RunConfig.from_dict(raw)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("LSMLAB_THREADS", cfg.threads))
    updates["threads"] = threads
    if args.output_dir:
        updates["output_dir"] = args.output_dir
    from dataclasses import replace
    return replace(cfg, **updates)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "cost":
            out = Path(args.output_dir) if args.output_dir else None
            return cmd_cost(args.order, out)
        if args.command == "analyze":
            return cmd_analyze(args.grid, Path(args.output_dir), args.band_n)
        cfg = _load(args)
        out = Path(cfg.output_dir)
        if args.command == "gen-data":
            return cmd_gen_data(cfg, out)
        if args.command == "gen-reservoir":
            return cmd_gen_reservoir(cfg, out)
        if args.command == "run":
            return cmd_run(cfg, out, export_rasters=args.rasters)
        if args.command == "sweep":
            return cmd_sweep(cfg, out)
        if args.command == "timescale-sweep":
            return cmd_timescale_sweep(cfg, out)
        if args.command == "fixed-point":
            return cmd_fixed_point(cfg, out)
        raise ConfigError(f"unknown command {args.command}")
    except (ConfigError, ds_mod.DatasetFormatError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
