"""Weight-scaling and timescale sweep orchestration.

A sweep evaluates every (alpha_in, alpha_res) grid point: simulate all
samples, record mean reservoir activity, run the rotating k-fold readout
evaluation, and collect per-fold errors. Grid cells are independent tasks
over immutable inputs; they may run in any order on a process pool and the
assembled grid is byte-identical to a serial run. Per-cell fold shuffles use
seeds derived from (run seed, cell indices) so parallel and serial execution
agree.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, replace

import numpy as np

from . import seeding
from .dataset import Dataset
from .dynamics import LIFParams, ScalingPoint, SimulationEngine
from .kernels import KernelSpec, SynapseOrder
from .readout import ReadoutConfig, kfold_evaluate
from .topology import InputWiring, ReservoirGraph

__all__ = [
    "SweepConfig",
    "GridCell",
    "SweepGrid",
    "TimescaleCell",
    "TimescaleSweepResult",
    "grid_sweep",
    "find_optimum",
    "error_vs_activity",
    "optimal_activity_band",
    "timescale_sweep",
    "fixed_point_study",
]

DEFAULT_ALPHA_IN = (1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 20.0)
DEFAULT_ALPHA_RES = (0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0)


@dataclass(frozen=True)
class SweepConfig:
    kernel: KernelSpec
    lif: LIFParams = LIFParams()
    readout: ReadoutConfig = ReadoutConfig()
    alpha_in_values: tuple[float, ...] = DEFAULT_ALPHA_IN
    alpha_res_values: tuple[float, ...] = DEFAULT_ALPHA_RES
    n_folds: int = 5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha_in_values", tuple(float(a) for a in self.alpha_in_values))
        object.__setattr__(self, "alpha_res_values", tuple(float(a) for a in self.alpha_res_values))
        if not self.alpha_in_values or not self.alpha_res_values:
            raise ValueError("alpha grids must be nonempty")
        if any(a < 0 for a in self.alpha_in_values + self.alpha_res_values):
            raise ValueError("alpha values must be non-negative")


@dataclass(frozen=True)
class GridCell:
    alpha_in: float
    alpha_res: float
    mean_error: float = math.nan
    fold_errors: tuple[float, ...] = ()
    std_error: float = math.nan
    activity: float = math.nan  # spikes per sample
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def sort_key(self):
        # lexicographic tie-break: error, then activity, then alphas
        return (self.mean_error, self.activity, self.alpha_in, self.alpha_res)

    def to_dict(self) -> dict:
        return {
            "alpha_in": self.alpha_in,
            "alpha_res": self.alpha_res,
            "mean_error": self.mean_error,
            "fold_errors": list(self.fold_errors),
            "std_error": self.std_error,
            "activity": self.activity,
            "failure": self.failure,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridCell":
        unknown = set(d) - {"alpha_in", "alpha_res", "mean_error", "fold_errors",
                            "std_error", "activity", "failure"}
        if unknown:
            raise ValueError(f"unknown grid cell keys: {sorted(unknown)}")
        d = dict(d)
        d["fold_errors"] = tuple(d.get("fold_errors", ()))
        return cls(**d)


@dataclass(frozen=True)
class SweepGrid:
    alpha_in_values: tuple[float, ...]
    alpha_res_values: tuple[float, ...]
    cells: tuple[GridCell, ...]  # row-major: alpha_in outer, alpha_res inner
    kernel: KernelSpec
    seed: int

    def __post_init__(self):
        expected = len(self.alpha_in_values) * len(self.alpha_res_values)
        if len(self.cells) != expected:
            raise ValueError("grid has holes: cell count does not match the alpha grids")

    @property
    def valid_cells(self) -> tuple[GridCell, ...]:
        return tuple(c for c in self.cells if c.ok)

    def to_dict(self) -> dict:
        return {
            "alpha_in_values": list(self.alpha_in_values),
            "alpha_res_values": list(self.alpha_res_values),
            "kernel": self.kernel.to_dict(),
            "seed": self.seed,
            "cells": [c.to_dict() for c in self.cells],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepGrid":
        unknown = set(d) - {"alpha_in_values", "alpha_res_values", "kernel", "seed", "cells"}
        if unknown:
            raise ValueError(f"unknown sweep grid keys: {sorted(unknown)}")
        return cls(
            alpha_in_values=tuple(d["alpha_in_values"]),
            alpha_res_values=tuple(d["alpha_res_values"]),
            cells=tuple(GridCell.from_dict(c) for c in d["cells"]),
            kernel=KernelSpec.from_dict(d["kernel"]),
            seed=d["seed"],
        )


def _eval_cell(engine: SimulationEngine, dataset: Dataset, config: SweepConfig,
               i: int, j: int) -> GridCell:
    alpha_in = config.alpha_in_values[i]
    alpha_res = config.alpha_res_values[j]
    try:
        point = ScalingPoint(alpha_in, alpha_res)
        counts = np.empty((engine.graph.n_neurons, len(dataset)), dtype=np.int64)
        for s, sample in enumerate(dataset.samples):
            counts[:, s] = engine.run_counts(sample, point)
        responses = counts * (1000.0 / dataset.duration)  # firing rates in Hz
        activity = float(counts.sum(axis=0).mean())
        fold_seed = seeding.derive_seed(config.seed, "cell", i, j)
        result = kfold_evaluate(responses, dataset.labels, config.readout,
                                n_folds=config.n_folds, seed=fold_seed)
        fold_errors = tuple(1.0 - a for a in result.accuracies.tolist())
        return GridCell(
            alpha_in=alpha_in,
            alpha_res=alpha_res,
            mean_error=result.error,
            fold_errors=fold_errors,
            std_error=float(np.std(fold_errors)),
            activity=activity,
        )
    except Exception as e:  # annotate, do not abort the grid
        return GridCell(alpha_in=alpha_in, alpha_res=alpha_res, failure=f"{type(e).__name__}: {e}")


# -- process-pool plumbing: one engine per worker, cells dispatched by index --

_WORKER: dict = {}


def _worker_init(dataset, graph, wiring, config):
    _WORKER["engine"] = SimulationEngine(graph, wiring, config.kernel, config.lif)
    _WORKER["dataset"] = dataset
    _WORKER["config"] = config


def _worker_eval(ij):
    i, j = ij
    return _eval_cell(_WORKER["engine"], _WORKER["dataset"], _WORKER["config"], i, j)


def grid_sweep(dataset: Dataset, graph: ReservoirGraph, wiring: InputWiring,
               config: SweepConfig, n_workers: int = 1) -> SweepGrid:
    """Evaluate the full alpha grid; output independent of n_workers."""
    indices = [(i, j)
               for i in range(len(config.alpha_in_values))
               for j in range(len(config.alpha_res_values))]
    if n_workers <= 1 or len(indices) == 1:
        engine = SimulationEngine(graph, wiring, config.kernel, config.lif)
        cells = [_eval_cell(engine, dataset, config, i, j) for i, j in indices]
    else:
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=n_workers, initializer=_worker_init,
                initargs=(dataset, graph, wiring, config)) as pool:
            cells = list(pool.map(_worker_eval, indices, chunksize=4))
    return SweepGrid(
        alpha_in_values=config.alpha_in_values,
        alpha_res_values=config.alpha_res_values,
        cells=tuple(cells),
        kernel=config.kernel,
        seed=config.seed,
    )


def find_optimum(grid: SweepGrid) -> GridCell:
    """Lowest-error cell; ties resolve by activity, then alpha_in, then alpha_res."""
    valid = grid.valid_cells
    if not valid:
        raise ValueError("grid has no valid cells")
    return min(valid, key=GridCell.sort_key)


def error_vs_activity(grid: SweepGrid, band_width: float = 0.01) -> dict:
    """Project the grid onto (activity, error), sorted by activity.

    Also reports the activity at minimum error and the activity band where
    error stays within ``band_width`` (1 percentage point by default) of the
    minimum. A grid with no spiking anywhere has no meaningful band.
    """
    valid = sorted(grid.valid_cells, key=lambda c: (c.activity, c.mean_error))
    curve = [(c.activity, c.mean_error) for c in valid]
    if not valid or all(c.activity == 0 for c in valid):
        return {"curve": curve, "band": None, "optimal_activity": None, "min_error": None}
    best = find_optimum(grid)
    in_band = [c.activity for c in valid if c.mean_error <= best.mean_error + band_width]
    return {
        "curve": curve,
        "min_error": best.mean_error,
        "optimal_activity": best.activity,
        "band": (min(in_band), max(in_band)),
    }


def optimal_activity_band(grid: SweepGrid, n: int = 10) -> tuple[float, float]:
    """Mean and std of reservoir activity over the n lowest-error grid points."""
    valid = grid.valid_cells
    if n > len(valid):
        raise ValueError(f"n={n} exceeds the {len(valid)} valid grid points")
    chosen = sorted(valid, key=GridCell.sort_key)[:n]
    acts = np.array([c.activity for c in chosen])
    return float(acts.mean()), float(acts.std())


def _kernel_for(order: SynapseOrder, tau: float, base: KernelSpec) -> KernelSpec:
    """Kernel at the requested order/timescale; 2nd order rises in half its fall time."""
    if order is SynapseOrder.DELTA:
        return replace(base, order=order, tau_fall=base.dt, tau_rise=None)
    if order is SynapseOrder.SECOND:
        return replace(base, order=order, tau_fall=tau, tau_rise=tau / 2.0)
    return replace(base, order=order, tau_fall=tau, tau_rise=None)


@dataclass(frozen=True)
class TimescaleCell:
    order: SynapseOrder
    tau: float
    min_error: float = math.nan
    std_error: float = math.nan  # 5-fold std at the argmin point
    alpha_in: float = math.nan
    alpha_res: float = math.nan
    activity: float = math.nan
    band_mean: float = math.nan
    band_std: float = math.nan
    failure: str | None = None

    def to_dict(self) -> dict:
        return {
            "order": self.order.value,
            "tau": self.tau,
            "min_error": self.min_error,
            "std_error": self.std_error,
            "alpha_in": self.alpha_in,
            "alpha_res": self.alpha_res,
            "activity": self.activity,
            "band_mean": self.band_mean,
            "band_std": self.band_std,
            "failure": self.failure,
        }


@dataclass(frozen=True)
class TimescaleSweepResult:
    cells: tuple[TimescaleCell, ...]
    grids: tuple[SweepGrid, ...]


def timescale_sweep(dataset: Dataset, graph: ReservoirGraph, wiring: InputWiring,
                    orders, taus, base_config: SweepConfig, n_workers: int = 1,
                    band_n: int = 10) -> TimescaleSweepResult:
    """Per (order, tau): full grid sweep, min error with fold std, and the
    activity band of the band_n lowest-error operating points."""
    cells: list[TimescaleCell] = []
    grids: list[SweepGrid] = []
    for order in orders:
        order = SynapseOrder(order)
        tau_list = [base_config.kernel.dt] if order is SynapseOrder.DELTA else taus
        for tau in tau_list:
            try:
                kernel = _kernel_for(order, float(tau), base_config.kernel)
            except ValueError as e:
                cells.append(TimescaleCell(order=order, tau=float(tau),
                                           failure=f"{type(e).__name__}: {e}"))
                continue
            config = replace(base_config, kernel=kernel)
            grid = grid_sweep(dataset, graph, wiring, config, n_workers=n_workers)
            grids.append(grid)
            try:
                best = find_optimum(grid)
                band_mean, band_std = optimal_activity_band(grid, n=min(band_n, len(grid.valid_cells)))
            except ValueError as e:
                cells.append(TimescaleCell(order=order, tau=float(tau),
                                           failure=f"{type(e).__name__}: {e}"))
                continue
            cells.append(TimescaleCell(
                order=order, tau=float(tau),
                min_error=best.mean_error, std_error=best.std_error,
                alpha_in=best.alpha_in, alpha_res=best.alpha_res,
                activity=best.activity, band_mean=band_mean, band_std=band_std,
            ))
    return TimescaleSweepResult(cells=tuple(cells), grids=tuple(grids))


def fixed_point_study(dataset: Dataset, graph: ReservoirGraph, wiring: InputWiring,
                      operating_point: ScalingPoint, orders, taus,
                      base_config: SweepConfig) -> tuple[GridCell, ...]:
    """Evaluate all (order, tau) at one fixed scaling point, no re-sweeping.

    Returns one pseudo-cell per (order, tau); alpha fields echo the fixed point
    and the order/tau ride along in the returned mapping order.
    """
    results = []
    for order in orders:
        order = SynapseOrder(order)
        tau_list = [base_config.kernel.dt] if order is SynapseOrder.DELTA else taus
        for tau in tau_list:
            try:
                kernel = _kernel_for(order, float(tau), base_config.kernel)
                config = replace(
                    base_config, kernel=kernel,
                    alpha_in_values=(operating_point.alpha_in,),
                    alpha_res_values=(operating_point.alpha_res,),
                )
                engine = SimulationEngine(graph, wiring, kernel, config.lif)
                cell = _eval_cell(engine, dataset, config, 0, 0)
            except ValueError as e:
                cell = GridCell(alpha_in=operating_point.alpha_in,
                                alpha_res=operating_point.alpha_res,
                                failure=f"{type(e).__name__}: {e}")
            results.append((order, float(tau), cell))
    return tuple(results)
