"""Dataset generation, LR sweeps, argmin extraction, rate fits, persistence.

A sweep runs a grid of cells: (parametrization, width, seed).  Every
cell re-initializes the model from a stream keyed by
(experiment name, parametrization, width, depth, seed index), trains it
at each learning rate of the grid, and records the train loss at the
requested steps.  The dataset is generated once and shared by all cells
so widths are compared on identical data.

Cells are independent; with --jobs > 1 they run in a process pool and
results are assembled in canonical cell order, so the output is
bit-identical no matter the worker count.

Persistence formats (consumed by the plots frontend):
  * records CSV with header `param,width,depth,seed,step,eta,train_loss`,
    floats as shortest round-trip decimals, non-finite losses as `inf`;
  * summary JSON with per-(param, width, step) cells and an optional
    rate-fit block.
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .model import Dataset, init_model, make_dataset, subsample
from .parametrization import preset
from .rng import RngStream, stream_id
from .optimizer import train
from .theory import DegenerateDataError, eta_star_one_step

OVERFLOW = math.inf

PARAM_NAMES = ("mup", "sp", "ntp")
DATA_KINDS = ("linear", "sign")
OPTIMIZERS = ("gd", "adam")
ACTIVATIONS = ("linear", "relu")
PRECISIONS = ("f64", "f32")

CSV_HEADER = "param,width,depth,seed,step,eta,train_loss"


class EmptyCellError(ValueError):
    """All losses in a cell are overflow sentinels."""


class InsufficientDataError(ValueError):
    """Too few usable points for a fit."""


# ---------------------------------------------------------------------------
# dataset generation


def gen_linear_dataset(d: int, N: int, noise_std: float, rng: RngStream) -> Dataset:
    """y = omega^T x + eps with omega ~ N(0, I/d), x ~ N(0, I), eps ~ N(0, noise_std^2).

    Draw order is omega, X, eps, so a replayed stream reproduces the set.
    """
    if d < 1 or N < 1:
        raise ValueError("d and N must be >= 1")
    omega = rng.gaussians(d, std=float(d) ** -0.5)
    X = rng.gaussians(N * d).reshape(N, d)
    eps = rng.gaussians(N, std=noise_std)
    return make_dataset(X, X @ omega + eps, omega=omega)


def gen_sign_dataset(d: int, N: int, noise_std: float, rng: RngStream) -> Dataset:
    """Same generator with y = Sign(omega^T x + eps) in {-1, +1}."""
    base = gen_linear_dataset(d, N, noise_std, rng)
    y = np.where(base.y >= 0.0, 1.0, -1.0)
    return make_dataset(base.X, y, omega=base.omega)


def generate_dataset(kind: str, d: int, N: int, noise_std: float, rng: RngStream) -> Dataset:
    if kind == "linear":
        return gen_linear_dataset(d, N, noise_std, rng)
    if kind == "sign":
        return gen_sign_dataset(d, N, noise_std, rng)
    raise ValueError(f"unknown dataset kind {kind!r}")


# ---------------------------------------------------------------------------
# sweep config


@dataclass
class SweepConfig:
    name: str = "sweep"
    params: tuple = ("mup",)
    widths: tuple = (128, 256, 512)
    depth: int = 3
    input_dim: int = 100
    data_kind: str = "linear"
    data_size: int = 1000
    noise_std: float = 0.1
    subsample: int = 100       # 0 keeps all data_size rows
    data_seed: int = 1
    activation: str = "linear"
    optimizer: str = "gd"
    steps: tuple = (1,)
    eta_min: float = 0.0       # 0 -> per-parametrization default grid
    eta_max: float = 0.0
    eta_points: int = 40
    seeds: tuple = (0, 1, 2)
    master_seed: int = 2024
    precision: str = "f64"
    jobs: int = 1

    def validate(self) -> None:
        if not self.params:
            raise ValueError("params: need at least one parametrization")
        for p in self.params:
            if p not in PARAM_NAMES:
                raise ValueError(f"params: unknown parametrization {p!r}")
        if len(set(self.params)) != len(self.params):
            raise ValueError("params: duplicates not allowed")
        if not self.widths or list(self.widths) != sorted(set(self.widths)):
            raise ValueError("widths: must be strictly increasing")
        if min(self.widths) < 1:
            raise ValueError("widths: must be positive")
        if self.depth < 1:
            raise ValueError("depth: must be >= 1")
        if self.input_dim < 1:
            raise ValueError("input_dim: must be >= 1")
        if self.data_kind not in DATA_KINDS:
            raise ValueError(f"data_kind: unknown kind {self.data_kind!r}")
        if self.data_size < 1:
            raise ValueError("data_size: must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std: must be >= 0")
        if self.subsample < 0 or self.subsample > self.data_size:
            raise ValueError("subsample: must lie in 0..data_size")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation: unknown activation {self.activation!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer: unknown optimizer {self.optimizer!r}")
        if not self.steps or list(self.steps) != sorted(set(self.steps)) or min(self.steps) < 1:
            raise ValueError("steps: must be strictly increasing positive integers")
        if (self.eta_min, self.eta_max) != (0.0, 0.0):
            if not 0.0 < self.eta_min < self.eta_max:
                raise ValueError("eta_min/eta_max: need 0 < eta_min < eta_max (or both 0 for defaults)")
        if self.eta_points < 2:
            raise ValueError("eta_points: must be >= 2")
        if not self.seeds or len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds: must be non-empty and unique")
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision: unknown mode {self.precision!r}")
        if self.jobs < 0:
            raise ValueError("jobs: must be >= 0 (0 = all cores)")


def eta_grid_for(cfg: SweepConfig, param_name: str, data: Dataset) -> np.ndarray:
    """Log-spaced grid; explicit bounds win, else per-parametrization defaults:
    mup centers on the one-step limiting argmin, sp/ntp span the drift range."""
    if cfg.eta_min > 0.0:
        lo, hi = cfg.eta_min, cfg.eta_max
    elif param_name == "mup":
        if cfg.optimizer == "adam":
            lo, hi = 1e-3, 1.0
        else:
            # a decade below the limit shows the transfer plateau; above it
            # one step already overshoots past 2x (loss worse than init), and
            # beyond ~4x per-seed fluctuations swamp the limiting curve even
            # at n=4096, so wider grids chart noise, not dynamics
            star = eta_star_one_step(data, cfg.depth)
            lo, hi = star / 10.0, 4.0 * star
    else:
        lo, hi = 1e-4, 10.0
    return np.logspace(math.log10(lo), math.log10(hi), cfg.eta_points)


# ---------------------------------------------------------------------------
# records and cells


class Record(NamedTuple):
    param: str
    width: int
    depth: int
    seed: int
    step: int
    eta: float
    train_loss: float


@dataclass
class CellSummary:
    param: str
    width: int
    depth: int
    step: int
    eta_opt: float | None   # median over seeds of per-seed argmins
    loss_opt: float | None  # smallest finite loss in the cell
    eta_theory: float | None
    n_overflow: int

    def to_dict(self) -> dict:
        return {
            "param": self.param, "width": self.width, "depth": self.depth,
            "step": self.step, "eta_opt": self.eta_opt, "loss_opt": self.loss_opt,
            "eta_theory": self.eta_theory, "n_overflow": self.n_overflow,
        }


@dataclass
class RateFit:
    slope: float
    intercept: float
    widths: list[int]       # widths actually used in the fit
    excluded: list[int] = field(default_factory=list)  # zero-deviation widths

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "widths": self.widths}


@dataclass
class SweepResult:
    config: SweepConfig
    records: list
    cells: list
    ratefit: RateFit | None = None


def argmin_lr(records) -> tuple[float, float]:
    """(eta, loss) of the smallest finite loss; ties go to the smaller eta."""
    best = None
    for r in records:
        if not math.isfinite(r.train_loss):
            continue
        if best is None or r.train_loss < best.train_loss or (
            r.train_loss == best.train_loss and r.eta < best.eta
        ):
            best = r
    if best is None:
        raise EmptyCellError("every loss in the cell is an overflow sentinel")
    return best.eta, best.train_loss


def convergence_rate_fit(widths, deviations) -> RateFit:
    """OLS of log|deviation| on log(width); zero deviations are excluded."""
    if len(widths) != len(deviations):
        raise ValueError("widths and deviations must have equal length")
    used_w, used_d, excluded = [], [], []
    for w, dev in zip(widths, deviations):
        if dev > 0.0:
            used_w.append(int(w))
            used_d.append(float(dev))
        else:
            excluded.append(int(w))
    if len(used_w) < 3:
        raise InsufficientDataError("need at least 3 positive deviations to fit a rate")
    slope, intercept = np.polyfit(np.log(used_w), np.log(used_d), 1)
    return RateFit(slope=float(slope), intercept=float(intercept), widths=used_w, excluded=excluded)


def median_loss_curve(records, param: str, width: int, step: int):
    """(etas, median-over-seeds losses) for one (param, width, step) cell.

    Overflow sentinels participate as inf, so a majority-overflow point
    yields an inf median, which is the honest summary of that grid point.
    """
    by_eta: dict[float, list[float]] = {}
    for r in records:
        if (r.param, r.width, r.step) == (param, width, step):
            by_eta.setdefault(r.eta, []).append(r.train_loss)
    etas = sorted(by_eta)
    med = [float(np.median(by_eta[e])) for e in etas]
    return etas, med


# ---------------------------------------------------------------------------
# sweep execution


def _cell_records(cfg: SweepConfig, data: Dataset, param_name: str, width: int, seed: int, grid) -> list:
    p = preset(param_name, cfg.optimizer)
    # the sweep name is bookkeeping, not physics: renaming a run must not
    # change its draws, so the stream is keyed on the cell coordinates only
    rng = RngStream(cfg.master_seed, stream_id("cell", param_name, width, cfg.depth, seed))
    dtype = np.float32 if cfg.precision == "f32" else np.float64
    base = init_model(p, width, cfg.depth, cfg.input_dim, rng, activation=cfg.activation, dtype=dtype)
    if cfg.precision == "f32":
        data = Dataset(
            X=data.X.astype(np.float32), y=data.y.astype(np.float32),
            K=data.K, omega=data.omega,
        )
    steps = list(cfg.steps)
    out = []
    for eta in grid:
        model = base.copy()
        rec = train(model, data, float(eta), steps[-1], optimizer=cfg.optimizer, record_steps=steps)
        for t in steps:
            out.append(Record(param_name, width, cfg.depth, seed, t, float(eta), float(rec[t])))
    return out


def _cell_job(args):
    return _cell_records(*args)


def run_sweep(cfg: SweepConfig) -> SweepResult:
    cfg.validate()
    data_full = generate_dataset(
        cfg.data_kind, cfg.input_dim, cfg.data_size, cfg.noise_std,
        RngStream(cfg.data_seed, stream_id("dataset", cfg.data_kind)),
    )
    data = subsample(data_full, cfg.subsample) if cfg.subsample else data_full
    grids = {p: eta_grid_for(cfg, p, data) for p in cfg.params}
    jobs = [(cfg, data, p, w, s, grids[p]) for p in cfg.params for w in cfg.widths for s in cfg.seeds]
    workers = cfg.jobs if cfg.jobs > 0 else (os.cpu_count() or 1)
    if workers <= 1 or len(jobs) <= 1:
        results = [_cell_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_job, jobs))
    records = [r for cell in results for r in cell]
    cells = _summarize(cfg, data, records)
    ratefit = _fit_rate_from_cells(cells)
    return SweepResult(config=cfg, records=records, cells=cells, ratefit=ratefit)


def _summarize(cfg: SweepConfig, data: Dataset, records) -> list:
    theory = None
    if "mup" in cfg.params and cfg.optimizer == "gd" and cfg.activation == "linear" and 1 in cfg.steps:
        try:
            theory = eta_star_one_step(data, cfg.depth)
        except DegenerateDataError:
            theory = None
    cells = []
    for p in cfg.params:
        for w in cfg.widths:
            for t in cfg.steps:
                pool = [r for r in records if (r.param, r.width, r.step) == (p, w, t)]
                per_seed = []
                finite = []
                n_over = 0
                for s in cfg.seeds:
                    sub = [r for r in pool if r.seed == s]
                    n_over += sum(1 for r in sub if not math.isfinite(r.train_loss))
                    finite.extend(r.train_loss for r in sub if math.isfinite(r.train_loss))
                    try:
                        per_seed.append(argmin_lr(sub)[0])
                    except EmptyCellError:
                        pass
                eta_opt = float(np.median(per_seed)) if per_seed else None
                loss_opt = min(finite) if finite else None
                ref = theory if (p == "mup" and t == 1 and theory is not None) else None
                cells.append(CellSummary(
                    param=p, width=w, depth=cfg.depth, step=t,
                    eta_opt=eta_opt, loss_opt=loss_opt, eta_theory=ref, n_overflow=n_over,
                ))
    return cells


def _fit_rate_from_cells(cells) -> RateFit | None:
    pts = [(c.width, abs(c.eta_opt - c.eta_theory))
           for c in cells
           if c.eta_theory is not None and c.eta_opt is not None]
    pts.sort()
    if sum(1 for _, dev in pts if dev > 0) < 3:
        return None
    return convergence_rate_fit([w for w, _ in pts], [d for _, d in pts])


# ---------------------------------------------------------------------------
# persistence


def _fmt_float(x: float) -> str:
    """Shortest decimal that round-trips; inf spelled `inf`."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def write_records_csv(records, path: str) -> None:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.param},{r.width},{r.depth},{r.seed},{r.step},{_fmt_float(r.eta)},{_fmt_float(r.train_loss)}"
        )
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_records_csv(path: str) -> list:
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"bad records CSV header in {path}")
    out = []
    for ln in lines[1:]:
        if not ln:
            continue
        param, width, depth, seed, step, eta, lo = ln.split(",")
        out.append(Record(param, int(width), int(depth), int(seed), int(step), float(eta), float(lo)))
    return out


def canonical_json(obj) -> str:
    """The one JSON writer: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def summary_dict(result: SweepResult) -> dict:
    return {
        "cells": [c.to_dict() for c in result.cells],
        "ratefit": result.ratefit.to_dict() if result.ratefit else None,
    }


def write_summary_json(result: SweepResult, path: str) -> None:
    with open(path, "w") as f:
        f.write(canonical_json(summary_dict(result)))
