"""Evaluation: global-error grids, convergence-order fits, relative errors.

Global error at a grid point is measured after n = round(T/h) steps against
the truth at the realized time n*h, so the integrator under test, the
reference integrator and the truth all meet at the same instant. Ratios are
aggregated as geometric means with a min/max band over the sampled tasks.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field as dc_field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import FitUnderdetermined
from .fields import (
    FieldKind,
    TaskFamily,
    linear_nd_family,
    nonlinear_nd_family,
    sample,
)
from .reference import TruthSpec, truth_value
from .rk import ClassicTableau, Integrator
from .training import TrainConfig, train


def log_grid(h_min: float, h_max: float, points: int) -> Tuple[float, ...]:
    """Log-spaced step sizes, ascending."""
    if not (0 < h_min < h_max) or points < 2:
        raise ValueError(f"bad grid ({h_min}, {h_max}, {points})")
    return tuple(np.geomspace(h_min, h_max, points))


@dataclass(frozen=True)
class EvalGrid:
    h_values: Tuple[float, ...]
    horizon: float
    tasks_per_h: int = 50
    truth: TruthSpec = dc_field(default_factory=TruthSpec)

    def __post_init__(self):
        hs = tuple(float(h) for h in self.h_values)
        object.__setattr__(self, "h_values", hs)
        if not hs or any(h <= 0 for h in hs):
            raise ValueError("all step sizes must be positive")
        if self.horizon <= 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")
        if any(round(self.horizon / h) < 1 for h in hs):
            raise ValueError("grid contains h with round(T/h) < 1")
        if self.tasks_per_h < 1:
            raise ValueError("tasks_per_h must be >= 1")


def global_error(
    integrator: Integrator, task, h: float, horizon: float, truth: TruthSpec
) -> float:
    """||y_n - truth(n*h)|| after n = round(T/h) steps; +inf on divergence."""
    n = max(1, round(horizon / h))
    field = task.field
    status, y = kernels.integrate_final(
        int(field.kind), field.params,
        np.asarray(integrator.stage_coeffs(), dtype=float),
        np.asarray(integrator.weights(), dtype=float),
        task.y0, h, n,
    )
    if status != kernels.OK:
        return math.inf
    ref = truth_value(task, n * h, h, truth)
    return float(np.linalg.norm(y - ref))


@dataclass(frozen=True)
class OrderFit:
    slope: float
    intercept: float
    max_residual: float


def order_fit(pairs: Sequence[Tuple[float, float]]) -> OrderFit:
    """Least-squares line through (log h, log E).

    Nonpositive or non-finite errors are excluded with a warning; fewer than
    three usable points raise FitUnderdetermined.
    """
    usable = [(h, e) for h, e in pairs if e > 0 and math.isfinite(e)]
    dropped = len(pairs) - len(usable)
    if dropped:
        warnings.warn(f"order_fit: {dropped} nonpositive/non-finite errors excluded")
    if len(usable) < 3:
        raise FitUnderdetermined(
            f"need >= 3 usable points for a slope fit, have {len(usable)}"
        )
    x = np.log([h for h, _ in usable])
    y = np.log([e for _, e in usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = np.abs(y - (slope * x + intercept)).max()
    return OrderFit(float(slope), float(intercept), float(resid))


def _gmean(values: np.ndarray) -> float:
    return float(np.exp(np.mean(np.log(values)))) if values.size else math.inf


@dataclass
class EvalReport:
    """Per-h aggregates of a sweep; raw per-(task, h) errors kept alongside."""

    h_values: Tuple[float, ...]
    errors_nn: np.ndarray  # (tasks_per_h, len(h_values)), +inf on divergence
    errors_ref: np.ndarray
    e_nn_gmean: np.ndarray
    e_ref_gmean: np.ndarray
    ratio_gmean: np.ndarray
    ratio_min: np.ndarray
    ratio_max: np.ndarray
    slope_nn: float
    slope_ref: float
    excluded: int


def relative_error_sweep(
    integrator: Integrator,
    reference: ClassicTableau,
    family: TaskFamily,
    grid: EvalGrid,
    rng: np.random.Generator,
) -> EvalReport:
    """Global errors of `integrator` and `reference` on shared tasks/truth.

    Per h: sample tasks, compute both global errors against the identical
    truth value, and aggregate the ratio E_int/E_ref as a geometric mean
    with its min/max band. Infinite or zero entries are excluded from the
    aggregates and counted.
    """
    nh = len(grid.h_values)
    nt = grid.tasks_per_h
    e_nn = np.empty((nt, nh))
    e_ref = np.empty((nt, nh))
    for col, h in enumerate(grid.h_values):
        for row in range(nt):
            task = sample(family, rng)
            e_nn[row, col] = global_error(integrator, task, h, grid.horizon, grid.truth)
            e_ref[row, col] = global_error(reference, task, h, grid.horizon, grid.truth)

    ratio = e_nn / e_ref
    excluded = 0
    gm_nn = np.empty(nh)
    gm_ref = np.empty(nh)
    gm_ratio = np.empty(nh)
    r_min = np.empty(nh)
    r_max = np.empty(nh)
    for col in range(nh):
        ok = np.isfinite(ratio[:, col]) & (ratio[:, col] > 0)
        excluded += int(nt - ok.sum())
        gm_nn[col] = _gmean(e_nn[ok, col])
        gm_ref[col] = _gmean(e_ref[ok, col])
        gm_ratio[col] = _gmean(ratio[ok, col])
        r_min[col] = ratio[ok, col].min() if ok.any() else math.inf
        r_max[col] = ratio[ok, col].max() if ok.any() else math.inf

    slope_nn = order_fit(list(zip(grid.h_values, gm_nn))).slope
    slope_ref = order_fit(list(zip(grid.h_values, gm_ref))).slope
    return EvalReport(
        h_values=grid.h_values,
        errors_nn=e_nn,
        errors_ref=e_ref,
        e_nn_gmean=gm_nn,
        e_ref_gmean=gm_ref,
        ratio_gmean=gm_ratio,
        ratio_min=r_min,
        ratio_max=r_max,
        slope_nn=slope_nn,
        slope_ref=slope_ref,
        excluded=excluded,
    )


def error_sweep(
    integrator: Integrator,
    family: TaskFamily,
    grid: EvalGrid,
    rng: np.random.Generator,
):
    """Per-h geometric mean / min / max of the global error, plus the fit."""
    nh = len(grid.h_values)
    errs = np.empty((grid.tasks_per_h, nh))
    for col, h in enumerate(grid.h_values):
        for row in range(grid.tasks_per_h):
            task = sample(family, rng)
            errs[row, col] = global_error(integrator, task, h, grid.horizon, grid.truth)
    gmean = np.array([_gmean(errs[np.isfinite(errs[:, c]), c]) for c in range(nh)])
    fit = order_fit(list(zip(grid.h_values, gmean)))
    return errs, gmean, fit


def generalization_sweep(
    integrator: Integrator,
    reference: ClassicTableau,
    variants: Sequence[Tuple[str, TaskFamily, EvalGrid]],
    rng: np.random.Generator,
) -> Dict[str, EvalReport]:
    """Run relative_error_sweep over named (family, grid) variants."""
    return {
        name: relative_error_sweep(integrator, reference, fam, grid, rng)
        for name, fam, grid in variants
    }


# --- training-time scaling ---------------------------------------------------

@dataclass
class ScalingReport:
    dims: Tuple[int, ...]
    seconds_per_epoch: Tuple[float, ...]
    exponent: float
    within_expected_range: bool  # [0.5, 2.5], hardware-dependent


def fit_exponent(dims: Sequence[int], times: Sequence[float]) -> float:
    """Log-log slope of wall time against dimension."""
    return order_fit(list(zip([float(d) for d in dims], list(times)))).slope


def scaling_benchmark(
    dims: Sequence[int],
    kind: FieldKind,
    base: Optional[TrainConfig] = None,
    epochs: int = 10,
    seed: int = 0,
) -> ScalingReport:
    """Wall time of one training epoch as the task dimension grows.

    Runs a short and a longer training at each dimension and differences the
    wall times, which cancels the fixed setup cost.
    """
    if list(dims) != sorted(dims) or len(dims) < 2:
        raise ValueError("dims must be ascending with at least two entries")
    if kind not in (FieldKind.LINEAR_ND, FieldKind.NONLINEAR_ND):
        raise ValueError("scaling benchmark uses the *_nd families")
    if base is None:
        base = TrainConfig(stages=3, target_order=3, max_iterations=0, seed=seed)
    times = []
    for d in dims:
        family = (
            linear_nd_family(d)
            if kind == FieldKind.LINEAR_ND
            else nonlinear_nd_family(d)
        )
        short = replace(base, max_iterations=2, seed=seed)
        longer = replace(base, max_iterations=2 + epochs, seed=seed)
        t0 = time.perf_counter()
        train(short, family)
        t1 = time.perf_counter()
        train(longer, family)
        t2 = time.perf_counter()
        times.append(max((t2 - t1) - (t1 - t0), 1e-9) / epochs)
    exponent = fit_exponent(dims, times)
    return ScalingReport(
        dims=tuple(int(d) for d in dims),
        seconds_per_epoch=tuple(times),
        exponent=exponent,
        within_expected_range=0.5 <= exponent <= 2.5,
    )


# --- CSV output ---------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_sweep_csv(path, report: EvalReport) -> None:
    lines = ["h,e_nn_gmean,e_rk_gmean,ratio_gmean,ratio_min,ratio_max,slope_nn,slope_rk"]
    for i, h in enumerate(report.h_values):
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    h,
                    report.e_nn_gmean[i],
                    report.e_ref_gmean[i],
                    report.ratio_gmean[i],
                    report.ratio_min[i],
                    report.ratio_max[i],
                    report.slope_nn,
                    report.slope_ref,
                )
            )
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_error_csv(path, h_values, errs: np.ndarray, gmean, fit: OrderFit) -> None:
    lines = ["h,e_gmean,e_min,e_max,slope"]
    for i, h in enumerate(h_values):
        col = errs[:, i]
        col = col[np.isfinite(col)]
        lines.append(
            ",".join(
                _fmt(v)
                for v in (h, gmean[i], col.min(initial=math.inf),
                          col.max(initial=0.0), fit.slope)
            )
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_scaling_csv(path, report: ScalingReport) -> None:
    lines = ["dim,seconds_per_epoch,exponent"]
    for d, t in zip(report.dims, report.seconds_per_epoch):
        lines.append(f"{d},{_fmt(t)},{_fmt(report.exponent)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
