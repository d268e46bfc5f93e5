"""Training: scaled one-step loss, series regularizer, Adam, and the loop.

Each epoch draws a batch of (task, step size) pairs, evaluates

    mean_j [ ||y1 - yhat1||^2 / ||y1 - y1_ref||^2  +  lambda * R ]

where the denominator is one step of a fixed reference tableau and R sums
the squared derivative mismatches of the one-step map against the true
solution at h=0 up to the target order. R is independent of the sampled h:
it only sees the task. Gradients are exact (forward mode, carried through
the kernels), so training is deterministic under a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .errors import StructureError, TrainingFailed
from .fields import TaskFamily, TaskInstance, sample
from .reference import SURROGATE_MARGIN, one_step_truth
from .rk import ClassicTableau, RknnParams, _dual_arrays, get_tableau, reference_for_order
from .scalars import Dual

DENOMINATOR_FLOOR = 1e-30

# Consecutive divergent epochs tolerated before training aborts.
MAX_DIVERGED_EPOCHS = 25


@dataclass
class TrainConfig:
    stages: int
    target_order: int
    h_range: Tuple[float, float] = (0.01, 0.1)
    batch_size: int = 32
    max_iterations: int = 2000
    tolerance: float = 0.0
    regularizer_weight: float = 1.0
    reference: str = "auto"
    surrogate_order: Optional[int] = None
    resample_each_epoch: bool = True
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr_decay: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.stages < 1:
            raise ValueError(f"stages must be >= 1, got {self.stages}")
        if self.target_order < 1:
            raise ValueError(f"target_order must be >= 1, got {self.target_order}")
        lo, hi = self.h_range
        if not (0 < lo < hi):
            raise ValueError(f"h_range must satisfy 0 < min < max, got {self.h_range}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_iterations < 0:
            raise ValueError(f"max_iterations must be >= 0, got {self.max_iterations}")
        if self.tolerance < 0:
            raise ValueError(f"tolerance must be >= 0, got {self.tolerance}")
        if self.regularizer_weight < 0:
            raise ValueError(
                f"regularizer_weight must be >= 0, got {self.regularizer_weight}"
            )
        if self.lr <= 0 or not (0 < self.lr_decay <= 1.0):
            raise ValueError("lr must be > 0 and lr_decay in (0, 1]")

    @property
    def resolved_surrogate_order(self) -> int:
        return self.surrogate_order or self.target_order + SURROGATE_MARGIN

    def resolve_reference(self) -> ClassicTableau:
        if self.reference == "auto":
            return reference_for_order(self.target_order)
        return get_tableau(self.reference)


@dataclass
class EpochRecord:
    epoch: int
    mse: float
    regularizer: float
    gamma: float


@dataclass
class TrainReport:
    params: RknnParams
    history: List[EpochRecord]
    stopping_reason: str  # "tolerance-met" or "max-iterations"

    @property
    def final_gamma(self) -> float:
        finite = [r.gamma for r in self.history if np.isfinite(r.gamma)]
        return finite[-1] if finite else math.inf


def scaled_loss(y_true, y_hat, y_rk, floor: float = DENOMINATOR_FLOOR):
    """||y_true - y_hat||^2 / ||y_true - y_rk||^2, denominator floored.

    Returns a float, or a Dual when y_hat carries Duals.
    """
    y_true = np.asarray(y_true)
    y_hat = np.asarray(y_hat)
    y_rk = np.asarray(y_rk, dtype=float)
    if y_true.shape != y_hat.shape or y_true.shape != y_rk.shape:
        raise StructureError("scaled_loss operands must share one shape")
    den = float(np.sum((np.asarray(y_true, dtype=float) - y_rk) ** 2))
    den = max(den, floor)
    diff = y_true - y_hat
    num = np.sum(diff * diff)
    return num * (1.0 / den)


def taylor_regularizer(
    params: Union[RknnParams, ClassicTableau], task: TaskInstance, alpha: int
):
    """sum_{i=1..alpha} || d^i/dh^i at h=0 of (y1 - yhat1) ||^2.

    Zero exactly when the one-step map matches the solution series through
    order alpha on this task. Returns a Dual when params carry Duals.
    """
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    field = task.field
    sol = kernels.solution_jet_coeffs(int(field.kind), field.params, task.y0, alpha)
    dual = isinstance(params, RknnParams) and params.is_dual
    if dual:
        a_val, a_grad, b_val, b_grad, p = _dual_arrays(params)
        jv, jg = kernels.step_jet_dual(
            int(field.kind), field.params, a_val, a_grad, b_val, b_grad, task.y0, alpha
        )
        value = 0.0
        grad = np.zeros(p)
        for i in range(1, alpha + 1):
            w = float(math.factorial(i)) ** 2
            delta = sol[i] - jv[i]
            value += w * float(delta @ delta)
            grad += w * (-2.0) * (delta @ jg[i])
        return Dual(value, grad)
    coeffs = kernels.step_jet_coeffs(
        int(field.kind), field.params,
        np.asarray(params.stage_coeffs(), dtype=float),
        np.asarray(params.weights(), dtype=float),
        task.y0, alpha,
    )
    value = 0.0
    for i in range(1, alpha + 1):
        delta = sol[i] - coeffs[i]
        value += float(math.factorial(i)) ** 2 * float(delta @ delta)
    return value


@lru_cache(maxsize=None)
def _stage_coeff_seeds(m: int) -> np.ndarray:
    """Unit gradient seeds for the packed lower-triangular coefficients."""
    n_tri = m * (m - 1) // 2
    p = n_tri + m
    grads = np.zeros((max(m - 1, 1), max(m - 1, 1), p))
    pos = 0
    for i in range(m - 1):
        for j in range(i + 1):
            grads[i, j, pos] = 1.0
            pos += 1
    return grads


def _weights_and_jacobian(z: np.ndarray, p: int) -> Tuple[np.ndarray, np.ndarray]:
    """softmax(z) and its Jacobian embedded in the logit slots of theta."""
    m = z.size
    e = np.exp(z - z.max())
    b = e / e.sum()
    grad = np.zeros((m, p))
    grad[:, p - m :] = np.diag(b) - np.outer(b, b)
    return b, grad


Batch = Sequence[Tuple[TaskInstance, float]]


def epoch_objective(
    params: RknnParams,
    batch: Batch,
    reference: ClassicTableau,
    alpha: int,
    regularizer_weight: float = 1.0,
    surrogate_order: Optional[int] = None,
):
    """Mean objective over a batch with its exact gradient.

    Returns (objective, gradient, gamma, mse, regularizer, finite) where
    gamma is the mean scaled loss, mse the mean unscaled squared error and
    regularizer the mean penalty. `finite` is False when any sample
    diverged; the caller should then skip the update.
    """
    if len(batch) == 0:
        raise ValueError("batch must be nonempty")
    m = params.m
    theta = params.theta()
    p = theta.size
    a_val = np.asarray(params.a, dtype=float)
    a_grad = _stage_coeff_seeds(m)
    b_val, b_grad = _weights_and_jacobian(np.asarray(params.z, dtype=float), p)
    n_sur = surrogate_order or alpha + SURROGATE_MARGIN

    n = len(batch)
    loss_sum = 0.0
    mse_sum = 0.0
    reg_sum = 0.0
    grad = np.zeros(p)
    for task, h in batch:
        field = task.field
        kind = int(field.kind)
        y_true = one_step_truth(task, h, n_sur)
        y_rk = kernels.step_tableau(kind, field.params, reference.a, reference.b,
                                    task.y0, h)
        yv, yg = kernels.step_dual(kind, field.params, a_val, a_grad, b_val, b_grad,
                                   task.y0, h)
        den = max(float(np.sum((y_true - y_rk) ** 2)), DENOMINATOR_FLOOR)
        diff = y_true - yv
        sq = float(diff @ diff)
        loss_sum += sq / den
        mse_sum += sq
        grad += (-2.0 / den) * (diff @ yg)

        if regularizer_weight != 0.0:
            sol = kernels.solution_jet_coeffs(kind, field.params, task.y0, alpha)
            jv, jg = kernels.step_jet_dual(kind, field.params, a_val, a_grad,
                                           b_val, b_grad, task.y0, alpha)
            for i in range(1, alpha + 1):
                w = float(math.factorial(i)) ** 2
                delta = sol[i] - jv[i]
                reg_sum += w * float(delta @ delta)
                grad += regularizer_weight * w * (-2.0) * (delta @ jg[i])

    objective = (loss_sum + regularizer_weight * reg_sum) / n
    grad /= n
    gamma = loss_sum / n
    finite = bool(np.isfinite(objective) and np.isfinite(grad).all())
    return objective, grad, gamma, mse_sum / n, reg_sum / n, finite


class Adam:
    """Bias-corrected adaptive-moment update on a flat parameter vector."""

    def __init__(self, theta: np.ndarray, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.theta = np.asarray(theta, dtype=float).copy()
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros_like(self.theta)
        self.v = np.zeros_like(self.theta)
        self.t = 0

    def step(self, grad: np.ndarray, lr: float) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        self.theta = self.theta - lr * m_hat / (np.sqrt(v_hat) + self.eps)
        return self.theta


def draw_batch(
    family: TaskFamily, h_range: Tuple[float, float], size: int,
    rng: np.random.Generator,
) -> List[Tuple[TaskInstance, float]]:
    return [
        (sample(family, rng), float(rng.uniform(h_range[0], h_range[1])))
        for _ in range(size)
    ]


def train(config: TrainConfig, family: TaskFamily) -> TrainReport:
    """Run the training loop and return the learned parameters plus history.

    Stops when the epoch relative error gamma drops below the tolerance or
    when max_iterations epochs have run. A divergent epoch (non-finite
    objective) keeps the previous parameters; training aborts only after
    MAX_DIVERGED_EPOCHS of them in a row.
    """
    config.validate()
    seeds = np.random.SeedSequence(config.seed).spawn(2)
    rng_init = np.random.default_rng(seeds[0])
    rng_data = np.random.default_rng(seeds[1])

    params = RknnParams.init_random(config.stages, rng_init)
    reference = config.resolve_reference()
    opt = Adam(params.theta(), config.beta1, config.beta2, config.eps)

    fixed_batch = None
    if not config.resample_each_epoch:
        fixed_batch = draw_batch(family, config.h_range, config.batch_size, rng_data)

    history: List[EpochRecord] = []
    diverged_streak = 0
    reason = "max-iterations"
    for epoch in range(config.max_iterations):
        batch = fixed_batch
        if batch is None:
            batch = draw_batch(family, config.h_range, config.batch_size, rng_data)
        params = RknnParams.from_theta(config.stages, opt.theta)
        _, grad, gamma, mse, reg, finite = epoch_objective(
            params, batch, reference, config.target_order,
            config.regularizer_weight, config.resolved_surrogate_order,
        )
        if not finite:
            history.append(EpochRecord(epoch, math.inf, math.inf, math.inf))
            diverged_streak += 1
            if diverged_streak >= MAX_DIVERGED_EPOCHS:
                raise TrainingFailed(
                    f"{diverged_streak} consecutive divergent epochs (epoch {epoch})"
                )
            continue
        diverged_streak = 0
        opt.step(grad, config.lr * config.lr_decay**epoch)
        history.append(EpochRecord(epoch, mse, reg, gamma))
        if gamma < config.tolerance:
            reason = "tolerance-met"
            break

    return TrainReport(
        params=RknnParams.from_theta(config.stages, opt.theta),
        history=history,
        stopping_reason=reason,
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_train_report(path, report: TrainReport) -> None:
    """Per-epoch rows: epoch, mse, regularizer, gamma."""
    lines = ["epoch,mse,regularizer,gamma"]
    for r in report.history:
        lines.append(f"{r.epoch},{_fmt(r.mse)},{_fmt(r.regularizer)},{_fmt(r.gamma)}")
    lines.append(f"# stopping_reason={report.stopping_reason}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
