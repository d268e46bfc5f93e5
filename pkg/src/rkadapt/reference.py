"""Ground-truth solutions.

Three truth sources, in the order the rest of the package prefers them:
closed forms where the family has one, the series surrogate built from the
field alone (one-step losses), and a fine-step classic RK4 run for
multi-step evaluation horizons. `fine_reference` divides the evaluation
step by `ratio` (default 100), putting its own error floor far below any
integrator under test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import DivergedReference, NoClosedForm
from .fields import FieldKind, TaskInstance
from .jets import Jet
from .rk import get_tableau

DEFAULT_FINE_RATIO = 100

# Surrogate truncation default: target order plus this margin, so the
# surrogate's own error stays far below the step error being measured.
SURROGATE_MARGIN = 3


@dataclass(frozen=True)
class TruthSpec:
    """How to obtain the true solution for an evaluation.

    mode: "auto" (closed form if available, else fine reference),
    "closed_form", "fine_reference", or "taylor_surrogate" (one-step use).
    """

    mode: str = "auto"
    surrogate_order: Optional[int] = None
    fine_ratio: int = DEFAULT_FINE_RATIO

    def __post_init__(self):
        if self.mode not in ("auto", "closed_form", "fine_reference", "taylor_surrogate"):
            raise ValueError(f"unknown truth mode {self.mode!r}")
        if self.fine_ratio < 10:
            raise ValueError(f"fine_ratio must be >= 10, got {self.fine_ratio}")


def has_closed_form(task: TaskInstance) -> bool:
    return task.field.kind in (FieldKind.LINEAR1D, FieldKind.SQUARE1D)


def closed_form(task: TaskInstance, t: float) -> np.ndarray:
    """Exact solution value at time t for the families that have one."""
    kind = task.field.kind
    a = task.field.params[0] if task.field.params.size else 0.0
    if kind == FieldKind.LINEAR1D:
        return np.exp(-a * t) * task.y0
    if kind == FieldKind.SQUARE1D:
        return 1.0 / (a * t + 1.0 / task.y0)
    raise NoClosedForm(f"no closed form for field kind {kind.name}")


def solution_jet(task: TaskInstance, order: int) -> Jet:
    """Series of the true solution about t=0, truncated at `order`.

    Coefficient 0 is y0; the rest follow the recurrence
    (m+1) c[m+1] = (coefficient m of f evaluated on the series).
    """
    if order < 1:
        raise ValueError(f"surrogate order must be >= 1, got {order}")
    coeffs = kernels.solution_jet_coeffs(
        int(task.field.kind), task.field.params, task.y0, order
    )
    return Jet(list(coeffs))


_RK4 = get_tableau("rk4")


def fine_reference(
    task: TaskInstance, t_end: float, h_eval: float, ratio: int = DEFAULT_FINE_RATIO
) -> np.ndarray:
    """Classic RK4 with step h_eval/ratio, landing exactly on t_end."""
    if t_end < 0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")
    if t_end == 0.0:
        return task.y0.copy()
    n_fine = max(1, round(ratio * t_end / h_eval))
    h_fine = t_end / n_fine
    status, y = kernels.integrate_final(
        int(task.field.kind), task.field.params, _RK4.a, _RK4.b,
        task.y0, h_fine, n_fine,
    )
    if status != kernels.OK:
        raise DivergedReference(
            f"fine reference diverged at fine step {status} (t_end={t_end})"
        )
    return y


def truth_value(
    task: TaskInstance, t: float, h_eval: float, spec: TruthSpec
) -> np.ndarray:
    """The reference solution at time t under the given truth spec."""
    mode = spec.mode
    if mode == "auto":
        mode = "closed_form" if has_closed_form(task) else "fine_reference"
    if mode == "closed_form":
        return closed_form(task, t)
    if mode == "fine_reference":
        return fine_reference(task, t, h_eval, spec.fine_ratio)
    # taylor_surrogate: series about t=0, meaningful for one-step horizons
    order = spec.surrogate_order or 8
    return solution_jet(task, order).eval_at(t)


def one_step_truth(task: TaskInstance, h: float, surrogate_order: int) -> np.ndarray:
    """Truth for one-step training losses: closed form, else the surrogate."""
    if has_closed_form(task):
        return closed_form(task, h)
    return solution_jet(task, surrogate_order).eval_at(h)
