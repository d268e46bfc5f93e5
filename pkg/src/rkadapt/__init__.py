"""rkadapt: learn explicit Runge-Kutta integrators adapted to ODE task families.

The library trains the coefficients of an m-stage explicit RK scheme on a
distribution of tasks (vector field + initial condition + step size),
minimizing a scaled one-step loss plus a series-based regularizer that
promotes a target order of accuracy, and verifies the result with
convergence-order and relative-error sweeps against classic RK methods.
"""

__version__ = "0.1.0"

from . import kernels
from .errors import (
    ConfigError,
    DivergedReference,
    FitUnderdetermined,
    NoClosedForm,
    RkadaptError,
    StepDiverged,
    StructureError,
    TrainingFailed,
)
from .fields import (
    FieldKind,
    TaskFamily,
    TaskInstance,
    VectorField,
    brusselator_family,
    eval_field,
    eval_field_jet,
    linear_family,
    linear_nd_family,
    nonlinear_nd_family,
    sample,
    square_family,
    van_der_pol_family,
)
from .jets import Jet
from .reference import TruthSpec, closed_form, fine_reference, solution_jet
from .rk import (
    ClassicTableau,
    RknnParams,
    classic_tableaux,
    get_tableau,
    integrate,
    load_tableau,
    save_tableau,
    step,
    step_jet,
)
from .scalars import Dual, softmax
from .training import (
    Adam,
    TrainConfig,
    TrainReport,
    epoch_objective,
    scaled_loss,
    taylor_regularizer,
    train,
)
from .evaluation import (
    EvalGrid,
    EvalReport,
    global_error,
    log_grid,
    order_fit,
    relative_error_sweep,
    scaling_benchmark,
)

__all__ = [
    "__version__",
    "kernels",
    # errors
    "RkadaptError", "StructureError", "NoClosedForm", "DivergedReference",
    "StepDiverged", "FitUnderdetermined", "TrainingFailed", "ConfigError",
    # scalars / jets
    "Dual", "softmax", "Jet",
    # fields
    "FieldKind", "VectorField", "TaskInstance", "TaskFamily",
    "eval_field", "eval_field_jet", "sample",
    "linear_family", "square_family", "van_der_pol_family",
    "brusselator_family", "linear_nd_family", "nonlinear_nd_family",
    # reference
    "TruthSpec", "closed_form", "solution_jet", "fine_reference",
    # rk
    "RknnParams", "ClassicTableau", "classic_tableaux", "get_tableau",
    "step", "step_jet", "integrate", "save_tableau", "load_tableau",
    # training
    "TrainConfig", "TrainReport", "Adam", "scaled_loss",
    "taylor_regularizer", "epoch_objective", "train",
    # evaluation
    "EvalGrid", "EvalReport", "log_grid", "global_error", "order_fit",
    "relative_error_sweep", "scaling_benchmark",
]
