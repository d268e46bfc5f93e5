"""Explicit Runge-Kutta stepping: trainable parameterization and classic tableaux.

The trainable integrator (`RknnParams`) keeps unconstrained lower-triangular
stage coefficients and a logit vector whose softmax gives the combination
weights, so the weights always sum to 1 and every parameter draw yields a
consistent method. Classic methods (`ClassicTableau`) carry plain weights.

Stage convention (k absorbs the factor h):

    k_1 = h f(y)
    k_i = h f(y + sum_{j<i} a[i-1, j] k_j)      i = 2..m
    y'  = y + sum_i b_i k_i
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Union

import numpy as np

from . import kernels
from .errors import StepDiverged, StructureError
from .fields import VectorField
from .jets import Jet
from .scalars import Dual, softmax


@dataclass(frozen=True, eq=False)
class ClassicTableau:
    """A fixed explicit RK method: padded lower-triangular a, weights b."""

    label: str
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        m = b.size
        if a.shape != (m - 1, m - 1):
            raise StructureError(
                f"tableau {self.label}: a must be ({m - 1}, {m - 1}), got {a.shape}"
            )
        if abs(b.sum() - 1.0) > 1e-12:
            raise StructureError(
                f"tableau {self.label}: weights sum to {b.sum()!r}, expected 1"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.b.size

    def stage_coeffs(self) -> np.ndarray:
        return self.a

    def weights(self) -> np.ndarray:
        return self.b


class RknnParams:
    """Trainable m-stage integrator parameters.

    `a` is the padded lower-triangular stage-coefficient array (m-1, m-1),
    `z` the m combination logits. Entries are floats during plain evaluation
    or `Dual` scalars (dtype=object) when gradients are being carried.
    Trainable parameter count: m*(m-1)/2 + m, packed row-major a first,
    then z.
    """

    __slots__ = ("m", "a", "z")

    def __init__(self, m: int, a: np.ndarray, z: np.ndarray):
        if m < 1:
            raise StructureError(f"stage count must be >= 1, got {m}")
        a = np.asarray(a)
        z = np.asarray(z)
        if a.shape != (m - 1, m - 1):
            raise StructureError(f"a must have shape ({m - 1}, {m - 1}), got {a.shape}")
        if z.shape != (m,):
            raise StructureError(f"z must have shape ({m},), got {z.shape}")
        self.m = m
        self.a = a if a.dtype == object else a.astype(float)
        self.z = z if z.dtype == object else z.astype(float)

    @property
    def n_params(self) -> int:
        return self.m * (self.m - 1) // 2 + self.m

    @property
    def is_dual(self) -> bool:
        return self.a.dtype == object or self.z.dtype == object

    def stage_coeffs(self) -> np.ndarray:
        return self.a

    def weights(self):
        """Combination weights b = softmax(z); Duals in, Duals out."""
        if self.z.dtype == object:
            return np.array(softmax(list(self.z)), dtype=object)
        return np.asarray(softmax(self.z), dtype=float)

    # --- flat parameter vector <-> structured form -------------------------

    def theta(self) -> np.ndarray:
        """Flat trainable vector: lower-triangular a row-major, then z."""
        if self.is_dual:
            raise StructureError("theta() needs plain float parameters")
        parts = [self.a[i, : i + 1] for i in range(self.m - 1)]
        parts.append(self.z)
        return np.concatenate(parts) if parts else np.array([])

    @staticmethod
    def from_theta(m: int, theta: np.ndarray) -> "RknnParams":
        theta = np.asarray(theta, dtype=float)
        n_tri = m * (m - 1) // 2
        if theta.size != n_tri + m:
            raise StructureError(
                f"theta needs {n_tri + m} entries for m={m}, got {theta.size}"
            )
        a = np.zeros((m - 1, m - 1))
        pos = 0
        for i in range(m - 1):
            a[i, : i + 1] = theta[pos : pos + i + 1]
            pos += i + 1
        return RknnParams(m, a, theta[n_tri:])

    def seeded(self) -> "RknnParams":
        """Dual-valued copy with unit gradient seeds in packing order."""
        if self.is_dual:
            raise StructureError("parameters are already dual-valued")
        p = self.n_params
        a = np.empty((self.m - 1, self.m - 1), dtype=object)
        a[:] = 0.0
        pos = 0
        for i in range(self.m - 1):
            for j in range(i + 1):
                a[i, j] = Dual.seed(self.a[i, j], pos, p)
                pos += 1
        z = np.array(
            [Dual.seed(self.z[i], pos + i, p) for i in range(self.m)], dtype=object
        )
        return RknnParams(self.m, a, z)

    @staticmethod
    def init_random(m: int, rng: np.random.Generator) -> "RknnParams":
        """Training initialization: a ~ U(0,1), logits ~ N(0, 0.1^2)."""
        a = np.zeros((m - 1, m - 1))
        for i in range(m - 1):
            a[i, : i + 1] = rng.uniform(0.0, 1.0, size=i + 1)
        z = rng.normal(0.0, 0.1, size=m)
        return RknnParams(m, a, z)

    def __repr__(self) -> str:
        return f"RknnParams(m={self.m}, dual={self.is_dual})"


Integrator = Union[RknnParams, ClassicTableau]


def _split_scalar_array(arr: np.ndarray, p: int):
    val = np.zeros(arr.shape)
    grad = np.zeros(arr.shape + (p,))
    it = np.nditer(val, flags=["multi_index"])
    for _ in it:
        x = arr[it.multi_index]
        if isinstance(x, Dual):
            val[it.multi_index] = x.value
            grad[it.multi_index] = x.grad
        else:
            val[it.multi_index] = float(x)
    return val, grad


def _dual_arrays(params: Integrator):
    """Split (possibly dual) coefficients into value and gradient arrays."""
    a = params.stage_coeffs()
    b = params.weights()
    p = None
    for x in list(np.ravel(a)) + list(np.ravel(b)):
        if isinstance(x, Dual):
            p = x.p
            break
    if p is None:
        raise StructureError("no dual entries found")
    a_val, a_grad = _split_scalar_array(np.asarray(a, dtype=object), p)
    b_val, b_grad = _split_scalar_array(np.asarray(b, dtype=object), p)
    return a_val, a_grad, b_val, b_grad, p


def _join_vec(val: np.ndarray, grad: np.ndarray) -> np.ndarray:
    return np.array([Dual(v, g) for v, g in zip(val, grad)], dtype=object)


def step(params: Integrator, field: VectorField, y: np.ndarray, h: float):
    """One explicit step from y with step size h.

    Returns a float vector, or a vector of Duals when the parameters carry
    gradients. Raises StepDiverged if the result is non-finite.
    """
    if h < 0:
        raise ValueError(f"step size must be >= 0, got {h}")
    y = np.asarray(y, dtype=float)
    if y.shape != (field.dim,):
        raise StructureError(f"state shape {y.shape} does not match dim {field.dim}")
    dual = isinstance(params, RknnParams) and params.is_dual
    if dual:
        a_val, a_grad, b_val, b_grad, _ = _dual_arrays(params)
        val, grad = kernels.step_dual(
            int(field.kind), field.params, a_val, a_grad, b_val, b_grad, y, h
        )
        if not np.isfinite(val).all():
            raise StepDiverged("non-finite state after one step", 0)
        return _join_vec(val, grad)
    out = kernels.step_tableau(
        int(field.kind), field.params, params.stage_coeffs(), params.weights(), y, h
    )
    if not np.isfinite(out).all():
        raise StepDiverged("non-finite state after one step", 0)
    return out


def step_jet(params: Integrator, field: VectorField, y0: np.ndarray, order: int) -> Jet:
    """The one-step map h -> y' expanded as a jet about h=0.

    Coefficient 0 is y0 and coefficient 1 is f(y0) for any parameters
    (the weights sum to 1), which is what makes every draw consistent.
    """
    if order < 1:
        raise ValueError(f"jet order must be >= 1, got {order}")
    y0 = np.asarray(y0, dtype=float)
    dual = isinstance(params, RknnParams) and params.is_dual
    if dual:
        a_val, a_grad, b_val, b_grad, _ = _dual_arrays(params)
        val, grad = kernels.step_jet_dual(
            int(field.kind), field.params, a_val, a_grad, b_val, b_grad, y0, order
        )
        return Jet([_join_vec(val[k], grad[k]) for k in range(order + 1)])
    coeffs = kernels.step_jet_coeffs(
        int(field.kind), field.params, params.stage_coeffs(), params.weights(),
        y0, order,
    )
    return Jet(list(coeffs))


def integrate(
    params: Integrator, field: VectorField, y0: np.ndarray, h: float, n_steps: int
) -> np.ndarray:
    """Iterate the step map; returns the trajectory (n_steps+1, d)."""
    if n_steps < 0:
        raise ValueError(f"step count must be >= 0, got {n_steps}")
    y0 = np.asarray(y0, dtype=float)
    status, traj = kernels.integrate_tableau(
        int(field.kind), field.params, params.stage_coeffs(), params.weights(),
        y0, h, n_steps,
    )
    if status != kernels.OK:
        raise StepDiverged(f"non-finite state at step {status}", status)
    return traj


# --- classic catalog -------------------------------------------------------

def classic_tableaux() -> List[ClassicTableau]:
    """Euler, the standard RK2, three RK3 parameterizations, classic RK4."""
    return [
        ClassicTableau("euler", np.zeros((0, 0)), np.array([1.0])),
        ClassicTableau("rk2", np.array([[1.0]]), np.array([0.5, 0.5])),
        ClassicTableau(
            "rk3_1",
            np.array([[2.0 / 3.0, 0.0], [-0.5, 0.5]]),
            np.array([-0.25, 0.75, 0.5]),
        ),
        ClassicTableau(
            "rk3_2",
            np.array([[2.0 / 3.0, 0.0], [1.0 / 6.0, 0.5]]),
            np.array([0.25, 0.25, 0.5]),
        ),
        ClassicTableau(
            "rk3_3",
            np.array([[0.5, 0.0], [-1.0, 2.0]]),
            np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]),
        ),
        ClassicTableau(
            "rk4",
            np.array([[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 1.0]]),
            np.array([1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]),
        ),
    ]


_ALIASES = {"rk3": "rk3_3", "rk1": "euler"}


def get_tableau(label: str) -> ClassicTableau:
    name = _ALIASES.get(label, label)
    for t in classic_tableaux():
        if t.label == name:
            return t
    raise KeyError(f"no classic tableau named {label!r}")


def reference_for_order(order: int) -> ClassicTableau:
    """Default loss-scale reference: the classic method of matching order
    (capped at RK4, the highest in the catalog)."""
    if order <= 1:
        return get_tableau("euler")
    if order == 2:
        return get_tableau("rk2")
    if order == 3:
        return get_tableau("rk3_3")
    return get_tableau("rk4")


# --- tableau files ---------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_list(xs) -> str:
    return "[" + ", ".join(_fmt(x) for x in xs) + "]"


def save_tableau(path, params: Integrator, label: str = "") -> None:
    """Write a tableau document: key -> numeric array, 17 significant digits.

    Learned parameters keep their logits (`z`) alongside the derived weights;
    classic tableaux store only the weights.
    """
    m = params.m
    a = np.asarray(params.stage_coeffs(), dtype=float)
    rows = [a[i, : i + 1] for i in range(m - 1)]
    lines = [
        "{",
        f'  "label": {json.dumps(label or getattr(params, "label", ""))},',
        f'  "m": {m},',
        '  "a": [' + ", ".join(_fmt_list(r) for r in rows) + "],",
    ]
    if isinstance(params, RknnParams):
        lines.append(f'  "z": {_fmt_list(np.asarray(params.z, dtype=float))},')
    b = np.asarray(params.weights(), dtype=float)
    lines.append(f'  "b": {_fmt_list(b)}')
    lines.append("}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_tableau(path) -> Integrator:
    """Read a tableau document back; learned files give RknnParams."""
    with open(path) as fh:
        doc = json.load(fh)
    m = int(doc["m"])
    a = np.zeros((m - 1, m - 1))
    for i, row in enumerate(doc["a"]):
        a[i, : len(row)] = row
    if "z" in doc and doc["z"] is not None:
        return RknnParams(m, a, np.asarray(doc["z"], dtype=float))
    return ClassicTableau(doc.get("label", "loaded"), a, np.asarray(doc["b"], float))
