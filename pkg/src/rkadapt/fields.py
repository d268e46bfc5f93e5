"""Task families: parameterized vector fields with sampling distributions.

Every field is polynomial in y, so it can be evaluated both on plain vectors
and on jets (truncated series). Families carry uniform ranges for the field
parameters and the initial condition; sampling needs an externally supplied
RNG, there is no hidden global state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from .errors import StructureError
from .jets import Jet


class FieldKind(enum.IntEnum):
    """Integer values are shared with the kernel lanes; do not reorder."""

    LINEAR1D = 0
    SQUARE1D = 1
    VAN_DER_POL = 2
    BRUSSELATOR = 3
    LINEAR_ND = 4
    NONLINEAR_ND = 5


KIND_NAMES = {
    "linear": FieldKind.LINEAR1D,
    "square": FieldKind.SQUARE1D,
    "van_der_pol": FieldKind.VAN_DER_POL,
    "brusselator": FieldKind.BRUSSELATOR,
    "linear_nd": FieldKind.LINEAR_ND,
    "nonlinear_nd": FieldKind.NONLINEAR_ND,
}


@dataclass(frozen=True, eq=False)
class VectorField:
    """A concrete right-hand side f with its packed kernel parameters."""

    kind: FieldKind
    params: np.ndarray
    dim: int


def linear1d(a: float) -> VectorField:
    """f(y) = -a*y with a > 0 (stable)."""
    if a <= 0:
        raise ValueError(f"linear field needs a > 0, got {a}")
    return VectorField(FieldKind.LINEAR1D, np.array([a], dtype=float), 1)


def square1d(a: float) -> VectorField:
    """f(y) = -a*y**2 with a > 0."""
    if a <= 0:
        raise ValueError(f"square field needs a > 0, got {a}")
    return VectorField(FieldKind.SQUARE1D, np.array([a], dtype=float), 1)


def van_der_pol(a: float) -> VectorField:
    """f(u, v) = (v, a*(1-u**2)*v - u); a sets the damping strength."""
    return VectorField(FieldKind.VAN_DER_POL, np.array([a], dtype=float), 2)


def brusselator(a: float, b: float) -> VectorField:
    """f(u, v) = (1-(b+1)*u+a*u**2*v, b*u-a*u**2*v) with a, b > 0."""
    if a <= 0 or b <= 0:
        raise ValueError(f"brusselator needs a, b > 0, got a={a}, b={b}")
    return VectorField(FieldKind.BRUSSELATOR, np.array([a, b], dtype=float), 2)


def linear_nd(matrix: np.ndarray) -> VectorField:
    """f(y) = A @ y for a square matrix A."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"linear_nd needs a square matrix, got shape {m.shape}")
    return VectorField(FieldKind.LINEAR_ND, m.ravel().copy(), m.shape[0])


def nonlinear_nd(diag: np.ndarray) -> VectorField:
    """f(y)_i = B_ii * y_i**2 for a diagonal B given by its diagonal."""
    d = np.asarray(diag, dtype=float).ravel()
    if d.size == 0:
        raise ValueError("nonlinear_nd needs a nonempty diagonal")
    return VectorField(FieldKind.NONLINEAR_ND, d.copy(), d.size)


def _vec(components, template: np.ndarray) -> np.ndarray:
    dtype = object if template.dtype == object else float
    return np.array(components, dtype=dtype)


def eval_field(field: VectorField, y: np.ndarray) -> np.ndarray:
    """Evaluate f(y). Works on float vectors and on vectors of Duals."""
    y = np.asarray(y)
    if y.shape != (field.dim,):
        raise StructureError(
            f"state has shape {y.shape}, field expects ({field.dim},)"
        )
    p = field.params
    k = field.kind
    if k == FieldKind.LINEAR1D:
        return -p[0] * y
    if k == FieldKind.SQUARE1D:
        return -p[0] * (y * y)
    if k == FieldKind.VAN_DER_POL:
        u, v = y[0], y[1]
        return _vec([v, p[0] * (1.0 - u * u) * v - u], y)
    if k == FieldKind.BRUSSELATOR:
        a, b = p[0], p[1]
        u, v = y[0], y[1]
        uuv = u * u * v
        return _vec([1.0 - (b + 1.0) * u + a * uuv, b * u - a * uuv], y)
    if k == FieldKind.LINEAR_ND:
        return p.reshape(field.dim, field.dim).dot(y)
    if k == FieldKind.NONLINEAR_ND:
        return p * (y * y)
    raise StructureError(f"unknown field kind {k}")


def eval_field_jet(field: VectorField, y: Jet) -> Jet:
    """Evaluate f on a jet with the same formulas, truncated at y.order."""
    if y.dim != field.dim:
        raise StructureError(
            f"jet has dimension {y.dim}, field expects {field.dim}"
        )
    p = field.params
    k = field.kind
    if k == FieldKind.LINEAR1D:
        return y.scale(-p[0])
    if k == FieldKind.SQUARE1D:
        return (y * y).scale(-p[0])
    if k == FieldKind.VAN_DER_POL:
        u, v = y.component(0), y.component(1)
        uuv = (u * u) * v
        f1 = v.scale(p[0]) - uuv.scale(p[0]) - u
        return Jet.from_components([v, f1])
    if k == FieldKind.BRUSSELATOR:
        a, b = p[0], p[1]
        u, v = y.component(0), y.component(1)
        uuv = (u * u) * v
        one = Jet.constant([1.0], y.order)
        f0 = one - u.scale(b + 1.0) + uuv.scale(a)
        f1 = u.scale(b) - uuv.scale(a)
        return Jet.from_components([f0, f1])
    if k == FieldKind.LINEAR_ND:
        mat = p.reshape(field.dim, field.dim)
        return Jet([mat.dot(c) for c in y.coeffs])
    if k == FieldKind.NONLINEAR_ND:
        yy = y * y
        return Jet([p * c for c in yy.coeffs])
    raise StructureError(f"unknown field kind {k}")


@dataclass(frozen=True, eq=False)
class TaskInstance:
    """One problem: a concrete vector field plus its initial condition."""

    field: VectorField
    y0: np.ndarray

    def __post_init__(self):
        y0 = np.asarray(self.y0, dtype=float).ravel()
        object.__setattr__(self, "y0", y0)
        if y0.shape != (self.field.dim,):
            raise StructureError(
                f"initial condition has shape {y0.shape}, "
                f"field expects ({self.field.dim},)"
            )


def _check_range(name: str, rng: Sequence[float]) -> tuple:
    lo, hi = float(rng[0]), float(rng[1])
    if not (lo <= hi) or not np.isfinite([lo, hi]).all():
        raise ValueError(f"{name}: empty or inverted range ({lo}, {hi})")
    return lo, hi


@dataclass(frozen=True)
class TaskFamily:
    """A distribution over task instances: uniform parameter and y0 ranges.

    For LINEAR_ND / NONLINEAR_ND the per-entry parameter distributions are
    fixed by the construction (see the family constructors); `param_ranges`
    then stays empty.
    """

    kind: FieldKind
    dim: int = 1
    param_ranges: dict = dc_field(default_factory=dict)
    y0_ranges: tuple = ()

    def __post_init__(self):
        for name, rng in self.param_ranges.items():
            _check_range(f"param {name}", rng)
        for i, rng in enumerate(self.y0_ranges):
            _check_range(f"y0[{i}]", rng)
        if self.kind in (FieldKind.LINEAR1D, FieldKind.SQUARE1D):
            lo = self.param_ranges["a"][0]
            if lo <= 0:
                raise ValueError(f"family needs a > 0, range starts at {lo}")
        if self.kind == FieldKind.BRUSSELATOR:
            for name in ("a", "b"):
                if self.param_ranges[name][0] <= 0:
                    raise ValueError(f"brusselator family needs {name} > 0")


def linear_family(a=(1.0, 5.0), y0=(-5.0, 5.0)) -> TaskFamily:
    return TaskFamily(FieldKind.LINEAR1D, 1, {"a": tuple(a)}, (tuple(y0),))


def square_family(a=(0.1, 0.5), y0=(1.0, 3.0)) -> TaskFamily:
    return TaskFamily(FieldKind.SQUARE1D, 1, {"a": tuple(a)}, (tuple(y0),))


def van_der_pol_family(a=(1.0, 2.0), u0=(-4.0, -3.0), v0=(0.0, 2.0)) -> TaskFamily:
    return TaskFamily(
        FieldKind.VAN_DER_POL, 2, {"a": tuple(a)}, (tuple(u0), tuple(v0))
    )


def brusselator_family(
    a=(1.0, 1.0), b=(0.5, 2.0), u0=(1.5, 3.0), v0=(2.0, 3.0)
) -> TaskFamily:
    return TaskFamily(
        FieldKind.BRUSSELATOR,
        2,
        {"a": tuple(a), "b": tuple(b)},
        (tuple(u0), tuple(v0)),
    )


def linear_nd_family(dim: int, y0=(-3.0, 3.0)) -> TaskFamily:
    """Random stable-ish matrices: entries i.i.d. U(-2/sqrt(d), -1/sqrt(d))."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return TaskFamily(FieldKind.LINEAR_ND, dim, {}, (tuple(y0),) * dim)


def nonlinear_nd_family(dim: int, y0=(1.0, 3.0)) -> TaskFamily:
    """Diagonal quadratic fields: B_ii ~ U(-2+0.05*(i-1), -2+0.05*(i+1))."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return TaskFamily(FieldKind.NONLINEAR_ND, dim, {}, (tuple(y0),) * dim)


def family_for(kind: FieldKind, dim: int = 1) -> TaskFamily:
    """The default (paper-range) family for a kind."""
    if kind == FieldKind.LINEAR1D:
        return linear_family()
    if kind == FieldKind.SQUARE1D:
        return square_family()
    if kind == FieldKind.VAN_DER_POL:
        return van_der_pol_family()
    if kind == FieldKind.BRUSSELATOR:
        return brusselator_family()
    if kind == FieldKind.LINEAR_ND:
        return linear_nd_family(dim)
    if kind == FieldKind.NONLINEAR_ND:
        return nonlinear_nd_family(dim)
    raise ValueError(f"unknown kind {kind}")


def sample(family: TaskFamily, rng: np.random.Generator) -> TaskInstance:
    """Draw one instance. Deterministic under a fixed generator state.

    Draw order is fixed per kind: field parameters first (alphabetical for
    the named ones, row-major for matrices), then initial-condition
    components in order.
    """
    k = family.kind
    if k in (FieldKind.LINEAR1D, FieldKind.SQUARE1D):
        a = rng.uniform(*family.param_ranges["a"])
        y0 = np.array([rng.uniform(*family.y0_ranges[0])])
        fld = linear1d(a) if k == FieldKind.LINEAR1D else square1d(a)
        return TaskInstance(fld, y0)
    if k == FieldKind.VAN_DER_POL:
        a = rng.uniform(*family.param_ranges["a"])
        y0 = np.array([rng.uniform(*r) for r in family.y0_ranges])
        return TaskInstance(van_der_pol(a), y0)
    if k == FieldKind.BRUSSELATOR:
        a = rng.uniform(*family.param_ranges["a"])
        b = rng.uniform(*family.param_ranges["b"])
        y0 = np.array([rng.uniform(*r) for r in family.y0_ranges])
        return TaskInstance(brusselator(a, b), y0)
    if k == FieldKind.LINEAR_ND:
        d = family.dim
        scale = 1.0 / np.sqrt(d)
        mat = rng.uniform(-2.0 * scale, -1.0 * scale, size=(d, d))
        y0 = np.array([rng.uniform(*r) for r in family.y0_ranges])
        return TaskInstance(linear_nd(mat), y0)
    if k == FieldKind.NONLINEAR_ND:
        d = family.dim
        idx = np.arange(d, dtype=float)
        diag = rng.uniform(-2.0 + 0.05 * idx, -2.0 + 0.05 * (idx + 2.0))
        y0 = np.array([rng.uniform(*r) for r in family.y0_ranges])
        return TaskInstance(nonlinear_nd(diag), y0)
    raise ValueError(f"unknown kind {k}")
