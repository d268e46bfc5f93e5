"""Truncated power series in the step size h.

A `Jet` of order K stores K+1 coefficient vectors of dimension d and stands
for sum_i coeffs[i] * h**i + O(h**(K+1)). The i-th derivative at h=0 is
i! * coeffs[i].

Coefficient vectors are numpy arrays whose entries may be plain floats or
`Dual` scalars (dtype=object); the arithmetic is the same either way, so one
code path serves plain evaluation and gradient-carrying evaluation.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import StructureError


def _as_coeff(vec) -> np.ndarray:
    arr = np.asarray(vec)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.dtype != object:
        arr = arr.astype(float)
    return arr


class Jet:
    """Power series truncated at order K, with d-vector coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = tuple(_as_coeff(c) for c in coeffs)
        if not cs:
            raise StructureError("a jet needs at least the constant coefficient")
        d = cs[0].shape[0]
        if any(c.shape != (d,) for c in cs):
            raise StructureError("jet coefficients must share one dimension")
        self.coeffs = cs

    @staticmethod
    def constant(vec, order: int) -> "Jet":
        """Embed a vector as the h**0 coefficient; higher orders are zero."""
        c0 = _as_coeff(vec)
        zero = np.zeros(c0.shape[0])
        return Jet([c0] + [zero] * order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def dim(self) -> int:
        return self.coeffs[0].shape[0]

    def _check_match(self, other: "Jet") -> None:
        if self.order != other.order:
            raise StructureError(
                f"jet order mismatch: {self.order} vs {other.order}"
            )
        if self.dim != other.dim:
            raise StructureError(f"jet dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "Jet") -> "Jet":
        self._check_match(other)
        return Jet([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "Jet") -> "Jet":
        self._check_match(other)
        return Jet([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def scale(self, c) -> "Jet":
        """Multiply by a scalar (float or Dual)."""
        if isinstance(c, (int, float)):
            return Jet([c * a for a in self.coeffs])
        return Jet(
            [np.array([c * x for x in a], dtype=object) for a in self.coeffs]
        )

    def __mul__(self, other: "Jet") -> "Jet":
        """Componentwise Cauchy product, truncated at the common order."""
        self._check_match(other)
        out = []
        for k in range(self.order + 1):
            acc = self.coeffs[0] * other.coeffs[k]
            for j in range(1, k + 1):
                acc = acc + self.coeffs[j] * other.coeffs[k - j]
            out.append(acc)
        return Jet(out)

    def shift(self) -> "Jet":
        """Multiply by h: coefficients move up one slot, the top one drops."""
        zero = np.zeros(self.dim)
        return Jet([zero] + [c for c in self.coeffs[:-1]])

    def derivative_at_zero(self, i: int) -> np.ndarray:
        """i-th derivative of the series at h=0, i.e. i! * coeffs[i]."""
        if i < 0 or i > self.order:
            raise StructureError(
                f"derivative order {i} outside truncation order {self.order}"
            )
        return math.factorial(i) * self.coeffs[i]

    def component(self, i: int) -> "Jet":
        """The scalar series of component i, as a dimension-1 jet."""
        if i < 0 or i >= self.dim:
            raise StructureError(f"component {i} out of range for dim {self.dim}")
        return Jet([c[i : i + 1] for c in self.coeffs])

    @staticmethod
    def from_components(parts: Sequence["Jet"]) -> "Jet":
        """Stack dimension-1 jets into one d-dimensional jet."""
        if not parts:
            raise StructureError("no components given")
        order = parts[0].order
        if any(p.order != order or p.dim != 1 for p in parts):
            raise StructureError("components must be dimension-1 jets of equal order")
        out = []
        for k in range(order + 1):
            vals = [p.coeffs[k][0] for p in parts]
            dtype = object if any(not isinstance(v, float) for v in vals) else float
            out.append(np.array(vals, dtype=dtype))
        return Jet(out)

    def eval_at(self, h: float) -> np.ndarray:
        """Evaluate the truncated series at step size h (Horner scheme)."""
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * h + c
        return acc

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, dim={self.dim})"
