"""Forward-mode differentiation scalars.

A `Dual` carries a value together with its gradient with respect to a fixed
set of P trainable parameters. All arithmetic propagates exact first
derivatives, so anything computed from seeded parameters (integrator steps,
series coefficients, losses) comes out with its gradient attached.

The parameter count P is fixed when a Dual is created; mixing Duals of
different P in one expression is an error.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

from .errors import StructureError

Number = Union[int, float]


class Dual:
    """Scalar with an attached gradient vector of fixed length P."""

    __slots__ = ("value", "grad")

    def __init__(self, value: Number, grad: np.ndarray):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)

    @staticmethod
    def constant(value: Number, p: int) -> "Dual":
        return Dual(value, np.zeros(p))

    @staticmethod
    def seed(value: Number, index: int, p: int) -> "Dual":
        """Parameter number `index`: gradient is the index-th unit vector."""
        g = np.zeros(p)
        g[index] = 1.0
        return Dual(value, g)

    @property
    def p(self) -> int:
        return self.grad.shape[0]

    def _lift(self, other) -> "Dual":
        if isinstance(other, Dual):
            if other.grad.shape != self.grad.shape:
                raise StructureError(
                    f"gradient length mismatch: {other.p} vs {self.p}"
                )
            return other
        return Dual(other, np.zeros(self.grad.shape[0]))

    def __add__(self, other) -> "Dual":
        if isinstance(other, np.ndarray):
            return NotImplemented  # let numpy broadcast elementwise
        o = self._lift(other)
        return Dual(self.value + o.value, self.grad + o.grad)

    __radd__ = __add__

    def __sub__(self, other) -> "Dual":
        if isinstance(other, np.ndarray):
            return NotImplemented
        o = self._lift(other)
        return Dual(self.value - o.value, self.grad - o.grad)

    def __rsub__(self, other) -> "Dual":
        if isinstance(other, np.ndarray):
            return NotImplemented
        o = self._lift(other)
        return Dual(o.value - self.value, o.grad - self.grad)

    def __mul__(self, other) -> "Dual":
        if isinstance(other, np.ndarray):
            return NotImplemented
        o = self._lift(other)
        return Dual(self.value * o.value, self.value * o.grad + o.value * self.grad)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Dual":
        if isinstance(other, np.ndarray):
            return NotImplemented
        o = self._lift(other)
        if o.value == 0.0:
            raise ZeroDivisionError("Dual division by zero value")
        inv = 1.0 / o.value
        return Dual(
            self.value * inv,
            (self.grad * o.value - self.value * o.grad) * (inv * inv),
        )

    def __rtruediv__(self, other) -> "Dual":
        if isinstance(other, np.ndarray):
            return NotImplemented
        return self._lift(other).__truediv__(self)

    def __neg__(self) -> "Dual":
        return Dual(-self.value, -self.grad)

    def __pow__(self, exponent: int) -> "Dual":
        if not isinstance(exponent, int) or exponent < 0:
            raise TypeError("only non-negative integer powers are supported")
        out = Dual.constant(1.0, self.p)
        for _ in range(exponent):
            out = out * self
        return out

    def exp(self) -> "Dual":
        e = math.exp(self.value)
        return Dual(e, e * self.grad)

    def __repr__(self) -> str:
        return f"Dual({self.value!r}, grad={self.grad!r})"


def softmax(z: Sequence) -> list:
    """Softmax of a vector of floats or Duals.

    The maximum value is subtracted before exponentiation so large inputs do
    not overflow; softmax is invariant under that shift. Output entries are
    positive and sum to 1 up to roundoff.
    """
    items = list(z)
    if not items:
        raise StructureError("softmax of empty vector")
    if isinstance(items[0], Dual):
        top = max(x.value for x in items)
        exps = [(x - top).exp() for x in items]
        total = exps[0]
        for e in exps[1:]:
            total = total + e
        return [e / total for e in exps]
    arr = np.asarray(items, dtype=float)
    exps = np.exp(arr - arr.max())
    return list(exps / exps.sum())
