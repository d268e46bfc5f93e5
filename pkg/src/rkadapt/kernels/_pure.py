"""Pure-Python kernel lane.

Implements the kernel API on top of the generic scalar/jet layer: dual
stepping really builds `Dual` objects and jet stepping really runs `Jet`
arithmetic. Slower than the compiled lane but always available, and it is
the semantic reference the compiled lane is tested against.

Conventions shared by both lanes:
  - fields are passed as (kind, params) with kind from `fields.FieldKind`;
  - stage coefficients `a` come as a padded lower-triangular (m-1, m-1)
    array, combination weights `b` as a length-m vector;
  - divergence is reported through a status int: -1 = fine, otherwise the
    0-based index of the first step that produced a non-finite state.
"""

from __future__ import annotations

import numpy as np

from ..fields import FieldKind, VectorField, eval_field, eval_field_jet
from ..jets import Jet
from ..scalars import Dual

LANE = "python"

_OK = -1


def _field(kind: int, fp: np.ndarray, dim: int) -> VectorField:
    return VectorField(FieldKind(kind), np.asarray(fp, dtype=float), dim)


def _step_generic(field, a_rows, b_entries, y0, h):
    """One explicit step; coefficients may be floats or Duals."""
    m = len(b_entries)
    ks = []
    for i in range(m):
        yi = y0
        for j in range(i):
            yi = yi + a_rows[i - 1][j] * ks[j]
        ks.append(h * eval_field(field, np.asarray(yi)))
    out = y0
    for i in range(m):
        out = out + b_entries[i] * ks[i]
    return np.asarray(out)


def _step_jet_generic(field, a_rows, b_entries, y0, order):
    """The one-step map expanded as a jet about h=0."""
    base = Jet.constant(y0, order)
    ks = []
    for i in range(len(b_entries)):
        yi = base
        for j in range(i):
            yi = yi + ks[j].scale(a_rows[i - 1][j])
        ks.append(eval_field_jet(field, yi).shift())
    out = base
    for i, k in enumerate(ks):
        out = out + k.scale(b_entries[i])
    return out


def step_tableau(kind, fp, a, b, y0, h):
    field = _field(kind, fp, len(y0))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return _step_generic(field, a, b, np.asarray(y0, dtype=float), float(h))


def integrate_tableau(kind, fp, a, b, y0, h, n_steps):
    field = _field(kind, fp, len(y0))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    y = np.asarray(y0, dtype=float).copy()
    traj = np.full((n_steps + 1, y.size), np.nan)
    traj[0] = y
    for s in range(n_steps):
        y = _step_generic(field, a, b, y, float(h))
        if not np.isfinite(y).all():
            return s, traj
        traj[s + 1] = y
    return _OK, traj


def integrate_final(kind, fp, a, b, y0, h, n_steps):
    field = _field(kind, fp, len(y0))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    y = np.asarray(y0, dtype=float).copy()
    for s in range(n_steps):
        y = _step_generic(field, a, b, y, float(h))
        if not np.isfinite(y).all():
            return s, y
    return _OK, y


def solution_jet_coeffs(kind, fp, y0, order):
    """Series of the true solution: (m+1)*c[m+1] = coefficient m of f(jet)."""
    y0 = np.asarray(y0, dtype=float)
    field = _field(kind, fp, y0.size)
    coeffs = [y0.copy()] + [np.zeros(y0.size) for _ in range(order)]
    for m in range(order):
        f = eval_field_jet(field, Jet(coeffs))
        coeffs[m + 1] = np.asarray(f.coeffs[m], dtype=float) / (m + 1.0)
    return np.stack(coeffs)


def step_jet_coeffs(kind, fp, a, b, y0, order):
    y0 = np.asarray(y0, dtype=float)
    field = _field(kind, fp, y0.size)
    jet = _step_jet_generic(
        field, np.asarray(a, dtype=float), np.asarray(b, dtype=float), y0, order
    )
    return np.stack([np.asarray(c, dtype=float) for c in jet.coeffs])


def _dual_rows(a, a_grad):
    rows = []
    for i in range(a.shape[0]):
        rows.append([Dual(a[i, j], a_grad[i, j]) for j in range(a.shape[1])])
    return rows


def _split_vec(vec, p):
    val = np.empty(len(vec))
    grad = np.zeros((len(vec), p))
    for i, x in enumerate(vec):
        if isinstance(x, Dual):
            val[i] = x.value
            grad[i] = x.grad
        else:
            val[i] = float(x)
    return val, grad


def step_dual(kind, fp, a, a_grad, b, b_grad, y0, h):
    """One step with dual-valued coefficients; returns (value, gradient)."""
    y0 = np.asarray(y0, dtype=float)
    field = _field(kind, fp, y0.size)
    p = b_grad.shape[1]
    a_rows = _dual_rows(np.asarray(a, dtype=float), np.asarray(a_grad, dtype=float))
    b_duals = [Dual(b[i], b_grad[i]) for i in range(len(b))]
    out = _step_generic(field, a_rows, b_duals, y0, float(h))
    return _split_vec(out, p)


def step_jet_dual(kind, fp, a, a_grad, b, b_grad, y0, order):
    """Jet of the one-step map with dual-valued coefficients."""
    y0 = np.asarray(y0, dtype=float)
    field = _field(kind, fp, y0.size)
    p = b_grad.shape[1]
    a_rows = _dual_rows(np.asarray(a, dtype=float), np.asarray(a_grad, dtype=float))
    b_duals = [Dual(b[i], b_grad[i]) for i in range(len(b))]
    jet = _step_jet_generic(field, a_rows, b_duals, y0, order)
    val = np.empty((order + 1, y0.size))
    grad = np.zeros((order + 1, y0.size, p))
    for k, c in enumerate(jet.coeffs):
        val[k], grad[k] = _split_vec(c, p)
    return val, grad
