# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel lane.

Hand-written C loops for the hot paths: explicit stepping, long fixed-step
integrations, series recurrences and dual-number (gradient-carrying)
stepping. Mirrors `rkadapt.kernels._pure` exactly; parity tests keep the two
lanes interchangeable.

Field encoding and the status convention are documented in `_pure`.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()

LANE = "compiled"

cdef int LIN1 = 0
cdef int SQ1 = 1
cdef int VDP = 2
cdef int BRU = 3
cdef int LINND = 4
cdef int NONLINND = 5

cdef int STATUS_OK = -1


# --- plain point evaluation --------------------------------------------------

cdef inline void _feval(int kind, double[::1] fp, double[::1] y,
                        double[::1] out, int d) noexcept nogil:
    cdef int i, j
    cdef double a, b, u, v, uuv, acc
    if kind == LIN1:
        for i in range(d):
            out[i] = -fp[0] * y[i]
    elif kind == SQ1:
        for i in range(d):
            out[i] = -fp[0] * y[i] * y[i]
    elif kind == VDP:
        a = fp[0]
        u = y[0]
        v = y[1]
        out[0] = v
        out[1] = a * (1.0 - u * u) * v - u
    elif kind == BRU:
        a = fp[0]
        b = fp[1]
        u = y[0]
        v = y[1]
        uuv = u * u * v
        out[0] = 1.0 - (b + 1.0) * u + a * uuv
        out[1] = b * u - a * uuv
    elif kind == LINND:
        for i in range(d):
            acc = 0.0
            for j in range(d):
                acc += fp[i * d + j] * y[j]
            out[i] = acc
    else:  # NONLINND
        for i in range(d):
            out[i] = fp[i] * y[i] * y[i]


cdef void _step(int kind, double[::1] fp, double[:, ::1] a, double[::1] b,
                double[::1] y, double h, double[:, ::1] kbuf,
                double[::1] ybuf, double[::1] fbuf, double[::1] out,
                int d, int m) noexcept nogil:
    cdef int i, j, c
    for i in range(m):
        for c in range(d):
            ybuf[c] = y[c]
        for j in range(i):
            for c in range(d):
                ybuf[c] += a[i - 1, j] * kbuf[j, c]
        _feval(kind, fp, ybuf, fbuf, d)
        for c in range(d):
            kbuf[i, c] = h * fbuf[c]
    for c in range(d):
        out[c] = y[c]
    for i in range(m):
        for c in range(d):
            out[c] += b[i] * kbuf[i, c]


cdef tuple _norm_ab(object a, object b):
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.size == 0:
        a = np.zeros((1, 1))
    return a, b


def step_tableau(int kind, fp, a, b, y0, double h):
    fp = np.ascontiguousarray(fp, dtype=np.float64)
    a, b = _norm_ab(a, b)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    cdef int d = y0.shape[0]
    cdef int m = b.shape[0]
    out = np.empty(d)
    kbuf = np.empty((m, d))
    ybuf = np.empty(d)
    fbuf = np.empty(d)
    _step(kind, fp, a, b, y0, h, kbuf, ybuf, fbuf, out, d, m)
    return out


def integrate_tableau(int kind, fp, a, b, y0, double h, int n_steps):
    fp = np.ascontiguousarray(fp, dtype=np.float64)
    a, b = _norm_ab(a, b)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    cdef int d = y0.shape[0]
    cdef int m = b.shape[0]
    traj = np.full((n_steps + 1, d), np.nan)
    y = y0.copy()
    out = np.empty(d)
    kbuf = np.empty((m, d))
    ybuf = np.empty(d)
    fbuf = np.empty(d)
    cdef double[:, ::1] traj_v = traj
    cdef double[::1] y_v = y
    cdef double[::1] out_v = out
    cdef double[::1] fp_v = fp
    cdef double[:, ::1] a_v = a
    cdef double[::1] b_v = b
    cdef double[:, ::1] kb = kbuf
    cdef double[::1] yb = ybuf
    cdef double[::1] fb = fbuf
    cdef int s, c
    cdef bint ok
    for c in range(d):
        traj_v[0, c] = y_v[c]
    for s in range(n_steps):
        _step(kind, fp_v, a_v, b_v, y_v, h, kb, yb, fb, out_v, d, m)
        ok = True
        for c in range(d):
            if not isfinite(out_v[c]):
                ok = False
                break
        if not ok:
            return s, traj
        for c in range(d):
            y_v[c] = out_v[c]
            traj_v[s + 1, c] = out_v[c]
    return STATUS_OK, traj


def integrate_final(int kind, fp, a, b, y0, double h, int n_steps):
    fp = np.ascontiguousarray(fp, dtype=np.float64)
    a, b = _norm_ab(a, b)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    cdef int d = y0.shape[0]
    cdef int m = b.shape[0]
    y = y0.copy()
    out = np.empty(d)
    kbuf = np.empty((m, d))
    ybuf = np.empty(d)
    fbuf = np.empty(d)
    cdef double[::1] y_v = y
    cdef double[::1] out_v = out
    cdef double[::1] fp_v = fp
    cdef double[:, ::1] a_v = a
    cdef double[::1] b_v = b
    cdef double[:, ::1] kb = kbuf
    cdef double[::1] yb = ybuf
    cdef double[::1] fb = fbuf
    cdef int s, c
    cdef bint ok
    for s in range(n_steps):
        _step(kind, fp_v, a_v, b_v, y_v, h, kb, yb, fb, out_v, d, m)
        ok = True
        for c in range(d):
            if not isfinite(out_v[c]):
                ok = False
                break
        if not ok:
            return s, y
        for c in range(d):
            y_v[c] = out_v[c]
    return STATUS_OK, y


# --- plain jet evaluation ----------------------------------------------------

cdef void _feval_jet(int kind, double[::1] fp, double[:, ::1] Y,
                     double[:, ::1] F, double[::1] s1, double[::1] s2,
                     int K1, int d) noexcept nogil:
    """F = f(Y) as truncated series; s1, s2 are length-K1 scratch buffers."""
    cdef int k, j, i, c
    cdef double a, b, acc
    if kind == LIN1:
        for k in range(K1):
            for c in range(d):
                F[k, c] = -fp[0] * Y[k, c]
    elif kind == SQ1:
        for c in range(d):
            for k in range(K1):
                acc = 0.0
                for j in range(k + 1):
                    acc += Y[j, c] * Y[k - j, c]
                F[k, c] = -fp[0] * acc
    elif kind == VDP:
        a = fp[0]
        for k in range(K1):
            acc = 0.0
            for j in range(k + 1):
                acc += Y[j, 0] * Y[k - j, 0]
            s1[k] = acc
        for k in range(K1):
            acc = 0.0
            for j in range(k + 1):
                acc += s1[j] * Y[k - j, 1]
            s2[k] = acc
        for k in range(K1):
            F[k, 0] = Y[k, 1]
            F[k, 1] = a * (Y[k, 1] - s2[k]) - Y[k, 0]
    elif kind == BRU:
        a = fp[0]
        b = fp[1]
        for k in range(K1):
            acc = 0.0
            for j in range(k + 1):
                acc += Y[j, 0] * Y[k - j, 0]
            s1[k] = acc
        for k in range(K1):
            acc = 0.0
            for j in range(k + 1):
                acc += s1[j] * Y[k - j, 1]
            s2[k] = acc
        for k in range(K1):
            F[k, 0] = -(b + 1.0) * Y[k, 0] + a * s2[k]
            F[k, 1] = b * Y[k, 0] - a * s2[k]
        F[0, 0] += 1.0
    elif kind == LINND:
        for k in range(K1):
            for i in range(d):
                acc = 0.0
                for c in range(d):
                    acc += fp[i * d + c] * Y[k, c]
                F[k, i] = acc
    else:  # NONLINND
        for c in range(d):
            for k in range(K1):
                acc = 0.0
                for j in range(k + 1):
                    acc += Y[j, c] * Y[k - j, c]
                F[k, c] = fp[c] * acc


def solution_jet_coeffs(int kind, fp, y0, int order):
    fp = np.ascontiguousarray(fp, dtype=np.float64)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    cdef int d = y0.shape[0]
    cdef int K1 = order + 1
    Y = np.zeros((K1, d))
    Y[0, :] = y0
    F = np.zeros((K1, d))
    s1 = np.zeros(K1)
    s2 = np.zeros(K1)
    cdef double[:, ::1] Y_v = Y
    cdef double[:, ::1] F_v = F
    cdef double[::1] s1_v = s1
    cdef double[::1] s2_v = s2
    cdef double[::1] fp_v = fp
    cdef int mdeg, c
    for mdeg in range(order):
        _feval_jet(kind, fp_v, Y_v, F_v, s1_v, s2_v, K1, d)
        for c in range(d):
            Y_v[mdeg + 1, c] = F_v[mdeg, c] / (mdeg + 1.0)
    return Y


def step_jet_coeffs(int kind, fp, a, b, y0, int order):
    fp = np.ascontiguousarray(fp, dtype=np.float64)
    a, b = _norm_ab(a, b)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    cdef int d = y0.shape[0]
    cdef int m = b.shape[0]
    cdef int K1 = order + 1
    kj = np.zeros((m, K1, d))
    S = np.zeros((K1, d))
    F = np.zeros((K1, d))
    out = np.zeros((K1, d))
    s1 = np.zeros(K1)
    s2 = np.zeros(K1)
    cdef double[:, :, ::1] kj_v = kj
    cdef double[:, ::1] S_v = S
    cdef double[:, ::1] F_v = F
    cdef double[:, ::1] out_v = out
    cdef double[::1] s1_v = s1
    cdef double[::1] s2_v = s2
    cdef double[::1] fp_v = fp
    cdef double[:, ::1] a_v = a
    cdef double[::1] b_v = b
    cdef double[::1] y0_v = y0
    cdef int i, j, r, c
    for i in range(m):
        for r in range(K1):
            for c in range(d):
                S_v[r, c] = 0.0
        for c in range(d):
            S_v[0, c] = y0_v[c]
        for j in range(i):
            for r in range(K1):
                for c in range(d):
                    S_v[r, c] += a_v[i - 1, j] * kj_v[j, r, c]
        _feval_jet(kind, fp_v, S_v, F_v, s1_v, s2_v, K1, d)
        for c in range(d):
            kj_v[i, 0, c] = 0.0
        for r in range(1, K1):
            for c in range(d):
                kj_v[i, r, c] = F_v[r - 1, c]
    for c in range(d):
        out_v[0, c] = y0_v[c]
    for i in range(m):
        for r in range(K1):
            for c in range(d):
                out_v[r, c] += b_v[i] * kj_v[i, r, c]
    return out


# --- dual (gradient-carrying) evaluation --------------------------------------

cdef void _feval_dual(int kind, double[::1] fp,
                      double[::1] yv, double[:, ::1] yg,
                      double[::1] fv, double[:, ::1] fg,
                      int d, int P) noexcept nogil:
    cdef int i, j, p
    cdef double a, b, u, v, w, acc
    if kind == LIN1:
        for i in range(d):
            fv[i] = -fp[0] * yv[i]
            for p in range(P):
                fg[i, p] = -fp[0] * yg[i, p]
    elif kind == SQ1:
        for i in range(d):
            fv[i] = -fp[0] * yv[i] * yv[i]
            for p in range(P):
                fg[i, p] = -2.0 * fp[0] * yv[i] * yg[i, p]
    elif kind == VDP:
        a = fp[0]
        u = yv[0]
        v = yv[1]
        fv[0] = v
        fv[1] = a * (1.0 - u * u) * v - u
        for p in range(P):
            fg[0, p] = yg[1, p]
            fg[1, p] = a * ((1.0 - u * u) * yg[1, p] - 2.0 * u * yg[0, p] * v) - yg[0, p]
    elif kind == BRU:
        a = fp[0]
        b = fp[1]
        u = yv[0]
        v = yv[1]
        w = u * u * v
        fv[0] = 1.0 - (b + 1.0) * u + a * w
        fv[1] = b * u - a * w
        for p in range(P):
            acc = 2.0 * u * yg[0, p] * v + u * u * yg[1, p]  # d(u^2 v)
            fg[0, p] = -(b + 1.0) * yg[0, p] + a * acc
            fg[1, p] = b * yg[0, p] - a * acc
    elif kind == LINND:
        for i in range(d):
            acc = 0.0
            for j in range(d):
                acc += fp[i * d + j] * yv[j]
            fv[i] = acc
            for p in range(P):
                acc = 0.0
                for j in range(d):
                    acc += fp[i * d + j] * yg[j, p]
                fg[i, p] = acc
    else:  # NONLINND
        for i in range(d):
            fv[i] = fp[i] * yv[i] * yv[i]
            for p in range(P):
                fg[i, p] = 2.0 * fp[i] * yv[i] * yg[i, p]


def step_dual(int kind, fp, a, a_grad, b, b_grad, y0, double h):
    fp = np.ascontiguousarray(fp, dtype=np.float64)
    a, b = _norm_ab(a, b)
    a_grad = np.ascontiguousarray(a_grad, dtype=np.float64)
    b_grad = np.ascontiguousarray(b_grad, dtype=np.float64)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    cdef int d = y0.shape[0]
    cdef int m = b.shape[0]
    cdef int P = b_grad.shape[1]
    if a_grad.size == 0:
        a_grad = np.zeros((1, 1, P))
    kv = np.zeros((m, d))
    kg = np.zeros((m, d, P))
    sv = np.empty(d)
    sg = np.empty((d, P))
    fv = np.empty(d)
    fg = np.empty((d, P))
    ov = np.empty(d)
    og = np.zeros((d, P))
    cdef double[::1] fp_v = fp
    cdef double[:, ::1] a_v = a
    cdef double[:, :, ::1] ag_v = a_grad
    cdef double[::1] b_v = b
    cdef double[:, ::1] bg_v = b_grad
    cdef double[::1] y0_v = y0
    cdef double[:, ::1] kv_v = kv
    cdef double[:, :, ::1] kg_v = kg
    cdef double[::1] sv_v = sv
    cdef double[:, ::1] sg_v = sg
    cdef double[::1] fv_v = fv
    cdef double[:, ::1] fg_v = fg
    cdef double[::1] ov_v = ov
    cdef double[:, ::1] og_v = og
    cdef int i, j, c, p
    cdef double w
    for i in range(m):
        for c in range(d):
            sv_v[c] = y0_v[c]
            for p in range(P):
                sg_v[c, p] = 0.0
        for j in range(i):
            w = a_v[i - 1, j]
            for c in range(d):
                sv_v[c] += w * kv_v[j, c]
                for p in range(P):
                    sg_v[c, p] += w * kg_v[j, c, p] + ag_v[i - 1, j, p] * kv_v[j, c]
        _feval_dual(kind, fp_v, sv_v, sg_v, fv_v, fg_v, d, P)
        for c in range(d):
            kv_v[i, c] = h * fv_v[c]
            for p in range(P):
                kg_v[i, c, p] = h * fg_v[c, p]
    for c in range(d):
        ov_v[c] = y0_v[c]
    for i in range(m):
        w = b_v[i]
        for c in range(d):
            ov_v[c] += w * kv_v[i, c]
            for p in range(P):
                og_v[c, p] += w * kg_v[i, c, p] + bg_v[i, p] * kv_v[i, c]
    return ov, og


cdef void _feval_jet_dual(int kind, double[::1] fp,
                          double[:, ::1] Yv, double[:, :, ::1] Yg,
                          double[:, ::1] Fv, double[:, :, ::1] Fg,
                          double[::1] s1v, double[:, ::1] s1g,
                          double[::1] s2v, double[:, ::1] s2g,
                          int K1, int d, int P) noexcept nogil:
    cdef int k, j, i, c, p
    cdef double a, b, acc, xv, yv
    if kind == LIN1:
        for k in range(K1):
            for c in range(d):
                Fv[k, c] = -fp[0] * Yv[k, c]
                for p in range(P):
                    Fg[k, c, p] = -fp[0] * Yg[k, c, p]
    elif kind == SQ1 or kind == NONLINND:
        for c in range(d):
            a = -fp[0] if kind == SQ1 else fp[c]
            for k in range(K1):
                acc = 0.0
                for p in range(P):
                    s1g[k, p] = 0.0
                for j in range(k + 1):
                    xv = Yv[j, c]
                    yv = Yv[k - j, c]
                    acc += xv * yv
                    for p in range(P):
                        s1g[k, p] += xv * Yg[k - j, c, p] + Yg[j, c, p] * yv
                Fv[k, c] = a * acc
                for p in range(P):
                    Fg[k, c, p] = a * s1g[k, p]
    elif kind == VDP or kind == BRU:
        a = fp[0]
        b = fp[1] if kind == BRU else 0.0
        # s1 = u^2 (series with gradients)
        for k in range(K1):
            s1v[k] = 0.0
            for p in range(P):
                s1g[k, p] = 0.0
            for j in range(k + 1):
                xv = Yv[j, 0]
                yv = Yv[k - j, 0]
                s1v[k] += xv * yv
                for p in range(P):
                    s1g[k, p] += xv * Yg[k - j, 0, p] + Yg[j, 0, p] * yv
        # s2 = u^2 * v
        for k in range(K1):
            s2v[k] = 0.0
            for p in range(P):
                s2g[k, p] = 0.0
            for j in range(k + 1):
                xv = s1v[j]
                yv = Yv[k - j, 1]
                s2v[k] += xv * yv
                for p in range(P):
                    s2g[k, p] += xv * Yg[k - j, 1, p] + s1g[j, p] * yv
        if kind == VDP:
            for k in range(K1):
                Fv[k, 0] = Yv[k, 1]
                Fv[k, 1] = a * (Yv[k, 1] - s2v[k]) - Yv[k, 0]
                for p in range(P):
                    Fg[k, 0, p] = Yg[k, 1, p]
                    Fg[k, 1, p] = a * (Yg[k, 1, p] - s2g[k, p]) - Yg[k, 0, p]
        else:
            for k in range(K1):
                Fv[k, 0] = -(b + 1.0) * Yv[k, 0] + a * s2v[k]
                Fv[k, 1] = b * Yv[k, 0] - a * s2v[k]
                for p in range(P):
                    Fg[k, 0, p] = -(b + 1.0) * Yg[k, 0, p] + a * s2g[k, p]
                    Fg[k, 1, p] = b * Yg[k, 0, p] - a * s2g[k, p]
            Fv[0, 0] += 1.0
    else:  # LINND
        for k in range(K1):
            for i in range(d):
                acc = 0.0
                for c in range(d):
                    acc += fp[i * d + c] * Yv[k, c]
                Fv[k, i] = acc
                for p in range(P):
                    acc = 0.0
                    for c in range(d):
                        acc += fp[i * d + c] * Yg[k, c, p]
                    Fg[k, i, p] = acc


def step_jet_dual(int kind, fp, a, a_grad, b, b_grad, y0, int order):
    fp = np.ascontiguousarray(fp, dtype=np.float64)
    a, b = _norm_ab(a, b)
    a_grad = np.ascontiguousarray(a_grad, dtype=np.float64)
    b_grad = np.ascontiguousarray(b_grad, dtype=np.float64)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    cdef int d = y0.shape[0]
    cdef int m = b.shape[0]
    cdef int P = b_grad.shape[1]
    cdef int K1 = order + 1
    if a_grad.size == 0:
        a_grad = np.zeros((1, 1, P))
    kv = np.zeros((m, K1, d))
    kg = np.zeros((m, K1, d, P))
    Sv = np.zeros((K1, d))
    Sg = np.zeros((K1, d, P))
    Fv = np.zeros((K1, d))
    Fg = np.zeros((K1, d, P))
    ov = np.zeros((K1, d))
    og = np.zeros((K1, d, P))
    s1v = np.zeros(K1)
    s1g = np.zeros((K1, P))
    s2v = np.zeros(K1)
    s2g = np.zeros((K1, P))
    cdef double[::1] fp_v = fp
    cdef double[:, ::1] a_v = a
    cdef double[:, :, ::1] ag_v = a_grad
    cdef double[::1] b_v = b
    cdef double[:, ::1] bg_v = b_grad
    cdef double[::1] y0_v = y0
    cdef double[:, :, ::1] kv_v = kv
    cdef double[:, :, :, ::1] kg_v = kg
    cdef double[:, ::1] Sv_v = Sv
    cdef double[:, :, ::1] Sg_v = Sg
    cdef double[:, ::1] Fv_v = Fv
    cdef double[:, :, ::1] Fg_v = Fg
    cdef double[:, ::1] ov_v = ov
    cdef double[:, :, ::1] og_v = og
    cdef double[::1] s1v_v = s1v
    cdef double[:, ::1] s1g_v = s1g
    cdef double[::1] s2v_v = s2v
    cdef double[:, ::1] s2g_v = s2g
    cdef int i, j, r, c, p
    cdef double w
    for i in range(m):
        for r in range(K1):
            for c in range(d):
                Sv_v[r, c] = 0.0
                for p in range(P):
                    Sg_v[r, c, p] = 0.0
        for c in range(d):
            Sv_v[0, c] = y0_v[c]
        for j in range(i):
            w = a_v[i - 1, j]
            for r in range(K1):
                for c in range(d):
                    Sv_v[r, c] += w * kv_v[j, r, c]
                    for p in range(P):
                        Sg_v[r, c, p] += (
                            w * kg_v[j, r, c, p] + ag_v[i - 1, j, p] * kv_v[j, r, c]
                        )
        _feval_jet_dual(kind, fp_v, Sv_v, Sg_v, Fv_v, Fg_v,
                        s1v_v, s1g_v, s2v_v, s2g_v, K1, d, P)
        for r in range(1, K1):
            for c in range(d):
                kv_v[i, r, c] = Fv_v[r - 1, c]
                for p in range(P):
                    kg_v[i, r, c, p] = Fg_v[r - 1, c, p]
    for c in range(d):
        ov_v[0, c] = y0_v[c]
    for i in range(m):
        w = b_v[i]
        for r in range(K1):
            for c in range(d):
                ov_v[r, c] += w * kv_v[i, r, c]
                for p in range(P):
                    og_v[r, c, p] += w * kg_v[i, r, c, p] + bg_v[i, p] * kv_v[i, r, c]
    return ov, og
