"""Integration kernels: a numba scalar loop and a numpy fallback.

Both backends advance a compiled system over a run of uniform steps and
must produce bit-identical trajectories.  That holds because every
floating-point expression is written with the same shape in both: the
per-edge influence products, the bincount-ordered accumulation (numpy's
bincount adds sequentially in input order, and the edge arrays are
sorted by (target, source), matching the scalar loop), the derivative
combination, the stage updates, and the post-step clamp.  Keep the two
implementations in lockstep when editing either.

Backend choice: numba when importable, unless CLDKIT_NO_NUMBA is set to
a non-empty value; compilation happens on first use.  active_backend()
reports which one a call would take.

Kernel contract: state ``x`` is advanced in place, rows
``k0+1 .. k0+steps`` of ``out`` are filled, and the return value is
(-1, -1) on success or (global step index, variable index) of the first
non-finite value, checked before clamping.
"""

from __future__ import annotations

import os

import numpy as np

_jit_segment = None
_jit_failed = False


def _numba_disabled() -> bool:
    return bool(os.environ.get("CLDKIT_NO_NUMBA"))


def active_backend() -> str:
    if _numba_disabled():
        return "numpy"
    return "numpy" if _get_jit() is None else "numba"


def _segment_scalar(x, out, k0, steps, dt, integ, src, dst, w, decay, dc, dr, fkind, fk):
    n = x.shape[0]
    m = src.shape[0]
    acc = np.empty(n)
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    xs = np.empty(n)
    h2 = 0.5 * dt

    def deriv(xv, t, dxv):
        for i in range(n):
            acc[i] = 0.0
        for e in range(m):
            xj = xv[src[e]]
            if fkind[src[e]] == 0:
                g = xj
            else:
                g = xj / (1.0 + xj / fk[src[e]])
            acc[dst[e]] += w[e] * g
        for i in range(n):
            dxv[i] = acc[i] - decay[i] * xv[i] + dc[i] + dr[i] * t

    for s in range(steps):
        t = (k0 + s) * dt
        deriv(x, t, k1)
        if integ == 0:
            for i in range(n):
                xs[i] = x[i] + dt * k1[i]
        else:
            for i in range(n):
                xs[i] = x[i] + h2 * k1[i]
            deriv(xs, t + h2, k2)
            for i in range(n):
                xs[i] = x[i] + h2 * k2[i]
            deriv(xs, t + h2, k3)
            for i in range(n):
                xs[i] = x[i] + dt * k3[i]
            deriv(xs, t + dt, k4)
            for i in range(n):
                xs[i] = x[i] + (dt / 6.0) * (((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i])
        for i in range(n):
            if not np.isfinite(xs[i]):
                return k0 + s + 1, i
        for i in range(n):
            if xs[i] < 0.0:
                xs[i] = 0.0
        for i in range(n):
            x[i] = xs[i]
            out[k0 + s + 1, i] = xs[i]
    return -1, -1


def _get_jit():
    global _jit_segment, _jit_failed
    if _jit_segment is None and not _jit_failed:
        try:
            from numba import njit
        except ImportError:
            _jit_failed = True
            return None
        _jit_segment = njit(cache=True)(_segment_scalar)
    return _jit_segment


def _deriv_numpy(xv, t, src, dst, w, decay, dc, dr, fkind_s, fk_s, n):
    xj = xv[src]
    g = np.where(fkind_s == 0, xj, xj / (1.0 + xj / fk_s))
    acc = np.bincount(dst, weights=w * g, minlength=n)
    return acc - decay * xv + dc + dr * t


def _segment_numpy(x, out, k0, steps, dt, integ, src, dst, w, decay, dc, dr, fkind, fk):
    n = x.shape[0]
    h2 = 0.5 * dt
    fkind_s = fkind[src]
    fk_s = fk[src]

    def deriv(xv, t):
        return _deriv_numpy(xv, t, src, dst, w, decay, dc, dr, fkind_s, fk_s, n)

    # np.where evaluates the saturating branch for linear variables too
    # (with placeholder K = 1), and a diverging run overflows before the
    # finite check catches it; neither warrants a warning.
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for s in range(steps):
            t = (k0 + s) * dt
            k1 = deriv(x, t)
            if integ == 0:
                xs = x + dt * k1
            else:
                k2 = deriv(x + h2 * k1, t + h2)
                k3 = deriv(x + h2 * k2, t + h2)
                k4 = deriv(x + dt * k3, t + dt)
                xs = x + (dt / 6.0) * (((k1 + 2.0 * k2) + 2.0 * k3) + k4)
            bad = ~np.isfinite(xs)
            if bad.any():
                return k0 + s + 1, int(np.argmax(bad))
            xs[xs < 0.0] = 0.0
            x[:] = xs
            out[k0 + s + 1] = xs
    return -1, -1


def run_segment(x, out, k0, steps, dt, integ, src, dst, w, decay, dc, dr, fkind, fk):
    """Dispatch one segment to the active backend."""
    if steps <= 0:
        return -1, -1
    fn = None if _numba_disabled() else _get_jit()
    if fn is None:
        fn = _segment_numpy
    bad_step, bad_var = fn(
        x, out, k0, steps, dt, integ, src, dst, w, decay, dc, dr, fkind, fk
    )
    return int(bad_step), int(bad_var)
