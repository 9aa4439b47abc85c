"""Compiled adaptive DOP853 stepper for the three simulation schemes.

The reference integration path lives in `numerics.integrate` (scipy); this
module is a performance twin used by `evolve.run`. The stepper reuses
scipy's DOP853 tableau and error-control scheme, so the two paths agree to
integration tolerance. Time-dependent inputs that are expensive per query
(the counterdiabatic matrix of SC1, the coupling targets of SC2) enter as
cubic-spline coefficient tables on a uniform grid; pulses and the synthesis
algebra are evaluated exactly at every stage time.

Scheme ids: 0 = bare 4-level, 1 = SC1 (bare + splined correction matrix),
2 = SC2 (5-level synthesis from splined targets).

Status codes returned by `run`: 0 success, -1 step-size underflow,
-2 non-finite state.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dc
from scipy.interpolate import CubicSpline

from .sc2 import ENVELOPE_HALF_WIDTH_SIGMAS

N_STAGES = 12

_A = np.ascontiguousarray(_dc.A[:N_STAGES, :N_STAGES])
_B = np.ascontiguousarray(_dc.B)
_C = np.ascontiguousarray(_dc.C[:N_STAGES])
_E3 = np.ascontiguousarray(_dc.E3)
_E5 = np.ascontiguousarray(_dc.E5)

# pf layout shared by all schemes
PF_O0COS = 0       # omega0 * cos(chi)
PF_O0SIN_RE = 1    # Re(omega0 * sin(chi) * e^{i eta})
PF_O0SIN_IM = 2
PF_COSDELTA = 3
PF_SINDELTA = 4
PF_C1 = 5
PF_C2 = 6
PF_T0 = 7
PF_SIGMA = 8
PF_DETUNING = 9
PF_OMEGA0 = 10
PF_RFLOOR = 11
PF_SIZE = 12


def pack_pulse_params(cfg, gate, r_floor: float = 0.0) -> np.ndarray:
    """Flatten pulse/gate parameters into the pf vector the kernels expect."""
    import math

    c1, c2 = cfg.centers
    pf = np.zeros(PF_SIZE, dtype=np.float64)
    pf[PF_O0COS] = cfg.omega0 * math.cos(gate.chi)
    z = cfg.omega0 * math.sin(gate.chi) * np.exp(1j * gate.eta)
    pf[PF_O0SIN_RE] = z.real
    pf[PF_O0SIN_IM] = z.imag
    pf[PF_COSDELTA] = math.cos(gate.delta)
    pf[PF_SINDELTA] = math.sin(gate.delta)
    pf[PF_C1] = c1
    pf[PF_C2] = c2
    pf[PF_T0] = cfg.t0
    pf[PF_SIGMA] = cfg.sigma
    pf[PF_DETUNING] = cfg.delta_cap
    pf[PF_OMEGA0] = cfg.omega0
    pf[PF_RFLOOR] = r_floor
    return pf


def pack_spline(x: np.ndarray, y: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Cubic-spline coefficient table on a uniform grid.

    Returns (x0, step, coef) with coef shaped (nseg, ncomp, 4), highest
    polynomial degree first, ready for `_spline_eval`.
    """
    x = np.asarray(x, dtype=np.float64)
    steps = np.diff(x)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("spline grid must be uniform")
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim == 1:
        y = y[:, None]
    cs = CubicSpline(x, y, axis=0)
    coef = np.ascontiguousarray(np.transpose(cs.c, (1, 2, 0)).astype(np.complex128))
    return float(x[0]), float(steps[0]), coef


_EMPTY_SPLINE = np.zeros((1, 1, 4), dtype=np.complex128)


def empty_spline() -> tuple[float, float, np.ndarray]:
    return 0.0, 1.0, _EMPTY_SPLINE


@njit(cache=True, inline="always")
def _spline_eval(t, x0, step, coef, out):
    nseg = coef.shape[0]
    idx = int((t - x0) / step)
    if idx < 0:
        idx = 0
    elif idx >= nseg:
        idx = nseg - 1
    dx = t - (x0 + idx * step)
    for c in range(coef.shape[1]):
        out[c] = ((coef[idx, c, 0] * dx + coef[idx, c, 1]) * dx + coef[idx, c, 2]) * dx + coef[
            idx, c, 3
        ]


@njit(cache=True, inline="always")
def _pulses(t, pf):
    inv = 1.0 / (2.0 * pf[PF_SIGMA] * pf[PF_SIGMA])
    c1 = pf[PF_C1]
    c2 = pf[PF_C2]
    t0 = pf[PF_T0]
    x = t - (c1 + t0)
    f = np.exp(-x * x * inv)
    x = t - (c2 - t0)
    f += np.exp(-x * x * inv)
    x = t - (c1 - t0)
    g1 = np.exp(-x * x * inv)
    x = t - (c2 + t0)
    g2 = np.exp(-x * x * inv)
    o1 = complex(pf[PF_O0COS] * f, 0.0)
    o2 = complex(pf[PF_O0SIN_RE] * f, pf[PF_O0SIN_IM] * f)
    o3 = complex(
        pf[PF_OMEGA0] * (g1 + pf[PF_COSDELTA] * g2), pf[PF_OMEGA0] * pf[PF_SINDELTA] * g2
    )
    return o1, o2, o3


@njit(cache=True, inline="always")
def _sigmoid_scalar(x):
    if x >= 0.0:
        return 1.0 / (1.0 + np.exp(-x))
    ex = np.exp(x)
    return ex / (1.0 + ex)


_ENV_HALF = float(ENVELOPE_HALF_WIDTH_SIGMAS)


@njit(cache=True, inline="always")
def _envelope_scalar(t, pf):
    half = _ENV_HALF * pf[PF_SIGMA]
    o0 = pf[PF_OMEGA0]
    total = 0.0
    for c in (pf[PF_C1], pf[PF_C2]):
        total += _sigmoid_scalar(o0 * (t - (c - half))) * _sigmoid_scalar(-o0 * (t - (c + half)))
    return total


@njit(cache=True, inline="always")
def _rhs_bare(t, y, out, pf, sx, sh, sc, buf):
    o1, o2, o3 = _pulses(t, pf)
    h14 = 0.5 * o1
    h24 = 0.5 * o2
    h34 = 0.5 * o3
    out[0] = -1j * (h14 * y[3])
    out[1] = -1j * (h24 * y[3])
    out[2] = -1j * (h34 * y[3])
    out[3] = -1j * (
        np.conj(h14) * y[0]
        + np.conj(h24) * y[1]
        + np.conj(h34) * y[2]
        + pf[PF_DETUNING] * y[3]
    )


@njit(cache=True, inline="always")
def _rhs_sc1(t, y, out, pf, sx, sh, sc, buf):
    # buf receives the 16 splined entries of the correction matrix (row major)
    _spline_eval(t, sx, sh, sc, buf)
    o1, o2, o3 = _pulses(t, pf)
    h14 = 0.5 * o1
    h24 = 0.5 * o2
    h34 = 0.5 * o3
    for i in range(4):
        acc = 0.0 + 0.0j
        for j in range(4):
            acc += buf[4 * i + j] * y[j]
        out[i] = acc
    out[0] += h14 * y[3]
    out[1] += h24 * y[3]
    out[2] += h34 * y[3]
    out[3] += np.conj(h14) * y[0] + np.conj(h24) * y[1] + np.conj(h34) * y[2]
    out[3] += pf[PF_DETUNING] * y[3]
    for i in range(4):
        out[i] *= -1j


@njit(cache=True, inline="always")
def _rhs_sc2(t, y, out, pf, sx, sh, sc, buf):
    # buf receives the three complex coupling targets t12, t13, t23
    _spline_eval(t, sx, sh, sc, buf)
    t12 = buf[0]
    t13 = buf[1]
    t23 = buf[2]
    o1p, o2p, o3p = _pulses(t, pf)
    delta_cap = pf[PF_DETUNING]

    r12 = abs(t12)
    if r12 < pf[PF_RFLOOR]:
        o1 = 0.0 + 0.0j
        o2 = 0.0 + 0.0j
        o3 = 0.0 + 0.0j
    else:
        p12 = np.arctan2(t12.imag, t12.real)
        root = np.sqrt(r12)
        e = complex(np.cos(0.5 * p12), np.sin(0.5 * p12))
        o1 = e * root
        o2 = np.conj(e) * root
        r13 = abs(t13)
        p13 = np.arctan2(t13.imag, t13.real) if r13 > 0.0 else 0.0
        fe = _envelope_scalar(t, pf)
        ang = 0.5 * p12 - p13
        o3 = (r13 * fe / root) * complex(np.cos(ang), np.sin(ang))
    rem = t23 - o2 * np.conj(o3)
    floor = 1e-12 * max(abs(t23), abs(o2) * abs(o3))
    re = rem.real if abs(rem.real) > floor else 0.0
    im = rem.imag if abs(rem.imag) > floor else 0.0
    rem = complex(re, im)
    r = abs(rem)
    phi = np.arctan2(rem.imag, rem.real) if r > 0.0 else 0.0
    root = np.sqrt(r)
    e = complex(np.cos(0.5 * phi), np.sin(0.5 * phi))
    o4 = e * root
    o5 = np.conj(e) * root
    quarter = 1.0 / (4.0 * delta_cap)
    d1 = (4.0 * abs(o1) ** 2 - abs(o1p) ** 2) * quarter
    d2 = (4.0 * (abs(o2) ** 2 + abs(o4) ** 2) - abs(o2p) ** 2) * quarter
    d3 = (4.0 * (abs(o5) ** 2 + abs(o3) ** 2) - abs(o3p) ** 2) * quarter

    out[0] = -1j * (-d1 * y[0] - o1 * y[3])
    out[1] = -1j * (-d2 * y[1] - o2 * y[3] - o4 * y[4])
    out[2] = -1j * (-d3 * y[2] - o3 * y[3] - o5 * y[4])
    out[3] = -1j * (
        -np.conj(o1) * y[0] - np.conj(o2) * y[1] - np.conj(o3) * y[2] - delta_cap * y[3]
    )
    out[4] = -1j * (-np.conj(o4) * y[1] - np.conj(o5) * y[2] - delta_cap * y[4])


@njit(cache=True, inline="always")
def _eval_rhs(scheme_id, t, y, out, pf, sx, sh, sc, buf):
    if scheme_id == 0:
        _rhs_bare(t, y, out, pf, sx, sh, sc, buf)
    elif scheme_id == 1:
        _rhs_sc1(t, y, out, pf, sx, sh, sc, buf)
    else:
        _rhs_sc2(t, y, out, pf, sx, sh, sc, buf)


@njit(cache=True)
def run(scheme_id, pf, sx, sh, sc, y0, t0, t1, rtol, atol, t_out):
    """Adaptive DOP853 over [t0, t1], recording the state at every t_out.

    Output points are hit exactly by capping the step size. Returns
    (states, status, t_reached, n_steps).
    """
    n = y0.shape[0]
    nout = t_out.shape[0]
    y_out = np.empty((nout, n), np.complex128)
    K = np.empty((N_STAGES + 1, n), np.complex128)
    ytmp = np.empty(n, np.complex128)
    buf = np.empty(sc.shape[1], np.complex128)
    y = y0.copy()
    t = t0

    _eval_rhs(scheme_id, t, y, K[0], pf, sx, sh, sc, buf)
    h = (t1 - t0) * 1e-6
    iout = 0
    while iout < nout and t_out[iout] <= t0:
        y_out[iout] = y
        iout += 1
    nsteps = 0
    eps = 2.220446049250313e-16
    while t < t1:
        if h > t1 - t:
            h = t1 - t
        if iout < nout and t + h > t_out[iout]:
            h = t_out[iout] - t
        if h < 16.0 * eps * max(1.0, abs(t)):
            return y_out, -1, t, nsteps
        for s in range(1, N_STAGES):
            for i in range(n):
                acc = 0.0 + 0.0j
                for j in range(s):
                    a = _A[s, j]
                    if a != 0.0:
                        acc += a * K[j, i]
                ytmp[i] = y[i] + h * acc
            _eval_rhs(scheme_id, t + _C[s] * h, ytmp, K[s], pf, sx, sh, sc, buf)
        for i in range(n):
            acc = 0.0 + 0.0j
            for j in range(N_STAGES):
                b = _B[j]
                if b != 0.0:
                    acc += b * K[j, i]
            ytmp[i] = y[i] + h * acc
        _eval_rhs(scheme_id, t + h, ytmp, K[N_STAGES], pf, sx, sh, sc, buf)

        err3sq = 0.0
        err5sq = 0.0
        for i in range(n):
            scale = atol + rtol * max(abs(y[i]), abs(ytmp[i]))
            e3 = 0.0 + 0.0j
            e5 = 0.0 + 0.0j
            for j in range(N_STAGES + 1):
                if _E3[j] != 0.0:
                    e3 += _E3[j] * K[j, i]
                if _E5[j] != 0.0:
                    e5 += _E5[j] * K[j, i]
            err3sq += (abs(e3) / scale) ** 2
            err5sq += (abs(e5) / scale) ** 2
        denom = err5sq + 0.01 * err3sq
        err = abs(h) * err5sq / np.sqrt(denom * n) if denom > 0.0 else 0.0

        if err <= 1.0:
            t = t + h
            ok = True
            for i in range(n):
                y[i] = ytmp[i]
                if not (np.isfinite(y[i].real) and np.isfinite(y[i].imag)):
                    ok = False
            if not ok:
                return y_out, -2, t, nsteps
            K[0] = K[N_STAGES]
            nsteps += 1
            while iout < nout and t >= t_out[iout] - 1e-12 * max(1.0, abs(t)):
                y_out[iout] = y
                iout += 1
            factor = 10.0 if err == 0.0 else min(10.0, max(0.2, 0.9 * err**-0.125))
            h *= factor
        else:
            h *= max(0.2, 0.9 * err**-0.125)
    while iout < nout:
        y_out[iout] = y
        iout += 1
    return y_out, 0, t, nsteps
