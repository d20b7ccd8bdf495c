"""Adaptive Dormand-Prince RK4(5) integration with a quartic dense output.

Step control follows the usual mixed-tolerance recipe: the error estimate is
scaled by ``atol + rtol * max(|y_old|, |y_new|)``, reduced with an RMS norm,
and the step size changes by ``0.9 * err**(-1/5)`` clipped to [0.2, 10].

Two entry points share the tableau:

* :func:`integrate_rk45`, a plain numpy integrator for any Python callable,
  returning a :class:`DenseSolution`;
* :func:`make_sampler`, a numba-compiled integrator specialised for one
  kernel right-hand side ``rhs(t, y, k)``, which samples the dense output at
  requested times while stepping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._accel import HAVE_NUMBA

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
])
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
#: Dense-output coefficients: y(t + x h) = y + h * K.T @ P @ [x, x^2, x^3, x^4].
P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERR_EXP = -1.0 / 5.0

OK = 0
STEP_UNDERFLOW = 1
TOO_MANY_STEPS = 2
NOT_FINITE = 3

_STATUS_TEXT = {
    STEP_UNDERFLOW: "step size underflow",
    TOO_MANY_STEPS: "step limit reached",
    NOT_FINITE: "non-finite state",
}


class IntegrationError(RuntimeError):
    def __init__(self, status: int, t: float = math.nan):
        self.status = status
        self.t = t
        super().__init__(f"{_STATUS_TEXT.get(status, 'integration failed')} at t={t:.6g}")


class StepUnderflowError(IntegrationError):
    pass


def _raise(status, t):
    if status == STEP_UNDERFLOW:
        raise StepUnderflowError(status, t)
    raise IntegrationError(status, t)


def _rms(x):
    return math.sqrt(float(np.mean(x * x)))


def initial_step(fun, t0, y0, f0, rtol, atol, span):
    """Hairer-Wanner starting step for a 5th/4th order pair."""
    scale = atol + np.abs(y0) * rtol
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * f0
    f1 = fun(t0 + h0, y1)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 5.0)
    return min(100.0 * h0, h1, span)


@dataclass
class DenseSolution:
    """Accepted steps plus the interpolation coefficients of each step."""

    ts: np.ndarray
    ys: np.ndarray
    Q: np.ndarray  # (steps, n, 4)
    n_steps: int
    n_rejected: int
    n_fev: int

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t < self.ts[0]) or np.any(t > self.ts[-1]):
            raise ValueError("requested time outside the integrated interval")
        idx = np.clip(np.searchsorted(self.ts, t, side="left") - 1, 0, len(self.ts) - 2)
        t_old = self.ts[idx]
        h = self.ts[idx + 1] - t_old
        x = (t - t_old) / h
        powers = np.stack([x, x ** 2, x ** 3, x ** 4], axis=1)
        y = self.ys[idx] + h[:, None] * np.einsum("snk,sk->sn", self.Q[idx], powers)
        # exact node values where the request lands on an accepted step
        hit = t == self.ts[idx + 1]
        y[hit] = self.ys[idx[hit] + 1]
        return y[0] if scalar else y


def integrate_rk45(fun, t_span, y0, rtol: float = 1e-6, atol: float = 1e-8,
                   max_steps: int = 1_000_000) -> DenseSolution:
    """Integrate ``y' = fun(t, y)`` over ``t_span`` with adaptive steps.

    Raises
    ------
    StepUnderflowError
        The step size fell below the floating-point resolution of ``t``.
    IntegrationError
        The step limit was hit or the state became non-finite.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    y = np.array(y0, dtype=float)
    n = y.size
    f = np.asarray(fun(t0, y), dtype=float)
    nfev = 1
    h = initial_step(fun, t0, y, f, rtol, atol, t1 - t0)
    nfev += 1
    t = t0
    ts, ys, Qs = [t0], [y.copy()], []
    K = np.empty((7, n))
    rejected = 0
    steps = 0
    while t < t1:
        if steps >= max_steps:
            _raise(TOO_MANY_STEPS, t)
        min_step = 10.0 * abs(np.nextafter(t, np.inf) - t)
        step_rejected = False
        while True:
            if h < min_step:
                _raise(STEP_UNDERFLOW, t)
            t_new = t + h
            if t_new > t1:
                t_new = t1
            hh = t_new - t
            K[0] = f
            for s in range(1, 6):
                K[s] = fun(t + C[s] * hh, y + hh * (A[s, :s] @ K[:s]))
            y_new = y + hh * (B @ K[:6])
            f_new = np.asarray(fun(t_new, y_new), dtype=float)
            K[6] = f_new
            nfev += 6
            scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
            err = _rms(hh * (E @ K) / scale)
            if not math.isfinite(err):
                err = math.inf
            if err < 1.0:
                factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err ** ERR_EXP)
                if step_rejected:
                    factor = min(1.0, factor)
                h = hh * factor
                break
            h = hh * max(MIN_FACTOR, SAFETY * err ** ERR_EXP) if math.isfinite(err) else hh * MIN_FACTOR
            step_rejected = True
            rejected += 1
        if not np.all(np.isfinite(y_new)):
            _raise(NOT_FINITE, t_new)
        Qs.append(K.T @ P)
        t, y, f = t_new, y_new, f_new
        ts.append(t)
        ys.append(y.copy())
        steps += 1
    return DenseSolution(np.asarray(ts), np.asarray(ys), np.asarray(Qs), steps, rejected, nfev)


def make_sampler(rhs, compile: bool = True):
    """Build ``sample(y0, t0, t1, t_eval, rtol, atol, k, max_steps)``.

    ``rhs(t, y, k)`` must be numba-compilable when ``compile`` is set.
    ``t_eval`` must be sorted and inside [t0, t1]. Returns the (len(t_eval), n)
    samples, a status code and the number of accepted steps.
    """

    def rms(x):
        s = 0.0
        for i in range(x.size):
            s += x[i] * x[i]
        return math.sqrt(s / x.size)

    def sample(y0, t0, t1, t_eval, rtol, atol, k, max_steps):
        n = y0.size
        m = t_eval.size
        out = np.zeros((m, n))
        y = y0.copy()
        f = rhs(t0, y, k)
        scale = np.empty(n)
        for i in range(n):
            scale[i] = atol + abs(y[i]) * rtol
        d0 = rms(y / scale)
        d1 = rms(f / scale)
        span = t1 - t0
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6
        else:
            h0 = 0.01 * d0 / d1
        h0 = min(h0, span)
        f1 = rhs(t0 + h0, y + h0 * f, k)
        d2 = rms((f1 - f) / scale) / h0
        if d1 <= 1e-15 and d2 <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** 0.2
        h = min(100.0 * h0, h1, span)

        K = np.empty((7, n))
        ytmp = np.empty(n)
        y_new = np.empty(n)
        t = t0
        j = 0
        while j < m and t_eval[j] <= t0:
            out[j, :] = y
            j += 1
        steps = 0
        while t < t1:
            if steps >= max_steps:
                return out, TOO_MANY_STEPS, steps
            min_step = 10.0 * (np.nextafter(t, np.inf) - t)
            rejected = False
            while True:
                if h < min_step:
                    return out, STEP_UNDERFLOW, steps
                t_new = t + h
                if t_new > t1:
                    t_new = t1
                hh = t_new - t
                K[0, :] = f
                for s in range(1, 6):
                    for i in range(n):
                        acc = 0.0
                        for r in range(s):
                            acc += A[s, r] * K[r, i]
                        ytmp[i] = y[i] + hh * acc
                    K[s, :] = rhs(t + C[s] * hh, ytmp, k)
                for i in range(n):
                    acc = 0.0
                    for r in range(6):
                        acc += B[r] * K[r, i]
                    y_new[i] = y[i] + hh * acc
                f_new = rhs(t_new, y_new, k)
                K[6, :] = f_new
                s2 = 0.0
                for i in range(n):
                    e = 0.0
                    for r in range(7):
                        e += E[r] * K[r, i]
                    sc = atol + max(abs(y[i]), abs(y_new[i])) * rtol
                    q = hh * e / sc
                    s2 += q * q
                err = math.sqrt(s2 / n)
                if not math.isfinite(err):
                    h = hh * MIN_FACTOR
                    rejected = True
                    continue
                if err < 1.0:
                    if err == 0.0:
                        factor = MAX_FACTOR
                    else:
                        factor = min(MAX_FACTOR, SAFETY * err ** ERR_EXP)
                    if rejected:
                        factor = min(1.0, factor)
                    h = hh * factor
                    break
                h = hh * max(MIN_FACTOR, SAFETY * err ** ERR_EXP)
                rejected = True
            for i in range(n):
                if not math.isfinite(y_new[i]):
                    return out, NOT_FINITE, steps
            # dense output for every requested time inside (t, t_new]
            while j < m and t_eval[j] <= t_new:
                if t_eval[j] == t_new:
                    out[j, :] = y_new
                else:
                    x = (t_eval[j] - t) / hh
                    for i in range(n):
                        q1 = 0.0
                        q2 = 0.0
                        q3 = 0.0
                        q4 = 0.0
                        for r in range(7):
                            kr = K[r, i]
                            q1 += kr * P[r, 0]
                            q2 += kr * P[r, 1]
                            q3 += kr * P[r, 2]
                            q4 += kr * P[r, 3]
                        out[j, i] = y[i] + hh * x * (q1 + x * (q2 + x * (q3 + x * q4)))
                j += 1
            t = t_new
            y[:] = y_new
            f = f_new
            steps += 1
        return out, OK, steps

    if compile and HAVE_NUMBA:
        import numba

        rms = numba.njit(rms)
        return numba.njit(sample)
    return sample


def check_status(status: int, t: float = math.nan) -> None:
    if status != OK:
        _raise(status, t)

