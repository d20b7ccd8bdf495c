"""Induction-motor dynamics in the stationary two-axis frame.

Two equivalent formulations:

* flux model, state (psi_sd, psi_sq, psi_rd, psi_rq, omega_r);
* state-space model, state (i_sd, i_sq, lambda_rd, lambda_rq, omega).

Load torque and friction are zero and there is one pole pair. The kernel
functions take ``(t, y, k)`` with ``k = [Rs, Rr, Lsl, Lrl, Lm, J, V, w_s]``,
the supply being v_sd = V cos(w_s t), v_sq = V sin(w_s t).
"""
from __future__ import annotations

import math

import numpy as np

from .._accel import jit
from .params import MotorParams, MotorState

FLUX = 0
STATESPACE = 1


def kernel_args(params: MotorParams, amplitude: float, omega_s: float) -> np.ndarray:
    return np.concatenate([params.kernel_array(), [amplitude, omega_s]])


def _flux_rhs(t, y, k):
    Rs, Rr, Lsl, Lrl, Lm, J = k[0], k[1], k[2], k[3], k[4], k[5]
    vsd = k[6] * math.cos(k[7] * t)
    vsq = k[6] * math.sin(k[7] * t)
    Ld = Lsl * Lrl + Lm * (Lsl + Lrl)
    x1 = (Lrl + Lm) / Ld
    x2 = (Lsl + Lm) / Ld
    b = Lm / Ld
    psd, psq, prd, prq, w = y[0], y[1], y[2], y[3], y[4]
    isd = x1 * psd - b * prd
    isq = x1 * psq - b * prq
    out = np.empty(5)
    out[0] = -Rs * x1 * psd + Rs * b * prd + vsd
    out[1] = -Rs * x1 * psq + Rs * b * prq + vsq
    out[2] = -Rr * x2 * prd + Rr * b * psd - w * prq
    out[3] = -Rr * x2 * prq + Rr * b * psq + w * prd
    out[4] = 1.5 / J * (isq * psd - isd * psq)
    return out


def _statespace_rhs(t, y, k):
    Rs, Rr, Lsl, Lrl, Lm, J = k[0], k[1], k[2], k[3], k[4], k[5]
    vsd = k[6] * math.cos(k[7] * t)
    vsq = k[6] * math.sin(k[7] * t)
    Ls = Lsl + Lm
    Lr = Lrl + Lm
    D = Ls * Lr - Lm * Lm
    eta = Rr / Lr
    mu = Lm / D
    gamma = (Rs * Lr * Lr + Rr * Lm * Lm) / (Lr * D)
    sls = D / Lr  # sigma * Ls
    isd, isq, lrd, lrq, w = y[0], y[1], y[2], y[3], y[4]
    out = np.empty(5)
    out[0] = -gamma * isd + mu * eta * lrd + mu * w * lrq + vsd / sls
    out[1] = -gamma * isq + mu * eta * lrq - mu * w * lrd + vsq / sls
    out[2] = eta * Lm * isd - eta * lrd - w * lrq
    out[3] = eta * Lm * isq - eta * lrq + w * lrd
    out[4] = 1.5 / J * (Lm / Lr) * (lrd * isq - lrq * isd)
    return out


def _flux_currents(y, k):
    Lsl, Lrl, Lm = k[2], k[3], k[4]
    Ld = Lsl * Lrl + Lm * (Lsl + Lrl)
    x1 = (Lrl + Lm) / Ld
    b = Lm / Ld
    return x1 * y[0] - b * y[2], x1 * y[1] - b * y[3]


def _statespace_currents(y, k):
    return y[0], y[1]


flux_rhs_nb = jit(_flux_rhs)
statespace_rhs_nb = jit(_statespace_rhs)
flux_currents_nb = jit(_flux_currents)
statespace_currents_nb = jit(_statespace_currents)

RHS_PY = {FLUX: _flux_rhs, STATESPACE: _statespace_rhs}
CURRENTS_PY = {FLUX: _flux_currents, STATESPACE: _statespace_currents}


# public scalar API -------------------------------------------------------------

def flux_derivatives(state, params: MotorParams, v_sd: float, v_sq: float) -> np.ndarray:
    """Time derivative of the flux-model state under the given stator voltages."""
    y = state.vector() if isinstance(state, MotorState) else np.asarray(state, dtype=float)
    if params.Ld <= 0:
        raise ValueError("Ld must be positive")
    # zero supply in the kernel, then add the given voltages
    d = _flux_rhs(0.0, y, kernel_args(params, 0.0, 0.0))
    d[0] += v_sd
    d[1] += v_sq
    return d


def statespace_derivatives(i_sd, i_sq, lam_rd, lam_rq, omega_m, params: MotorParams,
                           v_sd: float, v_sq: float) -> np.ndarray:
    """Time derivative of (i_sd, i_sq, lambda_rd, lambda_rq, omega)."""
    sigma = params.Ld / (params.Ls * params.Lr)
    if sigma <= 0:
        raise ValueError("leakage coefficient sigma must be positive")
    y = np.array([i_sd, i_sq, lam_rd, lam_rq, omega_m], dtype=float)
    d = _statespace_rhs(0.0, y, kernel_args(params, 0.0, 0.0))
    sls = params.Ld / params.Lr
    d[0] += v_sd / sls
    d[1] += v_sq / sls
    return d


def statespace_coefficients(params: MotorParams) -> dict:
    """eta, sigma, gamma and mu of the state-space model."""
    Ls, Lr, Lm = params.Ls, params.Lr, params.Lm
    D = Ls * Lr - Lm * Lm
    return {
        "eta": params.Rr / Lr,
        "sigma": D / (Ls * Lr),
        "gamma": (params.Rs * Lr * Lr + params.Rr * Lm * Lm) / (Lr * D),
        "mu": Lm / D,
    }
