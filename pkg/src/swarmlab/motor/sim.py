"""Start-up simulation, reference currents and the identification fitness."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .._accel import USE_NUMBA
from . import model as mdl
from .park import park_inverse
from .params import MotorParams, SupplyWaveform
from .rk45 import IntegrationError, OK, check_status, integrate_rk45, make_sampler

#: Tolerances for generating reference data and for scoring candidates. They
#: are kept equal: with a looser candidate setting the true parameters score
#: about 1e-5 instead of 0, which puts a floor under every optimizer.
REF_RTOL, REF_ATOL = 1e-7, 1e-9
CAND_RTOL, CAND_ATOL = REF_RTOL, REF_ATOL
MAX_STEPS = 2_000_000

_samplers: dict = {}


def _sampler(model: int):
    if model not in _samplers:
        rhs = mdl.flux_rhs_nb if model == mdl.FLUX else mdl.statespace_rhs_nb
        _samplers[model] = make_sampler(rhs, compile=True)
    return _samplers[model]


def sample_times(T: float, samples: int) -> np.ndarray:
    """t_k = (k + 1) T / samples for k = 0 .. samples - 1."""
    if samples < 1 or not T > 0:
        raise ValueError("need T > 0 and at least one sample")
    return T * np.arange(1, samples + 1) / samples


def simulate_states(params: MotorParams, supply: SupplyWaveform, T: float, samples: int,
                    model: int = mdl.FLUX, rtol: float = CAND_RTOL, atol: float = CAND_ATOL,
                    backend: Optional[str] = None) -> tuple[np.ndarray, np.ndarray]:
    """State trajectory from standstill sampled at :func:`sample_times`.

    Raises :class:`~swarmlab.motor.rk45.IntegrationError` on failure.
    """
    t_eval = sample_times(T, samples)
    k = mdl.kernel_args(params, supply.amplitude, supply.omega)
    y0 = np.zeros(5)
    use_nb = USE_NUMBA if backend is None else backend == "numba"
    if use_nb:
        Y, status, _ = _sampler(model)(y0, 0.0, float(T), t_eval, rtol, atol, k, MAX_STEPS)
        check_status(status)
    else:
        rhs = mdl.RHS_PY[model]
        sol = integrate_rk45(lambda t, y: rhs(t, y, k), (0.0, float(T)), y0, rtol, atol, MAX_STEPS)
        Y = sol(t_eval)
    return t_eval, Y


def phase_currents(Y: np.ndarray, params: MotorParams, model: int = mdl.FLUX) -> np.ndarray:
    """(samples, 3) array of i1, i2, i3 from sampled states."""
    if model == mdl.FLUX:
        Ld = params.Ld
        x1 = params.Lr / Ld
        b = params.Lm / Ld
        isd = x1 * Y[:, 0] - b * Y[:, 2]
        isq = x1 * Y[:, 1] - b * Y[:, 3]
    else:
        isd, isq = Y[:, 0], Y[:, 1]
    return np.column_stack(park_inverse(isd, isq))


@dataclass
class Startup:
    t: np.ndarray
    currents: np.ndarray
    omega: np.ndarray


def simulate_startup(params: MotorParams, supply: SupplyWaveform = SupplyWaveform(),
                     T: float = 1.0, samples: int = 1000, model: int = mdl.FLUX,
                     rtol: float = REF_RTOL, atol: float = REF_ATOL,
                     backend: Optional[str] = None) -> Startup:
    """Currents and rotor speed during a direct-on-line start from rest."""
    t, Y = simulate_states(params, supply, T, samples, model, rtol, atol, backend)
    return Startup(t, phase_currents(Y, params, model), Y[:, 4].copy())


# reference data ------------------------------------------------------------------

@dataclass
class Reference:
    t: np.ndarray
    currents: np.ndarray
    T: float
    samples: int

    @property
    def dt(self) -> float:
        return self.T / self.samples


def make_reference(params: Optional[MotorParams] = None, supply: SupplyWaveform = SupplyWaveform(),
                   T: float = 1.0, samples: int = 1000) -> Reference:
    params = params or MotorParams.true()
    run = simulate_startup(params, supply, T, samples, rtol=REF_RTOL, atol=REF_ATOL)
    return Reference(run.t, run.currents, float(T), int(samples))


def write_reference_csv(ref: Reference, path, header_comment: str = "") -> None:
    buf = io.StringIO()
    for line in header_comment.splitlines():
        buf.write(f"# {line}\n" if line else "#\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "i1", "i2", "i3"])
    for t, row in zip(ref.t, ref.currents):
        w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def read_reference_csv(path, T: Optional[float] = None) -> Reference:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if rows[0] != ["t", "i1", "i2", "i3"]:
        raise ValueError(f"{path}: unexpected header {rows[0]}")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    n = data.shape[0]
    T = float(data[-1, 0]) if T is None else T
    return Reference(data[:, 0], data[:, 1:], T, n)


# fitness ---------------------------------------------------------------------------

def sae(currents: np.ndarray, reference: np.ndarray, dt: float) -> float:
    """Sum over samples of |di1| + |di2| + |di3|, times dt."""
    return float(np.abs(currents - reference).sum() * dt)


def identification_fitness(candidate: MotorParams, reference: Reference,
                           supply: SupplyWaveform = SupplyWaveform(),
                           rtol: float = CAND_RTOL, atol: float = CAND_ATOL) -> float:
    """Time integral of the absolute three-phase current error.

    Raises :class:`~swarmlab.motor.rk45.IntegrationError` if the candidate
    cannot be simulated; :class:`IdentificationProblem` turns that into a
    penalty.
    """
    run = simulate_startup(candidate, supply, reference.T, reference.samples, rtol=rtol, atol=atol)
    return sae(run.currents, reference.currents, reference.dt)


@dataclass
class IdentificationProblem:
    """Batch objective over 5-vectors (Rs, Rr, Lll, Lm, J).

    Candidates that are not strictly positive or whose simulation fails score
    ``penalty``, ten times the error of predicting zero current throughout.
    """

    reference: Reference
    supply: SupplyWaveform = SupplyWaveform()
    rtol: float = CAND_RTOL
    atol: float = CAND_ATOL
    leak_split: float = 0.5
    failed: int = 0
    evaluations: int = 0
    penalty: float = field(init=False)

    def __post_init__(self):
        self.penalty = 10.0 * sae(np.zeros_like(self.reference.currents), self.reference.currents,
                                  self.reference.dt)

    def fitness(self, v) -> float:
        self.evaluations += 1
        v = np.asarray(v, dtype=float)
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            self.failed += 1
            return self.penalty
        try:
            p = MotorParams.from_vector(v, self.leak_split)
            f = identification_fitness(p, self.reference, self.supply, self.rtol, self.atol)
        except (IntegrationError, ValueError, ZeroDivisionError, FloatingPointError):
            self.failed += 1
            return self.penalty
        if not math.isfinite(f):
            self.failed += 1
            return self.penalty
        return f

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.fitness(x) for x in X])


def percent_deviation(estimate, truth) -> np.ndarray:
    est = np.asarray(estimate, dtype=float)
    tru = np.asarray(truth, dtype=float)
    return 100.0 * np.abs(est - tru) / np.abs(tru)


__all__ = ["OK", "IdentificationProblem", "Reference", "Startup", "identification_fitness",
           "make_reference", "percent_deviation", "phase_currents", "read_reference_csv",
           "sae", "sample_times", "simulate_startup", "simulate_states", "write_reference_csv"]
