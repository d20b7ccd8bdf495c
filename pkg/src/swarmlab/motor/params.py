"""Motor parameters, state and supply description."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PARAM_NAMES = ("Rs", "Rr", "Lll", "Lm", "J")

#: Identified parameters of the reference motor.
TRUE_VECTOR = np.array([9.203, 6.61, 0.09718, 1.6816, 0.00077])
#: Initialization box of the identification experiments.
PARAM_MIN = np.array([1.0, 1.0, 0.002, 0.05, 0.00005])
PARAM_MAX = np.array([20.0, 20.0, 1.0, 5.0, 0.001])


@dataclass(frozen=True)
class MotorParams:
    """Five identified parameters.

    ``Lll`` is the combined stator + rotor leakage inductance; ``leak_split``
    is the stator share used whenever the two leakages are needed apart.
    """

    Rs: float
    Rr: float
    Lll: float
    Lm: float
    J: float
    leak_split: float = 0.5

    def __post_init__(self):
        vals = (self.Rs, self.Rr, self.Lll, self.Lm, self.J)
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise ValueError("motor parameters must be finite and strictly positive")
        if not 0.0 < self.leak_split < 1.0:
            raise ValueError("leak_split must lie in (0, 1)")
        if self.Ld <= 0:
            raise ValueError("Ld must be positive")

    @classmethod
    def from_vector(cls, v, leak_split: float = 0.5) -> "MotorParams":
        v = np.asarray(v, dtype=float)
        return cls(*map(float, v[:5]), leak_split=leak_split)

    @classmethod
    def true(cls) -> "MotorParams":
        return cls.from_vector(TRUE_VECTOR)

    def vector(self) -> np.ndarray:
        return np.array([self.Rs, self.Rr, self.Lll, self.Lm, self.J])

    @property
    def Lsl(self) -> float:
        return self.leak_split * self.Lll

    @property
    def Lrl(self) -> float:
        return (1.0 - self.leak_split) * self.Lll

    @property
    def Ls(self) -> float:
        return self.Lsl + self.Lm

    @property
    def Lr(self) -> float:
        return self.Lrl + self.Lm

    @property
    def Ld(self) -> float:
        return self.Lsl * self.Lrl + self.Lm * (self.Lsl + self.Lrl)

    def kernel_array(self) -> np.ndarray:
        """[Rs, Rr, Lsl, Lrl, Lm, J] as consumed by the derivative kernels."""
        return np.array([self.Rs, self.Rr, self.Lsl, self.Lrl, self.Lm, self.J])


@dataclass(frozen=True)
class MotorState:
    psi_sd: float = 0.0
    psi_sq: float = 0.0
    psi_rd: float = 0.0
    psi_rq: float = 0.0
    omega_r: float = 0.0

    def vector(self) -> np.ndarray:
        return np.array([self.psi_sd, self.psi_sq, self.psi_rd, self.psi_rq, self.omega_r])

    @classmethod
    def from_vector(cls, v) -> "MotorState":
        return cls(*map(float, np.asarray(v, dtype=float)[:5]))


@dataclass(frozen=True)
class SupplyWaveform:
    """Balanced three-phase sinusoidal supply, v_k = V cos(2 pi f t + phase_k)."""

    amplitude: float = 311.0
    frequency: float = 50.0
    phases: tuple = (0.0, -2.0 * math.pi / 3.0, 2.0 * math.pi / 3.0)

    def __post_init__(self):
        want = (0.0, -2.0 * math.pi / 3.0, 2.0 * math.pi / 3.0)
        if len(self.phases) != 3 or any(abs(a - b) > 1e-12 for a, b in zip(self.phases, want)):
            raise ValueError("supply must be balanced with phases 0, -120, +120 degrees")
        if self.amplitude < 0 or self.frequency < 0:
            raise ValueError("amplitude and frequency must be non-negative")

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.frequency

    def voltages(self, t):
        t = np.asarray(t, dtype=float)
        return tuple(self.amplitude * np.cos(self.omega * t + ph) for ph in self.phases)
