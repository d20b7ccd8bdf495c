"""Single-objective test functions and the DTLZ1-4 problems.

All functions are minimized. Batch evaluators take an (N, n) array and return
N values; the numba loop kernels and the numpy expressions compute the same
thing and are swapped by :mod:`swarmlab._accel`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._accel import jit, pick
from .core import SearchSpace


class ObjectiveId(enum.Enum):
    SPHERE = "sphere"
    ROSENBROCK = "rosenbrock"
    RASTRIGIN = "rastrigin"
    SCHAFFER_F6 = "schaffer_f6"
    ACKLEY = "ackley"
    DTLZ1 = "dtlz1"
    DTLZ2 = "dtlz2"
    DTLZ3 = "dtlz3"
    DTLZ4 = "dtlz4"

    @property
    def is_dtlz(self) -> bool:
        return self.value.startswith("dtlz")


SINGLE = (ObjectiveId.SPHERE, ObjectiveId.ROSENBROCK, ObjectiveId.RASTRIGIN,
          ObjectiveId.SCHAFFER_F6, ObjectiveId.ACKLEY)


class DimensionError(ValueError):
    pass


# numba loop kernels ---------------------------------------------------------

@jit
def _sphere_nb(X):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        s = 0.0
        for j in range(X.shape[1]):
            s += X[i, j] * X[i, j]
        out[i] = s
    return out


@jit
def _rosenbrock_nb(X):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        s = 0.0
        for j in range(X.shape[1] - 1):
            a = X[i, j + 1] - X[i, j] * X[i, j]
            b = X[i, j] - 1.0
            s += 100.0 * a * a + b * b
        out[i] = s
    return out


@jit
def _rastrigin_nb(X):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        s = 0.0
        for j in range(X.shape[1]):
            x = X[i, j]
            s += x * x - 10.0 * math.cos(2.0 * math.pi * x) + 10.0
        out[i] = s
    return out


@jit
def _schaffer_f6_nb(X):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        r2 = X[i, 0] * X[i, 0] + X[i, 1] * X[i, 1]
        s = math.sin(math.sqrt(r2))
        d = 1.0 + 0.001 * r2
        out[i] = 0.5 + (s * s - 0.5) / (d * d)
    return out


@jit
def _ackley_nb(X):
    n = X.shape[1]
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        sq = 0.0
        cs = 0.0
        for j in range(n):
            x = X[i, j]
            sq += x * x
            cs += math.cos(2.0 * math.pi * x)
        out[i] = -20.0 * math.exp(-0.2 * math.sqrt(sq / n)) - math.exp(cs / n) + 20.0 + math.e
    return out


# numpy kernels --------------------------------------------------------------

def _sphere_np(X):
    return np.einsum("ij,ij->i", X, X)


def _rosenbrock_np(X):
    a = X[:, 1:] - X[:, :-1] ** 2
    b = X[:, :-1] - 1.0
    return np.sum(100.0 * a * a + b * b, axis=1)


def _rastrigin_np(X):
    return np.sum(X * X - 10.0 * np.cos(2.0 * np.pi * X) + 10.0, axis=1)


def _schaffer_f6_np(X):
    r2 = X[:, 0] ** 2 + X[:, 1] ** 2
    d = 1.0 + 0.001 * r2
    return 0.5 + (np.sin(np.sqrt(r2)) ** 2 - 0.5) / (d * d)


def _ackley_np(X):
    n = X.shape[1]
    sq = np.sum(X * X, axis=1) / n
    cs = np.sum(np.cos(2.0 * np.pi * X), axis=1) / n
    return -20.0 * np.exp(-0.2 * np.sqrt(sq)) - np.exp(cs) + 20.0 + np.e


_KERNELS = {
    ObjectiveId.SPHERE: (_sphere_nb, _sphere_np),
    ObjectiveId.ROSENBROCK: (_rosenbrock_nb, _rosenbrock_np),
    ObjectiveId.RASTRIGIN: (_rastrigin_nb, _rastrigin_np),
    ObjectiveId.SCHAFFER_F6: (_schaffer_f6_nb, _schaffer_f6_np),
    ObjectiveId.ACKLEY: (_ackley_nb, _ackley_np),
}


def batch_kernel(oid: ObjectiveId, backend: str | None = None):
    """Batch evaluator for ``oid``; ``backend`` forces "numba" or "numpy"."""
    fast, slow = _KERNELS[oid]
    if backend == "numba":
        return fast
    if backend == "numpy":
        return slow
    return pick(fast, slow)


def _check_dims(oid: ObjectiveId, n: int) -> None:
    if oid is ObjectiveId.SCHAFFER_F6 and n != 2:
        raise DimensionError("Schaffer's f6 is defined for 2 variables")
    if oid is ObjectiveId.ROSENBROCK and n < 2:
        raise DimensionError("Rosenbrock needs at least 2 variables")
    if n < 1:
        raise DimensionError("need at least one variable")


def eval_single(oid: ObjectiveId, x) -> float:
    if oid not in _KERNELS:
        raise ValueError(f"{oid} is not a single-objective function")
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if X.shape[0] != 1:
        raise DimensionError("eval_single takes one vector")
    _check_dims(oid, X.shape[1])
    return float(batch_kernel(oid)(X)[0])


def single_objective(oid: ObjectiveId, dims: int):
    """Batch objective callable with a dimension check on every call."""
    _check_dims(oid, dims)
    kernel = batch_kernel(oid)

    def objective(X):
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
        if X.shape[1] != dims:
            raise DimensionError(f"expected {dims} variables, got {X.shape[1]}")
        return kernel(X)

    objective.__name__ = oid.value
    return objective


@dataclass(frozen=True)
class BenchSetup:
    dims: int
    init_lo: float
    init_hi: float
    vmax: float
    w_clubs: float
    closeness: float

    def space(self) -> SearchSpace:
        return SearchSpace.box(self.init_lo, self.init_hi, self.dims, vmax=self.vmax)


#: Dimensions, init box, speed cap, C-PSO inertia range and closeness target
#: used for the swarm benchmark experiments.
BENCH_SETUPS = {
    ObjectiveId.SPHERE: BenchSetup(30, -100.0, 100.0, 100.0, 1.2, 1e-4),
    ObjectiveId.ROSENBROCK: BenchSetup(30, -30.0, 30.0, 30.0, 1.2, 100.0),
    ObjectiveId.RASTRIGIN: BenchSetup(30, -5.12, 5.12, 5.12, 1.4, 50.0),
    ObjectiveId.SCHAFFER_F6: BenchSetup(2, -100.0, 100.0, 100.0, 1.65, 1e-3),
    ObjectiveId.ACKLEY: BenchSetup(30, -32.0, 32.0, 32.0, 1.36, 1e-2),
}


# DTLZ ---------------------------------------------------------------------

DTLZ_DEFAULT_VARS = {
    ObjectiveId.DTLZ1: 40,
    ObjectiveId.DTLZ2: 30,
    ObjectiveId.DTLZ3: 30,
    ObjectiveId.DTLZ4: 30,
}


def _g_rastrigin(xm):
    k = xm.shape[-1]
    return 100.0 * (k + np.sum((xm - 0.5) ** 2 - np.cos(20.0 * np.pi * (xm - 0.5)), axis=-1))


def _g_sphere(xm):
    return np.sum((xm - 0.5) ** 2, axis=-1)


def _linear_front(pos, g):
    # f_m = 0.5 (1+g) * prod(x_1..x_{M-m}) * (1 - x_{M-m+1})
    n_pts, mm1 = pos.shape
    M = mm1 + 1
    F = np.empty((n_pts, M))
    for m in range(M):
        keep = M - 1 - m
        f = 0.5 * (1.0 + g) * np.prod(pos[:, :keep], axis=1)
        if m > 0:
            f = f * (1.0 - pos[:, keep])
        F[:, m] = f
    return F


def _spherical_front(pos, g):
    n_pts, mm1 = pos.shape
    M = mm1 + 1
    theta = pos * (np.pi / 2.0)
    F = np.empty((n_pts, M))
    for m in range(M):
        keep = M - 1 - m
        f = (1.0 + g) * np.prod(np.cos(theta[:, :keep]), axis=1)
        if m > 0:
            f = f * np.sin(theta[:, keep])
        F[:, m] = f
    return F


def eval_dtlz(oid: ObjectiveId, x, M: int, alpha: float = 100.0) -> np.ndarray:
    """Objective vector(s) of a DTLZ problem.

    ``x`` may be one vector or an (N, n) batch; the first ``M - 1`` variables
    place the point on the front and the remaining ``k = n - M + 1`` feed g.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    n = X.shape[1]
    if M < 2 or n - M + 1 < 1:
        raise DimensionError(f"DTLZ needs n = k + M - 1 with k >= 1 (n={n}, M={M})")
    if np.any(X < 0.0) or np.any(X > 1.0) or not np.all(np.isfinite(X)):
        raise ValueError("DTLZ variables must lie in [0, 1]")
    pos, xm = X[:, : M - 1], X[:, M - 1:]
    if oid is ObjectiveId.DTLZ1:
        F = _linear_front(pos, _g_rastrigin(xm))
    elif oid is ObjectiveId.DTLZ2:
        F = _spherical_front(pos, _g_sphere(xm))
    elif oid is ObjectiveId.DTLZ3:
        F = _spherical_front(pos, _g_rastrigin(xm))
    elif oid is ObjectiveId.DTLZ4:
        F = _spherical_front(pos ** alpha, _g_sphere(xm))
    else:
        raise ValueError(f"{oid} is not a DTLZ problem")
    return F[0] if single else F


def dtlz_objective(oid: ObjectiveId, M: int, alpha: float = 100.0):
    def objective(X):
        return eval_dtlz(oid, X, M, alpha)

    objective.__name__ = f"{oid.value}_m{M}"
    return objective


def distance_to_front(oid: ObjectiveId, f, normalized: bool = True) -> np.ndarray | float:
    """Orthogonal distance of objective vector(s) to the known Pareto front.

    DTLZ1 uses the plane sum(f) = 0.5; ``normalized=False`` drops the
    ``1/sqrt(M)`` factor. DTLZ2-4 use the unit sphere.
    """
    F = np.asarray(f, dtype=float)
    single = F.ndim == 1
    F = np.atleast_2d(F)
    M = F.shape[1]
    if oid is ObjectiveId.DTLZ1:
        d = np.abs(F.sum(axis=1) - 0.5)
        if normalized:
            d = d / math.sqrt(M)
    elif oid in (ObjectiveId.DTLZ2, ObjectiveId.DTLZ3, ObjectiveId.DTLZ4):
        d = np.abs(np.linalg.norm(F, axis=1) - 1.0)
    else:
        raise ValueError(f"{oid} has no analytic front")
    return float(d[0]) if single else d
