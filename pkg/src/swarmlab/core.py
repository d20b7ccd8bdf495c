"""Search spaces, seeded random streams, run traces and run statistics."""
from __future__ import annotations

import enum
import statistics
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

#: Batch objective: maps an (N, n) array of candidates to N fitness values.
Objective = Callable[[np.ndarray], np.ndarray]


class BoundaryPolicy(enum.Enum):
    UNBOUNDED = "unbounded"
    CLAMP_LOWER_ONLY = "clamp_lower_only"


@dataclass(frozen=True)
class SearchSpace:
    """Per-dimension initialization box plus the optional hard limits.

    Parameters
    ----------
    init_lo, init_hi
        Initialization range per dimension.
    hard_lo
        Lower clamp used by ``BoundaryPolicy.CLAMP_LOWER_ONLY``. Defaults to
        ``init_lo`` under that policy.
    vmax
        Absolute speed cap per dimension for swarm optimizers.
    """

    init_lo: np.ndarray
    init_hi: np.ndarray
    hard_lo: Optional[np.ndarray] = None
    vmax: Optional[np.ndarray] = None
    boundary_policy: BoundaryPolicy = BoundaryPolicy.UNBOUNDED

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.init_lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.init_hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("init_lo and init_hi must be 1-d arrays of equal length")
        if not np.all(lo <= hi):
            raise ValueError("init_lo must not exceed init_hi")
        object.__setattr__(self, "init_lo", lo)
        object.__setattr__(self, "init_hi", hi)
        if self.hard_lo is None and self.boundary_policy is BoundaryPolicy.CLAMP_LOWER_ONLY:
            object.__setattr__(self, "hard_lo", lo.copy())
        elif self.hard_lo is not None:
            object.__setattr__(self, "hard_lo", _broadcast(self.hard_lo, lo.size, "hard_lo"))
        if self.vmax is not None:
            vmax = _broadcast(self.vmax, lo.size, "vmax")
            if not np.all(vmax > 0):
                raise ValueError("vmax must be strictly positive")
            object.__setattr__(self, "vmax", vmax)

    @classmethod
    def box(cls, lo: float, hi: float, dims: int, vmax: Optional[float] = None, **kw) -> "SearchSpace":
        vm = None if vmax is None else np.full(dims, float(vmax))
        return cls(np.full(dims, float(lo)), np.full(dims, float(hi)), vmax=vm, **kw)

    @property
    def dims(self) -> int:
        return self.init_lo.size

    @property
    def width(self) -> np.ndarray:
        return self.init_hi - self.init_lo


def _broadcast(value, n, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must have {n} components")
    return arr.copy()


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream for one run. The same seed replays on every platform."""
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def run_seed(base_seed: int, run_index: int) -> int:
    return (int(base_seed) + int(run_index)) & 0xFFFFFFFFFFFFFFFF


def sample_uniform(space: SearchSpace, rng: np.random.Generator, n: Optional[int] = None) -> np.ndarray:
    """Uniform draw inside the initialization box; ``n`` rows when given."""
    shape = (space.dims,) if n is None else (n, space.dims)
    return space.init_lo + rng.random(shape) * space.width


def apply_boundary(space: SearchSpace, position: np.ndarray) -> np.ndarray:
    if space.boundary_policy is BoundaryPolicy.UNBOUNDED:
        return position
    return np.maximum(position, space.hard_lo)


def batched(f: Callable[[np.ndarray], float]) -> Objective:
    """Lift a single-vector objective to the batch interface."""

    def objective(X):
        X = np.atleast_2d(X)
        return np.array([f(x) for x in X], dtype=float)

    objective.__name__ = getattr(f, "__name__", "objective")
    return objective


@dataclass
class RunStats:
    """Best-so-far trace of one optimizer run (minimization)."""

    iterations: np.ndarray
    evals: np.ndarray
    best: np.ndarray
    failed_evals: int = 0

    @property
    def final_best(self) -> float:
        return float(self.best[-1])

    @property
    def total_evals(self) -> int:
        return int(self.evals[-1])

    def iterations_to_closeness(self, closeness: float) -> Optional[int]:
        hit = np.flatnonzero(self.best <= closeness)
        return int(self.iterations[hit[0]]) if hit.size else None

    def succeeded(self, closeness: float) -> bool:
        return self.iterations_to_closeness(closeness) is not None

    def best_at_evals(self, checkpoints: Sequence[int]) -> np.ndarray:
        """Best-so-far value after each evaluation checkpoint."""
        idx = np.searchsorted(self.evals, np.asarray(checkpoints), side="right") - 1
        out = np.full(len(idx), np.nan)
        ok = idx >= 0
        out[ok] = self.best[idx[ok]]
        return out


class TraceRecorder:
    """Collects (iteration, evals, best) rows and keeps best non-increasing."""

    def __init__(self):
        self._it: list[int] = []
        self._ev: list[int] = []
        self._best: list[float] = []
        self.failed_evals = 0

    def record(self, iteration: int, evals: int, best: float) -> None:
        if self._best and best > self._best[-1]:
            best = self._best[-1]
        self._it.append(iteration)
        self._ev.append(evals)
        self._best.append(float(best))

    def finish(self) -> RunStats:
        return RunStats(
            np.asarray(self._it, dtype=np.int64),
            np.asarray(self._ev, dtype=np.int64),
            np.asarray(self._best, dtype=float),
            self.failed_evals,
        )


@dataclass(frozen=True)
class RunSummary:
    avg: Optional[float]
    median: Optional[float]
    max: Optional[int]
    min: Optional[int]
    success_rate: float
    n_runs: int
    final_mean: float
    final_median: float
    final_std: float
    final_min: float
    final_max: float
    hits: list = field(default_factory=list)


def summarize_runs(runs: Sequence[RunStats], closeness: float) -> RunSummary:
    """Iterations-to-closeness statistics over successful runs only.

    The success rate is taken over every run; the final-value columns cover
    all runs as well.
    """
    if not runs:
        raise ValueError("summarize_runs needs at least one run")
    hits = [r.iterations_to_closeness(closeness) for r in runs]
    ok = [h for h in hits if h is not None]
    finals = np.array([r.final_best for r in runs])
    return RunSummary(
        avg=float(np.mean(ok)) if ok else None,
        median=float(statistics.median(ok)) if ok else None,
        max=max(ok) if ok else None,
        min=min(ok) if ok else None,
        success_rate=100.0 * len(ok) / len(runs),
        n_runs=len(runs),
        final_mean=float(finals.mean()),
        final_median=float(np.median(finals)),
        final_std=float(finals.std(ddof=1)) if len(runs) > 1 else 0.0,
        final_min=float(finals.min()),
        final_max=float(finals.max()),
        hits=hits,
    )
