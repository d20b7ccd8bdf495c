"""Axis-step local search over a discretised space.

From a random start, every sweep evaluates the 2n points one step away along
each axis and moves to the best of them if it is no worse than the current
point.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Objective, RunStats, SearchSpace, TraceRecorder, apply_boundary, sample_uniform


@dataclass(frozen=True)
class LsConfig:
    """``step`` defaults to ``step_fraction`` of the initialization width."""

    max_evals: int
    step: Optional[np.ndarray] = None
    step_fraction: float = 0.001

    def steps(self, space: SearchSpace) -> np.ndarray:
        if self.step is None:
            d = self.step_fraction * space.width
        else:
            d = np.broadcast_to(np.asarray(self.step, dtype=float), (space.dims,)).copy()
        if not np.all(d > 0):
            raise ValueError("line-search steps must be strictly positive")
        return d


@dataclass
class LsResult:
    stats: RunStats
    best_x: np.ndarray
    best_f: float
    moves: int
    reason: str


def neighbors(x: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """The 2n axis neighbours, ordered dim 0 +, dim 0 -, dim 1 +, ..."""
    n = x.size
    out = np.repeat(x[None, :], 2 * n, axis=0)
    idx = np.arange(n)
    out[2 * idx, idx] += delta
    out[2 * idx + 1, idx] -= delta
    return out


def ls_run(objective: Objective, space: SearchSpace, cfg: LsConfig, rng: np.random.Generator,
           x0: Optional[np.ndarray] = None) -> LsResult:
    """Descend until every neighbour is strictly worse or the budget runs out.

    Ties between neighbours go to the lowest dimension, + direction first. A
    move back onto one of the last 2n + 1 visited points ends the walk, which
    stops endless 2-cycles on plateaus.
    """
    n = space.dims
    if cfg.max_evals < 2 * n + 1:
        raise ValueError("budget must cover the start point and one sweep")
    delta = cfg.steps(space)
    x = sample_uniform(space, rng) if x0 is None else np.array(x0, dtype=float)
    x = apply_boundary(space, x)
    fx = float(np.asarray(objective(x[None, :]))[0])
    evals = 1
    rec = TraceRecorder()
    rec.record(0, evals, fx)
    visited = deque([x.tobytes()], maxlen=2 * n + 1)
    moves = 0
    reason = "budget"
    while evals + 2 * n <= cfg.max_evals:
        nb = apply_boundary(space, neighbors(x, delta))
        F = np.asarray(objective(nb), dtype=float)
        evals += 2 * n
        k = int(np.argmin(F))
        if F[k] > fx:
            rec.record(moves, evals, fx)
            reason = "local minimum"
            break
        key = nb[k].tobytes()
        if key in visited:
            rec.record(moves, evals, fx)
            reason = "cycle"
            break
        x, fx = nb[k].copy(), float(F[k])
        visited.append(key)
        moves += 1
        rec.record(moves, evals, fx)
    return LsResult(rec.finish(), x, fx, moves, reason)
