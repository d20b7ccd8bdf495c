"""Real-coded genetic algorithm.

Selection (tournament, fitness-proportionate, linear/exponential rank), SBX
recombination, polynomial mutation, and the elitist generational loop used for
the motor identification runs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Objective, RunStats, SearchSpace, TraceRecorder, apply_boundary, sample_uniform


class Selection(enum.Enum):
    TOURNAMENT = "tournament"
    FPS = "fps"
    LINEAR_RANK = "linear_rank"
    EXPONENTIAL_RANK = "exponential_rank"


@dataclass(frozen=True)
class GaConfig:
    pop_size: int = 50
    p_c: float = 0.5
    eta_c: float = 15.0
    p_m: float = 0.01
    eta_m: float = 15.0
    tournament_size: int = 2
    selection: Selection = Selection.TOURNAMENT
    rank_s: float = 1.5
    sigma_scaling: bool = False
    sigma_c: float = 2.0

    def __post_init__(self):
        if not (0.0 <= self.p_c <= 1.0 and 0.0 <= self.p_m <= 1.0):
            raise ValueError("rates must lie in [0, 1]")
        if self.eta_c <= 0 or self.eta_m <= 0:
            raise ValueError("distribution indices must be positive")
        if self.tournament_size < 2:
            raise ValueError("tournament size must be at least 2")
        if self.pop_size < 2:
            raise ValueError("population needs at least 2 individuals")
        if self.selection is Selection.LINEAR_RANK and not 1.0 <= self.rank_s <= 2.0:
            raise ValueError("linear rank s must lie in [1, 2]")
        if self.selection is Selection.EXPONENTIAL_RANK and not 0.0 < self.rank_s <= 1.0:
            raise ValueError("exponential rank s must lie in (0, 1]")


@dataclass
class RealIndividual:
    genome: np.ndarray
    fitness: float


# selection -------------------------------------------------------------------

def select_tournament(fitness: np.ndarray, ts: int, rng: np.random.Generator) -> int:
    """Index of the fittest of ``ts`` uniform picks, drawn with replacement."""
    n = len(fitness)
    if n == 0:
        raise ValueError("empty population")
    picks = rng.integers(0, n, size=ts)
    # first pick wins ties
    return int(picks[np.argmin(np.asarray(fitness)[picks])])


def minimization_scores(fitness: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Positive selection scores for a minimized fitness: worst - f + eps."""
    f = np.asarray(fitness, dtype=float)
    return f.max() - f + eps


def sigma_scale(scores: np.ndarray, c: float = 2.0) -> np.ndarray:
    """Goldberg's sigma truncation, max(f - (mean - c * std), 0)."""
    s = np.asarray(scores, dtype=float)
    return np.maximum(s - (s.mean() - c * s.std()), 0.0)


def roulette(scores: np.ndarray, rng: np.random.Generator) -> int:
    s = np.asarray(scores, dtype=float)
    cum = np.cumsum(s)
    return int(min(np.searchsorted(cum, rng.random() * cum[-1], side="right"), len(s) - 1))


def select_fps(scores: np.ndarray, rng: np.random.Generator) -> int:
    """Roulette-wheel pick with probability score / sum(scores)."""
    s = np.asarray(scores, dtype=float)
    if s.size == 0:
        raise ValueError("empty population")
    if np.any(s <= 0) or not np.all(np.isfinite(s)):
        raise ValueError("fitness-proportionate selection needs positive finite scores")
    return roulette(s, rng)


def rank_scores(n: int, scheme: Selection, s: float) -> np.ndarray:
    """Scores by rank position, best first.

    Linear: ``s - 2 (i - 1)(s - 1)/(N - 1)`` for rank ``i`` in 1..N.
    Exponential: ``1, s, s**2, ...``.
    """
    i = np.arange(n, dtype=float)
    if scheme is Selection.LINEAR_RANK:
        if not 1.0 <= s <= 2.0:
            raise ValueError("linear rank s must lie in [1, 2]")
        if n == 1:
            return np.array([s])
        return s - 2.0 * i * (s - 1.0) / (n - 1)
    if scheme is Selection.EXPONENTIAL_RANK:
        if not 0.0 < s <= 1.0:
            raise ValueError("exponential rank s must lie in (0, 1]")
        return s ** i
    raise ValueError(f"{scheme} is not a rank scheme")


def select_rank(fitness: np.ndarray, scheme: Selection, s: float, rng: np.random.Generator) -> int:
    f = np.asarray(fitness, dtype=float)
    if f.size == 0:
        raise ValueError("empty population")
    order = np.argsort(f, kind="stable")
    scores = rank_scores(f.size, scheme, s)
    return int(order[roulette(scores, rng)])


# variation -------------------------------------------------------------------

def sbx_beta(u: np.ndarray, eta: float) -> np.ndarray:
    """Spread factor: (2u)^(1/(eta+1)) below 0.5, (1/(2(1-u)))^(1/(eta+1)) above."""
    e = 1.0 / (eta + 1.0)
    u = np.asarray(u, dtype=float)
    lo = u <= 0.5
    return np.where(lo, (2.0 * u) ** e, (1.0 / (2.0 * (1.0 - np.where(lo, 0.0, u)))) ** e)


def sbx_from_u(p1: np.ndarray, p2: np.ndarray, u: np.ndarray, eta_c: float):
    beta = sbx_beta(np.asarray(u, dtype=float), float(eta_c))
    o1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    o2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    return o1, o2


def sbx_crossover(p1, p2, eta_c: float, rng: np.random.Generator, exchange: bool = False):
    """Simulated binary crossover with one spread factor per component.

    With ``exchange`` each component's pair of offspring values is swapped
    with probability 1/2, as in Deb's reference code. Without it, a large
    ``eta_c`` leaves the first offspring next to the first parent in every
    component, so little recombination happens across components.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.shape != p2.shape:
        raise ValueError("parents must have equal length")
    o1, o2 = sbx_from_u(p1, p2, rng.random(p1.shape), eta_c)
    if exchange:
        swap = rng.random(p1.shape) < 0.5
        o1, o2 = np.where(swap, o2, o1), np.where(swap, o1, o2)
    return o1, o2


def mutation_delta(r: np.ndarray, eta_m: float) -> np.ndarray:
    e = 1.0 / (eta_m + 1.0)
    r = np.asarray(r, dtype=float)
    return np.where(r < 0.5, (2.0 * r) ** e - 1.0, 1.0 - (2.0 * (1.0 - r)) ** e)


def polynomial_mutation(x, lo, hi, p_m: float, eta_m: float, rng: np.random.Generator) -> np.ndarray:
    """Mutate each component with probability ``p_m``.

    The step is ``(hi - lo) * delta``; no clipping is applied here, the caller's
    boundary policy decides what happens outside the box. Two uniforms are
    drawn per component (gate, then r) so replay does not depend on ``p_m``.
    """
    x = np.asarray(x, dtype=float)
    gate = rng.random(x.shape)
    r = rng.random(x.shape)
    step = (np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float)) * mutation_delta(r, eta_m)
    return np.where(gate < p_m, x + step, x)


# generational loop -----------------------------------------------------------

def _select(fitness, cfg: GaConfig, rng) -> int:
    if cfg.selection is Selection.TOURNAMENT:
        return select_tournament(fitness, cfg.tournament_size, rng)
    if cfg.selection is Selection.FPS:
        scores = minimization_scores(fitness)
        if cfg.sigma_scaling:
            scores = sigma_scale(scores, cfg.sigma_c) + 1e-12
        return select_fps(scores, rng)
    return select_rank(fitness, cfg.selection, cfg.rank_s, rng)


@dataclass
class GaResult:
    stats: RunStats
    best: RealIndividual
    generation_best: np.ndarray


def ga_run(objective: Objective, space: SearchSpace, cfg: GaConfig, budget: int,
           rng: np.random.Generator, lo: Optional[np.ndarray] = None,
           hi: Optional[np.ndarray] = None) -> GaResult:
    """Elitist real-coded GA, stopping at ``budget`` objective evaluations.

    Per generation: N parents by mating selection, SBX per pair with
    probability ``p_c`` (copies otherwise), polynomial mutation of the current
    population with the incumbent best left untouched, then survival
    tournaments over parents + offspring with the overall best kept in slot 0.
    Mutation bounds default to the initialization box.
    """
    N = cfg.pop_size
    if budget < N:
        raise ValueError("budget must cover the initial population")
    lo = space.init_lo if lo is None else lo
    hi = space.init_hi if hi is None else hi
    rec = TraceRecorder()

    pop = apply_boundary(space, sample_uniform(space, rng, N))
    fit = np.asarray(objective(pop), dtype=float)
    evals = N
    gen = 0
    rec.record(gen, evals, fit.min())
    gen_best = [fit.min()]

    while True:
        # mating
        parents = np.array([_select(fit, cfg, rng) for _ in range(N)])
        kids = np.empty_like(pop)
        for k in range(0, N, 2):
            a = pop[parents[k]]
            b = pop[parents[(k + 1) % N]]
            if rng.random() < cfg.p_c:
                o1, o2 = sbx_crossover(a, b, cfg.eta_c, rng)
            else:
                o1, o2 = a.copy(), b.copy()
            kids[k] = o1
            if k + 1 < N:
                kids[k + 1] = o2
        kids = apply_boundary(space, kids)

        # mutation of the current population, best immune
        elite = int(np.argmin(fit))
        mutated = pop.copy()
        for i in range(N):
            m = polynomial_mutation(pop[i], lo, hi, cfg.p_m, cfg.eta_m, rng)
            if i != elite:
                mutated[i] = m
        mutated = apply_boundary(space, mutated)
        changed = np.flatnonzero(np.any(mutated != pop, axis=1))

        if evals + N + changed.size > budget:
            break
        mfit = fit.copy()
        if changed.size:
            mfit[changed] = objective(mutated[changed])
        kfit = np.asarray(objective(kids), dtype=float)
        evals += N + changed.size

        # survival
        pool = np.vstack([mutated, kids])
        pfit = np.concatenate([mfit, kfit])
        keep = np.empty(N, dtype=np.int64)
        keep[0] = int(np.argmin(pfit))
        for s in range(1, N):
            keep[s] = select_tournament(pfit, cfg.tournament_size, rng)
        pop, fit = pool[keep], pfit[keep]
        gen += 1
        gen_best.append(fit.min())
        rec.record(gen, evals, fit.min())

    i = int(np.argmin(fit))
    return GaResult(rec.finish(), RealIndividual(pop[i].copy(), float(fit[i])), np.asarray(gen_best))
