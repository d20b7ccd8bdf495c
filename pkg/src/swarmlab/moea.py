"""Pareto dominance, the polyploid multi-objective GA, NSGA-II and the
occupation-based diversity metric.

Objective vectors are minimized. Populations of objective vectors are (N, M)
arrays throughout.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._accel import jit, pick
from .benchmarks import ObjectiveId, distance_to_front
from .ga import polynomial_mutation, sbx_crossover


class Relation(enum.Enum):
    DOMINATES = "dominates"
    DOMINATED = "dominated"
    INDIFFERENT = "indifferent"
    EQUAL = "equal"


def dominates(a, b) -> Relation:
    """Relation of ``a`` to ``b``.

    ``a`` dominates ``b`` when it is no worse in every objective and the two
    differ. Identical vectors are ``EQUAL``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("objective vectors differ in length")
    le = np.all(a <= b)
    ge = np.all(a >= b)
    if le and ge:
        return Relation.EQUAL
    if le:
        return Relation.DOMINATES
    if ge:
        return Relation.DOMINATED
    return Relation.INDIFFERENT


def weakly_dominates(a, b) -> bool:
    """True when ``a`` is no worse than ``b`` in every objective."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("objective vectors differ in length")
    return bool(np.all(a <= b))


@jit
def _domination_matrix_nb(F):
    N, M = F.shape
    D = np.zeros((N, N), dtype=np.bool_)
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            le = True
            lt = False
            for m in range(M):
                if F[i, m] > F[j, m]:
                    le = False
                    break
                if F[i, m] < F[j, m]:
                    lt = True
            D[i, j] = le and lt
    return D


def _domination_matrix_np(F):
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


_domination_matrix = pick(_domination_matrix_nb, _domination_matrix_np)


def domination_matrix(F) -> np.ndarray:
    """``D[i, j]`` is True when row ``i`` dominates row ``j``."""
    return _domination_matrix(np.ascontiguousarray(F, dtype=float))


def domination_counts(F) -> np.ndarray:
    """Number of population members dominating each row."""
    return domination_matrix(F).sum(axis=0)


def nondominated_set(F) -> np.ndarray:
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.shape[0] == 0:
        raise ValueError("empty population")
    return np.flatnonzero(domination_counts(F) == 0)


def fast_nondominated_sort(F) -> list[np.ndarray]:
    """Fronts as index arrays, first front first."""
    D = domination_matrix(F)
    counts = D.sum(axis=0)
    fronts = []
    current = np.flatnonzero(counts == 0)
    while current.size:
        fronts.append(current)
        counts = counts - D[current].sum(axis=0)
        counts[current] = -1
        current = np.flatnonzero(counts == 0)
    return fronts


def crowding_distance(F) -> np.ndarray:
    """Crowding distance within one front; boundary points get +inf."""
    F = np.asarray(F, dtype=float)
    n, M = F.shape
    d = np.zeros(n)
    if n <= 2:
        d[:] = np.inf
        return d
    for m in range(M):
        order = np.argsort(F[:, m], kind="stable")
        fm = F[order, m]
        d[order[0]] = d[order[-1]] = np.inf
        span = fm[-1] - fm[0]
        if span > 0:
            d[order[1:-1]] += (fm[2:] - fm[:-2]) / span
    return d


# polyploid GA ----------------------------------------------------------------

@dataclass
class PolyploidVector:
    """Dominant-alleles chromosome plus ``d - 1`` redundant ones.

    Only ``das`` is ever evaluated.
    """

    das: np.ndarray
    redundant: np.ndarray
    objectives: Optional[np.ndarray] = None

    def __post_init__(self):
        self.das = np.asarray(self.das, dtype=float)
        self.redundant = np.asarray(self.redundant, dtype=float).reshape(-1, self.das.size)

    @property
    def ploidy(self) -> int:
        return 1 + self.redundant.shape[0]

    def chromosomes(self) -> np.ndarray:
        return np.vstack([self.das[None, :], self.redundant])


@dataclass(frozen=True)
class MoeaConfig:
    pop_size: int = 100
    ploidy: int = 2
    p_c: float = 1.0
    eta_c: float = 20.0
    p_m: Optional[float] = None  # defaults to 1/n
    eta_m: float = 15.0
    sbx_exchange: bool = False  # per-component swap of the two SBX offspring

    def __post_init__(self):
        if self.ploidy < 1:
            raise ValueError("ploidy must be at least 1")
        if self.pop_size < 2:
            raise ValueError("population needs at least 2 members")

    def mutation_rate(self, n: int) -> float:
        return 1.0 / n if self.p_m is None else self.p_m


def representative(chroms: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One allele per locus, picked uniformly over the ``d`` chromosomes."""
    d, n = chroms.shape
    pick_ = rng.integers(0, d, size=n)
    return chroms[pick_, np.arange(n)]


def polyploid_mate(p1: PolyploidVector, p2: PolyploidVector, eta_c: float, eta_m: float,
                   p_m: float, lo, hi, rng: np.random.Generator, p_c: float = 1.0,
                   exchange: bool = False) -> PolyploidVector:
    """One child from two polyploid parents.

    Each parent contributes a representative chromosome; the child DAS is one
    of the two SBX offspring of the representatives (chosen at random), then
    mutated and clipped to the box. The redundant chromosomes are distinct
    picks from the parents' 2d chromosomes, copied unmutated.
    """
    c1, c2 = p1.chromosomes(), p2.chromosomes()
    if c1.shape != c2.shape:
        raise ValueError("parents differ in ploidy or length")
    d = c1.shape[0]
    r1 = representative(c1, rng)
    r2 = representative(c2, rng)
    if rng.random() < p_c:
        o1, o2 = sbx_crossover(r1, r2, eta_c, rng, exchange)
    else:
        o1, o2 = r1.copy(), r2.copy()
    child = o1 if rng.random() < 0.5 else o2
    child = np.clip(polynomial_mutation(child, lo, hi, p_m, eta_m, rng), lo, hi)
    pool = np.vstack([c1, c2])
    extra = pool[rng.choice(2 * d, size=d - 1, replace=False)] if d > 1 else np.empty((0, child.size))
    return PolyploidVector(child, extra.copy())


def mating_pairs(pool: np.ndarray, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Random pairing without replacement; an odd leftover gets a random partner."""
    pool = np.asarray(pool)
    if pool.size == 1:
        return [(int(pool[0]), int(pool[0]))]
    perm = rng.permutation(pool)
    pairs = [(int(perm[k]), int(perm[k + 1])) for k in range(0, perm.size - 1, 2)]
    if perm.size % 2:
        mate = int(rng.choice(perm[:-1]))
        pairs.append((int(perm[-1]), mate))
    return pairs


def survive(F: np.ndarray, N: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of the N least dominated rows, ties in random order."""
    counts = domination_counts(F)
    keys = rng.random(F.shape[0])
    order = np.lexsort((keys, counts))
    return order[:N]


def _pack(pop: list[PolyploidVector]) -> np.ndarray:
    return np.vstack([p.das for p in pop])


def polyploid_generation(pop: list[PolyploidVector], objective: Callable, cfg: MoeaConfig,
                         lo, hi, rng: np.random.Generator) -> tuple[list[PolyploidVector], int]:
    """One generation; returns the survivors and the evaluations spent."""
    if len(pop) < 2:
        raise ValueError("population needs at least 2 members")
    F = np.vstack([p.objectives for p in pop])
    pool = nondominated_set(F)
    n = pop[0].das.size
    p_m = cfg.mutation_rate(n)
    kids = [polyploid_mate(pop[a], pop[b], cfg.eta_c, cfg.eta_m, p_m, lo, hi, rng, cfg.p_c,
                           cfg.sbx_exchange)
            for a, b in mating_pairs(pool, rng)]
    KF = np.atleast_2d(objective(_pack(kids)))
    for k, f in zip(kids, KF):
        k.objectives = f
    everyone = pop + kids
    keep = survive(np.vstack([F, KF]), len(pop), rng)
    return [everyone[i] for i in keep], len(kids)


def random_polyploid(N: int, n: int, d: int, lo, hi, rng: np.random.Generator) -> list[PolyploidVector]:
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,))
    X = lo + rng.random((N, d, n)) * (hi - lo)
    return [PolyploidVector(X[i, 0], X[i, 1:]) for i in range(N)]


@dataclass
class MooResult:
    X: np.ndarray
    F: np.ndarray
    evals: np.ndarray
    avg_distance: np.ndarray
    population: Optional[list] = None
    snapshots: list = field(default_factory=list)


def _checkpoint(result_rows, evals, F, oid, snaps, keep):
    if oid is not None:
        result_rows.append((evals, float(np.mean(distance_to_front(oid, F)))))
    else:
        result_rows.append((evals, math.nan))
    if keep:
        snaps.append((evals, F.copy()))


def polyploid_run(objective: Callable, n: int, cfg: MoeaConfig, budget: int,
                  rng: np.random.Generator, lo=0.0, hi=1.0, oid: Optional[ObjectiveId] = None,
                  keep_snapshots: bool = False) -> MooResult:
    """Polyploid GA until the next generation would exceed ``budget``.

    A generation spends one evaluation per mating pair, so the final count
    can fall short of the budget by less than one generation.
    """
    N = cfg.pop_size
    if budget < N:
        raise ValueError("budget must cover the initial population")
    pop = random_polyploid(N, n, cfg.ploidy, lo, hi, rng)
    F0 = np.atleast_2d(objective(_pack(pop)))
    for p, f in zip(pop, F0):
        p.objectives = f
    evals = N
    rows, snaps = [], []
    _checkpoint(rows, evals, F0, oid, snaps, keep_snapshots)
    while True:
        F = np.vstack([p.objectives for p in pop])
        expected = math.ceil(nondominated_set(F).size / 2)
        if evals + expected > budget:
            break
        pop, spent = polyploid_generation(pop, objective, cfg, lo, hi, rng)
        evals += spent
        _checkpoint(rows, evals, np.vstack([p.objectives for p in pop]), oid,
                    snaps, keep_snapshots)
    ev, dist = zip(*rows)
    return MooResult(_pack(pop), np.vstack([p.objectives for p in pop]), np.asarray(ev),
                     np.asarray(dist), pop, snaps)


def extract_population(pop: list[PolyploidVector], objective: Callable, oid: ObjectiveId,
                       normalized: bool = True) -> dict:
    """Evaluate every chromosome of every member as its own solution.

    Returns the average front distance of the original and the extracted
    population, and the percentage of extracted solutions that some other
    extracted solution dominates.
    """
    F_orig = np.vstack([p.objectives for p in pop])
    allx = np.vstack([p.chromosomes() for p in pop])
    F_all = np.atleast_2d(objective(allx))
    dominated = domination_counts(F_all) > 0
    return {
        "avg_distance_original": float(np.mean(distance_to_front(oid, F_orig, normalized))),
        "avg_distance_extracted": float(np.mean(distance_to_front(oid, F_all, normalized))),
        "pct_dominated": 100.0 * float(np.mean(dominated)),
    }


# NSGA-II ---------------------------------------------------------------------

def _rank_and_crowding(F):
    fronts = fast_nondominated_sort(F)
    rank = np.empty(F.shape[0], dtype=np.int64)
    crowd = np.empty(F.shape[0])
    for r, fr in enumerate(fronts):
        rank[fr] = r
        crowd[fr] = crowding_distance(F[fr])
    return rank, crowd, fronts


def _crowded_better(a, b, rank, crowd):
    if rank[a] != rank[b]:
        return a if rank[a] < rank[b] else b
    if crowd[a] != crowd[b]:
        return a if crowd[a] > crowd[b] else b
    return a


def nsga2_run(objective: Callable, n: int, cfg: MoeaConfig, budget: int,
              rng: np.random.Generator, lo=0.0, hi=1.0, oid: Optional[ObjectiveId] = None,
              keep_snapshots: bool = False) -> MooResult:
    """Elitist nondominated sorting GA with crowded binary tournaments."""
    N = cfg.pop_size
    if budget < N:
        raise ValueError("budget must cover the initial population")
    lo_v = np.broadcast_to(np.asarray(lo, dtype=float), (n,))
    hi_v = np.broadcast_to(np.asarray(hi, dtype=float), (n,))
    p_m = cfg.mutation_rate(n)
    X = lo_v + rng.random((N, n)) * (hi_v - lo_v)
    F = np.atleast_2d(objective(X))
    evals = N
    rows, snaps = [], []
    _checkpoint(rows, evals, F, oid, snaps, keep_snapshots)
    rank, crowd, _ = _rank_and_crowding(F)
    while evals + N <= budget:
        kids = np.empty_like(X)
        for k in range(0, N, 2):
            picks = rng.integers(0, N, size=4)
            a = _crowded_better(picks[0], picks[1], rank, crowd)
            b = _crowded_better(picks[2], picks[3], rank, crowd)
            if rng.random() < cfg.p_c:
                o1, o2 = sbx_crossover(X[a], X[b], cfg.eta_c, rng, cfg.sbx_exchange)
            else:
                o1, o2 = X[a].copy(), X[b].copy()
            kids[k] = o1
            if k + 1 < N:
                kids[k + 1] = o2
        for k in range(N):
            kids[k] = polynomial_mutation(kids[k], lo_v, hi_v, p_m, cfg.eta_m, rng)
        kids = np.clip(kids, lo_v, hi_v)
        KF = np.atleast_2d(objective(kids))
        evals += N
        RX, RF = np.vstack([X, kids]), np.vstack([F, KF])
        rank_all, crowd_all, fronts = _rank_and_crowding(RF)
        keep = []
        for fr in fronts:
            if len(keep) + fr.size <= N:
                keep.extend(fr.tolist())
            else:
                order = fr[np.argsort(-crowd_all[fr], kind="stable")]
                keep.extend(order[: N - len(keep)].tolist())
                break
        keep = np.asarray(keep)
        X, F = RX[keep], RF[keep]
        rank, crowd = rank_all[keep], crowd_all[keep]
        _checkpoint(rows, evals, F, oid, snaps, keep_snapshots)
    ev, dist = zip(*rows)
    return MooResult(X, F, np.asarray(ev), np.asarray(dist), None, snaps)


# diversity metric ------------------------------------------------------------

#: Score of an inner cell given (left, self, right) occupation.
WINDOW_SCORES = {
    (0, 0, 0): 0.0, (0, 0, 1): 0.5, (0, 1, 0): 0.75, (0, 1, 1): 0.67,
    (1, 0, 0): 0.5, (1, 0, 1): 0.75, (1, 1, 0): 0.67, (1, 1, 1): 1.0,
}
#: Score of an end cell given (self, neighbor) occupation.
BOUNDARY_SCORES = {(0, 0): 0.0, (0, 1): 0.67, (1, 0): 0.67, (1, 1): 1.0}


def occupation_diversity(occ) -> float:
    """Sliding-window score of one axis' occupation vector, divided by its length."""
    h = [int(bool(v)) for v in occ]
    N = len(h)
    if N < 3:
        raise ValueError("need at least 3 cells")
    total = BOUNDARY_SCORES[(h[0], h[1])] + BOUNDARY_SCORES[(h[-1], h[-2])]
    for i in range(1, N - 1):
        total += WINDOW_SCORES[(h[i - 1], h[i], h[i + 1])]
    return total / N


@dataclass
class PFModel:
    """Dense uniform sample of an analytic Pareto front.

    Per-axis cell edges are equal-mass quantiles of the sample, which makes
    the cells equal in area on the front surface rather than on the axis.
    """

    oid: ObjectiveId
    M: int
    sample: np.ndarray

    @classmethod
    def build(cls, oid: ObjectiveId, M: int, n_points: int = 100_000, seed: int = 20240101) -> "PFModel":
        rng = np.random.Generator(np.random.PCG64(seed))
        if oid is ObjectiveId.DTLZ1:
            S = 0.5 * rng.dirichlet(np.ones(M), size=n_points)
        elif oid in (ObjectiveId.DTLZ2, ObjectiveId.DTLZ3, ObjectiveId.DTLZ4):
            Z = np.abs(rng.standard_normal((n_points, M)))
            S = Z / np.linalg.norm(Z, axis=1, keepdims=True)
        else:
            raise ValueError(f"no front model for {oid}")
        return cls(oid, M, S)

    def edges(self, n_cells: int) -> np.ndarray:
        """(M, n_cells + 1) array of cell edges per axis."""
        q = np.linspace(0.0, 1.0, n_cells + 1)
        return np.quantile(self.sample, q, axis=0).T

    def project(self, F) -> np.ndarray:
        """Radial projection of objective vectors onto the front."""
        F = np.maximum(np.atleast_2d(np.asarray(F, dtype=float)), 0.0)
        if self.oid is ObjectiveId.DTLZ1:
            s = F.sum(axis=1, keepdims=True)
            return np.where(s > 0, 0.5 * F / np.where(s > 0, s, 1.0), 0.5 / F.shape[1])
        r = np.linalg.norm(F, axis=1, keepdims=True)
        return np.where(r > 0, F / np.where(r > 0, r, 1.0), 1.0 / math.sqrt(F.shape[1]))


def occupation(F, pf: PFModel, n_cells: int) -> np.ndarray:
    """(M, n_cells) 0/1 occupation of the per-axis cells by projected solutions."""
    P = pf.project(F)
    E = pf.edges(n_cells)
    occ = np.zeros((pf.M, n_cells), dtype=np.int8)
    for m in range(pf.M):
        e = E[m]
        v = P[:, m]
        inside = (v >= e[0]) & (v <= e[-1])
        idx = np.clip(np.searchsorted(e, v[inside], side="right") - 1, 0, n_cells - 1)
        occ[m, idx] = 1
    return occ


def diversity_metric2(obtained, pf: PFModel, n_cells: Optional[int] = None) -> float:
    """Average over objectives of the per-axis occupation score, in [0, 1].

    ``n_cells`` defaults to the number of obtained solutions.
    """
    F = np.atleast_2d(np.asarray(obtained, dtype=float))
    if F.shape[1] != pf.M:
        raise ValueError("objective count does not match the front model")
    N = F.shape[0] if n_cells is None else n_cells
    occ = occupation(F, pf, N)
    return float(np.mean([occupation_diversity(row) for row in occ]))
