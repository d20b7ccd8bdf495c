"""Particle swarm optimizer with gbest, lbest-ring and clubs-based neighborhoods.

The swarm state lives in (N, n) arrays. Random numbers are drawn in blocks in
a fixed particle-major, dimension-minor order outside the kernels, so the
numba and numpy paths consume the generator identically.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ._accel import jit, pick
from .core import Objective, RunStats, SearchSpace, TraceRecorder, apply_boundary, sample_uniform


class Topology(enum.Enum):
    GBEST = "gbest"
    LBEST_RING = "lbest"
    CLUBS = "clubs"


@dataclass(frozen=True)
class ClubParams:
    n_clubs: int = 100
    default_level: int = 10
    min_level: int = 5
    max_level: int = 33
    rr: int = 2

    def __post_init__(self):
        if not 0 <= self.min_level <= self.default_level <= self.max_level <= self.n_clubs:
            raise ValueError("need 0 <= min <= default <= max <= n_clubs")
        if self.rr < 1:
            raise ValueError("retention period must be >= 1")


@dataclass(frozen=True)
class PsoConfig:
    """Velocity rule and neighborhood.

    ``random_inertia`` replaces the inertia weight by a fresh U(0, w) draw per
    component, as the clubs-based variant does.
    """

    swarm_size: int = 20
    w: float = 0.729
    random_inertia: bool = False
    chi: float = 1.0
    phi1: float = 1.494
    phi2: float = 1.494
    topology: Topology = Topology.GBEST
    clubs: ClubParams = field(default_factory=ClubParams)
    fixed_membership: bool = False

    def __post_init__(self):
        if self.phi1 < 0 or self.phi2 < 0:
            raise ValueError("learning rates must be non-negative")
        if self.swarm_size < 1:
            raise ValueError("swarm needs at least one particle")

    @classmethod
    def gbest(cls, **kw) -> "PsoConfig":
        return cls(topology=Topology.GBEST, **kw)

    @classmethod
    def lbest(cls, **kw) -> "PsoConfig":
        return cls(topology=Topology.LBEST_RING, **kw)

    @classmethod
    def clubs_based(cls, default_level: int = 10, w: float = 1.2, min_level: int = 5,
                    max_level: int = 33, rr: int = 2, n_clubs: int = 100, **kw) -> "PsoConfig":
        cp = ClubParams(n_clubs, default_level, min_level, max_level, rr)
        return cls(w=w, random_inertia=True, topology=Topology.CLUBS, clubs=cp, **kw)

    def with_(self, **kw) -> "PsoConfig":
        return replace(self, **kw)


@dataclass
class Particle:
    x: np.ndarray
    v: np.ndarray
    pbest_x: np.ndarray
    pbest_f: float = math.inf


# club registry ---------------------------------------------------------------

class ClubRegistry:
    """N x C boolean membership matrix plus the level bounds."""

    def __init__(self, membership: np.ndarray, params: ClubParams):
        self.membership = np.ascontiguousarray(membership, dtype=np.bool_)
        self.params = params

    @classmethod
    def random(cls, n_particles: int, params: ClubParams, rng: np.random.Generator,
               level: Optional[int] = None) -> "ClubRegistry":
        """Each particle joins ``level`` distinct clubs chosen uniformly."""
        level = params.default_level if level is None else level
        keys = rng.random((n_particles, params.n_clubs))
        chosen = np.argsort(keys, axis=1, kind="stable")[:, :level]
        M = np.zeros((n_particles, params.n_clubs), dtype=np.bool_)
        np.put_along_axis(M, chosen, True, axis=1)
        return cls(M, params)

    @property
    def levels(self) -> np.ndarray:
        return self.membership.sum(axis=1)

    def neighbors(self, i: int) -> np.ndarray:
        shared = (self.membership & self.membership[i]).any(axis=1)
        shared[i] = True
        return np.flatnonzero(shared)

    def adjacency(self) -> np.ndarray:
        Mi = self.membership.astype(np.int32)
        A = (Mi @ Mi.T) > 0
        np.fill_diagonal(A, True)
        return A

    def check(self) -> None:
        lv = self.levels
        p = self.params
        if lv.min() < p.min_level or lv.max() > p.max_level:
            raise AssertionError(f"membership levels {lv.min()}..{lv.max()} outside "
                                 f"[{p.min_level}, {p.max_level}]")

    def copy(self) -> "ClubRegistry":
        return ClubRegistry(self.membership.copy(), self.params)


def _clubs_update_py(M, pbest_f, u, min_level, max_level, default_level, retention):
    """Sequential join/leave/retention pass over particles in index order.

    ``u`` holds two uniforms per particle: column 0 picks the club for an
    extreme-performance move, column 1 the club for a retention step.
    Returns the per-particle level change.
    """
    N, C = M.shape
    delta = np.zeros(N, dtype=np.int64)
    for j in range(N):
        # neighborhood of j under the current membership
        count = 0
        is_best = True
        is_worst = True
        fj = pbest_f[j]
        for k in range(N):
            if k == j:
                continue
            linked = False
            for c in range(C):
                if M[j, c] and M[k, c]:
                    linked = True
                    break
            if linked:
                count += 1
                if not fj < pbest_f[k]:
                    is_best = False
                if not fj > pbest_f[k]:
                    is_worst = False
        if count == 0:
            # alone: nobody to be compared with
            is_best = False
            is_worst = False
        level = 0
        for c in range(C):
            if M[j, c]:
                level += 1
        move = 0
        ucol = 0
        if is_best and level > min_level:
            move = -1
        elif is_worst and level < max_level:
            move = 1
        elif retention and not (is_best or is_worst) and level != default_level:
            move = -1 if level > default_level else 1
            ucol = 1
        if move == -1:
            target = int(math.floor(u[j, ucol] * level))
            seen = 0
            for c in range(C):
                if M[j, c]:
                    if seen == target:
                        M[j, c] = False
                        break
                    seen += 1
        elif move == 1:
            target = int(math.floor(u[j, ucol] * (C - level)))
            seen = 0
            for c in range(C):
                if not M[j, c]:
                    if seen == target:
                        M[j, c] = True
                        break
                    seen += 1
        delta[j] = move
    return delta


_clubs_update_nb = jit(_clubs_update_py)
_clubs_update_kernel = pick(_clubs_update_nb, _clubs_update_py)


def clubs_update(reg: ClubRegistry, pbest_f: np.ndarray, iteration: int,
                 rng: np.random.Generator, u: Optional[np.ndarray] = None) -> np.ndarray:
    """Join/leave clubs in place; returns the per-particle level change.

    A particle strictly better than every neighbor leaves one of its clubs at
    random (if above the minimum level); one strictly worse than every neighbor
    joins a random club it is not in (if below the maximum). Every ``rr``
    iterations, particles that were neither best nor worst step one club
    toward the default level. Always draws N x 2 uniforms.
    """
    p = reg.params
    N = reg.membership.shape[0]
    if u is None:
        u = rng.random((N, 2))
    retention = iteration % p.rr == 0
    return _clubs_update_kernel(reg.membership, np.ascontiguousarray(pbest_f, dtype=float), u,
                                p.min_level, p.max_level, p.default_level, retention)


# guide selection ---------------------------------------------------------------

@jit
def _guides_nb(A, pbest_f):
    N = A.shape[0]
    out = np.empty(N, dtype=np.int64)
    for i in range(N):
        best = i
        bf = pbest_f[i]
        for k in range(N):
            if A[i, k]:
                f = pbest_f[k]
                if f < bf or (f == bf and k < best):
                    best = k
                    bf = f
        out[i] = best
    return out


def _guides_np(A, pbest_f):
    masked = np.where(A, pbest_f[None, :], np.inf)
    g = np.argmin(masked, axis=1)
    # rows whose whole neighborhood is +inf: fall back to self
    stuck = ~np.isfinite(masked[np.arange(len(g)), g])
    g[stuck] = np.flatnonzero(stuck)
    return g.astype(np.int64)


_guides_kernel = pick(_guides_nb, _guides_np)


def ring_adjacency(N: int) -> np.ndarray:
    A = np.zeros((N, N), dtype=np.bool_)
    idx = np.arange(N)
    A[idx, idx] = True
    A[idx, (idx - 1) % N] = True
    A[idx, (idx + 1) % N] = True
    return A


def topology_adjacency(topology: Topology, N: int, reg: Optional[ClubRegistry] = None) -> np.ndarray:
    if topology is Topology.GBEST:
        return np.ones((N, N), dtype=np.bool_)
    if topology is Topology.LBEST_RING:
        return ring_adjacency(N)
    if reg is None:
        raise ValueError("clubs topology needs a registry")
    return reg.adjacency()


def neighborhood_best(i: int, topology: Topology, pbest_f: np.ndarray,
                      reg: Optional[ClubRegistry] = None) -> int:
    """Guide index for particle ``i``: lowest pbest in its neighborhood.

    Ties go to the lowest particle index.
    """
    pf = np.asarray(pbest_f, dtype=float)
    N = pf.size
    if topology is Topology.GBEST:
        nb = np.arange(N)
    elif topology is Topology.LBEST_RING:
        nb = np.unique([(i - 1) % N, i, (i + 1) % N])
    else:
        nb = reg.neighbors(i)
    return int(nb[np.argmin(pf[nb])])


def guides(topology: Topology, pbest_f: np.ndarray, reg: Optional[ClubRegistry] = None,
           adjacency: Optional[np.ndarray] = None) -> np.ndarray:
    A = adjacency if adjacency is not None else topology_adjacency(topology, len(pbest_f), reg)
    return _guides_kernel(A, np.ascontiguousarray(pbest_f, dtype=float))


# velocity / position ----------------------------------------------------------

@jit
def _move_nb(X, V, P, g, U, w, random_inertia, chi, phi1, phi2, vmax, clamp):
    N, n = X.shape
    for i in range(N):
        gi = g[i]
        for d in range(n):
            if random_inertia:
                wi = w * U[i, d, 0]
                r1 = U[i, d, 1]
                r2 = U[i, d, 2]
            else:
                wi = w
                r1 = U[i, d, 0]
                r2 = U[i, d, 1]
            v = chi * (wi * V[i, d] + phi1 * r1 * (P[i, d] - X[i, d]) + phi2 * r2 * (P[gi, d] - X[i, d]))
            if clamp:
                if v > vmax[d]:
                    v = vmax[d]
                elif v < -vmax[d]:
                    v = -vmax[d]
            V[i, d] = v
            X[i, d] += v


def _move_np(X, V, P, g, U, w, random_inertia, chi, phi1, phi2, vmax, clamp):
    if random_inertia:
        W, r1, r2 = w * U[..., 0], U[..., 1], U[..., 2]
    else:
        W, r1, r2 = w, U[..., 0], U[..., 1]
    Vn = chi * (W * V + phi1 * r1 * (P - X) + phi2 * r2 * (P[g] - X))
    if clamp:
        np.clip(Vn, -vmax, vmax, out=Vn)
    V[...] = Vn
    X += Vn


_move_kernel = pick(_move_nb, _move_np)


def draws_per_component(cfg: PsoConfig) -> int:
    return 3 if cfg.random_inertia else 2


def velocity_update(p: Particle, g_x: np.ndarray, cfg: PsoConfig, rng: np.random.Generator,
                    vmax: Optional[np.ndarray] = None, U: Optional[np.ndarray] = None) -> np.ndarray:
    """New velocity of one particle toward its pbest and the guide position.

    ``U`` may supply the per-component uniforms, shape (n, 2) for static
    inertia as (r1, r2), or (n, 3) for random inertia as (w-draw, r1, r2).
    """
    n = p.x.size
    if U is None:
        U = rng.random((n, draws_per_component(cfg)))
    U = np.asarray(U, dtype=float)
    if cfg.random_inertia:
        w, r1, r2 = cfg.w * U[:, 0], U[:, 1], U[:, 2]
    else:
        w, r1, r2 = cfg.w, U[:, 0], U[:, 1]
    x = np.asarray(p.x, dtype=float)
    v = cfg.chi * (w * p.v + cfg.phi1 * r1 * (p.pbest_x - x) + cfg.phi2 * r2 * (np.asarray(g_x) - x))
    if vmax is not None:
        vm = np.asarray(vmax, dtype=float)
        v = np.clip(v, -vm, vm)
    return v


# run loop ------------------------------------------------------------------------

@dataclass
class PsoResult:
    stats: RunStats
    best_x: np.ndarray
    best_f: float
    levels: Optional[np.ndarray] = None
    best_particle: Optional[np.ndarray] = None


def initial_velocity(space: SearchSpace, rng: np.random.Generator, N: int) -> np.ndarray:
    half = space.vmax if space.vmax is not None else space.width / 2.0
    return (2.0 * rng.random((N, space.dims)) - 1.0) * half


def pso_run(objective: Objective, space: SearchSpace, cfg: PsoConfig, budget: int,
            rng: np.random.Generator, record_levels: bool = False,
            X0: Optional[np.ndarray] = None, V0: Optional[np.ndarray] = None,
            registry: Optional[ClubRegistry] = None, observer=None) -> PsoResult:
    """Run one swarm for ``budget // swarm_size`` iterations.

    Each iteration: evaluate, update personal bests, pick every particle's
    guide, move, and (clubs only) update memberships. The trace records the
    swarm best after each evaluation.
    """
    N, n = cfg.swarm_size, space.dims
    if budget < N:
        raise ValueError("budget must cover one swarm evaluation")
    iters = budget // N
    X = sample_uniform(space, rng, N) if X0 is None else np.array(X0, dtype=float)
    V = initial_velocity(space, rng, N) if V0 is None else np.array(V0, dtype=float)
    reg = registry
    if cfg.topology is Topology.CLUBS and reg is None:
        reg = ClubRegistry.random(N, cfg.clubs, rng)
    static_A = None if cfg.topology is Topology.CLUBS else topology_adjacency(cfg.topology, N)
    clamp = space.vmax is not None
    vmax = space.vmax if clamp else np.zeros(n)
    k = draws_per_component(cfg)

    P = X.copy()
    pf = np.full(N, np.inf)
    rec = TraceRecorder()
    levels = [] if record_levels and reg is not None else None
    best_idx = []
    evals = 0
    for t in range(1, iters + 1):
        f = np.asarray(objective(X), dtype=float)
        evals += N
        better = f < pf
        P[better] = X[better]
        pf[better] = f[better]
        b = int(np.argmin(pf))
        best_idx.append(b)
        rec.record(t, evals, pf[b])
        if observer is not None:
            observer(t, X, f, P, pf, reg)
        if t == iters:
            break
        A = static_A if static_A is not None else reg.adjacency()
        g = _guides_kernel(A, pf)
        U = rng.random((N, n, k))
        _move_kernel(X, V, P, g, U, cfg.w, cfg.random_inertia, cfg.chi, cfg.phi1, cfg.phi2,
                     vmax, clamp)
        X = apply_boundary(space, X)
        if cfg.topology is Topology.CLUBS:
            uc = rng.random((N, 2))
            if not cfg.fixed_membership:
                clubs_update(reg, pf, t, rng, u=uc)
            if levels is not None:
                levels.append(reg.levels.copy())

    b = int(np.argmin(pf))
    return PsoResult(rec.finish(), P[b].copy(), float(pf[b]),
                     np.asarray(levels) if levels is not None else None,
                     np.asarray(best_idx))


def influence_experiment(default_level: int, n_dims: int, rng: np.random.Generator,
                         iterations: int = 100, n_particles: int = 20, n_clubs: int = 100,
                         cfg: Optional[PsoConfig] = None) -> np.ndarray:
    """Average particle value per iteration with frozen club membership.

    Every particle starts in U[1000, 2000]^n except particle 0, placed at the
    origin; velocities start at zero. The value to minimize is the sum of the
    coordinates. Entry 0 is the average over the initial positions, entry t
    the average after t moves.
    """
    params = ClubParams(n_clubs, default_level, default_level, default_level, 1)
    base = PsoConfig.clubs_based(default_level=default_level, w=1.458, min_level=default_level,
                                 max_level=default_level, rr=1, n_clubs=n_clubs)
    cfg = (cfg or base).with_(swarm_size=n_particles, clubs=params, fixed_membership=True,
                              topology=Topology.CLUBS)
    space = SearchSpace.box(1000.0, 2000.0, n_dims)
    X0 = sample_uniform(space, rng, n_particles)
    X0[0] = 0.0
    V0 = np.zeros_like(X0)
    reg = ClubRegistry.random(n_particles, params, rng)
    averages = []

    def watch(t, X, f, P, pf, _reg):
        averages.append(float(np.mean(f)))

    pso_run(lambda X: X.sum(axis=1), space, cfg, n_particles * (iterations + 1), rng,
            X0=X0, V0=V0, registry=reg, observer=watch)
    return np.asarray(averages)
