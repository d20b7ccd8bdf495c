import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from swarmlab.benchmarks import BENCH_SETUPS, ObjectiveId, single_objective
from swarmlab.core import SearchSpace, make_rng
from swarmlab.pso import (ClubParams, ClubRegistry, Particle, PsoConfig, Topology, _clubs_update_nb,
                          _clubs_update_py, _guides_nb, _guides_np, _move_nb, _move_np,
                          clubs_update, guides, influence_experiment, neighborhood_best, pso_run,
                          ring_adjacency, velocity_update)


def particle(x, v, p):
    return Particle(np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(v, float)),
                    np.atleast_1d(np.asarray(p, float)))


# velocity rule -------------------------------------------------------------------

def test_velocity_fixed_point(rng):
    p = particle([1.0, -2.0], [0.0, 0.0], [1.0, -2.0])
    v = velocity_update(p, np.array([1.0, -2.0]), PsoConfig(), rng)
    np.testing.assert_array_equal(v, 0.0)


def test_velocity_zero_weights(rng):
    p = particle([3.0], [5.0], [1.0])
    cfg = PsoConfig(w=0.0, phi1=0.0, phi2=0.0)
    assert velocity_update(p, np.array([9.0]), cfg, rng)[0] == 0.0


def test_velocity_hand_arithmetic(rng):
    p = particle([0.0], [1.0], [2.0])
    v = velocity_update(p, np.array([3.0]), PsoConfig(w=0.729), rng, U=np.ones((1, 2)))
    assert v[0] == pytest.approx(0.729 + 1.494 * 2 + 1.494 * 3, abs=1e-12)
    assert v[0] == pytest.approx(8.199)


def test_random_inertia_scales_w_by_draw(rng):
    p = particle([0.0], [1.0], [0.0])
    cfg = PsoConfig(w=1.458, random_inertia=True)
    v = velocity_update(p, np.array([0.0]), cfg, rng, U=np.array([[0.5, 0.3, 0.9]]))
    assert v[0] == pytest.approx(0.729)


@given(arrays(float, 6, elements=st.floats(-100, 100)), arrays(float, 6, elements=st.floats(-100, 100)),
       arrays(float, 6, elements=st.floats(-100, 100)), st.floats(0.01, 10), st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_velocity_clamp(x, p, g, vm, seed):
    part = particle(x, np.zeros(6), p)
    v = velocity_update(part, g, PsoConfig(w=0.9), make_rng(seed), vmax=np.full(6, vm))
    assert np.all(np.abs(v) <= vm)


def test_move_backends_agree():
    rng = np.random.default_rng(2)
    N, n = 15, 7
    for ri, k in ((False, 2), (True, 3)):
        X, V, P = rng.normal(size=(N, n)), rng.normal(size=(N, n)), rng.normal(size=(N, n))
        g = rng.integers(0, N, N)
        U = rng.random((N, n, k))
        vm = np.full(n, 0.7)
        a = [X.copy(), V.copy()]
        b = [X.copy(), V.copy()]
        _move_nb(a[0], a[1], P, g, U, 1.1, ri, 0.9, 1.4, 1.6, vm, True)
        _move_np(b[0], b[1], P, g, U, 1.1, ri, 0.9, 1.4, 1.6, vm, True)
        np.testing.assert_allclose(a[0], b[0], rtol=1e-14, atol=1e-14)
        np.testing.assert_allclose(a[1], b[1], rtol=1e-14, atol=1e-14)


# neighborhoods ---------------------------------------------------------------------

def test_single_particle_guides_itself():
    for topo in (Topology.GBEST, Topology.LBEST_RING):
        assert neighborhood_best(0, topo, np.array([4.0])) == 0
        assert guides(topo, np.array([4.0]))[0] == 0


def test_ring_example():
    pf = np.array([3.0, 1.0, 2.0])
    assert neighborhood_best(0, Topology.LBEST_RING, pf) == 1
    A = ring_adjacency(3)
    assert A.all()  # every particle sees both others when N = 3


def test_ring_neighbourhood_is_three_wide():
    A = ring_adjacency(6)
    assert np.all(A.sum(axis=1) == 3)
    assert A[0, 5] and A[0, 1] and not A[0, 3]


def test_sole_club_member_guides_itself():
    M = np.zeros((3, 4), dtype=bool)
    M[0, 0] = True
    M[1, 1] = M[2, 1] = True
    reg = ClubRegistry(M, ClubParams(4, 1, 1, 2, 1))
    pf = np.array([5.0, 1.0, 0.5])
    assert neighborhood_best(0, Topology.CLUBS, pf, reg) == 0
    assert list(guides(Topology.CLUBS, pf, reg)) == [0, 2, 2]


def test_guides_backends_and_scalar_agree():
    rng = make_rng(4)
    reg = ClubRegistry.random(20, ClubParams(30, 2, 1, 5, 1), rng)
    pf = np.round(rng.random(20) * 5)  # ties on purpose
    A = reg.adjacency()
    g_nb, g_np = _guides_nb(A, pf), _guides_np(A, pf)
    np.testing.assert_array_equal(g_nb, g_np)
    scalar = [neighborhood_best(i, Topology.CLUBS, pf, reg) for i in range(20)]
    np.testing.assert_array_equal(g_nb, scalar)


# club registry ---------------------------------------------------------------------

def test_random_registry_levels():
    reg = ClubRegistry.random(20, ClubParams(), make_rng(1))
    assert np.all(reg.levels == 10)
    reg.check()


def test_club_params_validation():
    with pytest.raises(ValueError):
        ClubParams(100, 3, 5, 33)
    with pytest.raises(ValueError):
        ClubParams(rr=0)


def _pair(level_a, level_b, C=10):
    """Two particles sharing club 0; extra clubs fill up to the given levels."""
    M = np.zeros((2, C), dtype=bool)
    M[0, :level_a] = True
    M[1, 0] = True
    M[1, C - level_b + 1:] = True
    return M


def test_best_particle_leaves_a_club():
    reg = ClubRegistry(_pair(4, 4), ClubParams(10, 3, 2, 6, 5))
    d = clubs_update(reg, np.array([1.0, 2.0]), 1, make_rng(0), u=np.full((2, 2), 0.99))
    assert list(d) == [-1, 1]
    assert list(reg.levels) == [3, 5]


def test_extremes_respect_bounds():
    reg = ClubRegistry(_pair(2, 6), ClubParams(10, 3, 2, 6, 5))
    d = clubs_update(reg, np.array([1.0, 2.0]), 1, make_rng(0), u=np.zeros((2, 2)))
    assert list(d) == [0, 0]


def test_retention_steps_toward_default():
    # three particles with equal pbest: nobody is strictly best or worst
    M = np.zeros((3, 12), dtype=bool)
    M[:, 0] = True
    M[0, 1:6] = True   # level 6
    M[1, 6:7] = True   # level 2
    M[2, 7:10] = True  # level 4
    params = ClubParams(12, 4, 1, 8, rr=2)
    pf = np.zeros(3)
    reg = ClubRegistry(M.copy(), params)
    assert list(clubs_update(reg, pf, 1, make_rng(0), u=np.full((3, 2), 0.5))) == [0, 0, 0]
    d = clubs_update(reg, pf, 2, make_rng(0), u=np.full((3, 2), 0.5))
    assert list(d) == [-1, 1, 0]
    assert list(reg.levels) == [5, 3, 4]


def test_leave_and_join_pick_club_by_uniform():
    reg = ClubRegistry(_pair(4, 4), ClubParams(10, 3, 2, 6, 5))
    u = np.array([[0.99, 0.0], [0.0, 0.0]])
    clubs_update(reg, np.array([1.0, 2.0]), 1, make_rng(0), u=u)
    # particle 0 drops its last club (index 3); particle 1 joins its first free club (index 1)
    assert not reg.membership[0, 3] and reg.membership[0, :3].all()
    assert reg.membership[1, 1]


def test_updates_are_sequential():
    # particle 0 leaves the only shared club first, so particle 1 is left alone and stays put
    reg = ClubRegistry(_pair(4, 4), ClubParams(10, 3, 2, 6, 5))
    d = clubs_update(reg, np.array([1.0, 2.0]), 1, make_rng(0), u=np.zeros((2, 2)))
    assert list(d) == [-1, 0]
    assert not reg.membership[0, 0]


def test_level_bounds_after_many_updates():
    rng = make_rng(21)
    params = ClubParams(100, 10, 5, 33, 2)
    reg = ClubRegistry.random(20, params, rng)
    for it in range(1, 10_001):
        clubs_update(reg, rng.random(20), it, rng)
    reg.check()
    assert reg.levels.min() >= 5 and reg.levels.max() <= 33


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_clubs_update_backends_agree(seed, rr):
    rng = make_rng(seed)
    params = ClubParams(15, 4, 2, 7, rr)
    reg = ClubRegistry.random(8, params, rng)
    for it in range(1, 20):
        pf = np.round(rng.random(8) * 3)
        u = rng.random((8, 2))
        Ma, Mb = reg.membership.copy(), reg.membership.copy()
        da = _clubs_update_nb(Ma, pf, u, 2, 7, 4, it % rr == 0)
        db = _clubs_update_py(Mb, pf, u, 2, 7, 4, it % rr == 0)
        np.testing.assert_array_equal(Ma, Mb)
        np.testing.assert_array_equal(da, db)
        reg.membership[...] = Ma
        reg.check()


# runs --------------------------------------------------------------------------------

def test_budget_of_one_swarm_returns_initial_best():
    space = SearchSpace.box(-5, 5, 3)
    f = single_objective(ObjectiveId.SPHERE, 3)
    r = pso_run(f, space, PsoConfig.gbest(swarm_size=8), 8, make_rng(2))
    X0 = -5 + make_rng(2).random((8, 3)) * 10
    assert r.best_f == f(X0).min()
    assert r.stats.total_evals == 8


@pytest.mark.parametrize("cfg", [PsoConfig.gbest(), PsoConfig.lbest(), PsoConfig.clubs_based(10)])
def test_run_is_deterministic(cfg):
    s = BENCH_SETUPS[ObjectiveId.RASTRIGIN]
    f = single_objective(ObjectiveId.RASTRIGIN, 30)
    a = pso_run(f, s.space(), cfg, 4000, make_rng(11), record_levels=True)
    b = pso_run(f, s.space(), cfg, 4000, make_rng(11), record_levels=True)
    np.testing.assert_array_equal(a.stats.best, b.stats.best)
    np.testing.assert_array_equal(a.best_x, b.best_x)


def test_clubs_levels_stay_in_bounds_during_run():
    s = BENCH_SETUPS[ObjectiveId.RASTRIGIN]
    f = single_objective(ObjectiveId.RASTRIGIN, 30)
    r = pso_run(f, s.space(), PsoConfig.clubs_based(10, w=1.4), 20_000, make_rng(3), record_levels=True)
    assert r.levels.min() >= 5 and r.levels.max() <= 33
    assert r.levels.shape == (999, 20)


def test_sphere_cpso_deep_convergence():
    s = BENCH_SETUPS[ObjectiveId.SPHERE]
    f = single_objective(ObjectiveId.SPHERE, 30)
    r = pso_run(f, s.space(), PsoConfig.clubs_based(10, w=s.w_clubs), 200_000, make_rng(1))
    assert r.best_f < 1e-50


# flow of influence --------------------------------------------------------------------

def test_influence_zero_iterations():
    a = influence_experiment(10, 30, make_rng(0), iterations=0)
    assert a.shape == (1,)


def test_influence_initial_average():
    means = [influence_experiment(10, 30, make_rng(s), iterations=0)[0] for s in range(20)]
    expected = 19 / 20 * 1500.0 * 30
    assert np.mean(means) == pytest.approx(expected, rel=0.01)


def _influence_mean(m, repeats=10, **kw):
    return np.mean([influence_experiment(m, 30, make_rng(s), **kw) for s in range(repeats)], axis=0)


def test_full_membership_curve_non_increasing():
    full = _influence_mean(100, n_clubs=100)
    assert np.all(np.diff(full) <= 0)


def test_full_membership_below_level_ten_at_every_iteration():
    full = _influence_mean(100, n_clubs=100)
    ten = _influence_mean(10)
    above = np.flatnonzero(full > ten)
    assert above.size == 0, f"m=100 above m=10 at iterations {above.tolist()}"


def test_seeded_zero_particle_holds_initial_best():
    seen = {}

    def spy(t, X, f, P, pf, reg):
        seen.setdefault(t, int(np.argmin(pf)))

    rng = make_rng(6)
    cfg = PsoConfig.clubs_based(10, w=1.458, min_level=10, max_level=10).with_(fixed_membership=True)
    space = SearchSpace.box(1000.0, 2000.0, 30)
    X0 = 1000.0 + rng.random((20, 30)) * 1000.0
    X0[0] = 0.0
    pso_run(lambda X: X.sum(axis=1), space, cfg, 40, rng, X0=X0, V0=np.zeros_like(X0),
            registry=ClubRegistry.random(20, cfg.clubs, rng), observer=spy)
    assert seen[1] == 0
