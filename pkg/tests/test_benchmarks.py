import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from swarmlab.benchmarks import (BENCH_SETUPS, DimensionError, ObjectiveId, batch_kernel,
                                 distance_to_front, eval_dtlz, eval_single, single_objective)

SINGLE = [ObjectiveId.SPHERE, ObjectiveId.ROSENBROCK, ObjectiveId.RASTRIGIN,
          ObjectiveId.SCHAFFER_F6, ObjectiveId.ACKLEY]


@pytest.mark.parametrize("oid,x,expected", [
    (ObjectiveId.SPHERE, np.zeros(30), 0.0),
    (ObjectiveId.SPHERE, np.full(4, 2.0), 16.0),
    (ObjectiveId.ROSENBROCK, np.ones(30), 0.0),
    (ObjectiveId.ROSENBROCK, np.zeros(30), 29.0),
    (ObjectiveId.RASTRIGIN, np.zeros(30), 0.0),
    (ObjectiveId.RASTRIGIN, np.ones(3), 3.0),
    (ObjectiveId.RASTRIGIN, np.full(2, 0.5), 2 * (0.25 + 20.0)),
    (ObjectiveId.SCHAFFER_F6, np.zeros(2), 0.0),
    (ObjectiveId.ACKLEY, np.zeros(30), 0.0),
])
def test_known_values(oid, x, expected):
    assert eval_single(oid, x) == pytest.approx(expected, abs=1e-12)


def test_schaffer_hand_value():
    # r = 1: 0.5 + (sin(1)^2 - 0.5) / 1.001^2
    assert eval_single(ObjectiveId.SCHAFFER_F6, [1.0, 0.0]) == pytest.approx(
        0.5 + (math.sin(1.0) ** 2 - 0.5) / 1.001 ** 2, rel=1e-14)


def test_ackley_hand_value():
    x = np.ones(2)
    ref = -20 * math.exp(-0.2) - math.exp(1.0) + 20 + math.e
    assert eval_single(ObjectiveId.ACKLEY, x) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("oid", SINGLE)
def test_backends_agree(oid):
    n = 2 if oid is ObjectiveId.SCHAFFER_F6 else 30
    X = np.random.default_rng(1).uniform(-5, 5, (64, n))
    np.testing.assert_allclose(batch_kernel(oid, "numba")(X), batch_kernel(oid, "numpy")(X),
                               rtol=1e-12, atol=1e-12)


def test_dimension_checks():
    with pytest.raises(DimensionError):
        single_objective(ObjectiveId.SCHAFFER_F6, 3)
    with pytest.raises(DimensionError):
        single_objective(ObjectiveId.ROSENBROCK, 1)
    f = single_objective(ObjectiveId.SPHERE, 5)
    with pytest.raises(DimensionError):
        f(np.zeros((2, 4)))


def test_bench_setups_cover_all_functions():
    assert set(BENCH_SETUPS) == set(SINGLE)
    assert BENCH_SETUPS[ObjectiveId.SPHERE].space().dims == 30


@given(arrays(float, (5, 12), elements=st.floats(0, 1)))
@settings(max_examples=50, deadline=None)
def test_dtlz2_lies_on_or_outside_unit_sphere(X):
    F = eval_dtlz(ObjectiveId.DTLZ2, X, 3)
    assert np.all(np.linalg.norm(F, axis=1) >= 1.0 - 1e-12)
    assert np.all(F >= -1e-15)


@pytest.mark.parametrize("oid", [ObjectiveId.DTLZ2, ObjectiveId.DTLZ3, ObjectiveId.DTLZ4])
def test_optimal_distance_variables_hit_the_sphere(oid):
    rng = np.random.default_rng(3)
    X = np.column_stack([rng.random((20, 2)), np.full((20, 10), 0.5)])
    F = eval_dtlz(oid, X, 3)
    np.testing.assert_allclose(np.linalg.norm(F, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(distance_to_front(oid, F), 0.0, atol=1e-12)


def test_dtlz1_optimum_on_plane():
    rng = np.random.default_rng(4)
    X = np.column_stack([rng.random((20, 2)), np.full((20, 5), 0.5)])
    F = eval_dtlz(ObjectiveId.DTLZ1, X, 3)
    np.testing.assert_allclose(F.sum(axis=1), 0.5, atol=1e-12)


def test_dtlz2_two_objective_quarter_circle():
    x = np.array([1 / 3, 0.5, 0.5])
    np.testing.assert_allclose(eval_dtlz(ObjectiveId.DTLZ2, x, 2),
                               [math.cos(math.pi / 6), math.sin(math.pi / 6)], atol=1e-15)


def test_dtlz1_distance_normalization():
    f = np.array([0.5, 0.5, 0.5])
    assert distance_to_front(ObjectiveId.DTLZ1, f, normalized=False) == pytest.approx(1.0)
    assert distance_to_front(ObjectiveId.DTLZ1, f) == pytest.approx(1 / math.sqrt(3))


def test_dtlz_rejects_out_of_box():
    with pytest.raises(ValueError):
        eval_dtlz(ObjectiveId.DTLZ2, np.full(5, 1.5), 3)
    with pytest.raises(DimensionError):
        eval_dtlz(ObjectiveId.DTLZ2, np.full(2, 0.5), 3)
