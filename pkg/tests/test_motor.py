import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from swarmlab.motor import (PARAM_MAX, PARAM_MIN, TRUE_VECTOR, MotorParams, SupplyWaveform,
                            park_forward, park_inverse)
from swarmlab.motor import model as mdl
from swarmlab.motor.rk45 import IntegrationError, integrate_rk45, make_sampler
from swarmlab.motor.sim import (IdentificationProblem, identification_fitness, make_reference,
                                percent_deviation, read_reference_csv, sample_times, sae,
                                simulate_startup, simulate_states, write_reference_csv)

finite = st.floats(-1e3, 1e3)


# Park transform ---------------------------------------------------------------------

def test_park_forward_examples():
    np.testing.assert_allclose(park_forward(1, -0.5, -0.5), (1, 0), atol=1e-15)
    np.testing.assert_allclose(park_forward(0, 1, -1), (0, 2 / math.sqrt(3)), atol=1e-15)
    np.testing.assert_allclose(park_forward(4.2, 4.2, 4.2), (0, 0), atol=1e-14)


def test_park_inverse_example():
    np.testing.assert_allclose(park_inverse(1, 0), (1, -0.5, -0.5))


@given(finite, finite)
def test_park_roundtrip_and_zero_sum(d, q):
    i1, i2, i3 = park_inverse(d, q)
    assert abs(i1 + i2 + i3) <= 1e-12 * (1 + abs(d) + abs(q))
    np.testing.assert_allclose(park_forward(i1, i2, i3), (d, q), rtol=1e-12, atol=1e-9)


def test_supply_voltages_map_to_rotating_vector():
    s = SupplyWaveform()
    t = np.linspace(0, 0.02, 7)
    vd, vq = park_forward(*s.voltages(t))
    np.testing.assert_allclose(vd, 311 * np.cos(s.omega * t), atol=1e-10)
    np.testing.assert_allclose(vq, 311 * np.sin(s.omega * t), atol=1e-10)


def test_unbalanced_supply_rejected():
    with pytest.raises(ValueError):
        SupplyWaveform(phases=(0.0, 1.0, 2.0))


# derivative models ------------------------------------------------------------------

def independent_flux_rhs(y, p: MotorParams, vsd, vsq):
    """Inductance-matrix form: psi = L i, solved for the currents."""
    Ls, Lr, Lm = p.Ls, p.Lr, p.Lm
    L = np.array([[Ls, 0, Lm, 0], [0, Ls, 0, Lm], [Lm, 0, Lr, 0], [0, Lm, 0, Lr]])
    psi = y[:4]
    w = y[4]
    i = np.linalg.solve(L, psi)
    d = np.empty(5)
    d[0] = vsd - p.Rs * i[0]
    d[1] = vsq - p.Rs * i[1]
    d[2] = -p.Rr * i[2] - w * psi[3]
    d[3] = -p.Rr * i[3] + w * psi[2]
    d[4] = 1.5 * (psi[0] * i[1] - psi[1] * i[0]) / p.J
    return d


def random_params(rng):
    return MotorParams.from_vector(PARAM_MIN + rng.random(5) * (PARAM_MAX - PARAM_MIN))


def test_zero_state_zero_input():
    p = MotorParams.true()
    np.testing.assert_array_equal(mdl.flux_derivatives(np.zeros(5), p, 0, 0), 0)
    np.testing.assert_array_equal(mdl.statespace_derivatives(0, 0, 0, 0, 0, p, 0, 0), 0)


def test_unit_stator_voltage_reads_off():
    d = mdl.flux_derivatives(np.zeros(5), MotorParams.true(), 1.0, 0.0)
    np.testing.assert_array_equal(d, [1, 0, 0, 0, 0])


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50)
def test_flux_model_matches_matrix_form(seed):
    rng = np.random.default_rng(seed)
    p = random_params(rng)
    y = rng.normal(size=5) * np.array([1, 1, 1, 1, 100])
    v = rng.normal(size=2) * 300
    got = mdl.flux_derivatives(y, p, *v)
    ref = independent_flux_rhs(y, p, *v)
    np.testing.assert_allclose(got, ref, rtol=1e-9, atol=1e-9 * np.abs(ref).max())


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50)
def test_statespace_matches_flux_model_via_chain_rule(seed):
    # i_s = (Lr psi_s - Lm psi_r) / D, lambda_r = psi_r
    rng = np.random.default_rng(seed)
    p = random_params(rng)
    y = rng.normal(size=5) * np.array([1, 1, 1, 1, 100])
    v = rng.normal(size=2) * 300
    D = p.Ld
    dflux = mdl.flux_derivatives(y, p, *v)
    isd = (p.Lr * y[0] - p.Lm * y[2]) / D
    isq = (p.Lr * y[1] - p.Lm * y[3]) / D
    dss = mdl.statespace_derivatives(isd, isq, y[2], y[3], y[4], p, *v)
    expect = np.array([(p.Lr * dflux[0] - p.Lm * dflux[2]) / D, (p.Lr * dflux[1] - p.Lm * dflux[3]) / D,
                       dflux[2], dflux[3], dflux[4]])
    np.testing.assert_allclose(dss, expect, rtol=1e-8, atol=1e-8 * np.abs(expect).max())


def test_gamma_scalar_formula():
    p = MotorParams.true()
    c = mdl.statespace_coefficients(p)
    sigma = 1 - p.Lm ** 2 / (p.Ls * p.Lr)
    gamma = p.Rs / (sigma * p.Ls) + p.Rr * (1 - sigma) / (sigma * p.Lr)
    assert c["sigma"] == pytest.approx(sigma, rel=1e-12)
    assert c["gamma"] == pytest.approx(gamma, rel=1e-12)
    assert c["eta"] == pytest.approx(6.61 / (0.5 * 0.09718 + 1.6816))


def test_params_validation():
    with pytest.raises(ValueError):
        MotorParams(-1, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        MotorParams(1, 1, 1, 1, 1, leak_split=1.0)
    p = MotorParams.from_vector(TRUE_VECTOR)
    assert p.Lsl == p.Lrl == pytest.approx(0.04859)


# integrator -------------------------------------------------------------------------

def test_constant_solution_exact():
    sol = integrate_rk45(lambda t, y: np.zeros(2), (0, 3), [1.5, -2.0])
    np.testing.assert_array_equal(sol(np.linspace(0, 3, 11)), np.tile([1.5, -2.0], (11, 1)))


def test_exponential():
    sol = integrate_rk45(lambda t, y: y, (0, 1), [1.0], rtol=1e-9, atol=1e-12)
    assert abs(sol(1.0)[0] - math.e) < 1e-8


def test_harmonic_energy_drift():
    w = 2 * math.pi
    sol = integrate_rk45(lambda t, y: np.array([w * y[1], -w * y[0]]), (0, 10), [1.0, 0.0],
                         rtol=1e-10, atol=1e-12)
    y = sol(np.linspace(0, 10, 201))
    assert np.max(np.abs(np.sum(y ** 2, axis=1) - 1.0)) < 1e-6


def test_matches_scipy_rk45():
    p = MotorParams.true()
    k = mdl.kernel_args(p, 311.0, 2 * math.pi * 50)
    f = lambda t, y: mdl._flux_rhs(t, y, k)
    t_eval = sample_times(0.05, 50)
    ours = integrate_rk45(f, (0, 0.05), np.zeros(5), 1e-6, 1e-8)
    ref = solve_ivp(f, (0, 0.05), np.zeros(5), method="RK45", rtol=1e-6, atol=1e-8, dense_output=True)
    assert ours.n_steps == ref.t.size - 1
    np.testing.assert_allclose(ours.ts, ref.t, rtol=1e-12)
    np.testing.assert_allclose(ours(t_eval), ref.sol(t_eval).T, rtol=1e-9, atol=1e-12)


def test_compiled_sampler_matches_python_integrator():
    p = MotorParams.true()
    k = mdl.kernel_args(p, 311.0, 2 * math.pi * 50)
    t_eval = sample_times(0.1, 100)
    sample = make_sampler(mdl.flux_rhs_nb)
    Y, status, steps = sample(np.zeros(5), 0.0, 0.1, t_eval, 1e-7, 1e-9, k, 10**6)
    assert status == 0
    sol = integrate_rk45(lambda t, y: mdl._flux_rhs(t, y, k), (0, 0.1), np.zeros(5), 1e-7, 1e-9)
    assert steps == sol.n_steps
    np.testing.assert_allclose(Y, sol(t_eval), rtol=1e-11, atol=1e-12)


def test_blowup_reported():
    with pytest.raises(IntegrationError):
        integrate_rk45(lambda t, y: y ** 2, (0, 2), [1.0], max_steps=10_000)


# simulation ---------------------------------------------------------------------------

def test_zero_amplitude_gives_zero_currents():
    r = simulate_startup(MotorParams.true(), SupplyWaveform(amplitude=0.0), T=0.1, samples=20)
    np.testing.assert_array_equal(r.currents, 0.0)


def test_startup_reaches_synchronous_speed():
    r = simulate_startup(MotorParams.true(), T=1.0, samples=1000)
    ws = 2 * math.pi * 50
    assert np.all(np.isfinite(r.currents)) and np.abs(r.currents).max() < 50
    # torque pulsates during the first 0.1 s; after that the worst deviation from
    # synchronous speed shrinks window by window
    dev = np.abs(r.omega - ws).reshape(10, 100).max(axis=1)
    assert np.all(np.diff(dev[1:]) < 0)
    assert dev[-1] < 1e-5 * ws


def test_doubling_samples_keeps_shared_values():
    p = MotorParams.true()
    a = simulate_startup(p, T=0.2, samples=100).currents
    b = simulate_startup(p, T=0.2, samples=200).currents
    np.testing.assert_allclose(a, b[1::2], rtol=0, atol=1e-9)


@pytest.mark.parametrize("model", [mdl.FLUX, mdl.STATESPACE])
def test_backends_agree(model):
    p = MotorParams.true()
    _, a = simulate_states(p, SupplyWaveform(), 0.05, 50, model=model, backend="numba")
    _, b = simulate_states(p, SupplyWaveform(), 0.05, 50, model=model, backend="numpy")
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)


def test_models_agree_on_one_draw():
    p = random_params(np.random.default_rng(17))
    a = simulate_startup(p, T=0.1, samples=100, model=mdl.FLUX).currents
    b = simulate_startup(p, T=0.1, samples=100, model=mdl.STATESPACE).currents
    assert np.max(np.abs(a - b)) / np.max(np.abs(b)) < 1e-6


# fitness ------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def ref():
    return make_reference(T=0.2, samples=200)


def test_true_params_fit_exactly(ref):
    assert identification_fitness(MotorParams.true(), ref) < 1e-6


def test_doubled_rs_is_worse(ref):
    v = TRUE_VECTOR.copy()
    v[0] *= 2
    assert identification_fitness(MotorParams.from_vector(v), ref) > 0.1


def test_slice_sweep_orders_candidates(ref):
    grid = TRUE_VECTOR[1] * np.linspace(0.5, 1.5, 21)
    vals = []
    for g in grid:
        v = TRUE_VECTOR.copy()
        v[1] = g
        vals.append(identification_fitness(MotorParams.from_vector(v), ref))
    vals = np.array(vals)
    k = int(np.argmin(vals))
    assert k == 10
    assert np.all(np.diff(vals[:k + 1]) < 0) and np.all(np.diff(vals[k:]) > 0)


def test_sae_scaling():
    assert sae(np.ones((4, 3)), np.zeros((4, 3)), 0.5) == 6.0


def test_problem_penalises_invalid_candidates(ref):
    prob = IdentificationProblem(ref)
    bad = TRUE_VECTOR.copy()
    bad[2] = -0.1
    f = prob(np.vstack([TRUE_VECTOR, bad]))
    assert f[0] < 1e-6
    assert f[1] == prob.penalty
    assert prob.failed == 1 and prob.evaluations == 2


def test_percent_deviation():
    np.testing.assert_array_equal(percent_deviation(TRUE_VECTOR, TRUE_VECTOR), 0)
    np.testing.assert_allclose(percent_deviation([11.0], [10.0]), [10.0])


def test_reference_csv_roundtrip(tmp_path, ref):
    path = tmp_path / "ref.csv"
    write_reference_csv(ref, path, "made for a test\n\nsecond line")
    back = read_reference_csv(path)
    np.testing.assert_array_equal(back.currents, ref.currents)
    np.testing.assert_array_equal(back.t, ref.t)
    assert back.T == ref.T and back.samples == ref.samples
    assert path.read_text().startswith("# made for a test\n#\n")
