"""Coherent effective-chain dynamics and log-log exponent fits"""

import math

import numpy as np
import pytest

from app.core.errors import InsufficientDataError, InvalidParameterError
from app.models.chain import ChainSpec, ChainState, Dimension, PolarisationSeries
from app.services.effective_chain import (
    ChainPropagator,
    basis_state,
    boundary_leakage,
    build_chain,
    dense_propagate,
    energy,
    evolve,
    mean_excitation,
    polarisation_series,
    front_transit,
    predicted_exponent,
    transit_time_ansatz,
)
from app.services.scaling_fit import default_window, fit_exponent


def test_couplings_per_dimension():
    np.testing.assert_allclose(build_chain(Dimension.D1, 5, 1.0).couplings, [1, 1, 1, 1])
    np.testing.assert_allclose(build_chain(Dimension.D2, 4, 1.0).couplings, [math.sqrt(2), math.sqrt(3), 2.0])
    np.testing.assert_allclose(build_chain("D3", 3, 2.0).couplings, [2 * 2 ** (2 / 3), 2 * 3 ** (2 / 3)])


def test_hamiltonian_is_symmetric_tridiagonal():
    dense = build_chain(2, 6, 1.5).dense_hamiltonian()
    np.testing.assert_array_equal(dense, dense.T)
    assert not np.any(np.diag(dense))
    assert not np.any(np.triu(dense, 2))


def test_chain_validation():
    with pytest.raises(InvalidParameterError):
        ChainSpec(Dimension.D1, 1, 1.0)
    with pytest.raises(InvalidParameterError):
        ChainSpec(Dimension.D1, 8, 0.0)
    with pytest.raises(InvalidParameterError):
        Dimension.parse("4")
    with pytest.raises(InvalidParameterError):
        ChainPropagator(build_chain(1, 8), tol=1e-3)


def test_evolve_rejects_bad_grid():
    spec = build_chain(1, 8)
    with pytest.raises(InvalidParameterError):
        evolve(spec, [0.0, 1.0, 1.0])
    with pytest.raises(InvalidParameterError):
        evolve(spec, [-1.0, 1.0])


def test_time_zero_is_identity():
    states = evolve(build_chain(2, 16), [0.0])
    np.testing.assert_array_equal(states[0].amps, basis_state(16))
    assert mean_excitation(states[0]) == 1.0


def test_mean_excitation_of_superposition():
    amps = np.zeros(4, dtype=complex)
    amps[:2] = 1 / math.sqrt(2)
    assert mean_excitation(ChainState(amps, 0.0)) == pytest.approx(1.5)


@pytest.mark.parametrize("dimension", [1, 2, 3])
def test_two_site_rabi_oscillation(dimension):
    spec = build_chain(dimension, 2, 0.8)
    g = spec.couplings[0]
    times = np.linspace(0.0, 10.0, 41)
    states = evolve(spec, times, tol=1e-11)
    upper = np.array([s.populations()[1] for s in states])
    np.testing.assert_allclose(upper, np.sin(g * times) ** 2, atol=1e-8)


@pytest.mark.parametrize("dimension", [1, 2, 3])
def test_matches_dense_oracle(dimension):
    spec = build_chain(dimension, 48, 1.0)
    times = np.sort(np.random.default_rng(7).uniform(0.0, 4.0, 10))
    states = evolve(spec, times, tol=1e-10)
    reference = dense_propagate(spec, times)
    for state, exact in zip(states, reference):
        assert np.max(np.abs(state.amps - exact)) <= 1e-6


def test_dense_oracle_size_cap():
    with pytest.raises(InvalidParameterError):
        dense_propagate(build_chain(1, 65), [1.0])


def test_norm_and_energy_conserved():
    spec = build_chain(2, 128, 1.0)
    states = evolve(spec, np.linspace(0.0, 8.0, 81))
    initial_energy = energy(spec, states[0])
    for state in states:
        assert abs(1.0 - state.norm()) <= 1e-9
        assert abs(energy(spec, state) - initial_energy) <= 1e-8


def test_dense_check_of_mean_excitation():
    spec = build_chain(2, 64, 1.0)
    state = evolve(spec, [0.0, 3.0])[-1]
    exact = dense_propagate(spec, [3.0])[0]
    n = np.arange(1, 65)
    assert mean_excitation(state) == pytest.approx(float(np.sum(n * np.abs(exact) ** 2)), abs=1e-6)


def test_boundary_leakage():
    assert boundary_leakage(ChainState(basis_state(10), 0.0), guard=2) == 0.0
    with pytest.raises(InvalidParameterError):
        boundary_leakage(ChainState(basis_state(10), 0.0), guard=10)


def test_reflected_wavepacket_fills_guard_window():
    spec = build_chain(1, 16, 1.0)
    states = evolve(spec, np.linspace(0.0, 12.0, 121))
    leakage = np.array([boundary_leakage(s, 4) for s in states])
    assert leakage[0] == 0.0
    assert leakage.max() > 0.2
    assert np.all((leakage >= 0) & (leakage <= 1 + 1e-12))


def test_series_invariants():
    spec = build_chain(1, 64, 1.0)
    series = polarisation_series(evolve(spec, np.linspace(0.0, 20.0, 41)), guard=8)
    assert series.mean_n[0] == pytest.approx(1.0)
    assert np.all(series.mean_n >= 1 - 1e-12)
    assert np.all(series.mean_n <= 64)
    assert list(series.to_frame().columns) == ["t", "mean_n", "leakage"]


def test_predicted_exponents():
    assert [predicted_exponent(d) for d in (1, 2, 3)] == [1.0, 2.0, 3.0]
    assert [predicted_exponent(d, dephased=True) for d in (1, 2, 3)] == [0.5, 1.0, 1.5]


def test_transit_time_ansatz_two_dimensional():
    assert transit_time_ansatz(2, 4) == pytest.approx(1 / math.sqrt(2) + 1 / math.sqrt(3) + 1 / 2)
    assert transit_time_ansatz(1, 5, omega=2.0) == pytest.approx(2.0)


def synthetic_series(times, mean_n, leakage=None):
    times = np.asarray(times, dtype=float)
    leakage = np.zeros_like(times) if leakage is None else np.asarray(leakage, dtype=float)
    return PolarisationSeries(times=times, mean_n=np.asarray(mean_n, dtype=float), leakage=leakage)


def test_fit_exact_power_law():
    times = np.linspace(0.0, 20.0, 101)
    fit = fit_exponent(synthetic_series(times, np.maximum(times ** 2, 1.0)))
    assert fit.exponent == pytest.approx(2.0, abs=1e-12)
    assert fit.stderr == pytest.approx(0.0, abs=1e-10)
    assert fit.window == (pytest.approx(4.0), pytest.approx(20.0))


def test_fit_drops_contaminated_points():
    times = np.linspace(0.0, 20.0, 101)
    mean_n = np.maximum(times ** 2, 1.0)
    leakage = np.where(times > 15.0, 1e-3, 0.0)
    mean_n[times > 15.0] = 5.0
    series = synthetic_series(times, mean_n, leakage)
    assert default_window(series)[1] == pytest.approx(15.0)
    assert fit_exponent(series).exponent == pytest.approx(2.0, abs=1e-12)


def test_fit_needs_eight_points():
    times = np.linspace(0.0, 10.0, 8)
    with pytest.raises(InsufficientDataError):
        fit_exponent(synthetic_series(times, 3.0 + times))


def test_shifted_fit_recovers_offset_power_law():
    times = np.linspace(0.0, 14.0, 141)
    series = synthetic_series(times, 0.3 * (times + 1.5) ** 3)
    plain = fit_exponent(series)
    fit = fit_exponent(series, shifted=True)
    assert plain.exponent < 2.9
    assert fit.exponent == pytest.approx(3.0, abs=1e-5)
    assert fit.time_offset == pytest.approx(1.5, abs=1e-4)
    assert fit.to_dict()["t0"] == fit.time_offset


def test_shifted_fit_keeps_pure_power_law():
    times = np.linspace(0.0, 20.0, 101)
    fit = fit_exponent(synthetic_series(times, np.maximum(times ** 2, 1.0)), shifted=True)
    assert fit.exponent == pytest.approx(2.0, abs=1e-5)
    assert fit.time_offset == pytest.approx(0.0, abs=1e-4)


def test_front_transit_on_uniform_chain():
    times = np.linspace(0.0, 10.0, 101)
    series = synthetic_series(times, 1.0 + times)
    transit = front_transit(series, Dimension.D1, omega=2.0)
    assert transit["transit_n"] == 11
    assert transit["transit_measured"] == pytest.approx(10.0)
    assert transit["transit_ansatz"] == pytest.approx(5.0)


def test_front_transit_stops_at_contamination():
    times = np.linspace(0.0, 10.0, 101)
    leakage = np.where(times > 4.0, 1e-3, 0.0)
    transit = front_transit(synthetic_series(times, 1.0 + times, leakage), Dimension.D1)
    assert transit["transit_n"] == 5
    assert transit["transit_measured"] == pytest.approx(4.0)


@pytest.mark.slow
def test_one_dimensional_exponent():
    spec = build_chain(1, 512, 1.0)
    series = polarisation_series(evolve(spec, np.linspace(0.0, 200.0, 201)))
    assert fit_exponent(series).exponent == pytest.approx(1.0, abs=0.05)


@pytest.mark.slow
def test_two_dimensional_exponent():
    spec = build_chain(2, 256, 1.0)
    series = polarisation_series(evolve(spec, np.linspace(0.0, 16.0, 201)))
    t_guard = series.t_guard()
    assert t_guard is not None and t_guard > 8.0
    assert fit_exponent(series, shifted=True).exponent == pytest.approx(2.0, abs=0.1)


@pytest.mark.slow
def test_three_dimensional_exponent():
    spec = build_chain(3)
    assert spec.length == 1024
    series = polarisation_series(evolve(spec, np.linspace(0.0, 14.0, 141)))
    assert series.t_guard() is not None
    assert fit_exponent(series, shifted=True).exponent == pytest.approx(3.0, abs=0.15)
