"""Gillespie flip dynamics at finite temperature"""

import numpy as np
import pytest
from scipy import stats

from app.core.errors import InvalidParameterError
from app.models.lattice import LatticeConfig
from app.models.partition import Partition
from app.models.thermal import SweepResult, ThermalSpec
from app.services.lattice_oracle import allowed_flips
from app.services.thermal_mc import (
    FlipSimulator,
    boltzmann_up_fraction,
    detection_sweep,
    false_positive_sweep,
    growth_curve,
    max_temperature_for_fraction,
    run_trajectory,
    sample_initial,
    threshold_crossing,
    trial_rng,
    wilson_interval,
)


def test_boltzmann_fraction_at_one_point_four_kelvin():
    assert boltzmann_up_fraction(100e9, 1.4) == pytest.approx(0.031, abs=0.001)
    assert boltzmann_up_fraction(100e9, 0.7) == pytest.approx(1.05e-3, rel=0.01)
    assert boltzmann_up_fraction(100e9, 1e12) == pytest.approx(0.5, abs=1e-6)


def test_max_temperature_inverts_boltzmann():
    fraction = boltzmann_up_fraction(100e9, 1.4)
    assert max_temperature_for_fraction(fraction, 100e9) == pytest.approx(1.4, rel=1e-9)
    with pytest.raises(InvalidParameterError):
        max_temperature_for_fraction(0.6, 100e9)


def test_spec_validation():
    with pytest.raises(InvalidParameterError):
        ThermalSpec(width=4)
    with pytest.raises(InvalidParameterError):
        ThermalSpec(p_up=1.0)


def test_sample_initial():
    spec = ThermalSpec(width=50, height=50, p_up=0.04, test_up=True)
    first = sample_initial(spec, trial_rng(11, 0))
    again = sample_initial(spec, trial_rng(11, 0))
    assert first == again
    assert first.corner_up
    empty = sample_initial(ThermalSpec(p_up=0.0), trial_rng(11, 0))
    assert empty.up_count() == 0


def test_sample_initial_fraction():
    spec = ThermalSpec(width=100, height=100, p_up=0.5)
    config = sample_initial(spec, trial_rng(5, 0))
    ancillas = 100 * 100 - 1
    sigma = 0.5 / np.sqrt(ancillas)
    assert abs(config.up_count() / ancillas - 0.5) <= 3 * sigma


def test_no_defects_no_events():
    result = run_trajectory(ThermalSpec(width=16, height=16, p_up=0.0, test_up=False), trial_rng(0, 0))
    assert result.events == 0
    assert not result.triggered


def test_isolated_defect_is_frozen():
    spins = np.zeros((8, 8), dtype=bool)
    spins[4, 4] = True
    assert allowed_flips(LatticeConfig(spins)) == []
    simulator = FlipSimulator(LatticeConfig(spins), trial_rng(0, 0))
    assert simulator.allowed_count == 0


def test_flips_respect_rules():
    spec = ThermalSpec(width=16, height=16, p_up=0.08, test_up=True, t_max=30.0)
    result = run_trajectory(spec, trial_rng(2, 3), stop_on_trigger=False, check_rules=True)
    assert np.all(np.diff(result.times) > 0)
    assert np.all(result.up_counts >= 0)


def test_defect_cluster_at_far_edge_is_not_truncated():
    spins = np.zeros((3, 3), dtype=bool)
    spins[0, 1] = True
    simulator = FlipSimulator(LatticeConfig(spins), trial_rng(0, 0))
    assert simulator.allowed_count == 1
    result = simulator.run(t_max=1e6, trigger_count=1e9, max_events=1)
    assert result.up_counts[-1] == 2
    assert not result.truncated


def test_corner_front_at_far_edge_truncates():
    result = FlipSimulator(LatticeConfig.empty(3, 3), trial_rng(0, 0)).run(t_max=1e6, trigger_count=1e9)
    assert result.truncated
    assert not result.triggered
    assert result.up_counts[-1] >= 2


def test_false_positive_trials_are_never_truncated():
    template = ThermalSpec(width=10, height=10, t_max=20.0, theta=1.0, rng_seed=3)
    result = false_positive_sweep([0.1, 0.2], 200, template, workers=1)
    assert result.truncated.sum() == 0
    assert np.all(np.isfinite(result.trigger_rates))


def test_with_point_keeps_template():
    template = ThermalSpec(width=12, height=14, t_max=30.0, rng_seed=5, theta=0.4)
    point = template.with_point(0.03, True)
    assert (point.width, point.height, point.t_max, point.rng_seed, point.theta) == (12, 14, 30.0, 5, 0.4)
    assert point.p_up == 0.03 and point.test_up


def test_trajectory_is_deterministic():
    spec = ThermalSpec(width=20, height=20, p_up=0.05, test_up=True, t_max=40.0)
    first = run_trajectory(spec, trial_rng(9, 4))
    second = run_trajectory(spec, trial_rng(9, 4))
    np.testing.assert_array_equal(first.times, second.times)
    np.testing.assert_array_equal(first.up_counts, second.up_counts)
    assert first.triggered == second.triggered


@pytest.mark.parametrize("partition, rate", [((1,), 2), ((2, 1), 5)])
def test_waiting_time_is_exponential(partition, rate):
    config = LatticeConfig.staircase(8, 8, Partition(partition))
    assert len(allowed_flips(config)) == rate
    rng = np.random.default_rng(2024)
    waits = []
    for _ in range(10_000):
        result = FlipSimulator(config, rng).run(t_max=1e9, trigger_count=1e9, max_events=1)
        waits.append(result.times[1])
    assert stats.kstest(waits, "expon", args=(0.0, 1.0 / rate)).pvalue > 0.01


def test_growth_is_linear_without_defects():
    spec = ThermalSpec(width=48, height=48, p_up=0.0, test_up=True, t_max=60.0)
    results = [run_trajectory(spec, trial_rng(1, k), stop_on_trigger=False) for k in range(300)]
    assert not any(r.truncated for r in results)
    grid = np.linspace(10.0, 60.0, 11)
    curve = growth_curve(results, grid)
    slope = np.polyfit(grid, curve, 1)[0]
    assert slope == pytest.approx(1.0, abs=0.15)
    assert np.all(curve >= grid - 2.0)


def test_wilson_interval():
    low, high = wilson_interval(0, 200)
    assert low == pytest.approx(0.0, abs=1e-12)
    assert 0.0 < high < 0.03


def test_threshold_crossing_interpolates():
    sweep = SweepResult(
        p_values=np.array([0.01, 0.02, 0.03]),
        trials=200,
        triggered=np.array([0, 80, 180]),
        truncated=np.zeros(3, dtype=int),
        trigger_rates=np.array([0.0, 0.4, 0.9]),
        ci_low=np.zeros(3),
        ci_high=np.ones(3),
    )
    assert threshold_crossing(sweep) == pytest.approx(0.022)
    assert threshold_crossing(sweep, level=0.95) is None


def test_sweep_needs_enough_trials():
    with pytest.raises(InvalidParameterError):
        false_positive_sweep([0.0], 50, ThermalSpec(width=8, height=8))


def test_false_positive_rate_zero_without_defects():
    result = false_positive_sweep([0.0], 200, ThermalSpec(width=8, height=8, t_max=20.0), workers=1)
    assert result.trigger_rates[0] == 0.0
    assert result.triggered[0] == 0
    assert list(result.to_frame().columns) == [
        "p", "trials", "triggered", "rate", "ci_low", "ci_high", "truncated_count",
    ]


def test_detection_rate_one_without_defects():
    template = ThermalSpec(width=24, height=24, t_max=400.0, theta=0.1)
    result = detection_sweep([0.0], 200, template, workers=1)
    assert result.trigger_rates[0] == 1.0


def test_sweep_independent_of_worker_count():
    template = ThermalSpec(width=10, height=10, t_max=10.0, theta=0.3, rng_seed=17)
    serial = false_positive_sweep([0.1, 0.2], 200, template, workers=1)
    pooled = false_positive_sweep([0.1, 0.2], 200, template, workers=2)
    np.testing.assert_array_equal(serial.triggered, pooled.triggered)
    np.testing.assert_array_equal(serial.truncated, pooled.truncated)


@pytest.mark.slow
def test_false_positive_threshold_near_four_percent():
    template = ThermalSpec(width=50, height=50, t_max=200.0, theta=0.25, rng_seed=0)
    p_values = [0.01, 0.02, 0.031, 0.04, 0.05, 0.06, 0.07, 0.08, 0.1]
    sweep = false_positive_sweep(p_values, 400, template)
    assert sweep.truncated.sum() == 0
    assert sweep.trigger_rates[2] < 0.05  # p = 0.031
    crossing = threshold_crossing(sweep)
    assert crossing is not None and 0.02 <= crossing <= 0.07
