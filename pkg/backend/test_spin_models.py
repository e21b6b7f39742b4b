"""Full rotating-frame spin models against the resonance-rule dynamics"""

import numpy as np
import pytest
from scipy import integrate

from app.core.errors import InvalidParameterError
from app.models.lattice import LatticeConfig
from app.services.spin_models import (
    TwoToneLattice,
    domain_wall_indices,
    ising_chain_hamiltonian,
    rule_subspace_size,
    rwa_validate_1d,
    two_tone_validate_2d,
)


def test_ising_chain_hamiltonian_is_hermitian():
    h = ising_chain_hamiltonian(5, 1.0, 0.1)
    assert h.shape == (16, 16)
    np.testing.assert_allclose(h, h.conj().T)


def test_domain_walls_are_resonant():
    h = ising_chain_hamiltonian(6, 1.0, 0.0)
    energies = np.real(np.diag(h))[domain_wall_indices(6)]
    # every wall position short of the open end costs the same Ising energy
    np.testing.assert_allclose(energies[:-1], energies[0])


def test_rwa_without_drive_has_no_leakage():
    series = rwa_validate_1d(6, 1.0, 0.0, np.linspace(0.0, 50.0, 11))
    np.testing.assert_allclose(series.leakage, 0.0, atol=1e-12)
    np.testing.assert_allclose(series.mean_up, 0.0, atol=1e-12)


def test_rwa_leakage_bound():
    omega = 0.02
    series = rwa_validate_1d(8, 1.0, omega, np.linspace(0.0, 20.0 / omega, 401))
    assert series.leakage.max() <= 0.05
    assert series.mean_up[0] == pytest.approx(0.0, abs=1e-12)
    assert list(series.to_frame().columns) == ["t", "leakage"]


def test_rwa_leakage_scales_with_drive():
    coarse = rwa_validate_1d(8, 1.0, 0.02, np.linspace(0.0, 1000.0, 801))
    fine = rwa_validate_1d(8, 1.0, 0.01, np.linspace(0.0, 2000.0, 801))
    assert fine.time_average() <= 0.5 * coarse.time_average()


def test_rwa_rejects_bad_size():
    with pytest.raises(InvalidParameterError):
        rwa_validate_1d(11, 1.0, 0.01, [0.0, 1.0])


def test_two_tone_grid_limits():
    with pytest.raises(InvalidParameterError):
        TwoToneLattice(4, 4, 1.0, 0.05)


def test_two_tone_index_of_frozen_corner():
    lattice = TwoToneLattice(3, 3, 1.0, 0.05)
    assert lattice.index_of(LatticeConfig.empty(3, 3)) == 0
    with pytest.raises(InvalidParameterError):
        lattice.index_of(LatticeConfig.empty(3, 3, corner_up=False))


def test_resonant_subspace_of_three_by_three():
    assert rule_subspace_size(3, 3) == (19, 256)
    assert rule_subspace_size(3, 3, corner_up=False) == (1, 256)


def test_two_tone_sigma_y_convention():
    lattice = TwoToneLattice(2, 2, 1.0, 0.05)
    # bit 0 set = first free spin up
    assert lattice.sigma_y[1, 0] == -1j
    assert lattice.sigma_y[0, 1] == 1j
    dense = lattice.sigma_y.toarray()
    np.testing.assert_allclose(dense, dense.conj().T)


def test_two_tone_step_is_unitary():
    lattice = TwoToneLattice(3, 3, 1.0, 0.05)
    rng = np.random.default_rng(4)
    psi0 = rng.normal(size=lattice.dim) + 1j * rng.normal(size=lattice.dim)
    psi0 /= np.linalg.norm(psi0)
    states = lattice.evolve(psi0, np.linspace(0.0, 20.0, 9))
    np.testing.assert_allclose(np.linalg.norm(states, axis=1), 1.0, atol=1e-9)


def test_two_tone_stepper_matches_direct_integration():
    lattice = TwoToneLattice(3, 3, 1.0, 0.05)
    psi0 = np.zeros(lattice.dim, dtype=complex)
    psi0[0] = 1.0
    times = np.linspace(0.0, 2.0, 5)
    stepped = lattice.evolve(psi0, times, max_step=0.002)
    direct = integrate.solve_ivp(lattice.rhs, (0.0, 2.0), psi0, method="DOP853", t_eval=times,
                                 rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(stepped, direct.y.T, atol=1e-6)


def test_two_tone_without_drive_is_static():
    series = two_tone_validate_2d(3, 3, 1.0, 0.0, np.linspace(0.0, 10.0, 5))
    np.testing.assert_allclose(series.leakage, 0.0, atol=1e-12)
    np.testing.assert_allclose(series.deviation, 0.0, atol=1e-12)


@pytest.mark.slow
def test_two_tone_follows_rule_dynamics():
    omega = 0.05
    series = two_tone_validate_2d(3, 3, 1.0, omega, np.linspace(0.0, 5.0 / omega, 101))
    assert series.deviation.max() <= 0.1


@pytest.mark.slow
def test_two_tone_weaker_drive_follows_longer():
    omega = 0.025
    series = two_tone_validate_2d(3, 3, 1.0, omega, np.linspace(0.0, 10.0 / omega, 201))
    assert series.deviation.max() <= 0.1


@pytest.mark.slow
def test_two_tone_corner_down_stays_down():
    omega = 0.05
    series = two_tone_validate_2d(3, 3, 1.0, omega, np.linspace(0.0, 10.0 / omega, 101), corner_up=False)
    assert series.mean_up.max() <= 0.05
