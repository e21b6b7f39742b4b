"""
Full Spin Models
Rotating-frame Ising Hamiltonians on tiny lattices, used to measure how much
population escapes the resonant (rule) subspace.

Basis states are integers over the free spins, bit b set = spin b up. The
test spin is frozen and only enters through its Ising field.
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np
from scipy import linalg, sparse

from app.core.errors import IntegrationError, InvalidParameterError
from app.models.lattice import CORNER, LatticeConfig, LeakageSeries, Site
from app.services.lattice_oracle import build_rule_hamiltonian, reachable_states

logger = logging.getLogger(__name__)

MAX_CHAIN_SPINS = 10
MAX_GRID_SPINS = 12
RWA_RATIO_LIMIT = 0.1
TWO_TONE_RATIO_LIMIT = 0.05
NORM_TOL = 1e-9
DEFAULT_MAX_STEP = 0.01
YOSHIDA_WEIGHTS = (
    1.0 / (2.0 - 2.0 ** (1.0 / 3.0)),
    -(2.0 ** (1.0 / 3.0)) / (2.0 - 2.0 ** (1.0 / 3.0)),
    1.0 / (2.0 - 2.0 ** (1.0 / 3.0)),
)


def _signs(dim: int, n_bits: int) -> np.ndarray:
    """sigma_z eigenvalue (+1 up / -1 down) of every free spin in every basis state"""
    states = np.arange(dim)[:, None]
    bits = (states >> np.arange(n_bits)[None, :]) & 1
    return 2 * bits - 1


def _flip_operator(dim: int, n_bits: int, kind: str = "x") -> sparse.csr_matrix:
    """Sum over free spins of sigma_x (or sigma_y)"""
    states = np.arange(dim)
    rows, cols, data = [], [], []
    for b in range(n_bits):
        targets = states ^ (1 << b)
        rows.append(targets)
        cols.append(states)
        if kind == "x":
            data.append(np.ones(dim, dtype=complex))
        else:
            # sigma_y |up> = i |down>, sigma_y |down> = -i |up>
            was_up = (states >> b) & 1
            data.append(np.where(was_up == 1, 1j, -1j))
    return sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )


def _popcounts(dim: int, n_bits: int) -> np.ndarray:
    return ((np.arange(dim)[:, None] >> np.arange(n_bits)[None, :]) & 1).sum(axis=1)


def _walsh_hadamard(psi: np.ndarray) -> np.ndarray:
    """Normalised Walsh-Hadamard transform (its own inverse), butterflies bit by bit"""
    out = np.array(psi, dtype=complex)
    dim = len(out)
    h = 1
    while h < dim:
        view = out.reshape(-1, 2, h)
        low = view[:, 0, :].copy()
        view[:, 0, :] += view[:, 1, :]
        view[:, 1, :] = low - view[:, 1, :]
        h *= 2
    return out / np.sqrt(dim)


def _evolve_eigh(hamiltonian: np.ndarray, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Exact propagation of a time-independent Hamiltonian, rows = times"""
    energies, vectors = linalg.eigh(hamiltonian)
    weights = vectors.T.conj() @ psi0
    phases = np.exp(-1j * np.outer(times, energies))
    return (phases * weights[None, :]) @ vectors.T


def ising_chain_hamiltonian(n_spins: int, coupling: float, omega: float) -> np.ndarray:
    """H = J sum s_i s_{i+1} + Omega sum sigma_x on spins 2..n, spin 1 frozen up"""
    n_bits = n_spins - 1
    dim = 1 << n_bits
    s = _signs(dim, n_bits)
    chain = np.concatenate([np.ones((dim, 1), dtype=int), s], axis=1)
    diagonal = coupling * np.sum(chain[:, :-1] * chain[:, 1:], axis=1)
    return np.diag(diagonal.astype(complex)) + omega * _flip_operator(dim, n_bits).toarray()


def domain_wall_indices(n_spins: int) -> np.ndarray:
    """|k>: spins 1..k up, k = 1..n"""
    return np.array([(1 << (k - 1)) - 1 for k in range(1, n_spins + 1)])


def rwa_validate_1d(n_spins: int, coupling: float, omega: float, t_grid: Sequence[float]) -> LeakageSeries:
    """
    Full 2^(n-1) evolution from all-down vs the resonant domain-wall chain.

    The resonant chain couples |k> and |k+1> with omega for k = 1..n-2; the
    last spin has a single neighbour and never flips resonantly.
    """
    if not 2 <= n_spins <= MAX_CHAIN_SPINS:
        raise InvalidParameterError(f"n_spins must lie in [2, {MAX_CHAIN_SPINS}]")
    if coupling <= 0 or omega < 0:
        raise InvalidParameterError("need J > 0 and omega >= 0")
    if omega / coupling > RWA_RATIO_LIMIT:
        logger.warning(f"⚠️ omega/J = {omega / coupling:.3g} is outside the RWA regime")
    times = np.asarray(t_grid, dtype=float)

    full = ising_chain_hamiltonian(n_spins, coupling, omega)
    psi0 = np.zeros(full.shape[0], dtype=complex)
    psi0[0] = 1.0
    full_pops = np.abs(_evolve_eigh(full, psi0, times)) ** 2
    walls = full_pops[:, domain_wall_indices(n_spins)]

    reduced = omega * (np.eye(n_spins - 1, k=1) + np.eye(n_spins - 1, k=-1))
    start = np.zeros(n_spins - 1, dtype=complex)
    start[0] = 1.0
    chain_pops = np.abs(_evolve_eigh(reduced, start, times)) ** 2
    chain_pops = np.concatenate([chain_pops, np.zeros((len(times), 1))], axis=1)

    series = LeakageSeries(
        times=times,
        leakage=np.clip(1.0 - walls.sum(axis=1), 0.0, None),
        deviation=np.abs(walls - chain_pops).sum(axis=1),
        mean_up=full_pops @ _popcounts(full.shape[0], n_spins - 1),
    )
    logger.info(f"✅ RWA check n={n_spins} omega/J={omega / coupling:.3g}: "
                f"max leakage {series.leakage.max():.2e}")
    return series


class TwoToneLattice:
    """
    Rotating frame of the bulk drive on a width x height grid.

    H(t) = J sum_bonds s_i s_j + Omega sum sigma_x
           + Omega sum (cos(2Jt) sigma_x - sin(2Jt) sigma_y)

    The second tone sits 2J below the bulk resonance: an edge spin with one
    up and two down neighbours has flip energy -2J in this frame. Spins past
    the far boundary are fixed down and contribute a field -J to their
    neighbour.
    """

    def __init__(self, width: int, height: int, coupling: float, omega: float, corner_up: bool = True):
        if width * height > MAX_GRID_SPINS:
            raise InvalidParameterError(f"width*height must be <= {MAX_GRID_SPINS}")
        if width < 2 or height < 2:
            raise InvalidParameterError("grid must be at least 2x2")
        if coupling <= 0 or omega < 0:
            raise InvalidParameterError("need J > 0 and omega >= 0")
        self.width = width
        self.height = height
        self.coupling = coupling
        self.omega = omega
        self.corner_up = corner_up
        self.sites: List[Site] = [(r, c) for r in range(height) for c in range(width) if (r, c) != CORNER]
        self.n_bits = len(self.sites)
        self.dim = 1 << self.n_bits
        self.diagonal = self._ising_diagonal()
        self.sigma_x = _flip_operator(self.dim, self.n_bits, "x")
        self.sigma_y = _flip_operator(self.dim, self.n_bits, "y")
        self._x_eigs = (self.n_bits - 2 * _popcounts(self.dim, self.n_bits)).astype(float)
        self._sz = 0.5 * _signs(self.dim, self.n_bits).sum(axis=1)

    def _site_signs(self) -> np.ndarray:
        """(dim, height, width) grid of spin signs including the frozen corner"""
        grid = np.zeros((self.dim, self.height, self.width), dtype=int)
        grid[:, CORNER[0], CORNER[1]] = 1 if self.corner_up else -1
        s = _signs(self.dim, self.n_bits)
        for b, (r, c) in enumerate(self.sites):
            grid[:, r, c] = s[:, b]
        return grid

    def _ising_diagonal(self) -> np.ndarray:
        grid = self._site_signs()
        energy = np.sum(grid[:, :, :-1] * grid[:, :, 1:], axis=(1, 2))
        energy += np.sum(grid[:, :-1, :] * grid[:, 1:, :], axis=(1, 2))
        # far-boundary spins see a down neighbour outside the grid
        energy -= np.sum(grid[:, :, -1], axis=1)
        energy -= np.sum(grid[:, -1, :], axis=1)
        return self.coupling * energy.astype(float)

    def index_of(self, config: LatticeConfig) -> int:
        if config.corner_up != self.corner_up:
            raise InvalidParameterError("configuration disagrees with the frozen test spin")
        return sum(1 << b for b, (r, c) in enumerate(self.sites) if config.spins[r, c])

    def rhs(self, t: float, psi: np.ndarray) -> np.ndarray:
        phase = 2.0 * self.coupling * t
        h_psi = self.diagonal * psi
        h_psi += self.omega * (1.0 + np.cos(phase)) * (self.sigma_x @ psi)
        h_psi -= self.omega * np.sin(phase) * (self.sigma_y @ psi)
        return -1j * h_psi

    def _drive_step(self, psi: np.ndarray, t_mid: float, h: float) -> np.ndarray:
        """
        exp(-i h V(t_mid)) psi for the single-spin drive V.

        Per spin V = r (cos a sigma_x + sin a sigma_y) = e^{-i a Sz} r sigma_x e^{i a Sz},
        and the collective sigma_x is diagonal in the Walsh-Hadamard basis.
        """
        phase = 2.0 * self.coupling * t_mid
        x_part = self.omega * (1.0 + np.cos(phase))
        y_part = -self.omega * np.sin(phase)
        r = np.hypot(x_part, y_part)
        if r == 0.0:
            return psi
        angle = np.arctan2(y_part, x_part)
        psi = np.exp(1j * angle * self._sz) * psi
        psi = _walsh_hadamard(np.exp(-1j * h * r * self._x_eigs) * _walsh_hadamard(psi))
        return np.exp(-1j * angle * self._sz) * psi

    def _strang_step(self, psi: np.ndarray, t: float, h: float) -> np.ndarray:
        half = np.exp(-0.5j * h * self.diagonal)
        psi = self._drive_step(half * psi, t + 0.5 * h, h)
        return half * psi

    def step(self, psi: np.ndarray, t: float, h: float) -> np.ndarray:
        """Fourth-order symmetric composition of Strang steps; unitary to round-off"""
        for weight in YOSHIDA_WEIGHTS:
            psi = self._strang_step(psi, t, weight * h)
            t += weight * h
        return psi

    def evolve(self, psi0: np.ndarray, times: np.ndarray, max_step: float = DEFAULT_MAX_STEP) -> np.ndarray:
        """States at every output time, rows = times; max_step is in units of 1/J"""
        h_max = max_step / self.coupling
        psi = psi0.astype(complex)
        norm0 = float(np.vdot(psi, psi).real)
        out = np.empty((len(times), self.dim), dtype=complex)
        t = 0.0
        for i, target in enumerate(times):
            n_steps = int(np.ceil((target - t) / h_max - 1e-12))
            if n_steps > 0:
                h = (target - t) / n_steps
                for _ in range(n_steps):
                    psi = self.step(psi, t, h)
                    t += h
                t = float(target)
            out[i] = psi

        drift = np.abs(np.einsum("ij,ij->i", out.conj(), out).real - norm0)
        if drift.max() > NORM_TOL:
            bad = int(np.argmax(drift > NORM_TOL))
            raise IntegrationError(f"two-tone norm drift {drift.max():.2e} above {NORM_TOL:g}",
                                   last_good_time=float(times[bad - 1]) if bad > 0 else 0.0)
        return out


def _rule_populations(basis: List[LatticeConfig], omega: float, times: np.ndarray) -> np.ndarray:
    hamiltonian = build_rule_hamiltonian(basis, omega)
    start = np.zeros(len(basis), dtype=complex)
    start[0] = 1.0
    return np.abs(_evolve_eigh(hamiltonian.elements.toarray().astype(complex), start, times)) ** 2


def two_tone_validate_2d(width: int, height: int, coupling: float, omega: float,
                         t_grid: Sequence[float], corner_up: bool = True) -> LeakageSeries:
    """
    Full two-tone evolution from all ancillas down vs the rule Hamiltonian on
    every configuration reachable inside the grid.
    """
    times = np.asarray(t_grid, dtype=float)
    if omega / coupling > TWO_TONE_RATIO_LIMIT:
        logger.warning(f"⚠️ omega/J = {omega / coupling:.3g} above the two-tone validation range")
    lattice = TwoToneLattice(width, height, coupling, omega, corner_up)

    basis = reachable_states(width, height, width * height, corner_up=corner_up, strict=False)
    indices = np.array([lattice.index_of(c) for c in basis])

    psi0 = np.zeros(lattice.dim, dtype=complex)
    psi0[indices[0]] = 1.0
    full_pops = np.abs(lattice.evolve(psi0, times)) ** 2
    subspace = full_pops[:, indices]
    rule_pops = _rule_populations(basis, omega, times)

    series = LeakageSeries(
        times=times,
        leakage=np.clip(1.0 - subspace.sum(axis=1), 0.0, None),
        deviation=np.abs(subspace - rule_pops).sum(axis=1),
        mean_up=full_pops @ _popcounts(lattice.dim, lattice.n_bits),
    )
    logger.info(f"✅ two-tone check {width}x{height} omega/J={omega / coupling:.3g}: "
                f"{len(basis)} resonant states, max leakage {series.leakage.max():.2e}")
    return series


def rule_subspace_size(width: int, height: int, corner_up: bool = True) -> Tuple[int, int]:
    """(resonant states, full Hilbert dimension) for a two-tone grid"""
    basis = reachable_states(width, height, width * height, corner_up=corner_up, strict=False)
    return len(basis), 1 << (width * height - 1)
