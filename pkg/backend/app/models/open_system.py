"""
Open-system models - dephased chains and their classical Markov shadow
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from app.core.errors import InvalidParameterError
from app.models.chain import ChainSpec


@dataclass(frozen=True)
class DephasingSpec:
    """Chain under collective dephasing with noise operator L = sum_n n|n><n|"""

    chain: ChainSpec
    gamma: float

    def __post_init__(self):
        if self.gamma < 0 or not np.isfinite(self.gamma):
            raise InvalidParameterError(f"gamma must be non-negative, got {self.gamma}")

    @property
    def noise_op(self) -> np.ndarray:
        return np.arange(1, self.chain.length + 1, dtype=float)


@dataclass(frozen=True)
class DensityMatrix:
    rho: np.ndarray
    time: float

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho)).copy()

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))[0])


@dataclass(frozen=True)
class MarkovSpec:
    """Symmetric hop rates w_n for |n> <-> |n+1>"""

    rates: np.ndarray

    def __post_init__(self):
        if np.any(self.rates <= 0):
            raise InvalidParameterError("Markov rates must be positive")

    @property
    def length(self) -> int:
        return len(self.rates) + 1

    def generator(self) -> sparse.csc_matrix:
        """Q with dp/dt = Q p, closed (reflecting) at both ends"""
        w = self.rates
        diag = np.zeros(self.length)
        diag[:-1] -= w
        diag[1:] -= w
        return sparse.diags([w, diag, w], [-1, 0, 1], format="csc")


@dataclass(frozen=True)
class ProbabilityVector:
    p: np.ndarray
    time: float

    def total(self) -> float:
        return float(np.sum(self.p))
