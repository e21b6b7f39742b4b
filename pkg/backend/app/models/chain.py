"""
Chain models - effective 1D chains, their states and polarisation series
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy import sparse

from app.core.errors import InvalidParameterError

MIN_CHAIN_LENGTH = 2


class Dimension(IntEnum):
    """Lattice dimension behind an effective chain"""

    D1 = 1
    D2 = 2
    D3 = 3

    @property
    def coupling_exponent(self) -> float:
        # boundary of a d-dimensional excitation of size n grows as n^((d-1)/d)
        return (self.value - 1) / self.value

    @classmethod
    def parse(cls, value) -> "Dimension":
        if isinstance(value, Dimension):
            return value
        text = str(value).strip().upper().lstrip("D")
        try:
            return cls(int(text))
        except (ValueError, TypeError):
            raise InvalidParameterError(f"unknown dimension {value!r}; expected 1, 2 or 3")


@dataclass(frozen=True)
class ChainSpec:
    """Truncated chain |1>..|N> with zero diagonal and hops g_n for |n> <-> |n+1>"""

    dimension: Dimension
    length: int
    omega: float

    def __post_init__(self):
        if self.length < MIN_CHAIN_LENGTH:
            raise InvalidParameterError(f"chain length must be >= {MIN_CHAIN_LENGTH}, got {self.length}")
        if not self.omega > 0:
            raise InvalidParameterError(f"omega must be positive, got {self.omega}")

    @property
    def couplings(self) -> np.ndarray:
        n = np.arange(1, self.length, dtype=float)
        return self.omega * (n + 1.0) ** self.dimension.coupling_exponent

    def hamiltonian(self) -> sparse.csr_matrix:
        g = self.couplings
        return sparse.diags([g, g], [-1, 1], shape=(self.length, self.length), format="csr")

    def dense_hamiltonian(self) -> np.ndarray:
        return self.hamiltonian().toarray()

    def spectral_bound(self) -> float:
        """Gershgorin bound on |H|"""
        g = self.couplings
        row = np.zeros(self.length)
        row[:-1] += g
        row[1:] += g
        return float(row.max())


@dataclass(frozen=True)
class ChainState:
    amps: np.ndarray
    time: float

    def populations(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.sum(self.populations()))


@dataclass(frozen=True)
class PolarisationSeries:
    """
    Expected number of flipped spins over time.

    leakage is the population on the guard window at the truncated end;
    trace_error is only filled for density-matrix runs.
    """

    times: np.ndarray
    mean_n: np.ndarray
    leakage: np.ndarray
    trace_error: Optional[np.ndarray] = None

    def certified_mask(self, threshold: float = 1e-6) -> np.ndarray:
        """True up to (excluding) the first time guard leakage exceeds threshold"""
        contaminated = self.leakage > threshold
        if not contaminated.any():
            return np.ones_like(contaminated, dtype=bool)
        first = int(np.argmax(contaminated))
        mask = np.zeros_like(contaminated, dtype=bool)
        mask[:first] = True
        return mask

    def t_guard(self, threshold: float = 1e-6) -> Optional[float]:
        mask = self.certified_mask(threshold)
        if not mask.any():
            return None
        return float(self.times[mask][-1])

    def truncated(self, threshold: float = 1e-6) -> "PolarisationSeries":
        mask = self.certified_mask(threshold)
        return PolarisationSeries(
            times=self.times[mask],
            mean_n=self.mean_n[mask],
            leakage=self.leakage[mask],
            trace_error=None if self.trace_error is None else self.trace_error[mask],
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t": self.times, "mean_n": self.mean_n, "leakage": self.leakage})
        if self.trace_error is not None:
            frame["trace_err"] = self.trace_error
        return frame

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class ExponentFit:
    """Log-log slope of mean_n against t + time_offset"""

    exponent: float
    stderr: float
    intercept: float
    n_points: int
    window: Tuple[float, float]
    time_offset: float = 0.0

    def to_dict(self):
        return {
            "exponent": self.exponent,
            "stderr": self.stderr,
            "intercept": self.intercept,
            "t0": self.time_offset,
            "points": self.n_points,
            "t_lo": self.window[0],
            "t_hi": self.window[1],
        }
