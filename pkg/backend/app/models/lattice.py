"""
Lattice models - spin grids, rule Hamiltonians and validation series

Sites are (row, col), zero-based; the test spin sits at the corner (0, 0).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.integrate import trapezoid

from app.core.errors import InvalidParameterError
from app.models.partition import Partition

Site = Tuple[int, int]
CORNER: Site = (0, 0)


class LatticeConfig:
    """Immutable boolean spin grid (True = up)"""

    __slots__ = ("_spins", "_key")

    def __init__(self, spins):
        grid = np.array(spins, dtype=bool)
        if grid.ndim != 2 or min(grid.shape) < 1:
            raise InvalidParameterError("spin grid must be a non-empty 2D array")
        grid.setflags(write=False)
        self._spins = grid
        self._key = (grid.shape, grid.tobytes())

    @classmethod
    def empty(cls, width: int, height: int, corner_up: bool = True) -> "LatticeConfig":
        spins = np.zeros((height, width), dtype=bool)
        spins[CORNER] = corner_up
        return cls(spins)

    @classmethod
    def staircase(cls, width: int, height: int, partition: Partition) -> "LatticeConfig":
        """Column c holds parts[c] up spins from the top edge"""
        spins = np.zeros((height, width), dtype=bool)
        if len(partition) > width or (partition.parts and partition.parts[0] > height):
            raise InvalidParameterError(f"{partition} does not fit a {width}x{height} grid")
        for col, count in enumerate(partition.parts):
            spins[:count, col] = True
        return cls(spins)

    @property
    def spins(self) -> np.ndarray:
        return self._spins

    @property
    def height(self) -> int:
        return self._spins.shape[0]

    @property
    def width(self) -> int:
        return self._spins.shape[1]

    @property
    def corner_up(self) -> bool:
        return bool(self._spins[CORNER])

    def up_count(self) -> int:
        return int(self._spins.sum())

    def column_counts(self) -> Tuple[int, ...]:
        counts = self._spins.sum(axis=0)
        return tuple(int(c) for c in counts[counts > 0])

    def partition(self) -> Optional[Partition]:
        """Partition label when the up spins form a corner staircase"""
        counts = self._spins.sum(axis=0)
        for col, count in enumerate(counts):
            if not self._spins[:count, col].all():
                return None
        if np.any(np.diff(counts) > 0):
            return None
        return Partition(tuple(int(c) for c in counts if c > 0))

    def flipped(self, site: Site) -> "LatticeConfig":
        if site == CORNER:
            raise InvalidParameterError("the test spin is never flipped")
        spins = self._spins.copy()
        spins[site] = not spins[site]
        return LatticeConfig(spins)

    def bitstring(self) -> str:
        """Row-major, '1' for up"""
        return "".join("1" if s else "0" for s in self._spins.ravel())

    def __eq__(self, other) -> bool:
        return isinstance(other, LatticeConfig) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"LatticeConfig({self.width}x{self.height}, up={self.up_count()})"


@dataclass(frozen=True)
class RuleHamiltonian:
    """Reachable basis with entry omega between configs one allowed flip apart"""

    basis: List[LatticeConfig]
    elements: sparse.csr_matrix
    omega: float
    index: Dict[LatticeConfig, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.basis)

    def levels(self) -> List[int]:
        return [c.up_count() for c in self.basis]

    def level_sizes(self) -> Dict[int, int]:
        sizes: Dict[int, int] = {}
        for n in self.levels():
            sizes[n] = sizes.get(n, 0) + 1
        return sizes

    def state_vector(self, config: LatticeConfig) -> np.ndarray:
        vec = np.zeros(len(self.basis))
        vec[self.index[config]] = 1.0
        return vec


@dataclass(frozen=True)
class TridiagonalForm:
    """
    Lanczos coefficients from the seed configuration.

    betas[i] couples the (i+1)-th and (i+2)-th Lanczos vectors, i.e. the
    coupled states |i+1> and |i+2>.
    """

    alphas: np.ndarray
    betas: np.ndarray

    def coupling(self, k: int) -> float:
        """<k|H|k+1> for k >= 1"""
        if not 1 <= k <= len(self.betas):
            raise InvalidParameterError(f"coupling index {k} outside 1..{len(self.betas)}")
        return float(self.betas[k - 1])


@dataclass(frozen=True)
class LeakageSeries:
    """
    Population leaving the resonant subspace under the full spin Hamiltonian.

    deviation is the L1 distance between full and reduced subspace
    populations; mean_up counts up spins other than the test spin.
    """

    times: np.ndarray
    leakage: np.ndarray
    deviation: np.ndarray
    mean_up: np.ndarray

    def time_average(self) -> float:
        if len(self.times) < 2:
            return float(self.leakage.mean())
        return float(trapezoid(self.leakage, self.times) / (self.times[-1] - self.times[0]))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "leakage": self.leakage})
