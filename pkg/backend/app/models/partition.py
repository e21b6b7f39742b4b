"""
Partition models - nodes and levels of Young's lattice
"""

from dataclasses import dataclass, field
import math
from typing import Dict, Iterator, List, Tuple

import numpy as np

from app.core.errors import InvalidParameterError


@dataclass(frozen=True, order=False)
class Partition:
    """
    Non-increasing sequence of positive integers.

    The empty tuple is the unique partition of 0.
    """

    parts: Tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 1 for p in parts):
            raise InvalidParameterError(f"partition parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise InvalidParameterError(f"partition parts must be non-increasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def label(self) -> str:
        """Comma list used by the text dumps, e.g. '3,2,1'"""
        return ",".join(str(p) for p in self.parts)

    @classmethod
    def from_label(cls, label: str) -> "Partition":
        label = label.strip()
        if not label:
            return cls(())
        return cls(tuple(int(x) for x in label.split(",")))

    def __repr__(self) -> str:
        return f"Partition({self.parts})"


@dataclass(frozen=True)
class LatticeLevel:
    """One level of Young's lattice with exact integer path weights"""

    n: int
    entries: Dict[Partition, int] = field(default_factory=dict)

    def weight(self, partition: Partition) -> int:
        return self.entries[partition]

    def partitions(self) -> List[Partition]:
        return list(self.entries.keys())

    def square_sum(self) -> int:
        return sum(w * w for w in self.entries.values())

    def is_consistent(self) -> bool:
        """Sum of squared weights equals n!"""
        return self.square_sum() == math.factorial(self.n)

    def to_text(self) -> str:
        return "\n".join(f"{p.label()}\t{w}" for p, w in self.entries.items())

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class CoupledState:
    """Normalised superposition of level-n partition states"""

    n: int
    coeffs: Dict[Partition, float] = field(default_factory=dict)

    def coefficient(self, partition: Partition) -> float:
        return self.coeffs.get(partition, 0.0)

    def norm_squared(self) -> float:
        return math.fsum(c * c for c in self.coeffs.values())

    def as_vector(self) -> np.ndarray:
        return np.array(list(self.coeffs.values()), dtype=float)
