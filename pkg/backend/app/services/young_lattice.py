"""
Young's Lattice Service
Partitions, parent/child links, exact path weights and the coupled states
of the reduced 2D Hamiltonian.
"""

from functools import lru_cache
import logging
import math
from typing import Dict, List, Tuple

from app.core.errors import InvalidParameterError, SizeLimitError
from app.models.partition import CoupledState, LatticeLevel, Partition

logger = logging.getLogger(__name__)

# p(50) = 204226 partitions; the level recursion keeps every level below n alive
MAX_EXCITATIONS = 50


def _check_cap(n: int):
    if n < 0:
        raise InvalidParameterError(f"excitation count must be non-negative, got {n}")
    if n > MAX_EXCITATIONS:
        raise SizeLimitError(f"n={n} exceeds the partition cap of {MAX_EXCITATIONS}")


def _descending(n: int, max_part: int):
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _descending(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _partition_tuple(n: int) -> Tuple[Partition, ...]:
    return tuple(Partition(parts) for parts in _descending(n, n))


def partitions_of(n: int) -> List[Partition]:
    """All partitions of n, reverse lexicographic: (3), (2,1), (1,1,1)"""
    _check_cap(n)
    return list(_partition_tuple(n))


def parents(partition: Partition) -> List[Partition]:
    """Partitions one box smaller (remove a unit from a removable corner)"""
    parts = partition.parts
    if not parts:
        raise InvalidParameterError("the empty partition has no parents")
    result = []
    for i, part in enumerate(parts):
        if i == len(parts) - 1 or part > parts[i + 1]:
            smaller = parts[:i] + (part - 1,) + parts[i + 1:]
            result.append(Partition(tuple(p for p in smaller if p > 0)))
    return sorted(result, key=lambda p: p.parts, reverse=True)


def children(partition: Partition) -> List[Partition]:
    """Partitions one box larger; dual of parents()"""
    parts = partition.parts
    result = []
    for i in range(len(parts)):
        if i == 0 or parts[i - 1] > parts[i]:
            result.append(Partition(parts[:i] + (parts[i] + 1,) + parts[i + 1:]))
    result.append(Partition(parts + (1,)))
    return sorted(result, key=lambda p: p.parts, reverse=True)


def hook_length_count(partition: Partition) -> int:
    """n! / product of hook lengths; cross-check for the path weights only"""
    parts = partition.parts
    conjugate = [sum(1 for p in parts if p > j) for j in range(parts[0])] if parts else []
    product = 1
    for i, row in enumerate(parts):
        for j in range(row):
            product *= (row - j - 1) + (conjugate[j] - i - 1) + 1
    return math.factorial(partition.n) // product


class YoungLattice:
    """
    Builds levels of Young's lattice from the single-box partition upward.

    Weights count saturated paths from (1); levels are cached so repeated
    queries (CLI dumps, coupled states, oracle checks) share the recursion.
    """

    def __init__(self):
        self._levels: Dict[int, LatticeLevel] = {1: LatticeLevel(1, {Partition((1,)): 1})}

    def level(self, n: int) -> LatticeLevel:
        _check_cap(n)
        if n < 1:
            raise InvalidParameterError("levels start at n=1 (the single-box partition)")
        top = max(self._levels)
        while top < n:
            below = self._levels[top]
            entries = {}
            for partition in _partition_tuple(top + 1):
                entries[partition] = sum(below.entries[p] for p in parents(partition))
            top += 1
            self._levels[top] = LatticeLevel(top, entries)
            logger.debug(f"Young level {top}: {len(entries)} partitions")
        return self._levels[n]

    def coupled_state(self, n: int) -> CoupledState:
        """
        Iterate beta_j = sum of parent coefficients from |1>, then normalise.

        The unnormalised coefficients stay exact integers, so the final
        amplitudes come from a ratio of big integers and one square root.
        """
        _check_cap(n)
        if n < 1:
            raise InvalidParameterError("coupled states start at n=1")
        current = {Partition((1,)): 1}
        for k in range(2, n + 1):
            current = {
                mu: sum(current[lam] for lam in parents(mu))
                for mu in _partition_tuple(k)
            }
        norm_squared = sum(b * b for b in current.values())
        coeffs = {p: math.sqrt(b * b / norm_squared) for p, b in current.items()}
        return CoupledState(n, coeffs)

    def coupling_from_coefficients(self, n: int, omega: float) -> float:
        """<n|H|n+1> summed over parent links, each link contributing omega"""
        lower = self.coupled_state(n)
        upper = self.coupled_state(n + 1)
        total = 0.0
        for mu, c_mu in upper.coeffs.items():
            total += c_mu * math.fsum(lower.coefficient(lam) for lam in parents(mu))
        return omega * total

    def dump_levels(self, n_max: int) -> str:
        """Text dump: `parts TAB weight` per line, blank line between levels"""
        _check_cap(n_max)
        blocks = [self.level(n).to_text() for n in range(1, n_max + 1)]
        return "\n\n".join(blocks) + "\n"

    def level_check_table(self, n_max: int) -> List[Dict]:
        _check_cap(n_max)
        rows = []
        for n in range(1, n_max + 1):
            lvl = self.level(n)
            square_sum = lvl.square_sum()
            factorial = math.factorial(n)
            rows.append({
                "n": n,
                "partitions": len(lvl),
                "sum_w2": square_sum,
                "n_factorial": factorial,
                "check": "ok" if square_sum == factorial else "FAIL",
            })
        return rows


def effective_coupling(n: int, omega: float) -> float:
    """Omega * N_n / N_{n-1} with N_n = sqrt(n!), i.e. Omega * sqrt(n)"""
    if n < 1:
        raise InvalidParameterError("coupling index starts at n=1")
    if omega <= 0:
        raise InvalidParameterError("omega must be positive")
    return omega * math.sqrt(n)


young_lattice = YoungLattice()


def level(n: int) -> LatticeLevel:
    return young_lattice.level(n)


def coupled_state(n: int) -> CoupledState:
    return young_lattice.coupled_state(n)
