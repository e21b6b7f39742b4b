"""
Lattice Oracle Service
Resonance flip rules on explicit 2D grids, the reachable partition basis,
the rule Hamiltonian and its tridiagonalisation from the corner seed.

Geometry: the grid is a window onto a semi-infinite quadrant whose corner is
the test spin. Row 0 and column 0 sites are edges (three neighbours), every
other site has four; neighbours past the far boundary count as down.
"""

from collections import deque
import logging
from typing import Dict, List, Optional

import numpy as np
from scipy import sparse

from app.core.errors import BoundaryContactError, InvalidParameterError, NumericalBreakdownError
from app.models.lattice import CORNER, LatticeConfig, RuleHamiltonian, Site, TridiagonalForm
from app.services.young_lattice import partitions_of, young_lattice

logger = logging.getLogger(__name__)

EDGE_UP_NEIGHBOURS = 1
BODY_UP_NEIGHBOURS = 2
ORTHOGONALITY_TOL = 1e-8


def up_neighbour_counts(spins: np.ndarray) -> np.ndarray:
    up = spins.astype(np.int8)
    counts = np.zeros(up.shape, dtype=np.int8)
    counts[1:, :] += up[:-1, :]
    counts[:-1, :] += up[1:, :]
    counts[:, 1:] += up[:, :-1]
    counts[:, :-1] += up[:, 1:]
    return counts


def allowed_mask(spins: np.ndarray) -> np.ndarray:
    """Boolean grid of resonance-allowed flips"""
    required = np.full(spins.shape, BODY_UP_NEIGHBOURS, dtype=np.int8)
    required[0, :] = EDGE_UP_NEIGHBOURS
    required[:, 0] = EDGE_UP_NEIGHBOURS
    mask = up_neighbour_counts(spins) == required
    mask[CORNER] = False
    return mask


def site_allowed(spins, row: int, col: int) -> bool:
    """
    Single-site version of allowed_mask for incremental updates.

    Accepts any row-indexable grid (numpy array or list of bytearrays).
    """
    if row == 0 and col == 0:
        return False
    height, width = len(spins), len(spins[0])
    up = 0
    if row > 0 and spins[row - 1][col]:
        up += 1
    if row + 1 < height and spins[row + 1][col]:
        up += 1
    if col > 0 and spins[row][col - 1]:
        up += 1
    if col + 1 < width and spins[row][col + 1]:
        up += 1
    if row == 0 or col == 0:
        return up == EDGE_UP_NEIGHBOURS
    return up == BODY_UP_NEIGHBOURS


def allowed_flips(config: LatticeConfig) -> List[Site]:
    """Sites whose flip is resonant, row-major; the condition ignores the site itself"""
    rows, cols = np.nonzero(allowed_mask(config.spins))
    return [(int(r), int(c)) for r, c in zip(rows, cols)]


def touches_far_boundary(config: LatticeConfig) -> bool:
    spins = config.spins
    return bool(spins[-1, :].any() or spins[:, -1].any())


def reachable_states(width: int, height: int, max_n: int, corner_up: bool = True,
                     strict: bool = True) -> List[LatticeConfig]:
    """
    Breadth-first closure of the seed under allowed flips, capped at max_n
    up spins (test spin included).

    Ordered by level, then reverse lexicographic column counts. In strict
    mode any configuration reaching the last row or column is refused.
    """
    if width < 1 or height < 1:
        raise InvalidParameterError("grid dimensions must be positive")
    if max_n < 1:
        raise InvalidParameterError("max_n must be at least 1")
    seed = LatticeConfig.empty(width, height, corner_up)
    seen = {seed}
    queue = deque([seed])
    while queue:
        config = queue.popleft()
        for site in allowed_flips(config):
            neighbour = config.flipped(site)
            if neighbour.up_count() > max_n or neighbour in seen:
                continue
            if strict and touches_far_boundary(neighbour):
                raise BoundaryContactError(
                    f"reachable configuration {neighbour.column_counts()} touches the far boundary "
                    f"of the {width}x{height} grid; lower max_n or enlarge the grid"
                )
            seen.add(neighbour)
            queue.append(neighbour)

    basis = sorted(seen, key=lambda c: c.column_counts(), reverse=True)
    basis.sort(key=lambda c: c.up_count())
    logger.debug(f"reachable basis {width}x{height} max_n={max_n}: {len(basis)} states")
    return basis


def build_rule_hamiltonian(basis: List[LatticeConfig], omega: float = 1.0) -> RuleHamiltonian:
    index = {config: i for i, config in enumerate(basis)}
    rows, cols = [], []
    for i, config in enumerate(basis):
        for site in allowed_flips(config):
            j = index.get(config.flipped(site))
            if j is not None:
                rows.append(i)
                cols.append(j)
    data = np.full(len(rows), float(omega))
    elements = sparse.csr_matrix((data, (rows, cols)), shape=(len(basis), len(basis)))
    if (elements != elements.T).nnz:
        raise NumericalBreakdownError("rule Hamiltonian is not symmetric")
    return RuleHamiltonian(basis=basis, elements=elements, omega=float(omega), index=index)


def rule_hamiltonian(width: int, height: int, max_n: int, omega: float = 1.0,
                     corner_up: bool = True, strict: bool = True) -> RuleHamiltonian:
    return build_rule_hamiltonian(reachable_states(width, height, max_n, corner_up, strict), omega)


def bfs_path_counts(hamiltonian: RuleHamiltonian) -> Dict[LatticeConfig, int]:
    """Number of monotone (up-flip only) paths from the lowest-level seed"""
    basis = hamiltonian.basis
    levels = hamiltonian.levels()
    counts = {basis[0]: 1}
    coo = hamiltonian.elements.tocoo()
    upward: Dict[int, List[int]] = {}
    for i, j in zip(coo.row, coo.col):
        if levels[j] == levels[i] + 1:
            upward.setdefault(int(i), []).append(int(j))
    for i, config in enumerate(basis):
        here = counts.get(config, 0)
        for j in upward.get(i, []):
            counts[basis[j]] = counts.get(basis[j], 0) + here
    return counts


def verify_partition_bijection(width: int, height: int, max_n: int) -> List[Dict]:
    """Per level: reachable count vs |P(n)|, labels and path counts vs Young weights"""
    hamiltonian = rule_hamiltonian(width, height, max_n)
    paths = bfs_path_counts(hamiltonian)
    rows = []
    for n in range(1, max_n + 1):
        configs = [c for c in hamiltonian.basis if c.up_count() == n]
        expected = young_lattice.level(n)
        labels = {c.partition(): c for c in configs}
        labels_match = set(labels) == set(expected.entries)
        weights_match = labels_match and all(
            paths.get(labels[p], 0) == w for p, w in expected.entries.items()
        )
        rows.append({
            "n": n,
            "reachable": len(configs),
            "partitions": len(partitions_of(n)),
            "labels_match": labels_match,
            "weights_match": weights_match,
        })
    return rows


def tridiagonalize_from_seed(hamiltonian: RuleHamiltonian, seed: Optional[LatticeConfig] = None,
                             max_steps: Optional[int] = None) -> TridiagonalForm:
    """
    Lanczos with full reorthogonalisation starting from the seed configuration.

    Stops when the Krylov space is exhausted (beta ~ 0) or after max_steps.
    """
    if seed is None:
        seed = hamiltonian.basis[0]
    if seed not in hamiltonian.index:
        raise InvalidParameterError("seed configuration is not in the basis")
    size = len(hamiltonian)
    steps = size if max_steps is None else min(max_steps, size)
    matrix = hamiltonian.elements
    scale = max(abs(hamiltonian.omega), 1e-300)

    vectors = np.zeros((size, steps + 1))
    vectors[:, 0] = hamiltonian.state_vector(seed)
    alphas, betas = [], []
    for j in range(steps):
        w = matrix @ vectors[:, j]
        alpha = float(vectors[:, j] @ w)
        alphas.append(alpha)
        w -= alpha * vectors[:, j]
        if j > 0:
            w -= betas[-1] * vectors[:, j - 1]
        for _ in range(2):
            w -= vectors[:, : j + 1] @ (vectors[:, : j + 1].T @ w)
        beta = float(np.linalg.norm(w))
        if beta < 1e-12 * scale:
            break
        betas.append(beta)
        vectors[:, j + 1] = w / beta

    basis = vectors[:, : len(alphas)]
    loss = float(np.max(np.abs(basis.T @ basis - np.eye(len(alphas)))))
    if loss > ORTHOGONALITY_TOL:
        raise NumericalBreakdownError(f"Lanczos lost orthogonality ({loss:.2e})")
    logger.info(f"✅ tridiagonalised {size} states into {len(alphas)} levels (orthogonality {loss:.1e})")
    return TridiagonalForm(alphas=np.array(alphas), betas=np.array(betas[: len(alphas) - 1]))
