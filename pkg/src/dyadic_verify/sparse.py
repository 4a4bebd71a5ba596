"""
Carleson sequences, sparse families and the sparse operator / sparse form.

Atoms replace the non-atomic space, so the disjoint sets E(Q) are encoded as
leaf densities in [0, 1]: E(Q) takes the fraction ``density[l]`` of leaf l,
and disjointness becomes "the densities stacked on any leaf sum to at most 1".
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .characteristics import carleson_norm, carleson_norm_witness
from .errors import AllocationError, CarlesonBoundError, ParameterError
from .grid import CubeId, CubeSeq, Grid, LeafLike, check_seq, sum_over_ancestors
from .operators import ExponentProfile, log_product_levels

logger = logging.getLogger(__name__)

STACK_TOL = 1e-12


class SparseAllocation:
    """Sub-measures E(Q) given as densities on the leaves of each cube"""

    def __init__(self, grid: Grid, budgets: Dict[CubeId, float], densities: Dict[CubeId, np.ndarray]):
        if set(budgets) != set(densities):
            raise AllocationError("budgets and densities must cover the same cubes")
        self.grid = grid
        self._budgets = dict(budgets)
        self._densities = {}
        for q, density in densities.items():
            q = grid.validate_cube(q)
            arr = np.asarray(density, dtype=float)
            if len(arr) != 1 << (grid.depth - q.level):
                raise AllocationError(f"density of {q} must cover its {1 << (grid.depth - q.level)} leaves")
            self._densities[q] = arr

    @property
    def cubes(self) -> List[CubeId]:
        return sorted(self._densities)

    def budget(self, q: CubeId) -> float:
        return self._budgets[q]

    def density(self, q: CubeId) -> np.ndarray:
        """Density of E(Q) on the leaves of Q"""
        return self._densities[q]

    def cube_mass(self, q: CubeId) -> float:
        masses = self.grid.leaf_masses[q.leaf_slice(self.grid.depth)]
        return float(np.dot(self._densities[q], masses))

    def stack(self) -> np.ndarray:
        """Sum over all cubes of the densities, per leaf"""
        out = np.zeros(self.grid.n_leaves)
        for q, density in self._densities.items():
            out[q.leaf_slice(self.grid.depth)] += density
        return out

    def validate(self, tol: float = STACK_TOL) -> None:
        """Check the per-leaf stack bound and the per-cube budgets"""
        for q, density in self._densities.items():
            if np.any(density < -tol) or np.any(density > 1 + tol):
                raise AllocationError(f"density of {q} leaves [0, 1]")
            budget = self._budgets[q]
            mass = self.cube_mass(q)
            if abs(mass - budget) > tol * max(budget, np.finfo(float).tiny):
                raise AllocationError(f"cube {q} carries mass {mass!r}, budget is {budget!r}")
        stack = self.stack()
        if stack.size and stack.max() > 1 + tol:
            leaf = int(np.argmax(stack))
            raise AllocationError(f"densities stack to {stack[leaf]!r} > 1 on leaf {leaf}")

    def to_entries(self) -> List[Dict]:
        """Export rows {"cube": "level:index", "budget": b, "density": [...]}"""
        return [
            {"cube": str(q), "budget": self._budgets[q], "density": self._densities[q].tolist()}
            for q in self.cubes
        ]

    def __len__(self) -> int:
        return len(self._densities)


@dataclass
class SparseFamily:
    """A family of cubes with a density witness of eta-sparseness"""

    cubes: FrozenSet[CubeId]
    eta: float
    allocation: SparseAllocation

    def validate(self, tol: float = STACK_TOL) -> None:
        if not 0 < self.eta <= 1:
            raise ParameterError(f"sparseness parameter must lie in (0, 1], got {self.eta}")
        stack = self.allocation.stack()
        if stack.size and stack.max() > 1 + tol:
            raise AllocationError(f"witness densities stack to {stack.max()!r} > 1")
        present = set(self.allocation.cubes)
        for q in self.cubes:
            if q not in present:
                raise AllocationError(f"witness has no set for family member {q}")
            need = self.eta * self.allocation.grid.cube_measure(q)
            if self.allocation.cube_mass(q) < need * (1 - tol):
                raise AllocationError(f"E({q}) has mass {self.allocation.cube_mass(q)!r} < eta*|Q| = {need!r}")


def carleson_to_sparse(grid: Grid, tau: CubeSeq, Lambda: float, tol: float = STACK_TOL) -> SparseAllocation:
    """Disjoint E(Q) with |E(Q)| = tau_Q |Q| / Lambda, for ||tau||_Car <= Lambda.

    Cubes are processed children before parents; each cube takes the free
    capacity inside itself greedily, leaves in increasing index order.
    """
    if not Lambda > 0:
        raise ParameterError(f"Lambda must be positive, got {Lambda}")
    check_seq(grid, tau)
    norm, witness = carleson_norm_witness(grid, tau)
    if norm > Lambda * (1 + tol):
        raise CarlesonBoundError(
            f"Carleson norm {norm!r} exceeds Lambda={Lambda!r}, attained on cube {witness}",
            cube=witness, norm=norm,
        )

    masses = grid.leaf_masses
    used = np.zeros(grid.n_leaves)
    budgets: Dict[CubeId, float] = {}
    densities: Dict[CubeId, np.ndarray] = {}
    for level in range(grid.depth, -1, -1):
        row = tau.levels[level]
        for index in np.flatnonzero(row):
            q = CubeId(level, int(index))
            budget = float(row[index] * grid.cube_measure(q) / Lambda)
            leaves = q.leaf_slice(grid.depth)
            local_mass = masses[leaves]
            capacity = local_mass * np.clip(1.0 - used[leaves], 0.0, None)
            before = np.cumsum(capacity) - capacity
            take = np.clip(budget - before, 0.0, capacity)
            shortfall = budget - take.sum()
            if shortfall > tol * max(budget, grid.cube_measure(q)):
                logger.error("cube %s lacks free capacity %.3g", q, shortfall)
                raise AllocationError(f"no room for E({q}): short by {shortfall!r}")
            density = take / local_mass
            used[leaves] += density
            budgets[q] = budget
            densities[q] = density
    return SparseAllocation(grid, budgets, densities)


def sparse_to_carleson(grid: Grid, fam: Iterable[CubeId], eta: float,
                       witness: Optional[SparseAllocation] = None) -> Tuple[CubeSeq, float]:
    """Indicator of an eta-sparse family and its Carleson norm, checked against 1/eta.

    Without an explicit witness one is built by ``carleson_to_sparse`` at
    Lambda = 1/eta, which fails when the family is not eta-sparse.
    """
    if not 0 < eta <= 1:
        raise ParameterError(f"sparseness parameter must lie in (0, 1], got {eta}")
    cubes = frozenset(grid.validate_cube(q) for q in fam)
    tau = CubeSeq.indicator(grid.depth, cubes)
    if witness is None:
        witness = carleson_to_sparse(grid, tau, 1.0 / eta)
    SparseFamily(cubes, eta, witness).validate()
    norm = carleson_norm(grid, tau)
    if norm > (1.0 / eta) * (1 + 1e-9):
        raise AllocationError(f"family has Carleson norm {norm!r} > 1/eta = {1.0 / eta!r} despite its witness")
    return tau, norm


def sparse_operator_A(grid: Grid, tau: CubeSeq, fs: Sequence[LeafLike], prof: ExponentProfile) -> np.ndarray:
    """sum_Q tau_Q prod_i (mu(Q)^-(1-rho_i) int_Q f_i)^r_i 1_Q, pointwise"""
    check_seq(grid, tau)
    terms = [t * np.exp(row) for t, row in zip(tau.levels, log_product_levels(grid, fs, prof))]
    return sum_over_ancestors(terms)


def sparse_form_B(grid: Grid, tau: CubeSeq, fs: Sequence[LeafLike], prof: ExponentProfile) -> float:
    """sum_Q tau_Q mu(Q) prod_i (mu(Q)^-(1-rho_i) int_Q f_i)^r_i"""
    check_seq(grid, tau)
    logs = log_product_levels(grid, fs, prof)
    return float(sum(
        np.dot(t * grid.level_measures(level), np.exp(row))
        for level, (t, row) in enumerate(zip(tau.levels, logs))
    ))
