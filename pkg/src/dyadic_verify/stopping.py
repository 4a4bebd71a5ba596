"""
Stopping-time families.

``build_stopping`` grows the minimal family generated by a doubling rule on
cube data lambda. ``strong_stopping`` runs the construction used for the
strong-type maximal estimate: stop where the product of fractional averages
of f_i w_i jumps by the factor (2m)^(sum r_i), and split each stopping cube
into its own part E~(Q) and the stopping cubes below it.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np

from .errors import InvalidCubeError
from .grid import ROOT, CubeId, CubeSeq, Grid, LeafLike, check_seq, leaf_values
from .operators import ExponentProfile, product_levels
from .sparse import SparseAllocation, SparseFamily, sparse_to_carleson

logger = logging.getLogger(__name__)

DOUBLING = 2.0


@dataclass
class StoppingFamily:
    """Family of stopping cubes and the map pi onto it"""

    cubes: FrozenSet[CubeId]
    parent_map: Dict[CubeId, CubeId]

    @classmethod
    def from_cubes(cls, grid: Grid, cubes: Iterable[CubeId]) -> "StoppingFamily":
        """Family with pi(Q) recomputed as the smallest member containing Q"""
        members = frozenset(grid.validate_cube(q) for q in cubes)
        if ROOT not in members:
            raise InvalidCubeError("a stopping family must contain the root")
        parent_map = {}
        for q in grid.cubes():
            parent_map[q] = q if q in members else parent_map[q.parent()]
        return cls(members, parent_map)

    def parent(self, q: CubeId) -> CubeId:
        return self.parent_map[q]

    def stopping_children(self, f: CubeId) -> List[CubeId]:
        """Members F' != F whose smallest strictly larger member is F"""
        return sorted(q for q in self.cubes if q != ROOT and self.parent_map[q.parent()] == f)

    def __contains__(self, q: CubeId) -> bool:
        return q in self.cubes

    def __len__(self) -> int:
        return len(self.cubes)


def _grow_family(grid: Grid, values: Sequence[np.ndarray], factor: float,
                 spawn_from_zero: bool) -> Tuple[FrozenSet[CubeId], Dict[CubeId, CubeId]]:
    members = {ROOT}
    parent_map = {ROOT: ROOT}
    pending = [ROOT]
    while pending:
        top = pending.pop()
        base = values[top.level][top.index]
        threshold = factor * base
        may_stop = spawn_from_zero or base > 0
        frontier = list(top.children()) if top.level < grid.depth else []
        while frontier:
            q = frontier.pop()
            if may_stop and values[q.level][q.index] >= threshold:
                members.add(q)
                parent_map[q] = q
                pending.append(q)
            else:
                parent_map[q] = top
                if q.level < grid.depth:
                    frontier.extend(q.children())
    return frozenset(members), parent_map


def build_stopping(grid: Grid, lam: CubeSeq) -> StoppingFamily:
    """Minimal family containing the root and every maximal subcube F' of a member F
    with lambda_F' >= 2 lambda_F."""
    check_seq(grid, lam)
    members, parent_map = _grow_family(grid, lam.levels, DOUBLING, spawn_from_zero=True)
    return StoppingFamily(members, parent_map)


def verify_stopping(grid: Grid, lam: CubeSeq, family: StoppingFamily) -> List[str]:
    """Re-run the definition against a family; returns the violations found"""
    problems = []
    if ROOT not in family:
        problems.append("root is not a member")
        return problems
    rebuilt = StoppingFamily.from_cubes(grid, family.cubes)
    for q in grid.cubes():
        if family.parent_map.get(q) != rebuilt.parent_map[q]:
            problems.append(f"pi({q}) is not the smallest member containing it")
        if q == ROOT:
            continue
        value = lam[q]
        if q in family:
            above = rebuilt.parent_map[q.parent()]
            if not value >= DOUBLING * lam[above]:
                problems.append(f"member {q} does not double lambda of {above}")
        else:
            above = rebuilt.parent_map[q]
            if value >= DOUBLING * lam[above]:
                problems.append(f"non-member {q} doubles lambda of {above}")
    return problems


@dataclass
class StrongStopping:
    """Result of the strong-type stopping construction"""

    stopping: StoppingFamily
    family: SparseFamily
    tilde_e: Dict[CubeId, np.ndarray]
    values: List[np.ndarray]
    factor: float
    carleson: float

    def domination_sum(self) -> np.ndarray:
        """sum over stopping cubes of the sup argument on Q times 1_{E~(Q)}"""
        grid = self.family.allocation.grid
        out = np.zeros(grid.n_leaves)
        for q, density in self.tilde_e.items():
            out[q.leaf_slice(grid.depth)] += self.values[q.level][q.index] * density
        return out


def strong_stopping(grid: Grid, fs: Sequence[LeafLike], ws: Sequence[LeafLike],
                    prof: ExponentProfile) -> StrongStopping:
    """Stopping family for the maximal function of (f_i w_i) with factor (2m)^(sum r_i).

    A cube on which the sup argument vanishes spawns no stopping cubes: every
    subcube vanishes as well.
    """
    if len(ws) != len(fs):
        raise InvalidCubeError(f"need one weight per function, got {len(ws)} weights for {len(fs)} functions")
    products = [leaf_values(grid, f) * leaf_values(grid, w, positive=True) for f, w in zip(fs, ws)]
    values = product_levels(grid, products, prof)
    factor = (2.0 * prof.m) ** prof.total_r
    members, parent_map = _grow_family(grid, values, factor, spawn_from_zero=False)
    stopping = StoppingFamily(members, parent_map)

    below: Dict[CubeId, List[CubeId]] = {q: [] for q in members}
    for q in members:
        if q != ROOT:
            below[parent_map[q.parent()]].append(q)

    tilde_e: Dict[CubeId, np.ndarray] = {}
    for q in sorted(members):
        width = 1 << (grid.depth - q.level)
        density = np.ones(width)
        offset = q.index * width
        for child in below[q]:
            leaves = child.leaf_slice(grid.depth)
            density[leaves.start - offset:leaves.stop - offset] = 0.0
        tilde_e[q] = density

    masses = grid.leaf_masses
    budgets = {q: float(np.dot(d, masses[q.leaf_slice(grid.depth)])) for q, d in tilde_e.items()}
    allocation = SparseAllocation(grid, budgets, tilde_e)
    _, norm = sparse_to_carleson(grid, members, 0.5, witness=allocation)
    logger.debug("strong stopping: %d cubes, Carleson norm %.4g", len(members), norm)
    return StrongStopping(stopping, SparseFamily(members, 0.5, allocation), tilde_e, values, factor, norm)
