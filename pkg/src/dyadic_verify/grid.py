"""
Finite dyadic grids with a positive measure.

A grid of depth D is the complete binary tree whose 2^D leaves are atoms
carrying strictly positive masses. Cube ``(level, index)`` covers the leaves
``index * 2^(D - level) .. (index + 1) * 2^(D - level) - 1``. Quantities
indexed by cubes are stored level by level as numpy arrays: entry ``k`` of
level ``l`` belongs to cube ``(l, k)``.
"""

from typing import Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import InvalidCubeError, InvalidFunctionError


class CubeId(NamedTuple):
    """Address of a cube in the tree"""

    level: int
    index: int

    def contains(self, other: "CubeId") -> bool:
        """Tree order: other is a subcube of self (not necessarily strict)"""
        if other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index

    def parent(self) -> "CubeId":
        if self.level == 0:
            raise InvalidCubeError("the root has no parent")
        return CubeId(self.level - 1, self.index >> 1)

    def children(self) -> "tuple":
        return CubeId(self.level + 1, 2 * self.index), CubeId(self.level + 1, 2 * self.index + 1)

    def leaf_slice(self, depth: int) -> slice:
        width = 1 << (depth - self.level)
        return slice(self.index * width, (self.index + 1) * width)

    def __str__(self) -> str:
        return f"{self.level}:{self.index}"

    @classmethod
    def parse(cls, text: str) -> "CubeId":
        """Parse the ``"level:index"`` notation used by the JSON formats"""
        try:
            level, index = text.split(':')
            return cls(int(level), int(index))
        except ValueError:
            raise InvalidCubeError(f"malformed cube id {text!r}, expected 'level:index'")


ROOT = CubeId(0, 0)


class LeafFn:
    """Nonnegative function on the leaves of a grid.

    Weights are leaf functions with ``strictly_positive=True``. The values are
    copied into a read-only array.
    """

    def __init__(self, values: Sequence[float], strictly_positive: bool = False):
        arr = np.array(values, dtype=float).ravel()
        if not np.all(np.isfinite(arr)):
            raise InvalidFunctionError("leaf function values must be finite")
        if np.any(arr < 0):
            raise InvalidFunctionError("leaf function values must be nonnegative")
        if strictly_positive and np.any(arr <= 0):
            raise InvalidFunctionError("weight values must be strictly positive")
        arr.setflags(write=False)
        self._values = arr
        self.strictly_positive = strictly_positive

    @classmethod
    def weight(cls, values: Sequence[float]) -> "LeafFn":
        return cls(values, strictly_positive=True)

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        kind = "Weight" if self.strictly_positive else "LeafFn"
        return f"{kind}({self._values.tolist()!r})"


LeafLike = Union[LeafFn, Sequence[float], np.ndarray]


class Grid:
    """Finite dyadic grid of depth D with leaf masses mu.

    Immutable after construction; every method is a pure function of the grid.
    """

    def __init__(self, depth: int, leaf_masses: Sequence[float]):
        if int(depth) != depth or depth < 0:
            raise InvalidCubeError(f"depth must be a nonnegative integer, got {depth!r}")
        masses = np.array(leaf_masses, dtype=float).ravel()
        if len(masses) != 1 << int(depth):
            raise InvalidFunctionError(
                f"a depth-{depth} grid needs {1 << int(depth)} leaf masses, got {len(masses)}"
            )
        if not np.all(np.isfinite(masses)) or np.any(masses <= 0):
            raise InvalidFunctionError("leaf masses must be finite and strictly positive")
        masses.setflags(write=False)
        self.depth = int(depth)
        self._masses = masses
        self._level_masses = _pairwise_levels(masses)
        self._log_level_masses = [np.log(m) for m in self._level_masses]

    @classmethod
    def uniform(cls, depth: int, total: float = 1.0) -> "Grid":
        n = 1 << depth
        return cls(depth, np.full(n, total / n))

    def with_masses(self, masses: LeafLike) -> "Grid":
        """Same tree, another reference measure (e.g. w dmu)"""
        return Grid(self.depth, leaf_values(self, masses, positive=True))

    @property
    def leaf_masses(self) -> np.ndarray:
        return self._masses

    @property
    def n_leaves(self) -> int:
        return 1 << self.depth

    @property
    def n_cubes(self) -> int:
        return (1 << (self.depth + 1)) - 1

    @property
    def total_mass(self) -> float:
        return float(self._level_masses[0][0])

    def validate_cube(self, q: CubeId) -> CubeId:
        level, index = q
        if not 0 <= level <= self.depth or not 0 <= index < (1 << level):
            raise InvalidCubeError(f"cube {level}:{index} is not in a depth-{self.depth} grid")
        return CubeId(level, index)

    def cubes(self) -> Iterator[CubeId]:
        """All cubes, root first, level by level"""
        for level in range(self.depth + 1):
            for index in range(1 << level):
                yield CubeId(level, index)

    def level_measures(self, level: int) -> np.ndarray:
        return self._level_masses[level]

    def log_level_measures(self, level: int) -> np.ndarray:
        return self._log_level_masses[level]

    def cube_measure(self, q: CubeId) -> float:
        q = self.validate_cube(q)
        return float(self._level_masses[q.level][q.index])

    def level_integrals(self, f: LeafLike) -> List[np.ndarray]:
        """Integral of f over every cube, level by level"""
        return _pairwise_levels(leaf_values(self, f) * self._masses)

    def level_averages(self, f: LeafLike) -> List[np.ndarray]:
        return [integral / mass for integral, mass in zip(self.level_integrals(f), self._level_masses)]

    def average(self, f: LeafLike, q: CubeId) -> float:
        q = self.validate_cube(q)
        values = leaf_values(self, f)[q.leaf_slice(self.depth)]
        masses = self._masses[q.leaf_slice(self.depth)]
        return float(np.dot(values, masses) / self._level_masses[q.level][q.index])

    def ancestors(self, leaf: CubeId) -> List[CubeId]:
        """The D+1 cubes containing a leaf, root first"""
        leaf = self.validate_cube(leaf)
        if leaf.level != self.depth:
            raise InvalidCubeError(f"{leaf} is not a leaf of a depth-{self.depth} grid")
        return [CubeId(level, leaf.index >> (self.depth - level)) for level in range(self.depth + 1)]

    def expand(self, values: np.ndarray, level: int) -> np.ndarray:
        """Spread per-cube values of one level onto the leaves"""
        return np.repeat(values, 1 << (self.depth - level))

    def __repr__(self) -> str:
        return f"Grid(depth={self.depth}, total_mass={self.total_mass:.6g})"


def _pairwise_levels(leaf_array: np.ndarray) -> List[np.ndarray]:
    levels = [leaf_array]
    while len(levels[0]) > 1:
        levels.insert(0, levels[0].reshape(-1, 2).sum(axis=1))
    return levels


def leaf_values(grid: Grid, f: LeafLike, positive: bool = False) -> np.ndarray:
    """Validated numpy view of a leaf function on the given grid"""
    if isinstance(f, LeafFn):
        arr = f.values
    else:
        arr = np.asarray(f, dtype=float).ravel()
    if len(arr) != grid.n_leaves:
        raise InvalidFunctionError(f"expected {grid.n_leaves} leaf values, got {len(arr)}")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise InvalidFunctionError("leaf function values must be finite and nonnegative")
    if positive and np.any(arr <= 0):
        raise InvalidFunctionError("weight values must be strictly positive")
    return arr


class CubeSeq:
    """Nonnegative numbers indexed by the cubes of a grid (Carleson sequences, stopping data)"""

    def __init__(self, depth: int, levels: Sequence[Sequence[float]]):
        if len(levels) != depth + 1:
            raise InvalidCubeError(f"a depth-{depth} sequence needs {depth + 1} levels, got {len(levels)}")
        arrays = []
        for level, values in enumerate(levels):
            arr = np.array(values, dtype=float).ravel()
            if len(arr) != 1 << level:
                raise InvalidCubeError(f"level {level} needs {1 << level} entries, got {len(arr)}")
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise InvalidFunctionError("cube sequence values must be finite and nonnegative")
            arr.setflags(write=False)
            arrays.append(arr)
        self.depth = depth
        self._levels = arrays

    @classmethod
    def zeros(cls, depth: int) -> "CubeSeq":
        return cls(depth, [np.zeros(1 << level) for level in range(depth + 1)])

    @classmethod
    def constant(cls, depth: int, value: float) -> "CubeSeq":
        return cls(depth, [np.full(1 << level, float(value)) for level in range(depth + 1)])

    @classmethod
    def indicator(cls, depth: int, cubes: Iterable[CubeId]) -> "CubeSeq":
        levels = [np.zeros(1 << level) for level in range(depth + 1)]
        for level, index in cubes:
            if not 0 <= level <= depth or not 0 <= index < (1 << level):
                raise InvalidCubeError(f"cube {level}:{index} is not in a depth-{depth} grid")
            levels[level][index] = 1.0
        return cls(depth, levels)

    @classmethod
    def from_mapping(cls, depth: int, values: Mapping[CubeId, float], default: Optional[float] = None) -> "CubeSeq":
        """Build from a cube -> value map; missing cubes are an error unless a default is given"""
        levels = []
        for level in range(depth + 1):
            row = np.empty(1 << level)
            for index in range(1 << level):
                q = CubeId(level, index)
                if q in values:
                    row[index] = values[q]
                elif default is not None:
                    row[index] = default
                else:
                    raise InvalidCubeError(f"cube sequence has no entry for cube {q}")
            levels.append(row)
        return cls(depth, levels)

    @property
    def levels(self) -> List[np.ndarray]:
        return self._levels

    def __getitem__(self, q: CubeId) -> float:
        level, index = q
        if not 0 <= level <= self.depth or not 0 <= index < (1 << level):
            raise InvalidCubeError(f"cube {level}:{index} is not in a depth-{self.depth} grid")
        return float(self._levels[level][index])

    def to_mapping(self) -> Dict[CubeId, float]:
        return {
            CubeId(level, index): float(value)
            for level, row in enumerate(self._levels)
            for index, value in enumerate(row)
        }

    def support(self) -> List[CubeId]:
        return [
            CubeId(level, int(index))
            for level, row in enumerate(self._levels)
            for index in np.flatnonzero(row)
        ]

    def scale(self, factor: float) -> "CubeSeq":
        return CubeSeq(self.depth, [row * factor for row in self._levels])

    def __add__(self, other: "CubeSeq") -> "CubeSeq":
        if other.depth != self.depth:
            raise InvalidCubeError("cannot add cube sequences of different depths")
        return CubeSeq(self.depth, [a + b for a, b in zip(self._levels, other._levels)])

    def __repr__(self) -> str:
        return f"CubeSeq(depth={self.depth}, support={len(self.support())})"


def check_seq(grid: Grid, seq: CubeSeq) -> CubeSeq:
    if seq.depth != grid.depth:
        raise InvalidCubeError(f"sequence depth {seq.depth} does not match grid depth {grid.depth}")
    return seq


# Tree sweeps. ``levels`` is always a list of D+1 arrays, level l of length 2^l.

def sup_over_ancestors(levels: Sequence[np.ndarray]) -> np.ndarray:
    """At each leaf, the maximum of the values on the cubes containing it"""
    running = np.asarray(levels[0], dtype=float)
    for row in levels[1:]:
        running = np.maximum(np.repeat(running, 2), row)
    return running


def sum_over_ancestors(levels: Sequence[np.ndarray]) -> np.ndarray:
    """At each leaf, the sum of the values on the cubes containing it"""
    running = np.asarray(levels[0], dtype=float)
    for row in levels[1:]:
        running = np.repeat(running, 2) + row
    return running


def subtree_sums(levels: Sequence[np.ndarray]) -> List[np.ndarray]:
    """For each cube Q the sum of the values over all cubes Q' contained in Q"""
    sums = [np.asarray(levels[-1], dtype=float)]
    for row in reversed(levels[:-1]):
        sums.insert(0, row + sums[0].reshape(-1, 2).sum(axis=1))
    return sums


def log_levels(levels: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Elementwise log, with log(0) = -inf"""
    with np.errstate(divide='ignore'):
        return [np.log(row) for row in levels]
