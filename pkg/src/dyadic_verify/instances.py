"""
JSON instance and allocation files.

An instance file looks like::

    {"depth": 2,
     "masses": [0.25, 0.25, 0.25, 0.25],
     "functions": {"w1": [1, 2, 1, 1], "f1": [0, 1, 3, 1]},
     "sequences": {"tau": {"0:0": 1.0, "1:1": 0.5}}}

``masses`` may be omitted (uniform unit mass). A sequence is either a
mapping "level:index" -> value (missing cubes are 0) or a list with one list
of values per level.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .checkers import Instance
from .errors import ConfigError, InvalidCubeError
from .grid import CubeId, CubeSeq, Grid
from .sparse import SparseAllocation

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class InstanceFile:
    grid: Grid
    functions: Dict[str, np.ndarray] = field(default_factory=dict)
    sequences: Dict[str, CubeSeq] = field(default_factory=dict)

    def function(self, name: str) -> np.ndarray:
        try:
            return self.functions[name]
        except KeyError:
            raise ConfigError(f"instance has no function named {name!r}")

    def sequence(self, name: str) -> CubeSeq:
        try:
            return self.sequences[name]
        except KeyError:
            raise ConfigError(f"instance has no sequence named {name!r}")

    def to_instance(self, weights: Sequence[str], functions: Sequence[str] = (), tau: str = "tau",
                    lambdas: Sequence[str] = (), disjoint: Optional[SparseAllocation] = None) -> Instance:
        """Registry instance assembled from named entries; ``disjoint`` supplies the sets E(Q)"""
        if disjoint is not None and disjoint.grid.depth != self.grid.depth:
            raise ConfigError(f"allocation depth {disjoint.grid.depth} does not match instance depth {self.grid.depth}")
        return Instance(
            self.grid,
            [self.function(name) for name in weights],
            [self.function(name) for name in functions],
            self.sequence(tau) if tau in self.sequences else None,
            [self.sequence(name) for name in lambdas],
            disjoint,
        )


def _parse_sequence(grid: Grid, raw) -> CubeSeq:
    if isinstance(raw, dict):
        try:
            values = {grid.validate_cube(CubeId.parse(key)): float(value) for key, value in raw.items()}
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad sequence entry: {e}")
        return CubeSeq.from_mapping(grid.depth, values, default=0.0)
    if isinstance(raw, list):
        return CubeSeq(grid.depth, raw)
    raise ConfigError("a sequence must be a mapping 'level:index' -> value or a list of levels")


def parse_instance(data: Dict) -> InstanceFile:
    if not isinstance(data, dict) or 'depth' not in data:
        raise ConfigError("instance must be a JSON object with a 'depth' field")
    depth = data['depth']
    if not isinstance(depth, int) or depth < 0:
        raise ConfigError(f"depth must be a nonnegative integer, got {depth!r}")
    masses = data.get('masses')
    grid = Grid(depth, masses) if masses is not None else Grid.uniform(depth)
    functions = {name: np.asarray(values, dtype=float) for name, values in data.get('functions', {}).items()}
    for name, values in functions.items():
        if values.shape != (grid.n_leaves,):
            raise ConfigError(f"function {name!r} needs {grid.n_leaves} leaf values, got {values.size}")
    sequences = {name: _parse_sequence(grid, raw) for name, raw in data.get('sequences', {}).items()}
    return InstanceFile(grid, functions, sequences)


def load_instance(path: PathLike) -> InstanceFile:
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    logger.info("loaded instance %s", path)
    return parse_instance(data)


def dump_instance(instance: InstanceFile) -> Dict:
    return {
        'depth': instance.grid.depth,
        'masses': instance.grid.leaf_masses.tolist(),
        'functions': {name: values.tolist() for name, values in instance.functions.items()},
        'sequences': {name: {str(q): v for q, v in seq.to_mapping().items() if v}
                      for name, seq in instance.sequences.items()},
    }


def save_instance(path: PathLike, instance: InstanceFile) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(dump_instance(instance), f, indent=2)


def save_allocation(path: PathLike, allocation: SparseAllocation, Lambda: float,
                    norm: Optional[float] = None) -> List[Dict]:
    """Write the allocation entries; returns them"""
    entries = allocation.to_entries()
    payload = {'depth': allocation.grid.depth, 'Lambda': Lambda, 'entries': entries}
    if norm is not None:
        payload['carleson_norm'] = norm
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2)
    logger.info("wrote %d allocation entries to %s", len(entries), path)
    return entries


def load_allocation(path: PathLike, grid: Grid) -> SparseAllocation:
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    if isinstance(data, dict) and data.get('depth', grid.depth) != grid.depth:
        raise ConfigError(f"allocation depth {data['depth']} does not match grid depth {grid.depth}")
    entries = data.get('entries', []) if isinstance(data, dict) else data
    budgets, densities = {}, {}
    try:
        for entry in entries:
            q = CubeId.parse(entry['cube'])
            budgets[q] = float(entry['budget'])
            densities[q] = np.asarray(entry['density'], dtype=float)
    except (KeyError, TypeError, InvalidCubeError) as e:
        raise ConfigError(f"bad allocation entry: {e}")
    return SparseAllocation(grid, budgets, densities)
