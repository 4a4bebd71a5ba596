"""
Tests for dyadic grids, cube ids, leaf functions, cube sequences and tree sweeps
"""

import sys
import os

# Enable local runs without installation: add src to path
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
SRC_DIR = os.path.join(PROJECT_ROOT, 'src')
if SRC_DIR not in sys.path:
    sys.path.insert(0, SRC_DIR)

import numpy as np
import pytest

from dyadic_verify.errors import InvalidCubeError, InvalidFunctionError
from dyadic_verify.grid import (ROOT, CubeId, CubeSeq, Grid, LeafFn, leaf_values, subtree_sums,
                                sum_over_ancestors, sup_over_ancestors)


def test_cube_navigation():
    q = CubeId(2, 3)
    assert q.parent() == CubeId(1, 1)
    assert CubeId(1, 1).children() == (CubeId(2, 2), CubeId(2, 3))
    assert CubeId(1, 1).contains(q)
    assert not CubeId(1, 0).contains(q)
    assert q.contains(q)
    assert not q.contains(CubeId(1, 1))
    assert q.leaf_slice(3) == slice(6, 8)
    with pytest.raises(InvalidCubeError):
        ROOT.parent()


def test_cube_text_form():
    assert str(CubeId(3, 5)) == "3:5"
    assert CubeId.parse("3:5") == CubeId(3, 5)
    with pytest.raises(InvalidCubeError):
        CubeId.parse("3-5")


def test_uniform_grid_measures():
    grid = Grid.uniform(2)
    assert grid.n_leaves == 4
    assert grid.n_cubes == 7
    assert grid.total_mass == pytest.approx(1.0)
    np.testing.assert_allclose(grid.level_measures(1), [0.5, 0.5])
    assert grid.cube_measure(CubeId(2, 1)) == pytest.approx(0.25)
    assert len(list(grid.cubes())) == grid.n_cubes
    assert next(iter(grid.cubes())) == ROOT


def test_grid_rejects_bad_masses():
    with pytest.raises(InvalidFunctionError):
        Grid(2, [1.0, 1.0, 1.0])
    with pytest.raises(InvalidFunctionError):
        Grid(1, [1.0, 0.0])
    with pytest.raises(InvalidCubeError):
        Grid(-1, [1.0])
    with pytest.raises(InvalidCubeError):
        Grid.uniform(2).validate_cube(CubeId(2, 4))


def test_integrals_and_averages():
    grid = Grid(2, [1.0, 2.0, 3.0, 4.0])
    integrals = grid.level_integrals([1.0, 1.0, 1.0, 1.0])
    np.testing.assert_allclose(integrals[0], [10.0])
    np.testing.assert_allclose(integrals[1], [3.0, 7.0])
    f = [2.0, 0.0, 1.0, 1.0]
    assert grid.average(f, ROOT) == pytest.approx((2.0 + 3.0 + 4.0) / 10.0)
    assert grid.average(f, CubeId(1, 0)) == pytest.approx(2.0 / 3.0)
    np.testing.assert_allclose(grid.level_averages(f)[1], [2.0 / 3.0, 1.0])


def test_ancestors_and_expand():
    grid = Grid.uniform(2)
    assert grid.ancestors(CubeId(2, 3)) == [CubeId(0, 0), CubeId(1, 1), CubeId(2, 3)]
    with pytest.raises(InvalidCubeError):
        grid.ancestors(CubeId(1, 0))
    np.testing.assert_array_equal(grid.expand(np.array([1.0, 2.0]), 1), [1.0, 1.0, 2.0, 2.0])


def test_with_masses_keeps_tree():
    grid = Grid.uniform(1)
    other = grid.with_masses([1.0, 3.0])
    assert other.depth == 1
    assert other.total_mass == pytest.approx(4.0)


def test_leaf_functions_validate():
    with pytest.raises(InvalidFunctionError):
        LeafFn([1.0, -1.0])
    with pytest.raises(InvalidFunctionError):
        LeafFn.weight([1.0, 0.0])
    with pytest.raises(InvalidFunctionError):
        LeafFn([np.nan, 1.0])
    w = LeafFn.weight([1.0, 2.0])
    assert len(w) == 2
    with pytest.raises(ValueError):
        w.values[0] = 5.0
    grid = Grid.uniform(1)
    with pytest.raises(InvalidFunctionError):
        leaf_values(grid, [1.0, 2.0, 3.0])
    with pytest.raises(InvalidFunctionError):
        leaf_values(grid, [1.0, 0.0], positive=True)


def test_cube_sequences():
    seq = CubeSeq.indicator(2, [ROOT, CubeId(2, 1)])
    assert seq[ROOT] == 1.0
    assert seq[CubeId(2, 1)] == 1.0
    assert seq[CubeId(1, 0)] == 0.0
    assert seq.support() == [ROOT, CubeId(2, 1)]
    assert (seq + seq).scale(0.5).to_mapping() == seq.to_mapping()
    with pytest.raises(InvalidCubeError):
        CubeSeq.from_mapping(1, {ROOT: 1.0})
    filled = CubeSeq.from_mapping(1, {ROOT: 1.0}, default=0.0)
    assert filled.support() == [ROOT]
    with pytest.raises(InvalidFunctionError):
        CubeSeq(1, [[1.0], [-1.0, 0.0]])
    with pytest.raises(InvalidCubeError):
        CubeSeq(1, [[1.0]])


def test_tree_sweeps():
    levels = [np.array([1.0]), np.array([0.0, 3.0]), np.array([2.0, 0.0, 0.0, 5.0])]
    np.testing.assert_array_equal(sup_over_ancestors(levels), [2.0, 1.0, 3.0, 5.0])
    np.testing.assert_array_equal(sum_over_ancestors(levels), [3.0, 1.0, 4.0, 9.0])
    sums = subtree_sums(levels)
    np.testing.assert_array_equal(sums[0], [11.0])
    np.testing.assert_array_equal(sums[1], [2.0, 8.0])
    np.testing.assert_array_equal(sums[2], levels[2])


def test_depth_zero_grid():
    grid = Grid.uniform(0)
    assert grid.n_leaves == 1
    assert grid.ancestors(ROOT) == [ROOT]
    assert sup_over_ancestors([np.array([4.0])])[0] == 4.0
