"""
Tests for Carleson sequences, sparse allocations and the sparse operator / form
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

from dyadic_verify.characteristics import carleson_norm
from dyadic_verify.errors import AllocationError, CarlesonBoundError, ParameterError
from dyadic_verify.grid import ROOT, CubeId, CubeSeq, Grid
from dyadic_verify.operators import ExponentProfile
from dyadic_verify.sparse import (SparseAllocation, carleson_to_sparse, sparse_form_B, sparse_operator_A,
                                  sparse_to_carleson)


def _random_tau(rng, depth):
    return CubeSeq(depth, [rng.random(1 << level) * (rng.random(1 << level) < 0.5) for level in range(depth + 1)])


def test_allocation_depth_one():
    grid = Grid.uniform(1)
    allocation = carleson_to_sparse(grid, CubeSeq.constant(1, 1.0), 2.0)
    allocation.validate()
    assert allocation.cubes == [ROOT, CubeId(1, 0), CubeId(1, 1)]
    assert allocation.budget(ROOT) == pytest.approx(0.5)
    assert allocation.budget(CubeId(1, 0)) == pytest.approx(0.25)
    np.testing.assert_allclose(allocation.density(CubeId(1, 0)), [0.5])
    np.testing.assert_allclose(allocation.density(ROOT), [0.5, 0.5])
    assert allocation.stack().max() <= 1 + 1e-12


def test_allocation_root_only():
    grid = Grid.uniform(3)
    allocation = carleson_to_sparse(grid, CubeSeq.indicator(3, [ROOT]).scale(3.0), 3.0)
    assert allocation.cubes == [ROOT]
    np.testing.assert_allclose(allocation.density(ROOT), 1.0)


def test_allocation_of_zero_sequence_is_empty():
    grid = Grid.uniform(3)
    allocation = carleson_to_sparse(grid, CubeSeq.zeros(3), 1.0)
    assert len(allocation) == 0
    assert allocation.to_entries() == []


def test_allocation_rejects_large_norm():
    grid = Grid.uniform(1)
    with pytest.raises(CarlesonBoundError) as info:
        carleson_to_sparse(grid, CubeSeq.constant(1, 1.0), 1.0)
    assert info.value.cube == ROOT
    assert info.value.norm == pytest.approx(2.0)
    assert "0:0" in str(info.value)
    with pytest.raises(ParameterError):
        carleson_to_sparse(grid, CubeSeq.zeros(1), 0.0)


@pytest.mark.parametrize("count", [40, pytest.param(200, marks=pytest.mark.slow)])
def test_allocation_invariants_on_random_sequences(count):
    rng = np.random.default_rng(21)
    for _ in range(count):
        depth = int(rng.integers(1, 11))
        grid = Grid(depth, rng.uniform(0.2, 3.0, 1 << depth))
        tau = _random_tau(rng, depth)
        norm = carleson_norm(grid, tau)
        if norm == 0:
            continue
        allocation = carleson_to_sparse(grid, tau, norm)
        allocation.validate()
        for q in allocation.cubes:
            want = tau[q] * grid.cube_measure(q) / norm
            assert allocation.cube_mass(q) == pytest.approx(want, rel=1e-12)
        assert allocation.stack().max() <= 1 + 1e-12


def test_invalid_allocation_detected():
    grid = Grid.uniform(1)
    allocation = SparseAllocation(
        grid,
        {ROOT: 1.0, CubeId(1, 0): 0.5},
        {ROOT: np.ones(2), CubeId(1, 0): np.ones(1)},
    )
    with pytest.raises(AllocationError):
        allocation.validate()
    with pytest.raises(AllocationError):
        SparseAllocation(grid, {ROOT: 1.0}, {ROOT: np.ones(1)})


def test_sparse_to_carleson_examples():
    grid = Grid.uniform(3)
    _, norm = sparse_to_carleson(grid, [ROOT], 1.0)
    assert norm == pytest.approx(1.0)
    _, norm = sparse_to_carleson(grid, list(grid.cubes()), 1.0 / 4)
    assert norm == pytest.approx(4.0)
    chain = [CubeId(level, 0) for level in range(4)]
    _, norm = sparse_to_carleson(grid, chain, 0.5)
    assert norm <= 2.0
    assert norm == pytest.approx(1.875)
    with pytest.raises(CarlesonBoundError):
        sparse_to_carleson(grid, list(grid.cubes()), 0.5)


def test_sparse_operator_examples():
    grid = Grid.uniform(1)
    prof = ExponentProfile.of([1.0])
    out = sparse_operator_A(grid, CubeSeq.constant(1, 1.0), [[1.0, 0.0]], prof)
    np.testing.assert_allclose(out, [1.5, 0.5])
    np.testing.assert_array_equal(sparse_operator_A(grid, CubeSeq.zeros(1), [[1.0, 0.0]], prof), [0.0, 0.0])
    root = sparse_operator_A(Grid.uniform(3), CubeSeq.indicator(3, [ROOT]), [np.arange(8.0)], prof)
    np.testing.assert_allclose(root, 3.5)


def test_sparse_form_example():
    grid = Grid.uniform(1)
    value = sparse_form_B(grid, CubeSeq.constant(1, 1.0), [[1.0, 0.0], [0.0, 1.0]], ExponentProfile.of([1.0, 1.0]))
    assert value == pytest.approx(0.25)


def test_form_is_integral_of_operator():
    rng = np.random.default_rng(13)
    for _ in range(10):
        depth = int(rng.integers(1, 7))
        grid = Grid(depth, rng.uniform(0.5, 2.0, 1 << depth))
        tau = _random_tau(rng, depth)
        fs = [rng.lognormal(size=grid.n_leaves) for _ in range(2)]
        r, rho = list(rng.uniform(0.5, 2.0, 2)), [0.0, 0.25]
        a = sparse_operator_A(grid, tau, fs, ExponentProfile.of(r, rho))
        b = sparse_form_B(grid, tau, fs + [np.ones(grid.n_leaves)], ExponentProfile.of(r + [1.0], rho + [0.0]))
        assert b == pytest.approx(float(np.dot(a, grid.leaf_masses)), rel=1e-12)


def test_operator_additive_in_tau():
    rng = np.random.default_rng(17)
    grid = Grid.uniform(5)
    f = [rng.lognormal(size=32)]
    prof = ExponentProfile.of([1.5])
    t1, t2 = _random_tau(rng, 5), _random_tau(rng, 5)
    np.testing.assert_allclose(
        sparse_operator_A(grid, t1 + t2, f, prof),
        sparse_operator_A(grid, t1, f, prof) + sparse_operator_A(grid, t2, f, prof),
        rtol=1e-12,
    )
