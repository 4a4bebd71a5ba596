"""
Tests for Muckenhoupt and Fujii-Wilson characteristics, the Carleson norm and
Lebesgue / Lorentz norms
"""

import sys
import os

# Enable local runs without installation: add src to path
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
SRC_DIR = os.path.join(PROJECT_ROOT, 'src')
if SRC_DIR not in sys.path:
    sys.path.insert(0, SRC_DIR)

import math

import numpy as np
import pytest

from dyadic_verify.characteristics import (CharExponents, carleson_norm, carleson_norm_witness, fujii_wilson,
                                           lebesgue_norm, log_muckenhoupt, lorentz_norm, muckenhoupt)
from dyadic_verify.checkers import dependent_complete
from dyadic_verify.errors import ParameterError
from dyadic_verify.grid import ROOT, CubeSeq, Grid
from dyadic_verify.operators import ExponentProfile, multilinear_maximal


# quick sizes run by default; the slow marker carries the full-size runs
SIZES = [20, pytest.param(200, marks=pytest.mark.slow)]
FLOOR_SIZES = [50, pytest.param(500, marks=pytest.mark.slow)]


def _random_weights(rng, grid, k):
    return [np.exp(rng.normal(0.0, 1.0, grid.n_leaves)) for _ in range(k)]


def test_characteristics_of_ones():
    grid = Grid.uniform(5)
    ones = np.ones(grid.n_leaves)
    assert muckenhoupt(grid, [ones, ones], [0.5, 1.5]) == pytest.approx(1.0, abs=1e-12)
    assert fujii_wilson(grid, [ones, ones], [0.5, 1.5]) == pytest.approx(1.0, abs=1e-12)
    assert carleson_norm(grid, CubeSeq.indicator(5, [ROOT])) == pytest.approx(1.0, abs=1e-12)


def test_exponent_validation():
    with pytest.raises(ParameterError):
        CharExponents.of([-1.0])
    with pytest.raises(ParameterError):
        CharExponents.of([math.inf])
    grid = Grid.uniform(1)
    with pytest.raises(ParameterError):
        muckenhoupt(grid, [np.ones(2)], [1.0, 1.0])
    with pytest.raises(ParameterError):
        fujii_wilson(grid, [np.ones(2)], [0.0])
    assert CharExponents.of([1.0, 2.0]).scaled(0.5).q == (0.5, 1.0)


def test_fujii_wilson_exponents_need_positive_total():
    with pytest.raises(ParameterError):
        CharExponents.fw([0.0, 0.0])
    with pytest.raises(ParameterError):
        CharExponents.fw([1.0]).scaled(0.0)
    assert CharExponents.fw([0.0, 0.5]).q_total == 0.5
    # Muckenhoupt exponents may all vanish
    assert CharExponents.of([0.0, 0.0]).q_total == 0.0
    assert muckenhoupt(Grid.uniform(1), [[4.0, 1.0]], CharExponents.of([0.0])) == 1.0


def test_muckenhoupt_small_example():
    grid = Grid.uniform(1)
    assert muckenhoupt(grid, [[4.0, 1.0]], [1.0]) == pytest.approx(4.0)
    value = muckenhoupt(grid, [[4.0, 1.0], [0.25, 1.0]], [1.0, 1.0])
    assert value == pytest.approx(2.5 * 0.625)


@pytest.mark.parametrize("count", SIZES)
def test_muckenhoupt_is_sup_of_maximal_function(count):
    rng = np.random.default_rng(11)
    for _ in range(count):
        depth = int(rng.integers(1, 11))
        grid = Grid(depth, rng.uniform(0.2, 3.0, 1 << depth))
        ws = _random_weights(rng, grid, 3)
        q = rng.uniform(0.1, 2.0, 3)
        maximal = multilinear_maximal(grid, ws, ExponentProfile.of(q))
        assert log_muckenhoupt(grid, ws, q) == pytest.approx(math.log(maximal.max()), abs=1e-12)


@pytest.mark.parametrize("count", SIZES)
def test_power_law(count):
    rng = np.random.default_rng(5)
    grid = Grid.uniform(6)
    for _ in range(count):
        ws = _random_weights(rng, grid, 2)
        q = rng.uniform(0.1, 1.5, 2)
        alpha = rng.uniform(0.2, 3.0)
        assert muckenhoupt(grid, ws, alpha * q) == pytest.approx(muckenhoupt(grid, ws, q) ** alpha, rel=1e-9)


def test_fujii_wilson_small_example():
    grid = Grid.uniform(1)
    # root: int M(w) = (2 + 3) / 2, w(X) = 2
    assert fujii_wilson(grid, [[1.0, 3.0]], [1.0]) == pytest.approx(1.25)
    assert fujii_wilson(grid, [[1.0, 3.0]], [2.0]) == pytest.approx(1.5625)


@pytest.mark.parametrize("count", SIZES)
def test_fujii_wilson_power_law(count):
    rng = np.random.default_rng(6)
    grid = Grid(5, rng.uniform(0.5, 2.0, 32))
    for _ in range(count):
        ws = _random_weights(rng, grid, 2)
        q = rng.uniform(0.1, 1.5, 2)
        alpha = rng.uniform(0.2, 3.0)
        assert fujii_wilson(grid, ws, alpha * q) == pytest.approx(fujii_wilson(grid, ws, q) ** alpha, rel=1e-9)


@pytest.mark.parametrize("count", FLOOR_SIZES)
def test_fujii_wilson_scale_invariant_and_at_least_one(count):
    rng = np.random.default_rng(9)
    for _ in range(count):
        depth = int(rng.integers(1, 9))
        grid = Grid(depth, rng.uniform(0.5, 2.0, 1 << depth))
        ws = _random_weights(rng, grid, 2)
        q = rng.uniform(0.1, 1.0, 2)
        value = fujii_wilson(grid, ws, q)
        assert value >= 1 - 1e-12
        c = rng.uniform(0.1, 10.0)
        assert fujii_wilson(grid, [c * w for w in ws], q) == pytest.approx(value, rel=1e-9)


@pytest.mark.parametrize("count", FLOOR_SIZES)
def test_dependent_muckenhoupt_at_least_one(count):
    rng = np.random.default_rng(2)
    grid = Grid.uniform(5)
    for _ in range(count):
        w = _random_weights(rng, grid, 1)
        q = rng.uniform(0.2, 2.0, 2)
        ws = w + [dependent_complete(w, q)]
        assert muckenhoupt(grid, ws, q) >= 1 - 1e-12


def test_carleson_norm_and_witness():
    grid = Grid.uniform(1)
    norm, cube = carleson_norm_witness(grid, CubeSeq.constant(1, 1.0))
    assert norm == pytest.approx(2.0)
    assert cube == ROOT
    assert carleson_norm(grid, CubeSeq.zeros(1)) == 0.0


def test_lebesgue_norm():
    grid = Grid.uniform(1)
    assert lebesgue_norm(grid, [1.0, 3.0], [1.0, 1.0], 2.0) == pytest.approx(math.sqrt(5.0))
    assert lebesgue_norm(grid, [1.0, 3.0], [1.0, 1.0], math.inf) == 3.0
    assert lebesgue_norm(grid, [1.0, 3.0], [2.0, 0.5], 1.0) == pytest.approx(0.5 * 2.0 + 0.5 * 1.5)
    with pytest.raises(ParameterError):
        lebesgue_norm(grid, [1.0, 3.0], [1.0, 1.0], 0.0)


def test_lorentz_norm_examples():
    grid = Grid.uniform(1)
    ones = [1.0, 1.0]
    assert lorentz_norm(grid, [1.0, 3.0], ones, 1.0, math.inf) == pytest.approx(1.5)
    assert lorentz_norm(grid, ones, ones, 2.0, 1.0) == pytest.approx(2.0)
    assert lorentz_norm(grid, [0.0, 0.0], ones, 2.0, 1.0) == 0.0
    with pytest.raises(ParameterError):
        lorentz_norm(grid, ones, ones, 2.0, 0.0)


@pytest.mark.parametrize("count", SIZES)
def test_lorentz_diagonal_is_lebesgue(count):
    rng = np.random.default_rng(4)
    grid = Grid(6, rng.uniform(0.5, 2.0, 64))
    for _ in range(count):
        f = rng.lognormal(size=64) * (rng.random(64) > 0.3)
        w = np.exp(rng.normal(size=64))
        p = rng.uniform(0.5, 4.0)
        assert lorentz_norm(grid, f, w, p, p) == pytest.approx(lebesgue_norm(grid, f, w, p), rel=1e-9)


def test_weak_norm_below_strong_norm():
    rng = np.random.default_rng(8)
    grid = Grid.uniform(5)
    for _ in range(20):
        f = rng.lognormal(size=32)
        w = np.exp(rng.normal(size=32))
        p = rng.uniform(1.0, 3.0)
        assert lorentz_norm(grid, f, w, p, math.inf) <= lebesgue_norm(grid, f, w, p) * (1 + 1e-12)
