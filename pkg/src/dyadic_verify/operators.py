"""
Dyadic maximal operators: the multilinear fractional maximal function, the
fractional maximal function with respect to an arbitrary reference measure,
and the maximal function of a cube sequence.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ParameterError
from .grid import CubeSeq, Grid, LeafLike, check_seq, leaf_values, log_levels, sup_over_ancestors


@dataclass(frozen=True)
class ExponentProfile:
    """Exponents r_i and fractional parameters rho_i of a product of averages.

    Operators (the maximal function, the sparse operator A) take m-1
    functions, forms (the sparse form B) take m; the profile has one entry per
    function either way.
    """

    r: Tuple[float, ...]
    rho: Tuple[float, ...]

    def __post_init__(self):
        r = tuple(float(x) for x in self.r)
        rho = tuple(float(x) for x in self.rho)
        if not r:
            raise ParameterError("an exponent profile needs at least one function")
        if len(rho) != len(r):
            raise ParameterError(f"r has {len(r)} entries but rho has {len(rho)}")
        for i, value in enumerate(r):
            if not 0 < value < np.inf:
                raise ParameterError(f"r[{i}] must satisfy 0 < r < inf, got {value}")
        for i, value in enumerate(rho):
            if not 0 <= value < 1:
                raise ParameterError(f"rho[{i}] must satisfy 0 <= rho < 1, got {value}")
        object.__setattr__(self, 'r', r)
        object.__setattr__(self, 'rho', rho)

    @classmethod
    def of(cls, r: Sequence[float], rho: Optional[Sequence[float]] = None) -> "ExponentProfile":
        return cls(tuple(r), tuple(rho) if rho is not None else (0.0,) * len(r))

    @property
    def size(self) -> int:
        return len(self.r)

    @property
    def m(self) -> int:
        """Arity of the operator built from this profile (one more than the functions)"""
        return len(self.r) + 1

    @property
    def total_r(self) -> float:
        return float(sum(self.r))


def log_fractional_averages(grid: Grid, f: LeafLike, rho: float) -> List[np.ndarray]:
    """log(mu(Q)^-(1-rho) * integral_Q f) for every cube, level by level"""
    logs = log_levels(grid.level_integrals(f))
    return [row - (1.0 - rho) * grid.log_level_measures(level) for level, row in enumerate(logs)]


def log_product_levels(grid: Grid, fs: Sequence[LeafLike], prof: ExponentProfile) -> List[np.ndarray]:
    """Log of the argument of the supremum in the multilinear maximal function, per cube"""
    if len(fs) != prof.size:
        raise ParameterError(f"profile expects {prof.size} functions, got {len(fs)}")
    total = [np.zeros(1 << level) for level in range(grid.depth + 1)]
    for f, r, rho in zip(fs, prof.r, prof.rho):
        for level, row in enumerate(log_fractional_averages(grid, f, rho)):
            total[level] = total[level] + r * row
    return total


def product_levels(grid: Grid, fs: Sequence[LeafLike], prof: ExponentProfile) -> List[np.ndarray]:
    return [np.exp(row) for row in log_product_levels(grid, fs, prof)]


def multilinear_maximal(grid: Grid, fs: Sequence[LeafLike], prof: ExponentProfile) -> np.ndarray:
    """sup over cubes Q containing x of prod_i (mu(Q)^-(1-rho_i) int_Q f_i)^r_i"""
    return np.exp(sup_over_ancestors(log_product_levels(grid, fs, prof)))


def fractional_maximal_wrt(grid: Grid, f: LeafLike, rho: float, nu: LeafLike) -> np.ndarray:
    """Fractional maximal function M_{rho,nu} with reference measure nu.

    ``nu`` holds the masses nu gives to the leaves; averages are taken with
    respect to nu, not mu.
    """
    reference = grid.with_masses(nu)
    return multilinear_maximal(reference, [leaf_values(grid, f)], ExponentProfile.of([1.0], [rho]))


def seq_maximal(grid: Grid, lam: CubeSeq) -> np.ndarray:
    """M lambda(x) = sup over cubes Q containing x of lambda_Q"""
    return sup_over_ancestors(check_seq(grid, lam).levels)
