"""
Weight characteristics and norms on a dyadic grid.

Products of many averages are formed in log-space. Characteristic suprema run
over every cube of the grid, leaves included.
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from .errors import ParameterError
from .grid import CubeId, CubeSeq, Grid, LeafLike, check_seq, leaf_values, subtree_sums


@dataclass(frozen=True)
class CharExponents:
    """Exponent vector q of the Muckenhoupt and Fujii-Wilson characteristics"""

    q: Tuple[float, ...]
    # exponents of a Fujii-Wilson characteristic need q_total > 0
    fujii_wilson: bool = False

    def __post_init__(self):
        q = tuple(float(x) for x in self.q)
        for i, value in enumerate(q):
            if not 0 <= value < np.inf:
                raise ParameterError(f"q[{i}] must satisfy 0 <= q < inf, got {value}")
        if self.fujii_wilson and not sum(q) > 0:
            raise ParameterError("the Fujii-Wilson characteristic needs q_total > 0")
        object.__setattr__(self, 'q', q)

    @classmethod
    def of(cls, q: Sequence[float]) -> "CharExponents":
        return cls(tuple(q))

    @classmethod
    def fw(cls, q: Sequence[float]) -> "CharExponents":
        return cls(tuple(q), fujii_wilson=True)

    @property
    def q_total(self) -> float:
        return float(sum(self.q))

    def scaled(self, alpha: float) -> "CharExponents":
        return CharExponents(tuple(alpha * x for x in self.q), self.fujii_wilson)


ExponentsLike = Union[CharExponents, Sequence[float]]


def _exponents(ce: ExponentsLike, m: int, fujii_wilson: bool = False) -> CharExponents:
    if not isinstance(ce, CharExponents):
        ce = CharExponents(tuple(ce), fujii_wilson=fujii_wilson)
    elif fujii_wilson and not ce.fujii_wilson:
        ce = CharExponents.fw(ce.q)
    if len(ce.q) != m:
        raise ParameterError(f"{m} weights need {m} exponents, got {len(ce.q)}")
    return ce


def _log_weight_averages(grid: Grid, ws: Sequence[LeafLike]) -> List[List[np.ndarray]]:
    return [[np.log(row) for row in grid.level_averages(leaf_values(grid, w, positive=True))] for w in ws]


def _log_product(log_avgs: List[List[np.ndarray]], q: Sequence[float], depth: int) -> List[np.ndarray]:
    total = [np.zeros(1 << level) for level in range(depth + 1)]
    for rows, exponent in zip(log_avgs, q):
        if exponent == 0:
            continue
        for level, row in enumerate(rows):
            total[level] = total[level] + exponent * row
    return total


def log_muckenhoupt(grid: Grid, ws: Sequence[LeafLike], ce: ExponentsLike) -> float:
    ce = _exponents(ce, len(ws))
    levels = _log_product(_log_weight_averages(grid, ws), ce.q, grid.depth)
    return float(max(row.max() for row in levels))


def muckenhoupt(grid: Grid, ws: Sequence[LeafLike], ce: ExponentsLike) -> float:
    """[w]^q = sup over cubes of prod_i (w_i)_Q^q_i"""
    return math.exp(log_muckenhoupt(grid, ws, ce))


def log_fujii_wilson(grid: Grid, ws: Sequence[LeafLike], ce: ExponentsLike) -> float:
    ce = _exponents(ce, len(ws), fujii_wilson=True)
    total = ce.q_total
    r = [x / total for x in ce.q]
    log_avgs = _log_weight_averages(grid, ws)
    product = [np.exp(row) for row in _log_product(log_avgs, r, grid.depth)]

    log_pointwise = np.zeros(grid.n_leaves)
    for w, exponent in zip(ws, r):
        if exponent:
            log_pointwise = log_pointwise + exponent * np.log(leaf_values(grid, w, positive=True))
    denominators = grid.level_integrals(np.exp(log_pointwise))

    # For x in Q only subcubes of Q matter: on a strictly larger cube Q' the
    # truncated product is (mu(Q)/mu(Q'))^1 times its value on Q.
    best = -np.inf
    masses = grid.leaf_masses
    for start in range(grid.depth + 1):
        running = product[start]
        for level in range(start + 1, grid.depth + 1):
            running = np.maximum(np.repeat(running, 2), product[level])
        numerators = (running * masses).reshape(1 << start, -1).sum(axis=1)
        logs = total * (np.log(numerators) - np.log(denominators[start]))
        best = max(best, float(logs.max()))
    return best


def fujii_wilson(grid: Grid, ws: Sequence[LeafLike], ce: ExponentsLike) -> float:
    """[w]_FW^q = sup_Q (int_Q M^{q/q_total}(1_Q w))^q_total (int_Q prod w_i^{q_i/q_total})^-q_total"""
    return math.exp(log_fujii_wilson(grid, ws, ce))


def carleson_norm_witness(grid: Grid, tau: CubeSeq) -> Tuple[float, CubeId]:
    """Carleson norm together with the first cube (root first) attaining it"""
    check_seq(grid, tau)
    masses = [grid.level_measures(level) for level in range(grid.depth + 1)]
    sums = subtree_sums([row * mass for row, mass in zip(tau.levels, masses)])
    best, witness = -1.0, CubeId(0, 0)
    for level, (row, mass) in enumerate(zip(sums, masses)):
        ratios = row / mass
        index = int(np.argmax(ratios))
        if ratios[index] > best:
            best, witness = float(ratios[index]), CubeId(level, index)
    return best, witness


def carleson_norm(grid: Grid, tau: CubeSeq) -> float:
    """sup over cubes Q of mu(Q)^-1 sum_{Q' in Q} tau_Q' mu(Q')"""
    return carleson_norm_witness(grid, tau)[0]


def lebesgue_norm(grid: Grid, f: LeafLike, w: LeafLike, p: float) -> float:
    """||f||_{L^p(w dmu)}; p may be below 1 (quasi-norm) or infinite"""
    if not p > 0:
        raise ParameterError(f"Lebesgue exponent must be positive, got {p}")
    values = leaf_values(grid, f)
    mass = leaf_values(grid, w, positive=True) * grid.leaf_masses
    if np.isinf(p):
        return float(values.max())
    return float(np.dot(values ** p, mass) ** (1.0 / p))


def lorentz_norm(grid: Grid, f: LeafLike, w: LeafLike, p: float, s: float) -> float:
    """||f||_{L^{p,s}(w dmu)} through the decreasing rearrangement.

    For s = inf this is sup_t t^(1/p) f*(t); otherwise
    (int_0^inf (t^(1/p) f*(t))^s dt/t)^(1/s), integrated exactly on the flat
    steps of f*, so that L^{p,p} = L^p.
    """
    if not p > 0:
        raise ParameterError(f"Lorentz exponent p must be positive, got {p}")
    if not s > 0:
        raise ParameterError(f"Lorentz exponent s must be positive, got {s}")
    values = leaf_values(grid, f)
    mass = leaf_values(grid, w, positive=True) * grid.leaf_masses
    order = np.argsort(-values, kind='stable')
    fstar, steps = values[order], mass[order]
    positive = fstar > 0
    if not positive.any():
        return 0.0
    fstar, steps = fstar[positive], steps[positive]
    ends = np.cumsum(steps)
    if np.isinf(s):
        return float(np.max(fstar * ends ** (1.0 / p)))
    starts = np.concatenate(([0.0], ends[:-1]))
    pieces = fstar ** s * (p / s) * (ends ** (s / p) - starts ** (s / p))
    return float(pieces.sum() ** (1.0 / s))
