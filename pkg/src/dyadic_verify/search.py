"""
Instance generators and adversarial search.

Weight families produce strictly positive leaf weights. Randomized instances
draw every trial from its own stream ``default_rng([master_seed, trial])`` so a
trial can be reproduced on its own and trials can run in any order.
"""

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .checkers import IneqParams, IneqReport, Instance, dependent_complete, evaluate_inequality, get_case
from .errors import ParameterError
from .grid import ROOT, CubeSeq, Grid

logger = logging.getLogger(__name__)

FAMILY_KINDS = ("cascade", "power", "spike", "constant")
SWEEP_FIELD = {"cascade": "sigma", "power": "a", "spike": "height"}

# fraction of cubes carrying a nonzero tau, and of leaves where a test function vanishes
TAU_DENSITY = 0.3
ZERO_FRACTION = 0.2


@dataclass(frozen=True)
class WeightFamily:
    """Recipe for a positive weight: a multiplicative cascade, a power, a single spike or the constant 1"""

    kind: str = "cascade"
    sigma: float = 0.5
    a: float = 0.5
    height: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ParameterError(f"weight family must be one of {', '.join(FAMILY_KINDS)}, got {self.kind!r}")
        if self.kind == "cascade" and not self.sigma > 0:
            raise ParameterError(f"cascade volatility must be positive, got {self.sigma}")
        if self.kind == "power" and not self.a > -1:
            raise ParameterError(f"power exponent must exceed -1, got {self.a}")
        if self.kind == "spike" and not self.height > 0:
            raise ParameterError(f"spike height must be positive, got {self.height}")

    @classmethod
    def from_dict(cls, data: Dict) -> "WeightFamily":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"unknown weight family fields: {', '.join(sorted(unknown))}")
        return cls(**data)

    def to_dict(self) -> Dict:
        return asdict(self)

    def with_value(self, value: float) -> "WeightFamily":
        """Same family with its sweep parameter set to ``value``"""
        if self.kind == "constant":
            return self
        return replace(self, **{SWEEP_FIELD[self.kind]: value})


def gen_weight(grid: Grid, fam: WeightFamily) -> np.ndarray:
    depth = grid.depth
    if fam.kind == "constant":
        return np.ones(grid.n_leaves)
    if fam.kind == "power":
        k = np.arange(grid.n_leaves, dtype=float)
        return ((k + 1.0) / grid.n_leaves) ** fam.a
    if fam.kind == "spike":
        w = np.ones(grid.n_leaves)
        w[0] = fam.height
        return w
    rng = np.random.default_rng(fam.seed)
    log_w = np.zeros(grid.n_leaves)
    for level in range(1, depth + 1):
        signs = rng.choice((-1.0, 1.0), size=1 << level)
        log_w += np.repeat(fam.sigma * signs, 1 << (depth - level))
    return np.exp(log_w)


def _draw_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2 ** 32))


def random_instance(case_id: str, params: IneqParams, depth: int, family: WeightFamily,
                    master_seed: int, trial: int) -> Instance:
    """Instance for one trial; weights from ``family``, everything else from the trial stream"""
    shape = get_case(case_id).shape(params)
    rng = np.random.default_rng([master_seed, trial])
    grid = Grid.uniform(depth)
    n = grid.n_leaves

    free = shape.weights - 1 if shape.dependent is not None else shape.weights
    weights = [gen_weight(grid, replace(family, seed=_draw_seed(rng))) for _ in range(free)]
    if shape.dependent is not None:
        weights.append(dependent_complete(weights, shape.dependent))

    functions = [rng.lognormal(0.0, 1.0, n) * (rng.random(n) >= ZERO_FRACTION) for _ in range(shape.functions)]
    tau = CubeSeq(depth, [rng.random(1 << level) * (rng.random(1 << level) < TAU_DENSITY)
                          for level in range(depth + 1)])
    lambdas = [CubeSeq(depth, [rng.lognormal(0.0, 1.0, 1 << level) for level in range(depth + 1)])
               for _ in range(shape.lambdas)]
    return Instance(grid, weights, functions, tau, lambdas, seed=trial, family=family.kind, master_seed=master_seed)


def all_ones_instance(case_id: str, params: IneqParams, depth: int) -> Instance:
    """Unit-mass grid, every weight, function and lambda equal to 1, tau the root indicator"""
    shape = get_case(case_id).shape(params)
    grid = Grid.uniform(depth)
    ones = np.ones(grid.n_leaves)
    return Instance(
        grid,
        [ones] * shape.weights,
        [ones] * shape.functions,
        CubeSeq.indicator(depth, [ROOT]),
        [CubeSeq.constant(depth, 1.0) for _ in range(shape.lambdas)],
        family="constant",
    )


def hill_climb(case_id: str, instance: Instance, params: IneqParams, start: float = 0.5, stop: float = 1e-3,
               max_evaluations: int = 5000) -> Tuple[Instance, IneqReport]:
    """Coordinatewise ascent on the log-weights.

    One leaf weight at a time is multiplied by exp(+-delta); a move is kept only
    when the ratio increases. delta halves once a full pass finds nothing.
    A dependent last weight is recompleted after every move.
    """
    shape = get_case(case_id).shape(params)
    best = evaluate_inequality(case_id, instance, params)
    free = shape.weights - 1 if shape.dependent is not None else shape.weights
    evaluations = 0
    delta = start
    while delta >= stop and evaluations < max_evaluations and math.isfinite(best.ratio):
        improved = False
        for i in range(free):
            for leaf in range(instance.grid.n_leaves):
                for sign in (1.0, -1.0):
                    weights = [w.copy() for w in instance.weights]
                    weights[i][leaf] *= math.exp(sign * delta)
                    if shape.dependent is not None:
                        weights[-1] = dependent_complete(weights[:-1], shape.dependent)
                    candidate = replace(instance, weights=weights)
                    report = evaluate_inequality(case_id, candidate, params)
                    evaluations += 1
                    if report.ratio > best.ratio:
                        logger.debug("%s: ratio %.6g -> %.6g (weight %d, leaf %d, delta %g)",
                                     case_id, best.ratio, report.ratio, i, leaf, delta)
                        instance, best, improved = candidate, report, True
                        break
                if evaluations >= max_evaluations:
                    break
        if not improved:
            delta /= 2.0
    return instance, best


def maximize_ratio(case_id: str, params: IneqParams, depth: int, family: WeightFamily, trials: int,
                   master_seed: int, climb: bool = True,
                   progress_callback: Optional[Callable[[str], None]] = None) -> IneqReport:
    """Worst ratio over ``trials`` random instances, then hill-climbed from the worst one"""
    if trials < 1:
        raise ParameterError(f"search budget must be at least 1 trial, got {trials}")
    worst: Optional[Tuple[Instance, IneqReport]] = None
    for trial in range(trials):
        instance = random_instance(case_id, params, depth, family, master_seed, trial)
        report = evaluate_inequality(case_id, instance, params)
        if worst is None or report.ratio > worst[1].ratio:
            worst = (instance, report)
    if progress_callback:
        progress_callback(f"{case_id} depth {depth}: worst random ratio {worst[1].ratio:.6g}")
    if climb:
        _, report = hill_climb(case_id, worst[0], params)
        return report
    return worst[1]


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    n_points: int

    @property
    def low_information(self) -> bool:
        return self.n_points < 3


def slope_fit(points: Sequence[Tuple[float, float]]) -> SlopeFit:
    """Least-squares line through (x, y) points, with its coefficient of determination"""
    if len(points) < 2:
        raise ParameterError(f"a slope fit needs at least two points, got {len(points)}")
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ParameterError("slope fit points must be finite")
    if np.ptp(x) == 0:
        raise ParameterError("degenerate sweep: every point has the same x")
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), float(r2), len(points))


@dataclass
class SharpnessResult:
    case: str
    values: List[float]
    points: List[Tuple[float, float]]
    fit: SlopeFit


def sharpness_sweep(case_id: str, params: IneqParams, depth: int, family: WeightFamily,
                    values: Sequence[float]) -> SharpnessResult:
    """(log rhs, log lhs) along a sweep of the family parameter.

    Test functions are constant, tau is the root indicator; when the case has
    characteristic exponents the last weight is completed to a dependent tuple.
    """
    case = get_case(case_id)
    case.validate(params)
    shape = case.shape(params)
    dependence = case.char_exponents(params)
    grid = Grid.uniform(depth)
    ones = np.ones(grid.n_leaves)
    points = []
    for value in values:
        w = gen_weight(grid, family.with_value(value))
        if dependence is not None:
            weights = [w] * (shape.weights - 1)
            weights.append(dependent_complete(weights, dependence))
        else:
            weights = [w] * shape.weights
        instance = Instance(grid, weights, [ones] * shape.functions, CubeSeq.indicator(depth, [ROOT]),
                            [CubeSeq.constant(depth, 1.0) for _ in range(shape.lambdas)], family=family.kind)
        report = evaluate_inequality(case_id, instance, params)
        if not (report.lhs > 0 and report.rhs > 0):
            raise ParameterError(f"sweep value {value} gives a vanishing side; logs are undefined")
        points.append((math.log(report.rhs), math.log(report.lhs)))
    return SharpnessResult(case_id, [float(v) for v in values], points, slope_fit(points))
