"""
Inequality registry.

Every case computes the left-hand side and the right-hand side (without the
implied constant) of one weighted estimate for multilinear maximal and sparse
operators, on a concrete instance. Exponent constraints are checked before
anything is evaluated, and the error message names the violated constraint.
"""

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .characteristics import carleson_norm, fujii_wilson, lebesgue_norm, lorentz_norm, muckenhoupt
from .errors import InvalidFunctionError, ParameterError
from .grid import CubeId, CubeSeq, Grid, LeafLike, leaf_values, subtree_sums, sum_over_ancestors
from .operators import ExponentProfile, multilinear_maximal, seq_maximal
from .sparse import SparseAllocation, carleson_to_sparse, sparse_form_B, sparse_operator_A
from .stopping import build_stopping, strong_stopping

logger = logging.getLogger(__name__)

EXPONENT_TOL = 1e-9
DEPENDENCE_TOL = 1e-9


def conj(t: float) -> float:
    """Hoelder conjugate t' = t / (t - 1)"""
    return t / (t - 1.0)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParameterError(message)


def _coerce(value):
    """JSON has no infinity literal; cells spell it "inf" """
    if isinstance(value, (list, tuple)):
        return [_coerce(x) for x in value]
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    return value


@dataclass
class IneqParams:
    """Exponents of one inequality; each case reads the fields it needs.

    Indices (``js``, ``j``) are 0-based. ``js`` is the index set J_s of the
    strong-type factors; J_r is its complement.
    """

    m: int
    t: Tuple[float, ...] = ()
    r: Tuple[float, ...] = ()
    rho: Tuple[float, ...] = ()
    p: Tuple[float, ...] = ()
    s: Tuple[float, ...] = ()
    beta: Tuple[float, ...] = ()
    q: Tuple[float, ...] = ()
    js: Tuple[int, ...] = ()
    j: int = -1
    alpha: float = 1.0
    cov_s: float = 2.0
    variant: str = "full"

    def __post_init__(self):
        for name in ('t', 'r', 'rho', 'p', 's', 'beta', 'q'):
            setattr(self, name, tuple(float(x) for x in getattr(self, name)))
        self.js = tuple(int(x) for x in self.js)
        self.m = int(self.m)
        self.j = int(self.j)
        self.alpha = float(self.alpha)
        self.cov_s = float(self.cov_s)

    @classmethod
    def from_dict(cls, data: Dict) -> "IneqParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown exponent fields: {', '.join(sorted(unknown))}")
        if 'm' not in data:
            raise ParameterError("exponent cell needs 'm'")
        return cls(**{key: _coerce(value) for key, value in data.items()})

    def to_dict(self) -> Dict:
        return asdict(self)

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha1(text.encode('utf-8')).hexdigest()[:12]

    @property
    def jr(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.m) if i not in self.js)


@dataclass
class Instance:
    """Grid, weights, test functions and cube sequences an inequality is evaluated on"""

    grid: Grid
    weights: List[np.ndarray]
    functions: List[np.ndarray] = field(default_factory=list)
    tau: Optional[CubeSeq] = None
    lambdas: List[CubeSeq] = field(default_factory=list)
    disjoint: Optional[SparseAllocation] = None
    seed: int = 0
    family: str = "manual"
    master_seed: Optional[int] = None

    def __post_init__(self):
        self.weights = [np.array(leaf_values(self.grid, w, positive=True)) for w in self.weights]
        self.functions = [np.array(leaf_values(self.grid, f)) for f in self.functions]
        if self.tau is None:
            self.tau = CubeSeq.indicator(self.grid.depth, [CubeId(0, 0)])

    @property
    def depth(self) -> int:
        return self.grid.depth


@dataclass
class InstanceShape:
    """What a case reads from an instance"""

    weights: int
    functions: int = 0
    lambdas: int = 0
    dependent: Optional[Tuple[float, ...]] = None


@dataclass
class IneqReport:
    case: str
    lhs: float
    rhs: float
    ratio: float
    seed: int
    depth: int
    family: str
    m: int
    params_digest: str
    report_only: bool = False
    master_seed: Optional[int] = None

    @property
    def seed_label(self) -> str:
        """Seed column: master:trial for generated instances, so a row alone regenerates its instance"""
        return str(self.seed) if self.master_seed is None else f"{self.master_seed}:{self.seed}"

    @property
    def hard_failure(self) -> bool:
        return self.rhs == 0 and self.lhs > 0

    @classmethod
    def build(cls, case: "InequalityCase", lhs: float, rhs: float,
              instance: Instance, params: IneqParams) -> "IneqReport":
        if rhs == 0:
            ratio = 0.0 if lhs == 0 else math.inf
        else:
            ratio = lhs / rhs
        return cls(case.case_id, float(lhs), float(rhs), float(ratio), instance.seed, instance.depth,
                   instance.family, params.m, params.digest(), case.report_only, instance.master_seed)


# shared exponent algebra

def _validate_fractional(params: IneqParams, k: int) -> None:
    for name in ('t', 'r', 'rho'):
        _require(len(getattr(params, name)) == k, f"{name} needs {k} entries, got {len(getattr(params, name))}")
    for i, (t, r, rho) in enumerate(zip(params.t, params.r, params.rho)):
        _require(0 < r < math.inf, f"r[{i}] must satisfy 0 < r < inf")
        _require(0 <= rho < 1, f"rho[{i}] must satisfy 0 <= rho < 1")
        upper = math.inf if rho == 0 else 1.0 / rho
        _require(1 < t < upper, f"t[{i}] must satisfy 1 < t < 1/rho")


def _validate_m(params: IneqParams, smallest: int = 2) -> None:
    _require(params.m >= smallest, f"m must be at least {smallest}, got {params.m}")


def _maximal_exponents(params: IneqParams) -> Tuple[float, Tuple[float, ...], Tuple[float, ...]]:
    """alpha, q = (r_i/t_i', alpha) and the FW exponent (r_i(1/t_i - rho_i))_{i != m}"""
    parts = [r * (1.0 / t - rho) for t, r, rho in zip(params.t, params.r, params.rho)]
    alpha = float(sum(parts))
    q = tuple(r / conj(t) for t, r in zip(params.t, params.r)) + (alpha,)
    return alpha, q, tuple(parts) + (0.0,)


def _profile(params: IneqParams) -> ExponentProfile:
    return ExponentProfile.of(params.r, params.rho)


def _weighted(instance: Instance, k: int) -> List[np.ndarray]:
    return [instance.functions[i] * instance.weights[i] for i in range(k)]


def _norm_product(instance: Instance, params: IneqParams, indices: Sequence[int]) -> float:
    grid = instance.grid
    return float(np.prod([
        lebesgue_norm(grid, instance.functions[i], instance.weights[i], params.t[i]) ** params.r[i]
        for i in indices
    ]))


def _seq_norm_product(instance: Instance, params: IneqParams, indices: Sequence[int], lorentz_one: Sequence[int] = ()) -> float:
    grid = instance.grid
    total = 1.0
    for i in indices:
        maximal = seq_maximal(grid, instance.lambdas[i])
        if i in lorentz_one:
            total *= lorentz_norm(grid, maximal, instance.weights[i], params.p[i], 1.0)
        else:
            total *= lebesgue_norm(grid, maximal, instance.weights[i], params.p[i])
    return total


def _log_avg_levels(grid: Grid, w: np.ndarray) -> List[np.ndarray]:
    return [np.log(row) for row in grid.level_averages(w)]


def _avg_power_levels(grid: Grid, ws: Sequence[np.ndarray], exps: Sequence[float]) -> List[np.ndarray]:
    """prod_i (w_i)_Q^exps_i for every cube, level by level"""
    total = [np.zeros(1 << level) for level in range(grid.depth + 1)]
    for w, e in zip(ws, exps):
        if e == 0:
            continue
        for level, row in enumerate(_log_avg_levels(grid, w)):
            total[level] = total[level] + e * row
    return [np.exp(row) for row in total]


def _zero_fw(exponents: Sequence[float], skip: int) -> Tuple[float, ...]:
    return tuple(0.0 if i == skip else e for i, e in enumerate(exponents))


class InequalityCase:
    """One registry entry"""

    case_id = ""
    anchor = ""
    report_only = False

    def validate(self, params: IneqParams) -> None:
        raise NotImplementedError

    def shape(self, params: IneqParams) -> InstanceShape:
        raise NotImplementedError

    def sides(self, instance: Instance, params: IneqParams) -> Tuple[float, float]:
        raise NotImplementedError

    def trivial_ratio(self, params: IneqParams) -> float:
        """Exact ratio on the all-ones instance (unit mass, tau = root indicator, lambda = 1)"""
        return 1.0

    def char_exponents(self, params: IneqParams) -> Optional[Tuple[float, ...]]:
        """Exponents q of the Muckenhoupt characteristic on the right, when a dependent tuple makes sense"""
        return None

    def check_instance(self, instance: Instance, params: IneqParams) -> None:
        need = self.shape(params)
        if len(instance.weights) < need.weights:
            raise InvalidFunctionError(f"{self.case_id} needs {need.weights} weights, got {len(instance.weights)}")
        if len(instance.functions) < need.functions:
            raise InvalidFunctionError(f"{self.case_id} needs {need.functions} functions, got {len(instance.functions)}")
        if len(instance.lambdas) < need.lambdas:
            raise InvalidFunctionError(f"{self.case_id} needs {need.lambdas} cube sequences, got {len(instance.lambdas)}")
        for seq in [instance.tau] + list(instance.lambdas):
            if seq.depth != instance.depth:
                raise InvalidFunctionError("cube sequences must match the grid depth")
        if instance.disjoint is not None and instance.disjoint.grid.depth != instance.depth:
            raise InvalidFunctionError("disjoint sets must live on the instance grid")


class MaxWeak(InequalityCase):
    case_id = "MAX_WEAK"
    anchor = "weak type bound for the multilinear fractional maximal function"

    def validate(self, params):
        _validate_m(params)
        _validate_fractional(params, params.m - 1)

    def shape(self, params):
        return InstanceShape(weights=params.m, functions=params.m - 1)

    def char_exponents(self, params):
        return _maximal_exponents(params)[1]

    def maximal(self, instance, params):
        return multilinear_maximal(instance.grid, _weighted(instance, params.m - 1), _profile(params))

    def sides(self, instance, params):
        alpha, q, _ = _maximal_exponents(params)
        grid, ws = instance.grid, instance.weights
        lhs = lorentz_norm(grid, self.maximal(instance, params), ws[params.m - 1], 1.0 / alpha, math.inf)
        rhs = muckenhoupt(grid, ws[:params.m], q) * _norm_product(instance, params, range(params.m - 1))
        return lhs, rhs


class MaxStrong(MaxWeak):
    case_id = "MAX_STRONG"
    anchor = "strong type mixed Ap-FW bound for the multilinear fractional maximal function"

    def sides(self, instance, params):
        alpha, q, fw = _maximal_exponents(params)
        grid, ws = instance.grid, instance.weights[:params.m]
        lhs = lebesgue_norm(grid, self.maximal(instance, params), ws[-1], 1.0 / alpha)
        rhs = (muckenhoupt(grid, ws, q) * fujii_wilson(grid, ws, fw)
               * _norm_product(instance, params, range(params.m - 1)))
        return lhs, rhs


class BDual(InequalityCase):
    case_id = "B_DUAL"
    anchor = "sparse form bound in the duality range"

    def validate(self, params):
        _validate_m(params)
        _validate_fractional(params, params.m)
        total = sum(r * (1.0 / t - rho) for t, r, rho in zip(params.t, params.r, params.rho))
        _require(abs(total - 1.0) <= EXPONENT_TOL, f"sum_i r_i (1/t_i - rho_i) must equal 1, got {total}")
        _require(len(params.js) > 0, "J_s must be non-empty")
        _require(len(set(params.js)) == len(params.js) and all(0 <= i < params.m for i in params.js),
                 f"J_s must be distinct indices in [0, {params.m})")

    def shape(self, params):
        return InstanceShape(weights=params.m, functions=params.m)

    def sides(self, instance, params):
        grid, ws = instance.grid, instance.weights[:params.m]
        lhs = sparse_form_B(grid, instance.tau, _weighted(instance, params.m), _profile(params))
        parts = [r * (1.0 / t - rho) for t, r, rho in zip(params.t, params.r, params.rho)]
        q = [r / conj(t) for t, r in zip(params.t, params.r)]
        fw_sum = sum(fujii_wilson(grid, ws, _zero_fw(parts, j)) for j in params.js)
        strong = _norm_product(instance, params, params.js)
        weak = float(np.prod([
            lorentz_norm(grid, instance.functions[i], ws[i], params.t[i], params.r[i]) ** params.r[i]
            for i in params.jr
        ]))
        rhs = carleson_norm(grid, instance.tau) * muckenhoupt(grid, ws, q) * fw_sum * strong * weak
        return lhs, rhs

    def trivial_ratio(self, params):
        # ||1||_{L^{t,r}}^r = t/r on a unit-mass space
        lorentz = float(np.prod([params.t[i] / params.r[i] for i in params.jr]))
        return 1.0 / (len(params.js) * lorentz)


class ABelow(MaxWeak):
    case_id = "A_BELOW"
    anchor = "sparse operator bound outside the duality range"

    def validate(self, params):
        super().validate(params)
        alpha, _, _ = _maximal_exponents(params)
        _require(alpha >= 1 - EXPONENT_TOL, f"alpha = sum_(i<m) r_i (1/t_i - rho_i) must be >= 1, got {alpha}")

    def operator(self, instance, params):
        return sparse_operator_A(instance.grid, instance.tau, _weighted(instance, params.m - 1), _profile(params))

    def sides(self, instance, params):
        alpha, q, fw = _maximal_exponents(params)
        grid, ws = instance.grid, instance.weights[:params.m]
        lhs = lebesgue_norm(grid, self.operator(instance, params), ws[-1], 1.0 / alpha)
        rhs = (carleson_norm(grid, instance.tau) * muckenhoupt(grid, ws, q) * fujii_wilson(grid, ws, fw)
               * _norm_product(instance, params, range(params.m - 1)))
        return lhs, rhs


class AWeakProbe(ABelow):
    case_id = "A_WEAK_PROBE"
    anchor = "weak type sparse operator bound without the FW factor (open, report only)"
    report_only = True

    def sides(self, instance, params):
        alpha, q, _ = _maximal_exponents(params)
        grid, ws = instance.grid, instance.weights[:params.m]
        lhs = lorentz_norm(grid, self.operator(instance, params), ws[-1], 1.0 / alpha, math.inf)
        rhs = (carleson_norm(grid, instance.tau) * muckenhoupt(grid, ws, q)
               * _norm_product(instance, params, range(params.m - 1)))
        return lhs, rhs


class FwAp(InequalityCase):
    case_id = "FW_AP"
    anchor = "FW characteristic of dependent weights against a power of the Ap characteristic"

    def validate(self, params):
        _validate_m(params)
        _require(len(params.q) == params.m, f"q needs {params.m} entries")
        _require(len(params.beta) == params.m, f"beta needs {params.m} entries")
        _require(all(0 < x < math.inf for x in params.q), "q_i must satisfy 0 < q_i < inf")
        _require(all(x >= 0 for x in params.beta), "beta_i must be nonnegative")
        _require(sum(params.beta) > 0, "sum of beta_i must be positive")

    def shape(self, params):
        return InstanceShape(weights=params.m, dependent=params.q)

    def char_exponents(self, params):
        return params.q

    def sides(self, instance, params):
        grid, ws = instance.grid, instance.weights[:params.m]
        log_product = sum(q * np.log(w) for q, w in zip(params.q, ws))
        if np.max(np.abs(log_product)) > DEPENDENCE_TOL:
            raise ParameterError("FW_AP needs dependent weights with prod_i w_i^q_i = 1")
        gamma = max(b / q for b, q in zip(params.beta, params.q))
        lhs = fujii_wilson(grid, ws, params.beta)
        rhs = muckenhoupt(grid, ws, [gamma * q for q in params.q])
        return lhs, rhs


class SumBelowOne(InequalityCase):
    case_id = "SUM_LT1"
    anchor = "localized Carleson sum with exponents summing below one"

    def validate(self, params):
        _require(len(params.beta) >= 1, "beta needs at least one entry")
        _require(all(b >= 0 for b in params.beta), "beta_i must be nonnegative")
        _require(sum(params.beta) < 1, f"sum of beta_i must be < 1, got {sum(params.beta)}")

    def shape(self, params):
        return InstanceShape(weights=len(params.beta))

    def sides(self, instance, params):
        grid = instance.grid
        ws = instance.weights[:len(params.beta)]
        products = _avg_power_levels(grid, ws, params.beta)
        masses = [grid.level_measures(level) for level in range(grid.depth + 1)]
        local = subtree_sums([t * mu * pr for t, mu, pr in zip(instance.tau.levels, masses, products)])
        norm = carleson_norm(grid, instance.tau)
        best = (0.0, 0.0, -1.0)
        for lhs_row, mu, pr in zip(local, masses, products):
            rhs_row = norm * mu * pr
            if norm == 0:
                continue
            ratios = lhs_row / rhs_row
            k = int(np.argmax(ratios))
            if ratios[k] > best[2]:
                best = (float(lhs_row[k]), float(rhs_row[k]), float(ratios[k]))
        return best[0], best[1]


class ChangeOfMeasure(InequalityCase):
    case_id = "COV"
    anchor = "L^s Carleson-type estimate for an arbitrary measure sigma; lambda is read from tau"

    def validate(self, params):
        _require(1 < params.cov_s < math.inf, f"cov_s must satisfy 1 < s < inf, got {params.cov_s}")

    def shape(self, params):
        return InstanceShape(weights=1)

    def sides(self, instance, params):
        grid, s = instance.grid, params.cov_s
        sigma_leaves = instance.weights[0] * grid.leaf_masses
        sigma = grid.level_integrals(instance.weights[0])
        lam = instance.tau.levels
        density = sum_over_ancestors([l / sg for l, sg in zip(lam, sigma)])
        lhs = float(np.dot(density ** s, sigma_leaves))
        below = subtree_sums(lam)
        rhs = float(sum(np.dot(l, (b / sg) ** (s - 1)) for l, b, sg in zip(lam, below, sigma)))
        return lhs, rhs


class KeyEstimate(InequalityCase):
    case_id = "KEY"
    anchor = "key estimate: the only place the multilinear Muckenhoupt characteristic enters"

    def _index(self, params):
        return params.j % params.m

    def validate(self, params):
        _require(params.m >= 1, "m must be positive")
        _require(len(params.s) == params.m and len(params.q) == params.m, f"s and q need {params.m} entries")
        _require(-params.m <= params.j < params.m, f"j must index one of the {params.m} weights")
        j = self._index(params)
        _require(all(x > 0 for x in params.q), "q_i must be positive")
        _require(all(x > 0 for i, x in enumerate(params.s) if i != j), "s_i must be positive for i != j")
        _require(abs(params.q[j] - (1 + params.s[j])) <= EXPONENT_TOL, "q_j must equal 1 + s_j")
        _require(0 < params.alpha < math.inf, "alpha must satisfy 0 < alpha < inf")
        total_s, total_q = sum(params.s), sum(params.q)
        _require(total_s <= total_q + EXPONENT_TOL, "sum_i s_i must not exceed sum_i q_i")
        others = [s / q for i, (s, q) in enumerate(zip(params.s, params.q)) if i != j]
        if others:
            _require(total_s / total_q < min(others), "sum s / sum q must be < min_(i != j) s_i / q_i")

    def shape(self, params):
        return InstanceShape(weights=params.m)

    def sides(self, instance, params):
        grid, ws, j, a = instance.grid, instance.weights[:params.m], self._index(params), params.alpha
        norm = carleson_norm(grid, instance.tau)
        if norm == 0:
            return 0.0, 0.0
        inner = _avg_power_levels(grid, ws, [s * a for s in params.s])
        density = sum_over_ancestors([t * x for t, x in zip(instance.tau.levels, inner)])
        lhs = float(np.dot(density ** (1.0 / a), ws[j] * grid.leaf_masses))
        outer = _avg_power_levels(grid, ws, [0.0 if i == j else s - q
                                             for i, (s, q) in enumerate(zip(params.s, params.q))])
        total = float(sum(np.dot(t * grid.level_measures(level), x)
                          for level, (t, x) in enumerate(zip(instance.tau.levels, outer))))
        rhs = norm ** (1.0 / a - 1.0) * muckenhoupt(grid, ws, params.q) * total
        return lhs, rhs


def _stopping_double_sum(instance: Instance, lambdas: Sequence[CubeSeq], coefficients: List[np.ndarray],
                         power: float, measure: np.ndarray) -> float:
    """sum over F_1..F_k of prod lambda_{i,F_i}^power int (sum_{Q: pi_i(Q) = F_i} c_Q 1_Q)^power d(measure)"""
    grid = instance.grid
    families = [build_stopping(grid, lam) for lam in lambdas]
    groups: Dict[Tuple[CubeId, ...], List[CubeId]] = {}
    for q in grid.cubes():
        key = tuple(family.parent_map[q] for family in families)
        groups.setdefault(key, []).append(q)
    total = 0.0
    for key, cubes in sorted(groups.items()):
        weight = float(np.prod([lam[f] ** power for lam, f in zip(lambdas, key)]))
        if weight == 0:
            continue
        smallest = max(key, key=lambda f: f.level)
        base = smallest.leaf_slice(grid.depth)
        local = np.zeros(base.stop - base.start)
        for q in cubes:
            c = coefficients[q.level][q.index]
            if c:
                leaves = q.leaf_slice(grid.depth)
                local[leaves.start - base.start:leaves.stop - base.start] += c
        total += weight * float(np.dot(local ** power, measure[base]))
    return total


class StoppingDoubleSum(InequalityCase):
    case_id = "CHAR"
    anchor = "stopping-family double sum against Carleson, Ap and FW characteristics"

    def validate(self, params):
        _validate_m(params)
        k = params.m - 1
        _require(len(params.p) == k, f"p needs {k} entries")
        _require(len(params.s) == params.m, f"s needs {params.m} entries")
        _require(all(0 < p < math.inf for p in params.p), "p_i must satisfy 0 < p_i < inf")
        for i, q in enumerate(self.exponents(params)[1]):
            _require(q > 0, f"q[{i}] = s_i - (1/p_i or 1 - alpha) must be positive")

    def exponents(self, params):
        alpha = sum(1.0 / p for p in params.p)
        q = tuple(s - 1.0 / p for s, p in zip(params.s, params.p)) + (params.s[-1] - (1.0 - alpha),)
        fw = tuple(1.0 / p for p in params.p) + (0.0,)
        return alpha, q, fw

    def shape(self, params):
        return InstanceShape(weights=params.m, lambdas=params.m - 1)

    def lhs(self, instance, params):
        alpha, _, _ = self.exponents(params)
        grid, ws = instance.grid, instance.weights[:params.m]
        exps = list(params.s[:-1]) + [params.s[-1] - 1.0]
        coefficients = [t * c for t, c in zip(instance.tau.levels, _avg_power_levels(grid, ws, exps))]
        total = _stopping_double_sum(instance, instance.lambdas[:params.m - 1], coefficients, 1.0 / alpha,
                                     ws[-1] * grid.leaf_masses)
        return total ** alpha

    def sides(self, instance, params):
        _, q, fw = self.exponents(params)
        grid, ws = instance.grid, instance.weights[:params.m]
        rhs = (carleson_norm(grid, instance.tau) * muckenhoupt(grid, ws, q) * fujii_wilson(grid, ws, fw)
               * _seq_norm_product(instance, params, range(params.m - 1)))
        return self.lhs(instance, params), rhs


class StoppingDoubleSumSplitFW(StoppingDoubleSum):
    case_id = "CHAR_ALT"
    anchor = "stopping-family double sum with a product of single-weight FW characteristics (report only)"
    report_only = True

    def sides(self, instance, params):
        _, q, _ = self.exponents(params)
        grid, ws = instance.grid, instance.weights[:params.m]
        separate = float(np.prod([fujii_wilson(grid, [ws[i]], [1.0 / p]) for i, p in enumerate(params.p)]))
        rhs = (carleson_norm(grid, instance.tau) * muckenhoupt(grid, ws, q) * separate
               * _seq_norm_product(instance, params, range(params.m - 1)))
        return self.lhs(instance, params), rhs


class ConvexRange(InequalityCase):
    case_id = "CONVEX"
    anchor = "general-sequence sparse sum in the convex range"

    def validate(self, params):
        _validate_m(params)
        _require(len(params.p) == params.m and len(params.s) == params.m, f"p and s need {params.m} entries")
        _require(all(1 < p < math.inf for p in params.p), "p_i must satisfy 1 < p_i < inf")
        total = sum(1.0 / p for p in params.p)
        _require(abs(total - 1.0) <= EXPONENT_TOL, f"sum_i 1/p_i must equal 1, got {total}")
        for i, (s, p) in enumerate(zip(params.s, params.p)):
            _require(s - 1.0 / p > 0, f"q[{i}] = s_i - 1/p_i must be positive")
        _require(len(params.js) > 0, "J_s must be non-empty")
        _require(len(set(params.js)) == len(params.js) and all(0 <= i < params.m for i in params.js),
                 f"J_s must be distinct indices in [0, {params.m})")

    def shape(self, params):
        return InstanceShape(weights=params.m, lambdas=params.m)

    def sides(self, instance, params):
        grid, ws = instance.grid, instance.weights[:params.m]
        products = _avg_power_levels(grid, ws, params.s)
        lhs = 0.0
        for level, row in enumerate(products):
            lam_product = np.prod([lam.levels[level] for lam in instance.lambdas[:params.m]], axis=0)
            lhs += float(np.dot(instance.tau.levels[level] * grid.level_measures(level) * lam_product, row))
        q = [s - 1.0 / p for s, p in zip(params.s, params.p)]
        fw = [1.0 / p for p in params.p]
        fw_sum = sum(fujii_wilson(grid, ws, _zero_fw(fw, j)) for j in params.js)
        norms = _seq_norm_product(instance, params, range(params.m), lorentz_one=params.jr)
        rhs = carleson_norm(grid, instance.tau) * muckenhoupt(grid, ws, q) * fw_sum * norms
        return lhs, rhs

    def trivial_ratio(self, params):
        # ||1||_{L^{p,1}} = p on a unit-mass space
        return 1.0 / (len(params.js) * float(np.prod([params.p[i] for i in params.jr])))


class ConcaveRange(InequalityCase):
    case_id = "CONCAVE"
    anchor = "sparse sum in the concave range, full and disjoint-support variants"

    def validate(self, params):
        _validate_m(params)
        k = params.m - 1
        _require(len(params.p) == k and len(params.s) == k, f"p and s need {k} entries")
        _require(all(0 < p < math.inf for p in params.p), "p_i must satisfy 0 < p_i < inf")
        for i, (s, p) in enumerate(zip(params.s, params.p)):
            _require(0 < s < math.inf, f"s[{i}] must satisfy 0 < s < inf")
            _require(s - 1.0 / p > 0, f"q[{i}] = s_i - 1/p_i must be positive")
        _require(params.variant in ("full", "disjoint"), "variant must be 'full' or 'disjoint'")
        if params.variant == "full":
            alpha = sum(1.0 / p for p in params.p)
            _require(alpha >= 1 - EXPONENT_TOL, f"alpha = sum 1/p_i must be >= 1 for the full variant, got {alpha}")

    def shape(self, params):
        return InstanceShape(weights=params.m, lambdas=params.m - 1)

    def sets(self, instance: Instance) -> SparseAllocation:
        if instance.disjoint is not None:
            return instance.disjoint
        grid = instance.grid
        return carleson_to_sparse(grid, instance.tau, max(carleson_norm(grid, instance.tau), 1e-300))

    def sides(self, instance, params):
        k = params.m - 1
        grid, ws = instance.grid, instance.weights[:params.m]
        alpha = sum(1.0 / p for p in params.p)
        products = _avg_power_levels(grid, ws[:k], params.s)
        coefficients = []
        for level, row in enumerate(products):
            lam_product = np.prod([lam.levels[level] for lam in instance.lambdas[:k]], axis=0)
            coefficients.append(instance.tau.levels[level] * lam_product * row)
        if params.variant == "full":
            lhs = lebesgue_norm(grid, sum_over_ancestors(coefficients), ws[-1], 1.0 / alpha)
        else:
            sets = self.sets(instance)
            sets.validate()
            # disjoint sets: each coefficient is raised to 1/alpha on its own set
            powered = np.zeros(grid.n_leaves)
            for q in sets.cubes:
                c = coefficients[q.level][q.index]
                powered[q.leaf_slice(grid.depth)] += c ** (1.0 / alpha) * sets.density(q)
            lhs = lebesgue_norm(grid, powered, ws[-1], 1.0) ** alpha
        q = [s - 1.0 / p for s, p in zip(params.s, params.p)] + [alpha]
        fw = [1.0 / p for p in params.p] + [0.0]
        rhs = (carleson_norm(grid, instance.tau) * muckenhoupt(grid, ws, q) * fujii_wilson(grid, ws, fw)
               * _seq_norm_product(instance, params, range(k)))
        return lhs, rhs


class FracMaxLorentz(InequalityCase):
    case_id = "FRAC_MAX_LORENTZ"
    anchor = "Lorentz bounds for the fractional maximal function, uniform in the measure"

    def validate(self, params):
        _require(len(params.rho) == 1 and len(params.p) == 1 and len(params.s) == 1,
                 "rho, p and s need exactly one entry")
        rho, p, s = params.rho[0], params.p[0], params.s[0]
        _require(0 <= rho < 1, "rho must satisfy 0 <= rho < 1")
        upper = math.inf if rho == 0 else 1.0 / rho
        _require(1 < p < upper, "p must satisfy 1 < p < 1/rho")
        _require(s >= 1, "the Lorentz index s must satisfy 1 <= s <= inf")

    def shape(self, params):
        return InstanceShape(weights=1, functions=1)

    def target(self, params) -> float:
        return 1.0 / (1.0 / params.p[0] - params.rho[0])

    def sides(self, instance, params):
        grid = instance.grid
        reference = grid.with_masses(instance.weights[0] * grid.leaf_masses)
        ones = np.ones(grid.n_leaves)
        f = instance.functions[0]
        maximal = multilinear_maximal(reference, [f], ExponentProfile.of([1.0], params.rho))
        lhs = lorentz_norm(reference, maximal, ones, self.target(params), params.s[0])
        rhs = lorentz_norm(reference, f, ones, params.p[0], params.s[0])
        return lhs, rhs

    def trivial_ratio(self, params):
        if math.isinf(params.s[0]):
            return 1.0
        return (self.target(params) / params.p[0]) ** (1.0 / params.s[0])


class SparseDomination(InequalityCase):
    case_id = "DOMINATION"
    anchor = "pointwise domination of the maximal function by the stopping-family sum"

    def validate(self, params):
        _validate_m(params)
        k = params.m - 1
        _require(len(params.r) == k and len(params.rho) == k, f"r and rho need {k} entries")
        _profile(params)

    def shape(self, params):
        return InstanceShape(weights=params.m - 1, functions=params.m - 1)

    def factor(self, params) -> float:
        return (2.0 * params.m) ** sum(params.r)

    def sides(self, instance, params):
        k = params.m - 1
        grid = instance.grid
        result = strong_stopping(grid, instance.functions[:k], instance.weights[:k], _profile(params))
        maximal = multilinear_maximal(grid, _weighted(instance, k), _profile(params))
        bound = result.domination_sum()
        with np.errstate(divide='ignore', invalid='ignore'):
            ratios = np.where(maximal > 0, maximal / bound, 0.0)
        leaf = int(np.argmax(ratios))
        return float(maximal[leaf]), float(bound[leaf])


CASES: Dict[str, InequalityCase] = {case.case_id: case for case in [
    MaxWeak(), MaxStrong(), BDual(), ABelow(), FwAp(), SumBelowOne(), ChangeOfMeasure(), KeyEstimate(),
    StoppingDoubleSum(), ConvexRange(), ConcaveRange(), FracMaxLorentz(), SparseDomination(),
    AWeakProbe(), StoppingDoubleSumSplitFW(),
]}

REGISTRY_ORDER = [
    "MAX_WEAK", "MAX_STRONG", "B_DUAL", "A_BELOW", "FW_AP", "SUM_LT1", "COV", "KEY",
    "CHAR", "CONVEX", "CONCAVE", "FRAC_MAX_LORENTZ", "DOMINATION", "A_WEAK_PROBE", "CHAR_ALT",
]

# Exponent cells per case. The first cell of each case is the one the
# all-ones suite runs.
DEFAULT_CELLS: Dict[str, List[Dict]] = {
    "MAX_WEAK": [
        {"m": 2, "t": [2.0], "r": [1.0], "rho": [0.0]},
        {"m": 3, "t": [3.0, 3.0], "r": [1.0, 1.0], "rho": [0.0, 0.0]},
        {"m": 2, "t": [2.0], "r": [1.0], "rho": [0.25]},
    ],
    "MAX_STRONG": [
        {"m": 2, "t": [2.0], "r": [1.0], "rho": [0.0]},
        {"m": 3, "t": [3.0, 3.0], "r": [1.0, 1.0], "rho": [0.0, 0.0]},
        {"m": 2, "t": [2.0], "r": [1.0], "rho": [0.25]},
    ],
    "B_DUAL": [
        {"m": 2, "t": [2.0, 2.0], "r": [1.0, 1.0], "rho": [0.0, 0.0], "js": [0, 1]},
        {"m": 3, "t": [3.0, 3.0, 3.0], "r": [1.0, 1.0, 1.0], "rho": [0.0, 0.0, 0.0], "js": [0, 1]},
    ],
    "A_BELOW": [
        {"m": 2, "t": [2.0], "r": [2.0], "rho": [0.0]},
        {"m": 3, "t": [2.0, 2.0], "r": [1.0, 1.0], "rho": [0.0, 0.0]},
    ],
    "FW_AP": [
        {"m": 2, "q": [1.0, 1.0], "beta": [1.0, 0.0]},
        {"m": 2, "q": [1.0, 2.0], "beta": [1.0, 0.5]},
        {"m": 3, "q": [1.0, 1.0, 1.0], "beta": [1.0, 1.0, 0.0]},
    ],
    "SUM_LT1": [
        {"m": 1, "beta": [0.5]},
        {"m": 2, "beta": [0.3, 0.4]},
        {"m": 3, "beta": [0.2, 0.2, 0.2]},
    ],
    "COV": [
        {"m": 1, "cov_s": 2.0},
        {"m": 1, "cov_s": 1.5},
        {"m": 1, "cov_s": 3.0},
    ],
    "KEY": [
        {"m": 2, "s": [1.0, 0.0], "q": [0.5, 1.0], "j": 1, "alpha": 1.0},
        {"m": 2, "s": [1.0, -0.5], "q": [0.5, 0.5], "j": 1, "alpha": 0.5},
        {"m": 3, "s": [1.0, 1.0, 0.0], "q": [0.5, 0.5, 1.0], "j": 2, "alpha": 2.0},
    ],
    "CHAR": [
        {"m": 2, "p": [2.0], "s": [1.0, 1.0]},
        {"m": 3, "p": [2.0, 2.0], "s": [1.0, 1.0, 0.5]},
    ],
    "CONVEX": [
        {"m": 2, "p": [2.0, 2.0], "s": [1.0, 1.0], "js": [0, 1]},
        {"m": 3, "p": [3.0, 3.0, 3.0], "s": [1.0, 1.0, 1.0], "js": [0, 1]},
    ],
    "CONCAVE": [
        {"m": 2, "p": [1.0], "s": [2.0], "variant": "full"},
        {"m": 3, "p": [2.0, 2.0], "s": [1.0, 1.0], "variant": "full"},
        {"m": 2, "p": [2.0], "s": [1.0], "variant": "disjoint"},
    ],
    "FRAC_MAX_LORENTZ": [
        {"m": 2, "rho": [0.0], "p": [2.0], "s": [2.0]},
        {"m": 2, "rho": [0.25], "p": [2.0], "s": ["inf"]},
        {"m": 2, "rho": [0.0], "p": [3.0], "s": [1.0]},
    ],
    "DOMINATION": [
        {"m": 2, "r": [1.0], "rho": [0.0]},
        {"m": 3, "r": [1.0, 1.0], "rho": [0.0, 0.25]},
    ],
    "A_WEAK_PROBE": [
        {"m": 2, "t": [2.0], "r": [2.0], "rho": [0.0]},
    ],
    "CHAR_ALT": [
        {"m": 3, "p": [2.0, 2.0], "s": [1.0, 1.0, 0.5]},
    ],
}


def get_case(case_id: str) -> InequalityCase:
    try:
        return CASES[case_id]
    except KeyError:
        raise ParameterError(f"unknown inequality case {case_id!r}; known: {', '.join(REGISTRY_ORDER)}")


def evaluate_inequality(case_id: str, instance: Instance, params: IneqParams) -> IneqReport:
    """Validate exponents and instance, then compute both sides of one inequality"""
    case = get_case(case_id)
    case.validate(params)
    case.check_instance(instance, params)
    lhs, rhs = case.sides(instance, params)
    report = IneqReport.build(case, lhs, rhs, instance, params)
    if report.hard_failure:
        logger.warning("%s: rhs vanishes but lhs = %.6g (seed %s)", case_id, lhs, report.seed_label)
    return report


def dependent_complete(ws: Sequence[LeafLike], q: Sequence[float]) -> np.ndarray:
    """Last weight w_m = (prod_{i<m} w_i^q_i)^(-1/q_m), so that prod_i w_i^q_i = 1"""
    if len(q) != len(ws) + 1:
        raise ParameterError(f"{len(ws)} weights need {len(ws) + 1} exponents, got {len(q)}")
    if not q[-1] > 0:
        raise ParameterError("q_m must be positive to complete a dependent tuple")
    arrays = [np.asarray(w, dtype=float) for w in ws]
    if any(np.any(w <= 0) for w in arrays):
        raise InvalidFunctionError("weights must be strictly positive")
    log_product = sum(qi * np.log(w) for qi, w in zip(q, arrays)) if arrays else 0.0
    return np.exp(-np.asarray(log_product) / q[-1])


def one_weight_pair(w: LeafLike, p: float) -> Tuple[List[np.ndarray], Tuple[float, float]]:
    """(w, w^(1-p')) with q = (1, p - 1): the dependent pair behind [w]_{A_infty} <~ [w]_{A_p}"""
    if not p > 1:
        raise ParameterError(f"p must exceed 1, got {p}")
    w = np.asarray(w, dtype=float)
    q = (1.0, p - 1.0)
    return [w, dependent_complete([w], q)], q
