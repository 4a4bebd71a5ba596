"""
Suite runner: evaluates registry cases over instance corpora, checks depth
stability and the constant ledger, and writes CSV / JSON reports.
"""

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from .checkers import IneqParams, IneqReport, evaluate_inequality, get_case
from .config import RunConfig
from .search import WeightFamily, all_ones_instance, maximize_ratio, random_instance, sharpness_sweep

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['case', 'seed', 'depth', 'm', 'params', 'lhs', 'rhs', 'ratio']
STABILITY_FACTOR = 1.5
TRIVIAL_TOL = 1e-12

ProgressCallback = Optional[Callable[[str], None]]


def format_float(x: float) -> str:
    """17 significant digits, '.' decimal point, independent of locale"""
    if math.isinf(x):
        return 'inf' if x > 0 else '-inf'
    return format(x, '.17g')


def _json_float(x: float):
    return x if math.isfinite(x) else format_float(x)


def ledger_key(case: str, m: int, digest: str) -> str:
    return f"{case}|m={m}|{digest}"


@dataclass
class SuiteTask:
    """One (case, exponent cell, depth) block of a suite"""

    case_id: str
    params: Dict
    depth: int
    family: Dict
    trials: int
    seed: int
    trivial: bool = False


def run_task(task: SuiteTask) -> List[IneqReport]:
    """Module level so it can be shipped to worker processes"""
    params = IneqParams.from_dict(task.params)
    if task.trivial:
        return [evaluate_inequality(task.case_id, all_ones_instance(task.case_id, params, task.depth), params)]
    family = WeightFamily.from_dict(task.family)
    return [
        evaluate_inequality(task.case_id, random_instance(task.case_id, params, task.depth, family, task.seed, trial), params)
        for trial in range(task.trials)
    ]


@dataclass
class SuiteResult:
    reports: List[IneqReport]
    trivial: bool = False
    expected: Dict[str, float] = field(default_factory=dict)

    def graded(self) -> List[IneqReport]:
        return [r for r in self.reports if not r.report_only]

    def max_ratios(self) -> Dict[Tuple[str, int, str, int], float]:
        """Max ratio per (case, m, cell digest, depth)"""
        out: Dict[Tuple[str, int, str, int], float] = {}
        for r in self.reports:
            key = (r.case, r.m, r.params_digest, r.depth)
            out[key] = max(out.get(key, 0.0), r.ratio)
        return out

    def case_max(self) -> Dict[str, float]:
        out: Dict[str, float] = {}
        for r in self.reports:
            out[r.case] = max(out.get(r.case, 0.0), r.ratio)
        return out

    def ledger_entries(self) -> Dict[str, float]:
        out: Dict[str, float] = {}
        for r in self.graded():
            key = ledger_key(r.case, r.m, r.params_digest)
            out[key] = max(out.get(key, 0.0), r.ratio)
        return out

    def failures(self) -> List[str]:
        problems = []
        for r in self.graded():
            if r.hard_failure:
                problems.append(f"{r.case} seed {r.seed_label} depth {r.depth}: rhs = 0 < lhs = {r.lhs!r}")
            elif not math.isfinite(r.ratio):
                problems.append(f"{r.case} seed {r.seed_label} depth {r.depth}: ratio is not finite")
        if self.trivial:
            for r in self.graded():
                want = self.expected.get(ledger_key(r.case, r.m, r.params_digest), 1.0)
                if abs(r.ratio - want) > TRIVIAL_TOL * max(1.0, want):
                    problems.append(f"{r.case} depth {r.depth}: all-ones ratio {r.ratio!r}, expected {want!r}")
            return problems
        maxima = self.max_ratios()
        for (case, m, digest, depth), value in sorted(maxima.items()):
            if get_case(case).report_only:
                continue
            doubled = maxima.get((case, m, digest, 2 * depth))
            if depth > 0 and doubled is not None and doubled > STABILITY_FACTOR * value:
                problems.append(f"{case} m={m} cell {digest}: max ratio {doubled:.6g} at depth {2 * depth} "
                                f"exceeds {STABILITY_FACTOR} x {value:.6g} at depth {depth}")
        return problems


class SuiteRunner:
    """Execute registry suites and collect their reports"""

    def __init__(self, config: RunConfig):
        self.config = config

    def tasks(self) -> List[SuiteTask]:
        config = self.config
        trivial = config.suite == "trivial"
        out = []
        for case_id in config.cases:
            for params in config.case_cells(case_id):
                for depth in config.depth_list():
                    out.append(SuiteTask(case_id, params.to_dict(), depth, config.family,
                                         config.trials, config.seed if config.seed is not None else 0, trivial))
        return out

    def expected_ratios(self) -> Dict[str, float]:
        out = {}
        for case_id in self.config.cases:
            case = get_case(case_id)
            for params in self.config.case_cells(case_id):
                out[ledger_key(case_id, params.m, params.digest())] = case.trivial_ratio(params)
        return out

    def run(self, progress_callback: ProgressCallback = None) -> SuiteResult:
        tasks = self.tasks()
        if progress_callback:
            progress_callback(f"Starting {self.config.suite} suite: {len(tasks)} blocks")
        reports: List[IneqReport] = []
        if self.config.jobs > 1:
            with ProcessPoolExecutor(max_workers=self.config.jobs) as pool:
                for task, block in zip(tasks, pool.map(run_task, tasks)):
                    reports.extend(block)
                    self._progress(progress_callback, task, block)
        else:
            for task in tasks:
                block = run_task(task)
                reports.extend(block)
                self._progress(progress_callback, task, block)
        reports.sort(key=lambda r: (r.case, r.params_digest, r.depth, r.seed))
        if progress_callback:
            progress_callback(f"Suite completed: {len(reports)} evaluations")
        return SuiteResult(reports, trivial=self.config.suite == "trivial", expected=self.expected_ratios())

    def _progress(self, progress_callback: ProgressCallback, task: SuiteTask, block: List[IneqReport]) -> None:
        if progress_callback:
            worst = max(r.ratio for r in block)
            progress_callback(f"{task.case_id} depth {task.depth}: {len(block)} instances, max ratio {worst:.6g}")


def write_csv(path: Path, reports: List[IneqReport]) -> None:
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for r in reports:
            writer.writerow([r.case, r.seed_label, r.depth, r.m, r.params_digest,
                             format_float(r.lhs), format_float(r.rhs), format_float(r.ratio)])


def write_summary(path: Path, config: RunConfig, result: SuiteResult, regressions: List[str]) -> Dict:
    cells = {}
    for (case, m, digest, depth), value in sorted(result.max_ratios().items()):
        cells.setdefault(ledger_key(case, m, digest), {})[str(depth)] = _json_float(value)
    summary = {
        'suite': config.suite,
        'seed': config.seed,
        'trials': config.trials,
        'depths': config.depth_list(),
        'evaluations': len(result.reports),
        'max_ratio': {case: _json_float(v) for case, v in sorted(result.case_max().items())},
        'report_only': sorted({r.case for r in result.reports if r.report_only}),
        'cells': cells,
        'failures': result.failures(),
        'regressions': regressions,
    }
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    return summary


def load_ledger(path: Path) -> Dict[str, float]:
    if not path.exists():
        return {}
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    logger.info("loaded constant ledger %s (%d entries)", path, len(data))
    return {key: float(value) for key, value in data.items()}


def merge_ledger(old: Dict[str, float], new: Dict[str, float]) -> Dict[str, float]:
    merged = dict(old)
    for key, value in new.items():
        merged[key] = max(merged.get(key, 0.0), value)
    return merged


def write_ledger(path: Path, ledger: Dict[str, float]) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump({key: _json_float(v) for key, v in sorted(ledger.items())}, f, indent=2)
    logger.info("wrote constant ledger %s (%d entries)", path, len(ledger))


def ledger_regressions(ledger: Dict[str, float], entries: Dict[str, float], tolerance: float) -> List[str]:
    problems = []
    for key, value in sorted(entries.items()):
        if key not in ledger:
            logger.warning("no ledger constant for %s; run check --calibrate", key)
            continue
        if value > ledger[key] * (1.0 + tolerance):
            problems.append(f"{key}: max ratio {value:.6g} exceeds ledger {ledger[key]:.6g} by more than {tolerance:.0%}")
    return problems


@dataclass
class CheckOutcome:
    result: SuiteResult
    failures: List[str]
    regressions: List[str]
    csv_path: Path
    summary_path: Path


def run_check(config: RunConfig, progress_callback: ProgressCallback = None) -> CheckOutcome:
    """Run the configured suite, write reports and compare against (or calibrate) the ledger"""
    os.makedirs(config.output_dir, exist_ok=True)
    result = SuiteRunner(config).run(progress_callback)
    regressions: List[str] = []
    if not result.trivial:
        path = config.ledger_path()
        ledger = load_ledger(path)
        if config.calibrate:
            write_ledger(path, merge_ledger(ledger, result.ledger_entries()))
        elif ledger:
            regressions = ledger_regressions(ledger, result.ledger_entries(), config.tolerance)
        else:
            logger.warning("no constant ledger at %s; regressions are not checked", path)
    csv_path = config.output_path(f"{config.suite}_suite.csv")
    summary_path = config.output_path(f"{config.suite}_summary.json")
    write_csv(csv_path, result.reports)
    summary = write_summary(summary_path, config, result, regressions)
    for problem in summary['failures']:
        logger.warning("check failure: %s", problem)
    for problem in regressions:
        logger.warning("ledger regression: %s", problem)
    return CheckOutcome(result, summary['failures'], regressions, csv_path, summary_path)


@dataclass
class SweepTask:
    """One (case, exponent cell, depth) search of a sweep"""

    case_id: str
    params: Dict
    depth: int
    family: Dict
    trials: int
    seed: int
    climb: bool = True


def run_sweep_task(task: SweepTask) -> IneqReport:
    params = IneqParams.from_dict(task.params)
    return maximize_ratio(task.case_id, params, task.depth, WeightFamily.from_dict(task.family), task.trials,
                          task.seed, climb=task.climb)


def _sweep_progress(progress_callback: ProgressCallback, task: SweepTask, report: IneqReport) -> None:
    if progress_callback:
        progress_callback(f"{task.case_id} depth {task.depth}: worst ratio {report.ratio:.6g}")


def run_sweep(config: RunConfig, progress_callback: ProgressCallback = None) -> Path:
    """Worst ratio per case, cell and depth after random search and hill-climbing; plot-ready CSV"""
    os.makedirs(config.output_dir, exist_ok=True)
    config.weight_family()
    tasks = [SweepTask(case_id, params.to_dict(), depth, config.family, config.trials, config.seed, config.climb)
             for case_id in config.cases
             for params in config.case_cells(case_id)
             for depth in config.depth_list()]
    rows: List[IneqReport] = []
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for task, report in zip(tasks, pool.map(run_sweep_task, tasks)):
                rows.append(report)
                _sweep_progress(progress_callback, task, report)
    else:
        for task in tasks:
            rows.append(run_sweep_task(task))
            _sweep_progress(progress_callback, task, rows[-1])
    path = config.output_path("sweep.csv")
    write_csv(path, rows)
    return path


@dataclass
class SharpnessOutcome:
    slope: float
    r2: float
    low_information: bool
    passed: bool
    path: Path


def run_sharpness(config: RunConfig, progress_callback: ProgressCallback = None) -> List[SharpnessOutcome]:
    """Log-log slope of lhs against rhs along a family sweep, per selected case (first cell, first depth)"""
    os.makedirs(config.output_dir, exist_ok=True)
    family = config.weight_family()
    depth = config.depth_list()[0]
    outcomes = []
    for case_id in config.cases:
        params = config.case_cells(case_id)[0]
        sweep = sharpness_sweep(case_id, params, depth, family, config.sweep_values)
        path = config.output_path(f"sharpness_{case_id}.csv")
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['case', 'value', 'log_rhs', 'log_lhs'])
            for value, (x, y) in zip(sweep.values, sweep.points):
                writer.writerow([case_id, format_float(value), format_float(x), format_float(y)])
        fit = sweep.fit
        passed = fit.slope <= 1.0 + config.tolerance
        if progress_callback:
            progress_callback(f"{case_id}: slope {fit.slope:.4f}, r^2 {fit.r2:.4f}"
                              + (" (two points: low information)" if fit.low_information else ""))
        outcomes.append(SharpnessOutcome(fit.slope, fit.r2, fit.low_information, passed, path))
    return outcomes
