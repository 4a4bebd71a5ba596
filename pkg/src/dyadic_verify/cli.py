"""
Command-line driver.

    dyadic-verify check --suite trivial
    dyadic-verify check --suite core --seed 7 --depth 4..8 --trials 100
    dyadic-verify convert instance.json --lambda 2
    dyadic-verify evaluate instance.json --case CONCAVE --weights w1,w2 --lambdas lam --allocation allocation.json
    dyadic-verify sharpness --case MAX_STRONG --family power
    dyadic-verify sweep --case KEY --seed 1 --depth 4..6

Exit codes: 0 pass, 1 check failure, 2 invalid input, 3 ledger regression, 4 I/O.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .characteristics import carleson_norm
from .checkers import DEFAULT_CELLS, IneqParams, Instance, evaluate_inequality, get_case
from .config import RunConfig, default_output_dir
from .errors import (AllocationError, CarlesonBoundError, ConfigError, InvalidCubeError, InvalidFunctionError,
                     ParameterError)
from .instances import load_allocation, load_instance, save_allocation
from .runner import SuiteResult, run_check, run_sharpness, run_sweep, write_csv
from .search import SWEEP_FIELD
from .sparse import carleson_to_sparse

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_REGRESSION = 3
EXIT_IO = 4

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)


def parse_family(text: str) -> dict:
    """"power:0.5" -> {"kind": "power", "a": 0.5}; a bare kind keeps its defaults"""
    kind, _, value = text.partition(':')
    family = {"kind": kind}
    if value:
        if kind not in SWEEP_FIELD:
            raise ConfigError(f"family {kind!r} takes no parameter")
        try:
            family[SWEEP_FIELD[kind]] = float(value)
        except ValueError:
            raise ConfigError(f"bad family parameter {value!r}")
    return family


def _split(text: Optional[str]) -> Optional[List[str]]:
    if text is None:
        return None
    return [part.strip() for part in text.split(',') if part.strip()]


def _floats(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    try:
        return [float(x) for x in _split(text)]
    except ValueError:
        raise ConfigError(f"expected a comma list of numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadic-verify",
        description="Numerical verification of weighted estimates for dyadic maximal and sparse operators",
    )
    parser.add_argument('-v', '--verbose', action='count', default=0, help="-v for progress, -vv for debug output")
    sub = parser.add_subparsers(dest='command', required=True)

    def run_options(p, cases_default_help):
        p.add_argument('--config', help="JSON run configuration; flags override its fields")
        p.add_argument('--case', '--cases', dest='cases', help=f"comma list of cases ({cases_default_help})")
        p.add_argument('--depth', '--depths', dest='depths', help="depth range 'a..b' or list 'a,b'")
        p.add_argument('--seed', type=int, help="master seed (required for randomized runs)")
        p.add_argument('--trials', type=int, help="random instances per case, cell and depth")
        p.add_argument('--family', help="weight family: cascade[:sigma], power[:a], spike[:height], constant")
        p.add_argument('--output', dest='output_dir', help=f"output directory (default {default_output_dir()})")
        p.add_argument('--tolerance', type=float)
        p.add_argument('--jobs', type=int, help="worker processes")

    check = sub.add_parser('check', help="run registry suites and compare with the constant ledger")
    run_options(check, "default: all")
    check.add_argument('--suite', choices=['trivial', 'core'])
    check.add_argument('--ledger', help="constant ledger file")
    check.add_argument('--calibrate', action='store_true', default=None, help="write the ledger instead of checking it")

    convert = sub.add_parser('convert', help="Carleson sequence to a disjoint sparse allocation")
    convert.add_argument('instance', help="instance JSON file")
    convert.add_argument('--lambda', dest='Lambda', type=float, help="Carleson bound (default: the norm itself)")
    convert.add_argument('--tau', default='tau', help="name of the sequence to convert")
    convert.add_argument('--output', dest='output', help="allocation JSON (default: <output dir>/allocation.json)")

    evaluate = sub.add_parser('evaluate', help="evaluate one registry case on the entries of an instance file")
    evaluate.add_argument('instance', help="instance JSON file")
    evaluate.add_argument('--case', required=True, help="registry case")
    evaluate.add_argument('--cell', help="exponent cell as JSON (default: the case's default cells the instance fits)")
    evaluate.add_argument('--weights', required=True, help="comma list of weight names")
    evaluate.add_argument('--functions', help="comma list of test function names")
    evaluate.add_argument('--tau', default='tau', help="name of the Carleson sequence")
    evaluate.add_argument('--lambdas', help="comma list of cube sequence names")
    evaluate.add_argument('--allocation', help="allocation JSON with the disjoint sets E(Q)")
    evaluate.add_argument('--output', help="CSV of the reports")

    sharp = sub.add_parser('sharpness', help="log-log slope of lhs against rhs along a weight family sweep")
    run_options(sharp, "default: MAX_STRONG")
    sharp.add_argument('--values', help="comma list of family parameters to sweep")

    sweep = sub.add_parser('sweep', help="worst ratio per case and depth via random search and hill-climbing")
    run_options(sweep, "default: all")
    sweep.add_argument('--no-climb', dest='climb', action='store_false', default=None)
    return parser


def load_config(args) -> RunConfig:
    config = RunConfig.from_file(args.config) if getattr(args, 'config', None) else RunConfig()
    config.command = args.command
    if args.command == 'sharpness' and not getattr(args, 'config', None):
        config.cases = ["MAX_STRONG"]
        config.family = {"kind": "power"}
        config.depths = [6]
    config.override(
        suite=getattr(args, 'suite', None),
        cases=_split(getattr(args, 'cases', None)),
        depths=getattr(args, 'depths', None),
        seed=getattr(args, 'seed', None),
        trials=getattr(args, 'trials', None),
        family=parse_family(args.family) if getattr(args, 'family', None) else None,
        output_dir=getattr(args, 'output_dir', None),
        tolerance=getattr(args, 'tolerance', None),
        jobs=getattr(args, 'jobs', None),
        ledger=getattr(args, 'ledger', None),
        calibrate=getattr(args, 'calibrate', None),
        climb=getattr(args, 'climb', None),
        sweep_values=_floats(getattr(args, 'values', None)),
    )
    return config


def cmd_check(config: RunConfig) -> int:
    config.validate(randomized=config.suite != "trivial")
    outcome = run_check(config, progress_callback=logger.info)
    print(f"{len(outcome.result.reports)} evaluations -> {outcome.csv_path}")
    if outcome.failures:
        print(f"FAILED: {len(outcome.failures)} check failures (see {outcome.summary_path})")
        return EXIT_FAILURE
    if outcome.regressions:
        print(f"REGRESSION: {len(outcome.regressions)} cells exceed the constant ledger")
        return EXIT_REGRESSION
    print("PASSED")
    return EXIT_PASS


def cmd_convert(args, config: RunConfig) -> int:
    instance = load_instance(args.instance)
    tau = instance.sequence(args.tau)
    norm = carleson_norm(instance.grid, tau)
    Lambda = args.Lambda if args.Lambda is not None else norm if norm > 0 else 1.0
    allocation = carleson_to_sparse(instance.grid, tau, Lambda)
    allocation.validate()
    output = args.output or str(config.output_path("allocation.json"))
    if not args.output:
        Path(config.output_dir).mkdir(parents=True, exist_ok=True)
    entries = save_allocation(output, allocation, Lambda, norm)
    print(f"{len(entries)} cubes allocated (Carleson norm {norm:.6g}, Lambda {Lambda:.6g}) -> {output}")
    return EXIT_PASS


def _evaluate_cells(case_id: str, instance: Instance, cell: Optional[str]) -> List[IneqParams]:
    if cell is not None:
        try:
            raw = json.loads(cell)
        except json.JSONDecodeError as e:
            raise ConfigError(f"--cell is not valid JSON: {e}")
        if not isinstance(raw, dict):
            raise ConfigError("--cell must be a JSON object")
        return [IneqParams.from_dict(raw)]
    case = get_case(case_id)
    cells = []
    for raw in DEFAULT_CELLS[case_id]:
        params = IneqParams.from_dict(raw)
        try:
            case.check_instance(instance, params)
        except InvalidFunctionError:
            continue
        cells.append(params)
    if not cells:
        raise ConfigError(f"no default {case_id} cell fits the instance; pass --cell")
    return cells


def cmd_evaluate(args) -> int:
    source = load_instance(args.instance)
    disjoint = load_allocation(args.allocation, source.grid) if args.allocation else None
    instance = source.to_instance(_split(args.weights), _split(args.functions) or (), args.tau,
                                  _split(args.lambdas) or (), disjoint=disjoint)
    reports = [evaluate_inequality(args.case, instance, params)
               for params in _evaluate_cells(args.case, instance, args.cell)]
    for r in reports:
        print(f"{r.case} m={r.m} cell {r.params_digest}: lhs {r.lhs:.6g}, rhs {r.rhs:.6g}, ratio {r.ratio:.6g}")
    if args.output:
        write_csv(Path(args.output), reports)
    failures = SuiteResult(reports).failures()
    for problem in failures:
        print(f"FAILED: {problem}")
    return EXIT_FAILURE if failures else EXIT_PASS


def cmd_sharpness(config: RunConfig) -> int:
    config.validate(randomized=False)
    outcomes = run_sharpness(config, progress_callback=logger.info)
    code = EXIT_PASS
    for case_id, outcome in zip(config.cases, outcomes):
        note = " (low information: two points)" if outcome.low_information else ""
        print(f"{case_id}: slope {outcome.slope:.6f}, r^2 {outcome.r2:.6f}{note} -> {outcome.path}")
        if not outcome.passed:
            print(f"{case_id}: slope exceeds 1 + {config.tolerance}")
            code = EXIT_FAILURE
    return code


def cmd_sweep(config: RunConfig) -> int:
    config.validate()
    path = run_sweep(config, progress_callback=logger.info)
    print(f"sweep written to {path}")
    return EXIT_PASS


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        if args.command == 'evaluate':
            return cmd_evaluate(args)
        config = load_config(args) if args.command != 'convert' else RunConfig(command='convert')
        if args.command == 'check':
            return cmd_check(config)
        if args.command == 'convert':
            return cmd_convert(args, config)
        if args.command == 'sharpness':
            return cmd_sharpness(config)
        return cmd_sweep(config)
    except (CarlesonBoundError, ParameterError, ConfigError, InvalidFunctionError, InvalidCubeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except AllocationError as e:
        print(f"allocation failed: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except (OSError, json.JSONDecodeError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
