"""
Tests for the suite runner: trivial suite, reproducible CSV output,
depth stability and the constant ledger
"""

import sys
import os

# Enable local runs without installation: add src to path
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
SRC_DIR = os.path.join(PROJECT_ROOT, 'src')
if SRC_DIR not in sys.path:
    sys.path.insert(0, SRC_DIR)

import csv
import json

from dyadic_verify.checkers import IneqReport, evaluate_inequality
from dyadic_verify.config import RunConfig
from dyadic_verify.runner import (CSV_COLUMNS, SuiteResult, SuiteRunner, format_float, ledger_key,
                                  ledger_regressions, merge_ledger, run_check, run_sharpness, run_sweep)
from dyadic_verify.search import random_instance


def _core(tmp_path, **kwargs):
    settings = dict(suite="core", cases=["MAX_WEAK"], depths=[3], trials=4, seed=7, output_dir=str(tmp_path))
    settings.update(kwargs)
    return RunConfig(**settings)


def _rows(path):
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.reader(f))


def _report(case, depth, ratio, digest="abc"):
    return IneqReport(case, ratio, 1.0, ratio, 0, depth, "cascade", 2, digest)


def test_format_float():
    assert format_float(0.1) == '0.10000000000000001'
    assert format_float(1.0) == '1'
    assert format_float(float('inf')) == 'inf'


def test_trivial_suite_passes(tmp_path):
    config = RunConfig(suite="trivial", output_dir=str(tmp_path))
    config.validate(randomized=False)
    outcome = run_check(config)
    assert outcome.failures == []
    assert outcome.regressions == []
    # one evaluation per case and depth
    assert len(outcome.result.reports) == len(config.cases) * len(config.depth_list())
    assert not (tmp_path / "ledger_trivial.json").exists()
    summary = json.loads(outcome.summary_path.read_text())
    assert summary['suite'] == "trivial"
    assert summary['failures'] == []
    assert "A_WEAK_PROBE" in summary['report_only']


def test_core_rows_and_reproducibility(tmp_path):
    first = run_check(_core(tmp_path / "a"))
    second = run_check(_core(tmp_path / "b"))
    rows = _rows(first.csv_path)
    assert rows[0] == CSV_COLUMNS
    # three exponent cells, one depth, four trials
    assert len(rows) == 1 + 12
    assert first.csv_path.read_bytes() == second.csv_path.read_bytes()


def test_seed_column_regenerates_the_instance(tmp_path):
    outcome = run_check(_core(tmp_path))
    rows = _rows(outcome.csv_path)
    assert {row[1] for row in rows[1:]} == {"7:0", "7:1", "7:2", "7:3"}
    report = outcome.result.reports[-1]
    master, trial = (int(x) for x in report.seed_label.split(':'))
    params = next(p for p in _core(tmp_path).case_cells("MAX_WEAK") if p.digest() == report.params_digest)
    family = _core(tmp_path).weight_family()
    again = evaluate_inequality("MAX_WEAK", random_instance("MAX_WEAK", params, 3, family, master, trial), params)
    assert again.lhs == report.lhs
    assert again.rhs == report.rhs


def test_seed_changes_output(tmp_path):
    a = run_check(_core(tmp_path / "a"))
    b = run_check(_core(tmp_path / "b", seed=8))
    assert a.csv_path.read_bytes() != b.csv_path.read_bytes()


def test_parallel_run_matches_serial(tmp_path):
    serial = run_check(_core(tmp_path / "serial"))
    parallel = run_check(_core(tmp_path / "parallel", jobs=2))
    assert serial.csv_path.read_bytes() == parallel.csv_path.read_bytes()


def test_progress_callback(tmp_path):
    messages = []
    SuiteRunner(_core(tmp_path)).run(progress_callback=messages.append)
    assert messages[0].startswith("Starting core suite")
    assert messages[-1] == "Suite completed: 12 evaluations"
    assert any("MAX_WEAK depth 3" in m for m in messages)


def test_ledger_calibrate_then_check(tmp_path):
    calibrated = run_check(_core(tmp_path, calibrate=True))
    ledger_file = tmp_path / "ledger_core.json"
    assert ledger_file.exists()
    ledger = json.loads(ledger_file.read_text())
    assert set(ledger) == set(calibrated.result.ledger_entries())

    again = run_check(_core(tmp_path))
    assert again.regressions == []

    ledger_file.write_text(json.dumps({key: value / 10 for key, value in ledger.items() if value > 0}))
    regressed = run_check(_core(tmp_path))
    assert regressed.regressions
    assert "exceeds ledger" in regressed.regressions[0]


def test_ledger_regressions_respect_tolerance():
    key = ledger_key("KEY", 2, "abc")
    assert ledger_regressions({key: 1.0}, {key: 1.04}, 0.05) == []
    assert len(ledger_regressions({key: 1.0}, {key: 1.06}, 0.05)) == 1
    # cells missing from the ledger are only warned about
    assert ledger_regressions({}, {key: 9.0}, 0.05) == []


def test_merge_ledger_keeps_maxima():
    assert merge_ledger({"a": 1.0, "b": 3.0}, {"a": 2.0, "b": 1.0, "c": 0.5}) == {"a": 2.0, "b": 3.0, "c": 0.5}


def test_depth_stability_failure():
    result = SuiteResult([_report("MAX_WEAK", 2, 1.0), _report("MAX_WEAK", 4, 1.6)])
    problems = result.failures()
    assert len(problems) == 1
    assert "depth 4" in problems[0]
    stable = SuiteResult([_report("MAX_WEAK", 2, 1.0), _report("MAX_WEAK", 4, 1.4)])
    assert stable.failures() == []


def test_report_only_cases_are_not_graded():
    result = SuiteResult([
        IneqReport("A_WEAK_PROBE", 1.0, 0.0, float('inf'), 0, 3, "cascade", 2, "x", report_only=True),
        _report("A_WEAK_PROBE", 2, 1.0, "x"),
    ])
    assert result.failures() == []
    assert result.ledger_entries() == {}


def test_hard_failure_is_reported():
    result = SuiteResult([IneqReport("KEY", 1.0, 0.0, float('inf'), 5, 3, "cascade", 2, "x")])
    assert "rhs = 0" in result.failures()[0]


def test_trivial_mismatch_is_reported():
    key = ledger_key("MAX_WEAK", 2, "abc")
    result = SuiteResult([_report("MAX_WEAK", 3, 1.5)], trivial=True, expected={key: 1.0})
    assert "expected 1.0" in result.failures()[0]


def test_sweep_writes_one_row_per_cell_and_depth(tmp_path):
    config = _core(tmp_path, command="sweep", cases=["KEY"], trials=2, climb=False)
    path = run_sweep(config)
    rows = _rows(path)
    assert len(rows) == 1 + 3


def test_sharpness_writes_points(tmp_path):
    config = RunConfig(command="sharpness", cases=["MAX_STRONG"], depths=[5], family={"kind": "power"},
                       sweep_values=[0.2, 0.5, 0.8], output_dir=str(tmp_path))
    outcome, = run_sharpness(config)
    rows = _rows(outcome.path)
    assert rows[0] == ['case', 'value', 'log_rhs', 'log_lhs']
    assert len(rows) == 4
    assert not outcome.low_information
