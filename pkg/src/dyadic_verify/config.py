"""
Run configuration: a single JSON file, overridden by command-line flags and
validated as a whole before anything runs.
"""

import json
import logging
import os
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional

from .checkers import CASES, DEFAULT_CELLS, REGISTRY_ORDER, IneqParams, get_case
from .errors import ConfigError, DyadicError
from .search import WeightFamily

logger = logging.getLogger(__name__)

OUTPUT_ENV = "DYADIC_VERIFY_OUTPUT"
DEFAULT_OUTPUT = "results"
COMMANDS = ("check", "convert", "sharpness", "sweep")
SUITES = ("trivial", "core")
CORE_DEPTHS = [4, 6, 8, 10, 12]
TRIVIAL_DEPTHS = [1, 3, 6]
MAX_DEPTH = 14

_RANGE = re.compile(r'^\s*(\d+)\s*\.\.\s*(\d+)\s*$')


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT)


def parse_depths(text: str, step: int = 1) -> List[int]:
    """"4..8" -> [4, 6, 8] with step 2; a comma list "3,5" is taken as given"""
    match = _RANGE.match(text)
    if match:
        low, high = int(match.group(1)), int(match.group(2))
        if low > high:
            raise ConfigError(f"depth range {text!r} is empty")
        return list(range(low, high + 1, step))
    try:
        return [int(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise ConfigError(f"depths must look like 'a..b' or 'a,b,c', got {text!r}")


@dataclass
class RunConfig:
    """Everything a run depends on; together with the seed it fixes every output byte"""

    command: str = "check"
    suite: str = "core"
    cases: List[str] = field(default_factory=lambda: [c for c in REGISTRY_ORDER])
    depths: Optional[List[int]] = None
    cells: Dict[str, List[Dict]] = field(default_factory=dict)
    family: Dict = field(default_factory=lambda: {"kind": "cascade", "sigma": 0.5})
    trials: int = 300
    seed: Optional[int] = None
    jobs: int = 1
    output_dir: str = field(default_factory=default_output_dir)
    ledger: Optional[str] = None
    calibrate: bool = False
    climb: bool = True
    sweep_values: List[float] = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    tolerance: float = 0.05

    @classmethod
    def from_dict(cls, data: Dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("run configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration fields: {', '.join(sorted(unknown))}")
        config = cls(**data)
        if isinstance(config.depths, str):
            config.depths = parse_depths(config.depths, 2 if config.suite == "core" else 1)
        return config

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        with open(path, 'r', encoding='utf-8') as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}: not valid JSON ({e})")
        logger.info("loaded run configuration %s", path)
        return cls.from_dict(data)

    def override(self, **flags) -> "RunConfig":
        """Apply command-line flags that were actually given (None means absent)"""
        for name, value in flags.items():
            if value is None:
                continue
            if name == 'depths' and isinstance(value, str):
                value = parse_depths(value, 2 if (flags.get('suite') or self.suite) == "core" else 1)
            if not hasattr(self, name):
                raise ConfigError(f"unknown configuration field {name!r}")
            setattr(self, name, value)
        return self

    def depth_list(self) -> List[int]:
        if self.depths is not None:
            return list(self.depths)
        return list(TRIVIAL_DEPTHS if self.suite == "trivial" else CORE_DEPTHS)

    def weight_family(self) -> WeightFamily:
        try:
            return WeightFamily.from_dict(self.family)
        except TypeError as e:
            raise ConfigError(f"bad weight family: {e}")

    def case_cells(self, case_id: str) -> List[IneqParams]:
        raw = self.cells.get(case_id, DEFAULT_CELLS[case_id])
        if self.suite == "trivial" and case_id not in self.cells:
            raw = raw[:1]
        return [IneqParams.from_dict(cell) for cell in raw]

    def validate(self, randomized: bool = True) -> None:
        """Check every field and every exponent cell; raises the first violation found"""
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {', '.join(COMMANDS)}")
        if self.suite not in SUITES:
            raise ConfigError(f"suite must be one of {', '.join(SUITES)}")
        if not self.cases:
            raise ConfigError("no cases selected")
        for case_id in self.cases:
            if case_id not in CASES:
                raise ConfigError(f"unknown case {case_id!r}; known: {', '.join(REGISTRY_ORDER)}")
        depths = self.depth_list()
        if not depths or any(not isinstance(d, int) or not 0 <= d <= MAX_DEPTH for d in depths):
            raise ConfigError(f"depths must be integers in [0, {MAX_DEPTH}], got {depths}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials}")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError(f"jobs must be a positive integer, got {self.jobs}")
        if not self.tolerance >= 0:
            raise ConfigError("tolerance must be nonnegative")
        if randomized and self.seed is None:
            raise ConfigError("a randomized run needs an explicit --seed")
        self.weight_family()
        for case_id in self.cases:
            case = get_case(case_id)
            try:
                for params in self.case_cells(case_id):
                    case.validate(params)
            except (DyadicError, TypeError, ValueError) as e:
                raise ConfigError(f"{case_id}: {e}")

    def to_dict(self) -> Dict:
        return asdict(self)

    def output_path(self, name: str) -> Path:
        return Path(self.output_dir) / name

    def ledger_path(self) -> Path:
        return Path(self.ledger) if self.ledger else self.output_path(f"ledger_{self.suite}.json")
