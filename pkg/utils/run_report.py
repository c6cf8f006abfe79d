"""
Run reports for CLI commands and the selftest.
Collects parameters, results and one verdict per invariant a command asserts.
"""

import json
import logging
import math
import time
from dataclasses import dataclass, field
from functools import wraps
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


@dataclass
class Verdict:
    name: str
    passed: bool
    detail: str = ''
    level: str = 'check'

    def to_dict(self) -> Dict:
        return {'name': self.name, 'passed': self.passed, 'detail': self.detail, 'level': self.level}


@dataclass
class RunReport:
    """Outcome of one command."""

    command: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    results: Dict[str, Any] = field(default_factory=dict)
    verdicts: List[Verdict] = field(default_factory=list)
    wall_time: Optional[float] = None

    def add_pass(self, name: str, detail: str = '') -> None:
        self.verdicts.append(Verdict(name, True, detail))
        logger.info(f"✅ {name} {detail}".rstrip())

    def add_fail(self, name: str, detail: str = '') -> None:
        self.verdicts.append(Verdict(name, False, detail))
        logger.error(f"❌ {name} {detail}".rstrip())

    def add_warning(self, name: str, detail: str = '') -> None:
        self.verdicts.append(Verdict(name, True, detail, level='warning'))
        logger.warning(f"⚠️  {name} {detail}".rstrip())

    def check(self, condition: bool, name: str, detail: str = '') -> bool:
        if condition:
            self.add_pass(name, detail)
        else:
            self.add_fail(name, detail)
        return bool(condition)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def first_failure(self) -> Optional[Verdict]:
        return next((v for v in self.verdicts if not v.passed), None)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_dict(self, include_timing: bool = False) -> Dict:
        failure = self.first_failure()
        payload = {
            'command': self.command,
            'parameters': self.parameters,
            'results': self.results,
            'verdicts': [v.to_dict() for v in self.verdicts],
            'passed': self.passed,
            'first_failure': failure.name if failure else None,
        }
        if include_timing and self.wall_time is not None:
            payload['wall_time'] = round(self.wall_time, 6)
        return payload


def timed(command: str):
    """
    Decorator recording the wall time of a function returning a RunReport.

    Usage:
        @timed('selftest')
        def run_selftest(...):
            ...
    """
    def decorator(f):
        @wraps(f)
        def decorated_function(*args, **kwargs):
            started = time.perf_counter()
            report = f(*args, **kwargs)
            elapsed = time.perf_counter() - started
            if isinstance(report, RunReport):
                report.wall_time = elapsed
            logger.info(f"{command} finished in {elapsed:.3f}s")
            return report
        return decorated_function
    return decorator


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, pd.DataFrame):
        return _jsonable(value.to_dict(orient='records'))
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def dumps(payload: Any) -> str:
    """Stable JSON: sorted keys, two-space indent, non-finite floats as strings."""
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False) + '\n'


def frame_to_csv(table: pd.DataFrame) -> str:
    """CSV with a header row and minimal quoting."""
    return table.to_csv(index=False, lineterminator='\n')
