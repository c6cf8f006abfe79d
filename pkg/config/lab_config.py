"""
Lab configuration: the quaternion algebra, its order basis and the default run parameters.
Loaded from a JSON file with rationals written as "num/den" strings.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from config.settings import Config
from models.quaternion import AlgebraSpec, OrderBasis
from services.quaternion_core import verify_order
from utils.validators import ConfigurationError, LabError, parse_primes, parse_rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepDefaults:
    step: float = 1e-3
    L_values: Tuple[int, ...] = (8, 64, 512)


@dataclass(frozen=True)
class PlannerDefaults:
    C: float = 1.0
    start: float = 2.0
    factor: float = 1.25
    steps: int = 60


@dataclass(frozen=True)
class LabConfig:
    """Everything a run needs to know about the arithmetic setting."""

    algebra: AlgebraSpec
    basis: OrderBasis
    ramified_primes: Tuple[int, ...]
    primes: Tuple[int, ...]
    sweep: SweepDefaults = field(default_factory=SweepDefaults)
    planner: PlannerDefaults = field(default_factory=PlannerDefaults)
    tree_radius: int = 8
    window_nodes: int = 1024
    source: str = ''
    path: str = ''

    def to_dict(self) -> Dict:
        return {
            'algebra': self.algebra.to_dict(),
            'basis': self.basis.to_dict(),
            'ramified_primes': list(self.ramified_primes),
            'primes': list(self.primes),
            'sweep': {'step': self.sweep.step, 'L_values': list(self.sweep.L_values)},
            'planner': {'C': self.planner.C, 'start': self.planner.start,
                        'factor': self.planner.factor, 'steps': self.planner.steps},
            'tree_radius': self.tree_radius,
            'window_nodes': self.window_nodes,
            'source': self.source,
        }


def _read(path: str) -> Dict:
    if not os.path.exists(path):
        raise ConfigurationError(f"Lab config not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"Lab config {path} is not valid JSON: {exc}")


def parse_lab_config(raw: Dict, path: str = '') -> LabConfig:
    """Build a LabConfig from decoded JSON without checking the order axioms."""
    try:
        algebra_raw = raw['algebra']
        algebra = AlgebraSpec(parse_rational(algebra_raw['a']), parse_rational(algebra_raw['b']))
        rows = raw['order']['basis']
        basis = OrderBasis(
            tuple(tuple(parse_rational(entry) for entry in row) for row in rows),
            raw['order'].get('source', ''),
        )
        ramified = tuple(sorted(int(p) for p in raw.get('ramified_primes', [])))
        primes = parse_primes(raw.get('primes', [5, 7]))
        sweep_raw = raw.get('sweep', {})
        planner_raw = raw.get('planner', {})
        sweep = SweepDefaults(float(sweep_raw.get('step', 1e-3)),
                              tuple(int(v) for v in sweep_raw.get('L_values', (8, 64, 512))))
        planner = PlannerDefaults(float(planner_raw.get('C', 1.0)),
                                  float(planner_raw.get('start', 2.0)),
                                  float(planner_raw.get('factor', 1.25)),
                                  int(planner_raw.get('steps', 60)))
    except ConfigurationError:
        raise
    except (KeyError, TypeError, ValueError, LabError) as exc:
        raise ConfigurationError(f"Malformed lab config {path or '<memory>'}: {exc}")

    overlap = sorted(set(primes) & set(ramified))
    if overlap:
        raise ConfigurationError(f"Default primes {overlap} are declared ramified")

    return LabConfig(
        algebra=algebra,
        basis=basis,
        ramified_primes=ramified,
        primes=primes,
        sweep=sweep,
        planner=planner,
        tree_radius=int(raw.get('tree_radius', 8)),
        window_nodes=int(raw.get('window_nodes', 1024)),
        source=str(raw['order'].get('source', '')),
        path=path,
    )


def load_lab_config(path: Optional[str] = None, validate: bool = True) -> LabConfig:
    """
    Load a lab config from JSON.

    Args:
        path: File path (defaults to Config.LAB_CONFIG)
        validate: Run the order checker and raise ConfigurationError when it fails

    Returns:
        LabConfig
    """
    path = path or Config.LAB_CONFIG
    lab = parse_lab_config(_read(path), path)
    if validate:
        report = verify_order(lab.algebra, lab.basis)
        if not report.valid:
            raise ConfigurationError(f"Order basis in {path} fails verification: {report.summary()}")
    logger.info(f"Loaded lab config {path}")
    return lab


@lru_cache(maxsize=4)
def get_lab_config(path: Optional[str] = None) -> LabConfig:
    """Validated lab config, cached per path."""
    return load_lab_config(path, validate=True)


def load_calibration(path: Optional[str] = None) -> Dict:
    """Committed calibration constants."""
    return _read(path or Config.CALIBRATION_FILE)


def calibration_envelope(calibration: Dict, x: float, L: int, primes: List[int]) -> Optional[float]:
    """
    Committed technical-sum ceiling for exponent x, or None when x was never calibrated.
    At x = 0 the ceiling is multiplied by (L+1)^|P|.
    """
    table = calibration['technical_sum']
    per_prime = table['per_prime'].get(format(float(x), 'g'))
    if per_prime is None:
        return None
    ceiling = float(per_prime) ** len(primes)
    if x == 0 and table.get('zero_branch_grows_with_L', True):
        ceiling *= (L + 1) ** len(primes)
    return ceiling
