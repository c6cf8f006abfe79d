"""
Shared state and output helpers for the command groups.
"""

import logging
from typing import Optional

import click
import numpy as np
import pandas as pd

from config.lab_config import LabConfig, load_lab_config
from config.settings import Config
from models.plane import PlanePoint
from services.quaternion_core import QuaternionOrder, load_order
from utils.run_report import RunReport, dumps, frame_to_csv
from utils.validators import ValidationError, parse_floats, parse_point, parse_primes

logger = logging.getLogger(__name__)


class LabContext:
    """Global options plus lazily loaded lab configuration."""

    def __init__(self, config_path: Optional[str], seed: int, threads: int,
                 out: Optional[str], timing: bool):
        self.config_path = config_path or Config.LAB_CONFIG
        self.seed = seed
        self.threads = threads
        self.out = out
        self.timing = timing
        self._labs = {}

    def lab(self, validate: bool = True) -> LabConfig:
        if validate not in self._labs:
            self._labs[validate] = load_lab_config(self.config_path, validate=validate)
        return self._labs[validate]

    def order(self) -> QuaternionOrder:
        return load_order(self.lab(), validate=False)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def write(self, text: str) -> None:
        if self.out:
            with open(self.out, 'w', encoding='utf-8', newline='') as handle:
                handle.write(text)
            logger.info(f"Wrote {self.out}")
        else:
            click.echo(text, nl=False)

    def emit_json(self, payload) -> None:
        self.write(dumps(payload))

    def emit_table(self, table: pd.DataFrame) -> None:
        self.write(frame_to_csv(table))

    def emit_report(self, report: RunReport) -> int:
        self.emit_json(report.to_dict(include_timing=self.timing))
        return report.exit_code


pass_lab = click.make_pass_decorator(LabContext)


def save_csv(table: pd.DataFrame, path: Optional[str]) -> None:
    if path:
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            handle.write(frame_to_csv(table))
        logger.info(f"Wrote {path}")


def finish(code: int) -> None:
    """Leave the command with a nonzero exit code when checks failed."""
    if code:
        click.get_current_context().exit(code)


class PointType(click.ParamType):
    name = 'x,y'

    def convert(self, value, param, ctx):
        if isinstance(value, PlanePoint):
            return value
        try:
            return PlanePoint(*parse_point(value))
        except ValidationError as exc:
            self.fail(str(exc), param, ctx)


class PrimesType(click.ParamType):
    name = 'p1,p2,...'

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            return parse_primes(value)
        except ValidationError as exc:
            self.fail(str(exc), param, ctx)


class FloatsType(click.ParamType):
    name = 'v1,v2,...'

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        try:
            return parse_floats(value)
        except ValidationError as exc:
            self.fail(str(exc), param, ctx)


POINT = PointType()
PRIMES = PrimesType()
FLOATS = FloatsType()
