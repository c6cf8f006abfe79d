"""
Shared fixtures for the test suite.
"""

import json
import logging
import os
import sys

import pytest
from click.testing import CliRunner

sys.path.insert(0, os.path.dirname(__file__))

from config.lab_config import load_lab_config
from services.lattice_counting import LatticeCounter
from services.quaternion_core import load_order


@pytest.fixture(scope='session')
def lab():
    return load_lab_config()


@pytest.fixture(scope='session')
def order(lab):
    return load_order(lab)


@pytest.fixture(scope='session')
def counter(order):
    return LatticeCounter(order)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def invoke(runner):
    """Run the CLI and return (result, decoded JSON stdout or None)."""
    from app import cli

    def run(*args, **kwargs):
        result = runner.invoke(cli, list(args), catch_exceptions=False, **kwargs)
        try:
            payload = json.loads(result.stdout)
        except ValueError:
            payload = None
        return result, payload

    return run


@pytest.fixture(autouse=True)
def _drop_cli_log_handlers():
    """CliRunner closes its streams; handlers bound to them must not outlive the test."""
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, '_amplab', False):
            root.removeHandler(handler)
