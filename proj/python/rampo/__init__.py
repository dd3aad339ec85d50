"""CEGAR search for cyber-kinetic vulnerabilities of controller code."""

import json

from ._core import (
    ConfigError,
    Controller,
    OutOfDomain,
    RampoError,
    SyntaxError,
    UnknownChannel,
    negate,
    replay,
    robustness,
    run_to_dir,
    simulate_open,
)
from ._core import run_report as _run_report

__all__ = [
    "ConfigError",
    "Controller",
    "OutOfDomain",
    "RampoError",
    "SyntaxError",
    "UnknownChannel",
    "negate",
    "path_table",
    "range_table",
    "replay",
    "robustness",
    "run",
    "run_to_dir",
    "simulate_open",
]


def path_table(controller):
    return json.loads(controller.table_json())


def range_table(controller):
    return json.loads(controller.ranges_json())


def run(config, **overrides):
    """Runs the search for a config file and returns the report as a dict."""
    return json.loads(_run_report(str(config), **overrides))
