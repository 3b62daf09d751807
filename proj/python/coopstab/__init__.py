"""Python bindings for the coopstab simulation and certification library."""

import json

from . import _core
from ._core import (
    BlowUpError,
    ConfigError,
    ValidationError,
    build_h_matrix,
    control,
    diagonal_certificate,
    is_m_matrix,
    leader_reachable,
    lorenz_rhs,
    min_dwell_time,
    periodic_two_phase,
    validate_adt,
)

__all__ = [
    "BlowUpError",
    "ConfigError",
    "ValidationError",
    "benchmark_config",
    "build_h_matrix",
    "config_hash",
    "control",
    "diagonal_certificate",
    "is_m_matrix",
    "leader_reachable",
    "lorenz_rhs",
    "min_dwell_time",
    "periodic_two_phase",
    "regulation_demo_config",
    "run_experiment",
    "run_regulation",
    "validate_adt",
]


def benchmark_config():
    return json.loads(_core.benchmark_config())


def regulation_demo_config():
    return json.loads(_core.regulation_demo_config())


def config_hash(config):
    return _core.config_hash(json.dumps(config))


def run_experiment(config):
    """Run a closed-loop experiment; returns (report dict, CSV text)."""
    report, csv = _core.run_experiment(json.dumps(config))
    return json.loads(report), csv


def run_regulation(config):
    report, csv = _core.run_regulation(json.dumps(config))
    return json.loads(report), csv
