"""
FIDE Solver - Configuration Module
==================================

This module provides centralized access to solver and study settings.
Defaults live here; a JSON settings file named by the FIDE_SOLVER_SETTINGS
environment variable may override any of them. Command-line flags override
both.

Functions:
- get_solver_config(): Settings for a single solve
- get_study_config(): Settings for convergence studies and certificates
"""

import json
import os

from fide_solver.logger import SolverLogger

SETTINGS_ENV_VAR = "FIDE_SOLVER_SETTINGS"

SOLVER_DEFAULTS = {
    "criterion": "successive",
    "tol": 1e-9,
    "n": 100,
    "max_iterations": 100,
    "divergence_threshold": 1e12,
    "validation_samples": 1000,
    "log_level": "WARNING",
}

STUDY_DEFAULTS = {
    "n_list": [50, 100, 150, 200, 300, 400, 500, 800, 1000],
    "workers": 4,
    "order_error_floor": 1e-12,
    "certify_n": 1000,
}


# ----------------------------
# Settings File Access
# ----------------------------

def _read_settings_file():
    path = os.environ.get(SETTINGS_ENV_VAR)
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        if not isinstance(data, dict):
            raise ValueError(f"expected a JSON object, got {type(data).__name__}")
        return data
    except Exception as e:
        SolverLogger.log_error(f"Error reading settings file {path}", e, log_type="Config")
        return {}


def _merge(defaults, overrides):
    merged = dict(defaults)
    for key, value in overrides.items():
        if key in merged:
            merged[key] = value
    return merged


# ----------------------------
# Core Config Access
# ----------------------------

def get_solver_config():
    """
    Retrieve settings for a single solve.

    Returns a dictionary containing:
    - criterion: default stopping criterion ("successive" or "exact-h2")
    - tol: tolerance of the successive-Psi criterion
    - n: default number of grid subintervals
    - max_iterations: iteration cap
    - divergence_threshold: max-norm of Psi above which a solve aborts
    - validation_samples: sample count used by problem validation
    - log_level: level of the package logger

    Returns:
        dict: Solver configuration dictionary

    Note:
        Returns default values if the settings file cannot be read.
    """
    overrides = _read_settings_file()
    unknown = sorted(set(overrides) - set(SOLVER_DEFAULTS) - set(STUDY_DEFAULTS))
    if unknown:
        SolverLogger.log("Config", "Info", "Ignoring unknown settings", details={"keys": unknown})
    return _merge(SOLVER_DEFAULTS, overrides)


def get_study_config():
    """
    Retrieve settings for convergence studies and certificates.

    Returns:
        dict: n_list, workers, order_error_floor and certify_n
    """
    config = _merge(STUDY_DEFAULTS, _read_settings_file())
    config["n_list"] = [int(n) for n in config["n_list"]]
    return config
