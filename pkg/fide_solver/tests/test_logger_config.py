import json
import logging

import pytest

from fide_solver.logger import SolverLogger
from fide_solver.solver_config import (
    SETTINGS_ENV_VAR,
    SOLVER_DEFAULTS,
    STUDY_DEFAULTS,
    get_solver_config,
    get_study_config,
)
from fide_solver.solver import StoppingRule


def test_defaults():
    assert get_solver_config() == SOLVER_DEFAULTS
    config = get_study_config()
    assert config == STUDY_DEFAULTS
    assert config is not STUDY_DEFAULTS


def test_settings_file_overrides(tmp_path, monkeypatch):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"tol": 1e-6, "criterion": "exact-h2", "workers": 1, "n_list": ["10", 20]}))
    monkeypatch.setenv(SETTINGS_ENV_VAR, str(path))
    solver_config = get_solver_config()
    assert solver_config["tol"] == 1e-6
    assert solver_config["n"] == SOLVER_DEFAULTS["n"]
    assert "workers" not in solver_config
    study_config = get_study_config()
    assert study_config["workers"] == 1
    assert study_config["n_list"] == [10, 20]
    assert StoppingRule.from_config().kind == "exact-h2"


def test_unreadable_settings_fall_back(tmp_path, monkeypatch, caplog):
    path = tmp_path / "settings.json"
    path.write_text("[1, 2")
    monkeypatch.setenv(SETTINGS_ENV_VAR, str(path))
    with caplog.at_level(logging.ERROR, logger="fide_solver"):
        assert get_solver_config() == SOLVER_DEFAULTS
    assert "[Config] Failed" in caplog.text


def test_settings_must_be_object(tmp_path, monkeypatch):
    path = tmp_path / "settings.json"
    path.write_text("[1, 2]")
    monkeypatch.setenv(SETTINGS_ENV_VAR, str(path))
    assert get_study_config() == STUDY_DEFAULTS


def test_truncate_message():
    assert SolverLogger.truncate_message("short") == "short"
    long = "x" * 500
    truncated = SolverLogger.truncate_message(long)
    assert len(truncated) == 200
    assert truncated.endswith("...")
    assert SolverLogger.truncate_message(long, max_length=10) == "xxxxxxx..."


def test_log_entry_format(caplog):
    with caplog.at_level(logging.INFO, logger="fide_solver"):
        SolverLogger.log("Study", "Info", "row done", details={"N": 100, "m": 6})
    record = caplog.records[-1]
    assert record.levelno == logging.INFO
    assert record.getMessage() == '[Study] Info: row done {"N": 100, "m": 6}'


def test_iteration_entries_are_debug(caplog):
    with caplog.at_level(logging.INFO, logger="fide_solver"):
        SolverLogger.log_iteration(3, 1e-5, 2.0)
    assert not caplog.records
    with caplog.at_level(logging.DEBUG, logger="fide_solver"):
        SolverLogger.log_iteration(3, 1e-5, 2.0)
    assert caplog.records[-1].levelno == logging.DEBUG


def test_log_error_includes_traceback(caplog):
    with caplog.at_level(logging.ERROR, logger="fide_solver"):
        try:
            raise RuntimeError("boom")
        except RuntimeError as e:
            SolverLogger.log_error("Solve failed", e, details={"N": 4})
    record = caplog.records[-1]
    assert record.levelno == logging.ERROR
    assert "Solve failed - boom" in record.getMessage()
    assert "Traceback" in record.getMessage()


def test_logging_never_raises(caplog):
    class Unprintable:
        def __str__(self):
            raise RuntimeError("no")

    with caplog.at_level(logging.INFO, logger="fide_solver"):
        SolverLogger.log("Solve", "Info", "odd details", details={"value": Unprintable()})
    assert not caplog.records


@pytest.mark.parametrize("status, level", [("Failed", logging.ERROR), ("Success", logging.INFO)])
def test_status_levels(caplog, status, level):
    with caplog.at_level(logging.DEBUG, logger="fide_solver"):
        SolverLogger.log("Solve", status, "done")
    assert caplog.records[-1].levelno == level


@pytest.mark.parametrize(
    "method",
    ["log_solve_start", "log_solve_end", "log_iteration", "log_study_row", "log_certificate", "log_error"],
)
def test_convenience_methods_documented(method):
    assert getattr(SolverLogger, method).__doc__.startswith("Log ")
