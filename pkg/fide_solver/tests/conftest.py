import logging

import pytest

from fide_solver.solver_config import SETTINGS_ENV_VAR


@pytest.fixture(autouse=True)
def default_settings(monkeypatch):
    """Run every test against the built-in defaults."""
    monkeypatch.delenv(SETTINGS_ENV_VAR, raising=False)
    logging.getLogger("fide_solver").setLevel(logging.WARNING)
