import logging

import numpy as np
import pytest

from src.channels import classical_quadrature
from src.config import ENV_PREFIX
from src.fock_core import density_from_pure, fock_state


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Run every test against the built-in defaults"""
    for name in ("THREADS", "TAIL_TOL", "MAX_TAIL", "MAX_PRODUCT_DIM", "LOG_LEVEL"):
        monkeypatch.delenv(ENV_PREFIX + name, raising=False)


@pytest.fixture(autouse=True)
def restore_root_logger():
    # configure_logging replaces the root handlers
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def vacuum():
    return density_from_pure(fock_state(0, 1))


@pytest.fixture(scope="session")
def quad_n1():
    return classical_quadrature(1.0)
