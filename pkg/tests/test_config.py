import logging

import pytest

from src.config import configure_logging, get_settings
from src.errors import InvalidParameterError


def test_defaults():
    settings = get_settings()
    assert 1 <= settings.threads <= 8
    assert settings.tail_tol == 1e-8
    assert settings.max_tail == 1e-4
    assert settings.max_product_dim == 2500
    assert settings.log_level == "WARNING"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("BOSONIC_MINENT_THREADS", "3")
    monkeypatch.setenv("BOSONIC_MINENT_TAIL_TOL", "1e-10")
    monkeypatch.setenv("BOSONIC_MINENT_LOG_LEVEL", "debug")
    settings = get_settings()
    assert settings.threads == 3
    assert settings.tail_tol == 1e-10
    assert settings.log_level == "DEBUG"


def test_blank_values_fall_back_to_defaults(monkeypatch):
    monkeypatch.setenv("BOSONIC_MINENT_MAX_TAIL", "  ")
    assert get_settings().max_tail == 1e-4


@pytest.mark.parametrize(
    "name, value",
    [
        ("THREADS", "many"),
        ("THREADS", "0"),
        ("TAIL_TOL", "2"),
        ("MAX_PRODUCT_DIM", "2"),
        ("LOG_LEVEL", "LOUD"),
    ],
)
def test_invalid_values(monkeypatch, name, value):
    monkeypatch.setenv("BOSONIC_MINENT_" + name, value)
    with pytest.raises(InvalidParameterError):
        get_settings()


def test_configure_logging(monkeypatch):
    configure_logging("DEBUG")
    assert logging.getLogger().level == logging.DEBUG
    monkeypatch.setenv("BOSONIC_MINENT_LOG_LEVEL", "ERROR")
    configure_logging()
    assert logging.getLogger().level == logging.ERROR
