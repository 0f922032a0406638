import logging
import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from .errors import InvalidParameterError

load_dotenv()

ENV_PREFIX = "BOSONIC_MINENT_"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseModel):
    """Runtime configuration read from the environment (and .env)"""

    threads: int = Field(..., ge=1)
    tail_tol: float = Field(1e-8, gt=0, lt=1)
    max_tail: float = Field(1e-4, gt=0, lt=1)
    max_product_dim: int = Field(2500, ge=4)
    log_level: str = "WARNING"


def _default_threads() -> int:
    return max(1, min(8, os.cpu_count() or 1))


def _read(name: str, cast, default):
    raw = os.getenv(ENV_PREFIX + name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise InvalidParameterError(f"{ENV_PREFIX}{name}={raw!r} is not valid")


def get_settings() -> Settings:
    """Build settings from BOSONIC_MINENT_* environment variables"""
    level = _read("LOG_LEVEL", str, "WARNING").upper()
    if level not in LOG_LEVELS:
        raise InvalidParameterError(f"{ENV_PREFIX}LOG_LEVEL={level!r} is not valid")

    try:
        return Settings(
            threads=_read("THREADS", int, _default_threads()),
            tail_tol=_read("TAIL_TOL", float, 1e-8),
            max_tail=_read("MAX_TAIL", float, 1e-4),
            max_product_dim=_read("MAX_PRODUCT_DIM", int, 2500),
            log_level=level,
        )
    except ValueError as e:
        # pydantic range checks
        raise InvalidParameterError(f"invalid {ENV_PREFIX}* setting: {e}")


def configure_logging(level: Optional[str] = None) -> None:
    """Configure the root logger for command-line use"""
    logging.basicConfig(
        level=(level or get_settings().log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
