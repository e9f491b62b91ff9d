"""Python bindings for the stakesim simulator."""

from ._core import *  # noqa: F401,F403
from ._core import Config, ConfigError, IoError, NumericError, ParameterError

__all__ = [name for name in dir() if not name.startswith("_")]
