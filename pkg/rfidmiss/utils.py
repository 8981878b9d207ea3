"""Provide utilities"""
from __future__ import annotations

import math
from typing import Any

UNDEFINED = math.nan
"""Signal for an estimate that does not exist, e.g. N̂ when p̂ == 1"""

RNG_ALGORITHM = "PCG64"
"""Name of the bit generator behind every simulated reader session"""


class EstimationError(Exception):
    """Raises when an estimator cannot be applied to the observations"""


class DegenerateWindowError(EstimationError):
    """Raises when the window ratio carries no information about p

    Args:
        message: The error message
        p_hat: The value the caller should report instead
    """

    def __init__(self, message: str, p_hat: float) -> None:
        super().__init__(message)
        self.p_hat = p_hat


class OracleRangeError(ValueError):
    """Raises when the exact enumeration is asked for an unsupported case"""


class InvalidConfigError(ValueError):
    """Raises when an experiment configuration is invalid

    Args:
        field: The name of the offending field
        message: What is wrong with it
    """

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"[{field}] {message}")
        self.field = field


class MarginTruncatedWarning(Warning):
    """Warns when the session cap cuts the estimation margin short"""


def is_undefined(value: Any) -> bool:
    """Check if an estimate is the undefined signal"""
    return value is None or (isinstance(value, float) and math.isnan(value))


def check_probability(value: float, name: str) -> float:
    """Make sure a value is a probability

    Args:
        value: The value to check
        name: The argument name, used in the error message

    Returns:
        The value as a float
    """
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"`{name}` must be in [0, 1], got {value}.")
    return value


def check_sessions(value: int, name: str = "sessions", minimum: int = 1) -> int:
    """Make sure a session count is an integer no less than `minimum`"""
    if int(value) != value or value < minimum:
        raise ValueError(
            f"`{name}` must be an integer >= {minimum}, got {value}."
        )
    return int(value)
