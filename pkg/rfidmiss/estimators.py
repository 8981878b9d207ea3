"""Closed-form estimators of the error probability p, the tag set
cardinality N and the probability p_M that at least one tag is missing.

All functions here are pure. An estimate that does not exist is returned as
`UNDEFINED` (NaN) instead of raising, so that callers can keep going and
treat the population size as unknown.
"""
from __future__ import annotations

import math
from typing import List

from .tallies import MultiplicityVector, SchnabelTallies
from .utils import (
    UNDEFINED,
    check_probability,
    check_sessions,
    is_undefined,
)


def two_session_p(k1: float, k2: float) -> float:
    """Estimate p from two reader sessions

    Args:
        k1: Tags read in both sessions
        k2: Tags read in exactly one of the two sessions

    Returns:
        1 when nothing was read, 0 when nothing was missed by either session,
        otherwise `k2 / (2 * k1 + k2)`
    """
    if k1 < 0 or k2 < 0:
        raise ValueError(f"Counts must be non-negative, got ({k1}, {k2}).")
    if k2 == 0:
        return 1.0 if k1 == 0 else 0.0
    return k2 / (2.0 * k1 + k2)


def two_session_n(k1: float, k2: float, p_hat: float) -> float:
    """Estimate N from two reader sessions, `(k1 + k2) / (1 - p_hat²)`

    Returns `UNDEFINED` when `p_hat == 1`.
    """
    p_hat = check_probability(p_hat, "p_hat")
    if p_hat == 1.0:
        return UNDEFINED
    return (k1 + k2) / (1.0 - p_hat * p_hat)


def lincoln_petersen_n(n1: int, n2: int, m2: int) -> float:
    """The Lincoln-Petersen estimate `n1 * n2 / m2`

    Returns `UNDEFINED` when no tag was read in both sessions.
    """
    if m2 == 0:
        return UNDEFINED
    return n1 * n2 / m2


def expected_multiplicity_coefficient(i: int, R: int, p: float) -> float:
    """The expected fraction of tags read in exactly `R - (i - 1)` sessions

    `c_i(p) = C(R, R - (i - 1)) (1 - p)^(R - (i - 1)) p^(i - 1)`

    Args:
        i: The 1-based index into the multiplicity vector
        R: The number of sessions
        p: The error probability

    Returns:
        The coefficient, so that `k_i ≈ N * c_i(p)`
    """
    R = check_sessions(R, "R")
    p = check_probability(p, "p")
    if not 1 <= i <= R:
        raise IndexError(f"Index `i` must be in [1, {R}], got {i}.")
    reads = R - (i - 1)
    return math.comb(R, reads) * (1.0 - p) ** reads * p ** (i - 1)


def expected_multiplicity_coefficients(R: int, p: float) -> List[float]:
    """All coefficients `c_1(p) .. c_R(p)`"""
    return [expected_multiplicity_coefficient(i, R, p) for i in range(1, R + 1)]


def expected_multiplicity(n_tags: float, p: float, R: int) -> MultiplicityVector:
    """The real-valued multiplicity vector expected for N tags"""
    return MultiplicityVector(
        tuple(n_tags * c for c in expected_multiplicity_coefficients(R, p))
    )


def general_n(kbar: MultiplicityVector, p_hat: float) -> float:
    """Estimate N from R sessions, `sum(k) / (1 - p_hat^R)`

    Returns `UNDEFINED` when `p_hat == 1`.
    """
    p_hat = check_probability(p_hat, "p_hat")
    if p_hat == 1.0:
        return UNDEFINED
    return kbar.observed / (1.0 - p_hat ** kbar.sessions)


def p_missing(p_hat: float, n_hat: float, R: int) -> float:
    """The probability that at least one tag was read in none of R sessions

    `p_M = 1 - (1 - p_hat^R)^n_hat`, which is 1 when `n_hat` is undefined or
    `p_hat == 1`.
    """
    if is_undefined(n_hat) or is_undefined(p_hat):
        return 1.0
    p_hat = check_probability(p_hat, "p_hat")
    R = check_sessions(R, "R")
    if n_hat < 0:
        raise ValueError(f"`n_hat` must be non-negative, got {n_hat}.")
    if p_hat == 0.0:
        return 0.0
    if p_hat == 1.0:
        return 1.0
    # expm1/log1p: accurate for p_M far below 1e-5
    return -math.expm1(n_hat * math.log1p(-(p_hat**R)))


def true_p_missing_curve(p: float, n_tags: float, sessions: int) -> List[float]:
    """p_M for R = 1 .. sessions when p and N are known"""
    return [p_missing(p, n_tags, R) for R in range(1, sessions + 1)]


def required_sessions(
    p: float,
    n_tags: float,
    threshold: float,
    max_sessions: int = 64,
) -> int:
    """The first R at which the known-parameter p_M is at or below threshold

    Returns `max_sessions` if the threshold is never reached before the cap.
    """
    for R in range(1, max_sessions + 1):
        if p_missing(p, n_tags, R) <= threshold:
            return R
    return max_sessions


def schnabel_n(tallies: SchnabelTallies) -> float:
    """The Schnabel estimate `sum(n_i M_i) / sum(m_i)`

    Returns `UNDEFINED` when nothing was ever read twice.
    """
    if tallies.sessions < 2:
        raise ValueError("The Schnabel estimator needs at least 2 sessions.")
    recaptures = sum(tallies.m)
    if recaptures == 0:
        return UNDEFINED
    return sum(n * M for n, M in zip(tallies.n, tallies.M)) / recaptures


def schnabel_p(tallies: SchnabelTallies, n_hat: float) -> float:
    """The mean per-session error rate `1 - n_i / n_hat`, clamped to [0, 1]

    Returns `UNDEFINED` when `n_hat` is undefined or not positive.
    """
    if is_undefined(n_hat) or n_hat <= 0:
        return UNDEFINED
    errors = sum(1.0 - n / n_hat for n in tallies.n) / tallies.sessions
    return min(1.0, max(0.0, errors))


def lemma1_expected_p(N: float, p: float) -> float:
    """The expected two-session estimate of p for known N and p

    `E[g] = 2N (p - p^(2N)) / (2N - 1) + p^(2N)`, which tends to p as N grows.
    """
    p = check_probability(p, "p")
    if N < 1:
        raise ValueError(f"`N` must be >= 1, got {N}.")
    tail = p ** (2 * N)
    return 2 * N * (p - tail) / (2 * N - 1) + tail


def lemma1_bias(N: float, p: float) -> float:
    """How far the two-session estimate of p lands above p on average"""
    return lemma1_expected_p(N, p) - p
