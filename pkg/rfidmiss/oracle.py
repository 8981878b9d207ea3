"""Exact expectations of the two-session estimators for small N

Two sessions split N tags into k1 (read twice), k2 (read once) and k3 (never
read) with multinomial probabilities, so the expectations of the estimators
can be summed over every outcome instead of being simulated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np
import pandas as pd

from .estimators import lemma1_expected_p, two_session_p
from .history import tally_reads
from .simulation import PopulationParams, simulate_independent, trial_seed
from .utils import OracleRangeError, check_probability

MAX_TAGS = 12
P_GRID = tuple(round(0.1 * i, 1) for i in range(11))


@dataclass(frozen=True)
class OutcomeWeight:
    """One outcome of two sessions and its probability"""

    k1: int
    k2: int
    k3: int
    probability: float


def multinomial_coefficient(n: int, *ks: int) -> int:
    """`n! / (k1! k2! ...)` in exact integer arithmetic"""
    if sum(ks) != n:
        raise ValueError(f"Parts {ks} do not add up to {n}.")
    out = 1
    rest = n
    for k in ks:
        out *= math.comb(rest, k)
        rest -= k
    return out


def _check_tags(N: int) -> int:
    if int(N) != N or not 1 <= N <= MAX_TAGS:
        raise OracleRangeError(
            f"Exact enumeration supports 1 <= N <= {MAX_TAGS}, got {N}."
        )
    return int(N)


def enumerate_outcomes(N: int, p: float) -> List[OutcomeWeight]:
    """Every (k1, k2, k3) with k1 + k2 + k3 = N and its probability"""
    N = _check_tags(N)
    p = check_probability(p, "p")
    both, once, never = (1 - p) ** 2, 2 * (1 - p) * p, p * p
    return [
        OutcomeWeight(
            k1,
            k2,
            N - k1 - k2,
            multinomial_coefficient(N, k1, k2, N - k1 - k2)
            * both**k1
            * once**k2
            * never ** (N - k1 - k2),
        )
        for k1 in range(N + 1)
        for k2 in range(N - k1 + 1)
    ]


def exact_expected_p(N: int, p: float) -> float:
    """E[g(K1, K2)] of the two-session estimate of p"""
    return math.fsum(
        two_session_p(out.k1, out.k2) * out.probability
        for out in enumerate_outcomes(N, p)
    )


def exact_expected_n(N: int, p: float) -> float:
    """E[(K1 + K2) / (1 - p²)] with the true p"""
    p = check_probability(p, "p")
    if p == 1.0:
        raise OracleRangeError("`p` must be < 1 for the cardinality oracle.")
    return math.fsum(
        (out.k1 + out.k2) / (1 - p * p) * out.probability
        for out in enumerate_outcomes(N, p)
    )


def monte_carlo_expected_p(
    N: int,
    p: float,
    trials: int,
    seed: int = 0,
) -> Tuple[float, float]:
    """The Monte Carlo mean of the two-session estimate of p

    Returns:
        The mean and its standard error
    """
    params = PopulationParams(N, p)
    estimates = np.empty(trials)
    for trial in range(trials):
        history = simulate_independent(params, 2, trial_seed(seed, trial))
        kbar = tally_reads(history.reads).multiplicity
        estimates[trial] = two_session_p(kbar.k1, kbar.k2)
    stderr = estimates.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0
    return float(estimates.mean()), float(stderr)


def lemma_sweep(
    tags: Iterable[int] = range(1, MAX_TAGS + 1),
    ps: Iterable[float] = P_GRID,
) -> pd.DataFrame:
    """Compare the exact expectations with the closed forms

    Returns:
        A frame with columns N, p, expected_p, lemma1, lemma1_delta,
        expected_n and lemma2_delta (NaN for p = 1)
    """
    rows = []
    for N in tags:
        for p in ps:
            expected_p = exact_expected_p(N, p)
            lemma1 = lemma1_expected_p(N, p)
            expected_n = exact_expected_n(N, p) if p < 1 else math.nan
            rows.append(
                {
                    "N": N,
                    "p": p,
                    "expected_p": expected_p,
                    "lemma1": lemma1,
                    "lemma1_delta": abs(expected_p - lemma1),
                    "expected_n": expected_n,
                    "lemma2_delta": abs(expected_n - N),
                }
            )
    return pd.DataFrame(rows)
