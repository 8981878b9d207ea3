"""Simulated reader sessions over a closed population of tags

Every tag is in a blind spot with probability p in a session, independently
of the other tags. Sessions are either independent, or correlated through a
one-session-deep Markov chain per tag that keeps the marginal error
probability at p in every session.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .history import ReadHistory
from .utils import RNG_ALGORITHM, check_probability, check_sessions

logger = logging.getLogger(__name__)

MARGINAL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PopulationParams:
    """A closed tag population

    Args:
        n_tags: The number of tags N
        p: The probability that a tag is in a blind spot in a session
    """

    n_tags: int
    p: float

    def __post_init__(self) -> None:
        check_sessions(self.n_tags, "n_tags")
        object.__setattr__(self, "p", check_probability(self.p, "p"))


@dataclass(frozen=True)
class CorrelationParams:
    """The error chain of one tag across sessions

    Args:
        p: The marginal error probability
        rho: The correlation coefficient between consecutive sessions
        q: The error probability after an error
        r: The error probability after a successful read
    """

    p: float
    rho: float
    q: float
    r: float

    def __post_init__(self) -> None:
        for name in ("p", "rho", "q", "r"):
            check_probability(getattr(self, name), name)

        marginal = self.p * self.q + (1.0 - self.p) * self.r
        if abs(marginal - self.p) > MARGINAL_TOLERANCE:
            raise ValueError(
                f"q={self.q} and r={self.r} do not keep the marginal error "
                f"probability at p={self.p} (got {marginal})."
            )
        if not (
            self.r <= self.p + MARGINAL_TOLERANCE
            and self.p <= self.q + MARGINAL_TOLERANCE
        ):
            raise ValueError(
                "Expected r <= p <= q, "
                f"got r={self.r}, p={self.p}, q={self.q}."
            )


def derive_correlation(p: float, rho: float) -> CorrelationParams:
    """Derive q and r from the marginal p and the correlation rho

    `q = rho (1 - p) + p` and `r = p (1 - q) / (1 - p)`
    """
    p = check_probability(p, "p")
    rho = check_probability(rho, "rho")
    if p == 1.0:
        raise ValueError("`p` must be < 1, r is undefined for p = 1.")
    q = rho * (1.0 - p) + p
    r = p * (1.0 - q) / (1.0 - p)
    return CorrelationParams(p=p, rho=rho, q=q, r=r)


def make_rng(seed: int) -> np.random.Generator:
    """A deterministic generator, bit-identical across platforms"""
    return np.random.Generator(getattr(np.random, RNG_ALGORITHM)(seed))


def trial_seed(seed: int, trial: int) -> int:
    """The seed of one trial in an experiment"""
    return seed + trial


class SessionSource(ABC):
    """Yields one reader session at a time against a fixed population

    A source owns its random generator and is not meant to be shared
    between workers.

    Args:
        n_tags: The number of tags in the population
        seed: The seed of the random generator
    """

    def __init__(self, n_tags: int, seed: int) -> None:
        self.n_tags = check_sessions(n_tags, "n_tags")
        self.seed = seed
        self.sessions = 0
        self._rng = make_rng(seed)

    @abstractmethod
    def _errors(self) -> np.ndarray:
        """Draw which tags are in a blind spot in the next session"""

    def next_session(self) -> np.ndarray:
        """Run one more session, `True` for every tag read"""
        reads = ~self._errors()
        self.sessions += 1
        return reads

    def take(self, sessions: int) -> ReadHistory:
        """Run `sessions` more sessions and return their history"""
        sessions = check_sessions(sessions, "sessions")
        return ReadHistory(
            np.vstack([self.next_session() for _ in range(sessions)])
        )


class IndependentSessions(SessionSource):
    """Sessions in which every tag errs with probability p, independently"""

    def __init__(self, params: PopulationParams, seed: int) -> None:
        super().__init__(params.n_tags, seed)
        self.params = params

    def _errors(self) -> np.ndarray:
        return self._rng.random(self.n_tags) < self.params.p


class CorrelatedSessions(SessionSource):
    """Sessions in which a tag errs with probability q after an error and
    r after a successful read; the first session uses p"""

    def __init__(
        self,
        params: CorrelationParams,
        n_tags: int,
        seed: int,
    ) -> None:
        super().__init__(n_tags, seed)
        self.params = params
        self._last = None

    def _errors(self) -> np.ndarray:
        if self._last is None:
            probs = self.params.p
        else:
            probs = np.where(self._last, self.params.q, self.params.r)
        self._last = self._rng.random(self.n_tags) < probs
        return self._last


def make_source(n_tags: int, p: float, rho: float, seed: int) -> SessionSource:
    """An independent source for rho == 0, a correlated one otherwise"""
    logger.debug(
        "Session source: N=%d, p=%s, rho=%s, seed=%d", n_tags, p, rho, seed
    )
    if rho == 0:
        return IndependentSessions(PopulationParams(n_tags, p), seed)
    return CorrelatedSessions(derive_correlation(p, rho), n_tags, seed)


def simulate_independent(
    params: PopulationParams,
    R: int,
    seed: int,
) -> ReadHistory:
    """R independent sessions over the population"""
    return IndependentSessions(params, seed).take(R)


def simulate_correlated(
    cp: CorrelationParams,
    n_tags: int,
    R: int,
    seed: int,
) -> ReadHistory:
    """R Markov-correlated sessions over n_tags tags"""
    return CorrelatedSessions(cp, n_tags, seed).take(R)
