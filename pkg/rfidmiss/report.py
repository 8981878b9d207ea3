"""Provides the estimate verb and the report it produces"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Optional, Union

from pipda import register_verb

from .estimators import (
    general_n,
    lemma1_bias,
    p_missing,
    schnabel_n,
    schnabel_p,
    two_session_n,
    two_session_p,
)
from .history import ReadHistory, tally_reads
from .tallies import MultiplicityVector, SchnabelTallies, Tally
from .utils import DegenerateWindowError, EstimationError, is_undefined
from .windows import ratio_solve_p, regm_windows, rme_windows, tail_windows

logger = logging.getLogger(__name__)


class Estimator(str, Enum):
    """The estimators of (p, N, p_M)

    TWO_SESSION: The closed form for exactly two sessions
    RME: Window ratio, Remove Maximum Element
    REGM: Window ratio, Remove Elements Greater than the Mean
    SCHNABEL: The Schnabel capture-recapture estimator
    TAIL: Window ratio, all entries over all entries but the first
    """

    TWO_SESSION = "two-session"
    RME = "rme"
    REGM = "regm"
    SCHNABEL = "schnabel"
    TAIL = "tail"

    @classmethod
    def parse(cls, value: Union[str, Estimator]) -> Estimator:
        """Get an estimator from its name, case insensitive"""
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            choices = ", ".join(member.value for member in cls)
            raise ValueError(
                f"Unknown estimator {value!r}, choose from: {choices}."
            ) from None


WINDOWS = {
    Estimator.RME: rme_windows,
    Estimator.REGM: regm_windows,
    Estimator.TAIL: tail_windows,
}


@dataclass(frozen=True)
class EstimateReport:
    """What an estimator concludes after R sessions

    Args:
        p_hat: The estimated error probability
        n_hat: The estimated cardinality, NaN when undefined
        p_m_hat: The estimated probability that at least one tag is missing
        estimator: The estimator that produced the report
        sessions: The number of sessions R
        observed: Distinct tags read at least once
        bias: The expected bias of p_hat, two-session reports only
        degenerate: Whether p_hat comes from a marginal case rather than
            from the observed ratio
    """

    p_hat: float
    n_hat: float
    p_m_hat: float
    estimator: Estimator
    sessions: int
    observed: int = 0
    bias: Optional[float] = None
    degenerate: bool = False

    def as_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["estimator"] = self.estimator.value
        return out


def _ratio_report(
    kbar: MultiplicityVector,
    estimator: Estimator,
    observed: int,
) -> EstimateReport:
    R = kbar.sessions
    degenerate = False
    try:
        p_hat = ratio_solve_p(kbar, WINDOWS[estimator](kbar))
    except DegenerateWindowError as err:
        logger.debug("[%s] R=%d: %s", estimator.value, R, err)
        p_hat = err.p_hat
        degenerate = True

    n_hat = general_n(kbar, p_hat)
    return EstimateReport(
        p_hat=p_hat,
        n_hat=n_hat,
        p_m_hat=p_missing(p_hat, n_hat, R),
        estimator=estimator,
        sessions=R,
        observed=observed,
        degenerate=degenerate,
    )


def _two_session_report(
    kbar: MultiplicityVector,
    observed: int,
) -> EstimateReport:
    if kbar.sessions != 2:
        raise EstimationError(
            "The two-session estimator needs exactly 2 sessions, "
            f"got {kbar.sessions}."
        )
    p_hat = two_session_p(kbar.k1, kbar.k2)
    n_hat = two_session_n(kbar.k1, kbar.k2, p_hat)
    bias = None
    if not is_undefined(n_hat) and n_hat >= 1:
        bias = lemma1_bias(n_hat, p_hat)
    return EstimateReport(
        p_hat=p_hat,
        n_hat=n_hat,
        p_m_hat=p_missing(p_hat, n_hat, 2),
        estimator=Estimator.TWO_SESSION,
        sessions=2,
        observed=observed,
        bias=bias,
        degenerate=kbar.k2 == 0,
    )


def _schnabel_report(
    tallies: SchnabelTallies,
    observed: int,
) -> EstimateReport:
    if tallies.sessions < 2:
        raise EstimationError(
            "The Schnabel estimator needs at least 2 sessions, "
            f"got {tallies.sessions}."
        )
    n_hat = schnabel_n(tallies)
    p_hat = schnabel_p(tallies, n_hat)
    degenerate = is_undefined(p_hat)
    if degenerate:
        # no recaptures, nothing is known about the population
        p_hat = 1.0
    return EstimateReport(
        p_hat=p_hat,
        n_hat=n_hat,
        p_m_hat=p_missing(p_hat, n_hat, tallies.sessions),
        estimator=Estimator.SCHNABEL,
        sessions=tallies.sessions,
        observed=observed,
        degenerate=degenerate,
    )


def estimate_multiplicity(
    kbar: MultiplicityVector,
    estimator: Union[str, Estimator] = Estimator.REGM,
    observed: int = None,
) -> EstimateReport:
    """Estimate from a multiplicity vector alone"""
    estimator = Estimator.parse(estimator)
    if observed is None:
        observed = int(kbar.observed)
    if estimator is Estimator.TWO_SESSION:
        return _two_session_report(kbar, observed)
    if estimator is Estimator.SCHNABEL:
        raise EstimationError(
            "The Schnabel estimator needs per-session tallies, "
            "not a multiplicity vector."
        )
    return _ratio_report(kbar, estimator, observed)


def estimate_tally(
    data: Tally,
    estimator: Union[str, Estimator] = Estimator.REGM,
) -> EstimateReport:
    """Estimate from the full tally of a read history"""
    estimator = Estimator.parse(estimator)
    if estimator is Estimator.SCHNABEL:
        return _schnabel_report(data.schnabel, data.observed)
    return estimate_multiplicity(data.multiplicity, estimator, data.observed)


@register_verb(Tally, ast_fallback="normal")
def estimate(
    data: Tally,
    estimator: Union[str, Estimator] = Estimator.REGM,
) -> EstimateReport:
    """Estimate p, N and p_M

    The verb dispatches on what is piped in: a `ReadHistory` is tallied
    first, a `MultiplicityVector` supports every estimator but Schnabel and
    `SchnabelTallies` support Schnabel only.

    >>> history >> estimate(Estimator.REGM)

    Args:
        data: The observations
        estimator: The estimator to use

    Returns:
        The estimate report
    """
    return estimate_tally(data, estimator)


@estimate.register(ReadHistory)
def _(
    data: ReadHistory,
    estimator: Union[str, Estimator] = Estimator.REGM,
) -> EstimateReport:
    return estimate_tally(tally_reads(data.reads), estimator)


@estimate.register(MultiplicityVector)
def _(
    data: MultiplicityVector,
    estimator: Union[str, Estimator] = Estimator.REGM,
) -> EstimateReport:
    return estimate_multiplicity(data, estimator)


@estimate.register(SchnabelTallies)
def _(
    data: SchnabelTallies,
    estimator: Union[str, Estimator] = Estimator.SCHNABEL,
) -> EstimateReport:
    if Estimator.parse(estimator) is not Estimator.SCHNABEL:
        raise EstimationError(
            "Per-session tallies only support the Schnabel estimator."
        )
    # tags read at least once: everything first read in some session
    observed = tallies_observed(data)
    return _schnabel_report(data, observed)


def tallies_observed(tallies: SchnabelTallies) -> int:
    """Distinct tags read at least once according to Schnabel tallies"""
    return tallies.M[-1] + tallies.n[-1] - tallies.m[-1]
