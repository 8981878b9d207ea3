"""The sequential decision process

After every reader session the estimates are refreshed and another session
is run for as long as the estimated probability of a missing tag is above
the threshold.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Union

from .history import ReadHistory
from .report import EstimateReport, Estimator, estimate
from .simulation import SessionSource
from .utils import InvalidConfigError, MarginTruncatedWarning

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 1e-5
DEFAULT_MAX_SESSIONS = 64


@dataclass(frozen=True)
class StopPolicy:
    """When to stop reading

    Args:
        threshold: The highest tolerated probability of a missing tag, t₁
        margin_sessions: Extra sessions run once the threshold is met
        bias_addend: Added to p̂_M before comparing it with the threshold
        max_sessions: Stop here whatever the estimates say
        min_sessions: Sessions run before the first estimate
    """

    threshold: float = DEFAULT_THRESHOLD
    margin_sessions: int = 0
    bias_addend: float = 0.0
    max_sessions: int = DEFAULT_MAX_SESSIONS
    min_sessions: int = 2

    def __post_init__(self) -> None:
        if not 0 < self.threshold < 1:
            raise InvalidConfigError(
                "threshold", f"must be in (0, 1), got {self.threshold}."
            )
        if self.margin_sessions < 0:
            raise InvalidConfigError(
                "margin", f"must be >= 0, got {self.margin_sessions}."
            )
        if self.bias_addend < 0:
            raise InvalidConfigError(
                "bias", f"must be >= 0, got {self.bias_addend}."
            )
        if self.min_sessions < 2:
            raise InvalidConfigError(
                "min_sessions",
                f"the estimators need 2 sessions, got {self.min_sessions}.",
            )
        if self.max_sessions < self.min_sessions:
            raise InvalidConfigError(
                "max_sessions",
                f"must be >= min_sessions ({self.min_sessions}), "
                f"got {self.max_sessions}.",
            )


@dataclass
class SessionLog:
    """The course of one sequential run

    Args:
        estimator: The estimator used throughout
        reports: One report per session, from min_sessions on
        history: Every session read
        first_satisfied_at: The first R at which reading could stop, `None`
            if the threshold was never met
        cap_reached: Whether the run ended at max_sessions without ever
            meeting the threshold
    """

    estimator: Estimator
    reports: List[EstimateReport] = field(default_factory=list)
    history: ReadHistory = None
    first_satisfied_at: Optional[int] = None
    cap_reached: bool = False

    @property
    def stopped_at(self) -> int:
        """The number of sessions read in total"""
        return self.history.sessions

    @property
    def missed(self) -> int:
        """Tags still unread at the stop, known only for simulated sources"""
        return self.history.missed


def should_continue(report: EstimateReport, policy: StopPolicy) -> bool:
    """Whether another reader session is required"""
    return report.p_m_hat + policy.bias_addend > policy.threshold


def run_sequential(
    source: SessionSource,
    estimator: Union[str, Estimator],
    policy: StopPolicy,
) -> SessionLog:
    """Read sessions from the source until the stop rule is satisfied

    The first estimate is made after `min_sessions` sessions. Once
    `should_continue` says no, `margin_sessions` more sessions are read.
    The run ends at `max_sessions` regardless.

    Args:
        source: Yields the sessions
        estimator: The estimator behind the decisions
        policy: The stop policy

    Returns:
        The log of the run
    """
    estimator = Estimator.parse(estimator)
    log = SessionLog(estimator=estimator)
    history = source.take(policy.min_sessions)

    while True:
        report = estimate(history, estimator)
        log.reports.append(report)
        R = history.sessions
        logger.debug(
            "[%s] R=%d: p_hat=%.6g, n_hat=%.6g, p_m_hat=%.3g",
            estimator.value,
            R,
            report.p_hat,
            report.n_hat,
            report.p_m_hat,
        )

        if log.first_satisfied_at is None and not should_continue(
            report, policy
        ):
            log.first_satisfied_at = R
        if (
            log.first_satisfied_at is not None
            and R >= log.first_satisfied_at + policy.margin_sessions
        ):
            break
        if R >= policy.max_sessions:
            if log.first_satisfied_at is None:
                log.cap_reached = True
            else:
                warnings.warn(
                    f"Session cap {policy.max_sessions} reached before the "
                    f"{policy.margin_sessions} margin sessions after "
                    f"R={log.first_satisfied_at} were read.",
                    MarginTruncatedWarning,
                )
            break

        history = history.extend(source.next_session())

    log.history = history
    return log
