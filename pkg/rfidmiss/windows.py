"""Window-function ratio estimators of the error probability

An estimator selects, with two 0/1 windows, which entries of the multiplicity
vector enter the numerator and the denominator of a ratio. The same ratio of
the model coefficients `c_i(p)` cancels N, and p̂ is the p at which the model
ratio matches the observed one.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .tallies import MultiplicityVector
from .utils import DegenerateWindowError, EstimationError

logger = logging.getLogger(__name__)

GRID_SIZE = 1024
GRID_EPS = 1e-6
XTOL = 1e-9


@dataclass(frozen=True)
class WindowPair:
    """The numerator and denominator windows, φ_n and φ_d

    Args:
        numerator: Which entries of k̄ enter the numerator
        denominator: Which entries of k̄ enter the denominator
    """

    numerator: Tuple[bool, ...]
    denominator: Tuple[bool, ...]

    def __post_init__(self) -> None:
        numerator = tuple(bool(x) for x in self.numerator)
        denominator = tuple(bool(x) for x in self.denominator)
        if len(numerator) != len(denominator):
            raise ValueError("Both windows must cover the same sessions.")
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", denominator)

    def __len__(self) -> int:
        return len(self.numerator)

    @property
    def is_degenerate(self) -> bool:
        """Whether nothing is left in one of the windows"""
        return not any(self.denominator) or not any(self.numerator)


def _check_sessions(kbar: MultiplicityVector, rule: str) -> None:
    if kbar.sessions < 2:
        raise EstimationError(
            f"The {rule} windows need at least 2 sessions, "
            f"got {kbar.sessions}."
        )


def _nonzero(kbar: MultiplicityVector) -> Tuple[bool, ...]:
    return tuple(count != 0 for count in kbar.counts)


def rme_windows(kbar: MultiplicityVector) -> WindowPair:
    """Remove Maximum Element

    The denominator drops all zero entries and the largest entry. Among
    equally large entries only the one with the lowest index is dropped.
    """
    _check_sessions(kbar, "RME")
    numerator = _nonzero(kbar)
    largest = max(range(kbar.sessions), key=lambda i: (kbar[i], -i))
    denominator = tuple(
        keep and i != largest for i, keep in enumerate(numerator)
    )
    return WindowPair(numerator, denominator)


def regm_windows(kbar: MultiplicityVector) -> WindowPair:
    """Remove Elements Greater than the Mean

    The denominator keeps only the nonzero entries of the subset-normalized
    vector that are strictly below its nonzero mean.
    """
    _check_sessions(kbar, "REGM")
    normalized = kbar.normalize()
    mean = normalized.nonzero_mean()
    denominator = tuple(
        value != 0 and value < mean for value in normalized.values
    )
    return WindowPair(_nonzero(kbar), denominator)


def tail_windows(kbar: MultiplicityVector) -> WindowPair:
    """All nonzero entries over all nonzero entries but the first

    For two sessions this is the ratio `(k1 + k2) / k2`.
    """
    _check_sessions(kbar, "tail")
    numerator = _nonzero(kbar)
    return WindowPair(numerator, (False,) + numerator[1:])


def _model_ratio(windows: WindowPair) -> Callable[[float], float]:
    """The model-side ratio f(p) for scalar p"""
    R = len(windows)
    combs = [math.comb(R, R - i) for i in range(R)]

    def ratio(p: float) -> float:
        coefs = [
            combs[i] * (1.0 - p) ** (R - i) * p**i for i in range(R)
        ]
        num = sum(c for c, keep in zip(coefs, windows.numerator) if keep)
        den = sum(c for c, keep in zip(coefs, windows.denominator) if keep)
        return num / den if den > 0 else math.inf

    return ratio


def _model_ratio_grid(windows: WindowPair, grid: np.ndarray) -> np.ndarray:
    """The model-side ratio f(p) over a grid of p"""
    R = len(windows)
    index = np.arange(R)
    combs = np.array([math.comb(R, R - i) for i in range(R)], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        coefs = (
            combs
            * (1.0 - grid[:, None]) ** (R - index)
            * grid[:, None] ** index
        )
        num = coefs @ np.asarray(windows.numerator, dtype=float)
        den = coefs @ np.asarray(windows.denominator, dtype=float)
        return num / den


def observed_ratio(kbar: MultiplicityVector, windows: WindowPair) -> float:
    """The observed ratio of the windowed sums of k̄

    Raises:
        DegenerateWindowError: when the ratio carries no information, with
            `p_hat` 0 if every tag was read in every session and 1 otherwise
    """
    if len(windows) != kbar.sessions:
        raise ValueError(
            f"Windows cover {len(windows)} sessions, "
            f"the multiplicity vector {kbar.sessions}."
        )
    if kbar.observed == 0:
        raise DegenerateWindowError("No tag was read in any session.", 1.0)

    num = sum(k for k, keep in zip(kbar.counts, windows.numerator) if keep)
    den = sum(k for k, keep in zip(kbar.counts, windows.denominator) if keep)
    if num == 0 or den == 0:
        if not any(kbar.counts[1:]):
            raise DegenerateWindowError(
                "Every tag was read in every session.", 0.0
            )
        # tags missed sessions but the windows cannot say how often
        raise DegenerateWindowError("The denominator window is empty.", 1.0)
    return num / den


def _misfit(kbar: MultiplicityVector, p: float) -> float:
    """Squared distance between k̄ and the multiplicity vector expected at p"""
    R = kbar.sessions
    n_hat = kbar.observed / (1.0 - p**R)
    return math.fsum(
        (k - n_hat * math.comb(R, R - i) * (1.0 - p) ** (R - i) * p**i) ** 2
        for i, k in enumerate(kbar.counts)
    )


def _refine_root(
    model: Callable[[float], float],
    target: float,
    lower: float,
    upper: float,
) -> float:
    try:
        return float(
            bisect(lambda p: model(p) - target, lower, upper, xtol=XTOL)
        )
    except ValueError:
        # the grid and the scalar model disagree on the sign at an end point
        return min(lower, upper, key=lambda p: abs(model(p) - target))


def ratio_solve_p(kbar: MultiplicityVector, windows: WindowPair) -> float:
    """Solve the window ratio for p̂

    The model ratio is scanned on a uniform grid over [1e-6, 1 - 1e-6]. Every
    sign change of `f(p) - observed` is refined by bisection to 1e-9. A
    window ratio need not be monotone in p, so when it crosses the observed
    ratio more than once, the root whose expected multiplicity vector lies
    closest to k̄ is taken. Without a sign change the grid point closest to
    the observed ratio is refined by a golden-section search.

    Args:
        kbar: The multiplicity vector
        windows: The windows selecting the entries of the ratio

    Returns:
        The estimate p̂ in [1e-6, 1 - 1e-6]

    Raises:
        DegenerateWindowError: with `p_hat` 0 when every tag was read in
            every session and 1 when the windows carry no information
    """
    target = observed_ratio(kbar, windows)
    model = _model_ratio(windows)

    grid = np.linspace(GRID_EPS, 1.0 - GRID_EPS, GRID_SIZE)
    diff = _model_ratio_grid(windows, grid) - target
    finite = np.isfinite(diff)
    if not finite.any():
        raise EstimationError("The model ratio is undefined on the grid.")

    roots = [float(grid[j]) for j in np.flatnonzero(finite & (diff == 0))]
    crossings = np.flatnonzero(
        finite[:-1]
        & finite[1:]
        & (diff[:-1] != 0)
        & (diff[1:] != 0)
        & (np.sign(diff[:-1]) != np.sign(diff[1:]))
    )
    roots.extend(
        _refine_root(model, target, grid[j], grid[j + 1]) for j in crossings
    )
    if roots:
        if len(roots) > 1:
            logger.debug(
                "Ratio %.6g is met at p = %s, keeping the best fit",
                target,
                ", ".join(f"{root:.6g}" for root in sorted(roots)),
            )
        return min(sorted(roots), key=lambda root: _misfit(kbar, root))

    j = int(np.nanargmin(np.where(finite, np.abs(diff), np.nan)))
    logger.debug(
        "No sign change for ratio %.6g, refining grid point %.6g",
        target,
        grid[j],
    )
    if not 0 < j < GRID_SIZE - 1:
        return float(grid[j])

    # two roots can hide between neighbouring grid points: look for the
    # extremum of the signed difference and split the cell there
    sign = 1.0 if diff[j] > 0 else -1.0
    try:
        found = minimize_scalar(
            lambda p: sign * (model(p) - target),
            bracket=(grid[j - 1], grid[j], grid[j + 1]),
            method="golden",
        )
    except ValueError:  # pragma: no cover
        return float(grid[j])
    if not (found.success and grid[j - 1] <= found.x <= grid[j + 1]):
        return float(grid[j])
    if found.fun >= 0:
        return float(found.x)

    roots = [
        _refine_root(model, target, grid[j - 1], found.x),
        _refine_root(model, target, found.x, grid[j + 1]),
    ]
    return min(roots, key=lambda root: _misfit(kbar, root))
