"""The observable summaries of a set of reader sessions

Only tags that were read at least once are counted anywhere here: the number
of tags read in no session is never measurable.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Sequence, Tuple


@dataclass(frozen=True)
class MultiplicityVector:
    """How many tags were found in how many reader sessions

    `counts[i]` is the number of distinct tags read in exactly `R - i`
    sessions, so the first entry counts the tags read in every session and
    the last one the tags read only once.

    Counts are usually integers. Real-valued counts are accepted so that
    expected multiplicities (N times the model coefficients) can be fed to
    the estimators directly.

    Args:
        counts: The multiplicity counts, one per session
    """

    counts: Tuple[float, ...]

    def __post_init__(self) -> None:
        counts = tuple(self.counts)
        if not counts:
            raise ValueError("A multiplicity vector needs at least 1 session.")
        if any(count < 0 for count in counts):
            raise ValueError(f"Counts must be non-negative, got {counts}.")
        object.__setattr__(self, "counts", counts)

    def __len__(self) -> int:
        return len(self.counts)

    def __getitem__(self, index: int) -> float:
        return self.counts[index]

    @property
    def sessions(self) -> int:
        """The number of reader sessions R"""
        return len(self.counts)

    @property
    def observed(self) -> float:
        """The number of distinct tags read at least once"""
        return sum(self.counts)

    @property
    def k1(self) -> float:
        """Tags read in every session"""
        return self.counts[0]

    @property
    def k2(self) -> float:
        """Tags read in all sessions but one (k₂ₐ + k₂ᵦ for R = 2)"""
        return self.counts[1] if len(self.counts) > 1 else 0

    def normalize(self) -> NormalizedMultiplicityVector:
        """Average every count over the number of session subsets it covers"""
        R = self.sessions
        return NormalizedMultiplicityVector(
            tuple(
                count / comb(R, R - i) for i, count in enumerate(self.counts)
            )
        )


@dataclass(frozen=True)
class NormalizedMultiplicityVector:
    """A multiplicity vector averaged over session subsets

    `values[i] = counts[i] / C(R, R - i)`: an estimate of how many tags were
    read in one particular combination of `R - i` sessions.
    """

    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def sessions(self) -> int:
        return len(self.values)

    def nonzero_mean(self) -> float:
        """The sample mean of the nonzero entries, 0 if all entries are 0"""
        nonzero = [value for value in self.values if value != 0]
        return sum(nonzero) / len(nonzero) if nonzero else 0.0

    def denormalize(self) -> MultiplicityVector:
        """Reproduce the original counts"""
        R = self.sessions
        return MultiplicityVector(
            tuple(
                value * comb(R, R - i) for i, value in enumerate(self.values)
            )
        )


@dataclass(frozen=True)
class SchnabelTallies:
    """Per-session capture/recapture tallies

    Args:
        n: Tags read in session i
        m: Tags read in session i that were already read before
        M: Distinct tags read in sessions before session i
    """

    n: Tuple[int, ...]
    m: Tuple[int, ...]
    M: Tuple[int, ...]

    def __post_init__(self) -> None:
        n, m, M = tuple(self.n), tuple(self.m), tuple(self.M)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "M", M)

        if not n or not len(n) == len(m) == len(M):
            raise ValueError(
                "Schnabel tallies need equally long, non-empty n, m and M."
            )
        if m[0] != 0 or M[0] != 0:
            raise ValueError("Nothing can be recaptured in the first session.")
        for i, (ni, mi, Mi) in enumerate(zip(n, m, M)):
            if ni < 0 or mi < 0 or mi > min(ni, Mi):
                raise ValueError(
                    f"Session {i + 1}: need 0 <= m <= min(n, M), "
                    f"got n={ni}, m={mi}, M={Mi}."
                )
            if i + 1 < len(n) and M[i + 1] != Mi + ni - mi:
                raise ValueError(
                    f"Session {i + 2}: M must grow by the newly read tags."
                )

    @property
    def sessions(self) -> int:
        return len(self.n)

    @classmethod
    def from_sessions(
        cls,
        n: Sequence[int],
        m: Sequence[int],
    ) -> SchnabelTallies:
        """Build the tallies from n and m, accumulating M"""
        M = [0]
        for ni, mi in zip(n[:-1], m[:-1]):
            M.append(M[-1] + ni - mi)
        return cls(tuple(n), tuple(m), tuple(M))


@dataclass(frozen=True)
class Tally:
    """Everything the estimators need from a read history

    Args:
        multiplicity: The multiplicity vector k̄
        schnabel: The per-session capture/recapture tallies
        observed: Distinct tags read at least once
    """

    multiplicity: MultiplicityVector
    schnabel: SchnabelTallies
    observed: int

    @property
    def sessions(self) -> int:
        return self.multiplicity.sessions
