"""Provides ReadHistory, the per-tag per-session read outcomes, and the
`tally` verb that reduces it to what the estimators can observe"""
from __future__ import annotations

from dataclasses import dataclass, field
from os import PathLike
from typing import IO, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pipda import register_verb

from .tallies import MultiplicityVector, SchnabelTallies, Tally

CsvTarget = Union[str, PathLike, IO[str]]


@dataclass(frozen=True, eq=False)
class ReadHistory:
    """Which tag was read in which reader session

    Args:
        reads: A boolean matrix, one row per session and one column per tag.
            `True` means the tag was read in that session.
        tag_ids: Optional identifiers of the tags (the CSV header)
    """

    reads: np.ndarray
    tag_ids: Tuple[str, ...] = field(default=None)

    def __post_init__(self) -> None:
        reads = np.asarray(self.reads, dtype=bool)
        if reads.ndim == 1:
            reads = reads[None, :]
        if reads.ndim != 2 or reads.shape[0] < 1:
            raise ValueError(
                "A read history needs a (sessions, tags) matrix "
                "with at least 1 session."
            )
        reads.setflags(write=False)
        object.__setattr__(self, "reads", reads)

        tag_ids = self.tag_ids
        if tag_ids is None:
            tag_ids = tuple(str(i) for i in range(1, reads.shape[1] + 1))
        tag_ids = tuple(str(tag) for tag in tag_ids)
        if len(tag_ids) != reads.shape[1]:
            raise ValueError(
                f"Got {len(tag_ids)} tag ids for {reads.shape[1]} tags."
            )
        object.__setattr__(self, "tag_ids", tag_ids)

    def __len__(self) -> int:
        return self.sessions

    def __repr__(self) -> str:
        return f"ReadHistory(sessions={self.sessions}, tags={self.n_tags})"

    @property
    def sessions(self) -> int:
        """The number of reader sessions R"""
        return self.reads.shape[0]

    @property
    def n_tags(self) -> int:
        """The number of tags in the population (read or not)"""
        return self.reads.shape[1]

    @property
    def missed(self) -> int:
        """Tags read in no session, known only to a simulator"""
        return int((~self.reads.any(axis=0)).sum())

    def head(self, sessions: int) -> ReadHistory:
        """The history of the first `sessions` sessions"""
        if not 1 <= sessions <= self.sessions:
            raise ValueError(
                f"`sessions` must be in [1, {self.sessions}], got {sessions}."
            )
        return ReadHistory(self.reads[:sessions], self.tag_ids)

    def extend(self, session: Sequence[bool]) -> ReadHistory:
        """A new history with one more session appended"""
        row = np.asarray(session, dtype=bool)[None, :]
        return ReadHistory(np.vstack([self.reads, row]), self.tag_ids)

    def error_rates(self) -> np.ndarray:
        """The fraction of tags not read, per session"""
        return 1.0 - self.reads.mean(axis=1)

    def to_frame(self) -> pd.DataFrame:
        """The history as 0/1 frame, sessions as rows and tags as columns"""
        frame = pd.DataFrame(
            self.reads.astype(int),
            columns=list(self.tag_ids),
        )
        frame.index = pd.RangeIndex(1, self.sessions + 1, name="session")
        return frame

    def to_csv(self, target: CsvTarget) -> None:
        """Export as a CSV matrix: tag ids as header, one row per session"""
        self.to_frame().to_csv(target, index=False, lineterminator="\n")

    @classmethod
    def from_csv(cls, source: CsvTarget) -> ReadHistory:
        """Load a history exported by `to_csv` (or recorded the same way)"""
        frame = pd.read_csv(source, comment="#", dtype=str)
        values = frame.apply(lambda col: col.str.strip()).to_numpy()
        invalid = ~np.isin(values, ["0", "1"])
        if invalid.any():
            row, col = np.argwhere(invalid)[0]
            raise ValueError(
                f"Session {row + 1}, tag {frame.columns[col]}: "
                f"expected 0 or 1, got {values[row, col]!r}."
            )
        return cls(values == "1", tuple(frame.columns))


def tally_reads(reads: np.ndarray) -> Tally:
    """Count what the readers can observe from a boolean read matrix"""
    reads = np.asarray(reads, dtype=bool)
    R = reads.shape[0]

    times_read = reads.sum(axis=0)
    by_times = np.bincount(times_read, minlength=R + 1)
    # counts[i]: tags read in exactly R - i sessions; tags never read are
    # in by_times[0] and stay out
    counts = tuple(int(by_times[R - i]) for i in range(R))

    seen = np.logical_or.accumulate(reads, axis=0)
    seen_before = np.vstack([np.zeros_like(seen[:1]), seen[:-1]])
    schnabel = SchnabelTallies(
        n=tuple(int(x) for x in reads.sum(axis=1)),
        m=tuple(int(x) for x in (reads & seen_before).sum(axis=1)),
        M=tuple(int(x) for x in seen_before.sum(axis=1)),
    )
    return Tally(
        multiplicity=MultiplicityVector(counts),
        schnabel=schnabel,
        observed=int(seen[-1].sum()),
    )


@register_verb(ReadHistory, ast_fallback="normal")
def tally(data: ReadHistory) -> Tally:
    """Reduce a read history to the multiplicity vector, the Schnabel
    tallies and the number of distinct tags observed

    >>> history >> tally()
    """
    return tally_reads(data.reads)


@tally.register(np.ndarray)
def _(data: np.ndarray) -> Tally:
    return tally_reads(ReadHistory(data).reads)
