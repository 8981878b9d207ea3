"""Monte Carlo experiments: estimator sweeps over R, stop-rule runs and the
exact lemma checks

Every trial runs on its own generator seeded with `seed + trial`, so trials
can run in any order and on any number of workers. Results are always put
back in trial order before they are summarized.
"""
from __future__ import annotations

import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import (
    IO,
    Any,
    Callable,
    Dict,
    Iterable,
    List,
    Optional,
    Sequence,
    Tuple,
)

import pandas as pd
from pipda import register_verb

from . import __version__
from .config import ExperimentConfig
from .controller import StopPolicy, run_sequential
from .estimators import lemma1_bias, p_missing, required_sessions
from .history import ReadHistory, tally_reads
from .oracle import MAX_TAGS, P_GRID, lemma_sweep
from .report import Estimator, estimate, estimate_tally
from .simulation import make_source, trial_seed
from .utils import RNG_ALGORITHM, InvalidConfigError

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "estimator",
    "R",
    "mean_p_hat",
    "mean_n_hat",
    "mse_n",
    "mean_p_m",
    "trials",
    "seed",
    "true_p_m",
]
CORRELATED_COLUMNS = SWEEP_COLUMNS[:-1] + [
    "p",
    "rho",
    "mean_distinct",
    "error_rate",
    "true_p_m",
]
STOP_COLUMNS = [
    "trial",
    "p",
    "rho",
    "estimator",
    "stop_r",
    "first_satisfied_r",
    "cap_reached",
    "missed",
    "seed",
]
ESTIMATE_COLUMNS = [
    "estimator",
    "R",
    "p_hat",
    "n_hat",
    "p_m_hat",
    "observed",
    "bias",
]

LEMMA1_TOLERANCE = 1e-12
LEMMA2_TOLERANCE = 1e-9
BIAS_LIMIT = 0.01


@dataclass(frozen=True)
class SweepTask:
    """One trial of an estimator sweep"""

    n_tags: int
    p: float
    rho: float
    seed: int
    trial: int
    sessions: Tuple[int, ...]
    estimators: Tuple[Estimator, ...]


@dataclass(frozen=True)
class StopTask:
    """One trial of the sequential stop rule"""

    n_tags: int
    p: float
    rho: float
    seed: int
    trial: int
    estimator: Estimator
    policy: StopPolicy
    keep_missed: bool = False


def sweep_trial(task: SweepTask) -> List[Dict[str, Any]]:
    """Estimate with every estimator at every R over one simulated history"""
    seed = trial_seed(task.seed, task.trial)
    source = make_source(task.n_tags, task.p, task.rho, seed)
    history = source.take(max(task.sessions))
    tallies = {R: tally_reads(history.reads[:R]) for R in task.sessions}
    error_rates = history.error_rates()

    rows = []
    for estimator in task.estimators:
        for R in task.sessions:
            report = estimate_tally(tallies[R], estimator)
            rows.append(
                {
                    "trial": task.trial,
                    "p": task.p,
                    "rho": task.rho,
                    "estimator": estimator.value,
                    "R": R,
                    "p_hat": report.p_hat,
                    "n_hat": report.n_hat,
                    "p_m_hat": report.p_m_hat,
                    "observed": report.observed,
                    "error_rate": float(error_rates[R - 1]),
                }
            )
    return rows


def stop_trial(
    task: StopTask,
) -> Tuple[Dict[str, Any], Optional[ReadHistory]]:
    """Run the stop rule once and check the outcome against the truth

    Returns:
        The result row, and the read history if a tag was missed and
        `task.keep_missed` is set
    """
    seed = trial_seed(task.seed, task.trial)
    source = make_source(task.n_tags, task.p, task.rho, seed)
    log = run_sequential(source, task.estimator, task.policy)
    missed = log.missed > 0
    row = {
        "trial": task.trial,
        "p": task.p,
        "rho": task.rho,
        "estimator": task.estimator.value,
        "stop_r": log.stopped_at,
        "first_satisfied_r": log.first_satisfied_at,
        "cap_reached": log.cap_reached,
        "missed": missed,
        "seed": seed,
    }
    return row, log.history if missed and task.keep_missed else None


def run_trials(
    func: Callable[[Any], Any],
    tasks: Sequence[Any],
    jobs: int = 1,
) -> List[Any]:
    """Run the tasks, in parallel if `jobs > 1`, results in task order"""
    if jobs <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]

    chunksize = max(1, len(tasks) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(func, tasks, chunksize=chunksize))


def sweep_frame(config: ExperimentConfig) -> pd.DataFrame:
    """Per-trial estimates for every (p, rho, estimator, R)"""
    tasks = [
        SweepTask(
            n_tags=config.n_tags,
            p=p,
            rho=rho,
            seed=config.seed,
            trial=trial,
            sessions=tuple(config.sessions()),
            estimators=tuple(config.estimators),
        )
        for p in config.p
        for rho in config.rho
        for trial in range(config.trials)
    ]
    logger.info(
        "Sweeping R=%d..%d over %d trials with %s",
        config.r_min,
        config.r_max,
        len(tasks),
        ", ".join(est.value for est in config.estimators),
    )
    results = run_trials(sweep_trial, tasks, config.jobs)
    return pd.DataFrame([row for rows in results for row in rows])


@register_verb(pd.DataFrame, ast_fallback="piping")
def summarize_sweep(
    data: pd.DataFrame,
    n_tags: int,
    seed: int,
    by: Sequence[str] = ("estimator", "R"),
) -> pd.DataFrame:
    """Average the per-trial estimates of a sweep

    >>> trials >> summarize_sweep(n_tags=500, seed=0)

    Args:
        data: The per-trial frame from `sweep_frame`
        n_tags: The true N, for the mean squared error of N̂
        seed: The seed of the sweep, copied into every row
        by: The grouping columns

    Returns:
        One row per group. Undefined N̂ are left out of the N̂ means.
        `true_p_m` is p_M from the simulated p and N.
    """
    true_p_m = [p_missing(p, n_tags, R) for p, R in zip(data["p"], data["R"])]
    out = (
        data.assign(
            sq_err=(data["n_hat"] - n_tags) ** 2,
            true_p_m=true_p_m,
        )
        .groupby(list(by), sort=False)
        .agg(
            mean_p_hat=("p_hat", "mean"),
            mean_n_hat=("n_hat", "mean"),
            mse_n=("sq_err", "mean"),
            mean_p_m=("p_m_hat", "mean"),
            true_p_m=("true_p_m", "first"),
            trials=("trial", "size"),
            mean_distinct=("observed", "mean"),
            error_rate=("error_rate", "mean"),
        )
        .reset_index()
    )
    out["seed"] = seed
    return out


@register_verb(pd.DataFrame, ast_fallback="piping")
def summarize_stops(data: pd.DataFrame) -> pd.DataFrame:
    """Stop-R distribution and miss rate per (p, rho, estimator)

    >>> stops >> summarize_stops()
    """
    return (
        data.groupby(["p", "rho", "estimator"], sort=False)
        .agg(
            trials=("trial", "size"),
            median_stop_r=("stop_r", "median"),
            mean_stop_r=("stop_r", "mean"),
            miss_rate=("missed", "mean"),
            cap_rate=("cap_reached", "mean"),
        )
        .reset_index()
    )


def simulate_sweep(config: ExperimentConfig) -> pd.DataFrame:
    """The independent-session sweep, one row per (estimator, R)"""
    trials = sweep_frame(config)
    summary = trials >> summarize_sweep(n_tags=config.n_tags, seed=config.seed)
    return summary[SWEEP_COLUMNS]


def correlated_sweep(config: ExperimentConfig) -> pd.DataFrame:
    """The correlated-session sweep, one row per (p, rho, estimator, R)"""
    trials = sweep_frame(config)
    summary = trials >> summarize_sweep(
        n_tags=config.n_tags,
        seed=config.seed,
        by=("p", "rho", "estimator", "R"),
    )
    return summary[CORRELATED_COLUMNS]


def stop_runs(
    config: ExperimentConfig,
    export_history: str = None,
) -> pd.DataFrame:
    """One row per stop-rule trial

    Args:
        config: The configuration
        export_history: A directory to write the read history of every
            trial that stopped with a tag still unread

    Returns:
        The per-trial frame
    """
    if export_history is not None:
        try:
            os.makedirs(export_history, exist_ok=True)
        except OSError as err:
            raise InvalidConfigError(
                "export-history", f"cannot create {export_history}: {err}"
            ) from None

    tasks = [
        StopTask(
            n_tags=config.n_tags,
            p=p,
            rho=rho,
            seed=config.seed,
            trial=trial,
            estimator=estimator,
            policy=config.stop_policy(rho),
            keep_missed=export_history is not None,
        )
        for p in config.p
        for rho in config.rho
        for estimator in config.estimators
        for trial in range(config.trials)
    ]
    logger.info("Running the stop rule over %d trials", len(tasks))
    results = run_trials(stop_trial, tasks, config.jobs)

    for row, history in results:
        if history is None:
            continue
        path = os.path.join(
            export_history,
            f"{row['estimator']}-p{row['p']}-rho{row['rho']}-"
            f"trial{row['trial']}.csv",
        )
        logger.info("Exporting the history of a missed tag to %s", path)
        history.to_csv(path)

    frame = pd.DataFrame([row for row, _ in results])
    frame["first_satisfied_r"] = frame["first_satisfied_r"].astype("Int64")
    summary = frame >> summarize_stops()
    for _, stats in summary.iterrows():
        logger.info(
            "[%s] p=%s rho=%s: median stop R %s, miss rate %s",
            stats["estimator"],
            stats["p"],
            stats["rho"],
            stats["median_stop_r"],
            stats["miss_rate"],
        )
    return frame[STOP_COLUMNS]


def summary_lines(stops: pd.DataFrame) -> List[str]:
    """The `# summary,...` block closing the stop output"""
    summary = stops >> summarize_stops()
    lines = ["# summary," + ",".join(summary.columns)]
    for row in summary.itertuples(index=False):
        lines.append("# summary," + ",".join(str(value) for value in row))
    return lines


def estimate_history(
    history: ReadHistory,
    estimators: Iterable[Estimator],
    r_min: int = 2,
) -> pd.DataFrame:
    """Estimate from every prefix of a recorded history

    The two-session estimator only contributes the R = 2 row.
    """
    rows = []
    for estimator in estimators:
        for R in range(max(2, r_min), history.sessions + 1):
            if estimator is Estimator.TWO_SESSION and R != 2:
                continue
            report = estimate(history.head(R), estimator)
            rows.append(report.as_dict() | {"R": R})
    return pd.DataFrame(rows, columns=ESTIMATE_COLUMNS)


def verify_lemmas() -> pd.DataFrame:
    """Check the exact enumeration against the closed forms

    Returns:
        One row per check with columns check, value, relation, limit and
        passed
    """
    sweep = lemma_sweep(range(1, MAX_TAGS + 1), P_GRID)
    lemma1_delta = float(sweep["lemma1_delta"].max())
    lemma2_delta = float(sweep["lemma2_delta"].max())
    bias = lemma1_bias(46, 0.9)
    stop_p01 = required_sessions(0.1, 500, 1e-5)
    stop_p02 = required_sessions(0.2, 500, 1e-5)
    checks = [
        (
            "lemma1 max |Δ|",
            lemma1_delta,
            "≤",
            LEMMA1_TOLERANCE,
            lemma1_delta <= LEMMA1_TOLERANCE,
        ),
        (
            "lemma2 max |Δ|",
            lemma2_delta,
            "≤",
            LEMMA2_TOLERANCE,
            lemma2_delta <= LEMMA2_TOLERANCE,
        ),
        ("bias N=46 p=0.9", bias, "<", BIAS_LIMIT, bias < BIAS_LIMIT),
        ("true p_M stop R p=0.1", stop_p01, "=", 8, stop_p01 == 8),
        ("true p_M stop R p=0.2", stop_p02, "=", 12, stop_p02 == 12),
    ]
    return pd.DataFrame(
        checks,
        columns=["check", "value", "relation", "limit", "passed"],
    )


def metadata_lines(command: str, config: ExperimentConfig = None) -> List[str]:
    """The `#` lines heading every output"""
    lines = [
        f"# rfidmiss {__version__}",
        f"# command={command}",
        f"# rng={RNG_ALGORITHM}",
    ]
    if config is not None:
        lines.extend(
            f"# {key}={value}" for key, value in config.metadata().items()
        )
    return lines


def check_target(target: Optional[str]) -> None:
    """Make sure the output can be written before any trial runs

    Raises:
        InvalidConfigError: for the `out` field
    """
    if target is None:
        return
    try:
        with open(target, "a", encoding="utf-8"):
            pass
    except OSError as err:
        raise InvalidConfigError(
            "out", f"cannot write {target}: {err}"
        ) from None


def write_csv(
    frame: pd.DataFrame,
    header: Sequence[str],
    target: str = None,
    footer: Sequence[str] = (),
) -> None:
    """Write a frame as CSV, framed by `#` lines

    Args:
        frame: The data rows
        header: `#` lines written before the header row
        target: The output path, `None` for stdout
        footer: `#` lines written after the data rows
    """
    try:
        fh: IO[str] = (
            sys.stdout
            if target is None
            else open(target, "w", encoding="utf-8", newline="")
        )
    except OSError as err:
        raise InvalidConfigError("out", f"cannot write {target}: {err}")

    try:
        for line in header:
            fh.write(f"{line}\n")
        frame.to_csv(fh, index=False, lineterminator="\n")
        for line in footer:
            fh.write(f"{line}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
