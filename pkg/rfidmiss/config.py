"""Experiment configuration

A configuration is layered, from lowest to highest precedence:

1. the defaults of `ExperimentConfig` (and of the command)
2. a named preset (`--preset`)
3. a plain `key = value` file (`--config`)
4. environment variables prefixed with `RFIDMISS_`, e.g. `RFIDMISS_TRIALS=50`
5. command-line flags

Keys are the flag names without the leading dashes (`n`, `p`, `r-min`, ...).
Repeatable keys (`p`, `rho`, `estimator`) take comma-separated values.
"""
from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import (
    Any,
    Callable,
    Dict,
    Iterable,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from .controller import DEFAULT_MAX_SESSIONS, DEFAULT_THRESHOLD, StopPolicy
from .report import Estimator
from .utils import InvalidConfigError

logger = logging.getLogger(__name__)

ENV_PREFIX = "RFIDMISS_"

COMMANDS = ("simulate", "correlated", "stop")

# Margins applied when none is configured
INDEPENDENT_MARGIN = 0
CORRELATED_MARGIN = 2


@dataclass(frozen=True)
class ExperimentConfig:
    """What to simulate and how often

    Args:
        n_tags: The number of tags N
        p: The error probabilities to simulate
        rho: The session correlations to simulate, 0 for independent sessions
        estimators: The estimators to evaluate
        r_min: and
        r_max: The range of session counts R of a sweep
        trials: Independent trials per parameter combination
        seed: The seed of trial 0, trial t uses seed + t
        threshold: The stop threshold t₁
        margin: Extra sessions after the threshold is met, `None` for 0 with
            independent and 2 with correlated sessions
        bias: Added to p̂_M before comparing it with the threshold
        min_sessions: Sessions before the first stop decision
        max_sessions: The session cap
        out: Where to write the CSV, `None` for stdout
        jobs: Worker processes running the trials
        preset: The preset the configuration started from
    """

    n_tags: int = 500
    p: Tuple[float, ...] = (0.2,)
    rho: Tuple[float, ...] = (0.0,)
    estimators: Tuple[Estimator, ...] = (
        Estimator.RME,
        Estimator.REGM,
        Estimator.SCHNABEL,
    )
    r_min: int = 2
    r_max: int = 12
    trials: int = 1000
    seed: int = 0
    threshold: float = DEFAULT_THRESHOLD
    margin: Optional[int] = None
    bias: float = 0.0
    min_sessions: int = 2
    max_sessions: int = DEFAULT_MAX_SESSIONS
    out: Optional[str] = None
    jobs: int = 1
    preset: Optional[str] = None

    def margin_for(self, rho: float) -> int:
        """The margin sessions for a session correlation"""
        if self.margin is not None:
            return self.margin
        return INDEPENDENT_MARGIN if rho == 0 else CORRELATED_MARGIN

    def stop_policy(self, rho: float) -> StopPolicy:
        """The stop policy for a session correlation"""
        return StopPolicy(
            threshold=self.threshold,
            margin_sessions=self.margin_for(rho),
            bias_addend=self.bias,
            max_sessions=self.max_sessions,
            min_sessions=self.min_sessions,
        )

    def sessions(self) -> range:
        """The session counts of a sweep"""
        return range(self.r_min, self.r_max + 1)

    def metadata(self) -> Dict[str, str]:
        """Every field as text, for the `#` lines of the output"""
        out = {}
        for key, value in asdict(self).items():
            if isinstance(value, tuple):
                value = ";".join(
                    item.value if isinstance(item, Estimator) else str(item)
                    for item in value
                )
            out[key] = "" if value is None else str(value)
        return out

    def validate(self, command: str) -> ExperimentConfig:
        """Check the configuration for a command

        Raises:
            InvalidConfigError: naming the first invalid field
        """
        if self.n_tags < 1:
            raise InvalidConfigError("n", f"must be >= 1, got {self.n_tags}.")
        if self.trials < 1:
            raise InvalidConfigError(
                "trials", f"must be >= 1, got {self.trials}."
            )
        if self.jobs < 1:
            raise InvalidConfigError("jobs", f"must be >= 1, got {self.jobs}.")
        if not self.p or any(not 0 <= p <= 1 for p in self.p):
            raise InvalidConfigError(
                "p", f"every value must be in [0, 1], got {self.p}."
            )
        if not self.rho or any(not 0 <= rho <= 1 for rho in self.rho):
            raise InvalidConfigError(
                "rho", f"every value must be in [0, 1], got {self.rho}."
            )
        if not self.estimators:
            raise InvalidConfigError("estimator", "at least one is needed.")
        if self.r_min < 2:
            raise InvalidConfigError(
                "r-min", f"the estimators need 2 sessions, got {self.r_min}."
            )
        if self.r_max < self.r_min:
            raise InvalidConfigError(
                "r-max", f"must be >= r-min ({self.r_min}), got {self.r_max}."
            )
        if self.r_max > self.max_sessions:
            raise InvalidConfigError(
                "r-max",
                f"must be <= max-sessions ({self.max_sessions}), "
                f"got {self.r_max}.",
            )
        # the stop policy checks threshold, margin, bias and session bounds
        self.stop_policy(0.0)

        if Estimator.TWO_SESSION in self.estimators and (
            command == "stop" or self.r_max > 2
        ):
            raise InvalidConfigError(
                "estimator",
                "two-session only applies to R = 2, use --r-max 2 "
                "with simulate or correlated.",
            )
        if command == "simulate":
            if any(rho != 0 for rho in self.rho):
                raise InvalidConfigError(
                    "rho", "simulate is for independent sessions, "
                    "use `correlated` for rho > 0."
                )
            if len(self.p) != 1:
                raise InvalidConfigError(
                    "p", f"simulate takes a single p, got {self.p}."
                )
        if command == "correlated":
            if any(rho == 0 for rho in self.rho):
                raise InvalidConfigError(
                    "rho", "rho = 0 means independent sessions, "
                    "use `simulate` instead."
                )
        if command in ("correlated", "stop") and any(
            p == 1 and rho > 0 for p in self.p for rho in self.rho
        ):
            raise InvalidConfigError(
                "p", "correlated sessions need p < 1."
            )
        return self


def _floats(raw: Union[str, Sequence[str]]) -> Tuple[float, ...]:
    return tuple(float(item) for item in _split(raw))


def _estimators(raw: Union[str, Sequence[str]]) -> Tuple[Estimator, ...]:
    return tuple(Estimator.parse(item) for item in _split(raw))


def _split(raw: Union[str, Sequence[str]]) -> Iterable[str]:
    items = [raw] if isinstance(raw, str) else list(raw)
    for item in items:
        for part in str(item).split(","):
            if part.strip():
                yield part.strip()


def _optional_str(raw: str) -> Optional[str]:
    raw = str(raw).strip()
    return raw or None


# key => (field, parser)
KEYS: Dict[str, Tuple[str, Callable[[Any], Any]]] = {
    "n": ("n_tags", int),
    "p": ("p", _floats),
    "rho": ("rho", _floats),
    "estimator": ("estimators", _estimators),
    "r-min": ("r_min", int),
    "r-max": ("r_max", int),
    "trials": ("trials", int),
    "seed": ("seed", int),
    "threshold": ("threshold", float),
    "margin": ("margin", int),
    "bias": ("bias", float),
    "min-sessions": ("min_sessions", int),
    "max-sessions": ("max_sessions", int),
    "out": ("out", _optional_str),
    "jobs": ("jobs", int),
    "preset": ("preset", _optional_str),
}

_SIMULATE_SWEEP = dict(
    n_tags=500,
    p=(0.2,),
    rho=(0.0,),
    estimators=(Estimator.RME, Estimator.REGM, Estimator.SCHNABEL),
    r_min=2,
    r_max=12,
    trials=1000,
)
_PM_SWEEP = dict(
    _SIMULATE_SWEEP,
    estimators=(Estimator.REGM, Estimator.SCHNABEL),
    r_max=14,
)
_CORRELATED_SWEEP = dict(
    _SIMULATE_SWEEP,
    rho=(0.1, 0.3),
    estimators=(Estimator.REGM, Estimator.SCHNABEL),
)
_STOP = dict(
    n_tags=500,
    rho=(0.0,),
    estimators=(Estimator.REGM,),
    trials=1000,
    threshold=1e-5,
    margin=0,
)

# name => (command, values)
PRESETS: Dict[str, Tuple[str, Dict[str, Any]]] = {
    "fig2": ("simulate", _SIMULATE_SWEEP),
    "fig3": ("simulate", _SIMULATE_SWEEP),
    "fig4": ("simulate", _SIMULATE_SWEEP),
    "pm-p01": ("simulate", dict(_PM_SWEEP, p=(0.1,))),
    "pm-p02": ("simulate", dict(_PM_SWEEP, p=(0.2,))),
    "fig5": ("correlated", _CORRELATED_SWEEP),
    "fig6": ("correlated", _CORRELATED_SWEEP),
    "fig7": (
        "correlated",
        dict(_CORRELATED_SWEEP, p=(0.1, 0.2), rho=(0.3,), r_max=14),
    ),
    "stop-p01": ("stop", dict(_STOP, p=(0.1,))),
    "stop-p02": ("stop", dict(_STOP, p=(0.2,))),
    "stop-corr": ("stop", dict(_STOP, p=(0.2,), rho=(0.3,), margin=2)),
}

# Command defaults that differ from the dataclass defaults
COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "correlated": dict(
        rho=(0.1, 0.3),
        estimators=(Estimator.REGM, Estimator.SCHNABEL),
    ),
    "stop": dict(p=(0.1,), estimators=(Estimator.REGM,)),
}


def parse_values(raw: Mapping[str, Any], source: str) -> Dict[str, Any]:
    """Turn raw `key => text` pairs into typed config fields

    Args:
        raw: The raw values, keyed by flag name
        source: Where the values come from, for the error messages

    Returns:
        The typed values keyed by field name
    """
    out = {}
    for key, value in raw.items():
        try:
            field, parser = KEYS[key]
        except KeyError:
            raise InvalidConfigError(
                key, f"unknown key in {source}."
            ) from None
        try:
            out[field] = parser(value)
        except ValueError as err:
            raise InvalidConfigError(
                key, f"invalid value {value!r} in {source}: {err}"
            ) from None
    return out


def read_config_file(path: str) -> Dict[str, str]:
    """Read a plain `key = value` file, `#` starts a comment"""
    raw: Dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as err:
        raise InvalidConfigError("config", f"cannot read {path}: {err}")

    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(
                "config", f"{path}:{lineno}: expected `key = value`."
            )
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("_", "-")
        if key in raw and key in ("p", "rho", "estimator"):
            value = f"{raw[key]},{value}"
        raw[key] = value
    return raw


def read_environ(environ: Mapping[str, str] = None) -> Dict[str, str]:
    """Collect the `RFIDMISS_*` variables, keyed by flag name"""
    environ = os.environ if environ is None else environ
    raw = {}
    for key in KEYS:
        name = ENV_PREFIX + key.upper().replace("-", "_")
        if name in environ:
            raw[key] = environ[name]
    return raw


def resolve_config(
    command: str,
    flags: Mapping[str, Any] = None,
    config_file: str = None,
    environ: Mapping[str, str] = None,
) -> ExperimentConfig:
    """Layer defaults, preset, file, environment and flags into a config

    Args:
        command: The command the configuration is for
        flags: Raw values given on the command line, keyed by flag name
        config_file: The path of a `key = value` file
        environ: The environment, `os.environ` by default

    Returns:
        The validated configuration
    """
    layers = [
        parse_values(read_config_file(config_file), config_file)
        if config_file
        else {},
        parse_values(read_environ(environ), "the environment"),
        parse_values(flags or {}, "the command line"),
    ]

    preset = None
    for layer in layers:
        preset = layer.get("preset", preset)

    values: Dict[str, Any] = dict(COMMAND_DEFAULTS.get(command, {}))
    if preset is not None:
        try:
            preset_command, preset_values = PRESETS[preset]
        except KeyError:
            raise InvalidConfigError(
                "preset",
                f"unknown preset {preset!r}, choose from: "
                f"{', '.join(PRESETS)}.",
            ) from None
        if preset_command != command:
            raise InvalidConfigError(
                "preset",
                f"{preset!r} is a `{preset_command}` preset, "
                f"not a `{command}` one.",
            )
        values.update(preset_values)
    for layer in layers:
        values.update(layer)

    names = {f.name for f in fields(ExperimentConfig)}
    config = replace(
        ExperimentConfig(),
        **{key: val for key, val in values.items() if key in names},
    )
    logger.debug("Resolved configuration for %s: %s", command, config)
    return config.validate(command)
