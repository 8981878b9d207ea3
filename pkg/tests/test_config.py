import pytest

from rfidmiss.config import (
    PRESETS,
    ExperimentConfig,
    parse_values,
    read_config_file,
    read_environ,
    resolve_config,
)
from rfidmiss.report import Estimator
from rfidmiss.utils import InvalidConfigError


def test_defaults():
    config = resolve_config("simulate", environ={})
    assert config == ExperimentConfig()
    assert config.n_tags == 500
    assert config.trials == 1000
    assert list(config.sessions()) == list(range(2, 13))


def test_command_defaults():
    config = resolve_config("correlated", environ={})
    assert config.rho == (0.1, 0.3)
    assert config.estimators == (Estimator.REGM, Estimator.SCHNABEL)

    config = resolve_config("stop", environ={})
    assert config.p == (0.1,)
    assert config.estimators == (Estimator.REGM,)


def test_margin_defaults_depend_on_correlation():
    config = ExperimentConfig()
    assert config.margin_for(0.0) == 0
    assert config.margin_for(0.3) == 2
    assert config.stop_policy(0.3).margin_sessions == 2
    assert ExperimentConfig(margin=1).margin_for(0.3) == 1


def test_parse_values():
    values = parse_values(
        {"n": "100", "p": ["0.1", "0.2,0.3"], "estimator": "REGM,rme"},
        "test",
    )
    assert values == {
        "n_tags": 100,
        "p": (0.1, 0.2, 0.3),
        "estimators": (Estimator.REGM, Estimator.RME),
    }


def test_parse_values_invalid():
    with pytest.raises(InvalidConfigError, match=r"\[trials\] invalid value"):
        parse_values({"trials": "many"}, "test")
    with pytest.raises(InvalidConfigError, match=r"\[colour\] unknown key"):
        parse_values({"colour": "red"}, "test")
    with pytest.raises(InvalidConfigError, match=r"\[estimator\]"):
        parse_values({"estimator": "median"}, "test")


def test_read_config_file(tmp_path):
    path = tmp_path / "sweep.conf"
    path.write_text(
        "# a sweep\n"
        "trials = 20\n"
        "r_max = 6  # short\n"
        "\n"
        "p = 0.1\n"
        "p = 0.2\n"
    )
    assert read_config_file(str(path)) == {
        "trials": "20",
        "r-max": "6",
        "p": "0.1,0.2",
    }


def test_read_config_file_invalid(tmp_path):
    path = tmp_path / "bad.conf"
    path.write_text("trials 20\n")
    with pytest.raises(InvalidConfigError, match="expected `key = value`"):
        read_config_file(str(path))
    with pytest.raises(InvalidConfigError, match=r"\[config\] cannot read"):
        read_config_file(str(tmp_path / "missing.conf"))


def test_read_environ():
    environ = {"RFIDMISS_TRIALS": "50", "RFIDMISS_R_MAX": "8", "HOME": "/"}
    assert read_environ(environ) == {"trials": "50", "r-max": "8"}


def test_layers(tmp_path):
    path = tmp_path / "sweep.conf"
    path.write_text("trials = 20\nseed = 3\nr-max = 6\n")
    config = resolve_config(
        "simulate",
        flags={"trials": "5"},
        config_file=str(path),
        environ={"RFIDMISS_SEED": "9", "RFIDMISS_PRESET": "pm-p01"},
    )
    # preset < file < environment < flags
    assert config.p == (0.1,)
    assert config.r_max == 6
    assert config.seed == 9
    assert config.trials == 5
    assert config.preset == "pm-p01"


def test_presets():
    assert set(PRESETS) == {
        "fig2",
        "fig3",
        "fig4",
        "pm-p01",
        "pm-p02",
        "fig5",
        "fig6",
        "fig7",
        "stop-p01",
        "stop-p02",
        "stop-corr",
    }
    for name, (command, _) in PRESETS.items():
        config = resolve_config(command, flags={"preset": name}, environ={})
        assert config.n_tags == 500
        assert config.trials == 1000
        assert config.threshold == 1e-5
        assert set(config.rho) <= {0.0, 0.1, 0.3}
        assert set(config.p) <= {0.1, 0.2}

    fig5 = resolve_config("correlated", flags={"preset": "fig5"}, environ={})
    assert fig5.p == (0.2,)
    assert fig5.rho == (0.1, 0.3)

    corr = resolve_config("stop", flags={"preset": "stop-corr"}, environ={})
    assert corr.margin_for(0.3) == 2


def test_preset_errors():
    with pytest.raises(InvalidConfigError, match="unknown preset"):
        resolve_config("simulate", flags={"preset": "fig9"}, environ={})
    with pytest.raises(InvalidConfigError, match="is a `correlated` preset"):
        resolve_config("simulate", flags={"preset": "fig5"}, environ={})


@pytest.mark.parametrize(
    "command, flags, field",
    [
        ("simulate", {"trials": "0"}, "trials"),
        ("simulate", {"n": "0"}, "n"),
        ("simulate", {"p": "1.5"}, "p"),
        ("simulate", {"p": "0.1,0.2"}, "p"),
        ("simulate", {"rho": "0.3"}, "rho"),
        ("simulate", {"r-min": "1"}, "r-min"),
        ("simulate", {"r-min": "5", "r-max": "4"}, "r-max"),
        ("simulate", {"r-max": "70"}, "r-max"),
        ("simulate", {"estimator": "two-session"}, "estimator"),
        ("correlated", {"rho": "0"}, "rho"),
        ("correlated", {"p": "1"}, "p"),
        ("stop", {"threshold": "0"}, "threshold"),
        ("stop", {"margin": "-1"}, "margin"),
        ("stop", {"jobs": "0"}, "jobs"),
    ],
)
def test_validate(command, flags, field):
    with pytest.raises(InvalidConfigError) as err:
        resolve_config(command, flags=flags, environ={})
    assert err.value.field == field


def test_correlated_rejects_independent_sessions_with_guidance():
    with pytest.raises(InvalidConfigError, match="use `simulate` instead"):
        resolve_config("correlated", flags={"rho": "0.0"}, environ={})


def test_two_session_sweep():
    config = resolve_config(
        "simulate",
        flags={"estimator": ["two-session"], "r-max": "2"},
        environ={},
    )
    assert config.estimators == (Estimator.TWO_SESSION,)


def test_metadata():
    meta = ExperimentConfig(seed=4).metadata()
    assert meta["seed"] == "4"
    assert meta["estimators"] == "rme;regm;schnabel"
    assert meta["out"] == ""
    assert meta["p"] == "0.2"
