import math

import pytest

from rfidmiss.estimators import lemma1_expected_p
from rfidmiss.oracle import (
    MAX_TAGS,
    P_GRID,
    enumerate_outcomes,
    exact_expected_n,
    exact_expected_p,
    lemma_sweep,
    monte_carlo_expected_p,
    multinomial_coefficient,
)
from rfidmiss.utils import OracleRangeError


def test_multinomial_coefficient():
    assert multinomial_coefficient(3, 1, 1, 1) == 6
    assert multinomial_coefficient(4, 2, 2, 0) == 6
    assert multinomial_coefficient(12, 12, 0, 0) == 1

    with pytest.raises(ValueError):
        multinomial_coefficient(3, 1, 1)


def test_enumerate_outcomes():
    outcomes = enumerate_outcomes(3, 0.3)
    assert len(outcomes) == 10
    assert math.fsum(out.probability for out in outcomes) == pytest.approx(1.0)
    assert all(out.k1 + out.k2 + out.k3 == 3 for out in outcomes)


@pytest.mark.parametrize("N", [0, 13, 2.5])
def test_enumerate_outcomes_out_of_range(N):
    with pytest.raises(OracleRangeError):
        enumerate_outcomes(N, 0.5)


def test_exact_expected_p():
    assert exact_expected_p(3, 0.5) == pytest.approx(0.596875, abs=1e-12)
    assert exact_expected_p(1, 0.0) == 0.0
    assert exact_expected_p(1, 1.0) == 1.0


def test_exact_expected_n():
    assert exact_expected_n(5, 0.3) == pytest.approx(5.0, abs=1e-9)
    with pytest.raises(OracleRangeError):
        exact_expected_n(5, 1.0)


def test_lemma_sweep():
    sweep = lemma_sweep()
    assert len(sweep) == MAX_TAGS * len(P_GRID)
    assert list(sweep.columns) == [
        "N",
        "p",
        "expected_p",
        "lemma1",
        "lemma1_delta",
        "expected_n",
        "lemma2_delta",
    ]
    assert sweep["lemma1_delta"].max() <= 1e-12
    assert sweep["lemma2_delta"].max() <= 1e-9
    # no cardinality oracle for p = 1
    assert sweep.loc[sweep.p == 1.0, "expected_n"].isna().all()


def test_monte_carlo_agrees_with_the_exact_expectation():
    mean, stderr = monte_carlo_expected_p(8, 0.4, trials=4000, seed=11)
    exact = exact_expected_p(8, 0.4)
    assert exact == pytest.approx(lemma1_expected_p(8, 0.4), abs=1e-12)
    assert abs(mean - exact) <= 4 * stderr


def test_monte_carlo_single_trial():
    mean, stderr = monte_carlo_expected_p(5, 0.0, trials=1)
    assert mean == 0.0
    assert stderr == 0.0
