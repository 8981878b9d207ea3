import pytest

from rfidmiss.estimators import expected_multiplicity, two_session_p
from rfidmiss.tallies import MultiplicityVector
from rfidmiss.utils import DegenerateWindowError, EstimationError
from rfidmiss.windows import (
    WindowPair,
    observed_ratio,
    ratio_solve_p,
    regm_windows,
    rme_windows,
    tail_windows,
)


def test_window_pair():
    windows = WindowPair([1, 1], [0, 1])
    assert windows.numerator == (True, True)
    assert windows.denominator == (False, True)
    assert len(windows) == 2
    assert not windows.is_degenerate
    assert WindowPair([1, 0], [0, 0]).is_degenerate

    with pytest.raises(ValueError):
        WindowPair([1, 1], [1])


@pytest.mark.parametrize(
    "counts, numerator, denominator",
    [
        ([80, 40], (True, True), (False, True)),
        ([40, 40], (True, True), (False, True)),
        ([100, 0], (True, False), (False, False)),
        ([10, 30, 0, 5], (True, True, False, True), (True, False, False, True)),
    ],
)
def test_rme_windows(counts, numerator, denominator):
    windows = rme_windows(MultiplicityVector(counts))
    assert windows.numerator == numerator
    assert windows.denominator == denominator


@pytest.mark.parametrize(
    "counts, denominator",
    [
        ([80, 40], (False, True)),
        ([256, 192, 48], (False, True, True)),
        ([100, 0], (False, False)),
    ],
)
def test_regm_windows(counts, denominator):
    windows = regm_windows(MultiplicityVector(counts))
    assert windows.denominator == denominator


def test_tail_windows():
    windows = tail_windows(MultiplicityVector([80, 40, 0]))
    assert windows.numerator == (True, True, False)
    assert windows.denominator == (False, True, False)


@pytest.mark.parametrize("make", [rme_windows, regm_windows, tail_windows])
def test_windows_need_two_sessions(make):
    with pytest.raises(EstimationError):
        make(MultiplicityVector([10]))


def test_observed_ratio():
    kbar = MultiplicityVector([80, 40])
    assert observed_ratio(kbar, WindowPair([1, 1], [0, 1])) == 3.0

    with pytest.raises(ValueError):
        observed_ratio(kbar, WindowPair([1, 1, 1], [0, 1, 1]))


def test_ratio_solve_p_two_sessions():
    kbar = MultiplicityVector([80, 40])
    p_hat = ratio_solve_p(kbar, WindowPair([1, 1], [0, 1]))
    assert p_hat == pytest.approx(0.2, abs=1e-9)


def test_ratio_solve_p_degenerate():
    kbar = MultiplicityVector([100, 0])
    with pytest.raises(DegenerateWindowError) as err:
        ratio_solve_p(kbar, rme_windows(kbar))
    assert err.value.p_hat == 0.0

    kbar = MultiplicityVector([0, 0])
    with pytest.raises(DegenerateWindowError) as err:
        ratio_solve_p(kbar, WindowPair([1, 1], [0, 1]))
    assert err.value.p_hat == 1.0


@pytest.mark.parametrize("counts", [[0, 5], [0, 4, 0]])
@pytest.mark.parametrize("make", [rme_windows, regm_windows])
def test_ratio_solve_p_single_entry_beyond_k1(counts, make):
    kbar = MultiplicityVector(counts)
    with pytest.raises(DegenerateWindowError) as err:
        ratio_solve_p(kbar, make(kbar))
    assert err.value.p_hat == 1.0


@pytest.mark.parametrize(
    "windows",
    [
        WindowPair([1, 1, 1], [0, 1, 1]),
        WindowPair([1, 1, 1], [0, 0, 1]),
        WindowPair([1, 1, 0], [0, 1, 0]),
        WindowPair([1, 0, 1], [0, 1, 0]),
    ],
)
def test_ratio_solve_p_exact_counts(windows):
    kbar = MultiplicityVector([256, 192, 48])
    assert ratio_solve_p(kbar, windows) == pytest.approx(0.2, abs=1e-6)


@pytest.mark.parametrize("k1, k2", [(80, 40), (300, 150), (12, 30), (1, 1)])
@pytest.mark.parametrize("make", [rme_windows, regm_windows])
def test_two_session_agreement(k1, k2, make):
    kbar = MultiplicityVector([k1, k2])
    p_hat = ratio_solve_p(kbar, make(kbar))
    assert p_hat == pytest.approx(two_session_p(k1, k2), abs=1e-8)


@pytest.mark.parametrize("R", [10, 11, 12])
@pytest.mark.parametrize("p", [0.1, 0.2])
def test_rme_picks_the_root_that_fits_the_counts(R, p):
    # the largest entry is not the first one, so the RME ratio is not
    # monotone in p and has a second root
    kbar = expected_multiplicity(500, p, R)
    assert max(range(R), key=lambda i: kbar[i]) > 0
    assert ratio_solve_p(kbar, rme_windows(kbar)) == pytest.approx(p, abs=1e-6)


def test_ratio_solve_p_without_sign_change():
    # 3p(1 - p)² / (1 - p³) never reaches 0.9, the p closest to it is
    # where the model ratio peaks
    kbar = MultiplicityVector([0, 9, 1])
    windows = WindowPair([0, 1, 0], [1, 1, 1])
    p_hat = ratio_solve_p(kbar, windows)
    assert p_hat == pytest.approx((3**0.5 - 1) / 2, abs=1e-4)
