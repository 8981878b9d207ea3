import numpy as np
import pytest

from rfidmiss.simulation import (
    CorrelatedSessions,
    CorrelationParams,
    IndependentSessions,
    PopulationParams,
    derive_correlation,
    make_rng,
    make_source,
    simulate_correlated,
    simulate_independent,
    trial_seed,
)


def test_population_params():
    params = PopulationParams(500, 0.2)
    assert params.n_tags == 500
    assert params.p == 0.2

    with pytest.raises(ValueError):
        PopulationParams(0, 0.2)
    with pytest.raises(ValueError):
        PopulationParams(10, 1.2)


@pytest.mark.parametrize("p", [0.1, 0.2])
@pytest.mark.parametrize("rho", [0.1, 0.3])
def test_derive_correlation_keeps_the_marginal(p, rho):
    cp = derive_correlation(p, rho)
    assert abs(cp.p * cp.q + (1 - cp.p) * cp.r - p) <= 1e-12
    assert cp.r <= cp.p <= cp.q


def test_derive_correlation_values():
    cp = derive_correlation(0.2, 0.3)
    assert cp.q == pytest.approx(0.44)
    assert cp.r == pytest.approx(0.14)

    cp = derive_correlation(0.2, 0.0)
    assert cp.q == pytest.approx(0.2)
    assert cp.r == pytest.approx(0.2)

    with pytest.raises(ValueError, match="must be < 1"):
        derive_correlation(1.0, 0.3)


def test_correlation_params_invalid():
    with pytest.raises(ValueError, match="marginal"):
        CorrelationParams(p=0.2, rho=0.3, q=0.5, r=0.14)
    with pytest.raises(ValueError):
        CorrelationParams(p=0.2, rho=0.3, q=1.5, r=0.14)


def test_rng_is_deterministic():
    a = make_rng(7).random(5)
    b = make_rng(7).random(5)
    assert np.array_equal(a, b)
    assert trial_seed(100, 3) == 103


def test_independent_sessions():
    source = IndependentSessions(PopulationParams(1000, 0.2), seed=1)
    history = source.take(3)
    assert history.reads.shape == (3, 1000)
    assert source.sessions == 3
    assert source.next_session().shape == (1000,)
    assert source.sessions == 4


def test_same_seed_same_history():
    params = PopulationParams(200, 0.3)
    a = simulate_independent(params, 5, seed=42)
    b = simulate_independent(params, 5, seed=42)
    c = simulate_independent(params, 5, seed=43)
    assert np.array_equal(a.reads, b.reads)
    assert not np.array_equal(a.reads, c.reads)


def test_extreme_probabilities():
    history = simulate_independent(PopulationParams(50, 0.0), 3, seed=0)
    assert history.reads.all()

    history = simulate_independent(PopulationParams(50, 1.0), 3, seed=0)
    assert not history.reads.any()


def test_correlated_sessions_are_correlated():
    cp = derive_correlation(0.2, 0.3)
    history = simulate_correlated(cp, 20000, 2, seed=5)
    errors = ~history.reads
    first, second = errors[0], errors[1]
    # P(error | error before) ~ q, P(error | read before) ~ r
    assert second[first].mean() == pytest.approx(cp.q, abs=0.03)
    assert second[~first].mean() == pytest.approx(cp.r, abs=0.02)


def test_make_source():
    assert isinstance(make_source(10, 0.2, 0.0, 1), IndependentSessions)
    source = make_source(10, 0.2, 0.3, 1)
    assert isinstance(source, CorrelatedSessions)
    assert source.params.rho == 0.3


def test_full_correlation_keeps_the_error_state():
    cp = derive_correlation(0.5, 1.0)
    assert cp.q == 1.0
    assert cp.r == 0.0

    errors = ~simulate_correlated(cp, 1000, 6, seed=3).reads
    assert (errors == errors[0]).all()
    assert 0 < errors[0].sum() < 1000


def test_independent_read_count_is_binomial():
    params = PopulationParams(500, 0.2)
    counts = [
        simulate_independent(params, 1, seed).reads.sum()
        for seed in range(1000)
    ]
    assert abs(np.mean(counts) - 400) <= 3 * np.sqrt(80) / np.sqrt(1000)


def test_zero_correlation_matches_independent_sessions():
    params = PopulationParams(2000, 0.2)
    cp = derive_correlation(0.2, 0.0)
    independent = simulate_independent(params, 8, seed=11)
    correlated = simulate_correlated(cp, 2000, 8, seed=11)
    assert np.array_equal(independent.reads, correlated.reads)

    errors = ~correlated.reads
    se = np.sqrt(0.2 * 0.8 / 2000)
    assert np.all(np.abs(errors.mean(axis=1) - 0.2) <= 4 * se)
