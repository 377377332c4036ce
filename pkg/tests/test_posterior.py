import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aimbandit.posterior import (
    ArmStats,
    BetaPosterior,
    beta_posterior,
    gaussian_posterior,
    kl_bernoulli,
    kl_bernoulli_d2,
    kl_gaussian,
    update_stats,
)

# 40-digit evaluations of the Bernoulli KL formula (mpmath).
KL_08_05 = 0.1927447570217574298840441825650714374707
KL_08_079 = 0.0003049929316016938643189412173534600016591


@pytest.mark.parametrize(
    "before, reward, after",
    [
        (ArmStats(0, 0.0), 0.7, (1, 0.7, 0.7)),
        (ArmStats(1, 1.0), 0.0, (2, 0.5, 1.0)),
        (ArmStats(3, 1.0), 1.0, (4, 0.5, 2.0)),
    ],
)
def test_update_stats(before, reward, after):
    new = update_stats(before, reward)
    assert (new.pulls, new.mean, new.cum_reward) == pytest.approx(after, abs=1e-15)


def test_unpulled_mean_is_undefined():
    with pytest.raises(ValueError):
        ArmStats().mean


def test_negative_pulls_rejected():
    with pytest.raises(ValueError):
        ArmStats(-1, 0.0)


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=60))
def test_update_keeps_sum_equal_to_mean_times_pulls(rewards):
    stats = ArmStats()
    for r in rewards:
        stats = update_stats(stats, r)
    assert stats.pulls == len(rewards)
    assert stats.mean * stats.pulls == pytest.approx(stats.cum_reward, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize(
    "pulls, cum, mean_b, n_b",
    [(1, 0, 1 / 3, 4), (1, 1, 2 / 3, 4), (8, 4, 0.5, 11)],
)
def test_beta_posterior(pulls, cum, mean_b, n_b):
    post = beta_posterior(ArmStats(pulls, cum))
    assert post.mean_b == pytest.approx(mean_b, abs=1e-15)
    assert post.n_b == n_b


@pytest.mark.parametrize("cum", [-1, 4])
def test_beta_posterior_rejects_impossible_counts(cum):
    with pytest.raises(ValueError):
        beta_posterior(ArmStats(3, cum))


def test_beta_variance_matches_beta_distribution():
    worst = 0.0
    for pulls in range(1, 51):
        for cum in range(0, pulls + 1):
            post = beta_posterior(ArmStats(pulls, cum))
            a, b = cum + 1, pulls - cum + 1
            exact = a * b / ((a + b) ** 2 * (a + b + 1))
            worst = max(worst, abs(post.variance - exact))
    assert worst < 1e-12


def test_gaussian_posterior_variance():
    post = gaussian_posterior(ArmStats(4, 2.0), sigma2=2.0)
    assert post.mean == 0.5
    assert post.variance == 0.5


@pytest.mark.parametrize(
    "p, q, expected",
    [(0.5, 0.5, 0.0), (0.8, 0.5, KL_08_05), (0.8, 0.79, KL_08_079)],
)
def test_kl_bernoulli_values(p, q, expected):
    assert kl_bernoulli(p, q) == pytest.approx(expected, rel=1e-13, abs=1e-16)


def test_kl_bernoulli_nonnegative_on_grid():
    grid = [k / 100 for k in range(1, 100)]
    for p in grid:
        for q in grid:
            value = kl_bernoulli(p, q)
            if p == q:
                assert value == 0.0
            else:
                assert value > 0.0


@pytest.mark.parametrize("q", [0.1, 0.5, 0.9])
def test_kl_bernoulli_boundary_conventions(q):
    assert kl_bernoulli(0.0, q) == pytest.approx(-math.log(1 - q), rel=1e-15)
    assert kl_bernoulli(1.0, q) == pytest.approx(-math.log(q), rel=1e-15)


@pytest.mark.parametrize("p, q", [(0.3, 0.0), (0.3, 1.0), (-0.1, 0.5), (0.5, 1.2)])
def test_kl_bernoulli_domain_errors(p, q):
    with pytest.raises(ValueError):
        kl_bernoulli(p, q)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_kl_bernoulli_d2_matches_finite_difference(p, q):
    h = 1e-6
    if not (h < q < 1 - h):
        return
    fd = (kl_bernoulli(p, q + h) - kl_bernoulli(p, q - h)) / (2 * h)
    assert kl_bernoulli_d2(p, q) == pytest.approx(fd, rel=1e-5, abs=1e-6)


@pytest.mark.parametrize(
    "mu1, mu2, sigma2, expected",
    [(0.8, 0.8, 1.0, 0.0), (0.8, 0.79, 1.0, 5e-5), (1.0, 0.0, 0.5, 1.0)],
)
def test_kl_gaussian(mu1, mu2, sigma2, expected):
    assert kl_gaussian(mu1, mu2, sigma2) == pytest.approx(expected, rel=1e-12)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.01, 10))
def test_kl_gaussian_symmetric(a, b, s):
    assert kl_gaussian(a, b, s) == kl_gaussian(b, a, s)


def test_beta_posterior_type_invariants():
    with pytest.raises(ValueError):
        BetaPosterior(1.0, 5)
    with pytest.raises(ValueError):
        BetaPosterior(0.5, 3)
