"""Arm statistics, posterior parameterizations and divergences.

Empirical means are stored as a running reward sum plus a pull count rather
than as an incrementally updated average, so Bernoulli bookkeeping stays exact
in integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._jit import njit

__all__ = [
    "ArmStats",
    "BetaPosterior",
    "GaussianPosterior",
    "beta_posterior",
    "gaussian_posterior",
    "kl_bernoulli",
    "kl_bernoulli_d2",
    "kl_gaussian",
    "update_stats",
]


@dataclass(frozen=True)
class ArmStats:
    """Pull count and reward sum of one arm."""

    pulls: int = 0
    cum_reward: float = 0.0

    def __post_init__(self) -> None:
        if self.pulls < 0:
            raise ValueError(f"pulls must be nonnegative, got {self.pulls}")

    @property
    def mean(self) -> float:
        """Empirical mean; undefined (raises) for an arm that was never pulled."""
        if self.pulls == 0:
            raise ValueError("the mean of an unpulled arm is undefined")
        return self.cum_reward / self.pulls


@dataclass(frozen=True)
class GaussianPosterior:
    """Posterior of an arm mean under Gaussian rewards with known variance."""

    mean: float
    sigma2: float
    pulls: int

    def __post_init__(self) -> None:
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if self.pulls < 1:
            raise ValueError("a Gaussian posterior needs at least one pull")

    @property
    def variance(self) -> float:
        return self.sigma2 / self.pulls


@dataclass(frozen=True)
class BetaPosterior:
    """Beta posterior summarised by its mean and the +3 corrected count."""

    mean_b: float
    n_b: int

    def __post_init__(self) -> None:
        if not 0.0 < self.mean_b < 1.0:
            raise ValueError(f"mean_b must lie in (0, 1), got {self.mean_b}")
        if self.n_b < 4:
            raise ValueError(f"n_b must be at least 4, got {self.n_b}")

    @property
    def variance(self) -> float:
        return self.mean_b * (1.0 - self.mean_b) / self.n_b


def update_stats(stats: ArmStats, reward: float) -> ArmStats:
    """Return the statistics after observing one more reward."""
    return ArmStats(stats.pulls + 1, stats.cum_reward + reward)


def gaussian_posterior(stats: ArmStats, sigma2: float) -> GaussianPosterior:
    """Posterior under an improper uniform prior: centred at the empirical mean."""
    return GaussianPosterior(stats.mean, sigma2, stats.pulls)


def beta_posterior(stats: ArmStats) -> BetaPosterior:
    """Beta(cum + 1, pulls - cum + 1) posterior of a Bernoulli arm."""
    if not 0 <= stats.cum_reward <= stats.pulls:
        raise ValueError(
            f"cum_reward={stats.cum_reward} is outside [0, pulls={stats.pulls}]"
        )
    return BetaPosterior((stats.cum_reward + 1.0) / (stats.pulls + 2.0), stats.pulls + 3)


@njit
def kl_bernoulli_kernel(p: float, q: float) -> float:
    # The 0 ln 0 = 0 convention gives kl(0, q) = -ln(1 - q) and kl(1, q) = -ln q.
    # Callers are responsible for keeping q inside (0, 1) unless p == q.
    if p == q:
        return 0.0
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return out


@njit
def kl_bernoulli_d2_kernel(p: float, q: float) -> float:
    return (q - p) / (q * (1.0 - q))


def kl_bernoulli(p: float, q: float) -> float:
    """Bernoulli Kullback-Leibler divergence kl(p, q).

    ``p`` may sit on the boundary {0, 1}; ``q`` may only do so when ``q == p``.

    >>> round(kl_bernoulli(0.8, 0.5), 6)
    0.192745
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError(f"arguments must lie in [0, 1], got p={p}, q={q}")
    if q in (0.0, 1.0) and p != q:
        raise ValueError(f"kl_bernoulli is infinite for q={q} and p={p}")
    return kl_bernoulli_kernel(float(p), float(q))


def kl_bernoulli_d2(p: float, q: float) -> float:
    """Derivative of ``kl_bernoulli(p, q)`` with respect to ``q``."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    return kl_bernoulli_d2_kernel(float(p), float(q))


def kl_gaussian(mu1: float, mu2: float, sigma2: float) -> float:
    """KL divergence between two Gaussians sharing the variance ``sigma2``."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    return (mu1 - mu2) ** 2 / (2.0 * sigma2)
