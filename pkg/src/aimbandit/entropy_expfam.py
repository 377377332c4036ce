"""Approximate entropy for exponential-family arms, specialised to Bernoulli.

Arms are summarised by a posterior mean ``m``, an effective count ``n`` and a
posterior variance ``V``.  For Bernoulli arms ``m = (cum + 1)/(pulls + 2)``,
``n = pulls + 3`` and ``V = m (1 - m)/n``.

The Bernoulli ``*_kernel`` functions are numba-compiled for the simulation
loop.  Inside them the two arms of a pair are always re-ordered by posterior
mean before the entropy is evaluated, so a hypothetical update that swaps the
order of the arms is handled without special casing.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .entropy_gaussian import ThetaEq
from .posterior import (
    BetaPosterior,
    kl_bernoulli,
    kl_bernoulli_d2,
    kl_bernoulli_d2_kernel,
    kl_bernoulli_kernel,
)

__all__ = [
    "BERNOULLI_KL",
    "ExpFamArm",
    "KlFunctions",
    "bernoulli_weights",
    "delta_abs_bernoulli",
    "delta_max_multiarm",
    "gaussian_kl",
    "s_app_bernoulli",
    "s_app_general",
    "theta_eq_general",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ExpFamArm:
    mean_hat: float
    n_eff: int
    variance: float

    def __post_init__(self) -> None:
        if self.variance <= 0:
            raise ValueError("variance must be positive")
        if self.n_eff < 1:
            raise ValueError("n_eff must be positive")

    @classmethod
    def from_beta(cls, post: BetaPosterior) -> ExpFamArm:
        return cls(post.mean_b, post.n_b, post.variance)

    @classmethod
    def from_gaussian(cls, mean: float, pulls: int, sigma2: float) -> ExpFamArm:
        return cls(mean, pulls, sigma2 / pulls)


@dataclass(frozen=True)
class KlFunctions:
    """A divergence, its derivative in the second argument, and the upper end of the parameter domain."""

    kl: Callable[[float, float], float]
    kl_d2: Callable[[float, float], float]
    upper: float = math.inf


BERNOULLI_KL = KlFunctions(kl_bernoulli, kl_bernoulli_d2, upper=1.0)


def gaussian_kl(sigma2: float) -> KlFunctions:
    return KlFunctions(
        lambda a, b: (a - b) ** 2 / (2.0 * sigma2),
        lambda a, b: (b - a) / sigma2,
    )


def theta_eq_general(arm_max: ExpFamArm, arm_min: ExpFamArm, kl: KlFunctions) -> ThetaEq:
    """Crossing point from the lowest-order expansion of the balance equation.

    Undefined when ``arm_max`` has no more samples than ``arm_min`` or when the
    value leaves the parameter domain; ``value`` is then ``kl.upper``.
    """
    if arm_max.n_eff <= arm_min.n_eff:
        return ThetaEq(kl.upper, False)
    bracket = arm_min.n_eff * kl.kl(arm_min.mean_hat, arm_max.mean_hat) + 0.5 * math.log(
        arm_min.variance / arm_max.variance
    )
    value = arm_max.mean_hat + math.sqrt(2.0 * arm_max.variance * max(bracket, 0.0))
    if value >= kl.upper:
        return ThetaEq(kl.upper, False)
    return ThetaEq(value, True)


def s_app_general(
    arm_max: ExpFamArm, arm_min: ExpFamArm, teq: float, kl: KlFunctions
) -> float:
    """Approximate entropy for a crossing point ``teq`` right of the lesser mean."""
    k = kl.kl(arm_min.mean_hat, teq)
    d2 = kl.kl_d2(arm_min.mean_hat, teq)
    if not d2 > 0:
        raise ValueError(
            f"teq={teq} is not right of the divergence minimum at {arm_min.mean_hat}"
        )
    decay = math.exp(-arm_min.n_eff * k) / (d2 * math.sqrt(_TWO_PI * arm_min.variance))
    body = 0.5 * math.log(_TWO_PI * arm_max.variance) * (1.0 - decay / arm_min.n_eff)
    return body + k * decay


@njit
def _h(m, n):
    return 0.5 * math.log(_TWO_PI * m * (1.0 - m) / n)


@njit
def theta_eq_bern_kernel(m_max, n_max, m_min, n_min):
    """Bernoulli crossing point, or NaN when it is undefined (clamped to 1)."""
    if n_max <= n_min:
        return math.nan
    v_max = m_max * (1.0 - m_max) / n_max
    v_min = m_min * (1.0 - m_min) / n_min
    bracket = n_min * kl_bernoulli_kernel(m_min, m_max) + 0.5 * math.log(v_min / v_max)
    if bracket < 0.0:
        bracket = 0.0
    value = m_max + math.sqrt(2.0 * v_max * bracket)
    # A crossing point at or left of the lesser mean only happens for equal
    # means with a clamped bracket; no tail can be defined there either.
    if value >= 1.0 or value <= m_min:
        return math.nan
    return value


@njit
def _tail_weight(m_max, n_max, m_min, n_min):
    """Relative weight exp(-n K)/(sqrt(n) dK sqrt(2 pi m(1-m))) and K, zero when undefined."""
    teq = theta_eq_bern_kernel(m_max, n_max, m_min, n_min)
    if math.isnan(teq):
        return 0.0, 0.0
    k = kl_bernoulli_kernel(m_min, teq)
    d2 = kl_bernoulli_d2_kernel(m_min, teq)
    w = math.exp(-n_min * k) / (
        math.sqrt(n_min) * d2 * math.sqrt(_TWO_PI * m_min * (1.0 - m_min))
    )
    return w, k


@njit
def s_app_bern_kernel(m_a, n_a, m_b, n_b):
    if m_a > m_b or (m_a == m_b and n_a <= n_b):
        m_max, n_max, m_min, n_min = m_a, n_a, m_b, n_b
    else:
        m_max, n_max, m_min, n_min = m_b, n_b, m_a, n_a
    w, k = _tail_weight(m_max, n_max, m_min, n_min)
    # Tail term sqrt(n) K exp(-n K)/(dK sqrt(2 pi m(1-m))) equals n K w.
    return _h(m_max, n_max) * (1.0 - w) + n_min * k * w


@njit
def _branches(m, n):
    """Weights and updated means of the two reward outcomes of one more pull."""
    s = m * (n - 1.0)
    w1 = (s - 1.0) / (n - 3.0)
    w0 = (n - 2.0 - s) / (n - 3.0)
    return w1, w0, (s + 1.0) / n, s / n


@njit
def delta_abs_bern_kernel(m_i, n_i, m_o, n_o):
    w1, w0, m1, m0 = _branches(m_i, n_i)
    now = s_app_bern_kernel(m_i, n_i, m_o, n_o)
    after = w1 * s_app_bern_kernel(m1, n_i + 1, m_o, n_o) + w0 * s_app_bern_kernel(
        m0, n_i + 1, m_o, n_o
    )
    return abs(after - now)


@njit
def delta_max_multi_kernel(means, counts, max_index):
    m = means[max_index]
    n = counts[max_index]
    total = 0.0
    for i in range(means.shape[0]):
        if i != max_index:
            total += _tail_weight(m, n, means[i], counts[i])[0]
    w1, w0, m1, m0 = _branches(m, n)
    dh = w1 * _h(m1, n + 1) + w0 * _h(m0, n + 1) - _h(m, n)
    return abs(1.0 - total) * abs(dh)


def bernoulli_weights(post: BetaPosterior) -> tuple[float, float]:
    """Probabilities of reward 1 and reward 0 for the next pull (the empirical mean)."""
    w1, w0, _, _ = _branches(post.mean_b, float(post.n_b))
    return w1, w0


def s_app_bernoulli(a: BetaPosterior, b: BetaPosterior) -> float:
    """Approximate entropy of a pair of Bernoulli arms, in either order.

    When the crossing point is undefined the tail is dropped and only the
    entropy ``0.5 ln(2 pi V_max)`` of the better arm remains.
    """
    return s_app_bern_kernel(a.mean_b, float(a.n_b), b.mean_b, float(b.n_b))


def delta_abs_bernoulli(arm_i: BetaPosterior, other: BetaPosterior) -> float:
    """Absolute expected change of :func:`s_app_bernoulli` after pulling ``arm_i``."""
    return delta_abs_bern_kernel(arm_i.mean_b, float(arm_i.n_b), other.mean_b, float(other.n_b))


def delta_max_multiarm(arms: Sequence[BetaPosterior], max_index: int) -> float:
    """Absolute expected entropy change from pulling the best of ``K`` arms."""
    if len(arms) < 2:
        raise ValueError("need at least two arms")
    means = np.array([a.mean_b for a in arms])
    counts = np.array([float(a.n_b) for a in arms])
    return delta_max_multi_kernel(means, counts, max_index)
