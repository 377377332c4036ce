r"""Closed-form entropy quantities for two Gaussian arms with known variance.

The entropy of the posterior of the largest mean is split at a crossing point
``theta_eq`` into a body part, dominated by the most pulled arm, and a tail
part, dominated by the upper tail of the less pulled arm.  Everything here is
written in terms of

* ``x = theta_eq - mean_min``, the distance from the lesser arm to the crossing
  point, and
* ``C = 2 pi e sigma2``, so that a Gaussian posterior built on ``n`` samples has
  entropy ``0.5 * ln(C / n)``.

The scalar ``*_kernel`` functions are numba-compiled and are what the
simulation loop calls; the public functions wrap them around
:class:`EntropyState`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._jit import njit

__all__ = [
    "EntropyState",
    "ThetaEq",
    "delta_simplified",
    "increment_closed_form",
    "s_app_components",
    "s_body_exact",
    "s_tail_exact",
    "theta_eq",
    "theta_eq_residual",
]

_TWO_PI = 2.0 * math.pi
_TWO_PI_E = 2.0 * math.pi * math.e


@dataclass(frozen=True)
class EntropyState:
    """Summary of two arms ordered as (empirical max, empirical min)."""

    mean_max: float
    n_max: int
    mean_min: float
    n_min: int
    sigma2: float = 1.0

    def __post_init__(self) -> None:
        if self.mean_max < self.mean_min:
            raise ValueError("mean_max must be >= mean_min; order the arms first")
        if self.n_max < 1 or self.n_min < 1:
            raise ValueError("both arms need at least one pull")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")

    @property
    def gap(self) -> float:
        return self.mean_max - self.mean_min


@dataclass(frozen=True)
class ThetaEq:
    """Crossing point of the two arms' contributions.

    When ``defined`` is false the tail contribution is taken to be zero and
    ``value`` is ``+inf``.
    """

    value: float
    defined: bool


@njit
def theta_eq_kernel(mean_max, n_max, mean_min, n_min, sigma2):
    """Crossing point, or NaN when ``n_max <= n_min``."""
    if n_max <= n_min:
        return math.nan
    gap = mean_max - mean_min
    d = float(n_max - n_min)
    log_ratio = math.log(n_max) - math.log(n_min)
    disc = n_max * n_min * gap * gap / (d * d) + sigma2 * log_ratio / d
    # Analytically nonnegative; only rounding can push it below zero.
    if disc < 0.0:
        disc = 0.0
    return mean_max + n_min * gap / d + math.sqrt(disc)


@njit
def s_tail_exact_kernel(x, n_min, sigma2):
    z = math.sqrt(n_min) * x / math.sqrt(2.0 * sigma2)
    log_term = 0.25 * math.log(_TWO_PI_E * sigma2 / n_min) * math.erfc(z)
    peak = math.sqrt(n_min) * x / (2.0 * math.sqrt(_TWO_PI * sigma2))
    return log_term + peak * math.exp(-z * z)


@njit
def s_body_exact_kernel(gap, n_max, n_min, sigma2):
    n_sum = float(n_max + n_min)
    z = math.sqrt(n_min * n_max) * gap / math.sqrt(2.0 * sigma2 * n_sum)
    lead = 0.5 * math.log(_TWO_PI_E * sigma2 / n_max) * (1.0 - 0.5 * math.erfc(z))
    corr = (
        math.sqrt(n_max)
        * n_min**1.5
        * gap
        / (2.0 * math.sqrt(sigma2) * math.sqrt(_TWO_PI) * n_sum**1.5)
    )
    return lead - corr * math.exp(-z * z)


@njit
def s_body_app_kernel(x, n_max, n_min, sigma2):
    z = math.sqrt(n_min) * x / math.sqrt(2.0 * sigma2)
    return 0.5 * math.log(_TWO_PI_E * sigma2 / n_max) * (1.0 - 0.5 * math.erfc(z))


@njit
def s_tail_app_kernel(x, n_min, sigma2):
    z = math.sqrt(n_min) * x / math.sqrt(2.0 * sigma2)
    return math.sqrt(n_min) * x / (2.0 * math.sqrt(_TWO_PI * sigma2)) * math.exp(-z * z)


@njit
def increments_kernel(x, n_max, n_min, sigma2):
    """Expected one-pull change of the approximate entropy, per pulled arm.

    The crossing point is moved linearly by the new sample; Gaussian averaging
    of erfc(a u) and u exp(-b u^2) over that shift is done in closed form.
    """
    body_now = s_body_app_kernel(x, n_max, n_min, sigma2)
    tail_now = s_tail_app_kernel(x, n_min, sigma2)
    s2x2 = math.sqrt(2.0 * sigma2)

    # Pull the max arm: its count grows and x moves by a N(0, sigma2/(n_max+1)^2) shift.
    w = 1.0 + n_min / (n_max + 1.0) ** 2
    body_max = (
        0.5
        * math.log(_TWO_PI_E * sigma2 / (n_max + 1.0))
        * (1.0 - 0.5 * math.erfc(math.sqrt(n_min) * x / (s2x2 * math.sqrt(w))))
    )
    tail_max = (
        math.exp(-n_min * x * x / (2.0 * sigma2 * w))
        * math.sqrt(n_min / (4.0 * _TWO_PI * sigma2))
        * x
        / w**1.5
    )
    delta_max = (body_max - body_now) + (tail_max - tail_now)

    # Pull the min arm: n_min grows and x moves by a N(0, sigma2/(n_min+1)^2) shift.
    n1 = n_min + 1.0
    n2 = n_min + 2.0
    body_min = (
        0.5
        * math.log(_TWO_PI_E * sigma2 / n_max)
        * (1.0 - 0.5 * math.erfc(n1 * x / math.sqrt(2.0 * sigma2 * n2)))
    )
    tail_min = (
        math.exp(-n1 * n1 * x * x / (n2 * 2.0 * sigma2))
        * n1
        * n1
        * x
        / (math.sqrt(4.0 * _TWO_PI * sigma2) * n2**1.5)
    )
    delta_min = (body_min - body_now) + (tail_min - tail_now)
    return delta_max, delta_min


@njit
def delta_simplified_kernel(x, n_max, n_min, sigma2):
    """Leading-order difference (max increment) - (min increment)."""
    n_max = float(n_max)
    n_min = float(n_min)
    z = math.sqrt(n_min) * x / math.sqrt(2.0 * sigma2)
    out = 0.5 * math.log(n_max / (n_max + 1.0)) + math.erfc(z) / (4.0 * n_max)
    ratio2 = n_min / (n_max * n_max)
    bracket = (
        0.25 * math.log(n_max / (_TWO_PI_E * sigma2)) * (1.0 / (n_min * n_min) + ratio2)
        + 0.5 / n_min
        - 0.75 * ratio2
        + (n_min * ratio2 + 1.0 / n_min) * x * x / (4.0 * sigma2)
    )
    peak = math.sqrt(n_min) * x / math.sqrt(_TWO_PI * sigma2) * math.exp(-z * z)
    return out + peak * bracket


def theta_eq(state: EntropyState) -> ThetaEq:
    """Crossing point of the truncated log-balance equation.

    >>> round(theta_eq(EntropyState(0.0, 2, 0.0, 1)).value, 6)
    0.832555
    """
    value = theta_eq_kernel(
        state.mean_max, state.n_max, state.mean_min, state.n_min, state.sigma2
    )
    if math.isnan(value):
        return ThetaEq(math.inf, False)
    return ThetaEq(value, True)


def theta_eq_residual(state: EntropyState, theta: float) -> float:
    """Residual of the balance equation that :func:`theta_eq` solves exactly."""
    s2 = 2.0 * state.sigma2
    return (
        state.n_min * (theta - state.mean_min) ** 2 / s2
        - state.n_max * (theta - state.mean_max) ** 2 / s2
        + 0.5 * (math.log(state.n_max) - math.log(state.n_min))
    )


def s_tail_exact(state: EntropyState, teq: float) -> float:
    """Exact entropy carried by the lesser arm's density above ``teq``."""
    if teq == math.inf:
        return 0.0
    return s_tail_exact_kernel(teq - state.mean_min, state.n_min, state.sigma2)


def s_body_exact(state: EntropyState) -> float:
    """Exact body entropy ``-int F_min phi_max ln phi_max`` over the real line."""
    return s_body_exact_kernel(state.gap, state.n_max, state.n_min, state.sigma2)


def s_app_components(state: EntropyState) -> tuple[float, float]:
    """Asymptotic (body, tail) entropies evaluated at :func:`theta_eq`."""
    teq = theta_eq(state)
    if not teq.defined:
        return 0.5 * math.log(_TWO_PI_E * state.sigma2 / state.n_max), 0.0
    x = teq.value - state.mean_min
    return (
        s_body_app_kernel(x, state.n_max, state.n_min, state.sigma2),
        s_tail_app_kernel(x, state.n_min, state.sigma2),
    )


def increment_closed_form(state: EntropyState) -> tuple[float, float]:
    """Expected change of the approximate entropy after pulling max or min.

    Returns ``(delta_max, delta_min)``.  Requires a defined crossing point.
    """
    teq = theta_eq(state)
    if not teq.defined:
        raise ValueError("increments need n_max > n_min so that theta_eq is defined")
    return increments_kernel(
        teq.value - state.mean_min, state.n_max, state.n_min, state.sigma2
    )


def delta_simplified(state: EntropyState) -> float:
    """Decision statistic of the Gaussian policy; negative means pull max."""
    teq = theta_eq(state)
    if not teq.defined:
        raise ValueError("delta_simplified needs n_max > n_min")
    return delta_simplified_kernel(
        teq.value - state.mean_min, state.n_max, state.n_min, state.sigma2
    )
