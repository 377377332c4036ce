"""Arm-selection policies.

Every policy is one branch of :func:`choose_kernel`, a numba function over
plain arrays (pull counts and reward sums) so the simulation loop can call it
without leaving compiled code.  The ``select_*`` functions are the Python-level
entry points on :class:`PolicyState`.

All policies start by pulling each arm once in index order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._jit import njit
from .entropy_expfam import delta_abs_bern_kernel, delta_max_multi_kernel
from .entropy_gaussian import delta_simplified_kernel, theta_eq_kernel
from .posterior import ArmStats, kl_bernoulli_kernel

__all__ = [
    "AIM_BERN2",
    "AIM_BERNK",
    "AIM_GAUSS2",
    "ArmChoice",
    "KL_UCB",
    "POLICIES",
    "PolicyInfo",
    "PolicyState",
    "THOMPSON_BERN",
    "THOMPSON_GAUSS",
    "UCB_TUNED",
    "choose_kernel",
    "kl_ucb_index",
    "resolve_policy",
    "select_aim_bern2",
    "select_aim_bernK",
    "select_aim_gauss2",
    "select_kl_ucb",
    "select_thompson",
    "select_ucb_tuned",
]

AIM_GAUSS2 = 0
AIM_BERN2 = 1
AIM_BERNK = 2
THOMPSON_GAUSS = 3
THOMPSON_BERN = 4
UCB_TUNED = 5
KL_UCB = 6

UCB_TUNED_C = 2.1
KL_UCB_C = 1e-5
KL_UCB_TOL = 1e-5
KL_UCB_MAX_ITER = 50
THOMPSON_MIN_VARIANCE = 1e-18


@dataclass(frozen=True)
class PolicyInfo:
    families: frozenset
    two_arm_only: bool = False
    default_c: Optional[float] = None


POLICIES = {
    "aim_gauss2": PolicyInfo(frozenset({"gaussian"}), two_arm_only=True),
    "aim_bern2": PolicyInfo(frozenset({"bernoulli"}), two_arm_only=True),
    "aim_bernK": PolicyInfo(frozenset({"bernoulli"})),
    "thompson": PolicyInfo(frozenset({"gaussian", "bernoulli"})),
    "ucb_tuned": PolicyInfo(frozenset({"gaussian", "bernoulli"}), default_c=UCB_TUNED_C),
    "kl_ucb": PolicyInfo(frozenset({"bernoulli"}), default_c=KL_UCB_C),
}


def resolve_policy(name: str, family: str) -> int:
    """Kernel code of policy ``name`` on a reward ``family``."""
    if name not in POLICIES:
        raise ValueError(f"unknown policy {name!r}; expected one of {sorted(POLICIES)}")
    if family not in POLICIES[name].families:
        raise ValueError(f"policy {name!r} does not support {family} rewards")
    if name == "thompson":
        return THOMPSON_GAUSS if family == "gaussian" else THOMPSON_BERN
    return {
        "aim_gauss2": AIM_GAUSS2,
        "aim_bern2": AIM_BERN2,
        "aim_bernK": AIM_BERNK,
        "ucb_tuned": UCB_TUNED,
        "kl_ucb": KL_UCB,
    }[name]


@njit
def _order_pair(m0, n0, m1, n1):
    """Index of the empirical max of two arms: higher mean, then fewer pulls, then index 0."""
    if m0 > m1 or (m0 == m1 and n0 <= n1):
        return 0
    return 1


@njit
def _aim_gauss2(pulls, sums, sigma2):
    i = _order_pair(sums[0] / pulls[0], pulls[0], sums[1] / pulls[1], pulls[1])
    j = 1 - i
    if pulls[i] <= pulls[j]:
        return i, math.nan
    m_max = sums[i] / pulls[i]
    m_min = sums[j] / pulls[j]
    teq = theta_eq_kernel(m_max, pulls[i], m_min, pulls[j], sigma2)
    delta = delta_simplified_kernel(teq - m_min, pulls[i], pulls[j], sigma2)
    return (i if delta < 0.0 else j), delta


@njit
def _beta_mean(pulls, sums, k):
    return (sums[k] + 1.0) / (pulls[k] + 2.0)


@njit
def _aim_bern2(pulls, sums):
    m0 = _beta_mean(pulls, sums, 0)
    m1 = _beta_mean(pulls, sums, 1)
    i = _order_pair(m0, pulls[0], m1, pulls[1])
    j = 1 - i
    if pulls[i] <= pulls[j]:
        return i, math.nan
    m = (m0, m1)
    n_i = pulls[i] + 3.0
    n_j = pulls[j] + 3.0
    delta = delta_abs_bern_kernel(m[i], n_i, m[j], n_j) - delta_abs_bern_kernel(
        m[j], n_j, m[i], n_i
    )
    return (i if delta > 0.0 else j), delta


@njit
def _aim_bernk(pulls, sums):
    k_arms = pulls.shape[0]
    means = (sums + 1.0) / (pulls + 2.0)
    counts = pulls + 3.0
    best = 0
    for k in range(1, k_arms):
        if means[k] > means[best] or (means[k] == means[best] and pulls[k] < pulls[best]):
            best = k
    challenger = -1
    challenge = -1.0
    for k in range(k_arms):
        if k != best:
            value = delta_abs_bern_kernel(means[k], counts[k], means[best], counts[best])
            if value > challenge:
                challenger = k
                challenge = value
    d_max = delta_max_multi_kernel(means, counts, best)
    return (best if d_max > challenge else challenger), d_max - challenge


@njit
def _argmax(values):
    best = 0
    for k in range(1, values.shape[0]):
        if values[k] > values[best]:
            best = k
    return best


@njit
def _thompson_gauss(pulls, sums, sigma2, rng):
    draws = np.empty(pulls.shape[0])
    for k in range(pulls.shape[0]):
        var = max(sigma2 / pulls[k], THOMPSON_MIN_VARIANCE)
        draws[k] = sums[k] / pulls[k] + math.sqrt(var) * rng.standard_normal()
    return _argmax(draws)


@njit
def _thompson_bern(pulls, sums, rng):
    draws = np.empty(pulls.shape[0])
    for k in range(pulls.shape[0]):
        draws[k] = rng.beta(sums[k] + 1.0, pulls[k] - sums[k] + 1.0)
    return _argmax(draws)


@njit
def _ucb_tuned(pulls, sums, sigma2, c):
    log_t = math.log(pulls.sum())
    index = np.empty(pulls.shape[0])
    for k in range(pulls.shape[0]):
        n = pulls[k]
        spread = min(0.25, sigma2 / n + math.sqrt(2.0 * log_t / n))
        index[k] = sums[k] / n + c * math.sqrt(log_t / n * spread)
    return _argmax(index)


@njit
def kl_ucb_index(mean, n, budget):
    """Largest q in [mean, 1] with n kl(mean, q) <= budget, by bisection."""
    if mean >= 1.0:
        return 1.0
    lo = mean
    hi = 1.0
    it = 0
    while hi - lo > KL_UCB_TOL and it < KL_UCB_MAX_ITER:
        mid = 0.5 * (lo + hi)
        if n * kl_bernoulli_kernel(mean, mid) <= budget:
            lo = mid
        else:
            hi = mid
        it += 1
    return lo


@njit
def _kl_ucb(pulls, sums, c):
    log_t = math.log(pulls.sum())
    # ln ln t is -inf at t = 1; the exploration budget is floored at 0.
    budget = log_t + c * math.log(log_t) if log_t > 0.0 else 0.0
    budget = max(budget, 0.0)
    index = np.empty(pulls.shape[0])
    for k in range(pulls.shape[0]):
        index[k] = kl_ucb_index(sums[k] / pulls[k], pulls[k], budget)
    return _argmax(index)


@njit
def choose_kernel(code, pulls, sums, sigma2, c, rng):
    """Next arm and the decision statistic (NaN for index policies).

    ``pulls`` is a float array of counts, ``sums`` the reward sums.
    """
    for k in range(pulls.shape[0]):
        if pulls[k] == 0:
            return k, math.nan
    if code == AIM_GAUSS2:
        return _aim_gauss2(pulls, sums, sigma2)
    if code == AIM_BERN2:
        return _aim_bern2(pulls, sums)
    if code == AIM_BERNK:
        return _aim_bernk(pulls, sums)
    if code == THOMPSON_GAUSS:
        return _thompson_gauss(pulls, sums, sigma2, rng), math.nan
    if code == THOMPSON_BERN:
        return _thompson_bern(pulls, sums, rng), math.nan
    if code == UCB_TUNED:
        return _ucb_tuned(pulls, sums, sigma2, c), math.nan
    if code == KL_UCB:
        return _kl_ucb(pulls, sums, c), math.nan
    return -1, math.nan


# Stand-in stream for deterministic policies; they never draw from it.
_UNUSED_RNG = np.random.Generator(np.random.Philox(0))


@dataclass
class PolicyState:
    """Arm statistics plus the policy parameters.

    ``c`` defaults to the policy's own constant when left as ``None``.
    ``rng`` is only read by Thompson sampling.
    """

    arms: tuple[ArmStats, ...]
    sigma2: float = 1.0
    c: Optional[float] = None
    rng: Optional[np.random.Generator] = field(default=None, repr=False)

    @property
    def t(self) -> int:
        return sum(a.pulls for a in self.arms)


@dataclass(frozen=True)
class ArmChoice:
    index: int
    diagnostics: Optional[dict] = None


def _select(code: int, state: PolicyState, default_c: float, trace: bool) -> ArmChoice:
    pulls = np.array([float(a.pulls) for a in state.arms])
    sums = np.array([float(a.cum_reward) for a in state.arms])
    c = default_c if state.c is None else state.c
    rng = state.rng if state.rng is not None else _UNUSED_RNG
    index, stat = choose_kernel(code, pulls, sums, state.sigma2, c, rng)
    return ArmChoice(int(index), {"statistic": stat} if trace else None)


def _require_two(state: PolicyState) -> None:
    if len(state.arms) != 2:
        raise ValueError("this policy is defined for two arms")


def select_aim_gauss2(state: PolicyState, trace: bool = False) -> ArmChoice:
    """Gaussian AIM: pull the empirical max iff the simplified statistic is negative."""
    _require_two(state)
    return _select(AIM_GAUSS2, state, math.nan, trace)


def select_aim_bern2(state: PolicyState, trace: bool = False) -> ArmChoice:
    """Bernoulli AIM: pull the empirical max iff its absolute entropy change is larger."""
    _require_two(state)
    return _select(AIM_BERN2, state, math.nan, trace)


def select_aim_bernK(state: PolicyState, trace: bool = False) -> ArmChoice:
    """K-arm Bernoulli AIM: the best arm against the strongest challenger."""
    return _select(AIM_BERNK, state, math.nan, trace)


def select_thompson(state: PolicyState, family: str = "gaussian") -> ArmChoice:
    """One posterior draw per arm; advances ``state.rng``."""
    if state.rng is None:
        raise ValueError("Thompson sampling needs a random stream")
    code = THOMPSON_GAUSS if family == "gaussian" else THOMPSON_BERN
    return _select(code, state, math.nan, False)


def select_ucb_tuned(state: PolicyState) -> ArmChoice:
    return _select(UCB_TUNED, state, UCB_TUNED_C, False)


def select_kl_ucb(state: PolicyState) -> ArmChoice:
    return _select(KL_UCB, state, KL_UCB_C, False)
