"""Approximate information maximization for stochastic bandits.

The policy pulls whichever arm is expected to shrink the entropy of the
posterior of the largest mean the most, using closed-form approximations of
that entropy.  The package also ships Thompson sampling, UCB-tuned and KL-UCB
baselines, a quadrature oracle for the exact entropy and a Monte-Carlo regret
harness.
"""

from .entropy_gaussian import (
    EntropyState,
    ThetaEq,
    delta_simplified,
    increment_closed_form,
    s_app_components,
    s_body_exact,
    s_tail_exact,
    theta_eq,
)
from .posterior import ArmStats, BetaPosterior, beta_posterior, update_stats
from .sim import (
    BanditInstance,
    ExperimentConfig,
    MeanSource,
    PolicySpec,
    run_episode,
    run_experiment,
)

__all__ = [
    "ArmStats",
    "BanditInstance",
    "BetaPosterior",
    "EntropyState",
    "ExperimentConfig",
    "MeanSource",
    "PolicySpec",
    "ThetaEq",
    "beta_posterior",
    "delta_simplified",
    "increment_closed_form",
    "run_episode",
    "run_experiment",
    "s_app_components",
    "s_body_exact",
    "s_tail_exact",
    "theta_eq",
    "update_stats",
]

__version__ = "0.1.0"
