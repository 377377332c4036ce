"""Bandit environments, the single-run loop and multi-run aggregation.

Random streams are keyed, not sequential.  A run is identified by
``(base_seed, instance, replicate)``; within it, arm ``k`` draws its rewards
from a Philox stream keyed by ``(..., 0, k)`` and the policy (Thompson only)
from ``(..., 1)``.  The policy is deliberately not part of the key, so every
policy faces the same reward sequence on the same replicate and comparisons
between policies are made on common random numbers.
"""

from __future__ import annotations

import math
import os
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ._jit import njit
from .policies import POLICIES, choose_kernel, resolve_policy
from .sobol import sobol_pair

__all__ = [
    "AggregatedTable",
    "BanditInstance",
    "ExperimentConfig",
    "MeanSource",
    "PolicySpec",
    "RegretTrace",
    "RunError",
    "checkpoint_schedule",
    "instance_means",
    "run_episode",
    "run_experiment",
    "run_traces",
    "sobol_pair",
    "worker_count",
]

FAMILIES = ("gaussian", "bernoulli")
BLOCK = 1 << 16


class RunError(RuntimeError):
    """A simulation run failed; the message carries its provenance."""


@dataclass(frozen=True)
class BanditInstance:
    family: str
    means: tuple[float, ...]
    sigma2: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not self.means:
            raise ValueError("an instance needs at least one arm")
        if self.family == "bernoulli" and not all(0.0 <= m <= 1.0 for m in self.means):
            raise ValueError("Bernoulli means must lie in [0, 1]")
        if self.family == "gaussian" and self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")


@dataclass(frozen=True)
class PolicySpec:
    name: str
    c: Optional[float] = None

    @property
    def constant(self) -> float:
        if self.c is not None:
            return self.c
        default = POLICIES[self.name].default_c
        return math.nan if default is None else default


@dataclass(frozen=True)
class RegretTrace:
    """Cumulative pseudo-regret and pull counts at each checkpoint of one run."""

    checkpoints: np.ndarray
    regret: np.ndarray
    pulls: np.ndarray

    @property
    def final_pulls(self) -> tuple[int, ...]:
        return tuple(int(n) for n in self.pulls[-1])


def checkpoint_schedule(horizon: int, ratio: float = 1.25) -> np.ndarray:
    """Rounded powers of ``ratio`` up to ``horizon``, deduplicated, always ending at ``horizon``."""
    if horizon < 1:
        raise ValueError("horizon must be positive")
    points = {horizon}
    k = 0
    while True:
        t = round(ratio**k)
        if t >= horizon:
            break
        points.add(t)
        k += 1
    return np.array(sorted(points), dtype=np.int64)


@njit
def _advance(
    code, sigma2, c, pulls, sums, t, horizon, pending, buf, pos, gaps, cum,
    checkpoints, cp, out_regret, out_pulls, rng,
):
    """Play rounds until the horizon or until an arm's reward buffer is empty.

    Returns ``(t, cp, cum, arm)`` where ``arm`` is -1 when the run is finished
    and otherwise the arm that was chosen but still needs a reward.
    """
    while t < horizon:
        if pending >= 0:
            arm = pending
            pending = -1
        else:
            arm = choose_kernel(code, pulls, sums, sigma2, c, rng)[0]
        if pos[arm] == buf.shape[1]:
            return t, cp, cum, arm
        reward = buf[arm, pos[arm]]
        pos[arm] += 1
        pulls[arm] += 1.0
        sums[arm] += reward
        cum += gaps[arm]
        t += 1
        if cp < checkpoints.shape[0] and t == checkpoints[cp]:
            out_regret[cp] = cum
            for k in range(pulls.shape[0]):
                out_pulls[cp, k] = pulls[k]
            cp += 1
    return t, cp, cum, -1


def _as_seed(seed: Union[int, np.random.SeedSequence]) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _stream(seed: np.random.SeedSequence, *key: int) -> np.random.Generator:
    child = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    return np.random.Generator(np.random.Philox(child))


def _draw(rng: np.random.Generator, instance: BanditInstance, arm: int, size: int) -> np.ndarray:
    mean = instance.means[arm]
    if instance.family == "gaussian":
        return mean + math.sqrt(instance.sigma2) * rng.standard_normal(size)
    return (rng.random(size) < mean).astype(np.float64)


def run_episode(
    policy: PolicySpec,
    instance: BanditInstance,
    horizon: int,
    seed: Union[int, np.random.SeedSequence],
    checkpoints: Optional[Sequence[int]] = None,
    block: int = BLOCK,
) -> RegretTrace:
    """Play one run and record the pseudo-regret ``t mu* - sum mu_{A_s}``.

    The result is a deterministic function of the arguments.
    """
    k_arms = len(instance.means)
    if horizon < k_arms:
        raise ValueError(f"horizon {horizon} is shorter than the {k_arms} initial pulls")
    if POLICIES[policy.name].two_arm_only and k_arms != 2:
        raise ValueError(f"{policy.name} needs exactly two arms")
    code = resolve_policy(policy.name, instance.family)
    seed = _as_seed(seed)
    if checkpoints is None:
        cps = checkpoint_schedule(horizon)
    else:
        cps = np.array(sorted({int(t) for t in checkpoints if 1 <= t <= horizon} | {horizon}))

    arm_rngs = [_stream(seed, 0, k) for k in range(k_arms)]
    policy_rng = _stream(seed, 1)
    size = min(block, horizon)
    buf = np.stack([_draw(arm_rngs[k], instance, k, size) for k in range(k_arms)])
    pos = np.zeros(k_arms, dtype=np.int64)
    means = np.asarray(instance.means, dtype=np.float64)
    gaps = means.max() - means
    pulls = np.zeros(k_arms)
    sums = np.zeros(k_arms)
    out_regret = np.zeros(cps.size)
    out_pulls = np.zeros((cps.size, k_arms))

    t, cp, cum, pending = 0, 0, 0.0, -1
    sigma2 = float(instance.sigma2)
    while True:
        t, cp, cum, pending = _advance(
            code, sigma2, policy.constant, pulls, sums, t, horizon, pending, buf, pos,
            gaps, cum, cps, cp, out_regret, out_pulls, policy_rng,
        )
        if pending < 0:
            break
        buf[pending] = _draw(arm_rngs[pending], instance, pending, size)
        pos[pending] = 0
    return RegretTrace(cps, out_regret, out_pulls.astype(np.int64))


@dataclass(frozen=True)
class MeanSource:
    """Where arm means come from: fixed values, a Sobol grid of pairs, or uniform draws."""

    kind: str
    values: tuple[float, ...] = ()
    count: int = 0
    arms: int = 0

    @property
    def n_arms(self) -> int:
        return {"fixed": len(self.values), "sobol": 2, "uniform": self.arms}[self.kind]


@dataclass(frozen=True)
class ExperimentConfig:
    policies: tuple[PolicySpec, ...]
    family: str
    mean_source: MeanSource
    horizon: int
    runs: int
    base_seed: int = 0
    sigma2: float = 1.0
    checkpoints: Optional[tuple[int, ...]] = None

    def problems(self) -> list[str]:
        """Every reason the configuration is invalid (empty when valid)."""
        out = []
        k = self.mean_source.n_arms
        if self.family not in FAMILIES:
            out.append(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.mean_source.kind not in ("fixed", "sobol", "uniform"):
            out.append(f"unknown mean source {self.mean_source.kind!r}")
        if self.mean_source.kind == "sobol" and self.mean_source.count < 1:
            out.append("sobol mean source needs a positive count")
        if k < 1:
            out.append("at least one arm is required")
        if self.family == "bernoulli" and not all(0 <= m <= 1 for m in self.mean_source.values):
            out.append("Bernoulli means must lie in [0, 1]")
        if self.sigma2 <= 0:
            out.append("sigma2 must be positive")
        if self.horizon < max(k, 1):
            out.append(f"horizon {self.horizon} is smaller than the number of arms {k}")
        if self.runs < 1:
            out.append("runs must be at least 1")
        if not self.policies:
            out.append("at least one policy is required")
        names = [p.name for p in self.policies]
        if len(set(names)) != len(names):
            out.append("each policy may appear only once")
        for p in self.policies:
            info = POLICIES.get(p.name)
            if info is None:
                out.append(f"unknown policy {p.name!r}")
                continue
            if self.family not in info.families:
                out.append(f"policy {p.name} does not support {self.family} rewards")
            if info.two_arm_only and k != 2:
                out.append(f"policy {p.name} needs exactly two arms, got {k}")
            if p.c is not None and info.default_c is None:
                out.append(f"policy {p.name} takes no constant c")
        return out


def instance_means(config: ExperimentConfig, instance: int, replicate: int) -> tuple[float, ...]:
    src = config.mean_source
    if src.kind == "fixed":
        return tuple(src.values)
    if src.kind == "sobol":
        return sobol_pair(instance)
    rng = _stream(np.random.SeedSequence(config.base_seed, spawn_key=(instance, replicate)), 2)
    return tuple(float(m) for m in rng.random(src.arms))


def worker_count() -> int:
    """Thread count from ``AIM_THREADS``; 0 or unset means one per CPU."""
    raw = os.environ.get("AIM_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("AIM_THREADS must be nonnegative")
    return n if n > 0 else (os.cpu_count() or 1)


def run_traces(config: ExperimentConfig) -> dict[str, list[RegretTrace]]:
    """All runs of an experiment, per policy, in (instance, replicate) order."""
    problems = config.problems()
    if problems:
        raise ValueError("; ".join(problems))
    n_instances = config.mean_source.count if config.mean_source.kind == "sobol" else 1
    tasks = [
        (p, i, r)
        for p in config.policies
        for i in range(n_instances)
        for r in range(config.runs)
    ]

    def work(task):
        p, i, r = task
        seed = np.random.SeedSequence(config.base_seed, spawn_key=(i, r))
        try:
            instance = BanditInstance(config.family, instance_means(config, i, r), config.sigma2)
            return run_episode(p, instance, config.horizon, seed, config.checkpoints)
        except Exception as exc:
            raise RunError(
                f"run failed for policy={p.name} instance={i} replicate={r} "
                f"base_seed={config.base_seed}: {exc}"
            ) from exc

    workers = worker_count()
    if workers == 1:
        results = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, tasks))
    out: dict[str, list[RegretTrace]] = {p.name: [] for p in config.policies}
    for (p, _, _), trace in zip(tasks, results):
        out[p.name].append(trace)
    return out


@dataclass(frozen=True)
class AggregatedTable:
    """Mean regret and its standard error per policy and checkpoint."""

    checkpoints: np.ndarray
    mean: dict[str, np.ndarray]
    stderr: dict[str, np.ndarray]
    runs: int
    traces: Optional[dict[str, list[RegretTrace]]] = field(default=None, repr=False)

    @property
    def policies(self) -> list[str]:
        return sorted(self.mean)


def _aggregate(traces: list[RegretTrace]) -> tuple[np.ndarray, np.ndarray]:
    regret = np.stack([tr.regret for tr in traces])
    n = regret.shape[0]
    # fsum is exact, so the result does not depend on the order runs finished in.
    mean = np.array([math.fsum(col) / n for col in regret.T])
    if n == 1:
        return mean, np.zeros_like(mean)
    var = np.array([math.fsum((col - m) ** 2) / (n - 1) for col, m in zip(regret.T, mean)])
    return mean, np.sqrt(var) / math.sqrt(n)


def run_experiment(config: ExperimentConfig, keep_traces: bool = False) -> AggregatedTable:
    traces = run_traces(config)
    first = next(iter(traces.values()))[0]
    mean, stderr = {}, {}
    for name, runs in traces.items():
        mean[name], stderr[name] = _aggregate(runs)
    return AggregatedTable(
        first.checkpoints, mean, stderr, len(runs), traces if keep_traces else None
    )
