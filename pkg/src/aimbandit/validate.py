"""Closed-form versus numerical-oracle identity checks.

Used by the ``validate`` subcommand and by the test-suite.  Random states are
drawn from fixed seeds so that reports are reproducible.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy import special

from .entropy_gaussian import (
    EntropyState,
    increment_closed_form,
    s_body_exact,
    s_tail_exact,
    theta_eq,
    theta_eq_residual,
)
from .oracle import (
    PosteriorSet,
    QuadratureSpec,
    expected_app_increment,
    partition_integrals,
    pmax_density,
)
from .quadrature import integrate

__all__ = [
    "Check",
    "ValidationReport",
    "asymptotic_grid",
    "check_erf_identity",
    "check_increments",
    "check_normalization",
    "check_partition",
    "check_theta_residual",
    "random_states",
    "validate_suite",
]


@dataclass(frozen=True)
class Check:
    name: str
    worst: float
    tolerance: float
    cases: int

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}  {self.name}: worst {self.worst:.3e} "
            f"(tolerance {self.tolerance:.1e}, {self.cases} cases)"
        )


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def random_states(rng: np.random.Generator, count: int, defined: bool = True) -> list[EntropyState]:
    """Two-arm states with counts in 1..10^4, sigma2 in 0.25..4 and gaps of 0..4 posterior widths.

    With ``defined`` the larger count goes to the max arm so theta_eq exists.
    """
    out = []
    for _ in range(count):
        n_a, n_b = np.sort(np.exp(rng.uniform(0.0, math.log(1e4), size=2)).astype(int) + 1)
        if n_a == n_b:
            n_b += 1
        n_max, n_min = (n_b, n_a) if defined else tuple(rng.permutation([n_a, n_b]))
        mean_min = rng.uniform(-1.0, 1.0)
        sigma2 = math.exp(rng.uniform(math.log(0.25), math.log(4.0)))
        gap = rng.uniform(0.0, 4.0) * math.sqrt(sigma2 / n_min)
        out.append(EntropyState(mean_min + gap, int(n_max), mean_min, int(n_min), sigma2))
    return out


def asymptotic_grid(rng: np.random.Generator, count: int) -> list[EntropyState]:
    """States with N_max >= 10 N_min >= 100, gap sqrt(N_min) in [1, 5] and sigma2 = 1."""
    out = []
    for _ in range(count):
        n_min = int(round(math.exp(rng.uniform(math.log(10.0), math.log(1e3)))))
        n_min = max(n_min, 10)
        n_max = int(round(n_min * math.exp(rng.uniform(math.log(10.0), math.log(1e3)))))
        gap = rng.uniform(1.0, 5.0) / math.sqrt(n_min)
        out.append(EntropyState(gap, n_max, 0.0, n_min, 1.0))
    return out


def check_partition(
    states: list[EntropyState], spec: QuadratureSpec = QuadratureSpec(), tail_offset: float = 0.0
) -> tuple[Check, Check]:
    """Closed-form body and tail entropies against quadrature of their integrals.

    ``tail_offset`` is added to every closed-form tail value; it exists so the
    suite's own sensitivity can be tested.
    """
    worst_tail = worst_body = 0.0
    for s in states:
        teq = theta_eq(s).value
        pset = PosteriorSet.gaussian([s.mean_max, s.mean_min], [s.n_max, s.n_min], s.sigma2)
        body_num, tail_num = partition_integrals(pset, teq, spec)
        worst_tail = max(worst_tail, abs(s_tail_exact(s, teq) + tail_offset - tail_num))
        worst_body = max(worst_body, abs(s_body_exact(s) - body_num))
    return (
        Check("tail entropy closed form vs quadrature", worst_tail, 1e-8, len(states)),
        Check("body entropy closed form vs quadrature", worst_body, 1e-8, len(states)),
    )


def check_erf_identity(rng: np.random.Generator, count: int = 50) -> Check:
    """int [1 + erf((t - a)/sqrt(2 Va))] N(t; b, Vb) dt = 1 + erf((b - a)/sqrt(2 (Va + Vb)))."""
    worst = 0.0
    for _ in range(count):
        a, b = rng.uniform(-2.0, 2.0, size=2)
        va, vb = np.exp(rng.uniform(math.log(1e-3), math.log(4.0), size=2))
        sd = math.sqrt(vb)

        def f(t, a=a, b=b, va=va, vb=vb):
            dens = np.exp(-0.5 * (t - b) ** 2 / vb) / math.sqrt(2 * math.pi * vb)
            return (1.0 + special.erf((t - a) / math.sqrt(2 * va))) * dens

        lhs = integrate(f, [b - 12 * sd, a, b, b + 12 * sd], 1e-12, 1e-12).value
        rhs = 1.0 + math.erf((b - a) / math.sqrt(2 * (va + vb)))
        worst = max(worst, abs(lhs - rhs))
    return Check("erf integral identity", worst, 1e-9, count)


def check_theta_residual(states: list[EntropyState]) -> Check:
    worst = 0.0
    for s in states:
        th = theta_eq(s).value
        worst = max(worst, abs(theta_eq_residual(s, th)) / (1.0 + th * th))
    return Check("theta_eq balance residual / (1 + theta^2)", worst, 1e-9, len(states))


def check_normalization(rng: np.random.Generator, count: int = 50) -> Check:
    worst = 0.0
    for i in range(count):
        k = (1, 2, 3, 8)[i % 4]
        means = rng.uniform(-1.0, 1.0, size=k)
        pulls = np.exp(rng.uniform(0.0, math.log(1e3), size=k))
        pset = PosteriorSet.gaussian(means, pulls, 1.0)
        lo = min(means - 10 / np.sqrt(pulls))
        hi = max(means + 10 / np.sqrt(pulls))
        total = integrate(lambda x: pmax_density(x, pset), [lo, *sorted(means), hi]).value
        worst = max(worst, abs(total - 1.0))
    return Check("p_max normalization", worst, 1e-9, count)


def check_increments(states: list[EntropyState]) -> Check:
    worst = 0.0
    for s in states:
        x = theta_eq(s).value - s.mean_min
        d_max, d_min = increment_closed_form(s)
        g_max = expected_app_increment(x, s.n_max, s.n_min, s.sigma2, "max")
        g_min = expected_app_increment(x, s.n_max, s.n_min, s.sigma2, "min")
        worst = max(worst, abs(d_max - g_max), abs(d_min - g_min))
    return Check("increments closed form vs Gauss-Hermite", worst, 1e-6, len(states))


def validate_suite(
    tail_offset: float = 0.0,
    print_fn: Callable[[str], None] | None = print,
) -> ValidationReport:
    """Run every identity check and print one line per check."""
    checks = [
        *check_partition(random_states(np.random.default_rng(1), 100), tail_offset=tail_offset),
        check_erf_identity(np.random.default_rng(2)),
        check_theta_residual(random_states(np.random.default_rng(3), 10_000)),
        check_normalization(np.random.default_rng(4)),
        check_increments(random_states(np.random.default_rng(5), 100)),
    ]
    report = ValidationReport(tuple(checks))
    if print_fn is not None:
        for line in report.lines():
            print_fn(line)
    return report
