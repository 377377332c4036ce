"""Numerical ground truth for the entropy of the posterior of the maximum.

The density of the largest arm mean is ``sum_k f_k prod_{j != k} F_j``.  Its
differential entropy, the one-step expected change of that entropy, and the
body/tail partition integrals are all computed by adaptive quadrature here, so
they can be compared against the closed forms in :mod:`aimbandit.entropy_gaussian`.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import Union

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy import special

from .quadrature import integrate

__all__ = [
    "BetaComponent",
    "GaussianComponent",
    "PosteriorSet",
    "QuadratureSpec",
    "expected_app_increment",
    "expected_increment_exact",
    "partition_integrals",
    "pmax_density",
    "smax_exact",
]

# Densities below this are treated as exact zeros in p ln p.
_TINY = 1e-300


@dataclass(frozen=True)
class GaussianComponent:
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if self.variance <= 0:
            raise ValueError("variance must be positive")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        return -0.5 * (x - self.mean) ** 2 / self.variance - 0.5 * math.log(
            2.0 * math.pi * self.variance
        )

    def pdf(self, x: np.ndarray) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def cdf(self, x: np.ndarray) -> np.ndarray:
        return special.ndtr((x - self.mean) / self.sd)

    def bounds(self, width: float) -> tuple[float, float]:
        return self.mean - width * self.sd, self.mean + width * self.sd


@dataclass(frozen=True)
class BetaComponent:
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.alpha < 1 or self.beta < 1:
            raise ValueError("Beta parameters must be >= 1")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return (
                special.xlogy(self.alpha - 1.0, x)
                + special.xlog1py(self.beta - 1.0, -x)
                - special.betaln(self.alpha, self.beta)
            )

    def pdf(self, x: np.ndarray) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def cdf(self, x: np.ndarray) -> np.ndarray:
        return special.betainc(self.alpha, self.beta, np.clip(x, 0.0, 1.0))

    def bounds(self, width: float) -> tuple[float, float]:
        return 0.0, 1.0


Component = Union[GaussianComponent, BetaComponent]


@dataclass(frozen=True)
class PosteriorSet:
    """Independent posteriors of the arm means."""

    posteriors: tuple[Component, ...]

    def __post_init__(self) -> None:
        if not self.posteriors:
            raise ValueError("a posterior set needs at least one arm")

    @classmethod
    def gaussian(
        cls, means: Sequence[float], pulls: Sequence[float], sigma2: float = 1.0
    ) -> PosteriorSet:
        """Gaussian posteriors N(mean_k, sigma2 / pulls_k)."""
        return cls(tuple(GaussianComponent(m, sigma2 / n) for m, n in zip(means, pulls)))

    def __len__(self) -> int:
        return len(self.posteriors)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 2000
    truncation: float = 10.0

    def __post_init__(self) -> None:
        if self.abs_tol <= 0 or self.rel_tol <= 0 or self.truncation <= 0:
            raise ValueError("tolerances and truncation width must be positive")


def _domain(pset: PosteriorSet, spec: QuadratureSpec) -> list[float]:
    lows, highs = zip(*(p.bounds(spec.truncation) for p in pset.posteriors))
    lo, hi = min(lows), max(highs)
    inner = [p.mean for p in pset.posteriors if lo < p.mean < hi]
    return sorted({lo, hi, *inner})


def pmax_density(theta, pset: PosteriorSet):
    """Density of ``max_k mu_k`` at ``theta`` (scalar or array)."""
    x = np.asarray(theta, dtype=float)
    pdfs = np.stack([p.pdf(x) for p in pset.posteriors])
    cdfs = np.stack([p.cdf(x) for p in pset.posteriors])
    # prod_{j != k} F_j from prefix and suffix products, avoiding division by F_k.
    ones = np.ones_like(cdfs[:1])
    prefix = np.cumprod(np.concatenate([ones, cdfs[:-1]]), axis=0)
    suffix = np.cumprod(np.concatenate([ones, cdfs[:0:-1]]), axis=0)[::-1]
    out = (pdfs * prefix * suffix).sum(axis=0)
    return float(out) if out.ndim == 0 else out


def _neg_plogp(p: np.ndarray) -> np.ndarray:
    safe = np.where(p > _TINY, p, 1.0)
    return np.where(p > _TINY, -p * np.log(safe), 0.0)


def smax_exact(pset: PosteriorSet, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Differential entropy of the posterior of the largest mean."""
    result = integrate(
        lambda x: _neg_plogp(pmax_density(x, pset)),
        _domain(pset, spec),
        spec.abs_tol,
        spec.rel_tol,
        spec.max_subdivisions,
    )
    return result.value


def expected_increment_exact(
    pset: PosteriorSet,
    arm: int,
    sigma2: float,
    spec: QuadratureSpec = QuadratureSpec(),
    nodes: int = 40,
) -> float:
    """Expected change of :func:`smax_exact` after one more Gaussian pull of ``arm``.

    The next reward is drawn from N(mean_arm, sigma2) and the arm's posterior
    becomes N((N mean + r)/(N + 1), sigma2/(N + 1)) with N = sigma2/variance.
    The outer expectation uses Gauss-Hermite quadrature with ``nodes`` points.
    """
    target = pset.posteriors[arm]
    if not isinstance(target, GaussianComponent):
        raise TypeError("expected increments are only defined for Gaussian posteriors")
    if nodes < 40:
        raise ValueError("use at least 40 Gauss-Hermite nodes")
    n = sigma2 / target.variance
    x, w = hermgauss(nodes)
    rewards = target.mean + math.sqrt(2.0 * sigma2) * x
    values = []
    for r in rewards:
        updated = GaussianComponent((target.mean * n + r) / (n + 1.0), sigma2 / (n + 1.0))
        posteriors = list(pset.posteriors)
        posteriors[arm] = updated
        values.append(smax_exact(replace(pset, posteriors=tuple(posteriors)), spec))
    expected = math.fsum(w * np.asarray(values)) / math.sqrt(math.pi)
    return expected - smax_exact(pset, spec)


def partition_integrals(
    pset: PosteriorSet, teq: float, spec: QuadratureSpec = QuadratureSpec()
) -> tuple[float, float]:
    """Body and tail integrals of a two-arm set split at ``teq``.

    Returns ``(-int F_min f_max ln f_max, -int_{teq} f_min ln f_min)`` where
    max/min refer to the components with the larger/smaller mean.
    """
    if len(pset) != 2:
        raise ValueError("the partition is defined for two arms")
    p_max, p_min = sorted(pset.posteriors, key=lambda p: p.mean, reverse=True)
    domain = _domain(pset, spec)

    def body(x):
        return -p_min.cdf(x) * p_max.pdf(x) * p_max.logpdf(x)

    def tail(x):
        dens = p_min.pdf(x)
        return np.where(dens > _TINY, -dens * p_min.logpdf(x), 0.0)

    body_num = integrate(
        body, domain, spec.abs_tol, spec.rel_tol, spec.max_subdivisions
    ).value
    hi = p_min.bounds(spec.truncation)[1]
    if teq >= hi:
        return body_num, 0.0
    tail_num = integrate(
        tail, [teq, hi], spec.abs_tol, spec.rel_tol, spec.max_subdivisions
    ).value
    return body_num, tail_num


def _s_app_numpy(x, n_max, n_min, sigma2):
    """Approximate body + tail entropy at crossing-point offsets ``x`` (vectorized)."""
    z = np.sqrt(n_min) * x / np.sqrt(2.0 * sigma2)
    body = 0.5 * np.log(2.0 * np.pi * np.e * sigma2 / n_max) * (1.0 - 0.5 * special.erfc(z))
    tail = np.sqrt(n_min) * x / (2.0 * np.sqrt(2.0 * np.pi * sigma2)) * np.exp(-z * z)
    return body + tail


def expected_app_increment(
    x: float, n_max: int, n_min: int, sigma2: float, arm: str, nodes: int = 64
) -> float:
    """Gauss-Hermite expectation of the approximate entropy change after one pull.

    ``x`` is the crossing point's distance above the lesser mean.  Pulling an
    arm with ``N`` samples moves ``x`` by ``r/(N + 1)`` with ``r ~ N(0, sigma2)``
    and raises that arm's count; every other dependence of the crossing point
    on the state is held fixed.
    """
    if arm not in ("max", "min"):
        raise ValueError("arm must be 'max' or 'min'")
    t, w = hermgauss(nodes)
    r = math.sqrt(2.0 * sigma2) * t
    if arm == "max":
        after = _s_app_numpy(x + r / (n_max + 1.0), n_max + 1.0, n_min, sigma2)
    else:
        after = _s_app_numpy(x + r / (n_min + 1.0), n_max, n_min + 1.0, sigma2)
    now = float(_s_app_numpy(np.float64(x), n_max, n_min, sigma2))
    return math.fsum(w * after) / math.sqrt(math.pi) - now
