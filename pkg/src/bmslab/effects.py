"""Unobserved-heterogeneity distributions and their quadrature grids.

The frequency effect is lognormal with mean fixed at 1. The joint
frequency-severity effect couples two mean-1 lognormal marginals through a
Gaussian copula with correlation rho; since the copula transform of a
lognormal marginal is exactly its log z-score, the pair of log-effects is
jointly normal and conditional moments are available in closed form. That
closed form collapses every double mixing integral to a single integral
over the frequency effect.

Mixing integrals are discretized with Gauss-Hermite quadrature after the
log substitution theta = exp(sigma * x - sigma^2 / 2), which is spectrally
accurate for lognormal weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, ConfigurationError

WEIGHT_SUM_TOL = 1e-12
MEAN_TOL = 1e-8


@dataclass(frozen=True)
class LognormalEffect:
    """Mean-1 lognormal effect: log-variance sigma2, log-mean -sigma2/2."""

    sigma2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ConfigurationError(f"sigma2 must be finite and > 0, got {self.sigma2}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def log_mean(self) -> float:
        return -0.5 * self.sigma2

    def moment(self, order: int) -> float:
        """E[Theta^k] = exp(k (k-1) sigma^2 / 2) for the mean-1 lognormal."""
        return math.exp(0.5 * order * (order - 1) * self.sigma2)

    def density(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        norm = theta * self.sigma * math.sqrt(2.0 * math.pi)
        return np.exp(-0.5 * ((np.log(theta) - self.log_mean) / self.sigma) ** 2) / norm


@dataclass(frozen=True)
class BivariateEffect:
    """Joint frequency/severity effect: lognormal marginals, Gaussian copula.

    Equivalent to a bivariate lognormal whose log-effects have means
    -sigma1_2/2 and -sigma2_2/2, variances sigma1_2 and sigma2_2, and
    correlation rho. Only the Gaussian copula family is supported.
    """

    sigma1_2: float
    sigma2_2: float
    rho: float

    def __post_init__(self) -> None:
        for name in ("sigma1_2", "sigma2_2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be finite and > 0, got {value}")
        if not (math.isfinite(self.rho) and -1.0 < self.rho < 1.0):
            raise ConfigurationError(f"rho must lie in (-1, 1), got {self.rho}")

    @property
    def frequency_marginal(self) -> LognormalEffect:
        return LognormalEffect(self.sigma1_2)

    @property
    def severity_marginal(self) -> LognormalEffect:
        return LognormalEffect(self.sigma2_2)

    def cross_moment(self) -> float:
        """E[Theta1 * Theta2] = exp(rho * sigma1 * sigma2)."""
        return math.exp(self.rho * math.sqrt(self.sigma1_2) * math.sqrt(self.sigma2_2))


@dataclass(frozen=True)
class QuadratureGrid:
    """Positive nodes and probability weights discretizing a mean-1 effect."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ConfigurationError("grid nodes and weights must be matching 1-D arrays")
        if np.any(self.nodes <= 0) or np.any(self.weights <= 0):
            raise ConfigurationError("grid nodes and weights must be positive")

    def __len__(self) -> int:
        return len(self.nodes)

    def expect(self, values: np.ndarray) -> float:
        """Weighted sum of per-node values."""
        return float(self.weights @ values)


def lognormal_grid(effect: LognormalEffect, nodes: int = 64) -> QuadratureGrid:
    """Gauss-Hermite grid for integrals against the mean-1 lognormal density.

    Probabilists' nodes x_j are mapped to theta_j = exp(sigma x_j - sigma^2/2)
    and the weights normalized to sum to 1. The constructed grid must
    reproduce the unit mean to 1e-8; too few nodes raise AccuracyError.
    """
    if nodes < 2:
        raise ConfigurationError(f"quadrature needs at least 2 nodes, got {nodes}")
    x, raw = np.polynomial.hermite_e.hermegauss(nodes)
    weights = raw / math.sqrt(2.0 * math.pi)
    theta = np.exp(effect.sigma * x + effect.log_mean)
    weight_err = abs(float(weights.sum()) - 1.0)
    if weight_err > WEIGHT_SUM_TOL:
        raise AccuracyError(f"grid weights sum to 1 +/- {weight_err:.3e} at {nodes} nodes")
    mean_err = abs(float(weights @ theta) - 1.0)
    if mean_err > MEAN_TOL:
        raise AccuracyError(
            f"{nodes}-node grid reproduces the unit mean only to {mean_err:.3e} "
            f"for sigma2={effect.sigma2}; increase the node count")
    return QuadratureGrid(nodes=theta, weights=weights)


def conditional_severity_moment(effect: BivariateEffect, theta1, order: int = 1):
    """E[Theta2^order | Theta1 = theta1] under the joint lognormal law.

    log Theta2 given Theta1 = t is normal with mean
    -sigma2^2/2 + rho (sigma2/sigma1) (log t + sigma1^2/2) and variance
    (1 - rho^2) sigma2^2.
    """
    s1 = math.sqrt(effect.sigma1_2)
    s2 = math.sqrt(effect.sigma2_2)
    log_t = np.log(np.asarray(theta1, dtype=float))
    cond_mean = -0.5 * effect.sigma2_2 + effect.rho * (s2 / s1) * (log_t + 0.5 * effect.sigma1_2)
    cond_var = (1.0 - effect.rho**2) * effect.sigma2_2
    result = np.exp(order * cond_mean + 0.5 * order * order * cond_var)
    return float(result) if np.isscalar(theta1) else result


def conditional_severity_mean(effect: BivariateEffect, theta1):
    """E[Theta2 | Theta1 = theta1]; collapses double mixing integrals."""
    return conditional_severity_moment(effect, theta1, order=1)


def tensor_grid(effect: BivariateEffect, nodes: int = 64):
    """Full 2-D tensor quadrature over (Theta1, Theta2).

    Validation path only: the production integrals use the closed-form
    conditional moments. Returns (theta1, theta2, weights) as flat arrays
    of length nodes**2.
    """
    x, raw = np.polynomial.hermite_e.hermegauss(nodes)
    w = raw / math.sqrt(2.0 * math.pi)
    s1 = math.sqrt(effect.sigma1_2)
    s2 = math.sqrt(effect.sigma2_2)
    x1 = np.repeat(x, nodes)
    x2 = np.tile(x, nodes)
    theta1 = np.exp(s1 * x1 - 0.5 * effect.sigma1_2)
    # Conditional log-effect: rho x1 + sqrt(1 - rho^2) x2 is standard normal
    # and has correlation rho with x1.
    mix = effect.rho * x1 + math.sqrt(1.0 - effect.rho**2) * x2
    theta2 = np.exp(s2 * mix - 0.5 * effect.sigma2_2)
    weights = np.repeat(w, nodes) * np.tile(w, nodes)
    return theta1, theta2, weights


def sample_effects(effect, count: int, seed: int):
    """Deterministic effect draws for Monte-Carlo oracles.

    For a LognormalEffect returns one array of Theta samples; for a
    BivariateEffect returns the pair (theta1, theta2).
    """
    if count < 1:
        raise ConfigurationError(f"sample count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    if isinstance(effect, LognormalEffect):
        z = rng.standard_normal(count)
        return np.exp(effect.sigma * z + effect.log_mean)
    if isinstance(effect, BivariateEffect):
        z1 = rng.standard_normal(count)
        z2 = rng.standard_normal(count)
        s1 = math.sqrt(effect.sigma1_2)
        s2 = math.sqrt(effect.sigma2_2)
        mix = effect.rho * z1 + math.sqrt(1.0 - effect.rho**2) * z2
        theta1 = np.exp(s1 * z1 - 0.5 * effect.sigma1_2)
        theta2 = np.exp(s2 * mix - 0.5 * effect.sigma2_2)
        return theta1, theta2
    raise ConfigurationError(f"unsupported effect type {type(effect).__name__}")
