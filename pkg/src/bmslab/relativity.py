"""Mixed stationary distributions, optimal relativities, and HMSE.

The posted relativity depends on the BM level only, while the chain lives
on augmented (level, counter) states. The optimal relativity for a level
therefore pools the normal equations of all augmented states sharing that
level: it is the ratio of the pooled effect-weighted stationary mass to
the pooled plain stationary mass, both mixed over risk classes and the
random effect.

Everything is built from per-class, per-state quadrature moments of the
stationary vectors. One stationary solve per (class, node) pair is the
dominant cost; each solve is reused for every level, for both models, and
for HMSE evaluation at arbitrary relativity vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .effects import (BivariateEffect, LognormalEffect, QuadratureGrid,
                      conditional_severity_moment, lognormal_grid)
from .errors import ConfigurationError, DegeneracyError
from .markov import (ClaimCountDistribution, build_classical_matrix, build_matrix,
                     stationary)
from .portfolio import Portfolio
from .states import BmsRule, StateSpace, build_state_space

MODEL_FREQUENCY = "frequency"
MODEL_FREQUENCY_SEVERITY = "frequency_severity"


def frequency_marginal(effect) -> LognormalEffect:
    if isinstance(effect, BivariateEffect):
        return effect.frequency_marginal
    if isinstance(effect, LognormalEffect):
        return effect
    raise ConfigurationError(f"unsupported effect type {type(effect).__name__}")


@dataclass(frozen=True)
class MixedStationary:
    """Stationary law of the augmented chain mixed over classes and effects."""

    space: StateSpace
    state_probs: np.ndarray   # P(L* = (l)_a), in state order
    level_probs: np.ndarray   # P(L = l), index l = 0..z


@dataclass(frozen=True)
class RelativityTable:
    """Optimal (or supplied) relativities with the level law and HMSE."""

    rule: BmsRule
    model: str
    relativities: np.ndarray   # zeta(l), NaN where the level is unreachable
    level_probs: np.ndarray
    hmse: float
    nodes: int

    def fingerprint(self) -> str:
        return (f"model={self.model},rule={self.rule.system_label()},"
                f"z={self.rule.z},l0={self.rule.l0},nodes={self.nodes}")

    def to_csv(self) -> str:
        lines = ["level,relativity,stationary_prob"]
        for level in range(self.rule.z + 1):
            lines.append(f"{level},{self.relativities[level]:.17g},"
                         f"{self.level_probs[level]:.17g}")
        lines.append(f"# hmse={self.hmse:.17g},{self.fingerprint()}")
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        lines = ["| level | relativity | stationary_prob |",
                 "|------:|-----------:|----------------:|"]
        for level in range(self.rule.z, -1, -1):
            zeta = self.relativities[level]
            cell = f"{zeta:.3f}" if math.isfinite(zeta) else "undefined"
            lines.append(f"| {level:5d} | {cell:>10s} | {self.level_probs[level]:15.3f} |")
        lines.append(f"| HMSE  | {self.hmse:.6g} | {self.fingerprint()} |")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MixtureMoments:
    """Per-class, per-state quadrature moments of the stationary mixture.

    With pi_s(m) the stationary probability of state s at conditional mean
    m, and theta the frequency effect:

      m0[k, s] ~ int pi_s(lambda1_k theta) g(theta) dtheta
      m1[k, s] ~ int theta   pi_s(...) g(theta) dtheta
      m2[k, s] ~ int theta^2 pi_s(...) g(theta) dtheta

    For the frequency-severity model, the severity effect is integrated out
    in closed form through its conditional moments given theta:

      b1[k, s] ~ int theta   E[T2   | theta] pi_s(...) g(theta) dtheta
      b2[k, s] ~ int theta^2 E[T2^2 | theta] pi_s(...) g(theta) dtheta
    """

    rule: BmsRule
    space: StateSpace
    portfolio: Portfolio
    model: str
    nodes: int
    m0: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    b1: np.ndarray | None = None
    b2: np.ndarray | None = None

    # -- pooling ---------------------------------------------------------

    def _level_starts(self) -> np.ndarray:
        levels = np.array(self.space.levels)
        return np.flatnonzero(np.r_[True, np.diff(levels) != 0])

    def pool_levels(self, values: np.ndarray) -> np.ndarray:
        """Sum a per-state array over the states sharing each level."""
        return np.add.reduceat(values, self._level_starts(), axis=-1)

    # -- distributions ----------------------------------------------------

    def mixed_stationary(self) -> MixedStationary:
        state_probs = self.portfolio.weights @ self.m0
        return MixedStationary(space=self.space, state_probs=state_probs,
                               level_probs=self.pool_levels(state_probs))

    def _class_scale(self) -> np.ndarray:
        w = self.portfolio.weights
        if self.model == MODEL_FREQUENCY:
            return w * self.portfolio.lambda1**2
        return w * (self.portfolio.lambda1 * self.portfolio.lambda2) ** 2

    # -- relativities -----------------------------------------------------

    def relativities(self) -> np.ndarray:
        """Optimal per-level relativities for this mixture's model.

        Ratio of pooled numerator to pooled denominator per level; levels
        with zero stationary mass get NaN and are excluded from HMSE.
        """
        scale = self._class_scale()
        numer_states = self.m1 if self.b1 is None else self.b1
        num = self.pool_levels(scale @ numer_states)
        den = self.pool_levels(scale @ self.m0)
        zeta = np.full(self.rule.z + 1, np.nan)
        reachable = den > 0
        zeta[reachable] = num[reachable] / den[reachable]
        return zeta

    # -- HMSE --------------------------------------------------------------

    def hmse(self, relativities: Sequence[float]) -> float:
        """Mean square error of premium vs the effect-true premium.

        Valid for any relativity vector of length z + 1, optimal or not.
        The quadratic in zeta expands state by state against the stored
        moments; unreachable levels contribute nothing.
        """
        zeta = np.asarray(relativities, dtype=float)
        if zeta.shape != (self.rule.z + 1,):
            raise ConfigurationError(
                f"relativity vector must have length z+1={self.rule.z + 1}, "
                f"got shape {zeta.shape}")
        level_probs = self.mixed_stationary().level_probs
        reachable = level_probs > 0
        if not np.all(np.isfinite(zeta[reachable])):
            raise ConfigurationError("relativities must be finite at every reachable level")
        zeta_filled = np.where(reachable, zeta, 0.0)
        per_state = zeta_filled[np.array(self.space.levels)]
        if self.model == MODEL_FREQUENCY:
            sq, lin = self.m2, self.m1
        else:
            sq, lin = self.b2, self.b1
        terms = sq - 2.0 * per_state * lin + per_state**2 * self.m0
        return float(self._class_scale() @ terms.sum(axis=1))

    def table(self) -> RelativityTable:
        zeta = self.relativities()
        return RelativityTable(rule=self.rule, model=self.model,
                               relativities=zeta,
                               level_probs=self.mixed_stationary().level_probs,
                               hmse=self.hmse(np.nan_to_num(zeta)),
                               nodes=self.nodes)


def compute_mixture(rule: BmsRule, portfolio: Portfolio, effect,
                    nodes: int = 64, grid: QuadratureGrid | None = None) -> MixtureMoments:
    """One stationary solve per (class, node) pair, accumulated into moments.

    Accumulation order is the fixed (class, node) enumeration, so results
    are deterministic.
    """
    model = (MODEL_FREQUENCY_SEVERITY if isinstance(effect, BivariateEffect)
             else MODEL_FREQUENCY)
    if grid is None:
        grid = lognormal_grid(frequency_marginal(effect), nodes)
    else:
        nodes = len(grid)
    space = build_state_space(rule)
    n_classes = len(portfolio)
    size = len(space)
    m0 = np.zeros((n_classes, size))
    m1 = np.zeros((n_classes, size))
    m2 = np.zeros((n_classes, size))
    if model == MODEL_FREQUENCY_SEVERITY:
        b1 = np.zeros((n_classes, size))
        b2 = np.zeros((n_classes, size))
        cond1 = conditional_severity_moment(effect, grid.nodes, order=1)
        cond2 = conditional_severity_moment(effect, grid.nodes, order=2)
    else:
        b1 = b2 = cond1 = cond2 = None
    theta = grid.nodes
    weights = grid.weights
    for k, risk in enumerate(portfolio.classes):
        for j in range(len(grid)):
            dist = ClaimCountDistribution(mean=risk.lambda1 * theta[j])
            P = build_matrix(rule, dist, space)
            try:
                pi = stationary(P)
            except DegeneracyError as exc:
                raise DegeneracyError(
                    f"{exc} (class {risk.label!r}, node {j}, "
                    f"mean={dist.mean:.6g}, p0={dist.p0:.3e})") from exc
            m0[k] += weights[j] * pi
            m1[k] += weights[j] * theta[j] * pi
            m2[k] += weights[j] * theta[j] ** 2 * pi
            if b1 is not None:
                b1[k] += weights[j] * theta[j] * cond1[j] * pi
                b2[k] += weights[j] * theta[j] ** 2 * cond2[j] * pi
    return MixtureMoments(rule=rule, space=space, portfolio=portfolio, model=model,
                          nodes=nodes, m0=m0, m1=m1, m2=m2, b1=b1, b2=b2)


# -- public operations ------------------------------------------------------

def mixed_stationary(rule: BmsRule, portfolio: Portfolio, effect,
                     nodes: int = 64, grid: QuadratureGrid | None = None) -> MixedStationary:
    return compute_mixture(rule, portfolio, effect, nodes, grid).mixed_stationary()


def optimal_relativities_model1(rule: BmsRule, portfolio: Portfolio,
                                effect: LognormalEffect, nodes: int = 64,
                                grid: QuadratureGrid | None = None) -> RelativityTable:
    if not isinstance(effect, LognormalEffect):
        raise ConfigurationError("the frequency-only model needs a LognormalEffect")
    return compute_mixture(rule, portfolio, effect, nodes, grid).table()


def optimal_relativities_model2(rule: BmsRule, portfolio: Portfolio,
                                effect: BivariateEffect, nodes: int = 64,
                                grid: QuadratureGrid | None = None) -> RelativityTable:
    if not isinstance(effect, BivariateEffect):
        raise ConfigurationError("the frequency-severity model needs a BivariateEffect")
    return compute_mixture(rule, portfolio, effect, nodes, grid).table()


def optimal_relativities(rule: BmsRule, portfolio: Portfolio, effect,
                         nodes: int = 64, grid: QuadratureGrid | None = None) -> RelativityTable:
    """Model dispatch on the effect type."""
    return compute_mixture(rule, portfolio, effect, nodes, grid).table()


def hmse(rule: BmsRule, portfolio: Portfolio, effect, relativities,
         nodes: int = 64, grid: QuadratureGrid | None = None) -> float:
    """HMSE of an arbitrary relativity vector (not only the optimal one)."""
    return compute_mixture(rule, portfolio, effect, nodes, grid).hmse(relativities)


# -- classical pen=0 closed forms (independent oracle route) ----------------

def _classical_mixture(rule: BmsRule, portfolio: Portfolio, effect,
                       nodes: int, grid: QuadratureGrid | None):
    """Level moments on the unaugmented (z+1)-state classical chain."""
    if rule.pen != 0:
        raise ConfigurationError("the classical closed form requires pen=0")
    if grid is None:
        grid = lognormal_grid(frequency_marginal(effect), nodes)
    size = rule.z + 1
    n_classes = len(portfolio)
    m0 = np.zeros((n_classes, size))
    numer = np.zeros((n_classes, size))
    if isinstance(effect, BivariateEffect):
        cond1 = conditional_severity_moment(effect, grid.nodes, order=1)
        numer_factor = grid.nodes * cond1
    else:
        numer_factor = grid.nodes
    for k, risk in enumerate(portfolio.classes):
        for j in range(len(grid)):
            dist = ClaimCountDistribution(mean=risk.lambda1 * grid.nodes[j])
            pi = stationary(build_classical_matrix(rule.z, rule.h, dist))
            m0[k] += grid.weights[j] * pi
            numer[k] += grid.weights[j] * numer_factor[j] * pi
    return m0, numer


def classical_relativities_model1(rule: BmsRule, portfolio: Portfolio,
                                  effect: LognormalEffect, nodes: int = 64,
                                  grid: QuadratureGrid | None = None):
    """pen=0 frequency-only relativities on the classical chain.

    Returns (relativities, level_probs); the oracle for the augmented
    engine's pen=0 special case.
    """
    m0, numer = _classical_mixture(rule, portfolio, effect, nodes, grid)
    scale = portfolio.weights * portfolio.lambda1**2
    den = scale @ m0
    num = scale @ numer
    zeta = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)
    return zeta, portfolio.weights @ m0


def classical_relativities_model2(rule: BmsRule, portfolio: Portfolio,
                                  effect: BivariateEffect, nodes: int = 64,
                                  grid: QuadratureGrid | None = None):
    """pen=0 frequency-severity relativities on the classical chain."""
    if not isinstance(effect, BivariateEffect):
        raise ConfigurationError("the frequency-severity closed form needs a BivariateEffect")
    m0, numer = _classical_mixture(rule, portfolio, effect, nodes, grid)
    scale = portfolio.weights * (portfolio.lambda1 * portfolio.lambda2) ** 2
    den = scale @ m0
    num = scale @ numer
    zeta = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)
    return zeta, portfolio.weights @ m0
