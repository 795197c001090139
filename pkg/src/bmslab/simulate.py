"""Monte-Carlo oracle for the analytic pipeline.

Each policyholder gets an independent Philox stream keyed by (master seed,
policyholder index), so results are identical regardless of chunking or
parallel scheduling. A policyholder draws a risk class, an effect value,
and a full claim history; trajectories are then advanced year by year,
vectorized across policyholders, under BOTH the raw history rule and the
augmented chain. The two level paths must coincide at every step; any
mismatch is a hard internal error.

The raw rule honors the phase-in of the penalty over the first pen years
exactly, which is irrelevant after burn-in but keeps short traces faithful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .effects import BivariateEffect, LognormalEffect
from .errors import ConfigurationError, ConsistencyError
from .portfolio import Portfolio
from .relativity import MODEL_FREQUENCY, MODEL_FREQUENCY_SEVERITY
from .states import BmsRule, StateSpace, build_state_space

_CHUNK = 20_000


@dataclass(frozen=True)
class SimConfig:
    rule: BmsRule
    portfolio: Portfolio
    effect: LognormalEffect | BivariateEffect
    policyholders: int = 100_000
    burn_in: int = 500
    measure_years: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.policyholders < 1:
            raise ConfigurationError(f"policyholders must be >= 1, got {self.policyholders}")
        if self.burn_in < 1:
            raise ConfigurationError(f"burn_in must be >= 1, got {self.burn_in}")
        if self.measure_years < 1:
            raise ConfigurationError(f"measure_years must be >= 1, got {self.measure_years}")

    @property
    def model(self) -> str:
        return (MODEL_FREQUENCY_SEVERITY if isinstance(self.effect, BivariateEffect)
                else MODEL_FREQUENCY)


@dataclass(frozen=True)
class SimReport:
    """Empirical stationary occupancy plus the measured sample itself.

    The per-observation sample (class index, effect draws, occupied level)
    is retained so HMSE can be estimated afterwards for any relativity
    vector without re-simulating.
    """

    config: SimConfig
    space: StateSpace
    state_probs: np.ndarray      # empirical P(L* = (l)_a)
    level_probs: np.ndarray      # empirical P(L = l)
    level_se: np.ndarray         # binomial standard error per level cell
    sample_class: np.ndarray = field(repr=False)
    sample_theta1: np.ndarray = field(repr=False)
    sample_theta2: np.ndarray = field(repr=False)
    sample_level: np.ndarray = field(repr=False)

    @property
    def observations(self) -> int:
        return len(self.sample_level)

    def hmse(self, relativities) -> tuple[float, float]:
        """Empirical HMSE for a relativity vector, with its standard error."""
        zeta = np.asarray(relativities, dtype=float)
        if zeta.shape != (self.config.rule.z + 1,):
            raise ConfigurationError(
                f"relativity vector must have length z+1={self.config.rule.z + 1}, "
                f"got shape {zeta.shape}")
        lam1 = self.config.portfolio.lambda1[self.sample_class]
        applied = zeta[self.sample_level]
        if self.config.model == MODEL_FREQUENCY:
            err = (lam1 * self.sample_theta1 - lam1 * applied) ** 2
        else:
            lam2 = self.config.portfolio.lambda2[self.sample_class]
            base = lam1 * lam2
            err = (base * self.sample_theta1 * self.sample_theta2 - base * applied) ** 2
        mean = float(err.mean())
        se = float(err.std(ddof=1) / math.sqrt(len(err))) if len(err) > 1 else 0.0
        return mean, se


def _draw_policyholders(cfg: SimConfig, start: int, count: int, years: int):
    """Per-policyholder streams: class, effect pair, and claim history."""
    cum = np.cumsum(cfg.portfolio.weights)
    bivariate = isinstance(cfg.effect, BivariateEffect)
    if bivariate:
        s1 = math.sqrt(cfg.effect.sigma1_2)
        s2 = math.sqrt(cfg.effect.sigma2_2)
        rho = cfg.effect.rho
    else:
        s1 = cfg.effect.sigma
    klass = np.empty(count, dtype=np.int64)
    theta1 = np.empty(count)
    theta2 = np.ones(count)
    claims = np.empty((count, years), dtype=np.int64)
    lam1 = cfg.portfolio.lambda1
    for i in range(count):
        rng = np.random.Generator(np.random.Philox(key=np.array(
            [cfg.seed & 0xFFFFFFFFFFFFFFFF, start + i], dtype=np.uint64)))
        k = min(int(np.searchsorted(cum, rng.random(), side="right")), len(cum) - 1)
        z1 = rng.standard_normal()
        theta1[i] = math.exp(s1 * z1 - 0.5 * s1 * s1)
        if bivariate:
            z2 = rng.standard_normal()
            mix = rho * z1 + math.sqrt(1.0 - rho * rho) * z2
            theta2[i] = math.exp(s2 * mix - 0.5 * s2 * s2)
        klass[i] = k
        claims[i] = rng.poisson(lam1[k] * theta1[i], years)
    return klass, theta1, theta2, claims


def simulate(cfg: SimConfig) -> SimReport:
    """Simulate stationary occupancy under the raw rule with cross-checking.

    Levels are recorded for the measure_years after burn_in. With the
    default single measurement year all observations are independent, so
    the reported binomial standard errors are exact.
    """
    rule = cfg.rule
    space = build_state_space(rule)
    years = cfg.burn_in + cfg.measure_years
    pen_threshold = np.array(
        [min(rule.pen, t - 1) + 1 for t in range(years + 1)], dtype=np.int64)

    # (level, counter) -> state index lookup table for occupancy counting
    index_table = np.full((rule.z + 1, rule.pen + 1), -1, dtype=np.int64)
    for i, s in enumerate(space.states):
        index_table[s.level, s.counter] = i

    state_counts = np.zeros(len(space), dtype=np.int64)
    total = cfg.policyholders * cfg.measure_years
    sample_class = np.empty(total, dtype=np.int64)
    sample_theta1 = np.empty(total)
    sample_theta2 = np.empty(total)
    sample_level = np.empty(total, dtype=np.int64)
    out = 0

    for start in range(0, cfg.policyholders, _CHUNK):
        count = min(_CHUNK, cfg.policyholders - start)
        klass, theta1, theta2, claims = _draw_policyholders(cfg, start, count, years)

        level_raw = np.full(count, rule.l0, dtype=np.int64)
        run = np.zeros(count, dtype=np.int64)       # consecutive claim-free years
        level_aug = np.full(count, rule.l0, dtype=np.int64)
        counter = np.zeros(count, dtype=np.int64)

        for t in range(1, years + 1):
            n = claims[:, t - 1]
            claim_free = n == 0

            run = np.where(claim_free, run + 1, 0)
            reward_raw = claim_free & (run >= pen_threshold[t])
            jumped = np.minimum(level_raw + rule.h * n, rule.z)
            level_raw = np.where(~claim_free, jumped,
                                 np.where(reward_raw, np.maximum(level_raw - 1, 0),
                                          level_raw))

            reward_aug = claim_free & (counter == 0)
            jumped_aug = np.minimum(level_aug + rule.h * n, rule.z)
            new_level = np.where(~claim_free, jumped_aug,
                                 np.where(reward_aug, np.maximum(level_aug - 1, 0),
                                          level_aug))
            counter = np.where(~claim_free,
                               np.where(jumped_aug >= rule.h, rule.pen, 0),
                               np.where(reward_aug, 0, counter - 1))
            level_aug = new_level

            if not np.array_equal(level_raw, level_aug):
                bad = int(np.flatnonzero(level_raw != level_aug)[0])
                raise ConsistencyError(
                    f"raw and augmented level paths diverged at year {t} for "
                    f"policyholder {start + bad}: raw={int(level_raw[bad])}, "
                    f"augmented={int(level_aug[bad])}")

            if t > cfg.burn_in:
                np.add.at(state_counts, index_table[level_aug, counter], 1)
                sl = slice(out, out + count)
                sample_class[sl] = klass
                sample_theta1[sl] = theta1
                sample_theta2[sl] = theta2
                sample_level[sl] = level_aug
                out += count

    state_probs = state_counts / total
    levels = np.array(space.levels)
    level_probs = np.bincount(levels, weights=state_probs, minlength=rule.z + 1)
    level_se = np.sqrt(level_probs * (1.0 - level_probs) / total)
    return SimReport(config=cfg, space=space, state_probs=state_probs,
                     level_probs=level_probs, level_se=level_se,
                     sample_class=sample_class, sample_theta1=sample_theta1,
                     sample_theta2=sample_theta2, sample_level=sample_level)


def empirical_hmse(cfg: SimConfig, relativities) -> tuple[float, float]:
    """Simulate under cfg and estimate the HMSE of a relativity vector."""
    return simulate(cfg).hmse(relativities)
