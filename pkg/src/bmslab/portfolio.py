"""Risk classes, GLM-derived a-priori means, and portfolio weights."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError

log = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class RiskClass:
    """One rating cell: a-priori frequency/severity means and its weight.

    lambda2 defaults to 1 and is ignored by the frequency-only model.
    """

    label: str
    lambda1: float
    lambda2: float = 1.0
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lambda1) and self.lambda1 > 0):
            raise ConfigurationError(
                f"class {self.label!r}: lambda1 must be finite and > 0, got {self.lambda1}")
        if not (math.isfinite(self.lambda2) and self.lambda2 > 0):
            raise ConfigurationError(
                f"class {self.label!r}: lambda2 must be finite and > 0, got {self.lambda2}")
        if not (math.isfinite(self.weight) and self.weight >= 0):
            raise ConfigurationError(
                f"class {self.label!r}: weight must be finite and >= 0, got {self.weight}")


@dataclass(frozen=True)
class Portfolio:
    """A finite mixture of risk classes with weights summing to 1."""

    classes: tuple[RiskClass, ...]
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.classes:
            raise ConfigurationError("portfolio must contain at least one class")
        total = sum(c.weight for c in self.classes)
        if not (math.isfinite(total) and total > 0):
            raise ConfigurationError(f"portfolio weights sum to {total}; nothing to normalize")
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            normalized = tuple(
                RiskClass(c.label, c.lambda1, c.lambda2, c.weight / total)
                for c in self.classes)
            object.__setattr__(self, "classes", normalized)

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.classes])

    @property
    def lambda1(self) -> np.ndarray:
        return np.array([c.lambda1 for c in self.classes])

    @property
    def lambda2(self) -> np.ndarray:
        return np.array([c.lambda2 for c in self.classes])


def class_mean(coefficients: Mapping[str, float], active: Sequence[str]) -> float:
    """A-priori mean under the log link: exp(intercept + sum of indicators).

    `active` names the non-baseline indicator levels of the class; each must
    have a coefficient. The intercept is always included.
    """
    if "intercept" not in coefficients:
        raise ConfigurationError("coefficient set is missing 'intercept'")
    total = float(coefficients["intercept"])
    for name in active:
        if name not in coefficients:
            raise ConfigurationError(f"no coefficient named {name!r}")
        total += float(coefficients[name])
    return math.exp(total)


def build_portfolio(classes: Sequence[RiskClass]) -> Portfolio:
    """Portfolio from explicit classes; weights are renormalized to sum 1."""
    return Portfolio(classes=tuple(classes))


@dataclass(frozen=True)
class GlmCoefficients:
    """Log-link coefficient sets plus categorical margins for a rating grid.

    frequency/severity map coefficient names (including 'intercept') to
    values; margins map each categorical's level names to population
    proportions. Baseline levels (no coefficient) are listed explicitly so
    that a misspelled level cannot silently resolve to the baseline.
    severity_shape (the Gamma shape 1/psi) is parsed and carried but plays
    no role in relativities or HMSE.
    """

    frequency: Mapping[str, float]
    margins: Mapping[str, Mapping[str, float]]
    baselines: tuple[str, ...]
    severity: Mapping[str, float] | None = None
    severity_shape: float | None = None

    def __post_init__(self) -> None:
        if "intercept" not in self.frequency:
            raise ConfigurationError("glm.frequency is missing 'intercept'")
        if self.severity is not None and "intercept" not in self.severity:
            raise ConfigurationError("glm.severity is missing 'intercept'")
        for cat, levels in self.margins.items():
            if not levels:
                raise ConfigurationError(f"glm.margins.{cat} is empty")
            total = sum(levels.values())
            if abs(total - 1.0) > 0.02:
                raise ConfigurationError(
                    f"glm.margins.{cat} proportions sum to {total:.4f}, expected ~1")


def portfolio_from_glm(glm: GlmCoefficients) -> Portfolio:
    """Rating-grid portfolio with product-of-marginals joint weights.

    Only marginal proportions are available, so joint cell weights are
    approximated by the product of the marginals and renormalized. This
    ignores any association between the categoricals; a note is recorded on
    the portfolio and a warning logged.
    """
    categoricals = list(glm.margins.items())
    cells: list[tuple[tuple[str, ...], float]] = [((), 1.0)]
    for _, levels in categoricals:
        cells = [(combo + (name,), w * p)
                 for combo, w in cells
                 for name, p in levels.items()]
    classes = []
    for combo, weight in cells:
        active = [name for name in combo if name not in glm.baselines]
        lam1 = class_mean(glm.frequency, active)
        lam2 = class_mean(glm.severity, active) if glm.severity is not None else 1.0
        classes.append(RiskClass(label="*".join(combo), lambda1=lam1,
                                 lambda2=lam2, weight=weight))
    note = ("joint class weights approximated by the product of marginal "
            "proportions; any association between rating factors is ignored")
    log.warning(note)
    return Portfolio(classes=tuple(classes), notes=(note,))
