"""Embedded reference tables and the machinery to diff against them.

Each table file carries the generating configuration (rule, model,
portfolio), the published per-level relativities and level probabilities
for pen = 0..3, the HMSE row, and the tolerances the diff is judged at.
Tables 7a-8b are built on marginal class proportions only, so their cells
are informational and the judgement is a set of qualitative shape checks
instead (see `qualitative_checks`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .effects import BivariateEffect, LognormalEffect
from .errors import ConfigurationError
from .portfolio import GlmCoefficients, Portfolio, RiskClass, build_portfolio, portfolio_from_glm
from .states import BmsRule

TABLE_IDS = ("1a", "1b", "1c", "2a", "2b", "2c", "7a", "7b", "8a", "8b")


def _load(name: str) -> dict:
    path = resources.files("bmslab.golden").joinpath(name)
    return json.loads(path.read_text())


@dataclass(frozen=True)
class GoldenTable:
    """One reference table: generating config plus published values."""

    id: str
    rule_base: dict
    model: dict
    portfolio_spec: dict
    pens: tuple[int, ...]
    levels: tuple[int, ...]          # descending, z..0
    zeta: dict[int, tuple[float, ...]]
    prob: dict[int, tuple[float, ...]]
    hmse: dict[int, float]
    tolerances: dict

    @property
    def qualitative(self) -> bool:
        return bool(self.tolerances.get("qualitative"))

    def rule(self, pen: int) -> BmsRule:
        return BmsRule(z=self.rule_base["z"], h=self.rule_base["h"],
                       pen=pen, l0=self.rule_base.get("l0", 0))

    def effect(self):
        if self.model["type"] == "frequency":
            return LognormalEffect(self.model["sigma2"])
        return BivariateEffect(self.model["sigma1_2"], self.model["sigma2_2"],
                               self.model["rho"])

    def build_portfolio(self) -> Portfolio:
        if "classes" in self.portfolio_spec:
            return build_portfolio([
                RiskClass(label=c.get("label", f"class{i}"), lambda1=c["lambda1"],
                          lambda2=c.get("lambda2", 1.0), weight=c.get("weight", 1.0))
                for i, c in enumerate(self.portfolio_spec["classes"])])
        g = self.portfolio_spec["glm"]
        coeffs = GlmCoefficients(frequency=g["frequency"],
                                 severity=g.get("severity"),
                                 severity_shape=g.get("severity_shape"),
                                 margins=g["margins"],
                                 baselines=tuple(g["baselines"]))
        return portfolio_from_glm(coeffs)


def load_table(table_id: str) -> GoldenTable:
    if table_id not in TABLE_IDS:
        raise ConfigurationError(
            f"unknown table id {table_id!r}; expected one of {', '.join(TABLE_IDS)}")
    doc = _load(f"table_{table_id}.json")
    return GoldenTable(
        id=doc["id"], rule_base=doc["rule"], model=doc["model"],
        portfolio_spec=doc["portfolio"], pens=tuple(doc["pens"]),
        levels=tuple(doc["levels"]),
        zeta={int(p): tuple(v) for p, v in doc["zeta"].items()},
        prob={int(p): tuple(v) for p, v in doc["prob"].items()},
        hmse={int(p): float(v) for p, v in doc["hmse"].items()},
        tolerances=doc["tolerances"])


def load_trace() -> dict:
    return _load("example1_trace.json")


def load_matrix_pattern() -> dict:
    return _load("example2_pattern.json")


def cell_ok(computed: float, reference: float, tolerances: dict) -> bool:
    """Published-cell rule: absolute for small values, relative above 1."""
    abs_tol = tolerances.get("cell_abs", 0.0015)
    rel_tol = tolerances.get("cell_rel_above_1", 0.002)
    if abs(computed - reference) <= abs_tol:
        return True
    return reference > 1.0 and abs(computed - reference) / reference <= rel_tol


def hmse_ok(computed: float, reference: float, tolerances: dict) -> bool:
    if "hmse_abs" in tolerances:
        return abs(computed - reference) <= tolerances["hmse_abs"]
    if "hmse_rel" in tolerances:
        return abs(computed - reference) / reference <= tolerances["hmse_rel"]
    raise ConfigurationError("table has no HMSE tolerance")


def qualitative_checks(tables: dict[int, "object"], model: str) -> list[tuple[str, bool]]:
    """Shape checks applied to computed tables keyed by pen.

    Expects objects with `relativities` and `level_probs` arrays. Checks:
    per-level relativities non-increasing in pen; top-level mass
    non-decreasing and level-0 mass non-increasing in pen; and for the
    frequency-severity model all relativities below 1.
    """
    pens = sorted(tables)
    z = len(tables[pens[0]].relativities) - 1
    results: list[tuple[str, bool]] = []
    mono = all(
        tables[hi].relativities[lv] <= tables[lo].relativities[lv] + 1e-12
        for lo, hi in zip(pens, pens[1:]) for lv in range(z + 1))
    results.append(("relativity non-increasing in pen at every level", mono))
    top = all(tables[hi].level_probs[z] >= tables[lo].level_probs[z] - 1e-12
              for lo, hi in zip(pens, pens[1:]))
    bottom = all(tables[hi].level_probs[0] <= tables[lo].level_probs[0] + 1e-12
                 for lo, hi in zip(pens, pens[1:]))
    results.append(("top-level mass non-decreasing in pen", top))
    results.append(("level-0 mass non-increasing in pen", bottom))
    if model == "frequency_severity":
        below = all(float(np.nanmax(tables[p].relativities)) < 1.0 for p in pens)
        results.append(("all relativities below 1", below))
    return results


def spread(relativities) -> float:
    finite = [z for z in relativities if math.isfinite(z)]
    return max(finite) - min(finite)
