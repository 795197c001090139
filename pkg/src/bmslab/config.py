"""Config documents: parsing and full validation before any computation.

Schema (JSON):

    {
      "rule":      {"z": 9, "h": 1, "pen": 0, "l0": 0},
      "model":     {"type": "frequency", "sigma2": 0.99}
                   | {"type": "frequency_severity",
                      "sigma1_2": 0.99, "sigma2_2": 0.29, "rho": -0.45},
      "portfolio": {"classes": [{"label": "...", "lambda1": 0.05,
                                 "lambda2": 2981.0, "weight": 1.0}, ...]}
                   | {"glm": {"frequency": {...}, "severity": {...},
                              "severity_shape": 0.67,
                              "margins": {"entity": {...}, "coverage": {...}},
                              "baselines": ["...", "..."]}},
      "numerics":  {"quadrature_nodes": 64}
    }

Every validation error names the offending key.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .effects import BivariateEffect, LognormalEffect
from .errors import ConfigurationError
from .portfolio import (GlmCoefficients, Portfolio, RiskClass, build_portfolio,
                        portfolio_from_glm)
from .states import BmsRule

DEFAULT_NODES = 64


@dataclass(frozen=True)
class RunConfig:
    rule: BmsRule
    model: str
    effect: LognormalEffect | BivariateEffect
    portfolio: Portfolio
    nodes: int = DEFAULT_NODES


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigurationError(f"missing key {where}.{key}")
    return section[key]


def _number(section: dict, key: str, where: str) -> float:
    value = _require(section, key, where)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{where}.{key} must be a number, got {value!r}")
    return float(value)


def _integer(section: dict, key: str, where: str, default=None) -> int:
    if key not in section and default is not None:
        return default
    value = _require(section, key, where)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{where}.{key} must be an integer, got {value!r}")
    return value


def _section(doc: dict, key: str) -> dict:
    value = _require(doc, key, "config")
    if not isinstance(value, dict):
        raise ConfigurationError(f"config.{key} must be an object")
    return value


def parse_rule(section: dict) -> BmsRule:
    return BmsRule(z=_integer(section, "z", "rule"),
                   h=_integer(section, "h", "rule"),
                   pen=_integer(section, "pen", "rule", default=0),
                   l0=_integer(section, "l0", "rule", default=0))


def parse_model(section: dict):
    kind = _require(section, "type", "model")
    if kind == "frequency":
        return kind, LognormalEffect(_number(section, "sigma2", "model"))
    if kind == "frequency_severity":
        return kind, BivariateEffect(_number(section, "sigma1_2", "model"),
                                     _number(section, "sigma2_2", "model"),
                                     _number(section, "rho", "model"))
    raise ConfigurationError(
        f"model.type must be 'frequency' or 'frequency_severity', got {kind!r}")


def parse_portfolio(section: dict) -> Portfolio:
    if "classes" in section:
        entries = section["classes"]
        if not isinstance(entries, list) or not entries:
            raise ConfigurationError("portfolio.classes must be a non-empty list")
        classes = []
        for i, entry in enumerate(entries):
            where = f"portfolio.classes[{i}]"
            if not isinstance(entry, dict):
                raise ConfigurationError(f"{where} must be an object")
            classes.append(RiskClass(
                label=str(entry.get("label", f"class{i}")),
                lambda1=_number(entry, "lambda1", where),
                lambda2=(_number(entry, "lambda2", where)
                         if "lambda2" in entry else 1.0),
                weight=_number(entry, "weight", where) if "weight" in entry else 1.0))
        return build_portfolio(classes)
    if "glm" in section:
        g = section["glm"]
        if not isinstance(g, dict):
            raise ConfigurationError("portfolio.glm must be an object")
        coeffs = GlmCoefficients(
            frequency=_require(g, "frequency", "portfolio.glm"),
            severity=g.get("severity"),
            severity_shape=g.get("severity_shape"),
            margins=_require(g, "margins", "portfolio.glm"),
            baselines=tuple(_require(g, "baselines", "portfolio.glm")))
        return portfolio_from_glm(coeffs)
    raise ConfigurationError("portfolio needs either 'classes' or 'glm'")


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("config document must be a JSON object")
    rule = parse_rule(_section(doc, "rule"))
    model, effect = parse_model(_section(doc, "model"))
    portfolio = parse_portfolio(_section(doc, "portfolio"))
    numerics = doc.get("numerics", {})
    if not isinstance(numerics, dict):
        raise ConfigurationError("config.numerics must be an object")
    nodes = _integer(numerics, "quadrature_nodes", "numerics", default=DEFAULT_NODES)
    if not 2 <= nodes <= 256:
        raise ConfigurationError(
            f"numerics.quadrature_nodes must be in [2, 256], got {nodes}")
    return RunConfig(rule=rule, model=model, effect=effect,
                     portfolio=portfolio, nodes=nodes)


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {p} is not valid JSON: {exc}") from exc
    return parse_config(doc)
