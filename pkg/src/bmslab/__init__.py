"""Bonus-malus systems with long-memory (-1/+h/pen) transition rules.

Construction of augmented state spaces, stationary analysis of the level
chain mixed over random effects, optimal per-level relativities under a
frequency-only and a frequency-severity model, HMSE evaluation, and a
seeded Monte-Carlo oracle for cross-checking all of it.
"""

from .config import RunConfig, load_config, parse_config
from .effects import (BivariateEffect, LognormalEffect, QuadratureGrid,
                      conditional_severity_mean, conditional_severity_moment,
                      lognormal_grid, sample_effects, tensor_grid)
from .errors import (AccuracyError, BmsError, ConfigurationError, ConsistencyError,
                     DegeneracyError, NumericError)
from .markov import (ClaimCountDistribution, build_classical_matrix, build_matrix,
                     matrix_csv, power_iteration, stationary)
from .portfolio import (GlmCoefficients, Portfolio, RiskClass, build_portfolio,
                        class_mean, portfolio_from_glm)
from .relativity import (MixedStationary, MixtureMoments, RelativityTable,
                         classical_relativities_model1, classical_relativities_model2,
                         compute_mixture, hmse, mixed_stationary,
                         optimal_relativities, optimal_relativities_model1,
                         optimal_relativities_model2)
from .simulate import SimConfig, SimReport, empirical_hmse, simulate
from .states import (AugmentedState, BmsRule, StateSpace, TracePath,
                     build_state_space, penalty_at, replay_raw, step_augmented)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "AugmentedState", "BivariateEffect", "BmsError", "BmsRule",
    "ClaimCountDistribution", "ConfigurationError", "ConsistencyError",
    "DegeneracyError", "GlmCoefficients", "LognormalEffect", "MixedStationary",
    "MixtureMoments", "NumericError", "Portfolio", "QuadratureGrid",
    "RelativityTable", "RiskClass", "RunConfig", "SimConfig", "SimReport",
    "StateSpace", "TracePath", "build_classical_matrix", "build_matrix",
    "build_portfolio", "build_state_space", "class_mean",
    "classical_relativities_model1", "classical_relativities_model2",
    "compute_mixture", "conditional_severity_mean", "conditional_severity_moment",
    "empirical_hmse", "hmse", "load_config", "lognormal_grid", "matrix_csv",
    "mixed_stationary", "optimal_relativities", "optimal_relativities_model1",
    "optimal_relativities_model2", "parse_config", "penalty_at",
    "portfolio_from_glm", "power_iteration", "replay_raw", "sample_effects",
    "simulate", "stationary", "step_augmented", "tensor_grid",
]
