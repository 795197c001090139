"""Transition matrices over augmented BM states and their stationary laws.

State spaces here are small (well under 200 states), so the stationary
distribution is found by a dense linear solve: one balance equation is
replaced by the normalization row and the system is LU-factorized. Power
iteration is kept as an independent oracle and as a convergence diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegeneracyError, NumericError
from .states import AugmentedState, BmsRule, StateSpace, build_state_space, step_augmented

ROW_SUM_TOL = 1e-12
STATIONARY_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ClaimCountDistribution:
    """Per-period claim count law with a given conditional mean.

    Poisson is the supported family. The dispersion field is carried for
    interface compatibility with other count families but is inert for
    Poisson.
    """

    mean: float
    family: str = "poisson"
    dispersion: float = 1.0

    def __post_init__(self) -> None:
        if self.family != "poisson":
            raise ConfigurationError(f"unsupported claim count family {self.family!r}")
        if not (math.isfinite(self.mean) and self.mean > 0):
            raise ConfigurationError(f"claim count mean must be finite and > 0, got {self.mean}")

    @property
    def p0(self) -> float:
        """Probability of a claim-free year."""
        return math.exp(-self.mean)

    def pmf_head(self, count: int) -> np.ndarray:
        """Probabilities of 0 .. count-1 claims; callers pool the tail mass.

        Computed by the stable upward recurrence p_{n+1} = p_n * mean / (n+1).
        """
        p = np.zeros(count)
        p[0] = math.exp(-self.mean)
        for n in range(1, count):
            p[n] = p[n - 1] * (self.mean / n)
        if not np.all(np.isfinite(p)):
            raise NumericError(f"claim count pmf is non-finite at mean={self.mean}")
        return p


def claims_to_top(level: int, rule: BmsRule) -> int:
    """Smallest positive claim count that lands level at z."""
    return max(1, -(-(rule.z - level) // rule.h))


def build_matrix(rule: BmsRule, dist: ClaimCountDistribution,
                 space: StateSpace | None = None) -> np.ndarray:
    """Row-stochastic transition matrix over the augmented state space.

    Claim counts large enough to reach the top level are pooled
    analytically: the (z)_pen column receives 1 minus the partial pmf sum,
    so rows remain stochastic without truncating the count distribution.
    """
    if space is None:
        space = build_state_space(rule)
    elif space.rule != rule:
        raise ConfigurationError("state space was built for a different rule")
    size = len(space)
    top = space.index_of(AugmentedState(rule.z, rule.pen))
    P = np.zeros((size, size))
    for i, s in enumerate(space.states):
        n_top = claims_to_top(s.level, rule)
        p = dist.pmf_head(n_top)
        P[i, space.index_of(step_augmented(s, 0, rule))] += p[0]
        for n in range(1, n_top):
            P[i, space.index_of(step_augmented(s, n, rule))] += p[n]
        P[i, top] += max(0.0, 1.0 - p.sum())
    return P


def build_classical_matrix(z: int, h: int, dist: ClaimCountDistribution) -> np.ndarray:
    """Transition matrix of the classical -1/+h chain on levels 0..z.

    Deliberately independent of the augmented machinery: it is the oracle
    for the pen=0 special case.
    """
    if not 1 <= h <= z:
        raise ConfigurationError(f"need 1 <= h <= z, got h={h}, z={z}")
    P = np.zeros((z + 1, z + 1))
    for level in range(z + 1):
        n_top = max(1, -(-(z - level) // h))
        p = dist.pmf_head(n_top)
        P[level, max(level - 1, 0)] += p[0]
        for n in range(1, n_top):
            P[level, level + h * n] += p[n]
        P[level, z] += max(0.0, 1.0 - p.sum())
    return P


def check_row_stochastic(P: np.ndarray, tol: float = ROW_SUM_TOL) -> None:
    sums = P.sum(axis=1)
    worst = float(np.max(np.abs(sums - 1.0)))
    if worst > tol:
        raise NumericError(f"matrix is not row-stochastic: max row-sum error {worst:.3e}")


def stationary(P: np.ndarray, context: str = "") -> np.ndarray:
    """Unique stationary vector of a row-stochastic matrix.

    Solves pi = pi P with the last balance equation replaced by the
    normalization constraint. Raises DegeneracyError when the system is
    singular or the fixed-point residual exceeds tolerance (e.g. for
    chains with more than one recurrent class).
    """
    suffix = f" [{context}]" if context else ""
    size = P.shape[0]
    A = P.T - np.eye(size)
    A[-1, :] = 1.0
    b = np.zeros(size)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError(f"stationary solve is singular{suffix}") from exc
    if not np.all(np.isfinite(pi)):
        raise DegeneracyError(f"stationary solve produced non-finite values{suffix}")
    residual = float(np.max(np.abs(pi - pi @ P)))
    if residual > STATIONARY_RESIDUAL_TOL:
        raise DegeneracyError(
            f"stationary fixed-point residual {residual:.3e} exceeds "
            f"{STATIONARY_RESIDUAL_TOL:.0e}{suffix}")
    if float(pi.min()) < -1e-12:
        raise DegeneracyError(f"stationary solve produced negative mass {pi.min():.3e}{suffix}")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def power_iteration(P: np.ndarray, max_steps: int = 2_000_000,
                    tol: float = 1e-16) -> tuple[np.ndarray, int]:
    """Stationary vector by repeated multiplication, with the step count.

    Slow but independent of the linear solve; used as a test oracle and as
    a mixing-speed diagnostic. Returns (vector, steps taken).
    """
    size = P.shape[0]
    pi = np.full(size, 1.0 / size)
    for step in range(1, max_steps + 1):
        nxt = pi @ P
        delta = float(np.max(np.abs(nxt - pi)))
        pi = nxt
        if delta < tol:
            return pi / pi.sum(), step
    return pi / pi.sum(), max_steps


def matrix_csv(P: np.ndarray, space: StateSpace) -> str:
    """Debug dump: row-major CSV with state labels in the header."""
    labels = [s.label() for s in space.states]
    lines = ["state," + ",".join(labels)]
    for label, row in zip(labels, P):
        lines.append(label + "," + ",".join(format(v, ".17g") for v in row))
    return "\n".join(lines) + "\n"
