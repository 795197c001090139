"""Augmented bonus-malus state spaces and transition rules.

A ``-1/+h/pen`` system has levels 0..z. Each reported claim pushes the
level up by h, while a decrease of one level requires 1 + pen consecutive
claim-free years. New policyholders start with no penalty banked, so their
first claim-free years reward like the classical -1/+h system.

The level history alone is not Markovian once pen > 0. Augmenting each
level l >= h into states (l)_0 .. (l)_pen, where the counter is the number
of additional claim-free years still owed before a decrease, restores the
Markov property. Levels below h are only ever entered through rewards and
carry no counter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import ConfigurationError


class AugmentedState(NamedTuple):
    """A BM level together with the outstanding claim-free-year counter."""

    level: int
    counter: int

    def label(self) -> str:
        return f"({self.level})_{self.counter}"


@dataclass(frozen=True)
class BmsRule:
    """Parameters of a -1/+h/pen system.

    z:   highest BM level; levels run 0..z.
    h:   levels added per reported claim (1 <= h <= z).
    pen: extra consecutive claim-free years required before a decrease.
    l0:  entry level for a new policyholder.
    """

    z: int
    h: int
    pen: int = 0
    l0: int = 0

    def __post_init__(self) -> None:
        for name in ("z", "h", "pen", "l0"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigurationError(f"rule.{name} must be an integer, got {value!r}")
        if self.z < 1:
            raise ConfigurationError(f"rule.z must be >= 1, got {self.z}")
        if not 1 <= self.h <= self.z:
            raise ConfigurationError(f"rule.h must be in [1, z={self.z}], got {self.h}")
        if self.pen < 0:
            raise ConfigurationError(f"rule.pen must be >= 0, got {self.pen}")
        if not 0 <= self.l0 <= self.z:
            raise ConfigurationError(f"rule.l0 must be in [0, z={self.z}], got {self.l0}")

    @property
    def state_count(self) -> int:
        """Size of the augmented state space: h + (z - h + 1) * (pen + 1)."""
        return self.h + (self.z - self.h + 1) * (self.pen + 1)

    def system_label(self) -> str:
        return f"-1/+{self.h}/{self.pen}"


@dataclass(frozen=True)
class StateSpace:
    """Ordered augmented state space (ascending level, then counter).

    The ordering is fixed once here; every matrix and vector in the package
    is indexed by it, so indices are reproducible across runs.
    """

    rule: BmsRule
    states: tuple[AugmentedState, ...]
    _index: dict[AugmentedState, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.states)

    def index_of(self, state: AugmentedState) -> int:
        try:
            return self._index[state]
        except KeyError:
            raise ConfigurationError(f"state {state.label()} is not in the space "
                                     f"for rule {self.rule.system_label()}") from None

    def __contains__(self, state: AugmentedState) -> bool:
        return state in self._index

    @property
    def levels(self) -> tuple[int, ...]:
        """Level of each state, in state order."""
        return tuple(s.level for s in self.states)

    def states_at_level(self, level: int) -> tuple[AugmentedState, ...]:
        return tuple(s for s in self.states if s.level == level)


def build_state_space(rule: BmsRule) -> StateSpace:
    """Enumerate the augmented states of a -1/+h/pen system.

    Levels 0..h-1 appear once with counter 0; levels h..z are augmented
    with counters 0..pen. The total is h + (z - h + 1) * (pen + 1).
    """
    states: list[AugmentedState] = []
    for level in range(rule.z + 1):
        top = 0 if level < rule.h else rule.pen
        for counter in range(top + 1):
            states.append(AugmentedState(level, counter))
    index = {s: i for i, s in enumerate(states)}
    return StateSpace(rule=rule, states=tuple(states), _index=index)


def penalty_at(t: int, pen: int) -> int:
    """Effective penalty period at time t: min(pen, t).

    A new policyholder carries no penalty, so the requirement phases in
    over the first pen years.
    """
    if t < 0:
        raise ConfigurationError(f"time index must be >= 0, got {t}")
    if pen < 0:
        raise ConfigurationError(f"pen must be >= 0, got {pen}")
    return min(pen, t)


def step_augmented(state: AugmentedState, n_claims: int, rule: BmsRule) -> AugmentedState:
    """One transition of the augmented chain given the year's claim count.

    No claim and no counter: reward, drop one level. No claim with a
    positive counter: burn one counter year. Any claim: jump up h per claim
    (capped at z) and reset the counter to pen.
    """
    if n_claims < 0:
        raise ConfigurationError(f"claim count must be >= 0, got {n_claims}")
    level, counter = state
    if n_claims == 0:
        if counter == 0:
            return AugmentedState(max(level - 1, 0), 0)
        return AugmentedState(level, counter - 1)
    new_level = min(level + rule.h * n_claims, rule.z)
    # A claim always lands at level >= h, so the clamp below is defensive
    # only; it keeps the result inside the state space for any input.
    return AugmentedState(new_level, rule.pen if new_level >= rule.h else 0)


@dataclass(frozen=True)
class TracePath:
    """A deterministic trajectory replay under both rule formulations."""

    levels: tuple[int, ...]                 # raw-rule level at each time
    penalties: tuple[int, ...]              # effective penalty at each time
    augmented: tuple[AugmentedState, ...]   # augmented state at each time

    def __len__(self) -> int:
        return len(self.levels)


def replay_raw(claims: Sequence[int], rule: BmsRule) -> TracePath:
    """Replay a claim history under the raw (history-based) rule.

    The raw rule rewards a decrease at time t only when the last
    1 + min(pen, t - 1) policy years were all claim-free. The parallel
    augmented path is computed alongside so callers can cross-check that
    its level projection matches the raw path.
    """
    levels = [rule.l0]
    aug = [AugmentedState(rule.l0, 0)]
    claim_free_run = 0
    for t, n in enumerate(claims, start=1):
        if n < 0:
            raise ConfigurationError(f"claim count at year {t} must be >= 0, got {n}")
        prev = levels[-1]
        if n > 0:
            claim_free_run = 0
            levels.append(min(prev + rule.h * n, rule.z))
        else:
            claim_free_run += 1
            required = penalty_at(t - 1, rule.pen) + 1
            levels.append(max(prev - 1, 0) if claim_free_run >= required else prev)
        aug.append(step_augmented(aug[-1], n, rule))
    penalties = tuple(penalty_at(t, rule.pen) for t in range(len(levels)))
    return TracePath(tuple(levels), penalties, tuple(aug))
