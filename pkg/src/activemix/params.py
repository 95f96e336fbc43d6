"""Simulation parameters and shared constants.

The box spans ``[-box_half, box_half)`` on both axes with periodic
boundaries. Activated particles interact through truncated springs whose
coefficient is nonzero only for pair distances strictly inside
``(cutoff_inner, cutoff_outer)``; ``cutoff_outer`` doubles as the rest
length of the repulsive spring (the attractive rest length is 0).
"""

from __future__ import annotations

from dataclasses import dataclass

# Per-particle activation states. The same codes are used for action-grid
# cells, where 0 means "no activation area".
INACTIVE = 0
ATTRACTIVE = 1
REPULSIVE = 2

# Immutable half-box tags used only for measuring mixedness.
TAG_LEFT = 0
TAG_RIGHT = 1

ATTRACTIVE_ONLY = "attractive-only"
REPULSIVE_ONLY = "repulsive-only"
BOTH = "both"
INTERACTION_SETS = (ATTRACTIVE_ONLY, REPULSIVE_ONLY, BOTH)


class ConfigError(ValueError):
    """Invalid parameter or run configuration."""


class InvalidActionError(ValueError):
    """Action grid malformed or outside the configured interaction set."""


class InvalidPolicyError(ValueError):
    """Policy emits cell types the interaction set does not allow."""


class EpisodeFinishedError(RuntimeError):
    """step() called after the episode reached its final step."""


class EigensolverError(RuntimeError):
    """Symmetric eigensolver failed to converge."""


@dataclass(frozen=True)
class SimParams:
    """Physical and episode constants.

    dt: integration time step
    spring_k: spring constant shared by both interaction types
    cutoff_inner: pairs closer than this do not interact
    cutoff_outer: pairs farther than this do not interact; also the
        repulsive rest length
    decay_rate: deactivation rate outside activation areas (1/time)
    mass: particle mass
    box_half: half-width of the periodic box
    n_part: particle count (even; half tagged left, half right)
    n_grid: bins per axis of the observation/action grid
    n_steps: episode length in simulation steps
    interaction_set: which cell types actions may use
    mobility: optional multiplier on dt^2/mass (1 = plain update rule)
    """

    dt: float = 0.05
    spring_k: float = 3.0
    cutoff_inner: float = 0.015
    cutoff_outer: float = 1.5
    decay_rate: float = 10.0
    mass: float = 1.0
    box_half: float = 2.0
    n_part: int = 96
    n_grid: int = 4
    n_steps: int = 100
    interaction_set: str = BOTH
    mobility: float = 1.0

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.spring_k < 0:
            raise ConfigError("spring_k must be non-negative")
        if not 0 <= self.cutoff_inner < self.cutoff_outer:
            raise ConfigError("need 0 <= cutoff_inner < cutoff_outer")
        if self.decay_rate < 0:
            raise ConfigError("decay_rate must be non-negative")
        if self.mass <= 0:
            raise ConfigError("mass must be positive")
        if self.box_half <= 0:
            raise ConfigError("box_half must be positive")
        if self.n_part <= 0 or self.n_part % 2:
            raise ConfigError("n_part must be positive and even")
        if self.n_grid < 1:
            raise ConfigError("n_grid must be >= 1")
        if self.n_steps < 1:
            raise ConfigError("n_steps must be >= 1")
        if self.interaction_set not in INTERACTION_SETS:
            raise ConfigError(f"unknown interaction_set {self.interaction_set!r}")
        if self.mobility <= 0:
            raise ConfigError("mobility must be positive")

    @property
    def step_factor(self) -> float:
        """Prefactor turning a force into a displacement: mobility * dt^2 / mass."""
        return self.mobility * self.dt * self.dt / self.mass

    @property
    def deactivation_prob(self) -> float:
        """Per-step probability that an activated particle outside any
        activation area turns inactive: 1 - exp(-decay_rate * dt)."""
        import math

        return 1.0 - math.exp(-self.decay_rate * self.dt)

    def allowed_cells(self) -> frozenset[int]:
        """Cell values actions may contain under this interaction set."""
        if self.interaction_set == ATTRACTIVE_ONLY:
            return frozenset((INACTIVE, ATTRACTIVE))
        if self.interaction_set == REPULSIVE_ONLY:
            return frozenset((INACTIVE, REPULSIVE))
        return frozenset((INACTIVE, ATTRACTIVE, REPULSIVE))
