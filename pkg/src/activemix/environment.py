"""Episode management: initial conditions, grid observations, rewards.

The observation reuses the action grid: a (2, n_grid, n_grid) tensor of
particle counts indexed (tag, x-bin, y-bin). Rewards carry the 1/n_steps
factor so episode sums land on the normalized scales: the mixing term sums
to [-n_grid^2/2, 0] and the homogeneity term to [-1, 0].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dynamics, spectral
from .dynamics import ParticleState, grid_coords
from .params import (
    INACTIVE,
    TAG_LEFT,
    TAG_RIGHT,
    ConfigError,
    EpisodeFinishedError,
    SimParams,
)

# An observation is a plain (2, n_grid, n_grid) int64 array of counts.
ObservationTensor = np.ndarray


@dataclass(frozen=True)
class ActionGrid:
    """Ternary control field: one cell value per grid square.

    ``cells[x, y]`` covers the same square as observation bin (x, y), with
    cell (0, 0) at the (-box_half, -box_half) corner. Values are INACTIVE
    (no activation area), ATTRACTIVE or REPULSIVE.
    """

    cells: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "cells", np.asarray(self.cells, dtype=np.int64))

    @classmethod
    def all_none(cls, n_grid: int) -> "ActionGrid":
        return cls(np.full((n_grid, n_grid), INACTIVE, dtype=np.int64))

    @classmethod
    def uniform(cls, n_grid: int, value: int) -> "ActionGrid":
        return cls(np.full((n_grid, n_grid), value, dtype=np.int64))

    def digits(self) -> list[int]:
        """Row-major flat cell values (the wire form of an action)."""
        return [int(v) for v in self.cells.reshape(-1)]


@dataclass
class StepResult:
    """Outcome of one environment step.

    ``t`` counts completed steps (1-based); ``done`` is true exactly when
    t reaches n_steps. ``reward_parts`` holds the unweighted per-step mixing
    and homogeneity rewards; ``reward`` is their alpha blend.
    ``update_matrix`` is filled only when the environment was built with
    capture_matrices=True.
    """

    observation: ObservationTensor
    reward: float
    reward_parts: tuple[float, float]
    done: bool
    t: int
    update_matrix: object | None = field(default=None, repr=False)


def bin_observation(state: ParticleState, params: SimParams) -> ObservationTensor:
    """Count particles per (tag, x-bin, y-bin) on the action grid."""
    ix, iy = grid_coords(state.positions, params.box_half, params.n_grid)
    counts = np.zeros((2, params.n_grid, params.n_grid), dtype=np.int64)
    np.add.at(counts, (state.tags, ix, iy), 1)
    return counts


def init_episode(
    seed: int,
    params: SimParams,
    placement: str = "uniform",
    rng: np.random.Generator | None = None,
) -> tuple[ParticleState, ObservationTensor]:
    """Sample the initial configuration: left half left-tagged, right half right-tagged.

    ``uniform`` scatters each half's particles continuously; ``stratified``
    places exactly n_part/n_grid^2 particles in every cell (uniform within
    the cell), which makes the initial occupancy exactly flat. All particles
    start inactive.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    n = params.n_part
    half = n // 2
    box = params.box_half

    if placement == "uniform":
        positions = np.empty((n, 2))
        positions[:half, 0] = rng.uniform(-box, 0.0, half)
        positions[half:, 0] = rng.uniform(0.0, box, half)
        positions[:, 1] = rng.uniform(-box, box, n)
    elif placement == "stratified":
        per_cell, rem = divmod(n, params.n_grid**2)
        if rem or params.n_grid % 2:
            raise ConfigError(
                "stratified placement needs n_grid even and n_part divisible by n_grid^2"
            )
        cell_w = 2.0 * box / params.n_grid
        rows = []
        for cx in range(params.n_grid):
            for cy in range(params.n_grid):
                lo = np.array([-box + cx * cell_w, -box + cy * cell_w])
                rows.append(lo + rng.uniform(0.0, cell_w, (per_cell, 2)))
        positions = np.concatenate(rows)
    else:
        raise ConfigError(f"unknown placement {placement!r}")

    # Both layouts emit all left-half particles first, so tag by construction.
    tags = np.concatenate(
        [np.full(half, TAG_LEFT, dtype=np.int64), np.full(half, TAG_RIGHT, dtype=np.int64)]
    )
    state = ParticleState(positions, np.full(n, INACTIVE, dtype=np.int64), tags)
    return state, bin_observation(state, params)


def mixing_reward(obs: ObservationTensor, params: SimParams) -> float:
    """Per-step penalty on per-bin tag imbalance, normalized so the
    segregated 6-per-cell initial state scores -1 over a full episode."""
    diff = obs[0].astype(np.int64) - obs[1].astype(np.int64)
    norm = (params.n_part / params.n_grid) ** 2
    # + 0.0 folds the empty-sum -0.0 into a plain 0 for clean transcripts
    return -float(np.sum(diff * diff) / (params.n_steps * norm)) + 0.0


def homogeneity_reward(obs: ObservationTensor, params: SimParams) -> float:
    """Per-step penalty on per-bin occupancy deviation from the mean,
    normalized so an all-in-one-bin episode scores -1."""
    occupancy = obs[0].astype(np.int64) + obs[1].astype(np.int64)
    mean = params.n_part / params.n_grid**2
    dev = mean - occupancy
    norm = params.n_part**2 * (1.0 - 1.0 / params.n_grid**2)
    return -float(np.sum(dev * dev) / (params.n_steps * norm)) + 0.0


def combined_reward(r_m: float, r_h: float, alpha: float) -> float:
    """Affine blend alpha * r_m + (1 - alpha) * r_h."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * r_m + (1.0 - alpha) * r_h


def encode_action(index: int, n_grid: int) -> ActionGrid:
    """Base-3 little-endian digits of ``index`` over row-major cells."""
    n_cells = n_grid * n_grid
    if not 0 <= index < 3**n_cells:
        raise ValueError(f"action index {index} out of range [0, 3^{n_cells})")
    digits = np.empty(n_cells, dtype=np.int64)
    rem = index
    for p in range(n_cells):
        rem, digits[p] = divmod(rem, 3)
    return ActionGrid(digits.reshape(n_grid, n_grid))


def decode_action(action: ActionGrid) -> int:
    """Inverse of encode_action."""
    digits = action.digits()
    return sum(int(d) * 3**p for p, d in enumerate(digits))


class MixingEnv:
    """Step/reset environment over the particle model.

    One instance is single-threaded and owns its RNG; the full step
    sequence is a pure function of (seed, action sequence). Per step the
    order is: apply the activation field, compute forces, integrate and
    wrap, observe, reward. With ``frame_skip`` > 1 the same action is
    applied for that many consecutive simulation steps and the per-step
    rewards are summed.
    """

    def __init__(
        self,
        params: SimParams | None = None,
        alpha: float = 0.5,
        *,
        placement: str = "uniform",
        frame_skip: int = 1,
        capture_matrices: bool = False,
    ) -> None:
        self.params = params if params is not None else SimParams()
        if not 0.0 <= alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
        if frame_skip < 1:
            raise ConfigError("frame_skip must be >= 1")
        if placement not in ("uniform", "stratified"):
            raise ConfigError(f"unknown placement {placement!r}")
        self.alpha = float(alpha)
        self.placement = placement
        self.frame_skip = int(frame_skip)
        self.capture_matrices = bool(capture_matrices)
        self.state: ParticleState | None = None
        self.t = 0
        self._rng: np.random.Generator | None = None

    def describe(self) -> dict:
        """Static facts a trainer needs before interacting."""
        p = self.params
        return {
            "n_part": p.n_part,
            "n_grid": p.n_grid,
            "n_steps": p.n_steps,
            "interaction_set": p.interaction_set,
            "alpha": self.alpha,
            "obs_shape": [2, p.n_grid, p.n_grid],
            "action_len": p.n_grid * p.n_grid,
            "frame_skip": self.frame_skip,
        }

    def reset(self, seed: int) -> ObservationTensor:
        """Start a new episode; the seed drives placement and decay draws."""
        self._rng = np.random.default_rng(seed)
        self.state, obs = init_episode(seed, self.params, self.placement, rng=self._rng)
        self.t = 0
        return obs

    def step(self, action) -> StepResult:
        if self.state is None or self._rng is None:
            raise RuntimeError("reset() must be called before step()")
        if self.t >= self.params.n_steps:
            raise EpisodeFinishedError(f"episode already finished at t={self.t}")

        action = action if isinstance(action, ActionGrid) else ActionGrid(np.asarray(action))
        matrix = None
        r_m_total = 0.0
        r_h_total = 0.0
        reward_total = 0.0
        obs = None
        for _ in range(min(self.frame_skip, self.params.n_steps - self.t)):
            self.state = dynamics.apply_activation_field(self.state, action, self._rng, self.params)
            if self.capture_matrices:
                matrix = spectral.build_update_matrix(self.state, self.params)
            forces = dynamics.compute_forces(self.state, self.params)
            self.state = dynamics.integrate_step(self.state, forces, self.params)
            self.t += 1
            obs = bin_observation(self.state, self.params)
            r_m = mixing_reward(obs, self.params)
            r_h = homogeneity_reward(obs, self.params)
            r_m_total += r_m
            r_h_total += r_h
            reward_total += combined_reward(r_m, r_h, self.alpha)

        return StepResult(
            observation=obs,
            reward=reward_total,
            reward_parts=(r_m_total, r_h_total),
            done=self.t >= self.params.n_steps,
            t=self.t,
            update_matrix=matrix,
        )
