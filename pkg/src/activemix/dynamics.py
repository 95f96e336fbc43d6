"""Drag-dominated particle dynamics with switchable truncated springs.

Positions update directly from forces (no velocity state): one step moves
each particle by ``step_factor * F_i`` and wraps it back into the periodic
box. Only same-mode activated pairs interact; attractive springs pull with
rest length 0, repulsive springs push with rest length ``cutoff_outer``.

States are treated as values: the step functions return new ``ParticleState``
instances and never mutate their inputs. Arrays may be shared between
states, so callers must treat them as read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import (
    ATTRACTIVE,
    INACTIVE,
    REPULSIVE,
    InvalidActionError,
    SimParams,
)


@dataclass
class ParticleState:
    """Positions, activation codes and half-box tags for one configuration.

    positions: (n, 2) float64, each component in [-box_half, box_half)
    activation: (n,) ints from {INACTIVE, ATTRACTIVE, REPULSIVE}
    tags: (n,) ints from {TAG_LEFT, TAG_RIGHT}; fixed for an episode
    """

    positions: np.ndarray
    activation: np.ndarray
    tags: np.ndarray

    def __post_init__(self) -> None:
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.activation = np.asarray(self.activation, dtype=np.int64)
        self.tags = np.asarray(self.tags, dtype=np.int64)
        n = self.positions.shape[0]
        if self.positions.shape != (n, 2):
            raise ValueError("positions must have shape (n, 2)")
        if self.activation.shape != (n,) or self.tags.shape != (n,):
            raise ValueError("activation and tags must have shape (n,)")

    @property
    def n(self) -> int:
        return self.positions.shape[0]


@dataclass
class ForceVector:
    """Per-particle force, split into its attractive and repulsive parts.

    Exclusive activation guarantees at least one part is exactly zero for
    every particle; ``total`` is always their sum.
    """

    attractive: np.ndarray
    repulsive: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.attractive + self.repulsive


def wrap_box(values: np.ndarray, box_half: float) -> np.ndarray:
    """Shift components by multiples of the box width into [-box_half, box_half).

    Identity (bit-exact) for components already inside the interval; the
    tie at +box_half maps to -box_half.
    """
    width = 2.0 * box_half
    out = values - width * np.round(values / width)
    # np.round is half-even, so an exact +box_half survives; fold it down.
    out = np.where(out >= box_half, out - width, out)
    # width * round() can overshoot by one ulp for non-power-of-two boxes;
    # the exact value is then -box_half + tiny, so snap to the interval edge.
    return np.where(out < -box_half, -box_half, out)


def minimum_image_displacement(xi, xj, box_half: float) -> np.ndarray:
    """Nearest periodic representative of ``xi - xj``, component-wise."""
    return wrap_box(np.asarray(xi, dtype=np.float64) - np.asarray(xj, dtype=np.float64), box_half)


def grid_coords(positions: np.ndarray, box_half: float, n_cells: int):
    """Map positions to integer cell indices on an n_cells x n_cells grid.

    Cell (0, 0) sits at the (-box_half, -box_half) corner. The clip guards
    both box faces against float rounding at the edges.
    """
    cell_w = 2.0 * box_half / n_cells
    ix = np.clip((positions[:, 0] + box_half) // cell_w, 0, n_cells - 1).astype(np.int64)
    iy = np.clip((positions[:, 1] + box_half) // cell_w, 0, n_cells - 1).astype(np.int64)
    return ix, iy


def _rest_length(mode: int, params: SimParams) -> float:
    if mode == ATTRACTIVE:
        return 0.0
    if mode == REPULSIVE:
        return params.cutoff_outer
    raise ValueError(f"mode must be ATTRACTIVE or REPULSIVE, got {mode!r}")


def pair_coefficient(dist, mode: int, params: SimParams):
    """Displacement-per-unit-separation coefficient of one activated pair.

    Returns ``step_factor * spring_k * (dist - rest) / dist`` strictly inside
    the (cutoff_inner, cutoff_outer) shell and exactly 0 outside (the inner
    truncation makes dist = 0 safe). Non-negative for attractive pairs,
    non-positive for repulsive ones.
    """
    rest = _rest_length(mode, params)
    d = np.asarray(dist, dtype=np.float64)
    in_range = (params.cutoff_inner < d) & (d < params.cutoff_outer)
    safe = np.where(in_range, d, 1.0)
    c = np.where(in_range, params.step_factor * params.spring_k * (d - rest) / safe, 0.0)
    if np.isscalar(dist) or getattr(dist, "ndim", 1) == 0:
        return float(c)
    return c


def _row_force(positions: np.ndarray, i: int, js: np.ndarray, rest: float, params: SimParams) -> np.ndarray:
    """Spring force on particle i from candidate partners js (ascending).

    Both neighbor methods funnel through this routine so they agree
    bit-exactly: identical candidate filtering, identical arithmetic, and a
    single compacted sum in ascending-j order.
    """
    d = wrap_box(positions[i] - positions[js], params.box_half)
    dist = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)
    in_range = (params.cutoff_inner < dist) & (dist < params.cutoff_outer)
    if not in_range.any():
        return np.zeros(2)
    dd = d[in_range]
    coeff = params.spring_k * (dist[in_range] - rest) / dist[in_range]
    return -np.sum(coeff[:, None] * dd, axis=0)


def _cell_list_candidates(positions: np.ndarray, idx: np.ndarray, params: SimParams) -> dict[int, np.ndarray]:
    """Per-particle candidate partners from a periodic cell list.

    The cell width is kept >= cutoff_outer so no in-range pair is missed;
    wrapped neighbor cells are deduplicated (the 3x3 stencil folds onto
    itself when fewer than 3 cells span the box).
    """
    width = 2.0 * params.box_half
    ncell = max(1, int(width // params.cutoff_outer))
    ix, iy = grid_coords(positions[idx], params.box_half, ncell)
    buckets: dict[tuple[int, int], list[int]] = {}
    for k, part in enumerate(idx):
        buckets.setdefault((int(ix[k]), int(iy[k])), []).append(int(part))

    out: dict[int, np.ndarray] = {}
    for k, part in enumerate(idx):
        seen: set[tuple[int, int]] = set()
        members: list[int] = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                key = ((int(ix[k]) + dx) % ncell, (int(iy[k]) + dy) % ncell)
                if key in seen:
                    continue
                seen.add(key)
                members.extend(buckets.get(key, ()))
        out[int(part)] = np.unique(np.asarray(members, dtype=np.int64))
    return out


def compute_forces(state: ParticleState, params: SimParams, *, neighbor_method: str = "pairwise") -> ForceVector:
    """Total spring force on every particle, split by interaction type.

    Attractive-activated particles interact only with attractive-activated
    partners, repulsive with repulsive; inactive particles neither exert
    nor receive force. ``neighbor_method`` is "pairwise" (reference) or
    "cell_list"; both produce bit-identical forces.
    """
    if neighbor_method not in ("pairwise", "cell_list"):
        raise ValueError(f"unknown neighbor_method {neighbor_method!r}")
    n = state.n
    f_att = np.zeros((n, 2))
    f_rep = np.zeros((n, 2))
    for mode, out in ((ATTRACTIVE, f_att), (REPULSIVE, f_rep)):
        idx = np.nonzero(state.activation == mode)[0]
        if idx.size < 2:
            continue
        rest = _rest_length(mode, params)
        if neighbor_method == "cell_list":
            candidates = _cell_list_candidates(state.positions, idx, params)
            for i in idx:
                out[i] = _row_force(state.positions, int(i), candidates[int(i)], rest, params)
        else:
            for i in idx:
                out[i] = _row_force(state.positions, int(i), idx, rest, params)
    return ForceVector(attractive=f_att, repulsive=f_rep)


def integrate_step(state: ParticleState, forces: ForceVector, params: SimParams) -> ParticleState:
    """Advance positions by step_factor * F and wrap into the box."""
    new_pos = wrap_box(state.positions + params.step_factor * forces.total, params.box_half)
    return ParticleState(new_pos, state.activation, state.tags)


def validate_action_cells(action, params: SimParams) -> np.ndarray:
    """Check an action grid against the grid shape and interaction set.

    Accepts anything with a ``cells`` attribute or a bare array; returns
    the validated (n_grid, n_grid) int array.
    """
    cells = np.asarray(getattr(action, "cells", action))
    if cells.shape != (params.n_grid, params.n_grid):
        raise InvalidActionError(
            f"action grid must be {params.n_grid}x{params.n_grid}, got {cells.shape}"
        )
    if not np.issubdtype(cells.dtype, np.integer):
        raise InvalidActionError("action cells must be integers")
    allowed = params.allowed_cells()
    present = set(int(v) for v in np.unique(cells))
    if not present <= allowed:
        raise InvalidActionError(
            f"cells {sorted(present - allowed)} not allowed under {params.interaction_set!r}"
        )
    return cells.astype(np.int64, copy=False)


def apply_activation_field(
    state: ParticleState,
    action,
    rng: np.random.Generator,
    params: SimParams,
) -> ParticleState:
    """Activate particles inside marked cells; decay the rest stochastically.

    A cell marked attractive or repulsive sets every particle inside to that
    mode regardless of prior state. In unmarked cells an activated particle
    deactivates with probability 1 - exp(-decay_rate * dt); inactive ones
    stay inactive. Exactly n uniforms are drawn per call so the stream
    layout does not depend on the state.
    """
    cells = validate_action_cells(action, params)
    ix, iy = grid_coords(state.positions, params.box_half, params.n_grid)
    marked = cells[ix, iy]
    u = rng.random(state.n)

    act = state.activation.copy()
    decay = (marked == INACTIVE) & (act != INACTIVE) & (u < params.deactivation_prob)
    act[decay] = INACTIVE
    act[marked == ATTRACTIVE] = ATTRACTIVE
    act[marked == REPULSIVE] = REPULSIVE
    return ParticleState(state.positions, act, state.tags)


def mean_nearest_neighbor_distance(state: ParticleState, params: SimParams) -> float:
    """Mean over particles of the minimum-image distance to the closest other."""
    pos = state.positions
    d = wrap_box(pos[:, None, :] - pos[None, :, :], params.box_half)
    dist = np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2)
    np.fill_diagonal(dist, np.inf)
    return float(dist.min(axis=1).mean())
