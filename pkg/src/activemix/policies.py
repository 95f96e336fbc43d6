"""Scripted controllers for every emergent strategy class.

Each policy is a pure function of (spec, observation, step index) and emits
only cell types its interaction requirements allow, so a policy that passes
validate_policy() always produces actions the environment accepts. Exact
cell patterns used by trained agents are not published; these are
parameterized reconstructions of the described behavior classes, with the
free parameters (period, duty, side, masks, thresholds) exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .environment import ActionGrid, ObservationTensor
from .params import ATTRACTIVE, INACTIVE, REPULSIVE, InvalidPolicyError, SimParams

POLICY_KINDS = (
    "no_op",
    "collapse_all",
    "collapse_some",
    "activate_little",
    "activate_one_side",
    "repulsive_spreading",
    "attr_rep_spreading",
    "oscillation",
)


@dataclass(frozen=True)
class PolicySpec:
    """A policy kind plus its free parameters.

    period/duty: oscillation cadence, also the "careful" duty cycle of
        collapse_all (duty defaults to 1.0 there: always attract)
    collapse: oscillation preset; when duty is unset, collapse=True means
        duty 0.5 and collapse=False the shorter 0.3 attractive phase
    side/columns: which edge strip activate_one_side marks repulsive
    cells: explicit (x, y) mask for collapse_some / activate_little;
        None picks the central block
    interval: activate_little fires on every interval-th step only
    """

    kind: str
    period: int = 10
    duty: float | None = None
    collapse: bool = True
    side: str = "left"
    columns: int = 2
    cells: tuple[tuple[int, int], ...] | None = None
    interval: int = 10

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise InvalidPolicyError(f"unknown policy kind {self.kind!r}")
        if self.period < 1:
            raise InvalidPolicyError("period must be >= 1")
        if self.duty is not None and not 0.0 <= self.duty <= 1.0:
            raise InvalidPolicyError("duty must lie in [0, 1]")
        if self.side not in ("left", "right", "bottom", "top"):
            raise InvalidPolicyError(f"unknown side {self.side!r}")
        if self.columns < 1:
            raise InvalidPolicyError("columns must be >= 1")
        if self.interval < 1:
            raise InvalidPolicyError("interval must be >= 1")


def required_modes(spec: PolicySpec) -> frozenset[int]:
    """Cell types the policy may emit (beyond the always-allowed INACTIVE)."""
    return {
        "no_op": frozenset(),
        "collapse_all": frozenset((ATTRACTIVE,)),
        "collapse_some": frozenset((ATTRACTIVE,)),
        "activate_little": frozenset((ATTRACTIVE,)),
        "activate_one_side": frozenset((REPULSIVE,)),
        "repulsive_spreading": frozenset((REPULSIVE,)),
        "attr_rep_spreading": frozenset((ATTRACTIVE, REPULSIVE)),
        "oscillation": frozenset((ATTRACTIVE, REPULSIVE)),
    }[spec.kind]


def validate_policy(spec: PolicySpec, params: SimParams) -> None:
    """Reject policies that would emit cells outside the interaction set."""
    missing = required_modes(spec) - params.allowed_cells()
    if missing:
        names = {ATTRACTIVE: "attractive", REPULSIVE: "repulsive"}
        raise InvalidPolicyError(
            f"policy {spec.kind!r} needs {sorted(names[m] for m in missing)} cells, "
            f"not allowed under {params.interaction_set!r}"
        )


def _default_center_cells(n_grid: int) -> tuple[tuple[int, int], ...]:
    if n_grid == 1:
        return ((0, 0),)
    if n_grid % 2:
        c = n_grid // 2
        return ((c, c),)
    lo = n_grid // 2 - 1
    return tuple((x, y) for x in (lo, lo + 1) for y in (lo, lo + 1))


def _mask_grid(n_grid: int, cells, value: int) -> ActionGrid:
    grid = np.full((n_grid, n_grid), INACTIVE, dtype=np.int64)
    for x, y in cells:
        if not (0 <= x < n_grid and 0 <= y < n_grid):
            raise InvalidPolicyError(f"cell ({x}, {y}) outside the {n_grid}x{n_grid} grid")
        grid[x, y] = value
    return ActionGrid(grid)


def _side_strip(n_grid: int, side: str, columns: int) -> ActionGrid:
    cols = min(columns, n_grid)
    grid = np.full((n_grid, n_grid), INACTIVE, dtype=np.int64)
    if side == "left":
        grid[:cols, :] = REPULSIVE
    elif side == "right":
        grid[n_grid - cols:, :] = REPULSIVE
    elif side == "bottom":
        grid[:, :cols] = REPULSIVE
    else:
        grid[:, n_grid - cols:] = REPULSIVE
    return ActionGrid(grid)


def _attractive_phase(spec: PolicySpec, t: int, default_duty: float) -> bool:
    duty = spec.duty if spec.duty is not None else default_duty
    return (t % spec.period) < math.ceil(duty * spec.period)


def policy_action(spec: PolicySpec, obs: ObservationTensor, t: int) -> ActionGrid:
    """Deterministic action for the current observation and step index."""
    n_grid = obs.shape[1]

    if spec.kind == "no_op":
        return ActionGrid.all_none(n_grid)

    if spec.kind == "collapse_all":
        if _attractive_phase(spec, t, default_duty=1.0):
            return ActionGrid.uniform(n_grid, ATTRACTIVE)
        return ActionGrid.all_none(n_grid)

    if spec.kind == "collapse_some":
        cells = spec.cells if spec.cells is not None else _default_center_cells(n_grid)
        return _mask_grid(n_grid, cells, ATTRACTIVE)

    if spec.kind == "activate_little":
        if t % spec.interval:
            return ActionGrid.all_none(n_grid)
        cells = spec.cells if spec.cells is not None else _default_center_cells(n_grid)[:1]
        return _mask_grid(n_grid, cells, ATTRACTIVE)

    if spec.kind == "activate_one_side":
        return _side_strip(n_grid, spec.side, spec.columns)

    if spec.kind == "oscillation":
        duty_default = 0.5 if spec.collapse else 0.3
        if _attractive_phase(spec, t, default_duty=duty_default):
            return ActionGrid.uniform(n_grid, ATTRACTIVE)
        return ActionGrid.uniform(n_grid, REPULSIVE)

    # Spreading policies compare integer occupancy to the exact mean
    # n_part/n_grid^2 without float division: occupancy*n_grid^2 vs n_part.
    occupancy = np.asarray(obs[0] + obs[1], dtype=np.int64)
    n_part = int(occupancy.sum())
    scaled = occupancy * (n_grid * n_grid)

    if spec.kind == "repulsive_spreading":
        grid = np.where(scaled > n_part, REPULSIVE, INACTIVE)
        return ActionGrid(grid)

    # attr_rep_spreading: spread the dense cells, collect in the sparse
    # ones, leave exactly-average cells alone.
    grid = np.full((n_grid, n_grid), INACTIVE, dtype=np.int64)
    grid[scaled > n_part] = REPULSIVE
    grid[scaled < n_part] = ATTRACTIVE
    return ActionGrid(grid)
