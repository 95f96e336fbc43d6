"""Per-step update matrix over activated particles and its spectrum.

Because the pair coefficient is isotropic, one simulation step acts on each
coordinate of the activated positions as the same n_active x n_active
matrix-vector product: off-diagonal entries are the pair coefficients of
same-mode activated pairs, the diagonal is one minus the off-diagonal row
sum. Its eigenvalues decide whether phase space contracts (attractive,
all <= 1), expands (repulsive, all >= 1) or can stretch and fold (mixed
signs straddling 1), and the Gershgorin discs bound them from the row sums
alone.

Inactive particles are trivial eigenvalue-1 fixed points and are excluded
by default so they do not swamp histograms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics import ParticleState, pair_coefficient, wrap_box
from .params import ATTRACTIVE, EigensolverError, INACTIVE, REPULSIVE, SimParams


@dataclass
class UpdateMatrix:
    """Symmetric row-sum-one update matrix over the activated particles.

    entries: (size, size) float64, M[i, j] = M[j, i] built from a single
        pair evaluation; cross-mode entries are exactly 0
    index_map: activated-row -> global particle index
    modes: activation code per activated row
    """

    entries: np.ndarray
    index_map: np.ndarray
    modes: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def n_attractive(self) -> int:
        return int(np.sum(self.modes == ATTRACTIVE))

    @property
    def n_repulsive(self) -> int:
        return int(np.sum(self.modes == REPULSIVE))


@dataclass
class SpectrumRecord:
    """Eigen-analysis of one captured update matrix."""

    t: int
    eigenvalues: np.ndarray
    gershgorin_lo: float
    gershgorin_hi: float
    log_det: float
    n_attractive: int
    n_repulsive: int

    @property
    def n_active(self) -> int:
        return int(self.eigenvalues.shape[0])


def build_update_matrix(state: ParticleState, params: SimParams, *, include_inactive: bool = False) -> UpdateMatrix:
    """Extract the update matrix from a configuration.

    Coefficients are evaluated at this (pre-step) state, so applying the
    matrix to each coordinate of the activated positions reproduces one
    integration step whenever no pair leaves the interaction shell and no
    particle wraps. Returns a size-0 matrix when nothing is activated.
    """
    if include_inactive:
        idx = np.arange(state.n)
    else:
        idx = np.nonzero(state.activation != INACTIVE)[0]
    na = idx.size
    modes = state.activation[idx]
    m = np.zeros((na, na))
    if na >= 2:
        iu, ju = np.triu_indices(na, k=1)
        d = wrap_box(state.positions[idx[iu]] - state.positions[idx[ju]], params.box_half)
        dist = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)
        same_active = (modes[iu] == modes[ju]) & (modes[iu] != INACTIVE)
        coeff = np.zeros(dist.shape)
        for mode in (ATTRACTIVE, REPULSIVE):
            pick = same_active & (modes[iu] == mode)
            if pick.any():
                coeff[pick] = pair_coefficient(dist[pick], mode, params)
        m[iu, ju] = coeff
        m[ju, iu] = coeff
    m[np.arange(na), np.arange(na)] = 1.0 - m.sum(axis=1)
    return UpdateMatrix(entries=m, index_map=idx, modes=modes)


def symmetric_eigenvalues(matrix: UpdateMatrix | np.ndarray) -> np.ndarray:
    """All real eigenvalues of a symmetric matrix, sorted ascending."""
    m = matrix.entries if isinstance(matrix, UpdateMatrix) else np.asarray(matrix, dtype=np.float64)
    if m.size == 0:
        return np.empty(0)
    try:
        return np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"symmetric eigensolver did not converge: {exc}") from exc


def gershgorin_bounds(matrix: UpdateMatrix | np.ndarray) -> tuple[float, float]:
    """Hull of the Gershgorin discs: every eigenvalue lies in [lo, hi].

    Row i contributes the interval diag_i -/+ sum_j |offdiag_ij|; with the
    row-sum-one construction diag_i equals 1 - sum_j offdiag_ij. A size-0
    matrix yields the degenerate (1, 1), the disc of an excluded inactive
    particle.
    """
    m = matrix.entries if isinstance(matrix, UpdateMatrix) else np.asarray(matrix, dtype=np.float64)
    if m.size == 0:
        return 1.0, 1.0
    diag = np.diag(m)
    radius = np.abs(m).sum(axis=1) - np.abs(diag)
    return float(np.min(diag - radius)), float(np.max(diag + radius))


def log_determinant(eigenvalues: Sequence[float] | np.ndarray) -> float:
    """Sum of eigenvalue logs; NaN when any eigenvalue is <= 0.

    The step preserves phase-space measure exactly when this is 0; an empty
    spectrum (nothing activated) is the identity and returns 0.
    """
    ev = np.asarray(eigenvalues, dtype=np.float64)
    if ev.size == 0:
        return 0.0
    if np.any(ev <= 0.0):
        return math.nan
    return float(np.sum(np.log(ev)))


def analyze_state(state: ParticleState, params: SimParams, t: int) -> SpectrumRecord:
    """Build, eigensolve and summarize the update matrix of one state."""
    matrix = build_update_matrix(state, params)
    return analyze_matrix(matrix, t)


def analyze_matrix(matrix: UpdateMatrix, t: int) -> SpectrumRecord:
    ev = symmetric_eigenvalues(matrix)
    lo, hi = gershgorin_bounds(matrix)
    return SpectrumRecord(
        t=t,
        eigenvalues=ev,
        gershgorin_lo=lo,
        gershgorin_hi=hi,
        log_det=log_determinant(ev),
        n_attractive=matrix.n_attractive,
        n_repulsive=matrix.n_repulsive,
    )


@dataclass
class Histogram:
    """Uniform-bin eigenvalue histogram with separate under/overflow tallies."""

    edges: np.ndarray
    counts: np.ndarray
    underflow: int
    overflow: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def to_text(self) -> str:
        """Two-column table (bin center, count); tallies in header comments."""
        fmt = lambda v: format(float(v), ".17g")
        lines = [
            f"# bins={self.counts.size} lo={fmt(self.edges[0])} hi={fmt(self.edges[-1])}",
            f"# underflow {self.underflow}",
            f"# overflow {self.overflow}",
        ]
        lines += [f"{fmt(c)} {int(n)}" for c, n in zip(self.centers, self.counts)]
        return "\n".join(lines) + "\n"


def spectrum_histogram(
    records: Iterable[SpectrumRecord],
    bins: int = 200,
    value_range: tuple[float, float] = (0.9, 1.1),
) -> Histogram:
    """Histogram all eigenvalues across a stream of spectrum records."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    lo, hi = value_range
    if not lo < hi:
        raise ValueError("histogram range must satisfy lo < hi")
    edges = np.linspace(lo, hi, bins + 1)
    counts = np.zeros(bins, dtype=np.int64)
    underflow = 0
    overflow = 0
    for rec in records:
        ev = rec.eigenvalues
        if ev.size == 0:
            continue
        underflow += int(np.sum(ev < lo))
        overflow += int(np.sum(ev > hi))
        inside, _ = np.histogram(ev, bins=edges)
        counts += inside
    return Histogram(edges=edges, counts=counts, underflow=underflow, overflow=overflow)
