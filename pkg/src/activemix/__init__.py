"""Controllable-interaction active-matter mixing toolkit.

Simulates drag-dominated particles whose pairwise spring interactions are
switched on a control grid, measures mixing and homogeneity, scripts the
known control strategies, and analyzes the per-step update matrix whose
spectrum explains which interaction sets permit mixing.
"""

from .dynamics import (
    ForceVector,
    ParticleState,
    apply_activation_field,
    compute_forces,
    integrate_step,
    mean_nearest_neighbor_distance,
    minimum_image_displacement,
    pair_coefficient,
    wrap_box,
)
from .environment import (
    ActionGrid,
    MixingEnv,
    ObservationTensor,
    StepResult,
    bin_observation,
    combined_reward,
    decode_action,
    encode_action,
    homogeneity_reward,
    init_episode,
    mixing_reward,
)
from .params import (
    ATTRACTIVE,
    ATTRACTIVE_ONLY,
    BOTH,
    ConfigError,
    EigensolverError,
    EpisodeFinishedError,
    INACTIVE,
    INTERACTION_SETS,
    InvalidActionError,
    InvalidPolicyError,
    REPULSIVE,
    REPULSIVE_ONLY,
    SimParams,
    TAG_LEFT,
    TAG_RIGHT,
)
from .policies import POLICY_KINDS, PolicySpec, policy_action, required_modes, validate_policy
from .spectral import (
    Histogram,
    SpectrumRecord,
    UpdateMatrix,
    analyze_matrix,
    analyze_state,
    build_update_matrix,
    gershgorin_bounds,
    log_determinant,
    spectrum_histogram,
    symmetric_eigenvalues,
)

__version__ = "0.1.0"
