import math

import numpy as np
import pytest

import activemix as am


P = am.SimParams()
C_ATT = 0.0075  # spring_k * dt^2 / mass at defaults


def two_attractive(distance=1.0):
    return am.ParticleState(
        np.array([[0.0, 0.0], [distance, 0.0]]),
        np.array([am.ATTRACTIVE, am.ATTRACTIVE]),
        np.array([0, 1]),
    )


def equilateral(radius, mode):
    angles = (0.0, 2 * np.pi / 3, 4 * np.pi / 3)
    pos = np.array([[radius * np.cos(a), radius * np.sin(a)] for a in angles])
    return am.ParticleState(pos, np.full(3, mode), np.array([0, 0, 1]))


def episode_matrices(interaction_set, policy_kind, seeds=(0, 1), **policy_kwargs):
    from activemix.policies import PolicySpec, policy_action

    params = am.SimParams(interaction_set=interaction_set)
    spec = PolicySpec(policy_kind, **policy_kwargs)
    out = []
    for seed in seeds:
        env = am.MixingEnv(params, alpha=0.5, capture_matrices=True)
        obs = env.reset(seed)
        while True:
            res = env.step(policy_action(spec, obs, env.t))
            out.append(res.update_matrix)
            obs = res.observation
            if res.done:
                break
    return out


# ---------------------------------------------------------------- matrix build


def test_two_attractive_matrix_entries():
    m = am.build_update_matrix(two_attractive(1.0), P)
    np.testing.assert_allclose(
        m.entries, [[1 - C_ATT, C_ATT], [C_ATT, 1 - C_ATT]], rtol=1e-12
    )
    np.testing.assert_array_equal(m.index_map, [0, 1])


def test_empty_matrix_when_nothing_activated():
    st = am.ParticleState(np.zeros((4, 2)), np.zeros(4, dtype=int), np.array([0, 0, 1, 1]))
    m = am.build_update_matrix(st, P)
    assert m.size == 0
    assert am.symmetric_eigenvalues(m).size == 0
    assert am.gershgorin_bounds(m) == (1.0, 1.0)
    assert am.log_determinant(am.symmetric_eigenvalues(m)) == 0.0


def test_cross_type_pair_gives_identity():
    st = am.ParticleState(
        np.array([[0.0, 0.0], [0.5, 0.0]]),
        np.array([am.ATTRACTIVE, am.REPULSIVE]),
        np.array([0, 1]),
    )
    m = am.build_update_matrix(st, P)
    np.testing.assert_array_equal(m.entries, np.eye(2))


def test_matrix_symmetric_exactly_and_rows_sum_to_one():
    rng = np.random.default_rng(0)
    for seed in range(5):
        pos = rng.uniform(-2, 2, (40, 2))
        act = rng.choice([am.INACTIVE, am.ATTRACTIVE, am.REPULSIVE], 40)
        st = am.ParticleState(pos, act, np.repeat([0, 1], 20))
        m = am.build_update_matrix(st, P)
        np.testing.assert_array_equal(m.entries, m.entries.T)
        # diagonal is defined as 1 - off-diagonal row sum: recompute bit-identically
        off = m.entries.copy()
        np.fill_diagonal(off, 0.0)
        np.testing.assert_array_equal(np.diag(m.entries), 1.0 - off.sum(axis=1))
        np.testing.assert_allclose(m.entries.sum(axis=1), 1.0, atol=1e-14)


def test_matrix_sign_structure():
    rng = np.random.default_rng(5)
    pos = rng.uniform(-2, 2, (30, 2))
    act = rng.choice([am.ATTRACTIVE, am.REPULSIVE], 30)
    st = am.ParticleState(pos, act, np.repeat([0, 1], 15))
    m = am.build_update_matrix(st, P)
    off = m.entries.copy()
    np.fill_diagonal(off, 0.0)
    for i in range(m.size):
        for j in range(m.size):
            if i == j:
                continue
            if m.modes[i] != m.modes[j]:
                assert off[i, j] == 0.0
            elif m.modes[i] == am.ATTRACTIVE:
                assert off[i, j] >= 0.0
            else:
                assert off[i, j] <= 0.0


def test_matrix_excludes_inactive_by_default_and_can_include():
    st = am.ParticleState(
        np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.5]]),
        np.array([am.ATTRACTIVE, am.ATTRACTIVE, am.INACTIVE]),
        np.array([0, 0, 1]),
    )
    m = am.build_update_matrix(st, P)
    assert m.size == 2
    m_all = am.build_update_matrix(st, P, include_inactive=True)
    assert m_all.size == 3
    # the inactive particle is a decoupled eigenvalue-1 fixed point
    ev = am.symmetric_eigenvalues(m_all)
    assert np.sum(np.isclose(ev, 1.0, atol=1e-12)) >= 2


# ---------------------------------------------------------------- eigenvalues


def test_two_particle_attractive_spectrum():
    ev = am.symmetric_eigenvalues(am.build_update_matrix(two_attractive(1.0), P))
    np.testing.assert_allclose(ev, [1 - 2 * C_ATT, 1.0], atol=1e-10)


def test_three_particle_equal_coupling_spectrum():
    ev = am.symmetric_eigenvalues(am.build_update_matrix(equilateral(0.8, am.ATTRACTIVE), P))
    np.testing.assert_allclose(ev, [1 - 3 * C_ATT, 1 - 3 * C_ATT, 1.0], atol=1e-10)


def test_identity_spectrum():
    np.testing.assert_array_equal(am.symmetric_eigenvalues(np.eye(5)), np.ones(5))


def test_eigenvalues_sorted_ascending():
    for m in episode_matrices(am.BOTH, "oscillation", seeds=(3,)):
        ev = am.symmetric_eigenvalues(m)
        assert np.all(np.diff(ev) >= 0)


def test_eigenpair_residuals_meet_contract():
    # residual ||Mv - lambda v|| <= 1e-10 ||M|| per pair
    rng = np.random.default_rng(1)
    for _ in range(10):
        a = rng.normal(size=(12, 12))
        m = 0.5 * (a + a.T)
        lam, vec = np.linalg.eigh(m)
        norm = np.linalg.norm(m, 2)
        for k in range(12):
            res = np.linalg.norm(m @ vec[:, k] - lam[k] * vec[:, k])
            assert res <= 1e-10 * max(norm, 1.0)


def char_poly_coefficients(m):
    """Faddeev-LeVerrier recursion: det(xI - M) coefficients, leading 1."""
    n = m.shape[0]
    coeffs = [1.0]
    b = np.zeros_like(m)
    c = 1.0
    for k in range(1, n + 1):
        b = m @ b + c * np.eye(n)
        c = -np.trace(m @ b) / k
        coeffs.append(c)
    return np.array(coeffs)


def test_eigenvalues_match_characteristic_polynomial_oracle():
    rng = np.random.default_rng(2)
    for _ in range(20):
        # random symmetric 5x5 with rows summing to 1, small off-diagonals
        a = rng.uniform(-0.05, 0.05, (5, 5))
        off = np.triu(a, 1)
        m = off + off.T
        np.fill_diagonal(m, 1.0 - m.sum(axis=1))
        got = am.symmetric_eigenvalues(m)
        want = np.sort(np.roots(char_poly_coefficients(m)).real)
        np.testing.assert_allclose(got, want, atol=1e-8)


def test_trace_identity():
    for m in episode_matrices(am.BOTH, "oscillation", seeds=(7,)):
        if m.size == 0:
            continue
        ev = am.symmetric_eigenvalues(m)
        tr = float(np.trace(m.entries))
        assert ev.sum() == pytest.approx(tr, rel=1e-10)


# ---------------------------------------------------------------- gershgorin


def test_gershgorin_two_particle_attractive():
    lo, hi = am.gershgorin_bounds(am.build_update_matrix(two_attractive(1.0), P))
    assert lo == pytest.approx(1 - 2 * C_ATT, rel=1e-12)
    assert hi == pytest.approx(1.0, rel=1e-12)


def test_gershgorin_repulsive_pair():
    m = np.array([[1.00375, -0.00375], [-0.00375, 1.00375]])
    lo, hi = am.gershgorin_bounds(m)
    assert lo == pytest.approx(1.0, rel=1e-12)
    assert hi == pytest.approx(1.0075, rel=1e-12)


def test_gershgorin_identity():
    assert am.gershgorin_bounds(np.eye(4)) == (1.0, 1.0)


def test_gershgorin_contains_spectrum_on_episode_stream():
    for kind, iset in (
        ("collapse_all", am.ATTRACTIVE_ONLY),
        ("activate_one_side", am.REPULSIVE_ONLY),
        ("oscillation", am.BOTH),
    ):
        for m in episode_matrices(iset, kind, seeds=(0,)):
            if m.size == 0:
                continue
            ev = am.symmetric_eigenvalues(m)
            lo, hi = am.gershgorin_bounds(m)
            assert ev.min() >= lo - 1e-9
            assert ev.max() <= hi + 1e-9


# ---------------------------------------------------------------- log determinant


def test_log_determinant_identity_is_zero():
    assert am.log_determinant([1.0, 1.0, 1.0]) == 0.0


def test_log_determinant_values():
    assert am.log_determinant([0.985, 1.0]) == pytest.approx(math.log(0.985), rel=1e-12)
    assert am.log_determinant([1.0, 1.0075]) == pytest.approx(math.log(1.0075), rel=1e-12)


def test_log_determinant_flags_nonpositive():
    assert math.isnan(am.log_determinant([-0.1, 1.0]))
    assert math.isnan(am.log_determinant([0.0, 1.0]))


# ---------------------------------------------------------------- one-sided spectra


def test_attractive_only_spectrum_bounded_above_by_one():
    for m in episode_matrices(am.ATTRACTIVE_ONLY, "collapse_all", seeds=(0,)):
        ev = am.symmetric_eigenvalues(m)
        if ev.size:
            assert ev.max() <= 1 + 1e-9
            assert am.log_determinant(ev) <= 1e-9


def test_repulsive_only_spectrum_bounded_below_by_one():
    for m in episode_matrices(am.REPULSIVE_ONLY, "activate_one_side", seeds=(0,)):
        ev = am.symmetric_eigenvalues(m)
        if ev.size:
            assert ev.min() >= 1 - 1e-9
            assert am.log_determinant(ev) >= -1e-9


# ---------------------------------------------------------------- linearization


def test_update_matrix_reproduces_integration_step():
    rng = np.random.default_rng(13)
    for _ in range(25):
        n = int(rng.integers(2, 9))
        while True:
            pos = rng.uniform(-0.7, 0.7, (n, 2))
            iu = np.triu_indices(n, 1)
            d = pos[iu[0]] - pos[iu[1]]
            dist = np.sqrt((d**2).sum(-1))
            if np.all(dist > P.cutoff_inner + 0.05) and np.all(dist < P.cutoff_outer - 0.05):
                break
        act = rng.choice([am.ATTRACTIVE, am.REPULSIVE], n)
        st = am.ParticleState(pos, act, np.zeros(n, dtype=int))
        m = am.build_update_matrix(st, P)
        nxt = am.integrate_step(st, am.compute_forces(st, P), P)
        for axis in (0, 1):
            pred = m.entries @ st.positions[m.index_map, axis]
            np.testing.assert_allclose(pred, nxt.positions[m.index_map, axis], atol=1e-12)


# ---------------------------------------------------------------- histogram


def records_from(matrices):
    return [am.analyze_matrix(m, t) for t, m in enumerate(matrices)]


def test_histogram_empty_stream():
    h = am.spectrum_histogram([], bins=10, value_range=(0.9, 1.1))
    assert np.all(h.counts == 0)
    assert h.underflow == 0 and h.overflow == 0


def test_histogram_attractive_mass_below_one():
    recs = records_from(episode_matrices(am.ATTRACTIVE_ONLY, "collapse_all", seeds=(0,)))
    h = am.spectrum_histogram(recs, bins=100, value_range=(0.0, 1.0 + 1e-9))
    assert h.overflow == 0


def test_histogram_repulsive_mass_above_one():
    recs = records_from(episode_matrices(am.REPULSIVE_ONLY, "activate_one_side", seeds=(0,)))
    h = am.spectrum_histogram(recs, bins=100, value_range=(1.0 - 1e-9, 3.0))
    assert h.underflow == 0


def test_histogram_tallies_and_text():
    recs = [
        am.SpectrumRecord(
            t=0,
            eigenvalues=np.array([0.5, 0.95, 1.05, 7.0]),
            gershgorin_lo=0.0,
            gershgorin_hi=8.0,
            log_det=0.0,
            n_attractive=2,
            n_repulsive=2,
        )
    ]
    h = am.spectrum_histogram(recs, bins=2, value_range=(0.9, 1.1))
    assert h.underflow == 1 and h.overflow == 1
    assert h.counts.tolist() == [1, 1]
    text = h.to_text()
    lines = text.strip().splitlines()
    assert lines[1] == "# underflow 1"
    assert lines[2] == "# overflow 1"
    assert len(lines) == 5
    center, count = lines[3].split()
    assert float(center) == pytest.approx(0.95)
    assert count == "1"


def test_histogram_validation():
    with pytest.raises(ValueError):
        am.spectrum_histogram([], bins=0)
    with pytest.raises(ValueError):
        am.spectrum_histogram([], value_range=(1.0, 0.9))


def test_analyze_state_summarizes_modes():
    st = am.ParticleState(
        np.array([[0.0, 0.0], [1.0, 0.0], [0.2, 0.7]]),
        np.array([am.ATTRACTIVE, am.ATTRACTIVE, am.REPULSIVE]),
        np.array([0, 0, 1]),
    )
    rec = am.analyze_state(st, P, t=17)
    assert rec.t == 17
    assert rec.n_active == 3
    assert rec.n_attractive == 2 and rec.n_repulsive == 1
    assert rec.gershgorin_lo <= rec.eigenvalues.min() + 1e-9
    assert rec.gershgorin_hi >= rec.eigenvalues.max() - 1e-9
