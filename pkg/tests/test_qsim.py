"""Simulation-core tests: gates, sampling, dephasing channels, expectations."""
from math import cos, pi, sqrt

import numpy as np
import pytest

from lgadroit.qsim import (
    GATE_MATRICES,
    DensityMatrix,
    InvariantError,
    Observable,
    PAULI_Z,
    StateVector,
    ValidationError,
    apply_1q,
    apply_cnot,
    apply_channel,
    dephase,
    expect,
    index_to_string,
    kraus_completeness_defect,
    matrices_equal_up_to_phase,
    sample_counts,
    sample_shots,
    sigma_theta,
    states_equal,
    string_to_index,
)

SQ2 = 1 / sqrt(2)
THETA = -3 * pi / 4


# ---------------------------------------------------------------------------
# Statevector gates
# ---------------------------------------------------------------------------

def test_x_flips_zero_to_one():
    out = apply_1q(StateVector.zero(1), GATE_MATRICES["X"], 0)
    assert states_equal(out.amplitudes, [0, 1])


def test_h_squared_is_identity():
    s = apply_1q(apply_1q(StateVector.zero(1), GATE_MATRICES["H"], 0), GATE_MATRICES["H"], 0)
    np.testing.assert_allclose(s.amplitudes, [1, 0], atol=1e-12)


def test_eq9_sequence_prepares_minus_eigenstate_of_sigma_theta():
    # H T H Sdg H applied to |1> lands on the -1 eigenstate of sigma_theta,
    # up to global phase (frozen oracle: numpy eigendecomposition)
    s = StateVector.from_bits("1")
    for kind in ("H", "Sdg", "H", "T", "H"):  # time order of the matrix product
        s = apply_1q(s, GATE_MATRICES[kind], 0)
    w, v = np.linalg.eigh(sigma_theta(THETA))
    minus = v[:, np.argmin(w)]
    assert states_equal(s.amplitudes, minus)


def test_apply_1q_rejects_non_unitary():
    with pytest.raises(ValidationError):
        apply_1q(StateVector.zero(1), np.array([[1, 0], [0, 2.0]]), 0)


def test_apply_1q_rejects_bad_qubit():
    with pytest.raises(ValidationError):
        apply_1q(StateVector.zero(2), GATE_MATRICES["X"], 2)


def test_cnot_flips_target_on_set_control():
    s = StateVector.from_bits("10")  # Q0=1, Q1=0
    out = apply_cnot(s, 0, 1)
    assert states_equal(out.amplitudes, StateVector.from_bits("11").amplitudes)


def test_cnot_makes_bell_state_with_mixed_target():
    s = apply_cnot(apply_1q(StateVector.zero(2), GATE_MATRICES["H"], 0), 0, 1)
    np.testing.assert_allclose(np.abs(s.amplitudes) ** 2, [0.5, 0, 0, 0.5], atol=1e-12)


def test_cnot_rejects_equal_operands():
    with pytest.raises(ValidationError):
        apply_cnot(StateVector.zero(2), 1, 1)


def test_h_conjugation_swaps_cnot_roles():
    # (H x H) CNOT(c=0,t=1) (H x H) == CNOT(c=1,t=0) as 4x4 matrices
    h = GATE_MATRICES["H"]
    hh = np.kron(h, h)

    def cnot_matrix(control, target):
        m = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            j = i ^ (((i >> control) & 1) << target)
            m[j, i] = 1
        return m

    np.testing.assert_allclose(hh @ cnot_matrix(0, 1) @ hh, cnot_matrix(1, 0), atol=1e-12)


def test_norm_preserved_along_random_walk():
    rng = np.random.default_rng(3)
    s = StateVector.zero(3)
    kinds = list(GATE_MATRICES)
    for _ in range(200):
        if rng.random() < 0.3:
            q = int(rng.integers(3))
            t = int(rng.choice([x for x in range(3) if x != q]))
            s = apply_cnot(s, q, t)
        else:
            s = apply_1q(s, GATE_MATRICES[str(rng.choice(kinds))], int(rng.integers(3)))
        assert abs(np.sum(np.abs(s.amplitudes) ** 2) - 1) < 1e-12


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def test_sampling_ground_state_all_zero_string():
    counts = sample_shots(StateVector.zero(5), 8192, seed=1)
    assert counts == {"00000": 8192}


def test_sampling_plus_on_q2_within_5_sigma():
    s = apply_1q(StateVector.zero(5), GATE_MATRICES["H"], 2)
    counts = sample_shots(s, 8192, seed=2)
    ones = sum(c for bits, c in counts.items() if bits[2] == "1")
    sigma = sqrt(0.25 / 8192)
    assert abs(ones / 8192 - 0.5) < 5 * sigma


def test_sampling_deterministic_for_fixed_seed():
    s = apply_1q(StateVector.zero(5), GATE_MATRICES["H"], 0)
    assert sample_shots(s, 8192, seed=42) == sample_shots(s, 8192, seed=42)


def test_sampling_frequencies_converge_to_born_rule():
    rng = np.random.default_rng(5)
    s = StateVector.zero(5)
    for q in range(5):
        s = apply_1q(s, GATE_MATRICES[str(rng.choice(["H", "T", "X", "S"]))], q)
        t = int(rng.integers(5))
        if t != q:
            s = apply_cnot(s, q, t)
    r = 8192
    counts = sample_shots(s, r, seed=6)
    assert sum(counts.values()) == r
    for i, p in enumerate(s.probabilities()):
        got = counts.get(index_to_string(i, 5), 0) / r
        sigma = sqrt(max(p * (1 - p), 1e-12) / r)
        assert abs(got - p) <= 5 * sigma


def test_sample_counts_rejects_zero_shots():
    with pytest.raises(ValidationError):
        sample_counts(np.array([1.0]), 1, 0, seed=0)


def test_outcome_string_convention_is_q0_first():
    assert index_to_string(1, 5) == "10000"
    assert index_to_string(4, 5) == "00100"
    assert string_to_index("00100") == 4


# ---------------------------------------------------------------------------
# Dephasing channels
# ---------------------------------------------------------------------------

def test_dephase_fixes_diagonal_states():
    dm = DensityMatrix(1, np.diag([0.3, 0.7]).astype(complex))
    out = dephase(dm, 0, basis_angle=0.0)
    np.testing.assert_allclose(out.matrix, dm.matrix, atol=1e-12)


def test_dephase_kills_plus_state_coherence():
    plus = apply_1q(StateVector.zero(1), GATE_MATRICES["H"], 0).density()
    out = dephase(plus, 0, basis_angle=0.0)
    np.testing.assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-12)


def test_dephase_theta_fixes_its_eigenstate():
    rho_theta = DensityMatrix(1, (np.eye(2) - sigma_theta(THETA)) / 2)
    out = dephase(rho_theta, 0, basis_angle=THETA)
    np.testing.assert_allclose(out.matrix, rho_theta.matrix, atol=1e-12)


def test_dephase_idempotent_and_trace_preserving():
    rng = np.random.default_rng(9)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    dm = DensityMatrix(2, rho / np.trace(rho))
    once = dephase(dm, 1, basis_angle=0.7)
    twice = dephase(once, 1, basis_angle=0.7)
    np.testing.assert_allclose(once.matrix, twice.matrix, atol=1e-12)
    assert abs(np.trace(once.matrix) - 1) < 1e-12


def test_dephase_kraus_projectors_complete():
    for theta in (0.0, 0.7, THETA):
        s = sigma_theta(theta)
        defect = kraus_completeness_defect([(np.eye(2) + s) / 2, (np.eye(2) - s) / 2])
        assert defect < 1e-12


# ---------------------------------------------------------------------------
# Expectations
# ---------------------------------------------------------------------------

def test_expect_sigma_z_on_one_state():
    dm = StateVector.from_bits("1").density()
    assert expect(dm, Observable(1, PAULI_Z)) == pytest.approx(-1.0, abs=1e-12)


def test_expect_sigma_theta_on_its_minus_eigenstate():
    rho = DensityMatrix(1, (np.eye(2) - sigma_theta(THETA)) / 2)
    assert expect(rho, Observable(1, sigma_theta(THETA))) == pytest.approx(-1.0, abs=1e-12)


def test_expect_sigma_z_on_rho_theta_matches_prediction():
    # <sigma_z> = +1/sqrt(2); the operational read is the negative, -1/sqrt(2)
    rho = DensityMatrix(1, (np.eye(2) - sigma_theta(THETA)) / 2)
    assert expect(rho, Observable(1, PAULI_Z)) == pytest.approx(1 / sqrt(2), abs=1e-12)
    assert -expect(rho, Observable(1, PAULI_Z)) == pytest.approx(cos(THETA), abs=1e-12)


def test_expect_rejects_dimension_mismatch():
    with pytest.raises(ValidationError):
        expect(DensityMatrix.ground(2), Observable(1, PAULI_Z))


def test_pauli_built_observable_has_unit_eigenvalues():
    obs = Observable.from_factors(3, {0: PAULI_Z, 2: sigma_theta(0.4)})
    w = np.linalg.eigvalsh(obs.matrix)
    np.testing.assert_allclose(np.abs(w), 1.0, atol=1e-12)


# ---------------------------------------------------------------------------
# Invariant enforcement
# ---------------------------------------------------------------------------

def test_statevector_rejects_norm_drift():
    with pytest.raises(InvariantError):
        StateVector(1, np.array([1.0, 1.0]))


def test_density_matrix_rejects_bad_trace_and_negativity():
    with pytest.raises(InvariantError):
        DensityMatrix(1, np.diag([0.5, 0.6]).astype(complex))
    with pytest.raises(InvariantError):
        DensityMatrix(1, np.diag([1.5, -0.5]).astype(complex))


def test_apply_channel_preserves_trace():
    dm = apply_1q(StateVector.zero(2), GATE_MATRICES["H"], 0).density()
    k0 = np.array([[1, 0], [0, sqrt(0.6)]], dtype=complex)
    k1 = np.array([[0, sqrt(0.4)], [0, 0]], dtype=complex)
    out = apply_channel(dm, [((k0, 0),), ((k1, 0),)])
    assert abs(np.trace(out.matrix) - 1) < 1e-12


def test_every_device_gate_is_unitary():
    from lgadroit.qsim import is_unitary, rotation_to_theta_basis

    for kind, m in GATE_MATRICES.items():
        assert is_unitary(m), kind
    assert is_unitary(rotation_to_theta_basis(THETA))


def test_matrices_equal_up_to_phase():
    h = GATE_MATRICES["H"]
    assert matrices_equal_up_to_phase(np.exp(0.3j) * h, h)
    assert not matrices_equal_up_to_phase(GATE_MATRICES["X"], h)
