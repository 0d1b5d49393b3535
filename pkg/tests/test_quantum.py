"""Primitive layer: states, operators, POVMs, eigensolves, Born rule."""

import numpy as np
import pytest

from qstep.errors import (
    DimensionMismatch,
    NegativeProbability,
    NonHermitianInput,
    OrthogonalStates,
)
from qstep.quantum import (
    HermitianOperator,
    Povm,
    PureState,
    born_probabilities,
    eigendecompose,
    ground_state,
    hadamard_all,
    phase_align,
    unitary_from_generator,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


def basis_povm(d):
    eye = np.eye(d)
    return Povm(labels=tuple(range(d)), effects=tuple(np.outer(eye[k], eye[k]) for k in range(d)))


class TestPureState:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            PureState([1.0, 1.0])

    def test_rejects_scalar_dim(self):
        with pytest.raises(DimensionMismatch):
            PureState([1.0])

    def test_amplitudes_copied_and_frozen(self):
        raw = np.array([1.0 + 0j, 0.0])
        psi = PureState(raw)
        raw[0] = 5.0
        assert psi.amplitudes[0] == 1.0
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 2.0

    def test_dim(self):
        assert PureState([0.0, 0.0, 1.0]).dim == 3


class TestHermitianOperator:
    def test_rejects_nonhermitian(self):
        with pytest.raises(NonHermitianInput):
            HermitianOperator([[0.0, 1.0], [0.0, 0.0]])

    def test_rejects_rectangular(self):
        with pytest.raises(DimensionMismatch):
            HermitianOperator(np.zeros((2, 3)))

    def test_accepts_within_tolerance(self):
        m = np.array([[1.0, 0.5 + 5e-13j], [0.5, 2.0]])
        HermitianOperator(m)


class TestEigendecompose:
    def test_diagonal(self):
        pairs = eigendecompose(HermitianOperator(np.diag([-1.0, 1.0])))
        assert [p.value for p in pairs] == [-1.0, 1.0]
        np.testing.assert_allclose(pairs[0].vector.amplitudes, [1.0, 0.0], atol=1e-14)

    def test_sigma_x_phase_convention(self):
        # tied magnitudes resolve to the lowest index, made real positive
        pairs = eigendecompose(HermitianOperator(SX))
        np.testing.assert_allclose(pairs[0].value, -1.0, atol=1e-14)
        np.testing.assert_allclose(
            pairs[0].vector.amplitudes, np.array([1.0, -1.0]) / np.sqrt(2), atol=1e-14)

    def test_reconstruction(self, rng):
        a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        h = HermitianOperator(a + a.conj().T)
        pairs = eigendecompose(h)
        rebuilt = sum(p.value * np.outer(p.vector.amplitudes, p.vector.amplitudes.conj())
                      for p in pairs)
        np.testing.assert_allclose(rebuilt, h.entries, atol=1e-9)

    def test_ascending_and_orthonormal(self, rng):
        a = rng.normal(size=(6, 6))
        pairs = eigendecompose(HermitianOperator(a + a.T))
        vals = [p.value for p in pairs]
        assert vals == sorted(vals)
        v = np.column_stack([p.vector.amplitudes for p in pairs])
        np.testing.assert_allclose(v.conj().T @ v, np.eye(6), atol=1e-12)


class TestGroundState:
    def test_diagonal(self):
        energy, state, gap = ground_state(HermitianOperator(np.diag([0.0, 3.0, 5.0])))
        assert energy == 0.0
        assert gap == 3.0
        np.testing.assert_allclose(state.amplitudes, [1.0, 0.0, 0.0], atol=1e-14)

    def test_degenerate_gap_zero(self):
        # avoided-crossing point of the three-level probe: spectrum (-2, -2, 4)
        h = HermitianOperator(np.array([[2.0, 2 * np.sqrt(2), 0.0],
                                        [2 * np.sqrt(2), 0.0, 0.0],
                                        [0.0, 0.0, -2.0]]))
        energy, _, gap = ground_state(h)
        assert abs(energy + 2.0) < 1e-10
        assert gap < 1e-10


class TestUnitaryFromGenerator:
    def test_zero_generator(self):
        np.testing.assert_allclose(
            unitary_from_generator(HermitianOperator(np.zeros((2, 2)))), np.eye(2), atol=1e-14)

    def test_half_period_x_rotation(self):
        u = unitary_from_generator(HermitianOperator((np.pi / 2) * SX))
        np.testing.assert_allclose(u, -1j * SX, atol=1e-12)

    def test_closed_form_bloch_rotation(self):
        u = unitary_from_generator(HermitianOperator(0.3 * SX + 0.4 * SZ))
        expected = np.cos(0.5) * np.eye(2) - 1j * np.sin(0.5) * (0.6 * SX + 0.8 * SZ)
        np.testing.assert_allclose(u, expected, atol=1e-12)

    def test_inverse_pairing(self, rng):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        gen = a + a.conj().T
        u = unitary_from_generator(HermitianOperator(gen))
        v = unitary_from_generator(HermitianOperator(-gen))
        np.testing.assert_allclose(u @ v, np.eye(4), atol=1e-10)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-10)


class TestPovm:
    def test_requires_exactly_one_representation(self):
        with pytest.raises(ValueError):
            Povm(labels=(0, 1))

    def test_rejects_incomplete_effects(self):
        half = 0.5 * np.eye(2)
        with pytest.raises(ValueError):
            Povm(labels=(0, 1), effects=(half, 0.25 * np.eye(2)))

    def test_rejects_non_psd_effect(self):
        bad = np.array([[1.0, 0.0], [0.0, -0.2]])
        comp = np.eye(2) - bad
        with pytest.raises(ValueError):
            Povm(labels=(0, 1), effects=(bad, comp))

    def test_group_partition_enforced(self):
        with pytest.raises(ValueError):
            Povm(labels=(0, 1), index_groups=(np.array([0, 1]), np.array([1])))

    def test_grouped_matches_dense_effects(self, rng):
        groups = (np.array([0, 3]), np.array([1, 2]))
        grouped = Povm(labels=("a", "b"), index_groups=groups)
        dense = Povm(labels=("a", "b"),
                     effects=tuple(grouped.effect_matrix(k) for k in range(2)))
        states = rng.normal(size=(7, 4)) + 1j * rng.normal(size=(7, 4))
        states /= np.linalg.norm(states, axis=1, keepdims=True)
        np.testing.assert_allclose(
            grouped.probabilities_batch(states), dense.probabilities_batch(states), atol=1e-12)

    def test_hadamard_rotation_matches_dense(self, rng):
        groups = (np.array([0]), np.array([1, 2]), np.array([3]))
        grouped = Povm(labels=(0, 1, 2), index_groups=groups, pre_rotation="hadamard_all")
        dense = Povm(labels=(0, 1, 2),
                     effects=tuple(grouped.effect_matrix(k) for k in range(3)))
        states = rng.normal(size=(5, 4)) + 1j * rng.normal(size=(5, 4))
        states /= np.linalg.norm(states, axis=1, keepdims=True)
        np.testing.assert_allclose(
            grouped.probabilities_batch(states), dense.probabilities_batch(states), atol=1e-12)


def test_hadamard_all_matches_kron(rng):
    d = 8
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
    full = np.kron(np.kron(h1, h1), h1)
    states = rng.normal(size=(3, d)) + 1j * rng.normal(size=(3, d))
    np.testing.assert_allclose(hadamard_all(states), states @ full.T, atol=1e-12)


def test_hadamard_all_leaves_input_untouched():
    states = np.eye(4, dtype=complex)[:1]
    before = states.copy()
    hadamard_all(states)
    np.testing.assert_array_equal(states, before)


class TestBornProbabilities:
    def test_basis_state(self):
        p = born_probabilities(PureState([1.0, 0.0]), basis_povm(2))
        np.testing.assert_allclose(p, [1.0, 0.0], atol=1e-14)

    def test_equal_superposition(self):
        p = born_probabilities(PureState(np.array([1.0, 1.0]) / np.sqrt(2)), basis_povm(2))
        np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-14)

    def test_three_outcome_projective(self):
        vecs = [np.array([1.0, 1.0, 0.0]) / np.sqrt(2),
                np.array([1.0, -1.0, 0.0]) / np.sqrt(2),
                np.array([0.0, 0.0, 1.0])]
        povm = Povm(labels=(0, 1, 2), effects=tuple(np.outer(v, v.conj()) for v in vecs))
        psi = PureState(np.array([1.0, 1.0j, 0.0]) / np.sqrt(2))
        np.testing.assert_allclose(born_probabilities(psi, povm), [0.5, 0.5, 0.0], atol=1e-14)

    def test_global_phase_invariance(self, rng):
        povm = basis_povm(3)
        amps = rng.normal(size=3) + 1j * rng.normal(size=3)
        amps /= np.linalg.norm(amps)
        base = born_probabilities(PureState(amps), povm)
        for phi in (0.3, 1.7, 4.1):
            rotated = born_probabilities(PureState(np.exp(1j * phi) * amps), povm)
            np.testing.assert_allclose(rotated, base, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            born_probabilities(PureState([1.0, 0.0, 0.0]), basis_povm(2))

    def test_probabilities_sum_to_one(self, rng):
        povm = basis_povm(4)
        amps = rng.normal(size=4) + 1j * rng.normal(size=4)
        amps /= np.linalg.norm(amps)
        assert abs(born_probabilities(PureState(amps), povm).sum() - 1.0) < 1e-10


class TestPhaseAlign:
    def test_removes_pure_phase(self):
        out = phase_align(PureState([1.0, 0.0]), PureState([1.0j, 0.0]))
        np.testing.assert_allclose(out.amplitudes, [1.0, 0.0], atol=1e-14)

    def test_orthogonal_raises(self):
        with pytest.raises(OrthogonalStates):
            phase_align(PureState([1.0, 0.0]), PureState([0.0, 1.0]))

    def test_aligns_superposition(self):
        ref = PureState(np.array([1.0, 1.0]) / np.sqrt(2))
        out = phase_align(ref, PureState(np.exp(0.7j) * ref.amplitudes))
        np.testing.assert_allclose(out.amplitudes, ref.amplitudes, atol=1e-12)

    def test_idempotent(self, rng):
        amps = rng.normal(size=4) + 1j * rng.normal(size=4)
        amps /= np.linalg.norm(amps)
        ref = PureState(np.eye(4, dtype=complex)[0])
        once = phase_align(ref, PureState(amps))
        twice = phase_align(ref, once)
        np.testing.assert_allclose(twice.amplitudes, once.amplitudes, atol=1e-14)

    def test_norm_preserved(self, rng):
        amps = rng.normal(size=3) + 1j * rng.normal(size=3)
        amps /= np.linalg.norm(amps)
        out = phase_align(PureState([1.0, 0.0, 0.0]), PureState(amps))
        assert abs(np.linalg.norm(out.amplitudes) - 1.0) < 1e-12
