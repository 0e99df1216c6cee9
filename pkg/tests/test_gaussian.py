import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gausscat.errors import (
    BadModeIndex,
    DimensionMismatch,
    HasCrossCorrelations,
    NonSymmetricError,
    NumericalFailure,
    ZNotPositiveDefinite,
)
from gausscat.gaussian import (
    ClassKind,
    CovarianceMatrix,
    OpKind,
    Ordering,
    PureStateParam,
    SymplecticOp,
    apply_symplectic,
    balanced_state,
    beam_splitter,
    classify,
    direct_sum_vacuum,
    from_blocks,
    identity_op,
    is_block,
    is_physical,
    partial_trace,
    partial_transpose,
    phase_rotation,
    pure_from_zy,
    reorder,
    single_mode_squeezer,
    symmetric_state,
    symplectic_eigenvalues,
    symplectic_eigenvalues_invariants,
    symplectic_form,
    tmsv,
    to_block,
    vacuum,
    validate_physical,
)
from gausscat.numerics import seeded_rng
from gausscat.sampling import random_block_state, random_pure_param
from oracles import symplectic_spectrum_complex, tmsv_matrix

seeds = st.integers(0, 2**32 - 1)
angles = st.floats(-math.pi, math.pi)


def random_passive(rng, n=2):
    op = identity_op(n)
    for _ in range(3):
        i, j = rng.choice(n, size=2, replace=False)
        op = beam_splitter(rng.uniform(-math.pi, math.pi), (int(i), int(j)), n) @ op
        op = phase_rotation(rng.uniform(-math.pi, math.pi), int(rng.integers(n)), n) @ op
    return op


def random_physical(rng, n=2):
    """Thermal state dressed with random squeezers and passive ops."""
    m = np.diag(np.repeat(rng.uniform(1.0, 3.0, size=n), 2))
    op = random_passive(rng, n)
    for k in range(n):
        op = single_mode_squeezer(rng.uniform(-1.0, 1.0), k, n) @ op
    op = random_passive(rng, n) @ op
    return apply_symplectic(CovarianceMatrix(m), op)


class TestContainers:
    @given(seeds)
    def test_reorder_round_trip_bit_exact(self, seed):
        rng = seeded_rng(seed)
        a = rng.normal(size=(4, 4))
        cov = CovarianceMatrix(a + a.T)
        back = reorder(reorder(cov, Ordering.XXPP), Ordering.XPXP)
        assert np.array_equal(back.matrix, cov.matrix)

    def test_xxpp_view(self):
        m = tmsv(0.5).xxpp()
        c, s = math.cosh(1.0), math.sinh(1.0)
        assert np.allclose(m, [[c, s, 0, 0], [s, c, 0, 0], [0, 0, c, -s], [0, 0, -s, c]])

    def test_small_asymmetry_is_symmetrized(self):
        m = np.eye(4)
        m[0, 1] = 5e-10
        cov = CovarianceMatrix(m)
        assert np.array_equal(cov.matrix, cov.matrix.T)

    def test_large_asymmetry_rejected(self):
        m = np.eye(4)
        m[0, 1] = 1e-6
        with pytest.raises(NonSymmetricError):
            CovarianceMatrix(m)

    def test_immutable(self):
        cov = vacuum(2)
        with pytest.raises(ValueError):
            cov.matrix[0, 0] = 3.0

    def test_bad_shape(self):
        with pytest.raises(DimensionMismatch):
            CovarianceMatrix(np.eye(3))


class TestSpectrum:
    def test_vacuum(self):
        assert np.allclose(symplectic_eigenvalues(vacuum(2)), 1.0)

    def test_tmsv_matches_hand_written(self):
        assert np.allclose(tmsv(0.7).xpxp(), tmsv_matrix(0.7))

    @given(seeds)
    def test_matches_complex_oracle(self, seed):
        cov = random_physical(seeded_rng(seed))
        assert np.allclose(symplectic_eigenvalues(cov), symplectic_spectrum_complex(cov.xpxp()), rtol=1e-9)

    @given(seeds)
    def test_three_modes(self, seed):
        cov = random_physical(seeded_rng(seed), 3)
        assert np.allclose(symplectic_eigenvalues(cov), symplectic_spectrum_complex(cov.xpxp()), rtol=1e-9)

    @given(seeds)
    def test_invariant_formula_agrees(self, seed):
        cov = random_physical(seeded_rng(seed))
        assert np.allclose(symplectic_eigenvalues_invariants(cov), symplectic_eigenvalues(cov), rtol=1e-7)

    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_partial_transpose_of_tmsv(self, r):
        nu = symplectic_eigenvalues(partial_transpose(tmsv(r)))
        assert abs(nu[0] - math.exp(-2 * r)) <= 1e-14 * math.exp(2 * r)


class TestPhysicality:
    def test_tmsv_physical(self):
        rep = validate_physical(tmsv(1.0))
        assert rep.is_physical and rep.positive_definite
        assert abs(rep.nu_minus - 1.0) < 1e-12

    def test_squashed_vacuum_unphysical(self):
        rep = validate_physical(CovarianceMatrix(0.5 * np.eye(4)))
        assert not rep.is_physical
        assert abs(rep.nu_minus - 0.5) < 1e-14

    def test_boundary_band_accepted(self):
        assert is_physical(CovarianceMatrix((1 - 5e-10) * np.eye(4)))
        assert not is_physical(CovarianceMatrix((1 - 5e-9) * np.eye(4)))

    def test_not_positive_definite(self):
        rep = validate_physical(CovarianceMatrix(np.diag([1.0, 1.0, 1.0, -1.0])))
        assert not rep.is_physical and not rep.positive_definite

    @given(seeds)
    def test_symplectic_ops_preserve_physicality(self, seed):
        rng = seeded_rng(seed)
        cov = random_physical(rng)
        op = single_mode_squeezer(rng.uniform(-2, 2), 0) @ random_passive(rng)
        assert is_physical(apply_symplectic(cov, op))


class TestOperations:
    @given(seeds)
    def test_partial_transpose_is_involution(self, seed):
        cov = random_physical(seeded_rng(seed))
        assert np.array_equal(partial_transpose(partial_transpose(cov)).matrix, cov.matrix)

    @given(angles)
    def test_beam_splitter_inverse(self, theta):
        prod = beam_splitter(theta) @ beam_splitter(-theta)
        assert np.max(np.abs(prod.matrix - np.eye(4))) <= 1e-12

    def test_beam_splitter_convention(self):
        c, s = math.cos(0.3), math.sin(0.3)
        m = beam_splitter(0.3).matrix
        assert np.allclose(m[::2, ::2], [[c, s], [-s, c]])
        assert np.allclose(m[1::2, 1::2], [[c, s], [-s, c]])

    @given(seeds)
    def test_passive_preserves_spectrum(self, seed):
        rng = seeded_rng(seed)
        cov = random_physical(rng)
        out = apply_symplectic(cov, random_passive(rng))
        assert np.allclose(symplectic_eigenvalues(out), symplectic_eigenvalues(cov), atol=1e-8)

    def test_op_kinds(self):
        assert beam_splitter(0.2).kind is OpKind.PASSIVE
        assert single_mode_squeezer(0.2).kind is OpKind.ACTIVE
        assert (single_mode_squeezer(0.2) @ beam_splitter(0.1)).kind is OpKind.ACTIVE

    def test_non_symplectic_rejected(self):
        with pytest.raises(NumericalFailure):
            SymplecticOp(np.diag([2.0, 2.0, 1.0, 1.0]))

    def test_passive_must_be_orthogonal(self):
        with pytest.raises(NumericalFailure):
            SymplecticOp(single_mode_squeezer(0.5).matrix, kind=OpKind.PASSIVE)

    def test_inverse(self):
        op = single_mode_squeezer(0.4, 1) @ beam_splitter(0.3) @ phase_rotation(1.1, 0)
        assert np.allclose((op @ op.inverse()).matrix, np.eye(4), atol=1e-12)

    def test_mode_errors(self):
        with pytest.raises(BadModeIndex):
            beam_splitter(0.1, (0, 2))
        with pytest.raises(BadModeIndex):
            beam_splitter(0.1, (1, 1))
        with pytest.raises(BadModeIndex):
            phase_rotation(0.1, -1)
        with pytest.raises(DimensionMismatch):
            apply_symplectic(vacuum(3), beam_splitter(0.1))
        with pytest.raises(DimensionMismatch):
            beam_splitter(0.1) @ beam_splitter(0.1, (0, 1), 3)

    def test_ancilla_round_trip(self):
        cov = tmsv(0.3)
        big = direct_sum_vacuum(cov, 1)
        assert big.n_modes == 3
        assert np.array_equal(partial_trace(big, [0, 1]).matrix, cov.matrix)
        assert np.allclose(partial_trace(big, [2]).matrix, np.eye(2))

    def test_partial_trace_of_tmsv_is_thermal(self):
        red = partial_trace(tmsv(0.5), [1])
        assert np.allclose(red.matrix, math.cosh(1.0) * np.eye(2))

    def test_tmsv_synthesis_sign_convention(self):
        # S(r) + S(-r) followed by B(pi/4) gives TMSV(-r) with this
        # beam-splitter sign; swapping the squeezers gives TMSV(r)
        r = 0.6
        sq = single_mode_squeezer(r, 0) @ single_mode_squeezer(-r, 1)
        out = apply_symplectic(vacuum(2), beam_splitter(math.pi / 4) @ sq)
        assert np.allclose(out.matrix, tmsv(-r).matrix, atol=1e-12)
        sq = single_mode_squeezer(-r, 0) @ single_mode_squeezer(r, 1)
        out = apply_symplectic(vacuum(2), beam_splitter(math.pi / 4) @ sq)
        assert np.allclose(out.matrix, tmsv(r).matrix, atol=1e-12)


class TestBlocksAndClasses:
    def test_to_block_rejects_cross_terms(self):
        cov = apply_symplectic(tmsv(0.5), phase_rotation(0.3, 0))
        assert not is_block(cov)
        with pytest.raises(HasCrossCorrelations) as err:
            to_block(cov)
        assert err.value.max_entry > 0.1

    def test_from_blocks_round_trip(self):
        cx = np.array([[3.0, 1.0], [1.0, 2.0]])
        cp = np.array([[2.0, -0.5], [-0.5, 1.5]])
        blk = to_block(from_blocks(cx, cp))
        assert np.array_equal(blk.cx, cx) and np.array_equal(blk.cp, cp)

    def test_classify_symmetric(self):
        cls = classify(symmetric_state(2.0, 1.5, -1.2))
        assert cls.kind is ClassKind.SYMMETRIC and not cls.balanced
        assert cls.params == (2.0, 1.5, -1.2)

    def test_classify_balanced(self):
        cls = classify(balanced_state(3.0, 2.0, 1.5))
        assert cls.kind is ClassKind.BALANCED and cls.params == (3.0, 2.0, 1.5)

    def test_symmetric_balanced_overlap(self):
        cls = classify(balanced_state(2.0, 2.0, 1.5))
        assert cls.kind is ClassKind.SYMMETRIC and cls.balanced

    def test_tmsv_is_both(self):
        cls = classify(tmsv(1.0))
        assert cls.kind is ClassKind.SYMMETRIC and cls.balanced
        a, b, c = cls.balanced_params
        assert np.allclose([a, b, c], [math.cosh(2), math.cosh(2), math.sinh(2)])

    def test_classify_block_and_general(self):
        assert classify(random_block_state(seeded_rng(0)).to_covariance()).kind is ClassKind.BLOCK
        cov = apply_symplectic(tmsv(0.5), phase_rotation(0.3, 0))
        assert classify(cov).kind is ClassKind.GENERAL

    def test_classification_tolerance(self):
        assert classify(symmetric_state(2.0, 1.0, -0.5)).kind is ClassKind.SYMMETRIC
        m = symmetric_state(2.0, 1.0, -0.5).xpxp().copy()
        m[0, 0] += 5e-10
        assert classify(CovarianceMatrix(m)).kind is ClassKind.SYMMETRIC
        m[0, 0] += 1e-8
        assert classify(CovarianceMatrix(m)).kind is ClassKind.BLOCK


class TestPureFromZY:
    def test_vacuum(self):
        out = pure_from_zy(PureStateParam(np.eye(2), np.zeros((2, 2))))
        assert np.allclose(out.matrix, np.eye(4))

    def test_product_of_squeezed(self):
        out = pure_from_zy(PureStateParam(np.diag([math.e**2, math.e**-2]), np.zeros((2, 2))))
        expect = np.diag([math.e**2, math.e**-2, math.e**-2, math.e**2])
        assert np.allclose(out.xxpp(), expect)

    def test_rotated_z_is_tmsv_up_to_beam_splitter(self):
        u = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)
        z = u @ np.diag([math.e**2, math.e**-2]) @ u.T
        out = pure_from_zy(PureStateParam(z, np.zeros((2, 2))))
        assert np.allclose(out.matrix, tmsv(1.0).matrix, atol=1e-12)
        sq = single_mode_squeezer(-1.0, 0) @ single_mode_squeezer(1.0, 1)
        built = apply_symplectic(vacuum(2), beam_splitter(math.pi / 4) @ sq)
        assert np.allclose(out.matrix, built.matrix, atol=1e-12)

    def test_requires_positive_z(self):
        with pytest.raises(ZNotPositiveDefinite):
            pure_from_zy(PureStateParam(np.diag([1.0, -1.0]), np.zeros((2, 2))))

    def test_random_outputs_are_pure(self):
        rng = seeded_rng(11)
        for _ in range(1000):
            out = pure_from_zy(random_pure_param(rng))
            assert abs(np.linalg.det(out.matrix) - 1.0) <= 1e-8
            assert np.allclose(symplectic_eigenvalues(out), 1.0, atol=1e-8)
