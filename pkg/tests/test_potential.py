import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gausscat.errors import Unphysical, UnsupportedClass
from gausscat.gaussian import (
    BlockState,
    apply_symplectic,
    balanced_state,
    phase_rotation,
    symmetric_state,
    tmsv,
    vacuum,
)
from gausscat.measures import aux_h, eof, eof_balanced, eof_symmetric
from gausscat.numerics import seeded_rng
from gausscat.potential import (
    FAMILY_ANCILLA,
    FAMILY_PASSIVE,
    CircuitSpec,
    mode_swap,
    potential_closed,
    potential_search,
    potential_upper_bound,
    symmetric_saturating_circuit,
)
from gausscat.sampling import random_balanced_params, random_block_state, random_symmetric_params
from oracles import h_mp, tmsv_eof_coshsinh

seeds = st.integers(0, 2**32 - 1)
GAP_STATE = (2.0, 1.5, -0.5)


class TestBounds:
    @pytest.mark.parametrize("r", [0.25, 1.0])
    def test_tmsv_upper_equals_eof(self, r):
        assert potential_upper_bound(tmsv(r)) == pytest.approx(tmsv_eof_coshsinh(r), abs=1e-10)

    def test_vacuum(self):
        rep = potential_search(vacuum(2), grid=4, restarts=1)
        assert rep.lower == 0.0 and rep.upper == 0.0 and rep.closed == 0.0 and rep.gap == 0.0
        assert rep.chain_ok

    def test_gap_state_closed(self):
        cov = symmetric_state(*GAP_STATE)
        # SoF = -ln sqrt(0.5 * 1.5): only a - c1 = 0.5 lies below one
        expected = h_mp(math.sqrt(0.5))
        assert potential_upper_bound(cov) == pytest.approx(expected, abs=1e-12)
        assert potential_closed(cov) == pytest.approx(0.1973718899, abs=1e-9)

    def test_balanced_closed_is_eof(self):
        a, b, c = 2.0, 3.0, 1.8
        assert potential_closed(balanced_state(a, b, c)) == eof_balanced(a, b, c).value

    def test_closed_unavailable_for_general_block(self):
        s = BlockState(np.array([[3.0, 1.0], [1.0, 2.0]]), np.array([[2.0, -0.5], [-0.5, 1.5]]))
        with pytest.raises(UnsupportedClass):
            potential_closed(s.to_covariance())


class TestCircuits:
    def test_mode_swap_is_involution(self):
        sw = mode_swap(0, 2, 3)
        assert np.allclose((sw @ sw).matrix, np.eye(6))

    @given(seeds)
    def test_fast_path_matches_symplectic_op(self, seed):
        rng = seeded_rng(seed)
        cov = random_block_state(rng).to_covariance()
        for spec in (
            CircuitSpec(FAMILY_PASSIVE, tuple(rng.uniform(0, math.pi, 2))),
            CircuitSpec(FAMILY_ANCILLA, tuple(rng.uniform(0, math.pi, 2))),
            CircuitSpec(FAMILY_ANCILLA, tuple(rng.uniform(0, math.pi, 2)), swap=True),
        ):
            assert np.allclose(spec.apply_fast(cov.xpxp()), spec.apply(cov).xpxp(), atol=1e-12)

    def test_ancilla_circuit_is_passive(self):
        op = CircuitSpec(FAMILY_ANCILLA, (0.3, 1.1)).op()
        assert op.n_modes == 3
        assert np.allclose(op.matrix @ op.matrix.T, np.eye(6))

    def test_swap_matches_shifted_angle(self):
        cov = symmetric_state(*GAP_STATE)
        a = CircuitSpec(FAMILY_ANCILLA, (0.4, 0.9), swap=True).apply(cov)
        b = CircuitSpec(FAMILY_ANCILLA, (0.4 + math.pi / 2, 0.9)).apply(cov)
        assert eof(a).value == pytest.approx(eof(b).value, abs=1e-12)

    def test_describe(self):
        d = CircuitSpec(FAMILY_ANCILLA, (0.1, 0.2)).describe()
        assert d["family"] == FAMILY_ANCILLA and d["n_modes"] == 3
        assert d["params"]["theta_mid"] == pytest.approx(math.pi / 2)

    def test_saturating_circuit_on_gap_state(self):
        cov = symmetric_state(*GAP_STATE)
        out, op = symmetric_saturating_circuit(cov)
        assert op.n_modes == 3
        assert eof(out).value == pytest.approx(0.1973718899, abs=1e-9)

    def test_saturating_circuit_identity_on_tmsv(self):
        cov = tmsv(0.5)
        out, op = symmetric_saturating_circuit(cov)
        assert np.array_equal(out.xpxp(), cov.xpxp())

    @given(seeds)
    def test_saturation_on_random_symmetric(self, seed):
        cov = symmetric_state(*random_symmetric_params(seeded_rng(seed)))
        out, _ = symmetric_saturating_circuit(cov)
        assert abs(eof(out).value - potential_upper_bound(cov)) < 1e-9

    def test_saturating_circuit_needs_symmetric(self):
        with pytest.raises(UnsupportedClass):
            symmetric_saturating_circuit(balanced_state(2.0, 3.0, 1.8))


class TestSearch:
    def test_gap_state(self):
        cov = symmetric_state(*GAP_STATE)
        rep = potential_search(cov, grid=8, restarts=1)
        assert rep.lower == pytest.approx(0.1973718899, abs=1e-7)
        assert rep.best_circuit.family == FAMILY_ANCILLA
        assert rep.gap == pytest.approx(0.0, abs=1e-7)
        assert rep.chain_ok
        assert rep.lower - eof_symmetric(*GAP_STATE).value > 0.14

    def test_gap_state_without_ancilla(self):
        cov = symmetric_state(*GAP_STATE)
        rep = potential_search(cov, grid=8, restarts=1, ancillas=0)
        assert set(rep.by_family) == {FAMILY_PASSIVE}
        assert rep.lower == pytest.approx(eof_symmetric(*GAP_STATE).value, abs=1e-9)
        assert rep.gap > 0.14

    def test_tmsv_prefers_identity(self):
        rep = potential_search(tmsv(0.5), grid=4, restarts=1)
        assert rep.best_circuit.family == FAMILY_PASSIVE
        assert rep.lower == pytest.approx(tmsv_eof_coshsinh(0.5), abs=1e-10)

    def test_cross_correlated_state_has_no_upper(self):
        cov = apply_symplectic(symmetric_state(*GAP_STATE), phase_rotation(0.3, 0))
        rep = potential_search(cov, grid=4, restarts=1)
        assert rep.upper is None and rep.gap is None
        assert rep.lower >= eof(cov).value - 1e-12

    @pytest.mark.parametrize("seed", range(8))
    def test_chain_on_random_block_states(self, seed):
        s = random_block_state(seeded_rng(seed))
        rep = potential_search(s.to_covariance(), grid=4, restarts=1)
        assert rep.chain_ok
        assert eof(s.to_covariance()).value - 1e-12 <= rep.lower <= rep.upper + 1e-7

    @settings(max_examples=10)
    @given(seeds)
    def test_balanced_never_exceeds_closed(self, seed):
        a, b, c = random_balanced_params(seeded_rng(seed))
        rep = potential_search(balanced_state(a, b, c), grid=4, restarts=1)
        assert rep.lower <= eof_balanced(a, b, c).value + 1e-7

    @settings(max_examples=10)
    @given(seeds)
    def test_symmetric_search_reaches_closed(self, seed):
        a, c1, c2 = random_symmetric_params(seeded_rng(seed))
        rep = potential_search(symmetric_state(a, c1, c2), grid=4, restarts=1)
        assert rep.lower == pytest.approx(rep.closed, abs=1e-7)

    def test_ancilla_never_lowers_result(self):
        s = random_block_state(seeded_rng(77)).to_covariance()
        without = potential_search(s, grid=4, restarts=1, ancillas=0)
        with_one = potential_search(s, grid=4, restarts=1, ancillas=1)
        assert with_one.lower >= without.lower - 1e-12
        assert with_one.upper == without.upper

    @pytest.mark.parametrize("seed", range(4))
    def test_circuits_never_raise_upper_bound(self, seed):
        cov = random_block_state(seeded_rng(200 + seed)).to_covariance()
        upper = potential_upper_bound(cov)
        rng = seeded_rng(seed)
        for _ in range(20):
            family = FAMILY_ANCILLA if rng.random() < 0.5 else FAMILY_PASSIVE
            # real beam splitters keep the block form, so SoF stays defined
            params = (rng.uniform(0, math.pi), 0.0 if family == FAMILY_PASSIVE else rng.uniform(0, math.pi))
            out = CircuitSpec(family, params).apply(cov)
            assert potential_upper_bound(out) <= upper + 1e-7

    def test_errors(self):
        with pytest.raises(UnsupportedClass):
            potential_search(vacuum(3))
        with pytest.raises(UnsupportedClass):
            potential_search(tmsv(0.2), ancillas=2)
        with pytest.raises(Unphysical):
            potential_search(symmetric_state(2.0, 1.5, 0.5))

    def test_upper_matches_h_of_sof_for_tmsv(self):
        assert potential_upper_bound(tmsv(0.75)) == pytest.approx(aux_h(math.exp(-1.5)), abs=1e-12)
