"""Matrix levels over concrete spaces: norms, axioms, subquotients,
completely bounded maps, and functional level behavior."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from herzlab.pnorms import NormEstimate, OptimConfig, PExponent, opnorm_exact
from herzlab.spaces import (
    ConcretePOpSpace,
    LinearSpaceMap,
    MatrixLevelElement,
    Subquotient,
    check_axioms,
    direct_sum,
    functional_levels,
    kwapien_check,
    level_norm,
    pcb_norm,
)
from herzlab.spaces import _map_level_lower

CFG = OptimConfig(seed=11, restarts=16)


def random_subspace(p, d, k, seed):
    rng = np.random.default_rng(seed)
    mats = [
        rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        for _ in range(k)
    ]
    return ConcretePOpSpace(PExponent(p), mats)


class TestSpaceConstruction:
    def test_full_space_dims(self):
        sp = ConcretePOpSpace.full(PExponent(2), 3)
        assert sp.d == 3 and sp.dim == 9

    def test_rejects_dependent_basis(self):
        a = np.eye(2)
        with pytest.raises(ValueError, match="dependent"):
            ConcretePOpSpace(PExponent(2), [a, 2 * a])

    def test_rejects_mixed_shapes(self):
        with pytest.raises(ValueError, match="2x2"):
            ConcretePOpSpace(PExponent(2), [np.eye(2), np.eye(3)])

    def test_realize_matches_level_one_amplification(self):
        sp = random_subspace(1.5, 3, 2, seed=5)
        c = np.array([1.0 + 2.0j, -0.5])
        x = sp.element(c)
        assert x.level == 1
        np.testing.assert_allclose(x.amplified(), sp.realize(c))

    def test_coefficient_shape_checks(self):
        sp = ConcretePOpSpace.full(PExponent(2), 2)
        with pytest.raises(ValueError, match="shape"):
            MatrixLevelElement(sp, np.zeros((2, 3, 4)))
        with pytest.raises(ValueError, match="length"):
            MatrixLevelElement(sp, np.zeros((2, 2, 3)))


class TestLevelNorms:
    def test_identity_norm_one(self):
        for p in (1.5, 2.0, 3.0):
            sp = ConcretePOpSpace.full(PExponent(p), 2)
            est = level_norm(sp.element(np.eye(2).ravel()), CFG)
            assert est.contains(1.0, slack=1e-9)
            assert est.width < 1e-8

    def test_amplified_block_layout(self):
        # block (i, j) of the amplification is the matrix with coefficients c_ij
        sp = ConcretePOpSpace.full(PExponent(2), 2)
        coeffs = np.zeros((2, 2, 4), dtype=complex)
        coeffs[0, 1] = [1.0, 2.0, 3.0, 4.0]
        amp = sp.element(coeffs).amplified()
        np.testing.assert_allclose(amp[0:2, 2:4], [[1.0, 2.0], [3.0, 4.0]])
        assert np.abs(amp[2:4, :]).max() == 0.0

    @given(st.integers(0, 2 ** 31), st.sampled_from([1.5, 2.0, 3.0]))
    @settings(max_examples=12, deadline=None)
    def test_direct_sum_realizes_the_max(self, seed, p):
        sp = random_subspace(p, 2, 2, seed=seed % 1000)
        rng = np.random.default_rng(seed)
        u = sp.element(rng.standard_normal((1, 1, 2)) + 1j * rng.standard_normal((1, 1, 2)))
        v = sp.element(rng.standard_normal((2, 2, 2)) + 1j * rng.standard_normal((2, 2, 2)))
        eu, ev = level_norm(u, CFG), level_norm(v, CFG)
        es = level_norm(direct_sum(u, v), CFG)
        lo = max(eu.lower, ev.lower)
        hi = max(eu.upper, ev.upper)
        assert es.upper >= lo - 1e-8
        assert es.lower <= hi + 1e-8

    def test_direct_sum_needs_shared_space(self):
        a = ConcretePOpSpace.full(PExponent(2), 2)
        b = ConcretePOpSpace.full(PExponent(2), 2)
        with pytest.raises(ValueError, match="one space"):
            direct_sum(a.element(np.eye(2).ravel()), b.element(np.eye(2).ravel()))


class TestAxioms:
    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_full_space_passes(self, p):
        sp = ConcretePOpSpace.full(PExponent(p), 2)
        rep = check_axioms(sp, trials=6, cfg=CFG)
        assert rep.verdict == "pass"
        assert rep.violations == 0
        assert rep.worst_sum_gap <= 1e-6

    def test_random_subspace_passes(self):
        sp = random_subspace(2.0, 3, 2, seed=9)
        rep = check_axioms(sp, trials=6, cfg=CFG)
        assert rep.verdict == "pass"

    def test_compression_bound_is_reported(self):
        sp = ConcretePOpSpace.full(PExponent(1.5), 2)
        rep = check_axioms(sp, trials=4, cfg=CFG)
        # the three-factor bound is rarely tight, so the residual is negative
        assert rep.worst_compression_residual <= 1e-6

    def test_trial_count_validated(self):
        sp = ConcretePOpSpace.full(PExponent(2), 2)
        with pytest.raises(ValueError, match="trial"):
            check_axioms(sp, trials=0)


class TestSubquotient:
    def test_quotient_norm_without_kernel_is_plain_norm(self):
        sq = Subquotient(PExponent(3), np.eye(3))
        v = np.array([1.0, -2.0, 2.0])
        expected = np.sum(np.abs(v) ** 3) ** (1 / 3)
        assert sq.quotient_norm(v) == pytest.approx(expected)

    def test_kernel_vectors_have_zero_quotient_norm(self):
        ker = np.array([[1.0], [1.0], [0.0]])
        sq = Subquotient(PExponent(2), np.eye(3), ker)
        assert sq.quotient_norm(np.array([3.0, 3.0, 0.0])) <= 1e-6

    def test_quotient_norm_never_exceeds_plain_norm(self):
        ker = np.array([[1.0], [0.0], [1.0]])
        sq = Subquotient(PExponent(1.5), np.eye(3), ker)
        rng = np.random.default_rng(2)
        for _ in range(5):
            v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            assert sq.quotient_norm(v) <= np.sum(np.abs(v) ** 1.5) ** (1 / 1.5) + 1e-9

    def test_kernel_must_sit_inside_subspace(self):
        sub = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        ker = np.array([[0.0], [0.0], [1.0]])
        with pytest.raises(ValueError, match="kernel"):
            Subquotient(PExponent(2), sub, ker)

    def test_dependent_subspace_rejected(self):
        sub = np.array([[1.0, 2.0], [0.0, 0.0], [1.0, 2.0]])
        with pytest.raises(ValueError, match="dependent"):
            Subquotient(PExponent(2), sub)


class TestKwapien:
    def test_full_space_at_two_attains_the_norm(self):
        sq = Subquotient(PExponent(2), np.eye(3))
        a = np.array([[1.0, 1.0], [0.0, 1.0]])
        rep = kwapien_check(sq, a, CFG)
        golden = (1 + math.sqrt(5)) / 2
        assert rep.verdict == "pass"
        assert rep.sup_lower == pytest.approx(golden, abs=1e-6)
        assert abs(rep.margin) <= 1e-6

    def test_ones_matrix_attains_two_for_fractional_p(self):
        # the all-ones 2x2 matrix has norm 2 on every l_p^2, attained at
        # the uniform vector; replication realizes it in any subquotient
        # containing a copy of the ground space
        sq = Subquotient(PExponent(1.5), np.eye(2))
        rep = kwapien_check(sq, np.ones((2, 2)), CFG)
        assert rep.sup_lower == pytest.approx(2.0, abs=1e-6)
        assert rep.verdict == "pass"

    def test_quotient_case_keeps_nonnegative_margin(self):
        sub = np.eye(3)[:, :2]
        ker = np.array([[1.0], [1.0], [0.0]])
        sq = Subquotient(PExponent(3), np.eye(3), ker)
        del sub
        rep = kwapien_check(sq, np.array([[1.0, 0.5], [0.5, 1.0]]), CFG)
        assert rep.verdict == "pass"
        assert rep.margin >= -1e-6

    def test_rejects_rectangular_coefficients(self):
        sq = Subquotient(PExponent(2), np.eye(2))
        with pytest.raises(ValueError, match="square"):
            kwapien_check(sq, np.ones((2, 3)), CFG)


class TestCompletelyBoundedMaps:
    def test_identity_map_has_cb_norm_one(self):
        sp = ConcretePOpSpace.full(PExponent(1.5), 2)
        est = pcb_norm(LinearSpaceMap.identity(sp), n_max=2, cfg=CFG)
        assert est.lower == pytest.approx(1.0, abs=1e-8)
        assert math.isinf(est.upper)

    def test_levels_are_nondecreasing(self):
        sp = ConcretePOpSpace.full(PExponent(2), 2)
        rng = np.random.default_rng(4)
        m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        est = pcb_norm(LinearSpaceMap(sp, sp, m), n_max=3, cfg=CFG)
        values = [v for _, v in est.levels]
        for a, b in zip(values, values[1:]):
            assert b >= a - 1e-9

    def test_transpose_map_gains_a_full_factor_at_level_two(self):
        # the swap-operator witness shows the transpose on 2x2 matrices
        # has completely bounded norm at least 2 at p = 2, despite being
        # an isometry at level one
        sp = ConcretePOpSpace.full(PExponent(2), 2)
        perm = np.zeros((4, 4))
        for a in range(2):
            for b in range(2):
                perm[2 * b + a, 2 * a + b] = 1.0  # sends E_ab to E_ba
        tmap = LinearSpaceMap(sp, sp, perm)
        warm = np.zeros((2, 2, 4), dtype=complex)
        for i in range(2):
            for j in range(2):
                warm[i, j, 2 * j + i] = 1.0  # block (i, j) holds E_ji
        val, _ = _map_level_lower(tmap, 2, CFG, warm=warm)
        assert val >= 2.0 - 1e-6

    def test_map_shape_validation(self):
        sp2 = ConcretePOpSpace.full(PExponent(2), 2)
        with pytest.raises(ValueError, match="map matrix"):
            LinearSpaceMap(sp2, sp2, np.eye(3))


class TestFunctionalLevels:
    def test_trace_functional_is_exact_at_every_level(self):
        sp = ConcretePOpSpace.full(PExponent(2), 2)
        rep = functional_levels(sp, np.eye(2).ravel(), n_max=3, cfg=CFG)
        for est in rep.level_estimates:
            assert est.lower == pytest.approx(2.0, abs=1e-6)
            assert est.upper == pytest.approx(2.0, abs=1e-6)
        assert rep.verdict == "pass"
        assert rep.deviation <= 1e-6

    def test_coordinate_functional_has_norm_one(self):
        for p in (1.5, 3.0):
            sp = ConcretePOpSpace.full(PExponent(p), 2)
            mu = np.zeros(4)
            mu[0] = 1.0  # picks the (1, 1) entry
            rep = functional_levels(sp, mu, n_max=2, cfg=CFG)
            assert rep.base.lower == pytest.approx(1.0, abs=1e-6)
            assert rep.base.upper == pytest.approx(1.0, abs=1e-6)

    def test_zero_functional(self):
        sp = ConcretePOpSpace.full(PExponent(2), 2)
        rep = functional_levels(sp, np.zeros(4), n_max=2, cfg=CFG)
        assert rep.base.upper == 0.0
        assert rep.verdict == "pass"

    def test_functional_length_checked(self):
        sp = ConcretePOpSpace.full(PExponent(2), 2)
        with pytest.raises(ValueError, match="coordinates"):
            functional_levels(sp, np.ones(3), cfg=CFG)

    def test_level_brackets_stay_consistent_on_subspace(self):
        sp = random_subspace(1.5, 2, 2, seed=21)
        mu = np.array([1.0 + 0.5j, -0.3])
        rep = functional_levels(sp, mu, n_max=3, cfg=CFG)
        assert rep.deviation <= 2 * max(e.width for e in rep.level_estimates) + 1e-12
        assert rep.spread <= 1e-3
