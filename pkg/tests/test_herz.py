"""Translation operators, the averaging projection, Herz algebra
brackets, and tensor compatibility on small groups."""

import numpy as np
import pytest

from herzlab.groups import (
    GroupFunction,
    cyclic_group,
    dihedral_group,
    direct_product,
    group_from_name,
    quaternion_group,
    symmetric_group,
)
from herzlab.herz import (
    abelian_characters,
    ap_norm,
    ap_upper_cheap,
    check_ap_tensor,
    check_pm_tensor,
    check_quasi_expectation,
    coproduct,
    coproduct_check,
    fell_shuffle,
    left_translations,
    pm_amplified,
    pm_matrix,
    pm_norm,
    quasi_expectation,
    right_translations,
    structure_norms,
    unitary_characters,
)
from herzlab.pnorms import OptimConfig, brackets_overlap

CFG = OptimConfig(seed=13, restarts=16)


class TestTranslations:
    @pytest.mark.parametrize("name", ["Z_5", "S_3", "Q_8"])
    def test_left_translation_is_homomorphism(self, name):
        g = group_from_name(name)
        lam = left_translations(g)
        for a in range(g.order):
            for b in range(g.order):
                np.testing.assert_array_equal(lam[a] @ lam[b], lam[g.mul(a, b)])

    def test_right_translation_is_antihomomorphism_free(self):
        # with the [u == t s] convention, rho(a) rho(b) = rho(ab)
        g = symmetric_group(3)
        rho = right_translations(g)
        for a in range(g.order):
            for b in range(g.order):
                np.testing.assert_array_equal(rho[a] @ rho[b], rho[g.mul(a, b)])

    def test_left_and_right_translations_commute(self):
        g = quaternion_group()
        lam = left_translations(g)
        rho = right_translations(g)
        for a in range(g.order):
            for b in range(g.order):
                np.testing.assert_array_equal(lam[a] @ rho[b], rho[b] @ lam[a])

    def test_single_translation_has_norm_one(self):
        g = cyclic_group(5)
        delta = np.zeros(5)
        delta[3] = 1.0
        for p in (1.5, 2, 3):
            est = pm_norm(g, delta, p, CFG)
            assert est.contains(1.0, slack=1e-9)
            assert est.width <= 1e-8

    def test_averaging_combination_has_norm_one(self):
        g = symmetric_group(3)
        est = pm_norm(g, np.full(6, 1.0 / 6.0), 1.5, CFG)
        assert est.contains(1.0, slack=1e-9)
        assert est.width <= 1e-8

    def test_circulant_oracle_at_two(self):
        # translations of a cyclic group generate circulants, whose
        # spectrum is the discrete Fourier transform of the coefficients
        g = cyclic_group(7)
        rng = np.random.default_rng(19)
        for _ in range(5):
            c = rng.standard_normal(7) + 1j * rng.standard_normal(7)
            target = np.abs(np.fft.fft(c)).max()
            est = pm_norm(g, c, 2, CFG)
            assert est.lower == pytest.approx(target, abs=1e-9)
            assert est.upper == pytest.approx(target, abs=1e-9)

    def test_pm_matrix_of_group_function(self):
        g = cyclic_group(3)
        f = GroupFunction.delta(g, 1)
        lam = left_translations(g)
        np.testing.assert_array_equal(pm_matrix(g, f), lam[1])

    def test_amplified_grid_layout(self):
        g = cyclic_group(2)
        grid = np.zeros((2, 2, 2), dtype=complex)
        grid[0, 1, 1] = 1.0
        amp = pm_amplified(g, grid)
        lam = left_translations(g)
        np.testing.assert_array_equal(amp[0:2, 2:4], lam[1])
        assert np.abs(amp[2:4, :]).max() == 0.0


class TestCoproduct:
    @pytest.mark.parametrize(
        "name", ["Z_2", "Z_5", "Z_8", "S_3", "D_4", "Q_8", "Z_2xZ_4"]
    )
    def test_translations_double_exactly(self, name):
        assert coproduct_check(group_from_name(name)) == 0.0

    def test_shuffle_is_a_permutation(self):
        g = symmetric_group(3)
        w = fell_shuffle(g)
        np.testing.assert_array_equal(w @ w.T, np.eye(36))
        assert set(np.unique(w)) == {0.0, 1.0}

    def test_coproduct_is_linear_and_unital(self):
        g = cyclic_group(4)
        np.testing.assert_allclose(coproduct(g, np.eye(4)), np.eye(16))
        a = np.arange(16.0).reshape(4, 4)
        b = np.ones((4, 4))
        np.testing.assert_allclose(
            coproduct(g, a + 2 * b), coproduct(g, a) + 2 * coproduct(g, b)
        )

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="match the group"):
            coproduct(cyclic_group(3), np.eye(4))


class TestQuasiExpectation:
    def test_fixes_left_translations_exactly(self):
        g = dihedral_group(4)
        lam = left_translations(g)
        for s in range(g.order):
            assert np.abs(quasi_expectation(g, lam[s]) - lam[s]).max() == 0.0

    def test_output_commutes_with_right_translations(self):
        g = symmetric_group(3)
        rng = np.random.default_rng(8)
        t = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        q = quasi_expectation(g, t)
        rho = right_translations(g)
        for s in range(g.order):
            np.testing.assert_allclose(rho[s] @ q, q @ rho[s], atol=1e-12)

    @pytest.mark.parametrize("name,p", [("Z_4", 1.5), ("S_3", 3.0), ("Q_8", 2.0)])
    def test_full_report(self, name, p):
        rep = check_quasi_expectation(
            group_from_name(name), p, n_max=3, cfg=OptimConfig(seed=2, restarts=8)
        )
        assert rep.verdict == "pass"
        assert rep.idempotency_defect <= 1e-12
        assert rep.commutation_defect <= 1e-12
        assert rep.translation_fix_defect <= 1e-12
        for level, value in rep.level_lower_bounds:
            assert value <= 1.0 + 1e-6
            assert value >= 1.0 - 1e-9  # attained on translation diagonals

    def test_shape_validation(self):
        with pytest.raises(ValueError, match="match the group"):
            quasi_expectation(cyclic_group(3), np.eye(4))


class TestCharacters:
    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_cyclic_characters_are_orthonormal(self, n):
        ch = abelian_characters(cyclic_group(n))
        np.testing.assert_allclose(ch @ ch.conj().T / n, np.eye(n), atol=1e-9)

    def test_product_group_characters(self):
        g = direct_product(cyclic_group(2), cyclic_group(4))
        ch = abelian_characters(g)
        assert ch.shape == (8, 8)
        prod = ch[:, g.cayley]
        np.testing.assert_allclose(
            prod, ch[:, :, None] * ch[:, None, :], atol=1e-8
        )

    def test_rejects_nonabelian(self):
        with pytest.raises(ValueError, match="abelian"):
            abelian_characters(symmetric_group(3))

    def test_sign_character_of_permutations(self):
        uc = unitary_characters(symmetric_group(3))
        assert uc.shape == (2, 6)
        values = np.sort_complex(np.round(uc.sum(axis=1), 8))
        # trivial character sums to 6, the sign character to 0
        assert set(np.round(values.real).astype(int)) == {0, 6}

    @pytest.mark.parametrize(
        "name,count", [("Z_5", 5), ("Q_8", 4), ("D_4", 4), ("S_4", 2)]
    )
    def test_character_counts(self, name, count):
        uc = unitary_characters(group_from_name(name))
        assert uc.shape[0] == count
        g = group_from_name(name)
        prod = uc[:, g.cayley]
        np.testing.assert_allclose(prod, uc[:, :, None] * uc[:, None, :], atol=1e-8)


class TestHerzNorm:
    @pytest.mark.parametrize("name", ["Z_5", "S_3", "D_4", "Q_8", "Z_2xZ_3"])
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_point_mass_and_constant_are_normalized(self, name, p):
        g = group_from_name(name)
        delta = np.zeros(g.order)
        delta[g.identity] = 1.0
        for values in (delta, np.ones(g.order)):
            est = ap_norm(g, values, p, CFG)
            assert est.contains(1.0, slack=1e-6)
            assert est.width <= 1e-6

    def test_offcenter_point_mass(self):
        g = symmetric_group(3)
        delta = np.zeros(6)
        delta[4] = 1.0
        est = ap_norm(g, delta, 1.5, CFG)
        assert est.contains(1.0, slack=1e-8)
        assert est.width <= 1e-8

    def test_fourier_coefficient_oracle_at_two(self):
        # cyclic group at p = 2: the norm is the absolute sum of the
        # discrete Fourier coefficients of the function
        rng = np.random.default_rng(23)
        for n in (3, 6):
            g = cyclic_group(n)
            for _ in range(4):
                u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                target = np.abs(np.fft.fft(u)).sum() / n
                est = ap_norm(g, u, 2, CFG)
                assert est.lower <= target + 1e-9
                assert est.upper >= target - 1e-9
                assert est.width <= 1e-6

    def test_upper_within_cheap_certificates(self):
        g = cyclic_group(6)
        rng = np.random.default_rng(29)
        for p in (1.5, 3.0):
            u = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            est = ap_norm(g, u, p, CFG)
            assert est.upper <= ap_upper_cheap(g, u, p) + 1e-9

    def test_translation_invariance(self):
        g = symmetric_group(3)
        rng = np.random.default_rng(31)
        u = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        shifted = u[g.cayley[2]]  # t -> u(2 t)
        a = ap_norm(g, u, 1.5, CFG)
        b = ap_norm(g, shifted, 1.5, CFG)
        assert brackets_overlap(a, b, tol=1e-6)

    def test_exponent_reflection_symmetry(self):
        # the algebra at p and at its conjugate exponent carry the same
        # norm after inverting the argument
        g = cyclic_group(5)
        rng = np.random.default_rng(37)
        u = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        inverted = u[[g.inv(t) for t in range(5)]]
        a = ap_norm(g, u, 1.5, CFG)
        b = ap_norm(g, inverted, 3.0, CFG)
        assert brackets_overlap(a, b, tol=1e-4)

    def test_zero_function(self):
        est = ap_norm(cyclic_group(4), np.zeros(4), 1.5, CFG)
        assert est.lower == est.upper == 0.0

    def test_group_function_input_and_mismatch(self):
        g = cyclic_group(3)
        est = ap_norm(g, GroupFunction.one(g), 2, CFG)
        assert est.contains(1.0, slack=1e-8)
        with pytest.raises(ValueError, match="different group"):
            ap_norm(g, GroupFunction.one(cyclic_group(4)), 2, CFG)

    def test_value_count_checked(self):
        with pytest.raises(ValueError, match="value per group element"):
            ap_norm(cyclic_group(4), np.ones(3), 2, CFG)


class TestStructureNorms:
    def test_scalar_grid_matches_plain_bracket(self):
        g = cyclic_group(4)
        rng = np.random.default_rng(41)
        u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        plain = ap_norm(g, u, 1.5, CFG)
        pair = structure_norms(g, u.reshape(1, 1, 4), 1.5, CFG)
        assert brackets_overlap(plain, pair.quotient, tol=1e-6)
        assert pair.verdict == "pass"

    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_two_by_two_ordering(self, p):
        g = cyclic_group(3)
        rng = np.random.default_rng(43)
        grid = rng.standard_normal((2, 2, 3)) + 1j * rng.standard_normal((2, 2, 3))
        pair = structure_norms(g, grid, p, CFG)
        assert pair.verdict == "pass"
        assert pair.dual.lower <= pair.quotient.upper + 1e-6
        assert pair.ordering_margin >= -1e-6
        assert pair.overlap_gap <= 5e-2

    def test_grid_shape_validated(self):
        with pytest.raises(ValueError, match="shape"):
            structure_norms(cyclic_group(3), np.zeros((2, 3, 3)), 2, CFG)


class TestTensorCompatibility:
    @pytest.mark.parametrize(
        "a,b", [("Z_2", "Z_3"), ("Z_4", "Z_2"), ("Z_2", "S_3")]
    )
    def test_translation_tensor_identity(self, a, b):
        rep = check_pm_tensor(group_from_name(a), group_from_name(b))
        assert rep.verdict == "pass"
        assert rep.worst_defect == 0.0

    def test_elementary_tensor_of_point_masses(self):
        g = h = cyclic_group(2)
        rep = check_ap_tensor(g, h, 1.5, pairs=2, cfg=CFG)
        assert rep.verdict == "pass"
        assert rep.worst_gap <= 5e-2

    def test_product_function_brackets_agree_at_two(self):
        rep = check_ap_tensor(cyclic_group(2), cyclic_group(2), 2.0, pairs=3, cfg=CFG)
        assert rep.verdict == "pass"
        for d in rep.details:
            assert d["gap"] <= 5e-2
