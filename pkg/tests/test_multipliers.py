"""Multiplier and Schur-multiplier brackets: exact families, oracles,
and the finite-group collapse of the four norm variants."""

import numpy as np
import pytest

from herzlab.groups import GroupFunction, cyclic_group, symmetric_group
from herzlab.herz import abelian_characters, unitary_characters
from herzlab.multipliers import (
    CoefficientPair,
    CrossMultiplierReport,
    SchurSymbol,
    cb_multiplier_norm,
    cross_multiplier_check,
    herz_schur_norm,
    m0_upper_bound,
    multiplier_norm,
    psi_amplify,
    schur_norm,
    translation_symbol,
)
from herzlab.pnorms import OptimConfig, brackets_overlap

CFG = OptimConfig(seed=29, restarts=16)


class TestSchurSymbol:
    def test_requires_square(self):
        with pytest.raises(ValueError, match="square"):
            SchurSymbol(np.ones((2, 3)))

    def test_requires_finite(self):
        with pytest.raises(ValueError, match="finite"):
            SchurSymbol(np.array([[1.0, np.inf], [0.0, 1.0]]))

    def test_apply_is_entrywise(self):
        psi = SchurSymbol(np.array([[1.0, 2.0], [3.0, 4.0]]))
        t = np.array([[1.0, 1.0], [0.0, 2.0]])
        np.testing.assert_allclose(psi.apply(t), [[1.0, 2.0], [0.0, 8.0]])

    def test_translation_symbol_pattern(self):
        g = cyclic_group(4)
        u = np.array([10.0, 11.0, 12.0, 13.0])
        psi = translation_symbol(g, u).values
        for s in range(4):
            for t in range(4):
                assert psi[s, t] == u[g.mul(s, g.inv(t))]


class TestFactorization:
    def test_constant_symbol_is_exactly_one(self):
        est = schur_norm(SchurSymbol(np.ones((3, 3))), 1.5, CFG)
        assert est.lower == pytest.approx(1.0, abs=1e-9)
        assert est.upper == pytest.approx(1.0, abs=1e-9)

    def test_rank_one_formula(self):
        b = np.array([1.0, -2.0, 0.5])
        a = np.array([3.0, 1.0, 2.0])
        est = schur_norm(SchurSymbol(np.outer(b, a)), 1.5, CFG)
        assert est.lower == pytest.approx(6.0, abs=1e-9)
        assert est.upper == pytest.approx(6.0, abs=1e-9)

    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_diagonal_truncation_is_one(self, p):
        est = schur_norm(SchurSymbol(np.eye(4)), p, CFG)
        assert est.lower == pytest.approx(1.0, abs=1e-9)
        assert est.upper == pytest.approx(1.0, abs=1e-9)

    def test_dimension_cap_below_rank(self):
        with pytest.raises(ValueError, match="rank"):
            schur_norm(SchurSymbol(np.eye(3)), 2, CFG, d_max=2)

    def test_zero_symbol(self):
        est = schur_norm(SchurSymbol(np.zeros((3, 3))), 2, CFG)
        assert est.lower == est.upper == 0.0

    def test_submultiplicative_on_products(self):
        rng = np.random.default_rng(47)
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        ea = schur_norm(SchurSymbol(a), 1.5, CFG)
        eb = schur_norm(SchurSymbol(b), 1.5, CFG)
        eab = schur_norm(SchurSymbol(a * b), 1.5, CFG)
        assert eab.lower <= ea.upper * eb.upper + 5e-2

    def test_m0_witness_certifies_its_value(self):
        g = cyclic_group(3)
        rng = np.random.default_rng(53)
        u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        value, pair = m0_upper_bound(g, u, 1.5, cfg=CFG)
        assert isinstance(pair, CoefficientPair)
        assert pair.value() == pytest.approx(value, rel=1e-12)
        assert pair.residual(translation_symbol(g, u).values) <= 1e-9

    def test_m0_constant_function(self):
        g = symmetric_group(3)
        value, pair = m0_upper_bound(g, np.ones(6), 2, cfg=CFG)
        assert value == pytest.approx(1.0, abs=1e-9)
        assert pair.d == 1


class TestMultiplierNorm:
    def test_unit_function_is_isometric(self):
        g = cyclic_group(4)
        for p in (1.5, 2, 3):
            est = multiplier_norm(g, np.ones(4), p, CFG)
            assert est.contains(1.0, slack=1e-9)
            assert est.width <= 1e-9

    @pytest.mark.parametrize("name", ["Z_4", "S_3"])
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_characters_are_isometric(self, name, p):
        g = cyclic_group(4) if name == "Z_4" else symmetric_group(3)
        for chi in unitary_characters(g):
            est = multiplier_norm(g, chi, p, CFG)
            assert est.contains(1.0, slack=1e-6)
            assert est.width <= 1e-6

    def test_point_mass_two_point_oracle(self):
        # Z_2 at p = 2: the ratio max(|c_0|, 0) / max(|c_0 + c_1|, |c_0 - c_1|)
        # is maximized at c_1 = 0; brute force the two-point problem
        g = cyclic_group(2)
        delta = np.array([1.0, 0.0])
        grid = np.linspace(-1, 1, 41)
        brute = 0.0
        for c0 in grid:
            for c1 in grid:
                den = max(abs(c0 + c1), abs(c0 - c1))
                if den > 1e-9:
                    brute = max(brute, abs(c0) / den)
        est = multiplier_norm(g, delta, 2, CFG)
        assert est.lower >= brute - 1e-6
        assert est.contains(1.0, slack=1e-6)

    def test_peak_value_is_a_floor(self):
        g = symmetric_group(3)
        rng = np.random.default_rng(59)
        u = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        est = multiplier_norm(g, u, 1.5, CFG)
        assert est.lower >= np.abs(u).max() - 1e-9

    def test_fourier_oracle_at_two(self):
        g = cyclic_group(5)
        rng = np.random.default_rng(61)
        u = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        target = np.abs(np.fft.fft(u)).sum() / 5
        est = multiplier_norm(g, u, 2, CFG)
        assert est.lower == pytest.approx(target, abs=1e-6)
        assert est.upper == pytest.approx(target, abs=1e-6)

    def test_zero_multiplier(self):
        est = multiplier_norm(cyclic_group(3), np.zeros(3), 2, CFG)
        assert est.lower == est.upper == 0.0


class TestCbMultiplier:
    def test_unit_function_levels(self):
        g = cyclic_group(3)
        est = cb_multiplier_norm(g, np.ones(3), 1.5, n_max=3, cfg=CFG)
        for _, value in est.levels:
            assert value == pytest.approx(1.0, abs=1e-8)
        assert est.upper == pytest.approx(1.0, abs=1e-9)

    def test_character_levels(self):
        g = cyclic_group(4)
        chi = abelian_characters(g)[1]
        est = cb_multiplier_norm(g, chi, 3, n_max=2, cfg=CFG)
        assert est.contains(1.0, slack=1e-6)
        assert est.width <= 1e-6

    def test_levels_nondecreasing(self):
        g = cyclic_group(4)
        rng = np.random.default_rng(67)
        u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        est = cb_multiplier_norm(g, u, 1.5, n_max=3, cfg=CFG)
        values = [v for _, v in est.levels]
        for a, b in zip(values, values[1:]):
            assert b >= a - 1e-9

    def test_factorization_meets_levels_at_two(self):
        # at p = 2 on an abelian group both sides pin the same value
        g = cyclic_group(3)
        rng = np.random.default_rng(71)
        u = rng.standard_normal(3)
        value, _ = m0_upper_bound(g, u, 2, cfg=CFG)
        est = cb_multiplier_norm(g, u, 2, n_max=2, cfg=CFG)
        assert abs(value - est.lower) <= 5e-2

    def test_level_count_validated(self):
        with pytest.raises(ValueError, match="level"):
            cb_multiplier_norm(cyclic_group(2), np.ones(2), 2, n_max=0, cfg=CFG)


class TestHerzSchur:
    def test_unit_and_character(self):
        g = cyclic_group(4)
        assert herz_schur_norm(g, np.ones(4), 1.5, CFG).contains(1.0, slack=1e-9)
        chi = abelian_characters(g)[1]
        est = herz_schur_norm(g, chi, 3, CFG)
        assert est.contains(1.0, slack=1e-6)
        assert est.width <= 1e-6

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_agrees_with_cb_bracket_on_permutation_group(self, p):
        g = symmetric_group(3)
        rng = np.random.default_rng(int(10 * p))
        u = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        fs = herz_schur_norm(g, u, p, CFG)
        cb = cb_multiplier_norm(g, u, p, n_max=2, cfg=CFG)
        assert brackets_overlap(fs, cb, tol=5e-2)


class TestAmplification:
    def test_identity_amplification(self):
        psi = SchurSymbol(np.array([[1.0, 2.0], [3.0, 4.0]]))
        np.testing.assert_array_equal(psi_amplify(psi, 1).values, psi.values)

    def test_constant_stays_one(self):
        est = schur_norm(psi_amplify(SchurSymbol(np.ones((2, 2))), 3), 2, CFG)
        assert est.contains(1.0, slack=1e-9)
        assert est.width <= 1e-9

    def test_block_structure(self):
        psi = SchurSymbol(np.array([[1.0, 2.0], [3.0, 4.0]]))
        amp = psi_amplify(psi, 2).values
        assert amp.shape == (4, 4)
        np.testing.assert_array_equal(amp[:2, 2:], 2.0 * np.ones((2, 2)))

    def test_amplified_norm_does_not_grow(self):
        rng = np.random.default_rng(73)
        base = SchurSymbol(rng.standard_normal((2, 2)))
        e1 = schur_norm(base, 1.5, CFG)
        e2 = schur_norm(psi_amplify(base, 2), 1.5, CFG)
        assert e2.lower <= e1.upper + 1e-6

    def test_factor_validated(self):
        with pytest.raises(ValueError, match="at least one"):
            psi_amplify(SchurSymbol(np.eye(2)), 0)


class TestCrossMultiplier:
    def test_unit_extension(self):
        u = GroupFunction.one(cyclic_group(2))
        rep = cross_multiplier_check(u, cyclic_group(3), 2, CFG)
        assert rep.verdict == "pass"
        assert rep.product_norm.contains(1.0, slack=1e-6)

    def test_character_extension(self):
        g = cyclic_group(3)
        chi = GroupFunction(g, abelian_characters(g)[1])
        rep = cross_multiplier_check(chi, cyclic_group(2), 1.5, CFG)
        assert rep.verdict == "pass"
        assert rep.product_norm.contains(1.0, slack=1e-6)
        assert rep.base_norm.contains(1.0, slack=1e-6)

    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_random_extension_chain(self, p):
        g = cyclic_group(2)
        rng = np.random.default_rng(79)
        u = GroupFunction(g, rng.standard_normal(2) + 1j * rng.standard_normal(2))
        rep = cross_multiplier_check(u, cyclic_group(3), p, CFG)
        assert rep.verdict == "pass"
        assert rep.low_margin >= 0
        assert rep.high_margin >= 0

    def test_order_cap(self):
        u = GroupFunction.one(symmetric_group(3))
        with pytest.raises(ValueError, match="24"):
            cross_multiplier_check(u, cyclic_group(5), 2, CFG)


class TestCollapse:
    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_four_brackets_mutually_overlap(self, p):
        g = cyclic_group(4)
        rng = np.random.default_rng(83)
        u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        m = multiplier_norm(g, u, p, CFG)
        cb = cb_multiplier_norm(g, u, p, n_max=2, cfg=CFG)
        fs = herz_schur_norm(g, u, p, CFG)
        m0, _ = m0_upper_bound(g, u, p, cfg=CFG)
        lows = [m.lower, cb.lower, fs.lower]
        ups = [m.upper, cb.upper, fs.upper, m0]
        assert max(lows) <= min(ups) + 5e-2

    def test_plain_norm_never_exceeds_cb(self):
        g = cyclic_group(3)
        rng = np.random.default_rng(89)
        u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        m = multiplier_norm(g, u, 1.5, CFG)
        cb = cb_multiplier_norm(g, u, 1.5, n_max=2, cfg=CFG)
        assert m.lower <= cb.upper + 1e-9
