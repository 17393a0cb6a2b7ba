"""Multiplier norms over the Herz algebra and Schur multipliers.

Four quantities around one function u on a finite group: the pointwise
multiplier norm on the function algebra, its completely bounded
refinement over matrix levels, the Schur norm of the translation
symbol psi(s, t) = u(s t^{-1}), and the coefficient-factorization
bound (the infimum of sup-norm products over exact interpolations
u(t s^{-1}) = <beta(t), alpha(s)>).  On finite groups all four agree;
the estimators here stay independent so that agreement is evidence,
not construction.

The factorization engine works at the symbol's rank, where the
interpolation constraint pins the coefficient vectors up to an
invertible recombination; the search runs over that recombination,
optionally after padding to a larger dimension to admit overcomplete
systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize

from herzlab.groups import FiniteGroup, GroupFunction, direct_product
from herzlab.herz import _coerce_values, ap_upper_cheap, pm_amplified, pm_matrix
from herzlab.pnorms import (
    NormEstimate,
    OptimConfig,
    PExponent,
    lp_norm,
    opnorm_estimate,
    opnorm_upper,
    signum_power,
)

__all__ = [
    "SchurSymbol",
    "CoefficientPair",
    "schur_norm",
    "herz_schur_norm",
    "m0_upper_bound",
    "multiplier_norm",
    "cb_multiplier_norm",
    "psi_amplify",
    "cross_multiplier_check",
    "CrossMultiplierReport",
    "translation_symbol",
]


@dataclass
class SchurSymbol:
    """An entrywise multiplication symbol on square matrices."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"symbol must be square, got shape {v.shape}")
        if not (np.all(np.isfinite(v.real)) and np.all(np.isfinite(v.imag))):
            raise ValueError("symbol entries must be finite")
        self.values = v

    @property
    def index_size(self) -> int:
        return self.values.shape[0]

    def apply(self, t_mat: np.ndarray) -> np.ndarray:
        return self.values * np.asarray(t_mat, dtype=complex)


def translation_symbol(group: FiniteGroup, u: Union[GroupFunction, np.ndarray]) -> SchurSymbol:
    """Symbol psi(s, t) = u(s t^{-1}), the matrix pattern of coefficient
    multiplication on the translation span."""
    values = _coerce_values(group, u)
    n = group.order
    psi = np.empty((n, n), dtype=complex)
    for t in range(n):
        psi[:, t] = values[group.cayley[:, group.inv(t)]]
    return SchurSymbol(psi)


@dataclass
class CoefficientPair:
    """Exact interpolation system psi[i, j] = <beta_i, alpha_j>.

    Columns of ``alpha`` carry the l_p norm, columns of ``beta`` the
    conjugate norm; the certified value is the product of the two
    column-norm maxima.
    """

    p: PExponent
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.alpha, dtype=complex)
        b = np.asarray(self.beta, dtype=complex)
        if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
            raise ValueError("alpha and beta must share the vector dimension")
        self.alpha, self.beta = a, b

    @property
    def d(self) -> int:
        return self.alpha.shape[0]

    def value(self) -> float:
        return float(
            np.max(lp_norm(self.alpha, self.p.p, axis=0))
            * np.max(lp_norm(self.beta, self.p.conjugate, axis=0))
        )

    def residual(self, symbol: np.ndarray) -> float:
        return float(np.abs(self.beta.T @ self.alpha - symbol).max())


def _pair_value(pexp: PExponent, a: np.ndarray, b: np.ndarray) -> float:
    return float(
        np.max(lp_norm(a, pexp.p, axis=0)) * np.max(lp_norm(b, pexp.conjugate, axis=0))
    )


def _factor_symbol(
    symbol: np.ndarray,
    pexp: PExponent,
    d_max: int,
    cfg: OptimConfig,
) -> Tuple[float, np.ndarray, np.ndarray, List[Tuple[int, float]]]:
    """Best found exact factorization symbol = beta^T alpha.

    At the symbol's rank the factorization is unique up to an invertible
    recombination, so the search runs over that group; padded dimensions
    admit overcomplete systems.  Raises when d_max cannot reach the rank.
    """
    sym = np.asarray(symbol, dtype=complex)
    n, m = sym.shape
    w, sv, vh = np.linalg.svd(sym)
    scale = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > 1e-12 * max(scale, 1.0)))
    if rank == 0:
        z = np.zeros((1, m), dtype=complex)
        return 0.0, z, np.zeros((1, n), dtype=complex), [(1, 0.0)]
    if d_max < rank:
        raise ValueError(
            f"no exact factorization with {d_max} vectors: symbol rank is {rank}"
        )

    root = np.sqrt(sv[:rank])
    a_svd = root[:, None] * vh[:rank]
    b_svd = (w[:, :rank] * root).T

    best_val = _pair_value(pexp, a_svd, b_svd)
    best_a, best_b = a_svd, b_svd
    # identity splits put all weight on one side; they win for symbols
    # with small rows or columns
    if n <= d_max:
        val = _pair_value(pexp, sym, np.eye(n, dtype=complex))
        if val < best_val:
            best_val, best_a, best_b = val, sym.copy(), np.eye(n, dtype=complex)
    if m <= d_max:
        val = _pair_value(pexp, np.eye(m, dtype=complex), sym.T)
        if val < best_val:
            best_val, best_a, best_b = val, np.eye(m, dtype=complex), sym.T.copy()

    levels: List[Tuple[int, float]] = []
    dims = [rank]
    if min(2 * rank, d_max) > rank:
        dims.append(min(2 * rank, d_max))
    for d in dims:
        a0 = np.zeros((d, m), dtype=complex)
        b0 = np.zeros((d, n), dtype=complex)
        a0[:rank] = a_svd
        b0[:rank] = b_svd
        dim_best = _pair_value(pexp, a0, b0)
        dim_a, dim_b = a0, b0

        def cost(z: np.ndarray, a_ref=a0, b_ref=b0, dd=d) -> float:
            g = (z[: dd * dd] + 1j * z[dd * dd :]).reshape(dd, dd)
            try:
                ga = np.linalg.solve(g, a_ref)
            except np.linalg.LinAlgError:
                return math.inf
            if not np.all(np.isfinite(ga.real)):
                return math.inf
            return _pair_value(pexp, ga, g.T @ b_ref)

        eye = np.eye(d, dtype=complex)
        z0 = np.concatenate([eye.real.ravel(), eye.imag.ravel()])
        res = minimize(
            cost,
            z0,
            method="Powell",
            options={"maxiter": 3, "maxfev": 40 * 2 * d * d, "ftol": 1e-10},
        )
        if res.fun < dim_best:
            g = (res.x[: d * d] + 1j * res.x[d * d :]).reshape(d, d)
            dim_a = np.linalg.solve(g, a0)
            dim_b = g.T @ b0
            dim_best = float(res.fun)
        levels.append((d, dim_best))
        if dim_best < best_val:
            best_val, best_a, best_b = dim_best, dim_a, dim_b

    resid = float(np.abs(best_b.T @ best_a - sym).max())
    if resid > 1e-9 * max(1.0, scale):
        raise AssertionError(
            f"factorization drifted off the symbol (residual {resid:g})"
        )
    return best_val, best_a, best_b, levels


def schur_norm(
    psi: SchurSymbol,
    p: Union[PExponent, float],
    cfg: Optional[OptimConfig] = None,
    d_max: Optional[int] = None,
    extra_tests: Optional[List[np.ndarray]] = None,
) -> NormEstimate:
    """Certified bracket for the Schur multiplication norm of a symbol.

    Lower bound: ratio ||psi o T|| / ||T|| over matrix units (exact),
    rank-one and generalized-permutation test matrices (exact
    denominators), random matrices, caller-supplied structured tests,
    and a short polish.  Upper bound: the best exact interpolation
    system found by the factorization engine.
    """
    cfg = cfg or OptimConfig()
    pexp = p if isinstance(p, PExponent) else PExponent(p)
    n = psi.index_size
    if d_max is None:
        d_max = 2 * n
    if not np.any(np.abs(psi.values) > 0):
        return NormEstimate(0.0, 0.0, "exact", method="zero-symbol")

    upper, alpha, beta, levels = _factor_symbol(psi.values, pexp, d_max, cfg)

    # matrix units: psi o E_ij = psi_ij E_ij with ||E_ij|| = 1
    lower = float(np.abs(psi.values).max())
    rng = cfg.rng("schur-lower")
    light = cfg.light("schur-lower")

    def ratio(t_mat: np.ndarray) -> float:
        den = opnorm_upper(t_mat, pexp)
        if den < 1e-13:
            return 0.0
        return opnorm_estimate(psi.apply(t_mat), pexp, light).lower / den

    cands = []
    y = signum_power(rng.standard_normal(n) + 1j * rng.standard_normal(n), 1.0)
    x = signum_power(rng.standard_normal(n) + 1j * rng.standard_normal(n), 1.0)
    cands.append(np.outer(y, x))  # rank one with unimodular entries
    perm = rng.permutation(n)
    gp = np.zeros((n, n), dtype=complex)
    gp[perm, np.arange(n)] = np.exp(2j * np.pi * rng.random(n))
    cands.append(gp)  # generalized permutation, norm exactly one
    cands.append(np.ones((n, n), dtype=complex))
    cands.append(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    if extra_tests:
        cands.extend(np.asarray(t, dtype=complex) for t in extra_tests)

    best_t = None
    for t_mat in cands:
        v = ratio(t_mat)
        if v > lower:
            lower, best_t = v, t_mat

    if upper - lower > 1e-10:
        if best_t is None:
            i, j = np.unravel_index(int(np.argmax(np.abs(psi.values))), (n, n))
            best_t = np.zeros((n, n), dtype=complex)
            best_t[i, j] = 1.0
        size = n * n

        def neg(z: np.ndarray) -> float:
            return -ratio((z[:size] + 1j * z[size:]).reshape(n, n))

        res = minimize(
            neg,
            np.concatenate([best_t.real.ravel(), best_t.imag.ravel()]),
            method="Powell",
            options={"maxiter": 2, "maxfev": 20 * size, "ftol": 1e-10},
        )
        lower = max(lower, -float(res.fun))

    upper = max(upper, lower)
    est = NormEstimate(
        min(lower, upper),
        upper,
        "factorization",
        method="symbol-factorization",
        lower_witness=best_t,
    )
    est.levels = levels
    return est


def herz_schur_norm(
    group: FiniteGroup,
    u: Union[GroupFunction, np.ndarray],
    p: Union[PExponent, float],
    cfg: Optional[OptimConfig] = None,
) -> NormEstimate:
    """Schur bracket of the translation symbol of a function.

    Translation patterns themselves make good test matrices for this
    symbol (entrywise multiplication maps the pattern of c to that of
    c * u), so they are passed along as structured candidates.
    """
    cfg = cfg or OptimConfig()
    values = _coerce_values(group, u)
    structured = [
        pm_matrix(group, c)
        for c in _dual_multiplier_candidates(group, values, cfg)
    ]
    return schur_norm(
        translation_symbol(group, values), p, cfg, extra_tests=structured
    )


def m0_upper_bound(
    group: FiniteGroup,
    u: Union[GroupFunction, np.ndarray],
    p: Union[PExponent, float],
    d_max: Optional[int] = None,
    cfg: Optional[OptimConfig] = None,
) -> Tuple[float, CoefficientPair]:
    """Coefficient-factorization certificate for the multiplier norm.

    Finds vectors with u(t s^{-1}) = <beta(t), alpha(s)> exactly and
    returns sup_t ||beta(t)|| * sup_s ||alpha(s)|| together with the
    witness pair.  Dimension is capped at d_max (default twice the
    group order); a cap below the symbol rank is reported as
    infeasibility at that dimension.
    """
    cfg = cfg or OptimConfig()
    pexp = p if isinstance(p, PExponent) else PExponent(p)
    if d_max is None:
        d_max = 2 * group.order
    symbol = translation_symbol(group, u).values  # [t, s] = u(t s^{-1})
    value, alpha, beta, _ = _factor_symbol(symbol, pexp, d_max, cfg)
    pair = CoefficientPair(pexp, alpha, beta)
    resid = pair.residual(symbol)
    if resid > 1e-9 * max(1.0, float(np.abs(symbol).max())):
        raise AssertionError(f"witness residual {resid:g} exceeds certification bar")
    return value, pair


def _dual_multiplier_candidates(
    group: FiniteGroup, values: np.ndarray, cfg: OptimConfig
) -> List[np.ndarray]:
    n = group.order
    cands = []
    s_best = int(np.argmax(np.abs(values)))
    c = np.zeros(n, dtype=complex)
    c[s_best] = 1.0
    cands.append(c)
    if group.is_abelian:
        from herzlab.herz import abelian_characters

        chars = abelian_characters(group)
        hat = chars.conj() @ values / n
        phases = np.conj(signum_power(hat, 1.0))
        cands.append(chars.conj().T @ phases / n)
    rng = cfg.rng("mult-dual")
    cands.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return cands


def multiplier_norm(
    group: FiniteGroup,
    u: Union[GroupFunction, np.ndarray],
    p: Union[PExponent, float],
    cfg: Optional[OptimConfig] = None,
) -> NormEstimate:
    """Pointwise multiplier norm on the Herz algebra, bracketed.

    Works on the dual side, where the multiplier rescales translation
    coefficients: the lower bound is the best ratio
    ||sum c_s u(s) lambda(s)|| / ||sum c_s lambda(s)||, the upper bound
    the cheaper of the coefficient-factorization value and the algebra
    norm of u itself.
    """
    cfg = cfg or OptimConfig()
    pexp = p if isinstance(p, PExponent) else PExponent(p)
    values = _coerce_values(group, u)
    n = group.order
    if not np.any(np.abs(values) > 0):
        return NormEstimate(0.0, 0.0, "exact", method="zero-multiplier")

    m0_value, _ = m0_upper_bound(group, values, pexp, cfg=cfg)
    upper = min(m0_value, ap_upper_cheap(group, values, pexp))

    # a point mass rescales a single translation, so the peak value is
    # an exact lower bound before any search
    lower = float(np.abs(values).max())
    light = cfg.light("mult-lower")

    def ratio(c: np.ndarray) -> float:
        den = opnorm_upper(pm_matrix(group, c), pexp)
        if den < 1e-13:
            return 0.0
        num = opnorm_estimate(pm_matrix(group, c * values), pexp, light).lower
        return num / den

    witness = None
    for c in _dual_multiplier_candidates(group, values, cfg):
        v = ratio(c)
        if v > lower:
            lower, witness = v, c

    if upper - lower > 1e-10:
        start = witness
        if start is None:
            start = np.zeros(n, dtype=complex)
            start[int(np.argmax(np.abs(values)))] = 1.0

        def neg(z: np.ndarray) -> float:
            return -ratio(z[:n] + 1j * z[n:])

        res = minimize(
            neg,
            np.concatenate([start.real, start.imag]),
            method="Powell",
            options={"maxiter": 4, "maxfev": 50 * n, "ftol": 1e-11},
        )
        if -res.fun > lower:
            lower = -float(res.fun)
            witness = res.x[:n] + 1j * res.x[n:]

    upper = max(upper, lower)
    return NormEstimate(
        min(lower, upper),
        upper,
        "factorization",
        method="dual-coefficient-ratio",
        lower_witness=witness,
    )


def cb_multiplier_norm(
    group: FiniteGroup,
    u: Union[GroupFunction, np.ndarray],
    p: Union[PExponent, float],
    n_max: int = 3,
    cfg: Optional[OptimConfig] = None,
) -> NormEstimate:
    """Completely bounded multiplier bracket via amplified levels.

    Level m pairs the rescaling map against m x m grids of translation
    coefficients; each level warm-starts from the previous witness, so
    the recorded level values are nondecreasing.  The upper bound is
    the coefficient-factorization value.
    """
    if n_max < 1:
        raise ValueError("need at least one amplification level")
    cfg = cfg or OptimConfig()
    pexp = p if isinstance(p, PExponent) else PExponent(p)
    values = _coerce_values(group, u)
    g_order = group.order
    if not np.any(np.abs(values) > 0):
        return NormEstimate(0.0, 0.0, "exact", method="zero-multiplier")

    m0_value, _ = m0_upper_bound(group, values, pexp, cfg=cfg)
    light = cfg.light("cb-mult")
    rng = cfg.rng("cb-mult")

    def ratio(grid: np.ndarray) -> float:
        den = opnorm_upper(pm_amplified(group, grid), pexp)
        if den < 1e-13:
            return 0.0
        num = opnorm_estimate(
            pm_amplified(group, grid * values[None, None, :]), pexp, light
        ).lower
        return num / den

    levels = []
    warm: Optional[np.ndarray] = None
    best = 0.0
    for m in range(1, n_max + 1):
        cands = []
        if warm is not None:
            padded = np.zeros((m, m, g_order), dtype=complex)
            padded[: m - 1, : m - 1] = warm
            cands.append(padded)
        for c in _dual_multiplier_candidates(group, values, cfg):
            diag = np.zeros((m, m, g_order), dtype=complex)
            for i in range(m):
                diag[i, i] = c
            cands.append(diag)
        cands.append(
            rng.standard_normal((m, m, g_order)) + 1j * rng.standard_normal((m, m, g_order))
        )
        level_best = 0.0
        level_t = cands[0]
        for grid in cands:
            v = ratio(grid)
            if v > level_best:
                level_best, level_t = v, grid

        if m0_value - level_best > 1e-10:
            size = m * m * g_order

            def neg(z: np.ndarray) -> float:
                return -ratio((z[:size] + 1j * z[size:]).reshape(m, m, g_order))

            budget = 25 * size if m == 1 else 10 * size
            res = minimize(
                neg,
                np.concatenate([level_t.real.ravel(), level_t.imag.ravel()]),
                method="Powell",
                options={"maxiter": 2, "maxfev": budget, "ftol": 1e-10},
            )
            if -res.fun > level_best:
                level_best = -float(res.fun)
                half = size
                level_t = (res.x[:half] + 1j * res.x[half:]).reshape(m, m, g_order)
        levels.append((m, level_best))
        warm = level_t
        best = max(best, level_best)

    upper = max(m0_value, best)
    est = NormEstimate(
        min(best, upper), upper, "factorization", method="amplified-dual-ratio"
    )
    est.levels = levels
    return est


def psi_amplify(psi: SchurSymbol, n: int) -> SchurSymbol:
    """Blow each index up into a block of size n, keeping values constant."""
    if n < 1:
        raise ValueError("amplification factor must be at least one")
    return SchurSymbol(np.kron(psi.values, np.ones((n, n))))


@dataclass
class CrossMultiplierReport:
    """Sandwich test for a multiplier extended by the unit of a second group."""

    product_norm: NormEstimate
    base_norm: NormEstimate
    base_cb_upper: float
    low_margin: float
    high_margin: float
    verdict: str
    details: dict = field(default_factory=dict)


def cross_multiplier_check(
    u: GroupFunction,
    other: FiniteGroup,
    p: Union[PExponent, float],
    cfg: Optional[OptimConfig] = None,
    tol: float = 5e-2,
) -> CrossMultiplierReport:
    """Extend u by the unit function on a second group and compare norms.

    The extension u x 1 acts on the product group; its multiplier norm
    must sit between the base multiplier lower bound (restriction) and
    the completely bounded upper bound (tensor extension theorem), both
    within tolerance.
    """
    cfg = cfg or OptimConfig()
    pexp = p if isinstance(p, PExponent) else PExponent(p)
    group = u.group
    if group.order * other.order > 24:
        raise ValueError("product group order above 24 is out of scope")
    prod = direct_product(group, other)
    extended = GroupFunction.outer(u, GroupFunction.one(other))
    product_est = multiplier_norm(prod, extended.values, pexp, cfg)
    base_est = multiplier_norm(group, u.values, pexp, cfg)
    cb_est = cb_multiplier_norm(group, u.values, pexp, n_max=2, cfg=cfg)

    high_margin = cb_est.upper + tol - product_est.lower
    low_margin = product_est.upper - (base_est.lower - tol)
    if high_margin >= 0 and low_margin >= 0:
        verdict = "pass"
    elif (
        high_margin >= -(product_est.width + cb_est.width)
        and low_margin >= -(product_est.width + base_est.width)
    ):
        verdict = "indecisive"
    else:
        verdict = "fail"
    return CrossMultiplierReport(
        product_norm=product_est,
        base_norm=base_est,
        base_cb_upper=cb_est.upper,
        low_margin=float(low_margin),
        high_margin=float(high_margin),
        verdict=verdict,
        details={"group": group.name, "other": other.name, "p": pexp.p},
    )
