"""Concrete p-operator spaces: matrix levels, amplification, axiom and
subquotient checks, and completely-bounded-norm estimation.

A space is a linearly independent list of d by d matrices inside the
bounded operators on l_p^d.  A level-n element is an n by n array of
coefficient vectors over that basis; its norm is the l_p operator norm
of the amplified (n d) by (n d) block matrix.  The two defining axioms
are checked as bracket statements: direct sums must realize the max of
the two levels, and scalar compressions obey the three-factor bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from herzlab.nuclear import NuclearElement, nuclear_norm
from herzlab.pnorms import (
    NormEstimate,
    OptimConfig,
    PExponent,
    bracket_gap,
    lp_norm,
    opnorm_estimate,
    opnorm_upper,
)

__all__ = [
    "ConcretePOpSpace",
    "MatrixLevelElement",
    "LinearSpaceMap",
    "amplify",
    "level_norm",
    "direct_sum",
    "check_axioms",
    "AxiomReport",
    "Subquotient",
    "kwapien_check",
    "KwapienReport",
    "pcb_norm",
    "functional_levels",
    "FunctionalLevelReport",
]


@dataclass
class ConcretePOpSpace:
    """A subspace of B(l_p^d) spanned by an independent list of matrices."""

    p: PExponent
    basis: List[np.ndarray]

    def __post_init__(self) -> None:
        mats = [np.asarray(b, dtype=complex) for b in self.basis]
        if not mats:
            raise ValueError("a space needs at least one basis matrix")
        d = mats[0].shape[0]
        for b in mats:
            if b.shape != (d, d):
                raise ValueError(f"basis matrices must all be {d}x{d}, got {b.shape}")
        flat = np.stack([b.ravel() for b in mats])
        if np.linalg.matrix_rank(flat, tol=1e-10) != len(mats):
            raise ValueError("basis matrices are linearly dependent")
        self.basis = mats

    @property
    def d(self) -> int:
        return self.basis[0].shape[0]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @classmethod
    def full(cls, p: PExponent, d: int) -> "ConcretePOpSpace":
        """All of B(l_p^d), with the matrix-unit basis in row-major order."""
        units = []
        for a in range(d):
            for b in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[a, b] = 1.0
                units.append(e)
        return cls(p, units)

    def element(self, coeffs: np.ndarray) -> "MatrixLevelElement":
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim == 1:
            c = c.reshape(1, 1, -1)
        return MatrixLevelElement(self, c)

    def realize(self, coeff_vector: np.ndarray) -> np.ndarray:
        """The d x d matrix with the given coordinates."""
        c = np.asarray(coeff_vector, dtype=complex).ravel()
        return np.tensordot(c, np.stack(self.basis), axes=1)


@dataclass
class MatrixLevelElement:
    """A level-n element: an n x n array of coefficient vectors."""

    space: ConcretePOpSpace
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[0] != c.shape[1]:
            raise ValueError(f"coefficients must have shape (n, n, k), got {c.shape}")
        if c.shape[2] != self.space.dim:
            raise ValueError(
                f"coefficient vectors have length {c.shape[2]}, basis has "
                f"{self.space.dim}"
            )
        self.coeffs = c

    @property
    def level(self) -> int:
        return self.coeffs.shape[0]

    def amplified(self) -> np.ndarray:
        n = self.level
        d = self.space.d
        stack = np.stack(self.space.basis)
        blocks = np.einsum("ijk,kab->iajb", self.coeffs, stack)
        return blocks.reshape(n * d, n * d)

    def scaled(self, c: complex) -> "MatrixLevelElement":
        return MatrixLevelElement(self.space, c * self.coeffs)


def amplify(x: MatrixLevelElement) -> np.ndarray:
    return x.amplified()


def level_norm(x: MatrixLevelElement, cfg: Optional[OptimConfig] = None) -> NormEstimate:
    return opnorm_estimate(x.amplified(), x.space.p, cfg or OptimConfig())


def direct_sum(x: MatrixLevelElement, y: MatrixLevelElement) -> MatrixLevelElement:
    if x.space is not y.space:
        raise ValueError("direct sums are defined within one space")
    n, m, k = x.level, y.level, x.space.dim
    out = np.zeros((n + m, n + m, k), dtype=complex)
    out[:n, :n] = x.coeffs
    out[n:, n:] = y.coeffs
    return MatrixLevelElement(x.space, out)


@dataclass
class AxiomReport:
    """Trial-by-trial outcome of the direct-sum and compression axioms."""

    trials: int
    violations: int
    loose_trials: int
    worst_sum_gap: float
    worst_compression_residual: float
    verdict: str


def check_axioms(
    space: ConcretePOpSpace,
    trials: int,
    cfg: Optional[OptimConfig] = None,
    tol: float = 1e-6,
) -> AxiomReport:
    """Random-trial check of the two matricial norm axioms.

    Direct sums: the bracket of ||u (+) v|| must meet the interval
    [max of lowers, max of uppers].  Compressions: the certified lower
    bound of ||alpha u beta|| must stay below the product of the three
    certified upper bounds.  Trials whose brackets are too wide to
    affirm the direct-sum equality are counted as loose, never dropped.
    """
    cfg = cfg or OptimConfig()
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = cfg.rng("axioms")
    k = space.dim
    violations = 0
    loose = 0
    worst_gap = 0.0
    worst_res = -math.inf

    for trial in range(trials):
        nu = int(rng.integers(1, 4))
        nv = int(rng.integers(1, 4))
        u = space.element(
            rng.standard_normal((nu, nu, k)) + 1j * rng.standard_normal((nu, nu, k))
        )
        v = space.element(
            rng.standard_normal((nv, nv, k)) + 1j * rng.standard_normal((nv, nv, k))
        )
        eu = level_norm(u, cfg)
        ev = level_norm(v, cfg)
        es = level_norm(direct_sum(u, v), cfg)
        max_bracket = NormEstimate(max(eu.lower, ev.lower), max(eu.upper, ev.upper))
        gap = bracket_gap(es, max_bracket)
        worst_gap = max(worst_gap, gap)
        if gap > tol:
            violations += 1
        elif es.width + max_bracket.width > 5e-2:
            loose += 1

        m = int(rng.integers(1, 4))
        alpha = rng.standard_normal((m, nu)) + 1j * rng.standard_normal((m, nu))
        beta = rng.standard_normal((nu, m)) + 1j * rng.standard_normal((nu, m))
        squeezed = space.element(
            np.einsum("ik,klb,lj->ijb", alpha, u.coeffs, beta)
        )
        lhs = level_norm(squeezed, cfg)
        bound = (
            opnorm_estimate(alpha, space.p, cfg).upper
            * eu.upper
            * opnorm_estimate(beta, space.p, cfg).upper
        )
        residual = lhs.lower - bound
        worst_res = max(worst_res, residual)
        if residual > tol:
            violations += 1

    verdict = "pass" if violations == 0 else "fail"
    return AxiomReport(
        trials=trials,
        violations=violations,
        loose_trials=loose,
        worst_sum_gap=float(worst_gap),
        worst_compression_residual=float(worst_res),
        verdict=verdict,
    )


@dataclass
class Subquotient:
    """A subspace of l_p^N together with a kernel to quotient out."""

    p: PExponent
    subspace: np.ndarray
    kernel: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        s = np.asarray(self.subspace, dtype=complex)
        if s.ndim != 2 or s.shape[1] == 0:
            raise ValueError("subspace must be an N x k matrix of basis columns")
        if np.linalg.matrix_rank(s, tol=1e-10) != s.shape[1]:
            raise ValueError("subspace basis is linearly dependent")
        self.subspace = s
        if self.kernel is not None:
            kmat = np.asarray(self.kernel, dtype=complex)
            if kmat.size == 0:
                self.kernel = None
                return
            if kmat.shape[0] != s.shape[0]:
                raise ValueError("kernel lives in a different ambient space")
            # the kernel must sit inside the subspace for the quotient to exist
            proj, *_ = np.linalg.lstsq(s, kmat, rcond=None)
            if np.abs(s @ proj - kmat).max() > 1e-8:
                raise ValueError("kernel basis is not contained in the subspace")
            self.kernel = kmat

    @property
    def ambient_dim(self) -> int:
        return self.subspace.shape[0]

    @property
    def dim(self) -> int:
        return self.subspace.shape[1]

    def quotient_norm(self, v: np.ndarray, cfg: Optional[OptimConfig] = None) -> float:
        """inf over kernel translates of the l_p norm (a convex problem)."""
        v = np.asarray(v, dtype=complex).ravel()
        if self.kernel is None:
            return float(lp_norm(v, self.p.p))
        kmat = self.kernel
        kk = kmat.shape[1]

        def objective(z: np.ndarray) -> float:
            c = z[:kk] + 1j * z[kk:]
            return float(lp_norm(v - kmat @ c, self.p.p))

        best = objective(np.zeros(2 * kk))
        starts = [np.zeros(2 * kk)]
        lsq, *_ = np.linalg.lstsq(kmat, v, rcond=None)
        starts.append(np.concatenate([lsq.real, lsq.imag]))
        for z0 in starts:
            res = minimize(objective, z0, method="L-BFGS-B", options={"maxiter": 120})
            best = min(best, float(res.fun))
        return best


@dataclass
class KwapienReport:
    """Margin of the matrix inequality defining membership in the p-subquotient class."""

    sup_lower: float
    matrix_norm: NormEstimate
    margin: float
    verdict: str
    witness: Optional[np.ndarray] = field(default=None, repr=False)


def kwapien_check(
    e_spec: Subquotient,
    a: np.ndarray,
    cfg: Optional[OptimConfig] = None,
) -> KwapienReport:
    """Search for violations of the vector-system inequality over a subquotient.

    Maximizes (sum_i q(sum_j a_ij x_j)^p)^(1/p) over systems (x_j) in the
    subquotient with (sum_j q(x_j)^p)^(1/p) <= 1, where q is the quotient
    norm, and compares against the operator-norm bracket of a.  The margin
    is norm-upper minus the certified supremum lower bound; nonnegative
    margins (up to tolerance) are the expected direction.
    """
    cfg = cfg or OptimConfig()
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("coefficient matrix must be square")
    p = e_spec.p
    s = e_spec.subspace
    ks = e_spec.dim

    def split(z: np.ndarray) -> np.ndarray:
        half = n * ks
        return (z[:half] + 1j * z[half:]).reshape(ks, n)

    def ratio(z: np.ndarray) -> float:
        w = split(z)
        xs = s @ w  # columns are the system vectors
        dens = [e_spec.quotient_norm(xs[:, j], cfg) for j in range(n)]
        den = float(lp_norm(np.array(dens), p.p))
        if den < 1e-12:
            return 0.0
        combos = xs @ a.T  # column i is sum_j a_ij x_j
        nums = [e_spec.quotient_norm(combos[:, i], cfg) for i in range(n)]
        return float(lp_norm(np.array(nums), p.p)) / den

    a_est = opnorm_estimate(a, p, cfg)
    rng = cfg.rng("kwapien")
    starts = []
    if a_est.lower_witness is not None:
        # replicate the norming vector of a across one subquotient direction
        y = np.asarray(a_est.lower_witness, dtype=complex).ravel()
        base = np.zeros(ks, dtype=complex)
        base[0] = 1.0
        starts.append(np.outer(base, y))
    starts.append(np.ones((ks, n), dtype=complex) / math.sqrt(ks * n))
    for _ in range(max(1, cfg.restarts // 16)):
        starts.append(rng.standard_normal((ks, n)) + 1j * rng.standard_normal((ks, n)))

    best = 0.0
    best_w = None
    for w0 in starts:
        z0 = np.concatenate([w0.real.ravel(), w0.imag.ravel()])
        res = minimize(
            lambda z: -ratio(z),
            z0,
            method="Powell",
            options={"maxiter": 4, "maxfev": 60 * n * ks, "ftol": 1e-9},
        )
        if -res.fun > best:
            best = -float(res.fun)
            best_w = split(res.x)

    margin = a_est.upper - best
    verdict = "pass" if margin >= -1e-6 else "fail"
    return KwapienReport(
        sup_lower=best,
        matrix_norm=a_est,
        margin=float(margin),
        verdict=verdict,
        witness=best_w,
    )


@dataclass
class LinearSpaceMap:
    """A linear map between concrete spaces, in basis coordinates."""

    domain: ConcretePOpSpace
    codomain: ConcretePOpSpace
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(
                f"map matrix must be {self.codomain.dim} x {self.domain.dim}, "
                f"got {m.shape}"
            )
        self.matrix = m

    def apply(self, x: MatrixLevelElement) -> MatrixLevelElement:
        if x.space is not self.domain and x.space.dim != self.domain.dim:
            raise ValueError("element does not live in the map's domain")
        return self.codomain.element(np.einsum("ab,ijb->ija", self.matrix, x.coeffs))

    @classmethod
    def identity(cls, space: ConcretePOpSpace) -> "LinearSpaceMap":
        return cls(space, space, np.eye(space.dim, dtype=complex))


def _map_level_lower(
    u: LinearSpaceMap,
    n: int,
    cfg: OptimConfig,
    warm: Optional[np.ndarray] = None,
) -> Tuple[float, np.ndarray]:
    """Certified lower bound for the amplified map norm at one level."""
    k = u.domain.dim
    light = cfg.light(f"map-level-{n}")

    def ratio_from(coeffs: np.ndarray) -> float:
        x = u.domain.element(coeffs)
        den = opnorm_upper(x.amplified(), u.domain.p)
        if den < 1e-12:
            return 0.0
        num = opnorm_estimate(u.apply(x).amplified(), u.codomain.p, light).lower
        return num / den

    def neg(z: np.ndarray) -> float:
        half = n * n * k
        return -ratio_from((z[:half] + 1j * z[half:]).reshape(n, n, k))

    rng = cfg.rng(f"map-{n}")
    starts: List[np.ndarray] = []
    if warm is not None:
        padded = np.zeros((n, n, k), dtype=complex)
        w = warm.shape[0]
        padded[:w, :w] = warm
        starts.append(padded)
    for j in range(k):
        e = np.zeros((n, n, k), dtype=complex)
        e[0, 0, j] = 1.0
        starts.append(e)
    starts.append(rng.standard_normal((n, n, k)) + 1j * rng.standard_normal((n, n, k)))

    best = 0.0
    best_x = starts[0]
    for s0 in starts:
        base = ratio_from(s0)
        if base > best:
            best, best_x = base, s0
    z0 = np.concatenate([best_x.real.ravel(), best_x.imag.ravel()])
    res = minimize(
        neg,
        z0,
        method="Powell",
        options={"maxiter": 3, "maxfev": 50 * n * n * k, "ftol": 1e-9},
    )
    if -res.fun > best:
        half = n * n * k
        best = -float(res.fun)
        best_x = (res.x[:half] + 1j * res.x[half:]).reshape(n, n, k)
    return best, best_x


def pcb_norm(
    u: LinearSpaceMap, n_max: int = 4, cfg: Optional[OptimConfig] = None
) -> NormEstimate:
    """Lower-bracketed completely bounded norm via the level supremum.

    Levels are searched up to n_max with each level warm-started from the
    previous witness (so the reported sequence is nondecreasing); the
    upper endpoint stays infinite since no finite level certifies the
    supremum without an external factorization.
    """
    if n_max < 1:
        raise ValueError("need at least one level")
    cfg = cfg or OptimConfig()
    levels = []
    warm = None
    best = 0.0
    for n in range(1, n_max + 1):
        val, warm = _map_level_lower(u, n, cfg, warm)
        levels.append((n, val))
        best = max(best, val)
    est = NormEstimate(
        best, math.inf, "none", method="level-supremum", budget_used=n_max
    )
    est.levels = levels
    return est


@dataclass
class FunctionalLevelReport:
    """Level-by-level brackets for a coefficient functional."""

    level_estimates: List[NormEstimate]
    deviation: float
    spread: float
    verdict: str

    @property
    def base(self) -> NormEstimate:
        return self.level_estimates[0]


def _functional_preimage_upper(
    space: ConcretePOpSpace, mu: np.ndarray, cfg: OptimConfig
) -> float:
    """Nuclear certificate: represent mu by trace pairing and cost it.

    Solves trace(A_k M) = mu_k for the operator matrix M (least-squares
    in the Frobenius geometry), then takes the nuclear-norm upper bound
    of M, which dominates the functional norm at every matrix level.
    """
    d = space.d
    rows = np.stack([b.T.ravel() for b in space.basis])  # trace(A_k M) = rows_k . vec(M)
    m_vec, *_ = np.linalg.lstsq(rows, mu, rcond=None)
    m = m_vec.reshape(d, d)
    return nuclear_norm(
        NuclearElement.from_matrix(space.p, m), cfg, polish=True
    ).upper


def functional_levels(
    space: ConcretePOpSpace,
    mu: np.ndarray,
    n_max: int = 3,
    cfg: Optional[OptimConfig] = None,
    decide_tol: float = 1e-3,
) -> FunctionalLevelReport:
    """Brackets for a scalar functional at levels 1..n_max.

    The level-1 lower bound comes from ratio optimization over the space;
    higher levels reuse the level-1 witness placed in a corner block
    (which preserves the ratio exactly) plus an independent search.  The
    shared upper bound is the nuclear preimage certificate.  Flat level
    sequences are the expected outcome; the report carries the worst
    bracket gap (deviation) and the spread of the certified lower bounds.
    """
    cfg = cfg or OptimConfig()
    mu = np.asarray(mu, dtype=complex).ravel()
    if mu.shape[0] != space.dim:
        raise ValueError(
            f"functional has {mu.shape[0]} coordinates, space has {space.dim}"
        )
    k = space.dim
    upper = _functional_preimage_upper(space, mu, cfg)
    if not np.any(np.abs(mu) > 0):
        zero = NormEstimate(0.0, 0.0, "exact", method="zero-functional")
        return FunctionalLevelReport([zero] * n_max, 0.0, 0.0, "pass")

    def ratio(t: np.ndarray) -> float:
        den = opnorm_upper(space.realize(t), space.p)
        if den < 1e-12:
            return 0.0
        return abs(np.dot(mu, t)) / den

    rng = cfg.rng("functional")
    starts = [np.conj(mu)]
    for j in range(k):
        e = np.zeros(k, dtype=complex)
        e[j] = 1.0
        starts.append(e)
    for _ in range(max(2, cfg.restarts // 8)):
        starts.append(rng.standard_normal(k) + 1j * rng.standard_normal(k))

    lower1 = 0.0
    witness = starts[0]
    for t0 in starts:
        v = ratio(t0)
        if v > lower1:
            lower1, witness = v, t0

    def neg(z: np.ndarray) -> float:
        return -ratio(z[:k] + 1j * z[k:])

    res = minimize(
        neg,
        np.concatenate([witness.real, witness.imag]),
        method="Powell",
        options={"maxiter": 6, "maxfev": 80 * k, "ftol": 1e-11},
    )
    if -res.fun > lower1:
        lower1 = -float(res.fun)
        witness = res.x[:k] + 1j * res.x[k:]

    upper = max(upper, lower1)  # float guard; the certificate dominates in exact arithmetic
    estimates = [
        NormEstimate(
            min(lower1, upper), upper, "factorization", method="dual-ratio",
            lower_witness=witness,
        )
    ]

    for n in range(2, n_max + 1):
        # corner embedding of the level-1 witness keeps the ratio: the
        # amplified matrix has one nonzero block, so all interpolation
        # endpoints match those of the block itself
        lower_n = lower1
        light = cfg.light(f"fn-level-{n}")
        x0 = np.zeros((n, n, k), dtype=complex)
        x0[0, 0] = witness

        def ratio_n(coeffs: np.ndarray) -> float:
            x = space.element(coeffs)
            den = opnorm_upper(x.amplified(), space.p)
            if den < 1e-12:
                return 0.0
            scalar = np.einsum("k,ijk->ij", mu, coeffs)
            num = opnorm_estimate(scalar, space.p, light).lower
            return num / den

        def neg_n(z: np.ndarray) -> float:
            half = n * n * k
            return -ratio_n((z[:half] + 1j * z[half:]).reshape(n, n, k))

        z0 = np.concatenate([x0.real.ravel(), x0.imag.ravel()])
        res = minimize(
            neg_n,
            z0,
            method="Powell",
            options={"maxiter": 2, "maxfev": 40 * n * k, "ftol": 1e-9},
        )
        lower_n = max(lower_n, -float(res.fun))
        estimates.append(
            NormEstimate(
                min(lower_n, upper), upper, "factorization", method="dual-ratio"
            )
        )

    deviation = max(bracket_gap(estimates[0], e) for e in estimates)
    spread = max(e.lower for e in estimates) - min(e.lower for e in estimates)
    verdict = "pass" if deviation <= decide_tol and spread <= decide_tol else (
        "indecisive" if deviation <= 2 * max(e.width for e in estimates) else "fail"
    )
    return FunctionalLevelReport(estimates, float(deviation), float(spread), verdict)
