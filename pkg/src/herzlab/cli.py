"""Command-line front end: certified norm brackets as machine-readable
reports.

Every subcommand builds a :class:`~herzlab.reports.ReportRecord`, writes
it as JSON or CSV (plus a bracket figure next to the file), and exits
with 0 on pass, 1 on fail, 2 on indecisive, and 3 on input errors.
Runs are deterministic for a fixed seed; the seed comes from --seed,
then the HERZLAB_SEED environment variable, then 0.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import sys
import time
from typing import Optional

import click
import numpy as np

from herzlab.groups import FiniteGroup, GroupFunction, GroupTableError, load_group
from herzlab.herz import (
    ap_norm,
    abelian_characters,
    check_ap_tensor,
    check_quasi_expectation,
    coproduct_check,
    unitary_characters,
)
from herzlab.multipliers import (
    SchurSymbol,
    cb_multiplier_norm,
    herz_schur_norm,
    m0_upper_bound,
    multiplier_norm,
    psi_amplify,
    schur_norm,
)
from herzlab.nuclear import (
    NuclearElement,
    NuclearMatrixSpace,
    check_nuclear_duality,
    nuclear_norm,
    posp_projective_norm,
)
from herzlab.pnorms import (
    NormEstimate,
    OptimConfig,
    PExponent,
    bracket_gap,
    opnorm_bruteforce,
    opnorm_estimate,
    opnorm_exact,
)
from herzlab.reports import ReportRecord, write_report
from herzlab.spaces import (
    ConcretePOpSpace,
    LinearSpaceMap,
    Subquotient,
    check_axioms,
    kwapien_check,
    pcb_norm,
)

EXIT_CODES = {"pass": 0, "fail": 1, "indecisive": 2}
INPUT_ERROR = 3

_P_TOKENS = {"1": 1.0, "2": 2.0, "inf": math.inf}

OVERLAP_TOL = 5e-2
ORDER_TOL = 1e-6


def _parse_p(text: str, tokens_ok: bool = False) -> float:
    """A real exponent in (1, inf), or one of the tokens 1, 2, inf."""
    text = str(text).strip()
    if text in _P_TOKENS:
        value = _P_TOKENS[text]
        if value in (1.0, math.inf) and not tokens_ok:
            raise ValueError(
                f"p={text} is only accepted by exact-oracle commands; "
                "this command needs 1 < p < inf"
            )
        return value
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"could not parse an exponent from {text!r}") from None
    if not (1.0 < value < math.inf):
        raise ValueError(f"p must lie in (1, inf), got {text}")
    return value


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get("HERZLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"HERZLAB_SEED must be an integer, got {env!r}") from None
    return 0


def _build_cfg(seed: Optional[int], restarts: int, iters: int) -> OptimConfig:
    if restarts < 1 or iters < 1:
        raise ValueError("budgets must be positive integers")
    return OptimConfig(restarts=restarts, max_iters=iters, seed=_resolve_seed(seed))


def _entry_to_complex(entry) -> complex:
    if isinstance(entry, (list, tuple)):
        if len(entry) != 2:
            raise ValueError(f"complex entries are [re, im] pairs, got {entry!r}")
        return complex(float(entry[0]), float(entry[1]))
    if isinstance(entry, (int, float)):
        return complex(entry)
    raise ValueError(f"matrix entries must be numbers or [re, im] pairs, got {entry!r}")


def _load_complex_array(path: str, ndim: int) -> np.ndarray:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid JSON in {path}: {exc}") from exc
    if ndim == 1:
        if not isinstance(doc, list):
            raise ValueError(f"{path} must hold a JSON list of entries")
        return np.array([_entry_to_complex(e) for e in doc])
    if not (isinstance(doc, list) and doc and all(isinstance(r, list) for r in doc)):
        raise ValueError(f"{path} must hold a JSON list of rows")
    rows = [[_entry_to_complex(e) for e in row] for row in doc]
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"rows in {path} have unequal lengths {sorted(widths)}")
    return np.array(rows)


def _digest(inputs: dict) -> str:
    canon = json.dumps(inputs, sort_keys=True, default=str).encode()
    return hashlib.blake2b(canon, digest_size=8).hexdigest()


def _make_record(command: str, inputs: dict, seed: int) -> ReportRecord:
    inputs = dict(inputs)
    inputs["digest"] = _digest(inputs)
    return ReportRecord(command=command, inputs=inputs, seed=seed)


def _group_function(
    group: FiniteGroup, selector: str, cfg: OptimConfig, tag: str
) -> np.ndarray:
    """Build coefficient values from a small selector language.

    Accepted forms: ``uniform``, ``delta``, ``character:k`` (cyclic
    groups), ``random``, or a path to a JSON list of entries.
    """
    if selector == "uniform":
        return GroupFunction.one(group).values
    if selector == "delta":
        return GroupFunction.delta(group).values
    if selector.startswith("character:"):
        k = int(selector.split(":", 1)[1])
        return GroupFunction.character(group, k).values
    if selector == "random":
        rng = cfg.rng(tag)
        vals = rng.standard_normal(group.order) + 1j * rng.standard_normal(group.order)
        return vals
    if os.path.exists(selector):
        vals = _load_complex_array(selector, ndim=1)
        if vals.shape[0] != group.order:
            raise ValueError(
                f"function file {selector} has {vals.shape[0]} entries; "
                f"group order is {group.order}"
            )
        return vals
    raise ValueError(
        f"unknown function selector {selector!r}; use uniform, delta, character:k, "
        "random, or a path to a JSON list"
    )


def _fourier_coefficient_sum(group: FiniteGroup, values: np.ndarray) -> float:
    """Sum of absolute Fourier coefficients over the character basis."""
    chars = abelian_characters(group)
    coeffs = chars.conj() @ values / group.order
    return float(np.abs(coeffs).sum())


def _run_and_exit(builder, output, fmt, figures):
    """Time the record builder, write the report, exit per the contract."""
    try:
        start = time.perf_counter()
        record = builder()
        record.wall_time = time.perf_counter() - start
    except (GroupTableError, ValueError, OSError) as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(INPUT_ERROR)
    text = write_report(record, output, fmt, figures=figures)
    if output:
        click.echo(f"{record.verdict}: report written to {output}")
    else:
        click.echo(text, nl=False)
    sys.exit(EXIT_CODES[record.verdict])


def common_options(fn):
    decorators = [
        click.option("--seed", type=int, default=None, help="RNG seed (fallback: HERZLAB_SEED, then 0)."),
        click.option("--output", type=click.Path(dir_okay=False), default=None, help="Report file path; stdout when omitted."),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True, help="Report format."),
        click.option("--single-lane", is_flag=True, default=False, help="Force sequential deterministic execution (execution is always sequential; the flag is recorded)."),
        click.option("--budget-restarts", type=int, default=32, show_default=True, help="Multistart restarts per search."),
        click.option("--budget-iters", type=int, default=500, show_default=True, help="Iteration cap per local search."),
        click.option("--no-figures", is_flag=True, default=False, help="Skip the bracket figure next to the report file."),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


@click.group()
@click.version_option(package_name="herzlab")
def main():
    """Certified norm brackets for p-operator spaces and Herz algebras."""


# ---------------------------------------------------------------------------
# pnorm


def _run_pnorm(p_text, matrix, rows, cols, trials, cfg, single_lane):
    pv = _parse_p(p_text, tokens_ok=True)
    token = pv in (1.0, 2.0, math.inf)
    inputs = {
        "p": p_text,
        "matrix": matrix or None,
        "rows": rows,
        "cols": cols,
        "trials": None if matrix else trials,
        "single_lane": single_lane,
        "restarts": cfg.restarts,
        "max_iters": cfg.max_iters,
    }
    record = _make_record("pnorm", inputs, cfg.seed)

    if matrix:
        mat = _load_complex_array(matrix, ndim=2)
        est = opnorm_estimate(mat, pv, cfg)
        record.estimates["opnorm"] = est
        if token:
            oracle = opnorm_exact(mat, p_text if p_text in _P_TOKENS else pv)
            record.estimates["oracle"] = NormEstimate(
                oracle, oracle, "exact", method="closed-form"
            )
            gap = max(abs(est.lower - oracle), abs(est.upper - oracle))
            record.residuals["oracle_gap"] = gap
            record.verdict = "pass" if gap <= 1e-8 else "fail"
        else:
            width = est.width
            record.residuals["bracket_width"] = width
            tight = width <= OVERLAP_TOL * max(1.0, est.upper)
            record.verdict = "pass" if tight else "indecisive"
        return record

    rng = cfg.rng("pnorm-battery")
    worst = 0.0
    worst_est = None
    for k in range(trials):
        mat = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
        est = opnorm_estimate(mat, pv, cfg)
        if token:
            oracle = opnorm_exact(mat, pv)
            dev = max(abs(est.lower - oracle), abs(est.upper - oracle))
        elif cols <= 3:
            oracle = opnorm_bruteforce(mat, pv, cfg)
            dev = max(oracle - est.upper, -(est.lower - oracle + 1e-6), 0.0)
        else:
            oracle = None
            dev = est.width / max(1.0, est.upper)
        if dev >= worst:
            worst, worst_est = dev, est
    record.estimates["opnorm"] = worst_est
    record.residuals["worst_deviation"] = worst
    if token:
        record.verdict = "pass" if worst <= 1e-8 else "fail"
    elif cols <= 3:
        record.verdict = "pass" if worst <= 1e-6 else "fail"
    else:
        record.verdict = "pass" if worst <= OVERLAP_TOL else "indecisive"
    return record


@main.command()
@click.option("--p", "p_text", default="2", show_default=True, help="Exponent; tokens 1, 2, inf select the exact oracle.")
@click.option("--matrix", type=click.Path(exists=False), default=None, help="JSON matrix file; omit for a random battery.")
@click.option("--rows", type=int, default=3, show_default=True)
@click.option("--cols", type=int, default=3, show_default=True)
@click.option("--trials", type=int, default=20, show_default=True)
@common_options
def pnorm(p_text, matrix, rows, cols, trials, seed, output, fmt, single_lane,
          budget_restarts, budget_iters, no_figures):
    """Operator p-norm bracket of a matrix, checked against oracles."""
    _run_and_exit(
        lambda: _run_pnorm(
            p_text, matrix, rows, cols, trials,
            _build_cfg(seed, budget_restarts, budget_iters), single_lane,
        ),
        output, fmt, not no_figures,
    )


# ---------------------------------------------------------------------------
# cbnorm


def _transpose_map(space: ConcretePOpSpace) -> LinearSpaceMap:
    d = space.d
    mat = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            mat[d * j + i, d * i + j] = 1.0
    return LinearSpaceMap(space, space, mat)


def _run_cbnorm(p_text, map_name, dim, n_max, cfg, single_lane):
    pv = PExponent(_parse_p(p_text))
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    space = ConcretePOpSpace.full(pv, dim)
    if map_name == "identity":
        u = LinearSpaceMap.identity(space)
    else:
        u = _transpose_map(space)
    inputs = {
        "p": p_text,
        "map": map_name,
        "dim": dim,
        "n_max": n_max,
        "single_lane": single_lane,
        "restarts": cfg.restarts,
        "max_iters": cfg.max_iters,
    }
    record = _make_record("cbnorm", inputs, cfg.seed)
    est = pcb_norm(u, n_max=n_max, cfg=cfg)
    record.estimates["cb_lower"] = est
    level_vals = [v for _, v in est.levels]
    gain = level_vals[-1] - level_vals[0]
    monotone = all(b >= a - 1e-9 for a, b in zip(level_vals, level_vals[1:]))
    record.residuals["level_gain"] = gain
    record.residuals["level_one"] = level_vals[0]
    if not monotone:
        record.verdict = "fail"
    elif map_name == "identity":
        flat = max(abs(v - 1.0) for v in level_vals)
        record.residuals["identity_deviation"] = flat
        record.verdict = "pass" if flat <= 1e-6 else "fail"
    else:
        record.verdict = "pass"
    return record


@main.command()
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--map", "map_name", type=click.Choice(["transpose", "identity"]), default="transpose", show_default=True, help="Coefficient map whose level norms are certified.")
@click.option("--dim", type=int, default=2, show_default=True)
@click.option("--n-max", type=int, default=3, show_default=True, help="Highest amplification level.")
@common_options
def cbnorm(p_text, map_name, dim, n_max, seed, output, fmt, single_lane,
           budget_restarts, budget_iters, no_figures):
    """Completely bounded lower bracket of a map via level suprema."""
    _run_and_exit(
        lambda: _run_cbnorm(
            p_text, map_name, dim, n_max,
            _build_cfg(seed, budget_restarts, budget_iters), single_lane,
        ),
        output, fmt, not no_figures,
    )


# ---------------------------------------------------------------------------
# apnorm


def _run_apnorm(p_text, group_name, u_sel, cfg, single_lane):
    pv = PExponent(_parse_p(p_text))
    group = load_group(group_name)
    values = _group_function(group, u_sel, cfg, "apnorm-u")
    inputs = {
        "p": p_text,
        "group": group.name,
        "order": group.order,
        "u": u_sel,
        "single_lane": single_lane,
        "restarts": cfg.restarts,
        "max_iters": cfg.max_iters,
    }
    record = _make_record("apnorm", inputs, cfg.seed)
    est = ap_norm(group, values, pv, cfg)
    record.estimates["ap_norm"] = est
    record.residuals["bracket_width"] = est.width
    if pv.is_two and group.is_abelian:
        oracle = _fourier_coefficient_sum(group, values)
        record.estimates["fourier_oracle"] = NormEstimate(
            oracle, oracle, "exact", method="character-sum"
        )
        gap = bracket_gap(est, record.estimates["fourier_oracle"])
        record.residuals["fourier_gap"] = gap
        record.verdict = "pass" if gap <= 1e-4 else "fail"
    else:
        tight = est.width <= OVERLAP_TOL * max(1.0, est.upper)
        record.verdict = "pass" if tight else "indecisive"
    return record


@main.command()
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--group", "group_name", default="Z_4", show_default=True, help="Built-in name, product name, or JSON table file.")
@click.option("--u", "u_sel", default="uniform", show_default=True, help="uniform | delta | character:k | random | path to JSON list.")
@common_options
def apnorm(p_text, group_name, u_sel, seed, output, fmt, single_lane,
           budget_restarts, budget_iters, no_figures):
    """Herz algebra norm bracket of a function on a finite group."""
    _run_and_exit(
        lambda: _run_apnorm(
            p_text, group_name, u_sel,
            _build_cfg(seed, budget_restarts, budget_iters), single_lane,
        ),
        output, fmt, not no_figures,
    )


# ---------------------------------------------------------------------------
# multnorm


def _multiplier_bundle(group, values, pv, n_max, d_max, cfg):
    """The four multiplier quantities with overlap and ordering margins."""
    m_est = multiplier_norm(group, values, pv, cfg)
    cb_est = cb_multiplier_norm(group, values, pv, n_max=n_max, cfg=cfg)
    fs_est = herz_schur_norm(group, values, pv, cfg)
    m0_val, _pair = m0_upper_bound(group, values, pv, d_max=d_max, cfg=cfg)
    m0_est = NormEstimate(
        min(m_est.lower, m0_val), m0_val, "factorization",
        method="coefficient-factorization",
    )
    estimates = {
        "multiplier": m_est,
        "cb_multiplier": cb_est,
        "herz_schur": fs_est,
        "m0": m0_est,
    }
    pairs = [
        ("multiplier", "cb_multiplier"),
        ("multiplier", "herz_schur"),
        ("multiplier", "m0"),
        ("cb_multiplier", "herz_schur"),
        ("cb_multiplier", "m0"),
        ("herz_schur", "m0"),
    ]
    worst_gap = max(bracket_gap(estimates[a], estimates[b]) for a, b in pairs)
    # certified one-sided orderings; crossing them is a soundness failure,
    # not just loose search
    ordering_excess = max(
        m_est.lower - cb_est.upper,
        m_est.lower - m0_val,
        cb_est.lower - m0_val,
        m_est.lower - fs_est.upper,
        0.0,
    )
    return estimates, worst_gap, ordering_excess


def _run_multnorm(p_text, group_name, u_sel, n_max, d_max, cfg, single_lane):
    pv = PExponent(_parse_p(p_text))
    group = load_group(group_name)
    values = _group_function(group, u_sel, cfg, "multnorm-u")
    inputs = {
        "p": p_text,
        "group": group.name,
        "order": group.order,
        "u": u_sel,
        "n_max": n_max,
        "d_max": d_max,
        "single_lane": single_lane,
        "restarts": cfg.restarts,
        "max_iters": cfg.max_iters,
    }
    record = _make_record("multnorm", inputs, cfg.seed)
    estimates, worst_gap, ordering_excess = _multiplier_bundle(
        group, values, pv, n_max, d_max, cfg
    )
    record.estimates.update(estimates)
    record.residuals["worst_pairwise_gap"] = worst_gap
    record.residuals["ordering_excess"] = ordering_excess
    if ordering_excess > ORDER_TOL:
        record.verdict = "fail"
    elif worst_gap <= OVERLAP_TOL:
        record.verdict = "pass"
    else:
        record.verdict = "indecisive"
    return record


@main.command()
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--group", "group_name", default="Z_3", show_default=True)
@click.option("--u", "u_sel", default="random", show_default=True, help="uniform | delta | character:k | random | path to JSON list.")
@click.option("--n-max", type=int, default=3, show_default=True, help="Amplification levels for the cb bracket.")
@click.option("--d-max", type=int, default=None, help="Factorization dimension cap (default: twice the group order).")
@common_options
def multnorm(p_text, group_name, u_sel, n_max, d_max, seed, output, fmt,
             single_lane, budget_restarts, budget_iters, no_figures):
    """All four multiplier quantities of a function, with overlap verdict."""
    _run_and_exit(
        lambda: _run_multnorm(
            p_text, group_name, u_sel, n_max, d_max,
            _build_cfg(seed, budget_restarts, budget_iters), single_lane,
        ),
        output, fmt, not no_figures,
    )


# ---------------------------------------------------------------------------
# schur


def _run_schur(p_text, symbol, size, d_max, cfg, single_lane):
    pv = PExponent(_parse_p(p_text))
    if symbol:
        mat = _load_complex_array(symbol, ndim=2)
    else:
        if size < 1:
            raise ValueError("symbol size must be at least 1")
        rng = cfg.rng("schur-symbol")
        mat = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    psi = SchurSymbol(mat)
    inputs = {
        "p": p_text,
        "symbol": symbol or None,
        "size": psi.values.shape[0],
        "d_max": d_max,
        "single_lane": single_lane,
        "restarts": cfg.restarts,
        "max_iters": cfg.max_iters,
    }
    record = _make_record("schur", inputs, cfg.seed)
    est = schur_norm(psi, pv, cfg, d_max=d_max)
    record.estimates["schur"] = est
    record.residuals["bracket_width"] = est.width
    amp_est = schur_norm(psi_amplify(psi, 2), pv, cfg.light("amp"), d_max=d_max)
    record.estimates["amplified_by_2"] = amp_est
    amp_excess = max(amp_est.lower - est.upper, 0.0)
    record.residuals["amplification_excess"] = amp_excess
    if amp_excess > ORDER_TOL:
        record.verdict = "fail"
    elif est.width <= OVERLAP_TOL * max(1.0, est.upper):
        record.verdict = "pass"
    else:
        record.verdict = "indecisive"
    return record


@main.command()
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--symbol", type=click.Path(exists=False), default=None, help="JSON matrix file; omit for a seeded random symbol.")
@click.option("--size", type=int, default=3, show_default=True, help="Size of the random symbol when no file is given.")
@click.option("--d-max", type=int, default=None, help="Factorization dimension cap (default: twice the symbol size).")
@common_options
def schur(p_text, symbol, size, d_max, seed, output, fmt, single_lane,
          budget_restarts, budget_iters, no_figures):
    """Schur multiplier norm bracket, with the amplification check."""
    _run_and_exit(
        lambda: _run_schur(
            p_text, symbol, size, d_max,
            _build_cfg(seed, budget_restarts, budget_iters), single_lane,
        ),
        output, fmt, not no_figures,
    )


# ---------------------------------------------------------------------------
# axioms


def _parse_space(selector: str, pv: PExponent, cfg: OptimConfig) -> ConcretePOpSpace:
    parts = selector.split(":")
    if parts[0] == "full" and len(parts) == 2:
        return ConcretePOpSpace.full(pv, int(parts[1]))
    if parts[0] == "random" and len(parts) == 3:
        n, k = int(parts[1]), int(parts[2])
        rng = cfg.rng("axioms-space")
        basis = [
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            for _ in range(k)
        ]
        return ConcretePOpSpace(pv, basis)
    raise ValueError(f"space selector must be full:d or random:n:k, got {selector!r}")


def _run_axioms(p_text, space_sel, trials, cfg, single_lane):
    pv = PExponent(_parse_p(p_text))
    space = _parse_space(space_sel, pv, cfg)
    inputs = {
        "p": p_text,
        "space": space_sel,
        "trials": trials,
        "single_lane": single_lane,
        "restarts": cfg.restarts,
        "max_iters": cfg.max_iters,
    }
    record = _make_record("axioms", inputs, cfg.seed)
    report = check_axioms(space, trials, cfg)
    record.residuals["worst_sum_gap"] = report.worst_sum_gap
    record.residuals["worst_compression_residual"] = report.worst_compression_residual
    record.residuals["violations"] = float(report.violations)
    record.residuals["loose_trials"] = float(report.loose_trials)
    record.verdict = report.verdict
    return record


@main.command()
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--space", "space_sel", default="full:2", show_default=True, help="full:d or random:n:k.")
@click.option("--trials", type=int, default=50, show_default=True)
@common_options
def axioms(p_text, space_sel, trials, seed, output, fmt, single_lane,
           budget_restarts, budget_iters, no_figures):
    """Random-trial check of the direct-sum and compression axioms."""
    _run_and_exit(
        lambda: _run_axioms(
            p_text, space_sel, trials,
            _build_cfg(seed, budget_restarts, budget_iters), single_lane,
        ),
        output, fmt, not no_figures,
    )


# ---------------------------------------------------------------------------
# kwapien


def _run_kwapien(p_text, size, ambient, subdim, trials, cfg, single_lane):
    pv = PExponent(_parse_p(p_text))
    if not (1 <= subdim <= ambient):
        raise ValueError("subspace dimension must lie between 1 and the ambient dimension")
    inputs = {
        "p": p_text,
        "size": size,
        "ambient": ambient,
        "subdim": subdim,
        "trials": trials,
        "single_lane": single_lane,
        "restarts": cfg.restarts,
        "max_iters": cfg.max_iters,
    }
    record = _make_record("kwapien", inputs, cfg.seed)
    rng = cfg.rng("kwapien-battery")
    min_margin = math.inf
    worst = None
    for k in range(trials):
        basis = rng.standard_normal((ambient, subdim)) + 1j * rng.standard_normal(
            (ambient, subdim)
        )
        kernel = basis[:, :1] if (k % 2 and subdim > 1) else None
        sq = Subquotient(pv, basis, kernel)
        a = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        rep = kwapien_check(sq, a, cfg)
        if rep.margin < min_margin:
            min_margin, worst = rep.margin, rep
    record.estimates["matrix_norm"] = worst.matrix_norm
    record.residuals["min_margin"] = min_margin
    record.residuals["sup_lower"] = worst.sup_lower
    record.verdict = "pass" if min_margin >= -ORDER_TOL else "fail"
    return record


@main.command()
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--size", type=int, default=2, show_default=True, help="Coefficient matrix size.")
@click.option("--ambient", type=int, default=4, show_default=True, help="Ambient sequence-space dimension.")
@click.option("--subdim", type=int, default=2, show_default=True, help="Subspace dimension.")
@click.option("--trials", type=int, default=5, show_default=True)
@common_options
def kwapien(p_text, size, ambient, subdim, trials, seed, output, fmt,
            single_lane, budget_restarts, budget_iters, no_figures):
    """Vector-system inequality margins over random subquotients."""
    _run_and_exit(
        lambda: _run_kwapien(
            p_text, size, ambient, subdim, trials,
            _build_cfg(seed, budget_restarts, budget_iters), single_lane,
        ),
        output, fmt, not no_figures,
    )


# ---------------------------------------------------------------------------
# duality


def _run_duality(p_text, n, d, trials, cfg, single_lane):
    pv = PExponent(_parse_p(p_text))
    inputs = {
        "p": p_text,
        "n": n,
        "d": d,
        "trials": trials,
        "single_lane": single_lane,
        "restarts": cfg.restarts,
        "max_iters": cfg.max_iters,
    }
    record = _make_record("duality", inputs, cfg.seed)
    report = check_nuclear_duality(n, d, pv, trials, cfg)
    record.residuals["worst_violation"] = report.worst_violation
    record.residuals["min_attainment"] = report.min_attainment
    record.verdict = report.verdict
    return record


@main.command()
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--n", type=int, default=2, show_default=True, help="Matrix level.")
@click.option("--d", type=int, default=2, show_default=True, help="Operator dimension.")
@click.option("--trials", type=int, default=20, show_default=True)
@common_options
def duality(p_text, n, d, trials, seed, output, fmt, single_lane,
            budget_restarts, budget_iters, no_figures):
    """Matrix-nuclear against factorization-norm duality with attainment."""
    _run_and_exit(
        lambda: _run_duality(
            p_text, n, d, trials,
            _build_cfg(seed, budget_restarts, budget_iters), single_lane,
        ),
        output, fmt, not no_figures,
    )


# ---------------------------------------------------------------------------
# tensor


def _run_tensor(p_text, mode, group_name, other_name, trials, cfg, single_lane):
    pv = PExponent(_parse_p(p_text))
    inputs = {
        "p": p_text,
        "mode": mode,
        "group": group_name if mode != "nuclear" else None,
        "other": other_name if mode == "herz" else None,
        "trials": trials,
        "single_lane": single_lane,
        "restarts": cfg.restarts,
        "max_iters": cfg.max_iters,
    }
    record = _make_record("tensor", inputs, cfg.seed)

    if mode == "nuclear":
        space = NuclearMatrixSpace(pv, 2)
        rng = cfg.rng("tensor-nuclear")
        worst_gap = 0.0
        for k in range(trials):
            w = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            proj = posp_projective_norm(w, space, space, cfg)
            big = w.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
            ref = nuclear_norm(NuclearElement.from_matrix(pv, big), cfg)
            gap = bracket_gap(proj, ref) / max(1.0, ref.upper)
            if gap >= worst_gap:
                worst_gap = gap
                record.estimates["projective"] = proj
                record.estimates["matrix_nuclear"] = ref
        record.residuals["worst_relative_gap"] = worst_gap
        record.verdict = "pass" if worst_gap <= OVERLAP_TOL else "indecisive"
        return record

    group = load_group(group_name)
    if mode == "herz":
        other = load_group(other_name)
        report = check_ap_tensor(group, other, pv, pairs=trials, cfg=cfg)
        record.residuals["worst_gap"] = report.worst_gap
        record.verdict = report.verdict
        return record

    # coproduct: exact matrix identity on every translation
    defect = coproduct_check(group)
    record.residuals["coproduct_defect"] = defect
    record.verdict = "pass" if defect == 0.0 else "fail"
    return record


@main.command()
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--mode", type=click.Choice(["nuclear", "herz", "coproduct"]), default="nuclear", show_default=True, help="Which tensor identity to exercise.")
@click.option("--group", "group_name", default="Z_2", show_default=True)
@click.option("--other-group", "other_name", default="Z_2", show_default=True, help="Second factor for the herz mode.")
@click.option("--trials", type=int, default=10, show_default=True)
@common_options
def tensor(p_text, mode, group_name, other_name, trials, seed, output, fmt,
           single_lane, budget_restarts, budget_iters, no_figures):
    """Tensor-product identities: nuclear spaces, Herz algebras, coproduct."""
    _run_and_exit(
        lambda: _run_tensor(
            p_text, mode, group_name, other_name, trials,
            _build_cfg(seed, budget_restarts, budget_iters), single_lane,
        ),
        output, fmt, not no_figures,
    )


# ---------------------------------------------------------------------------
# group-suite


def _run_group_suite(p_text, group_name, n_max, trials, cfg, single_lane):
    pv = PExponent(_parse_p(p_text))
    group = load_group(group_name)
    inputs = {
        "p": p_text,
        "group": group.name,
        "order": group.order,
        "abelian": group.is_abelian,
        "n_max": n_max,
        "trials": trials,
        "single_lane": single_lane,
        "restarts": cfg.restarts,
        "max_iters": cfg.max_iters,
    }
    record = _make_record("group-suite", inputs, cfg.seed)
    failures = []
    loose = []

    # unit elements of the algebra: both norms are exactly one
    delta_est = ap_norm(group, GroupFunction.delta(group).values, pv, cfg)
    unit_est = ap_norm(group, GroupFunction.one(group).values, pv, cfg)
    record.estimates["ap_delta"] = delta_est
    record.estimates["ap_unit"] = unit_est
    unit_gap = max(
        abs(delta_est.lower - 1.0), abs(delta_est.upper - 1.0),
        abs(unit_est.lower - 1.0), abs(unit_est.upper - 1.0),
    )
    record.residuals["unit_gap"] = unit_gap
    if unit_gap > ORDER_TOL:
        failures.append("unit_gap")

    # comultiplication on translations is an exact matrix identity
    defect = coproduct_check(group)
    record.residuals["coproduct_defect"] = defect
    if defect != 0.0:
        failures.append("coproduct")

    # averaging projection: structural identities plus level contractivity
    qe = check_quasi_expectation(group, pv, n_max=min(n_max, 3), cfg=cfg)
    record.residuals["qe_idempotency"] = qe.idempotency_defect
    record.residuals["qe_commutation"] = qe.commutation_defect
    record.residuals["qe_translation_fix"] = qe.translation_fix_defect
    qe_excess = max(
        [v - 1.0 for _, v in qe.level_lower_bounds], default=0.0
    )
    record.residuals["qe_level_excess"] = max(qe_excess, 0.0)
    if qe.verdict != "pass":
        failures.append("quasi_expectation")

    # characters are isometric multipliers
    chars = unitary_characters(group)
    record.residuals["character_count"] = float(chars.shape[0])
    if chars.shape[0] > 1:
        char_est = multiplier_norm(group, chars[1], pv, cfg)
        record.estimates["character_multiplier"] = char_est
        char_gap = max(abs(char_est.lower - 1.0), abs(char_est.upper - 1.0))
        record.residuals["character_gap"] = char_gap
        if char_gap > ORDER_TOL:
            failures.append("character_multiplier")

    # seeded random functions: the four multiplier brackets must agree
    worst_gap = 0.0
    worst_excess = 0.0
    for k in range(trials):
        rng = cfg.rng(f"suite-u-{k}")
        values = rng.standard_normal(group.order) + 1j * rng.standard_normal(group.order)
        estimates, gap, excess = _multiplier_bundle(
            group, values, pv, n_max, None, cfg
        )
        worst_excess = max(worst_excess, excess)
        if gap >= worst_gap:
            worst_gap = gap
            record.estimates.update(estimates)
    record.residuals["multiplier_worst_gap"] = worst_gap
    record.residuals["multiplier_ordering_excess"] = worst_excess
    if worst_excess > ORDER_TOL:
        failures.append("multiplier_ordering")
    if worst_gap > OVERLAP_TOL:
        loose.append("multiplier_overlap")

    # abelian groups at p = 2 carry an absolute Fourier oracle
    if pv.is_two and group.is_abelian:
        rng = cfg.rng("suite-fourier")
        values = rng.standard_normal(group.order) + 1j * rng.standard_normal(group.order)
        est = ap_norm(group, values, pv, cfg)
        oracle = _fourier_coefficient_sum(group, values)
        fgap = max(est.lower - oracle, oracle - est.upper, 0.0)
        record.estimates["fourier_sample"] = est
        record.residuals["fourier_gap"] = fgap
        if fgap > 1e-4:
            failures.append("fourier")

    if failures:
        record.verdict = "fail"
        record.residuals["failed_checks"] = float(len(failures))
    elif loose:
        record.verdict = "indecisive"
    else:
        record.verdict = "pass"
    return record


@main.command("group-suite")
@click.option("--p", "p_text", default="2", show_default=True)
@click.option("--group", "group_name", default="S_3", show_default=True)
@click.option("--n-max", type=int, default=3, show_default=True)
@click.option("--d-max", type=int, default=None, help="Accepted for symmetry; the suite uses the per-quantity defaults.")
@click.option("--trials", type=int, default=3, show_default=True, help="Random multiplier functions to bundle-check.")
@common_options
def group_suite(p_text, group_name, n_max, d_max, trials, seed, output, fmt,
                single_lane, budget_restarts, budget_iters, no_figures):
    """Full invariant battery for one group at one exponent."""
    _run_and_exit(
        lambda: _run_group_suite(
            p_text, group_name, n_max, trials,
            _build_cfg(seed, budget_restarts, budget_iters), single_lane,
        ),
        output, fmt, not no_figures,
    )


if __name__ == "__main__":
    main()
