"""Machine-readable run reports: JSON and CSV serialization plus
bracket-interval figures.

A report is a named set of norm brackets and residuals with a single
verdict.  JSON output is schema-versioned and key-sorted so that two
runs with the same seed produce byte-identical files except for the
wall clock field; CSV flattens the estimates one row each.  When a
report is written to a file, a matplotlib rendering of the brackets is
dropped next to it (PNG, same stem) unless figures are disabled.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from herzlab.pnorms import NormEstimate

__all__ = ["ReportRecord", "render_report", "write_report", "load_json_report"]

SCHEMA_VERSION = 1


@dataclass
class ReportRecord:
    """One CLI run: inputs, named brackets, named residuals, verdict."""

    command: str
    inputs: Dict[str, object]
    estimates: Dict[str, NormEstimate] = field(default_factory=dict)
    residuals: Dict[str, float] = field(default_factory=dict)
    verdict: str = "pass"
    wall_time: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.verdict not in ("pass", "fail", "indecisive"):
            raise ValueError(f"unknown verdict {self.verdict!r}")

    def as_dict(self) -> dict:
        estimates = {}
        for name, est in self.estimates.items():
            entry = est.as_dict()
            if est.levels:
                entry["levels"] = [[int(n), float(v)] for n, v in est.levels]
            estimates[name] = entry
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "inputs": _plain(self.inputs),
            "estimates": estimates,
            "residuals": {k: _round_float(v) for k, v in self.residuals.items()},
            "verdict": self.verdict,
            "wall_time": float(self.wall_time),
            "seed": int(self.seed),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "lower", "upper", "certificate", "method"])
        for name in sorted(self.estimates):
            est = self.estimates[name]
            upper = est.upper if math.isfinite(est.upper) else "inf"
            writer.writerow(
                [name, repr(float(est.lower)), repr(float(upper)) if upper != "inf" else "inf",
                 est.upper_certificate, est.method]
            )
        return buf.getvalue()


def _round_float(v: float) -> float:
    # repr round-trips doubles; the cast guards numpy scalars
    return float(v)


def _plain(obj):
    """Recursively coerce report inputs to JSON-stable primitives."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, float):
        return float(obj)
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def render_report(record: ReportRecord, figure_path: str) -> None:
    """Horizontal interval chart of every bracket in the report."""
    names = sorted(record.estimates)
    if not names:
        return
    fig, ax = plt.subplots(figsize=(7.0, 0.6 * len(names) + 1.4))
    for row, name in enumerate(names):
        est = record.estimates[name]
        hi = est.upper if math.isfinite(est.upper) else est.lower * 1.5 + 1.0
        ax.plot([est.lower, hi], [row, row], lw=3, color="#2a6f97", solid_capstyle="butt")
        ax.plot([est.lower], [row], marker="|", ms=14, color="#014f86")
        marker = "|" if math.isfinite(est.upper) else ">"
        ax.plot([hi], [row], marker=marker, ms=14 if marker == "|" else 8, color="#014f86")
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names)
    ax.set_xlabel("norm bracket")
    ax.set_title(f"{record.command} (seed {record.seed}, verdict {record.verdict})")
    ax.grid(axis="x", alpha=0.3)
    fig.tight_layout()
    fig.savefig(figure_path, dpi=120)
    plt.close(fig)


def write_report(
    record: ReportRecord,
    output: Optional[str],
    fmt: str = "json",
    figures: bool = True,
) -> str:
    """Serialize the record; write to the output path when given.

    Returns the serialized text either way so callers can echo it.  The
    figure lands next to the output file with a .png suffix.
    """
    if fmt == "json":
        text = record.to_json()
    elif fmt == "csv":
        text = record.to_csv()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if output:
        with open(output, "w") as fh:
            fh.write(text)
        if figures:
            stem = output.rsplit(".", 1)[0] if "." in output.split("/")[-1] else output
            render_report(record, stem + ".png")
    return text


def load_json_report(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
