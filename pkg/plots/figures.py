"""BER-vs-SNR and required-SNR-vs-phase figures from sweep CSVs.

Input is the simulator's CSV schema (one row per measured BER point).
Output depends only on the CSV content and the FigureSpec: the footer
lists input file names, never timestamps, so regenerating a figure from
the same data is reproducible.
"""

from __future__ import annotations

import csv
import math
import os
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

CSV_COLUMNS = ("detector", "scenario", "snr_db", "ber", "n_bits", "n_errors")

_PHASE_RE = re.compile(r"phase=([-+0-9.eE]+|rand)")

_DEFAULT_CYCLE = (
    {"color": "k", "marker": "o", "linestyle": "-"},
    {"color": "tab:blue", "marker": "s", "linestyle": "--"},
    {"color": "tab:red", "marker": "^", "linestyle": "-."},
    {"color": "tab:green", "marker": "v", "linestyle": ":"},
    {"color": "tab:purple", "marker": "d", "linestyle": "-"},
    {"color": "tab:orange", "marker": "x", "linestyle": "--"},
)


@dataclass(frozen=True)
class GapAnnotation:
    """Annotate the horizontal (dB) gap between two curves.

    For BER figures `at` is a BER level; for phase figures it is a phase
    in radians (folded into [0, pi] like the data)."""

    detector_a: str
    detector_b: str
    at: float


@dataclass(frozen=True)
class FigureSpec:
    csv_paths: Tuple[str, ...]
    out_path: str
    styles: Mapping[str, Mapping[str, object]] = field(default_factory=dict)
    xlim: Optional[Tuple[float, float]] = None
    ylim: Optional[Tuple[float, float]] = None
    log_y: bool = True
    gaps: Tuple[GapAnnotation, ...] = ()
    target_ber: float = 1e-5
    title: str = ""

    def __post_init__(self):
        if not self.csv_paths:
            raise ValueError("need at least one input CSV")
        if not (0.0 < self.target_ber < 1.0):
            raise ValueError("target_ber must be in (0, 1)")


def wilson_interval(k: int, n: int, z: float = 1.96) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion; sane at k = 0."""
    if n <= 0:
        raise ValueError("n must be positive")
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


def load_rows(csv_paths: Sequence[str]) -> List[dict]:
    """Rows from one or more sweep CSVs, numeric fields parsed.

    Column handling is by name, so extra columns are fine; a missing
    required column raises with that column's name."""
    rows: List[dict] = []
    for path in csv_paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for col in CSV_COLUMNS:
                if col not in header:
                    raise ValueError(f"{path}: missing column {col!r}")
            for raw in reader:
                rows.append(
                    {
                        "detector": raw["detector"],
                        "scenario": raw["scenario"],
                        "snr_db": float(raw["snr_db"]),
                        "ber": float(raw["ber"]),
                        "n_bits": int(raw["n_bits"]),
                        "n_errors": int(raw["n_errors"]),
                    }
                )
    return rows


def _group_by_detector(rows: Sequence[dict]) -> Dict[str, List[dict]]:
    out: Dict[str, List[dict]] = {}
    for row in rows:
        out.setdefault(row["detector"], []).append(row)
    return out


def _check_referenced_detectors(spec: FigureSpec, present) -> None:
    wanted = set(spec.styles) | {
        d for g in spec.gaps for d in (g.detector_a, g.detector_b)
    }
    missing = sorted(wanted - set(present))
    if missing:
        raise ValueError(f"detectors not in CSV data: {', '.join(missing)}")


def _style_for(spec: FigureSpec, detector: str, index: int,
               label: Optional[str] = None) -> dict:
    style = dict(_DEFAULT_CYCLE[index % len(_DEFAULT_CYCLE)])
    style["label"] = detector
    style.update(spec.styles.get(detector, {}))
    if label is not None and "label" not in spec.styles.get(detector, {}):
        style["label"] = label
    return style


def _curve_label(detector: str, scenario: str, scenarios) -> str:
    """Detector name, plus whichever scenario fields vary across that
    detector's curves (e.g. the block length when L is swept)."""
    if len(scenarios) == 1:
        return detector
    mine = scenario.split(";")
    diff = []
    for i, part in enumerate(mine):
        others = {s.split(";")[i] for s in scenarios if i < len(s.split(";"))}
        if len(others) > 1:
            diff.append(part)
    return f"{detector} {' '.join(diff)}" if diff else detector


def _footer(spec: FigureSpec, fig) -> None:
    names = ", ".join(os.path.basename(p) for p in spec.csv_paths)
    fig.text(0.01, 0.005, f"data: {names}", fontsize=6, color="0.5")


def required_snr(snrs_db, bers, target: float) -> float:
    """SNR where a decreasing BER curve crosses `target`, by log-linear
    interpolation between the bracketing samples."""
    order = np.argsort(snrs_db)
    s = np.asarray(snrs_db, float)[order]
    b = np.asarray(bers, float)[order]
    keep = b > 0.0
    s, b = s[keep], b[keep]
    above = b > target
    if not above.any() or above.all():
        raise ValueError("curve does not cross the target BER")
    i = int(np.nonzero(above)[0][-1])
    if i + 1 >= len(s):
        raise ValueError("curve does not cross the target BER")
    lb0, lb1 = math.log10(b[i]), math.log10(b[i + 1])
    frac = (math.log10(target) - lb0) / (lb1 - lb0)
    return float(s[i] + frac * (s[i + 1] - s[i]))


def _annotate_gap(ax, x_a: float, x_b: float, y: float, log_y: bool) -> None:
    ax.annotate(
        "",
        xy=(x_a, y),
        xytext=(x_b, y),
        arrowprops={"arrowstyle": "<->", "color": "0.3", "lw": 0.8},
    )
    y_text = y * 1.5 if log_y else y + 0.1
    ax.annotate(
        f"{abs(x_b - x_a):.2f} dB",
        xy=(0.5 * (x_a + x_b), y_text),
        ha="center",
        fontsize=8,
    )


def plot_ber(spec: FigureSpec, return_figure: bool = False):
    """Semilog-y BER curves, one per detector, Wilson CI error bars."""
    rows = load_rows(spec.csv_paths)
    if not rows:
        raise ValueError("no data rows in input CSVs")
    groups = _group_by_detector(rows)
    _check_referenced_detectors(spec, groups)
    curves: Dict[Tuple[str, str], List[dict]] = {}
    for row in rows:
        curves.setdefault((row["detector"], row["scenario"]), []).append(row)
    det_scenarios: Dict[str, List[str]] = {}
    for det, scen in curves:
        det_scenarios.setdefault(det, []).append(scen)

    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    for idx, ((det, scen), pts) in enumerate(curves.items()):
        pts = sorted(pts, key=lambda r: r["snr_db"])
        if spec.log_y:
            pts = [p for p in pts if p["ber"] > 0.0]
        snr = np.array([p["snr_db"] for p in pts])
        ber = np.array([p["ber"] for p in pts])
        ci = np.array(
            [wilson_interval(p["n_errors"], p["n_bits"]) for p in pts]
        ).T
        yerr = np.stack([ber - ci[0], ci[1] - ber]).clip(min=0.0)
        label = _curve_label(det, scen, det_scenarios[det])
        ax.errorbar(
            snr, ber, yerr=yerr, capsize=2, markersize=4, linewidth=1.0,
            **_style_for(spec, det, idx, label),
        )
    if spec.log_y:
        ax.set_yscale("log")
    for gap in spec.gaps:
        curves = {}
        for det in (gap.detector_a, gap.detector_b):
            pts = sorted(groups[det], key=lambda r: r["snr_db"])
            curves[det] = required_snr(
                [p["snr_db"] for p in pts], [p["ber"] for p in pts], gap.at
            )
        _annotate_gap(
            ax, curves[gap.detector_a], curves[gap.detector_b], gap.at,
            spec.log_y,
        )
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    _footer(spec, fig)
    fig.savefig(spec.out_path)
    if return_figure:
        return spec.out_path, fig
    plt.close(fig)
    return spec.out_path


def _folded_phase(scenario: str) -> float:
    m = _PHASE_RE.search(scenario)
    if not m or m.group(1) == "rand":
        raise ValueError(f"no fixed phase in scenario {scenario!r}")
    phi = float(m.group(1)) % (2.0 * math.pi)
    # magnitudes cannot tell phi from -phi, so fold onto [0, pi]
    return min(phi, 2.0 * math.pi - phi)


def plot_snr_vs_phase(spec: FigureSpec, return_figure: bool = False):
    """Required SNR at spec.target_ber versus relative phase on [0, pi].

    The phase comes from each row's scenario string; rows sharing a
    (detector, phase) form one BER curve whose crossing is interpolated."""
    rows = load_rows(spec.csv_paths)
    if not rows:
        raise ValueError("no data rows in input CSVs")
    groups = _group_by_detector(rows)
    _check_referenced_detectors(spec, groups)

    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    curves: Dict[str, Tuple[np.ndarray, np.ndarray]] = {}
    for idx, (det, pts) in enumerate(groups.items()):
        by_phase: Dict[float, List[dict]] = {}
        for p in pts:
            by_phase.setdefault(_folded_phase(p["scenario"]), []).append(p)
        phases = np.array(sorted(by_phase))
        req = []
        for ph in phases:
            try:
                req.append(
                    required_snr(
                        [p["snr_db"] for p in by_phase[ph]],
                        [p["ber"] for p in by_phase[ph]],
                        spec.target_ber,
                    )
                )
            except ValueError as exc:
                raise ValueError(
                    f"{det} at phase {ph:.3f}: {exc}"
                ) from None
        req = np.array(req)
        curves[det] = (phases, req)
        ax.plot(phases, req, markersize=4, linewidth=1.0,
                **_style_for(spec, det, idx))
    for gap in spec.gaps:
        ys = []
        for det in (gap.detector_a, gap.detector_b):
            phases, req = curves[det]
            ys.append(float(req[np.argmin(np.abs(phases - gap.at))]))
        ax.annotate(
            "",
            xy=(gap.at, ys[0]),
            xytext=(gap.at, ys[1]),
            arrowprops={"arrowstyle": "<->", "color": "0.3", "lw": 0.8},
        )
        ax.annotate(
            f"{abs(ys[1] - ys[0]):.2f} dB",
            xy=(gap.at + 0.05, 0.5 * (ys[0] + ys[1])),
            fontsize=8,
        )
    ax.set_xlim(spec.xlim if spec.xlim else (0.0, math.pi))
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    ax.set_xlabel("relative phase (rad)")
    ax.set_ylabel(f"SNR for BER = {spec.target_ber:g} (dB)")
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    _footer(spec, fig)
    fig.savefig(spec.out_path)
    if return_figure:
        return spec.out_path, fig
    plt.close(fig)
    return spec.out_path
