"""Figure rendering from walk-curve and peak-sweep CSV files.

Two panels: the time panel plots success probability against gap-rescaled
time with one trace per J/eta value (colored blue through black in ratio
order) plus a red dashed trace for rows labelled with an infinite ratio (the
exact-reference limit); the peak panel plots peak probability against J/eta
with one marker series and one dashed reference line per qubit count.

Rendering is read-only over its inputs, writes the image atomically, and
uses a fixed style so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.colors import LinearSegmentedColormap

CURVE_COLUMNS = ("n", "J_over_eta", "t", "t_scaled", "p_success", "leakage")
SWEEP_COLUMNS = ("n", "J_over_eta", "p_peak", "p_reference", "gap")

#: marker/color table per qubit count for the peak panel
MARKER_TABLE = {
    2: ("o", "red"),
    3: ("^", "blue"),
    4: ("s", "magenta"),
    5: ("p", "green"),
    6: ("h", "black"),
}
FALLBACK_MARKER = ("D", "gray")

RATIO_CMAP = LinearSegmentedColormap.from_list("ratio", ["#1f50c8", "#000000"])
DPI = 150


class InputError(RuntimeError):
    """Missing columns or empty data in an input CSV."""


@dataclass(frozen=True)
class FigureSpec:
    top_csv: str | None = None
    bottom_csv: str | None = None
    out_path: str = "fig.png"
    panels: str = "both"           # top | bottom | both
    cmap_start: str = "#1f50c8"
    cmap_end: str = "#000000"
    markers: dict = field(default_factory=lambda: dict(MARKER_TABLE))

    def __post_init__(self):
        if self.panels not in ("top", "bottom", "both"):
            raise ValueError(f"unknown panel selection {self.panels!r}")
        if self.panels in ("top", "both") and not self.top_csv:
            raise ValueError("top panel requested without a curve CSV")
        if self.panels in ("bottom", "both") and not self.bottom_csv:
            raise ValueError("bottom panel requested without a sweep CSV")


def read_rows(path: str, required: tuple[str, ...]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in required if col not in header]
        if missing:
            raise InputError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = []
        for raw in reader:
            if raw.get("error"):
                continue
            rows.append({col: float(raw[col]) if col != "n" else int(raw[col])
                         for col in required})
    if not rows:
        raise InputError(f"{path}: no data rows")
    return rows


def _ratio_color(ratio: float, lo: float, hi: float, spec: FigureSpec):
    cmap = LinearSegmentedColormap.from_list("ratio", [spec.cmap_start, spec.cmap_end])
    if hi <= lo:
        return cmap(1.0)
    return cmap((ratio - lo) / (hi - lo))


def draw_top(ax, rows: list[dict], spec: FigureSpec) -> int:
    """Success-probability traces against rescaled time; returns trace count."""
    finite = sorted({r["J_over_eta"] for r in rows if math.isfinite(r["J_over_eta"])})
    lo, hi = (finite[0], finite[-1]) if finite else (0.0, 1.0)
    traces = 0
    for ratio in finite:
        pts = sorted((r["t_scaled"], r["p_success"])
                     for r in rows if r["J_over_eta"] == ratio)
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                color=_ratio_color(ratio, lo, hi, spec), lw=0.9)
        traces += 1
    reference = sorted((r["t_scaled"], r["p_success"])
                       for r in rows if math.isinf(r["J_over_eta"]))
    if reference:
        ax.plot([p[0] for p in reference], [p[1] for p in reference],
                "r--", lw=1.4, label="exact reference")
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel(r"$t\,\Delta/\pi$")
    ax.set_ylabel("success probability")
    return traces


def draw_bottom(ax, rows: list[dict], spec: FigureSpec) -> int:
    """Peak probability against J/eta per qubit count; returns series count."""
    series = 0
    for n in sorted({r["n"] for r in rows}):
        sub = sorted((r["J_over_eta"], r["p_peak"], r["p_reference"])
                     for r in rows if r["n"] == n)
        marker, color = spec.markers.get(n, FALLBACK_MARKER)
        ax.plot([s[0] for s in sub], [s[1] for s in sub], linestyle="none",
                marker=marker, color=color, ms=4.5, label=f"n = {n}")
        ax.axhline(sub[-1][2], color=color, ls="--", lw=0.9)
        series += 1
    ax.set_xlabel(r"$J\,\eta^{-1}$")
    ax.set_ylabel("peak success probability")
    ax.legend(loc="lower right", fontsize=8)
    return series


def render(spec: FigureSpec) -> dict:
    """Render the requested panels and write the image atomically."""
    panels = []
    if spec.panels in ("top", "both"):
        panels.append(("top", read_rows(spec.top_csv, CURVE_COLUMNS)))
    if spec.panels in ("bottom", "both"):
        panels.append(("bottom", read_rows(spec.bottom_csv, SWEEP_COLUMNS)))

    fig, axes = plt.subplots(len(panels), 1, figsize=(5.2, 3.4 * len(panels)))
    if len(panels) == 1:
        axes = [axes]
    counts = {}
    for ax, (kind, rows) in zip(axes, panels):
        if kind == "top":
            counts["traces"] = draw_top(ax, rows, spec)
        else:
            counts["series"] = draw_bottom(ax, rows, spec)
    fig.tight_layout()

    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out.parent, prefix=f".{out.name}.",
                               suffix=out.suffix)
    os.close(fd)
    try:
        fig.savefig(tmp, dpi=DPI, metadata=_scrubbed_metadata(out.suffix))
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    finally:
        plt.close(fig)
    return counts


def _scrubbed_metadata(suffix: str) -> dict | None:
    # keep raster output byte-stable: no creator/date stamps
    if suffix.lower() == ".png":
        return {"Software": None}
    if suffix.lower() in (".svg", ".pdf"):
        return {"Creator": None, "Date": None}
    return None
