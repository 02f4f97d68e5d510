"""File emission: CSV tables, minimal SVG line charts, and run manifests.

All files are written atomically (temp file in the target directory, then
rename), so an interrupted run never leaves a partial file.  Floats are
formatted with ``repr``, the shortest round-trip form, which makes equal
results byte-identical across runs.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import tempfile
from datetime import datetime, timezone

import numpy as np

SWEEP_HEADER = ("model", "N", "magnitude", "trial", "F", "Delta", "agg")
STATS_HEADER = (
    "model", "N", "magnitude", "trials",
    "mean_F", "std_F", "mean_Delta", "std_Delta", "delta_bar",
)
SLOPES_HEADER = ("model", "N", "slope", "intercept", "residual", "slope_origin")
RATIOS_HEADER = ("N", "M", "slope_N", "slope_M", "measured", "predicted", "accuracy")


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def sweep_rows(result):
    """Per-trial rows plus one aggregate row (agg=1) per grid point.

    Aggregate rows carry the trial count in the ``trial`` column, the mean
    fidelity in ``F`` and the quadratic-mean deviation in ``Delta``.
    """
    model = result.config.model
    rows = []
    for cell in result.cells:
        for t in range(cell.trials):
            rows.append(
                (model, cell.n, cell.magnitude, t,
                 float(cell.fidelities[t]), float(cell.deviations[t]), 0)
            )
        rows.append((model, cell.n, cell.magnitude, cell.trials,
                     cell.mean_f, cell.delta_bar, 1))
    return rows


def stats_rows(result):
    return [
        (result.config.model, c.n, c.magnitude, c.trials,
         c.mean_f, c.std_f, c.mean_delta, c.std_delta, c.delta_bar)
        for c in result.cells
    ]


def slopes_rows(result):
    return [
        (result.config.model, n, fit.slope, fit.intercept, fit.residual, fit.slope_origin)
        for n, fit in sorted(result.fits.items())
    ]


def ratios_rows(slopes, entries):
    return [
        (e.n, e.m, slopes[e.n], slopes[e.m], e.measured, e.predicted, e.accuracy)
        for e in entries
    ]


# ---------------------------------------------------------------------------
# minimal SVG line charts (no plotting dependency; CSV stays canonical)
# ---------------------------------------------------------------------------

_SERIES_COLORS = ("#c0392b", "#27ae60", "#2980b9", "#e67e22", "#8e44ad", "#16a085")


def write_line_chart(path, series, title, x_label, y_label,
                     width=640, height=440) -> None:
    """``series`` is a list of (label, xs, ys) tuples drawn as polylines."""
    margin = 64
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(min(ys_all), 0.0), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def sx(x):
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{margin}" y1="{height-margin}" x2="{width-margin}" y2="{height-margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height-margin}" stroke="black"/>',
        f'<text x="{width/2:.1f}" y="{height-16}" text-anchor="middle" font-size="12">{x_label}</text>',
        f'<text x="18" y="{height/2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 18 {height/2:.1f})">{y_label}</text>',
    ]
    for k in range(5):
        xv = x_lo + k * (x_hi - x_lo) / 4
        yv = y_lo + k * (y_hi - y_lo) / 4
        parts.append(
            f'<text x="{sx(xv):.1f}" y="{height-margin+16}" text-anchor="middle" '
            f'font-size="10">{xv:.4g}</text>'
        )
        parts.append(
            f'<text x="{margin-6}" y="{sy(yv)+3:.1f}" text-anchor="end" '
            f'font-size="10">{yv:.4g}</text>'
        )
    for idx, (label, xs, ys) in enumerate(series):
        color = _SERIES_COLORS[idx % len(_SERIES_COLORS)]
        points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        for x, y in zip(xs, ys):
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" fill="{color}"/>')
        parts.append(
            f'<text x="{width-margin+8}" y="{margin + 16*idx}" font-size="11" '
            f'fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    atomic_write_text(path, "\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# run manifest
# ---------------------------------------------------------------------------

def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(path, command, config, seed, started, outputs, extra=None) -> None:
    """JSON manifest: tool version, config echo, timestamps, output digests."""
    from . import __version__
    from ._kernels import backend_name

    if dataclasses.is_dataclass(config) and not isinstance(config, type):
        config = dataclasses.asdict(config)
    manifest = {
        "tool": "unotsim",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "backend": backend_name(),
        "started": started,
        "finished": utc_now(),
        "outputs": {os.path.basename(p): _sha256(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
