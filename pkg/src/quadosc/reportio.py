"""Deterministic CSV/JSON/SVG emission with reproducibility headers.

Identical inputs produce byte-identical files: no timestamps, CSV floats
printed with 17 significant digits, JSON keys sorted.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from . import __version__

ENV_OUT_DIR = "QUADOSC_OUT_DIR"


def default_out_path(filename):
    """Resolve a default output path under $QUADOSC_OUT_DIR (or cwd)."""
    base = os.environ.get(ENV_OUT_DIR, "")
    return Path(base) / filename if base else Path(filename)


def fmt_float(x):
    """Full round-trip decimal formatting, 17 significant digits."""
    if isinstance(x, float) and (x != x):
        return "nan"
    return format(float(x), ".17g")


def header_pairs(command, seed, **echo):
    """Ordered (key, value) metadata pairs common to every output file."""
    pairs = [("tool", "quadosc"), ("version", __version__), ("command", command)]
    pairs.extend(sorted(echo.items()))
    pairs.append(("seed", seed))
    return pairs


def write_csv(path, meta_pairs, columns, rows):
    """CSV with '#'-prefixed metadata lines, a header row, and 17g floats."""
    lines = [f"# {k} = {v}" for k, v in meta_pairs]
    lines.append(",".join(columns))
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, str):
                cells.append(cell)
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            else:
                cells.append(fmt_float(cell))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return None if v != v else v
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value

def write_json(path, meta_pairs, payload):
    """Single flat JSON object: metadata keys first, then the payload."""
    obj = {k: _jsonable(v) for k, v in meta_pairs}
    for k, v in payload.items():
        obj[k] = _jsonable(v)
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def render_region_svg(path, rows):
    """Static 800x600 SVG of the regime boundary and its reference curves.

    Shades the region above the solved boundary (where the gap equals the
    off-diagonal minimum), and overlays the two reference curves.
    """
    width, height = 800, 600
    ml, mr, mt, mb = 70, 30, 40, 60
    pw, ph = width - ml - mr, height - mt - mb
    ok_rows = [p for p in rows if p.status != "failed" and p.r_star == p.r_star]
    if not ok_rows:
        raise ValueError("no solved rows to plot")
    x_min, x_max = 0.0, 1.0
    y_min = 0.0
    y_max = max(max(p.r_sufficient for p in rows), max(p.r_star for p in ok_rows)) * 1.05

    def sx(nu):
        return ml + (nu - x_min) / (x_max - x_min) * pw

    def sy(r):
        return mt + ph - (r - y_min) / (y_max - y_min) * ph

    def polyline(pts, color, dash=""):
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        return (
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{extra} '
            f'points="{coords}"/>'
        )

    star = [(p.nu, p.r_star) for p in ok_rows]
    suff = [(p.nu, p.r_sufficient) for p in rows]
    fig = [(p.nu, p.r_figure) for p in rows]

    shade_pts = [(p.nu, min(p.r_star, y_max)) for p in ok_rows]
    shade = (
        " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in shade_pts)
        + f" {sx(shade_pts[-1][0]):.2f},{sy(y_max):.2f}"
        + f" {sx(shade_pts[0][0]):.2f},{sy(y_max):.2f}"
    )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<polygon points="{shade}" fill="#c8d8f0" fill-opacity="0.6"/>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = x_min + frac * (x_max - x_min)
        y = y_min + frac * (y_max - y_min)
        parts.append(
            f'<text x="{sx(x):.2f}" y="{mt + ph + 20}" font-size="12" '
            f'text-anchor="middle">{x:.2f}</text>'
        )
        parts.append(
            f'<text x="{ml - 8}" y="{sy(y):.2f}" font-size="12" '
            f'text-anchor="end" dominant-baseline="middle">{y:.2f}</text>'
        )
    parts.append(polyline(star, "#1f3d99"))
    parts.append(polyline(suff, "#993d1f", dash="6 4"))
    parts.append(polyline(fig, "#3d991f", dash="2 4"))
    parts.append(
        f'<text x="{ml + pw / 2:.0f}" y="{height - 15}" font-size="14" '
        f'text-anchor="middle">nu</text>'
    )
    parts.append(
        f'<text x="18" y="{mt + ph / 2:.0f}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 18 {mt + ph / 2:.0f})">r</text>'
    )
    parts.append(
        f'<text x="{ml + 10}" y="{mt + 18}" font-size="12" fill="#1f3d99">'
        "solved boundary (shaded: exact off-diagonal gap)</text>"
    )
    parts.append(
        f'<text x="{ml + 10}" y="{mt + 34}" font-size="12" fill="#993d1f">'
        "sufficient condition 2 nu^2/(1-nu^2)</text>"
    )
    parts.append(
        f'<text x="{ml + 10}" y="{mt + 50}" font-size="12" fill="#3d991f">'
        "reference curve nu^2/(1-nu^2)</text>"
    )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
