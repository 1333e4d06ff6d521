"""File formats: PNG rasters, JSON documents, CSV tables and SVG overlays."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .bernstein import bezier_eval


def read_png(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def write_png(path, image) -> None:
    Image.fromarray(np.asarray(image, dtype=np.uint8), "RGB").save(path, format="PNG")


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed indent, trailing newline.

    Floats go through ``repr`` so values survive a load/dump cycle bit for bit.
    """
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if row.get(h) is None else _cell(row.get(h)) for h in header])
    return buf.getvalue()


def _cell(v):
    return repr(v) if isinstance(v, float) else v


def write_csv(path, header, rows) -> None:
    Path(path).write_text(csv_text(header, rows), encoding="utf-8")


_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def _polyline(pts, color, width=1.5, dash=None):
    coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{extra}/>')


def overlay_svg(frame, centerline, curves, ground_truth=None, title="") -> str:
    """SVG of the centerline samples with fitted Bezier curves on top.

    ``curves`` is a sequence of ``(label, FeatureVector)``.  Output is
    deterministic text so it can be compared byte for byte.
    """
    width, height = frame
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<title>{title}</title>",
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if ground_truth is not None:
        out.append(_polyline(ground_truth, "#bbbbbb", width=4))
    for x, y in np.asarray(centerline):
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="1.5" fill="black"/>')
    rho = np.linspace(0.0, 1.0, 200)
    for i, (label, feature) in enumerate(curves):
        color = _PALETTE[i % len(_PALETTE)]
        out.append(f'<g id="{label}">')
        out.append(_polyline(bezier_eval(feature, rho), color))
        out.append(_polyline(feature.control_points, color, width=0.75, dash="4 3"))
        out.append("</g>")
        out.append(f'<text x="10" y="{20 + 16 * i}" fill="{color}" '
                   f'font-family="sans-serif" font-size="13">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
