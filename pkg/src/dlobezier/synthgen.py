"""Synthetic deformable-linear-object shapes with known ground truth.

Each family is an explicit parametric curve ``u -> (x, y)`` on
``u in [0, 1]``.  Samples are placed at equal arc length by inverting a
fine cumulative-chord table, then evaluated on the exact formula, so a
noise-free sample lies exactly on the curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .bernstein import MAX_ORDER, FeatureVector, bezier_eval
from .errors import ConfigError
from .parameterization import Centerline, segment_lengths

FAMILIES = ("line", "arc", "sine", "spiral", "random-bezier")
DEFAULT_FRAME = (640, 480)

DEFAULTS = {
    "line": {"start": (40.0, 240.0), "end": (600.0, 240.0)},
    "arc": {"center": (320.0, 300.0), "radius": 200.0, "start_deg": 200.0, "sweep_deg": 140.0},
    "sine": {"x_start": 40.0, "x_end": 600.0, "center_y": 240.0, "amplitude": 40.0,
             "periods": 1.5, "phase": 0.0},
    "spiral": {"center": (320.0, 240.0), "r_start": 30.0, "r_end": 200.0, "turns": 1.25,
               "start_deg": 0.0},
    "random-bezier": {"order": 5, "margin": 40.0},
}

# documented admissible ranges; frame containment is checked separately
_RANGES = {
    ("arc", "radius"): (1e-9, np.inf),
    ("arc", "sweep_deg"): (1e-9, 360.0),
    ("sine", "amplitude"): (0.0, np.inf),
    ("sine", "periods"): (1e-9, 4.0),
    ("spiral", "r_start"): (0.0, np.inf),
    ("spiral", "r_end"): (0.0, np.inf),
    ("spiral", "turns"): (1e-9, 3.0),
    ("random-bezier", "order"): (1, MAX_ORDER),
    ("random-bezier", "margin"): (0.0, np.inf),
}

_TABLE_SIZE = 20001


def _curve(family: str, p: dict, control_points):
    if family == "line":
        a, b = np.asarray(p["start"], float), np.asarray(p["end"], float)
        return lambda u: a + u[:, None] * (b - a)
    if family == "arc":
        c = np.asarray(p["center"], float)

        def f(u):
            th = np.radians(p["start_deg"] + u * p["sweep_deg"])
            return c + p["radius"] * np.column_stack([np.cos(th), np.sin(th)])
        return f
    if family == "sine":
        def f(u):
            x = p["x_start"] + u * (p["x_end"] - p["x_start"])
            y = p["center_y"] + p["amplitude"] * np.sin(2 * np.pi * p["periods"] * u + p["phase"])
            return np.column_stack([x, y])
        return f
    if family == "spiral":
        c = np.asarray(p["center"], float)

        def f(u):
            r = p["r_start"] + u * (p["r_end"] - p["r_start"])
            th = np.radians(p["start_deg"]) + 2 * np.pi * p["turns"] * u
            return c + r[:, None] * np.column_stack([np.cos(th), np.sin(th)])
        return f
    if family == "random-bezier":
        return lambda u: bezier_eval(control_points, u)
    raise ConfigError(f"unknown family {family!r}; expected one of {FAMILIES}")


@dataclass(frozen=True, eq=False)
class SyntheticShape:
    """A generated curve plus its dense ground-truth polyline."""

    family: str
    parameters: dict
    seed: int
    frame: tuple
    control_points: FeatureVector | None = None
    _table_u: np.ndarray = field(default=None, repr=False)
    _table_s: np.ndarray = field(default=None, repr=False)
    dense: np.ndarray = field(default=None, repr=False)

    @property
    def length(self) -> float:
        return float(self._table_s[-1])

    def point_at(self, u) -> np.ndarray:
        """Exact curve points at the family's own parameter ``u``."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return _curve(self.family, self.parameters, self.control_points)(u)

    def arc_params(self, count: int) -> np.ndarray:
        """Curve parameters ``u`` of ``count`` points at equal arc spacing."""
        if count < 2:
            raise ConfigError("need at least 2 samples")
        s = np.linspace(0.0, self.length, count)
        u = np.interp(s, self._table_s, self._table_u)
        u[0], u[-1] = 0.0, 1.0
        return u

    def sample(self, count: int) -> np.ndarray:
        return self.point_at(self.arc_params(count))

    def ground_truth(self) -> dict:
        """JSON-ready description, including the dense polyline."""
        out = {
            "family": self.family,
            "parameters": _jsonable(self.parameters),
            "seed": self.seed,
            "frame": list(self.frame),
            "length": self.length,
            "dense": self.dense.tolist(),
        }
        if self.control_points is not None:
            out["control_points"] = self.control_points.control_points.tolist()
        return out


def _jsonable(p: dict) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in p.items()}


def _merge(family: str, parameters: dict | None) -> dict:
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}; expected one of {FAMILIES}")
    p = dict(DEFAULTS[family])
    for key, value in (parameters or {}).items():
        if key not in p:
            raise ConfigError(f"family {family!r} has no parameter {key!r}")
        p[key] = tuple(float(v) for v in value) if isinstance(p[key], tuple) else value
    for key, value in p.items():
        if isinstance(value, tuple):
            if len(value) != 2 or not all(np.isfinite(value)):
                raise ConfigError(f"{family}.{key} must be a finite (x, y) pair")
            continue
        if family == "random-bezier" and key == "order":
            if int(value) != value:
                raise ConfigError("random-bezier order must be an integer")
            p[key] = value = int(value)
        else:
            p[key] = value = float(value)
        lo, hi = _RANGES.get((family, key), (-np.inf, np.inf))
        if not (np.isfinite(value) and lo <= value <= hi):
            raise ConfigError(f"{family}.{key}={value} outside [{lo}, {hi}]")
    return p


def generate(family: str, parameters: dict | None = None, seed: int = 0,
             frame=DEFAULT_FRAME) -> SyntheticShape:
    """Build a deterministic synthetic shape.

    Raises
    ------
    ConfigError
        Unknown family or parameter, values outside their range, a curve
        of zero length, or any ground-truth point outside ``frame``.
    """
    width, height = frame
    p = _merge(family, parameters)
    control = None
    if family == "random-bezier":
        rng = np.random.default_rng(seed)
        m = p["margin"]
        if 2 * m >= min(width, height):
            raise ConfigError("margin leaves no room inside the frame")
        lo, hi = np.array([m, m]), np.array([width - 1 - m, height - 1 - m])
        control = FeatureVector(rng.uniform(lo, hi, size=(p["order"] + 1, 2)))

    curve = _curve(family, p, control)
    table_u = np.linspace(0.0, 1.0, _TABLE_SIZE)
    table_s = np.concatenate([[0.0], np.cumsum(segment_lengths(curve(table_u)))])
    if not table_s[-1] > 1e-9:
        raise ConfigError(f"{family} shape has zero length")
    if np.any(np.diff(table_s) <= 0.0):
        # stationary points would make the arc-length inverse ambiguous
        keep = np.concatenate([[True], np.diff(table_s) > 0.0])
        table_u, table_s = table_u[keep], table_s[keep]

    shape = SyntheticShape(family, p, int(seed), (int(width), int(height)), control,
                           table_u, table_s)
    count = max(1200, int(np.ceil(2.0 * shape.length)) + 1)
    dense = shape.sample(count)
    if not np.all(np.isfinite(dense)):
        raise ConfigError("ground truth is not finite")
    if (dense.min() < 0.0 or np.any(dense.max(axis=0) > np.array([width - 1, height - 1]))):
        raise ConfigError(f"{family} shape leaves the {width}x{height} frame")
    dense.setflags(write=False)
    object.__setattr__(shape, "dense", dense)
    return shape


def sample_with_noise(shape: SyntheticShape, count: int, noise_sigma: float = 0.0,
                      seed: int = 0) -> Centerline:
    """``count`` equal-arc samples plus isotropic Gaussian noise (pixels)."""
    if noise_sigma < 0:
        raise ConfigError("noise sigma must be non-negative")
    pts = shape.sample(count)
    if noise_sigma > 0:
        pts = pts + np.random.default_rng(seed).normal(0.0, noise_sigma, size=pts.shape)
    return Centerline(pts)


@dataclass(frozen=True, eq=False)
class Rendering:
    """An RGB raster and the exact set of pixels painted with the stroke.

    ``pixels`` holds integer ``(x, y)`` = ``(column, row)`` pairs.
    """

    image: np.ndarray
    pixels: np.ndarray


def fine_polyline(shape: SyntheticShape, spacing: float = 0.1) -> np.ndarray:
    return shape.sample(max(2, int(np.ceil(shape.length / spacing)) + 1))


def render(shape: SyntheticShape, stroke_width: float = 5.0,
           colors=((220, 20, 20), (255, 255, 255))) -> Rendering:
    """Rasterize the curve: a pixel is painted if its center is within
    half the stroke width of the curve."""
    if not stroke_width > 0:
        raise ConfigError("stroke width must be positive")
    fg, bg = (np.asarray(c, dtype=np.uint8) for c in colors)
    if np.array_equal(fg, bg):
        raise ConfigError("stroke and background colors must differ")
    width, height = shape.frame
    line = fine_polyline(shape)
    half = stroke_width / 2.0
    x0, y0 = np.maximum(np.floor(line.min(axis=0) - half), 0).astype(int)
    x1 = min(int(np.ceil(line[:, 0].max() + half)), width - 1)
    y1 = min(int(np.ceil(line[:, 1].max() + half)), height - 1)
    xs, ys = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
    grid = np.column_stack([xs.ravel(), ys.ravel()])
    dist = polyline_distance(grid, line)
    pixels = grid[dist <= half]
    image = np.empty((height, width, 3), dtype=np.uint8)
    image[:] = bg
    image[pixels[:, 1], pixels[:, 0]] = fg
    return Rendering(image, pixels)


def polyline_distance(query, polyline) -> np.ndarray:
    """Distance from each query point to a densely sampled polyline.

    The nearest vertex is found with a KD-tree and refined by projecting
    onto its two adjacent segments.
    """
    query = np.asarray(query, dtype=float).reshape(-1, 2)
    polyline = np.asarray(polyline, dtype=float)
    _, idx = cKDTree(polyline).query(query)
    best = np.linalg.norm(query - polyline[idx], axis=1)
    for lo in (idx - 1, idx):
        ok = (lo >= 0) & (lo < len(polyline) - 1)
        a = polyline[np.clip(lo, 0, len(polyline) - 2)]
        b = polyline[np.clip(lo + 1, 1, len(polyline) - 1)]
        ab = b - a
        denom = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
        t = np.clip(np.sum((query - a) * ab, axis=1) / denom, 0.0, 1.0)
        d = np.linalg.norm(query - (a + t[:, None] * ab), axis=1)
        best = np.where(ok, np.minimum(best, d), best)
    return best
