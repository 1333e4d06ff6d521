"""Centerline detection: colour mask, pixel clustering, chain ordering.

Four clustering back ends reduce the foreground pixels to ``k``
centroids: ``kms`` (Lloyd k-means, k-means++ seeding), ``gmm`` (EM with
diagonal covariances, started from k-means), ``fcm`` (fuzzy c-means,
fuzziness 2) and ``som`` (self-organizing map whose neurons form a 1-D
chain).  All randomness flows from an explicit seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import ConfigError, InsufficientDataError, NoObjectError
from .parameterization import Centerline

ALGORITHMS = ("kms", "gmm", "fcm", "som")
MAX_ITER = 300
TOL = 1e-4
SOM_EPOCHS = 5
KMS_INIT = 3


@dataclass(frozen=True)
class ThresholdConfig:
    """HSV acceptance box.  Hue in degrees (``lo > hi`` wraps through 0),
    saturation and value in ``[0, 1]``.  The default picks saturated reds."""

    hue: tuple = (340.0, 20.0)
    saturation: tuple = (0.35, 1.0)
    value: tuple = (0.2, 1.0)

    @classmethod
    def from_dict(cls, d: dict | None) -> ThresholdConfig:
        d = dict(d or {})
        unknown = set(d) - {"hue", "saturation", "value"}
        if unknown:
            raise ConfigError(f"unknown threshold keys {sorted(unknown)}")
        try:
            cfg = cls(**{k: tuple(float(x) for x in v) for k, v in d.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad threshold config: {exc}") from exc
        for name in ("hue", "saturation", "value"):
            if len(getattr(cfg, name)) != 2:
                raise ConfigError(f"threshold {name} must be a (lo, hi) pair")
        return cfg

    def to_dict(self) -> dict:
        return {"hue": list(self.hue), "saturation": list(self.saturation),
                "value": list(self.value)}


@dataclass(frozen=True, eq=False)
class ForegroundMask:
    """Foreground pixel coordinates as an ``(K, 2)`` array of ``(x, y)``."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float).reshape(-1, 2)
        if px.size and (px.min() < 0 or px[:, 0].max() > self.width - 1
                        or px[:, 1].max() > self.height - 1):
            raise ValueError("mask pixel outside the image bounds")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    def __len__(self):
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class ClusterResult:
    algorithm: str
    centroids: np.ndarray
    iterations: int
    converged: bool
    history: tuple = ()
    hyperparameters: dict = field(default_factory=dict)

    def metadata(self) -> dict:
        """Everything except the centroids, for experiment records."""
        return {
            "algorithm": self.algorithm,
            "k": int(self.centroids.shape[0]),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "hyperparameters": dict(self.hyperparameters),
        }


def _in_range(x, lo, hi):
    return (x >= lo) & (x <= hi)


def detect_mask(image, threshold: ThresholdConfig | None = None) -> ForegroundMask:
    """Pixels of an 8-bit RGB raster whose HSV values fall in ``threshold``."""
    threshold = threshold or ThresholdConfig()
    rgb = np.asarray(image)
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.shape[0] == 0 or rgb.shape[1] == 0:
        raise ValueError(f"expected a non-empty (H, W, 3) image, got {rgb.shape}")
    hsv = np.asarray(Image.fromarray(rgb.astype(np.uint8), "RGB").convert("HSV"), dtype=float)
    hue = hsv[..., 0] * (360.0 / 255.0)
    sat = hsv[..., 1] / 255.0
    val = hsv[..., 2] / 255.0
    h_lo, h_hi = threshold.hue
    if h_lo <= h_hi:
        ok = _in_range(hue, h_lo, h_hi)
    else:
        ok = (hue >= h_lo) | (hue <= h_hi)
    ok &= _in_range(sat, *threshold.saturation) & _in_range(val, *threshold.value)
    rows, cols = np.nonzero(ok)
    if rows.size == 0:
        raise NoObjectError("no foreground pixels pass the colour threshold")
    return ForegroundMask(rgb.shape[1], rgb.shape[0], np.column_stack([cols, rows]))


def _sq_dist(x, c):
    diff = x[:, None, :] - c[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kmeans_plusplus(x, k, rng) -> np.ndarray:
    centers = np.empty((k, x.shape[1]))
    first = rng.integers(x.shape[0])
    centers[0] = x[first]
    d2 = ((x - centers[0]) ** 2).sum(1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0:
            j = rng.choice(x.shape[0], p=d2 / total)
        else:
            j = rng.integers(x.shape[0])
        centers[i] = x[j]
        d2 = np.minimum(d2, ((x - centers[i]) ** 2).sum(1))
    return centers


def kmeans(x, k, rng, max_iter=MAX_ITER, tol=TOL, n_init=KMS_INIT):
    """Best of ``n_init`` seeded Lloyd runs, by final inertia."""
    best = None
    for _ in range(n_init):
        run = lloyd(x, kmeans_plusplus(x, k, rng), max_iter, tol)
        if best is None or run[4][-1] < best[4][-1]:
            best = run
    return best


def lloyd(x, centers, max_iter=MAX_ITER, tol=TOL):
    """Lloyd iterations.  ``history`` holds the inertia after each
    assignment step; an empty cluster keeps its previous centroid, which
    keeps the sequence non-increasing."""
    centers = np.array(centers, dtype=float)
    k = centers.shape[0]
    history, labels = [], None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        d2 = _sq_dist(x, centers)
        new_labels = d2.argmin(1)
        history.append(float(d2[np.arange(x.shape[0]), new_labels].sum()))
        if labels is not None and np.array_equal(labels, new_labels):
            converged = True
            break
        if len(history) > 1 and history[-2] - history[-1] <= tol * history[-2]:
            converged = True
            labels = new_labels
            break
        labels = new_labels
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, x)
        filled = counts > 0
        centers[filled] = sums[filled] / counts[filled, None]
    return centers, labels, it, converged, history


def _logsumexp(a):
    m = a.max(1, keepdims=True)
    return (m + np.log(np.exp(a - m).sum(1, keepdims=True)))[:, 0]


def gmm(x, k, rng, max_iter=MAX_ITER, tol=TOL, reg=1e-3):
    """EM for a diagonal-covariance Gaussian mixture, seeded by k-means."""
    means, labels, _, _, _ = kmeans(x, k, rng)
    counts = np.bincount(labels, minlength=k).astype(float)
    var = np.full((k, 2), x.var(0).mean() + reg)
    for j in np.nonzero(counts > 1)[0]:
        var[j] = x[labels == j].var(0) + reg
    weights = np.maximum(counts, 1.0) / np.maximum(counts, 1.0).sum()
    history, converged, it = [], False, 0
    for it in range(1, max_iter + 1):
        # E step
        diff2 = (x[:, None, :] - means[None]) ** 2
        log_p = (np.log(weights)[None]
                 - 0.5 * np.sum(np.log(2 * np.pi * var), 1)[None]
                 - 0.5 * np.sum(diff2 / var[None], 2))
        norm = _logsumexp(log_p)
        ll = float(norm.mean())
        resp = np.exp(log_p - norm[:, None])
        if history and abs(ll - history[-1]) <= tol * abs(history[-1]):
            history.append(ll)
            converged = True
            break
        history.append(ll)
        # M step
        nk = resp.sum(0)
        live = nk > 1e-10
        weights = np.maximum(nk / x.shape[0], 1e-300)
        new_means = (resp.T @ x) / np.where(live, nk, 1.0)[:, None]
        means[live] = new_means[live]
        new_var = (resp.T @ (x * x)) / np.where(live, nk, 1.0)[:, None] - means**2
        var[live] = np.maximum(new_var[live], 0.0) + reg
    return means, it, converged, history


def fcm(x, k, rng, m=2.0, max_iter=MAX_ITER, tol=TOL):
    """Fuzzy c-means with fuzziness exponent ``m``; returns the centers."""
    centers = kmeans_plusplus(x, k, rng)
    history, converged, it = [], False, 0
    p = 2.0 / (m - 1.0)
    for it in range(1, max_iter + 1):
        d2 = _sq_dist(x, centers)
        zero = d2 <= 1e-12
        with np.errstate(divide="ignore"):
            inv = np.where(zero, 0.0, d2 ** (-p / 2.0))
        hit = zero.any(1)
        inv[hit] = zero[hit].astype(float)
        u = inv / inv.sum(1, keepdims=True)
        um = u**m
        history.append(float((um * d2).sum()))
        centers = (um.T @ x) / um.sum(0)[:, None]
        if len(history) > 1 and abs(history[-2] - history[-1]) <= tol * history[-2]:
            converged = True
            break
    return centers, it, converged, history


def som_chain(x, k, rng, epochs=SOM_EPOCHS, lr=(0.5, 0.01), radius=None):
    """Online 1-D self-organizing map of ``k`` neurons.

    Neurons start evenly spaced along the data's principal axis (clipped
    to the bounding box).  Learning rate and Gaussian neighbourhood
    radius decay exponentially over ``10 * k * epochs`` steps.
    """
    lo, hi = x.min(0), x.max(0)
    mean = x.mean(0)
    _, _, vt = np.linalg.svd(x - mean, full_matrices=False)
    axis = vt[0]
    proj = (x - mean) @ axis
    t = np.linspace(proj.min(), proj.max(), k)
    w = np.clip(mean + t[:, None] * axis, lo, hi)

    steps = 10 * k * epochs
    r0, r1 = radius or (k / 4.0, 0.5)
    a0, a1 = lr
    chain = np.arange(k)
    order = rng.integers(x.shape[0], size=steps)
    frac = np.arange(steps) / steps
    alphas = a0 * (a1 / a0) ** frac
    sigmas = r0 * (r1 / r0) ** frac
    per_epoch = steps // epochs
    history = []
    start = w.copy()
    for step in range(steps):
        sample = x[order[step]]
        bmu = np.argmin(((w - sample) ** 2).sum(1))
        h = np.exp(-((chain - bmu) ** 2) / (2.0 * sigmas[step] ** 2))
        w += (alphas[step] * h)[:, None] * (sample - w)
        if (step + 1) % per_epoch == 0:
            history.append(float(np.mean(np.linalg.norm(w - start, axis=1))))
            start = w.copy()
    # settled: mean neuron displacement over the final epoch below 1 px
    converged = history[-1] < 1.0
    hyper = {"epochs": epochs, "steps": steps, "learning_rate": [a0, a1],
             "radius": [r0, r1]}
    return w, steps, converged, history, hyper


def cluster(mask, algorithm: str = "kms", k: int = 120, seed: int = 0) -> ClusterResult:
    """Reduce foreground pixels to ``k`` centroids.

    ``mask`` may be a :class:`ForegroundMask` or an ``(M, 2)`` array.
    The result is deterministic for a fixed seed.  SOM centroids come
    back in chain order; the others are unordered.
    """
    x = mask.pixels if isinstance(mask, ForegroundMask) else np.asarray(mask, float)
    x = np.ascontiguousarray(x, dtype=float).reshape(-1, 2)
    algorithm = algorithm.lower()
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    if k < 2:
        raise InsufficientDataError("need at least 2 clusters")
    if x.shape[0] < k:
        raise InsufficientDataError(f"{x.shape[0]} foreground pixels for {k} clusters")
    rng = np.random.default_rng(seed)
    hyper = {"seed": int(seed), "max_iter": MAX_ITER, "tol": TOL}
    if algorithm == "kms":
        c, _, it, conv, hist = kmeans(x, k, rng)
        hyper.update(init="k-means++", n_init=KMS_INIT)
    elif algorithm == "gmm":
        c, it, conv, hist = gmm(x, k, rng)
        hyper.update(init="k-means", covariance="diagonal", reg=1e-3)
    elif algorithm == "fcm":
        c, it, conv, hist = fcm(x, k, rng)
        hyper.update(init="k-means++", fuzziness=2.0)
    else:
        c, it, conv, hist, extra = som_chain(x, k, rng)
        hyper = {"seed": int(seed), **extra}
    c = np.array(c, dtype=float)
    c.setflags(write=False)
    return ClusterResult(algorithm, c, int(it), bool(conv), tuple(hist), hyper)


def order_chain(centroids) -> Centerline:
    """Greedy nearest-neighbour chain through unordered points.

    The chain starts at one of the two mutually farthest points, the one
    whose nearest neighbour is farther away (an endpoint tends to be
    more isolated than a point inside the curve).
    """
    pts = np.asarray(centroids, dtype=float)
    n = pts.shape[0]
    if n < 2:
        raise InsufficientDataError("need at least 2 points to order")
    if n == 2:
        return Centerline(pts)
    d = np.sqrt(_sq_dist(pts, pts))
    i, j = np.unravel_index(np.argmax(d), d.shape)
    nn = np.where(np.eye(n, dtype=bool), np.inf, d).min(1)
    current = i if nn[i] >= nn[j] else j
    visited = np.zeros(n, dtype=bool)
    order = [current]
    visited[current] = True
    for _ in range(n - 1):
        row = np.where(visited, np.inf, d[current])
        current = int(np.argmin(row))
        visited[current] = True
        order.append(current)
    return Centerline(pts[order])


def extract_centerline(image, algorithm: str = "kms", k: int = 120, seed: int = 0,
                       threshold: ThresholdConfig | None = None):
    """Mask, cluster and order; returns ``(Centerline, ClusterResult)``."""
    mask = detect_mask(image, threshold)
    result = cluster(mask, algorithm, k, seed)
    if result.algorithm == "som":
        return Centerline(result.centroids), result
    return order_chain(result.centroids), result
