"""Ordered centerlines and their normalized arc-length parameters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCenterlineError, DomainError, InsufficientDataError


@dataclass(frozen=True, eq=False)
class Centerline:
    """Ordered ``(N, 2)`` array of pixel coordinates, ``N >= 2``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DomainError(f"centerline must have shape (N, 2), got {pts.shape}")
        if pts.shape[0] < 2:
            raise InsufficientDataError("a centerline needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise DomainError("centerline coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_flat(cls, values) -> Centerline:
        return cls(np.asarray(values, dtype=float).reshape(-1, 2))

    def __len__(self):
        return self.points.shape[0]

    @property
    def flat(self) -> np.ndarray:
        """Interleaved ``(x1, y1, ..., xN, yN)`` vector."""
        return self.points.reshape(-1)

    @property
    def length(self) -> float:
        return float(np.sum(segment_lengths(self.points)))

    def __eq__(self, other):
        if not isinstance(other, Centerline):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())


def _points(centerline) -> np.ndarray:
    if isinstance(centerline, Centerline):
        return centerline.points
    return Centerline(centerline).points


def segment_lengths(points) -> np.ndarray:
    return np.linalg.norm(np.diff(np.asarray(points, dtype=float), axis=0), axis=1)


def chord_length_params(centerline) -> np.ndarray:
    """Cumulative chord length divided by the total length.

    Repeated consecutive points give repeated parameter values; only a
    centerline whose points all coincide is rejected.
    """
    pts = _points(centerline)
    cum = np.concatenate([[0.0], np.cumsum(segment_lengths(pts))])
    total = cum[-1]
    if not total > 0.0:
        raise DegenerateCenterlineError("all centerline points coincide")
    rho = cum / total
    # pin the endpoints against rounding in the division
    rho[0], rho[-1] = 0.0, 1.0
    return rho


def uniform_params(count: int) -> np.ndarray:
    """Equally spaced parameters ``(i - 1) / (N - 1)``."""
    if count < 2:
        raise InsufficientDataError(f"need at least 2 parameters, got {count}")
    return np.arange(count) / (count - 1)


def has_repeats(params) -> bool:
    """True if the parameter sequence is non-decreasing but not strictly increasing."""
    return bool(np.any(np.diff(np.asarray(params, dtype=float)) == 0.0))


def make_params(centerline, mode: str = "chord") -> np.ndarray:
    if mode == "chord":
        return chord_length_params(centerline)
    if mode == "uniform":
        return uniform_params(len(_points(centerline)))
    raise DomainError(f"unknown parameterization mode {mode!r}")
