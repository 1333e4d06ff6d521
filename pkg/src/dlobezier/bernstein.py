"""Bernstein basis, Bezier evaluation and the stacked regression matrix.

Two-dimensional quantities are flattened with interleaved coordinates,
``(x0, y0, x1, y1, ...)``, both for control points and for centerline
samples.  Under that convention the regression matrix is the Kronecker
product of the scalar Bernstein design matrix with the 2x2 identity.

Alternative regression bases (B-splines, rational Bezier) would plug in
where :func:`basis_matrix` is used; none are provided.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError, UnsupportedOrderError

MAX_ORDER = 30


def _check_order(n: int) -> int:
    if int(n) != n or n < 0:
        raise UnsupportedOrderError(f"order must be a non-negative integer, got {n!r}")
    if n > MAX_ORDER:
        raise UnsupportedOrderError(f"order {n} exceeds the supported cap {MAX_ORDER}")
    return int(n)


def _check_rho(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(rho)) or np.any(rho < 0.0) or np.any(rho > 1.0):
        raise DomainError("parameter values must lie in [0, 1]")
    return rho


def binomial_row(n: int) -> np.ndarray:
    """Binomial coefficients C(n, 0..n) via the multiplicative recurrence.

    Every intermediate is an integer below 2**53 for n <= 30, so the
    float64 values are exact.
    """
    n = _check_order(n)
    coef = [1]
    for j in range(1, n + 1):
        coef.append(coef[-1] * (n - j + 1) // j)
    return np.array(coef, dtype=float)


def basis_matrix(n: int, rho) -> np.ndarray:
    """Scalar Bernstein design matrix with shape ``(len(rho), n + 1)``.

    Row ``i`` holds ``B_{0,n}(rho_i), ..., B_{n,n}(rho_i)``.
    """
    n = _check_order(n)
    rho = np.atleast_1d(_check_rho(rho))
    j = np.arange(n + 1)
    t = rho[:, None]
    return binomial_row(n) * t**j * (1.0 - t) ** (n - j)


def bernstein_basis(n: int, rho: float) -> np.ndarray:
    """Values of all ``n + 1`` degree-``n`` Bernstein polynomials at ``rho``."""
    rho = _check_rho(rho)
    if rho.ndim != 0:
        raise DomainError("bernstein_basis takes a scalar parameter; use basis_matrix")
    return basis_matrix(n, float(rho))[0]


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Bezier control points ``p_0 .. p_n`` in pixel units.

    ``control_points`` has shape ``(n + 1, 2)``; :attr:`flat` is the
    interleaved length ``2(n + 1)`` descriptor.
    """

    control_points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.control_points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise DomainError(f"control points must have shape (n+1, 2), got {pts.shape}")
        _check_order(pts.shape[0] - 1)
        if not np.all(np.isfinite(pts)):
            raise DomainError("control points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "control_points", pts)

    @classmethod
    def from_flat(cls, values) -> FeatureVector:
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size % 2:
            raise DomainError("flattened feature must be a 1-D array of even length")
        return cls(values.reshape(-1, 2))

    @property
    def order(self) -> int:
        return self.control_points.shape[0] - 1

    @property
    def flat(self) -> np.ndarray:
        return self.control_points.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return np.array_equal(self.control_points, other.control_points)

    def __hash__(self):
        return hash(self.control_points.tobytes())


def _as_points(feature) -> np.ndarray:
    if isinstance(feature, FeatureVector):
        return feature.control_points
    return FeatureVector(feature).control_points


def bezier_eval(feature, rho):
    """Evaluate the curve by summing control points against the basis.

    A scalar ``rho`` yields one point of shape ``(2,)``; an array of
    parameters yields shape ``(len(rho), 2)``.
    """
    pts = _as_points(feature)
    scalar = np.ndim(rho) == 0
    out = basis_matrix(pts.shape[0] - 1, rho) @ pts
    return out[0] if scalar else out


def de_casteljau(feature, rho):
    """Evaluate the curve by repeated linear interpolation.

    Kept independent of the Bernstein code path so the two can check
    each other.
    """
    pts = _as_points(feature)
    rho = _check_rho(rho)
    scalar = rho.ndim == 0
    t = np.atleast_1d(rho)[:, None, None]
    work = np.broadcast_to(pts, (t.shape[0],) + pts.shape).copy()
    for r in range(pts.shape[0] - 1, 0, -1):
        work = (1.0 - t) * work[:, :r] + t * work[:, 1 : r + 1]
    out = work[:, 0, :]
    return out[0] if scalar else out


def build_regression_matrix(params, n: int) -> np.ndarray:
    """Tall ``2N x 2(n+1)`` design matrix: each basis row kron the 2x2 identity."""
    params = np.asarray(params, dtype=float)
    if params.ndim != 1:
        raise DomainError("params must be one-dimensional")
    n = _check_order(n)
    if params.size < n + 1:
        raise InsufficientDataError(
            f"need at least n+1 = {n + 1} samples for order {n}, got {params.size}"
        )
    return np.kron(basis_matrix(n, params), np.eye(2))
