"""Least-squares Bezier regression of an ordered centerline."""

from __future__ import annotations

import time
import warnings
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from .bernstein import FeatureVector, _check_order, bezier_eval, build_regression_matrix
from .errors import DimensionError, IllConditionedWarning, InsufficientDataError, SingularSystemError
from .parameterization import Centerline, has_repeats, make_params, segment_lengths

ILL_CONDITIONED = 1e12
DISTINCT_TOL = 1e-12
SOLVERS = ("normal", "orthogonal")


@dataclass(frozen=True)
class FitReport:
    """Residual and numerical diagnostics of one regression.

    ``cost_q`` is in squared pixels, ``rmse`` and ``max_pointwise_error``
    in pixels, ``elapsed`` in seconds (matrix build plus solve).
    """

    cost_q: float
    rmse: float
    max_pointwise_error: float
    condition_estimate: float
    solver_used: str
    elapsed: float
    warnings: tuple = ()

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        d["warnings"] = list(self.warnings)
        if not timing:
            del d["elapsed"]
        return d

    @classmethod
    def from_dict(cls, d: dict, elapsed: float = 0.0) -> FitReport:
        d = dict(d)
        d.setdefault("elapsed", elapsed)
        d["warnings"] = tuple(d.get("warnings", ()))
        return cls(**d)


def _as_centerline(centerline) -> Centerline:
    return centerline if isinstance(centerline, Centerline) else Centerline(centerline)


def _check_lengths(centerline: Centerline, params) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    if params.ndim != 1 or params.size != len(centerline):
        raise DimensionError(
            f"{len(centerline)} centerline points but {params.size} parameters"
        )
    return params


def fit_cost(centerline, params, feature, form: str = "matrix") -> float:
    """Sum of squared distances between the points and the curve at ``params``.

    ``form="matrix"`` evaluates ``(Bs - c)^T (Bs - c)`` with the stacked
    regression matrix; ``form="pointwise"`` sums per-point squared norms.
    """
    centerline = _as_centerline(centerline)
    params = _check_lengths(centerline, params)
    if not isinstance(feature, FeatureVector):
        feature = FeatureVector(feature)
    if form == "matrix":
        r = build_regression_matrix(params, feature.order) @ feature.flat - centerline.flat
        return float(r @ r)
    if form == "pointwise":
        diff = centerline.points - bezier_eval(feature, params)
        return float(np.sum(np.sum(diff * diff, axis=1)))
    raise ValueError(f"unknown cost form {form!r}")


def count_distinct(params, tol: float = DISTINCT_TOL) -> int:
    p = np.sort(np.asarray(params, dtype=float))
    return int(1 + np.count_nonzero(np.diff(p) > tol)) if p.size else 0


def condition_estimate(gram: np.ndarray) -> float:
    """1-norm condition number of the normal matrix (``inf`` if singular)."""
    try:
        return float(np.linalg.cond(gram, 1))
    except np.linalg.LinAlgError:
        return float("inf")


def _prepare(centerline, params, n):
    centerline = _as_centerline(centerline)
    params = _check_lengths(centerline, params)
    n = _check_order(n)
    if len(centerline) < n + 1:
        raise InsufficientDataError(
            f"order {n} needs at least {n + 1} points, got {len(centerline)}"
        )
    distinct = count_distinct(params)
    if distinct < n + 1:
        raise SingularSystemError(
            f"order {n} needs {n + 1} distinct parameter values, got {distinct}"
        )
    return centerline, params, n


def _report(centerline, params, s, cond, solver, elapsed, notes) -> FitReport:
    residual = (bezier_eval(FeatureVector.from_flat(s), params) - centerline.points)
    sq = np.sum(residual * residual, axis=1)
    cost = float(np.sum(sq))
    if has_repeats(params):
        notes.append("repeated parameter values (duplicate consecutive points)")
    return FitReport(
        cost_q=cost,
        rmse=float(np.sqrt(cost / len(centerline))),
        max_pointwise_error=float(np.sqrt(np.max(sq))),
        condition_estimate=float(cond),
        solver_used=solver,
        elapsed=elapsed,
        warnings=tuple(notes),
    )


def solve_normal_equation(centerline, params, n: int):
    """Solve ``B^T B s = B^T c`` for the control points.

    The normal matrix is factorized (Cholesky) rather than inverted.  A
    1-norm condition estimate above ``ILL_CONDITIONED`` emits an
    :class:`IllConditionedWarning` and is noted in the report.

    Returns
    -------
    (FeatureVector, FitReport)
    """
    centerline, params, n = _prepare(centerline, params, n)
    t0 = time.perf_counter()
    B = build_regression_matrix(params, n)
    gram = B.T @ B
    rhs = B.T @ centerline.flat
    try:
        s = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram), rhs)
    except np.linalg.LinAlgError:
        try:
            s = np.linalg.solve(gram, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError("normal matrix is singular") from exc
    elapsed = time.perf_counter() - t0
    cond = condition_estimate(gram)
    notes = []
    if not cond < ILL_CONDITIONED:
        msg = f"normal matrix condition estimate {cond:.3e} exceeds {ILL_CONDITIONED:.0e}"
        warnings.warn(msg, IllConditionedWarning, stacklevel=2)
        notes.append(msg)
    feature = FeatureVector.from_flat(s)
    return feature, _report(centerline, params, s, cond, "normal-equation", elapsed, notes)


def solve_orthogonal(centerline, params, n: int):
    """Least squares through a thin QR factorization of the design matrix.

    Same minimizer as :func:`solve_normal_equation` but without squaring
    the condition number.  The reported condition estimate is still that
    of ``B^T B`` so the two paths are comparable.
    """
    centerline, params, n = _prepare(centerline, params, n)
    t0 = time.perf_counter()
    B = build_regression_matrix(params, n)
    q, r = np.linalg.qr(B)
    if np.any(np.diag(r) == 0.0):
        raise SingularSystemError("design matrix is rank deficient")
    s = scipy.linalg.solve_triangular(r, q.T @ centerline.flat)
    elapsed = time.perf_counter() - t0
    cond = condition_estimate(B.T @ B)
    feature = FeatureVector.from_flat(s)
    return feature, _report(centerline, params, s, cond, "orthogonal-factorization", elapsed, [])


def fit(centerline, params, n: int, solver: str = "orthogonal"):
    if solver == "normal":
        return solve_normal_equation(centerline, params, n)
    if solver == "orthogonal":
        return solve_orthogonal(centerline, params, n)
    raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")


def fit_centerline(centerline, n: int, param: str = "chord", solver: str = "orthogonal"):
    """Parameterize then fit; returns ``(FeatureVector, FitReport, params)``."""
    centerline = _as_centerline(centerline)
    params = make_params(centerline, param)
    feature, report = fit(centerline, params, n, solver)
    return feature, report, params


def decimate_centerline(points, target: int) -> Centerline:
    """Pick ``target`` of the ordered points at near-equal chord spacing.

    Both endpoints are kept.  Indices are chosen by dynamic programming
    to minimize the total deviation from the ideal arc positions subject
    to strictly increasing indices, so no point is used twice.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DimensionError(f"points must have shape (M, 2), got {pts.shape}")
    m = pts.shape[0]
    if target < 2:
        raise InsufficientDataError("target must be at least 2")
    if m < target:
        raise InsufficientDataError(f"cannot decimate {m} points to {target}")
    if m == target:
        return Centerline(pts)

    s = np.concatenate([[0.0], np.cumsum(segment_lengths(pts))])
    goals = np.linspace(0.0, s[-1], target)
    idx = np.arange(m)
    back = np.zeros((target, m), dtype=np.intp)
    cost = np.where(idx == 0, 0.0, np.inf)
    for k in range(1, target):
        run_min = np.minimum.accumulate(cost)
        run_arg = np.maximum.accumulate(np.where(cost == run_min, idx, 0))
        # predecessor must have a strictly smaller index
        prev_min = np.concatenate([[np.inf], run_min[:-1]])
        back[k, 1:] = run_arg[:-1]
        cost = prev_min + np.abs(s - goals[k])
        cost[(idx < k) | (idx > m - target + k)] = np.inf
        if k == target - 1:
            cost[idx != m - 1] = np.inf
    chosen = [m - 1]
    for k in range(target - 1, 0, -1):
        chosen.append(back[k, chosen[-1]])
    return Centerline(pts[chosen[::-1]])
