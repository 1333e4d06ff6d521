"""Bezier control-point shape features for deformable linear objects.

An ordered 2-D centerline is parameterized by normalized arc length and
fitted by a degree-``n`` Bezier curve in the least-squares sense; the
``n + 1`` control points form the feature vector.
"""

from .bernstein import (
    MAX_ORDER,
    FeatureVector,
    basis_matrix,
    bernstein_basis,
    bezier_eval,
    build_regression_matrix,
    de_casteljau,
)
from .detect import (
    ALGORITHMS,
    ClusterResult,
    ForegroundMask,
    ThresholdConfig,
    cluster,
    detect_mask,
    extract_centerline,
    order_chain,
)
from .errors import (
    ConfigError,
    DegenerateCenterlineError,
    DimensionError,
    DLOBezierError,
    DomainError,
    IllConditionedWarning,
    InsufficientDataError,
    NoObjectError,
    SingularSystemError,
    UnsupportedOrderError,
)
from .parameterization import Centerline, chord_length_params, uniform_params
from .regressor import (
    FitReport,
    decimate_centerline,
    fit,
    fit_centerline,
    fit_cost,
    solve_normal_equation,
    solve_orthogonal,
)
from .synthgen import FAMILIES, SyntheticShape, generate, render, sample_with_noise

__version__ = "0.1.0"
