"""Experiment configuration, runs and persistence.

Every experiment writes a deterministic body (JSON, CSV, SVG) and a
separate ``*.meta.json`` holding timestamps and wall-clock timings, so
reruns with the same configuration reproduce the body files byte for
byte.
"""

from __future__ import annotations

import contextlib
import dataclasses
import datetime
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import io as fio
from .bernstein import FeatureVector, bezier_eval
from .detect import ALGORITHMS, ThresholdConfig, extract_centerline
from .errors import ConfigError, DLOBezierError
from .parameterization import Centerline, segment_lengths
from .regressor import SOLVERS, decimate_centerline, fit, make_params
from .synthgen import FAMILIES, fine_polyline, generate, polyline_distance, render, sample_with_noise

log = logging.getLogger(__name__)

PARAM_MODES = ("chord", "uniform", "intrinsic")
SOURCE_MODES = ("sample", "render")


@dataclass
class ExperimentConfig:
    """One experiment.  Defaults reproduce the reference setup: 120
    centerline points, orders 2/4/6/8, k-means detection."""

    input: str | None = None
    family: str | None = None
    family_params: dict = field(default_factory=dict)
    source: str = "sample"
    noise_sigma: float = 0.0
    stroke_width: float = 5.0
    algorithm: str = "kms"
    n_points: int = 120
    orders: list = field(default_factory=lambda: [2, 4, 6, 8])
    order: int = 8
    param: str = "chord"
    solver: str = "orthogonal"
    seed: int = 0
    threshold: dict = field(default_factory=dict)
    out_dir: str = "out"
    emit_svg: bool = True

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        config = cls(**d)
        if not isinstance(config.orders, list):
            config.orders = list(config.orders) if isinstance(config.orders, tuple) else None
            if config.orders is None:
                raise ConfigError("orders must be a list of integers")
        return config

    @classmethod
    def load(cls, path, **overrides) -> ExperimentConfig:
        """Read a YAML config file, then apply non-``None`` overrides."""
        try:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a mapping")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    def snapshot(self) -> dict:
        """Configuration as recorded in outputs (the output directory is
        where results go, not what they are, so it is left out)."""
        d = dataclasses.asdict(self)
        del d["out_dir"]
        return d

    def validate(self, need_orders: bool = True) -> None:
        if (self.input is None) == (self.family is None):
            raise ConfigError("exactly one of input or family must be given")
        if self.family is not None and self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.source not in SOURCE_MODES:
            raise ConfigError(f"source must be one of {SOURCE_MODES}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.param not in PARAM_MODES:
            raise ConfigError(f"param must be one of {PARAM_MODES}")
        if self.param == "intrinsic" and (self.family is None or self.source != "sample"):
            raise ConfigError("intrinsic parameters exist only for sampled synthetic input")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}")
        if not isinstance(self.n_points, int) or self.n_points < 2:
            raise ConfigError("n_points must be an integer >= 2")
        if self.noise_sigma < 0 or not self.stroke_width > 0:
            raise ConfigError("noise_sigma must be >= 0 and stroke_width > 0")
        ThresholdConfig.from_dict(self.threshold)
        orders = list(self.orders) if need_orders else [self.order]
        if not orders:
            raise ConfigError("order list is empty")
        for n in orders:
            if not isinstance(n, int) or n < 1:
                raise ConfigError(f"orders must be integers >= 1, got {n!r}")
            if not self.n_points > n + 1:
                raise ConfigError(f"order {n} needs more than {n + 1} points, "
                                  f"n_points is {self.n_points}")
            if self.n_points < 10 * (n + 1):
                log.warning("n_points=%d is not much larger than n+1=%d; the fit may be "
                            "poorly determined", self.n_points, n + 1)


@dataclass
class ExperimentRecord:
    """Configuration snapshot plus one entry per run.

    ``runs`` entries are plain JSON-ready dicts; ``metadata`` holds the
    non-reproducible timestamps and timings.
    """

    kind: str
    config: dict
    runs: list
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return fio.dumps({"kind": self.kind, "config": self.config, "runs": self.runs})

    def metadata_json(self) -> str:
        return fio.dumps(self.metadata)

    @classmethod
    def from_json(cls, text: str, metadata_text: str | None = None) -> ExperimentRecord:
        body = json.loads(text)
        meta = json.loads(metadata_text) if metadata_text else {}
        return cls(body["kind"], body["config"], body["runs"], meta)

    def write(self, out_dir, stem: str) -> Path:
        out = Path(out_dir)
        path = out / f"{stem}.json"
        path.write_text(self.to_json(), encoding="utf-8")
        (out / f"{stem}.meta.json").write_text(self.metadata_json(), encoding="utf-8")
        return path

    @classmethod
    def read(cls, out_dir, stem: str) -> ExperimentRecord:
        out = Path(out_dir)
        meta = out / f"{stem}.meta.json"
        return cls.from_json((out / f"{stem}.json").read_text(encoding="utf-8"),
                             meta.read_text(encoding="utf-8") if meta.exists() else None)


@contextlib.contextmanager
def stage(name: str):
    """Tag any exception escaping the block with the pipeline stage."""
    try:
        yield
    except Exception as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
        raise


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


@dataclass
class Source:
    """A prepared input: the centerline to fit plus optional ground truth."""

    label: str
    centerline: Centerline
    frame: tuple
    shape: object = None
    cluster: object = None
    intrinsic: np.ndarray | None = None


def _load_points(path: Path, n_points: int) -> np.ndarray:
    data = fio.read_json(path)
    pts = np.asarray(data["points"] if isinstance(data, dict) else data, dtype=float)
    if pts.shape[0] > n_points:
        pts = decimate_centerline(pts, n_points).points
    return pts


def _shape(config: ExperimentConfig):
    with stage("generate"):
        return generate(config.family, config.family_params, config.seed)


def prepare_source(config: ExperimentConfig, algorithm: str | None = None) -> Source:
    """Turn the configured input into an ordered centerline.

    Image paths (PNG) go through detection; ``.json`` paths are point
    sets (decimated to ``n_points`` when longer); synthetic families are
    either sampled directly or rendered and detected.
    """
    algorithm = algorithm or config.algorithm
    threshold = ThresholdConfig.from_dict(config.threshold)
    if config.input is not None:
        path = Path(config.input)
        with stage("read"):
            if not path.is_file():
                raise FileNotFoundError(f"input {path} does not exist")
            if path.suffix.lower() == ".json":
                pts = _load_points(path, config.n_points)
                frame = tuple(int(v) + 1 for v in np.ceil(pts.max(0)))
                return Source(path.name, Centerline(pts), frame)
            image = fio.read_png(path)
        with stage("detect"):
            cl, result = extract_centerline(image, algorithm, config.n_points, config.seed,
                                            threshold)
        return Source(path.name, cl, (image.shape[1], image.shape[0]), cluster=result)

    shape = _shape(config)
    label = config.family
    if config.source == "sample":
        with stage("sample"):
            cl = sample_with_noise(shape, config.n_points, config.noise_sigma, config.seed)
        return Source(label, cl, shape.frame, shape, intrinsic=shape.arc_params(config.n_points))
    with stage("render"):
        image = render(shape, config.stroke_width).image
    with stage("detect"):
        cl, result = extract_centerline(image, algorithm, config.n_points, config.seed,
                                        threshold)
    return Source(label, cl, shape.frame, shape, cluster=result)


def _params(config: ExperimentConfig, src: Source) -> np.ndarray:
    with stage("parameterize"):
        if config.param == "intrinsic":
            return src.intrinsic
        return make_params(src.centerline, config.param)


def ground_truth_rmse(feature: FeatureVector, params, shape) -> float:
    """RMS distance from the fitted curve, sampled at ``params``, to the
    generator's exact curve."""
    d = polyline_distance(bezier_eval(feature, params), fine_polyline(shape))
    return float(np.sqrt(np.mean(d * d)))


def _fit_run(config, src, params, n):
    with stage("regress"):
        feature, report = fit(src.centerline, params, n, config.solver)
    run = {
        "input": src.label,
        "order": n,
        "status": "ok",
        "feature": feature.flat.tolist(),
        "report": report.to_dict(timing=False),
        "gt_rmse": None if src.shape is None else ground_truth_rmse(feature, params, src.shape),
    }
    return feature, report, run


def _failure(src_label, exc, **extra):
    return {"input": src_label, "status": "failed", "stage": getattr(exc, "stage", None),
            "error": f"{type(exc).__name__}: {exc}", **extra}


def extract_once(config: ExperimentConfig, write: bool = True):
    """Fit one input at ``config.order``.

    Returns ``(FeatureVector, FitReport, ExperimentRecord)`` and, when
    ``write`` is set, stores ``extract.json`` and ``extract.meta.json``.
    """
    config.validate(need_orders=False)
    started = _now()
    t0 = time.perf_counter()
    src = prepare_source(config)
    params = _params(config, src)
    feature, report, run = _fit_run(config, src, params, config.order)
    residual = np.linalg.norm(bezier_eval(feature, params) - src.centerline.points, axis=1)
    run.update(
        param=config.param,
        n_points=len(src.centerline),
        residuals=residual.tolist(),
        condition_estimate=report.condition_estimate,
        cluster=None if src.cluster is None else src.cluster.metadata(),
    )
    meta = {"started": started, "finished": _now(),
            "elapsed_total": time.perf_counter() - t0,
            "elapsed_regression": report.elapsed}
    record = ExperimentRecord("extract", config.snapshot(), [run], meta)
    if write:
        out = _out_dir(config)
        record.write(out, "extract")
        if config.emit_svg:
            svg = fio.overlay_svg(src.frame, src.centerline.points,
                                  [(f"n={config.order}", feature)],
                                  None if src.shape is None else src.shape.dense,
                                  title=f"{src.label} n={config.order}")
            (out / "extract.svg").write_text(svg, encoding="utf-8")
    return feature, report, record


def _out_dir(config) -> Path:
    out = Path(config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        exc.stage = "write"
        raise
    return out


SWEEP_COLUMNS = ("input", "order", "status", "rmse", "max_pointwise_error", "cost_q",
                 "condition_estimate", "gt_rmse", "error")


def _row(run: dict, columns) -> dict:
    row = {k: run.get(k) for k in columns}
    for k in ("rmse", "max_pointwise_error", "cost_q", "condition_estimate"):
        if k in columns and "report" in run:
            row[k] = run["report"][k]
    return row


def run_order_sweep(config: ExperimentConfig, write: bool = True):
    """Fit the same centerline at every order in ``config.orders``.

    A failing order is recorded with its error and the sweep moves on.
    Returns ``(ExperimentRecord, summary_rows)``; when ``write`` is set,
    stores ``sweep_orders.{json,meta.json,csv}`` and an SVG overlay.
    """
    config.validate()
    started = _now()
    src = prepare_source(config)
    params = _params(config, src)
    runs, timings, curves = [], {}, []
    for n in config.orders:
        try:
            feature, report, run = _fit_run(config, src, params, n)
        except DLOBezierError as exc:
            runs.append(_failure(src.label, exc, order=n))
            continue
        runs.append(run)
        timings[str(n)] = report.elapsed
        curves.append((f"n={n}", feature))
    meta = {"started": started, "finished": _now(), "elapsed_regression": timings}
    record = ExperimentRecord("sweep-orders", config.snapshot(), runs, meta)
    rows = [_row(r, SWEEP_COLUMNS) for r in runs]
    if write:
        out = _out_dir(config)
        record.write(out, "sweep_orders")
        fio.write_csv(out / "sweep_orders.csv", SWEEP_COLUMNS, rows)
        if config.emit_svg:
            svg = fio.overlay_svg(src.frame, src.centerline.points, curves,
                                  None if src.shape is None else src.shape.dense,
                                  title=f"{src.label} order sweep")
            (out / "sweep_orders.svg").write_text(svg, encoding="utf-8")
    return record, rows


COMPARE_COLUMNS = ("algorithm", "status", "order", "rmse", "gt_rmse", "chain_ratio",
                   "iterations", "converged", "error")


def chain_ratio(centerline: Centerline, reference_length: float) -> float:
    """Length of the ordered chain over a reference length; values well
    above 1 mean the chain zigzags."""
    return float(np.sum(segment_lengths(centerline.points)) / reference_length)


def run_clustering_comparison(config: ExperimentConfig, write: bool = True):
    """Detect, order and fit with each of the four clustering algorithms.

    Synthetic inputs are rendered first.  Every algorithm gets the same
    seed and cluster count; a failure becomes a row with its error.
    Wall times go to ``compare_clustering.meta.json`` only, keeping the
    CSV table reproducible.
    """
    config = dataclasses.replace(config, source="render")
    if config.param == "intrinsic":
        raise ConfigError("intrinsic parameters are not available after detection")
    config.validate(need_orders=False)
    started = _now()
    runs, timings, panels = [], {}, []
    for alg in ALGORITHMS:
        t0 = time.perf_counter()
        try:
            src = prepare_source(config, alg)
            params = _params(config, src)
            feature, report, run = _fit_run(config, src, params, config.order)
        except DLOBezierError as exc:
            runs.append(_failure(config.input or config.family, exc, algorithm=alg,
                                 order=config.order))
            timings[alg] = time.perf_counter() - t0
            continue
        timings[alg] = time.perf_counter() - t0
        if src.shape is not None:
            ref = src.shape.length
        else:
            ref = float(np.sum(segment_lengths(bezier_eval(feature, np.linspace(0, 1, 400)))))
        run.update(algorithm=alg, chain_ratio=chain_ratio(src.centerline, ref),
                   cluster=src.cluster.metadata(),
                   iterations=src.cluster.iterations, converged=src.cluster.converged)
        runs.append(run)
        panels.append((alg, src, feature))
    meta = {"started": started, "finished": _now(), "wall_time": timings}
    record = ExperimentRecord("compare-clustering", config.snapshot(), runs, meta)
    rows = [_row(r, COMPARE_COLUMNS) for r in runs]
    if write:
        out = _out_dir(config)
        record.write(out, "compare_clustering")
        fio.write_csv(out / "compare_clustering.csv", COMPARE_COLUMNS, rows)
        if config.emit_svg:
            for alg, src, feature in panels:
                svg = fio.overlay_svg(src.frame, src.centerline.points,
                                      [(f"{alg} n={config.order}", feature)],
                                      None if src.shape is None else src.shape.dense,
                                      title=f"{alg}")
                (out / f"compare_clustering_{alg}.svg").write_text(svg, encoding="utf-8")
    return record, rows


def synthesize(config: ExperimentConfig):
    """Write a rendered PNG, its ground-truth sidecar and a sampled
    centerline for ``config.family``.  Returns the paths written."""
    if config.family is None:
        raise ConfigError("synth needs a family")
    config.validate(need_orders=False)
    shape = _shape(config)
    with stage("render"):
        rendering = render(shape, config.stroke_width)
    cl = sample_with_noise(shape, config.n_points, config.noise_sigma, config.seed)
    out = _out_dir(config)
    stem = f"synth_{config.family}"
    png = out / f"{stem}.png"
    fio.write_png(png, rendering.image)
    truth = shape.ground_truth()
    truth["stroke_width"] = config.stroke_width
    truth["pixels"] = rendering.pixels.tolist()
    fio.write_json(out / f"{stem}.json", truth)
    fio.write_json(out / f"{stem}_centerline.json",
                   {"points": cl.points.tolist(), "noise_sigma": config.noise_sigma,
                    "seed": config.seed, "intrinsic_params":
                        shape.arc_params(config.n_points).tolist()})
    return [png, out / f"{stem}.json", out / f"{stem}_centerline.json"]
