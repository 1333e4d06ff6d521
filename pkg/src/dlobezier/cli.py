"""Command line entry point: ``dlobezier {extract,sweep-orders,compare-clustering,synth}``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 pipeline error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .detect import ALGORITHMS
from .errors import ConfigError, DLOBezierError
from .harness import (
    COMPARE_COLUMNS,
    PARAM_MODES,
    SWEEP_COLUMNS,
    ExperimentConfig,
    extract_once,
    run_clustering_comparison,
    run_order_sweep,
    synthesize,
)
from .synthgen import FAMILIES

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_PIPELINE = 0, 2, 3, 4


def _orders(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad order list {text!r}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file; flags override its values")
    src = p.add_argument_group("input")
    src.add_argument("--input", help="PNG image or JSON point set")
    src.add_argument("--family", choices=FAMILIES, help="synthetic shape family")
    src.add_argument("--render", dest="source", action="store_const", const="render",
                     help="render the synthetic shape and detect it instead of sampling")
    src.add_argument("--noise-sigma", type=float, help="Gaussian noise on samples (px)")
    src.add_argument("--stroke-width", type=float, help="rendered stroke width (px)")
    p.add_argument("--algorithm", choices=ALGORITHMS)
    p.add_argument("--n-points", type=int, help="centerline points / cluster count")
    p.add_argument("--orders", type=_orders, help="comma-separated fitting orders")
    p.add_argument("--order", type=int, help="single fitting order (extract, compare)")
    p.add_argument("--param", choices=PARAM_MODES)
    p.add_argument("--solver", choices=("normal", "orthogonal"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir")
    p.add_argument("--emit-svg", action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dlobezier",
        description="Bezier control-point features for deformable linear objects.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("extract", "fit one input at one order and write extract.json"),
        ("sweep-orders", "fit one input at several orders"),
        ("compare-clustering", "compare the four clustering detectors"),
        ("synth", "write a synthetic image, ground truth and sampled centerline"),
    ):
        _common(sub.add_parser(name, help=text, description=text))
    return parser


_KEYS = ("input", "family", "source", "noise_sigma", "stroke_width", "algorithm",
         "n_points", "orders", "order", "param", "solver", "seed", "out_dir", "emit_svg")


def make_config(args) -> ExperimentConfig:
    overrides = {k: getattr(args, k) for k in _KEYS}
    if args.config:
        return ExperimentConfig.load(args.config, **overrides)
    return ExperimentConfig.from_dict({k: v for k, v in overrides.items() if v is not None})


def _table(columns, rows) -> str:
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.6g}"
        return "" if v is None else str(v)
    cells = [[fmt(r.get(c)) for c in columns if c != "error"] for r in rows]
    head = [c for c in columns if c != "error"]
    widths = [max(len(h), *(len(row[i]) for row in cells)) for i, h in enumerate(head)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    lines += [f"  {r.get('algorithm') or r.get('order')}: {r['error']}"
              for r in rows if r.get("error")]
    return "\n".join(lines)


def run(args) -> int:
    config = make_config(args)
    if args.command == "extract":
        feature, report, _ = extract_once(config)
        print(f"order {feature.order}: rmse {report.rmse:.6g} px, "
              f"cond {report.condition_estimate:.3g}, solve {1e3 * report.elapsed:.3f} ms")
        print("control points:", " ".join(f"({x:.3f}, {y:.3f})"
                                          for x, y in feature.control_points))
    elif args.command == "sweep-orders":
        _, rows = run_order_sweep(config)
        print(_table(SWEEP_COLUMNS, rows))
    elif args.command == "compare-clustering":
        _, rows = run_clustering_comparison(config)
        print(_table(COMPARE_COLUMNS, rows))
    else:
        for path in synthesize(config):
            print(path)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except ConfigError as exc:
        return _fail(exc, EXIT_CONFIG)
    except OSError as exc:
        return _fail(exc, EXIT_IO)
    except (DLOBezierError, ArithmeticError, ValueError) as exc:
        return _fail(exc, EXIT_PIPELINE)


def _fail(exc, code: int) -> int:
    where = getattr(exc, "stage", None)
    print(f"error{f' [{where}]' if where else ''}: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
