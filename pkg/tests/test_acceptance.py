"""Exit criteria.  Each test prints one PASS/FAIL line, collected into the
terminal summary under "acceptance criteria"."""

import time
import warnings

import numpy as np
import pytest

from dlobezier.bernstein import basis_matrix, bezier_eval, de_casteljau
from dlobezier.errors import SingularSystemError
from dlobezier.harness import ExperimentConfig, run_clustering_comparison, run_order_sweep
from dlobezier.regressor import fit, fit_cost, solve_normal_equation, solve_orthogonal
from dlobezier.parameterization import uniform_params

from .conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance

TREND_FAMILIES = [("arc", {}), ("sine", {}), ("spiral", {}), ("random-bezier", {"order": 12})]


def verdict(label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_ac01_exact_recovery():
    rng = np.random.default_rng(2024)
    rho = uniform_params(120)
    worst_rel, worst_q = 0.0, 0.0
    t0 = time.perf_counter()
    for i in range(100):
        n = 1 + i % 8
        ctrl = rng.uniform(0, 640, (n + 1, 2))
        f, rep = fit(bezier_eval(ctrl, rho), rho, n)
        worst_rel = max(worst_rel, np.linalg.norm(f.control_points - ctrl) / np.linalg.norm(ctrl))
        worst_q = max(worst_q, rep.cost_q)
    elapsed = time.perf_counter() - t0
    verdict("AC1 exact recovery", worst_rel < 1e-8 and worst_q < 1e-12 and elapsed < 5.0,
            f"max rel err {worst_rel:.2e} (<1e-8), max Q {worst_q:.2e} (<1e-12), {elapsed:.2f}s (<5s)")


@pytest.fixture(scope="module")
def trend_sweeps():
    out = {}
    for family, params in TREND_FAMILIES:
        cfg = ExperimentConfig(family=family, family_params=params, orders=list(range(1, 13)))
        out[family] = run_order_sweep(cfg, write=False)[1]
    return out


def test_ac02_order_trend(trend_sweeps):
    details, ok = [], True
    for family, rows in trend_sweeps.items():
        rmse = {r["order"]: r["rmse"] for r in rows}
        seq = [rmse[n] for n in (2, 4, 6, 8)]
        good = all(a > b for a, b in zip(seq, seq[1:]))
        ok &= good
        details.append(f"{family} " + ">".join(f"{v:.3g}" for v in seq))
    verdict("AC2 RMSE(2)>RMSE(4)>RMSE(6)>RMSE(8)", ok, "; ".join(details))


def test_ac03_cost_forms_agree():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(0, 13))
        m = int(rng.integers(n + 1, 80))
        pts = rng.uniform(-500, 900, (m, 2))
        rho = rng.uniform(size=m)
        ctrl = rng.uniform(-500, 900, (n + 1, 2))
        a = fit_cost(pts, rho, ctrl, form="pointwise")
        b = fit_cost(pts, rho, ctrl, form="matrix")
        worst = max(worst, abs(a - b) / abs(a))
    verdict("AC3 pointwise == matrix cost", worst < 1e-10, f"max rel diff {worst:.2e} over 1000 (<1e-10)")


def test_ac04_solver_equivalence():
    rng = np.random.default_rng(4)
    worst, used = 0.0, 0
    for _ in range(200):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(10 * (n + 1), 200))
        rho = np.sort(rng.uniform(size=m))
        pts = np.column_stack([500 * rho, 60 * np.sin(4 * rho + rng.uniform(0, 6))])
        pts += rng.normal(0, 3, pts.shape)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f_n, r_n = solve_normal_equation(pts, rho, n)
        f_o, _ = solve_orthogonal(pts, rho, n)
        if r_n.condition_estimate < 1e8:
            used += 1
            worst = max(worst, np.linalg.norm(f_n.flat - f_o.flat) / np.linalg.norm(f_o.flat))
    verdict("AC4 normal == orthogonal", worst < 1e-6 and used > 0,
            f"max rel diff {worst:.2e} (<1e-6) on {used}/200 instances with cond<1e8")


def test_ac05_basis_properties():
    rng = np.random.default_rng(5)
    worst_pu, min_val, worst_eval = 0.0, np.inf, 0.0
    for _ in range(10_000 // 100):
        n = int(rng.integers(0, 13))
        rho = rng.uniform(size=100)
        rho[:2] = 0.0, 1.0
        b = basis_matrix(n, rho)
        worst_pu = max(worst_pu, np.max(np.abs(b.sum(1) - 1)))
        min_val = min(min_val, b.min())
        ctrl = rng.uniform(-1e3, 1e3, (n + 1, 2))
        diff = np.abs(bezier_eval(ctrl, rho) - de_casteljau(ctrl, rho)).max()
        worst_eval = max(worst_eval, diff / np.abs(ctrl).max())
    ok = worst_pu < 1e-12 and min_val >= 0 and worst_eval < 1e-12
    verdict("AC5 basis properties", ok,
            f"|sum-1| {worst_pu:.1e}, min value {min_val:.1e}, evaluator rel diff {worst_eval:.1e}")


def test_ac06_degree_nesting(trend_sweeps):
    extra = {}
    for family in ("line",):
        cfg = ExperimentConfig(family=family, orders=list(range(1, 13)))
        extra[family] = run_order_sweep(cfg, write=False)[1]
    noisy = ExperimentConfig(family="sine", orders=list(range(1, 13)), noise_sigma=2.0, seed=6)
    extra["sine+noise"] = run_order_sweep(noisy, write=False)[1]
    bad = []
    checked = 0
    for family, rows in {**trend_sweeps, **extra}.items():
        costs = [r["cost_q"] for r in sorted(rows, key=lambda r: r["order"])]
        for n, (a, b) in enumerate(zip(costs, costs[1:]), start=1):
            checked += 1
            if not b <= a + 1e-9:
                bad.append(f"{family} n={n}")
    verdict("AC6 degree nesting", not bad, f"{checked} consecutive pairs checked, violations: {bad or 'none'}")


@pytest.fixture(scope="module")
def comparisons(tmp_path_factory):
    runs = []
    for name in ("a", "b"):
        out = tmp_path_factory.mktemp(f"compare_{name}")
        cfg = ExperimentConfig(family="sine", seed=0, out_dir=str(out))
        runs.append((out, run_clustering_comparison(cfg)[1]))
    return runs


def test_ac07_clustering_harness(comparisons):
    (out_a, rows), (out_b, _) = comparisons
    same = (out_a / "compare_clustering.csv").read_bytes() == (out_b / "compare_clustering.csv").read_bytes()
    by_alg = {r["algorithm"]: r for r in rows}
    complete = len(rows) == 4 and all(r["status"] == "ok" for r in rows)
    accurate = all(by_alg[a]["gt_rmse"] < 3.0 for a in ("kms", "som"))
    detail = ", ".join(f"{a} {by_alg[a]['gt_rmse']:.3f}px" for a in by_alg)
    verdict("AC7 clustering comparison", complete and accurate and same,
            f"4 rows ok={complete}, deterministic={same}, gt RMSE {detail} (KMS/SOM <3px)")


def test_ac08_rank_guard():
    n = 4
    m = 30
    pts = np.random.default_rng(8).uniform(0, 100, (m, 2))
    short = np.repeat(np.linspace(0, 1, n), int(np.ceil(m / n)))[:m]
    enough = np.repeat(np.linspace(0, 1, n + 1), int(np.ceil(m / (n + 1))))[:m]
    raised = False
    try:
        fit(pts, short, n)
    except SingularSystemError:
        raised = True
    f, _ = fit(pts, enough, n)
    verdict("AC8 rank guard", raised and np.all(np.isfinite(f.flat)),
            f"n distinct -> singular error: {raised}; n+1 distinct -> solved")


def test_ac09_regression_speed():
    cfg_pts = np.random.default_rng(9).uniform(0, 640, (120, 2))
    rho = uniform_params(120)
    times = {}
    for solver in ("normal", "orthogonal"):
        fit(cfg_pts, rho, 8, solver)
        times[solver] = float(np.median([fit(cfg_pts, rho, 8, solver)[1].elapsed for _ in range(50)]))
    verdict("AC9 N=120 n=8 regression < 10 ms", max(times.values()) < 0.010,
            ", ".join(f"{k} {1e3 * v:.3f} ms" for k, v in times.items()))


def test_ac10_reproducibility(comparisons, tmp_path):
    from dlobezier.harness import extract_once

    mismatched = []
    for name in ("a", "b"):
        d = tmp_path / name
        extract_once(ExperimentConfig(family="sine", source="render", out_dir=str(d)))
        run_order_sweep(ExperimentConfig(family="spiral", noise_sigma=1.0, seed=3, out_dir=str(d)))
    files = sorted(p.name for p in (tmp_path / "a").iterdir() if ".meta." not in p.name)
    for f in files:
        if (tmp_path / "a" / f).read_bytes() != (tmp_path / "b" / f).read_bytes():
            mismatched.append(f)
    (out_a, _), (out_b, _) = comparisons
    cmp_files = sorted(p.name for p in out_a.iterdir() if ".meta." not in p.name)
    for f in cmp_files:
        if (out_a / f).read_bytes() != (out_b / f).read_bytes():
            mismatched.append(f)
    verdict("AC10 byte-identical outputs", not mismatched,
            f"{len(files) + len(cmp_files)} files compared, mismatches: {mismatched or 'none'}")
