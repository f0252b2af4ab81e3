"""Acceptance checks, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (shown even without
``-s``) before asserting.  Run just these with::

    pytest tests/test_acceptance.py -v
"""

import csv
import io
import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from boxhunt import bounds, continuous
from boxhunt.cli import main
from boxhunt.core import ProblemInstance, StrategyId, build_schedule
from boxhunt.exact import FLOAT64, RATIONAL, build_matrix, exact_report, theta
from boxhunt.montecarlo import SimConfig, crash_experiment, estimate_theta, inverse_stderr
from boxhunt.verify import gamma_cases

NON_COORDINATING = [StrategyId.TRIVIAL, StrategyId.STOC_ADVERSARIAL, StrategyId.OPT_UNIFORM, StrategyId.MEMORYLESS]


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} | {detail}")
        assert ok, detail
    return emit


def h(a, b):
    return F(a, b)


# reference matrix for the k=2, m=6 with-memory searcher, rows x=1..6, columns t=0..6
REFERENCE_MATRIX = [
    [1, h(1, 2), h(1, 3), h(1, 4), h(1, 6), h(1, 12), 0],
    [1, h(1, 2), h(1, 3), h(1, 4), h(1, 6), h(1, 12), 0],
    [1, 1, h(2, 3), h(1, 2), h(1, 3), h(1, 6), 0],
    [1, 1, h(2, 3), h(1, 2), h(1, 3), h(1, 6), 0],
    [1, 1, 1, h(3, 4), h(1, 2), h(1, 4), 0],
    [1, 1, 1, h(3, 4), h(1, 2), h(1, 4), 0],
]


def test_01_reference_matrix(verdict):
    start = time.perf_counter()
    matrix = build_matrix(build_schedule("opt", ProblemInstance(6, 2)), mode=RATIONAL)
    got = matrix.entries()
    elapsed = time.perf_counter() - start
    cells = sum(len(r) for r in got)
    same = got == REFERENCE_MATRIX and all(isinstance(v, F) for r in got for v in r)
    verdict(1, "reference matrix (opt, k=2, m=6)", same and cells == 42 and elapsed < 1,
            f"{cells} entries equal={same}, {elapsed * 1e3:.1f} ms")


def test_02_single_searcher(verdict):
    trivial = {m: exact_report("trivial", 1, m, mode=RATIONAL).theta for m in (1, 10, 1000)}
    worst = None
    for alg in StrategyId:
        for k in (1, 2, 3):
            if alg.coordinated and k != 1:
                continue
            matrix = build_matrix(build_schedule(alg, ProblemInstance(100, k)), mode=RATIONAL)
            th = theta(matrix, 1).theta
            assert isinstance(th, F)
            if worst is None or th < worst[0]:
                worst = (th, alg.value, k)
    ok = all(v == 1 for v in trivial.values()) and worst[0] >= 1
    verdict(2, "trivial theta = 1 exactly; theta(S, 1) >= 1 at m=100", ok,
            f"trivial {dict((m, str(v)) for m, v in trivial.items())}, min theta(S,1) = {float(worst[0]):.6f} ({worst[1]} built for k={worst[2]})")


def test_03_closed_form_and_quadrature(verdict):
    start = time.perf_counter()
    exact_ok = all(continuous.theta_integral(k, "closed_form_regions") == F(3 * k - 1, k * (k + 1)) for k in range(2, 21))
    diffs = {k: abs(continuous.theta_integral(k, "quadrature") - (3 * k - 1) / (k * (k + 1))) for k in range(2, 11)}
    elapsed = time.perf_counter() - start
    ok = exact_ok and max(diffs.values()) <= 1e-3 and elapsed < 30
    verdict(3, "closed form (3k-1)/(k(k+1)) for k=2..20, quadrature k=2..10", ok,
            f"exact={exact_ok}, max |quad - closed| = {max(diffs.values()):.2e}, {elapsed:.2f} s")


def test_04_convergence(verdict):
    start = time.perf_counter()
    details, ok = [], True
    for k, limit in ((2, F(6, 5)), (3, F(3, 2))):
        speeds = [float(exact_report("opt", k, m).speedup_inv_theta) for m in (60, 600, 6000)]
        rising = speeds[0] < speeds[1] < speeds[2] < float(limit)
        close = abs(speeds[2] - float(limit)) <= 0.05 * float(limit)
        ok &= rising and close
        details.append(f"k={k}: " + ", ".join(f"{s:.5f}" for s in speeds) + f" -> {limit}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    verdict(4, "opt speed-up rises toward the uniform optimum", ok, "; ".join(details) + f"; {elapsed:.2f} s")


def test_05_uniform_bound_respected(verdict):
    worst = (0.0, None)
    for alg in NON_COORDINATING:
        for k in (2, 3, 4):
            speed = exact_report(alg, k, 10_000, mode=FLOAT64).speedup_inv_theta
            ratio = speed / float(bounds.uniform_bound(k))
            if ratio > worst[0]:
                worst = (ratio, f"{alg.value} k={k}")
    verdict(5, "exact 1/theta <= 1.05 * uniform bound at m=10^4", worst[0] <= 1.05,
            f"largest ratio {worst[0]:.5f} ({worst[1]})")


def test_06_memoryless(verdict):
    start = time.perf_counter()
    speed = exact_report("memoryless", 6, 6000).speedup_inv_theta
    elapsed = time.perf_counter() - start
    verdict(6, "memoryless k=6 m=6000 speed-up >= 1.8", speed >= 1.8 and elapsed < 60,
            f"1/theta = {speed:.5f}, {elapsed:.2f} s")


def test_07_gamma_products(verdict):
    cases = gamma_cases(1000, seed=7)
    failed = [c for c in cases if not bounds.gamma_product_check(*c).holds]
    spread = (min(b for _, b, _ in cases), max(b for _, b, _ in cases))
    verdict(7, "gamma product inequality on 1000 seeded cases", not failed,
            f"{len(failed)} violations, b in [{spread[0]}, {spread[1]}]")


def test_08_zoom_laws(verdict):
    f = continuous.opt_grid(2, n_x=2048, n_t=2048)
    base = continuous.grid_theta(f, 2)
    worst = 0.0
    for a, b in ((2, 1), (1, 2), (3, 3), (5, 5)):
        # scaled grids and a fresh resampling grid
        x_new = np.geomspace(a * f.x_grid[0], a * f.x_grid[-1], 1500)
        for z in (continuous.zoom(f, a, b), continuous.zoom(f, a, b, x_grid=x_new)):
            worst = max(worst, abs(continuous.grid_theta(z, 2) - b / a * base))
            for t in np.linspace(0.05, 1.5, 12) * b:
                worst = max(worst, abs(continuous.column_integral(z, t) - a * continuous.column_integral(f, t / b)))
    verdict(8, "zoom laws on sampled OPT_2 within 1e-3", worst <= 1e-3,
            f"theta(OPT_2) grid = {base:.6f}, worst deviation {worst:.2e}")


def test_09_monte_carlo_vs_exact(verdict):
    start = time.perf_counter()
    tallies = {}
    for alg in StrategyId:
        for k in (2, 3):
            exact = float(exact_report(alg, k, 100, mode=RATIONAL).theta)
            hits = 0
            for seed in range(10):
                est = estimate_theta(SimConfig(ProblemInstance(100, k), alg, 100_000, seed))
                hits += abs(est.theta - exact) <= 4 * est.stderr
            tallies[f"{alg.value}/k={k}"] = hits
    elapsed = time.perf_counter() - start
    ok = all(v >= 9 for v in tallies.values()) and elapsed < 120
    verdict(9, "Monte Carlo within 4 stderr of exact, >= 9/10 seeds", ok,
            " ".join(f"{n}:{v}/10" for n, v in tallies.items()) + f"; {elapsed:.1f} s")


def test_10_crash_robustness(verdict):
    m = 999
    opt = crash_experiment(SimConfig(ProblemInstance(m, 3), "opt", 10_000, 10, crash_plan=((0, 0),)))
    # the two survivors still follow the three-searcher schedule
    oracle = float(theta(build_matrix(build_schedule("opt", ProblemInstance(m, 3))), 2).speedup_inv_theta)
    err = inverse_stderr(opt.report)
    speed = opt.report.speedup_inv_theta
    two_built = float(exact_report("opt", 2, m).speedup_inv_theta)
    part = crash_experiment(SimConfig(ProblemInstance(m, 3), "partition", 10_000, 10, crash_plan=((0, 0),)))
    ok = (
        opt.found_fraction == 1.0
        and abs(speed - oracle) <= 3 * err
        and abs(part.found_fraction - 2 / 3) <= 0.05
    )
    verdict(10, "one crash: opt keeps finding, partition loses a third", ok,
            f"opt found={opt.found_fraction:.3f}, 1/theta_hat = {speed:.4f} vs exact two-survivor {oracle:.4f} "
            f"(3*stderr = {3 * err:.4f}; schedule built for two: {two_built:.4f}); partition found={part.found_fraction:.4f}")


def test_11_dominance(verdict):
    worst = -math.inf
    for k in (2, 3):
        matrix = build_matrix(build_schedule("opt", ProblemInstance(600, k)), mode=FLOAT64)
        m = matrix.m
        for x in range(k, m + 1, k):
            row = np.array(matrix.row(x))
            t = np.arange(row.size)
            bound = continuous.opt_values(k, np.full(row.size, x / m), t / m)
            worst = max(worst, float(np.max(row - bound)))
    verdict(11, "opt matrix below the continuous profile on multiples of k", worst <= 1e-9,
            f"max N - OPT = {worst:.3e}")


def test_12_headline_numbers(verdict, capsys):
    code = main(["bounds", "--k", "2..3"])
    table = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    code_100 = main(["bounds", "--k", "100"])
    row_100 = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))[0]
    k2, k3 = table
    gap = float(row_100["gap_ratio"])
    ok = (
        code == code_100 == 0
        and float(k2["uniform_bound"]) == 1.2 and float(k2["adversarial_bound"]) == 1.125
        and float(k3["uniform_bound"]) == 1.5 and F(k3["adversarial_exact"]) == F(4, 3)
        and abs(float(k3["adversarial_bound"]) - 4 / 3) < 1e-12
        and abs(gap - 4 / 3) <= 0.02 * 4 / 3
    )
    verdict(12, "bounds table: 1.2/1.125 at k=2, 1.5/1.333 at k=3, gap near 4/3", ok,
            f"k=2 {k2['uniform_bound']}/{k2['adversarial_bound']}, k=3 {k3['uniform_bound']}/{k3['adversarial_bound']}, "
            f"gap(100) = {gap:.5f}")
