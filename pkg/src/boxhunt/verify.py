"""Property suites runnable from the command line."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import bounds, continuous
from .core import ProblemInstance, StrategyId, build_schedule
from .exact import build_matrix, column_requirement_check, exact_report, matrix_problems, theta
from .montecarlo import SimConfig, estimate_theta

NON_COORDINATING = (
    StrategyId.TRIVIAL,
    StrategyId.STOC_ADVERSARIAL,
    StrategyId.OPT_UNIFORM,
    StrategyId.MEMORYLESS,
)


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def suite_columns(algs: Sequence[StrategyId], ks: Iterable[int], m: int, mode: str = "rational") -> list[Check]:
    out = []
    for alg in algs:
        for k in ks:
            matrix = build_matrix(build_schedule(alg, ProblemInstance(m, k)), mode=mode)
            v = column_requirement_check(matrix)
            detail = "" if v is None else f"C({v.t}) = {v.column_sum} > {v.budget}"
            out.append(Check("columns", f"{alg.value} k={k} m={matrix.m}", v is None, detail))
    return out


def suite_monotonicity(algs: Sequence[StrategyId], ks: Iterable[int], m: int, mode: str = "rational") -> list[Check]:
    out = []
    for alg in algs:
        for k in ks:
            matrix = build_matrix(build_schedule(alg, ProblemInstance(m, k)), mode=mode)
            problems = matrix_problems(matrix)
            out.append(Check("monotonicity", f"{alg.value} k={k} m={matrix.m}", not problems, "; ".join(problems[:3])))
    return out


def suite_single_searcher(algs: Sequence[StrategyId], ks: Iterable[int], m: int) -> list[Check]:
    """One searcher never beats opening the boxes in order: theta(S, 1) >= 1."""
    out = []
    for alg in algs:
        for k in ks:
            if alg.coordinated and k != 1:
                continue
            schedule = build_schedule(alg, ProblemInstance(m, k))
            matrix = build_matrix(schedule, mode="rational")
            th = theta(matrix, 1).theta
            out.append(Check("single", f"{alg.value} built for k={k}, 1 searcher", th >= 1, f"theta={float(th):.6f}"))
    return out


def suite_zoom(tol: float = 1e-3, n: int = 1024) -> list[Check]:
    f = continuous.opt_grid(2, n_x=n, n_t=n)
    base = continuous.grid_theta(f, 2)
    out = []
    for a, b in ((2, 1), (1, 2), (3, 3)):
        x_new = np.geomspace(a * f.x_grid[0], a * f.x_grid[-1], n - 7)
        t_new = np.concatenate([[0.0], np.geomspace(b * f.t_grid[1], b * f.t_grid[-1], n - 5)])
        for label, z in (("scaled", continuous.zoom(f, a, b)), ("resampled", continuous.zoom(f, a, b, x_new, t_new))):
            th = continuous.grid_theta(z, 2)
            err_theta = abs(th - b / a * base)
            err_col = max(
                abs(continuous.column_integral(z, t) - a * continuous.column_integral(f, t / b))
                for t in np.linspace(0.05, 1.5, 13) * b
            )
            ok = err_theta <= tol and err_col <= tol
            out.append(Check("zoom", f"({a},{b}) {label}", ok, f"theta err {err_theta:.2e}, column err {err_col:.2e}"))
    return out


def gamma_cases(n: int, seed: int, b_max: int = 10 ** 6) -> list[tuple[int, int, float]]:
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n):
        b = int(round(10 ** rng.uniform(0, math.log10(b_max))))
        b = min(max(b, 1), b_max)
        a = int(rng.integers(1, b + 1))
        phi = float(1.0 - rng.random())          # (0, 1]
        cases.append((a, b, phi))
    return cases


def suite_gamma(cases: int = 1000, seed: int = 3) -> list[Check]:
    failures = [c for c in gamma_cases(cases, seed) if not bounds.gamma_product_check(*c).holds]
    detail = f"{cases} cases, {len(failures)} violations"
    if failures:
        detail += f"; first {failures[0]}"
    return [Check("gamma", f"seed={seed}", not failures, detail)]


def suite_mc(
    algs: Sequence[StrategyId],
    ks: Iterable[int],
    m: int,
    trials: int,
    seed: int,
    z: float = 4.0,
) -> list[Check]:
    out = []
    for alg in algs:
        for k in ks:
            exact = exact_report(alg, k, m, mode="rational")
            est = estimate_theta(SimConfig(ProblemInstance(m, k), alg, trials, seed))
            diff = abs(est.theta - float(exact.theta))
            ok = diff <= z * est.stderr
            out.append(Check("mc", f"{alg.value} k={k} m={m}", ok, f"|diff|={diff:.3g}, stderr={est.stderr:.3g}"))
    return out


def suite_opt(ks: Iterable[int], tol: float = 1e-3) -> list[Check]:
    out = []
    for k in ks:
        closed = continuous.theta_integral(k, "closed_form_regions")
        formula = bounds.uniform_bound(k).value
        value, err = continuous.quadrature_theta(k)
        ok = closed == 1 / formula and abs(value - float(closed)) <= tol
        out.append(Check("opt", f"k={k}", ok, f"closed={closed}, quadrature={value:.9f} (±{err:.1e})"))
    return out


SUITES: dict[str, Callable[..., list[Check]]] = {
    "columns": suite_columns,
    "monotonicity": suite_monotonicity,
    "single": suite_single_searcher,
    "zoom": suite_zoom,
    "gamma": suite_gamma,
    "mc": suite_mc,
    "opt": suite_opt,
}
