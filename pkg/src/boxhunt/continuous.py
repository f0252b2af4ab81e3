"""Continuous non-visit functions: the optimal profile OPT_k, zooming, and grids.

Functions live on ``X x [0, t_max]`` and are represented by samples on a
rectangular grid read as a piecewise-bilinear interpolant.  Past ``t_max`` a
grid function is taken to be 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import RegularGridInterpolator

from .exact import NonVisitMatrix

__all__ = [
    "GridFunction",
    "ColumnSolution",
    "QuadratureError",
    "opt_eval",
    "column_optimizer",
    "opt_regions",
    "theta_integral",
    "quadrature_theta",
    "opt_grid",
    "zoom",
    "column_integral",
    "grid_theta",
    "embed_matrix",
    "epsilon_factor",
]


class QuadratureError(RuntimeError):
    def __init__(self, message: str, error: float):
        super().__init__(message)
        self.error = error


def _check_k(k: int) -> None:
    if not isinstance(k, int) or k < 2:
        raise ValueError("the continuous profile needs k ≥ 2 (exponent 1/(k-1))")


def opt_eval(k: int, x: float, t: float) -> float:
    """OPT_k(x, t); on branch boundaries the common limit is returned."""
    _check_k(k)
    if not 0 < x <= 1:
        raise ValueError("x must lie in (0, 1]")
    if t < 0:
        raise ValueError("t must be ≥ 0")
    e = 1.0 / (k - 1)
    if t * k <= x:
        return 1.0
    if t * k <= 1:
        return (x / (k * t)) ** e
    if t <= 1:
        return k / (k - 1) * (1 - t) * x ** e
    return 0.0


def opt_values(k: int, x, t) -> np.ndarray:
    """Vectorized :func:`opt_eval` over broadcast arrays."""
    _check_k(k)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    x, t = np.broadcast_arrays(x, t)
    e = 1.0 / (k - 1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        mid = (x / (k * t)) ** e
    late = k / (k - 1) * (1 - t) * x ** e
    out = np.where(t <= 1, late, 0.0)
    out = np.where(t * k <= 1, mid, out)
    out = np.where(t * k <= x, 1.0, out)
    return out


@dataclass(frozen=True)
class ColumnSolution:
    t: float
    alpha: float
    gamma: float

    def value(self, x, k: int):
        """Column profile ``min(1, alpha * x^(1/(k-1)))``."""
        return np.minimum(1.0, self.alpha * np.asarray(x, dtype=float) ** (1.0 / (k - 1)))


def column_optimizer(k: int, t: float) -> ColumnSolution:
    """Minimizer of ``int_0^1 f^k / x`` subject to ``int_0^1 (1-f) <= t``.

    ``gamma`` is the smallest x where the column reaches 1.
    """
    _check_k(k)
    if t < 0:
        raise ValueError("t must be ≥ 0")
    if t >= 1:
        return ColumnSolution(t, 0.0, 1.0)
    if t * k < 1:
        if t == 0:
            return ColumnSolution(t, math.inf, 0.0)
        gamma = k * t
        return ColumnSolution(t, gamma ** (-1.0 / (k - 1)), gamma)
    return ColumnSolution(t, k / (k - 1) * (1 - t), 1.0)


def opt_regions(k: int) -> tuple[Fraction, Fraction, Fraction]:
    """The three pieces of theta(OPT_k): early partial columns, early full rows, late columns."""
    _check_k(k)
    return (
        Fraction(k - 1, k * k),
        Fraction(1, k),
        Fraction((k - 1) ** 2, k * k * (k + 1)),
    )


def _inner_t_integral(k: int, x: float) -> float:
    """(1/x) * int_0^inf OPT_k(x, t)^k dt, integrated in t branch by branch."""
    r = x ** (1.0 / (k - 1))
    before = 1.0 / k                                   # t < x/k, value 1
    middle = (k - 1) / k * (1.0 - r)                   # x/k < t < 1/k
    late = (k - 1) / (k * (k + 1)) * r                 # 1/k < t < 1
    return before + middle + late


def quadrature_theta(k: int, eps: float = 1e-6, tol: float = 1e-9) -> tuple[float, float]:
    """theta(OPT_k) by adaptive quadrature in x over [eps, 1].

    Returns ``(value, error_bound)``; the bound adds the quadrature estimate
    to the discarded mass on (0, eps), where the integrand is at most 1.
    """
    _check_k(k)
    value, qerr = integrate.quad(
        lambda x: _inner_t_integral(k, x), eps, 1.0, epsabs=tol, epsrel=tol, limit=200
    )
    remainder = eps * 1.0
    error = qerr + remainder
    return value, error


def theta_integral(k: int, method: str = "closed_form_regions", tol: float = 1e-3):
    """Inverse speed-up of OPT_k with k searchers.

    ``closed_form_regions`` returns an exact Fraction; ``quadrature`` a float,
    raising :class:`QuadratureError` if the achieved error exceeds ``tol``.
    """
    if method == "closed_form_regions":
        return sum(opt_regions(k), Fraction(0))
    if method == "quadrature":
        value, error = quadrature_theta(k)
        if error > tol:
            raise QuadratureError(f"quadrature error {error:.3g} exceeds {tol:.3g}", error)
        return value
    raise ValueError(f"unknown method {method!r}")


def epsilon_factor(eps: float) -> float:
    """Lower factor (1-sqrt(eps))/(1+sqrt(eps)) for functions living on [eps, 1]."""
    if not 0 <= eps < 1:
        raise ValueError("eps must be in [0, 1)")
    r = math.sqrt(eps)
    return (1 - r) / (1 + r)


@dataclass
class GridFunction:
    x_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray
    truncation_error: float = 0.0
    _interp: Optional[RegularGridInterpolator] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.x_grid.size, self.t_grid.size):
            raise ValueError("values must have shape (len(x_grid), len(t_grid))")
        if np.any(np.diff(self.x_grid) <= 0) or np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("grids must be strictly increasing")
        if self.t_grid[0] < 0:
            raise ValueError("t_grid must start at a non-negative time")

    @classmethod
    def from_callable(cls, fn: Callable, x_grid, t_grid) -> "GridFunction":
        x_grid = np.asarray(x_grid, dtype=float)
        t_grid = np.asarray(t_grid, dtype=float)
        xx, tt = np.meshgrid(x_grid, t_grid, indexing="ij")
        return cls(x_grid, t_grid, fn(xx, tt))

    @property
    def width(self) -> float:
        return float(self.x_grid[-1] - self.x_grid[0])

    def __call__(self, x, t) -> np.ndarray:
        if self._interp is None:
            self._interp = RegularGridInterpolator(
                (self.x_grid, self.t_grid), self.values, method="linear",
                bounds_error=False, fill_value=None,
            )
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        pts = np.stack([x.ravel(), t.ravel()], axis=-1)
        out = self._interp(pts).reshape(x.shape)
        out = np.where(t > self.t_grid[-1], 0.0, out)
        return np.clip(out, 0.0, 1.0)

    def is_valid(self, tol: float = 1e-9) -> bool:
        ok_range = bool(np.all((self.values >= -tol) & (self.values <= 1 + tol)))
        starts = self.t_grid[0] != 0 or bool(np.allclose(self.values[:, 0], 1.0))
        return ok_range and starts


def opt_grid(
    k: int,
    n_x: int = 2048,
    n_t: int = 2048,
    x_min: float = 1e-6,
    t_max: float = 2.0,
) -> GridFunction:
    """OPT_k sampled on geometric grids that resolve the t = x/k kink at every scale."""
    _check_k(k)
    x_grid = np.geomspace(x_min, 1.0, n_x)
    t_min = x_min / (4 * k)
    t_grid = np.unique(np.concatenate([
        [0.0],
        np.geomspace(t_min, t_max, n_t - 1),
        [1.0 / k, 1.0],
    ]))
    return GridFunction.from_callable(lambda x, t: opt_values(k, x, t), x_grid, t_grid)


def column_integral(f: GridFunction, t: float) -> float:
    """``int_X (1 - f(x, t)) dx`` by the trapezoid rule on f's x grid."""
    col = f(f.x_grid, np.full_like(f.x_grid, t))
    return float(integrate.trapezoid(1.0 - col, f.x_grid))


def grid_theta(f: GridFunction, k: int) -> float:
    """``(1/|X|) int_X int_0^tmax f(x,t)^k / x dt dx`` by nested trapezoids."""
    inner = integrate.trapezoid(f.values ** k, f.t_grid, axis=1)
    return float(integrate.trapezoid(inner / f.x_grid, f.x_grid) / f.width)


def zoom(
    f: GridFunction,
    a: float,
    b: float,
    x_grid=None,
    t_grid=None,
) -> GridFunction:
    """Zooming by (a, b): ``g(x, t) = f(x/a, t/b)`` on the domain ``a*X``.

    Without explicit grids the sample points are scaled along with the
    domain, which leaves the samples untouched.  With grids, ``g`` is
    resampled there through f's interpolant.
    """
    if a <= 0 or b <= 0:
        raise ValueError("zoom factors must be positive")
    if x_grid is None and t_grid is None:
        return GridFunction(f.x_grid * a, f.t_grid * b, f.values.copy(), f.truncation_error * b)
    x_grid = f.x_grid * a if x_grid is None else np.asarray(x_grid, dtype=float)
    t_grid = f.t_grid * b if t_grid is None else np.asarray(t_grid, dtype=float)
    lo, hi = a * f.x_grid[0], a * f.x_grid[-1]
    if x_grid[0] < lo * (1 - 1e-12) or x_grid[-1] > hi * (1 + 1e-12):
        raise ValueError("resampling grid leaves the zoomed domain")
    xx, tt = np.meshgrid(np.clip(x_grid / a, f.x_grid[0], f.x_grid[-1]), t_grid / b, indexing="ij")
    return GridFunction(x_grid, t_grid, f(xx, tt), f.truncation_error * b)


_SMEAR = 1e-9


def _step_grid(n: int, delta: float) -> np.ndarray:
    """Breakpoints 0, 1-d, 1, 2-d, 2, ..., n-d, n."""
    pts = [0.0]
    for i in range(1, n + 1):
        pts.extend([i - delta, float(i)])
    return np.array(pts)


def embed_matrix(
    matrix: NonVisitMatrix,
    tail_cutoff: float = 1e-12,
    max_tail_steps: int = 1_000_000,
    delta: float = _SMEAR,
) -> GridFunction:
    """Step-function embedding ``N(x, t) = N_A(floor(x), floor(t))`` on ``[1, m+1]``.

    Jumps are replaced by ramps of width ``delta`` so the bilinear reading
    stays faithful.  Geometric tails are expanded until every row is below
    ``tail_cutoff``; the dropped row-sum mass is kept in ``truncation_error``.
    """
    rows = np.array([[float(v) for v in matrix.row(x)] for x in range(1, matrix.m + 1)])
    truncation = 0.0
    if matrix.tail_ratio is not None and rows[:, -1].max() > 0:
        r = float(matrix.tail_ratio)
        top = rows[:, -1].max()
        steps = 0 if r == 0 else int(math.ceil(math.log(tail_cutoff / top) / math.log(r)))
        steps = max(0, min(steps, max_tail_steps))
        extra = rows[:, -1:] * r ** np.arange(1, steps + 1)[None, :]
        rows = np.hstack([rows, extra])
        last = rows[:, -1]
        truncation = float(np.max(last * r / (1 - r))) if r < 1 else math.inf
    elif rows[:, -1].max() > 0:
        raise ValueError("matrix rows do not reach 0 and no tail is given")

    n_cols = rows.shape[1]  # columns t = 0..n_cols-1, then 0 from t = n_cols on
    rows = np.hstack([rows, np.zeros((matrix.m, 1))])

    # x in [1, m+1]: row i on [i, i+1-delta], ramp to row i+1 on [i+1-delta, i+1]
    x_grid = np.concatenate([[1.0], _step_grid(matrix.m, delta)[1:] + 1.0])
    row_index = np.empty(x_grid.size, dtype=int)
    row_index[0] = 0
    for j in range(matrix.m):
        row_index[1 + 2 * j] = j                 # i + 1 - delta, still row i
        row_index[2 + 2 * j] = min(j + 1, matrix.m - 1)
    t_grid = _step_grid(n_cols, delta)
    col_index = np.empty(t_grid.size, dtype=int)
    col_index[0] = 0
    for j in range(n_cols):
        col_index[1 + 2 * j] = j
        col_index[2 + 2 * j] = j + 1
    values = rows[np.ix_(row_index, col_index)]
    return GridFunction(x_grid, t_grid, values, truncation_error=truncation)
