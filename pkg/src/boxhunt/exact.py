"""Exact non-visit matrices and expected find times.

``N(x, t)`` is the probability that one searcher has not opened box ``x`` by
the end of step ``t``.  For every schedule in :mod:`boxhunt.core` it has a
product form: box ``x`` becomes eligible at some step ``s_x`` and from then on
survives step ``t`` with the same factor ``1 - 1/pool_size(t)`` as every other
eligible box.  Matrices built from schedules are stored that way; the full
table is only materialized on request.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from . import bounds
from .core import (
    Placement,
    PerBox,
    ProblemInstance,
    SelectionSchedule,
    SpeedupReport,
    StrategyId,
    UNIFORM,
    build_schedule,
)

Number = Union[Fraction, float]

RATIONAL = "rational"
FLOAT64 = "float64"
AUTO = "auto"

# auto mode picks rationals up to this m; explicit rational requests are
# refused above RATIONAL_LIMIT unless the caller raises it
RATIONAL_AUTO_MAX = 512
RATIONAL_LIMIT = 2048


class MatrixOverflowError(ValueError):
    pass


def resolve_mode(mode: str, m: int, rational_limit: int = RATIONAL_LIMIT) -> str:
    mode = {"exact": RATIONAL, "exact_rational": RATIONAL, "float": FLOAT64}.get(mode, mode)
    if mode == AUTO:
        return RATIONAL if m <= RATIONAL_AUTO_MAX else FLOAT64
    if mode not in (RATIONAL, FLOAT64):
        raise ValueError(f"unknown numeric mode {mode!r}")
    if mode == RATIONAL and m > rational_limit:
        raise MatrixOverflowError(
            f"exact-rational mode refused for m={m} (limit {rational_limit}); "
            "use --mode float64 or raise the limit"
        )
    return mode


@dataclass(eq=False)
class NonVisitMatrix:
    """Non-visit probabilities ``N(x, t)`` for ``x = 1..m``, ``t = 0..horizon``.

    Either ``start``/``factors`` (product form) or ``table`` (explicit rows) is
    set.  ``tail_ratio`` is the per-step survival factor of every row after
    the horizon; without it rows are expected to have reached 0.  ``team``
    greater than one marks a matrix that already describes a whole team of
    coordinated searchers, so probabilities are not raised to the k-th power.
    """

    m: int
    horizon: int
    mode: str
    start: Optional[tuple[int, ...]] = None
    factors: Optional[tuple[Number, ...]] = None
    table: Optional[tuple[tuple[Number, ...], ...]] = None
    tail_ratio: Optional[Number] = None
    team: int = 1
    strategy: Optional[StrategyId] = None
    k: Optional[int] = None
    _power_cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], tail_ratio=None, team: int = 1) -> "NonVisitMatrix":
        rows = tuple(tuple(r) for r in rows)
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("rows must be non-empty and of equal length")
        exact = all(isinstance(v, (int, Fraction)) for r in rows for v in r)
        if exact:
            rows = tuple(tuple(Fraction(v) for v in r) for r in rows)
        else:
            rows = tuple(tuple(float(v) for v in r) for r in rows)
        return cls(
            m=len(rows),
            horizon=len(rows[0]) - 1,
            mode=RATIONAL if exact else FLOAT64,
            table=rows,
            tail_ratio=tail_ratio,
            team=team,
        )

    @property
    def exact(self) -> bool:
        return self.mode == RATIONAL

    @property
    def _one(self) -> Number:
        return Fraction(1) if self.exact else 1.0

    def value(self, x: int, t: int) -> Number:
        if not 1 <= x <= self.m or t < 0:
            raise IndexError((x, t))
        if t > self.horizon:
            last = self.value(x, self.horizon)
            return last * self.tail_ratio ** (t - self.horizon) if self.tail_ratio is not None else last * 0
        if self.table is not None:
            return self.table[x - 1][t]
        s = self.start[x - 1]
        v = self._one
        for u in range(s, t + 1):
            v *= self.factors[u - 1]
        return v

    def row(self, x: int) -> list[Number]:
        """Explicit entries ``N(x, 0..horizon)``."""
        if self.table is not None:
            return list(self.table[x - 1])
        s = self.start[x - 1]
        out = [self._one] * min(s, self.horizon + 1)
        v = self._one
        for u in range(s, self.horizon + 1):
            v *= self.factors[u - 1]
            out.append(v)
        return out

    def entries(self) -> list[list[Number]]:
        return [self.row(x) for x in range(1, self.m + 1)]

    def column_sums(self) -> list[Number]:
        """``C(t) = sum_x (1 - N(x, t))`` for ``t = 0..horizon``."""
        if self.table is not None:
            return [
                sum((1 - self.table[x][t] for x in range(self.m)), self._one * 0)
                for t in range(self.horizon + 1)
            ]
        # forward recursion: A(t) = f_t * (A(t-1) + #boxes becoming eligible at t)
        arrivals = Counter(self.start)
        zero = self._one * 0
        out = [zero]
        eligible_mass = zero
        pending = self.m - arrivals.get(0, 0)
        for t in range(1, self.horizon + 1):
            pending -= arrivals.get(t, 0)
            eligible_mass = self.factors[t - 1] * (eligible_mass + arrivals.get(t, 0))
            out.append(self.m - pending - eligible_mass)
        return out

    def _tail_power_sum(self, power: int) -> Number:
        """sum_{j>=1} r^(power*j) for the tail ratio r."""
        r = self.tail_ratio
        if self.exact:
            q = r ** power
            return q / (1 - q)
        if r <= 0:
            return 0.0
        log_q = power * math.log(r)
        return math.exp(log_q) / -math.expm1(log_q)

    def power_sums(self, power: int) -> list[Number]:
        """``sum_{t>=0} N(x, t)**power`` for every ``x``, tails in closed form."""
        if power in self._power_cache:
            return self._power_cache[power]
        if self.tail_ratio is not None:
            if not 0 <= self.tail_ratio < 1:
                raise ValueError("tail ratio must be in [0, 1) for a finite expected time")
            tail = self._tail_power_sum(power)
        else:
            tail = None

        if self.table is not None:
            out = []
            for x, r in enumerate(self.table, start=1):
                total = sum((v ** power for v in r), self._one * 0)
                if r[-1] != 0:
                    if tail is None:
                        raise ValueError(f"row {x} is nonzero at the horizon and no tail is given")
                    total += r[-1] ** power * tail
                out.append(total)
        else:
            h = self.horizon
            # S[s] = sum_{t>=s} prod_{u=s}^{t} f_u^power, S[h+1] = tail sum
            suffix = [self._one * 0] * (h + 2)
            suffix[h + 1] = tail if tail is not None else self._one * 0
            for s in range(h, 0, -1):
                suffix[s] = self.factors[s - 1] ** power * (1 + suffix[s + 1])
            out = []
            for s in self.start:
                if s > h:
                    raise ValueError("box never becomes eligible; expected time is infinite")
                out.append(s + suffix[s])
        self._power_cache[power] = out
        return out


def build_matrix(
    schedule: SelectionSchedule,
    m: Optional[int] = None,
    mode: str = AUTO,
    rational_limit: int = RATIONAL_LIMIT,
) -> NonVisitMatrix:
    """Non-visit matrix of one searcher following ``schedule``.

    ``m`` may be given as a consistency check; it must be the schedule's
    effective or requested box count.
    """
    if m is not None and m not in (schedule.m, schedule.requested_m):
        raise ValueError(f"schedule is for m={schedule.m}, got m={m}")
    m = schedule.m
    mode = resolve_mode(mode, m, rational_limit)
    exact = mode == RATIONAL

    def ratio(num: int, den: int) -> Number:
        return Fraction(num, den) if exact else num / den

    if schedule.interleaved:
        k = schedule.k
        start = tuple(-(-x // k) for x in range(1, m + 1))
        factors = tuple(ratio(0, 1) for _ in schedule.entries)
        return NonVisitMatrix(
            m=m, horizon=schedule.horizon, mode=mode, start=start, factors=factors,
            team=k, strategy=schedule.strategy, k=k,
        )

    factors = []
    for e in schedule.entries:
        if e.pool_size < 1:
            raise ValueError("pool_size must be ≥ 1")
        factors.append(ratio(e.pool_size - 1, e.pool_size))
    start = tuple(schedule.first_step(x) for x in range(1, m + 1))
    tail = None
    if schedule.tail_p is not None:
        p = schedule.tail_p
        tail = 1 - p if exact else 1.0 - float(p)
    return NonVisitMatrix(
        m=m, horizon=schedule.horizon, mode=mode, start=start, factors=tuple(factors),
        tail_ratio=tail, strategy=schedule.strategy, k=schedule.k,
    )


def _exponent(matrix: NonVisitMatrix, k: int) -> int:
    if k < 1:
        raise ValueError("k must be ≥ 1")
    if matrix.team > 1:
        if k != matrix.team:
            raise ValueError(f"matrix describes a coordinated team of {matrix.team}, not {k}")
        return 1
    return k


def expected_visit_time(matrix: NonVisitMatrix, x: int, k: int) -> Number:
    """Expected step at which the first of ``k`` independent searchers opens ``x``."""
    if not 1 <= x <= matrix.m:
        raise ValueError(f"x must be in 1..{matrix.m}")
    return matrix.power_sums(_exponent(matrix, k))[x - 1]


def _total(values, exact: bool):
    if exact:
        return sum(values, Fraction(0))
    return math.fsum(values)


def theta(
    matrix: NonVisitMatrix,
    k: int,
    placement: Placement = UNIFORM,
    per_x: bool = False,
) -> SpeedupReport:
    times = matrix.power_sums(_exponent(matrix, k))
    exact = matrix.exact
    one = Fraction(1) if exact else 1.0
    m = matrix.m
    if placement.uniform:
        th = _total((t / x for x, t in enumerate(times, start=1)), exact) / m
        mean = _total((x / t for x, t in enumerate(times, start=1)), exact) / m
    else:
        x = placement.x
        if not 1 <= x <= m:
            raise ValueError(f"x must be in 1..{m}")
        th = times[x - 1] / x
        mean = x / times[x - 1]
    detail = None
    if per_x:
        detail = [PerBox(x, t, t / x) for x, t in enumerate(times, start=1)]
    return SpeedupReport(
        strategy=matrix.strategy,
        k=k,
        m=m,
        theta=th,
        speedup_inv_theta=one / th,
        speedup_mean=mean,
        per_x=detail,
        mode="exact",
        numeric_mode=matrix.mode,
        placement=str(placement),
    )


@dataclass(frozen=True)
class ColumnViolation:
    t: int
    column_sum: Number
    budget: Number


def column_requirement_check(matrix: NonVisitMatrix) -> Optional[ColumnViolation]:
    """First column ``t`` with ``C(t) > t`` (times the team size), or ``None``."""
    tol = 0 if matrix.exact else 1e-12 * matrix.m
    for t, c in enumerate(matrix.column_sums()):
        budget = matrix.team * t
        if c > budget + tol:
            return ColumnViolation(t, c, budget)
    return None


def matrix_problems(matrix: NonVisitMatrix, max_rows: Optional[int] = None) -> list[str]:
    """Structural invariant violations: N(x,0)=1, entries in [0,1], rows non-increasing, columns."""
    problems = []
    tol = 0 if matrix.exact else 1e-12
    rows = range(1, matrix.m + 1) if max_rows is None else range(1, min(matrix.m, max_rows) + 1)
    for x in rows:
        r = matrix.row(x)
        if r[0] != 1:
            problems.append(f"N({x},0) = {r[0]} != 1")
        for t, v in enumerate(r):
            if v < -tol or v > 1 + tol:
                problems.append(f"N({x},{t}) = {v} outside [0,1]")
            if t and v > r[t - 1] + tol:
                problems.append(f"row {x} increases at t={t}")
    if matrix.tail_ratio is not None and not 0 <= matrix.tail_ratio < 1:
        problems.append(f"tail ratio {matrix.tail_ratio} outside [0,1)")
    violation = column_requirement_check(matrix)
    if violation is not None:
        problems.append(f"column requirement fails at t={violation.t}: C={violation.column_sum}")
    return problems


@dataclass(frozen=True)
class BoundComparison:
    bound: bounds.Bound
    ratio: float


def bound_for(strategy: StrategyId, k: int) -> bounds.Bound:
    if strategy is StrategyId.OPT_UNIFORM:
        return bounds.uniform_bound(k)
    if strategy is StrategyId.STOC_ADVERSARIAL:
        return bounds.adversarial_bound(k)
    if strategy is StrategyId.MEMORYLESS:
        return bounds.memoryless_bound(k)
    if strategy is StrategyId.TRIVIAL:
        return bounds.Bound(Fraction(1))
    if strategy is StrategyId.PARTITION_COORDINATED:
        return bounds.Bound(Fraction(k))
    raise ValueError(f"no bound defined for strategy {strategy!r}")


def compare_to_bound(report: SpeedupReport) -> BoundComparison:
    if report.strategy is None:
        raise ValueError("no bound defined for a report without a strategy")
    try:
        b = bound_for(report.strategy, report.k)
    except ValueError as exc:
        raise ValueError(f"no bound defined for {report.strategy.value} at k={report.k}") from exc
    return BoundComparison(b, float(report.speedup_inv_theta) / float(b.value))


def exact_report(
    strategy,
    k: int,
    m: int,
    mode: str = AUTO,
    placement: Placement = UNIFORM,
    per_x: bool = False,
    rational_limit: int = RATIONAL_LIMIT,
) -> SpeedupReport:
    """Schedule, matrix and theta for one strategy in a single call."""
    schedule = build_schedule(strategy, ProblemInstance(m, k, placement))
    matrix = build_matrix(schedule, mode=mode, rational_limit=rational_limit)
    return theta(matrix, k, placement, per_x=per_x)
