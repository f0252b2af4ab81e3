"""Seeded simulation of k independent searchers.

Randomness contract (``RNG_SCHEME``): trials are processed in consecutive
batches of ``SimConfig.batch_size`` (by default :func:`default_batch_size`).  Batch ``b`` draws everything (treasure
positions first, then every searcher's picks, step by step) from
``numpy.random.Generator(PCG64(SeedSequence(seed, spawn_key=(b,))))``.
Batch results are reduced in batch order with exact integer sums, so a run
is bit-identical regardless of how batches are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    PerBox,
    ProblemInstance,
    SelectionSchedule,
    SpeedupReport,
    StrategyId,
    build_schedule,
)

RNG_SCHEME = "pcg64-seedsequence-batch-v1"
MAX_BATCH = 16384
POOL_BUDGET = 1 << 22   # pool cells (trials * k * m) held by one batch


def default_batch_size(strategy: StrategyId, k: int, m: int) -> int:
    """Batch size used when the config leaves it unset; part of the RNG contract."""
    if strategy not in (StrategyId.OPT_UNIFORM, StrategyId.STOC_ADVERSARIAL):
        return MAX_BATCH
    fit = max(1, POOL_BUDGET // (k * m))
    return max(64, min(MAX_BATCH, 1 << (fit.bit_length() - 1)))
NOT_FOUND = -1


@dataclass(frozen=True)
class SimConfig:
    instance: ProblemInstance
    strategy: StrategyId
    trials: int
    seed: int
    crash_plan: tuple[tuple[int, int], ...] = ()
    max_steps: Optional[int] = None
    batch_size: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "strategy", StrategyId.parse(self.strategy))
        object.__setattr__(self, "crash_plan", tuple((int(j), int(c)) for j, c in self.crash_plan))
        self.instance.check()
        k, m = self.instance.k, self.instance.m
        if self.trials < 1:
            raise ValueError("trials must be ≥ 1")
        if self.batch_size is None:
            m_eff = build_schedule(self.strategy, self.instance).m
            object.__setattr__(self, "batch_size", default_batch_size(self.strategy, k, m_eff))
        if self.batch_size < 1:
            raise ValueError("batch_size must be ≥ 1")
        for j, c in self.crash_plan:
            if not 0 <= j < k:
                raise ValueError(f"crash index {j} not in 0..{k - 1}")
            if c < 0:
                raise ValueError("crash step must be ≥ 0")
        if self.max_steps is not None and self.max_steps < m:
            raise ValueError("max_steps must be ≥ m")

    @property
    def step_cap(self) -> int:
        if self.max_steps is not None:
            return self.max_steps
        return self.instance.k * self.schedule.m * 64

    @property
    def schedule(self) -> SelectionSchedule:
        return build_schedule(self.strategy, self.instance)

    def crash_steps(self) -> np.ndarray:
        """Last step each searcher still opens a box (a crash at step c stops it after c)."""
        steps = np.full(self.instance.k, np.iinfo(np.int64).max, dtype=np.int64)
        for j, c in self.crash_plan:
            steps[j] = min(steps[j], c)
        return steps


@dataclass(frozen=True)
class TrialOutcome:
    treasure_x: int
    find_time: Optional[int]
    finder: Optional[int]

    @property
    def found(self) -> bool:
        return self.find_time is not None


def substream(seed: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(batch,))))


def simulate_batch(
    config: SimConfig,
    xs: np.ndarray,
    rng: np.random.Generator,
    schedule: Optional[SelectionSchedule] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Run one trial per treasure position in ``xs``.

    Returns ``(find_time, finder)`` arrays; ``NOT_FOUND`` marks trials where
    no live searcher opened the treasure within the step cap.  When several
    searchers open the treasure in the same step the lowest index is the finder.
    """
    schedule = schedule or config.schedule
    xs = np.asarray(xs, dtype=np.int64)
    n, k, m = xs.size, config.instance.k, schedule.m
    if n and (xs.min() < 1 or xs.max() > m):
        raise ValueError(f"treasure positions must be in 1..{m}")
    find_time = np.full(n, NOT_FOUND, dtype=np.int64)
    finder = np.full(n, NOT_FOUND, dtype=np.int64)
    crash = config.crash_steps()
    cap = config.step_cap
    strategy = schedule.strategy

    ids = np.arange(n)          # original trial index of each active row
    targets = xs.copy()
    with_pool = strategy in (StrategyId.OPT_UNIFORM, StrategyId.STOC_ADVERSARIAL)
    if with_pool:
        dtype = np.int16 if m < np.iinfo(np.int16).max else np.int32
        pool = np.zeros((n * k, m), dtype=dtype)   # row r*k + j: searcher j of trial r
    size = 0                     # current pool length, identical for every row
    covered = 0                  # boxes 1..covered have entered the pool
    searchers = np.arange(k)

    t = 0
    active = n
    while active and t < cap:
        t += 1
        live = crash >= t
        if t > schedule.horizon and schedule.tail_p is None:
            break                # every searcher has opened every box
        if not live.any():
            break                # crashes are permanent
        rows = ids.size

        if strategy is StrategyId.TRIVIAL:
            picks = np.full((rows, k), t, dtype=np.int64)
        elif strategy is StrategyId.PARTITION_COORDINATED:
            boxes = searchers + 1 + (t - 1) * k
            boxes = np.where(boxes <= m, boxes, 0)
            picks = np.broadcast_to(boxes, (rows, k))
        elif strategy is StrategyId.MEMORYLESS:
            end = schedule.entries[t - 1].range_end if t <= schedule.horizon else m
            picks = rng.integers(1, end + 1, size=(rows, k))
        else:
            entry = schedule.entries[t - 1]
            if entry.range_end > covered:
                new = entry.range_end - covered
                pool[:, size:size + new] = np.arange(covered + 1, entry.range_end + 1, dtype=pool.dtype)
                size += new
                covered = entry.range_end
            if size != entry.pool_size:
                raise AssertionError(f"pool size {size} disagrees with schedule {entry.pool_size} at t={t}")
            # uniform pick from the unchecked pool, then swap-remove it
            idx = rng.integers(0, size, size=rows * k)
            lanes = np.arange(rows * k)
            picked = pool[lanes, idx]
            pool[lanes, idx] = pool[:, size - 1]
            size -= 1
            picks = picked.astype(np.int64).reshape(rows, k)

        hit = (picks == targets[:, None]) & live[None, :]
        done = hit.any(axis=1)
        if done.any():
            find_time[ids[done]] = t
            finder[ids[done]] = np.argmax(hit[done], axis=1)
            targets[done] = NOT_FOUND        # finished rows never match again
            active -= int(done.sum())
            if active * 2 <= rows:
                # drop finished rows once they make up half the batch
                keep = targets != NOT_FOUND
                ids = ids[keep]
                targets = targets[keep]
                if with_pool:
                    pool = pool[np.repeat(keep, k)]
    return find_time, finder


def simulate_run(config: SimConfig, treasure_x: int, rng: np.random.Generator) -> TrialOutcome:
    times, finders = simulate_batch(config, np.array([treasure_x]), rng)
    if times[0] == NOT_FOUND:
        return TrialOutcome(treasure_x, None, None)
    return TrialOutcome(treasure_x, int(times[0]), int(finders[0]))


@dataclass
class _Tally:
    """Exact per-box sums of find times over the found trials."""

    count: list[int]
    total: list[int]
    square: list[int]
    not_found: int = 0

    @classmethod
    def empty(cls, m: int) -> "_Tally":
        return cls([0] * (m + 1), [0] * (m + 1), [0] * (m + 1))

    def add(self, xs: np.ndarray, times: np.ndarray, m: int) -> None:
        found = times != NOT_FOUND
        self.not_found += int((~found).sum())
        xs, times = xs[found], times[found]
        count = np.zeros(m + 1, dtype=np.int64)
        total = np.zeros(m + 1, dtype=np.int64)
        square = np.zeros(m + 1, dtype=np.int64)
        np.add.at(count, xs, 1)
        np.add.at(total, xs, times)
        np.add.at(square, xs, times * times)
        for x in np.flatnonzero(count):
            self.count[x] += int(count[x])
            self.total[x] += int(total[x])
            self.square[x] += int(square[x])


def _run_batches(config: SimConfig, workers: int = 1):
    schedule = config.schedule
    m = schedule.m
    placement = config.instance.placement
    n_batches = -(-config.trials // config.batch_size)

    def one(b: int):
        rng = substream(config.seed, b)
        n = min(config.batch_size, config.trials - b * config.batch_size)
        if placement.uniform:
            xs = rng.integers(1, m + 1, size=n)
        else:
            xs = np.full(n, placement.x, dtype=np.int64)
        times, _ = simulate_batch(config, xs, rng, schedule)
        return xs, times

    tally = _Tally.empty(m)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = pool.map(one, range(n_batches))
            for xs, times in results:
                tally.add(xs, times, m)
    else:
        for b in range(n_batches):
            xs, times = one(b)
            tally.add(xs, times, m)
    return schedule, tally


def _exact_moments(tally: _Tally, m: int) -> tuple[Fraction, Fraction]:
    """Sums of T/x and (T/x)^2 over all trials as exact fractions."""
    lcm = math.lcm(*range(1, m + 1))
    s1 = sum(tally.total[x] * (lcm // x) for x in range(1, m + 1))
    s2 = sum(tally.square[x] * (lcm // x) ** 2 for x in range(1, m + 1))
    return Fraction(s1, lcm), Fraction(s2, lcm * lcm)


def estimate_theta(config: SimConfig, per_x: bool = False, workers: int = 1) -> SpeedupReport:
    """Monte Carlo estimate of theta: the mean of find_time / x over trials.

    Any trial without a find makes theta infinite and the report invalid.
    Per-box detail and the mean of per-box speed-ups are only produced when
    ``per_x`` is set and there are at least 100 trials per box.
    """
    schedule, tally = _run_batches(config, workers)
    m, n, k = schedule.m, config.trials, config.instance.k
    report = SpeedupReport(
        strategy=config.strategy,
        k=k,
        m=m,
        theta=math.inf,
        speedup_inv_theta=0.0,
        trials=n,
        seed=config.seed,
        mode="montecarlo",
        numeric_mode="float64",
        placement=str(config.instance.placement),
        valid=tally.not_found == 0,
        not_found=tally.not_found,
        rng_scheme=RNG_SCHEME,
    )
    if not report.valid:
        return report

    s1, s2 = _exact_moments(tally, m)
    mean = s1 / n
    var = (s2 - n * mean * mean) / (n - 1) if n > 1 else Fraction(0)
    report.theta = float(mean)
    report.speedup_inv_theta = float(1 / mean)
    report.stderr = math.sqrt(float(var) / n)

    if per_x and config.instance.placement.uniform and n >= 100 * m:
        if all(tally.count[x] for x in range(1, m + 1)):
            detail = []
            for x in range(1, m + 1):
                avg = tally.total[x] / tally.count[x]
                detail.append(PerBox(x, avg, avg / x))
            report.per_x = detail
            report.speedup_mean = math.fsum(x / p.expected_time for x, p in enumerate(detail, 1)) / m
    return report


@dataclass(frozen=True)
class CrashResult:
    report: SpeedupReport
    found_fraction: float


def crash_experiment(config: SimConfig, workers: int = 1) -> CrashResult:
    if not config.crash_plan:
        raise ValueError("crash_experiment needs a non-empty crash plan")
    report = estimate_theta(config, workers=workers)
    found = config.trials - report.not_found
    return CrashResult(report, found / config.trials)


def inverse_stderr(report: SpeedupReport) -> float:
    """Delta-method standard error of 1/theta_hat."""
    if report.stderr is None or not math.isfinite(report.theta):
        return math.nan
    return report.stderr / report.theta ** 2
