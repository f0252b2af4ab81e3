"""Domain types and selection schedules for the treasure-hunt searchers.

A *selection schedule* describes, step by step, the pool a single searcher
picks its next box from.  Every strategy here picks uniformly from a pool
whose size is fixed in advance, so the probability that a particular
still-unopened box in range gets picked at step ``t`` is ``1/pool_size``.
That is all the exact engine needs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional


class StrategyId(str, enum.Enum):
    TRIVIAL = "trivial"
    STOC_ADVERSARIAL = "stoc"
    OPT_UNIFORM = "opt"
    MEMORYLESS = "memoryless"
    PARTITION_COORDINATED = "partition"

    @classmethod
    def parse(cls, name: "str | StrategyId") -> "StrategyId":
        if isinstance(name, StrategyId):
            return name
        key = str(name).strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise ValueError(f"unknown strategy {name!r}")

    @property
    def coordinated(self) -> bool:
        return self is StrategyId.PARTITION_COORDINATED


class PoolKind(str, enum.Enum):
    UNCHECKED_IN_RANGE = "unchecked_in_range"
    ALL_IN_RANGE = "all_in_range"
    # searcher j opens box j + (t-1)k; the whole team is described at once
    INTERLEAVED = "interleaved"


@dataclass(frozen=True)
class Placement:
    """Treasure placement: uniform over 1..m, or a fixed box ``x``."""

    x: Optional[int] = None

    @property
    def uniform(self) -> bool:
        return self.x is None

    @classmethod
    def fixed(cls, x: int) -> "Placement":
        return cls(x=x)

    def __str__(self) -> str:
        return "uniform" if self.x is None else f"fixed({self.x})"


UNIFORM = Placement()


@dataclass(frozen=True)
class ProblemInstance:
    m: int
    k: int
    placement: Placement = UNIFORM

    def check(self) -> "ProblemInstance":
        problem = validate_instance(self)
        if problem is not None:
            raise ValueError(problem)
        return self


def validate_instance(instance: ProblemInstance) -> Optional[str]:
    """Return ``None`` if ``instance`` is valid, else the first violated invariant."""
    if not isinstance(instance.m, int) or instance.m < 1:
        return "m ≥ 1 violated"
    if not isinstance(instance.k, int) or instance.k < 1:
        return "k ≥ 1 violated"
    x = instance.placement.x
    if x is not None:
        if x < 1:
            return "x ≥ 1 violated"
        if x > instance.m:
            return "x ≤ m violated"
    return None


@dataclass(frozen=True)
class ScheduleEntry:
    range_end: int
    pool_kind: PoolKind
    pool_size: int


@dataclass(frozen=True)
class SelectionSchedule:
    """Per-step pick pools of one searcher (or of the whole team when interleaved).

    ``entries[t-1]`` describes step ``t``.  ``tail_p``, when set, is the
    per-step probability that any given box is picked for every step after
    the explicit entries; it is only used by the memoryless searcher.
    """

    strategy: StrategyId
    m: int
    k: int
    entries: tuple[ScheduleEntry, ...]
    tail_p: Optional[Fraction] = None
    requested_m: Optional[int] = field(default=None, compare=False)

    @property
    def horizon(self) -> int:
        return len(self.entries)

    @property
    def deterministic(self) -> bool:
        return all(e.pool_size == 1 for e in self.entries) and self.tail_p is None

    @property
    def interleaved(self) -> bool:
        return bool(self.entries) and self.entries[0].pool_kind is PoolKind.INTERLEAVED

    def first_step(self, x: int) -> int:
        """First step whose pool can contain box ``x``."""
        if self.interleaved:
            return -(-x // self.k)
        # range_end is non-decreasing, so bisect on it
        lo, hi = 0, len(self.entries)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.entries[mid].range_end >= x:
                hi = mid
            else:
                lo = mid + 1
        if lo == len(self.entries):
            raise ValueError(f"box {x} is never in range")
        return lo + 1


def effective_m(strategy: StrategyId, m: int, k: int) -> int:
    """Box count the strategy actually runs on (rounded up to a multiple of k)."""
    if strategy in (StrategyId.OPT_UNIFORM, StrategyId.MEMORYLESS):
        return -(-m // k) * k
    return m


def build_schedule(strategy: "StrategyId | str", instance: ProblemInstance) -> SelectionSchedule:
    strategy = StrategyId.parse(strategy)
    instance.check()
    k = instance.k
    m = effective_m(strategy, instance.m, k)
    entries: list[ScheduleEntry] = []
    tail_p = None

    if strategy is StrategyId.TRIVIAL:
        entries = [ScheduleEntry(t, PoolKind.UNCHECKED_IN_RANGE, 1) for t in range(1, m + 1)]

    elif strategy is StrategyId.OPT_UNIFORM:
        phases = m // k
        for t in range(1, phases + 1):
            entries.append(ScheduleEntry(t * k, PoolKind.UNCHECKED_IN_RANGE, t * k - (t - 1)))
        for t in range(phases + 1, m + 1):
            entries.append(ScheduleEntry(m, PoolKind.UNCHECKED_IN_RANGE, m - (t - 1)))

    elif strategy is StrategyId.MEMORYLESS:
        entries = [ScheduleEntry(t * k, PoolKind.ALL_IN_RANGE, t * k) for t in range(1, m // k + 1)]
        tail_p = Fraction(1, m)

    elif strategy is StrategyId.STOC_ADVERSARIAL:
        # two picks per phase i from the unchecked boxes of 1..i(k+1), capped at m;
        # once the cap is hit this is plain uniform-over-unchecked until done
        for t in range(1, m + 1):
            i = (t + 1) // 2
            end = min(i * (k + 1), m)
            entries.append(ScheduleEntry(end, PoolKind.UNCHECKED_IN_RANGE, end - (t - 1)))

    elif strategy is StrategyId.PARTITION_COORDINATED:
        steps = -(-m // k)
        entries = [ScheduleEntry(min(t * k, m), PoolKind.INTERLEAVED, 1) for t in range(1, steps + 1)]

    return SelectionSchedule(
        strategy=strategy,
        m=m,
        k=k,
        entries=tuple(entries),
        tail_p=tail_p,
        requested_m=instance.m,
    )


def partition_box(searcher: int, t: int, k: int) -> int:
    """Box opened at step ``t`` by searcher ``searcher`` (0-based) in the round-robin split."""
    return searcher + 1 + (t - 1) * k


@dataclass
class PerBox:
    x: int
    expected_time: object
    theta_x: object


@dataclass
class SpeedupReport:
    strategy: Optional[StrategyId]
    k: int
    m: int
    theta: object
    speedup_inv_theta: object
    speedup_mean: Optional[object] = None
    per_x: Optional[list[PerBox]] = None
    stderr: Optional[float] = None
    trials: Optional[int] = None
    seed: Optional[int] = None
    mode: str = "exact"
    numeric_mode: Optional[str] = None
    placement: str = "uniform"
    valid: bool = True
    not_found: int = 0
    rng_scheme: Optional[str] = None
