from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from boxhunt.core import (
    Placement,
    PoolKind,
    ProblemInstance,
    StrategyId,
    build_schedule,
    effective_m,
    partition_box,
    validate_instance,
)

ALL = list(StrategyId)


def test_parse_names():
    assert StrategyId.parse("opt") is StrategyId.OPT_UNIFORM
    assert StrategyId.parse("OPT_UNIFORM") is StrategyId.OPT_UNIFORM
    assert StrategyId.parse(" Memoryless ") is StrategyId.MEMORYLESS
    assert StrategyId.parse(StrategyId.TRIVIAL) is StrategyId.TRIVIAL
    with pytest.raises(ValueError):
        StrategyId.parse("greedy")
    assert StrategyId.PARTITION_COORDINATED.coordinated
    assert not StrategyId.OPT_UNIFORM.coordinated


@pytest.mark.parametrize(
    "instance, message",
    [
        (ProblemInstance(10, 2), None),
        (ProblemInstance(0, 2), "m ≥ 1 violated"),
        (ProblemInstance(10, 0), "k ≥ 1 violated"),
        (ProblemInstance(10, 2, Placement.fixed(0)), "x ≥ 1 violated"),
        (ProblemInstance(10, 2, Placement.fixed(11)), "x ≤ m violated"),
        (ProblemInstance(10, 2, Placement.fixed(10)), None),
    ],
)
def test_validate_instance(instance, message):
    assert validate_instance(instance) == message


def test_check_raises():
    with pytest.raises(ValueError, match="k ≥ 1"):
        ProblemInstance(5, 0).check()


def test_placement_str():
    assert str(Placement()) == "uniform"
    assert str(Placement.fixed(4)) == "fixed(4)"


def test_opt_schedule_small():
    s = build_schedule("opt", ProblemInstance(6, 2))
    assert [e.range_end for e in s.entries] == [2, 4, 6, 6, 6, 6]
    assert [e.pool_size for e in s.entries] == [2, 3, 4, 3, 2, 1]
    assert s.tail_p is None and s.horizon == 6


def test_opt_rounds_m_up():
    s = build_schedule("opt", ProblemInstance(7, 2))
    assert (s.m, s.requested_m) == (8, 7)
    assert effective_m(StrategyId.MEMORYLESS, 10, 3) == 12
    assert effective_m(StrategyId.TRIVIAL, 10, 3) == 10


def test_memoryless_schedule():
    s = build_schedule("memoryless", ProblemInstance(6, 2))
    assert [(e.range_end, e.pool_size) for e in s.entries] == [(2, 2), (4, 4), (6, 6)]
    assert all(e.pool_kind is PoolKind.ALL_IN_RANGE for e in s.entries)
    assert s.tail_p == Fraction(1, 6)


def test_stoc_schedule():
    s = build_schedule("stoc", ProblemInstance(7, 2))
    assert [e.range_end for e in s.entries] == [3, 3, 6, 6, 7, 7, 7]
    assert [e.pool_size for e in s.entries] == [3, 2, 4, 3, 3, 2, 1]


def test_trivial_schedule():
    s = build_schedule("trivial", ProblemInstance(4, 3))
    assert [(e.range_end, e.pool_size) for e in s.entries] == [(1, 1), (2, 1), (3, 1), (4, 1)]
    assert s.deterministic
    assert [s.first_step(x) for x in range(1, 5)] == [1, 2, 3, 4]


def test_partition_schedule():
    s = build_schedule("partition", ProblemInstance(7, 3))
    assert s.interleaved and s.deterministic
    assert s.horizon == 3
    assert [s.first_step(x) for x in range(1, 8)] == [1, 1, 1, 2, 2, 2, 3]


def test_first_step_opt():
    s = build_schedule("opt", ProblemInstance(6, 2))
    assert [s.first_step(x) for x in range(1, 7)] == [1, 1, 2, 2, 3, 3]


@given(k=st.integers(1, 6), m=st.integers(1, 80))
def test_partition_covers_every_box_once(k, m):
    steps = -(-m // k)
    seen = [partition_box(j, t, k) for t in range(1, steps + 1) for j in range(k)]
    seen = [b for b in seen if b <= m]
    assert sorted(seen) == list(range(1, m + 1))
    for x in range(1, m + 1):
        t = next(t for t in range(1, steps + 1) for j in range(k) if partition_box(j, t, k) == x)
        assert t == -(-x // k)


@given(alg=st.sampled_from(ALL), k=st.integers(1, 6), m=st.integers(1, 120))
def test_schedule_shape(alg, k, m):
    s = build_schedule(alg, ProblemInstance(m, k))
    assert s.m >= m and s.m - m < k
    ends = [e.range_end for e in s.entries]
    assert ends == sorted(ends)
    assert ends[-1] == s.m
    for t, e in enumerate(s.entries, 1):
        assert 1 <= e.pool_size <= e.range_end <= s.m
        if e.pool_kind is PoolKind.UNCHECKED_IN_RANGE:
            assert e.pool_size == e.range_end - (t - 1)
    for x in range(1, s.m + 1):
        step = s.first_step(x)
        if not s.interleaved:
            assert s.entries[step - 1].range_end >= x
            assert step == 1 or s.entries[step - 2].range_end < x
