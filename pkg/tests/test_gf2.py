import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from cnfxor.gf2 import (GuardExceeded, Gf2Row, Gf2System, InconsistentSystem,
                        enumerate_solutions, mask_to_bits, row_reduce, solution_count)

from conftest import textbook_rank


def make(n, rows):
    sys_ = Gf2System(n)
    for vs, rhs in rows:
        sys_.add_row(vs, rhs)
    return sys_


def satisfies(mask, system):
    return all(bin(mask & r.bits).count("1") % 2 == r.rhs for r in system.rows)


@st.composite
def systems(draw, max_n=12, max_rows=16):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, max_rows))
    rows = [(draw(st.integers(0, (1 << n) - 1)), draw(st.integers(0, 1))) for _ in range(m)]
    return Gf2System(n, [Gf2Row(b, r) for b, r in rows])


def test_forced_back_substitution():
    red = row_reduce(make(2, [([1, 2], 1), ([2], 0)]))
    assert red.rank == 2 and red.consistent
    assert list(enumerate_solutions(red)) == [0b01]  # x1=1, x2=0


def test_contradiction():
    red = row_reduce(make(1, [([1], 1), ([1], 0)]))
    assert not red.consistent
    assert solution_count(red) == 0


def test_empty_system():
    red = row_reduce(Gf2System(3))
    assert red.rank == 0 and red.consistent
    assert solution_count(Gf2System(3)) == 8


def test_one_free_variable():
    assert solution_count(make(2, [([1, 2], 1)])) == 2


def test_rank_against_textbook_elimination():
    rng = random.Random(7)
    n = 20
    for _ in range(20):
        rows = [(rng.getrandbits(n), rng.getrandbits(1)) for _ in range(50)]
        red = row_reduce(Gf2System(n, [Gf2Row(b, r) for b, r in rows]))
        rank, consistent = textbook_rank(rows, n)
        assert red.rank == rank
        assert red.consistent == consistent


def test_count_matches_enumeration_n12():
    rng = random.Random(11)
    n = 12
    seen_consistent = 0
    for _ in range(30):
        system = Gf2System(n, [Gf2Row(rng.getrandbits(n), rng.getrandbits(1)) for _ in range(rng.randint(0, 10))])
        brute = sum(satisfies(x, system) for x in range(1 << n))
        assert solution_count(system) == brute
        seen_consistent += brute > 0
    assert seen_consistent > 5


def test_enumerate_visits_each_solution_once():
    rng = random.Random(3)
    n = 10
    for _ in range(20):
        system = Gf2System(n, [Gf2Row(rng.getrandbits(n), rng.getrandbits(1)) for _ in range(rng.randint(0, 7))])
        red = row_reduce(system)
        if not red.consistent:
            continue
        visited = list(enumerate_solutions(red))
        assert len(visited) == len(set(visited))
        assert set(visited) == {x for x in range(1 << n) if satisfies(x, system)}


def test_enumerate_unit_row():
    visited = [mask_to_bits(x, 2) for x in enumerate_solutions(make(2, [([1], 1)]))]
    assert sorted(visited) == [[1, 0], [1, 1]]


def test_enumerate_is_gray_code():
    visited = list(enumerate_solutions(make(6, [([1, 2, 3], 1)])))
    # consecutive solutions differ by one basis vector
    deltas = {a ^ b for a, b in zip(visited, visited[1:])}
    assert len(deltas) <= 5


def test_enumerate_inconsistent_raises():
    with pytest.raises(InconsistentSystem):
        list(enumerate_solutions(make(1, [([1], 1), ([1], 0)])))


def test_enumerate_guard():
    with pytest.raises(GuardExceeded):
        next(enumerate_solutions(Gf2System(31)))


def test_counts_beyond_64_bits():
    assert solution_count(make(100, [([1, 50, 100], 1)])) == 2 ** 99


def test_add_row_out_of_range():
    with pytest.raises(ValueError):
        make(3, [([4], 1)])


@settings(max_examples=200, deadline=None)
@given(systems())
def test_count_is_zero_or_power_of_two(system):
    c = solution_count(system)
    assert c == 0 or (c & (c - 1) == 0 and c <= 1 << system.n)


@settings(max_examples=200, deadline=None)
@given(systems())
def test_reduce_idempotent(system):
    once = row_reduce(system)
    assert row_reduce(once) == once


@settings(max_examples=200, deadline=None)
@given(systems(), st.integers(0, (1 << 12) - 1), st.integers(0, 1))
def test_append_row_never_increases_count(system, bits, rhs):
    bits &= (1 << system.n) - 1
    bigger = Gf2System(system.n, system.rows + [Gf2Row(bits, rhs)])
    assert solution_count(bigger) <= solution_count(system)


@settings(max_examples=200, deadline=None)
@given(systems(max_n=10))
def test_count_equals_exhaustive(system):
    brute = sum(satisfies(x, system) for x in range(1 << system.n))
    assert solution_count(system) == brute


@settings(max_examples=100, deadline=None)
@given(systems())
def test_reduced_form_shape(system):
    red = row_reduce(system)
    pivots = red.pivots
    assert pivots == sorted(pivots)
    assert red.rank == len(pivots) <= min(len(system.rows), system.n)
    for row in red.rows:
        if not row.bits:
            continue
        pbit = row.bits & -row.bits
        assert sum(1 for other in red.rows if other.bits & pbit) == 1
