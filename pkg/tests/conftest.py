import itertools
import random

import pytest

from cnfxor.formula import Formula, XorClause, evaluate


def brute_force_count(formula: Formula) -> int:
    return sum(evaluate(formula, a) for a in itertools.product((0, 1), repeat=formula.n))


def textbook_rank(rows, n):
    """Gaussian elimination on lists of 0/1 ints; returns (rank, consistent)."""
    mat = [[(bits >> j) & 1 for j in range(n)] + [rhs] for bits, rhs in rows]
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, len(mat)) if mat[i][col]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        for i in range(len(mat)):
            if i != rank and mat[i][col]:
                mat[i] = [a ^ b for a, b in zip(mat[i], mat[rank])]
        rank += 1
    consistent = not any(not any(row[:n]) and row[n] for row in mat)
    return rank, consistent


def random_small_formula(rnd: random.Random, n_max=10):
    k = rnd.choice([2, 3, 4])
    n = rnd.randint(k, n_max)
    cnf = []
    for _ in range(rnd.randint(0, 3 * n)):
        vs = rnd.sample(range(1, n + 1), k)
        cnf.append(tuple(v if rnd.random() < 0.5 else -v for v in vs))
    xors = []
    for _ in range(rnd.randint(0, n + 1)):
        xors.append(XorClause(tuple(v for v in range(1, n + 1) if rnd.random() < 0.5),
                              rnd.randint(0, 1)))
    return Formula(n, k, tuple(cnf), tuple(xors))


@pytest.fixture
def rnd():
    return random.Random(20240601)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[num])
