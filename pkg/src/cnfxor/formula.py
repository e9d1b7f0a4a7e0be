"""k-CNF-XOR formulas: data model, random generator, evaluation and I/O.

Literals are DIMACS-style signed ints (``-3`` is the negation of ``x3``).
An XOR clause ``XorClause(vars, rhs)`` means ``XOR of x_i for i in vars == rhs``,
so an empty clause with ``rhs=1`` is unsatisfiable and with ``rhs=0`` is
a tautology.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, TextIO

import numpy as np

from . import rng as rngmod


class InvalidParams(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


class XorClause(NamedTuple):
    vars: tuple[int, ...]
    rhs: int


KClause = tuple[int, ...]


def clause_count(density: float, n: int) -> int:
    """``ceil(density * n)``, immune to float noise such as ``0.3 * 10``."""
    return math.ceil(round(density * n, 9))


@dataclass(frozen=True)
class RandomModelParams:
    k: int
    n: int
    r: float
    s: float

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise InvalidParams(f"need k >= 1 and n >= 1, got k={self.k}, n={self.n}")
        if self.k > self.n:
            raise InvalidParams(f"k={self.k} exceeds n={self.n}")
        if self.r < 0 or self.s < 0:
            raise InvalidParams("densities must be non-negative")

    @property
    def m_cnf(self) -> int:
        return clause_count(self.r, self.n)

    @property
    def m_xor(self) -> int:
        return clause_count(self.s, self.n)


@dataclass(frozen=True)
class Formula:
    """Conjunction of k-clauses and XOR clauses over ``x_1..x_n``.

    ``k == 0`` marks a formula of mixed or unknown clause width (e.g. parsed
    from a file written by another tool); otherwise every clause has width k.
    """

    n: int
    k: int
    cnf: tuple[KClause, ...] = ()
    xors: tuple[XorClause, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cnf", tuple(tuple(c) for c in self.cnf))
        object.__setattr__(
            self, "xors", tuple(XorClause(tuple(x.vars), x.rhs) for x in self.xors)
        )
        for clause in self.cnf:
            if self.k and len(clause) != self.k:
                raise InvalidParams(f"clause {clause} does not have width k={self.k}")
            vs = [abs(lit) for lit in clause]
            if len(set(vs)) != len(vs):
                raise InvalidParams(f"clause {clause} repeats a variable")
            if any(v < 1 or v > self.n for v in vs):
                raise InvalidParams(f"clause {clause} out of range for n={self.n}")
        for x in self.xors:
            if any(v < 1 or v > self.n for v in x.vars) or x.rhs not in (0, 1):
                raise InvalidParams(f"bad XOR clause {x}")

    @property
    def num_clauses(self) -> int:
        return len(self.cnf) + len(self.xors)

    def conjoin(self, cnf: Sequence[KClause] = (), xors: Sequence[XorClause] = ()) -> "Formula":
        return Formula(self.n, self.k, self.cnf + tuple(cnf), self.xors + tuple(xors))

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "k": self.k,
                "cnf": [list(c) for c in self.cnf],
                "xor": [{"vars": list(x.vars), "rhs": x.rhs} for x in self.xors],
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Formula":
        d = json.loads(text)
        return cls(
            d["n"],
            d["k"],
            tuple(tuple(c) for c in d["cnf"]),
            tuple(XorClause(tuple(x["vars"]), x["rhs"]) for x in d["xor"]),
        )


def sample_k_clause(n: int, k: int, rng: np.random.Generator) -> KClause:
    """Uniform k-clause: k distinct variables, each sign a fair coin."""
    if k < 1 or k > n:
        raise InvalidParams(f"cannot draw a {k}-clause over {n} variables")
    variables = rng.choice(n, size=k, replace=False) + 1
    signs = rng.integers(0, 2, size=k)
    return tuple(int(v) if s else -int(v) for v, s in zip(variables, signs))


def sample_xor_clause(n: int, rng: np.random.Generator) -> XorClause:
    """Uniform XOR clause: each variable kept w.p. 1/2, rhs a fair coin."""
    if n < 1:
        raise InvalidParams("n must be positive")
    words = rng.integers(0, 1 << 64, size=(n + 63) // 64, dtype=np.uint64)
    rhs = int(rng.integers(0, 2))
    mask = 0
    for i, w in enumerate(words):
        mask |= int(w) << (64 * i)
    mask &= (1 << n) - 1
    variables = []
    while mask:
        low = mask & -mask
        variables.append(low.bit_length())
        mask ^= low
    return XorClause(tuple(variables), rhs)


def sample_formula(params: RandomModelParams, seed: int) -> Formula:
    """Draw one formula from the (k, n, r, s) model.

    Clause slot ``i`` uses its own stream keyed on ``(seed, kind, i)``, so
    the formula is a pure function of ``(params, seed)``.
    """
    n, k = params.n, params.k
    cnf = tuple(
        sample_k_clause(n, k, rngmod.stream(seed, rngmod.CNF_SLOT, i))
        for i in range(params.m_cnf)
    )
    return Formula(n, k, cnf, sample_xor_system(n, params.m_xor, seed))


def sample_xor_system(n: int, m: int, seed: int) -> tuple[XorClause, ...]:
    """The XOR half of ``sample_formula``: m uniform XOR clauses."""
    return tuple(sample_xor_clause(n, rngmod.stream(seed, rngmod.XOR_SLOT, j)) for j in range(m))


def evaluate(formula: Formula, assignment: Sequence[int]) -> bool:
    if len(assignment) != formula.n:
        raise LengthMismatch(f"assignment has {len(assignment)} values, formula has n={formula.n}")
    vals = [bool(v) for v in assignment]
    for clause in formula.cnf:
        if not any(vals[lit - 1] if lit > 0 else not vals[-lit - 1] for lit in clause):
            return False
    for x in formula.xors:
        parity = 0
        for v in x.vars:
            parity ^= vals[v - 1]
        if parity != x.rhs:
            return False
    return True


# -- DIMACS with XOR lines ----------------------------------------------------
#
# "p cnf <n> <m>" with m counting CNF and XOR lines. An XOR line starts with
# 'x' and means "XOR of the literals is true"; rhs=0 is written by negating
# the first variable. The empty tautology (no vars, rhs=0) is written "x- 0".
# A "c k <k>" comment records the width when the formula has no CNF clauses.


def write_dimacs_xor(formula: Formula, sink: TextIO) -> None:
    sink.write(f"p cnf {formula.n} {formula.num_clauses}\n")
    if not formula.cnf and formula.k:
        sink.write(f"c k {formula.k}\n")
    for clause in formula.cnf:
        sink.write(" ".join(str(lit) for lit in clause) + " 0\n")
    for x in formula.xors:
        if not x.vars:
            sink.write("x 0\n" if x.rhs else "x- 0\n")
            continue
        lits = [str(v) for v in x.vars]
        if not x.rhs:
            lits[0] = "-" + lits[0]
        sink.write("x" + " ".join(lits) + " 0\n")


def dumps_dimacs_xor(formula: Formula) -> str:
    buf = io.StringIO()
    write_dimacs_xor(formula, buf)
    return buf.getvalue()


def _parse_lits(tokens: list[str], lineno: int, n: int) -> list[int]:
    if not tokens or tokens[-1] != "0":
        raise ParseError(lineno, "clause not terminated by 0")
    lits = []
    for tok in tokens[:-1]:
        try:
            lit = int(tok)
        except ValueError:
            raise ParseError(lineno, f"bad literal {tok!r}") from None
        if lit == 0:
            raise ParseError(lineno, "variable index 0")
        if abs(lit) > n:
            raise ParseError(lineno, f"variable {abs(lit)} exceeds n={n}")
        lits.append(lit)
    return lits


def parse_dimacs_xor(source: TextIO | str, k: int | None = None) -> Formula:
    """Parse DIMACS-XOR text. ``k`` overrides the inferred clause width."""
    text = source if isinstance(source, str) else source.read()
    n = m = None
    width_hint = None
    cnf: list[KClause] = []
    xors: list[XorClause] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 3 and parts[1] == "k" and parts[2].isdigit():
                width_hint = int(parts[2])
            continue
        if line.startswith("p"):
            parts = line.split()
            if n is not None:
                raise ParseError(lineno, "duplicate header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(lineno, "header must be 'p cnf <n> <m>'")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(lineno, "non-integer header field") from None
            if n < 0 or m < 0:
                raise ParseError(lineno, "negative header field")
            continue
        if n is None:
            raise ParseError(lineno, "clause before header")
        if line.startswith("x"):
            body = line[1:]
            if body.startswith("-") and body[1:].strip() == "0":
                xors.append(XorClause((), 0))
                continue
            lits = _parse_lits(body.split(), lineno, n)
            rhs = 1
            acc = 0
            for lit in lits:
                if lit < 0:
                    rhs ^= 1
                acc ^= 1 << (abs(lit) - 1)
            vs = tuple(i + 1 for i in range(n) if acc >> i & 1)
            xors.append(XorClause(vs, rhs))
        else:
            lits = _parse_lits(line.split(), lineno, n)
            if len({abs(lit) for lit in lits}) != len(lits):
                raise ParseError(lineno, "clause repeats a variable")
            cnf.append(tuple(lits))
    if n is None:
        raise ParseError(0, "missing header")
    if m != len(cnf) + len(xors):
        raise ParseError(0, f"header declares {m} clauses, found {len(cnf) + len(xors)}")
    if k is None:
        widths = {len(c) for c in cnf}
        if len(widths) == 1:
            k = widths.pop()
        elif not widths:
            k = width_hint or 0
        else:
            k = 0
    return Formula(n, k, tuple(cnf), tuple(xors))
