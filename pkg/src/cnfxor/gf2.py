"""Dense GF(2) linear algebra on bit-packed rows.

A row is a Python int used as a bit vector: bit ``i - 1`` stands for
variable ``x_i``. Each row carries a parity bit ``rhs`` and means
``XOR of selected variables == rhs``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

MAX_ENUM_FREE_DIM = 30


class GuardExceeded(RuntimeError):
    """Raised when an exponential enumeration would exceed a size guard."""


class InconsistentSystem(ValueError):
    pass


class Gf2Row(NamedTuple):
    bits: int
    rhs: int

    @classmethod
    def from_vars(cls, variables: Iterable[int], rhs: int) -> "Gf2Row":
        bits = 0
        for v in variables:
            bits ^= 1 << (v - 1)
        return cls(bits, rhs & 1)

    def variables(self) -> list[int]:
        return bit_indices(self.bits)


def bit_indices(bits: int) -> list[int]:
    """1-based indices of the set bits of ``bits``, ascending."""
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length())
        bits ^= low
    return out


@dataclass
class Gf2System:
    n: int
    rows: list[Gf2Row] = field(default_factory=list)
    rank: int | None = None

    def add_row(self, variables: Iterable[int], rhs: int) -> None:
        row = Gf2Row.from_vars(variables, rhs)
        if row.bits >> self.n:
            raise ValueError(f"row mentions a variable beyond n={self.n}")
        self.rows.append(row)
        self.rank = None

    @property
    def is_reduced(self) -> bool:
        return self.rank is not None

    @property
    def consistent(self) -> bool:
        return not any(r.bits == 0 and r.rhs for r in self.rows)

    @property
    def pivots(self) -> list[int]:
        """Pivot variable (lowest set bit) of every nonzero row."""
        return [(r.bits & -r.bits).bit_length() for r in self.rows if r.bits]


def _insert_row(pivot_rows: dict[int, list[int]], bits: int, rhs: int) -> tuple[int, int]:
    # pivot_rows maps pivot bit -> [bits, rhs]; kept in reduced form
    for pbit, prow in pivot_rows.items():
        if bits & pbit:
            bits ^= prow[0]
            rhs ^= prow[1]
    if bits:
        pbit = bits & -bits
        for prow in pivot_rows.values():
            if prow[0] & pbit:
                prow[0] ^= bits
                prow[1] ^= rhs
        pivot_rows[pbit] = [bits, rhs]
    return bits, rhs


def row_reduce(system: Gf2System) -> Gf2System:
    """Return an equivalent system in reduced row-echelon form.

    Rows are ordered by pivot. Zero rows are dropped except that a single
    ``0 = 1`` row is kept at the end when the system is inconsistent.
    """
    pivot_rows: dict[int, list[int]] = {}
    inconsistent = False
    for row in system.rows:
        bits, rhs = _insert_row(pivot_rows, row.bits, row.rhs)
        if not bits and rhs:
            inconsistent = True
    rows = [Gf2Row(b, r) for _, (b, r) in sorted(pivot_rows.items())]
    rank = len(rows)
    if inconsistent:
        rows.append(Gf2Row(0, 1))
    return Gf2System(system.n, rows, rank)


def _reduced(system: Gf2System) -> Gf2System:
    return system if system.is_reduced else row_reduce(system)


def solution_count(system: Gf2System) -> int:
    red = _reduced(system)
    if not red.consistent:
        return 0
    return 1 << (system.n - red.rank)


def affine_basis(system: Gf2System) -> tuple[int, list[int]]:
    """Particular solution and null-space basis of a consistent system.

    The particular solution sets every free variable to 0. Basis vector
    ``j`` flips free variable ``j`` and every pivot whose row mentions it.
    """
    red = _reduced(system)
    if not red.consistent:
        raise InconsistentSystem("system has no solutions")
    base = 0
    pivot_mask = 0
    for row in red.rows:
        pbit = row.bits & -row.bits
        pivot_mask |= pbit
        if row.rhs:
            base |= pbit
    deltas = []
    for v in range(red.n):
        fbit = 1 << v
        if pivot_mask & fbit:
            continue
        delta = fbit
        for row in red.rows:
            if row.bits & fbit:
                delta |= row.bits & -row.bits
        deltas.append(delta)
    return base, deltas


def enumerate_solutions(system: Gf2System) -> Iterator[int]:
    """Yield every solution as a bitmask, in Gray-code order over free variables.

    Callers must check consistency first; an inconsistent system raises
    rather than silently yielding nothing.
    """
    base, deltas = affine_basis(system)
    dim = len(deltas)
    if dim > MAX_ENUM_FREE_DIM:
        raise GuardExceeded(f"free dimension {dim} exceeds {MAX_ENUM_FREE_DIM}")
    x = base
    yield x
    for i in range(1, 1 << dim):
        x ^= deltas[((i & -i).bit_length()) - 1]
        yield x


def mask_to_bits(mask: int, n: int) -> list[int]:
    return [(mask >> i) & 1 for i in range(n)]


def bits_to_mask(values: Sequence[int]) -> int:
    mask = 0
    for i, b in enumerate(values):
        if b:
            mask |= 1 << i
    return mask
