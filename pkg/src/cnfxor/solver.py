"""DPLL solver for CNF-XOR formulas.

Clauses use two-watched-literal propagation. The XOR part lives in a
reduced row-echelon GF(2) system over the still-unassigned variables;
every assignment is substituted into it, and any row that shrinks to a
single variable forces that variable. Since a variable is implied by an
affine system exactly when some RREF row is a unit, this propagation is
complete for the XOR part.
"""
from __future__ import annotations

import enum
import os
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field

from .formula import Formula, dumps_dimacs_xor, evaluate
from .gf2 import Gf2System, row_reduce


class Verdict(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    EXHAUSTED = "EXHAUSTED"


@dataclass(frozen=True)
class SolveBudget:
    """Resource limits; both ``None`` means unlimited."""

    max_conflicts: int | None = None
    wall_timeout: float | None = None

    @classmethod
    def unlimited(cls) -> "SolveBudget":
        return cls()

    @property
    def is_unlimited(self) -> bool:
        return self.max_conflicts is None and self.wall_timeout is None


@dataclass
class SolveStats:
    decisions: int = 0
    propagations: int = 0
    conflicts: int = 0
    elapsed: float = 0.0


@dataclass
class SolveOutcome:
    verdict: Verdict
    model: tuple[int, ...] | None = None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def is_sat(self) -> bool:
        return self.verdict is Verdict.SAT


BRANCHING = ("lowest", "occurrence")


class _Conflict(Exception):
    pass


class _Engine:
    def __init__(self, formula: Formula, branching: str):
        n = formula.n
        self.n = n
        # truth[lit + n]: 1 true, -1 false, 0 unassigned
        self.truth = [0] * (2 * n + 1)
        self.trail: list[int] = []
        self.qhead = 0
        self.watches: list[list[list[int]]] = [[] for _ in range(2 * n + 1)]
        self.units: list[int] = []
        self.trivially_unsat = False
        self.stats = SolveStats()

        for clause in formula.cnf:
            if not clause:
                self.trivially_unsat = True
            elif len(clause) == 1:
                self.units.append(clause[0])
            else:
                c = list(clause)
                self.watches[c[0] + n].append(c)
                self.watches[c[1] + n].append(c)

        if any(not x.vars and x.rhs for x in formula.xors):
            self.trivially_unsat = True
        system = Gf2System(n)
        for x in formula.xors:
            system.add_row(x.vars, x.rhs)
        red = row_reduce(system)
        if not red.consistent:
            self.trivially_unsat = True
        self.xrows: list[tuple[int, int]] = [(r.bits, r.rhs) for r in red.rows if r.bits]
        for bits, rhs in self.xrows:
            if bits & (bits - 1) == 0:
                v = bits.bit_length()
                self.units.append(v if rhs else -v)

        counts = [0] * (n + 1)
        for clause in formula.cnf:
            for lit in clause:
                counts[abs(lit)] += 1
        cnf_vars = [v for v in range(1, n + 1) if counts[v]]
        if branching == "occurrence":
            cnf_vars.sort(key=lambda v: (-counts[v], v))
        elif branching != "lowest":
            raise ValueError(f"unknown branching heuristic {branching!r}")
        self.order = cnf_vars

    # -- assignment and propagation ------------------------------------

    def assign(self, lit: int) -> None:
        t = self.truth[lit + self.n]
        if t == 1:
            return
        if t == -1:
            raise _Conflict
        self.truth[lit + self.n] = 1
        self.truth[-lit + self.n] = -1
        self.trail.append(lit)
        self.stats.propagations += 1

    def _substitute_xor(self, lit: int) -> None:
        v = lit if lit > 0 else -lit
        vbit = 1 << (v - 1)
        val = 1 if lit > 0 else 0
        rows = self.xrows
        hit = None
        for i, (bits, rhs) in enumerate(rows):
            if bits & vbit:
                hit = i
                break
        if hit is None:
            return
        bits, rhs = rows[hit]
        new: list[tuple[int, int]] = []
        forced = []
        if bits & -bits == vbit:
            # v is a pivot: it occurs in this row only
            nb, nr = bits ^ vbit, rhs ^ val
            if nb == 0:
                if nr:
                    raise _Conflict
                self.xrows = rows[:hit] + rows[hit + 1:]
                return
            p = nb & -nb
            for j, (b, r) in enumerate(rows):
                if j == hit:
                    continue
                if b & p:
                    b ^= nb
                    r ^= nr
                    if b & (b - 1) == 0:
                        forced.append((b, r))
                new.append((b, r))
            new.append((nb, nr))
            if nb & (nb - 1) == 0:
                forced.append((nb, nr))
        else:
            for b, r in rows:
                if b & vbit:
                    b ^= vbit
                    r ^= val
                    if b & (b - 1) == 0:
                        forced.append((b, r))
                new.append((b, r))
        self.xrows = new
        for b, r in forced:
            u = b.bit_length()
            self.assign(u if r else -u)

    def propagate(self) -> None:
        n = self.n
        truth = self.truth
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            lit = trail[self.qhead]
            self.qhead += 1
            if self.xrows:
                self._substitute_xor(lit)
            false_lit = -lit
            wl = watches[false_lit + n]
            i = 0
            while i < len(wl):
                c = wl[i]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                if truth[first + n] == 1:
                    i += 1
                    continue
                for j in range(2, len(c)):
                    other = c[j]
                    if truth[other + n] != -1:
                        c[1], c[j] = other, false_lit
                        watches[other + n].append(c)
                        wl[i] = wl[-1]
                        wl.pop()
                        break
                else:
                    i += 1
                    if truth[first + n] == -1:
                        raise _Conflict
                    self.assign(first)

    def undo_to(self, trail_len: int) -> None:
        truth, n = self.truth, self.n
        for lit in self.trail[trail_len:]:
            truth[lit + n] = 0
            truth[-lit + n] = 0
        del self.trail[trail_len:]
        self.qhead = trail_len

    def next_branch_var(self) -> int | None:
        truth, n = self.truth, self.n
        for v in self.order:
            if truth[v + n] == 0:
                return v
        return None

    def complete_model(self) -> tuple[int, ...]:
        n = self.n
        values = [1 if self.truth[v + n] == 1 else 0 for v in range(1, n + 1)]
        # unassigned variables: free ones default to 0, pivots follow their rows
        for bits, rhs in self.xrows:
            values[(bits & -bits).bit_length() - 1] = rhs
        return tuple(values)


def solve(
    formula: Formula,
    budget: SolveBudget | None = None,
    branching: str = "occurrence",
) -> SolveOutcome:
    """Decide ``formula``; branch on CNF variables only, true first."""
    budget = budget or SolveBudget.unlimited()
    start = time.perf_counter()
    eng = _Engine(formula, branching)
    stats = eng.stats

    def finish(verdict, model=None):
        stats.elapsed = time.perf_counter() - start
        if verdict is Verdict.SAT and not evaluate(formula, model):
            raise AssertionError("solver produced a model that does not satisfy the formula")
        return SolveOutcome(verdict, model, stats)

    if eng.trivially_unsat:
        return finish(Verdict.UNSAT)
    try:
        for lit in eng.units:
            eng.assign(lit)
        eng.propagate()
    except _Conflict:
        return finish(Verdict.UNSAT)

    # decision stack entries: [trail length, xor rows, decision literal, flipped]
    stack: list[list] = []
    max_conflicts = budget.max_conflicts
    deadline = None if budget.wall_timeout is None else start + budget.wall_timeout
    while True:
        v = eng.next_branch_var()
        if v is None:
            return finish(Verdict.SAT, eng.complete_model())
        stats.decisions += 1
        stack.append([len(eng.trail), eng.xrows, v, False])
        lit = v
        while True:
            try:
                eng.assign(lit)
                eng.propagate()
                break
            except _Conflict:
                stats.conflicts += 1
                if max_conflicts is not None and stats.conflicts >= max_conflicts:
                    return finish(Verdict.EXHAUSTED)
                if deadline is not None and (stats.conflicts & 63) == 0:
                    if time.perf_counter() > deadline:
                        return finish(Verdict.EXHAUSTED)
                while stack and stack[-1][3]:
                    stack.pop()
                if not stack:
                    return finish(Verdict.UNSAT)
                frame = stack[-1]
                eng.undo_to(frame[0])
                eng.xrows = frame[1]
                frame[3] = True
                lit = -frame[2]


def check_model(formula: Formula, assignment) -> bool:
    return evaluate(formula, assignment)


EXTERNAL_SOLVER_ENV = "CNFXOR_EXTERNAL_SOLVER"


def solve_external(formula: Formula, binary: str | None = None, timeout: float | None = None) -> Verdict:
    """Cross-check with an external CNF-XOR solver binary.

    The binary receives a DIMACS-XOR file path and must print an
    ``s SATISFIABLE`` / ``s UNSATISFIABLE`` line.
    """
    binary = binary or os.environ.get(EXTERNAL_SOLVER_ENV)
    if not binary or not shutil.which(binary) and not os.path.exists(binary):
        raise FileNotFoundError(f"external solver not found: {binary!r}")
    with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as fh:
        fh.write(dumps_dimacs_xor(formula))
        path = fh.name
    try:
        proc = subprocess.run([binary, path], capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        return Verdict.EXHAUSTED
    finally:
        os.unlink(path)
    for line in proc.stdout.splitlines():
        line = line.strip()
        if line == "s SATISFIABLE":
            return Verdict.SAT
        if line == "s UNSATISFIABLE":
            return Verdict.UNSAT
    return Verdict.EXHAUSTED
