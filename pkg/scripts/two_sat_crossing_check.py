"""Cross-check the finite-n 2-SAT crossing with a separate linear-time decider.

Random 2-CNF formulas from the package's generator are decided by the
implication-graph / strongly-connected-component test, which shares no code
with the DPLL engine. Prints P(sat) per density and the interpolated 0.5
crossing.

    python scripts/two_sat_crossing_check.py --n 150 --trials 400
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from cnfxor import rng as rngmod
from cnfxor.formula import RandomModelParams, sample_formula

sys.setrecursionlimit(10_000)


def two_sat(n: int, clauses) -> bool:
    # node 2v is x_v, 2v+1 is not x_v; clause (a or b) gives -a -> b and -b -> a
    def node(lit):
        return 2 * (abs(lit) - 1) + (lit < 0)

    graph = [[] for _ in range(2 * n)]
    for a, b in clauses:
        graph[node(-a)].append(node(b))
        graph[node(-b)].append(node(a))
    index, low, comp = [-1] * (2 * n), [0] * (2 * n), [-1] * (2 * n)
    stack, on_stack, counter, ncomp = [], [False] * (2 * n), [0], [0]

    def strong(v):
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack[v] = True
        for w in graph[v]:
            if index[w] < 0:
                strong(w)
                low[v] = min(low[v], low[w])
            elif on_stack[w]:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            while True:
                w = stack.pop()
                on_stack[w] = False
                comp[w] = ncomp[0]
                if w == v:
                    break
            ncomp[0] += 1

    for v in range(2 * n):
        if index[v] < 0:
            strong(v)
    return all(comp[2 * i] != comp[2 * i + 1] for i in range(n))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=150)
    ap.add_argument("--trials", type=int, default=400)
    ap.add_argument("--r", default="1.0,1.1,1.2,1.25,1.3,1.4,1.5")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rs = [float(x) for x in args.r.split(",")]
    ps = []
    for i, r in enumerate(rs):
        params = RandomModelParams(2, args.n, r, 0.0)
        sat = sum(two_sat(args.n, sample_formula(params, rngmod.derive_seed(args.seed, i, t)).cnf)
                  for t in range(args.trials))
        ps.append(sat / args.trials)
        print(f"r={r:<5} P(sat)={ps[-1]:.4f}")
    p = np.array(ps)
    below = np.nonzero(p < 0.5)[0]
    if len(below) and below[0] > 0:
        j = below[0]
        x = rs[j - 1] + (ps[j - 1] - 0.5) * (rs[j] - rs[j - 1]) / (ps[j - 1] - ps[j])
        print(f"interpolated 0.5 crossing at n={args.n}: r = {x:.3f}")


if __name__ == "__main__":
    main()
