"""Command-line front end: ``cnfxor <subcommand> ...``.

Exit codes: 10 SAT, 20 UNSAT, 30 EXHAUSTED (solve only); 2 for invalid
input; 3 when a size guard is exceeded; 1 for other experiment failures.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

from . import __version__
from .bounds import OutOfValidity, curve, lower_slope, upper_slope
from .counting import (InsufficientConditioningEvents, NoSatInstances, count_exact,
                       estimate_phi)
from . import counting
from .formula import (InvalidParams, ParseError, RandomModelParams, dumps_dimacs_xor,
                      parse_dimacs_xor, sample_formula)
from .gf2 import GuardExceeded
from .lab import (CensoredProbe, GridSpec, InsufficientData, NotBracketed, estimate_crossing,
                  fit_slope, scan, write_crossings_csv, write_manifest, write_scan_csv)
from .solver import SolveBudget, Verdict, solve, solve_external

EXIT_CODES = {Verdict.SAT: 10, Verdict.UNSAT: 20, Verdict.EXHAUSTED: 30}


class UsageError(ValueError):
    pass


def parse_range(text: str) -> list[float]:
    """``start:stop:step`` inclusive of ``stop`` within 1e-9; a bare number is one value."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None
    if len(nums) == 1:
        return nums
    if len(nums) != 3:
        raise UsageError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = nums
    if step <= 0 or stop < start:
        raise UsageError(f"range {text!r} needs step > 0 and stop >= start")
    count = math.floor((stop - start) / step + 1e-9) + 1
    return [round(start + i * step, 10) for i in range(count)]


def parse_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None


def _budget(args) -> SolveBudget:
    return SolveBudget(getattr(args, "max_conflicts", None), getattr(args, "timeout", None))


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _open_out(args):
    return open(args.out, "w", newline="") if args.out else sys.stdout


def _close_out(args, fh) -> None:
    if fh is not sys.stdout:
        fh.close()


# -- subcommands ------------------------------------------------------------------


def cmd_gen(args) -> int:
    params = RandomModelParams(args.k, args.n, args.r, args.s)
    f = sample_formula(params, args.seed)
    _emit(args, dumps_dimacs_xor(f))
    print(f"c generated {len(f.cnf)} CNF clauses and {len(f.xors)} XOR clauses", file=sys.stderr)
    return 0


def _read_formula(path: str):
    with open(path) as fh:
        return parse_dimacs_xor(fh)


def cmd_solve(args) -> int:
    f = _read_formula(args.file)
    if args.external:
        verdict = solve_external(f, timeout=args.timeout)
        _emit(args, verdict.value + "\n")
        return EXIT_CODES[verdict]
    out = solve(f, _budget(args), args.branching)
    text = out.verdict.value + "\n"
    if out.model is not None:
        lits = [str(i + 1) if b else str(-(i + 1)) for i, b in enumerate(out.model)]
        text += "v " + " ".join(lits + ["0"]) + "\n"
    st = out.stats
    text += (f"c decisions={st.decisions} propagations={st.propagations} "
             f"conflicts={st.conflicts}\n")
    _emit(args, text)
    return EXIT_CODES[out.verdict]


def cmd_count(args) -> int:
    res = count_exact(_read_formula(args.file))
    _emit(args, json.dumps({"count": str(res.count), "n": res.n, "method": res.method}) + "\n")
    return 0


def cmd_phi(args) -> int:
    est = estimate_phi(args.k, args.r, args.n, args.trials, args.seed)
    _emit(args, json.dumps(est.__dict__) + "\n")
    return 0


def cmd_bounds(args) -> int:
    bc = curve(args.k, parse_range(args.r), extrapolate=args.extrapolate)
    fh = _open_out(args)
    try:
        bc.write_csv(fh)
    finally:
        _close_out(args, fh)
    return 0


def cmd_scan(args) -> int:
    spec = GridSpec(args.k, args.n, tuple(parse_range(args.r)), tuple(parse_range(args.s)),
                    args.trials, _budget(args), args.seed, args.branching)
    result = scan(spec, workers=args.workers)
    fh = _open_out(args)
    try:
        write_scan_csv(result, fh)
    finally:
        _close_out(args, fh)
    return 0


def _crossing_kwargs(args) -> dict:
    try:
        lo, hi = (float(x) for x in args.interval.split(":"))
    except ValueError:
        raise UsageError(f"interval must be lo:hi, got {args.interval!r}") from None
    return dict(search_interval=(lo, hi), trials_per_probe=args.trials, target=args.target,
                seed=args.seed, budget=_budget(args), resolution=args.resolution,
                workers=args.workers, branching=args.branching)


def cmd_crossing(args) -> int:
    est = estimate_crossing(args.k, args.n, args.fixed_axis, args.fixed_value,
                            **_crossing_kwargs(args))
    fh = _open_out(args)
    try:
        write_crossings_csv([est], fh)
    finally:
        _close_out(args, fh)
    print(f"c exhausted fraction {est.exhausted_fraction:.4f}", file=sys.stderr)
    return 0


def cmd_slope(args) -> int:
    ests = [estimate_crossing(args.k, args.n, "r", r, **_crossing_kwargs(args))
            for r in parse_list(args.r_values)]
    fit = fit_slope([(e.fixed_value, e.crossing) for e in ests], args.k, args.n)
    fh = _open_out(args)
    try:
        write_crossings_csv(ests, fh)
    finally:
        _close_out(args, fh)
    print(json.dumps(fit.__dict__), file=sys.stderr)
    args._extra = {"slope_fit": fit.__dict__, "slope_bracket": slope_bracket(args.k)}
    return 0


def slope_bracket(k: int) -> dict | None:
    """Both bound slopes for ``k`` and how the acceptance bracket follows from them."""
    if k < 3:
        return None
    lo, hi = lower_slope(k), upper_slope(k)
    return {
        "lower_curve_slope": lo,
        "upper_curve_slope": hi,
        "derivation": ("lower slope = 0.5*log2(((1-b/2)^k - 2^-k)^2 / (1-b)^k) with b the "
                       "smallest positive root of b(2-b)^(k-1) = 1; upper slope = "
                       "log2(1 - 2^-k); the bracket widens [lower, upper] outward to "
                       "two decimals"),
        "bracket": [math.floor(lo * 100) / 100, math.ceil(hi * 100) / 100],
    }


def cmd_stattest(args) -> int:
    if args.name == "pairwise":
        rep = counting.test_xor_pairwise_independence(args.n, args.m, args.samples, args.seed)
    elif args.name in ("residual-sat", "residual-unsat"):
        rep = counting.test_residual_sat_bound(args.n, args.s, args.alpha, args.samples,
                                               args.seed, direction=args.name.split("-")[1])
    else:
        rep = counting.test_markov_count_bound(args.k, args.r, args.n, args.epsilon,
                                               args.samples, args.seed)
    _emit(args, json.dumps(rep.to_dict(), indent=2) + "\n")
    return 0 if rep.passed else 1


def cmd_replay(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    argv = list(manifest["argv"])
    if args.out:
        if "--out" in argv:
            argv[argv.index("--out") + 1] = args.out
        else:
            argv += ["--out", args.out]
    return main(argv)


# -- parser -----------------------------------------------------------------------


def _common(p, seed=True):
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")


def _budget_flags(p):
    p.add_argument("--max-conflicts", type=int, default=None)
    p.add_argument("--timeout", type=float, default=None, help="wall-clock seconds per solve")
    p.add_argument("--branching", choices=("lowest", "occurrence"), default="occurrence")


def _crossing_flags(p):
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--interval", required=True, help="search interval lo:hi")
    p.add_argument("--trials", type=int, default=50, help="trials per probe")
    p.add_argument("--target", type=float, default=0.5)
    p.add_argument("--resolution", type=float, default=0.01)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    _budget_flags(p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cnfxor", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"cnfxor {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample one random k-CNF-XOR formula")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-r", type=float, default=0.0)
    p.add_argument("-s", type=float, default=0.0)
    _common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="decide a DIMACS-XOR file")
    p.add_argument("file")
    p.add_argument("--external", action="store_true",
                   help="use the binary named by CNFXOR_EXTERNAL_SOLVER")
    _budget_flags(p)
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("count", help="exact model count of a DIMACS-XOR file")
    p.add_argument("file")
    _common(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("phi", help="finite-n estimate of the free-entropy density")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-r", type=float, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    _common(p)
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("bounds", help="CSV of the theoretical transition bounds")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--r", required=True, help="grid start:stop:step")
    p.add_argument("--extrapolate", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("scan", help="P(sat) over an (r, s) grid")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--r", required=True, help="r grid start:stop:step")
    p.add_argument("--s", required=True, help="s grid start:stop:step")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    _budget_flags(p)
    _common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("crossing", help="bisect for the P(sat) = 0.5 density")
    p.add_argument("--fixed-axis", choices=("r", "s"), required=True)
    p.add_argument("--fixed-value", type=float, required=True)
    _crossing_flags(p)
    _common(p)
    p.set_defaults(func=cmd_crossing)

    p = sub.add_parser("slope", help="crossings along s at several r, with a line fit")
    p.add_argument("--r-values", required=True, help="comma-separated r values")
    _crossing_flags(p)
    _common(p)
    p.set_defaults(func=cmd_slope)

    p = sub.add_parser("stattest", help="statistical checks of random XOR systems")
    p.add_argument("name", choices=("pairwise", "residual-sat", "residual-unsat", "markov"))
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-m", type=int, default=3, help="XOR clauses (pairwise)")
    p.add_argument("-s", type=float, default=0.2, help="XOR density (residual)")
    p.add_argument("--alpha", type=int, default=3)
    p.add_argument("-k", type=int, default=3)
    p.add_argument("-r", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=1.5)
    p.add_argument("--samples", type=int, default=20000)
    _common(p)
    p.set_defaults(func=cmd_stattest)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="write to this path instead of the recorded one")
    p.set_defaults(func=cmd_replay, seed=None, manifest_out=None)
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        code = args.func(args)
    except (InvalidParams, ParseError, UsageError, OutOfValidity, NotBracketed,
            InsufficientData, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return 3
    except (CensoredProbe, NoSatInstances, InsufficientConditioningEvents) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.command != "replay":
        path = args.manifest or (args.out + ".manifest.json" if args.out else None)
        if path:
            config = {k: v for k, v in vars(args).items()
                      if k not in ("func", "_extra") and not k.startswith("_")}
            write_manifest(path, args.command, config, getattr(args, "seed", None),
                           time.perf_counter() - start,
                           extra={"argv": argv, "exit_code": code,
                                  **getattr(args, "_extra", {})})
    return code


if __name__ == "__main__":
    sys.exit(main())
