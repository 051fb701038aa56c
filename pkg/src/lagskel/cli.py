"""Command-line interface.

Exit codes: 0 success, 1 a verification check failed, 2 unreadable or
invalid input, 3 oracle budget exhausted (partial output written),
4 configuration error (for example a box the mincut oracle cannot serve).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from fractions import Fraction

from . import domains, problemfile
from .energy import rational
from .errors import (BudgetExceeded, CapacityError, ConfigurationError,
                     DimensionError, DomainError, InfeasibleError, ParseError,
                     SubmodularityError, UnsupportedDimensionError,
                     UnsupportedDirectionError)
from .oracles import make_lagrangian_oracle
from .solvers import (PenaltySpec, SlackBounds, adapt_search, dual_max,
                      dual_search, retarget, slack_wrap)

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_BUDGET, EXIT_CONFIG = 0, 1, 2, 3, 4
BUDGET_ENV = "LAGSKEL_MAX_CALLS"


class UsageError(Exception):
    pass


def _vector(text, name):
    try:
        return tuple(rational(t) for t in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from None


def _labeling(x):
    return "".join(str(int(b)) for b in x)


def _strs(values):
    return [str(v) for v in values]


def _budget(args):
    if args.max_calls is not None:
        return args.max_calls
    env = os.environ.get(BUDGET_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{BUDGET_ENV} must be an integer, got {env!r}") from None
    return None


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _json(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _mask_lines(x, grid):
    rows, cols = grid
    return ["".join(str(b) for b in x[r * cols:(r + 1) * cols]) for r in range(rows)]


# ---------------------------------------------------------------------------
# search

def stats_document(result, timing=True):
    found, _, report = result
    doc = {
        "oracle_calls": report.oracle_calls,
        "num_vertices": report.num_vertices,
        "num_minimizers": report.num_minimizers,
        "degeneracies": report.degeneracies,
        "general_position": report.general_position,
        "complete": report.complete,
        "entries": [{"labeling": _labeling(e.labeling), "f": str(e.f_value),
                     "H": _strs(e.h_value), "witness": _strs(e.witness)} for e in found],
    }
    if timing:
        doc["wall_time_ms"] = round(report.wall_time * 1000, 3)
    return doc


def set_table(problem, found):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "labeling", "f"] + [f"H_{h.name}" for h in problem.constraints]
               + [f"witness_{k + 1}" for k in range(problem.m)])
    for k, e in enumerate(found):
        w.writerow([k, _labeling(e.labeling), str(e.f_value)] + _strs(e.h_value) + _strs(e.witness))
    return buf.getvalue()


def cmd_search(args):
    problem, _ = problemfile.load(args.problem)
    oracle = make_lagrangian_oracle(problem, args.backend)
    rng = random.Random(args.order_seed) if args.order_seed is not None else None
    code = EXIT_OK
    try:
        result = dual_search(oracle, max_oracle_calls=_budget(args), rng=rng)
    except BudgetExceeded as exc:
        result = exc.partial
        code = EXIT_BUDGET
        print(f"budget exhausted after {result.report.oracle_calls} oracle calls; output is partial",
              file=sys.stderr)
    doc = stats_document(result, timing=not args.no_timing)
    if args.out_stats:
        _write(args.out_stats, _json(doc))
    if args.out_skeleton:
        _write(args.out_skeleton, result.skeleton.dump())
    if args.out_set:
        _write(args.out_set, set_table(problem, result.characteristic_set))
    r = result.report
    print(f"oracle_calls={r.oracle_calls} vertices={r.num_vertices} minimizers={r.num_minimizers} "
          f"degeneracies={r.degeneracies} complete={str(r.complete).lower()}")
    return code


# ---------------------------------------------------------------------------
# max

def _parse_range(text, m):
    lows, highs = [], []
    for part in text.split(","):
        if ".." not in part:
            raise UsageError(f"--b-range: {part!r} is not of the form LO..HI")
        lo, hi = part.split("..", 1)
        lo, hi = rational(lo), rational(hi)
        if lo > hi:
            raise UsageError(f"--b-range: empty range {part!r}")
        lows.append(lo)
        highs.append(hi)
    if len(lows) != m:
        raise UsageError(f"--b-range needs {m} ranges, got {len(lows)}")
    return tuple(lows), tuple(highs)


def _result_document(problem, meta, res, extra=None):
    r = res.result
    doc = {
        "lambda": _strs(res.lam),
        "dual_value": str(res.value),
        "labeling": _labeling(res.minimizer),
        "f": str(r.f_value),
        "H": _strs(r.h_value),
        "oracle_calls": res.report.oracle_calls,
    }
    if r.slack is not None:
        doc["slack"] = _strs(r.slack)
        doc["b_star"] = _strs(h + y for h, y in zip(r.h_value, r.slack))
    if "grid" in meta:
        doc["mask"] = _mask_lines(res.minimizer, meta["grid"])
    if extra:
        doc.update(extra)
    return doc


def cmd_max(args):
    problem, meta = problemfile.load(args.problem)
    oracle = make_lagrangian_oracle(problem, args.backend)
    if (args.b is None) == (args.b_range is None):
        raise UsageError("give exactly one of --b and --b-range")
    if args.b is not None:
        b = _vector(args.b, "b")
        if len(b) != problem.m:
            raise UsageError(f"--b needs {problem.m} values, got {len(b)}")
        wrapped = retarget(oracle, b)
    else:
        lows, highs = _parse_range(args.b_range, problem.m)
        bounds = SlackBounds(tuple(Fraction(0) for _ in lows), tuple(h - l for l, h in zip(lows, highs)))
        wrapped = slack_wrap(oracle, lows, bounds)
    try:
        res = dual_max(wrapped, max_oracle_calls=_budget(args))
    except BudgetExceeded as exc:
        res = exc.partial
        _write(args.out, _json(dict(_result_document(problem, meta, res), complete=False)))
        print("budget exhausted; output is partial", file=sys.stderr)
        return EXIT_BUDGET
    _write(args.out, _json(dict(_result_document(problem, meta, res), complete=True)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# adapt

def cmd_adapt(args):
    problem, meta = problemfile.load(args.problem)
    m = problem.m

    def vec(text, name, default):
        if text is None:
            return default
        v = _vector(text, name)
        if len(v) != m:
            raise UsageError(f"--{name} needs {m} values, got {len(v)}")
        return v

    zeros = (Fraction(0),) * m
    b_hat = vec(args.bhat, "bhat", problem.b)
    bounds = SlackBounds(vec(args.gap_minus, "gap-minus", zeros), vec(args.gap_plus, "gap-plus", zeros))
    alpha = vec(args.alpha, "alpha", (Fraction(1),) * m)
    eta = vec(args.eta, "eta", (Fraction(1),) * m)
    kind = "squared_weighted" if args.penalty == "squared" else "absolute_weighted"
    penalty = PenaltySpec(kind, eta, b_hat)
    try:
        x, diag = adapt_search(problem, b_hat, bounds, alpha, penalty, args.backend,
                               max_oracle_calls=_budget(args))
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    e = diag.entry
    doc = {
        "labeling": _labeling(x),
        "f": str(e.f_value),
        "H": _strs(e.h_value),
        "objective": str(diag.objective),
        "b_star": _strs(diag.b_star),
        "lambda_star": _strs(diag.lam_star),
        "search_box": [_strs(iv) for iv in diag.search_box],
        "fixed": {str(k): str(v) for k, v in diag.fixed.items()},
        "candidates": len(diag.candidates),
        "dual_max_labeling": _labeling(diag.step2.minimizer),
        "dual_max_objective": str(penalty.objective(diag.step2.result.f_value, diag.step2.result.h_value)),
        "oracle_calls": diag.oracle_calls,
    }
    if "grid" in meta:
        doc["mask"] = _mask_lines(x, meta["grid"])
    _write(args.out, _json(doc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# segment

def _targets(text):
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"--targets: {part!r} is not NAME=VALUE")
        k, v = part.split("=", 1)
        out[k.strip()] = rational(v)
    return out


def cmd_segment(args):
    r0, c0, cost0 = domains.read_cost_map(args.cost0)
    r1, c1, cost1 = domains.read_cost_map(args.cost1)
    if (r0, c0) != (r1, c1):
        raise ParseError(f"cost maps differ in size: {r0}x{c0} vs {r1}x{c1}")
    grid = domains.GridProblem(r0, c0, cost0, cost1, rational(args.beta))
    names = () if args.constraints in ("none", "") else tuple(s.strip() for s in args.constraints.split(","))
    for n in names:
        if n not in domains.CONSTRAINT_NAMES:
            raise UsageError(f"unknown constraint {n!r}")
    truth = None
    stats = None
    if args.ground_truth:
        truth = domains.read_mask(args.ground_truth)
        if truth.shape != (r0, c0):
            raise ParseError("ground truth does not match the cost maps")
        stats = domains.mask_statistics(grid, truth)
    if args.targets:
        stats = dict(stats or {})
        stats.update(_targets(args.targets))
    if names and stats is None:
        raise UsageError("constraints need --ground-truth or --targets")
    m = len(names)
    alpha = _vector(args.alpha, "alpha") if args.alpha else (Fraction(1),) * m
    eta = _vector(args.eta, "eta") if args.eta else None
    try:
        res = domains.segment(grid, names, stats, args.mode, gap=rational(args.gap), alpha=alpha,
                              eta=eta, backend=args.backend, max_oracle_calls=_budget(args),
                              radius=rational(args.radius) if args.radius else None)
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if args.out_mask:
        domains.write_mask(args.out_mask, res.mask)
    report = {
        "constraints": list(names),
        "mode": args.mode if names else "none",
        "f": str(res.f_value),
        "H": _strs(res.h_value),
        "targets": _strs(res.targets),
        "foreground": int(res.mask.sum()),
        "oracle_calls": res.oracle_calls,
    }
    if res.lam is not None:
        report["lambda"] = _strs(res.lam)
    if res.objective is not None:
        report["objective"] = str(res.objective)
    if truth is not None:
        err = domains.pixel_error(res.mask, truth)
        report["pixel_error"] = str(err)
        report["pixel_error_float"] = float(err)
    _write(args.out_report, _json(report))
    return EXIT_OK


# ---------------------------------------------------------------------------
# brute-check

def _print_outcomes(outcomes):
    ok = True
    for o in outcomes:
        status = "PASS" if o.ok else "FAIL"
        line = f"{status} {o.name}"
        if not o.ok and o.detail:
            line += f": {o.detail}"
        print(line)
        ok &= o.ok
    return ok


def cmd_brute_check(args):
    from .verify import random_problem, run_all_checks

    if args.problem is None and not args.random:
        raise UsageError("give a problem file or --random N")
    if args.problem is not None:
        problem, _ = problemfile.load(args.problem)
        if problem.n > 20:
            raise UsageError(f"brute-check handles n <= 20, got {problem.n}")
        make_lagrangian_oracle(problem, args.backend)
        ok = _print_outcomes(run_all_checks(problem, args.backend, random.Random(args.seed)))
        return EXIT_OK if ok else EXIT_CHECK
    print(f"seed {args.seed}")
    rng = random.Random(args.seed)
    for k in range(args.random):
        problem = random_problem(rng, n=rng.randint(3, args.max_n))
        outcomes = run_all_checks(problem, args.backend, rng)
        bad = [o for o in outcomes if not o.ok]
        if bad:
            print(f"instance {k} failed")
            _print_outcomes(outcomes)
            sys.stdout.write(problemfile.dumps(problem))
            return EXIT_CHECK
    print(f"PASS {args.random} random instances")
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth

def cmd_synth(args):
    cost0, cost1, truth = domains.synthetic_image(args.seed, args.rows, args.cols,
                                                  noise=args.noise, clutter=args.clutter)
    os.makedirs(args.out_dir, exist_ok=True)
    domains.write_pgm(os.path.join(args.out_dir, "cost0.pgm"), cost0)
    domains.write_pgm(os.path.join(args.out_dir, "cost1.pgm"), cost1)
    domains.write_mask(os.path.join(args.out_dir, "truth.pgm"), truth)
    written = "cost0.pgm cost1.pgm truth.pgm"
    if args.problem_constraints:
        names = tuple(s.strip() for s in args.problem_constraints.split(","))
        grid = domains.GridProblem(args.rows, args.cols, cost0, cost1, rational(args.beta))
        stats = domains.mask_statistics(grid, truth)
        problem = domains.grid_problem(grid, names, stats)
        text = problemfile.dumps(problem, {"grid": (args.rows, args.cols)})
        _write(os.path.join(args.out_dir, "problem.json"), text)
        written += " problem.json"
    print(f"wrote {written} to {args.out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="lagskel", description="Exact constrained MAP inference for binary pairwise energies.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--backend", choices=("mincut", "brute"), default="mincut")
        sp.add_argument("--max-calls", type=int, default=None,
                        help=f"oracle call budget (default: ${BUDGET_ENV} or unlimited)")

    s = sub.add_parser("search", help="compute the full characteristic set")
    s.add_argument("problem")
    common(s)
    s.add_argument("--out-stats")
    s.add_argument("--out-skeleton")
    s.add_argument("--out-set")
    s.add_argument("--order-seed", type=int, help="process vertices in a seeded random order")
    s.add_argument("--no-timing", action="store_true", help="omit wall time from the stats file")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("max", help="dual maximum for one target or a target range")
    s.add_argument("problem")
    s.add_argument("--b", help="comma-separated target vector")
    s.add_argument("--b-range", help="comma-separated LO..HI per dimension")
    common(s)
    s.add_argument("--out")
    s.set_defaults(func=cmd_max)

    s = sub.add_parser("adapt", help="soft-constrained search around the dual maximum")
    s.add_argument("problem")
    s.add_argument("--bhat")
    s.add_argument("--gap-minus")
    s.add_argument("--gap-plus")
    s.add_argument("--alpha")
    s.add_argument("--eta")
    s.add_argument("--penalty", choices=("squared", "absolute"), default="squared")
    common(s)
    s.add_argument("--out")
    s.set_defaults(func=cmd_adapt)

    s = sub.add_parser("segment", help="segment an image given two cost maps")
    s.add_argument("cost0")
    s.add_argument("cost1")
    s.add_argument("--beta", default="40")
    s.add_argument("--constraints", default="none", help="comma-separated names or 'none'")
    s.add_argument("--mode", choices=("search", "max", "adapt"), default="max")
    s.add_argument("--ground-truth")
    s.add_argument("--targets", help="NAME=VALUE,... overriding ground-truth statistics")
    s.add_argument("--gap", default="0", help="relative inequality gap, e.g. 0.1")
    s.add_argument("--alpha")
    s.add_argument("--eta")
    s.add_argument("--radius", help="half-width of the multiplier box")
    common(s)
    s.add_argument("--out-mask")
    s.add_argument("--out-report")
    s.set_defaults(func=cmd_segment)

    s = sub.add_parser("brute-check", help="verify every property against exhaustive enumeration")
    s.add_argument("problem", nargs="?")
    s.add_argument("--random", type=int, default=0, metavar="N")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-n", type=int, default=10)
    s.add_argument("--backend", choices=("mincut", "brute"), default="brute")
    s.set_defaults(func=cmd_brute_check)

    s = sub.add_parser("synth", help="write a synthetic segmentation instance")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--rows", type=int, default=30)
    s.add_argument("--cols", type=int, default=30)
    s.add_argument("--noise", type=float, default=0.35)
    s.add_argument("--clutter", type=float, default=0.62)
    s.add_argument("--out-dir", default=".")
    s.add_argument("--problem-constraints", metavar="NAMES",
                   help="also write problem.json with these constraints set from the ground truth")
    s.add_argument("--beta", default="40")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, SubmodularityError, UnsupportedDirectionError,
            UnsupportedDimensionError, CapacityError, InfeasibleError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, UsageError, DimensionError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

if __name__ == "__main__":
    sys.exit(main())
