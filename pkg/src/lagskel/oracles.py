"""Oracles returning argmin_x L(x, lam) for a fixed multiplier vector.

Three backends are provided: an exact st-mincut minimizer for submodular
pairwise energies, an exhaustive enumerator used for verification, and a
Dijkstra-based oracle over s-t paths.  Every oracle returns, together with
the minimizer, the hyperplane lam -> L(x, lam) that the skeleton needs.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .energy import (ConstraintSpec, Edge, LagrangianProblem, PairwiseEnergy,
                     check_in_box,
                     evaluate_energy, is_submodular, minimum_margin_over_box,
                     rational, rational_vector, submodularity_lambda_bound)
from .errors import (CapacityError, ConfigurationError, InfeasibleError,
                     SubmodularityError)
from .maxflow import FlowNetwork
from .skeleton import Hyperplane

BRUTE_LIMIT = 24
_SAFE = 2 ** 62


@dataclass(frozen=True)
class OracleResult:
    minimizer: tuple
    value: Fraction


@dataclass(frozen=True)
class LagrangianResult(OracleResult):
    """Oracle answer with the data the solvers need.

    ``h_value`` is H(x) (plus the slack y for slack-wrapped oracles) and
    ``plane`` is z = f(x) + lam . (h_value - target).
    """
    f_value: Fraction = Fraction(0)
    h_value: tuple = ()
    plane: Optional[Hyperplane] = None
    slack: Optional[tuple] = None


# ---------------------------------------------------------------------------
# direct minimizers

def _lcm_denominators(values):
    d = 1
    for v in values:
        d = math.lcm(d, v.denominator)
    return d


def _cut_labels(n, lin, pairs):
    """Labels minimizing sum_i lin[i] x_i + sum w (1 - x_u) x_v over integer data.

    ``pairs`` holds (u, v, w) with w >= 0.  Label 0 is the source side and
    exactly the nodes reachable from the source in the final residual
    graph get it, so ties are broken the same way on every call.
    """
    net = FlowNetwork(n)
    for i, c in enumerate(lin):
        if c > 0:
            net.add_tweights(i, c, 0)
        elif c < 0:
            net.add_tweights(i, 0, -c)
    for u, v, w in pairs:
        if w:
            net.add_edge(u, v, w, 0)
    net.maxflow()
    return tuple(0 if s else 1 for s in net.source_side())


def mincut_minimize(f: PairwiseEnergy) -> OracleResult:
    """Exact global minimizer of a submodular pairwise energy via st-mincut.

    Each table is rewritten as A + (C - A) x_u + (D - C) x_v
    + (B + C - A - D)(1 - x_u) x_v, which needs only nonnegative arcs.
    """
    if not is_submodular(f):
        raise SubmodularityError("energy has a non-submodular edge table")
    lin = [p1 - p0 for p0, p1 in f.unary]
    pair = []
    for e in f.edges:
        a, b, c, d = e.table
        lin[e.u] += c - a
        lin[e.v] += d - c
        pair.append((e.u, e.v, b + c - a - d))
    scale = _lcm_denominators(lin + [w for _, _, w in pair])
    x = _cut_labels(f.n, [int(c * scale) for c in lin],
                    [(u, v, int(w * scale)) for u, v, w in pair])
    return OracleResult(x, evaluate_energy(f, x))


class _IntegerLagrangian:
    """L(., lam) of a fixed problem kept as integers over one denominator.

    Rebuilding a Fraction-valued energy for every multiplier dominates the
    cost of a cut on image-sized grids; here only the multiplier-dependent
    parts are recomputed.
    """

    def __init__(self, problem: LagrangianProblem):
        f = problem.f
        values = [f.constant] + [q for pr in f.unary for q in pr]
        values += [q for e in f.edges for q in e.table]
        for h in problem.constraints:
            values += list(h.node_coeffs) + [h.edge_coeff, h.offset]
        self.scale = _lcm_denominators(values)
        sc = self.scale
        self.n = f.n
        self.edges = [(e.u, e.v) for e in f.edges]
        self.unary = [(int(p0 * sc), int(p1 * sc)) for p0, p1 in f.unary]
        self.tables = [tuple(int(q * sc) for q in e.table) for e in f.edges]
        self.constant = int(f.constant * sc)
        lin = [p1 - p0 for p0, p1 in self.unary]
        pair = []
        for (u, v), (a, b, c, d) in zip(self.edges, self.tables):
            lin[u] += c - a
            lin[v] += d - c
            pair.append(b + c - a - d)
        self.lin, self.pair = lin, pair
        self.node = [[(i, int(a * sc)) for i, a in enumerate(h.node_coeffs) if a]
                     for h in problem.constraints]
        self.weight = [int(h.edge_coeff * sc) for h in problem.constraints]
        self.offset = [int(h.offset * sc) for h in problem.constraints]

    def minimize(self, lam) -> tuple:
        q = _lcm_denominators(lam)
        p = [int(l * q) for l in lam]
        lin = [c * q for c in self.lin]
        for pj, node in zip(p, self.node):
            if pj:
                for i, a in node:
                    lin[i] += pj * a
        s = sum(pj * w for pj, w in zip(p, self.weight))
        pairs = []
        for (u, v), base in zip(self.edges, self.pair):
            if s:
                lin[u] += s
                lin[v] -= s
            w = base * q + 2 * s
            if w < 0:
                raise SubmodularityError("L(., lam) has a non-submodular edge table")
            pairs.append((u, v, w))
        return _cut_labels(self.n, lin, pairs)

    def f_value(self, x) -> Fraction:
        total = self.constant
        for (p0, p1), xi in zip(self.unary, x):
            total += p1 if xi else p0
        for (u, v), t in zip(self.edges, self.tables):
            total += t[2 * x[u] + x[v]]
        return Fraction(total, self.scale)

    def h_value(self, x) -> tuple:
        cut = sum(1 for u, v in self.edges if x[u] != x[v])
        out = []
        for node, w, c in zip(self.node, self.weight, self.offset):
            total = c + w * cut
            for i, a in node:
                if x[i]:
                    total += a
            out.append(Fraction(total, self.scale))
        return tuple(out)


class LabelingTable:
    """Every labeling of ``n`` variables with exact energy and constraint values.

    Row ``k`` is the labeling whose bits, most significant first, spell
    ``k``; row order is therefore lexicographic.  Values are stored as
    integers over a common ``scale``.
    """

    def __init__(self, f: PairwiseEnergy, constraints: Sequence[ConstraintSpec] = ()):
        n = f.n
        if n > BRUTE_LIMIT:
            raise CapacityError(f"exhaustive enumeration limited to n <= {BRUTE_LIMIT}, got {n}")
        self.n = n
        self.f = f
        self.constraints = tuple(constraints)
        coeffs = [f.constant] + [q for pair in f.unary for q in pair]
        coeffs += [q for e in f.edges for q in e.table]
        for h in self.constraints:
            coeffs += list(h.node_coeffs) + [h.edge_coeff, h.offset]
        self.scale = _lcm_denominators(coeffs)
        ks = np.arange(2 ** n, dtype=np.int64)
        shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
        self.bits = ((ks[:, None] >> shifts) & 1).astype(np.int8)

        def ints(values):
            return [int(v * self.scale) for v in values]

        bound = sum(abs(c) for c in ints(coeffs)) * max(n, 1) * 4
        self.dtype = np.int64 if bound < _SAFE else object
        bits = self.bits.astype(self.dtype)
        unary0 = np.array(ints(p[0] for p in f.unary), dtype=self.dtype)
        unary1 = np.array(ints(p[1] for p in f.unary), dtype=self.dtype)
        fv = np.full(2 ** n, int(f.constant * self.scale), dtype=self.dtype)
        if n:
            fv = fv + ((1 - bits) * unary0).sum(axis=1) + (bits * unary1).sum(axis=1)
        cut = np.zeros(2 ** n, dtype=self.dtype)
        for e in f.edges:
            idx = 2 * self.bits[:, e.u].astype(np.int64) + self.bits[:, e.v]
            fv = fv + np.array(ints(e.table), dtype=self.dtype)[idx]
            cut = cut + (self.bits[:, e.u] != self.bits[:, e.v]).astype(self.dtype)
        self.f_num = fv
        cols = []
        for h in self.constraints:
            col = np.full(2 ** n, int(h.offset * self.scale), dtype=self.dtype)
            if n:
                col = col + (bits * np.array(ints(h.node_coeffs), dtype=self.dtype)).sum(axis=1)
            if h.edge_coeff:
                col = col + cut * int(h.edge_coeff * self.scale)
            cols.append(col)
        self.h_num = np.stack(cols, axis=1) if cols else np.zeros((2 ** n, 0), dtype=self.dtype)

    def __len__(self):
        return 2 ** self.n

    def labeling(self, k: int) -> tuple:
        return tuple(int(b) for b in self.bits[k])

    def f_value(self, k: int) -> Fraction:
        return Fraction(int(self.f_num[k]), self.scale)

    def h_value(self, k: int) -> tuple:
        return tuple(Fraction(int(v), self.scale) for v in self.h_num[k])

    def lagrangian_numerators(self, lam, b=None):
        """Numerators of L(x, lam) for every row, over denominator scale * d."""
        lam = rational_vector(lam)
        b = (Fraction(0),) * len(lam) if b is None else rational_vector(b)
        d = _lcm_denominators(list(lam) + list(b))
        lam_i = [int(l * d) for l in lam]
        # lam . b contributes a row-independent constant
        shift = -sum(l * bi for l, bi in zip(lam, b)) * self.scale * d
        shift = int(shift)
        hmax = [int(abs(self.h_num[:, i]).max()) if len(self) else 0 for i in range(len(lam))]
        fmax = int(abs(self.f_num).max()) if len(self) else 0
        bound = fmax * d + sum(abs(l) * h for l, h in zip(lam_i, hmax)) + abs(shift)
        dtype = np.int64 if (self.dtype is np.int64 and bound < _SAFE) else object
        vals = self.f_num.astype(dtype) * d
        for i, l in enumerate(lam_i):
            if l:
                vals = vals + self.h_num[:, i].astype(dtype) * l
        vals = vals + shift
        return vals, self.scale * d

    def minimize(self, lam=None, b=None):
        """Row index and exact value of the lexicographically first minimizer."""
        if lam is None:
            vals, den = self.f_num, self.scale
        else:
            vals, den = self.lagrangian_numerators(lam, b)
        k = int(np.argmin(vals)) if vals.dtype != object else min(range(len(vals)), key=vals.__getitem__)
        return k, Fraction(int(vals[k]), den)


def brute_minimize(f: PairwiseEnergy) -> OracleResult:
    """Exhaustive minimum; ties go to the lexicographically smallest labeling."""
    table = LabelingTable(f)
    k, value = table.minimize()
    return OracleResult(table.labeling(k), value)


# ---------------------------------------------------------------------------
# oracle objects

class Oracle:
    """Callable lam -> LagrangianResult over the box ``self.box``.

    ``target`` is the constraint instance b the plane coefficients are
    measured against.  Implementations are pure: equal multipliers give
    equal results.
    """

    box: tuple = ()
    target: tuple = ()

    @property
    def m(self) -> int:
        return len(self.box)

    def __call__(self, lam) -> LagrangianResult:
        lam = rational_vector(lam)
        check_in_box(self.box, lam)
        return self.solve(lam)

    def solve(self, lam) -> LagrangianResult:
        raise NotImplementedError

    def violation(self, result: LagrangianResult) -> Fraction:
        """L1 distance of the result's constraint values from the admissible set."""
        return sum((abs(c) for c in result.plane.coeffs), Fraction(0))


class LagrangianOracle(Oracle):
    def __init__(self, problem: LagrangianProblem, backend: str = "mincut"):
        if backend not in ("mincut", "brute"):
            raise ConfigurationError(f"unknown backend {backend!r}")
        self.problem = problem
        self.backend = backend
        self.box = problem.box
        self.target = problem.b
        if backend == "mincut":
            _check_mincut_box(problem)
            self.scaled = _IntegerLagrangian(problem)
        else:
            self.table = LabelingTable(problem.f, problem.constraints)

    def solve(self, lam) -> LagrangianResult:
        p = self.problem
        if self.backend == "brute":
            k, value = self.table.minimize(lam, p.b)
            x = self.table.labeling(k)
            fx, hx = self.table.f_value(k), self.table.h_value(k)
        else:
            x = self.scaled.minimize(lam)
            fx, hx = self.scaled.f_value(x), self.scaled.h_value(x)
        plane = Hyperplane(fx, tuple(h - b for h, b in zip(hx, p.b)), x)
        if self.backend != "brute":
            value = plane(lam)
        return LagrangianResult(x, value, fx, hx, plane)


def _check_mincut_box(problem: LagrangianProblem):
    if not is_submodular(problem.f) and not any(h.edge_coeff for h in problem.constraints):
        raise ConfigurationError("energy is not submodular and no multiplier can repair it")
    bounds = submodularity_lambda_bound(problem)
    for i, (k, (lo, _)) in enumerate(zip(bounds, problem.box)):
        if k is not None and lo < k:
            name = problem.constraints[i].name
            raise ConfigurationError(
                f"box dimension {i} ({name}) starts at {lo} below the submodularity bound K = {k}")
    if minimum_margin_over_box(problem) < 0:
        raise ConfigurationError("L(., lam) is not submodular on the whole box")


def make_lagrangian_oracle(problem: LagrangianProblem, backend: str = "mincut") -> LagrangianOracle:
    return LagrangianOracle(problem, backend)


class FixedCoordinateOracle(Oracle):
    """View of ``base`` with some multipliers pinned to constants.

    The plane of each answer is restricted to the free coordinates; the
    pinned terms move into its constant.
    """

    def __init__(self, base: Oracle, fixed: dict):
        self.base = base
        self.fixed = {i: rational(v) for i, v in fixed.items()}
        self.free = [i for i in range(base.m) if i not in self.fixed]
        self.box = tuple(base.box[i] for i in self.free)
        self.target = tuple(base.target[i] for i in self.free)

    def expand(self, lam) -> tuple:
        full = [None] * self.base.m
        for i, v in self.fixed.items():
            full[i] = v
        for i, l in zip(self.free, lam):
            full[i] = l
        return tuple(full)

    def solve(self, lam) -> LagrangianResult:
        res = self.base(self.expand(lam))
        pl = res.plane
        const = pl.constant + sum(pl.coeffs[i] * v for i, v in self.fixed.items())
        plane = Hyperplane(const, tuple(pl.coeffs[i] for i in self.free), pl.source)
        return LagrangianResult(res.minimizer, res.value, res.f_value, res.h_value, plane, res.slack)


# ---------------------------------------------------------------------------
# shortest paths

class ShortestPathOracle(Oracle):
    """Minimum of length + lam . (delay - budget) over simple s-t paths.

    Labelings are 0/1 indicator vectors over ``edges`` in input order.
    """

    def __init__(self, edges, source, target, box, budget=None):
        self.edges = [(u, v, rational(length), rational_vector(delays))
                      for u, v, length, delays in edges]
        self.source, self.sink = source, target
        self.box = tuple(rational_vector(iv) for iv in box)
        m = len(self.box)
        if any(len(d) != m for _, _, _, d in self.edges):
            raise ConfigurationError("every edge needs one delay per multiplier")
        self.target = (Fraction(0),) * m if budget is None else rational_vector(budget)
        self.out = {}
        for k, (u, v, _, _) in enumerate(self.edges):
            self.out.setdefault(u, []).append(k)
        for u, v, length, delays in self.edges:
            for corner in itertools.product(*self.box):
                if length + sum(l * d for l, d in zip(corner, delays)) < 0:
                    raise ConfigurationError(
                        f"edge ({u}, {v}) gets a negative weight at lam = {tuple(map(str, corner))}")
        if not self._reachable():
            raise InfeasibleError(f"no path from {source!r} to {target!r}")

    def _reachable(self):
        seen, stack = {self.source}, [self.source]
        while stack:
            u = stack.pop()
            for k in self.out.get(u, ()):
                v = self.edges[k][1]
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return self.sink in seen

    def solve(self, lam) -> LagrangianResult:
        weights = [length + sum(l * d for l, d in zip(lam, delays))
                   for _, _, length, delays in self.edges]
        order = {}
        dist = {self.source: Fraction(0)}
        pred = {}
        done = set()
        heap = [(Fraction(0), 0, self.source)]
        counter = itertools.count(1)
        while heap:
            d, _, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            if u == self.sink:
                break
            for k in self.out.get(u, ()):
                v = self.edges[k][1]
                nd = d + weights[k]
                if v not in done and (v not in dist or nd < dist[v]):
                    dist[v] = nd
                    pred[v] = k
                    heapq.heappush(heap, (nd, order.setdefault(v, next(counter)), v))
        if self.sink not in done:
            raise InfeasibleError("sink not reachable")
        x = [0] * len(self.edges)
        node = self.sink
        while node != self.source:
            k = pred[node]
            x[k] = 1
            node = self.edges[k][0]
        x = tuple(x)
        return self.result_for(x, lam)

    def result_for(self, x, lam) -> LagrangianResult:
        fx = sum((e[2] for e, xi in zip(self.edges, x) if xi), Fraction(0))
        m = len(self.box)
        hx = tuple(sum((e[3][i] for e, xi in zip(self.edges, x) if xi), Fraction(0)) for i in range(m))
        coeffs = tuple(h - b for h, b in zip(hx, self.target))
        plane = Hyperplane(fx, coeffs, x)
        return LagrangianResult(x, plane(lam), fx, hx, plane)

    def all_paths(self):
        """Every simple s-t path as an indicator tuple (for verification)."""
        paths = []

        def walk(u, visited, used):
            if u == self.sink:
                x = [0] * len(self.edges)
                for k in used:
                    x[k] = 1
                paths.append(tuple(x))
                return
            for k in self.out.get(u, ()):
                v = self.edges[k][1]
                if v not in visited:
                    walk(v, visited | {v}, used + [k])

        walk(self.source, {self.source}, [])
        return paths


def shortest_path_oracle(edges, source, target, box, budget=None) -> ShortestPathOracle:
    return ShortestPathOracle(edges, source, target, box, budget)


# ---------------------------------------------------------------------------
# project selection

def project_selection_energy(profits, prerequisites) -> PairwiseEnergy:
    """Energy whose minimizers are maximum-profit prerequisite-closed sets.

    ``prerequisites`` holds pairs (i, j) meaning "i requires j".  Selecting
    i without j costs a finite penalty larger than any attainable profit.
    """
    profits = rational_vector(profits)
    penalty = 1 + sum(abs(q) for q in profits)
    tables = {}
    for i, j in prerequisites:
        if i == j:
            raise ValueError(f"project {i} cannot require itself")
        u, v = min(i, j), max(i, j)
        t = tables.setdefault((u, v), [Fraction(0)] * 4)
        # table index 2*x_u + x_v; the violating state has x_i = 1, x_j = 0
        t[2 if i == u else 1] = penalty
    unary = tuple((Fraction(0), -q) for q in profits)
    edges = tuple(Edge(u, v, tuple(t)) for (u, v), t in sorted(tables.items()))
    return PairwiseEnergy(len(profits), unary, edges)


def group_constraint(members, n, name="group") -> ConstraintSpec:
    """Number of selected items among ``members``."""
    members = set(members)
    return ConstraintSpec(tuple(1 if i in members else 0 for i in range(n)), 0, 0, name)
