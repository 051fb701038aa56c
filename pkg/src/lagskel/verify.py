"""Independent checks used by the test-suite and ``lagskel brute-check``.

Nothing here reuses the incremental skeleton or the search loop: the
envelope skeleton is rebuilt from scratch by vertex enumeration, and
dual values come from exhaustive enumeration.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd
from typing import Optional

import numpy as np

from .energy import (ConstraintSpec, Edge, LagrangianProblem, PairwiseEnergy,
                     rational_vector, submodularity_lambda_bound)
from .oracles import LabelingTable, make_lagrangian_oracle
from .skeleton import Hyperplane
from .solvers import (SlackBounds, dual_max, dual_search, retarget,
                      slack_wrap)


# ---------------------------------------------------------------------------
# exact linear algebra

def rank(rows):
    rows = [list(r) for r in rows]
    rk = 0
    width = len(rows[0]) if rows else 0
    for col in range(width):
        piv = next((r for r in range(rk, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        for r in range(len(rows)):
            if r != rk and rows[r][col] != 0:
                factor = rows[r][col] / rows[rk][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[rk])]
        rk += 1
    return rk


# ---------------------------------------------------------------------------
# from-scratch skeleton

def _det(mat):
    """Integer determinant by fraction-free elimination."""
    a = [list(r) for r in mat]
    k = len(a)
    sign, prev = 1, 1
    for c in range(k - 1):
        if a[c][c] == 0:
            piv = next((r for r in range(c + 1, k) if a[r][c] != 0), None)
            if piv is None:
                return 0
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        for r in range(c + 1, k):
            for j in range(c + 1, k):
                a[r][j] = (a[r][j] * a[c][c] - a[r][c] * a[c][j]) // prev
        prev = a[c][c]
    return sign * a[k - 1][k - 1]


def _integer_row(row, rhs):
    d = 1
    for x in row + (rhs,):
        d = d * x.denominator // gcd(d, x.denominator)
    return tuple(int(x * d) for x in row), int(rhs * d)


def reference_skeleton(box, planes):
    """Vertices, segment edges and ray vertices of {lam in box, z <= min planes}.

    Every constraint is written as row . (lam, z) <= rhs.  Vertices are the
    feasible solutions of m + 1 linearly independent tight constraints; two
    vertices share an edge when their common tight set has rank m.
    """
    box = tuple(rational_vector(iv) for iv in box)
    m = len(box)
    cons = []
    for i, (lo, hi) in enumerate(box):
        e = [Fraction(0)] * (m + 1)
        e[i] = Fraction(1)
        cons.append(_integer_row(tuple(e), hi))
        cons.append(_integer_row(tuple(-x for x in e), -lo))
    for pl in planes:
        # z - coeffs . lam <= constant
        cons.append(_integer_row(tuple(-c for c in pl.coeffs) + (Fraction(1),), pl.constant))

    found = {}
    box_rows = 2 * m
    for combo in itertools.combinations(range(len(cons)), m + 1):
        if all(k < box_rows for k in combo):
            continue
        rows = [cons[k][0] for k in combo]
        rhs = [cons[k][1] for k in combo]
        den = _det(rows)
        if den == 0:
            continue
        nums = []
        for j in range(m + 1):
            nums.append(_det([r[:j] + (b,) + r[j + 1:] for r, b in zip(rows, rhs)]))
        if den < 0:
            den, nums = -den, [-x for x in nums]
        g = 0
        for x in nums:
            g = gcd(g, x)
        g = gcd(g, den)
        key = (tuple(x // g for x in nums), den // g)
        if key in found:
            continue
        nums, den = key
        tight, ok = [], True
        for k, (row, b) in enumerate(cons):
            s = sum(a * x for a, x in zip(row, nums))
            if s > b * den:
                ok = False
                break
            if s == b * den:
                tight.append(k)
        found[key] = frozenset(tight) if ok else None

    vertices = {}
    for (nums, den), tight in found.items():
        if tight is not None:
            vertices[tuple(Fraction(x, den) for x in nums)] = tight

    edges = set()
    pts = sorted(vertices)
    for p, q in itertools.combinations(pts, 2):
        common = vertices[p] & vertices[q]
        if len(common) >= m and rank([[Fraction(x) for x in cons[k][0]] for k in common]) == m:
            edges.add(frozenset((p, q)))
    corners = set(itertools.product(*box))
    rays = {p for p in pts if p[:-1] in corners}
    return set(pts), edges, rays


def skeleton_matches_reference(sk) -> bool:
    return sk.point_sets() == reference_skeleton(sk.box, list(sk.planes.values()))


def is_proper_convex_combination(point, others) -> bool:
    """True if ``point`` lies strictly inside a segment between two of ``others``."""
    for u, w in itertools.combinations(others, 2):
        d = tuple(b - a for a, b in zip(u, w))
        k = next((i for i, x in enumerate(d) if x != 0), None)
        if k is None:
            continue
        t = (point[k] - u[k]) / d[k]
        if 0 < t < 1 and all(u[i] + t * d[i] == point[i] for i in range(len(d))):
            return True
    return False


# ---------------------------------------------------------------------------
# random instances

def _rand_rational(rng, lo, hi, denominators=(1, 2, 3, 4)):
    d = rng.choice(denominators)
    return Fraction(rng.randint(lo * d, hi * d), d)


def random_submodular_energy(rng, n, edge_prob=0.35, scale=4):
    unary = tuple((_rand_rational(rng, -scale, scale), _rand_rational(rng, -scale, scale))
                  for _ in range(n))
    edges = []
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < edge_prob:
            a, d = _rand_rational(rng, -scale, scale), _rand_rational(rng, -scale, scale)
            b = _rand_rational(rng, -scale, scale)
            margin = _rand_rational(rng, 0, scale)
            c = a + d - b + margin
            edges.append(Edge(u, v, (a, b, c, d)))
    return PairwiseEnergy(n, unary, tuple(edges), _rand_rational(rng, -2, 2))


def random_problem(rng, n=None, m=None, box_radius=4, edge_constraint_prob=0.3):
    """Random submodular problem whose box also suits the mincut oracle."""
    n = rng.randint(3, 14) if n is None else n
    m = rng.choice((1, 2)) if m is None else m
    f = random_submodular_energy(rng, n)
    constraints = []
    for i in range(m):
        coeffs = tuple(rng.choice((0, 0, 1, 1, 1, 2, -1)) for _ in range(n))
        w = Fraction(0)
        # at most one disagreement dimension, so per-dimension bounds suffice
        if f.edges and not any(h.edge_coeff for h in constraints) and rng.random() < edge_constraint_prob:
            w = Fraction(rng.choice((1, 1, 2)))
        if not any(coeffs) and w == 0:
            coeffs = (1,) + coeffs[1:]
        constraints.append(ConstraintSpec(coeffs, w, 0, f"h{i + 1}"))
    box = [(-Fraction(box_radius), Fraction(box_radius)) for _ in range(m)]
    probe = LagrangianProblem(f, constraints, box)
    for i, k in enumerate(submodularity_lambda_bound(probe)):
        if k is not None and k > box[i][0]:
            box[i] = (k, k + 2 * box_radius)
    return LagrangianProblem(f, constraints, box)


def random_planes(rng, m, count, scale=6):
    planes = []
    for _ in range(count):
        coeffs = tuple(Fraction(rng.randint(-scale, scale), rng.choice((1, 2))) for _ in range(m))
        planes.append(Hyperplane(Fraction(rng.randint(-scale, scale), rng.choice((1, 2, 3))), coeffs))
    return planes


# ---------------------------------------------------------------------------
# exhaustive references

class Exhaustive:
    """Enumeration-based answers for a fixed problem."""

    def __init__(self, problem: LagrangianProblem):
        self.problem = problem
        self.table = LabelingTable(problem.f, problem.constraints)

    def constrained_min(self, target) -> Optional[Fraction]:
        """min f(x) subject to H(x) = target, or None if infeasible."""
        t = self._scaled(target)
        if t is None:
            return None
        mask = np.all(self.table.h_num == np.array(t, dtype=self.table.h_num.dtype), axis=1)
        return self._masked_min(mask)

    def box_constrained_min(self, lower, upper) -> Optional[Fraction]:
        s = self.table.scale
        h = self.table.h_num
        mask = np.ones(len(self.table), dtype=bool)
        for i, (lo, hi) in enumerate(zip(lower, upper)):
            col = h[:, i]
            # col / s >= lo  <=>  col >= lo * s (s > 0); compare as Fractions only on demand
            lo_s, hi_s = lo * s, hi * s
            mask &= np.array([lo_s <= int(v) <= hi_s for v in col]) if col.dtype == object else \
                (col >= _ceil(lo_s)) & (col <= _floor(hi_s))
        return self._masked_min(mask)

    def _scaled(self, target):
        out = []
        for t in rational_vector(target):
            v = t * self.table.scale
            if v.denominator != 1:
                return None
            out.append(int(v))
        return out

    def _masked_min(self, mask):
        if not mask.any():
            return None
        vals = self.table.f_num[mask]
        return Fraction(int(vals.min()), self.table.scale)

    def dual_value(self, lam):
        return self.table.minimize(lam, self.problem.b)[1]

    def achievable_targets(self):
        rows = {tuple(int(v) for v in r) for r in self.table.h_num}
        s = self.table.scale
        return sorted(tuple(Fraction(v, s) for v in r) for r in rows)


def grid_dual_values(table: LabelingTable, lambdas, target, block=64):
    """Exact min_x L(x, lam) for many multipliers at once.

    Everything is scaled to one integer denominator; blocks of multipliers
    are handled by one integer matrix product each.
    """
    lambdas = [rational_vector(l) for l in lambdas]
    target = rational_vector(target)
    q = 1
    for lam in lambdas:
        for l in lam:
            q = q * l.denominator // gcd(q, l.denominator)
    d = 1
    for b in target:
        d = d * b.denominator // gcd(d, b.denominator)
    s = table.scale
    shifted = [table.h_num[:, i].astype(object) * d - int(b * s * d) for i, b in enumerate(target)]
    bound = int(abs(table.f_num).max()) * q * d if len(table) else 0
    lam_max = max((abs(int(l * q)) for lam in lambdas for l in lam), default=0)
    bound += sum(int(abs(col).max()) for col in shifted) * lam_max
    dtype = np.int64 if bound < 2 ** 62 else object
    base = table.f_num.astype(dtype) * (q * d)
    cols = np.stack([c.astype(dtype) for c in shifted], axis=1) if shifted else None
    out = []
    den = s * q * d
    for start in range(0, len(lambdas), block):
        chunk = lambdas[start:start + block]
        p = np.array([[int(l * q) for l in lam] for lam in chunk], dtype=dtype).T
        vals = base[:, None] + cols.dot(p)
        mins = vals.min(axis=0)
        out.extend(Fraction(int(v), den) for v in mins)
    return out


def _ceil(q):
    return -((-q.numerator) // q.denominator)


def _floor(q):
    return q.numerator // q.denominator


def lambda_grid(box, steps=20):
    axes = [[lo + (hi - lo) * k / steps for k in range(steps + 1)] for lo, hi in box]
    return list(itertools.product(*axes))


# ---------------------------------------------------------------------------
# property checks; each returns (ok, detail)

@dataclass
class CheckOutcome:
    name: str
    ok: bool
    detail: str = ""


def check_set_optimality(problem, found, ex: Exhaustive):
    for e in found:
        best = ex.constrained_min(e.h_value)
        if best != e.f_value:
            return CheckOutcome("set_optimality", False, f"{e.labeling}: f={e.f_value}, best={best}")
    return CheckOutcome("set_optimality", True)


def check_completeness(problem, found, ex: Exhaustive, steps=20):
    """min over the set of L(x, lam) equals the exhaustive dual on a (steps+1)^m grid."""
    planes = [(e.f_value, tuple(h - b for h, b in zip(e.h_value, problem.b))) for e in found]
    grid = lambda_grid(problem.box, steps)
    truth = grid_dual_values(ex.table, grid, problem.b)
    for lam, t in zip(grid, truth):
        mine = min(c + sum(a * l for a, l in zip(co, lam)) for c, co in planes)
        if mine != t:
            return CheckOutcome("completeness", False, f"lam={lam}: set={mine}, exhaustive={t}")
    return CheckOutcome("completeness", True)


def check_vertices_exact(problem, sk, ex: Exhaustive):
    for p in sk.vertices:
        if ex.dual_value(p[:-1]) != p[-1]:
            return CheckOutcome("vertices", False, f"vertex {p} is not on the dual")
    return CheckOutcome("vertices", True)


def check_skeleton(sk):
    ok = skeleton_matches_reference(sk)
    return CheckOutcome("skeleton", ok, "" if ok else "incremental skeleton differs from reference")


def check_query_count(report):
    n = report.num_vertices + report.num_minimizers
    if report.general_position:
        ok = report.oracle_calls == n
    else:
        ok = report.oracle_calls <= n + report.degeneracies
    return CheckOutcome("query_count", ok,
                        f"calls={report.oracle_calls} |V|={report.num_vertices} "
                        f"|X|={report.num_minimizers} degenerate={report.degeneracies}")


def vertex_ceiling(num_minimizers, m):
    return 2 ** m * comb(num_minimizers + 2 * m, m + 1)


def check_weak_duality(problem, oracle, ex: Exhaustive, targets):
    for b in targets:
        res = dual_max(retarget(oracle, b))
        best = ex.constrained_min(b)
        if best is not None and res.value > best:
            return CheckOutcome("weak_duality", False, f"b={b}: dual {res.value} > primal {best}")
    return CheckOutcome("weak_duality", True)


def run_all_checks(problem: LagrangianProblem, backend="brute", rng=None, targets=None):
    """Every property on one problem; returns a list of CheckOutcome."""
    rng = rng or random.Random(0)
    oracle = make_lagrangian_oracle(problem, backend)
    ex = Exhaustive(problem)
    out = []
    cuts_ok = [True]

    def on_cut(sk, plane, cut):
        if cuts_ok[0] and not skeleton_matches_reference(sk):
            cuts_ok[0] = False

    res = dual_search(oracle, on_cut=on_cut)
    found, sk, report = res
    out.append(check_set_optimality(problem, found, ex))
    out.append(check_completeness(problem, found, ex))
    out.append(check_vertices_exact(problem, sk, ex))
    out.append(CheckOutcome("skeleton", cuts_ok[0] and skeleton_matches_reference(sk)))
    out.append(check_query_count(report))
    if targets is None:
        reachable = ex.achievable_targets()
        targets = rng.sample(reachable, min(3, len(reachable)))
    out.append(check_weak_duality(problem, oracle, ex, targets))
    return out


def check_slack(problem, oracle, ex: Exhaustive, b_hat, bounds: SlackBounds):
    res = dual_max(slack_wrap(oracle, b_hat, bounds))
    r = res.result
    b_star = tuple(h + y for h, y in zip(r.h_value, r.slack))
    lower = tuple(b - k for b, k in zip(b_star, bounds.width))
    best = ex.box_constrained_min(lower, b_star)
    ok = best == r.f_value
    return CheckOutcome("slack", ok, f"b*={b_star}: f(x*)={r.f_value}, best={best}")
