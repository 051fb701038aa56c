"""Deliberately simple reference computations used only by the tests.

These loops read the raw tables and coefficient lists directly and share
no code with the package's evaluators or oracles.
"""
import itertools
from fractions import Fraction


def labelings(n):
    return list(itertools.product((0, 1), repeat=n))


def energy(f, x):
    total = Fraction(f.constant)
    for i in range(f.n):
        total += f.unary[i][x[i]]
    for e in f.edges:
        total += e.table[2 * x[e.u] + x[e.v]]
    return total


def constraint(h, f, x):
    total = Fraction(h.offset)
    for i in range(f.n):
        total += h.node_coeffs[i] * x[i]
    for e in f.edges:
        total += h.edge_coeff * abs(x[e.u] - x[e.v])
    return total


def lagrangian(problem, x, lam):
    val = energy(problem.f, x)
    for h, b, l in zip(problem.constraints, problem.b, lam):
        val += l * (constraint(h, problem.f, x) - b)
    return val


def dual(problem, lam):
    return min(lagrangian(problem, x, lam) for x in labelings(problem.n))


def minimum(f):
    return min(energy(f, x) for x in labelings(f.n))


def constrained_minimum(problem, target):
    vals = [energy(problem.f, x) for x in labelings(problem.n)
            if tuple(constraint(h, problem.f, x) for h in problem.constraints) == tuple(target)]
    return min(vals) if vals else None


def hull_edges_by_facets(points):
    """Hull edges of points in dimension <= 3 by exhaustive facet enumeration.

    A facet is a hyperplane through affinely independent input points with
    every point on one side.  Two points form an edge when they are the
    extreme points of the set shared by two different facets (or, in one
    and two dimensions, of a single facet).
    """
    pts = sorted(set(points))
    if len(pts) < 2:
        return set()
    dim = _affine_dim(pts)
    if dim == 0:
        return set()
    coords = _reduce(pts, dim)
    back = dict(zip(coords, pts))
    pts = sorted(coords)
    if dim == 1:
        return {frozenset((back[pts[0]], back[pts[-1]]))}
    facets = []
    for combo in itertools.combinations(pts, dim):
        normal = _normal(combo)
        if normal is None:
            continue
        off = sum(a * b for a, b in zip(normal, combo[0]))
        side = [sum(a * b for a, b in zip(normal, p)) - off for p in pts]
        if all(s <= 0 for s in side) or all(s >= 0 for s in side):
            on = frozenset(p for p, s in zip(pts, side) if s == 0)
            if on not in facets:
                facets.append(on)
    edges = set()
    if dim == 2:
        groups = facets
    else:
        groups = [a & b for a, b in itertools.combinations(facets, 2) if len(a & b) >= 2]
    for g in groups:
        g = sorted(g)
        edges.add(frozenset((back[g[0]], back[g[-1]])))
    return edges


def _affine_dim(pts):
    rows = [[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]
    return _rank(rows)


def _rank(rows):
    rows = [list(r) for r in rows]
    rank = 0
    width = len(rows[0]) if rows else 0
    for c in range(width):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                k = rows[r][c] / rows[rank][c]
                rows[r] = [x - k * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def _reduce(pts, dim):
    """Coordinates in a subset of axes on which the points keep full rank."""
    width = len(pts[0])
    for axes in itertools.combinations(range(width), dim):
        proj = [tuple(p[a] for a in axes) for p in pts]
        if len(set(proj)) == len(proj) and _affine_dim(sorted(set(proj))) == dim:
            return proj
    raise AssertionError("no injective projection found")


def _normal(combo):
    dim = len(combo[0])
    vecs = [[a - b for a, b in zip(p, combo[0])] for p in combo[1:]]
    if dim == 2:
        (dx, dy), = vecs
        n = (dy, -dx)
    else:
        (a1, a2, a3), (b1, b2, b3) = vecs
        n = (a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1)
    return None if not any(n) else n


def integer_tables(problem):
    """All labelings with f and H scaled by one common denominator.

    Returns (labelings, f, H, den) where f[k] / den and H[k, i] / den are
    the exact values for labelings[k].  Rows follow lexicographic order.
    """
    import math

    import numpy as np

    f = problem.f
    values = [Fraction(f.constant)]
    for a, b in f.unary:
        values += [Fraction(a), Fraction(b)]
    for e in f.edges:
        values += [Fraction(t) for t in e.table]
    for h in problem.constraints:
        values += [Fraction(a) for a in h.node_coeffs] + [Fraction(h.edge_coeff), Fraction(h.offset)]
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)

    def scaled(v):
        return int(Fraction(v) * den)

    n = f.n
    x = (np.arange(2 ** n)[:, None] >> np.arange(n - 1, -1, -1)) & 1
    fv = np.full(2 ** n, scaled(f.constant), dtype=np.int64)
    for i, (a, b) in enumerate(f.unary):
        fv += np.where(x[:, i] == 1, scaled(b), scaled(a))
    for e in f.edges:
        idx = 2 * x[:, e.u] + x[:, e.v]
        fv += np.array([scaled(t) for t in e.table], dtype=np.int64)[idx]
    hv = np.zeros((2 ** n, len(problem.constraints)), dtype=np.int64)
    for k, h in enumerate(problem.constraints):
        col = np.full(2 ** n, scaled(h.offset), dtype=np.int64)
        for i, a in enumerate(h.node_coeffs):
            col += scaled(a) * x[:, i]
        for e in f.edges:
            col += scaled(h.edge_coeff) * np.abs(x[:, e.u] - x[:, e.v])
        hv[:, k] = col
    return x, fv, hv, den
