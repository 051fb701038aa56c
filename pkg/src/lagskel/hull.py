"""Exact convex-hull edges in up to three affine dimensions.

Points are tuples of Fractions.  Orientation tests are plain determinants,
so collinear and coplanar cases are decided exactly.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import UnsupportedDimensionError


def _sub(p, q):
    return tuple(a - b for a, b in zip(p, q))


def _dot(p, q):
    return sum(a * b for a, b in zip(p, q))


def _cross3(p, q):
    return (p[1] * q[2] - p[2] * q[1],
            p[2] * q[0] - p[0] * q[2],
            p[0] * q[1] - p[1] * q[0])


def _orient2(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def affine_frame(points):
    """Return (rank, pivot columns) of the affine hull of ``points``.

    Projecting onto the pivot columns is injective on the affine hull,
    because a row-reduced basis of the direction space is the identity
    on those columns.
    """
    base = points[0]
    rows = [list(_sub(p, base)) for p in points[1:]]
    rows = [r for r in rows if any(r)]
    pivots = []
    width = len(base)
    r = 0
    for col in range(width):
        pivot = next((k for k in range(r, len(rows)) if rows[k][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][col]
        for k in range(len(rows)):
            if k != r and rows[k][col] != 0:
                factor = rows[k][col] / pv
                rows[k] = [x - factor * y for x, y in zip(rows[k], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return len(pivots), pivots


def polygon(points):
    """Counter-clockwise hull vertices of 2-D points, collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _orient2(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _orient2(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _cycle_edges(verts):
    if len(verts) < 2:
        return []
    if len(verts) == 2:
        return [(verts[0], verts[1])]
    return [(verts[k], verts[(k + 1) % len(verts)]) for k in range(len(verts))]


def _pivot(a, b, r, candidates):
    """Supporting plane through segment ab, rotated away from reference r.

    ``r`` lies on the current supporting plane, off the line ab; all
    candidates lie strictly inside the current plane, so their angles
    about ab are totally ordered and one pass finds the extreme one.
    """
    ab = _sub(b, a)
    ra = _sub(r, a)

    def normal(c):
        nv = _cross3(ab, _sub(c, a))
        if _dot(nv, ra) > 0:
            nv = tuple(-x for x in nv)
        return nv

    c = candidates[0]
    nv = normal(c)
    for p in candidates[1:]:
        if _dot(nv, _sub(p, a)) > 0:
            c = p
            nv = normal(c)
    return nv, _dot(nv, a)


def _plane_key(nv, d):
    lead = next(abs(x) for x in nv if x != 0)
    return tuple(x / lead for x in nv), d / lead


def _facet_polygon(nv, facet_pts):
    axis = next(k for k in range(3) if nv[k] != 0)
    keep = [k for k in range(3) if k != axis]
    lift = {}
    for p in facet_pts:
        lift[(p[keep[0]], p[keep[1]])] = p
    return [lift[q] for q in polygon(list(lift))]


def _hull3_edges(pts):
    # a vertical supporting plane from the xy-projection's hull
    lift = {}
    for p in pts:
        lift.setdefault((p[0], p[1]), []).append(p)
    ring = polygon(list(lift))
    q0, q1 = ring[0], ring[1]
    dx, dy = q1[0] - q0[0], q1[1] - q0[1]
    nv = (dy, -dx, Fraction(0))
    d = _dot(nv, (q0[0], q0[1], 0))
    on = [p for p in pts if _dot(nv, p) == d]
    if affine_frame(on)[0] >= 2:
        start = (nv, d)
    else:
        a, b = min(on), max(on)
        w = (Fraction(0), Fraction(0), Fraction(1))
        if b[0] == a[0] and b[1] == a[1]:
            w = (dx, dy, Fraction(0))
        r = tuple(x + y for x, y in zip(a, w))
        start = _pivot(a, b, r, [p for p in pts if _dot(nv, p) != d])

    edges = set()
    seen = {_plane_key(*start)}
    todo = [start]
    while todo:
        nv, d = todo.pop()
        facet = [p for p in pts if _dot(nv, p) == d]
        verts = _facet_polygon(nv, facet)
        outside = [p for p in pts if _dot(nv, p) != d]
        for k in range(len(verts)):
            a, b = verts[k], verts[(k + 1) % len(verts)]
            edges.add(frozenset((a, b)))
            r = verts[(k + 2) % len(verts)]
            nxt = _pivot(a, b, r, outside)
            key = _plane_key(*nxt)
            if key not in seen:
                seen.add(key)
                todo.append(nxt)
    return [tuple(sorted(e)) for e in edges]


def hull_edges(points):
    """Edges of the convex hull of ``points`` (affine dimension at most 3).

    Points that are proper convex combinations of others never appear as
    edge endpoints.  Returns a sorted list of ``(p, q)`` pairs with p < q.
    """
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) < 2:
        return []
    rank, pivots = affine_frame(pts)
    if rank > 3:
        raise UnsupportedDimensionError(f"hull of affine dimension {rank} is not supported")
    proj = {}
    for p in pts:
        proj[tuple(p[c] for c in pivots)] = p
    local = list(proj)
    if rank == 1:
        pairs = [(min(local), max(local))]
    elif rank == 2:
        pairs = _cycle_edges(polygon(local))
    else:
        pairs = _hull3_edges(local)
    out = set()
    for a, b in pairs:
        pa, pb = proj[a], proj[b]
        out.add((pa, pb) if pa < pb else (pb, pa))
    return sorted(out)


def conv_edge(points):
    """Edges of the hull of points lying on one skeleton hyperplane.

    Each point is ``(lam_1, ..., lam_m, z)``.  The multiplier space may have
    at most three dimensions.
    """
    pts = [tuple(p) for p in points]
    if not pts:
        return []
    m = len(pts[0]) - 1
    if m > 3:
        raise UnsupportedDimensionError(f"ConvEdge supports m <= 3, got m = {m}")
    return hull_edges(pts)
