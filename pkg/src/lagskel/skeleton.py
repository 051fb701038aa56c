"""Vertices and edges of the polyhedron under a lower envelope of planes.

For a set X of labelings the region

    {(lam, z) : lam in box, z <= min_{x in X} L(x, lam)}

is a polyhedron unbounded below.  Its 1-skeleton consists of the segments
on the upper surface (including those running along the box faces) and a
vertical downward ray at every box corner.  :class:`Skeleton` keeps that
graph and updates it when a new plane is cut in.

Vertices are identified by their exact coordinates ``(lam_1, ..., lam_m, z)``.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .energy import (LagrangianProblem, check_in_box, evaluate_constraints,
                     evaluate_energy, rational_vector)
from .errors import InvariantViolation, UnsupportedDimensionError
from .hull import conv_edge

MAX_DIM = 3


@dataclass(frozen=True)
class Hyperplane:
    """z = constant + sum_i coeffs[i] * lam_i."""
    constant: Fraction
    coeffs: tuple
    source: Optional[tuple] = field(default=None, compare=False)

    def __call__(self, lam) -> Fraction:
        z = self.constant
        for c, l in zip(self.coeffs, lam):
            if c:
                z += c * l
        return z

    @property
    def key(self):
        return (self.constant, self.coeffs)


def plane_of(problem: LagrangianProblem, x) -> Hyperplane:
    h = evaluate_constraints(problem, x)
    coeffs = tuple(hi - bi for hi, bi in zip(h, problem.b))
    return Hyperplane(evaluate_energy(problem.f, x), coeffs, tuple(x))


@dataclass
class SkeletonVertex:
    id: int
    point: tuple
    confirmed: bool = False

    @property
    def lam(self):
        return self.point[:-1]

    @property
    def z(self):
        return self.point[-1]


@dataclass
class CutReport:
    added: list = field(default_factory=list)     # V+ (new vertex points)
    removed: list = field(default_factory=list)   # V- (points strictly above)
    on_plane: list = field(default_factory=list)  # retained vertices lying on the plane

    @property
    def facet(self):
        return self.added + self.on_plane

    def __bool__(self):
        return bool(self.removed)


class Skeleton:
    """Mutable skeleton of an induced dual over a box.

    ``adjacency`` maps a vertex point to the points it shares a segment
    with; ``rays`` holds the vertices carrying a downward ray.
    """

    def __init__(self, box):
        self.box = tuple(rational_vector(iv) for iv in box)
        self.m = len(self.box)
        if not 1 <= self.m <= MAX_DIM:
            raise UnsupportedDimensionError(f"skeleton supports 1 <= m <= {MAX_DIM}, got {self.m}")
        self.vertices = {}
        self.adjacency = {}
        self.rays = set()
        self.planes = {}
        self._next_id = 0

    # -- bookkeeping ---------------------------------------------------
    def _add_vertex(self, point):
        v = self.vertices.get(point)
        if v is None:
            v = SkeletonVertex(self._next_id, point)
            self._next_id += 1
            self.vertices[point] = v
            self.adjacency[point] = set()
        return v

    def _add_edge(self, p, q):
        if p == q:
            return
        self.adjacency[p].add(q)
        self.adjacency[q].add(p)

    def _remove_vertex(self, point):
        for q in self.adjacency.pop(point):
            self.adjacency[q].discard(point)
        self.rays.discard(point)
        del self.vertices[point]

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, point):
        return point in self.vertices

    def edges(self):
        """Segment edges as a set of frozensets of endpoints."""
        out = set()
        for p, nbrs in self.adjacency.items():
            for q in nbrs:
                out.add(frozenset((p, q)))
        return out

    def point_sets(self):
        return set(self.vertices), self.edges(), set(self.rays)

    def stored_plane(self, plane: Hyperplane):
        return self.planes.get(plane.key)

    # -- geometry ------------------------------------------------------
    def envelope_value(self, lam) -> Fraction:
        lam = rational_vector(lam)
        check_in_box(self.box, lam)
        return min(p(lam) for p in self.planes.values())

    def above(self, plane: Hyperplane, seed=None):
        """Vertices strictly above ``plane``, found by BFS from ``seed``.

        The strictly-above part of the skeleton graph is connected because
        z - plane(lam) is linear and the envelope is concave.
        """
        if seed is None or seed not in self.vertices or not seed[-1] > plane(seed[:-1]):
            seed = next((p for p in self.vertices if p[-1] > plane(p[:-1])), None)
            if seed is None:
                return []
        found = {seed}
        order = [seed]
        queue = deque([seed])
        while queue:
            p = queue.popleft()
            for q in self.adjacency[p]:
                if q not in found and q[-1] > plane(q[:-1]):
                    found.add(q)
                    order.append(q)
                    queue.append(q)
        return order

    def cut(self, plane: Hyperplane, seed=None) -> CutReport:
        """Intersect the polyhedron with {z <= plane(lam)} and update the graph."""
        if plane.key in self.planes:
            return CutReport()
        removed = self.above(plane, seed)
        if not removed:
            return CutReport()
        gone = set(removed)

        new_points = {}
        truncated = []
        for u in removed:
            du = u[-1] - plane(u[:-1])
            for w in self.adjacency[u]:
                if w in gone:
                    continue
                dw = w[-1] - plane(w[:-1])
                if dw == 0:
                    continue
                t = du / (du - dw)
                x = tuple(a + t * (b - a) for a, b in zip(u, w))
                new_points[x] = True
                truncated.append((w, x))
            if u in self.rays:
                lam = u[:-1]
                x = lam + (plane(lam),)
                new_points[x] = True
                truncated.append((None, x))
        on_plane = [p for p in self.vertices if p not in gone and p[-1] == plane(p[:-1])]
        if len(new_points) + len(on_plane) <= self.m:
            raise InvariantViolation("plane lies below some vertex but crosses too few edges")

        for u in removed:
            self._remove_vertex(u)
        added = sorted(new_points)
        for x in added:
            self._add_vertex(x)
        for w, x in truncated:
            if w is None:
                self.rays.add(x)
            else:
                self._add_edge(w, x)
        for p, q in conv_edge(added + on_plane):
            self._add_edge(p, q)
        self.planes[plane.key] = plane
        return CutReport(added, removed, sorted(on_plane))

    # -- output --------------------------------------------------------
    def dump(self) -> str:
        """Line-oriented text: ``v <id> <lam..> <z> <0|1>`` then ``e <id> <id|RAY>``."""
        lines = []
        verts = sorted(self.vertices.values(), key=lambda v: v.id)
        for v in verts:
            coords = " ".join(str(c) for c in v.point)
            lines.append(f"v {v.id} {coords} {int(v.confirmed)}")
        pairs = []
        for e in self.edges():
            a, b = sorted(self.vertices[p].id for p in e)
            pairs.append((a, str(b)))
        for p in self.rays:
            pairs.append((self.vertices[p].id, "RAY"))
        pairs.sort(key=lambda t: (t[0], t[1] == "RAY", int(t[1]) if t[1] != "RAY" else 0))
        lines.extend(f"e {a} {b}" for a, b in pairs)
        return "\n".join(lines) + "\n"


def box_corners(box):
    return [tuple(c) for c in itertools.product(*box)]


def init_skeleton(box, first_plane: Hyperplane) -> Skeleton:
    """Skeleton of a single plane: the lifted box corners, box edges, corner rays."""
    sk = Skeleton(box)
    corners = box_corners(sk.box)
    lifted = {c: c + (first_plane(c),) for c in corners}
    for c in corners:
        sk._add_vertex(lifted[c])
        sk.rays.add(lifted[c])
    for c in corners:
        for i, (lo, hi) in enumerate(sk.box):
            if c[i] == lo:
                d = c[:i] + (hi,) + c[i + 1:]
                sk._add_edge(lifted[c], lifted[d])
    sk.planes[first_plane.key] = first_plane
    return sk


def load_dump(text: str):
    """Parse a skeleton dump back into (vertices, edges, rays) point sets."""
    by_id = {}
    edges, rays = set(), set()
    confirmed = {}
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            point = tuple(Fraction(s) for s in parts[2:-1])
            by_id[parts[1]] = point
            confirmed[point] = parts[-1] == "1"
        elif parts[0] == "e":
            if parts[2] == "RAY":
                rays.add(by_id[parts[1]])
            else:
                edges.add(frozenset((by_id[parts[1]], by_id[parts[2]])))
    return set(by_id.values()), edges, rays, confirmed
