"""Binary pairwise energies, constraint functions and the Lagrangian.

Every number here is a :class:`fractions.Fraction`; there is no tolerance
anywhere in the package, so equality tests on energies are exact.

An energy is

    f(x) = constant + sum_u phi_u(x_u) + sum_(u,v) phi_uv(x_u, x_v)

and each constraint is

    h(x) = sum_i a_i x_i + w * sum_(u,v) |x_u - x_v| + c

where the disagreement sum runs over the edges of the energy's graph.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import DimensionError, DomainError, UnsupportedDirectionError

Rational = Fraction
Labeling = tuple  # tuple[int, ...] of 0/1
Box = tuple  # tuple[tuple[Fraction, Fraction], ...]


def rational(value) -> Fraction:
    """Convert ``value`` to a Fraction without any rounding.

    Strings may be integers, decimals ("0.3" -> 3/10) or "p/q".
    Floats are refused because they are already rounded.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            raise ValueError(f"not a rational number: {value!r}") from None
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is inexact; pass it as a decimal string")
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


def rational_vector(values) -> tuple:
    return tuple(rational(v) for v in values)


def format_rational(q: Fraction) -> str:
    return str(q)


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    table: tuple  # (phi(0,0), phi(0,1), phi(1,0), phi(1,1))

    def __post_init__(self):
        if len(self.table) != 4:
            raise ValueError("edge table needs four entries")
        object.__setattr__(self, "table", rational_vector(self.table))

    def value(self, xu: int, xv: int) -> Fraction:
        return self.table[2 * xu + xv]

    @property
    def submodularity_margin(self) -> Fraction:
        """phi(0,1) + phi(1,0) - phi(0,0) - phi(1,1); nonnegative iff submodular."""
        a, b, c, d = self.table
        return b + c - a - d


@dataclass(frozen=True)
class PairwiseEnergy:
    n: int
    unary: tuple  # tuple of (phi(0), phi(1))
    edges: tuple = ()
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        if len(self.unary) != self.n:
            raise DimensionError(f"expected {self.n} unary pairs, got {len(self.unary)}")
        unary = tuple(rational_vector(pair) for pair in self.unary)
        if any(len(pair) != 2 for pair in unary):
            raise ValueError("unary terms are (phi(0), phi(1)) pairs")
        edges = tuple(e if isinstance(e, Edge) else Edge(e[0], e[1], e[2]) for e in self.edges)
        seen = set()
        for e in edges:
            if e.u == e.v:
                raise ValueError(f"self-loop on node {e.u}")
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise ValueError(f"edge ({e.u}, {e.v}) references a missing node")
            key = frozenset((e.u, e.v))
            if key in seen:
                raise ValueError(f"duplicate edge ({e.u}, {e.v})")
            seen.add(key)
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "constant", rational(self.constant))


@dataclass(frozen=True)
class ConstraintSpec:
    node_coeffs: tuple
    edge_coeff: Fraction = Fraction(0)
    offset: Fraction = Fraction(0)
    name: str = "h"

    def __post_init__(self):
        coeffs = rational_vector(self.node_coeffs)
        edge_coeff = rational(self.edge_coeff)
        if edge_coeff == 0 and not any(coeffs):
            raise ValueError(f"constraint {self.name!r} is identically constant")
        object.__setattr__(self, "node_coeffs", coeffs)
        object.__setattr__(self, "edge_coeff", edge_coeff)
        object.__setattr__(self, "offset", rational(self.offset))


@dataclass(frozen=True)
class LagrangianProblem:
    f: PairwiseEnergy
    constraints: tuple
    box: tuple
    b: tuple = field(default=None)

    def __post_init__(self):
        constraints = tuple(self.constraints)
        m = len(constraints)
        if m < 1:
            raise ValueError("at least one constraint is required")
        for h in constraints:
            if len(h.node_coeffs) != self.f.n:
                raise DimensionError(
                    f"constraint {h.name!r} has {len(h.node_coeffs)} coefficients for {self.f.n} nodes")
        b = (Fraction(0),) * m if self.b is None else rational_vector(self.b)
        if len(b) != m:
            raise DimensionError(f"target has length {len(b)}, expected {m}")
        box = tuple(rational_vector(iv) for iv in self.box)
        if len(box) != m:
            raise DimensionError(f"box has {len(box)} intervals, expected {m}")
        for i, (lo, hi) in enumerate(box):
            if not lo < hi:
                raise ValueError(f"box interval {i} is empty or degenerate: [{lo}, {hi}]")
        object.__setattr__(self, "constraints", constraints)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "box", box)

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def n(self) -> int:
        return self.f.n

    def with_target(self, b) -> "LagrangianProblem":
        return replace(self, b=rational_vector(b))

    def with_box(self, box) -> "LagrangianProblem":
        return replace(self, box=box)


def _check_labeling(x, n):
    if len(x) != n:
        raise DimensionError(f"labeling has length {len(x)}, expected {n}")


def evaluate_energy(f: PairwiseEnergy, x: Sequence[int]) -> Fraction:
    _check_labeling(x, f.n)
    total = f.constant
    for phi, xu in zip(f.unary, x):
        total += phi[xu]
    for e in f.edges:
        total += e.table[2 * x[e.u] + x[e.v]]
    return total


def disagreements(f: PairwiseEnergy, x: Sequence[int]) -> int:
    return sum(1 for e in f.edges if x[e.u] != x[e.v])


def constraint_value(h: ConstraintSpec, f: PairwiseEnergy, x: Sequence[int]) -> Fraction:
    total = h.offset
    for a, xi in zip(h.node_coeffs, x):
        if xi:
            total += a
    if h.edge_coeff:
        total += h.edge_coeff * disagreements(f, x)
    return total


def evaluate_constraints(problem: LagrangianProblem, x: Sequence[int]) -> tuple:
    """H(x) as a tuple with one entry per constraint."""
    _check_labeling(x, problem.n)
    return tuple(constraint_value(h, problem.f, x) for h in problem.constraints)


def in_box(box, lam) -> bool:
    return all(lo <= l <= hi for (lo, hi), l in zip(box, lam))


def check_in_box(box, lam):
    if len(lam) != len(box):
        raise DimensionError(f"multiplier has length {len(lam)}, expected {len(box)}")
    if not in_box(box, lam):
        raise DomainError(f"multiplier {tuple(str(l) for l in lam)} lies outside the box")


def assemble_lagrangian(problem: LagrangianProblem, lam: Sequence) -> PairwiseEnergy:
    """Fold lam^T (H(x) - b) into a single pairwise energy equal to L(., lam)."""
    lam = rational_vector(lam)
    check_in_box(problem.box, lam)
    f = problem.f
    constant = f.constant
    shift = [Fraction(0)] * f.n
    edge_shift = Fraction(0)
    for l, h, b in zip(lam, problem.constraints, problem.b):
        if not l:
            continue
        constant += l * (h.offset - b)
        for i, a in enumerate(h.node_coeffs):
            if a:
                shift[i] += l * a
        edge_shift += l * h.edge_coeff
    unary = tuple((p0, p1 + s) for (p0, p1), s in zip(f.unary, shift))
    if edge_shift:
        edges = tuple(Edge(e.u, e.v, (e.table[0], e.table[1] + edge_shift,
                                      e.table[2] + edge_shift, e.table[3]))
                      for e in f.edges)
    else:
        edges = f.edges
    return PairwiseEnergy(f.n, unary, edges, constant)


def is_submodular(f: PairwiseEnergy) -> bool:
    return all(e.submodularity_margin >= 0 for e in f.edges)


def submodularity_lambda_bound(problem: LagrangianProblem) -> tuple:
    """Per-dimension lower bound K_i on lam_i keeping L(., lam) submodular.

    Only dimensions with a positive disagreement weight get a bound; the
    others (and graphs without edges) get ``None``.  Each bound is computed
    with the other multipliers at zero.
    """
    bounds = []
    for h in problem.constraints:
        w = h.edge_coeff
        if w < 0:
            raise UnsupportedDirectionError(
                f"constraint {h.name!r} has negative disagreement weight {w}")
        if w == 0 or not problem.f.edges:
            bounds.append(None)
            continue
        bounds.append(max(-e.submodularity_margin / (2 * w) for e in problem.f.edges))
    return tuple(bounds)


def minimum_margin_over_box(problem: LagrangianProblem, box: Optional[Iterable] = None) -> Fraction:
    """Smallest edge submodularity margin of L(., lam) over every lam in the box.

    The margin of each edge is affine in lam, so the minimum sits at the
    box's lower corner for positive weights and upper corner for negative.
    """
    box = problem.box if box is None else box
    shift = Fraction(0)
    for h, (lo, hi) in zip(problem.constraints, box):
        w = h.edge_coeff
        shift += 2 * w * (lo if w > 0 else hi)
    if not problem.f.edges:
        return Fraction(0)
    return min(e.submodularity_margin for e in problem.f.edges) + shift
