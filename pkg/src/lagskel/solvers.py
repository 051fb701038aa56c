"""Parametric searches over the Lagrangian dual.

``dual_search`` recovers every labeling that minimizes L(., lam) for some
lam in the box, ``dual_max`` climbs to the dual maximum for one target,
and ``adapt_search`` combines both to handle soft constraints.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

from .energy import LagrangianProblem, rational, rational_vector
from .errors import BudgetExceeded, DimensionError, DomainError
from .oracles import (FixedCoordinateOracle, LagrangianResult, Oracle,
                      make_lagrangian_oracle)
from .skeleton import Hyperplane, Skeleton, box_corners, init_skeleton


# ---------------------------------------------------------------------------
# result containers

@dataclass(frozen=True)
class Entry:
    labeling: tuple
    f_value: Fraction
    h_value: tuple
    witness: tuple
    slack: Optional[tuple] = None

    @property
    def signature(self):
        return (self.f_value, self.h_value if self.slack is None
                else tuple(h + y for h, y in zip(self.h_value, self.slack)))


class CharacteristicSet:
    """Minimizers found so far, one per distinct (f, H) signature, in discovery order."""

    def __init__(self):
        self.entries = []
        self._by_signature = {}

    def add(self, result: LagrangianResult, witness) -> bool:
        entry = Entry(result.minimizer, result.f_value, result.h_value, tuple(witness), result.slack)
        if entry.signature in self._by_signature:
            return False
        self._by_signature[entry.signature] = entry
        self.entries.append(entry)
        return True

    def signatures(self) -> set:
        return set(self._by_signature)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass
class SearchReport:
    oracle_calls: int = 0
    num_vertices: int = 0
    num_minimizers: int = 0
    wall_time: float = 0.0
    degeneracies: int = 0
    complete: bool = True
    trace: list = field(default_factory=list)

    @property
    def general_position(self) -> bool:
        return self.degeneracies == 0


class SearchResult(NamedTuple):
    characteristic_set: CharacteristicSet
    skeleton: Skeleton
    report: SearchReport


class DualMaxResult(NamedTuple):
    lam: tuple
    minimizer: tuple
    value: Fraction
    report: SearchReport
    result: LagrangianResult
    skeleton: Skeleton


# ---------------------------------------------------------------------------
# oracle adaptors

class RetargetedOracle(Oracle):
    """The same minimizers measured against another target vector."""

    def __init__(self, base: Oracle, target):
        self.base = base
        self.box = base.box
        self.target = rational_vector(target)
        if len(self.target) != base.m:
            raise DimensionError(f"target has length {len(self.target)}, expected {base.m}")
        self.shift = tuple(old - new for old, new in zip(base.target, self.target))

    def solve(self, lam):
        r = self.base(lam)
        pl = r.plane
        coeffs = tuple(c + s for c, s in zip(pl.coeffs, self.shift))
        plane = Hyperplane(pl.constant, coeffs, pl.source)
        return LagrangianResult(r.minimizer, plane(lam), r.f_value, r.h_value, plane, r.slack)


def retarget(oracle: Oracle, target) -> Oracle:
    return RetargetedOracle(oracle, target)


@dataclass(frozen=True)
class SlackBounds:
    """Allowed gap below (``minus``) and above (``plus``) the centre target."""
    minus: tuple
    plus: tuple

    def __post_init__(self):
        minus, plus = rational_vector(self.minus), rational_vector(self.plus)
        if len(minus) != len(plus):
            raise DimensionError("slack bounds need equal lengths")
        if any(k < 0 for k in minus + plus):
            raise ValueError("slack bounds must be nonnegative")
        object.__setattr__(self, "minus", minus)
        object.__setattr__(self, "plus", plus)

    @property
    def width(self) -> tuple:
        return tuple(a + b for a, b in zip(self.minus, self.plus))

    def upper(self, b_hat) -> tuple:
        return tuple(b + k for b, k in zip(rational_vector(b_hat), self.plus))

    @classmethod
    def relative(cls, b_hat, fraction):
        """Symmetric gap of ``fraction * |b_hat_i|`` on every dimension."""
        fraction = rational(fraction)
        gap = tuple(abs(b) * fraction for b in rational_vector(b_hat))
        return cls(gap, gap)


class SlackOracle(Oracle):
    """Oracle for min_{x, 0<=y<=k} f(x) + lam . (H(x) + y - upper).

    The slack minimizer is y_i = k_i for lam_i < 0 and 0 otherwise.
    """

    def __init__(self, base: Oracle, b_hat, bounds: SlackBounds):
        self.base = base
        self.box = base.box
        self.bounds = bounds
        self.width = bounds.width
        self.target = bounds.upper(b_hat)
        if len(self.target) != base.m or len(self.width) != base.m:
            raise DimensionError("slack bounds and target must match the oracle dimension")

    def violation(self, result) -> Fraction:
        total = Fraction(0)
        for h, t, k in zip(result.h_value, self.target, self.width):
            total += max(h - t, t - k - h, Fraction(0))
        return total

    def slack_for(self, lam) -> tuple:
        return tuple(k if l < 0 else Fraction(0) for l, k in zip(lam, self.width))

    def solve(self, lam):
        r = self.base(lam)
        y = self.slack_for(lam)
        coeffs = tuple(h + yi - t for h, yi, t in zip(r.h_value, y, self.target))
        plane = Hyperplane(r.f_value, coeffs, r.minimizer)
        return LagrangianResult(r.minimizer, plane(lam), r.f_value, r.h_value, plane, y)


def slack_wrap(oracle: Oracle, b_hat, bounds: SlackBounds) -> SlackOracle:
    return SlackOracle(oracle, b_hat, bounds)


# ---------------------------------------------------------------------------
# searches

def _resolve_box(oracle: Oracle, box):
    if box is None:
        return oracle.box
    box = tuple(rational_vector(iv) for iv in box)
    if len(box) != oracle.m:
        raise DimensionError(f"box has {len(box)} intervals, oracle expects {oracle.m}")
    for (lo, hi), (olo, ohi) in zip(box, oracle.box):
        if not (olo <= lo < hi <= ohi):
            raise DomainError("search box must be a full-dimensional part of the oracle domain")
    return box


class _Counter:
    def __init__(self, oracle, limit):
        self.oracle = oracle
        self.limit = limit
        self.calls = 0

    def __call__(self, lam):
        if self.limit is not None and self.calls >= self.limit:
            raise BudgetExceeded(f"oracle budget of {self.limit} calls exhausted")
        self.calls += 1
        return self.oracle(lam)


def dual_search(oracle: Oracle, box=None, *, max_oracle_calls: Optional[int] = None,
                rng=None, on_cut: Optional[Callable] = None) -> SearchResult:
    """Compute every minimizer of L(., lam) over lam in ``box``.

    Vertices are processed first-in first-out; passing ``rng`` (anything
    with ``randrange``) picks the next pending vertex at random instead.
    ``on_cut(skeleton, plane, report)`` is called after every cut.  When
    the budget runs out, :class:`BudgetExceeded` carries the partial
    :class:`SearchResult` in ``partial``.
    """
    started = time.perf_counter()
    box = _resolve_box(oracle, box)
    call = _Counter(oracle, max_oracle_calls)
    found = CharacteristicSet()
    report = SearchReport()

    corners = box_corners(box)
    first = call(corners[0])
    found.add(first, corners[0])
    sk = init_skeleton(box, first.plane)
    pending = deque(sk.vertices[c + (first.plane(c),)].point for c in corners)

    def finish(complete):
        report.oracle_calls = call.calls
        report.num_vertices = len(sk)
        report.num_minimizers = len(found)
        report.complete = complete
        report.wall_time = time.perf_counter() - started
        return SearchResult(found, sk, report)

    try:
        while pending:
            if rng is None:
                point = pending.popleft()
            else:
                k = rng.randrange(len(pending))
                pending[k], pending[-1] = pending[-1], pending[k]
                point = pending.pop()
            if point not in sk:
                continue
            lam = point[:-1]
            res = call(lam)
            if res.plane(lam) < point[-1]:
                found.add(res, lam)
                cut = sk.cut(res.plane, seed=point)
                report.degeneracies += len(cut.on_plane)
                pending.extend(cut.added)
                if on_cut is not None:
                    on_cut(sk, res.plane, cut)
            else:
                sk.vertices[point].confirmed = True
    except BudgetExceeded as exc:
        exc.partial = finish(False)
        raise
    return finish(True)


def _preference(oracle: Oracle, result: LagrangianResult):
    gap = oracle.violation(result)
    return (gap != 0, gap, result.f_value, result.minimizer)


def dual_max(oracle: Oracle, box=None, *, max_oracle_calls: Optional[int] = None) -> DualMaxResult:
    """Maximize the dual over ``box`` by following the highest skeleton vertex.

    Only one vertex is examined per iteration.  After a cut the next
    vertex is the highest point of the new facet, which is a maximizer of
    the refined envelope.  Ties go to the lexicographically smallest lam.

    The reported minimizer is chosen among the labelings whose planes pass
    through the optimum, preferring one that satisfies the constraints
    (for a slack oracle, lies inside the admissible interval), then the one
    closest to them in L1, then the smaller energy.
    """
    started = time.perf_counter()
    box = _resolve_box(oracle, box)
    call = _Counter(oracle, max_oracle_calls)
    report = SearchReport()
    results = {}

    corners = box_corners(box)
    first = call(corners[0])
    results[first.plane.key] = first
    sk = init_skeleton(box, first.plane)

    def highest(points):
        return min(points, key=lambda p: (-p[-1], p[:-1]))

    current = highest(sk.vertices)
    last = first

    def finish(complete):
        report.oracle_calls = call.calls
        report.num_vertices = len(sk)
        report.num_minimizers = len(results)
        report.complete = complete
        report.wall_time = time.perf_counter() - started

    try:
        while True:
            lam = current[:-1]
            report.trace.append(current[-1])
            res = call(lam)
            last = res
            if res.plane(lam) < current[-1]:
                results.setdefault(res.plane.key, res)
                cut = sk.cut(res.plane, seed=current)
                report.degeneracies += len(cut.on_plane)
                current = highest(cut.facet)
            else:
                sk.vertices[current].confirmed = True
                break
    except BudgetExceeded as exc:
        finish(False)
        exc.partial = DualMaxResult(current[:-1], last.minimizer, current[-1], report, last, sk)
        raise
    finish(True)

    lam, value = current[:-1], current[-1]
    tight = [r for r in results.values() if r.plane(lam) == value]
    if last.plane(lam) == value:
        tight.append(last)
    best = min(tight, key=lambda r: _preference(oracle, r))
    return DualMaxResult(lam, best.minimizer, value, report, best, sk)


# ---------------------------------------------------------------------------
# soft constraints

@dataclass(frozen=True)
class PenaltySpec:
    """rho(H - target) as a weighted sum of squares or of absolute values."""
    kind: str
    weights: tuple
    target: tuple

    def __post_init__(self):
        if self.kind not in ("squared_weighted", "absolute_weighted"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        weights, target = rational_vector(self.weights), rational_vector(self.target)
        if len(weights) != len(target):
            raise DimensionError("penalty weights and target need equal lengths")
        if any(w < 0 for w in weights):
            raise ValueError("penalty weights must be nonnegative")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "target", target)

    def __call__(self, h_value) -> Fraction:
        total = Fraction(0)
        for w, h, t in zip(self.weights, h_value, self.target):
            d = h - t
            total += w * (d * d if self.kind == "squared_weighted" else abs(d))
        return total

    def objective(self, f_value, h_value) -> Fraction:
        return f_value + self(h_value)


def select_soft(candidates, penalty: PenaltySpec):
    """Entry minimizing f + rho(H - target); ties by smaller f, then labeling.

    Returns ``(entry, objective)``.
    """
    best, best_key = None, None
    for e in candidates:
        key = (penalty.objective(e.f_value, e.h_value), e.f_value, tuple(e.labeling))
        if best_key is None or key < best_key:
            best, best_key = e, key
    if best is None:
        raise ValueError("no candidates to select from")
    return best, best_key[0]


@dataclass
class AdaptDiagnostics:
    b_star: tuple
    lam_star: tuple
    step2: DualMaxResult
    step3: DualMaxResult
    search_box: tuple
    fixed: dict
    candidates: list
    objective: Fraction
    oracle_calls: int
    entry: Entry = None


def adapt_search(problem: LagrangianProblem, b_hat, bounds: SlackBounds, alpha,
                 penalty: PenaltySpec, backend: str = "mincut", *,
                 oracle: Optional[Oracle] = None,
                 max_oracle_calls: Optional[int] = None):
    """Soft-constrained minimization over a neighbourhood of the dual optimum.

    1. DualMax with the inequality b_hat - minus <= H(x) <= b_hat + plus
       gives x* and the slack y*, hence b* = H(x*) + y*.
    2. DualMax with the equality H(x) = b* gives lam*.
    3. DualSearch over [lam* - alpha, lam* + alpha], clipped to the box.
    4. The best candidate for f + rho(H - b_hat) wins; both DualMax
       minimizers are candidates too.

    Returns ``(labeling, AdaptDiagnostics)``.
    """
    b_hat = rational_vector(b_hat)
    alpha = rational_vector(alpha)
    if any(a < 0 for a in alpha):
        raise ValueError("alpha must be nonnegative")
    base = oracle if oracle is not None else make_lagrangian_oracle(problem, backend)
    if len(alpha) != base.m or len(b_hat) != base.m:
        raise DimensionError("alpha and b_hat must have one entry per constraint")

    remaining = [max_oracle_calls]

    def budget():
        return remaining[0]

    def spend(n):
        if remaining[0] is not None:
            remaining[0] -= n

    step2 = dual_max(slack_wrap(base, b_hat, bounds), max_oracle_calls=budget())
    spend(step2.report.oracle_calls)
    r2 = step2.result
    b_star = tuple(h + y for h, y in zip(r2.h_value, r2.slack))

    equality = retarget(base, b_star)
    step3 = dual_max(equality, max_oracle_calls=budget())
    spend(step3.report.oracle_calls)
    lam_star = step3.lam

    search_box, fixed = [], {}
    for i, ((lo, hi), l, a) in enumerate(zip(base.box, lam_star, alpha)):
        a_lo, a_hi = max(lo, l - a), min(hi, l + a)
        if a_lo == a_hi:
            fixed[i] = a_lo
        else:
            search_box.append((a_lo, a_hi))

    candidates = []
    calls = step2.report.oracle_calls + step3.report.oracle_calls
    if len(fixed) == base.m:
        if remaining[0] is not None and remaining[0] <= 0:
            raise BudgetExceeded("oracle budget exhausted before the local search")
        r = equality(lam_star)
        calls += 1
        candidates.append(Entry(r.minimizer, r.f_value, r.h_value, lam_star))
    else:
        local = FixedCoordinateOracle(equality, fixed) if fixed else equality
        found = dual_search(local, tuple(search_box), max_oracle_calls=budget())
        calls += found.report.oracle_calls
        candidates.extend(found.characteristic_set)
    for step in (step2, step3):
        r = step.result
        candidates.append(Entry(r.minimizer, r.f_value, r.h_value, step.lam))

    entry, objective = select_soft(candidates, penalty)
    diag = AdaptDiagnostics(b_star, lam_star, step2, step3, tuple(search_box), fixed,
                            candidates, objective, calls, entry)
    return entry.labeling, diag
