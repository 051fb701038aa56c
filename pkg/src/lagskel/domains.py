"""Grid segmentation problems with statistic constraints, and their file formats.

Pixels are numbered row-major.  Pixel ``i`` sits at row ``i // cols`` and
column ``i % cols`` and has 1-based coordinates (v, h) = (row + 1, col + 1).
A grid written "R x C" has R rows and C columns.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .energy import (ConstraintSpec, Edge, LagrangianProblem, PairwiseEnergy,
                     rational, rational_vector, submodularity_lambda_bound)
from .errors import DimensionError, ParseError

CONSTRAINT_NAMES = ("size", "mean_v", "mean_h", "cov", "var_v", "var_h", "boundary")


@dataclass(frozen=True)
class GridProblem:
    """Binary segmentation of a ``rows`` x ``cols`` image.

    ``cost0[i]`` and ``cost1[i]`` are the unary costs of labelling pixel i
    as background (0) and foreground (1).  ``edge_weights``, if given,
    multiplies ``beta`` per grid edge in :func:`grid_edges` order.
    """
    rows: int
    cols: int
    cost0: tuple
    cost1: tuple
    beta: Fraction = Fraction(1)
    edge_weights: Optional[tuple] = None

    def __post_init__(self):
        n = self.rows * self.cols
        if self.rows < 1 or self.cols < 1:
            raise DimensionError("grid needs at least one row and one column")
        for name in ("cost0", "cost1"):
            vals = rational_vector(np.asarray(getattr(self, name)).ravel().tolist())
            if len(vals) != n:
                raise DimensionError(f"{name} has {len(vals)} entries for a {self.rows}x{self.cols} grid")
            object.__setattr__(self, name, vals)
        beta = rational(self.beta)
        if beta < 0:
            raise ValueError(f"smoothness weight must be nonnegative, got {beta}")
        object.__setattr__(self, "beta", beta)
        if self.edge_weights is not None:
            w = rational_vector(self.edge_weights)
            if len(w) != len(grid_edges(self.rows, self.cols)):
                raise DimensionError("one edge weight per grid edge is required")
            if any(x < 0 for x in w):
                raise ValueError("edge weights must be nonnegative")
            object.__setattr__(self, "edge_weights", w)

    @property
    def n(self) -> int:
        return self.rows * self.cols

    def coordinates(self):
        return [(i // self.cols + 1, i % self.cols + 1) for i in range(self.n)]

    def edge_betas(self):
        m = len(grid_edges(self.rows, self.cols))
        if self.edge_weights is None:
            return (self.beta,) * m
        return tuple(self.beta * w for w in self.edge_weights)


def grid_edges(rows: int, cols: int):
    """4-neighbour pairs (i, j), i < j, each pixel's right then lower neighbour."""
    out = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                out.append((i, i + 1))
            if r + 1 < rows:
                out.append((i, i + cols))
    return out


def build_grid_energy(grid: GridProblem) -> PairwiseEnergy:
    unary = tuple(zip(grid.cost0, grid.cost1))
    edges = tuple(Edge(i, j, (0, b, b, 0))
                  for (i, j), b in zip(grid_edges(grid.rows, grid.cols), grid.edge_betas()))
    return PairwiseEnergy(grid.n, unary, edges)


# ---------------------------------------------------------------------------
# constraints

def size_constraint(n: int) -> ConstraintSpec:
    return ConstraintSpec((1,) * n, 0, 0, "size")


def mean_constraint(grid: GridProblem, b_hat):
    """Centroid constraints cleared of the division by the foreground size.

    sum_i (v_i - b_v) x_i = 0 holds for a nonempty labelling exactly when
    its mean row equals b_v; likewise for columns.
    """
    bv, bh = rational_vector(b_hat)
    coords = grid.coordinates()
    return (ConstraintSpec(tuple(v - bv for v, _ in coords), 0, 0, "mean_v"),
            ConstraintSpec(tuple(h - bh for _, h in coords), 0, 0, "mean_h"))


def covariance_constraint(grid: GridProblem, mu, b_hat) -> ConstraintSpec:
    mv, mh = rational_vector(mu)
    b = rational(b_hat)
    coeffs = tuple((v - mv) * (h - mh) - b for v, h in grid.coordinates())
    return ConstraintSpec(coeffs, 0, 0, "cov")


def variance_constraint(grid: GridProblem, mu, b_hat, axis: str = "v") -> ConstraintSpec:
    if axis not in ("v", "h"):
        raise ValueError("axis is 'v' or 'h'")
    mv, mh = rational_vector(mu)
    b = rational(b_hat)
    k = 0 if axis == "v" else 1
    centre = mv if axis == "v" else mh
    coeffs = tuple((c[k] - centre) ** 2 - b for c in grid.coordinates())
    return ConstraintSpec(coeffs, 0, 0, f"var_{axis}")


def boundary_constraint(grid: GridProblem):
    """Disagreement count over grid edges, with the lowest admissible multiplier.

    The bound is -min beta_e: below it some Potts table turns supermodular.
    """
    spec = ConstraintSpec((0,) * grid.n, 1, 0, "boundary")
    f = build_grid_energy(grid)
    if not f.edges:
        return spec, Fraction(0)
    probe = LagrangianProblem(f, (spec,), ((Fraction(0), Fraction(1)),))
    return spec, submodularity_lambda_bound(probe)[0]


def instance_count_bound(kind: str, n: int) -> int:
    """Upper bound on the number of distinct values of one statistic.

    The size and boundary bounds count nonempty labellings (the empty
    labelling adds the single value 0); ratio statistics share a cubic bound.
    """
    if kind == "size":
        return n
    if kind == "boundary":
        return 2 * n
    if kind in ("mean_v", "mean_h", "mean", "cov", "var_v", "var_h", "var"):
        return n ** 3
    raise ValueError(f"unknown statistic {kind!r}")


# ---------------------------------------------------------------------------
# statistics of a mask

def mask_statistics(grid_or_shape, mask) -> dict:
    """Exact size, boundary, centroid, covariance and variances of a 0/1 mask."""
    if isinstance(grid_or_shape, GridProblem):
        rows, cols = grid_or_shape.rows, grid_or_shape.cols
    else:
        rows, cols = grid_or_shape
    x = [int(b) for b in np.asarray(mask).ravel()]
    if len(x) != rows * cols:
        raise DimensionError("mask size does not match the grid")
    size = sum(x)
    boundary = sum(1 for i, j in grid_edges(rows, cols) if x[i] != x[j])
    stats = {"size": Fraction(size), "boundary": Fraction(boundary)}
    if size:
        pts = [(i // cols + 1, i % cols + 1) for i, b in enumerate(x) if b]
        mv = Fraction(sum(v for v, _ in pts), size)
        mh = Fraction(sum(h for _, h in pts), size)
        stats.update({
            "mean_v": mv, "mean_h": mh,
            "cov": sum((v - mv) * (h - mh) for v, h in pts) / size,
            "var_v": sum((v - mv) ** 2 for v, _ in pts) / size,
            "var_h": sum((h - mh) ** 2 for _, h in pts) / size,
        })
    return stats


def pixel_error(mask, truth) -> Fraction:
    a = np.asarray(mask).ravel().astype(bool)
    b = np.asarray(truth).ravel().astype(bool)
    if a.shape != b.shape:
        raise DimensionError("masks differ in size")
    return Fraction(int((a != b).sum()), a.size)


def build_constraints(grid: GridProblem, names: Sequence[str], stats: dict):
    """Constraint specs, targets and lower box bounds for the named statistics.

    ``stats`` supplies targets (typically ground-truth statistics).  The
    ratio statistics are linearized so their target becomes zero.
    """
    specs, targets, lower = [], [], []
    for name in names:
        if name not in CONSTRAINT_NAMES:
            raise ValueError(f"unknown constraint {name!r}; choose from {', '.join(CONSTRAINT_NAMES)}")
        k = None
        if name == "size":
            spec, t = size_constraint(grid.n), stats["size"]
        elif name == "boundary":
            spec, k = boundary_constraint(grid)
            t = stats["boundary"]
        elif name in ("mean_v", "mean_h"):
            pair = mean_constraint(grid, (stats["mean_v"], stats["mean_h"]))
            spec, t = pair[0 if name == "mean_v" else 1], Fraction(0)
        elif name == "cov":
            spec, t = covariance_constraint(grid, (stats["mean_v"], stats["mean_h"]), stats["cov"]), Fraction(0)
        else:
            axis = name[-1]
            spec = variance_constraint(grid, (stats["mean_v"], stats["mean_h"]), stats[name], axis)
            t = Fraction(0)
        specs.append(spec)
        targets.append(t)
        lower.append(k)
    return specs, tuple(targets), lower


def default_box(grid: GridProblem, specs, lower, radius=None):
    """Search box wide enough to force any labelling on any pixel.

    Each dimension spans [-M / c, M / c] where M bounds every unary
    difference plus four neighbour terms and c is the smallest nonzero
    coefficient magnitude; disagreement dimensions start at their bound.
    """
    if radius is None:
        diff = max(abs(a - b) for a, b in zip(grid.cost0, grid.cost1)) if grid.n else 0
        beta = max(grid.edge_betas(), default=Fraction(0))
        radius = diff + 4 * beta + 1
    radius = rational(radius)
    box = []
    for spec, k in zip(specs, lower):
        mags = [abs(a) for a in spec.node_coeffs if a]
        c = min(mags) if mags else abs(spec.edge_coeff)
        r = radius / c
        if k is not None:
            box.append((k, max(k + 1, r)))
        else:
            box.append((-r, r))
    return tuple(box)


def grid_problem(grid: GridProblem, names, stats, radius=None) -> LagrangianProblem:
    specs, targets, lower = build_constraints(grid, names, stats)
    return LagrangianProblem(build_grid_energy(grid), tuple(specs),
                             default_box(grid, specs, lower, radius), targets)


def warn_if_empty(mask, names):
    if any(n not in ("size", "boundary") for n in names) and not np.asarray(mask).any():
        warnings.warn("empty mask: ratio statistics are undefined and hold only vacuously",
                      RuntimeWarning, stacklevel=2)


# ---------------------------------------------------------------------------
# synthetic images

def synthetic_image(seed: int, rows: int = 30, cols: int = 30, noise: float = 0.35,
                    clutter: float = 0.62):
    """Noisy integer cost maps for a random elliptical object.

    A second, dimmer blob of clutter sits elsewhere so that thresholding
    or plain smoothing over-segments.  Returns (cost0, cost1, truth) as
    integer arrays; costs lie in 0..255.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:rows, 0:cols]
    cy, cx = rng.uniform(0.35, 0.65) * rows, rng.uniform(0.35, 0.65) * cols
    ay, ax = rng.uniform(0.18, 0.3) * rows, rng.uniform(0.18, 0.3) * cols
    theta = rng.uniform(0, np.pi)
    dy, dx = yy - cy, xx - cx
    u = dx * np.cos(theta) + dy * np.sin(theta)
    v = -dx * np.sin(theta) + dy * np.cos(theta)
    truth = ((u / ax) ** 2 + (v / ay) ** 2 <= 1).astype(np.uint8)

    corner = rng.integers(4)
    qy = rows * (0.15 if corner < 2 else 0.85)
    qx = cols * (0.15 if corner % 2 == 0 else 0.85)
    r = rng.uniform(0.12, 0.18) * min(rows, cols)
    blob = (((yy - qy) ** 2 + (xx - qx) ** 2) <= r * r) & (truth == 0)

    intensity = truth.astype(float)
    intensity[blob] = clutter
    intensity = intensity + rng.normal(0, noise, size=truth.shape)
    p = np.clip(intensity, 0.02, 0.98)
    cost1 = np.rint(255 * (1 - p)).astype(np.int64)
    cost0 = 255 - cost1
    return cost0, cost1, truth


# ---------------------------------------------------------------------------
# file formats

def _pgm_tokens(data: bytes, start: int, count: int):
    tokens, pos = [], start
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        end = pos
        while end < len(data) and not data[end:end + 1].isspace() and data[end:end + 1] != b"#":
            end += 1
        if end == pos:
            raise ParseError("truncated PGM header")
        tokens.append(data[pos:end])
        pos = end
    return tokens, pos


def read_pgm(path) -> np.ndarray:
    """8-bit binary (P5) or plain (P2) grayscale image as an int64 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise ParseError(f"{path}: not a PGM file")
    tokens, pos = _pgm_tokens(data, 2, 3)
    try:
        cols, rows, maxval = (int(t) for t in tokens)
    except ValueError:
        raise ParseError(f"{path}: malformed PGM header") from None
    if maxval > 255 or maxval < 1:
        raise ParseError(f"{path}: only 8-bit PGM is supported")
    if magic == b"P5":
        body = data[pos + 1:pos + 1 + rows * cols]
        if len(body) != rows * cols:
            raise ParseError(f"{path}: expected {rows * cols} pixels, found {len(body)}")
        arr = np.frombuffer(body, dtype=np.uint8)
    else:
        vals, _ = _pgm_tokens(data, pos, rows * cols)
        arr = np.array([int(v) for v in vals])
    return arr.reshape(rows, cols).astype(np.int64)


def write_pgm(path, image):
    img = np.asarray(image)
    if img.ndim != 2:
        raise DimensionError("PGM images are two-dimensional")
    if img.min() < 0 or img.max() > 255:
        raise ValueError("PGM pixel values must lie in 0..255")
    rows, cols = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode())
        fh.write(img.astype(np.uint8).tobytes())


def write_mask(path, mask):
    write_pgm(path, np.asarray(mask).astype(np.uint8) * 255)


def read_mask(path) -> np.ndarray:
    return (read_pgm(path) > 0).astype(np.uint8)


def read_rational_csv(path):
    """Grid of rationals; every cell is an integer, decimal or p/q string."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([rational(c) for c in row])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ParseError(f"{path}: rows have different lengths")
    return rows


def read_cost_map(path):
    """Cost map as (rows, cols, flat tuple of Fractions) from PGM or CSV."""
    if str(path).lower().endswith(".csv"):
        grid = read_rational_csv(path)
        rows, cols = len(grid), len(grid[0]) if grid else 0
        return rows, cols, tuple(v for r in grid for v in r)
    img = read_pgm(path)
    return img.shape[0], img.shape[1], tuple(Fraction(int(v)) for v in img.ravel())


def write_rational_csv(path, grid):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in grid:
        writer.writerow([str(rational(v) if not isinstance(v, (int, np.integer)) else int(v)) for v in row])
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


# ---------------------------------------------------------------------------
# segmentation pipeline

@dataclass
class SegmentationResult:
    mask: np.ndarray
    labeling: tuple
    f_value: Fraction
    h_value: tuple
    targets: tuple
    names: tuple
    lam: Optional[tuple] = None
    oracle_calls: int = 0
    objective: Optional[Fraction] = None
    num_minimizers: Optional[int] = None
    details: Optional[dict] = None


def segment(grid: GridProblem, names=(), stats=None, mode: str = "max", *,
            gap=0, alpha=(1, 1), eta=None, backend: str = "mincut",
            max_oracle_calls: Optional[int] = None, radius=None) -> SegmentationResult:
    """Segment ``grid`` under the named statistic constraints.

    ``mode`` is ``max`` (dual maximum, with a relative inequality gap when
    ``gap`` > 0), ``adapt`` (soft constraints around the dual maximum) or
    ``search`` (full characteristic set, best soft objective wins).
    Without constraint names the result is the plain mincut labelling.
    """
    from .oracles import make_lagrangian_oracle, mincut_minimize
    from .solvers import (PenaltySpec, SlackBounds, adapt_search, dual_max,
                          dual_search, select_soft, slack_wrap)

    names = tuple(names)
    f = build_grid_energy(grid)
    shape = (grid.rows, grid.cols)
    if not names:
        res = mincut_minimize(f)
        x = res.minimizer
        return SegmentationResult(np.array(x, dtype=np.uint8).reshape(shape), x, res.value,
                                  (), (), names, oracle_calls=1)
    if stats is None:
        raise ValueError("constraint targets are required")
    problem = grid_problem(grid, names, stats, radius)
    m = problem.m
    b = problem.b
    gap = rational(gap)
    eta = rational_vector(eta) if eta is not None else (Fraction(1),) * m
    if len(eta) != m:
        raise DimensionError(f"need {m} penalty weights, got {len(eta)}")
    penalty = PenaltySpec("squared_weighted", eta, b)
    bounds = SlackBounds.relative(b, gap)
    oracle = make_lagrangian_oracle(problem, backend)
    details = {}
    if mode == "max":
        if gap:
            r = dual_max(slack_wrap(oracle, b, bounds), max_oracle_calls=max_oracle_calls)
        else:
            r = dual_max(oracle, max_oracle_calls=max_oracle_calls)
        x, fx, hx = r.minimizer, r.result.f_value, r.result.h_value
        lam, calls, count = r.lam, r.report.oracle_calls, None
        details["dual_value"] = r.value
    elif mode == "adapt":
        alpha = rational_vector(alpha)
        if len(alpha) != m:
            raise DimensionError(f"need {m} alpha values, got {len(alpha)}")
        x, diag = adapt_search(problem, b, bounds, alpha, penalty, backend, oracle=oracle,
                               max_oracle_calls=max_oracle_calls)
        fx, hx = diag.entry.f_value, diag.entry.h_value
        lam, calls, count = diag.lam_star, diag.oracle_calls, len(diag.candidates)
        details["b_star"] = diag.b_star
    elif mode == "search":
        found = dual_search(oracle, max_oracle_calls=max_oracle_calls)
        entry, _ = select_soft(found.characteristic_set, penalty)
        x, fx, hx = entry.labeling, entry.f_value, entry.h_value
        lam, calls, count = entry.witness, found.report.oracle_calls, len(found.characteristic_set)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    warn_if_empty(x, names)
    return SegmentationResult(np.array(x, dtype=np.uint8).reshape(shape), tuple(x), fx, hx, b, names,
                              lam, calls, penalty.objective(fx, hx), count, details)
