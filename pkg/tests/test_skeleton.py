import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

import naive
from instances import toy
from lagskel.errors import DomainError, UnsupportedDimensionError
from lagskel.hull import conv_edge, hull_edges, polygon
from lagskel.skeleton import Hyperplane, init_skeleton, load_dump, plane_of
from lagskel.verify import (is_proper_convex_combination, random_planes,
                            reference_skeleton, skeleton_matches_reference)


def P(*xs):
    return tuple(F(x) for x in xs)


def test_plane_of_toy():
    pl = plane_of(toy(), (1, 0))
    assert pl.constant == 1 and pl.coeffs == (1, 2)
    assert pl((-2, -2)) == -5
    assert plane_of(toy(), (0, 0)).coeffs == (0, 0)
    assert plane_of(toy(b=(1, 2)), (1, 0)).coeffs == (0, 0)


def test_init_toy_vertices():
    sk = init_skeleton(toy().box, plane_of(toy(), (1, 0)))
    assert set(sk.vertices) == {P(-2, -2, -5), P(-2, 2, 3), P(2, -2, -1), P(2, 2, 7)}
    assert len(sk.edges()) == 4 and len(sk.rays) == 4


def test_init_one_dimensional():
    sk = init_skeleton(((-1, 1),), Hyperplane(F(0), (F(0),)))
    assert set(sk.vertices) == {P(-1, 0), P(1, 0)}
    assert len(sk.edges()) == 1 and len(sk.rays) == 2


def test_init_three_dimensional_cube():
    sk = init_skeleton(((0, 1),) * 3, Hyperplane(F(1), (F(1), F(2), F(3))))
    assert len(sk) == 8 and len(sk.edges()) == 12 and len(sk.rays) == 8


def test_toy_cut_by_zero_plane():
    sk = init_skeleton(toy().box, plane_of(toy(), (1, 0)))
    rep = sk.cut(plane_of(toy(), (0, 0)))
    assert set(rep.removed) == {P(-2, 2, 3), P(2, 2, 7)}
    assert set(rep.added) == {P(-2, F(1, 2), 0), P(2, F(-3, 2), 0), P(-2, 2, 0), P(2, 2, 0)}
    assert skeleton_matches_reference(sk)


def test_cut_below_nothing_is_noop():
    sk = init_skeleton(toy().box, plane_of(toy(), (1, 0)))
    before = sk.point_sets()
    rep = sk.cut(Hyperplane(F(100), (F(0), F(0))))
    assert not rep and sk.point_sets() == before


def test_cut_idempotent():
    sk = init_skeleton(toy().box, plane_of(toy(), (1, 0)))
    sk.cut(plane_of(toy(), (0, 0)))
    before = sk.point_sets()
    assert not sk.cut(plane_of(toy(), (0, 0)))
    assert sk.point_sets() == before


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("seed", range(6))
def test_incremental_matches_reference(m, seed):
    rng = random.Random(seed * 10 + m)
    planes = random_planes(rng, m, 8)
    sk = init_skeleton(((-3, 3),) * m, planes[0])
    for pl in planes[1:]:
        sk.cut(pl)
        assert skeleton_matches_reference(sk)


@pytest.mark.parametrize("seed", range(10))
def test_degenerate_planes_through_vertices(seed):
    rng = random.Random(seed)
    m = rng.choice((2, 3))
    sk = init_skeleton(((-1, 1),) * m, Hyperplane(F(1), (F(0),) * m))
    for _ in range(8):
        pl = Hyperplane(F(rng.randint(-1, 1)), tuple(F(rng.randint(-1, 1)) for _ in range(m)))
        sk.cut(pl)
        assert skeleton_matches_reference(sk)


def test_envelope_value_toy():
    p = toy()
    sk = init_skeleton(p.box, plane_of(p, (1, 0)))
    for x in ((0, 0), (0, 1), (1, 1)):
        sk.cut(plane_of(p, x))
    assert sk.envelope_value((0, 0)) == 0
    assert sk.envelope_value((-2, -2)) == -5
    with pytest.raises(DomainError):
        sk.envelope_value((3, 0))


def test_skeleton_properties_after_cuts():
    rng = random.Random(5)
    planes = random_planes(rng, 2, 8)
    sk = init_skeleton(((-3, 3),) * 2, planes[0])
    for pl in planes[1:]:
        sk.cut(pl)
    pts = sorted(sk.vertices)
    for p in pts:
        assert sk.envelope_value(p[:-1]) == p[-1]
        assert all(p[-1] <= pl(p[:-1]) for pl in sk.planes.values())
        assert not is_proper_convex_combination(p, [q for q in pts if q != p])
    for u, w in itertools.combinations(pts[:8], 2):
        for t in (F(1, 3), F(1, 2)):
            lam = tuple(t * a + (1 - t) * b for a, b in zip(u[:-1], w[:-1]))
            assert sk.envelope_value(lam) >= t * u[-1] + (1 - t) * w[-1]


def test_dump_round_trip():
    p = toy()
    sk = init_skeleton(p.box, plane_of(p, (1, 0)))
    sk.cut(plane_of(p, (0, 0)))
    text = sk.dump()
    assert text.splitlines()[0].startswith("v ")
    verts, edges, rays, _ = load_dump(text)
    assert (verts, edges, rays) == sk.point_sets()
    assert "1/2" in text


# ConvEdge

def test_conv_edge_two_points():
    assert conv_edge([P(0, 0), P(1, 1)]) == [(P(0, 0), P(1, 1))]


def test_conv_edge_square_with_centre():
    plane = lambda a, b: P(a, b, a + b)
    pts = [plane(0, 0), plane(2, 0), plane(0, 2), plane(2, 2), plane(1, 1)]
    edges = conv_edge(pts)
    assert len(edges) == 4
    assert all(plane(1, 1) not in e for e in edges)


def test_conv_edge_dimension_cap():
    with pytest.raises(UnsupportedDimensionError):
        conv_edge([P(0, 0, 0, 0, 0), P(1, 1, 1, 1, 1)])


def test_conv_edge_degenerate_inputs():
    assert conv_edge([]) == [] and conv_edge([P(1, 2)]) == []
    line = [P(0, 0, 0), P(1, 1, 2), P(2, 2, 4)]
    assert conv_edge(line) == [(P(0, 0, 0), P(2, 2, 4))]


def test_polygon_drops_collinear():
    pts = [P(0, 0), P(1, 0), P(2, 0), P(2, 2), P(0, 2)]
    assert set(polygon(pts)) == {P(0, 0), P(2, 0), P(2, 2), P(0, 2)}


coord = st.fractions(-4, 4, max_denominator=3)


@given(st.integers(1, 3), st.lists(st.lists(coord, min_size=3, max_size=3), min_size=2, max_size=9),
       st.lists(coord, min_size=4, max_size=4))
def test_conv_edge_matches_facet_enumeration(m, raw, plane):
    pts = {tuple(r[:m]) for r in raw}
    lifted = [lam + (plane[0] + sum(c * l for c, l in zip(plane[1:], lam)),) for lam in pts]
    mine = {frozenset((a[:-1], b[:-1])) for a, b in conv_edge(lifted)}
    assert mine == naive.hull_edges_by_facets(list(pts))


@given(st.lists(st.lists(coord, min_size=3, max_size=3), min_size=4, max_size=10))
def test_hull_edges_3d_matches_facet_enumeration(raw):
    pts = [tuple(r) for r in raw]
    mine = {frozenset(e) for e in hull_edges(pts)}
    assert mine == naive.hull_edges_by_facets(pts)


def test_reference_skeleton_single_plane():
    verts, edges, rays = reference_skeleton(((0, 1),), [Hyperplane(F(0), (F(1),))])
    assert verts == {P(0, 0), P(1, 1)} and len(edges) == 1 and rays == verts
