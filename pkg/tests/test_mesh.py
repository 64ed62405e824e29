import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from dcsplit.errors import AnchorOutside, DegenerateDomain, OutsideDomain
from dcsplit.mesh import (SimplicialMesh, box_domain, build_domain, locate, refine,
                          refinement_family, triangulate)
from oracles import brute_locate

UNIT_SQUARE = [[0, 0], [1, 0], [1, 1], [0, 1]]


# ---------------------------------------------------------------- domains

def test_interval_domain_anchor_is_midpoint():
    d = build_domain([[-1.0], [1.0]])
    assert d.dim == 1
    assert d.anchor.tolist() == [0.0]
    assert d.bounds[0].tolist() == [-1.0] and d.bounds[1].tolist() == [1.0]


def test_square_domain_anchor_is_centroid():
    d = build_domain(UNIT_SQUARE)
    assert d.anchor.tolist() == [0.5, 0.5]
    assert d.is_box


def test_interior_points_are_dropped_from_vertices():
    d = build_domain(UNIT_SQUARE + [[0.5, 0.5], [0.2, 0.7]])
    assert len(d.vertices) == 4


def test_collinear_points_are_degenerate():
    with pytest.raises(DegenerateDomain):
        build_domain([[0, 0], [1, 1], [2, 2]])


def test_too_few_points_are_degenerate():
    with pytest.raises(DegenerateDomain):
        build_domain([[0, 0], [1, 0]])


def test_anchor_on_boundary_is_rejected():
    with pytest.raises(AnchorOutside):
        build_domain(UNIT_SQUARE, anchor=[1.0, 0.5])
    with pytest.raises(AnchorOutside):
        build_domain(UNIT_SQUARE, anchor=[3.0, 3.0])


def test_domain_sample_stays_inside():
    d = build_domain([[0, 0], [2, 0], [0, 1]])
    pts = d.sample(2000, np.random.default_rng(3))
    assert np.all(d.contains(pts))


# ---------------------------------------------------------------- triangulate

def test_interval_level0_has_three_vertices():
    m = triangulate(build_domain([[-1.0], [1.0]]), 0)
    assert sorted(m.vertices[:, 0].tolist()) == [-1.0, 0.0, 1.0]
    assert m.n_simplices == 2


def test_square_level0_is_one_diagonal_split():
    m = triangulate(build_domain(UNIT_SQUARE), 0)
    assert m.n_simplices == 2
    assert len(m.interior_facets) == 1
    diag = m.vertices[m.facets[m.interior_facets[0]]]
    assert np.isclose(np.linalg.norm(diag[0] - diag[1]), math.sqrt(2))


@pytest.mark.parametrize("level", range(6))
def test_square_simplex_count(level):
    m = triangulate(build_domain(UNIT_SQUARE), level)
    assert m.n_simplices == 2 * 4 ** level
    assert np.isclose(m.volumes.sum(), 1.0)


@pytest.mark.parametrize("level", range(3))
def test_cube_simplex_count(level):
    m = triangulate(box_domain([0, 0, 0], [1, 1, 1]), level)
    assert m.n_simplices == 6 * 8 ** level
    assert np.isclose(m.volumes.sum(), 1.0)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_diameter_halves_each_level(dim):
    fam = refinement_family(box_domain(np.zeros(dim), np.ones(dim)), range(4))
    h0 = fam[0].h
    for k, m in fam.items():
        assert m.h <= h0 * 2.0 ** -k * (1 + 1e-12)


def test_negative_level_rejected():
    with pytest.raises(ValueError):
        triangulate(build_domain(UNIT_SQUARE), -1)


def test_general_convex_polygon_is_covered():
    pts = [[0, 0], [3, 0], [4, 2], [1, 3], [-1, 1]]
    d = build_domain(pts)
    area = ConvexHull(np.array(pts, float)).volume
    for level in range(3):
        m = triangulate(d, level)
        assert np.isclose(m.volumes.sum(), area)


# ---------------------------------------------------------------- refine

def test_refine_interval_keeps_parent_vertices():
    m0 = triangulate(build_domain([[-1.0], [1.0]]), 0)
    m1 = refine(m0)
    assert m1.n_simplices == 4
    assert np.array_equal(m1.vertices[:len(m0.vertices)], m0.vertices)


def test_refine_square_children_tile_parents():
    m0 = triangulate(build_domain(UNIT_SQUARE), 0)
    m1 = refine(m0)
    assert m1.n_simplices == 8
    for p in range(m0.n_simplices):
        kids = np.flatnonzero(m1.parent == p)
        assert len(kids) == 4
        assert np.isclose(m1.volumes[kids].sum(), m0.volumes[p])
        # every child vertex lies in the parent
        pts = m1.vertices[m1.simplices[kids]].reshape(-1, 2)
        lam = m0.barycentric(pts, np.full(len(pts), p))
        assert lam.min() >= -1e-12


def test_three_refinements_diameter():
    m = triangulate(build_domain(UNIT_SQUARE), 3)
    assert m.h == pytest.approx(math.sqrt(2) / 8, abs=1e-15)


@pytest.mark.parametrize("dim,levels", [(1, 5), (2, 5), (3, 3)])
def test_nesting(dim, levels):
    fam = refinement_family(box_domain(np.zeros(dim), np.ones(dim)), range(levels + 1))
    for k in range(levels):
        coarse, fine = fam[k], fam[k + 1]
        assert np.array_equal(fine.vertices[:len(coarse.vertices)], coarse.vertices)
        pts = fine.vertices[fine.simplices]  # (S, n+1, n)
        lam = coarse.barycentric(pts.reshape(-1, dim), np.repeat(fine.parent, dim + 1))
        assert lam.min() >= -1e-12


@pytest.mark.parametrize("dim,levels", [(1, 5), (2, 5), (3, 3)])
def test_quasi_uniform(dim, levels):
    fam = refinement_family(box_domain(np.zeros(dim), np.ones(dim)), range(levels + 1))
    bounds = [m.shape_bound for m in fam.values()]
    for m in fam.values():
        assert m.diameters.max() / m.diameters.min() <= 4.0
    assert all(b <= a * (1 + 1e-9) for a, b in zip(bounds, bounds[1:]))


def test_shape_bound_values():
    # right isosceles triangle: R/r = 1 + sqrt(2); Kuhn tetrahedra stay similar
    sq = triangulate(build_domain(UNIT_SQUARE), 2)
    assert sq.shape_bound == pytest.approx(1 + math.sqrt(2))
    cube = refinement_family(box_domain([0, 0, 0], [1, 1, 1]), range(3))
    vals = [m.shape_bound for m in cube.values()]
    assert max(vals) - min(vals) < 1e-9
    assert 4.0 < vals[0] < 4.2


@pytest.mark.parametrize("dim,level", [(1, 3), (2, 3), (3, 1)])
def test_facet_incidence(dim, level):
    m = triangulate(box_domain(np.zeros(dim), np.ones(dim)), level)
    # count facet occurrences directly from the simplices
    counts = {}
    for s in m.simplices:
        for i in range(dim + 1):
            key = tuple(sorted(np.delete(s, i)))
            counts[key] = counts.get(key, 0) + 1
    assert len(counts) == len(m.facets)
    for f, pair in zip(m.facets, m.facet_simplices):
        c = counts[tuple(f)]
        assert c == (2 if pair[1] >= 0 else 1)


# ---------------------------------------------------------------- locate

def test_locate_strict_interior_point():
    m = triangulate(build_domain(UNIT_SQUARE), 0)
    i = locate(m, [0.25, 0.25])
    assert i == 0
    # the lower triangle contains the origin corner
    assert [0.0, 0.0] in m.vertices[m.simplices[i]].tolist()


def test_locate_on_diagonal_takes_lowest_index():
    m = triangulate(build_domain(UNIT_SQUARE), 0)
    assert locate(m, [0.5, 0.5]) == 0
    assert locate(m, [1.0, 0.0]) == 0


def test_locate_outside_raises():
    m = triangulate(build_domain(UNIT_SQUARE), 2)
    with pytest.raises(OutsideDomain):
        locate(m, [2.0, 2.0])


def test_partition_property_on_random_points():
    d = build_domain(UNIT_SQUARE)
    m = triangulate(d, 4)
    pts = d.sample(10_000, np.random.default_rng(0), margin=0.0)
    ids = m.locate_many(pts)
    assert m.barycentric(pts, ids).min() >= -1e-12


def test_locate_matches_brute_force():
    d = build_domain([[0, 0], [2, 0], [1, 2]])
    m = triangulate(d, 2)
    rng = np.random.default_rng(5)
    pts = np.vstack([d.sample(150, rng), m.vertices, m.vertices[m.facets].mean(axis=1)])
    ids = m.locate_many(pts)
    for p, i in zip(pts, ids):
        assert i == brute_locate(m.vertices, m.simplices, p)


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=3, max_size=9),
       st.integers(0, 2))
def test_random_polygons_partition(raw, level):
    pts = np.array(raw)
    try:
        d = build_domain(pts)
    except DegenerateDomain:
        return
    hull = ConvexHull(pts)
    if hull.volume < 1e-3:
        return
    m = triangulate(d, level)
    assert np.isclose(m.volumes.sum(), hull.volume, rtol=1e-9)
    q = d.sample(200, np.random.default_rng(0))
    ids = m.locate_many(q)
    assert m.barycentric(q, ids).min() >= -1e-12


# ---------------------------------------------------------------- export

def test_json_round_trip():
    m = triangulate(build_domain(UNIT_SQUARE), 2)
    back = SimplicialMesh.from_dict(json.loads(m.to_json()))
    assert back.level == 2
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.simplices, m.simplices)
