from fractions import Fraction as F

import numpy as np
import pytest

from gptnc import linalg as la
from gptnc.errors import CenterOutsideBody, DegenerateBody, DimensionMismatch, NotPointed, UnnormalizedBody
from gptnc.geometry import (
    Cone,
    ConvexBody,
    canonicalize,
    dual_body,
    expand_from,
    extremal_rays,
    is_hypercube,
    is_simplex,
    same_set,
    shrink_toward,
    vertices_from_inequalities,
)

from oracles import brute_force_dual, same_points

SQUARE = [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]]
REBIT = [[1, 0, 1], [1, 0, -1], [1, 1, 0], [1, -1, 0]]
U3 = [1, 0, 0]


def test_segment_dual_is_a_square():
    body = ConvexBody.from_points([[1, 0], [1, 1]])
    d = dual_body(body, [1, 0])
    assert {tuple(v) for v in d.vertices} == {(0, 0), (1, 0), (0, 1), (1, -1)}
    assert is_hypercube(d)


@pytest.mark.parametrize("states", [SQUARE, REBIT, [[1, 0, 0], [1, 2, 0], [1, 0, 3], [1, -1, -1], [1, 1, 1]]])
def test_dual_matches_brute_force(states):
    d = dual_body(ConvexBody.from_points(states), U3)
    assert same_points(la.to_float(d.vertices), brute_force_dual(states))
    assert d.contains([0, 0, 0]) and d.contains(U3)


def test_gbit_dual_has_six_vertices():
    d = dual_body(ConvexBody.from_points(SQUARE), U3)
    assert len(d) == 6


def test_dual_errors():
    body = ConvexBody.from_points(SQUARE)
    with pytest.raises(UnnormalizedBody):
        dual_body(body, [2, 0, 0])
    with pytest.raises(DimensionMismatch):
        dual_body(body, [1, 0])


def test_dual_of_lower_dimensional_body_stays_in_span():
    body = ConvexBody.from_points([[1, 0, 0], [1, 1, 0]])
    d = dual_body(body, U3)
    assert all(v[2] == 0 for v in d.vertices)
    assert len(d) == 4


def test_float_dual_agrees_with_exact():
    ex = dual_body(ConvexBody.from_points(REBIT), U3)
    fl = dual_body(ConvexBody.from_points(np.array(REBIT, float), 1e-9), U3)
    assert same_points(la.to_float(ex.vertices), fl.vertices)


def test_extremal_rays_both_representations():
    by_facets = extremal_rays(Cone(3, facet_normals=la.exact(REBIT)))
    assert len(by_facets) == 4
    gens = extremal_rays(Cone(3, rays=la.exact(REBIT + [[2, 0, 0]])))
    assert {tuple(r) for r in gens} == {tuple(r) for r in la.exact(REBIT)}


def test_not_pointed():
    with pytest.raises(NotPointed):
        extremal_rays(Cone(2, facet_normals=la.exact([[1, 0]])))
    with pytest.raises(NotPointed):
        extremal_rays(Cone(2, rays=la.exact([[1, 0], [-1, 0]])))


def test_canonicalize_drops_interior_and_duplicates():
    b = ConvexBody.from_points(SQUARE + [[1, 0, 0], [1, 1, 1]])
    assert len(b) == 4
    assert same_set(b, canonicalize(b))


def test_shape_recognition():
    assert is_simplex(ConvexBody.from_points(np.eye(4, dtype=int)))
    assert not is_simplex(ConvexBody.from_points(SQUARE))
    cube = ConvexBody.from_points([[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)])
    assert is_hypercube(cube)
    skew = ConvexBody.from_points([[0, 0], [2, 1], [1, 3], [3, 4]])
    assert is_hypercube(skew)  # a parallelogram is an affine square
    assert not is_hypercube(ConvexBody.from_points([[0, 0], [1, 0], [0, 1]]))
    assert not is_hypercube(ConvexBody.from_points([[0, 0], [2, 0], [1, 1], [0, 1]]))
    with pytest.raises(DegenerateBody):
        ConvexBody.from_points(np.zeros((0, 2)))


def test_shrink_and_expand_are_inverse():
    b = ConvexBody.from_points(REBIT)
    c = b.barycenter()
    r = F(1, 3)
    s = shrink_toward(b, c, r)
    back = expand_from(s, c, r / (1 - r))
    assert same_set(back, b)
    with pytest.raises(CenterOutsideBody):
        shrink_toward(b, [1, 5, 5], r)
    assert len(shrink_toward(b, c, 1)) == 1


def test_vertices_from_inequalities():
    V = vertices_from_inequalities(la.exact([[1, 0], [-1, 0], [0, 1], [0, -1]]), la.exact([1, 0, 1, 0]))
    assert {tuple(v) for v in V} == {(0, 0), (0, 1), (1, 0), (1, 1)}
    with pytest.raises(DegenerateBody):
        vertices_from_inequalities(la.exact([[1, 0]]), la.exact([1]))
    empty = vertices_from_inequalities(la.exact([[1], [-1]]), la.exact([-1, 0]))
    assert len(empty) == 0


def test_json_round_trip():
    b = dual_body(ConvexBody.from_points(REBIT), U3)
    b2 = ConvexBody.from_json(b.to_json())
    assert same_set(b, b2)
    assert b.to_json()["vertices"][0][0] in ("0", "1/2", "1")


def test_symmetric_segment_dual():
    d = dual_body(ConvexBody.from_points([[1, 1], [1, -1]]), [1, 0])
    h = F(1, 2)
    assert {tuple(v) for v in d.vertices} == {(0, 0), (1, 0), (h, h), (h, -h)}
    assert is_hypercube(d)


def test_point_dual_is_unit_interval():
    d = dual_body(ConvexBody.from_points([[1]]), [1])
    assert {tuple(v) for v in d.vertices} == {(0,), (1,)}


def test_orthant_rays():
    rays = extremal_rays(Cone(3, facet_normals=la.eye(3, None)))
    assert {tuple(r) for r in rays} == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}


def test_square_cone_rays():
    assert len(extremal_rays(Cone(3, rays=la.exact(SQUARE)))) == 4


def test_shrink_unit_square_by_half():
    sq = ConvexBody.from_points([[0, 0], [1, 0], [0, 1], [1, 1]])
    half = shrink_toward(sq, sq.barycenter(), F(1, 2))
    q = F(1, 4)
    assert {tuple(v) for v in half.vertices} == {(q, q), (q, 3 * q), (3 * q, q), (3 * q, 3 * q)}
    assert same_set(shrink_toward(sq, sq.barycenter(), 0), sq)


def test_canonical_simplex_five():
    assert is_simplex(ConvexBody.from_points(np.eye(5, dtype=int)))
