from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toric_control.errors import DegenerateSpan, EmptyConfig, MissingLiftValue
from toric_control.lattice_geometry import (
    LatticeConfig,
    convex_hull,
    face_membership,
    lift,
    upper_faces_bruteforce,
)
from toric_control.toric_patch import bezier_curve, tensor_patch, triangle_patch

PILLOW = LatticeConfig.from_points([(1, 0), (0, 1), (1, 1), (2, 1), (1, 2)])


def test_pillow_inequalities():
    P = convex_hull(PILLOW)
    got = {(f.normal, f.offset) for f in P.facets}
    # x+y-1, 1+x-y, 3-x-y, 1+y-x
    assert got == {((1, 1), -1), ((1, -1), 1), ((-1, -1), 3), ((-1, 1), 1)}
    assert P.volume == 2
    assert sorted(P.vertices) == [0, 1, 3, 4]
    assert P.exponents[2].tolist() == [1, 1, 1, 1]


def test_triangle_and_curve_hulls():
    T = convex_hull(triangle_patch(3))
    assert T.volume == Fraction(9, 2)
    assert len(T.facets) == 3
    C = convex_hull(bezier_curve(4))
    assert C.volume == 4 and C.vertices == (0, 4)


def test_face_membership():
    P = convex_hull(tensor_patch(3, 3))
    assert face_membership(P, (1, 1)).is_interior
    edge = face_membership(P, (0, 2))
    assert edge.dim == 1 and len(edge.vertices) == 2
    corner = face_membership(P, (3, 3))
    assert corner.dim == 0 and corner.vertices == (15,)
    assert face_membership(P, (4, 0)) is None
    assert face_membership(P, (Fraction(1, 2), 0)).dim == 1


def test_errors():
    with pytest.raises(EmptyConfig):
        LatticeConfig.from_points([])
    with pytest.raises(DegenerateSpan):
        convex_hull(LatticeConfig.from_points([(0, 0), (1, 1), (2, 2)]))
    with pytest.raises(MissingLiftValue):
        lift(bezier_curve(3), [0, 1])


def test_reduced_chart():
    cfg = LatticeConfig.from_points([(0, 0), (1, 1), (2, 2), (3, 3)])
    red = cfg.reduced()
    assert red.dim == 1 and red.affine_dim == 1
    assert convex_hull(red).volume == 3


def test_cubic_lift():
    L = lift(bezier_curve(3), [0, 1, 2, 0])
    assert sorted(sorted(f.members) for f in L.upper_faces) == [[0, 1, 2], [2, 3]]
    assert [sorted(f.members) for f in L.lower_faces] == [[0, 3]]
    assert L.upper_height((1,)) == 1


grids = st.sampled_from([(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)])


@given(grids, st.data())
@settings(max_examples=150, deadline=None)
def test_lift_matches_bruteforce(shape, data):
    cfg = tensor_patch(*shape)
    vals = data.draw(st.lists(st.integers(-3, 3), min_size=len(cfg), max_size=len(cfg)))
    fast = {f.members for f in lift(cfg, vals).upper_faces}
    slow = {f.members for f in upper_faces_bruteforce(cfg, vals)}
    assert fast == slow


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_lift_rational_values(data):
    cfg = triangle_patch(3)
    vals = data.draw(
        st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=5), min_size=len(cfg), max_size=len(cfg))
    )
    L = lift(cfg, vals)
    assert {f.members for f in L.upper_faces} == {f.members for f in upper_faces_bruteforce(cfg, vals)}
    # upper hull dominates every lifted point
    for p, v in zip(cfg.points, vals):
        assert L.upper_height(p) >= v


def test_three_dimensional_hull():
    cube = LatticeConfig.from_points([(i, j, k) for i in (0, 1) for j in (0, 1) for k in (0, 1)])
    P = convex_hull(cube)
    assert len(P.facets) == 6 and len(P.vertices) == 8
    L = lift(cube, np.zeros(8, dtype=int).tolist())
    assert len(L.upper_faces) == 1
