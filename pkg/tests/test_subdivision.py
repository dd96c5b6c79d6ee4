from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toric_control.errors import BadIntersection, CoverageGap, OverlapViolation, UnvalidatedInput
from toric_control.subdivision import (
    Decomposition,
    Lifting,
    certificate_matches,
    certify_regularity,
    face_closure,
    regular_decomposition,
    validate_decomposition,
)
from toric_control.toric_patch import bezier_curve, tensor_patch, triangle_patch


def facets(dec):
    return sorted(sorted(f.labels) for f in dec.facets)


def test_cubic():
    dec = regular_decomposition(bezier_curve(3), [0, 1, 2, 0])
    assert facets(dec) == [[0, 1, 2], [2, 3]]
    assert dec.regularity == "regular" and dec.validated
    assert dec.points_in_no_face == ()


def test_flat_lifting_single_facet(grid4):
    dec = regular_decomposition(grid4, [0] * 16)
    assert facets(dec) == [list(range(16))]


def test_face_closure_of_square():
    cfg = tensor_patch(1, 1)
    faces = face_closure(cfg, range(4))
    assert len(faces) == 1 + 4 + 4


def test_bicubic_points_in_no_face(grid4, bicubic_lifting):
    dec = regular_decomposition(grid4, bicubic_lifting)
    assert dec.points_in_no_face == (grid4.index((1, 2)), grid4.index((2, 2)))
    covered = set(dec.covered)
    assert all(a in covered and b in covered for a, b in dec.pairs_in_no_common_face())


def test_validation_errors():
    cfg = tensor_patch(2, 1)
    with pytest.raises(CoverageGap) as e:
        validate_decomposition(cfg, [{0, 1, 3, 4}])
    assert e.value.faces
    with pytest.raises(OverlapViolation):
        validate_decomposition(cfg, [{0, 1, 3, 4}, {1, 2, 4, 5}, {0, 2, 3, 5}])
    with pytest.raises(BadIntersection):
        # the centre (1,1) sits on the shared diagonal of one triangle only
        validate_decomposition(tensor_patch(2, 2), [{0, 1, 2, 3, 6}, {2, 4, 6, 8}])
    ok = validate_decomposition(tensor_patch(2, 2), [{0, 1, 2, 3, 6}, {2, 5, 6, 7, 8}])
    assert ok.points_in_no_face == (4,)


def test_lower_face_must_belong():
    cfg = tensor_patch(1, 1)
    with pytest.raises(BadIntersection):
        validate_decomposition(cfg, [{0, 1, 2, 3}, {0, 3}])
    dec = validate_decomposition(cfg, [{0, 1, 2, 3}, {0, 1}])
    assert dec.validated


def test_unvalidated_rejected():
    cfg = tensor_patch(1, 1)
    raw = Decomposition(cfg, frozenset())
    with pytest.raises(UnvalidatedInput):
        certify_regularity(cfg, raw)


def test_pinwheel_irregular(pinwheel):
    cfg = pinwheel.config
    cert = certify_regularity(cfg, pinwheel)
    assert cert.status == "irregular"
    assert cert.verify(cfg)
    assert all(isinstance(z, Fraction) for z in cert.fold_multipliers)
    assert cert.decomposition.regularity == "irregular"
    assert pinwheel.regularity == "unknown"  # inputs are never mutated
    # tampering breaks the certificate
    bad = list(cert.fold_multipliers)
    k = next(i for i, z in enumerate(bad) if z > 0)
    bad[k] += 1
    from dataclasses import replace

    assert not replace(cert, fold_multipliers=tuple(bad)).verify(cfg)


def test_nine_squares_regular(grid4):
    vals = [0, 1, 1, 0, 1, 2, 2, 1, 1, 2, 2, 1, 0, 1, 1, 0]
    dec = regular_decomposition(grid4, vals)
    assert len(dec.facets) == 9
    dec2 = validate_decomposition(grid4, dec.facet_sets)
    cert = certify_regularity(grid4, dec2)
    assert cert.is_regular and cert.verify(grid4) and cert.margin > 0
    assert certificate_matches(grid4, dec2, cert)


def test_triangulation_of_triangle_is_regular():
    cfg = triangle_patch(2)
    # the six points of 2▲: four unimodular triangles
    dec = validate_decomposition(cfg, [{0, 1, 3}, {1, 3, 4}, {1, 2, 4}, {3, 4, 5}])
    cert = certify_regularity(cfg, dec)
    assert cert.is_regular and certificate_matches(cfg, dec, cert)


def test_uncovered_points_get_pushed_below(grid4, bicubic_lifting):
    dec = regular_decomposition(grid4, bicubic_lifting)
    again = validate_decomposition(grid4, dec.facet_sets)
    cert = certify_regularity(grid4, again)
    assert cert.is_regular
    assert certificate_matches(grid4, again, cert)


shapes = st.sampled_from([(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)])


@given(shapes, st.data())
@settings(max_examples=60, deadline=None)
def test_random_liftings_round_trip(shape, data):
    cfg = tensor_patch(*shape)
    vals = data.draw(st.lists(st.integers(-4, 4), min_size=len(cfg), max_size=len(cfg)))
    dec = regular_decomposition(cfg, vals)
    user = validate_decomposition(cfg, dec.facet_sets)
    assert user.face_sets == dec.face_sets
    cert = certify_regularity(cfg, user)
    assert cert.is_regular and cert.verify(cfg)
    assert certificate_matches(cfg, user, cert)


def test_negated_lifting():
    lam = Lifting.of(bezier_curve(3), [0, 1, 2, 0])
    dec = regular_decomposition(bezier_curve(3), -lam)
    assert facets(dec) == [[0, 3]]
    assert dec.points_in_no_face == (1, 2)
