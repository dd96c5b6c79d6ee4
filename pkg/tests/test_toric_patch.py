from fractions import Fraction
from math import comb

import numpy as np
import pytest

from conftest import random_spec
from toric_control.errors import InvalidRelation, OutsideDomain, ToricError, ZeroDegree
from toric_control.lattice_geometry import LatticeConfig
from toric_control.toric_patch import (
    BinomialRelation,
    PatchSpec,
    basis_values,
    beta_map,
    bezier_curve,
    check_binomial_relations,
    coefficients,
    evaluate,
    hull_intersection_relation,
    moment_coefficients,
    project,
    relations_from_kernel,
    tensor_patch,
    toric_basis,
    triangle_patch,
    vertex_labels,
    weight_action,
)

PILLOW = LatticeConfig.from_points([(1, 0), (0, 1), (1, 1), (2, 1), (1, 2)])


def test_bernstein_curve(rng):
    x = rng.uniform(0.01, 2.99, 200)
    for i in range(4):
        ref = x**i * (3 - x) ** (3 - i)
        assert np.allclose(toric_basis(bezier_curve(3), i, x), ref, rtol=1e-12, atol=0)


def test_bernstein_triangle(rng):
    cfg = triangle_patch(3)
    X = rng.dirichlet(np.ones(3), 200)[:, :2] * 3
    B = basis_values(cfg, X)
    for a, (i, j) in enumerate(cfg.points):
        ref = X[:, 0] ** i * X[:, 1] ** j * (3 - X[:, 0] - X[:, 1]) ** (3 - i - j)
        assert np.allclose(B[:, a], ref, rtol=1e-12, atol=0)


def test_bernstein_scaling_gives_classical_bezier(rng):
    # with binomial weights a toric cubic is the classical Bezier curve
    cfg = bezier_curve(3)
    B = rng.normal(size=(4, 2))
    spec = PatchSpec(cfg, [comb(3, i) for i in range(4)], B)
    s = rng.uniform(0, 1, 50)
    classical = sum(comb(3, i) * np.outer(s**i * (1 - s) ** (3 - i), B[i]) for i in range(4))
    assert np.allclose(evaluate(spec, 3 * s), classical, atol=1e-13)


def test_zero_power_convention():
    cfg = bezier_curve(2)
    assert toric_basis(cfg, 0, 0.0) == 4.0
    assert toric_basis(cfg, 2, 0.0) == 0.0


@pytest.mark.parametrize("cfg", [bezier_curve(3), tensor_patch(2, 3), triangle_patch(3), PILLOW])
def test_vertex_interpolation(cfg, rng):
    spec = random_spec(cfg, rng)
    for v in vertex_labels(cfg):
        assert np.allclose(evaluate(spec, np.array(cfg.points[v], dtype=float)), spec.control_points[v], atol=1e-12, rtol=0)


def test_edge_restriction(rng):
    spec = random_spec(tensor_patch(3, 3), rng)
    curve = spec.restrict([0, 1, 2, 3])
    curve = PatchSpec(bezier_curve(3), curve.weights, curve.control_points)
    x = rng.uniform(0, 3, 100)
    edge = evaluate(spec, np.column_stack([x, np.zeros_like(x)]))
    assert np.allclose(edge, evaluate(curve, x), atol=1e-10)


def test_factorization_and_convexity(rng):
    spec = random_spec(triangle_patch(3), rng)
    X = rng.dirichlet(np.ones(3), 300)[:, :2] * 3
    Z = coefficients(spec, X)
    assert Z.min() >= -1e-12
    assert np.allclose(Z.sum(axis=1), 1.0, atol=1e-12)
    direct = evaluate(spec, X)
    factored = project(spec.control_points, weight_action(spec.weights, beta_map(spec.config, X)))
    assert np.allclose(direct, factored, atol=1e-10)


def test_pillow_patch_is_finite(rng):
    spec = random_spec(PILLOW, rng)
    X = np.array([[1.0, 1.0], [1.0, 0.0], [0.5, 0.5], [1.5, 1.5]])
    F = evaluate(spec, X)
    assert np.all(np.isfinite(F))
    assert np.allclose(F[1], spec.control_points[0])


def test_extreme_weights_do_not_overflow():
    cfg = bezier_curve(3)
    spec = PatchSpec(cfg, [1.0, 1e-200, 1e200, 1.0], np.eye(4)[:, :3])
    F = evaluate(spec, np.linspace(0.1, 2.9, 7))
    assert np.all(np.isfinite(F))


def test_errors():
    with pytest.raises(ZeroDegree):
        bezier_curve(0)
    with pytest.raises(ZeroDegree):
        tensor_patch(2, 0)
    cfg = bezier_curve(3)
    with pytest.raises(ToricError):
        PatchSpec(cfg, [1, -1, 1, 1], np.zeros((4, 2)))
    with pytest.raises(ToricError):
        PatchSpec(cfg, [1, 1, 1], np.zeros((4, 2)))
    spec = PatchSpec(cfg, np.ones(4), np.zeros((4, 2)))
    with pytest.raises(OutsideDomain):
        evaluate(spec, 3.5)
    with pytest.raises(OutsideDomain):
        evaluate(PatchSpec(triangle_patch(2), np.ones(6), np.zeros((6, 3))), [2.0, 1.0])


def _curve_param(P, w, d):
    r = (P[:, 1] / w[1]) / (P[:, 0] / w[0])
    return d * r / (1 + r)


def test_moment_coefficients_curve(rng):
    cfg = bezier_curve(3)
    spec = random_spec(cfg, rng)
    den = 64
    num = np.arange(0, 3 * den + 1).reshape(-1, 1)
    P = moment_coefficients(spec, num, den)
    A = np.arange(4.0)
    assert np.allclose(P @ A, num[:, 0] / den, atol=1e-12)
    interior = slice(1, -1)
    x = _curve_param(P[interior], spec.weights, 3)
    assert np.allclose(coefficients(spec, x), P[interior], atol=1e-10)
    # endpoints are exactly the vertices
    assert P[0, 0] == 1.0 and P[-1, 3] == 1.0


def test_moment_coefficients_triangle(rng):
    cfg = triangle_patch(2)
    spec = random_spec(cfg, rng)
    den = 10
    num = np.array([[i, j] for i in range(2 * den + 1) for j in range(2 * den + 1 - i)])
    P = moment_coefficients(spec, num, den)
    A = np.array(cfg.points, dtype=float)
    assert np.allclose(P @ A, num / den, atol=1e-12)
    assert P.min() >= 0
    # boundary samples carry no mass off their edge
    on_x_axis = num[:, 1] == 0
    off = [a for a, p in enumerate(cfg.points) if p[1] > 0]
    assert np.all(P[np.ix_(on_x_axis, off)] == 0)


@pytest.mark.parametrize("cfg", [bezier_curve(3), tensor_patch(3, 3), triangle_patch(3), PILLOW])
@pytest.mark.parametrize("t", [1.0, 10.0, 100.0])
def test_binomial_relations(cfg, t, rng):
    spec = random_spec(cfg, rng)
    rels = relations_from_kernel(cfg)
    assert len(rels) == len(cfg) - cfg.dim - 1
    lam = rng.integers(0, 3, len(cfg))
    w = spec.weights * t**lam
    dom = spec.domain
    X = rng.uniform(dom.local.min(0), dom.local.max(0), size=(3000, cfg.dim))
    X = X[np.all(dom.facet_values(X, check=False) > 0, axis=1)][:500]
    assert check_binomial_relations(spec, rels, X, weights=w) <= 1e-9


def test_hull_intersection_relation():
    cfg = bezier_curve(2)
    rel = hull_intersection_relation(cfg, [0, 2], [1])
    assert rel.alpha == (Fraction(1, 2), 0, Fraction(1, 2))
    assert rel.beta == (0, 1, 0)
    assert hull_intersection_relation(bezier_curve(3), [0, 1], [2, 3]) is None
    with pytest.raises(InvalidRelation):
        hull_intersection_relation(cfg, [0, 1], [1, 2])


def test_relation_validation():
    cfg = bezier_curve(2)
    with pytest.raises(InvalidRelation):
        BinomialRelation.checked(cfg, [1, 0, 0], [0, 1, 0])
    with pytest.raises(InvalidRelation):
        BinomialRelation.checked(cfg, [2, 0, -1], [0, 1, 0])


def test_lower_dimensional_config():
    # points on a diagonal behave like a curve in their own chart
    cfg = LatticeConfig.from_points([(0, 0), (1, 1), (2, 2)])
    spec = PatchSpec(cfg, [1, 2, 1], np.array([[0.0, 0], [1, 2], [2, 0]]))
    F = evaluate(spec, np.array([[1.0, 1.0]]))
    assert np.allclose(F, [[1.0, 1.0]])
