from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog as scipy_linprog

from toric_control.errors import ParseError
from toric_control.exact import (
    affine_rank,
    convex_hull_2d,
    cramer,
    fraction_to_json,
    int_det,
    integer_kernel,
    polygon_area,
    primitive,
    rank,
    solve,
    to_fraction,
)
from toric_control.lp import find_nonnegative, linprog


def frac_det(M):
    M = [[Fraction(v) for v in row] for row in M]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return det


square = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=n, max_size=n)
)


@given(square)
@settings(max_examples=200, deadline=None)
def test_bareiss_matches_fraction_elimination(M):
    assert int_det(M) == frac_det(M)


@given(square, st.data())
@settings(max_examples=100, deadline=None)
def test_cramer_solves(M, data):
    b = data.draw(st.lists(st.integers(-9, 9), min_size=len(M), max_size=len(M)))
    if int_det(M) == 0:
        with pytest.raises(ZeroDivisionError):
            cramer(M, b)
        return
    nums, den = cramer(M, b)
    assert den > 0
    x = [Fraction(n, den) for n in nums]
    assert all(sum(a * xi for a, xi in zip(row, x)) == bi for row, bi in zip(M, b))
    assert solve(M, b) == x


def test_rationals_parse():
    assert to_fraction("3/4") == Fraction(3, 4)
    assert to_fraction(0.1) == Fraction(1, 10)
    assert to_fraction("-2") == -2
    assert fraction_to_json(Fraction(4, 2)) == 2
    assert fraction_to_json(Fraction(-1, 3)) == "-1/3"
    for bad in ("1/0", "abc", True, float("nan")):
        with pytest.raises(ParseError):
            to_fraction(bad)


def test_kernel_rank_and_hull():
    pts = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1)]
    rows = [list(c) for c in zip(*pts)] + [[1] * 5]
    K = integer_kernel(rows, ncols=5)
    assert len(K) == 5 - rank(rows) == 2
    for v in K:
        assert all(sum(r[i] * v[i] for i in range(5)) == 0 for r in rows)
        assert primitive(v) == tuple(v) or primitive(v) == tuple(-c for c in v)
    assert affine_rank(pts) == 2
    assert affine_rank([(0, 0), (1, 1), (3, 3)]) == 1
    hull = convex_hull_2d(pts)
    assert sorted(hull) == [0, 2, 3, 4]
    assert polygon_area([pts[i] for i in hull]) == Fraction(3, 2)


def test_lp_simple():
    # max x0 + x1 s.t. x0 + 2 x1 + s = 4, 3 x0 + x1 + s' = 6
    res = linprog([1, 1, 0, 0], [[1, 2, 1, 0], [3, 1, 0, 1]], [4, 6])
    assert res.status == "optimal"
    assert res.value == Fraction(14, 5)
    assert linprog([1, 0], [[1, -1]], [0]).status == "unbounded"


def test_lp_infeasible_farkas():
    A = [[1, 1], [1, 1]]
    b = [1, 2]
    res = find_nonnegative(A, b)
    assert res.status == "infeasible"
    y = res.farkas
    assert all(sum(A[i][j] * y[i] for i in range(2)) >= 0 for j in range(2))
    assert sum(bi * yi for bi, yi in zip(b, y)) < 0


@pytest.mark.parametrize("seed", range(40))
def test_lp_agrees_with_scipy(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 5), rng.integers(2, 7)
    A = rng.integers(-4, 5, size=(m, n))
    x0 = rng.integers(0, 3, size=n)
    b = A @ x0 if seed % 3 else rng.integers(-5, 6, size=m)
    c = rng.integers(-3, 4, size=n)
    ours = linprog(c.tolist(), A.tolist(), b.tolist())
    ref = scipy_linprog(-c, A_eq=A, b_eq=b, bounds=[(0, None)] * n, method="highs")
    expected = {0: "optimal", 2: "infeasible", 3: "unbounded"}[ref.status]
    assert ours.status == expected
    if expected == "optimal":
        assert float(ours.value) == pytest.approx(-ref.fun, abs=1e-9)
        x = ours.x
        assert all(v >= 0 for v in x)
        assert [sum(int(A[i, j]) * x[j] for j in range(n)) for i in range(m)] == [int(v) for v in b]
    if expected == "infeasible":
        y = ours.farkas
        assert all(sum(int(A[i, j]) * y[i] for i in range(m)) >= 0 for j in range(n))
        assert sum(int(b[i]) * y[i] for i in range(m)) < 0
