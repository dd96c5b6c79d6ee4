"""Exact integer and rational linear algebra used by the combinatorial modules.

Everything here works on Python ``int`` and :class:`fractions.Fraction`;
nothing touches floating point.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Sequence

from .errors import ParseError

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def to_fraction(value, field: str = "value") -> Fraction:
    """Convert an int, a ``"p/q"`` or decimal string, a float or a Fraction.

    Floats go through their shortest decimal repr, so ``0.5`` and ``"0.5"``
    agree and ``0.1`` becomes ``1/10`` rather than a binary expansion.
    """
    if isinstance(value, bool):
        raise ParseError(f"{field}: booleans are not numbers", field=field)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ParseError(f"{field}: non-finite number {value!r}", field=field)
        return Fraction(repr(value))
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if m:
            num, den = m.groups()
            if den is not None and int(den) == 0:
                raise ParseError(f"{field}: zero denominator in {value!r}", field=field, token=value)
            return Fraction(int(num), int(den) if den is not None else 1)
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"{field}: not a rational number: {value!r}", field=field, token=value) from None
    raise ParseError(f"{field}: expected a number, got {type(value).__name__}", field=field)


def fraction_to_json(q: Fraction):
    """Integers stay JSON integers, everything else becomes ``"p/q"``."""
    q = Fraction(q)
    if q.denominator == 1:
        return q.numerator
    return f"{q.numerator}/{q.denominator}"


def lcm_denominators(values) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out


def primitive(vec: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for v in vec:
        g = math.gcd(g, int(v))
    if g == 0:
        return tuple(int(v) for v in vec)
    return tuple(int(v) // g for v in vec)


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def integer_kernel(M: Sequence[Sequence[int]], ncols: int | None = None) -> list[tuple[int, ...]]:
    """Z-basis of ``{v in Z^n : M v = 0}``.

    Column-style Hermite reduction: unimodular column operations bring ``M``
    to ``[H | 0]``; the matching columns of the accumulated transform span the
    integer kernel.
    """
    A = [[int(x) for x in row] for row in M]
    n = len(A[0]) if A else (ncols or 0)
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    p = 0
    for row in A:
        if p == n:
            break
        for j in range(p + 1, n):
            b = row[j]
            if b == 0:
                continue
            a = row[p]
            if a == 0:
                for R in A:
                    R[p], R[j] = R[j], R[p]
                for R in U:
                    R[p], R[j] = R[j], R[p]
                continue
            g, x, y = _egcd(a, b)
            ag, bg = a // g, b // g
            for R in A:
                cp, cj = R[p], R[j]
                R[p], R[j] = x * cp + y * cj, -bg * cp + ag * cj
            for R in U:
                cp, cj = R[p], R[j]
                R[p], R[j] = x * cp + y * cj, -bg * cp + ag * cj
        if row[p] != 0:
            p += 1
    basis = []
    for j in range(p, n):
        col = primitive([U[i][j] for i in range(n)])
        basis.append(col)
    return _size_reduce(basis)


def _size_reduce(basis: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Cheap pairwise reduction; keeps the lattice, shrinks the entries."""
    vecs = [list(v) for v in basis]
    changed = True
    rounds = 0
    while changed and rounds < 50:
        changed = False
        rounds += 1
        for i, vi in enumerate(vecs):
            for j, vj in enumerate(vecs):
                if i == j:
                    continue
                nj = sum(x * x for x in vj)
                if nj == 0:
                    continue
                k = round(Fraction(sum(a * b for a, b in zip(vi, vj)), nj))
                if k:
                    cand = [a - k * b for a, b in zip(vi, vj)]
                    if sum(x * x for x in cand) < sum(x * x for x in vi):
                        vecs[i] = vi = cand
                        changed = True
    out = []
    for v in vecs:
        first = next((x for x in v if x), 0)
        out.append(tuple(-x for x in v) if first < 0 else tuple(v))
    return out


def _int_rank(M: list[list[int]]) -> int:
    # fraction-free elimination; rows are cross-multiplied and gcd-reduced
    r = 0
    ncol = len(M[0])
    for c in range(ncol):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        for i in range(r + 1, len(M)):
            f = M[i][c]
            if f:
                row = [a * p - f * b for a, b in zip(M[i], M[r])]
                g = math.gcd(*row)
                M[i] = [x // g for x in row] if g > 1 else row
        r += 1
        if r == len(M):
            break
    return r


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    if all(type(x) is int for r in rows for x in r):
        return _int_rank([list(r) for r in rows])
    M = [[Fraction(x) for x in r] for r in rows]
    r = 0
    ncol = len(M[0])
    for c in range(ncol):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(r + 1, len(M)):
            if M[i][c]:
                f = M[i][c] / M[r][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
        if r == len(M):
            break
    return r


def solve(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Exact solution of ``A x = b`` (any consistent system, minimal pivots).

    Returns ``None`` when inconsistent. Free variables are set to zero.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    M = [[Fraction(x) for x in A[i]] + [Fraction(b[i])] for i in range(m)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(m):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * bb for a, bb in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if M[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = M[i][n]
    return x


def int_det(M: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (fraction-free Bareiss elimination)."""
    A = [list(r) for r in M]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if sw is None:
                return 0
            A[k], A[sw] = A[sw], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1] if n else 1


def cramer(A: Sequence[Sequence[int]], b: Sequence[int]) -> tuple[list[int], int]:
    """Integer Cramer's rule for a nonsingular square system: ``x = nums / den``, ``den > 0``."""
    den = int_det(A)
    if den == 0:
        raise ZeroDivisionError("singular system")
    nums = []
    for j in range(len(A)):
        Aj = [list(r[:j]) + [b[i]] + list(r[j + 1 :]) for i, r in enumerate(A)]
        nums.append(int_det(Aj))
    if den < 0:
        den, nums = -den, [-x for x in nums]
    return nums, den


def affine_rank(points: Sequence[Sequence]) -> int:
    """Dimension of the affine hull of ``points`` (-1 for the empty set)."""
    if not points:
        return -1
    p0 = points[0]
    return rank([[a - b for a, b in zip(p, p0)] for p in points[1:]]) if len(points) > 1 else 0


def polygon_area(vertices: Sequence[Sequence]) -> Fraction:
    """Unsigned shoelace area of a simple polygon given in cyclic order."""
    s = Fraction(0)
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += Fraction(x0) * y1 - Fraction(x1) * y0
    return abs(s) / 2


def orient2d(a, b, c):
    """Twice the signed area of triangle abc; exact for ints and Fractions."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def convex_hull_2d(points: Sequence[tuple]) -> list[int]:
    """Indices of the strict hull vertices, counter-clockwise.

    Monotone chain with exact orientation tests; collinear boundary points are
    dropped. Starts at the lexicographically smallest point.
    """
    order = sorted(range(len(points)), key=lambda i: (points[i][0], points[i][1]))
    uniq = []
    for i in order:
        if not uniq or tuple(points[uniq[-1]]) != tuple(points[i]):
            uniq.append(i)
    if len(uniq) <= 2:
        return uniq
    lower: list[int] = []
    for i in uniq:
        while len(lower) >= 2 and orient2d(points[lower[-2]], points[lower[-1]], points[i]) <= 0:
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in reversed(uniq):
        while len(upper) >= 2 and orient2d(points[upper[-2]], points[upper[-1]], points[i]) <= 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]
