"""Lattice configurations, exact convex hulls and lifted upper hulls.

All combinatorial geometry here is exact: points are integer tuples, lifting
values are :class:`~fractions.Fraction`, and every orientation decision is an
integer sign test.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateSpan, EmptyConfig, MissingLiftValue, ToricError
from .exact import (
    affine_rank,
    convex_hull_2d,
    integer_kernel,
    lcm_denominators,
    polygon_area,
    primitive,
    solve,
    to_fraction,
)


@dataclass(frozen=True)
class AffineChart:
    """Integer coordinates on the saturated lattice ``Z^d ∩ aff(A)``.

    ``ambient = origin + basis^T @ local``; ``basis`` holds ``k`` primitive
    integer vectors spanning the lattice of the affine hull.
    """

    origin: tuple[int, ...]
    basis: tuple[tuple[int, ...], ...]
    local_points: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_ambient(self, local) -> np.ndarray:
        local = np.asarray(local, dtype=float)
        B = np.array(self.basis, dtype=float).reshape(self.dim, len(self.origin))
        return np.asarray(self.origin, dtype=float) + local @ B

    def to_local(self, ambient) -> np.ndarray:
        ambient = np.asarray(ambient, dtype=float)
        B = np.array(self.basis, dtype=float).reshape(self.dim, len(self.origin))
        if self.dim == 0:
            return np.zeros(ambient.shape[:-1] + (0,))
        diff = ambient - np.asarray(self.origin, dtype=float)
        sol, *_ = np.linalg.lstsq(B.T, diff.reshape(-1, len(self.origin)).T, rcond=None)
        return sol.T.reshape(ambient.shape[:-1] + (self.dim,))

    def to_local_exact(self, ambient) -> tuple[Fraction, ...]:
        diff = [Fraction(a) - o for a, o in zip(ambient, self.origin)]
        cols = [list(col) for col in zip(*self.basis)] if self.basis else [[] for _ in self.origin]
        sol = solve(cols, diff) if self.dim else []
        if sol is None:
            raise ToricError(f"point {tuple(ambient)} is not in the affine span")
        return tuple(sol)


@dataclass(frozen=True)
class LatticeConfig:
    """A finite set of distinct integer points; labels are list positions."""

    dim: int
    points: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ToricError(f"dimension must be positive, got {self.dim}")
        pts = []
        for p in self.points:
            p = tuple(p)
            if len(p) != self.dim:
                raise ToricError(f"point {p} does not have {self.dim} coordinates")
            for c in p:
                if isinstance(c, bool) or int(c) != c:
                    raise ToricError(f"point {p} has a non-integer coordinate")
            pts.append(tuple(int(c) for c in p))
        if len(set(pts)) != len(pts):
            raise ToricError("configuration points must be distinct")
        object.__setattr__(self, "points", tuple(pts))

    @classmethod
    def from_points(cls, points) -> "LatticeConfig":
        points = [tuple(int(c) for c in np.atleast_1d(p)) for p in points]
        if not points:
            raise EmptyConfig("a configuration needs at least one point")
        return cls(len(points[0]), tuple(points))

    def __len__(self):
        return len(self.points)

    @property
    def labels(self) -> range:
        return range(len(self.points))

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.int64).reshape(len(self.points), self.dim)

    def index(self, point) -> int:
        return self.points.index(tuple(int(c) for c in point))

    @cached_property
    def affine_dim(self) -> int:
        return affine_rank(self.points)

    def subconfig(self, labels) -> "LatticeConfig":
        return LatticeConfig(self.dim, tuple(self.points[i] for i in labels))

    @cached_property
    def chart(self) -> AffineChart:
        if not self.points:
            raise EmptyConfig("empty configuration has no affine chart")
        if self.affine_dim == self.dim:
            ident = tuple(tuple(int(i == j) for j in range(self.dim)) for i in range(self.dim))
            return AffineChart((0,) * self.dim, ident, self.points)
        a0 = self.points[0]
        diffs = [tuple(a - b for a, b in zip(p, a0)) for p in self.points[1:]]
        if self.affine_dim == 0:
            return AffineChart(a0, (), tuple(() for _ in self.points))
        normals = integer_kernel(diffs, ncols=self.dim)
        basis = integer_kernel(normals, ncols=self.dim)
        local = []
        cols = [list(col) for col in zip(*basis)]
        for p in self.points:
            sol = solve(cols, [a - b for a, b in zip(p, a0)])
            if sol is None or any(s.denominator != 1 for s in sol):
                raise ToricError("failed to express a point in lattice coordinates")
            local.append(tuple(int(s) for s in sol))
        return AffineChart(a0, tuple(basis), tuple(local))

    def reduced(self) -> "LatticeConfig":
        """The same configuration written in its own lattice chart (full-dimensional)."""
        ch = self.chart
        if ch.dim == 0:
            raise DegenerateSpan("a single point has no full-dimensional chart")
        return LatticeConfig(ch.dim, ch.local_points)


@dataclass(frozen=True)
class FacetInequality:
    """``h(x) = normal · x + offset >= 0`` with a primitive integer normal."""

    normal: tuple[int, ...]
    offset: int

    def __call__(self, x):
        return sum(n * c for n, c in zip(self.normal, x)) + self.offset

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ np.asarray(self.normal, dtype=float) + self.offset

    def __str__(self):
        terms = " + ".join(f"{n}*x{i}" for i, n in enumerate(self.normal) if n)
        return f"{terms} + {self.offset} >= 0"


@dataclass(frozen=True)
class Polytope:
    config: LatticeConfig
    vertices: tuple[int, ...]
    facets: tuple[FacetInequality, ...]
    dim: int

    def contains(self, x) -> bool:
        return all(f(x) >= 0 for f in self.facets)

    @cached_property
    def exponents(self) -> np.ndarray:
        """``H[a, e] = h_e(a)``: the exponent table of the toric basis."""
        return np.array([[f(p) for f in self.facets] for p in self.config.points], dtype=np.int64)

    @cached_property
    def volume(self) -> Fraction:
        """Exact length (d=1) or area (d=2)."""
        pts = [self.config.points[v] for v in self.ordered_vertices]
        if self.dim == 1:
            xs = [p[0] for p in pts]
            return Fraction(max(xs) - min(xs))
        if self.dim == 2:
            return polygon_area(pts)
        raise NotImplementedError("volume is only implemented for d <= 2")

    @cached_property
    def ordered_vertices(self) -> tuple[int, ...]:
        """Vertices in counter-clockwise order (d=2) or increasing order (d=1)."""
        if self.dim == 1:
            return tuple(sorted(self.vertices, key=lambda i: self.config.points[i][0]))
        if self.dim == 2:
            pts = [self.config.points[v] for v in self.vertices]
            return tuple(self.vertices[i] for i in convex_hull_2d(pts))
        return self.vertices

    @cached_property
    def diameter(self) -> float:
        pts = np.array([self.config.points[v] for v in self.vertices], dtype=float)
        d = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((d * d).sum(-1)).max())


@dataclass(frozen=True)
class PolytopeFace:
    """Smallest face of a polytope containing a point.

    ``dim == polytope.dim`` with no tight facets marks the interior.
    """

    dim: int
    facets: tuple[int, ...]
    vertices: tuple[int, ...]

    @property
    def is_interior(self) -> bool:
        return not self.facets


def _facets_from_ccw(points, ccw) -> list[FacetInequality]:
    out = []
    for k in range(len(ccw)):
        p = points[ccw[k]]
        q = points[ccw[(k + 1) % len(ccw)]]
        n = primitive((-(q[1] - p[1]), q[0] - p[0]))
        out.append(FacetInequality(n, -(n[0] * p[0] + n[1] * p[1])))
    return out


def _facets_generic(points, d) -> list[FacetInequality]:
    seen = {}
    for combo in itertools.combinations(range(len(points)), d):
        base = points[combo[0]]
        diffs = [tuple(a - b for a, b in zip(points[i], base)) for i in combo[1:]]
        ker = integer_kernel(diffs, ncols=d) if diffs else [tuple(1 if j == 0 else 0 for j in range(d))]
        if len(ker) != 1:
            continue
        n = ker[0]
        c = -sum(a * b for a, b in zip(n, base))
        vals = [sum(a * b for a, b in zip(n, p)) + c for p in points]
        if all(v >= 0 for v in vals):
            f = FacetInequality(tuple(n), c)
        elif all(v <= 0 for v in vals):
            f = FacetInequality(tuple(-x for x in n), -c)
        else:
            continue
        tight = [p for p, v in zip(points, vals) if v == 0]
        if affine_rank(tight) == d - 1:
            seen[(f.normal, f.offset)] = f
    return sorted(seen.values(), key=lambda f: (f.normal, f.offset))


def convex_hull(config: LatticeConfig) -> Polytope:
    """Exact convex hull with primitive facet inequalities."""
    if len(config) == 0:
        raise EmptyConfig("convex hull of an empty configuration")
    d = config.dim
    if config.affine_dim < d:
        raise DegenerateSpan(
            f"points span an affine space of dimension {config.affine_dim} < {d}; use config.reduced()"
        )
    pts = config.points
    if d == 1:
        xs = [p[0] for p in pts]
        lo, hi = min(xs), max(xs)
        facets = [FacetInequality((1,), -lo), FacetInequality((-1,), hi)]
    elif d == 2:
        facets = _facets_from_ccw(pts, convex_hull_2d(pts))
    else:
        facets = _facets_generic(pts, d)
    vertices = []
    for i, p in enumerate(pts):
        tight = [f.normal for f, v in zip(facets, (f(p) for f in facets)) if v == 0]
        if len(tight) >= d and _rank_int(tight) == d:
            vertices.append(i)
    return Polytope(config, tuple(vertices), tuple(facets), d)


def _rank_int(rows) -> int:
    from .exact import rank

    return rank(rows)


def face_membership(poly: Polytope, point) -> PolytopeFace | None:
    """Smallest face of ``poly`` whose closure contains ``point``; ``None`` outside."""
    x = [Fraction(c) if not isinstance(c, float) else to_fraction(c) for c in point]
    vals = [f(x) for f in poly.facets]
    if any(v < 0 for v in vals):
        return None
    tight = tuple(i for i, v in enumerate(vals) if v == 0)
    if not tight:
        return PolytopeFace(poly.dim, (), tuple(poly.vertices))
    verts = tuple(
        v for v in poly.vertices if all(poly.facets[i](poly.config.points[v]) == 0 for i in tight)
    )
    dim = affine_rank([poly.config.points[v] for v in verts])
    return PolytopeFace(dim, tight, verts)


# ---------------------------------------------------------------------------
# lifted polytopes


@dataclass(frozen=True)
class LiftedFace:
    """A non-vertical face of the lifted polytope: ``z = slope · x + intercept``.

    ``members`` are the labels whose lifts lie on the supporting hyperplane.
    The outward normal is ``(-slope, 1)`` for upper faces.
    """

    members: frozenset
    slope: tuple[Fraction, ...]
    intercept: Fraction

    def height(self, x) -> Fraction:
        return sum(s * c for s, c in zip(self.slope, x)) + self.intercept

    @property
    def normal(self) -> tuple[Fraction, ...]:
        return tuple(-s for s in self.slope) + (Fraction(1),)


@dataclass(frozen=True)
class LiftedPolytope:
    base: LatticeConfig
    values: tuple[Fraction, ...]
    upper_faces: tuple[LiftedFace, ...]
    lower_faces: tuple[LiftedFace, ...] = field(default=())

    def upper_height(self, x) -> Fraction:
        """Value of the upper-hull function at a point of the domain."""
        return min(f.height(x) for f in self.upper_faces)


def lifting_values(config: LatticeConfig, lifting) -> tuple[Fraction, ...]:
    """Normalize a lifting (object with ``.values``, mapping or sequence) to Fractions."""
    vals = getattr(lifting, "values", lifting)
    if callable(vals):
        vals = lifting
    n = len(config)
    if isinstance(vals, Mapping):
        missing = [i for i in range(n) if i not in vals]
        if missing:
            raise MissingLiftValue(f"lifting has no value for labels {missing}")
        return tuple(to_fraction(vals[i], f"lifting[{i}]") for i in range(n))
    vals = list(vals)
    if len(vals) < n:
        raise MissingLiftValue(f"lifting has {len(vals)} values for {n} points")
    if len(vals) > n:
        raise ToricError(f"lifting has {len(vals)} values for {n} points")
    return tuple(to_fraction(v, f"lifting[{i}]") for i, v in enumerate(vals))


def _upper_chain(ts, zs) -> list[int]:
    """Indices of strict upper-hull vertices of planar points, increasing in t."""
    order = sorted(range(len(ts)), key=lambda i: (ts[i], -zs[i]))
    chain: list[int] = []
    for i in order:
        if chain and ts[chain[-1]] == ts[i]:
            continue
        while len(chain) >= 2:
            a, b = chain[-2], chain[-1]
            cross = (ts[b] - ts[a]) * (zs[i] - zs[a]) - (zs[b] - zs[a]) * (ts[i] - ts[a])
            if cross >= 0:
                chain.pop()
            else:
                break
        chain.append(i)
    return chain


def _members(pts, Lam, slope, intercept) -> frozenset:
    # clear denominators once so the scan is pure integer arithmetic
    D = lcm_denominators((*slope, intercept))
    sl = [int(v * D) for v in slope]
    c = int(intercept * D)
    out = []
    for i, p in enumerate(pts):
        h = sum(s * x for s, x in zip(sl, p)) + c
        v = Lam[i] * D
        if v > h:
            raise ToricError("internal error: hyperplane is not supporting")
        if v == h:
            out.append(i)
    return frozenset(out)


def _upper_faces_1d(pts, Lam):
    xs = [p[0] for p in pts]
    chain = _upper_chain(xs, Lam)
    faces = []
    for a, b in zip(chain, chain[1:]):
        s = Fraction(Lam[b] - Lam[a], xs[b] - xs[a])
        c = Lam[a] - s * xs[a]
        faces.append(((s,), c))
    return faces


def _wrap(pts, Lam, p, q, dn, dc):
    """Rotate a plane about the lifted edge ``pq`` into the side ``dn·x + dc > 0``."""
    P, Q = pts[p], pts[q]
    u = (Q[0] - P[0], Q[1] - P[1])
    uu = u[0] * u[0] + u[1] * u[1]
    dl = Lam[q] - Lam[p]
    # candidate tilt of point i is num / den, kept as integers
    best = None
    for i, X in enumerate(pts):
        delta = dn[0] * X[0] + dn[1] * X[1] + dc
        if delta <= 0:
            continue
        num = (Lam[i] - Lam[p]) * uu - dl * (u[0] * (X[0] - P[0]) + u[1] * (X[1] - P[1]))
        den = delta * uu
        if best is None or num * best[1] > best[0] * den:
            best = (num, den)
    if best is None:
        raise ToricError("internal error: no point beyond a supposedly interior edge")
    k = Fraction(dl, uu)
    t = Fraction(*best)
    slope = (k * u[0] + t * dn[0], k * u[1] + t * dn[1])
    intercept = Lam[p] - k * (u[0] * P[0] + u[1] * P[1]) + t * dc
    return slope, intercept


def _upper_faces_2d(pts, Lam, hull_facets):
    def on_boundary(a, b):
        return any(f(pts[a]) == 0 and f(pts[b]) == 0 for f in hull_facets)

    f0 = hull_facets[0]
    on = [i for i, p in enumerate(pts) if f0(p) == 0]
    tdir = (f0.normal[1], -f0.normal[0])
    ts = [tdir[0] * pts[i][0] + tdir[1] * pts[i][1] for i in on]
    chain = _upper_chain(ts, [Lam[i] for i in on])
    p, q = on[chain[0]], on[chain[1]]
    start = _wrap(pts, Lam, p, q, f0.normal, f0.offset)

    found = {}
    queue = [start]
    while queue:
        slope, intercept = queue.pop()
        mem = _members(pts, Lam, slope, intercept)
        if mem in found:
            continue
        found[mem] = (slope, intercept)
        order = sorted(mem)
        ccw = [order[i] for i in convex_hull_2d([pts[i] for i in order])]
        for j in range(len(ccw)):
            a, b = ccw[j], ccw[(j + 1) % len(ccw)]
            if on_boundary(a, b):
                continue
            A, B = pts[a], pts[b]
            outward = (B[1] - A[1], -(B[0] - A[0]))
            dc = -(outward[0] * A[0] + outward[1] * A[1])
            queue.append(_wrap(pts, Lam, a, b, outward, dc))
    return [found[m] for m in found]


def upper_faces_bruteforce(config: LatticeConfig, values) -> list[LiftedFace]:
    """Enumerate upper facets by testing every affinely independent (d+1)-subset.

    Dimension-generic and O(n^(d+2)); used for d >= 3 and as a test oracle.
    """
    d = config.dim
    pts = config.points
    vals = [Fraction(v) for v in values]
    faces = {}
    for combo in itertools.combinations(range(len(pts)), d + 1):
        if affine_rank([pts[i] for i in combo]) < d:
            continue
        sol = solve([list(pts[i]) + [1] for i in combo], [vals[i] for i in combo])
        slope, c = tuple(sol[:d]), sol[d]
        heights = [sum(s * x for s, x in zip(slope, p)) + c for p in pts]
        if all(v <= h for v, h in zip(vals, heights)):
            mem = frozenset(i for i, (v, h) in enumerate(zip(vals, heights)) if v == h)
            faces[mem] = LiftedFace(mem, slope, c)
    return sorted(faces.values(), key=lambda f: sorted(f.members))


def _upper(config: LatticeConfig, vals: Sequence[Fraction], poly: Polytope) -> list[LiftedFace]:
    D = lcm_denominators(vals)
    Lam = [int(v * D) for v in vals]
    pts = config.points
    if config.dim == 1:
        raw = _upper_faces_1d(pts, Lam)
    elif config.dim == 2:
        raw = _upper_faces_2d(pts, Lam, poly.facets)
    else:
        return upper_faces_bruteforce(config, vals)
    faces = []
    for slope, intercept in raw:
        mem = _members(pts, Lam, slope, intercept)
        faces.append(LiftedFace(mem, tuple(Fraction(s) / D for s in slope), Fraction(intercept) / D))
    return sorted(faces, key=lambda f: sorted(f.members))


def lift(config: LatticeConfig, lifting, lower: bool = True) -> LiftedPolytope:
    """Lift ``a -> (a, λ(a))`` and extract the upper and lower faces of the hull.

    Each face lists every point whose lift lies on it, so coplanar pieces are
    merged into one maximal face; flat regions are never triangulated.
    """
    vals = lifting_values(config, lifting)
    poly = convex_hull(config)
    upper = _upper(config, vals, poly)
    if not lower:
        return LiftedPolytope(config, vals, tuple(upper))
    neg = _upper(config, [-v for v in vals], poly)
    low = [LiftedFace(f.members, tuple(-s for s in f.slope), -f.intercept) for f in neg]
    return LiftedPolytope(config, vals, tuple(upper), tuple(low))
