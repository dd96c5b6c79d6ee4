"""Regular decompositions of point configurations and exact regularity certificates."""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from .errors import (
    BadIntersection,
    CoverageGap,
    OverlapViolation,
    ToricError,
    UnvalidatedInput,
)
from .exact import cramer, lcm_denominators, affine_rank, convex_hull_2d, orient2d, rank, solve
from .lattice_geometry import LatticeConfig, convex_hull, lift, lifting_values
from .lp import find_nonnegative


@dataclass(frozen=True)
class Lifting:
    """Exact rational heights ``λ(a)``, indexed by configuration label."""

    values: tuple[Fraction, ...]

    @classmethod
    def of(cls, config: LatticeConfig, values) -> "Lifting":
        return cls(lifting_values(config, values))

    def __getitem__(self, label) -> Fraction:
        return self.values[label]

    def __len__(self):
        return len(self.values)

    def __neg__(self) -> "Lifting":
        return Lifting(tuple(-v for v in self.values))


@dataclass(frozen=True, eq=False)
class Face:
    dim: int
    members: frozenset = field(compare=False)
    # sort key so faces order deterministically
    key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        object.__setattr__(self, "key", tuple(sorted(self.members)))

    def __eq__(self, other):
        return isinstance(other, Face) and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def __lt__(self, other):
        return (self.dim, self.key) < (other.dim, other.key)

    @property
    def labels(self) -> tuple[int, ...]:
        return self.key


@dataclass(frozen=True)
class Decomposition:
    """A polyhedral decomposition of a configuration, closed under taking faces.

    ``regularity`` is ``"regular"``, ``"irregular"`` or ``"unknown"``;
    ``certificate`` holds the evidence once :func:`certify_regularity` ran.
    """

    config: LatticeConfig
    faces: frozenset
    source: str = "user"
    lifting: Lifting | None = None
    regularity: str = "unknown"
    certificate: "RegularityCertificate | None" = None
    validated: bool = False

    @cached_property
    def facets(self) -> tuple[Face, ...]:
        return tuple(sorted(f for f in self.faces if f.dim == self.config.dim))

    @property
    def facet_sets(self) -> frozenset:
        return frozenset(f.members for f in self.facets)

    @property
    def face_sets(self) -> frozenset:
        return frozenset(f.members for f in self.faces)

    @cached_property
    def covered(self) -> frozenset:
        out = set()
        for f in self.faces:
            out |= f.members
        return frozenset(out)

    @property
    def points_in_no_face(self) -> tuple[int, ...]:
        return tuple(i for i in self.config.labels if i not in self.covered)

    def pairs_in_no_common_face(self) -> list[tuple[int, int]]:
        covered = sorted(self.covered)
        out = []
        for a, b in itertools.combinations(covered, 2):
            if not any(a in F.members and b in F.members for F in self.facets):
                out.append((a, b))
        return out

    def with_regularity(self, cert: "RegularityCertificate") -> "Decomposition":
        return replace(self, regularity=cert.status, certificate=cert)


# ---------------------------------------------------------------------------
# face closure


def face_closure(config: LatticeConfig, members) -> set[frozenset]:
    """All faces of ``conv(members)`` as subsets of ``members`` (including itself)."""
    return set(_face_closure(config, frozenset(members)))


@lru_cache(maxsize=4096)
def _face_closure(config: LatticeConfig, members: frozenset) -> frozenset:
    out = {members}
    if len(members) <= 1:
        return frozenset(out)
    labels = sorted(members)
    sub = config.subconfig(labels)
    if sub.affine_dim == 0:
        return frozenset(out)
    red = sub.reduced()
    poly = convex_hull(red)
    for f in poly.facets:
        tight = frozenset(labels[i] for i, p in enumerate(red.points) if f(p) == 0)
        out |= _face_closure(config, tight)
    return frozenset(out)


def _decomposition_faces(config: LatticeConfig, facet_sets) -> frozenset:
    faces = set()
    for F in facet_sets:
        for S in face_closure(config, F):
            faces.add(Face(affine_rank([config.points[i] for i in S]), S))
    return frozenset(faces)


def regular_decomposition(config: LatticeConfig, lifting) -> Decomposition:
    """Decomposition induced by the upper faces of the lifted configuration.

    A point whose lift lies strictly below the upper hull belongs to no face.
    """
    lam = lifting if isinstance(lifting, Lifting) else Lifting.of(config, lifting)
    lp = lift(config, lam, lower=False)
    faces = _decomposition_faces(config, [f.members for f in lp.upper_faces])
    return Decomposition(config, faces, "lifting", lam, "regular", None, True)


# ---------------------------------------------------------------------------
# validation


def _hull_vertices(config, members):
    pts = [config.points[i] for i in sorted(members)]
    if config.dim == 1:
        xs = [p[0] for p in pts]
        return [(min(xs),), (max(xs),)]
    return [pts[i] for i in convex_hull_2d(pts)]


def _interiors_overlap(P, Q, dim) -> bool:
    if dim == 1:
        return max(P[0][0], Q[0][0]) < min(P[1][0], Q[1][0])
    for poly in (P, Q):
        for k in range(len(poly)):
            a, b = poly[k], poly[(k + 1) % len(poly)]
            sp = [orient2d(a, b, x) for x in P]
            sq = [orient2d(a, b, x) for x in Q]
            if max(sp) <= 0 <= min(sq) or max(sq) <= 0 <= min(sp):
                return False
    return True




def validate_decomposition(config: LatticeConfig, faces: Iterable) -> Decomposition:
    """Check a user-supplied face set and close it downward.

    Raises :class:`CoverageGap`, :class:`OverlapViolation` or
    :class:`BadIntersection`, each carrying the offending faces.
    """
    d = config.dim
    if d > 2:
        raise NotImplementedError("validation is implemented for d <= 2")
    sets = []
    for f in faces:
        mem = frozenset(f.members if isinstance(f, Face) else f)
        if not mem:
            raise BadIntersection("empty face", [mem])
        bad = [i for i in mem if not 0 <= i < len(config)]
        if bad:
            raise ToricError(f"face {sorted(mem)} has unknown labels {bad}")
        sets.append(mem)
    facets = sorted({s for s in sets if affine_rank([config.points[i] for i in s]) == d}, key=sorted)
    lower = {s for s in sets if affine_rank([config.points[i] for i in s]) < d}
    if not facets:
        raise CoverageGap("no full-dimensional faces", [])

    hulls = {F: _hull_vertices(config, F) for F in facets}
    for F, G in itertools.combinations(facets, 2):
        if _interiors_overlap(hulls[F], hulls[G], d):
            raise OverlapViolation(f"facets {sorted(F)} and {sorted(G)} overlap", [F, G])

    total = convex_hull(config).volume
    covered = sum((convex_hull(config.subconfig(sorted(F))).volume for F in facets), Fraction(0))
    if covered != total:
        raise CoverageGap(f"facets cover volume {covered} of {total}", facets)

    closures = {F: face_closure(config, F) for F in facets}
    polys = {F: convex_hull(config.subconfig(sorted(F))) for F in facets}
    for F, G in itertools.permutations(facets, 2):
        inside = frozenset(g for g in G if polys[F].contains(config.points[g]))
        if inside and inside not in closures[F]:
            raise BadIntersection(
                f"points {sorted(inside)} of {sorted(G)} meet conv{sorted(F)} outside a common face", [F, G]
            )
    all_faces = set().union(*closures.values())
    for S in lower:
        if S not in all_faces:
            raise BadIntersection(f"face {sorted(S)} is not a face of any facet", [S])
    return Decomposition(config, _decomposition_faces(config, facets), "user", None, "unknown", None, True)


# ---------------------------------------------------------------------------
# regularity certificates


@dataclass(frozen=True)
class Constraint:
    """``Σ coeffs[a]·λ(a) (>= rhs | = 0)`` in terms of the lifting values.

    ``kind == "fold"`` rows read ``ℓ_F(point) - λ(point) >= margin`` where
    ``ℓ_F`` interpolates λ affinely on facet ``facet``; ``kind == "flat"``
    rows say the same difference is zero for a member of the facet.
    """

    kind: str
    facet: int
    point: int
    coeffs: tuple[tuple[int, Fraction], ...]

    def evaluate(self, values) -> Fraction:
        return sum((c * values[a] for a, c in self.coeffs), Fraction(0))


@dataclass(frozen=True)
class RegularityCertificate:
    """Either a witness lifting with positive bending margin or a Farkas combination.

    For ``status == "irregular"`` the multipliers satisfy
    ``Σ fold_mult[i]·row_i - Σ flat_mult[j]·row_j == 0`` coefficientwise with
    ``fold_mult >= 0`` summing to a positive number, so adding up
    ``row_i(λ) - 1 >= 0`` gives ``-Σ fold_mult >= 0``: a contradiction.
    """

    status: str
    facets: tuple[frozenset, ...]
    witness: tuple[Fraction, ...] | None = None
    margin: Fraction | None = None
    fold_rows: tuple[Constraint, ...] = ()
    flat_rows: tuple[Constraint, ...] = ()
    fold_multipliers: tuple[Fraction, ...] = ()
    flat_multipliers: tuple[Fraction, ...] = ()
    decomposition: Decomposition | None = None

    @property
    def is_regular(self) -> bool:
        return self.status == "regular"

    def verify(self, config: LatticeConfig) -> bool:
        """Re-check the certificate with rational arithmetic only."""
        if self.status == "regular":
            return _check_witness(config, self.facets, self.witness, self.margin)
        fold = list(self.fold_multipliers)
        flat = list(self.flat_multipliers)
        if any(z < 0 for z in fold) or sum(fold) <= 0:
            return False
        total: dict[int, Fraction] = {}
        for z, row in zip(fold, self.fold_rows):
            for a, c in row.coeffs:
                total[a] = total.get(a, Fraction(0)) + z * c
        for y, row in zip(flat, self.flat_rows):
            for a, c in row.coeffs:
                total[a] = total.get(a, Fraction(0)) - y * c
        return all(v == 0 for v in total.values())


def _affine_basis(config, members) -> list[int]:
    return list(_affine_basis_cached(config, frozenset(members)))


@lru_cache(maxsize=65536)
def _affine_basis_cached(config, members) -> tuple[int, ...]:
    basis: list[int] = []
    for i in sorted(members):
        cand = basis + [i]
        if affine_rank([config.points[j] for j in cand]) == len(cand) - 1:
            basis = cand
        if len(basis) == config.dim + 1:
            break
    return tuple(basis)


def _interpolation_row(config, basis, point) -> dict[int, Fraction]:
    """Coefficients of ``ℓ(point)`` in the values of λ at ``basis`` (barycentric)."""
    return dict(_barycentric(config, tuple(basis), point))


@lru_cache(maxsize=65536)
def _barycentric(config, basis, point):
    d = config.dim
    A = [[config.points[b][k] for b in basis] for k in range(d)] + [[1] * len(basis)]
    rhs = list(config.points[point]) + [1]
    nums, den = cramer(A, rhs)
    return tuple((b, Fraction(c, den)) for b, c in zip(basis, nums) if c)


def _row(config, F_index, basis, point, kind) -> Constraint:
    coeffs = _interpolation_row(config, basis, point)
    coeffs[point] = coeffs.get(point, Fraction(0)) - 1
    return Constraint(kind, F_index, point, tuple(sorted((a, c) for a, c in coeffs.items() if c)))


def _nullspace(rows: list[list[Fraction]], n: int) -> list[list[Fraction]]:
    """Rational basis of ``{x : rows · x = 0}``."""
    M = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * n
        v[fcol] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -M[i][fcol]
        basis.append(v)
    return basis


def _integral(v: list[Fraction]) -> list[int]:
    L = lcm_denominators(v)
    return [int(x * L) for x in v]


def _integer_gaps(config, facets, values):
    """``(G, N)`` with ``G[k][a] / N == ℓ_F(a) - λ(a)`` for facet ``k``; all ints.

    ``ℓ_F`` is the affine function agreeing with λ on an affine basis of F.
    """
    D = lcm_denominators(values)
    lam = [int(v * D) for v in values]
    d = config.dim
    rows, dens = [], []
    for F in facets:
        basis = _affine_basis(config, F)
        sl, N = cramer([list(config.points[b]) + [1] for b in basis], [lam[b] for b in basis])
        rows.append([sum(c * x for c, x in zip(sl[:d], p)) + sl[d] - N * lam[a] for a, p in enumerate(config.points)])
        dens.append(N * D)
    L = 1
    for n_ in dens:
        L = math.lcm(L, n_)
    return [[g * (L // n_) for g in row] for row, n_ in zip(rows, dens)], L


def _check_witness(config, facets, values, margin) -> bool:
    """Every facet is flat under λ and every other point lies at least ``margin`` below."""
    if values is None or margin is None or margin <= 0:
        return False
    G, L = _integer_gaps(config, facets, values)
    bound = margin * L
    for F, gaps in zip(facets, G):
        for a, gap in enumerate(gaps):
            if a in F and gap != 0:
                return False
            if a not in F and gap < bound:
                return False
    return True


def certify_regularity(config: LatticeConfig, decomposition: Decomposition) -> RegularityCertificate:
    """Decide regularity exactly.

    Unknowns are the lifting values on points covered by some facet. Flat
    rows force λ to be affine on every facet; fold rows ask that across each
    interior ridge the neighbouring facet's point sits strictly below the
    facet's plane. Either a λ with all fold rows positive exists (regular), or
    by Gordan's alternative a nonnegative nonzero combination of fold rows
    lies in the span of the flat rows (irregular). Both outcomes are read
    off one exact phase-I simplex run, and the witness is checked against
    the full set of global constraints before being returned.
    """
    if not decomposition.validated:
        raise UnvalidatedInput("run validate_decomposition first")
    d = config.dim
    facets = [F.members for F in decomposition.facets]
    bases = [_affine_basis(config, F) for F in facets]
    flat = []
    for k, F in enumerate(facets):
        for a in sorted(F):
            if a not in bases[k]:
                flat.append(_row(config, k, bases[k], a, "flat"))
    fold = []
    for k, l in itertools.permutations(range(len(facets)), 2):
        shared = facets[k] & facets[l]
        if affine_rank([config.points[i] for i in shared]) != d - 1:
            continue
        g = min(facets[l] - facets[k])
        fold.append(_row(config, k, bases[k], g, "fold"))

    var = sorted(set().union(*facets))
    col = {a: j for j, a in enumerate(var)}
    n = len(var)

    def dense(row):
        v = [Fraction(0)] * n
        for a, c in row.coeffs:
            v[col[a]] = c
        return v

    flat_dense = [dense(r) for r in flat]
    fold_sparse = [[(col[a], c) for a, c in r.coeffs] for r in fold]
    # positive rescaling of fold rows and kernel vectors keeps the alternative
    # intact and lets K be computed in integers
    kernel = [_integral(v) for v in _nullspace(flat_dense, n)]
    fold_scale = [lcm_denominators(c for _, c in row) for row in fold_sparse]
    fold_int = [[(j, int(c * s)) for j, c in row] for row, s in zip(fold_sparse, fold_scale)]
    # K[i][t] = scaled fold_i applied to kernel vector t
    K = [[sum(c * v[j] for j, c in row) for v in kernel] for row in fold_int]

    if not fold:
        values = _normalize_witness(config, facets, bases, {a: Fraction(0) for a in var})
        cert = RegularityCertificate("regular", tuple(facets), values, Fraction(1), tuple(fold), tuple(flat))
        return replace(cert, decomposition=decomposition.with_regularity(cert))

    # Gordan system: K^T z = 0, 1^T z = 1, z >= 0
    A = [[K[i][t] for i in range(len(fold))] for t in range(len(kernel))] + [[1] * len(fold)]
    b = [0] * len(kernel) + [1]
    res = find_nonnegative(A, b)
    if res.status == "optimal":
        z = [zi * sc for zi, sc in zip(res.x, fold_scale)]
        v = [Fraction(0)] * n
        for zi, row in zip(z, fold_sparse):
            for j, c in row:
                v[j] += zi * c
        # v vanishes on ker(flat) so it is a combination of the flat rows
        y = solve([[r[j] for r in flat_dense] for j in range(n)], v) if flat else []
        if y is None:
            raise ToricError("internal error: Farkas combination not in the flat row span")
        cert = RegularityCertificate(
            "irregular", tuple(facets), None, None, tuple(fold), tuple(flat), tuple(z), tuple(y)
        )
        if not cert.verify(config):
            raise ToricError("internal error: irregularity certificate does not verify")
        return replace(cert, decomposition=decomposition.with_regularity(cert))

    theta = list(res.farkas[: len(kernel)])
    lam = [sum((th * vec[j] for th, vec in zip(theta, kernel)), Fraction(0)) for j in range(n)]
    values = _normalize_witness(config, facets, bases, {a: lam[col[a]] for a in var})
    margins = [r.evaluate(values) for r in fold]
    scale = min(margins)
    if scale <= 0:
        raise ToricError("internal error: Farkas vector is not a strict witness")
    values = tuple(v / scale for v in values)
    margin = _global_margin(config, facets, values)
    cert = RegularityCertificate("regular", tuple(facets), values, margin, tuple(fold), tuple(flat))
    if not cert.verify(config):
        raise ToricError("internal error: witness lifting fails the global constraints")
    return replace(cert, decomposition=decomposition.with_regularity(cert))


def _normalize_witness(config, facets, bases, partial: Mapping[int, Fraction]) -> tuple[Fraction, ...]:
    """Pin λ to zero on the first facet's affine basis; push uncovered points below."""
    d = config.dim
    basis = bases[0]
    A = [list(config.points[b]) + [1] for b in basis]
    coef = solve(A, [partial[b] for b in basis])
    values = {}
    for a, v in partial.items():
        values[a] = v - sum((c * x for c, x in zip(coef[:d], config.points[a])), Fraction(0)) - coef[d]
    rest = [a for a in config.labels if a not in values]
    if rest:
        full = [values.get(a, Fraction(0)) for a in config.labels]
        G, L = _integer_gaps(config, facets, full)
        for a in rest:
            # gap is ℓ_F(a) - 0 since the placeholder value is zero
            values[a] = Fraction(min(row[a] for row in G), L) - 1
    return tuple(values[a] for a in config.labels)


def _global_margin(config, facets, values) -> Fraction:
    G, L = _integer_gaps(config, facets, values)
    gaps = [g for F, row in zip(facets, G) for a, g in enumerate(row) if a not in F]
    return Fraction(min(gaps), L) if gaps else Fraction(1)


def certificate_matches(config: LatticeConfig, decomposition: Decomposition, cert: RegularityCertificate) -> bool:
    """Round trip: the witness lifting induces exactly the given face set."""
    if not cert.is_regular:
        return False
    again = regular_decomposition(config, Lifting(cert.witness))
    return again.face_sets == decomposition.face_sets
