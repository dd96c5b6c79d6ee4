"""Toric Bézier patches: basis functions, evaluation and binomial relations.

A patch is given by a lattice configuration ``A``, positive weights ``w``
and control points ``b_a``. It maps the polytope ``Δ_A`` by

    F(x) = Σ w_a b_a β_a(x) / Σ w_a β_a(x),   β_a(x) = Π_e h_e(x)^{h_e(a)}

with the ``h_e`` the primitive facet inequalities of ``Δ_A``. Binomial
coefficients are deliberately not part of ``β_a``; classical Bernstein
weights are recovered by multiplying ``w_a`` by the binomial coefficient.

Configurations that do not span their ambient space (edges of a surface
decomposition, say) are handled in their own lattice chart.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InvalidRelation, OutsideDomain, ToricError, ZeroDegree
from .exact import integer_kernel
from .lattice_geometry import LatticeConfig, convex_hull
from .lp import find_nonnegative

# slack for float points that sit on the boundary of the domain
DOMAIN_TOL = 1e-12


# ---------------------------------------------------------------------------
# domains


class Domain:
    """``Δ_A`` in the lattice chart of ``aff(A)``, with its facet inequalities."""

    def __init__(self, config: LatticeConfig):
        self.config = config
        self.chart = config.chart
        self.dim = self.chart.dim
        self.local = np.array(self.chart.local_points, dtype=np.int64).reshape(len(config), self.dim)
        if self.dim == 0:
            self.polytope = None
            self.normals = np.zeros((0, 0), dtype=np.int64)
            self.offsets = np.zeros(0, dtype=np.int64)
            self.H = np.zeros((len(config), 0), dtype=np.int64)
        else:
            self.polytope = convex_hull(config.reduced())
            self.normals = np.array([f.normal for f in self.polytope.facets], dtype=np.int64)
            self.offsets = np.array([f.offset for f in self.polytope.facets], dtype=np.int64)
            self.H = self.polytope.exponents
        self.ambient_is_local = config.affine_dim == config.dim

    def to_local(self, X) -> np.ndarray:
        """Map ambient points into the chart; raises if they leave ``aff(A)``."""
        X = np.asarray(X, dtype=float)
        X = X.reshape(-1, self.config.dim)
        if self.ambient_is_local:
            return X
        L = self.chart.to_local(X)
        back = self.chart.to_ambient(L)
        scale = 1.0 + np.abs(X).max(initial=0.0)
        if np.abs(back - X).max(initial=0.0) > DOMAIN_TOL * scale:
            raise OutsideDomain("point is not in the affine span of the configuration")
        return L

    def facet_values(self, L: np.ndarray, check: bool = True) -> np.ndarray:
        """``h_e`` at local points; entries within tolerance of zero are clamped."""
        if self.dim == 0:
            return np.zeros((L.shape[0], 0))
        Hx = _facet_sums(L, self.normals, self.offsets)
        scale = 1.0 + np.abs(L).max(initial=0.0) * np.abs(self.normals).max(initial=1)
        if check and (Hx < -DOMAIN_TOL * scale).any():
            bad = np.nonzero((Hx < -DOMAIN_TOL * scale).any(axis=1))[0][0]
            raise OutsideDomain(f"sample {bad} lies outside the patch domain")
        return np.maximum(Hx, 0.0)


def _facet_sums(L: np.ndarray, normals: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """``offsets + L @ normals.T`` with compensated summation.

    Near a facet ``h`` is a small difference of O(1) terms; adding the
    products to the offset one by one with TwoSum error terms keeps ``h``
    accurate to a few ulps of itself rather than of the terms.
    """
    L = np.asarray(L, dtype=float)
    s = np.broadcast_to(offsets.astype(float), (L.shape[0], offsets.shape[0])).copy()
    comp = np.zeros_like(s)
    N = normals.astype(float)
    for k in range(L.shape[1]):
        p = L[:, k : k + 1] * N[None, :, k]
        t = s + p
        bp = t - s
        comp += (s - (t - bp)) + (p - bp)
        s = t
    return s + comp


_domains: dict = {}


def domain(config: LatticeConfig) -> Domain:
    d = _domains.get(config)
    if d is None:
        d = _domains[config] = Domain(config)
    return d


# ---------------------------------------------------------------------------
# patch data


@dataclass(frozen=True, eq=False)
class PatchSpec:
    """Configuration, positive weights and control points (one row per label)."""

    config: LatticeConfig
    weights: np.ndarray
    control_points: np.ndarray

    def __post_init__(self):
        n = len(self.config)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.shape[0] != n:
            raise ToricError(f"expected {n} weights, got {w.shape[0]}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ToricError("weights must be finite and strictly positive")
        B = np.array(self.control_points, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if B.shape[0] != n:
            raise ToricError(f"expected {n} control points, got {B.shape[0]}")
        if not np.all(np.isfinite(B)):
            raise ToricError("control points must be finite")
        w.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "control_points", B)

    @property
    def n(self) -> int:
        return self.control_points.shape[1]

    @cached_property
    def domain(self) -> Domain:
        return domain(self.config)

    def restrict(self, labels: Sequence[int]) -> "PatchSpec":
        """Sub-patch on the given labels, in the given order."""
        labels = list(labels)
        return PatchSpec(self.config.subconfig(labels), self.weights[labels], self.control_points[labels])

    def with_weights(self, weights) -> "PatchSpec":
        return PatchSpec(self.config, weights, self.control_points)


# ---------------------------------------------------------------------------
# classical shapes


def _check_degree(*degs):
    for d in degs:
        if isinstance(d, bool) or int(d) != d or d < 1:
            raise ZeroDegree(f"degrees must be positive integers, got {d!r}")


def bezier_curve(d: int) -> LatticeConfig:
    """``{0, 1, ..., d}``."""
    _check_degree(d)
    return LatticeConfig(1, tuple((i,) for i in range(d + 1)))


def tensor_patch(c: int, d: int) -> LatticeConfig:
    """``[0,c] x [0,d]`` grid, x varying fastest (rows bottom to top)."""
    _check_degree(c, d)
    return LatticeConfig(2, tuple((i, j) for j in range(d + 1) for i in range(c + 1)))


def triangle_patch(d: int) -> LatticeConfig:
    """Lattice points of ``d▲ = {x, y >= 0, x + y <= d}``, row by row."""
    _check_degree(d)
    return LatticeConfig(2, tuple((i, j) for j in range(d + 1) for i in range(d + 1 - j)))


# ---------------------------------------------------------------------------
# basis functions and evaluation


def _as_samples(config: LatticeConfig, x):
    """Rows of sample points plus a flag telling whether a single point was given.

    For curves a scalar is one point and a flat array is a list of points;
    otherwise a flat array of length d is one point.
    """
    X = np.asarray(x, dtype=float)
    d = config.dim
    if X.ndim == 0:
        if d != 1:
            raise OutsideDomain(f"points must have {d} coordinates")
        return X.reshape(1, 1), True
    if X.ndim == 1:
        if d == 1:
            return X.reshape(-1, 1), False
        if X.shape[0] != d:
            raise OutsideDomain(f"points must have {d} coordinates")
        return X.reshape(1, d), True
    if X.ndim != 2 or X.shape[1] != d:
        raise OutsideDomain(f"points must have {d} coordinates")
    return X, False


def basis_values(config: LatticeConfig, x) -> np.ndarray:
    """All ``β_a(x)``, shape (nsamples, npts) (or (npts,) for a single point)."""
    X, single = _as_samples(config, x)
    dom = domain(config)
    Hx = dom.facet_values(dom.to_local(X))
    B = np.exp(kernels.log_basis(dom.H, Hx))
    return B[0] if single else B


def toric_basis(config: LatticeConfig, a: int, x) -> np.ndarray | float:
    """``β_a(x) = Π_e h_e(x)^{h_e(a)}`` with the convention ``0^0 = 1``."""
    if not 0 <= a < len(config):
        raise ToricError(f"label {a} is not in the configuration")
    vals = basis_values(config, x)
    out = vals[..., a]
    return float(out) if np.ndim(out) == 0 else out


def beta_map(config: LatticeConfig, x) -> np.ndarray:
    """Normalized basis vector: a point of the simplex with coordinates indexed by A."""
    X, single = _as_samples(config, x)
    dom = domain(config)
    L = kernels.log_basis(dom.H, dom.facet_values(dom.to_local(X)))
    Z = kernels.normalized_coefficients(L, np.zeros(len(config)))
    return Z[0] if single else Z


def weight_action(w, z) -> np.ndarray:
    """``w·[z_a] = [w_a z_a]``, renormalized to the simplex."""
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(w <= 0):
        raise ToricError("weights must be strictly positive")
    out = z * w
    return out / out.sum(axis=-1, keepdims=True)


def project(B, z) -> np.ndarray:
    """``π_B(z) = Σ_a z_a b_a``."""
    return np.asarray(z, dtype=float) @ np.asarray(B, dtype=float)


def coefficients(spec: PatchSpec, x, weights=None) -> np.ndarray:
    """Normalized coefficients ``w_a β_a(x) / Σ w β`` for float points ``x``."""
    X, single = _as_samples(spec.config, x)
    dom = spec.domain
    w = spec.weights if weights is None else np.asarray(weights, dtype=float)
    L = kernels.log_basis(dom.H, dom.facet_values(dom.to_local(X)))
    P = kernels.normalized_coefficients(L, np.log(w))
    return P[0] if single else P


def evaluate(spec: PatchSpec, x, weights=None) -> np.ndarray:
    """``F_{A,w,B}(x)``; evaluated in log space so huge weight ratios are safe."""
    return project(spec.control_points, coefficients(spec, x, weights))


# ---------------------------------------------------------------------------
# evaluation at exact rational points through the moment map


def _group_by_face(Hint: np.ndarray):
    """Group sample rows by the set of facets they lie on."""
    tight = Hint == 0
    keys: dict[bytes, list[int]] = {}
    for i, row in enumerate(tight):
        keys.setdefault(row.tobytes(), []).append(i)
    return [(np.frombuffer(k, dtype=bool), np.array(v)) for k, v in keys.items()]


def moment_coefficients(spec: PatchSpec, num: np.ndarray, den: int, weights=None, impl=None) -> np.ndarray:
    """Simplex points of the patch whose weighted moment ``Σ p_a a`` is ``num/den``.

    ``num`` holds integer local coordinates (one row per sample) over the
    common denominator ``den``, so the face of ``Δ_A`` containing each sample
    is found exactly; samples on a proper face are solved on that face alone.
    The moment map is a homeomorphism from the patch's simplex image onto
    ``Δ_A``, so this is a reparametrization of the same point set.
    """
    dom = spec.domain
    w = spec.weights if weights is None else np.asarray(weights, dtype=float)
    logw = np.log(w)
    num = np.asarray(num, dtype=np.int64).reshape(-1, dom.dim)
    ns = num.shape[0]
    P = np.zeros((ns, len(spec.config)))
    if dom.dim == 0:
        P[:, 0] = 1.0
        return P
    Hint = num @ dom.normals.T + dom.offsets[None, :] * den
    if (Hint < 0).any():
        raise OutsideDomain("sample lies outside the patch domain")
    for tight, rows in _group_by_face(Hint):
        on_face = np.nonzero((dom.H[:, tight] == 0).all(axis=1))[0]
        Y = num[rows].astype(float) / den
        if on_face.size == 1:
            P[rows, on_face[0]] = 1.0
            continue
        if not tight.any():
            A = dom.local.astype(float)
            Yl = Y
        else:
            sub = LatticeConfig(dom.dim, tuple(tuple(int(c) for c in dom.local[a]) for a in on_face))
            ch = sub.chart
            A = np.array(ch.local_points, dtype=float).reshape(on_face.size, ch.dim)
            Yl = ch.to_local(Y).reshape(-1, ch.dim)
        Pf, _ = kernels.moment_inverse(A, logw[on_face], Yl, impl=impl)
        P[np.ix_(rows, on_face)] = Pf
    return P


# ---------------------------------------------------------------------------
# binomial relations


@dataclass(frozen=True)
class BinomialRelation:
    """Two probability vectors on A with the same barycenter.

    Every point ``z`` of the translated toric variety satisfies
    ``Π z_a^{α_a} Π w_a^{β_a} = Π z_a^{β_a} Π w_a^{α_a}``.
    """

    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]

    @classmethod
    def checked(cls, config: LatticeConfig, alpha, beta) -> "BinomialRelation":
        n = len(config)
        alpha = tuple(Fraction(v) for v in alpha)
        beta = tuple(Fraction(v) for v in beta)
        if len(alpha) != n or len(beta) != n:
            raise InvalidRelation(f"relation vectors must have length {n}")
        if any(v < 0 for v in alpha + beta):
            raise InvalidRelation("relation coefficients must be nonnegative")
        if sum(alpha) != 1 or sum(beta) != 1:
            raise InvalidRelation("relation coefficients must sum to one")
        for k in range(config.dim):
            if sum(a * p[k] for a, p in zip(alpha, config.points)) != sum(
                b * p[k] for b, p in zip(beta, config.points)
            ):
                raise InvalidRelation("the two sides have different barycenters")
        return cls(alpha, beta)


def relations_from_kernel(config: LatticeConfig) -> list[BinomialRelation]:
    """Spanning set of relations: integer affine dependencies of A, split by sign."""
    rows = [list(col) for col in zip(*config.points)] + [[1] * len(config)]
    out = []
    for v in integer_kernel(rows, ncols=len(config)):
        pos = [max(c, 0) for c in v]
        neg = [max(-c, 0) for c in v]
        s = sum(pos)
        if s == 0:
            continue
        out.append(BinomialRelation.checked(config, [Fraction(c, s) for c in pos], [Fraction(c, s) for c in neg]))
    return out


def hull_intersection_relation(config: LatticeConfig, F, G) -> BinomialRelation | None:
    """Relation supported on F and G from a common point of their convex hulls.

    Returns ``None`` when the hulls do not meet.
    """
    F, G = sorted(F), sorted(G)
    if set(F) & set(G):
        raise InvalidRelation("F and G must be disjoint")
    d = config.dim
    A = []
    for k in range(d):
        A.append([config.points[a][k] for a in F] + [-config.points[b][k] for b in G])
    A.append([1] * len(F) + [0] * len(G))
    A.append([0] * len(F) + [1] * len(G))
    res = find_nonnegative(A, [0] * d + [1, 1])
    if res.status != "optimal":
        return None
    alpha = [Fraction(0)] * len(config)
    beta = [Fraction(0)] * len(config)
    for a, v in zip(F, res.x[: len(F)]):
        alpha[a] = v
    for b, v in zip(G, res.x[len(F) :]):
        beta[b] = v
    return BinomialRelation.checked(config, alpha, beta)


def _log_monomial(coef: np.ndarray, logv: np.ndarray) -> np.ndarray:
    # Σ coef_a log v_a with 0·log 0 = 0
    mask = coef > 0
    return (logv[..., mask] * coef[mask]).sum(axis=-1)


def binomial_residuals(spec: PatchSpec, relations, samples, weights=None) -> np.ndarray:
    """Residual of every relation at every sample, shape (nrelations, nsamples)."""
    w = spec.weights if weights is None else np.asarray(weights, dtype=float)
    Z = np.atleast_2d(weight_action(w, beta_map(spec.config, samples)))
    with np.errstate(divide="ignore"):
        logz = np.log(Z)
    logw = np.log(w)
    out = np.zeros((len(relations), Z.shape[0]))
    for r, rel in enumerate(relations):
        al = np.array([float(v) for v in rel.alpha])
        be = np.array([float(v) for v in rel.beta])
        lhs = _log_monomial(al, logz) + _log_monomial(be, logw)
        rhs = _log_monomial(be, logz) + _log_monomial(al, logw)
        out[r] = np.abs(np.exp(lhs) - np.exp(rhs))
    return out


def check_binomial_relations(spec: PatchSpec, relations, samples, weights=None) -> float:
    """Maximum residual of the relations over the sampled points of the patch."""
    for rel in relations:
        if len(rel.alpha) != len(spec.config):
            raise InvalidRelation("relation does not match the configuration")
        BinomialRelation.checked(spec.config, rel.alpha, rel.beta)
    if not relations:
        return 0.0
    res = binomial_residuals(spec, relations, samples, weights)
    return float(res.max()) if res.size else 0.0


def vertex_labels(config: LatticeConfig) -> tuple[int, ...]:
    """Labels of the vertices of ``Δ_A``."""
    dom = domain(config)
    if dom.polytope is None:
        return (0,)
    return tuple(sorted(dom.polytope.vertices))


__all__ = [
    "BinomialRelation",
    "Domain",
    "PatchSpec",
    "basis_values",
    "beta_map",
    "bezier_curve",
    "check_binomial_relations",
    "coefficients",
    "domain",
    "evaluate",
    "hull_intersection_relation",
    "moment_coefficients",
    "project",
    "relations_from_kernel",
    "tensor_patch",
    "toric_basis",
    "triangle_patch",
    "weight_action",
]
