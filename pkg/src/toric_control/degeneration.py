"""Toric degenerations, control surfaces, sampling and Hausdorff convergence.

With weights ``t^λ(a) w_a`` the patch converges, as ``t`` grows, to the
control surface assembled from sub-patches on the facets of the regular
decomposition induced by ``λ``. The sweep here measures that convergence
with discrete Hausdorff distances and reports the sampling error alongside.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .errors import EmptySet, FaceNotSubset, NonpositiveT, ToricError, UnvalidatedInput
from .lattice_geometry import LatticeConfig
from .subdivision import Decomposition, Lifting, regular_decomposition
from .toric_patch import PatchSpec, domain, moment_coefficients

# ---------------------------------------------------------------------------
# weights


def _lift_array(lifting) -> np.ndarray:
    vals = lifting.values if isinstance(lifting, Lifting) else lifting
    return np.array([float(Fraction(v)) for v in vals])


def degeneration_log_weights(w, lifting, t) -> np.ndarray:
    """``log(t^λ(a) w_a)``; the form used internally so huge ``t`` never overflows."""
    if not t > 0:
        raise NonpositiveT(f"t must be positive, got {t!r}")
    w = np.asarray(w, dtype=float)
    lam = _lift_array(lifting)
    if lam.shape != w.shape:
        raise ToricError("lifting and weights have different lengths")
    return np.log(w) + lam * math.log(t)


def degeneration_weights(w, lifting, t) -> np.ndarray:
    """Componentwise ``t^λ(a) · w_a``."""
    if not t > 0:
        raise NonpositiveT(f"t must be positive, got {t!r}")
    w = np.asarray(w, dtype=float)
    lam = _lift_array(lifting)
    if lam.shape != w.shape:
        raise ToricError("lifting and weights have different lengths")
    return w * np.power(float(t), lam)


@dataclass(frozen=True, eq=False)
class DegenerationFamily:
    spec: PatchSpec
    lifting: Lifting

    def weights(self, t) -> np.ndarray:
        return degeneration_weights(self.spec.weights, self.lifting, t)

    def log_weights(self, t) -> np.ndarray:
        return degeneration_log_weights(self.spec.weights, self.lifting, t)

    def at(self, t) -> PatchSpec:
        return self.spec.with_weights(self.weights(t))


# ---------------------------------------------------------------------------
# control surfaces


@dataclass(frozen=True, eq=False)
class ControlSurface:
    """Union of the sub-patches ``(F, w|_F, B|_F)`` over the faces of a decomposition."""

    spec: PatchSpec
    decomposition: Decomposition
    pieces: dict = field(repr=False)

    @property
    def facets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(f.labels for f in self.decomposition.facets)

    @property
    def regularity(self) -> str:
        return self.decomposition.regularity

    def piece(self, members) -> PatchSpec:
        return self.pieces[frozenset(members)]

    def facet_pieces(self) -> list[tuple[tuple[int, ...], PatchSpec]]:
        return [(labels, self.pieces[frozenset(labels)]) for labels in self.facets]

    def max_facet_diameter(self) -> float:
        """Largest distance between two control points of a common facet."""
        best = 0.0
        for labels in self.facets:
            B = self.spec.control_points[list(labels)]
            D = B[:, None, :] - B[None, :, :]
            best = max(best, float(np.sqrt((D * D).sum(-1)).max()))
        return best


def control_surface(spec: PatchSpec, decomposition: Decomposition) -> ControlSurface:
    """Restrict weights and control points to every face of the decomposition.

    Works for irregular decompositions too; only the limit statement needs
    regularity.
    """
    if not decomposition.validated:
        raise UnvalidatedInput("control surfaces need a validated decomposition")
    labels = set(spec.config.labels)
    if decomposition.config != spec.config:
        raise FaceNotSubset("decomposition is over a different configuration")
    pieces = {}
    for f in decomposition.faces:
        if not f.members <= labels:
            raise FaceNotSubset(f"face {sorted(f.members)} is not a subset of the configuration")
        pieces[f.members] = spec.restrict(f.labels)
    return ControlSurface(spec, decomposition, pieces)


# ---------------------------------------------------------------------------
# domain grids


@dataclass(frozen=True, eq=False)
class DomainGrid:
    """Exact rational grid ``num / den`` in the local chart, plus mesh cells."""

    num: np.ndarray
    den: int
    cells: tuple[tuple[int, ...], ...]

    @property
    def points(self) -> np.ndarray:
        return self.num / self.den


def _triangle_grid(v0, v1, v2, m):
    M = m - 1
    index = {}
    num = []
    for j in range(m):
        for i in range(m - j):
            index[(i, j)] = len(num)
            num.append([(M - i - j) * a + i * b + j * c for a, b, c in zip(v0, v1, v2)])
    cells = []
    for j in range(m - 1):
        for i in range(m - 1 - j):
            cells.append((index[(i, j)], index[(i + 1, j)], index[(i, j + 1)]))
            if i + j + 2 <= M:
                cells.append((index[(i + 1, j)], index[(i + 1, j + 1)], index[(i, j + 1)]))
    return num, cells


def domain_grid(config: LatticeConfig, m: int) -> DomainGrid:
    """Sample grid on ``Δ_A`` with ``m`` points along every edge.

    Intervals get ``m`` equispaced points, parallelograms an ``m x m``
    bilinear grid, triangles the triangular grid, and other polygons a fan of
    triangular grids glued along shared edges. Coordinates are exact.
    """
    if m < 2:
        raise ToricError(f"resolution must be at least 2, got {m}")
    dom = domain(config)
    M = m - 1
    if dom.dim == 0:
        return DomainGrid(np.zeros((1, 0), dtype=np.int64), 1, ((0,),))
    verts = [tuple(int(c) for c in dom.local[v]) for v in dom.polytope.ordered_vertices]
    if dom.dim == 1:
        lo, hi = verts[0][0], verts[-1][0]
        num = np.array([[lo * M + i * (hi - lo)] for i in range(m)], dtype=np.int64)
        return DomainGrid(num, M, tuple((i, i + 1) for i in range(M)))
    if dom.dim != 2:
        raise NotImplementedError("grids are implemented for dimensions 1 and 2")
    if len(verts) == 4 and all(verts[0][k] + verts[2][k] == verts[1][k] + verts[3][k] for k in range(2)):
        v0, v1, v3 = verts[0], verts[1], verts[3]
        num = [[M * v0[k] + i * (v1[k] - v0[k]) + j * (v3[k] - v0[k]) for k in range(2)] for j in range(m) for i in range(m)]
        cells = tuple((j * m + i, j * m + i + 1, (j + 1) * m + i + 1, (j + 1) * m + i) for j in range(M) for i in range(M))
        return DomainGrid(np.array(num, dtype=np.int64), M, cells)
    num_all: list = []
    index: dict = {}
    cells = []
    for k in range(1, len(verts) - 1):
        num, tri = _triangle_grid(verts[0], verts[k], verts[k + 1], m)
        remap = []
        for p in num:
            key = tuple(p)
            if key not in index:
                index[key] = len(num_all)
                num_all.append(p)
            remap.append(index[key])
        cells.extend(tuple(remap[i] for i in c) for c in tri)
    return DomainGrid(np.array(num_all, dtype=np.int64), M, tuple(cells))


# ---------------------------------------------------------------------------
# samples


@dataclass(frozen=True, eq=False)
class SamplePiece:
    name: str
    start: int
    stop: int
    cells: tuple[tuple[int, ...], ...]  # global vertex indices


@dataclass(frozen=True, eq=False)
class SampledSet:
    """Sample points with their mesh connectivity, grouped by piece."""

    points: np.ndarray
    pieces: tuple[SamplePiece, ...]
    source: str
    m: int
    param: str = "affine"

    def __len__(self):
        return self.points.shape[0]

    @property
    def pitch(self) -> float:
        """Largest image distance between mesh-adjacent samples."""
        cells = [c for piece in self.pieces for c in piece.cells]
        return _pitch(self.points, _edges(cells))


def _patch_points(spec: PatchSpec, grid: DomainGrid, logw: np.ndarray, param: str, impl=None) -> np.ndarray:
    if param == "moment":
        P = moment_coefficients(spec, grid.num, grid.den, weights=np.exp(logw - logw.max()), impl=impl)
    elif param == "affine":
        dom = spec.domain
        Hx = dom.facet_values(grid.points)
        L = kernels.log_basis(dom.H, Hx, impl=impl)
        P = kernels.normalized_coefficients(L, logw, impl=impl)
    else:
        raise ValueError(f"unknown parametrization {param!r}")
    return P @ spec.control_points


def _full_dimensional(spec: PatchSpec) -> PatchSpec:
    if spec.config.affine_dim == spec.config.dim or spec.config.affine_dim == 0:
        return spec
    return PatchSpec(spec.config.reduced(), spec.weights, spec.control_points)


def sample(obj, m: int, param: str = "affine", weights=None, impl=None) -> SampledSet:
    """Sample a patch on a grid over its domain, or a control surface facet by facet.

    ``param="affine"`` evaluates the patch formula at grid points of the
    domain; ``param="moment"`` places the samples at prescribed moment-map
    values, which follows the same point set but keeps the samples spread
    out when weights are extreme.
    """
    if m < 2:
        raise ToricError(f"resolution must be at least 2, got {m}")
    if isinstance(obj, ControlSurface):
        chunks, pieces, start = [], [], 0
        for labels, piece in obj.facet_pieces():
            sp = _full_dimensional(piece)
            grid = domain_grid(sp.config, m)
            pts = _patch_points(sp, grid, np.log(sp.weights), param, impl)
            chunks.append(pts)
            cells = tuple(tuple(start + i for i in c) for c in grid.cells)
            pieces.append(SamplePiece("facet_" + "_".join(map(str, labels)), start, start + len(pts), cells))
            start += len(pts)
        return SampledSet(np.vstack(chunks), tuple(pieces), "control_surface", m, param)
    if isinstance(obj, PatchSpec):
        sp = _full_dimensional(obj)
        grid = domain_grid(sp.config, m)
        w = sp.weights if weights is None else np.asarray(weights, dtype=float)
        pts = _patch_points(sp, grid, np.log(w), param, impl)
        return SampledSet(pts, (SamplePiece("patch", 0, len(pts), grid.cells),), "patch", m, param)
    raise TypeError(f"cannot sample {type(obj).__name__}")


def _as_points(X) -> np.ndarray:
    P = X.points if isinstance(X, SampledSet) else np.asarray(X, dtype=float)
    if P.ndim == 0:
        return P.reshape(1, 1)
    if P.ndim == 1:
        return P.reshape(-1, 1)
    return P.reshape(P.shape[0], int(np.prod(P.shape[1:])))


def hausdorff_distance(X, Y, method: str = "auto", impl=None) -> float:
    """Symmetric discrete Hausdorff distance ``max(h(X,Y), h(Y,X))``.

    ``method`` is ``"brute"`` (exact scan with early exit), ``"grid"``
    (spatial index) or ``"auto"``; all three return the same value. The
    distance between the sampled sets approximates the distance between the
    underlying surfaces up to the sampling pitch.
    """
    A, B = _as_points(X), _as_points(Y)
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    if A.shape[1] != B.shape[1]:
        raise ToricError("point sets live in different dimensions")
    if A.shape[1] > 3:
        da = cKDTree(B).query(A)[0].max()
        db = cKDTree(A).query(B)[0].max()
        return float(max(da, db))
    if method == "auto":
        # the numba scan exits early and wins at desk scale; numpy has the k-d tree
        small = A.shape[0] * B.shape[0] <= 4_000_000
        method = "brute" if small and kernels.backend(impl) is kernels.numba_backend else "grid"
    return max(kernels.directed_hausdorff(A, B, method, impl), kernels.directed_hausdorff(B, A, method, impl))


# ---------------------------------------------------------------------------
# convergence sweeps


def default_schedule(lifting, n: int = 5, ratio: float = 5.0) -> list[float]:
    """Geometric schedule ``1, 5, 25, ...`` stopping before ``t^spread`` overflows."""
    vals = [float(Fraction(v)) for v in getattr(lifting, "values", lifting)]
    spread = max(vals) - min(vals)
    cap = 600.0 / spread if spread > 0 else float("inf")
    out = []
    for k in range(n):
        t = ratio**k
        if math.log(t) > cap:
            break
        out.append(t)
    return out


def tolerance(surface: ControlSurface, m: int, scale: float = 1.0) -> float:
    """``τ(m) = 3 · (max facet diameter) / m``, times ``scale``."""
    return scale * 3.0 * surface.max_facet_diameter() / m


@dataclass(frozen=True)
class SweepRow:
    t: float
    hausdorff: float
    sampling_pitch: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    m: int
    tau: float

    @property
    def distances(self) -> list[float]:
        return [r.hausdorff for r in self.rows]

    def nonincreasing(self, noise: float = 0.0) -> bool:
        d = self.distances
        return all(b <= a + noise for a, b in zip(d, d[1:]))

    @property
    def converged_from(self) -> float | None:
        """Smallest scheduled ``t`` from which every later row passes."""
        out = None
        for r in reversed(self.rows):
            if not r.passed:
                break
            out = r.t
        return out

    def verdict(self) -> bool:
        """The convergence criterion: final row passes, column nonincreasing up to τ/10 noise."""
        return bool(self.rows) and self.rows[-1].passed and self.nonincreasing(self.tau / 10.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,hausdorff,sampling_pitch,threshold,pass\n")
        for r in self.rows:
            buf.write(f"{r.t!r},{r.hausdorff!r},{r.sampling_pitch!r},{r.threshold!r},{'true' if r.passed else 'false'}\n")
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class _SweepPlan:
    spec: PatchSpec
    grids: tuple
    cells: tuple
    target: np.ndarray
    target_pitch: float


def _facet_grids(spec: PatchSpec, decomposition: Decomposition, m: int):
    grids, cells, start = [], [], 0
    for F in decomposition.facets:
        g = domain_grid(spec.config.subconfig(F.labels), m)
        grids.append(g)
        cells.extend(tuple(start + i for i in c) for c in g.cells)
        start += g.num.shape[0]
    return grids, tuple(cells)


def _edges(cells) -> np.ndarray:
    """Unique undirected mesh edges of polygonal cells, shape (nedges, 2)."""
    by_len: dict[int, list] = {}
    for c in cells:
        if len(c) >= 2:
            by_len.setdefault(len(c), []).append(c)
    parts = []
    for k, cs in by_len.items():
        C = np.asarray(cs, dtype=np.int64)
        E = np.stack([C, np.roll(C, -1, axis=1)], axis=-1).reshape(-1, 2) if k > 2 else C
        parts.append(np.sort(E, axis=1))
    if not parts:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(np.vstack(parts), axis=0)


def _pitch(points: np.ndarray, edges: np.ndarray) -> float:
    if edges.shape[0] == 0:
        return 0.0
    D = points[edges[:, 0]] - points[edges[:, 1]]
    return float(np.sqrt((D * D).sum(-1).max()))


def _family_points(spec: PatchSpec, grids, logw, impl=None) -> np.ndarray:
    w = np.exp(logw - logw.max())
    out = []
    for g in grids:
        out.append(moment_coefficients(spec, g.num, g.den, weights=w, impl=impl) @ spec.control_points)
    return np.vstack(out)


def sample_family(spec: PatchSpec, lifting, t: float, grids, impl=None) -> np.ndarray:
    """Points of the degenerated patch at the moment values of ``grids``."""
    logw = degeneration_log_weights(spec.weights, lifting, t)
    return _family_points(spec, grids, logw, impl)


def sample_surface_on_facet_grids(surface: ControlSurface, m: int, impl=None) -> tuple[np.ndarray, tuple]:
    """Control-surface samples facet by facet, each facet on its own moment grid."""
    spec = surface.spec
    grids, cells = _facet_grids(spec, surface.decomposition, m)
    out = []
    for F, g in zip(surface.decomposition.facets, grids):
        piece = surface.piece(F.labels)
        out.append(moment_coefficients(piece, g.num, g.den, impl=impl) @ piece.control_points)
    return np.vstack(out), cells


def convergence_sweep(
    spec: PatchSpec,
    lifting,
    schedule: Sequence[float],
    m: int,
    *,
    surface: ControlSurface | None = None,
    tolerance_scale: float = 1.0,
    workers: int = 1,
    method: str = "auto",
    impl=None,
) -> SweepResult:
    """Hausdorff distance from the degenerated patch to a control surface, per ``t``.

    By default the target is the control surface of the regular decomposition
    induced by ``lifting``; pass ``surface`` to measure the distance to any
    other control surface on the same configuration. Samples of the patch and
    of the target sit at identical moment-map values on the facet grids, so
    the discrete distance tracks the continuous one up to the reported pitch.
    Rows are computed independently and sorted by ``t``, so the result does
    not depend on ``workers``.
    """
    schedule = [float(t) for t in schedule]
    if not schedule:
        raise ToricError("schedule is empty")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ToricError("schedule must be strictly increasing")
    if schedule[0] < 1:
        raise ToricError("schedule must start at t >= 1")
    if m < 2:
        raise ToricError(f"resolution must be at least 2, got {m}")
    spec = _full_dimensional(spec)
    lam = lifting if isinstance(lifting, Lifting) else Lifting.of(spec.config, lifting)
    S = regular_decomposition(spec.config, lam)
    if surface is None:
        surface = control_surface(spec, S)
    elif surface.spec.config != spec.config and _full_dimensional(surface.spec).config != spec.config:
        raise FaceNotSubset("target surface is over a different configuration")
    target, tcells = sample_surface_on_facet_grids(surface, m, impl)
    tpitch = _pitch(target, _edges(tcells))
    grids, cells = _facet_grids(spec, S, m)
    edges = _edges(cells)
    tau = tolerance(surface, m, tolerance_scale)

    def row(t):
        pts = sample_family(spec, lam, t, grids, impl)
        d = hausdorff_distance(pts, target, method, impl)
        pitch = max(_pitch(pts, edges), tpitch)
        return SweepRow(t, d, pitch, tau, d < tau)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(row, schedule))
    else:
        rows = [row(t) for t in schedule]
    rows.sort(key=lambda r: r.t)
    return SweepResult(tuple(rows), m, tau)


# ---------------------------------------------------------------------------
# support decay


@dataclass(frozen=True)
class DecayReport:
    """Largest simplex mass off the realization ``|S_λ|`` at one value of ``t``.

    ``pairs`` maps label pairs lying in no common face to the max over the
    samples of ``min(z_a, z_b)``; ``points`` maps labels in no face to the max
    of ``z_c``.
    """

    t: float
    pairs: dict
    points: dict

    @property
    def empty(self) -> bool:
        return not self.pairs and not self.points

    @property
    def worst(self) -> float:
        vals = list(self.pairs.values()) + list(self.points.values())
        return max(vals) if vals else 0.0


def support_decay_probe(spec: PatchSpec, lifting, t: float, samples) -> DecayReport:
    """Mass of the degenerating simplex points outside ``|S_λ|``.

    ``samples`` are domain points or an integer grid resolution.
    """
    if not t >= 1:
        raise ToricError(f"t must be at least 1, got {t!r}")
    spec = _full_dimensional(spec)
    lam = lifting if isinstance(lifting, Lifting) else Lifting.of(spec.config, lifting)
    S = regular_decomposition(spec.config, lam)
    if isinstance(samples, (int, np.integer)):
        X = domain_grid(spec.config, int(samples)).points
    else:
        X = np.asarray(samples, dtype=float).reshape(-1, spec.config.dim)
    dom = spec.domain
    L = kernels.log_basis(dom.H, dom.facet_values(X))
    logw = degeneration_log_weights(spec.weights, lam, t)
    Z = kernels.normalized_coefficients(L, logw)
    pairs = {(a, b): float(np.minimum(Z[:, a], Z[:, b]).max()) for a, b in S.pairs_in_no_common_face()}
    points = {c: float(Z[:, c].max()) for c in S.points_in_no_face}
    return DecayReport(float(t), pairs, points)
