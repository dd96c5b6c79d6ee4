"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed even when output capture is on.
"""
import time
from fractions import Fraction

import numpy as np
import pytest

from toric_control import artifact_io as aio
from toric_control.cli import main as cli_main
from toric_control.degeneration import control_surface, convergence_sweep, domain_grid, support_decay_probe
from toric_control.lattice_geometry import convex_hull
from toric_control.lattice_geometry import LatticeConfig
from toric_control.subdivision import (
    certificate_matches,
    certify_regularity,
    regular_decomposition,
    validate_decomposition,
)
from toric_control.toric_patch import (
    PatchSpec,
    basis_values,
    beta_map,
    bezier_curve,
    check_binomial_relations,
    coefficients,
    domain,
    moment_coefficients,
    evaluate,
    project,
    relations_from_kernel,
    tensor_patch,
    toric_basis,
    triangle_patch,
    vertex_labels,
    weight_action,
)

SCHEDULE = (1, 5, 25, 125, 625)
M = 65
# distance floor to the irregular pinwheel surface, measured on the first run
# (minimum over the schedule was 0.63163 at m=65) and pinned here
PINWHEEL_FLOOR = 0.63


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return emit


def _interior(rng, cfg, n):
    dom = domain(cfg)
    lo, hi = dom.local.min(0), dom.local.max(0)
    out = np.zeros((0, cfg.dim))
    while out.shape[0] < n:
        X = rng.uniform(lo, hi, size=(4 * n, cfg.dim))
        X = X[np.all(dom.facet_values(X, check=False) > 1e-9, axis=1)]
        out = np.vstack([out, X])
    return out[:n]


def test_criterion_01_cubic_decomposition(report):
    cfg = bezier_curve(3)
    t0 = time.perf_counter()
    dec = regular_decomposition(cfg, [0, 1, 2, 0])
    dt = time.perf_counter() - t0
    got = sorted(sorted(f.labels) for f in dec.facets)
    ok = got == [[0, 1, 2], [2, 3]] and dt < 0.010
    report(1, ok, f"facets={got} time={dt * 1e3:.2f}ms")
    assert got == [[0, 1, 2], [2, 3]]
    assert dt < 0.010


def test_criterion_02_bicubic_points_in_no_face(report):
    t0 = time.perf_counter()
    lam, cfg = aio.load_lifting(aio.data_path("bicubic_lifting"))
    dec = regular_decomposition(cfg, lam)
    dt = time.perf_counter() - t0
    missing = [cfg.points[i] for i in dec.points_in_no_face]
    ok = missing == [(1, 2), (2, 2)] and dt < 0.050
    report(2, ok, f"points in no face={missing} time={dt * 1e3:.2f}ms")
    assert missing == [(1, 2), (2, 2)]
    assert dt < 0.050


def test_criterion_03_nine_quadrilaterals(report):
    cfg = tensor_patch(3, 3)
    corners = {(0, 0), (3, 0), (0, 3), (3, 3)}
    vals = [0 if p in corners else (2 if 0 < p[0] < 3 and 0 < p[1] < 3 else 1) for p in cfg.points]
    dec = regular_decomposition(cfg, vals)
    quads = 0
    for f in dec.facets:
        P = convex_hull(cfg.subconfig(f.labels))
        quads += len(f.labels) == 4 and len(P.vertices) == 4 and P.volume == 1
    ok = len(dec.facets) == 9 and quads == 9
    report(3, ok, f"facets={len(dec.facets)} unit quadrilaterals={quads}")
    assert len(dec.facets) == 9 and quads == 9


def test_criterion_04_certificates(report):
    t0 = time.perf_counter()
    pin = aio.load_decomposition(aio.data_path("pinwheel"))
    cert = certify_regularity(pin.config, pin)
    pin_ok = cert.status == "irregular" and cert.verify(pin.config)
    exact = all(isinstance(v, Fraction) for v in cert.fold_multipliers + cert.flat_multipliers)
    rng = np.random.default_rng(4)
    shapes = [(a, b) for a in (1, 2, 3) for b in (1, 2, 3)]
    failures = 0
    for _ in range(200):
        a, b = shapes[rng.integers(len(shapes))]
        cfg = tensor_patch(a, b)
        vals = rng.integers(-5, 6, len(cfg)).tolist()
        dec = regular_decomposition(cfg, vals)
        user = validate_decomposition(cfg, dec.facet_sets)
        c = certify_regularity(cfg, user)
        if not (c.is_regular and c.verify(cfg) and certificate_matches(cfg, user, c) and user.face_sets == dec.face_sets):
            failures += 1
    dt = time.perf_counter() - t0
    ok = pin_ok and exact and failures == 0 and dt < 5.0
    report(4, ok, f"pinwheel={cert.status} verified={pin_ok} random failures={failures}/200 time={dt:.2f}s")
    assert pin_ok and exact
    assert failures == 0
    assert dt < 5.0


def test_criterion_05_bernstein(report):
    rng = np.random.default_rng(5)
    x = rng.uniform(0, 3, 1000)
    x = x[(x > 0) & (x < 3)]
    worst_c = max(
        float(np.max(np.abs(toric_basis(bezier_curve(3), i, x) / (x**i * (3 - x) ** (3 - i)) - 1))) for i in range(4)
    )
    cfg = triangle_patch(3)
    X = _interior(rng, cfg, 1000)
    B = basis_values(cfg, X)
    worst_t = 0.0
    for a, (i, j) in enumerate(cfg.points):
        ref = X[:, 0] ** i * X[:, 1] ** j * (3 - X[:, 0] - X[:, 1]) ** (3 - i - j)
        worst_t = max(worst_t, float(np.max(np.abs(B[:, a] / ref - 1))))
    ok = worst_c <= 1e-12 and worst_t <= 1e-12
    report(5, ok, f"max rel err curve={worst_c:.2e} triangle={worst_t:.2e}")
    assert worst_c <= 1e-12 and worst_t <= 1e-12


def test_criterion_06_patch_contracts(report):
    rng = np.random.default_rng(6)
    pillow = LatticeConfig.from_points([(1, 0), (0, 1), (1, 1), (2, 1), (1, 2)])
    specs = [
        PatchSpec(c, rng.uniform(0.2, 5, len(c)), rng.normal(size=(len(c), 3)))
        for c in (bezier_curve(3), tensor_patch(3, 3), triangle_patch(3), pillow)
    ]
    specs.append(aio.load_spec(aio.data_path("bicubic_patch")))
    interp = 0.0
    for s in specs:
        for v in vertex_labels(s.config):
            interp = max(interp, float(np.abs(evaluate(s, np.array(s.config.points[v], float)) - s.control_points[v]).max()))
    tp = specs[1]
    curve = PatchSpec(bezier_curve(3), tp.weights[:4], tp.control_points[:4])
    xs = rng.uniform(0, 3, 1000)
    edge = float(np.abs(evaluate(tp, np.column_stack([xs, np.zeros_like(xs)])) - evaluate(curve, xs)).max())
    slack, fact = 0.0, 0.0
    for s in specs:
        X = _interior(rng, s.config, 1000) if s.config.dim > 1 else rng.uniform(0, 3, (1000, 1))
        Z = coefficients(s, X)
        slack = max(slack, float(-Z.min()), float(np.abs(Z.sum(1) - 1).max()))
        direct = evaluate(s, X)
        factored = project(s.control_points, weight_action(s.weights, beta_map(s.config, X)))
        fact = max(fact, float(np.abs(direct - factored).max()))
        # grid samples in both parametrizations, boundary included
        g = domain_grid(s.config, 17)
        for Zg in (coefficients(s, g.points), moment_coefficients(s, g.num, g.den)):
            slack = max(slack, float(-Zg.min()), float(np.abs(Zg.sum(1) - 1).max()))
    ok = interp <= 1e-12 and edge <= 1e-10 and slack <= 1e-12 and fact <= 1e-10
    report(6, ok, f"interp={interp:.1e} edge={edge:.1e} conv slack={slack:.1e} factorization={fact:.1e}")
    assert interp <= 1e-12
    assert edge <= 1e-10
    assert slack <= 1e-12
    assert fact <= 1e-10


def test_criterion_07_binomial_relations(report):
    rng = np.random.default_rng(7)
    cubic = aio.load_experiment(aio.data_path("cubic_0120"))
    bic = aio.load_spec(aio.data_path("bicubic_patch"))
    lam_b, _ = aio.load_lifting(aio.data_path("bicubic_lifting"))
    pillow = LatticeConfig.from_points([(1, 0), (0, 1), (1, 1), (2, 1), (1, 2)])
    tri = triangle_patch(3)
    cases = [
        ("cubic", cubic.spec, np.array([float(v) for v in cubic.lifting.values])),
        ("bicubic", bic, np.array([float(v) for v in lam_b.values])),
        ("triangle", PatchSpec(tri, rng.uniform(0.5, 2, len(tri)), rng.normal(size=(len(tri), 3))), rng.integers(0, 3, len(tri))),
        ("pillow", PatchSpec(pillow, rng.uniform(0.5, 2, 5), rng.normal(size=(5, 3))), np.array([0, 0, 1, 0, 0])),
    ]
    worst = {}
    for name, spec, lam in cases:
        rels = relations_from_kernel(spec.config)
        assert len(rels) == len(spec.config) - spec.config.dim - 1
        X = _interior(rng, spec.config, 1000)
        for t in (1.0, 10.0, 100.0):
            r = check_binomial_relations(spec, rels, X, weights=spec.weights * t**lam)
            worst[name] = max(worst.get(name, 0.0), r)
    ok = max(worst.values()) <= 1e-9
    report(7, ok, " ".join(f"{k}={v:.1e}" for k, v in worst.items()))
    assert max(worst.values()) <= 1e-9


def test_criterion_08_convergence(report):
    cubic = aio.load_experiment(aio.data_path("cubic_0120"))
    bic = aio.load_experiment(aio.data_path("bicubic_fig3"))
    t0 = time.perf_counter()
    details, ok = [], True
    for name, exp in (("cubic", cubic), ("bicubic", bic)):
        res = convergence_sweep(exp.spec, exp.lifting, SCHEDULE, M, workers=1)
        d = res.distances
        mono = all(b <= a for a, b in zip(d, d[1:]))
        final = d[-1] < res.tau
        decay = [support_decay_probe(exp.spec, exp.lifting, t, M).worst for t in SCHEDULE]
        shrink = all(b < a for a, b in zip(decay, decay[1:]))
        ok &= mono and final and shrink
        details.append(f"{name}: final={d[-1]:.3g} tau={res.tau:.3g} monotone={mono} decay={decay[0]:.2g}->{decay[-1]:.2g}")
    dt = time.perf_counter() - t0
    ok &= dt < 60.0
    report(8, ok, "; ".join(details) + f" time={dt:.1f}s")
    assert ok


def test_criterion_09_irregular_floor(report):
    exp = aio.load_experiment(aio.data_path("pinwheel_experiment"))
    cert = certify_regularity(exp.spec.config, exp.decomposition)
    surface = control_surface(exp.spec, exp.decomposition)
    res = convergence_sweep(exp.spec, exp.lifting, SCHEDULE, M, surface=surface)
    floor = min(res.distances)
    regular = convergence_sweep(exp.spec, exp.lifting, SCHEDULE, M)
    reg_ok = regular.distances[-1] < regular.tau and all(b <= a for a, b in zip(regular.distances, regular.distances[1:]))
    ok = cert.status == "irregular" and floor > PINWHEEL_FLOOR and reg_ok and not res.verdict()
    report(9, ok, f"irregular distance min={floor:.5f} (pinned floor {PINWHEEL_FLOOR}) regular final={regular.distances[-1]:.3g}")
    assert cert.status == "irregular"
    assert floor > PINWHEEL_FLOOR
    assert reg_ok


def test_criterion_10_determinism(report, tmp_path, capsys):
    csvs = []
    for k, workers in enumerate((1, 1, 2, 4)):
        out = tmp_path / f"run{k}"
        code = cli_main(["verify", "bicubic_fig3", "--workers", str(workers), "--out", str(out)])
        capsys.readouterr()
        assert code == 0
        csvs.append((out / "sweep.csv").read_bytes())
    ok = all(c == csvs[0] for c in csvs)
    report(10, ok, f"{len(csvs)} verify runs (workers 1,1,2,4), identical={ok}")
    assert ok
