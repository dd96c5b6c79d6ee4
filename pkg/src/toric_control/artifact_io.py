"""JSON formats, OBJ mesh export and experiment files.

Every JSON document is saved canonically (sorted keys, two-space indent,
trailing newline) so ``save(load(x))`` is byte-stable. Rationals are JSON
integers when integral and ``"p/q"`` strings otherwise.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import IoError, ParseError, SchemaError, ToricError
from .exact import fraction_to_json, to_fraction
from .lattice_geometry import LatticeConfig
from .subdivision import (
    Constraint,
    Decomposition,
    Lifting,
    RegularityCertificate,
    validate_decomposition,
)
from .toric_patch import PatchSpec



# ---------------------------------------------------------------------------
# reading


class _Doc:
    """Parsed JSON plus its source text, for locating bad tokens."""

    def __init__(self, obj, text: str | None = None, path: Path | None = None):
        self.obj = obj
        self.text = text
        self.path = path

    def locate(self, token) -> tuple[int | None, int | None]:
        if self.text is None or token is None:
            return None, None
        needle = json.dumps(token) if isinstance(token, str) else str(token)
        pos = self.text.find(needle)
        if pos < 0:
            return None, None
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col


def _parse_text(text: str, path: Path | None = None) -> _Doc:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        where = f"{path}: " if path else ""
        raise ParseError(f"{where}{exc.msg}", exc.lineno, exc.colno) from None
    return _Doc(obj, text, path)


def _read(source) -> _Doc:
    if isinstance(source, _Doc):
        return source
    if isinstance(source, (dict, list)):
        return _Doc(source)
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from None
    return _parse_text(text, path)


def read_json(source):
    """Parse a path, a JSON string already loaded as dict/list, or a document."""
    return _read(source).obj


def _rational(doc: _Doc, value, field: str) -> Fraction:
    try:
        return to_fraction(value, field)
    except (ParseError, ValueError, ZeroDivisionError) as exc:
        line, col = doc.locate(value)
        msg = str(exc) if isinstance(exc, ParseError) else f"{field}: malformed rational {value!r}"
        raise ParseError(msg, line, col, field=field, token=value) from None


def _require(obj, key: str, field: str):
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", field or "<root>")
    if key not in obj:
        raise SchemaError("missing", f"{field}.{key}" if field else key)
    return obj[key]


def _list(value, field: str) -> list:
    if not isinstance(value, list):
        raise SchemaError("expected a list", field)
    return value


def _int(value, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"expected an integer, got {value!r}", field)
    return value


def _number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected a number, got {value!r}", field)
    return float(value)


# ---------------------------------------------------------------------------
# configurations, liftings, decompositions


def config_to_json(config: LatticeConfig) -> dict:
    return {"dim": config.dim, "points": [list(p) for p in config.points]}


def _config_from(doc: _Doc, obj, field: str = "") -> LatticeConfig:
    dim = _int(_require(obj, "dim", field), f"{field}.dim" if field else "dim")
    pfield = f"{field}.points" if field else "points"
    pts = _list(_require(obj, "points", field), pfield)
    if not pts:
        raise SchemaError("a configuration needs at least one point", pfield)
    out = []
    for i, p in enumerate(pts):
        p = _list(p, f"{pfield}[{i}]")
        if len(p) != dim:
            raise SchemaError(f"expected {dim} coordinates, got {len(p)}", f"{pfield}[{i}]")
        out.append(tuple(_int(c, f"{pfield}[{i}]") for c in p))
    if len(set(out)) != len(out):
        raise SchemaError("points must be distinct", pfield)
    return LatticeConfig(dim, tuple(out))


def load_config(source) -> LatticeConfig:
    doc = _read(source)
    obj = doc.obj
    # a spec or a lifting with an embedded configuration also works
    if isinstance(obj, dict) and "config" in obj and "points" not in obj:
        return _config_from(doc, obj["config"], "config")
    return _config_from(doc, obj)


def lifting_to_json(lifting: Lifting, config: LatticeConfig | None = None) -> dict:
    out = {"values": [fraction_to_json(v) for v in lifting.values]}
    if config is not None:
        out["config"] = config_to_json(config)
    return out


def load_lifting(source, config: LatticeConfig | None = None) -> tuple[Lifting, LatticeConfig | None]:
    """Returns the lifting and the embedded configuration (or ``config``)."""
    doc = _read(source)
    vals = _list(_require(doc.obj, "values", ""), "values")
    lam = Lifting(tuple(_rational(doc, v, f"values[{i}]") for i, v in enumerate(vals)))
    if "config" in doc.obj:
        config = _config_from(doc, doc.obj["config"], "config")
    if config is not None and len(config) != len(lam):
        raise SchemaError(f"expected {len(config)} values, got {len(lam)}", "values")
    return lam, config


def decomposition_to_json(dec: Decomposition, include_config: bool = False) -> dict:
    out = {"facets": [list(f.labels) for f in dec.facets]}
    if include_config:
        out["config"] = config_to_json(dec.config)
    return out


def load_decomposition(source, config: LatticeConfig | None = None) -> Decomposition:
    """Load facets and validate them against ``config`` (or the embedded one)."""
    doc = _read(source)
    facets = _list(_require(doc.obj, "facets", ""), "facets")
    if "config" in doc.obj:
        config = _config_from(doc, doc.obj["config"], "config")
    if config is None:
        raise SchemaError("no configuration given or embedded", "config")
    sets = []
    for i, f in enumerate(facets):
        f = _list(f, f"facets[{i}]")
        labels = [_int(a, f"facets[{i}]") for a in f]
        bad = [a for a in labels if not 0 <= a < len(config)]
        if bad or not labels:
            raise SchemaError(f"unknown labels {bad}" if bad else "empty facet", f"facets[{i}]")
        sets.append(frozenset(labels))
    return validate_decomposition(config, sets)


# ---------------------------------------------------------------------------
# patch specs


def spec_to_json(spec: PatchSpec) -> dict:
    return {
        "config": config_to_json(spec.config),
        "weights": [float(w) for w in spec.weights],
        "control_points": [[float(c) for c in row] for row in spec.control_points],
    }


def load_spec(source) -> PatchSpec:
    doc = _read(source)
    config = _config_from(doc, _require(doc.obj, "config", ""), "config")
    w = _list(_require(doc.obj, "weights", ""), "weights")
    weights = [float(_rational(doc, v, f"weights[{i}]")) if isinstance(v, str) else _number(v, f"weights[{i}]") for i, v in enumerate(w)]
    cps = _list(_require(doc.obj, "control_points", ""), "control_points")
    rows = []
    for i, row in enumerate(cps):
        row = _list(row, f"control_points[{i}]")
        rows.append([_number(c, f"control_points[{i}]") for c in row])
    if len({len(r) for r in rows}) > 1:
        raise SchemaError("control points have mixed dimensions", "control_points")
    try:
        return PatchSpec(config, np.array(weights), np.array(rows, dtype=float))
    except ToricError as exc:
        field = "weights" if "weight" in str(exc) else "control_points"
        raise SchemaError(str(exc), field) from None


# ---------------------------------------------------------------------------
# certificates


def _row_json(row: Constraint) -> dict:
    return {
        "kind": row.kind,
        "facet": row.facet,
        "point": row.point,
        "coeffs": [[a, fraction_to_json(c)] for a, c in row.coeffs],
    }


def certificate_to_json(cert: RegularityCertificate) -> dict:
    out = {
        "status": cert.status,
        "facets": [sorted(F) for F in cert.facets],
        "fold_rows": [_row_json(r) for r in cert.fold_rows],
        "flat_rows": [_row_json(r) for r in cert.flat_rows],
    }
    if cert.status == "regular":
        out["witness"] = [fraction_to_json(v) for v in cert.witness]
        out["margin"] = fraction_to_json(cert.margin)
    else:
        out["fold_multipliers"] = [fraction_to_json(v) for v in cert.fold_multipliers]
        out["flat_multipliers"] = [fraction_to_json(v) for v in cert.flat_multipliers]
    return out


def _rows_from(doc, rows, field) -> tuple[Constraint, ...]:
    out = []
    for i, r in enumerate(_list(rows, field)):
        f = f"{field}[{i}]"
        coeffs = []
        for j, pair in enumerate(_list(_require(r, "coeffs", f), f"{f}.coeffs")):
            pair = _list(pair, f"{f}.coeffs[{j}]")
            if len(pair) != 2:
                raise SchemaError("expected [label, coefficient]", f"{f}.coeffs[{j}]")
            coeffs.append((_int(pair[0], f"{f}.coeffs[{j}]"), _rational(doc, pair[1], f"{f}.coeffs[{j}]")))
        out.append(
            Constraint(
                str(_require(r, "kind", f)),
                _int(_require(r, "facet", f), f"{f}.facet"),
                _int(_require(r, "point", f), f"{f}.point"),
                tuple(coeffs),
            )
        )
    return tuple(out)


def load_certificate(source) -> RegularityCertificate:
    doc = _read(source)
    o = doc.obj
    status = _require(o, "status", "")
    if status not in ("regular", "irregular"):
        raise SchemaError(f"unknown status {status!r}", "status")
    facets = tuple(frozenset(_int(a, f"facets[{i}]") for a in _list(F, f"facets[{i}]")) for i, F in enumerate(_list(_require(o, "facets", ""), "facets")))
    fold = _rows_from(doc, o.get("fold_rows", []), "fold_rows")
    flat = _rows_from(doc, o.get("flat_rows", []), "flat_rows")

    def rats(key):
        return tuple(_rational(doc, v, f"{key}[{i}]") for i, v in enumerate(_list(_require(o, key, ""), key)))

    if status == "regular":
        return RegularityCertificate(status, facets, rats("witness"), _rational(doc, _require(o, "margin", ""), "margin"), fold, flat)
    return RegularityCertificate(status, facets, None, None, fold, flat, rats("fold_multipliers"), rats("flat_multipliers"))


# ---------------------------------------------------------------------------
# canonical output


def to_json(obj) -> dict:
    if isinstance(obj, LatticeConfig):
        return config_to_json(obj)
    if isinstance(obj, Lifting):
        return lifting_to_json(obj)
    if isinstance(obj, Decomposition):
        return decomposition_to_json(obj)
    if isinstance(obj, PatchSpec):
        return spec_to_json(obj)
    if isinstance(obj, RegularityCertificate):
        return certificate_to_json(obj)
    if isinstance(obj, ExperimentConfig):
        return obj.to_json()
    if isinstance(obj, dict):
        return obj
    raise TypeError(f"no JSON form for {type(obj).__name__}")


def dumps(obj) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(to_json(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        # write-then-rename so concurrent readers never see partial files
        tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from None
    return path


def save_json(obj, path) -> Path:
    return write_text(path, dumps(obj))


# ---------------------------------------------------------------------------
# experiments


def data_path(name: str) -> Path:
    """Path of a file shipped with the package (``name`` with or without ``.json``)."""
    base = resources.files("toric_control") / "data"
    for cand in (name, name + ".json"):
        p = base / cand
        if p.is_file():
            return Path(str(p))
    raise IoError(f"no packaged data file named {name!r}")


def resolve(ref, base: Path | None = None) -> _Doc:
    """Inline object, path (relative to ``base``), or bare name of packaged data."""
    if isinstance(ref, dict):
        return _Doc(ref)
    if not isinstance(ref, str):
        raise SchemaError(f"expected an object or a file reference, got {ref!r}")
    p = Path(ref)
    if not p.is_absolute() and base is not None and (base / p).is_file():
        p = base / p
    if p.is_file():
        return _read(p)
    if os.sep not in ref and "/" not in ref:
        return _read(data_path(ref))
    raise IoError(f"referenced file {ref!r} does not exist")


def parse_schedule(value) -> list[float]:
    """``"1,5,25"`` or a list of numbers."""
    if isinstance(value, str):
        parts = [s for s in value.replace(" ", "").split(",") if s]
        try:
            vals = [float(Fraction(s)) for s in parts]
        except (ValueError, ZeroDivisionError):
            raise SchemaError(f"malformed schedule {value!r}", "schedule") from None
    else:
        vals = [_number(v, "schedule") for v in _list(value, "schedule")]
    if not vals:
        raise SchemaError("schedule is empty", "schedule")
    if any(not v > 0 for v in vals):
        raise SchemaError("schedule values must be positive", "schedule")
    return vals


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """A patch, a lifting, an optional target decomposition, a schedule and a resolution."""

    spec: PatchSpec
    lifting: Lifting
    schedule: tuple[float, ...]
    resolution: int
    out: str = "out"
    decomposition: Decomposition | None = None
    tolerance_scale: float = 1.0
    refs: dict | None = None

    def __post_init__(self):
        if self.resolution < 2:
            raise SchemaError(f"resolution must be at least 2, got {self.resolution}", "resolution")
        if not self.schedule:
            raise SchemaError("schedule is empty", "schedule")
        if len(self.lifting) != len(self.spec.config):
            raise SchemaError("lifting and patch have different sizes", "lifting")
        if self.decomposition is not None and self.decomposition.config != self.spec.config:
            raise SchemaError("decomposition is over a different configuration", "decomposition")

    def to_json(self) -> dict:
        refs = self.refs or {}
        out = {
            "patch": refs.get("patch", spec_to_json(self.spec)),
            "lifting": refs.get("lifting", lifting_to_json(self.lifting)),
            "schedule": list(self.schedule),
            "resolution": self.resolution,
            "out": self.out,
        }
        if self.decomposition is not None:
            out["decomposition"] = refs.get("decomposition", decomposition_to_json(self.decomposition))
        if self.tolerance_scale != 1.0:
            out["tolerance_scale"] = self.tolerance_scale
        return out


def load_experiment(source) -> ExperimentConfig:
    doc = _read(source)
    o = doc.obj
    base = doc.path.parent if doc.path is not None else None
    refs = {}
    for key in ("patch", "lifting", "decomposition"):
        if isinstance(o.get(key), str):
            refs[key] = o[key]
    spec = load_spec(resolve(_require(o, "patch", ""), base))
    lam, _ = load_lifting(resolve(_require(o, "lifting", ""), base), spec.config)
    dec = None
    if o.get("decomposition") is not None:
        dec = load_decomposition(resolve(o["decomposition"], base), spec.config)
    schedule = parse_schedule(_require(o, "schedule", ""))
    m = _int(_require(o, "resolution", ""), "resolution")
    out = _require(o, "out", "")
    if not isinstance(out, str):
        raise SchemaError("expected a directory name", "out")
    scale = _number(o.get("tolerance_scale", 1.0), "tolerance_scale")
    return ExperimentConfig(spec, lam, tuple(schedule), m, out, dec, scale, refs)


# ---------------------------------------------------------------------------
# OBJ export


def _fmt(x: float) -> str:
    return repr(float(x)) if x != 0 else "0.0"


def obj_text(sampled) -> str:
    """OBJ text for a :class:`~toric_control.degeneration.SampledSet`.

    Vertices are written in sample order (padded to three coordinates), each
    piece becomes a group; polygonal cells become faces and curve pieces one
    ``l`` polyline.
    """
    P = np.asarray(sampled.points, dtype=float)
    if P.ndim != 2 or P.shape[1] > 3:
        raise IoError(f"OBJ needs points with at most three coordinates, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise IoError("cannot export non-finite points")
    lines = [f"# {sampled.source}, m={sampled.m}, {P.shape[0]} vertices"]
    for p in P:
        q = list(p) + [0.0] * (3 - len(p))
        lines.append("v " + " ".join(_fmt(c) for c in q))
    for piece in sampled.pieces:
        lines.append(f"g {piece.name}")
        cells = piece.cells
        if cells and all(len(c) == 2 for c in cells):
            chain = [cells[0][0]] + [c[1] for c in cells]
            lines.append("l " + " ".join(str(i + 1) for i in chain))
            continue
        for c in cells:
            if len(c) >= 3:
                lines.append("f " + " ".join(str(i + 1) for i in c))
    return "\n".join(lines) + "\n"


def export_obj(obj, path, m: int = 17, param: str = "moment") -> Path:
    """Write a sampled set, a patch or a control surface as an OBJ file."""
    from .degeneration import ControlSurface, SampledSet, sample

    if isinstance(obj, (PatchSpec, ControlSurface)):
        obj = sample(obj, m, param=param)
    if not isinstance(obj, SampledSet):
        raise IoError(f"cannot export {type(obj).__name__} as OBJ")
    return write_text(path, obj_text(obj))


__all__ = [
    "ExperimentConfig",
    "certificate_to_json",
    "config_to_json",
    "data_path",
    "decomposition_to_json",
    "dumps",
    "export_obj",
    "lifting_to_json",
    "load_certificate",
    "load_config",
    "load_decomposition",
    "load_experiment",
    "load_lifting",
    "load_spec",
    "obj_text",
    "parse_schedule",
    "read_json",
    "resolve",
    "save_json",
    "spec_to_json",
    "to_json",
]
