"""Command line entry point: ``toric-control <subcommand> ...``.

Exit codes: 0 success (or regular / converged), 1 error, 2 irregular
decomposition, 3 convergence criterion failed.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import artifact_io as aio
from .degeneration import DegenerationFamily, control_surface, convergence_sweep, sample
from .errors import IoError, SchemaError, ToricError
from .subdivision import certificate_matches, certify_regularity, regular_decomposition

log = logging.getLogger("toric_control")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_IRREGULAR = 2
EXIT_NOT_CONVERGED = 3


def _doc(ref):
    return aio.resolve(ref, Path.cwd())


def _config_and_lifting(args):
    """Accepts ``config lifting``, a lifting with embedded config, or an experiment file."""
    doc = _doc(args.input)
    obj = doc.obj
    if args.lifting is not None:
        config = aio.load_config(doc)
        lam, _ = aio.load_lifting(_doc(args.lifting), config)
        return config, lam
    if isinstance(obj, dict) and "patch" in obj:
        exp = aio.load_experiment(doc)
        return exp.spec.config, exp.lifting
    lam, config = aio.load_lifting(doc)
    if config is None:
        raise SchemaError("lifting file has no embedded configuration; pass the config as well", "config")
    return config, lam


def _emit(text: str, out: str | None):
    if out:
        path = Path(out)
        if path.suffix != ".json":
            path = path / "decomposition.json"
        aio.write_text(path, text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


def cmd_decompose(args) -> int:
    config, lam = _config_and_lifting(args)
    dec = regular_decomposition(config, lam)
    _emit(aio.dumps(dec), args.out)
    return EXIT_OK


def cmd_check_regular(args) -> int:
    config = None
    if args.config is not None:
        config = aio.load_config(_doc(args.config))
    dec = aio.load_decomposition(_doc(args.decomposition), config)
    cert = certify_regularity(dec.config, dec)
    if not cert.verify(dec.config):
        raise ToricError("certificate failed to verify")
    if cert.is_regular and not certificate_matches(dec.config, dec, cert):
        raise ToricError("witness lifting does not reproduce the decomposition")
    text = aio.dumps(cert)
    if args.out:
        path = Path(args.out)
        if path.suffix != ".json":
            path = path / "certificate.json"
        aio.write_text(path, text)
    else:
        sys.stdout.write(text)
    print(cert.status, file=sys.stderr)
    return EXIT_OK if cert.is_regular else EXIT_IRREGULAR


def cmd_eval(args) -> int:
    doc = _doc(args.spec)
    spec = aio.load_experiment(doc).spec if "patch" in doc.obj else aio.load_spec(doc)
    s = sample(spec, args.resolution, param=args.param)
    out = Path(args.out) if args.out else None
    if out is None:
        sys.stdout.write(aio.obj_text(s))
    else:
        aio.export_obj(s, out if out.suffix == ".obj" else out / "patch.obj")
    return EXIT_OK


def _experiment(args) -> aio.ExperimentConfig:
    exp = aio.load_experiment(_doc(args.experiment))
    over = {}
    if args.resolution is not None:
        over["resolution"] = args.resolution
    if args.schedule is not None:
        over["schedule"] = tuple(aio.parse_schedule(args.schedule))
    if args.tolerance_scale is not None:
        over["tolerance_scale"] = args.tolerance_scale
    if args.out is not None:
        over["out"] = args.out
    if over:
        vals = dict(
            spec=exp.spec,
            lifting=exp.lifting,
            schedule=exp.schedule,
            resolution=exp.resolution,
            out=exp.out,
            decomposition=exp.decomposition,
            tolerance_scale=exp.tolerance_scale,
            refs=exp.refs,
        )
        vals.update(over)
        exp = aio.ExperimentConfig(**vals)
    return exp


def _sweep(exp: aio.ExperimentConfig, workers: int):
    surface = control_surface(exp.spec, exp.decomposition) if exp.decomposition is not None else None
    res = convergence_sweep(
        exp.spec,
        exp.lifting,
        exp.schedule,
        exp.resolution,
        surface=surface,
        tolerance_scale=exp.tolerance_scale,
        workers=workers,
    )
    return res, surface


def _t_name(t: float) -> str:
    return f"{t:g}".replace("+", "")


def cmd_degenerate(args) -> int:
    exp = _experiment(args)
    res, surface = _sweep(exp, args.workers)
    out = Path(exp.out)
    fam = DegenerationFamily(exp.spec, exp.lifting)
    for t in exp.schedule:
        s = sample(exp.spec, exp.resolution, param="moment", weights=fam.weights(t))
        aio.export_obj(s, out / f"patch_t{_t_name(t)}.obj")
    if surface is None:
        surface = control_surface(exp.spec, regular_decomposition(exp.spec.config, exp.lifting))
    aio.export_obj(sample(surface, exp.resolution, param="moment"), out / "control_surface.obj")
    aio.write_text(out / "sweep.csv", res.to_csv())
    log.info("wrote %d meshes and sweep.csv to %s", len(exp.schedule) + 1, out)
    return EXIT_OK


def cmd_verify(args) -> int:
    exp = _experiment(args)
    res, _ = _sweep(exp, args.workers)
    csv = res.to_csv()
    aio.write_text(Path(exp.out) / "sweep.csv", csv)
    sys.stdout.write(csv)
    ok = res.verdict()
    first = res.converged_from
    print(
        f"tau={res.tau!r} converged_from={first if first is not None else 'none'} "
        f"nonincreasing={res.nonincreasing(res.tau / 10.0)} -> {'PASS' if ok else 'FAIL'}",
        file=sys.stderr,
    )
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("--seed", type=int, default=None, help="seed numpy's global RNG (randomized checks)")
    p = argparse.ArgumentParser(prog="toric-control", description="Toric patches, regular decompositions and degenerations.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", parents=[common], help="regular decomposition induced by a lifting")
    d.add_argument("input", help="config file, lifting with embedded config, or experiment")
    d.add_argument("lifting", nargs="?", default=None, help="lifting file when INPUT is a bare config")
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_decompose)

    c = sub.add_parser("check-regular", parents=[common], help="certify a decomposition regular (exit 0) or irregular (exit 2)")
    c.add_argument("decomposition")
    c.add_argument("--config", default=None, help="config file when the decomposition embeds none")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_check_regular)

    e = sub.add_parser("eval", parents=[common], help="sample a patch and write OBJ")
    e.add_argument("spec")
    e.add_argument("-m", "--resolution", type=int, default=17)
    e.add_argument("--param", choices=("moment", "affine"), default="moment")
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_eval)

    for name, func, helptext in (
        ("degenerate", cmd_degenerate, "OBJ per t plus sweep CSV"),
        ("verify", cmd_verify, "check the convergence criterion (exit 0 pass, 3 fail)"),
    ):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("experiment")
        s.add_argument("-m", "--resolution", type=int, default=None)
        s.add_argument("--schedule", default=None, help="comma separated t values")
        s.add_argument("--out", default=None)
        s.add_argument("--tolerance-scale", type=float, default=None)
        s.add_argument("--workers", type=int, default=1, help="threads over t values")
        s.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.seed is not None:
        np.random.seed(args.seed)
    try:
        return args.func(args)
    except (ToricError, IoError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except NotImplementedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
