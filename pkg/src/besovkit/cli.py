"""Command line interface: ``besovkit <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .besov import BesovSpec, besov_report
from .hajlasz import decompositions, k_sobolev
from .mmspace import MMSpace, SpaceError, estimate_geometry, generate, load_space
from .rearrange import rearrangement
from .rispace import parse_ri
from .smoothness import modulus
from .svparam import parse_param, parse_sv

GENERATORS = ("circle", "torus", "random")


def parse_range(text: str, geometric: bool = True) -> np.ndarray:
    """``a:b:n`` -> n points from a to b (geometric by default)."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a:b:n, got {text!r}") from exc
    if n < 1 or (geometric and not (0 < a <= b)):
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return np.geomspace(a, b, n) if geometric else np.linspace(a, b, n)


def resolve_space(spec: str, fmt: str | None = None, metric: str = "euclidean",
                  weights: str | None = None) -> MMSpace:
    if spec.split(":")[0] in GENERATORS and not Path(spec).exists():
        return generate(spec)
    if fmt is None:
        fmt = {".json": "json", ".csv": "csv"}.get(Path(spec).suffix.lower())
        if fmt is None:
            raise SpaceError(f"cannot infer the format of {spec!r}; pass --format")
    return load_space(spec, fmt, metric=metric, weights_path=weights)


def read_field(path: str, space: MMSpace) -> np.ndarray:
    """A field file: one value per line, or CSV rows whose last column is the value."""
    from .harness.batteries import FIELD_NAMES, make_fields

    if not Path(path).exists() and path in FIELD_NAMES:
        return make_fields(space)[path]
    vals = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cell = line.split(",")[-1]
        try:
            vals.append(float(cell))
        except ValueError:
            if vals:
                raise SpaceError(f"non-numeric field value {cell!r}")
            # header row
    f = np.array(vals)
    if f.shape != (space.point_count,):
        raise SpaceError(f"field has {f.size} values, space has {space.point_count} points")
    return f


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def emit(obj, out: str | None) -> None:
    text = json.dumps(_jsonable(obj), indent=1, sort_keys=True)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        print(text)


def _space_args(p: argparse.ArgumentParser, flag: str = "--space") -> None:
    p.add_argument(flag, required=True, dest="space",
                   help="generator (circle:N, torus:M[:dim], random:N[:seed[:dim]]) or a file")
    p.add_argument("--format", choices=("csv", "json", "matrix"))
    p.add_argument("--metric", default="euclidean", help="euclidean | torus:L | manhattan")
    p.add_argument("--weights", help="weights file for --format matrix")


def _load(args) -> MMSpace:
    return resolve_space(args.space, args.format, args.metric, args.weights)


def cmd_space_estimate(args) -> int:
    space = _load(args)
    geo = estimate_geometry(space, radii=args.radii)
    emit({"space": space.name, "points": space.point_count, "diameter": space.diameter,
          "min_distance": space.min_distance, **geo.to_dict(),
          "k_fit": geo.k_fit, "n_fit": geo.n_fit}, args.out)
    return 0


def cmd_rearrange(args) -> int:
    space = _load(args)
    prof = rearrangement(space, read_field(args.field, space))
    emit(prof.to_dict(), args.emit)
    return 0


def cmd_modulus(args) -> int:
    space = _load(args)
    f = read_field(args.field, space)
    c = modulus(space, f, parse_ri(args.X), args.t_grid, args.variant, args.p, field_id=args.field)
    emit(c.to_dict(), args.out)
    return 0


def cmd_kfunc(args) -> int:
    space = _load(args)
    f = read_field(args.field, space)
    X = parse_ri(args.X)
    t = args.t_grid if args.t_grid is not None else np.geomspace(
        space.min_distance, space.diameter, 8)
    decs = decompositions(space, f, X, args.p)
    rows = [k_sobolev(space, f, X, args.p, float(ti), J=args.J, decs=decs).to_dict() for ti in t]
    emit({"X": X.label, "p": args.p, "J": args.J, "sandwich": rows}, args.out)
    return 0


def cmd_besov(args) -> int:
    space = _load(args)
    f = read_field(args.field, space)
    spec = BesovSpec(theta=args.theta, b=parse_sv(args.b), X=parse_ri(args.X),
                     E=parse_param(args.E), homogeneous=args.homogeneous, tsplit=args.tsplit)
    emit(besov_report(space, f, spec), args.out)
    return 0


def cmd_verify(args) -> int:
    from .harness.runner import load_config, run_all

    cfg = load_config(args.config)
    if args.profile:
        cfg = {k: v for k, v in cfg.items() if k not in ("heavy", "small")} | {"profile": args.profile}
    if args.jobs:
        cfg["jobs"] = args.jobs
    if args.seed is not None:
        cfg["seed"] = args.seed
    report, code = run_all(cfg, baseline_dir=args.baseline, out_dir=args.out)
    failed = [s for s in report["summary"] if not s["pass"]]
    print(f"mode={report['mode']} checks={len(report['summary'])} failed={len(failed)} "
          f"hash={report['report_hash']}")
    for s in failed:
        print(f"FAIL {s['check_id']} {s['battery']}: {', '.join(s['reasons'])}")
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="besovkit", description=__doc__)
    ap.add_argument("--version", action="version", version=f"besovkit {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("space", help="metric measure space tools")
    ssub = sp.add_subparsers(dest="space_command", required=True)
    est = ssub.add_parser("estimate", help="fit RD indices and doubling constants")
    _space_args(est, "--input")
    est.add_argument("--radii", type=parse_range, help="a:b:steps (geometric)")
    est.add_argument("--out")
    est.set_defaults(func=cmd_space_estimate)

    r = sub.add_parser("rearrange", help="decreasing rearrangement of a field")
    _space_args(r)
    r.add_argument("--field", required=True)
    r.add_argument("--emit")
    r.set_defaults(func=cmd_rearrange)

    m = sub.add_parser("modulus", help="X-modulus of smoothness curve")
    _space_args(m)
    m.add_argument("--field", required=True)
    m.add_argument("--X", default="Lp:1")
    m.add_argument("--variant", choices=("E", "calE"), default="E")
    m.add_argument("--p", type=float, default=1.0)
    m.add_argument("--t-grid", type=parse_range)
    m.add_argument("--out")
    m.set_defaults(func=cmd_modulus)

    k = sub.add_parser("kfunc", help="K-functional sandwich for the Hajlasz couple")
    _space_args(k)
    k.add_argument("--field", required=True)
    k.add_argument("--X", default="L1")
    k.add_argument("--p", type=float, default=1.0)
    k.add_argument("--t-grid", type=parse_range)
    k.add_argument("--J", type=int, default=40)
    k.add_argument("--out")
    k.set_defaults(func=cmd_kfunc)

    b = sub.add_parser("besov", help="generalised Hajlasz-Besov norm")
    _space_args(b)
    b.add_argument("--field", required=True)
    b.add_argument("--theta", type=float, required=True)
    b.add_argument("--b", default="const:1")
    b.add_argument("--X", default="Lp:1")
    b.add_argument("--E", default="Lq:1")
    g = b.add_mutually_exclusive_group()
    g.add_argument("--homogeneous", dest="homogeneous", action="store_true", default=True)
    g.add_argument("--inhomogeneous", dest="homogeneous", action="store_false")
    b.add_argument("--tsplit", type=float, default=1.0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_besov)

    v = sub.add_parser("verify", help="run the inequality battery")
    v.add_argument("--config", help="TOML file of key = value settings")
    v.add_argument("--baseline", help="directory of baseline constants (record mode if empty)")
    v.add_argument("--out", help="directory for report.json and report.csv")
    v.add_argument("--profile", help="battery profile (default, quick)")
    v.add_argument("--jobs", type=int)
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return int(args.func(args))
    except (SpaceError, ValueError, OSError) as exc:
        print(f"besovkit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
