"""Command line entry point.

Exit codes: 0 success, 1 failed checks or evaluation errors, 2 configuration errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import json
import sys

import numpy as np

from . import verify
from .concurrent import check_concurrent, phi_scalars
from .config import bundled_config_path, load_config
from .errors import ConfigError, FinslerError
from .geometry import ChartPoint, tensor_bundle
from .kropina import context

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def parse_point(text: str, n: int | None = None) -> ChartPoint:
    """Parse ``"x=2,0,0;y=1,2,1"``."""
    parts = {}
    for chunk in text.split(";"):
        if "=" not in chunk:
            raise ConfigError(f"bad point {text!r}: expected 'x=...;y=...'")
        key, _, vals = chunk.partition("=")
        try:
            parts[key.strip()] = tuple(float(v) for v in vals.split(","))
        except ValueError:
            raise ConfigError(f"bad coordinates in {chunk!r}") from None
    if set(parts) != {"x", "y"}:
        raise ConfigError(f"bad point {text!r}: need exactly x and y")
    p = ChartPoint(parts["x"], parts["y"]) if len(parts["x"]) == len(parts["y"]) else None
    if p is None or (n is not None and p.n != n):
        raise ConfigError(f"point {text!r} does not have dimension {n}")
    return p


def _fmt(a) -> str:
    a = np.asarray(a, dtype=float) + 0.0  # drop negative zeros
    if a.ndim == 0:
        return f"{float(a):.12g}"
    a = np.where(np.abs(a) < 1e-13 * max(1.0, np.abs(a).max()), 0.0, a)  # round-off noise
    return np.array2string(a, precision=10, suppress_small=True, max_line_width=100)


def cmd_tensors(args) -> int:
    cfg = load_config(args.config)
    point = parse_point(args.at, cfg.dimension)
    model = cfg.model()
    try:
        bundle = tensor_bundle(model, point)
        out = bundle.as_dict()
        if model.phi:
            ph = phi_scalars(model, point)
            out.update({"Phi": ph.Phi, "norm_sq": ph.norm_sq, "phi_form": ph.phi_form.tolist()})
            try:
                ctx = context(model, point, cfg.m)
                out.update({"m": cfg.m, "D": ctx.D, "Psi1": ctx.Psi1, "Psi2": ctx.Psi2})
            except FinslerError as exc:
                out["change"] = f"undefined here ({type(exc).__name__}: {exc})"
    except FinslerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.json:
        print(json.dumps(verify._clean(out), indent=2))
    else:
        print(f"point  x={list(point.x)} y={list(point.y)}")
        for k, v in out.items():
            text = _fmt(v)
            sep = "\n" if "\n" in text else " "
            print(f"{k}:{sep}{text}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    if args.sigma is not None:
        cfg = dataclasses.replace(cfg, sigma=args.sigma)
    try:
        report = verify.run_suite(cfg)
    except FinslerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for c in report.checks:
        print(c.line())
    print("PASS" if report.passed else "FAIL")
    if args.out:
        stamp = None if args.no_timestamp else _dt.datetime.now(_dt.timezone.utc).isoformat()
        with open(args.out, "w") as fh:
            fh.write(report.to_json(stamp))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_check_concurrent(args) -> int:
    cfg = load_config(args.config)
    model = cfg.model()
    if not model.phi:
        raise ConfigError("configuration has no vector_field")
    try:
        rep = check_concurrent(model, verify.sample(model, cfg.sample),
                               cfg.tolerances.concurrency, cfg.tolerances.cartan)
    except FinslerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for k, v in rep.as_dict().items():
        print(f"{k:<20} {v}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_fn_selftest(args) -> int:
    cfg = load_config(args.config or bundled_config_path("example.json"))
    model = cfg.model()
    points = verify.sample(model, dataclasses.replace(cfg.sample, count=args.points))
    res = verify.fn_selftest(model, points, np.random.default_rng(cfg.sample.seed),
                             cfg.tolerances.selftest)
    for k, v in res.notes["max_rel_by_identity"].items():
        print(f"{v:10.2e}  {k}")
    print(res.line())
    return EXIT_OK if res.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="finslerjet", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the identity checks of a configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--sigma", type=int, choices=(1, -1), help="override the sign in FF")
    p.add_argument("--no-timestamp", action="store_true", help="omit the report timestamp")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tensors", help="print all metric objects at one chart point")
    p.add_argument("--config", required=True)
    p.add_argument("--at", required=True, help='chart point, e.g. "x=2,0,0;y=1,2,1"')
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_tensors)

    p = sub.add_parser("check-concurrent", help="test concurrency of the configured field")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_check_concurrent)

    p = sub.add_parser("fn-selftest", help="Frolicher-Nijenhuis and projector identities")
    p.add_argument("--config", help="model to use (default: bundled example)")
    p.add_argument("--points", type=int, default=5)
    p.set_defaults(func=cmd_fn_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
