"""Command-line entry point: one subcommand per experiment."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import nullcontext
from pathlib import Path

from .config import ConfigError, load_config
from .experiments import RUNNERS, run

log = logging.getLogger("lamejump")

EXPERIMENTS = tuple(RUNNERS)

HELP = {
    "verify-algebra": "exact algebra axioms on random rational multivectors",
    "verify-identities": "Dirac factorization, the explicit null solution and volume-transform identities",
    "verify-kernels": "finite-difference checks of the fundamental solutions",
    "borel-pompeiu": "reconstruct a field from boundary and volume terms",
    "solve-jump": "boundary-integral jump problem on a smooth surface",
    "fractal-demo": "jump problem on a Koch prism via Whitney extension and volume correction",
    "estimate-dsummability": "box-counting estimate for a boundary sample cloud",
    "estimate-marcinkiewicz": "local distance-integrability exponents",
    "transform": "evaluate a named boundary or volume transform at points",
    "mesh": "write a boundary mesh or volume grid as JSON lines",
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML or JSON config file")
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default ./out)")
    common.add_argument("--threads", type=int, help="cap BLAS/OpenMP threads")
    common.add_argument("--verbose", "-v", action="store_true")

    geo = argparse.ArgumentParser(add_help=False)
    geo.add_argument("--tau-min", type=float)
    geo.add_argument("--tau-max", type=float)
    geo.add_argument("--depth", type=int, help="Koch prism depth")
    geo.add_argument("--level", type=int, help="mesh refinement level")

    lad = argparse.ArgumentParser(add_help=False)
    lad.add_argument("--eps0", type=float, help="largest offset of the extrapolation ladder")
    lad.add_argument("--rungs", type=int)
    lad.add_argument("--ratio", type=float)

    tr = argparse.ArgumentParser(add_help=False)
    tr.add_argument("--kind")
    tr.add_argument("--mesh")
    tr.add_argument("--grid")
    tr.add_argument("--density")
    tr.add_argument("--points")

    p = argparse.ArgumentParser(prog="lamejump", description="generalized Lame-Navier jump problems")
    sub = p.add_subparsers(dest="experiment", required=True)
    extra = {"solve-jump": [geo, lad], "fractal-demo": [geo, lad], "borel-pompeiu": [geo],
             "estimate-dsummability": [geo], "estimate-marcinkiewicz": [geo], "mesh": [geo], "transform": [tr]}
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common, *extra.get(name, [])], help=HELP[name])
    return p


def _overrides(exp: str, args: argparse.Namespace, cfg: dict) -> dict:
    """Fold command-line flags into the config dict."""
    cfg = dict(cfg)
    get = lambda k: getattr(args, k, None)  # noqa: E731
    if get("level") is not None:
        cfg["level"] = get("level")
    if get("depth") is not None:
        if exp == "fractal-demo":
            cfg.setdefault("dimension", {})["depth"] = get("depth")
        else:
            dom = dict(cfg.get("domain") or {"kind": "koch_prism"})
            dom["depth"] = get("depth")
            cfg["domain"] = dom
    for flag, key in (("tau_min", "tau_min"), ("tau_max", "tau_max")):
        if get(flag) is not None:
            if exp == "fractal-demo":
                cfg.setdefault("dimension", {})[key] = get(flag)
            else:
                cfg[key] = get(flag)
    for key in ("eps0", "rungs", "ratio"):
        if get(key) is not None:
            cfg.setdefault("ladder", {})[key] = get(key)
    for key in ("kind", "mesh", "grid", "density", "points"):
        if get(key) is not None:
            cfg[key] = get(key)
    return cfg


def _threads(n: int | None):
    if n is None:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    exp = args.experiment
    try:
        cfg = load_config(args.config)
        cfg = _overrides(exp, args, cfg)
        base = args.config.parent if args.config else Path.cwd()
        with _threads(args.threads):
            rep = run(exp, cfg, args.seed, args.out, base)
    except ConfigError as exc:
        print(f"lamejump {exp}: config error", file=sys.stderr)
        for msg in exc.problems:
            print(f"  - {msg}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"lamejump {exp}: {exc}", file=sys.stderr)
        return 2
    paths = rep.write(args.out)
    if exp == "transform":
        arr = Path(args.out) / "transform_values.json"
        arr.write_text(json.dumps(rep.to_json_obj()["results"]["values"], indent=2) + "\n")
        paths.append(arr)
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.anchor:28s} {c.name}: {json.dumps(c.to_json_obj()['value'])}")
    for pth in paths:
        log.info("wrote %s", pth)
    print(f"{exp}: {'PASS' if rep.passed else 'FAIL'} ({len(rep.checks)} checks) -> {args.out}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
