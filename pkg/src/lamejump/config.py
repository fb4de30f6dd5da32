"""
Experiment configuration: TOML (JSON fallback) files, defaults and validation.

Structural sets are given as exact rational matrices (rows of strings such as
``"3/5"``), Lame parameters as ``{mu = "1", lam = "1/2"}``, and fields as one
of ``"counterexample"``, an inline polynomial-field object, ``{file = ...}``
or ``{random = {degree = 3, seed = 1}}``.
"""

from __future__ import annotations

import copy
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .geometry.domains import Ball, Domain, Ellipsoid, HalfSpace, KochPrism
from .polyfield import LameParams, PolyField, StructuralSet, dirichlet_counterexample, random_polyfield


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid config: " + "; ".join(self.problems))


REQUIRED = object()


def _ladder():
    return {"eps0": None, "rungs": 6, "ratio": 2.0, "tol": 0.1}


SCHEMAS: dict[str, dict[str, Any]] = {
    "verify-algebra": {"dims": [3, 4, 5], "n_triples": 1000},
    "verify-identities": {
        "factorization": {"n_pairs": 100, "dims": [3, 4], "max_degree": 4},
        "counterexample": {"field": "counterexample", "phi": None, "psi": None, "lam": None, "surface": None},
        "teodorescu": {"enabled": True, "h": [0.05, 0.025], "n_points": 20, "radius": 0.6, "degree": 3,
                       "lam": {"mu": "1", "lam": "1/2"}, "fd_step": 1e-3, "tol": 3e-2, "min_order": 0.8},
    },
    "verify-kernels": {"n_points": 20, "n_frames": 5, "m": 3, "fd_step": 1e-3, "tol_first": 1e-5,
                       "tol_second": 1e-4, "r_min": 0.5, "r_max": 2.0},
    "borel-pompeiu": {
        "domain": REQUIRED, "field": REQUIRED, "lam": REQUIRED, "phi": REQUIRED, "psi": REQUIRED,
        "level": 4, "h": 0.05, "refine_boundary": 1, "n_points": 20, "interior_frac": 0.7,
        "exterior_offset": 0.5, "tol": 1e-2, "constant": [1, 0, 0, 0, 0, 0, 0, 0],
    },
    "solve-jump": {
        "domain": REQUIRED, "field": REQUIRED, "lam": REQUIRED, "phi": REQUIRED, "psi": REQUIRED,
        "level": 4, "near": "refine", "ladder": _ladder(), "n_points": 20, "tol_F": 3e-2, "tol_MF": 5e-2,
        "decay_radii": [5, 10, 20, 40], "n_residual": 10, "fd_step": 1e-3, "tol_residual": 3e-2,
    },
    "fractal-demo": {
        "domain": {"kind": "koch_prism", "depth": 3}, "field": REQUIRED, "lam": REQUIRED,
        "phi": REQUIRED, "psi": REQUIRED, "nu": 0.9, "extension": "analytic", "h": 0.025,
        "refine_boundary": 1, "ladder": _ladder(), "n_points": 12, "n_residual": 10, "min_dist": 0.1,
        "fd_step": 1e-3, "tol_F": 5e-2, "tol_residual": 5e-2,
        "dimension": {"depth": 4, "spacing": 0.003, "tau_min": 0.008, "tau_max": 0.8, "n_tau": 24},
    },
    "estimate-dsummability": {
        "domain": {"kind": "koch_prism", "depth": 4}, "spacing": 0.003, "tau_min": 0.008, "tau_max": 0.8,
        "n_tau": 24, "n_offsets": 16, "d_values": [], "expected_slope": None, "tol": 0.1,
    },
    "estimate-marcinkiewicz": {
        "domain": {"kind": "ball", "radius": 1.0}, "points": None, "n_points": 4, "r": 0.5,
        "n_samples": 200000, "p_grid": [0.25, 0.5, 0.75, 0.9, 1.1, 1.5], "expected": None, "tol": 0.1,
    },
    "transform": {"kind": REQUIRED, "mesh": None, "grid": None, "density": REQUIRED, "points": REQUIRED,
                  "phi": None, "psi": None, "lam": None, "near": "error", "domain": None},
    "mesh": {"domain": {"kind": "ball", "radius": 1.0}, "level": 3, "h": None, "refine_boundary": 0,
             "output": None, "tol": 1e-2},
}


def load_config(path: str | Path | None) -> dict:
    """Parse a TOML file (or JSON, by extension or as a fallback)."""
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config file {path} does not exist"])
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return json.loads(text)
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        try:
            return json.loads(text)
        except json.JSONDecodeError:
            raise ConfigError([f"{path}: not valid TOML ({exc}) or JSON"]) from None


# dict-valued fields that replace their default wholesale instead of merging
_OPAQUE = ("lam", "domain", "field", "phi", "psi", "constant")


def _merge(schema: dict, given: dict, prefix: str, problems: list[str]) -> dict:
    out = {}
    for key, default in schema.items():
        name = f"{prefix}{key}"
        if key in given:
            val = given[key]
            if isinstance(default, dict) and isinstance(val, dict) and default and key not in _OPAQUE:
                out[key] = _merge(default, val, name + ".", problems)
            else:
                out[key] = val
        elif default is REQUIRED:
            problems.append(f"missing field '{name}'")
        else:
            out[key] = copy.deepcopy(default)
    for key in given:
        if key not in schema and key != "experiment":
            problems.append(f"unknown field '{prefix}{key}'")
    return out


def validate(experiment: str, given: dict, base_dir: Path | None = None) -> dict:
    """Fill defaults and check required fields, structural sets, parameters and file references."""
    if experiment not in SCHEMAS:
        raise ConfigError([f"unknown experiment '{experiment}'"])
    if given.get("experiment", experiment) != experiment:
        raise ConfigError([f"config is for '{given['experiment']}', not '{experiment}'"])
    problems: list[str] = []
    cfg = _merge(SCHEMAS[experiment], given, "", problems)
    if problems:
        raise ConfigError(problems)
    for key in ("phi", "psi"):
        if cfg.get(key) is not None:
            try:
                parse_frame(cfg[key])
            except Exception as exc:
                problems.append(f"field '{key}': {exc}")
    if cfg.get("lam") is not None:
        try:
            parse_lame(cfg["lam"])
        except Exception as exc:
            problems.append(f"field 'lam': {exc}")
    if cfg.get("domain") is not None:
        try:
            parse_domain(cfg["domain"])
        except Exception as exc:
            problems.append(f"field 'domain': {exc}")
    for key in ("mesh", "grid", "density", "points"):
        ref = cfg.get(key)
        if isinstance(ref, str) and not _resolve(ref, base_dir).exists():
            problems.append(f"field '{key}': file {ref} does not exist")
    fld = cfg.get("field")
    if isinstance(fld, dict) and "file" in fld and not _resolve(fld["file"], base_dir).exists():
        problems.append(f"field 'field.file': file {fld['file']} does not exist")
    if problems:
        raise ConfigError(problems)
    return cfg


def _resolve(ref: str, base_dir: Path | None) -> Path:
    p = Path(ref)
    return p if p.is_absolute() or base_dir is None else base_dir / p


def parse_frame(rows) -> StructuralSet:
    if isinstance(rows, str) and rows == "standard":
        raise ValueError("give the dimension: use a matrix or {standard = m}")
    if isinstance(rows, dict) and "standard" in rows:
        return StructuralSet.standard(int(rows["standard"]))
    return StructuralSet.from_rows([[Fraction(str(c)) for c in r] for r in rows])


def parse_lame(obj) -> LameParams:
    return LameParams(Fraction(str(obj["mu"])), Fraction(str(obj["lam"])))


def parse_domain(obj) -> Domain:
    kind = obj.get("kind")
    if kind in ("ball", "sphere"):
        return Ball(int(obj.get("dim", 3)), float(obj.get("radius", 1.0)), obj.get("center"))
    if kind == "ellipsoid":
        return Ellipsoid(tuple(float(a) for a in obj["axes"]), obj.get("center"))
    if kind == "half_space":
        return HalfSpace(tuple(float(a) for a in obj.get("point", (0.0, 0.0, 0.0))),
                         tuple(float(a) for a in obj["normal"]))
    if kind == "koch_prism":
        return KochPrism(int(obj.get("depth", 3)), float(obj.get("side", 1.0)), float(obj.get("height", 1.0)))
    raise ValueError(f"unknown domain kind {kind!r}")


def parse_field(obj, m: int = 3, base_dir: Path | None = None) -> PolyField:
    if obj == "counterexample":
        return dirichlet_counterexample().field
    if isinstance(obj, dict) and "file" in obj:
        return PolyField.from_json(_resolve(obj["file"], base_dir).read_text())
    if isinstance(obj, dict) and "random" in obj:
        r = obj["random"]
        return random_polyfield(int(r.get("dim", m)), int(r.get("degree", 3)), int(r.get("seed", 0)))
    if isinstance(obj, dict) and "terms" in obj:
        return PolyField.from_json_obj(obj)
    raise ValueError(f"cannot interpret field {obj!r}")
