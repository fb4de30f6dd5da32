"""Check records, JSON reports and CSV tables."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .anchors import check_anchor


def _version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:  # not installed: running from a source tree
        return "0+unknown"


def jsonable(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become strings so output stays valid JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if hasattr(obj, "to_json_obj"):
        return jsonable(obj.to_json_obj())
    return obj if obj is None or isinstance(obj, str) else str(obj)


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    value: Any
    tolerance: Any
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {"name": self.name, "anchor": self.anchor, "value": jsonable(self.value),
                "tolerance": jsonable(self.tolerance), "pass": bool(self.passed), "detail": jsonable(self.detail)}


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)


@dataclass
class Report:
    experiment: str
    config: dict
    seed: int
    checks: list[Check] = field(default_factory=list)
    tables: list[Table] = field(default_factory=list)
    results: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, anchor: str, value, tolerance, passed: bool, **detail) -> Check:
        c = Check(name, check_anchor(anchor), value, tolerance, bool(passed), detail)
        self.checks.append(c)
        return c

    def table(self, name: str, columns: list[str], rows: list[dict] | None = None) -> Table:
        t = Table(name, list(columns), list(rows or []))
        self.tables.append(t)
        return t

    def to_json_obj(self, timings: bool = True) -> dict:
        out = {
            "experiment": self.experiment,
            "tool_version": _version(),
            "seed": self.seed,
            "config": jsonable(self.config),
            "checks": [c.to_json_obj() for c in self.checks],
            "results": jsonable(self.results),
            "pass": self.passed,
        }
        if timings:
            out["timings"] = jsonable(self.timings)
        return out

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_json_obj(timings), indent=2, sort_keys=True)

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{self.experiment}.json"
        path.write_text(self.to_json() + "\n")
        return [path] + emit_tables(self, out)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


CHECK_COLUMNS = ["name", "anchor", "value", "tolerance", "pass"]


def write_csv(path: str | Path, columns: list[str], rows: list[dict]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row.get(c, "")) for c in columns])
    return path


def emit_tables(report: Report, out_dir: str | Path) -> list[Path]:
    """``<experiment>_checks.csv`` plus one CSV per table; empty tables give header-only files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [{"name": c.name, "anchor": c.anchor, "value": json.dumps(jsonable(c.value)),
             "tolerance": json.dumps(jsonable(c.tolerance)), "pass": c.passed} for c in report.checks]
    paths = [write_csv(out / f"{report.experiment}_checks.csv", CHECK_COLUMNS, rows)]
    for t in report.tables:
        paths.append(write_csv(out / f"{report.experiment}_{t.name}.csv", t.columns, t.rows))
    return paths
