from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import pytest

from lamejump.anchors import ANCHORS, check_anchor
from lamejump.cli import main
from lamejump.config import SCHEMAS, ConfigError, load_config, parse_frame, validate
from lamejump.experiments import RUNNERS, run
from lamejump.report import Report, emit_tables

ROOT = Path(__file__).resolve().parents[1]


def test_every_experiment_has_schema_and_runner():
    assert set(SCHEMAS) == set(RUNNERS)


def test_empty_config_lists_missing_fields():
    with pytest.raises(ConfigError) as exc:
        validate("solve-jump", {})
    assert {"missing field 'domain'", "missing field 'lam'", "missing field 'phi'"} <= set(exc.value.problems)


def test_unknown_and_nested_fields_reported():
    with pytest.raises(ConfigError) as exc:
        validate("verify-identities", {"bogus": 1, "teodorescu": {"hh": 2}})
    assert "unknown field 'bogus'" in exc.value.problems
    assert "unknown field 'teodorescu.hh'" in exc.value.problems


def test_bad_frame_and_params_rejected():
    base = {"domain": {"kind": "ball"}, "field": "counterexample", "psi": {"standard": 3},
            "phi": [["1", "1", "0"], ["0", "1", "0"], ["0", "0", "1"]], "lam": {"mu": "-1", "lam": "0"}}
    with pytest.raises(ConfigError) as exc:
        validate("solve-jump", base)
    assert any(p.startswith("field 'phi'") for p in exc.value.problems)
    assert any(p.startswith("field 'lam'") for p in exc.value.problems)


def test_missing_file_reference(tmp_path):
    with pytest.raises(ConfigError):
        validate("transform", {"kind": "cl", "density": "nope.json", "points": "nope.json"}, tmp_path)


def test_wrong_experiment_tag():
    with pytest.raises(ConfigError):
        validate("mesh", {"experiment": "solve-jump"})


def test_toml_and_json_configs(tmp_path):
    (tmp_path / "a.toml").write_text('experiment = "mesh"\nlevel = 2\n')
    (tmp_path / "b.json").write_text('{"experiment": "mesh", "level": 2}')
    assert load_config(tmp_path / "a.toml") == load_config(tmp_path / "b.json")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")


def test_frame_shorthand():
    assert parse_frame({"standard": 4}).dim == 4
    with pytest.raises(ValueError):
        parse_frame("standard")


@pytest.mark.parametrize("cfg", sorted((ROOT / "configs").glob("*.toml")))
def test_shipped_configs_validate(cfg):
    given = load_config(cfg)
    validate(given["experiment"], given, cfg.parent)


def test_determinism_same_seed_same_payload(tmp_path):
    cfg = {"domain": {"kind": "ellipsoid", "axes": [1.0, 0.7, 0.5]}, "n_samples": 20000, "n_points": 2}
    a = run("estimate-marcinkiewicz", cfg, seed=7).to_json(timings=False)
    b = run("estimate-marcinkiewicz", cfg, seed=7).to_json(timings=False)
    c = run("estimate-marcinkiewicz", cfg, seed=8).to_json(timings=False)
    assert a == b and a != c


def test_cli_outputs_are_byte_identical(tmp_path):
    args = ["verify-kernels", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "x")]) == 0
    assert main(args + ["--out", str(tmp_path / "y")]) == 0
    for name in ("verify-kernels_checks.csv", "verify-kernels_kernels.csv"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()
    jx = json.loads((tmp_path / "x" / "verify-kernels.json").read_text())
    jy = json.loads((tmp_path / "y" / "verify-kernels.json").read_text())
    jx.pop("timings"), jy.pop("timings")
    assert jx == jy and jx["pass"] is True


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["solve-jump", "--out", str(tmp_path)]) == 2
    assert "missing field 'domain'" in capsys.readouterr().err
    cfg = tmp_path / "m.toml"
    cfg.write_text('experiment = "estimate-marcinkiewicz"\nexpected = 2.0\nn_samples = 20000\n')
    assert main(["estimate-marcinkiewicz", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out


def test_cli_threads_and_mesh(tmp_path):
    assert main(["mesh", "--level", "2", "--threads", "1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "mesh.jsonl").exists()


def test_cli_transform_roundtrip(tmp_path):
    assert main(["mesh", "--level", "2", "--out", str(tmp_path)]) == 0
    (tmp_path / "f.json").write_text(json.dumps({"dim": 3, "terms": []}))
    from lamejump.polyfield import PolyField

    (tmp_path / "f.json").write_text(PolyField.coordinate(1, 3).to_json())
    (tmp_path / "p.json").write_text("[[0.1, 0.0, 0.0], [3.0, 0.0, 0.0]]")
    assert main(["transform", "--kind", "cl", "--mesh", str(tmp_path / "mesh.jsonl"), "--density",
                 str(tmp_path / "f.json"), "--points", str(tmp_path / "p.json"), "--out", str(tmp_path)]) == 0
    vals = json.loads((tmp_path / "transform_values.json").read_text())
    assert len(vals) == 2 and vals[0]["kind"] == "cl"


def test_empty_table_is_header_only(tmp_path):
    rep = Report("demo", {}, 0)
    rep.table("jump", ["point_id", "side", "jump_error", "mf_jump_error", "extrapolation_ok"])
    paths = emit_tables(rep, tmp_path)
    rows = list(csv.reader(open(paths[1])))
    assert rows == [["point_id", "side", "jump_error", "mf_jump_error", "extrapolation_ok"]]
    assert list(csv.reader(open(paths[0]))) == [["name", "anchor", "value", "tolerance", "pass"]]


def test_anchor_registry():
    with pytest.raises(KeyError):
        check_anchor("no.such.anchor")
    src = "\n".join(p.read_text() for p in (ROOT / "src" / "lamejump").glob("*.py"))
    used = set(re.findall(r'"((?:algebra|dirac|lame|kernel|teodorescu|borel-pompeiu|cauchy|jump|whitney|'
                          r'geometry|transform)\.[a-zA-Z0-9.-]+)"', src))
    assert used <= set(ANCHORS)
    readme = (ROOT / "README.md").read_text()
    assert all(f"`{a}`" in readme for a in ANCHORS)
