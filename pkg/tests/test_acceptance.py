"""
The ten acceptance criteria, each at its stated tolerance and runtime budget.

Every test appends one PASS/FAIL line; the lines are printed in the pytest
terminal summary (and to stdout when run with ``-s``).
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from lamejump.config import load_config
from lamejump.experiments import run

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _record(n: int, title: str, ok: bool, detail: str, seconds: float, budget: float) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d} {title}: {detail}; {seconds:.1f}s (budget {budget:g}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def _checks(rep, anchor: str):
    return [c for c in rep.checks if c.anchor == anchor]


def test_c01_algebra_axioms():
    rep, dt = _timed(lambda: run("verify-algebra", {"dims": [3, 4, 5], "n_triples": 1000}, seed=0))
    fails = sum(int(c.value) for c in rep.checks)
    ok = rep.passed and len(rep.checks) == 15 and dt < 30
    _record(1, "algebra axioms m=3,4,5 x 1000 triples", ok, f"{fails} exact failures", dt, 30)
    assert ok


def test_c02_factorization():
    cfg = {"factorization": {"n_pairs": 100, "dims": [3, 4], "max_degree": 4}, "teodorescu": {"enabled": False}}
    rep, dt = _timed(lambda: run("verify-identities", cfg, seed=0))
    c = _checks(rep, "dirac.factorization")[0]
    ms = {row["m"] for row in rep.tables[0].rows}
    ok = c.passed and c.value == 0 and ms == {3, 4} and dt < 60
    _record(2, "phi_D phi_D P = -Delta P, 100 pairs", ok, f"{c.value} nonzero differences", dt, 60)
    assert ok


def test_c03_counterexample():
    rep, dt = _timed(lambda: run("verify-identities", load_config(CONFIGS / "counterexample.toml"), seed=0))
    null, vanish = _checks(rep, "lame.null-solution")[0], _checks(rep, "lame.boundary-vanishing")[0]
    ok = null.passed and vanish.passed and dt < 1
    _record(3, "explicit null solution", ok, f"L F has {null.value} terms, divisible={vanish.value}", dt, 1)
    assert ok


def test_c04_kernel_identities():
    rep, dt = _timed(lambda: run("verify-kernels", {}, seed=0))
    worst = {c.name.split()[0]: c.value for c in rep.checks}
    ok = worst["pair"] < 1e-5 and worst["cauchy"] < 1e-5 and worst["e1"] < 1e-4 and dt < 10
    _record(4, "kernel identities", ok, ", ".join(f"{k} max {v:.2e}" for k, v in worst.items()), dt, 10)
    assert ok


@pytest.fixture(scope="module")
def teodorescu():
    cfg = {"factorization": {"n_pairs": 1}, "teodorescu": {"h": [0.05, 0.025], "n_points": 20, "radius": 0.6}}
    return _timed(lambda: run("verify-identities", cfg, seed=0))


def test_c05_teodorescu_inverse(teodorescu):
    rep, dt = teodorescu
    med = rep.results["teodorescu"]["medians"]
    orders = {c.name.split()[0]: c.value for c in _checks(rep, "teodorescu.convergence")}
    ok = all(med[k][0] < 3e-2 for k in ("left", "pair", "dagger")) \
        and all(orders[k] >= 0.8 for k in ("left", "pair", "dagger")) and dt < 300
    detail = ", ".join(f"{k} {med[k][0]:.1e}->{med[k][1]:.1e} (order {orders[k]:.2f})"
                       for k in ("left", "pair", "dagger"))
    _record(5, "Teodorescu right inverses, h=0.05 -> 0.025", ok, detail, dt, 300)
    assert ok


def test_c06_commutation(teodorescu):
    rep, dt = teodorescu
    med = rep.results["teodorescu"]["medians"]["commutation"]
    ok = all(v < 3e-2 for v in med) and dt < 180
    _record(6, "commutation identity", ok, f"median {med[0]:.2e} (h=0.05), {med[1]:.2e} (h=0.025)", dt, 180)
    assert ok


def test_c07_borel_pompeiu():
    rep, dt = _timed(lambda: run("borel-pompeiu", load_config(CONFIGS / "borel_pompeiu.toml"), seed=0))
    vals = {c.anchor: c for c in rep.checks}
    inner, outer, const = (vals[a] for a in ("borel-pompeiu.interior", "borel-pompeiu.exterior",
                                             "borel-pompeiu.constant"))
    ok = inner.value < 1e-2 and outer.value < 1e-2 and const.passed and const.detail["coefficient_identity"] \
        and rep.config["level"] == 4 and dt < 300
    _record(7, "Borel-Pompeiu dichotomy, unit ball, level 4", ok,
            f"inside {inner.value:.1e}, outside {outer.value:.1e}, constant {const.value:.1e}", dt, 300)
    assert ok


def test_c08_smooth_jump():
    rep, dt = _timed(lambda: run("solve-jump", load_config(CONFIGS / "smooth_jump.toml"), seed=0))
    F, MF = _checks(rep, "jump.smooth.F")[0], _checks(rep, "jump.smooth.MF")[0]
    decay = _checks(rep, "jump.smooth.decay")
    radii = [row["radius"] for row in rep.tables[1].rows]
    ok = F.value < 3e-2 and MF.value < 5e-2 and all(c.value for c in decay) and radii == [5, 10, 20, 40] \
        and dt < 600
    _record(8, "smooth jump problem", ok, f"F {F.value:.1e}, MF {MF.value:.1e}, decay monotone "
            f"{all(c.value for c in decay)}", dt, 600)
    assert ok


def test_c09_fractal_jump():
    cfg = load_config(CONFIGS / "fractal.toml")
    rep, dt = _timed(lambda: run("fractal-demo", cfg, seed=0))
    hyp = _checks(rep, "jump.fractal.hypothesis")[0]
    F = _checks(rep, "jump.fractal.F")[0]
    res = _checks(rep, "jump.fractal.residual")
    ok = (cfg["domain"]["depth"] == 3 and cfg["nu"] == 0.9 and hyp.passed and F.value < 5e-2
          and all(c.value < 5e-2 for c in res) and rep.config["min_dist"] >= 0.1 and dt < 900)
    _record(9, "fractal jump problem, Koch prism depth 3, nu=0.9", ok,
            f"d={hyp.detail['d_estimate']:.3f}, jump {F.value:.1e}, residual "
            + "/".join(f"{c.value:.1e}" for c in res), dt, 900)
    assert ok


def test_c10_geometry_estimators():
    t = time.perf_counter()
    sphere = run("estimate-dsummability", {"domain": {"kind": "ball", "radius": 1.0}, "spacing": 0.003,
                                           "expected_slope": 2.0, "tol": 0.1}, seed=0)
    koch = run("estimate-dsummability", {"domain": {"kind": "koch_prism", "depth": 4}, "spacing": 0.003,
                                         "expected_slope": 2.26, "tol": 0.1}, seed=0)
    marc = run("estimate-marcinkiewicz", load_config(CONFIGS / "sphere_marcinkiewicz.toml"), seed=0)
    dt = time.perf_counter() - t
    s, k = sphere.results["slope"], koch.results["slope"]
    mp, mm = marc.results["m_plus"], marc.results["m_minus"]
    ok = abs(s - 2.0) <= 0.1 and abs(k - 2.26) <= 0.1 and abs(mp - 1) <= 0.1 and abs(mm - 1) <= 0.1 \
        and sphere.passed and koch.passed and marc.passed and dt < 300
    _record(10, "geometry estimators", ok,
            f"sphere {s:.3f}, Koch {k:.3f}, m+ {mp:.3f}, m- {mm:.3f}", dt, 300)
    assert ok
    assert np.isfinite([s, k, mp, mm]).all()
