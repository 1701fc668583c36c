"""Acceptance criteria 1-10, each reported as one PASS/FAIL line.

Every check runs the shipped configs in configs/acceptance through the task
runners and then re-asserts the thresholds pinned below, independently of the
tolerances stored in the configs.
"""

import time
from functools import lru_cache
from pathlib import Path

import numpy as np

from spectriples.cli import run_task
from spectriples.config import load_config

ROOT = Path(__file__).resolve().parents[1] / "configs" / "acceptance"
LINES = []

# pinned tolerances
COUNT_RUNTIME_S = 60.0
MIN_COUNT_CONFIGS = 12
HERMITIAN_REL = 1e-8
HALFLINE_LAMBDA0_TOL = 1e-4
BALL_DEGREE0_TOL = 1e-3
CLOSED_FORM_TOL = 1e-4
SLOPE_TARGET, SLOPE_TOL = 2.0, 0.2
SCHATTEN_MIN = {"schatten_annulus_l1": 1.85, "schatten_annulus_l2": 3.6,
                "schatten_ball": 0.85, "schatten_annulus_growth": 1.35}
SCHATTEN_RUNTIME_S = 600.0
GREEN_COMPACT_TOL = 1e-12
GREEN_SLOPE_MIN = {"green_smooth_interval_m1": 1.8, "green_smooth_interval_m2": 0.8}
WEYL_CLOSED_FORM_TOL = 1e-4
RANK_REL = 1e-10
SECTOR_SLACK = 1e-6
COMPACT_RATIO = 1e-3


@lru_cache(maxsize=None)
def run(name):
    cfg = load_config(ROOT / f"{name}.cfg")
    t0 = time.perf_counter()
    rep = run_task(cfg, workers=1)
    return rep, time.perf_counter() - t0


def report(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    return ok


def test_criterion_01_negative_count():
    names = ["count_halfline", "count_interval", "count_annulus_scalar",
             "count_annulus_angular", "count_interval_m2"]
    rows, elapsed = [], 0.0
    for n in names:
        rep, t = run(n)
        rows += rep.results["counts"]
        elapsed += t
    exact = all(r["formula_count"] == r["direct_count"] for r in rows)
    ok = exact and len(rows) >= MIN_COUNT_CONFIGS and elapsed <= COUNT_RUNTIME_S
    assert report(1, ok, f"{sum(r['agree'] for r in rows)}/{len(rows)} configurations "
                         f"integer-exact, {elapsed:.1f} s")


def test_criterion_02_gap_count():
    rep, _ = run("gap_count_mathieu")
    rows = rep.results["counts"]
    buf = rep.results["left_edge_buffer"]
    gaps_ok = len(rep.results["gaps"]) >= 2 and {r["gap"] for r in rows} == {0, 1}
    exact = all(r["formula_count"] == r["direct_count"] for r in rows)
    stable = all(b["eps0"] > 0
                 and abs(b["eps0"] - b["eps0_refined"]) <= b["grid_step"] * (1 + 1e-9)
                 for b in buf)
    ok = gaps_ok and exact and stable and len(rows) == 16
    assert report(2, ok, f"{sum(r['agree'] for r in rows)}/{len(rows)} gap counts exact, "
                         f"eps0 stable on {len(buf)} (gap, sigma) pairs")


def test_criterion_03_lambda0_negative():
    worst_def, worst_max = 0.0, -np.inf
    for n in ("calderon_halfline", "calderon_interval", "calderon_annulus", "calderon_ball",
              "calderon_interval_m2"):
        entry = run(n)[0].results["calderon"][0]
        worst_def = max(worst_def, entry["hermitian_defect"])
        worst_max = max(worst_max, entry["max_eigenvalue"])
    half = run("calderon_halfline")[0].results["calderon"][0]["closed_form_error"]
    ball = run("calderon_ball")[0].results["calderon"][0]["closed_form_error"]
    ok = (worst_def <= HERMITIAN_REL and worst_max < 0 and half <= HALFLINE_LAMBDA0_TOL
          and ball <= BALL_DEGREE0_TOL)
    assert report(3, ok, f"defect {worst_def:.1e}, max eig {worst_max:.3f}, "
                         f"halfline err {half:.1e}, ball err {ball:.1e}")


def test_criterion_04_closed_forms():
    iv = run("calderon_interval")[0].results
    an = run("calderon_annulus")[0].results
    e_iv = iv["calderon"][0]["closed_form_error"]
    e_an = an["calderon"][0]["closed_form_error"]
    slope = iv["refinement"]["slope"]
    ok = (e_iv <= CLOSED_FORM_TOL and e_an <= CLOSED_FORM_TOL
          and abs(slope - SLOPE_TARGET) <= SLOPE_TOL)
    assert report(4, ok, f"interval err {e_iv:.1e} slope {slope:.2f}, annulus err {e_an:.1e}")


def test_criterion_05_schatten_decay():
    fitted, elapsed = {}, 0.0
    for n in SCHATTEN_MIN:
        rep, t = run(n)
        fitted[n] = rep.results["schatten"][0]["fitted_exponent"]
        elapsed += t
    ok = all(fitted[n] >= lo for n, lo in SCHATTEN_MIN.items()) and elapsed <= SCHATTEN_RUNTIME_S
    detail = ", ".join(f"{n.split('_', 1)[1]} {fitted[n]:.3f}>={SCHATTEN_MIN[n]}"
                       for n in SCHATTEN_MIN)
    assert report(5, ok, f"{detail}; {elapsed:.0f} s")


def test_criterion_06_green_identity():
    compact = {n: run(n)[0].results["relative_residual"] for n in
               ("green_compact_interval_m1", "green_compact_halfline_m1",
                "green_compact_interval_m2", "green_compact_annulus_m1",
                "green_compact_ball_exterior_m1")}
    slopes = {n: run(n)[0].results["slope"] for n in GREEN_SLOPE_MIN}
    ok = (max(compact.values()) <= GREEN_COMPACT_TOL
          and all(slopes[n] >= lo for n, lo in GREEN_SLOPE_MIN.items()))
    assert report(6, ok, f"max compact residual {max(compact.values()):.1e}, slopes "
                         + ", ".join(f"{v:.2f}" for v in slopes.values()))


def test_criterion_07_weyl_properties():
    ok, herg = True, []
    for n in ("weyl_interval", "weyl_annulus", "weyl_halfline"):
        rep = run(n)[0]
        ok &= rep.verdicts["weyl_zero"]["value"] == 0
        herg += [h["min_eig_im"] for h in rep.results["herglotz"]]
    mono = run("weyl_halfline")[0].results["monotone"]
    ok &= min(herg) > 0 and min(mono["min_eig_increments"]) >= 0
    ok &= max(mono["closed_form_errors"]) <= WEYL_CLOSED_FORM_TOL
    assert report(7, bool(ok), f"M(0)=0, min Im-eig {min(herg):.2e}, "
                               f"closed-form err {max(mono['closed_form_errors']):.1e}")


def test_criterion_08_finite_rank():
    ok, parts = True, []
    for n in ("rank_interval_m1", "rank_halfline_m1", "rank_interval_m2"):
        e = run(n)[0].results["schatten"][0]
        s = np.asarray(e["leading_singular_values"])
        rank = int(np.sum(s > RANK_REL * s[0]))
        ok &= rank <= e["rank_bound"]
        parts.append(f"{n[5:]} {rank}<={e['rank_bound']}")
    assert report(8, bool(ok), ", ".join(parts))


def test_criterion_09_sector():
    inside = run("sector_halfline")[0].results["sector"]["inside"]
    counter = run("sector_counterexample")[0].results["sector"]["inside"]
    assert run("sector_halfline")[0].cfg.tolerances["sector_slack"] == SECTOR_SLACK
    ok = inside and not counter
    assert report(9, ok, f"complex Robin inside={inside}, Hermitian counterexample "
                         f"inside={counter}")


def test_criterion_10_compactness_proxy():
    ok, parts = True, []
    for n in SCHATTEN_MIN:
        e = run(n)[0].results["schatten"][0]
        ratio = e["smallest_retained_ratio"]
        ok &= e["fitted_exponent"] > 0 and ratio < COMPACT_RATIO
        parts.append(f"{ratio:.1e}")
    assert report(10, bool(ok), "tail ratios " + ", ".join(parts))

