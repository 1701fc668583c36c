"""Command-line entry point: run one verification task or a suite of them.

    spectriples <task> --config FILE [--out DIR] [--workers N]
    spectriples suite --config MANIFEST [--out DIR] [--workers N]

Each task writes ``report.json`` (deterministic: sorted keys, floats with 17
significant digits), CSV side files for matrices and singular values, and a
separate ``timing.json`` with the wall time.
"""

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import boundary, counting, schatten
from .config import (TASKS, build_k, build_problem, format_float, input_hash, load_config,
                     serialize_config, write_matrix_csv)
from .errors import InvalidConfig, SpectriplesError
from .numerics import singular_values
from .realizations import dirichlet_realization, realization_with_K, spectrum

log = logging.getLogger("spectriples")


# ------------------------------------------------------------------ reports


def dumps(obj):
    """JSON text with sorted keys and floats rendered with 17 significant digits."""
    return _dump(obj, 0) + "\n"


def _dump(obj, depth):
    pad, inner = "  " * depth, "  " * (depth + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_dump(obj[k], depth + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        return "[\n" + ",\n".join(inner + _dump(v, depth + 1) for v in seq) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        text = format_float(obj)
        return json.dumps(text) if text in ("nan", "inf", "-inf") else text
    if isinstance(obj, (complex, np.complexfloating)):
        return _dump({"re": obj.real, "im": obj.imag}, depth)
    return json.dumps(str(obj))


class Report:
    """Accumulates results, verdicts and side files for one task."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.results = {}
        self.verdicts = {}
        self.files = {}

    def verdict(self, name, passed, rule, value=None, tolerance=None):
        self.verdicts[name] = {"pass": bool(passed), "rule": rule, "value": value,
                               "tolerance": tolerance}

    def matrix(self, name, M):
        if self.cfg.output["matrices"]:
            self.files[name] = np.asarray(M)

    @property
    def passed(self):
        return all(v["pass"] for v in self.verdicts.values())

    def record(self):
        return {
            "task": self.cfg.name,
            "config": serialize_config(self.cfg, include_output=False),
            "input_hash": input_hash(self.cfg),
            "seed": self.cfg.task["seed"],
            "tolerances": self.cfg.tolerances,
            "results": self.results,
            "verdicts": self.verdicts,
            "passed": self.passed,
            "side_files": sorted(f"{n}.csv" for n in self.files),
        }

    def write(self, out_dir, wall_time=None):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps(self.record()))
        for name, M in self.files.items():
            write_matrix_csv(out / f"{name}.csv", M)
        if wall_time is not None:
            (out / "timing.json").write_text(dumps({"wall_time_s": wall_time}))


def _pmap(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# -------------------------------------------------------------------- tasks


def _probes(problem, kind, rng):
    x = problem.grid
    a, b = x[0], x[-1]
    nb = len(problem.blocks)
    if kind == "compact":
        def bump(c, w):
            t = (x - c) / w
            out = np.zeros_like(x)
            inside = np.abs(t) < 1
            out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
            return out
        L = b - a
        centers = a + L * rng.uniform(0.35, 0.65, size=2)
        widths = L * rng.uniform(0.1, 0.25, size=2)
        u, v = bump(centers[0], widths[0]), bump(centers[1], widths[1]) * np.cos(3 * x)
    else:
        truncated = problem.kind in ("halfline_m1", "annulus_m1", "ball_exterior_m1")
        if truncated:
            u = np.sin(np.pi * (b - x) / (2 * (b - a)))
            v = (b - x) * np.cos(3 * x)
        elif problem.m == 1:
            u, v = np.sin(np.pi * x / 2), np.cos(3 * x)
        else:
            u, v = np.sin(np.pi * x / 2) + x**3, np.cos(3 * x) + x
    if nb > 1:
        cu, cv = rng.standard_normal(nb), rng.standard_normal(nb)
        u, v = np.outer(cu, u), np.outer(cv, v)
    return u, v


def _slope(levels, values):
    x, y = np.log(np.asarray(levels, float)), np.log(np.asarray(values, float))
    return float(-np.polyfit(x, y, 1)[0])


def task_green_check(cfg, rep, workers):
    t, tol = cfg.task, cfg.tolerances
    if t["probe"] == "compact":
        p = build_problem(cfg)
        u, v = _probes(p, "compact", np.random.default_rng(t["seed"]))
        res = boundary.green_residual(p, u, v, relative=True)
        rep.results["relative_residual"] = res
        rep.verdict("green_compact", res <= tol["green_compact"],
                    "compact-support probes: relative Green residual", res, tol["green_compact"])
        return
    levels = t["levels"] or (100, 200, 400, 800)

    def one(N):
        p = build_problem(cfg, N)
        u, v = _probes(p, "smooth", np.random.default_rng(t["seed"]))
        return boundary.green_residual(p, u, v)

    res = _pmap(one, levels, workers)
    slope = _slope(levels, res)
    m = build_problem(cfg, levels[0]).m
    need = tol["green_slope"] if tol["green_slope"] is not None else (1.8 if m == 1 else 0.8)
    rep.results.update({"levels": list(levels), "residuals": res, "slope": slope})
    rep.verdict("green_slope", slope >= need, "smooth probes: refinement slope", slope, need)


def _expected(cfg):
    t = cfg.task
    if t["expected_matrix"] is not None:
        e = np.array(t["expected_matrix"])
        n = int(round(np.sqrt(len(e))))
        return "matrix", e.reshape(n, n)
    if t["expected_diagonal"] is not None:
        return "diagonal", np.array(t["expected_diagonal"])
    return None, None


def _closed_form_error(L, kind, expected, modes):
    if kind == "matrix":
        return float(np.max(np.abs(L.matrix - expected)))
    d = np.diag(L.matrix)
    if modes is not None:
        lab = L.modes()
        d = np.array([d[np.flatnonzero(lab == k)[0]] for k in modes])
    return float(np.max(np.abs(d - expected)))


def task_calderon(cfg, rep, workers):
    t, tol = cfg.task, cfg.tolerances
    p = build_problem(cfg)
    kind, expected = _expected(cfg)
    out = []
    for i, z in enumerate(t["z"]):
        L = boundary.calderon(p, z)
        entry = {"z": z, "hermitian_defect": L.hermitian_defect}
        if z.imag == 0:
            lam_max = float(np.max(L.eigenvalues()))
            entry["max_eigenvalue"] = lam_max
            rep.verdict(f"hermitian[{i:02d}]", L.hermitian_defect <= tol["hermitian"],
                        "Lambda(x) Hermitian for real x", L.hermitian_defect, tol["hermitian"])
            if t["check_negative"] and z == 0:
                rep.verdict("negative_definite", lam_max < 0, "Lambda(0) negative definite",
                            lam_max, 0.0)
        if kind is not None and i == 0:
            err = _closed_form_error(L, kind, expected, t["expected_modes"])
            entry["closed_form_error"] = err
            rep.verdict("closed_form", err <= tol["closed_form"], "closed-form Calderon values",
                        err, tol["closed_form"])
        rep.matrix(f"calderon_{i}", L.matrix)
        out.append(entry)
    rep.results["calderon"] = out
    if t["levels"] and kind is not None:
        z0 = t["z"][0]

        def err(N):
            return _closed_form_error(boundary.calderon(build_problem(cfg, N), z0), kind,
                                      expected, t["expected_modes"])

        errs = _pmap(err, t["levels"], workers)
        slope = _slope(t["levels"], errs)
        rep.results["refinement"] = {"levels": list(t["levels"]), "errors": errs, "slope": slope}
        rep.verdict("refinement_slope", abs(slope - tol["slope_target"]) <= tol["slope_tol"],
                    "closed-form error refinement slope", slope, tol["slope_tol"])


def task_weyl(cfg, rep, workers):
    t, tol = cfg.task, cfg.tolerances
    p = build_problem(cfg)
    M0 = boundary.weyl_function(p, 0.0).matrix
    rep.verdict("weyl_zero", bool(np.all(M0 == 0)), "M(0) = 0 exactly", float(np.max(np.abs(M0))), 0.0)
    vals = []
    for i, z in enumerate(t["z"] or ()):
        M = boundary.weyl_function(p, z)
        vals.append({"z": z, "matrix_norm": float(np.linalg.norm(M.matrix, 2))})
        rep.matrix(f"weyl_{i}", M.matrix)
    rep.results["weyl"] = vals
    for i, z in enumerate(t["herglotz"] or ()):
        M = boundary.weyl_function(p, z).matrix
        mn = float(np.min(np.linalg.eigvalsh((M - M.conj().T) / 2j)))
        rep.results.setdefault("herglotz", []).append({"z": z, "min_eig_im": mn})
        rep.verdict(f"herglotz[{i:02d}]", mn > 0, "Im M(z) positive definite for Im z > 0", mn, 0.0)
    xs = t["monotone_x"]
    if xs:
        xs = sorted(xs)
        Ls = [boundary.calderon(p, x).matrix for x in xs]
        mins = []
        for a, b in zip(Ls[:-1], Ls[1:]):
            D = b - a
            mins.append(float(np.min(np.linalg.eigvalsh(0.5 * (D + D.conj().T)))))
        scale = max(float(np.max(np.abs(L))) for L in Ls)
        worst = min(mins)
        rep.results["monotone"] = {"x": xs, "min_eig_increments": mins}
        rep.verdict("monotone", worst >= -tol["psd"] * scale,
                    "Lambda(x) nondecreasing below the spectrum", worst, tol["psd"])
        if t["closed_form"] == "halfline":
            q_inf = p.potential.at_infinity()
            errs = [abs(L[0, 0] + np.sqrt(q_inf - x)) for L, x in zip(Ls, xs)]
            rep.results["monotone"]["closed_form_errors"] = errs
            rep.verdict("closed_form", max(errs) <= tol["closed_form"],
                        "Lambda(x) = -sqrt(q - x) on the half-line", max(errs), tol["closed_form"])


def task_count(cfg, rep, workers):
    t, tol = cfg.task, cfg.tolerances
    p = build_problem(cfg)
    sigmas = t["sigmas"]
    Ks = [build_k(cfg, s) for s in sigmas] if sigmas else [build_k(cfg)]
    if t["sector_angle"] is not None:
        r = realization_with_K(p, Ks[0])
        ok = counting.sector_check(r, t["sector_vertex"] or 0.0, t["sector_angle"],
                                   tol["sector_slack"])
        rep.results["sector"] = {"inside": ok, "vertex": t["sector_vertex"] or 0j,
                                 "semi_angle": t["sector_angle"]}
        rep.verdict("sector", ok == t["expect_sector"], "sector inclusion matches expectation",
                    ok, tol["sector_slack"])
        return

    def one(K):
        return counting.check_negative_count(p, K, t["lambda_root_convention"])

    reports = _pmap(one, Ks, workers)
    rows = []
    for i, r in enumerate(reports):
        row = {"formula_count": r.formula_count, "direct_count": r.direct_count,
               "agree": r.agree, "ambiguous": r.ambiguous,
               "unresolved_trace_modes": r.context.get("unresolved_trace_modes", 0),
               "perturbed": r.context.get("perturbed", 0.0)}
        if sigmas:
            row["sigma"] = sigmas[i]
        rows.append(row)
        rep.verdict(f"count[{i:02d}]", r.agree, "negative count: formula equals direct",
                    r.formula_count - r.direct_count, 0)
    rep.results["counts"] = rows
    if len(rows) == 1:
        rep.results.update({k: rows[0][k] for k in ("formula_count", "direct_count", "agree")})


def _gaps_for(cfg, N=None):
    t = cfg.task
    p = build_problem(cfg, N)
    s = spectrum(dirichlet_realization(p), tuple(t["window"]))
    return p, s, counting.find_gaps(s, tuple(t["window"]), t["min_width"])


def task_gaps(cfg, rep, workers):
    t, tol = cfg.task, cfg.tolerances
    p, s, gaps = _gaps_for(cfg)
    rep.results["gaps"] = [[g.alpha, g.beta] for g in gaps]
    ok = all(g.satisfies_gap_inequality(s.eigenvalues) for g in gaps)
    rep.verdict("gaps_found", len(gaps) > 0, "nonempty gap list", len(gaps), None)
    rep.verdict("gap_inequality", ok, "no eigenvalue inside any reported gap", ok, None)
    if t["stability"]:
        _, _, gaps2 = _gaps_for(cfg, 2 * p.N)
        rep.results["gaps_refined"] = [[g.alpha, g.beta] for g in gaps2]
        if gaps and gaps2:
            g1, g2 = gaps[0], gaps2[0]
            drift = max(abs(g1.alpha - g2.alpha), abs(g1.beta - g2.beta)) / g1.width
        else:
            drift = float("inf")
        rep.verdict("gap_stability", drift <= tol["gap_stability"],
                    "first gap stable under N-doubling (relative to its width)", drift,
                    tol["gap_stability"])


def task_gap_count(cfg, rep, workers):
    t = cfg.task
    p, s, gaps = _gaps_for(cfg)
    rep.results["gaps"] = [[g.alpha, g.beta] for g in gaps]
    sigmas = t["sigmas"]
    Ks = [(sg, build_k(cfg, sg)) for sg in sigmas] if sigmas else [(None, build_k(cfg))]
    jobs = []
    for gi in t["gap_indices"]:
        if gi >= len(gaps):
            raise InvalidConfig(f"gap index {gi} requested but only {len(gaps)} gaps found")
        for sg, K in Ks:
            for ef in t["eps_fractions"]:
                jobs.append((gi, sg, K, ef))

    def one(job):
        gi, sg, K, ef = job
        g = gaps[gi]
        return counting.check_gap_count(p, K, g, ef * g.width, t["lambda_root_convention"])

    reports = _pmap(one, jobs, workers)
    rows = []
    for i, ((gi, sg, K, ef), r) in enumerate(zip(jobs, reports)):
        rows.append({"gap": gi, "sigma": sg, "eps_fraction": ef,
                     "formula_count": r.formula_count, "direct_count": r.direct_count,
                     "agree": r.agree, "ambiguous": r.ambiguous,
                     "perturbed": r.context.get("perturbed", 0.0)})
        rep.verdict(f"gap_count[{i:02d}]", r.agree, "gap count: formula equals direct over "
                    "(alpha, beta - eps)", r.formula_count - r.direct_count, 0)
    rep.results["counts"] = rows
    if t["stability"]:
        _, _, gaps2 = _gaps_for(cfg, 2 * p.N)
        p2 = build_problem(cfg, 2 * p.N)
        buf = []
        for gi in t["gap_indices"]:
            g, g2 = gaps[gi], gaps2[gi]
            step = g.width / t["buffer_points"]
            grid = step * np.arange(1, t["buffer_points"])
            for sg, K in Ks:
                e1 = counting.left_edge_buffer(p, K, g, grid)
                e2 = counting.left_edge_buffer(p2, K, g2, grid)
                buf.append({"gap": gi, "sigma": sg, "eps0": e1, "eps0_refined": e2,
                            "grid_step": step})
                rep.verdict(f"left_edge_buffer[{len(buf) - 1:02d}]",
                            e1 > 0 and abs(e1 - e2) <= step * (1 + 1e-9),
                            "eps0 positive and stable within one grid step under N-doubling",
                            abs(e1 - e2), step)
        rep.results["left_edge_buffer"] = buf


def task_schatten(cfg, rep, workers):
    t, tol = cfg.task, cfg.tolerances
    p = build_problem(cfg)
    r1 = realization_with_K(p, build_k(cfg))
    r2 = dirichlet_realization(p) if t["reference"] == "dirichlet" else realization_with_K(p, None)
    z = t["z"][0]
    z = z.real if z.imag == 0 else z
    out = []
    for ell in t["ell"]:
        entry = {"ell": ell}
        if t["rank_check"]:
            D = schatten.resolvent_power_difference(r1, r2, z, ell)
            s = singular_values(D)
            rank = schatten.numerical_rank(s, tol["rank_rel"])
            bound = ell * p.boundary_dimension
            entry.update({"numerical_rank": rank, "rank_bound": bound,
                          "leading_singular_values": s[: bound + 3]})
            rep.verdict(f"finite_rank[ell={ell}]", rank <= bound,
                        "numerical rank at most ell * dim(boundary space)", rank, tol["rank_rel"])
            out.append(entry)
            continue
        sv = schatten.difference_singular_values(r1, r2, z, ell, seed=t["seed"])
        pp = schatten.predicted_schatten_exponent(p.n, p.m, ell, t["class"])
        fit = schatten.fit_decay_exponent(sv, t["tail_fraction"], t["drop_head"], pp)
        verdict = schatten.schatten_verdict(fit, tol["schatten_margin"])
        entry.update({"predicted_p": str(pp), "predicted_exponent": fit.predicted_exponent,
                      "fitted_exponent": fit.fitted_exponent, "r_squared": fit.r_squared,
                      "window": list(fit.window), "verdict": verdict})
        rep.files[f"singular_values_ell{ell}"] = sv.values.reshape(-1, 1)
        rep.verdict(f"schatten[ell={ell}]", verdict == "pass",
                    "fitted exponent >= predicted - margin", fit.fitted_exponent,
                    tol["schatten_margin"])
        if t["compactness"]:
            smallest = float(sv.values[fit.window[1] - 1] / sv.values[0])
            entry["smallest_retained_ratio"] = smallest
            rep.verdict(f"compactness[ell={ell}]",
                        fit.fitted_exponent > 0 and smallest < tol["compact_ratio"],
                        "positive decay and small tail", smallest, tol["compact_ratio"])
        if t["collapse_check"]:
            fc = schatten.fit_decay_exponent(sv.collapsed(), t["tail_fraction"], t["drop_head"])
            ratio = fc.fitted_exponent / fit.fitted_exponent
            entry.update({"collapsed_exponent": fc.fitted_exponent, "collapse_ratio": ratio})
            rel = abs(ratio - (p.n - 1)) / (p.n - 1)
            rep.verdict(f"collapse[ell={ell}]", rel <= tol["collapse_ratio_tol"],
                        "collapsed / expanded exponent ratio near n - 1", ratio,
                        tol["collapse_ratio_tol"])
        out.append(entry)
    rep.results["schatten"] = out


RUNNERS = {
    "green-check": task_green_check,
    "calderon": task_calderon,
    "weyl": task_weyl,
    "count": task_count,
    "gaps": task_gaps,
    "gap-count": task_gap_count,
    "schatten": task_schatten,
}


def run_task(cfg, workers=1):
    """Run the task named in the config and return its Report (not yet written)."""
    rep = Report(cfg)
    RUNNERS[cfg.name](cfg, rep, max(1, int(workers)))
    return rep


def read_manifest(path):
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise InvalidConfig(f"cannot read manifest {path}: {exc}") from None
    entries = [ln.split("#", 1)[0].strip() for ln in lines]
    entries = [e for e in entries if e]
    if not entries:
        raise InvalidConfig(f"manifest {path} lists no configs")
    return [path.parent / e for e in entries]


def run_suite(manifest, out_dir, workers=1):
    """Run every config in the manifest; returns (summary dict, all passed)."""
    paths = read_manifest(manifest)
    configs = [load_config(p) for p in paths]
    rows = []
    for path, cfg in zip(paths, configs):
        name = path.stem
        t0 = time.perf_counter()
        try:
            rep = run_task(cfg, workers)
            status = "pass" if rep.passed else "fail"
            failing = sorted(k for k, v in rep.verdicts.items() if not v["pass"])
            rep.write(Path(out_dir) / name, time.perf_counter() - t0)
            error = ""
        except SpectriplesError as exc:
            status, failing, error = "error", [], f"{type(exc).__name__}: {exc}"
        log.info("%s: %s", name, status)
        rows.append({"config": name, "task": cfg.name, "status": status,
                     "failing_verdicts": failing, "error": error})
    ok = all(r["status"] == "pass" for r in rows)
    summary = {"suite": Path(manifest).name, "tasks": rows, "passed": ok}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(dumps(summary))
    with open(out / "summary.csv", "w") as fh:
        fh.write("config,task,status,failing_verdicts\n")
        for r in rows:
            fh.write(f"{r['config']},{r['task']},{r['status']},{' '.join(r['failing_verdicts'])}\n")
    return summary, ok


def _workers(arg):
    if arg is not None:
        return arg
    env = os.environ.get("SPECTRIPLES_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidConfig(f"SPECTRIPLES_WORKERS must be an integer, got {env!r}") from None
    return 1


def main(argv=None):
    parser = argparse.ArgumentParser(prog="spectriples", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=TASKS + ("suite",))
    parser.add_argument("--config", required=True, help="config file (or manifest for suite)")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        workers = _workers(args.workers)
        if args.command == "suite":
            summary, ok = run_suite(args.config, args.out or "out", workers)
            for r in summary["tasks"]:
                extra = r["error"] or " ".join(r["failing_verdicts"])
                print(f"{r['status'].upper():5s} {r['config']} {extra}".rstrip())
            return 0 if ok else 1
        cfg = load_config(args.config)
        if cfg.name != args.command:
            raise InvalidConfig(f"config task {cfg.name!r} does not match command "
                                f"{args.command!r}")
        t0 = time.perf_counter()
        rep = run_task(cfg, workers)
        out = Path(args.out or cfg.output["dir"])
        if args.out is None and not out.is_absolute():
            out = cfg.base_dir / out
        rep.write(out, time.perf_counter() - t0)
        for name, v in sorted(rep.verdicts.items()):
            print(f"{'PASS' if v['pass'] else 'FAIL'} {name}")
        return 0 if rep.passed else 1
    except SpectriplesError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
