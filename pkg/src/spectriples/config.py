"""Experiment configuration: a sectioned key = value text format.

Sections are [problem], [k], [task], [tolerances] and [output].  Lists are
comma separated; complex numbers are written ``re`` or ``re,im`` and lists
of them are separated by semicolons.  Unknown keys are rejected.
"""

import configparser
import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidConfig, InvalidValue, MissingKey, UnknownKey
from .potentials import Potential
from .problems import BUILDERS
from .realizations import AngularFunction, DenseK, ModeMultiplier, Scalar

TASKS = ("green-check", "calderon", "weyl", "count", "gaps", "gap-count", "schatten")
SECTIONS = ("problem", "k", "task", "tolerances", "output")

# key: (type, default); default None means optional without a value,
# REQUIRED means the key must be present.
REQUIRED = object()

SCHEMA = {
    "problem": {
        "kind": ("str", REQUIRED),
        "N": ("int", REQUIRED),
        "length": ("float", None),
        "r_inner": ("float", None),
        "r_outer": ("float", None),
        "R": ("float", None),
        "K_max": ("int", None),
        "L_max": ("int", None),
        "potential": ("str", "constant"),
        "q_value": ("float", 1.0),
        "q_depth": ("float", None),
        "q_width": ("float", None),
        "q_background": ("float", 1.0),
        "q_start": ("float", 0.0),
        "q_amplitude": ("float", 2.0),
        "q_shift": ("float", 3.0),
        "q_table": ("str", None),
    },
    "k": {
        "type": ("str", "none"),
        "sigma": ("complex", None),
        "multiplier": ("str", "smoothing_growth"),
        "coefficient": ("float", 1.0),
        "power": ("float", 0.25),
        "samples": ("floats", None),
        "cosine": ("floats", None),
        "matrix": ("str", None),
    },
    "task": {
        "name": ("str", REQUIRED),
        "seed": ("int", 0),
        "z": ("complexes", None),
        "ell": ("ints", (1,)),
        "class": ("str", "elliptic"),
        "reference": ("str", "dirichlet"),
        "sigmas": ("floats", None),
        "window": ("floats", None),
        "min_width": ("float", 0.0),
        "gap_indices": ("ints", (0,)),
        "eps_fractions": ("floats", (0.02,)),
        "buffer_points": ("int", 200),
        "stability": ("bool", False),
        "probe": ("str", "compact"),
        "levels": ("ints", None),
        "expected_diagonal": ("floats", None),
        "expected_matrix": ("floats", None),
        "expected_modes": ("ints", None),
        "closed_form": ("str", "none"),
        "check_negative": ("bool", False),
        "herglotz": ("complexes", None),
        "monotone_x": ("floats", None),
        "collapse_check": ("bool", False),
        "rank_check": ("bool", False),
        "compactness": ("bool", False),
        "sector_vertex": ("complex", None),
        "sector_angle": ("float", None),
        "expect_sector": ("bool", True),
        "tail_fraction": ("float", 1.0),
        "drop_head": ("int", None),
        "lambda_root_convention": ("str", "negative_root"),
    },
    "tolerances": {
        "hermitian": ("float", 1e-8),
        "closed_form": ("float", 1e-4),
        "slope_target": ("float", 2.0),
        "slope_tol": ("float", 0.2),
        "green_compact": ("float", 1e-12),
        "green_slope": ("float", None),
        "schatten_margin": ("float", 0.15),
        "rank_rel": ("float", 1e-10),
        "sector_slack": ("float", 1e-6),
        "compact_ratio": ("float", 1e-3),
        "collapse_ratio_tol": ("float", 0.2),
        "gap_stability": ("float", 0.01),
        "psd": ("float", 1e-12),
    },
    "output": {
        "dir": ("str", "out"),
        "matrices": ("bool", True),
    },
}

CHOICES = {
    ("problem", "kind"): tuple(BUILDERS),
    ("problem", "potential"): ("constant", "well", "mathieu", "tabulated"),
    ("k", "type"): ("none", "scalar", "mode_multiplier", "angular", "dense"),
    ("k", "multiplier"): ("smoothing_growth",),
    ("task", "name"): TASKS,
    ("task", "class"): ("general", "dirichlet_bounded", "elliptic"),
    ("task", "reference"): ("dirichlet", "neumann"),
    ("task", "probe"): ("compact", "smooth"),
    ("task", "closed_form"): ("none", "halfline"),
    ("task", "lambda_root_convention"): ("negative_root", "principal"),
}


@dataclass
class ExperimentConfig:
    problem: dict
    k: dict
    task: dict
    tolerances: dict
    output: dict
    base_dir: Path = field(default_factory=Path.cwd, compare=False)

    def section(self, name):
        return getattr(self, name)

    @property
    def name(self):
        return self.task["name"]


# ------------------------------------------------------------------ parsing


def _parse_complex(key, text):
    parts = [p.strip() for p in text.split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise InvalidValue(key, text, "expected 're' or 're,im'")


def _parse_value(key, kind, text):
    text = text.strip()
    try:
        if kind == "str":
            return text
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "bool":
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError
        if kind == "floats":
            return tuple(float(v) for v in text.split(",") if v.strip())
        if kind == "ints":
            return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise InvalidValue(key, text, f"expected {kind}") from None
    if kind == "complex":
        return _parse_complex(key, text)
    if kind == "complexes":
        return tuple(_parse_complex(key, v) for v in text.split(";") if v.strip())
    raise InvalidConfig(f"internal: unknown type {kind}")


def parse_config(text, base_dir=None):
    """Parse and validate a config document; defaults are filled in."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InvalidConfig(f"malformed config: {exc}") from None
    for sec in cp.sections():
        if sec not in SECTIONS:
            raise UnknownKey(sec)
    values = {}
    for sec in SECTIONS:
        schema = SCHEMA[sec]
        given = dict(cp[sec]) if cp.has_section(sec) else {}
        for key in given:
            if key not in schema:
                raise UnknownKey(key, sec)
        out = {}
        for key, (kind, default) in schema.items():
            if key in given:
                out[key] = _parse_value(key, kind, given[key])
            elif default is REQUIRED:
                raise MissingKey(key, sec)
            else:
                out[key] = default
            choices = CHOICES.get((sec, key))
            if choices and out[key] not in choices:
                raise InvalidValue(key, out[key], f"must be one of {', '.join(choices)}")
        values[sec] = out
    cfg = ExperimentConfig(**values, base_dir=Path(base_dir) if base_dir else Path.cwd())
    _validate(cfg)
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent)


def _need(sec, values, *keys):
    for key in keys:
        if values.get(key) is None:
            raise MissingKey(key, sec)


def _validate(cfg):
    p, k, t = cfg.problem, cfg.k, cfg.task
    if p["N"] < 1:
        raise InvalidValue("N", p["N"], "must be positive")
    if p["kind"] == "halfline_m1":
        _need("problem", p, "length")
    if p["kind"] == "annulus_m1":
        _need("problem", p, "K_max")
    if p["kind"] == "ball_exterior_m1":
        _need("problem", p, "L_max")
    if p["potential"] == "well":
        _need("problem", p, "q_depth", "q_width")
    if p["potential"] == "tabulated":
        _need("problem", p, "q_table")
    if k["type"] == "scalar" and t["sigmas"] is None:
        _need("k", k, "sigma")
    if k["type"] == "angular" and k["samples"] is None and k["cosine"] is None:
        raise MissingKey("samples", "k")
    if k["type"] == "dense":
        _need("k", k, "matrix")
    for key in ("window",):
        if t[key] is not None and (len(t[key]) != 2 or not t[key][0] < t[key][1]):
            raise InvalidValue(key, t[key], "expected 'lo, hi' with lo < hi")
    if any(e <= 0 for e in t["ell"]):
        raise InvalidValue("ell", t["ell"], "must be positive integers")
    if t["tail_fraction"] <= 0 or t["tail_fraction"] > 1:
        raise InvalidValue("tail_fraction", t["tail_fraction"], "must lie in (0, 1]")
    if t["name"] == "gap-count":
        _need("task", t, "window")
        if not t["eps_fractions"] or any(not 0 < e < 1 for e in t["eps_fractions"]):
            raise InvalidValue("eps_fractions", t["eps_fractions"], "values must lie in (0, 1)")
    if t["name"] == "gaps":
        _need("task", t, "window")
    if t["name"] in ("calderon", "weyl") and not t["z"] and not t["monotone_x"]:
        raise MissingKey("z", "task")
    if t["name"] == "schatten" and not t["z"]:
        raise MissingKey("z", "task")


# ------------------------------------------------------------ serialization


def format_float(x):
    """Shortest-free, fixed 17-significant-digit rendering."""
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0.0"
    return format(x, ".17g")


def _format_value(kind, value):
    if kind in ("str", "int"):
        return str(value)
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return format_float(value)
    if kind == "floats":
        return ", ".join(format_float(v) for v in value)
    if kind == "ints":
        return ", ".join(str(v) for v in value)
    if kind == "complex":
        return f"{format_float(value.real)},{format_float(value.imag)}"
    if kind == "complexes":
        return "; ".join(f"{format_float(v.real)},{format_float(v.imag)}" for v in value)
    raise InvalidConfig(f"internal: unknown type {kind}")


def serialize_config(cfg, include_output=True):
    lines = []
    for sec in SECTIONS:
        if sec == "output" and not include_output:
            continue
        lines.append(f"[{sec}]")
        for key, (kind, _) in SCHEMA[sec].items():
            value = cfg.section(sec)[key]
            if value is not None:
                lines.append(f"{key} = {_format_value(kind, value)}")
        lines.append("")
    return "\n".join(lines)


def input_hash(cfg):
    return hashlib.sha256(serialize_config(cfg, include_output=False).encode()).hexdigest()


# ------------------------------------------------------------------ builders


def read_matrix_csv(path):
    """Matrix from CSV: header ``rows,cols,complex`` then one entry per line (re or re,im)."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or [c.strip() for c in rows[0]] != ["rows", "cols", "complex"]:
        raise InvalidConfig(f"{path}: first line must be 'rows,cols,complex'")
    try:
        nr, nc, cx = (int(v) for v in rows[1])
        entries = rows[2:]
        if len(entries) != nr * nc:
            raise InvalidConfig(f"{path}: expected {nr * nc} entries, got {len(entries)}")
        if cx:
            vals = [complex(float(a), float(b)) for a, b in entries]
        else:
            vals = [float(a[0]) for a in entries]
    except (ValueError, IndexError):
        raise InvalidConfig(f"{path}: malformed matrix entries") from None
    return np.array(vals).reshape(nr, nc)


def write_matrix_csv(path, M):
    M = np.atleast_2d(np.asarray(M))
    cx = bool(np.iscomplexobj(M) and np.any(M.imag != 0))
    with open(path, "w", newline="") as fh:
        fh.write("rows,cols,complex\n")
        fh.write(f"{M.shape[0]},{M.shape[1]},{int(cx)}\n")
        for v in M.ravel():
            if cx:
                fh.write(f"{format_float(v.real)},{format_float(v.imag)}\n")
            else:
                fh.write(f"{format_float(np.real(v))}\n")


def build_potential(cfg):
    p = cfg.problem
    kind = p["potential"]
    if kind == "constant":
        return Potential.constant(p["q_value"])
    if kind == "well":
        return Potential.well(p["q_depth"], p["q_width"], p["q_background"], p["q_start"])
    if kind == "mathieu":
        return Potential.mathieu(p["q_amplitude"], p["q_shift"])
    table = np.loadtxt(cfg.base_dir / p["q_table"], delimiter=",", ndmin=2)
    return Potential.tabulated(table[:, 0], table[:, 1])


def build_problem(cfg, N=None):
    p = cfg.problem
    kind = p["kind"]
    N = p["N"] if N is None else N
    q = build_potential(cfg)
    args = {}
    if kind in ("interval_m1", "interval_m2", "halfline_m1"):
        if p["length"] is not None:
            args["length"] = p["length"]
    elif kind == "annulus_m1":
        for key in ("r_inner", "r_outer"):
            if p[key] is not None:
                args[key] = p[key]
        args["K_max"] = p["K_max"]
    else:
        if p["r_inner"] is not None:
            args["r_inner"] = p["r_inner"]
        if p["R"] is not None:
            args["R"] = p["R"]
        args["L_max"] = p["L_max"]
    return BUILDERS[kind](N=N, potential=q, **args)


def build_k(cfg, sigma=None):
    k = cfg.k
    if sigma is not None:
        return Scalar(sigma)
    kind = k["type"]
    if kind == "none":
        return None
    if kind == "scalar":
        s = k["sigma"]
        return Scalar(s.real if s.imag == 0 else s)
    if kind == "mode_multiplier":
        return ModeMultiplier.smoothing_growth(k["coefficient"], k["power"])
    if kind == "angular":
        if k["samples"] is not None:
            return AngularFunction(np.array(k["samples"]))
        coeffs = np.array(k["cosine"])
        return AngularFunction(lambda th: sum(c * np.cos(j * th) for j, c in enumerate(coeffs)))
    return DenseK(read_matrix_csv(cfg.base_dir / k["matrix"]))
