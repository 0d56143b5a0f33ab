"""Command-line driver: ``superosc-rsp run --config cfg.json --out table.csv``.

Each run reads one JSON document, evaluates a named experiment and writes a
CSV table (17 significant digits) plus a JSON sidecar ``<out>.json`` with the
config echo, versions, wall time and a summary of scalar results.
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, SPEC_VERSION, qft, spinarray, superosc, transforms
from ._accel import backend_name

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
EXPERIMENTS = ("window", "report", "rsp1d", "shell3d", "appendix", "sweep", "noise")
MAX_SWEEP_POINTS = 10 ** 6

SCHEMA = {
    "experiment": str,
    "superosc": {"delta": float, "A": float, "t0": float, "amplitude": float, "phase_branch": (str, type(None))},
    "field": {"mass": float, "gap": float, "dim": int, "coupling": float},
    "target": {"L": float, "l": int, "a0": float, "R": float, "centre": float, "width": float,
               "a": float, "n_max": int, "N": list, "factors": list, "kind": str},
    "omega_c": float,
    "n_terms": int,
    "grid": {"n": int, "probe_min": float, "probe_max": float, "probe_n": int},
    "tolerances": {"phase": float},
    "sweep": {"base": str, "axes": list},
    "seed": int,
}
AXIS_KEYS = {"name", "min", "max", "count", "values"}
SWEEP_AXES = {"success": ("L", "omega_c", "t0", "A", "delta"), "noise": ("factor",)}


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    def __init__(self, operation, exc):
        super().__init__(f"{operation}: {type(exc).__name__}: {exc}")
        self.operation = operation


# --------------------------------------------------------------------------
# config
# --------------------------------------------------------------------------

def _check(node, schema, path):
    if not isinstance(node, dict):
        raise ConfigError(f"{path or 'config'} must be an object")
    for key, val in node.items():
        where = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"unknown key {where!r}")
        want = schema[key]
        if isinstance(want, dict):
            _check(val, want, where)
        elif want is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
                raise ConfigError(f"{where} must be a finite number")
        elif want is int:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{where} must be an integer")
        elif not isinstance(val, want):
            raise ConfigError(f"{where} has the wrong type")


def _axis_values(axis):
    if "values" in axis:
        vals = [float(v) for v in axis["values"]]
    else:
        count = int(axis.get("count", 1))
        lo = float(axis["min"])
        hi = float(axis.get("max", lo))
        if count < 1:
            raise ConfigError("sweep axis count must be at least 1")
        vals = [lo] if count == 1 else list(np.linspace(lo, hi, count))
    if not vals:
        raise ConfigError("sweep axis has no values")
    return vals


def validate(cfg):
    """Check a config document; returns the parsed objects or raises ConfigError."""
    _check(cfg, SCHEMA, "")
    exp = cfg.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
    out = {"experiment": exp}
    try:
        if "superosc" in cfg:
            out["params"] = superosc.SuperoscParams(**cfg["superosc"])
        out["field"] = qft.FieldConfig(**cfg.get("field", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    need = {"window": ("superosc",), "report": ("superosc", "omega_c"), "rsp1d": ("omega_c",),
            "shell3d": ("omega_c",), "noise": ("omega_c",), "sweep": ("sweep",)}
    for key in need.get(exp, ()):
        if key not in cfg:
            raise ConfigError(f"experiment {exp!r} needs {key!r}")
    if "omega_c" in cfg and not cfg["omega_c"] > 0:
        raise ConfigError("omega_c must be positive")
    if not cfg.get("tolerances", {}).get("phase", 0.01) > 0:
        raise ConfigError("tolerances.phase must be positive")
    if cfg.get("n_terms", 1) < 1:
        raise ConfigError("n_terms must be positive")
    tgt = cfg.get("target", {})
    for key in ("L", "a0", "R", "width", "a"):
        if key in tgt and not tgt[key] > 0:
            raise ConfigError(f"target.{key} must be positive")
    if "kind" in tgt and tgt["kind"] not in ("block",) + superosc.VARIANT_KINDS:
        raise ConfigError(f"unknown window kind {tgt['kind']!r}")
    if exp == "window" and tgt.get("kind", "block") != "block" and "omega_c" not in cfg:
        raise ConfigError("variant windows need omega_c")
    if exp == "sweep":
        sw = cfg["sweep"]
        base = sw.get("base", "success")
        if base not in SWEEP_AXES:
            raise ConfigError(f"sweep.base must be one of {tuple(SWEEP_AXES)}")
        axes = sw.get("axes", [])
        if not axes:
            raise ConfigError("sweep needs at least one axis")
        total = 1
        parsed = []
        for axis in axes:
            if not isinstance(axis, dict) or set(axis) - AXIS_KEYS or "name" not in axis:
                raise ConfigError(f"bad sweep axis {axis!r}")
            if axis["name"] not in SWEEP_AXES[base]:
                raise ConfigError(f"axis {axis['name']!r} not sweepable for base {base!r}")
            if "values" not in axis and "min" not in axis:
                raise ConfigError("sweep axis needs values or min/max/count")
            vals = _axis_values(axis)
            parsed.append((axis["name"], vals))
            total *= len(vals)
        if total > MAX_SWEEP_POINTS:
            raise ConfigError(f"sweep has {total} points (limit {MAX_SWEEP_POINTS})")
        if base == "success" and "params" not in out:
            out["params"] = superosc.SuperoscParams(0.1, 2.0)
        if base == "noise" and "omega_c" not in cfg:
            raise ConfigError("noise sweeps need omega_c")
        out["axes"] = parsed
        out["base"] = base
    return out


# --------------------------------------------------------------------------
# experiments; each returns (columns, rows, summary)
# --------------------------------------------------------------------------

def _phase_tol(cfg):
    return float(cfg.get("tolerances", {}).get("phase", 0.01))


def _grid_n(cfg, default):
    return int(cfg.get("grid", {}).get("n", default))


def exp_window(cfg, parsed, threads):
    p = parsed["params"]
    kind = cfg.get("target", {}).get("kind", "block")
    n = _grid_n(cfg, 1024)
    if kind == "block":
        win = superosc.BlockWindow(p)
        hi = cfg.get("omega_c", p.omega_c_bound())
        pad = 2.0 * abs(p.growth_onset)
        w = np.linspace(-pad, 10.0 * hi, n)
    else:
        sf = superosc.make_variant(p, kind, cfg["omega_c"], n)
        win = sf.window
        w = sf.samples.grid
    vals, scale = win.spectrum_scaled(w)
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(vals)) + scale
    phase = np.angle(vals)
    rows = [(a, b, c) for a, b, c in zip(w, log_abs, phase)]
    return ["omega_prime", "log_abs_spectrum", "phase"], rows, {"log_peak": win.log_peak()}


def exp_report(cfg, parsed, threads):
    p = parsed["params"]
    rep = superosc.superoscillation_report(superosc.BlockWindow(p), cfg["omega_c"], _grid_n(cfg, 4096))
    rows = list(zip(rep.curve_omega, rep.curve_log_abs, rep.curve_rate))
    summary = {"growth_onset": rep.growth_onset, "growth_onset_estimate": rep.growth_onset_estimate,
               "max_local_frequency": rep.max_local_frequency, "band_limit": rep.band_limit,
               "superoscillatory": rep.superoscillatory, "tail_exponent": rep.tail_exponent,
               "tail_range": list(rep.tail_range)}
    return ["omega_prime", "log_abs_spectrum", "local_frequency"], rows, summary


def exp_rsp1d(cfg, parsed, threads):
    fc = parsed["field"]
    L = cfg.get("target", {}).get("L", 2.0)
    wc = cfg["omega_c"]
    g = cfg.get("grid", {})
    probes = np.linspace(g.get("probe_min", 0.5), g.get("probe_max", 6.0), g.get("probe_n", 111))
    res = qft.synthesize_mirror_pair(L, fc, wc, cfg.get("n_terms", 256), phase_tol=_phase_tol(cfg))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", qft.TailTruncationWarning)
        amp = qft.amplitude_up(probes, res.window, fc, omega_c=wc)
    dist = np.abs(probes - L)
    target = np.full(probes.shape, np.nan)
    ok = dist > 0
    target[ok] = qft.propagator(dist[ok], fc) + qft.propagator(probes[ok] + L, fc)
    fid = qft.fidelity(qft.generated_state(res.window, fc, wc), qft.mirror_pair_state(L, fc, wc))
    ncc = float(abs(np.vdot(amp[ok], target[ok])) / (np.linalg.norm(amp[ok]) * np.linalg.norm(target[ok])))
    rows = [(x, abs(a), t, fid) for x, a, t in zip(probes, amp, target)]
    summary = {"ncc": ncc, "fidelity": fid, "spectral_deviation": res.deviation, "delta": res.delta,
               "A_max": res.A_max}
    return ["L_probe", "abs_amplitude", "abs_propagator_pair", "fidelity"], rows, summary


def exp_shell3d(cfg, parsed, threads):
    fc = parsed["field"]
    if fc.dim != 3:
        fc = qft.FieldConfig(fc.mass, fc.gap, 3, fc.coupling)
    tgt = cfg.get("target", {})
    l, a0, R = tgt.get("l", 0), tgt.get("a0", 0.5), tgt.get("R", 2.0)
    t0 = cfg.get("superosc", {}).get("t0", 1.0)
    st = spinarray.ylm_shell_condition(l, a0, R, fc, cfg["omega_c"], t0=t0)
    band = st.band(_grid_n(cfg, 257))
    k = fc.k_of(band.grid)
    rows = list(zip(band.grid, k, band.values.real))
    return ["omega_prime", "k", "spectral_ratio"], rows, {"l": l, "a0": a0, "R": R}


def exp_appendix(cfg, parsed, threads):
    tgt = cfg.get("target", {})
    a = tgt.get("a", 1.0)
    centre = tgt.get("centre", 3.0 * a)
    width = tgt.get("width", 0.5 * a)
    F = spinarray.TargetProfile(lambda x: np.exp(-0.5 * ((x - centre) / width) ** 2),
                                (centre - 12 * width, centre + 12 * width), "gaussian")
    w = spinarray.reflection_series_weights(F, a, tgt.get("n_max", 8))
    resid = spinarray.defect_residual(w, F, a)
    sups = {}
    for N in tgt.get("N", [2, 4, 8, 16, 32]):
        sups[str(N)] = spinarray.compensation_spins(resid, int(N), a).sup_after
    x = np.linspace(-(abs(centre) + 6 * width), abs(centre) + 6 * width, _grid_n(cfg, 1201))
    field = w.array.field(x)
    rows = list(zip(x, F(x), field, field - F(x)))
    outside = np.abs(x) > a
    summary = {"sup_error_outside": float(np.max(np.abs(field - F(x))[outside])),
               "truncation_bound": w.truncation_bound, "compensated_sup": sups}
    return ["x", "target", "two_spin_field", "mismatch"], rows, summary


def exp_noise(cfg, parsed, threads, factors=None):
    fc = parsed["field"]
    tgt = cfg.get("target", {})
    L = tgt.get("L", 1.5)
    wc = cfg["omega_c"]
    if factors is None:
        factors = tgt.get("factors", [0.0, 0.1, 0.3, 1.0, 3.0, 10.0])
    res = qft.synthesize_mirror_pair(L, fc, wc, cfg.get("n_terms", 256), phase_tol=_phase_tol(cfg))
    th, rows = qft.noise_sweep(res.window, L, fc, wc, factors, seed=cfg.get("seed", 0))
    summary = {"nu_c": th.nu_c, "log_nu_c_relative": th.log_nu_c_relative,
               "log_nu_c_estimate": th.log_nu_c_estimate}
    return (["factor", "amplitude", "fidelity", "leakage", "fidelity_sample", "leakage_sample"],
            [(r.factor, r.amplitude, r.fidelity, r.leakage, r.fidelity_sample, r.leakage_sample)
             for r in rows], summary)


def _success_point(base_params, point):
    vals = dict(point)
    p = base_params
    try:
        changes = {k: vals[k] for k in ("t0", "A", "delta") if k in vals}
        if changes:
            p = superosc.SuperoscParams(**{**p.__dict__, **changes})
        est = qft.success_probability_estimate(p, vals["L"], vals["omega_c"])
        return (est.log_delta, est.log_P, est.log_delta_block, est.log_delta_domain, "ok")
    except (ValueError, OverflowError, ArithmeticError) as exc:
        return (math.nan, math.nan, math.nan, math.nan, f"error:{type(exc).__name__}")


def exp_sweep(cfg, parsed, threads):
    names = [n for n, _ in parsed["axes"]]
    grids = [v for _, v in parsed["axes"]]
    if parsed["base"] == "noise":
        cols, rows, summary = exp_noise(cfg, parsed, threads, factors=grids[0])
        return cols + ["status"], [r + ("ok",) for r in rows], summary
    defaults = {"L": cfg.get("target", {}).get("L", 2.0), "omega_c": cfg.get("omega_c", 10.0)}
    # index tuples in lexicographic order fix the row order whatever the schedule
    index = list(itertools.product(*[range(len(g)) for g in grids]))
    points = [{**defaults, **{n: grids[a][i] for a, (n, i) in enumerate(zip(names, idx))}} for idx in index]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda pt: _success_point(parsed["params"], pt), points))
    rows = [tuple(pt[n] for n in names) + res for pt, res in zip(points, results)]
    cols = names + ["log_delta", "log_P", "log_delta_block", "log_delta_domain", "status"]
    return cols, rows, {"points": len(rows)}


RUNNERS = {"window": exp_window, "report": exp_report, "rsp1d": exp_rsp1d, "shell3d": exp_shell3d,
           "appendix": exp_appendix, "sweep": exp_sweep, "noise": exp_noise}


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (complex, np.complexfloating)):
        raise TypeError("complex values must be split into columns")
    return format(float(v), ".17g")


def write_csv(path, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("ragged result table")
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def resolve_threads(arg):
    if arg is not None:
        return max(1, int(arg))
    env = os.environ.get("SUPEROSC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SUPEROSC_THREADS={env!r} is not an integer") from None
    return os.cpu_count() or 1


def _error(kind, message, **extra):
    print(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True), file=sys.stderr)


def run(config, out_path, threads=None, seed=None):
    """Validate and execute one config; returns the exit code."""
    try:
        if seed is not None:
            config = {**config, "seed": int(seed)}
        parsed = validate(config)
        n_threads = resolve_threads(threads)
    except ConfigError as exc:
        _error("config", str(exc))
        return EXIT_CONFIG
    start = time.perf_counter()
    exp = parsed["experiment"]
    try:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            columns, rows, summary = RUNNERS[exp](config, parsed, n_threads)
    except (ArithmeticError, ValueError, transforms.QuadratureError, RuntimeError) as exc:
        _error("numerical", str(exc), operation=exp, exception=type(exc).__name__)
        return EXIT_NUMERIC
    write_csv(out_path, columns, rows)
    meta = {"config": config, "version": __version__, "spec_version": SPEC_VERSION,
            "backend": backend_name(), "wall_time_s": time.perf_counter() - start,
            "columns": columns, "rows": len(rows), "summary": summary}
    with open(out_path + ".json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable(meta), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="superosc-rsp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"superosc-rsp {__version__} (spec {SPEC_VERSION})")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="CSV output path (required unless --validate)")
    r.add_argument("--threads", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--validate", action="store_true", help="check the config and exit")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _error("config", f"cannot read config: {exc}")
        return EXIT_CONFIG
    if args.validate:
        try:
            validate(config)
        except ConfigError as exc:
            _error("config", str(exc))
            return EXIT_CONFIG
        print("config ok")
        return EXIT_OK
    if not args.out:
        _error("config", "--out is required")
        return EXIT_CONFIG
    return run(config, args.out, args.threads, args.seed)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
