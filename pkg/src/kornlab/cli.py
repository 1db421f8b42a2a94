"""Command line front end.

Subcommands: identities, symbol, korn, counterexample, kernel.  Reports go
to stdout (or --out) as JSON with schema_version "kornlab/1", or as CSV
with --format csv.  Every float is serialized with 17 significant digits
and the emitted bytes are a pure function of (command, config, seed):
wall-clock timings are printed to stderr only, and the thread cap from
KORNLAB_THREADS influences scheduling but never the report.  Exit status:
0 clean, 1 when a named invariant failed (see the "errors" array), 2 for
usage problems.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import identities, kernels, korn_estimator, symbol
from .algebra3 import anti, dev, mat_norm, sym
from .fields import BoxDomain, UnderResolvedError, growth_ratio, halfspace_ratio

SCHEMA_VERSION = "kornlab/1"

DEFAULTS = {
    "seed": 1,
    "samples": 1000,
    "kmax": 4,
    "grid_n": 16,
    "p": 2.0,
    "box": (-1.0, -1.0, -1.0, 1.0, 1.0, 1.0),
    "format": "json",
    "out": None,
}

_CONFIG_KEYS = set(DEFAULTS)


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------------
# deterministic serialization


def _fmt_float(x):
    x = float(x)
    if not np.isfinite(x):
        raise ValueError("refusing to serialize a non-finite float")
    return format(x, ".17g")


def to_json(obj):
    """Deterministic JSON: insertion-ordered keys, floats at 17 significant digits."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(to_json(str(k)) + ":" + to_json(v) for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    raise TypeError("cannot serialize %r" % type(obj))


def to_csv(command, results):
    """Flat CSV rendering; the korn table gets the k1,k2,k3,lambda_min layout."""
    lines = []
    if command == "korn":
        lines.append("k1,k2,k3,lambda_min")
        for k1, k2, k3, lam in results["entries"]:
            lines.append("%d,%d,%d,%s" % (int(k1), int(k2), int(k3), _fmt_float(lam)))
    elif command == "identities":
        lines.append("name,samples,max_residual,tolerance,passed")
        for row in results["suite"]:
            lines.append("%s,%d,%s,%s,%s" % (row["name"], row["samples"],
                                             _fmt_float(row["max_residual"]),
                                             _fmt_float(row["tolerance"]),
                                             "true" if row["passed"] else "false"))
    elif command == "counterexample":
        lines.append("family,k,ratio")
        for k, r in results["growth"]:
            lines.append("growth,%d,%s" % (int(k), _fmt_float(r)))
        for k, r in results["halfspace"]:
            lines.append("halfspace,%d,%s" % (int(k), _fmt_float(r)))
    else:
        lines.append("key,value")
        def walk(prefix, value):
            if isinstance(value, dict):
                for k, v in value.items():
                    walk(prefix + "." + k if prefix else k, v)
            elif isinstance(value, (list, tuple)):
                for i, v in enumerate(value):
                    walk("%s[%d]" % (prefix, i), v)
            elif isinstance(value, (float, np.floating)):
                lines.append("%s,%s" % (prefix, _fmt_float(value)))
            else:
                lines.append("%s,%s" % (prefix, value))
        walk("", results)
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# configuration


def _parse_box(text):
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 6:
        raise UsageError("--box wants x0,y0,z0,x1,y1,z1 (six numbers)")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise UsageError("--box: %s" % exc) from None
    return vals


def load_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError("config file %s: %s" % (path, exc)) from None
    if not isinstance(data, dict):
        raise UsageError("config file %s: expected a JSON object" % path)
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise UsageError("config file %s: unknown keys %s" % (path, ", ".join(unknown)))
    if "box" in data:
        box = data["box"]
        if isinstance(box, str):
            data["box"] = _parse_box(box)
        elif isinstance(box, (list, tuple)) and len(box) == 6:
            data["box"] = tuple(float(v) for v in box)
        else:
            raise UsageError("config file %s: box wants six numbers" % path)
    return data


def resolve_config(args):
    """defaults < config file < explicit flags, unknown keys rejected."""
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(load_config_file(args.config))
    for key in ("seed", "samples", "kmax", "grid_n", "p", "format", "out"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    if args.box is not None:
        cfg["box"] = _parse_box(args.box)
    cfg["seed"] = int(cfg["seed"])
    cfg["samples"] = int(cfg["samples"])
    cfg["kmax"] = int(cfg["kmax"])
    cfg["grid_n"] = int(cfg["grid_n"])
    cfg["p"] = float(cfg["p"])
    if cfg["samples"] < 1 or cfg["kmax"] < 1 or cfg["grid_n"] < 4:
        raise UsageError("samples and kmax must be >= 1, grid-n >= 4")
    if cfg["format"] not in ("json", "csv"):
        raise UsageError("format must be json or csv")
    return cfg


def thread_cap():
    raw = os.environ.get("KORNLAB_THREADS")
    if raw is None:
        return None
    try:
        val = int(raw)
        if val < 1:
            raise ValueError
    except ValueError:
        raise UsageError("KORNLAB_THREADS must be a positive integer, got %r" % raw) from None
    return val


# ----------------------------------------------------------------------------
# subcommands;  each returns (results, errors)


def run_identities(cfg):
    errors = []
    suite = identities.run_all(samples=cfg["samples"], seed=cfg["seed"], n=cfg["grid_n"])
    rows = []
    for res in suite:
        rows.append({"name": res.name, "samples": res.samples,
                     "max_residual": res.max_residual, "tolerance": res.tolerance,
                     "passed": res.passed})
        if not res.passed:
            errors.append("identity %s exceeded tolerance (%.3e >= %.3e)"
                          % (res.name, res.max_residual, res.tolerance))
    return {"suite": rows, "tolerances": identities.tolerance_table()}, errors


def run_symbol(cfg):
    errors = []
    rng = np.random.default_rng(cfg["seed"])
    dims = []
    gaps = []
    for _ in range(100):
        xi = rng.standard_normal(3)
        xi /= np.linalg.norm(xi)
        basis = symbol.kernel_basis(symbol.curl_symbol(xi, "devsym"))
        dims.append(basis.dimension)
        sv = basis.singular_values
        gaps.append(float(sv[4] / max(sv[5], 1e-300)))
    if any(d != 4 for d in dims):
        errors.append("kernel dimension of the devsym curl symbol left 4")
    mult_resid = 0.0
    homo_resid = 0.0
    for _ in range(100):
        xi = rng.standard_normal(3)
        xi /= np.linalg.norm(xi)
        m = symbol.build_multiplier(xi)
        a = symbol.curl_symbol(xi, "devsym")
        a_sym = symbol.curl_symbol(xi, "sym")
        mult_resid = max(mult_resid, float(np.linalg.norm(m @ a - a_sym)))
        homo_resid = max(homo_resid, float(np.linalg.norm(symbol.build_multiplier(2.0 * xi) - m)))
    if mult_resid > 1e-10:
        errors.append("multiplier identity M(xi) A(xi) = A_sym(xi) violated")
    if homo_resid > 1e-10:
        errors.append("multiplier homogeneity violated")
    w = symbol.complex_kernel_witness()
    c = w.p_hat @ anti(w.xi)
    witness_dev = float(mat_norm(dev(sym(c))))
    witness_sym = float(mat_norm(sym(c) - 1j * np.eye(3)))
    try:
        equiv = korn_estimator.equivalence_constant(samples=cfg["samples"], seed=cfg["seed"])
    except RuntimeError as exc:
        errors.append(str(exc))
        equiv = float("nan")
    results = {
        "kernel_dimension_min": min(dims), "kernel_dimension_max": max(dims),
        "kernel_gap_min": min(gaps),
        "multiplier_residual_max": mult_resid,
        "multiplier_homogeneity_max": homo_resid,
        "sharp_ratio_e3": symbol.sharp_ratio([0.0, 0.0, 1.0]),
        "equivalence_constant": equiv,
        "witness_devsym_residual": witness_dev,
        "witness_sym_residual": witness_sym,
    }
    return results, errors


def run_korn(cfg):
    errors = []
    report = korn_estimator.korn_constant(cfg["kmax"])
    lam = report.entries[:, 3]
    if np.any(lam <= 0.0) or np.any(lam > 1.0 + 1e-12):
        errors.append("per-frequency minimum left the interval (0, 1]")
    if report.non_monotone_tail:
        errors.append("outermost frequency shell attains the minimum "
                      "(scan radius too small)")
    results = {
        "kmax": report.kmax,
        "lambda_min": report.lambda_global,
        "c_estimate": report.c_estimate,
        "tail_min": report.tail_min,
        "non_monotone_tail": report.non_monotone_tail,
        "convention": report.convention,
        "entries": [[int(k1), int(k2), int(k3), float(l)]
                    for k1, k2, k3, l in report.entries],
    }
    return results, errors


def run_counterexample(cfg):
    errors = []
    box = BoxDomain(lo=cfg["box"][:3], hi=cfg["box"][3:])
    growth = []
    for k in range(1, cfg["kmax"] + 1):
        try:
            growth.append([k, growth_ratio(k, cfg["p"], box)])
        except UnderResolvedError as exc:
            errors.append("growth ratio k=%d: %s" % (k, exc))
            break
    halfspace = []
    k = 2
    while k <= min(cfg["kmax"], 32):
        try:
            halfspace.append([k, halfspace_ratio(k, cfg["p"])])
        except UnderResolvedError as exc:
            errors.append("halfspace ratio k=%d: %s" % (k, exc))
            break
        k *= 2
    ratios = [r for _, r in growth]
    monotone_from = 1
    for i in range(1, len(ratios)):
        if ratios[i] <= ratios[i - 1]:
            monotone_from = i + 2
    results = {"p": cfg["p"], "box": list(cfg["box"]),
               "growth": growth, "halfspace": halfspace,
               "monotone_from": monotone_from}
    return results, errors


def run_kernel(cfg):
    errors = []
    rng = np.random.default_rng(cfg["seed"])
    sphere_ranks = []
    for _ in range(20):
        pts = rng.standard_normal((12, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        sphere_ranks.append(kernels.boundary_rank(pts))
    if any(r != 10 for r in sphere_ranks):
        errors.append("random spherical 12-point cloud is not rigid (rank != 10)")
    th = np.linspace(0.0, 2.0 * np.pi, 13)[:-1]
    circle = np.stack([np.cos(th), 1.0 + np.sin(th), np.zeros_like(th)], axis=1)
    circle_rank = kernels.boundary_rank(circle)
    line = np.array([[t, 0.5 * t, -0.25 * t] for t in np.linspace(-2, 2, 5)])
    line_rank = kernels.boundary_rank(line)
    if circle_rank >= 10 or line_rank >= 10:
        errors.append("degenerate configuration (circle/line) reported as rigid")
    element = kernels.KernelElement(a_tilde=rng.standard_normal(3),
                                    beta=float(rng.standard_normal()),
                                    b=rng.standard_normal(3),
                                    d=rng.standard_normal(3))
    pts = rng.standard_normal((14, 3))
    mats = np.stack([kernels.eval_kernel(element, x) for x in pts])
    fit = kernels.project_kernel(pts, mats, "devsym")
    recovery = float(max(
        np.max(np.abs(fit.element.a_tilde - element.a_tilde)),
        abs(fit.element.beta - element.beta),
        np.max(np.abs(fit.element.b - element.b)),
        np.max(np.abs(fit.element.d - element.d))))
    if recovery > 1e-8 or fit.residual > 1e-8:
        errors.append("exact kernel sample was not recovered by projection")
    results = {"sphere_ranks": sphere_ranks, "circle_rank": circle_rank,
               "line_rank": line_rank, "recovery_error": recovery,
               "projection_residual": fit.residual,
               "projection_cond": fit.cond}
    return results, errors


COMMANDS = {
    "identities": run_identities,
    "symbol": run_symbol,
    "korn": run_korn,
    "counterexample": run_counterexample,
    "kernel": run_kernel,
}


# ----------------------------------------------------------------------------
# driver


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kornlab",
        description="numerical laboratory for matrix curl seminorms and Korn constants")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--samples", type=int, default=None)
    parser.add_argument("--kmax", type=int, default=None)
    parser.add_argument("--grid-n", dest="grid_n", type=int, default=None)
    parser.add_argument("--p", type=float, default=None)
    parser.add_argument("--box", type=str, default=None,
                        help="x0,y0,z0,x1,y1,z1")
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--format", choices=("json", "csv"), default=None)
    parser.add_argument("--config", type=str, default=None,
                        help="JSON file with default overrides")
    return parser


def _config_echo(cfg):
    return {
        "seed": cfg["seed"], "samples": cfg["samples"], "kmax": cfg["kmax"],
        "grid_n": cfg["grid_n"], "p": cfg["p"], "box": list(cfg["box"]),
        "format": cfg["format"],
    }


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        cap = thread_cap()
    except UsageError as exc:
        print("kornlab: %s" % exc, file=sys.stderr)
        return 2

    started = time.perf_counter()
    limiter = None
    if cap is not None:
        try:
            from threadpoolctl import threadpool_limits
            limiter = threadpool_limits(limits=cap)
        except ImportError:
            pass
    try:
        results, errors = COMMANDS[args.command](cfg)
    finally:
        if limiter is not None:
            limiter.unregister()
    elapsed_ms = 1000.0 * (time.perf_counter() - started)

    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "config": _config_echo(cfg),
        "results": results,
        "errors": errors,
        # wall-clock times change run to run; they go to stderr so that the
        # emitted report stays byte-identical for equal config and seed
        "timings_ms": {},
    }
    if cfg["format"] == "json":
        text = to_json(report) + "\n"
    else:
        text = to_csv(args.command, results)
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print("kornlab: %s finished in %.1f ms" % (args.command, elapsed_ms), file=sys.stderr)
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
