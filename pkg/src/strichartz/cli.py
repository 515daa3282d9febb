"""Command-line entry point: strichartz <command> [--config FILE] [flags].

Config files are JSON with a "schema" field.  Each command reads its own block
(verify_constants, measure_conv, maximize, feq_check, orbit, quotient); flags
override file values, and file values override the defaults below.

Exit codes: 0 all checks pass, 1 a numeric check failed, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .closed_forms import (
    ConeExpParams, ExpQuadraticParams, cone_maximizer_params, gaussian_params,
    sample_cone_maximizer, sample_gaussian_maximizer, sharp_constant, wave_quotient_closed_form,
)
from .errors import RegionError, StrichartzError
from .grid import PHYSICAL, ComplexField, Grid
from .propagators import (
    CASES, SCHRODINGER, EvolutionSpec, strichartz_quotient_schrodinger, strichartz_quotient_wave,
)

SCHEMA = "strichartz/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

MEASURE_CASES = {
    "parab2_pair": ("paraboloid", 2, "unit", 2),
    "parab1_triple": ("paraboloid", 1, "unit", 3),
    "cone3_pair": ("cone_plus", 3, "inverse_norm", 2),
    "cone2_pair": ("cone_plus", 2, "inverse_norm", 2),
    "cone2_triple": ("cone_plus", 2, "inverse_norm", 3),
}

DEFAULTS = {
    "schema": SCHEMA,
    "workers": 1,
    "verify_constants": {
        "cases": {
            "schr1": {"method": "fft", "points": 2048, "extent": 20.0, "n_times": 512,
                      "half_width": 6.0, "tolerance": 5e-3, "boundary_threshold": 1e-4},
            "schr2": {"method": "fft", "points": 256, "extent": 16.0, "n_times": 128,
                      "half_width": 2.0, "tolerance": 5e-3, "boundary_threshold": 1e-6},
            "wave2": {"method": "closed_form", "tolerance": 1e-4},
            "wave3": {"method": "closed_form", "tolerance": 1e-5},
        },
    },
    "measure_conv": {
        "tolerance": 2e-2,
        "sweep": False,
        "sweep_points": 20,
        "seed": 0,
        "points": {
            "parab2_pair": [[1.0, [0.0, 0.0]], [2.0, [1.0, -0.5]]],
            "parab1_triple": [[1.0, [0.0]], [2.0, [0.7]]],
            "cone3_pair": [[2.0, [0.0, 0.0, 0.0]], [3.0, [0.5, 1.0, -0.5]]],
            "cone2_pair": [[2.0, [0.0, 0.0]], [3.0, [1.0, 0.5]], [2.0, [0.0, 1.2]]],
            "cone2_triple": [[2.0, [0.0, 0.0]], [3.0, [0.8, -0.4]]],
        },
    },
    "maximize": {
        "cases": ["schr1"],
        "seeds": [0, 1, 2],
        "max_iters": 500,
        "tolerance": 5e-3,
        "fit_tolerance": 1e-3,
        "out_dir": "maximize_out",
    },
    "feq_check": {
        "seed": 0,
        "samples": 10000,
        "tuples": 1000,
        "tolerance": 1e-10,
        "non_member_threshold": 1e-3,
        "conservation_tolerance": 1e-12,
        "jacobian_floor": 1e-8,
    },
    "orbit": {
        "group": "G",
        "p": {"A": -1.0, "b": [0.0], "C": 0.0, "space": PHYSICAL},
        "q": {"A": -2.89, "b": [[0.0, 1.7]], "C": 0.5, "space": PHYSICAL},
        "tolerance": 1e-8,
    },
    "quotient": {
        "case": "schr1",
        "data": "maximizer",
        "seed": 0,
        "method": "fft",
        "grids": {
            "schr1": {"points": 2048, "extent": 20.0, "n_times": 512, "half_width": 6.0,
                      "boundary_threshold": 1e-4},
            "schr2": {"points": 256, "extent": 16.0, "n_times": 128, "half_width": 2.0,
                      "boundary_threshold": 1e-6},
            "wave2": {"points": 256, "extent": 18.0, "n_times": 64, "half_width": 4.0,
                      "boundary_threshold": 1e-3},
            "wave3": {"points": 96, "extent": 6.85, "n_times": 80, "half_width": 4.0,
                      "boundary_threshold": 1e-3},
        },
    },
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- output helpers

def _plain(x):
    """JSON-ready copy: numpy scalars and arrays become Python values,
    complex numbers become [re, im]."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _emit(report: dict, out: str | None):
    text = dumps(report)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def write_trace_csv(path: Path, rows: list, header: list):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(r[h])) if isinstance(r[h], float) else r[h] for h in header])


# ---------------------------------------------------------------- config

def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | None) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if path is None:
        return cfg
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    if raw.get("schema", SCHEMA) != SCHEMA:
        raise UsageError(f"unsupported config schema {raw.get('schema')!r}, expected {SCHEMA!r}")
    # case tables are replaced wholesale when given, so a file can run fewer cases
    cfg = _merge(cfg, {k: v for k, v in raw.items() if k != "verify_constants"})
    if "verify_constants" in raw:
        vc = raw["verify_constants"]
        cases = vc.get("cases")
        base = DEFAULTS["verify_constants"]["cases"]
        if cases is not None:
            cfg["verify_constants"]["cases"] = {
                k: _merge(base.get(k, {}), v) for k, v in cases.items()}
    return cfg


def workers(cfg: dict) -> int:
    env = os.environ.get("STRICHARTZ_THREADS")
    n = env if env is not None else cfg.get("workers", 1)
    try:
        n = int(n)
    except (TypeError, ValueError):
        raise UsageError(f"worker count must be an integer, got {n!r}") from None
    if n < 1:
        raise UsageError("worker count must be at least 1")
    return n


def _pool_map(fn, items: list, n: int) -> list:
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(n, len(items))) as ex:
        return list(ex.map(fn, items))


def _positive(name, v, integer=False):
    if integer:
        if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
            raise UsageError(f"{name} must be a positive integer, got {v!r}")
    elif not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
        raise UsageError(f"{name} must be positive, got {v!r}")
    return v


def _tolerance(name, v):
    if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0 or not math.isfinite(v):
        raise UsageError(f"{name} must be a finite nonnegative number, got {v!r}")
    return float(v)


def _check_case(case: str, allowed):
    if case not in allowed:
        raise UsageError(f"unknown case {case!r}; choose from {', '.join(sorted(allowed))}")
    return case


def _grid_block(case, blk) -> tuple:
    n = _positive(f"{case}.points", blk["points"], integer=True)
    if n % 2:
        raise UsageError(f"{case}.points must be even, got {n}")
    L = _positive(f"{case}.extent", blk["extent"])
    nt = _positive(f"{case}.n_times", blk["n_times"], integer=True)
    T = _positive(f"{case}.half_width", blk["half_width"])
    eq, dim = CASES[case]
    return Grid.cube(dim, n, float(L)), EvolutionSpec(eq, dim, nt, float(T), blk.get("tail_correction", True))


# ---------------------------------------------------------------- verify-constants

def _maximizer_quotient(case: str, blk: dict):
    eq, dim = CASES[case]
    if blk["method"] == "closed_form":
        if eq == SCHRODINGER:
            raise UsageError(f"{case}: closed_form is available for wave cases only")
        rep = wave_quotient_closed_form(cone_maximizer_params(dim))
        return rep, {"method": "closed_form"}
    if blk["method"] != "fft":
        raise UsageError(f"{case}: unknown method {blk['method']!r}")
    grid, spec = _grid_block(case, blk)
    bt = _tolerance(f"{case}.boundary_threshold", blk.get("boundary_threshold", 1e-6))
    if eq == SCHRODINGER:
        f = sample_gaussian_maximizer(gaussian_params(dim), grid)
        rep = strichartz_quotient_schrodinger(f, spec, boundary_threshold=bt)
    else:
        pair = sample_cone_maximizer(cone_maximizer_params(dim), grid)
        rep = strichartz_quotient_wave(pair, spec=spec, boundary_threshold=bt)
    return rep, {"method": "fft", "boundary_threshold": bt}


def cmd_verify_constants(cfg: dict, args) -> tuple:
    block = cfg["verify_constants"]
    cases = block["cases"]
    selected = sorted(cases)
    if args.case:
        _check_case(args.case, CASES)
        if args.case not in cases:
            raise UsageError(f"case {args.case!r} is not configured")
        selected = [args.case]
    for c in selected:
        _check_case(c, CASES)
    rows, failures = [], []
    for case in selected:
        blk = dict(cases[case])
        src = "config"
        if args.tolerance is not None:
            blk["tolerance"], src = args.tolerance, "flag"
        tol = _tolerance(f"{case}.tolerance", blk["tolerance"])
        eq, dim = CASES[case]
        exact = sharp_constant(eq, dim)
        try:
            rep, how = _maximizer_quotient(case, blk)
        except StrichartzError as e:
            failures.append({"case": case, "error": f"{type(e).__name__}: {e}"})
            rows.append({"case": case, "error": f"{type(e).__name__}: {e}", "passed": False})
            continue
        err = abs(rep.quotient - exact.value)
        passed = err <= tol and not (tol == 0)
        row = {
            "case": case, "computed": rep.quotient, "exact": exact.value,
            "exact_expression": exact.expression, "abs_error": err,
            "error_estimate": rep.error_estimate, "tolerance": tol, "tolerance_source": src,
            "passed": passed, "grid_meta": rep.grid, **how,
        }
        rows.append(row)
        if not passed:
            failures.append({"case": case, "abs_error": err, "tolerance": tol})
    report = {"command": "verify-constants", "schema": SCHEMA, "rows": rows, "failures": failures,
              "passed": not failures}
    return report, EXIT_OK if not failures else EXIT_FAIL


# ---------------------------------------------------------------- measure-conv

def _parse_point(case, raw):
    from .measures import FreqPoint
    try:
        tau, xi = raw
        return FreqPoint(float(tau), np.asarray(xi, dtype=float))
    except (TypeError, ValueError):
        raise UsageError(f"{case}: points are [tau, [xi...]], got {raw!r}") from None


def cmd_measure_conv(cfg: dict, args) -> tuple:
    from .measures import MeasureSpec, convolution_closed_form, convolution_oracle, random_interior_points
    block = cfg["measure_conv"]
    tol = _tolerance("measure_conv.tolerance", args.tolerance if args.tolerance is not None else block["tolerance"])
    sweep = bool(args.sweep or block.get("sweep", False))
    names = sorted(block["points"])
    if args.case:
        _check_case(args.case, MEASURE_CASES)
        names = [args.case]
    rows, failures, sweeps = [], [], {}
    for name in names:
        _check_case(name, MEASURE_CASES)
        spec = MeasureSpec(*MEASURE_CASES[name])
        for raw in block["points"].get(name, []):
            pt = _parse_point(name, raw)
            if pt.dim != spec.dim:
                raise UsageError(f"{name}: point {raw!r} has dimension {pt.dim}, expected {spec.dim}")
            try:
                closed = convolution_closed_form(spec, pt)
                orc = convolution_oracle(spec, pt)
            except RegionError as e:
                raise UsageError(f"{name}: {e} (point {raw!r})") from None
            rel = abs(orc.value - closed) / abs(closed)
            ok = rel < tol
            rows.append({"case": name, "tau": pt.tau, "xi": pt.xi, "closed_form": closed,
                         "oracle": orc.value, "oracle_error": orc.error, "order": orc.order,
                         "epsilons": list(orc.epsilons), "rel_error": rel, "passed": ok})
            if not ok:
                failures.append({"case": name, "tau": pt.tau, "xi": pt.xi, "rel_error": rel})
        if sweep:
            rng = np.random.default_rng(block.get("seed", 0))
            m = _positive("measure_conv.sweep_points", block.get("sweep_points", 20), integer=True)
            pts = random_interior_points(spec, m, rng)
            # cone2_pair is not constant; sweep the ratio to its closed form
            vals = np.array([convolution_oracle(spec, p).value / (convolution_closed_form(spec, p)
                             if name == "cone2_pair" else 1.0) for p in pts])
            spread = float((vals.max() - vals.min()) / abs(vals.mean()))
            sweeps[name] = {"points": m, "mean": float(vals.mean()), "std": float(vals.std()),
                            "relative_spread": spread, "passed": spread < tol}
            if not spread < tol:
                failures.append({"case": name, "relative_spread": spread})
    report = {"command": "measure-conv", "schema": SCHEMA, "tolerance": tol, "rows": rows,
              "sweeps": sweeps, "failures": failures, "passed": not failures}
    return report, EXIT_OK if not failures else EXIT_FAIL


# ---------------------------------------------------------------- maximize

def _ascent_run(job: tuple) -> dict:
    from .optimizer import default_setup, maximize_quotient, random_smooth_field, random_wave_data
    case, seed, max_iters = job
    try:
        grid, spec, acfg = default_setup(case, max_iters=max_iters, seed=seed)
        rng = np.random.default_rng(seed)
        f0 = random_smooth_field(grid, rng) if spec.equation == SCHRODINGER else random_wave_data(grid, rng)
        tr = maximize_quotient(f0, spec, acfg)
    except StrichartzError as e:
        return {"case": case, "seed": seed, "error": f"{type(e).__name__}: {e}"}
    return {
        "case": case, "seed": seed, "quotient": tr.quotient, "error_estimate": tr.error_estimate,
        "iterations": tr.iterations, "converged": tr.converged, "grad_norm": tr.grad_norm,
        "fit_residual": tr.fit.residual if tr.fit else None,
        "fit_A": tr.fit.A if tr.fit else None,
        "max_evaluation_margin": max(q - 2 * e for q, e in tr.evaluations),
        "gauge_moves": len(tr.gauge_moves),
        "grid_meta": grid.meta(), "n_times": spec.n_times, "half_width": spec.half_width,
        "trace": [{"iteration": i, "quotient": q} for i, q in enumerate(tr.quotients)],
    }


def cmd_maximize(cfg: dict, args) -> tuple:
    block = cfg["maximize"]
    cases = [args.case] if args.case else list(block["cases"])
    for c in cases:
        _check_case(c, CASES)
    seeds = args.seeds if args.seeds is not None else block["seeds"]
    if not seeds or not all(isinstance(s, int) and s >= 0 for s in seeds):
        raise UsageError(f"seeds must be nonnegative integers, got {seeds!r}")
    iters = _positive("maximize.max_iters", block["max_iters"], integer=True)
    tol = _tolerance("maximize.tolerance", args.tolerance if args.tolerance is not None else block["tolerance"])
    ftol = _tolerance("maximize.fit_tolerance", block["fit_tolerance"])
    out_dir = Path(args.out_dir or block["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(c, s, iters) for c in cases for s in seeds]
    results = _pool_map(_ascent_run, jobs, workers(cfg))
    runs, failures = [], []
    for r in results:
        trace = r.pop("trace", None)
        if trace is not None:
            name = f"trace_{r['case']}_seed{r['seed']}.csv"
            write_trace_csv(out_dir / name, trace, ["iteration", "quotient"])
            r["trace_file"] = name
        if "error" in r:
            r["passed"] = False
        else:
            eq, dim = CASES[r["case"]]
            S = sharp_constant(eq, dim).value
            r["sharp_constant"] = S
            r["gap"] = S - r["quotient"]
            tripwire = r["max_evaluation_margin"] <= S
            if eq == SCHRODINGER:
                r["passed"] = bool(abs(r["gap"]) <= tol and tol > 0 and r["fit_residual"] is not None
                                   and r["fit_residual"] < ftol and tripwire)
            else:
                # wave runs are exploratory: only the never-exceed bound is checked
                r["passed"] = bool(tripwire)
        runs.append(r)
        if not r["passed"]:
            failures.append({"case": r["case"], "seed": r["seed"], "reason": r.get("error", "tolerance")})
    report = {"command": "maximize", "schema": SCHEMA, "tolerance": tol, "fit_tolerance": ftol,
              "runs": runs, "failures": failures, "passed": not failures}
    (out_dir / "summary.json").write_text(dumps(report), encoding="utf-8")
    return report, EXIT_OK if not failures else EXIT_FAIL


# ---------------------------------------------------------------- feq-check

def _fixture_grid(dim: int) -> Grid:
    return Grid.cube(dim, {1: 32, 2: 16, 3: 8}[dim], 1.5)


def cmd_feq_check(cfg: dict, args) -> tuple:
    from . import feq
    block = cfg["feq_check"]
    rng = np.random.default_rng(block["seed"])
    tol = _tolerance("feq_check.tolerance", args.tolerance if args.tolerance is not None else block["tolerance"])
    thr = _tolerance("feq_check.non_member_threshold", block["non_member_threshold"])
    ctol = _tolerance("feq_check.conservation_tolerance", block["conservation_tolerance"])
    m = _positive("feq_check.samples", block["samples"], integer=True)
    mt = _positive("feq_check.tuples", block["tuples"], integer=True)
    kinds = ["schr1", "schr2", "wave2", "wave3"]
    if args.case:
        _check_case(args.case, set(kinds) | {"pair1d"})
        kinds = [k for k in kinds if k == args.case]
    members, non_members, failures = {}, {}, []
    for name in kinds:
        k = feq.get_kind(name)
        A = complex(-rng.uniform(0.5, 1.5), rng.uniform(-1, 1))
        b = rng.uniform(-0.5, 0.5, k.dim) + 1j * rng.uniform(-0.5, 0.5, k.dim)
        C = complex(rng.uniform(-0.5, 0.5), rng.uniform(-1, 1))
        f, F = feq.exponential_solution(name, A, b, C)
        tuples = feq.random_tuples(name, mt, rng)
        res = feq.feq_residual(name, f, F, tuples)
        members[name] = {"A": A, "b": b, "C": C, "residual": res, "passed": res < tol and tol > 0}
        if not members[name]["passed"]:
            failures.append({"kind": name, "fixture": "member", "residual": res})
        # non-member: exp(-|x|^4) against its best exponential fit
        grid = _fixture_grid(k.dim)
        r2 = sum(x * x for x in grid.mesh())
        field = ComplexField(grid, np.exp(-r2 * r2) + 0j)
        fit = feq.fit_exponential(field, name)
        g, G = feq.exponential_solution(name, fit.A, fit.b, fit.C)

        def quartic(x, _dim=k.dim):
            x = np.asarray(x, dtype=float)
            xv = x[..., None] if _dim == 1 else x
            return np.exp(-np.sum(xv * xv, axis=-1) ** 2)
        nres = feq.feq_residual(name, quartic, G, feq.random_tuples(name, mt, rng, scale=0.5))
        non_members[name] = {"fit_residual": fit.residual, "residual": nres, "passed": nres > thr}
        if not nres > thr:
            failures.append({"kind": name, "fixture": "non_member", "residual": nres})
    # a discontinuous solution of the pair equation: allowed, but proves nothing
    step = (lambda x: np.where(np.asarray(x) > 0.3, 2.0, 1.0) + 0j)
    f6, F6 = feq.pair1d_solution(step)
    r6 = feq.feq_residual("pair1d", f6, F6, feq.random_tuples("pair1d", mt, rng))
    pair = {"kind": "pair1d", "residual": r6, "unsupported_for_uniqueness": not feq.KINDS["pair1d"].unique}
    # conservation identities
    x, y = rng.normal(size=(m, 2)), rng.normal(size=(m, 2))
    p, q = feq.square_map(x, y)
    sq = max(np.abs(p + q - x - y).max() / (1 + np.abs(x + y).max()),
             float(np.max(np.abs(np.sum(p * p + q * q, 1) - np.sum(x * x + y * y, 1))
                          / np.sum(x * x + y * y, 1))))
    x3, y3 = feq.independent_pairs(m, rng, margin=0.05, ratio=20.0)
    p3, q3 = feq.ellipsoid_map(x3, y3)
    nrm = np.linalg.norm
    el = max(float(np.max(nrm(p3 + q3 - x3 - y3, axis=1) / nrm(x3 + y3, axis=1))),
             float(np.max(np.abs(nrm(p3, axis=1) + nrm(q3, axis=1) - nrm(x3, axis=1) - nrm(y3, axis=1))
                          / (nrm(x3, axis=1) + nrm(y3, axis=1)))))
    xj, yj = feq.independent_pairs(min(m, 2000), rng)
    dP, dQ = feq.ellipsoid_jacobians(xj, yj)
    jmin = float(min(np.abs(dP).min(), np.abs(dQ).min()))
    floor = _tolerance("feq_check.jacobian_floor", block["jacobian_floor"])
    geometry = {
        "square_map_conservation": sq, "ellipsoid_map_conservation": el,
        "conservation_tolerance": ctol, "samples": m,
        "jacobian_min_abs_det": jmin, "jacobian_floor": floor, "jacobian_pairs": int(xj.shape[0]),
    }
    if not (sq < ctol and el < ctol):
        failures.append({"check": "conservation", "square": sq, "ellipsoid": el})
    if not jmin > floor:
        failures.append({"check": "jacobian", "min_abs_det": jmin})
    report = {"command": "feq-check", "schema": SCHEMA, "tolerance": tol, "non_member_threshold": thr,
              "members": members, "non_members": non_members, "pair_fixture": pair,
              "geometry": geometry, "failures": failures, "passed": not failures}
    return report, EXIT_OK if not failures else EXIT_FAIL


# ---------------------------------------------------------------- orbit

def _complex(v, what):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    raise UsageError(f"{what}: expected a number or [re, im], got {v!r}")


def parse_params(raw: dict, group: str):
    if not isinstance(raw, dict):
        raise UsageError(f"params must be an object, got {raw!r}")
    try:
        A = _complex(raw["A"], "A")
        b = np.array([_complex(v, "b") for v in raw["b"]])
        C = _complex(raw["C"], "C")
        if group == "G":
            return ExpQuadraticParams(A, b, C, raw.get("space", PHYSICAL))
        return ConeExpParams(A, b, C, _complex(raw["D"], "D"), b.size)
    except KeyError as e:
        raise UsageError(f"params missing field {e}") from None
    except (ValueError, StrichartzError) as e:
        raise UsageError(f"invalid params: {e}") from None


def cmd_orbit(cfg: dict, args) -> tuple:
    from .symmetry import canonicalize, coefficient_distance
    block = cfg["orbit"]
    group = block["group"]
    if group not in ("G", "L"):
        raise UsageError(f"group must be G or L, got {group!r}")
    tol = _tolerance("orbit.tolerance", args.tolerance if args.tolerance is not None else block["tolerance"])
    p, q = parse_params(block["p"], group), parse_params(block["q"], group)
    if len(p.b) != len(q.b):
        raise UsageError("p and q have different dimensions")
    cp, cq = canonicalize(p), canonicalize(q)
    dist = coefficient_distance(cp.canonical, cq.canonical)
    equivalent = dist <= tol
    report = {
        "command": "orbit", "schema": SCHEMA, "group": group, "tolerance": tol,
        "equivalent": equivalent, "canonical_distance": dist,
        "p": {"canonical": cp.canonical.as_tuple(), "trail": [g.to_dict() for g in cp.trail],
              "replay_error": cp.replay_error(p)},
        "q": {"canonical": cq.canonical.as_tuple(), "trail": [g.to_dict() for g in cq.trail],
              "replay_error": cq.replay_error(q)},
    }
    expect = block.get("expect")
    ok = expect is None or bool(expect) == equivalent
    report["passed"] = ok
    return report, EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- quotient

def cmd_quotient(cfg: dict, args) -> tuple:
    from .optimizer import random_smooth_field, random_wave_data
    block = dict(cfg["quotient"])
    case = _check_case(args.case or block["case"], CASES)
    eq, dim = CASES[case]
    data = block["data"]
    if data not in ("maximizer", "random"):
        raise UsageError(f"quotient.data must be maximizer or random, got {data!r}")
    if block["method"] == "closed_form":
        if eq == SCHRODINGER or data != "maximizer":
            raise UsageError("closed_form needs a wave case with maximizer data")
        rep = wave_quotient_closed_form(cone_maximizer_params(dim))
    else:
        gblk = block["grids"].get(case)
        if gblk is None:
            raise UsageError(f"no quotient grid configured for {case}")
        grid, spec = _grid_block(case, gblk)
        bt = _tolerance("quotient.boundary_threshold", gblk.get("boundary_threshold", 1e-6))
        rng = np.random.default_rng(block["seed"])
        try:
            if eq == SCHRODINGER:
                f = (sample_gaussian_maximizer(gaussian_params(dim), grid) if data == "maximizer"
                     else random_smooth_field(grid, rng))
                rep = strichartz_quotient_schrodinger(f, spec, boundary_threshold=bt)
            else:
                if data == "maximizer":
                    rep = strichartz_quotient_wave(sample_cone_maximizer(cone_maximizer_params(dim), grid),
                                                   spec=spec, boundary_threshold=bt)
                else:
                    f, g = random_wave_data(grid, rng)
                    rep = strichartz_quotient_wave(f, g, spec=spec, boundary_threshold=bt)
        except StrichartzError as e:
            return {"command": "quotient", "schema": SCHEMA, "case": case,
                    "error": f"{type(e).__name__}: {e}", "passed": False}, EXIT_FAIL
    S = sharp_constant(eq, dim).value
    ok = rep.quotient <= S + 2 * rep.error_estimate
    report = {"command": "quotient", "schema": SCHEMA, "case": case, "data": data,
              "report": rep.to_dict(), "sharp_constant": S, "within_bound": ok, "passed": ok}
    return report, EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "verify-constants": cmd_verify_constants,
    "measure-conv": cmd_measure_conv,
    "maximize": cmd_maximize,
    "feq-check": cmd_feq_check,
    "orbit": cmd_orbit,
    "quotient": cmd_quotient,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="strichartz", description="Sharp Strichartz constant laboratory")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--case", help="run a single case")
        p.add_argument("--tolerance", type=float, help="override the pass tolerance")
        if name == "measure-conv":
            p.add_argument("--sweep", action="store_true", help="add constancy sweeps")
        if name == "maximize":
            p.add_argument("--seeds", type=int, nargs="+")
            p.add_argument("--out-dir", help="directory for CSV traces and summary.json")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for opt in ("sweep", "seeds", "out_dir"):
        if not hasattr(args, opt):
            setattr(args, opt, None)
    try:
        cfg = load_config(args.config)
        workers(cfg)
        report, code = COMMANDS[args.command](cfg, args)
    except UsageError as e:
        print(f"strichartz: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
