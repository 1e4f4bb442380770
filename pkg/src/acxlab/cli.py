"""Scenario runner: ``acxlab run --scenario PATH`` and ``acxlab catalog``.

Exit codes: 0 success, 1 malformed input, 2 a checked invariant failed (a
``failure.json`` report is written next to the other artifacts).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .boundary.experiments import DEFAULT_KS, admissible_limit_experiment, fatou_scan, siegel_edge_grid
from .boundary.fields import catalog as field_catalog
from .boundary.foliation import foliate_generic
from .boundary.regions import ApproachRegion
from .core.chart import AlmostComplexChart, ball_samples, validate_chart
from .core.levi import levi_form, model_defining_function
from .core.model import ModelStructure, dilate_chart, is_normalized, model_chart, model_limit, normalize_chart
from .disc.solver import HolomorphicDatum, levi_via_disc, solve_disc
from .errors import AcxError
from .suites import transform_suite

OPERATIONS = ("validate", "transform-suite", "solve-disc", "levi", "normalize", "dilate-study",
              "limit-experiment", "fatou-scan", "foliate")
SAMPLING_OPS = {"validate", "transform-suite", "limit-experiment", "fatou-scan", "levi"}

ACCEPTANCE_SUITES = {
    "A01": "dbar-inverse identity and convergence order of T",
    "A02": "exterior holomorphy of T and annihilation by K",
    "A03": "generalized Cauchy formula",
    "A04": "interior Hoelder estimate stability",
    "A05": "structure algebra: J^2, functoriality, Levi invariance, Levi routes",
    "A06": "normalization of random quadratic charts",
    "A07": "model machinery: dilations, invariance, flattening, Levi positivity",
    "A08": "disc solver: identity, family oracle, perturbation, family residuals",
    "A09": "admissible limits on the Siegel model",
    "A10": "Fatou scan on a Siegel edge grid",
    "A11": "determinism of scenario outputs",
}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int_pos = {"type": "integer", "minimum": 1}
_cplx = {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}]}
_cvec = {"type": "array", "items": _cplx, "minItems": 1}

CHART_SCHEMA = {
    "oneOf": [
        {"type": "object", "additionalProperties": False, "required": ["builtin"],
         "properties": {"builtin": {"enum": ["jst", "siegel", "model"]},
                        "n": {"type": "integer", "minimum": 1},
                        "mu": {"type": "array", "items": _cvec},
                        "radius": _pos}},
        {"type": "object", "additionalProperties": False, "required": ["n", "radius", "entries"],
         "properties": {"n": {"type": "integer", "minimum": 1}, "radius": _pos,
                        "entries": {"type": "array", "items": {
                            "type": "object", "additionalProperties": False, "required": ["row", "col"],
                            "properties": {"row": {"type": "integer", "minimum": 0},
                                           "col": {"type": "integer", "minimum": 0},
                                           "alpha": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                                           "beta": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                                           "re": _num, "im": _num}}}}},
    ]
}

FIELD_SCHEMA = {"type": "object", "additionalProperties": False, "required": ["builtin"],
                "properties": {"builtin": {"type": "string"}, "params": {"type": "object"}}}

KS_SCHEMA = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 3}

PARAMS_SCHEMA = {
    "type": "object", "additionalProperties": False,
    "properties": {
        "samples": _int_pos, "probes": _int_pos, "tolerance": _pos, "max_iter": _int_pos,
        "n_r": _int_pos, "n_theta": _int_pos, "point": _cvec, "direction": _cvec,
        "directions": {"type": "array", "items": _cvec}, "datum": {"type": "array", "items": _cvec},
        "size": _pos, "lambdas": {"type": "array", "items": _pos, "minItems": 1},
        "mode": {"enum": ["isotropic", "nonisotropic"]}, "alpha": _pos,
        "alphas": {"type": "array", "items": _pos, "minItems": 1}, "ks": KS_SCHEMA, "count": _int_pos,
        "field": FIELD_SCHEMA, "fields": {"type": "array", "items": FIELD_SCHEMA},
        "grid": {"type": "object", "additionalProperties": False,
                 "properties": {"nx": _int_pos, "ny": _int_pos,
                                "x1": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                                "x2": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}}},
        "exceptional": {"type": "boolean"}, "min_fraction": _pos, "threads": _int_pos,
        "surface": {"enum": ["flat", "complex-line", "perturbed"]}, "slices": {"type": "array", "items": _num},
        "function": {"enum": ["rho0", "norm2"]}, "unit_radius": _pos,
    },
}

SCENARIO_SCHEMA = {
    "type": "object", "additionalProperties": False,
    "required": ["name", "chart", "operation"],
    "properties": {"name": {"type": "string", "minLength": 1}, "chart": CHART_SCHEMA,
                   "operation": {"enum": list(OPERATIONS)}, "params": PARAMS_SCHEMA,
                   "seed": {"type": "integer", "minimum": 0}, "output": {"type": "string"}},
}


class ScenarioError(Exception):
    """Malformed scenario (exit 1)."""


class InvariantFailure(Exception):
    """A checked invariant failed (exit 2)."""

    def __init__(self, report):
        self.report = report
        super().__init__(report.get("message", "invariant failure"))


# -- formatting -------------------------------------------------------------------

def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    Path(path).write_text(buf.getvalue())


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def write_json(path, doc):
    Path(path).write_text(json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n")


def _c(v):
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def _cv(vs):
    return np.array([_c(v) for v in vs], complex)


# -- loading ----------------------------------------------------------------------

def _key_path(err):
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) if parts else "<root>"


def validate_scenario(doc):
    v = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(v.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        raise ScenarioError(f"invalid scenario at {_key_path(best)}: {best.message}")
    if doc["operation"] in SAMPLING_OPS and "seed" not in doc:
        raise ScenarioError("invalid scenario at seed: a seed is required for sampling operations")


def build_chart(spec):
    if "builtin" not in spec:
        n = spec["n"]
        for i, e in enumerate(spec["entries"]):
            for key in ("alpha", "beta"):
                if key in e and len(e[key]) != n:
                    raise ScenarioError(f"invalid scenario at chart.entries.{i}.{key}: length must be {n}")
            if e["row"] >= n or e["col"] >= n:
                raise ScenarioError(f"invalid scenario at chart.entries.{i}: index out of range")
        return AlmostComplexChart.from_json(spec)
    kind = spec["builtin"]
    radius = spec.get("radius", 1.0)
    if kind == "jst":
        return AlmostComplexChart.standard(spec.get("n", 2), radius)
    if kind == "siegel":
        return AlmostComplexChart.standard(2, radius)
    n = spec.get("n", 2)
    if n < 2:
        raise ScenarioError("invalid scenario at chart.n: model structures need n >= 2")
    mu = spec.get("mu", [[0.0] * (n - 1)] * (n - 1))
    if len(mu) != n - 1 or any(len(r) != n - 1 for r in mu):
        raise ScenarioError(f"invalid scenario at chart.mu: expected an {n - 1}x{n - 1} matrix")
    try:
        return model_chart(ModelStructure(n, [[_c(v) for v in r] for r in mu]), radius)
    except AcxError as exc:
        raise ScenarioError(f"invalid scenario at chart.mu: {exc}") from exc


def _field(spec):
    cat = field_catalog()
    name = spec["builtin"]
    if name not in cat:
        raise ScenarioError(f"invalid scenario at params.field.builtin: unknown field {name!r}")
    return cat[name]


def _ks(params):
    return tuple(params.get("ks", DEFAULT_KS))


# -- operations -------------------------------------------------------------------

def op_validate(chart, params, seed, out):
    pts = ball_samples(chart.n, chart.radius, params.get("samples", 1000), seed=seed)
    norms = chart.norm(pts)
    rows = [[i, *np.ravel([[z.real, z.imag] for z in p]), nv] for i, (p, nv) in enumerate(zip(pts, norms))]
    head = ["id"] + [f"{a}{j + 1}" for j in range(chart.n) for a in ("x", "y")] + ["norm"]
    write_csv(out / "validate.csv", head, rows)
    rep = validate_chart(chart, pts, raise_on_fail=False)
    summary = {"passed": rep.passed, "max_norm": rep.max_norm, "samples": rep.samples}
    if not rep.passed:
        raise InvariantFailure({"check": "norm", "message": "|A| >= 1 at a sample", **summary})
    return summary


def op_transform_suite(chart, params, seed, out):
    checks = transform_suite(chart, seed=seed, probes=params.get("probes", 100))
    write_csv(out / "checks.csv", ["check", "value", "threshold", "passed"],
              [[c.name, c.value, c.threshold, c.passed] for c in checks])
    summary = {"checks": [c.as_dict() for c in checks]}
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise InvariantFailure({"message": "checks failed", "failed": failed, **summary})
    return summary


def op_solve_disc(chart, params, seed, out):
    if "datum" in params:
        datum = HolomorphicDatum(np.array([_cv(r) for r in params["datum"]]))
    else:
        p = _cv(params.get("point", [0.0] * chart.n))
        V = _cv(params.get("direction", [1.0] + [0.0] * (chart.n - 1)))
        datum = HolomorphicDatum.from_point_direction(p, params.get("size", 0.1) * V)
    sol = solve_disc(chart, datum, tol=params.get("tolerance", 1e-10), max_iter=params.get("max_iter", 50),
                     n_r=params.get("n_r", 64), n_theta=params.get("n_theta", 64))
    (out / "disc.csv").write_text(sol.to_csv())
    write_csv(out / "history.csv", ["iteration", "residual"], [[i + 1, r] for i, r in enumerate(sol.history)])
    summary = sol.sidecar()
    write_json(out / "disc.json", summary)
    return summary


def _levi_function(name, n):
    if name == "norm2":
        return lambda z: float(np.sum(np.abs(np.asarray(z)) ** 2))
    rho = model_defining_function(n)
    return lambda z: float(rho(np.asarray(z, complex)))


def op_levi(chart, params, seed, out):
    n = chart.n
    u = _levi_function(params.get("function", "rho0"), n)
    p = _cv(params.get("point", [0.0] * n))
    dirs = [_cv(d) for d in params.get("directions", [[1.0] + [0.0] * (n - 1)])]
    tol = params.get("tolerance", 2e-4)
    rows, worst = [], 0.0
    for i, V in enumerate(dirs):
        V = V / np.linalg.norm(V)
        rep = levi_via_disc(chart, u, p, V)
        direct = levi_form(chart, u, p, V)
        diff = rep.normalized_difference
        worst = max(worst, diff)
        rows.append([i, direct, rep.laplacian, rep.direct, diff])
    write_csv(out / "levi.csv", ["direction", "levi_at_p", "disc_laplacian", "levi_at_disc_center", "unit_diff"],
              rows)
    summary = {"max_unit_diff": worst, "tolerance": tol}
    if worst >= tol:
        raise InvariantFailure({"message": "Levi routes disagree", **summary})
    return summary


def op_normalize(chart, params, seed, out):
    zero = np.zeros(chart.n, complex)
    new, tf = normalize_chart(chart)
    a0 = float(np.max(np.abs(new.A(zero))))
    d0 = float(np.max(np.abs(new._fd(zero, conj=False))))
    rows = [["A(0)", float(np.max(np.abs(chart.A(zero)))), a0],
            ["dA/dz(0)", float(np.max(np.abs(chart._fd(zero, conj=False)))), d0]]
    write_csv(out / "normalize.csv", ["quantity", "before", "after"], rows)
    summary = {"A0": a0, "dA_dz0": d0, "transformation": tf.name}
    if chart.n >= 2 and is_normalized(new):
        summary["mu"] = model_limit(new).mu
    if a0 >= 1e-12 or d0 >= 1e-6:
        raise InvariantFailure({"message": "normalization failed", **summary})
    return summary


def op_dilate_study(chart, params, seed, out):
    mode = params.get("mode", "nonisotropic")
    pts = ball_samples(chart.n, params.get("unit_radius", 1.0), params.get("samples", 200), seed=seed or 0)
    ref = model_chart(model_limit(chart), 1.0, margin=-np.inf) if mode == "nonisotropic" else None
    zero = np.zeros(chart.n, complex)
    rows = []
    for lam in params.get("lambdas", [2.0 ** -k for k in range(0, 11, 2)]):
        d = dilate_chart(chart, lam, mode)
        target = ref.A(pts) if ref is not None else chart.A(zero)[None]
        rows.append([lam, float(np.max(np.abs(d.A(pts) - target)))])
    write_csv(out / "dilation.csv", ["lambda", "sup_diff"], rows)
    return {"mode": mode, "final": rows[-1][1]}


def _verdict_rows(tag, v):
    return [[tag, i, r["scale"], r["count"], r["osc"], r["tail_osc"], r["mean_re"], r["mean_im"]]
            for i, r in enumerate(v.table)]


VERDICT_HEAD = ["run", "index", "scale", "count", "osc", "tail_osc", "mean_re", "mean_im"]


def _domain(chart):
    return model_defining_function(chart.n)


def op_limit_experiment(chart, params, seed, out):
    fields = [params["field"]] if "field" in params else params.get("fields", [{"builtin": "exp_inv_plus_conj"}])
    p = _cv(params.get("point", [0.0] * chart.n))
    ks = _ks(params)
    count = params.get("count", 16)
    tol = params.get("tolerance", 5e-3)
    rows, results, problems = [], [], []
    rho = _domain(chart)
    for fspec in fields:
        f = _field(fspec)
        for alpha in params.get("alphas", [params.get("alpha", 2.0)]):
            region = ApproachRegion(p, alpha, rho, "admissible", chart)
            r = admissible_limit_experiment(f, region, ks, count, seed=seed, tol=tol)
            tag = f"{f.name}@{alpha:g}"
            rows += _verdict_rows(tag + ":region", r.region) + _verdict_rows(tag + ":curve", r.curve)
            results.append({"field": f.name, "alpha": alpha, "region": r.region.status,
                            "value": r.region.value, "tail_osc": r.region.tail_oscillation,
                            "curve": r.curve.status, "agree": r.agree})
            if not r.agree:
                problems.append(tag)
    write_csv(out / "limits.csv", VERDICT_HEAD, rows)
    summary = {"results": results, "tolerance": tol}
    if problems:
        raise InvariantFailure({"message": "curve and region verdicts disagree", "runs": problems, **summary})
    return summary


def op_fatou_scan(chart, params, seed, out, threads=1):
    f = _field(params.get("field", {"builtin": "exp_inv"}))
    g = params.get("grid", {})
    pts = siegel_edge_grid(g.get("nx", 32), g.get("ny", 32), tuple(g.get("x1", (0.05, 0.25))),
                           tuple(g.get("x2", (0.2, 0.6))))
    alpha = params.get("alpha", 1.0)
    ks = _ks(params)
    res = fatou_scan(f, pts, alpha, ks, params.get("count", 16), seed=seed,
                     threads=params.get("threads", threads), rho=_domain(chart), chart=chart,
                     tol=params.get("tolerance", 5e-3))
    head = ["id", "x1", "y1", "x2", "y2", "status", "limit_re", "limit_im"] + [f"osc_k{k}" for k in ks]
    rows = []
    for i, (p, r) in enumerate(zip(pts, res.results)):
        row = r.row()
        rows.append([i, p[0].real, p[0].imag, p[1].real, p[1].imag, row["status"], row["limit_re"],
                     row["limit_im"], *row["osc"]])
    write_csv(out / "fatou.csv", head, rows)
    summary = {"field": f.name, "alpha": alpha, "points": len(pts), "fraction": res.fraction}
    if params.get("exceptional", False):
        region = ApproachRegion(np.zeros(chart.n, complex), alpha, _domain(chart), "admissible", chart)
        ex = admissible_limit_experiment(f, region, ks, params.get("count", 16), seed=seed)
        summary["exceptional_point"] = {"status": ex.region.status, "final_osc": ex.region.final_oscillation}
    if "min_fraction" in params and res.fraction < params["min_fraction"]:
        raise InvariantFailure({"message": "existence fraction below threshold", **summary})
    return summary


def _surface(kind, n):
    """Parametrizations u in R^(1+n) -> C^n with d = 1."""
    if kind == "flat":
        # R^1(x_1) x iR^n(y): slices {x_1 = s} have tangent i R^n
        return lambda u: np.concatenate([[u[0] + 1j * u[1]], 1j * u[2:]])
    if kind == "complex-line":
        # slices {u_0 = s} contain the complex line z_1 = u_1 + i u_2
        return lambda u: np.concatenate([[u[1] + 1j * u[2]], [u[0] + 0j], 1j * u[3:]])[:n]
    return lambda u: np.concatenate([[u[0] + 1j * u[1] + 0.05 * u[1] ** 2], 1j * u[2:] + 0.05 * u[2:] ** 2])


def op_foliate(chart, params, seed, out):
    n = chart.n
    kind = params.get("surface", "flat")
    param = _surface(kind, n)
    rng = np.random.default_rng(seed or 0)
    samples = [0.1 * rng.standard_normal(n) for _ in range(params.get("samples", 8))]
    certs = foliate_generic(param, 1, params.get("slices", [-0.1, 0.0, 0.1]), samples, chart=chart,
                            raise_on_fail=False)
    rows = [[i, float(c.s[0]), j, float(sm), float(cn)] for i, c in enumerate(certs)
            for j, (sm, cn) in enumerate(zip(c.sigma_min, c.condition))]
    write_csv(out / "foliation.csv", ["slice", "s", "sample", "sigma_min", "condition"], rows)
    summary = {"surface": kind, "certified": all(c.certified for c in certs),
               "min_sigma": float(min(np.min(c.sigma_min) for c in certs))}
    if not summary["certified"]:
        raise InvariantFailure({"message": "slice is not totally real", **summary})
    return summary


HANDLERS = {"validate": op_validate, "transform-suite": op_transform_suite, "solve-disc": op_solve_disc,
            "levi": op_levi, "normalize": op_normalize, "dilate-study": op_dilate_study,
            "limit-experiment": op_limit_experiment, "fatou-scan": op_fatou_scan, "foliate": op_foliate}


def run_scenario(path, out=None, seed=None, threads=1):
    """Run one scenario file; returns the exit status."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return 1
    if seed is not None and isinstance(doc, dict):
        doc["seed"] = seed
    out_dir = Path(out or (doc.get("output") if isinstance(doc, dict) else None) or "out")
    try:
        validate_scenario(doc)
        chart = build_chart(doc["chart"])
        if doc["operation"] == "fatou-scan" and chart.n != 2:
            raise ScenarioError("invalid scenario at chart: the edge grid lives on the Siegel domain (n = 2)")
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"error: invalid scenario at chart: {exc}", file=sys.stderr)
        return 1
    out_dir.mkdir(parents=True, exist_ok=True)
    params = doc.get("params", {})
    handler = HANDLERS[doc["operation"]]
    kwargs = {"threads": threads} if doc["operation"] == "fatou-scan" else {}
    try:
        summary = handler(chart, params, doc.get("seed"), out_dir, **kwargs)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InvariantFailure, AcxError) as exc:
        report = exc.report if isinstance(exc, InvariantFailure) else {"message": str(exc),
                                                                        "error": type(exc).__name__}
        report.update({"scenario": doc["name"], "operation": doc["operation"]})
        write_json(out_dir / "failure.json", report)
        print(f"invariant failure: {report['message']}", file=sys.stderr)
        return 2
    write_json(out_dir / "summary.json", {"scenario": doc["name"], "operation": doc["operation"],
                                          "seed": doc.get("seed"), "version": __version__, **summary})
    return 0


def catalog_listing():
    fields = {name: f.catalog_entry() for name, f in field_catalog().items()}
    return {"version": __version__,
            "charts": {"jst": "standard structure, A = 0 (params: n, radius)",
                       "siegel": "n = 2 standard structure on the Siegel domain Im z2 + |z1|^2 < 0",
                       "model(n,mu)": "model structure with last row -sum_m mu[j][m] conj(z_m)"},
            "fields": fields, "operations": list(OPERATIONS), "suites": ACCEPTANCE_SUITES}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="acxlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("--scenario", required=True, help="scenario JSON path")
    run.add_argument("--out", help="output directory (overrides the scenario)")
    run.add_argument("--seed", type=int, help="seed (overrides the scenario)")
    run.add_argument("--threads", type=int, default=1, help="parallelism hint; results do not depend on it")
    sub.add_parser("catalog", help="list builtin charts, fields and suites")
    args = parser.parse_args(argv)
    if args.command == "catalog":
        print(json.dumps(_jsonable(catalog_listing()), indent=1, sort_keys=True))
        return 0
    return run_scenario(args.scenario, args.out, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())
