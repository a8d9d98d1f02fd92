"""Scenario files: strict YAML configs in, JSON reports and CSV scans out.

A scenario has four top-level sections::

    system:            # coefficient declaration
      kind: constant
      matrix: [[-1, 0], [0, 1]]
    analysis: dichotomy   # dichotomy | gearhart | witness | spectrum-map | sweep
    numeric:
      window: 32
    output:
      report: out/report.json
      csv_dir: out

plus ``sweep`` when ``analysis: sweep``. Unknown keys are rejected. Complex
entries may be written as strings understood by ``complex()`` (``"2j"``,
``"1-0.5j"``). See :data:`NUMERIC_DEFAULTS` for every numeric knob.
"""

from __future__ import annotations

import copy
import csv
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import (
    ConfigError,
    EvodichError,
    NotHyperbolicError,
    PreconditionError,
    SingularPointError,
)
from .evolution import CoefficientFunction, EvolutionFamily, fit_growth_bound
from .linalg import matrix_exponential
from .riesz import contour_projection, extract_pointwise, verify_dichotomy
from .semigroup import (
    equivalence_report,
    imaginary_resolvent_scan,
    semigroup_hyperbolicity,
    spectral_map_check,
)
from .shift import WeightedShiftOperator, circle_margin
from .witness import near_fixed_vector, witness_quotient

__all__ = [
    "ANALYSES",
    "NUMERIC_DEFAULTS",
    "Report",
    "load_config",
    "validate_config",
    "run_scenario",
    "run_sweep",
    "write_report",
]

ANALYSES = ("dichotomy", "gearhart", "witness", "spectrum-map", "sweep")

NUMERIC_DEFAULTS = {
    "window": 32,
    "circle_samples": 256,
    "quad_nodes": 256,
    "step": 1e-2,
    "base_point": 0.0,
    "spacing": 1.0,
    "boundary": "periodic",
    "k_max": 32,
    "m": [10, 100, 1000],
    "norms": ["C", "L2"],
    "times": [0.5, 1.0, 2 * math.pi],
    "grid_size": 1024,
    "tolerances": {"hyperbolic": 0.05, "projection": 1e-6},
}

_POSITIVE_INT = ("window", "circle_samples", "quad_nodes", "k_max", "grid_size")
_POSITIVE_REAL = ("step", "spacing")

_SYSTEM_KEYS = {
    "constant": {"kind", "matrix"},
    "piecewise-constant": {"kind", "breakpoints", "matrices", "periodic"},
    "sampled-periodic": {"kind", "period", "samples", "t0"},
    "scalar-closed-form": {"kind", "name", "value"},
}

_OUTPUT_KEYS = {"report", "csv_dir", "timing"}
_SWEEP_KEYS = {"analysis", "grid"}


def load_config(path):
    """Read a YAML scenario file and validate it."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    return validate_config(raw)


def _matrix(value, key):
    try:
        M = np.array([[complex(x) for x in row] for row in np.atleast_2d(np.asarray(value, dtype=object))])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"not a matrix of numbers: {exc}", key) from exc
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.size == 0:
        raise ConfigError("must be a non-empty square matrix", key)
    if not np.all(np.isfinite(M)):
        raise ConfigError("entries must be finite", key)
    return M


def _unknown(d, allowed, prefix):
    for k in d:
        if k not in allowed:
            raise ConfigError("unknown key", f"{prefix}.{k}" if prefix else str(k))


def _build_system(sysd):
    if not isinstance(sysd, dict):
        raise ConfigError("must be a mapping", "system")
    kind = sysd.get("kind")
    if kind not in _SYSTEM_KEYS:
        raise ConfigError(f"must be one of {sorted(_SYSTEM_KEYS)}", "system.kind")
    _unknown(sysd, _SYSTEM_KEYS[kind], "system")
    try:
        if kind == "constant":
            return CoefficientFunction.constant(_matrix(sysd.get("matrix"), "system.matrix"))
        if kind == "piecewise-constant":
            mats = [_matrix(m, f"system.matrices[{i}]")
                    for i, m in enumerate(sysd.get("matrices") or [])]
            if not mats:
                raise ConfigError("need at least one matrix", "system.matrices")
            return CoefficientFunction.piecewise(sysd.get("breakpoints", []), mats,
                                                 periodic=bool(sysd.get("periodic", False)))
        if kind == "sampled-periodic":
            mats = [_matrix(m, f"system.samples[{i}]")
                    for i, m in enumerate(sysd.get("samples") or [])]
            period = sysd.get("period")
            if not isinstance(period, (int, float)) or not period > 0:
                raise ConfigError("must be a positive number", "system.period")
            return CoefficientFunction.sampled(float(period), mats, float(sysd.get("t0", 0.0)))
        return CoefficientFunction.scalar(str(sysd.get("name")), float(sysd.get("value", 0.0)))
    except ConfigError:
        raise
    except EvodichError as exc:
        raise ConfigError(str(exc), "system") from exc


def _check_numeric(num):
    for key in _POSITIVE_INT:
        v = num[key]
        if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
            raise ConfigError("must be a positive integer", f"numeric.{key}")
    for key in _POSITIVE_REAL:
        v = num[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError("must be a positive number", f"numeric.{key}")
    if not isinstance(num["base_point"], (int, float)):
        raise ConfigError("must be a number", "numeric.base_point")
    if num["boundary"] not in ("periodic", "zero"):
        raise ConfigError("must be 'periodic' or 'zero'", "numeric.boundary")
    if num["circle_samples"] < 8:
        raise ConfigError("must be at least 8", "numeric.circle_samples")
    m = num["m"]
    if not isinstance(m, list) or not m or any(
            isinstance(x, bool) or not isinstance(x, int) or x < 2 for x in m):
        raise ConfigError("must be a non-empty list of integers >= 2", "numeric.m")
    if not isinstance(num["norms"], list) or not num["norms"]:
        raise ConfigError("must be a non-empty list", "numeric.norms")
    times = num["times"]
    if not isinstance(times, list) or not times or any(
            not isinstance(t, (int, float)) or not t > 0 for t in times):
        raise ConfigError("must be a non-empty list of positive numbers", "numeric.times")
    tol = num["tolerances"]
    for k, v in tol.items():
        if not isinstance(v, (int, float)) or not 0 < v < 1:
            raise ConfigError("must lie in (0, 1)", f"numeric.tolerances.{k}")


def validate_config(raw):
    """Return a normalized config dict (defaults filled in) or raise :class:`ConfigError`."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    _unknown(raw, {"system", "analysis", "numeric", "output", "sweep"}, "")
    if "system" not in raw:
        raise ConfigError("missing", "system")
    analysis = raw.get("analysis")
    if analysis not in ANALYSES:
        raise ConfigError(f"must be one of {list(ANALYSES)}", "analysis")

    numeric = copy.deepcopy(NUMERIC_DEFAULTS)
    given = raw.get("numeric") or {}
    if not isinstance(given, dict):
        raise ConfigError("must be a mapping", "numeric")
    _unknown(given, set(NUMERIC_DEFAULTS), "numeric")
    for k, v in given.items():
        if k == "tolerances":
            if not isinstance(v, dict):
                raise ConfigError("must be a mapping", "numeric.tolerances")
            _unknown(v, set(NUMERIC_DEFAULTS["tolerances"]), "numeric.tolerances")
            numeric["tolerances"].update(v)
        else:
            numeric[k] = v
    _check_numeric(numeric)

    output = raw.get("output") or {}
    if not isinstance(output, dict):
        raise ConfigError("must be a mapping", "output")
    _unknown(output, _OUTPUT_KEYS, "output")

    cfg = {"system": raw["system"], "analysis": analysis, "numeric": numeric,
           "output": dict(output)}
    _build_system(raw["system"])

    if analysis == "sweep":
        sw = raw.get("sweep")
        if not isinstance(sw, dict):
            raise ConfigError("required for analysis 'sweep'", "sweep")
        _unknown(sw, _SWEEP_KEYS, "sweep")
        inner = sw.get("analysis")
        if inner not in ANALYSES or inner == "sweep":
            raise ConfigError("must name a non-sweep analysis", "sweep.analysis")
        grid = sw.get("grid")
        if not isinstance(grid, dict) or not grid:
            raise ConfigError("must be a non-empty mapping of parameter -> values", "sweep.grid")
        if len(grid) > 2:
            raise ConfigError("at most two swept parameters", "sweep.grid")
        for k, vals in grid.items():
            if k not in NUMERIC_DEFAULTS or k == "tolerances":
                raise ConfigError("not a sweepable numeric parameter", f"sweep.grid.{k}")
            if not isinstance(vals, list) or not vals:
                raise ConfigError("must be a non-empty list", f"sweep.grid.{k}")
            for v in vals:
                trial = copy.deepcopy(numeric)
                trial[k] = v
                _check_numeric(trial)
        cfg["sweep"] = {"analysis": inner, "grid": {k: list(v) for k, v in grid.items()}}
    elif "sweep" in raw:
        raise ConfigError("only allowed with analysis 'sweep'", "sweep")
    return cfg


def _num(x):
    """JSON-safe scalar: non-finite floats become strings, complex becomes [re, im]."""
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(float(x.real)), _num(float(x.imag))]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return x


@dataclass
class Report:
    """Result of one scenario; ``verdict`` is always accompanied by the numbers behind it."""

    scenario: dict
    analysis: str
    verdict: str
    refused: bool
    results: dict
    csv: dict = field(default_factory=dict, repr=False)
    seconds: float | None = None

    def as_dict(self, timing=False):
        d = {
            "scenario": self.scenario,
            "analysis": self.analysis,
            "verdict": self.verdict,
            "refused": self.refused,
            "results": self.results,
            "provenance": {"package": "evodich", "version": __version__,
                           "parameters": self.scenario["numeric"]},
        }
        if timing and self.seconds is not None:
            d["timing"] = {"seconds": self.seconds}
        return d

    def to_json(self, timing=False):
        return json.dumps(self.as_dict(timing), indent=2, default=_num) + "\n"


def _family(cfg):
    return EvolutionFamily(_build_system(cfg["system"]), step=cfg["numeric"]["step"])


def _constant_matrix(cfg, analysis):
    coeff = _build_system(cfg["system"])
    if coeff.kind == "constant":
        return np.array(coeff.matrices[0])
    if coeff.kind == "scalar-closed-form" and coeff.name == "const":
        return np.array([[coeff.value]], dtype=complex)
    raise ConfigError(f"analysis '{analysis}' needs a constant system", "system.kind")


def _run_dichotomy(cfg):
    num = cfg["numeric"]
    fam = _family(cfg)
    op = WeightedShiftOperator.from_family(fam, num["base_point"], num["window"],
                                           num["boundary"], num["spacing"])
    scan = circle_margin(op, num["circle_samples"])
    gb = fit_growth_bound(fam, num["base_point"], num["spacing"] * num["window"], 21)
    res = {
        "window": num["window"],
        "circle_samples": num["circle_samples"],
        "margin": _num(scan.margin),
        "argmin_lambda": _num(scan.argmin),
        "threshold": num["tolerances"]["hyperbolic"],
        "growth_bound": {"C": _num(gb.C), "beta": _num(gb.beta)},
    }
    csv_data = {"circle_scan": (("arg_lambda", "sigma_min"),
                                [(float(np.angle(p)), float(s)) for p, s in scan.samples])}
    try:
        R = contour_projection(op, num["quad_nodes"], num["circle_samples"],
                               num["tolerances"]["hyperbolic"])
    except NotHyperbolicError as exc:
        res["refusal"] = str(exc)
        return "not-hyperbolic", True, res, csv_data
    pp = extract_pointwise(R, op.d, tol=num["tolerances"]["projection"])
    cert = verify_dichotomy(pp, op, fam)
    res["projection"] = {
        "quad_nodes": num["quad_nodes"],
        "idempotency_residual": _num(R.idempotency_residual),
        "commutation_residual": _num(R.commutation_residual),
        "offdiagonal_residual": _num(pp.offdiagonal_residual),
        "rank": R.rank,
        "central_projector": [[_num(x) for x in row] for row in pp[0]],
    }
    res["certificate"] = {
        "M": _num(cert.M),
        "lambda": _num(cert.rate),
        "stable_rate": _num(cert.stable_rate),
        "unstable_rate": _num(cert.unstable_rate),
        "intertwining_residual": _num(cert.intertwining_residual),
        "stable_decay_residual": _num(cert.stable_decay_residual),
        "unstable_growth_residual": _num(cert.unstable_growth_residual),
        "kernel_invertibility": _num(cert.kernel_invertibility),
        "propagator_mismatch": _num(cert.propagator_mismatch),
        "rank_profile": cert.rank_profile,
    }
    csv_data["decay_fit"] = (("subspace", "n", "log_norm"), cert.fit_samples)
    return "hyperbolic", False, res, csv_data


def _run_gearhart(cfg):
    num = cfg["numeric"]
    A = _constant_matrix(cfg, "gearhart")
    rep = equivalence_report(A, num["k_max"])
    res = {k: _num(v) if not isinstance(v, (dict, list)) else v for k, v in rep.as_dict().items()}
    csv_data = {}
    try:
        scan = imaginary_resolvent_scan(A, rep.resolvent_k_max)
        res["scan"] = {"k_max": scan.k_max, "tail_bound": _num(scan.tail_bound),
                       "supremum": _num(scan.supremum), "argmax_k": scan.argmax}
        csv_data["resolvent_scan"] = (("k", "norm"), scan.entries)
    except SingularPointError as exc:
        res["singular_k"] = exc.k
    verdict = "hyperbolic" if rep.one_in_rho_monodromy else "not-hyperbolic"
    if rep.inconsistencies:
        verdict = "inconsistent"
    return verdict, False, res, csv_data


def _run_witness(cfg):
    num = cfg["numeric"]
    A = _constant_matrix(cfg, "witness")
    rows = []
    try:
        for m in num["m"]:
            v = near_fixed_vector(A, m)
            for norm in num["norms"]:
                q = witness_quotient(A, v, m, norm, grid_size=num["grid_size"])
                rows.append({"m": m, "norm": norm, "ratio": _num(q.ratio), "bound": _num(q.bound),
                             "holds": q.holds, "residual": _num(q.residual),
                             "grid_size": q.grid_size})
    except PreconditionError as exc:
        return "refused", True, {"refusal": str(exc), "measured": _num(exc.value),
                                 "quotients": rows}, {}
    verdict = "bounds-hold" if all(r["holds"] for r in rows) else "bounds-violated"
    return verdict, False, {"quotients": rows}, {}


def _run_spectrum_map(cfg):
    num = cfg["numeric"]
    A = _constant_matrix(cfg, "spectrum-map")
    rows = []
    for t in num["times"]:
        hyp = semigroup_hyperbolicity(A, t)
        rows.append({"t": _num(t), "distance": _num(spectral_map_check(A, t)),
                     "hyperbolic_margin": _num(hyp.margin), "argmin": _num(hyp.eigenvalue)})
    ok = all(r["distance"] <= 1e-8 * max(1.0, _scale(A, r["t"])) for r in rows)
    return ("spectral-mapping-holds" if ok else "spectral-mapping-violated"), False, \
        {"checks": rows}, {}


def _scale(A, t):
    return float(np.max(np.abs(np.linalg.eigvals(matrix_exponential(t * A)))))


_RUNNERS = {
    "dichotomy": _run_dichotomy,
    "gearhart": _run_gearhart,
    "witness": _run_witness,
    "spectrum-map": _run_spectrum_map,
}


def run_scenario(cfg) -> Report:
    """Run one (non-sweep) scenario. ``cfg`` may be raw or already validated (validation is idempotent)."""
    cfg = validate_config(cfg)
    if cfg["analysis"] == "sweep":
        raise ConfigError("use run_sweep for sweep scenarios", "analysis")
    t0 = time.perf_counter()
    try:
        verdict, refused, res, csv_data = _RUNNERS[cfg["analysis"]](cfg)
    except ConfigError:
        raise
    except EvodichError as exc:
        verdict, refused, res, csv_data = "refused", True, {
            "refusal": f"{type(exc).__name__}: {exc}", "stage": cfg["analysis"]}, {}
    echo = {k: cfg[k] for k in ("system", "analysis", "numeric")}
    return Report(echo, cfg["analysis"], verdict, refused, res, csv_data,
                  time.perf_counter() - t0)


def run_sweep(cfg):
    """One report per grid point, plus a convergence summary.

    Returns ``(reports, summary)``; the summary lists each grid point with its
    headline number (circle margin for dichotomy) and the change from the
    previous point.
    """
    cfg = validate_config(cfg)
    if cfg["analysis"] != "sweep":
        raise ConfigError("expected analysis 'sweep'", "analysis")
    sw = cfg["sweep"]
    keys = list(sw["grid"])
    reports, rows = [], []
    prev = None
    for values in itertools.product(*(sw["grid"][k] for k in keys)):
        point = copy.deepcopy(cfg)
        point["analysis"] = sw["analysis"]
        point.pop("sweep")
        for k, v in zip(keys, values):
            point["numeric"][k] = v
        rep = run_scenario(point)
        reports.append(rep)
        head = _headline(rep)
        row = {**dict(zip(keys, values)), "verdict": rep.verdict, "value": _num(head)}
        if prev is not None and head is not None:
            row["delta"] = _num(abs(head - prev))
        rows.append(row)
        prev = head
    summary = {"parameters": keys, "analysis": sw["analysis"], "table": rows}
    return reports, summary


def _headline(rep):
    r = rep.results
    if rep.analysis == "dichotomy":
        return r.get("margin")
    if rep.analysis == "gearhart":
        sup = r.get("resolvent_sup")
        return sup if isinstance(sup, float) else None
    if rep.analysis == "witness" and r.get("quotients"):
        return max(q["ratio"] for q in r["quotients"])
    if rep.analysis == "spectrum-map":
        return max(c["distance"] for c in r["checks"])
    return None


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def write_report(report: Report, output: dict, suffix=""):
    """Write the JSON report and CSV scans named in ``output``; returns written paths."""
    written = []
    timing = bool(output.get("timing", False))
    if output.get("report"):
        path = Path(output["report"])
        if suffix:
            path = path.with_name(f"{path.stem}{suffix}{path.suffix}")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report.to_json(timing))
        written.append(str(path))
    if output.get("csv_dir"):
        d = Path(output["csv_dir"])
        d.mkdir(parents=True, exist_ok=True)
        for name, (header, rows) in report.csv.items():
            p = d / f"{name}{suffix}.csv"
            write_csv(p, header, rows)
            written.append(str(p))
    return written


def sweep_suffix(summary_row, keys):
    return "_" + "_".join(f"{k}-{summary_row[k]}" for k in keys)


def write_summary(summary, output):
    if not output.get("report"):
        return None
    path = Path(output["report"])
    path = path.with_name(f"{path.stem}_summary{path.suffix}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary, indent=2, default=_num) + "\n")
    return str(path)

