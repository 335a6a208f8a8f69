"""Command-line front end: config ingestion, dispatch, artifact emission.

Configuration is a single JSON document (key-value tree) validated against a
per-command schema with full-path error reporting; every leaf can be
overridden on the command line with ``--set path.to.key=value``.  Artifacts
are byte-reproducible: manifests carry the fully resolved plan plus content
hashes, and wall-clock metadata lives in a separate meta.json that is never
hashed.

Exit codes (disjoint by failure class):
    0  success
    2  configuration error (bad key, bad value, grid or plan invariant)
    3  unsupported regime (sweep requested at or below the critical curve)
    4  sweep failure (bootstrap censored, too many censored points)
    5  numerical failure (overflow, insufficient data for a fit)
    6  I/O error (unwritable output directory, unreadable input)
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .auxfn import (
    BFamily,
    CoefficientProfile,
    damping_profile,
    eval_b,
    mode_bounds_report,
    phi0_report,
    potential_profile,
    psi_asymptote_report,
    solve_mode,
    solve_phi0,
)
from .errors import (
    ArtifactIOError,
    ConfigKeyError,
    ConfigurationError,
    InsufficientDataError,
    NumericalFailureError,
    SemiwaveError,
    SweepFailedError,
    UnsupportedRegimeError,
)
from .exponents import ExponentPair, critical_gap, lifespan_prediction
from .ode_lemma import LemmaParams, fit_lemma_scaling, integrate_extremal
from .radial_solver import GridSpec, SystemSpec, evolve, make_initial_data
from .sweep import (
    SweepSpec,
    damping_effect_report,
    fit_scaling,
    load_sweep_manifest,
    run_sweep,
    upper_bound_check,
    write_sweep_manifest,
)
from .svg import scaling_plot_svg

OUTPUT_ENV = "SEMIWAVE_OUT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REGIME = 3
EXIT_SWEEP = 4
EXIT_NUMERICAL = 5
EXIT_IO = 6

_COMMANDS = ("exponents", "aux", "solve", "sweep", "lemma", "report")
_EMIT_CHOICES = ("csv", "json", "svg")


# ---------------------------------------------------------------------------
# schema machinery
# ---------------------------------------------------------------------------

class Field:
    def __init__(self, kind: str, required: bool = False, default: Any = None,
                 choices: Optional[Tuple] = None, nullable: bool = False):
        self.kind = kind
        self.required = required
        self.default = default
        self.choices = choices
        self.nullable = nullable

    def coerce(self, value, path: str):
        if value is None:
            if self.nullable:
                return None
            raise ConfigKeyError(path, "value may not be null")
        if self.kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigKeyError(path, f"expected a number, got {value!r}")
            return float(value)
        if self.kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigKeyError(path, f"expected an integer, got {value!r}")
            return int(value)
        if self.kind == "bool":
            if not isinstance(value, bool):
                raise ConfigKeyError(path, f"expected a boolean, got {value!r}")
            return value
        if self.kind == "str":
            if not isinstance(value, str):
                raise ConfigKeyError(path, f"expected a string, got {value!r}")
            if self.choices and value not in self.choices:
                raise ConfigKeyError(path, f"must be one of {list(self.choices)}, got {value!r}")
            return value
        if self.kind == "str_list":
            if isinstance(value, str):
                value = [v for v in value.split(",") if v]
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                raise ConfigKeyError(path, f"expected a list of strings, got {value!r}")
            if self.choices:
                for v in value:
                    if v not in self.choices:
                        raise ConfigKeyError(path, f"entry {v!r} not in {list(self.choices)}")
            return list(value)
        raise AssertionError(f"unknown field kind {self.kind}")


class Group:
    """Nested object; missing groups materialize their defaults unless nullable."""

    def __init__(self, schema: Dict[str, Any], required: bool = False, nullable: bool = False):
        self.schema = schema
        self.required = required
        self.nullable = nullable


def _validate(doc: dict, schema: Dict[str, Any], path: str = "") -> dict:
    if not isinstance(doc, dict):
        raise ConfigKeyError(path or "<root>", f"expected an object, got {doc!r}")
    for key in doc:
        if key not in schema:
            raise ConfigKeyError(f"{path}{key}", "unknown key")
    out: dict = {}
    for key, spec in schema.items():
        here = f"{path}{key}"
        present = key in doc and doc[key] is not None
        if isinstance(spec, Group):
            if not present:
                if spec.required:
                    raise ConfigKeyError(here, "missing required section")
                out[key] = None if spec.nullable else _validate({}, spec.schema, here + ".")
            else:
                out[key] = _validate(doc[key], spec.schema, here + ".")
        else:
            if key not in doc:
                if spec.required:
                    raise ConfigKeyError(here, "missing required key")
                out[key] = spec.default
            else:
                out[key] = spec.coerce(doc[key], here)
    return out


def _damping_schema():
    return {"amplitude": Field("float", default=0.0), "decay": Field("float", default=2.0)}


def _potential_schema():
    return {"amplitude": Field("float", default=0.0), "decay": Field("float", default=3.0)}


_SYSTEM = {
    "kind": Field("str", required=True, choices=("SS", "GG", "SG")),
    "n": Field("int", required=True),
    "p": Field("float", required=True),
    "q": Field("float", required=True),
    "epsilon": Field("float", default=1.0),
    "data_radius": Field("float", default=1.0),
    "damping1": Group(_damping_schema()),
    "damping2": Group(_damping_schema()),
    "potential1": Group(_potential_schema(), nullable=True),
    "potential2": Group(_potential_schema(), nullable=True),
}

_DATA = {
    "amplitude": Field("float", default=1.0),
    "radius": Field("float", default=1.0),
    "smoothness": Field("int", default=4),
    "which": Field("str_list", default=["u0", "u1", "v0", "v1"],
                   choices=("u0", "u1", "v0", "v1")),
}

_SCHEMAS: Dict[str, Dict[str, Any]] = {
    "exponents": {
        "kind": Field("str", required=True, choices=("SS", "GG", "SG")),
        "n": Field("int", required=True),
        "p": Field("float", required=True),
        "q": Field("float", required=True),
        "tie_tolerance": Field("float", default=1e-9),
    },
    "aux": {
        "op": Field("str", required=True, choices=("phi0", "phi_lambda", "psi", "b")),
        "n": Field("int", default=3),
        "r_max": Field("float", default=20.0),
        "dr": Field("float", default=0.01),
        "lambda": Field("float", default=1.0),
        "damping": Group(_damping_schema()),
        "potential": Group(_potential_schema(), nullable=True),
        "a": Field("float", default=1.0),
        "t": Field("float", default=1.0),
        "r": Field("float", default=0.0),
        "quad_nodes": Field("int", default=64),
    },
    "solve": {
        "system": Group(_SYSTEM, required=True),
        "data": Group(_DATA),
        "grid": Group({
            "dr": Field("float", default=0.02),
            "cfl": Field("float", default=0.5),
            "t_max": Field("float", required=True),
        }, required=True),
        "threshold": Field("float", default=1e6),
        "snapshot_stride": Field("int", default=20),
        "linear_mode": Field("bool", default=False),
    },
    "sweep": {
        "system": Group(_SYSTEM, required=True),
        "data": Group(_DATA),
        "ladder": Group({
            "eps_min": Field("float", required=True),
            "eps_max": Field("float", required=True),
            "count": Field("int", required=True),
        }, required=True),
        "grid": Group({
            "dr": Field("float", default=0.02),
            "cfl": Field("float", default=0.5),
        }),
        "safety_factor": Field("float", default=4.0),
        "initial_t_cap": Field("float", default=60.0),
        "threshold": Field("float", default=1e6),
        "t_max_cap": Field("float", default=None, nullable=True),
        "refinement_guard": Field("bool", default=True),
        "slope_tolerance": Field("float", default=0.2),
    },
    "lemma": {
        "p1": Field("float", required=True),
        "p2": Field("float", required=True),
        "K1": Field("float", default=1.0),
        "K2": Field("float", default=1.0),
        "t0": Field("float", default=3.0),
        "phi0_init": Field("float", default=0.0),
        "delta_min": Field("float", default=0.05),
        "delta_max": Field("float", default=0.5),
        "delta_count": Field("int", default=7),
        "t_cap": Field("float", default=1e260),
    },
    "report": {
        "mode": Field("str", required=True, choices=("fit", "compare")),
        "sweep": Field("str", default=None, nullable=True),
        "sweep_a": Field("str", default=None, nullable=True),
        "sweep_b": Field("str", default=None, nullable=True),
        "slope_tolerance": Field("float", default=0.1),
        "predicted_exponent": Field("float", default=None, nullable=True),
    },
}

_COMMON = {
    "command": Field("str", required=True, choices=_COMMANDS),
    "out": Field("str", default=None, nullable=True),
    "emit": Field("str_list", default=["csv", "json"], choices=_EMIT_CHOICES),
    "threads": Field("int", default=1),
}


@dataclass(frozen=True)
class RunPlan:
    """Fully validated command, payload with all defaults materialized, and emit policy."""

    command: str
    payload: dict
    out_dir: str
    emit: Tuple[str, ...]
    threads: int

    def to_config(self) -> dict:
        doc = {"command": self.command, "out": self.out_dir,
               "emit": list(self.emit), "threads": self.threads}
        doc.update(self.payload)
        return doc


def parse_config(text: str) -> RunPlan:
    """Validate a JSON config document into a RunPlan with defaults recorded."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigKeyError("<document>", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigKeyError("<document>", "top level must be an object")
    command = doc.get("command")
    if command not in _COMMANDS:
        raise ConfigKeyError("command", f"must be one of {list(_COMMANDS)}, got {command!r}")
    schema = dict(_COMMON)
    schema.update(_SCHEMAS[command])
    resolved = _validate(doc, schema)
    out_dir = resolved.pop("out") or os.environ.get(OUTPUT_ENV, "./out")
    emit = tuple(resolved.pop("emit"))
    threads = resolved.pop("threads")
    if threads < 1:
        raise ConfigKeyError("threads", "must be >= 1")
    resolved.pop("command")
    return RunPlan(command=command, payload=resolved, out_dir=out_dir,
                   emit=emit, threads=threads)


# ---------------------------------------------------------------------------
# payload builders
# ---------------------------------------------------------------------------

def _profile_from(payload: Optional[dict], kind: str) -> Optional[CoefficientProfile]:
    if payload is None:
        return None
    maker = damping_profile if kind == "damping" else potential_profile
    return maker(payload["amplitude"], payload["decay"])


def _system_from(payload: dict) -> SystemSpec:
    return SystemSpec(
        kind=payload["kind"], n=payload["n"],
        pq=ExponentPair(payload["p"], payload["q"]),
        damping1=_profile_from(payload["damping1"], "damping"),
        damping2=_profile_from(payload["damping2"], "damping"),
        potential1=_profile_from(payload["potential1"], "potential"),
        potential2=_profile_from(payload["potential2"], "potential"),
        epsilon=payload["epsilon"], data_radius=payload["data_radius"],
    )


def _data_from(payload: dict):
    return make_initial_data(payload["amplitude"], payload["radius"],
                             payload["smoothness"], which=tuple(payload["which"]))


# ---------------------------------------------------------------------------
# artifact plumbing
# ---------------------------------------------------------------------------

class _Emitter:
    def __init__(self, plan: RunPlan):
        self.plan = plan
        self.dir = plan.out_dir
        self.artifacts: Dict[str, str] = {}
        try:
            os.makedirs(self.dir, exist_ok=True)
            probe = os.path.join(self.dir, ".write-probe")
            with open(probe, "w") as fh:
                fh.write("")
            os.remove(probe)
        except OSError as exc:
            raise ArtifactIOError(f"output directory {self.dir!r} is not writable: {exc}") from exc

    def path(self, name: str) -> str:
        return os.path.join(self.dir, name)

    def _register(self, name: str) -> None:
        with open(self.path(name), "rb") as fh:
            self.artifacts[name] = hashlib.sha256(fh.read()).hexdigest()

    def write_text(self, name: str, text: str) -> None:
        try:
            with open(self.path(name), "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise ArtifactIOError(f"cannot write {name}: {exc}") from exc
        self._register(name)

    def write_json(self, name: str, doc: dict) -> None:
        self.write_text(name, json.dumps(doc, sort_keys=True, indent=2) + "\n")

    def finalize(self, started: float) -> None:
        manifest = {"plan": self.plan.to_config(), "version": __version__,
                    "artifacts": dict(sorted(self.artifacts.items()))}
        self.write_text("manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n")
        meta = {"wall_clock_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                "elapsed_seconds": time.time() - started}
        with open(self.path("meta.json"), "w") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _run_exponents(plan: RunPlan, emitter: _Emitter) -> None:
    p = plan.payload
    gap = critical_gap(p["kind"], p["n"], (p["p"], p["q"]))
    pred = lifespan_prediction(p["kind"], p["n"], (p["p"], p["q"]), p["tie_tolerance"])
    print(f"coupling {p['kind']}  n = {p['n']}  p = {p['p']}  q = {p['q']}")
    print(f"critical gap  = {gap.value:.6g}  (branch {gap.branch}; f1 = {gap.f1:.6g}, f2 = {gap.f2:.6g})")
    if pred.regime == "power_law":
        print(f"prediction    = power law, T ~ eps^(-{pred.power_exponent:.6g})")
    elif pred.regime == "exponential":
        print(f"prediction    = exponential, T ~ exp(eps^(-{pred.exp_rate:.6g}))")
    else:
        print("prediction    = outside the proved blow-up region")
    print(f"case          = {pred.case_label}")
    doc = {
        "kind": p["kind"], "n": p["n"], "p": p["p"], "q": p["q"],
        "gap": {"value": gap.value, "branch": gap.branch, "f1": gap.f1, "f2": gap.f2},
        "prediction": {"regime": pred.regime, "power_exponent": pred.power_exponent,
                       "exp_rate": pred.exp_rate, "case_label": pred.case_label},
    }
    if "json" in plan.emit:
        emitter.write_json("exponents.json", doc)
    if "csv" in plan.emit:
        header = "kind,n,p,q,gap,branch,regime,power_exponent,exp_rate,case_label"
        row = (f"{p['kind']},{p['n']},{p['p']!r},{p['q']!r},{gap.value!r},{gap.branch},"
               f"{pred.regime},{pred.power_exponent!r},{pred.exp_rate!r},{pred.case_label}")
        emitter.write_text("exponents.csv", header + "\n" + row + "\n")


def _run_aux(plan: RunPlan, emitter: _Emitter) -> None:
    p = plan.payload
    damping = _profile_from(p["damping"], "damping")
    potential = _profile_from(p["potential"], "potential")
    op = p["op"]
    if op == "b":
        value = eval_b(p["a"], damping, p["n"], p["t"], p["r"],
                       quad_nodes=p["quad_nodes"], dr=p["dr"])
        doubled = eval_b(p["a"], damping, p["n"], p["t"], p["r"],
                         quad_nodes=2 * p["quad_nodes"], dr=p["dr"])
        rel = abs(value - doubled) / max(abs(doubled), 1e-300)
        print(f"b_{p['a']}(t={p['t']}, r={p['r']}) = {value!r}  (node-doubling rel. diff {rel:.2e})")
        if "json" in plan.emit:
            emitter.write_json("b_value.json", {
                "a": p["a"], "t": p["t"], "r": p["r"], "n": p["n"],
                "quad_nodes": p["quad_nodes"], "value": value,
                "node_doubling_rel_diff": rel,
            })
        return
    if op == "phi0":
        pot = potential if potential is not None else potential_profile(0.0)
        table = solve_phi0(pot, p["n"], p["r_max"], p["dr"])
        report = phi0_report(table, pot)
    elif op == "phi_lambda":
        table = solve_mode("phi_lambda", damping, lam=p["lambda"],
                           n=p["n"], r_max=p["r_max"], dr=p["dr"])
        report = mode_bounds_report(table, p["lambda"])
    else:
        table = solve_mode("psi", damping, potential, n=p["n"], r_max=p["r_max"], dr=p["dr"])
        report = psi_asymptote_report(table)
    print(f"{op}: table of {len(table.values)} nodes on [0, {table.r_max}]")
    for key, value in report.items():
        print(f"  {key} = {value}")
    if "csv" in plan.emit:
        table.to_csv(emitter.path("table.csv"))
        emitter._register("table.csv")
    if "json" in plan.emit:
        emitter.write_json("validation.json", report)


def _run_solve(plan: RunPlan, emitter: _Emitter) -> None:
    p = plan.payload
    system = _system_from(p["system"])
    data = _data_from(p["data"])
    grid = GridSpec.build(p["grid"]["dr"], t_max=p["grid"]["t_max"],
                          data_radius=system.data_radius, cfl=p["grid"]["cfl"])
    run = evolve(system, data, grid, threshold=p["threshold"],
                 snapshot_stride=p["snapshot_stride"], linear_mode=p["linear_mode"])
    if run.blowup.detected:
        print(f"blow-up detected: t_blow = {run.blowup.t_blow} (trigger {run.blowup.trigger}, "
              f"secondary {run.blowup.t_secondary})")
    else:
        print(f"no blow-up by t_max = {grid.t_max} ({run.steps} steps)")
    if "csv" in plan.emit:
        run.export_snapshots_csv(emitter.path("snapshots.csv"))
        emitter._register("snapshots.csv")
    if "json" in plan.emit:
        emitter.write_json("run_manifest.json", run.manifest())


def _sweep_spec_from(plan: RunPlan) -> SweepSpec:
    p = plan.payload
    return SweepSpec(
        base=_system_from(p["system"]), data=_data_from(p["data"]),
        eps_min=p["ladder"]["eps_min"], eps_max=p["ladder"]["eps_max"],
        count=p["ladder"]["count"], dr=p["grid"]["dr"], cfl=p["grid"]["cfl"],
        safety_factor=p["safety_factor"], initial_t_cap=p["initial_t_cap"],
        threshold=p["threshold"], parallel_width=plan.threads,
        t_max_cap=p["t_max_cap"], refinement_guard=p["refinement_guard"],
    )


def _run_sweep_cmd(plan: RunPlan, emitter: _Emitter) -> None:
    p = plan.payload
    spec = _sweep_spec_from(plan)
    result = run_sweep(spec)
    pred = lifespan_prediction(spec.base.kind, spec.base.n, spec.base.pq)
    fit = fit_scaling(list(zip(*result.points())), predicted_slope=pred.power_exponent,
                      slope_rtol=p["slope_tolerance"])
    verdict = upper_bound_check(result, pred)
    print(f"sweep done: {len(result.records)} points, "
          f"{sum(rec.censored for rec in result.records)} censored, resolved = {result.resolved}")
    print(f"fitted slope = {fit.slope:.4f} vs predicted {pred.power_exponent:.4f} "
          f"(match = {fit.slope_match}); compensated ratio = {verdict.compensated_ratio:.3f}")
    if "csv" in plan.emit:
        result.export_csv(emitter.path("sweep.csv"))
        emitter._register("sweep.csv")
    if "json" in plan.emit:
        write_sweep_manifest(emitter.path("sweep_manifest.json"), spec, result, fit, verdict)
        emitter._register("sweep_manifest.json")
    if "svg" in plan.emit:
        eps, T = result.points()
        emitter.write_text("sweep.svg", scaling_plot_svg(
            eps, T, fit.slope, fit.intercept, pred.power_exponent,
            title=f"{spec.base.kind} lifespan scaling"))


def _run_lemma(plan: RunPlan, emitter: _Emitter) -> None:
    p = plan.payload
    params = LemmaParams(p["p1"], p["p2"], p["delta_max"], p["K1"], p["K2"],
                         p["t0"], p["phi0_init"])
    deltas = np.geomspace(p["delta_min"], p["delta_max"], p["delta_count"])
    rows = []
    for d in deltas:
        res = integrate_extremal(params.replace_delta(float(d)), p["t_cap"])
        if res.censored:
            raise InsufficientDataError(f"delta = {d:.4g} censored at t_cap = {p['t_cap']:.3g}")
        rows.append((float(d), res))
    fit = fit_lemma_scaling(deltas, params, t_cap=p["t_cap"])
    print(f"scaling exponent (p1-1)/(p1-p2+1) = {fit.theoretical_exponent:.6g}; "
          f"K3 estimate = {fit.k3_estimate:.4f}; r^2 = {fit.r_squared:.6f}")
    if "csv" in plan.emit:
        lines = ["delta,t_blow,ln_t_blow,t_switch"]
        for d, res in rows:
            lines.append(f"{d!r},{res.t_blow!r},{res.ln_t_blow!r},{res.t_switch!r}")
        emitter.write_text("lemma.csv", "\n".join(lines) + "\n")
    if "json" in plan.emit:
        emitter.write_json("lemma_fit.json", fit.to_dict())


def _run_report(plan: RunPlan, emitter: _Emitter) -> None:
    p = plan.payload
    if p["mode"] == "fit":
        if not p["sweep"]:
            raise ConfigKeyError("sweep", "fit mode needs a sweep manifest path")
        try:
            result = load_sweep_manifest(p["sweep"])
        except OSError as exc:
            raise ArtifactIOError(f"cannot read sweep manifest: {exc}") from exc
        system = result.spec_dict["system"]
        pred = lifespan_prediction(system["kind"], system["n"], (system["p"], system["q"]))
        fit = fit_scaling(list(zip(*result.points())), predicted_slope=pred.power_exponent)
        verdict = upper_bound_check(result, pred)
        doc = {"fit": fit.to_dict(), "upper_bound": verdict.to_dict(),
               "note": "slope agreement is a consistency check, not a theorem verification"}
        print(f"fit slope = {fit.slope:.4f} (predicted {pred.power_exponent:.4f}); "
              f"upper-bound verdict = {verdict.passed}")
        if "json" in plan.emit:
            emitter.write_json("report.json", doc)
        if "svg" in plan.emit:
            eps, T = result.points()
            emitter.write_text("report.svg", scaling_plot_svg(
                eps, T, fit.slope, fit.intercept, pred.power_exponent))
    else:
        if not (p["sweep_a"] and p["sweep_b"]):
            raise ConfigKeyError("sweep_a", "compare mode needs sweep_a and sweep_b paths")
        try:
            a = load_sweep_manifest(p["sweep_a"])
            b = load_sweep_manifest(p["sweep_b"])
        except OSError as exc:
            raise ArtifactIOError(f"cannot read sweep manifest: {exc}") from exc
        comparison = damping_effect_report(a, b, slope_tol=p["slope_tolerance"])
        print(f"slope difference = {comparison.slope_difference:.4f} "
              f"(consistent = {comparison.consistent})")
        if "json" in plan.emit:
            emitter.write_json("report.json", comparison.to_dict())


_RUNNERS = {
    "exponents": _run_exponents,
    "aux": _run_aux,
    "solve": _run_solve,
    "sweep": _run_sweep_cmd,
    "lemma": _run_lemma,
    "report": _run_report,
}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ArtifactIOError):
        return EXIT_IO
    if isinstance(exc, UnsupportedRegimeError):
        return EXIT_REGIME
    if isinstance(exc, SweepFailedError):
        return EXIT_SWEEP
    if isinstance(exc, (NumericalFailureError, InsufficientDataError)):
        return EXIT_NUMERICAL
    if isinstance(exc, SemiwaveError):
        return EXIT_CONFIG
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc


def execute(plan: RunPlan) -> int:
    """Dispatch a validated plan; returns the process exit code."""
    started = time.time()
    try:
        emitter = _Emitter(plan)
        _RUNNERS[plan.command](plan, emitter)
        emitter.finalize(started)
    except BaseException as exc:  # noqa: BLE001 - mapped onto exit codes below
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        code = exit_code_for(exc)
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return code
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _apply_override(doc: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigKeyError("<override>", f"expected path=value, got {assignment!r}")
    path, raw = assignment.split("=", 1)
    keys = path.split(".")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = doc
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigKeyError(path, "override path crosses a non-object value")
    node[keys[-1]] = value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semiwave",
        description="Blow-up and lifespan laboratory for weakly coupled semilinear wave systems",
    )
    parser.add_argument("command", choices=_COMMANDS)
    parser.add_argument("--config", help="path to a JSON configuration document")
    parser.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./out)")
    parser.add_argument("--emit", help="comma-separated artifact kinds: csv,json,svg")
    parser.add_argument("--threads", type=int, help="worker pool width for sweeps")
    parser.add_argument("--set", action="append", default=[], metavar="PATH=VALUE",
                        help="override any config leaf, e.g. --set system.p=1.5")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            try:
                with open(args.config) as fh:
                    doc = json.load(fh)
            except OSError as exc:
                raise ArtifactIOError(f"cannot read config {args.config!r}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigKeyError("<document>", f"invalid JSON: {exc}") from exc
        else:
            doc = {}
        doc["command"] = args.command
        if args.out:
            doc["out"] = args.out
        if args.emit:
            doc["emit"] = args.emit
        if args.threads:
            doc["threads"] = args.threads
        for assignment in args.set:
            _apply_override(doc, assignment)
        plan = parse_config(json.dumps(doc))
    except BaseException as exc:
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        code = exit_code_for(exc)
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return code
    return execute(plan)


if __name__ == "__main__":
    sys.exit(main())
