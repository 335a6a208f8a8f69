"""Epsilon-ladder lifespan sweeps, scaling fits and consistency verdicts.

A sweep runs the solver over a geometric ladder of data sizes epsilon,
extracts the numerical blow-up times, fits T(eps) ~ C eps^(-slope) in log-log
coordinates and compares the slope against the critical-gap prediction.  Only
power-law regimes are swept: critical lifespans grow like exp(eps^(-a)) and
are astronomically beyond desk scale, so they are covered by the classifier
and the critical-case ODE machinery instead.

Slope agreement here is a consistency check of the predicted upper bound
T ~< eps^(-1/gap), not a proof: the theory proves upper bounds only, and the
damping-insensitivity comparison likewise probes a conjecture about the
critical curve, so reports label both accordingly.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    IncomparableSweepsError,
    InsufficientDataError,
    InvalidParameterError,
    SweepFailedError,
    UnsupportedRegimeError,
)
from .exponents import POWER_LAW, LifespanPrediction, lifespan_prediction
from .radial_solver import GridSpec, InitialData, SystemSpec, evolve

__all__ = [
    "SweepSpec",
    "SweepRecord",
    "SweepResult",
    "FitResult",
    "run_sweep",
    "fit_scaling",
    "upper_bound_check",
    "damping_effect_report",
]


@dataclass(frozen=True)
class SweepSpec:
    """Ladder and grid policy for one lifespan sweep (the base epsilon is ignored).

    Per-epsilon time caps follow safety_factor times the predicted power law,
    with the constant bootstrapped from the largest epsilon; the bootstrap run
    itself uses ``initial_t_cap``.  ``t_max_cap``, when set, is a hard ceiling
    on every per-epsilon cap (a resource guard; it is also how censoring is
    exercised in tests without violating the safety_factor floor).
    """

    base: SystemSpec
    data: InitialData
    eps_min: float
    eps_max: float
    count: int
    dr: float
    cfl: float = 0.5
    safety_factor: float = 4.0
    initial_t_cap: float = 60.0
    threshold: float = 1e6
    parallel_width: int = 1
    snapshot_stride: int = 10**6
    t_max_cap: Optional[float] = None
    refinement_guard: bool = True

    def __post_init__(self):
        if not (0.0 < self.eps_min < self.eps_max):
            raise InvalidParameterError("need 0 < eps_min < eps_max")
        if self.count < 5:
            raise InvalidParameterError("a sweep needs at least 5 ladder points")
        if self.safety_factor < 2.0:
            raise InvalidParameterError("safety_factor must be at least 2")
        if not (0.0 < self.cfl <= 0.5):
            raise InvalidParameterError("cfl must lie in (0, 0.5]")
        if self.parallel_width < 1:
            raise InvalidParameterError("parallel_width must be >= 1")

    def ladder(self) -> np.ndarray:
        """Geometric ladder, largest epsilon first."""
        return np.geomspace(self.eps_max, self.eps_min, self.count)

    def to_dict(self) -> dict:
        return {
            "system": self.base.to_dict(),
            "data": self.data.to_dict(),
            "eps_min": self.eps_min, "eps_max": self.eps_max, "count": self.count,
            "dr": self.dr, "cfl": self.cfl, "safety_factor": self.safety_factor,
            "initial_t_cap": self.initial_t_cap, "threshold": self.threshold,
            "snapshot_stride": self.snapshot_stride, "t_max_cap": self.t_max_cap,
            "refinement_guard": self.refinement_guard,
        }


@dataclass(frozen=True)
class SweepRecord:
    epsilon: float
    t_blow: Optional[float]
    t_blow_secondary: Optional[float]
    censored: bool
    t_cap: float
    steps: int

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "t_blow": self.t_blow,
                "t_blow_secondary": self.t_blow_secondary, "censored": self.censored,
                "t_cap": self.t_cap, "steps": self.steps}

    @classmethod
    def from_dict(cls, d: dict) -> "SweepRecord":
        return cls(epsilon=d["epsilon"], t_blow=d["t_blow"],
                   t_blow_secondary=d["t_blow_secondary"], censored=d["censored"],
                   t_cap=d["t_cap"], steps=int(d["steps"]))


@dataclass
class SweepResult:
    """All ladder records plus the prediction and the grid-resolution verdict.

    Content is deterministic and independent of the worker pool width;
    wall-clock metadata never enters this object.
    """

    spec_dict: dict
    prediction_exponent: float
    records: List[SweepRecord]
    resolved: bool
    refinement_shift: Optional[float]

    def uncensored(self) -> List[SweepRecord]:
        return [rec for rec in self.records if not rec.censored]

    def points(self) -> Tuple[np.ndarray, np.ndarray]:
        recs = self.uncensored()
        return (np.array([r.epsilon for r in recs]), np.array([r.t_blow for r in recs]))

    def to_dict(self) -> dict:
        return {
            "spec": self.spec_dict,
            "prediction_exponent": self.prediction_exponent,
            "records": [r.to_dict() for r in self.records],
            "resolved": self.resolved,
            "refinement_shift": self.refinement_shift,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepResult":
        return cls(
            spec_dict=d["spec"],
            prediction_exponent=d["prediction_exponent"],
            records=[SweepRecord.from_dict(r) for r in d["records"]],
            resolved=d["resolved"],
            refinement_shift=d["refinement_shift"],
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, SweepResult) and self.to_dict() == other.to_dict()

    def export_csv(self, path) -> None:
        lines = ["epsilon,t_blow,t_blow_secondary,censored"]
        for rec in self.records:
            lines.append(f"{rec.epsilon!r},{rec.t_blow!r},{rec.t_blow_secondary!r},{int(rec.censored)}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _single_run(spec: SweepSpec, eps: float, t_cap: float, dr: Optional[float] = None) -> SweepRecord:
    dr = spec.dr if dr is None else dr
    system = SystemSpec(
        kind=spec.base.kind, n=spec.base.n, pq=spec.base.pq,
        damping1=spec.base.damping1, damping2=spec.base.damping2,
        potential1=spec.base.potential1, potential2=spec.base.potential2,
        epsilon=eps, data_radius=spec.base.data_radius,
    )
    dt = spec.cfl * dr
    t_cap = max(dt * math.ceil(t_cap / dt), 4.0 * dt)
    grid = GridSpec.build(dr, t_max=t_cap, data_radius=spec.base.data_radius, cfl=spec.cfl)
    run = evolve(system, spec.data, grid, threshold=spec.threshold,
                 snapshot_stride=spec.snapshot_stride)
    return SweepRecord(
        epsilon=float(eps),
        t_blow=run.blowup.t_blow if run.blowup.detected else None,
        t_blow_secondary=run.blowup.t_secondary,
        censored=not run.blowup.detected,
        t_cap=t_cap,
        steps=run.steps,
    )


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Execute the ladder: one blow-up run per epsilon, largest epsilon first.

    The largest-epsilon run bootstraps the power-law constant used to size
    the remaining time caps; those runs then fan out over a bounded thread
    pool (aggregation is order-independent, results are schedule-independent).
    Censored points are excluded from fits with a warning; more than half the
    ladder censored aborts the sweep.
    """
    pred = lifespan_prediction(spec.base.kind, spec.base.n, spec.base.pq)
    if pred.regime != POWER_LAW:
        raise UnsupportedRegimeError(
            f"sweeps need a power-law regime, got {pred.case_label} "
            "(critical lifespans are exponential in 1/eps and are covered by the ODE machinery)"
        )
    a = pred.power_exponent
    ladder = spec.ladder()

    cap0 = spec.initial_t_cap if spec.t_max_cap is None else min(spec.initial_t_cap, spec.t_max_cap)
    first = _single_run(spec, float(ladder[0]), cap0)
    if first.censored:
        raise SweepFailedError(
            f"bootstrap run at eps = {ladder[0]:.4g} did not blow up within t = {cap0:.4g}"
        )
    constant = first.t_blow * float(ladder[0]) ** a

    def cap_for(eps: float) -> float:
        cap = spec.safety_factor * constant * eps ** (-a)
        if spec.t_max_cap is not None:
            cap = min(cap, spec.t_max_cap)
        return cap

    rest = [float(e) for e in ladder[1:]]
    if spec.parallel_width == 1:
        others = [_single_run(spec, eps, cap_for(eps)) for eps in rest]
    else:
        with ThreadPoolExecutor(max_workers=spec.parallel_width) as pool:
            others = list(pool.map(lambda eps: _single_run(spec, eps, cap_for(eps)), rest))
    records = [first] + others

    censored = [rec for rec in records if rec.censored]
    for rec in censored:
        warnings.warn(
            f"sweep point eps = {rec.epsilon:.4g} censored at t_cap = {rec.t_cap:.4g}; "
            "excluded from fits", stacklevel=2,
        )
    if len(censored) > spec.count / 2.0:
        raise SweepFailedError(
            f"{len(censored)} of {spec.count} ladder points censored; sweep failed"
        )

    resolved, shift = True, None
    if spec.refinement_guard:
        smallest = min((rec for rec in records if not rec.censored), key=lambda rec: rec.epsilon)
        fine = _single_run(spec, smallest.epsilon, smallest.t_cap, dr=spec.dr / 2.0)
        if fine.censored:
            resolved = False
        else:
            shift = abs(fine.t_blow - smallest.t_blow) / smallest.t_blow
            resolved = shift <= 0.05

    return SweepResult(
        spec_dict=spec.to_dict(),
        prediction_exponent=a,
        records=records,
        resolved=resolved,
        refinement_shift=shift,
    )


# ---------------------------------------------------------------------------
# fitting and verdicts
# ---------------------------------------------------------------------------

@dataclass
class FitResult:
    mode: str  # "power_law" | "double_log"
    slope: float
    intercept: float
    r_squared: float
    residuals: List[float]
    predicted_slope: Optional[float] = None
    slope_match: Optional[bool] = None
    slope_tolerance: Optional[float] = None
    upper_bound_consistent: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode, "slope": self.slope, "intercept": self.intercept,
            "r_squared": self.r_squared, "residuals": self.residuals,
            "predicted_slope": self.predicted_slope, "slope_match": self.slope_match,
            "slope_tolerance": self.slope_tolerance,
            "upper_bound_consistent": self.upper_bound_consistent,
        }


def fit_scaling(points: Sequence[Tuple[float, float]], mode: str = "power_law",
                predicted_slope: Optional[float] = None,
                slope_rtol: float = 0.2) -> FitResult:
    """Least-squares line through (ln 1/eps, ln T) or (ln 1/eps, ln ln T).

    The slope estimates the scaling exponent (power_law mode) or the
    exponential rate (double_log mode).  With a predicted slope the relative
    match flag is filled at tolerance ``slope_rtol``.
    """
    if mode not in ("power_law", "double_log"):
        raise InvalidParameterError(f"unknown fit mode {mode!r}")
    pts = [(float(e), float(T)) for e, T in points]
    if len(pts) < 4:
        raise InsufficientDataError(f"need at least 4 uncensored points, got {len(pts)}")
    eps = np.array([p[0] for p in pts])
    T = np.array([p[1] for p in pts])
    if np.any(eps <= 0.0) or np.any(T <= 0.0):
        raise InvalidParameterError("points must have positive epsilon and lifespan")
    if mode == "double_log" and np.any(T <= 1.0):
        raise InvalidParameterError("double_log mode needs all lifespans above 1")

    x = np.log(1.0 / eps)
    y = np.log(T) if mode == "power_law" else np.log(np.log(T))
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    residuals = y - fitted
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)

    match = None
    if predicted_slope is not None:
        match = bool(abs(slope - predicted_slope) <= slope_rtol * abs(predicted_slope))
    return FitResult(
        mode=mode, slope=float(slope), intercept=float(intercept),
        r_squared=float(min(r_squared, 1.0)), residuals=[float(v) for v in residuals],
        predicted_slope=predicted_slope, slope_match=match, slope_tolerance=slope_rtol,
    )


@dataclass
class UpperBoundVerdict:
    compensated: List[float]
    compensated_ratio: float
    fitted_slope: float
    predicted_exponent: float
    passed: bool
    note: str

    def to_dict(self) -> dict:
        return {"compensated": self.compensated, "compensated_ratio": self.compensated_ratio,
                "fitted_slope": self.fitted_slope, "predicted_exponent": self.predicted_exponent,
                "passed": self.passed, "note": self.note}


def upper_bound_check(sweep: SweepResult, prediction: LifespanPrediction) -> UpperBoundVerdict:
    """Compensated-lifespan verdict: s(eps) = t_blow * eps^exponent stays bounded.

    Passes when max(s)/min(s) <= 3 over the ladder and the fitted slope does
    not exceed the predicted exponent by more than 0.15.  This is consistency
    with the proved upper bound plus approximate sharpness, not a proof.
    """
    if prediction.regime != POWER_LAW:
        raise UnsupportedRegimeError("upper_bound_check needs a power-law prediction")
    eps, T = sweep.points()
    if len(eps) < 4:
        raise InsufficientDataError("too many censored points for an upper-bound verdict")
    a = prediction.power_exponent
    comp = T * eps**a
    ratio = float(comp.max() / comp.min())
    fit = fit_scaling(list(zip(eps, T)), "power_law")
    passed = ratio <= 3.0 and fit.slope <= a + 0.15
    return UpperBoundVerdict(
        compensated=[float(v) for v in comp],
        compensated_ratio=ratio,
        fitted_slope=fit.slope,
        predicted_exponent=a,
        passed=bool(passed),
        note="consistency check against the proved upper bound; not a theorem verification",
    )


@dataclass
class DampingComparison:
    slope_a: float
    slope_b: float
    slope_difference: float
    lifespan_ratios: List[float]
    consistent: bool
    note: str

    def to_dict(self) -> dict:
        return {"slope_a": self.slope_a, "slope_b": self.slope_b,
                "slope_difference": self.slope_difference,
                "lifespan_ratios": self.lifespan_ratios,
                "consistent": self.consistent, "note": self.note}


def damping_effect_report(sweep_a: SweepResult, sweep_b: SweepResult,
                          slope_tol: float = 0.1) -> DampingComparison:
    """Compare two sweeps that differ only in their damping/potential profiles.

    The consistency flag passes when the fitted slopes differ by less than
    ``slope_tol``, supporting (not proving) the thesis that admissible
    scattering coefficients leave the critical curve unchanged.
    """
    sys_a, sys_b = sweep_a.spec_dict["system"], sweep_b.spec_dict["system"]
    for key in ("kind", "n", "p", "q", "epsilon", "data_radius"):
        if sys_a.get(key) != sys_b.get(key):
            raise IncomparableSweepsError(f"sweeps differ in system field {key!r}")
    eps_a = [rec.epsilon for rec in sweep_a.records]
    eps_b = [rec.epsilon for rec in sweep_b.records]
    if len(eps_a) != len(eps_b) or any(abs(x - y) > 1e-12 for x, y in zip(eps_a, eps_b)):
        raise IncomparableSweepsError("sweeps use different epsilon ladders")

    fit_a = fit_scaling(list(zip(*sweep_a.points())))
    fit_b = fit_scaling(list(zip(*sweep_b.points())))
    by_eps_b = {rec.epsilon: rec for rec in sweep_b.records}
    ratios = []
    for rec in sweep_a.records:
        other = by_eps_b[rec.epsilon]
        if rec.censored or other.censored:
            ratios.append(float("nan"))
        else:
            ratios.append(other.t_blow / rec.t_blow)
    diff = abs(fit_a.slope - fit_b.slope)
    return DampingComparison(
        slope_a=fit_a.slope, slope_b=fit_b.slope, slope_difference=float(diff),
        lifespan_ratios=ratios, consistent=bool(diff < slope_tol),
        note="slope agreement is a consistency check of a conjecture, not a theorem verification",
    )


def write_sweep_manifest(path, spec: SweepSpec, result: SweepResult,
                         fit: Optional[FitResult] = None,
                         verdict: Optional[UpperBoundVerdict] = None) -> None:
    doc = {"sweep": result.to_dict()}
    if fit is not None:
        doc["fit"] = fit.to_dict()
    if verdict is not None:
        doc["upper_bound"] = verdict.to_dict()
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_sweep_manifest(path) -> SweepResult:
    with open(path) as fh:
        doc = json.load(fh)
    return SweepResult.from_dict(doc["sweep"])
