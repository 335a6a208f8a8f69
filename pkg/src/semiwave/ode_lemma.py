"""Critical-case machinery: differential-inequality blow-up and the Y functional.

The blow-up bound behind every critical lifespan case rests on a pair of
differential inequalities for a nonnegative scalar phi(t), t > t0 > 2:

    delta        <= K1 t phi'(t),
    phi(t)^p1    <= K2 t (ln t)^(p2 - 1) phi'(t),      p2 < p1 + 1,

which force phi to diverge by T <= exp(K3 delta^(-(p1-1)/(p1-p2+1))).  The
canonical witness integrated here is the extremal trajectory that saturates
both inequalities,

    phi'(t) = max( delta / (K1 t),  phi^p1 / (K2 t (ln t)^(p2-1)) ),

whose divergence time realises the bound's scaling in delta.  Because that
time is exponentially large in 1/delta, the integration runs in logarithmic
time s = ln t, where the trajectory becomes ds-uniform:

    dphi/ds = max( delta / K1,  phi^p1 / (K2 s^(p2-1)) ),   s > ln t0.

``fit_lemma_scaling`` recovers the constant K3 by regressing ln t_blow
against delta^(-(p1-1)/(p1-p2+1)) over a delta ladder.

The companion ``y_functional`` computes Y[F](M) = integral_1^M F(sigma)/sigma
dsigma together with two checks used throughout the critical cases: the
derivative identity M Y'(M) = F(M), and the bound Y(M) <= ln 2 * (the same
payload integrated against the plateau cutoff at scale M) when F is built
from the tail cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import (
    HypothesisViolatedError,
    InsufficientDataError,
    InvalidGridError,
    InvalidParameterError,
)

__all__ = [
    "LemmaParams",
    "ExtremalResult",
    "integrate_extremal",
    "LemmaFit",
    "fit_lemma_scaling",
    "YTable",
    "y_functional",
]

DIVERGENCE_THRESHOLD = 1e12


@dataclass(frozen=True)
class LemmaParams:
    """Parameters of the differential-inequality pair; requires p2 < p1 + 1, t0 > 2."""

    p1: float
    p2: float
    delta: float
    K1: float = 1.0
    K2: float = 1.0
    t0: float = 3.0
    phi0_init: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2"):
            if not (getattr(self, name) > 1.0):
                raise InvalidParameterError(f"{name} must exceed 1")
        if self.p2 >= self.p1 + 1.0:
            raise HypothesisViolatedError(
                f"need p2 < p1 + 1, got p1 = {self.p1}, p2 = {self.p2}"
            )
        if not (self.delta > 0.0):
            raise InvalidParameterError("delta must be positive")
        if not (self.K1 > 0.0 and self.K2 > 0.0):
            raise InvalidParameterError("K1 and K2 must be positive")
        if not (self.t0 > 2.0):
            raise InvalidParameterError(f"t0 must exceed 2, got {self.t0}")
        if self.phi0_init < 0.0:
            raise InvalidParameterError("phi0_init must be >= 0")

    @property
    def scaling_exponent(self) -> float:
        """The exponent (p1 - 1)/(p1 - p2 + 1) governing ln T ~ delta^(-exponent)."""
        return (self.p1 - 1.0) / (self.p1 - self.p2 + 1.0)

    def replace_delta(self, delta: float) -> "LemmaParams":
        return LemmaParams(self.p1, self.p2, delta, self.K1, self.K2, self.t0, self.phi0_init)


@dataclass
class ExtremalResult:
    censored: bool
    t_blow: Optional[float]
    ln_t_blow: Optional[float]  # exact even when t_blow overflows a double
    t_switch: Optional[float]  # first time the superlinear branch dominates
    steps: int

    def to_dict(self) -> dict:
        return {"censored": self.censored, "t_blow": self.t_blow,
                "ln_t_blow": self.ln_t_blow, "t_switch": self.t_switch, "steps": self.steps}


def _rhs(params: LemmaParams, s: float, phi: float) -> float:
    linear = params.delta / params.K1
    if phi <= 0.0:
        return linear
    # trial RK4 stages may overshoot far beyond the divergence threshold;
    # clamping there leaves the threshold-crossing time untouched
    phi = min(phi, 10.0 * DIVERGENCE_THRESHOLD)
    super_branch = phi**params.p1 / (params.K2 * s ** (params.p2 - 1.0))
    return max(linear, super_branch)


def integrate_extremal(params: LemmaParams, t_cap: float, base_step: float = 0.01,
                       max_steps: int = 5_000_000) -> ExtremalResult:
    """Integrate the extremal trajectory until divergence or the time cap.

    One-step RK4 in s = ln t with adaptive halving whenever phi would grow by
    more than 10 percent in a step (the final phase is stiff); divergence is
    declared at phi >= 1e12, a threshold the blow-up time is insensitive to
    at that growth rate.  Returns the divergence time, its exact logarithm,
    and the first branch-switch time.
    """
    if not (t_cap > params.t0):
        raise InvalidParameterError("t_cap must exceed t0")
    s = math.log(params.t0)
    s_cap = math.log(t_cap)
    phi = params.phi0_init
    h0 = base_step
    t_switch = None
    steps = 0

    while s < s_cap:
        if steps >= max_steps:
            return ExtremalResult(True, None, None, t_switch, steps)
        if t_switch is None and phi > 0.0:
            if phi**params.p1 / (params.K2 * s ** (params.p2 - 1.0)) >= params.delta / params.K1:
                t_switch = math.exp(s)

        h = min(h0, s_cap - s)
        while True:
            k1 = _rhs(params, s, phi)
            k2 = _rhs(params, s + 0.5 * h, phi + 0.5 * h * k1)
            k3 = _rhs(params, s + 0.5 * h, phi + 0.5 * h * k2)
            k4 = _rhs(params, s + h, phi + h * k3)
            phi_new = phi + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            if phi_new <= 1.1 * phi + 1e-6 * (1.0 + phi) or h <= 1e-12:
                break
            h *= 0.5
        phi = phi_new
        s += h
        steps += 1
        if phi >= DIVERGENCE_THRESHOLD:
            ln_t = s
            t_blow = math.exp(ln_t) if ln_t < 700.0 else math.inf
            return ExtremalResult(False, t_blow, ln_t, t_switch, steps)
    return ExtremalResult(True, None, None, t_switch, steps)


@dataclass
class LemmaFit:
    theoretical_exponent: float
    k3_estimate: float
    intercept: float
    r_squared: float
    deltas: List[float]
    ln_t_blows: List[float]

    def to_dict(self) -> dict:
        return {"theoretical_exponent": self.theoretical_exponent,
                "k3_estimate": self.k3_estimate, "intercept": self.intercept,
                "r_squared": self.r_squared, "deltas": self.deltas,
                "ln_t_blows": self.ln_t_blows}


def fit_lemma_scaling(deltas: Sequence[float], params: LemmaParams, t_cap: float = 1e260,
                      exponent_override: Optional[float] = None) -> LemmaFit:
    """Fit ln t_blow against delta^(-exponent) over a delta ladder.

    The slope estimates the constant K3 of the lifespan bound.  The ladder
    needs at least 5 values spanning a decade, and every integration must
    reach divergence.  ``exponent_override`` exists for regression-ordering
    experiments (fitting with a wrong exponent degrades r^2).
    """
    ds = sorted(float(d) for d in deltas)
    if len(ds) < 5:
        raise InsufficientDataError("need at least 5 delta values")
    if ds[-1] / ds[0] < 10.0 - 1e-9:
        raise InsufficientDataError("delta ladder must span at least one decade")

    exponent = params.scaling_exponent if exponent_override is None else float(exponent_override)
    xs, ys = [], []
    for d in ds:
        res = integrate_extremal(params.replace_delta(d), t_cap)
        if res.censored:
            raise InsufficientDataError(f"delta = {d} censored at t_cap = {t_cap:.3g}")
        xs.append(d ** (-exponent))
        ys.append(res.ln_t_blow)
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = np.polyval([slope, intercept], xs)
    ss_res = float(np.sum((np.array(ys) - fitted) ** 2))
    ss_tot = float(np.sum((np.array(ys) - np.mean(ys)) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return LemmaFit(
        theoretical_exponent=exponent, k3_estimate=float(slope),
        intercept=float(intercept), r_squared=float(r_squared),
        deltas=ds, ln_t_blows=[float(y) for y in ys],
    )


# ---------------------------------------------------------------------------
# the Y functional
# ---------------------------------------------------------------------------

@dataclass
class YTable:
    m_grid: np.ndarray
    y_values: np.ndarray
    conjugate_power: float

    def to_dict(self) -> dict:
        return {"m_grid": self.m_grid.tolist(), "y_values": self.y_values.tolist(),
                "conjugate_power": self.conjugate_power}


def y_functional(F: Callable[[np.ndarray], np.ndarray], m_grid, conjugate_power: float,
                 eta_integral: Optional[Callable[[float], float]] = None,
                 dense_per_decade: int = 2000,
                 derivative_rtol: float = 1e-2,
                 bound_tol: float = 1e-3):
    """Y(M) = integral_1^M F(sigma) / sigma dsigma on an increasing M grid.

    The quadrature runs in x = ln(sigma) (trapezoid on a dense grid that
    includes every requested M), so a constant F integrates exactly to
    c ln M.  The report checks the derivative identity M Y'(M) = F(M) by
    centered differences in ln M, and, when ``eta_integral`` supplies the
    plateau-cutoff integral of the same payload, the bound
    Y(M) <= ln 2 * eta_integral(M) up to ``bound_tol``.
    """
    m = np.asarray(m_grid, dtype=float)
    if m.ndim != 1 or len(m) < 2 or np.any(np.diff(m) <= 0.0) or m[0] < 1.0:
        raise InvalidGridError("M grid must be increasing with entries >= 1")

    x_edges = np.log(m)
    total_decades = max(x_edges[-1] / math.log(10.0), 1e-9)
    n_dense = max(int(dense_per_decade * total_decades), 4 * len(m))
    x_dense = np.union1d(np.linspace(0.0, x_edges[-1], n_dense + 1), x_edges)
    sigma = np.exp(x_dense)
    f_vals = np.asarray(F(sigma), dtype=float)
    if f_vals.shape != sigma.shape:
        raise InvalidParameterError("F must map an array of sigma to an equally shaped array")

    # cumulative trapezoid in x = ln sigma
    increments = 0.5 * (f_vals[1:] + f_vals[:-1]) * np.diff(x_dense)
    cumulative = np.concatenate([[0.0], np.cumsum(increments)])
    y_at = np.interp(x_edges, x_dense, cumulative)
    table = YTable(m_grid=m, y_values=y_at, conjugate_power=float(conjugate_power))

    # derivative identity M Y'(M) = F(M): dY/d(ln M) vs F on interior points
    dy_dx = np.gradient(y_at, x_edges)
    f_on_grid = np.asarray(F(m), dtype=float)
    scale = np.max(np.abs(f_on_grid)) or 1.0
    deriv_err = float(np.max(np.abs(dy_dx[1:-1] - f_on_grid[1:-1])) / scale)

    report = {
        "derivative_identity_max_rel_err": deriv_err,
        "derivative_identity_passed": bool(deriv_err <= derivative_rtol),
        "monotone": bool(np.all(np.diff(y_at) >= -1e-12 * scale)),
    }
    if eta_integral is not None:
        eta_vals = np.array([float(eta_integral(M)) for M in m])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(eta_vals > 0.0, y_at / eta_vals, 0.0)
        max_ratio = float(np.max(ratios))
        report["bound_ratio_max"] = max_ratio
        report["bound_passed"] = bool(max_ratio <= math.log(2.0) * (1.0 + bound_tol))
    return table, report
