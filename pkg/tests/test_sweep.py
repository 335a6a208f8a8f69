import json
import warnings

import numpy as np
import pytest

from semiwave.auxfn import damping_profile
from semiwave.errors import (
    IncomparableSweepsError,
    InsufficientDataError,
    InvalidParameterError,
    SweepFailedError,
    UnsupportedRegimeError,
)
from semiwave.exponents import ExponentPair, lifespan_prediction
from semiwave.radial_solver import SystemSpec, make_initial_data
from semiwave.sweep import (
    FitResult,
    SweepRecord,
    SweepResult,
    SweepSpec,
    damping_effect_report,
    fit_scaling,
    load_sweep_manifest,
    run_sweep,
    upper_bound_check,
    write_sweep_manifest,
)

ZD = damping_profile(0.0)


def gg_base(p=1.3):
    return SystemSpec("GG", 3, ExponentPair(p, p), ZD, ZD, epsilon=1.0, data_radius=1.0)


def quick_spec(**kw):
    defaults = dict(base=gg_base(), data=make_initial_data(1.0, 1.0, 4),
                    eps_min=0.6, eps_max=1.0, count=5, dr=0.05,
                    initial_t_cap=40.0, refinement_guard=False)
    defaults.update(kw)
    return SweepSpec(**defaults)


def synthetic_sweep(eps, T, exponent=0.5):
    records = [SweepRecord(float(e), float(t), float(t) * 0.99, False, 100.0, 10)
               for e, t in zip(eps, T)]
    return SweepResult(spec_dict={"system": gg_base().to_dict()},
                       prediction_exponent=exponent, records=records,
                       resolved=True, refinement_shift=0.0)


class TestSweepSpec:
    def test_invariants(self):
        with pytest.raises(InvalidParameterError):
            quick_spec(count=4)
        with pytest.raises(InvalidParameterError):
            quick_spec(safety_factor=1.5)
        with pytest.raises(InvalidParameterError):
            quick_spec(eps_min=1.0, eps_max=0.5)
        with pytest.raises(InvalidParameterError):
            quick_spec(cfl=0.7)

    def test_ladder_is_geometric_descending(self):
        ladder = quick_spec(count=5).ladder()
        assert ladder[0] == pytest.approx(1.0)
        assert ladder[-1] == pytest.approx(0.6)
        ratios = ladder[1:] / ladder[:-1]
        assert np.allclose(ratios, ratios[0])


class TestRunSweep:
    def test_critical_regime_rejected(self):
        spec = quick_spec(base=gg_base(p=2.0))  # p = q = Glassey exponent: critical
        with pytest.raises(UnsupportedRegimeError):
            run_sweep(spec)

    def test_live_sweep_monotone_and_resolved(self):
        res = run_sweep(quick_spec(refinement_guard=True))
        t_blows = [rec.t_blow for rec in res.records]
        assert all(not rec.censored for rec in res.records)
        assert all(a < b for a, b in zip(t_blows, t_blows[1:]))  # eps decreasing
        assert res.resolved and res.refinement_shift is not None
        assert res.refinement_shift <= 0.05

    def test_live_sweep_slope_matches_prediction(self):
        res = run_sweep(quick_spec())
        pred = lifespan_prediction("GG", 3, (1.3, 1.3))
        fit = fit_scaling(list(zip(*res.points())), predicted_slope=pred.power_exponent)
        assert fit.slope_match
        assert fit.r_squared > 0.999
        verdict = upper_bound_check(res, pred)
        assert verdict.passed and verdict.compensated_ratio <= 3.0

    def test_censoring_flags_and_failure(self):
        spec = quick_spec(initial_t_cap=16.0, t_max_cap=16.0)
        with pytest.raises(SweepFailedError):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                run_sweep(spec)

    def test_bootstrap_failure(self):
        spec = quick_spec(initial_t_cap=2.0)
        with pytest.raises(SweepFailedError):
            run_sweep(spec)

    def test_schedule_independence(self):
        serial = run_sweep(quick_spec(parallel_width=1))
        wide = run_sweep(quick_spec(parallel_width=4))
        assert serial == wide

    def test_persistence_round_trip(self, tmp_path):
        res = run_sweep(quick_spec())
        back = SweepResult.from_dict(json.loads(json.dumps(res.to_dict())))
        assert back == res
        path = tmp_path / "sweep.json"
        write_sweep_manifest(path, quick_spec(), res)
        assert load_sweep_manifest(path) == res

    def test_csv_export(self, tmp_path):
        res = run_sweep(quick_spec())
        path = tmp_path / "sweep.csv"
        res.export_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "epsilon,t_blow,t_blow_secondary,censored"
        assert len(lines) == 1 + len(res.records)


class TestFitScaling:
    def test_exact_power_law(self):
        eps = np.geomspace(1.0, 0.1, 9)
        T = 5.0 * eps**-0.5
        fit = fit_scaling(list(zip(eps, T)))
        assert fit.slope == pytest.approx(0.5, abs=1e-12)
        assert fit.intercept == pytest.approx(np.log(5.0), abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_noisy_power_law_recovers_slope(self):
        rng = np.random.default_rng(20240817)  # fixed noise table
        eps = np.geomspace(1.0, 0.1, 10)
        noise = 1.0 + 0.03 * (2.0 * rng.random(10) - 1.0)
        T = 5.0 * eps**-0.5 * noise
        fit = fit_scaling(list(zip(eps, T)))
        assert abs(fit.slope - 0.5) < 0.05

    def test_double_log_mode(self):
        eps = np.geomspace(0.5, 0.05, 8)
        T = np.exp(2.0 * eps**-0.7)
        fit = fit_scaling(list(zip(eps, np.log(T))), "power_law")  # sanity: not what we assert
        fit2 = fit_scaling(list(zip(eps, T)), "double_log")
        assert fit2.slope == pytest.approx(0.7, abs=0.02)
        with pytest.raises(InvalidParameterError):
            fit_scaling([(0.5, 0.9), (0.4, 1.2), (0.3, 2.0), (0.2, 3.0)], "double_log")

    def test_insufficient_points(self):
        with pytest.raises(InsufficientDataError):
            fit_scaling([(1.0, 2.0), (0.5, 3.0), (0.25, 4.0)])


class TestUpperBound:
    def test_exact_compensation_passes(self):
        eps = np.geomspace(1.0, 0.2, 8)
        pred = lifespan_prediction("SS", 3, (1.5, 1.5))
        sweep = synthetic_sweep(eps, 7.0 * eps ** (-pred.power_exponent))
        verdict = upper_bound_check(sweep, pred)
        assert verdict.passed
        assert verdict.compensated_ratio == pytest.approx(1.0, abs=1e-12)

    def test_constructed_violation_fails_slope(self):
        eps = np.geomspace(1.0, 0.2, 8)
        pred = lifespan_prediction("SS", 3, (1.5, 1.5))
        sweep = synthetic_sweep(eps, 7.0 * eps ** (-(pred.power_exponent + 0.5)))
        verdict = upper_bound_check(sweep, pred)
        assert not verdict.passed

    def test_censored_sweep_rejected(self):
        eps = np.geomspace(1.0, 0.2, 8)
        pred = lifespan_prediction("SS", 3, (1.5, 1.5))
        sweep = synthetic_sweep(eps, 7.0 * eps**-1.0)
        for i in range(5):
            rec = sweep.records[i]
            sweep.records[i] = SweepRecord(rec.epsilon, None, None, True, rec.t_cap, rec.steps)
        with pytest.raises(InsufficientDataError):
            upper_bound_check(sweep, pred)


class TestDampingComparison:
    def test_identity_comparison(self):
        eps = np.geomspace(1.0, 0.3, 6)
        sweep = synthetic_sweep(eps, 4.0 * eps**-0.6)
        rep = damping_effect_report(sweep, sweep)
        assert rep.slope_difference == 0.0
        assert rep.consistent
        assert np.allclose(rep.lifespan_ratios, 1.0)
        assert "not a theorem verification" in rep.note

    def test_mismatched_ladders_rejected(self):
        a = synthetic_sweep(np.geomspace(1.0, 0.3, 6), 4.0 * np.geomspace(1.0, 0.3, 6) ** -0.6)
        b = synthetic_sweep(np.geomspace(1.0, 0.4, 6), 4.0 * np.geomspace(1.0, 0.4, 6) ** -0.6)
        with pytest.raises(IncomparableSweepsError):
            damping_effect_report(a, b)

    def test_mismatched_systems_rejected(self):
        eps = np.geomspace(1.0, 0.3, 6)
        a = synthetic_sweep(eps, 4.0 * eps**-0.6)
        b = synthetic_sweep(eps, 4.0 * eps**-0.6)
        b.spec_dict = {"system": gg_base(p=1.4).to_dict()}
        with pytest.raises(IncomparableSweepsError):
            damping_effect_report(a, b)
