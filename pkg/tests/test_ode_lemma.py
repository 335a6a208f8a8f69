import math

import numpy as np
import pytest

from semiwave.auxfn import CutoffSpec, cutoff_eval
from semiwave.errors import (
    HypothesisViolatedError,
    InsufficientDataError,
    InvalidGridError,
    InvalidParameterError,
)
from semiwave.ode_lemma import (
    LemmaParams,
    fit_lemma_scaling,
    integrate_extremal,
    y_functional,
)

_trapz = getattr(np, "trapezoid", None) or np.trapz


class TestLemmaParams:
    def test_hypothesis_guard(self):
        with pytest.raises(HypothesisViolatedError):
            LemmaParams(2.0, 3.0, 0.1)

    def test_parameter_guards(self):
        with pytest.raises(InvalidParameterError):
            LemmaParams(2.0, 2.0, 0.1, t0=2.0)
        with pytest.raises(InvalidParameterError):
            LemmaParams(2.0, 2.0, 0.0)
        with pytest.raises(InvalidParameterError):
            LemmaParams(1.0, 1.5, 0.1)

    def test_scaling_exponent_arithmetic(self):
        assert LemmaParams(2.0, 1.5, 0.1).scaling_exponent == pytest.approx(2.0 / 3.0)
        assert LemmaParams(2.0, 2.0, 0.1).scaling_exponent == pytest.approx(1.0)
        assert LemmaParams(3.0, 2.0, 0.1).scaling_exponent == pytest.approx(1.0)


class TestIntegrateExtremal:
    def test_regression_anchor_and_step_refinement(self):
        # frozen from the h/10 reference integration of the same trajectory
        params = LemmaParams(2.0, 2.0, 0.2, K1=1.0, K2=1.0, t0=3.0)
        res = integrate_extremal(params, t_cap=1e200)
        assert not res.censored
        assert res.ln_t_blow == pytest.approx(16.332541, abs=2e-4)
        ref = integrate_extremal(params, t_cap=1e200, base_step=0.001)
        assert res.ln_t_blow == pytest.approx(ref.ln_t_blow, rel=1e-6)

    def test_monotone_in_delta(self):
        lo = integrate_extremal(LemmaParams(2.0, 2.0, 0.1), t_cap=1e200)
        hi = integrate_extremal(LemmaParams(2.0, 2.0, 0.2), t_cap=1e200)
        assert hi.ln_t_blow < lo.ln_t_blow

    def test_monotone_in_forcing_constants(self):
        base = integrate_extremal(LemmaParams(2.0, 2.0, 0.2, K1=1.0, K2=1.0), t_cap=1e200)
        weaker_k1 = integrate_extremal(LemmaParams(2.0, 2.0, 0.2, K1=2.0, K2=1.0), t_cap=1e200)
        stronger_k2 = integrate_extremal(LemmaParams(2.0, 2.0, 0.2, K1=1.0, K2=0.5), t_cap=1e200)
        assert weaker_k1.ln_t_blow >= base.ln_t_blow
        assert stronger_k2.ln_t_blow <= base.ln_t_blow

    def test_large_delta_blows_fast(self):
        res = integrate_extremal(LemmaParams(2.0, 2.0, 10.0, t0=3.0), t_cap=1e200)
        assert res.t_blow <= 10.0 * 3.0

    def test_branch_switch_recorded(self):
        res = integrate_extremal(LemmaParams(2.0, 2.0, 0.2), t_cap=1e200)
        assert res.t_switch is not None
        assert 3.0 < res.t_switch < res.t_blow

    def test_censoring(self):
        res = integrate_extremal(LemmaParams(2.0, 2.0, 1e-4), t_cap=1e6)
        assert res.censored and res.t_blow is None

    def test_trajectory_nondecreasing_then_divergent(self):
        params = LemmaParams(2.0, 2.0, 0.3, phi0_init=0.0)
        res = integrate_extremal(params, t_cap=1e200)
        assert not res.censored
        assert res.steps > 10


class TestFitLemmaScaling:
    def test_p2_equals_2_linear_in_inverse_delta(self):
        fit = fit_lemma_scaling(np.geomspace(0.05, 0.5, 7), LemmaParams(2.0, 2.0, 0.2))
        assert fit.theoretical_exponent == pytest.approx(1.0)
        assert fit.r_squared > 0.99
        assert fit.k3_estimate > 0.0

    def test_p1_3_p2_2_same_exponent(self):
        fit = fit_lemma_scaling(np.geomspace(0.05, 0.5, 7), LemmaParams(3.0, 2.0, 0.2))
        assert fit.theoretical_exponent == pytest.approx(1.0)
        assert fit.r_squared > 0.99

    def test_regression_ordering_against_wrong_exponent(self):
        deltas = np.geomspace(0.05, 0.5, 7)
        params = LemmaParams(2.0, 2.0, 0.2)
        good = fit_lemma_scaling(deltas, params)
        bad = fit_lemma_scaling(deltas, params, exponent_override=0.5)
        assert good.r_squared > 0.999
        assert bad.r_squared < good.r_squared - 0.01

    def test_ladder_requirements(self):
        params = LemmaParams(2.0, 2.0, 0.2)
        with pytest.raises(InsufficientDataError):
            fit_lemma_scaling([0.1, 0.2, 0.3, 0.4], params)
        with pytest.raises(InsufficientDataError):
            fit_lemma_scaling([0.1, 0.12, 0.15, 0.2, 0.3], params)

    def test_censored_run_rejected(self):
        params = LemmaParams(2.0, 2.0, 0.2)
        with pytest.raises(InsufficientDataError):
            fit_lemma_scaling(np.geomspace(0.01, 0.5, 6), params, t_cap=1e10)


class TestYFunctional:
    def test_constant_payload_exact_log(self):
        m = np.geomspace(2.0, 64.0, 40)
        table, report = y_functional(lambda s: np.full_like(s, 2.5), m, 4.0)
        np.testing.assert_allclose(table.y_values, 2.5 * np.log(m), atol=1e-10)
        assert report["derivative_identity_passed"]
        assert report["monotone"]

    def test_linear_payload(self):
        m = np.geomspace(2.0, 64.0, 40)
        table, report = y_functional(lambda s: s, m, 4.0)
        np.testing.assert_allclose(table.y_values, m - 1.0, rtol=1e-4)
        assert report["derivative_identity_passed"]

    def test_grid_validation(self):
        with pytest.raises(InvalidGridError):
            y_functional(lambda s: s, [3.0, 2.0, 4.0], 4.0)
        with pytest.raises(InvalidGridError):
            y_functional(lambda s: s, [0.5, 2.0], 4.0)

    def test_cutoff_payload_bound_and_identity(self):
        # payload omega == 1 on a box [0, T0] x (unit spatial measure):
        # the tail-cutoff functional stays below ln 2 times the plateau integral
        T0 = 200.0
        tq = np.linspace(0.0, T0, 4001)
        power = 4.0

        def tail_integral(sigmas):
            out = []
            for s in np.atleast_1d(sigmas):
                spec = CutoffSpec("theta", scale=float(max(s, 1.0 + 1e-9)), power=power)
                out.append(_trapz(cutoff_eval(spec, tq, 0), tq))
            return np.array(out)

        def plateau_integral(M):
            spec = CutoffSpec("eta", scale=float(M), power=power)
            return float(_trapz(cutoff_eval(spec, tq, 0), tq))

        table, report = y_functional(
            tail_integral, np.geomspace(2.0, 64.0, 16), power,
            eta_integral=plateau_integral, dense_per_decade=300,
        )
        assert report["bound_passed"]
        assert report["bound_ratio_max"] <= math.log(2.0) * 1.001
        assert report["derivative_identity_passed"]
        assert np.all(np.diff(table.y_values) >= 0.0)
