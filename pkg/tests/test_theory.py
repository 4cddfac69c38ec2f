import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mddrisk.drawdown import estimate_emdd
from mddrisk.errors import BranchError, ParameterDomainError, RangeError
from mddrisk.fbm_sim import SimConfig
from mddrisk.theory import (
    LIMIT_CONSTANT,
    ZERO_DRIFT_CONSTANT,
    QTable,
    calibrate_qtable,
    default_qtable,
    emdd_bm,
    emdd_bm_asymptotic,
    emdd_bm_limit,
    q_large_x,
    q_small_x,
)


def mc_emdd(mu, sigma, years, replicates, seed, steps_per_year=256):
    cfg = SimConfig(hurst=0.5, mu_annual=mu, sigma_annual=sigma, years=years,
                    steps_per_year=steps_per_year, replicates=replicates, seed=seed)
    curve = estimate_emdd(cfg, k=1)
    return curve.mean[-1], curve.stderr[-1]


def richardson_mc(mu, sigma, years, replicates, seed, steps_per_year):
    """Grid-bias-free MC oracle from two independent ensembles at spacings dt and 4 dt."""
    fine, se_f = mc_emdd(mu, sigma, years, replicates, seed, steps_per_year)
    coarse, se_c = mc_emdd(mu, sigma, years, replicates, seed + 1, steps_per_year // 4)
    return 2 * fine - coarse, math.hypot(2 * se_f, se_c)


class TestLimits:
    def test_constants(self):
        assert ZERO_DRIFT_CONSTANT == pytest.approx(1.2533141, abs=1e-7)
        assert LIMIT_CONSTANT == pytest.approx(0.63519, abs=1e-5)

    def test_small_x_matches_zero_drift_branch(self):
        # 2 sigma^2 / mu * sqrt(pi x) / 2 with x = mu^2 T / (2 sigma^2) gives sqrt(pi/2) sigma sqrt(T)
        mu, sigma, years = 1e-3, 0.3, 2.0
        x = mu * mu * years / (2 * sigma * sigma)
        assert 2 * sigma**2 / mu * q_small_x(x) == pytest.approx(ZERO_DRIFT_CONSTANT * sigma * math.sqrt(years))

    def test_large_x(self):
        assert q_large_x("positive", 1.0) == pytest.approx(0.49088)
        assert q_large_x("negative", 3.0) == 3.5
        with pytest.raises(ParameterDomainError):
            q_large_x("sideways", 1.0)


class TestShippedTables:
    @pytest.mark.parametrize("kind", ["positive", "negative"])
    def test_invariants(self, kind):
        t = default_qtable(kind)
        assert t.kind == kind
        assert t.is_monotone
        assert np.all(t.q > 0)
        assert t.metadata["replicates"] >= 10_000
        assert t.metadata["warnings"] == []
        assert np.all(t.stderr < 0.01 * t.q)

    @pytest.mark.parametrize("kind", ["positive", "negative"])
    def test_small_x_end(self, kind):
        t = default_qtable(kind)
        assert t(t.x_min) == pytest.approx(q_small_x(t.x_min), rel=0.02)

    def test_large_x_end_positive(self):
        t = default_qtable("positive")
        assert t(t.x_max) == pytest.approx(q_large_x("positive", t.x_max), rel=0.02)

    def test_large_x_end_negative(self):
        t = default_qtable("negative")
        assert t(t.x_max) == pytest.approx(q_large_x("negative", t.x_max), rel=0.02)

    def test_printed_tail_is_twice_the_table(self):
        # the printed large-T expression corresponds to Q_p(x) ~ 0.63 + log(2x) / 2
        t = default_qtable("positive")
        printed = 0.63 + 0.5 * math.log(2 * t.x_max)
        assert printed / t(t.x_max) == pytest.approx(2.0, rel=0.05)

    @pytest.mark.parametrize("kind", ["positive", "negative"])
    def test_interpolant_monotone(self, kind):
        t = default_qtable(kind)
        xs = np.logspace(-5, 3, 2000)
        assert np.all(np.diff(t(xs)) > 0)

    def test_interpolant_hits_knots(self):
        t = default_qtable("positive")
        np.testing.assert_allclose(t(t.x), t.q, rtol=1e-12)

    def test_no_extrapolation(self):
        t = default_qtable("positive")
        with pytest.raises(RangeError):
            t(t.x_max * 2, extrapolate=False)
        with pytest.raises(ParameterDomainError):
            t(0.0)

    def test_branch_order(self):
        # negative drift lengthens drawdowns
        xs = np.logspace(-3, 2, 30)
        assert np.all(default_qtable("negative")(xs) > default_qtable("positive")(xs))


class TestCalibration:
    def test_deterministic(self):
        kwargs = dict(x_grid=[0.1, 1.0, 10.0], replicates=200, seed=3, min_steps=256, max_steps=1024)
        a = calibrate_qtable("positive", **kwargs)
        b = calibrate_qtable("positive", **kwargs)
        np.testing.assert_array_equal(a.q, b.q)
        assert np.all(a.q > 0)

    def test_low_precision_warns(self):
        t = calibrate_qtable("negative", [0.5, 2.0], replicates=20, seed=0, min_steps=64, max_steps=64)
        assert t.metadata["warnings"]

    def test_bad_grid(self):
        with pytest.raises(ParameterDomainError):
            calibrate_qtable("positive", [1.0, 0.5])

    def test_save_load(self, tmp_path):
        t = calibrate_qtable("positive", [0.1, 1.0], replicates=50, seed=1, min_steps=64, max_steps=64)
        t.save(tmp_path / "tab")
        back = QTable.load(tmp_path / "tab")
        assert back.kind == "positive"
        np.testing.assert_array_equal(back.q, t.q)
        assert back.metadata["seed"] == 1

    def test_knot_matches_direct_simulation(self):
        t = calibrate_qtable("positive", [2.0, 4.0], replicates=4000, seed=9, min_steps=1024, max_steps=1024)
        ref = default_qtable("positive")
        assert abs(t.q[0] - ref(2.0)) < 3 * math.hypot(t.stderr[0], 0.01 * ref(2.0))


class TestEmddBm:
    def test_zero_drift(self):
        est = emdd_bm(0.0, 0.05, 1.0)
        assert est.value == pytest.approx(0.0627, abs=5e-5)
        assert est.branch == "zero-drift"

    def test_sqrt_t(self):
        assert emdd_bm(0.0, 0.05, 4.0).value == 2 * emdd_bm(0.0, 0.05, 1.0).value

    @pytest.mark.parametrize("kwargs", [{"sigma": 0.0}, {"sigma": -1.0}, {"years": 0.0}])
    def test_domain(self, kwargs):
        args = {"mu": 0.05, "sigma": 0.05, "years": 1.0, **kwargs}
        with pytest.raises(ParameterDomainError):
            emdd_bm(**args)

    def test_branch_labels(self):
        assert emdd_bm(0.05, 0.05, 5).branch == "positive-drift"
        assert emdd_bm(0.05, 0.05, 5).method == "table"
        assert emdd_bm(-0.05, 0.05, 5).branch == "negative-drift"
        assert emdd_bm(0.05, 0.05, 1e5).method == "asymptotic"

    def test_wrong_table(self):
        with pytest.raises(BranchError):
            emdd_bm(0.05, 0.05, 5, qtable=default_qtable("negative"))

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-2, 2).filter(lambda v: abs(v) > 1e-3), st.floats(0.01, 2), st.floats(0.1, 50),
           st.floats(0.1, 10))
    def test_homogeneous(self, mu, sigma, years, c):
        assert emdd_bm(c * mu, c * sigma, years).value == pytest.approx(c * emdd_bm(mu, sigma, years).value,
                                                                         rel=1e-9)

    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_continuity_at_zero_drift(self, sign):
        zero = emdd_bm(0.0, 0.2, 3.0).value
        for mu in (1e-3, 1e-4, 1e-6):
            assert emdd_bm(sign * mu, 0.2, 3.0).value == pytest.approx(zero, rel=0.02)

    @pytest.mark.parametrize("kind", ["positive", "negative"])
    def test_handoff_is_continuous(self, kind):
        t = default_qtable(kind)
        for edge in (t.x_min, t.x_max):
            assert t(edge * (1 - 1e-9)) == pytest.approx(t(edge), rel=1e-6)
            assert t(edge * (1 + 1e-9)) == pytest.approx(t(edge), rel=1e-6)

    @pytest.mark.parametrize("kind", ["positive", "negative"])
    def test_extrapolation_approaches_limits(self, kind):
        t = default_qtable(kind)
        assert t(1e-8) == pytest.approx(q_small_x(1e-8), rel=1e-4)
        assert t(1e6) == pytest.approx(q_large_x(kind, 1e6), rel=1e-4)
        # the limits themselves agree with the table edges to 2%
        assert q_small_x(t.x_min) == pytest.approx(t(t.x_min), rel=0.02)
        assert q_large_x(kind, t.x_max) == pytest.approx(t(t.x_max), rel=0.02)

    def test_monotone_in_horizon(self):
        ts = np.linspace(0.1, 200, 300)
        for mu in (0.05, -0.05):
            vals = [emdd_bm(mu, 0.05, t).value for t in ts]
            assert np.all(np.diff(vals) > 0)

    def test_against_monte_carlo_t20(self):
        # daily grid; the discrete-monitoring bias at 256 steps/yr is about 2% here
        mean, se = mc_emdd(0.05, 0.05, 20, 10_000, seed=21)
        assert emdd_bm(0.05, 0.05, 20).value == pytest.approx(mean, rel=0.05)
        assert se < 0.01 * mean

    @pytest.mark.parametrize("x", [0.01, 0.5, 5.0])
    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_against_fresh_oracle(self, x, sign):
        mu = sign * math.sqrt(2 * x)
        mean, se = richardson_mc(mu, 1.0, 1.0, 10_000, seed=int(100 * x) + (0 if sign > 0 else 7),
                                 steps_per_year=1024)
        est = emdd_bm(mu, 1.0, 1.0)
        table = default_qtable("positive" if sign > 0 else "negative")
        table_se = 2 / abs(mu) * float(np.interp(x, table.x, table.stderr))
        assert abs(est.value - mean) < 3 * math.hypot(se, table_se)


class TestAsymptotic:
    def test_logs_vanish(self):
        assert emdd_bm_asymptotic(0.3, 0.3, 1.0) == pytest.approx(2 * 0.3 * 0.63)

    def test_value_t5(self):
        assert emdd_bm_asymptotic(0.05, 0.05, 5.0) == pytest.approx(0.1 * (0.63 + 0.5 * math.log(5)))
        assert emdd_bm_asymptotic(0.05, 0.05, 5.0) == pytest.approx(0.1435, abs=1e-4)

    def test_zero_drift_rejected(self):
        with pytest.raises(BranchError):
            emdd_bm_asymptotic(0.0, 0.05, 5.0)
        with pytest.raises(BranchError):
            emdd_bm_limit(0.0, 0.05, 5.0)

    def test_negative_limit_linear(self):
        assert emdd_bm_asymptotic(-0.05, 0.05, 100.0) == pytest.approx(0.05 * 100 + 0.05)

    def test_limit_is_half_the_printed_prefactor(self):
        for years in (50.0, 1e3, 1e6):
            printed = emdd_bm_asymptotic(0.05, 0.05, years)
            limit = emdd_bm_limit(0.05, 0.05, years)
            assert limit / printed == pytest.approx(0.5, rel=0.01)

    def test_limit_matches_table_tail(self):
        for mu in (0.05, -0.05):
            assert emdd_bm_limit(mu, 0.05, 200.0) == pytest.approx(emdd_bm(mu, 0.05, 200.0).value, rel=0.02)

    @pytest.mark.slow
    def test_large_t_monte_carlo(self):
        mean, _ = mc_emdd(0.05, 0.05, 100, 2000, seed=31)
        assert emdd_bm_limit(0.05, 0.05, 100) == pytest.approx(mean, rel=0.05)
        # the printed expression overshoots by a factor of about two
        assert mean / emdd_bm_asymptotic(0.05, 0.05, 100) == pytest.approx(0.5, abs=0.05)

    @pytest.mark.slow
    def test_negative_branch_monte_carlo(self):
        mean, se = mc_emdd(-0.05, 0.05, 20, 4000, seed=41, steps_per_year=256)
        assert emdd_bm(-0.05, 0.05, 20).value == pytest.approx(mean, rel=0.03)
        assert emdd_bm_limit(-0.05, 0.05, 20) == pytest.approx(mean, rel=0.03)
