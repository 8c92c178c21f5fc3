import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from statsmodels.stats.proportion import proportion_confint

from reducible_bbm import mc
from reducible_bbm.params import ModelParams
from reducible_bbm.simulator import SimConfig, simulate_batch

P = ModelParams


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10_000), st.floats(0, 1))
def test_wilson_matches_statsmodels(n, frac):
    k = int(round(frac * n))
    lo, hi = mc.wilson_interval(k, n)
    ref_lo, ref_hi = proportion_confint(k, n, alpha=0.05, method="wilson")
    assert lo == pytest.approx(ref_lo, abs=1e-12) and hi == pytest.approx(ref_hi, abs=1e-12)
    assert 0 <= lo <= k / n <= hi <= 1


def test_wilson_errors():
    with pytest.raises(ValueError):
        mc.wilson_interval(3, 2)
    with pytest.raises(ValueError):
        mc.wilson_interval(0, 0)


@pytest.mark.parametrize("p", [0.01, 0.2, 0.5])
def test_wilson_coverage(p):
    rng = np.random.default_rng(17)
    n = 200
    hits = rng.binomial(n, p, size=1000)
    covered = sum(lo <= p <= hi for lo, hi in (mc.wilson_interval(int(k), n) for k in hits))
    assert covered >= 930


def test_estimate_tail_trivial_and_errors():
    e = mc.estimate_tail(P(1, 2, 1), 1.0, -1e6, 100, 3)
    assert (e.p_hat, e.n_hits, e.n_runs) == (1.0, 100, 100)
    assert e.ci_low <= e.p_hat <= e.ci_high == 1.0
    with pytest.raises(ValueError):
        mc.estimate_tail(P(1, 2, 1), 1.0, 0.0, 0, 3)
    with pytest.raises(ValueError):
        mc.estimate_tail(P(1, 2, 1), 0.0, 0.0, 10, 3)


def test_estimate_tail_matches_full_runs_and_workers():
    p, t, x = P(1, 2, 1), 3.0, 6.0
    e = mc.estimate_tail(p, t, x, 2000, 8)
    full = simulate_batch(p, SimConfig(t, 8), 2000)
    assert e.n_hits == int(np.count_nonzero(full.m_global >= x))
    assert mc.estimate_tail(p, t, x, 2000, 8, workers=4) == e


def test_markov_consistency():
    p, t, x = P(1, 2, 1), 3.0, 4.0
    b = simulate_batch(p, SimConfig(t, 12, level_thresholds=(x,)), 2000)
    hits = int(np.count_nonzero(b.m_global >= x))
    total = int(b.counts1[:, 0].sum() + b.counts2[:, 0].sum())
    assert hits <= total
    assert np.all((b.m_global >= x) <= (b.counts1[:, 0] + b.counts2[:, 0] >= 1))


def _est(p, n):
    k = int(round(p * n))
    lo, hi = mc.wilson_interval(k, n)
    return mc.TailEstimate(k / n, lo, hi, n, k)


def test_fit_log_slope_recovers_exponential():
    ts = [4.0, 6.0, 8.0]
    ests = [_est(0.3 * math.exp(-0.25 * t), 10**7) for t in ts]
    fit = mc.fit_log_slope(ts, ests)
    assert fit.slope == pytest.approx(-0.25, abs=1e-3)
    assert 0 < fit.stderr < 1e-3
    assert [pt[0] for pt in fit.points] == ts


def test_fit_log_slope_insufficient_hits():
    with pytest.raises(mc.InsufficientHitsError):
        mc.fit_log_slope([4.0, 6.0], [_est(0.01, 10_000), _est(0.0005, 10_000)])
    with pytest.raises(ValueError):
        mc.fit_log_slope([4.0], [_est(0.5, 100)])


def test_empirical_rate_insufficient_hits_for_steep_rate():
    # theta = 2.2 gives A = -3.84: no hits in 2000 runs at t = 4
    with pytest.raises(mc.InsufficientHitsError):
        mc.empirical_rate(P(1, 2, 1), 2.2, (4.0, 6.0), 2000, 1)
    with pytest.raises(ValueError):
        mc.empirical_rate(P(1, 2, 1), 1.1, (6.0, 4.0), 100, 1)


def test_empirical_rate_small_scale_sanity():
    fit = mc.empirical_rate(P(1, 2, 1), 1.1, (2.0, 3.0, 4.0), 20_000, 5)
    assert fit.slope < 0
    assert all(b[1] < a[1] for a, b in zip(fit.points, fit.points[1:]))


def test_moment_targets():
    assert mc.type1_moment_target(P(1, 1), 1.0, 0.0) == pytest.approx(math.e / 2, rel=1e-14)
    assert mc.type1_moment_target(P(1, 1), 0.0, 0.0) == 1.0
    assert mc.type1_moment_target(P(1, 1), 0.0, 0.1) == 0.0
    assert mc.type1_moment_target(P(2, 0.8), 2.0, 2.0) == pytest.approx(3.1076, abs=1e-3)
    p = P(2, 0.8, 1)
    assert mc.type2_moment_target(p, 1.0, -1e6) == pytest.approx(math.e ** 2 - math.e, rel=1e-10)
    assert mc.type2_moment_target(p, 1.0, 0.0) == pytest.approx(0.5 * (math.e ** 2 - math.e), rel=1e-10)
    assert mc.type2_moment_target(P(2, 0.8, 0), 1.0, 0.0) == 0.0
    # beta = 1: integrand is e^t times a tail, antiderivative t e^t at x far below
    assert mc.type2_moment_target(P(1, 2, 1.5), 2.0, -1e6) == pytest.approx(1.5 * 2 * math.e ** 2, rel=1e-10)


def test_first_moment_validators():
    r1 = mc.validate_first_moment_type1(P(1, 1), 1.0, 0.0, 4000, 42)
    assert r1.passed and abs(r1.z) <= 3
    r0 = mc.validate_first_moment_type1(P(1, 1), 0.0, 0.0, 100, 42)
    assert (r0.target, r0.empirical, r0.z, r0.passed) == (1.0, 1.0, 0.0, True)
    r2 = mc.validate_first_moment_type2(P(2, 0.8, 1), 1.0, 0.0, 4000, 42)
    assert r2.passed
    ra = mc.validate_first_moment_type2(P(2, 0.8, 0), 1.0, 0.0, 100, 42)
    assert (ra.target, ra.empirical, ra.passed) == (0.0, 0.0, True)
    with pytest.raises(ValueError):
        mc.validate_first_moment_type1(P(1, 1), 1.0, 0.0, 99, 42)
    # a wrong target is detected
    bad = mc._z_report(np.full(1000, 2.0) + np.random.default_rng(0).normal(0, 0.1, 1000), 1.0, 1000, 0)
    assert not bad.passed


def test_report_json_keys():
    r = mc.validate_first_moment_type1(P(1, 1), 1.0, 0.0, 200, 1)
    d = json.loads(r.to_json())
    assert list(d) == ["target", "empirical", "stderr", "z", "pass", "n_runs", "seed"]
    assert d["n_runs"] == 200 and d["seed"] == 1


def test_level_set_rate_targets_and_scaling():
    a = mc.level_set_rate(1.0, 1.0, 0.5, 4.0, 200, 9)
    b = mc.level_set_rate(2.0, 1.0, 0.5, 4.0, 200, 9)
    assert a.target == b.target == 0.75
    # the level scales with sigma, so paired runs give identical counts
    assert a.empirical == pytest.approx(b.empirical, rel=1e-12)
    assert mc.level_set_rate(1.0, 1.0, 0.999, 2.0, 10, 1).target == pytest.approx(0.001998, abs=1e-6)
    with pytest.raises(ValueError):
        mc.level_set_rate(1.0, 1.0, 1.0, 4.0, 10, 1)


def test_worker_count_does_not_change_reports():
    a = mc.validate_first_moment_type2(P(2, 0.8, 1), 1.0, 0.0, 1000, 5, workers=1)
    b = mc.validate_first_moment_type2(P(2, 0.8, 1), 1.0, 0.0, 1000, 5, workers=4)
    assert a == b
