import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covertkey import estimator as e
from covertkey.channel import StateDmc, example_fig2
from covertkey.errors import DegenerateChannelError, InfeasibleSelectionError, PreconditionError
from covertkey.probcore import bernoulli


def h(p):
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def contrast_channel():
    """Bob's input-1 output is Bern(0.15) in state 0 and Bern(0.85) in state 1."""
    p = {(0, 0): bernoulli(0.1), (0, 1): bernoulli(0.1), (1, 0): bernoulli(0.15), (1, 1): bernoulli(0.85)}
    q = {(0, 0): bernoulli(0.4), (0, 1): bernoulli(0.3), (1, 0): bernoulli(0.6), (1, 1): bernoulli(0.7)}
    return StateDmc.independent(p, q)


# -- probe constants and configuration -----------------------------------------------


def test_probe_constants_fig2():
    pc = e.probe_constants(example_fig2())
    assert pc.y0 == 1 and pc.mu0 == pytest.approx(0.9) and pc.mu1 == pytest.approx(0.8)


def test_probe_constants_tie_first_symbol():
    pc = e.probe_constants(contrast_channel())
    assert pc.y0 == 0 and pc.mu0 == pytest.approx(0.85) and pc.mu1 == pytest.approx(0.15)


def test_probe_constants_degenerate():
    same = {(x, s): bernoulli(0.3) for x in (0, 1) for s in (0, 1)}
    with pytest.raises(DegenerateChannelError):
        e.probe_constants(StateDmc.independent(same, same))


def test_budget_and_config():
    g = e.min_budget(1000, 0.05, 0.1)
    assert g >= math.ceil(1.1 * 0.05 * (1000 + g))
    assert g - 1 < math.ceil(1.1 * 0.05 * (1000 + g - 1))
    cfg = e.EstimatorConfig.for_channel(example_fig2(), 1000, 0.05, 0.1)
    assert cfg.n_prime == 1000 + g
    with pytest.raises(PreconditionError):
        e.EstimatorConfig(1000, 10, 0.05, 0.1, 1, 0.9, 0.8)
    with pytest.raises(DegenerateChannelError):
        e.EstimatorConfig(1000, g, 0.05, 0.1, 1, 0.5, 0.5)


# -- estimation -----------------------------------------------------------------


def test_no_probes_gives_one():
    cfg = e.EstimatorConfig(10, 5, 0.1, 0.1, 1, 0.9, 0.8)
    assert e.estimate_beta([], cfg) == 1.0


def test_perfect_probes():
    cfg = e.EstimatorConfig(10, 5, 0.1, 0.1, 1, 0.0, 1.0)
    assert e.estimate_beta([1, 1, 1], cfg) == 1.0
    assert e.estimate_beta([0, 0, 1, 1], cfg) == 0.5


def test_raw_estimate_not_clamped():
    cfg = e.EstimatorConfig(10, 5, 0.1, 0.1, 1, 0.9, 0.8)
    assert e.estimate_beta([1, 1], cfg) == pytest.approx(-1.0)


def test_select_positions_rate_and_determinism():
    trials, n_prime, kappa = 2000, 500, 0.1
    rng = np.random.default_rng(0)
    sizes = np.array([e.select_positions(n_prime, kappa, rng).size for _ in range(trials)])
    sigma = math.sqrt(n_prime * kappa * (1 - kappa) / trials)
    assert abs(sizes.mean() - n_prime * kappa) < 4 * sigma
    a = e.select_positions(n_prime, kappa, np.random.default_rng(9))
    b = e.select_positions(n_prime, kappa, np.random.default_rng(9))
    assert np.array_equal(a, b) and np.all(np.diff(a) > 0)


def test_halting_boundary():
    assert not e.halting_check(7, 7)
    assert e.halting_check(8, 7)


def test_unbiased_at_fixed_positions():
    # exact expectation of the estimate for a fixed probe set
    ch = contrast_channel()
    pc = e.probe_constants(ch)
    s = np.array([0, 1, 1, 0, 1, 0, 0, 1, 1, 1])
    probes = [0, 2, 3, 5, 8]
    expected_hits = np.mean([ch.marginal_p(1, int(s[j])).mass[pc.y0] for j in probes])
    assert (expected_hits - pc.mu0) / (pc.mu1 - pc.mu0) == pytest.approx(s[probes].mean(), abs=1e-12)


def test_unbiased_monte_carlo():
    ch = contrast_channel()
    pc = e.probe_constants(ch)
    s = e.constant_weight_state(200, 0.3)
    hits = e._probe_counts(s, 40, 50_000, pc, np.random.default_rng(2))
    est = (hits / 40 - pc.mu0) / (pc.mu1 - pc.mu0)
    assert abs(est.mean() - 0.3) < 4 * est.std() / math.sqrt(est.size)


# -- bounds ----------------------------------------------------------------------


def test_deviation_bound_value():
    got = e.deviation_bound(0.1, 10_000, 0.15, 0.85)
    assert got == pytest.approx(2 * math.exp(-24.5) + 2 * math.exp(-50), rel=1e-12)
    assert got == pytest.approx(4.5795e-11, rel=1e-4)


def test_deviation_bound_vacuous_on_fig2():
    pc = e.probe_constants(example_fig2())
    assert e.deviation_bound(0.1, 10_000, pc.mu0, pc.mu1) > 1


def test_halting_bound_value():
    assert e.halting_bound(0.15, 0.05, 10_000) == pytest.approx(2 ** (-0.0225 * 500 / 3))


def test_deviation_checks_contrast_channel():
    ch = contrast_channel()
    rng = np.random.default_rng(5)
    s = e.constant_weight_state(5000, 0.4)
    for lam, ell in ((0.05, 400), (0.1, 200), (0.2, 100)):
        assert e.conditional_deviation_check(ch, s, lam, ell, 5000, rng).passed


def test_halting_frequency_check():
    c = e.halting_frequency_check(10_000, 0.05, 0.15, 20_000, np.random.default_rng(1))
    assert c.passed and c.empirical <= c.bound


def test_estimator_suite_and_corruption():
    assert all(c.passed for c in e.estimator_suite(contrast_channel(), seed=3))
    broken = e.estimator_suite(contrast_channel(), seed=3, bound_scale=1e-9)
    assert not all(c.passed for c in broken)


# -- code-size selection ------------------------------------------------------------


def test_choose_m_fig2_values():
    ch = example_fig2()
    n, alpha, zeta = 10_000, 0.05, 0.1
    sel = e.choose_m(ch, 0.0, zeta, alpha, n, e.innocent_floor(ch))
    assert sel.log_m3 == math.ceil(Fraction(11, 10) * Fraction(1, 20) * Fraction(1, 10) * n) == 55
    info = h(0.1 * 0.95 + 0.9 * 0.05) - h(0.1)
    assert sel.info == pytest.approx(info, abs=1e-12)
    assert sel.log_m1 + sel.log_m3 == math.floor(0.9 * (info - zeta * alpha) * n)
    assert sel.log_m1 + sel.log_m2 + sel.log_m3 == math.ceil(1.1 * n * math.log2(10))
    assert e.selection_satisfied(ch, sel, n, 0.1)


def test_choose_m_clamps_and_infeasible():
    ch = example_fig2()
    assert e.choose_m(ch, 1.7, 0.1, 0.05, 1000, 0.1).beta_hat == 1.0
    with pytest.raises(InfeasibleSelectionError):
        e.choose_m(ch, 0.0, 0.1, 0.05, 1, 0.1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 40), st.floats(0.02, 0.3), st.sampled_from([0.05, 0.1, 0.2]), st.integers(2000, 20_000))
def test_selection_invariants(k, alpha, zeta, n):
    ch = example_fig2()
    beta = k / 40
    try:
        sel = e.choose_m(ch, beta, zeta, alpha, n, 0.1)
    except InfeasibleSelectionError:
        return
    assert sel.log_m1 >= 0 and sel.log_m2 >= 0
    assert e.selection_satisfied(ch, sel, n, 0.1)
    s = np.zeros(40, dtype=int)
    s[:k] = 1
    assert e.s_in_s_set(ch, s, sel.m1, sel.m2, sel.m3, zeta, alpha, 0.1, n=n)


def test_inflated_key_leaves_set():
    ch = example_fig2()
    sel = e.choose_m(ch, 0.5, 0.1, 0.05, 10_000, 0.1)
    s = e.constant_weight_state(100, 0.5)
    assert e.s_in_s_set(ch, s, sel.m1, sel.m2, sel.m3, 0.1, 0.05, 0.1, n=10_000)
    big = sel.m1 << 200
    assert not e.s_in_s_set(ch, s, big, sel.m2, sel.m3, 0.1, 0.05, 0.1, n=10_000)


def test_membership_accounting():
    ch = example_fig2()
    cfg = e.EstimatorConfig.for_channel(ch, 5000, 0.02, 0.1)
    s = e.constant_weight_state(cfg.n_prime, 0.3)
    out = e.membership_frequency(ch, s, cfg, 0.1, 0.05, 200, np.random.default_rng(0))
    assert out["member"] + out["outside"] + out["halted"] + out["infeasible"] == 200
    assert 0.0 <= out["frequency"] <= 1.0


def test_all_ones_state_fig2():
    ch = example_fig2()
    s = np.ones(5000, dtype=int)
    c = e.conditional_deviation_check(ch, s, 0.1, 1000, 20_000, np.random.default_rng(6))
    assert 1 - c.empirical >= 1 - c.bound
    # the estimate concentrates even though the bound is vacuous here
    assert c.bound > 1 and c.empirical < 0.5
