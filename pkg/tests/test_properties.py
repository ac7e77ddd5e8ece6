"""Model-level invariants checked over randomized parameter space."""

import math

from hypothesis import assume, given, settings, strategies as st

from hetnetsim import analytic
from hetnetsim.params import SystemParams, TierThresholds

densities = st.floats(min_value=0.05, max_value=5.0)
powers = st.floats(min_value=0.1, max_value=100.0)
gammas = st.floats(min_value=2.5, max_value=6.0)
thresholds = st.floats(min_value=0.5, max_value=20.0)
reuse = st.integers(min_value=1, max_value=6)


def make_params(lam_M, lam_mu, P_M, P_mu, gamma, T, K, **kw):
    if P_M < P_mu:
        P_M, P_mu = P_mu, P_M
    return SystemParams(lambda_M=lam_M, lambda_mu=lam_mu, P_M=P_M,
                        P_mu=P_mu, gamma=gamma, T=T, K=K, **kw)


@given(densities, densities, powers, powers, gammas, thresholds,
       st.floats(min_value=0.1, max_value=10.0))
def test_band_coverage_invariant_under_density_and_power_scaling(
        lam_M, lam_mu, P_M, P_mu, gamma, T, scale):
    """Equal-threshold per-band coverage depends only on gamma and T:
    the tier densities and powers cancel."""
    p1 = make_params(lam_M, lam_mu, P_M, P_mu, gamma, T, 1)
    p2 = p1.with_(lambda_M=p1.lambda_M * scale, lambda_mu=p1.lambda_mu * scale,
                  P_M=p1.P_M * scale, P_mu=p1.P_mu * scale)
    th = TierThresholds(T_M=T, T_mu=T)
    ref = analytic.band_coverage(gamma, T)
    assert math.isclose(analytic.general_band_coverage(p1, th), ref,
                        rel_tol=1e-12)
    assert math.isclose(analytic.general_band_coverage(p2, th), ref,
                        rel_tol=1e-12)


@given(densities, densities, powers, powers, gammas, thresholds, reuse,
       st.floats(min_value=1e4, max_value=3e6))
@settings(max_examples=60)
def test_rate_coverage_expansion_equivalence(lam_M, lam_mu, P_M, P_mu,
                                             gamma, T, K, R_T):
    """Compact and binomially expanded rate-coverage forms agree."""
    p = make_params(lam_M, lam_mu, P_M, P_mu, gamma, T, K, R_T=R_T)
    try:
        compact = analytic._rate_coverage_terms(p, p.K).rc_total
    except analytic.RateThresholdOverflow:
        assume(False)
    expanded = analytic.rate_coverage_expanded(p)
    assert math.isclose(compact, expanded, rel_tol=1e-10, abs_tol=1e-12)


@given(densities, densities, powers, powers, gammas, thresholds, reuse)
@settings(max_examples=60)
def test_rate_coverage_bounded_by_coverage(lam_M, lam_mu, P_M, P_mu,
                                           gamma, T, K):
    p = make_params(lam_M, lam_mu, P_M, P_mu, gamma, T, K)
    try:
        rep = analytic._rate_coverage_terms(p, p.K)
    except analytic.RateThresholdOverflow:
        assume(False)
    P_c = analytic.network_coverage(
        min(analytic.band_coverage(gamma, T), 1.0), K)
    assert rep.rc_total <= P_c + 1e-12


@given(densities, densities, powers, powers, gammas, thresholds, reuse)
@settings(max_examples=60)
def test_rate_coverage_equals_coverage_below_the_kink(lam_M, lam_mu, P_M,
                                                      P_mu, gamma, T, K):
    """A tiny rate threshold leaves both effective SIR thresholds at T,
    where P(R >= R_T) collapses to the plain coverage probability."""
    assume(analytic.band_coverage_valid(gamma, T))
    p = make_params(lam_M, lam_mu, P_M, P_mu, gamma, T, K, R_T=1.0)
    rep = analytic._rate_coverage_terms(p, p.K)
    assume(rep.T_mu_eff == T and rep.T_M_eff == T)
    P_c = analytic.network_coverage(
        min(analytic.band_coverage(gamma, T), 1.0), K)
    assert math.isclose(rep.rc_total, P_c, rel_tol=1e-9)


@given(gammas, thresholds)
def test_outage_strictly_decreasing_in_reuse(gamma, T):
    assume(analytic.band_coverage_valid(gamma, T))
    p = make_params(0.2, 0.8, 40.0, 1.0, gamma, T, 1)
    outages = [analytic.outage(p.with_(K=K)) for K in range(1, 7)]
    for a, b in zip(outages, outages[1:]):
        assert b < a


@given(gammas, thresholds, reuse)
def test_micro_load_grows_with_micro_density(gamma, T, K):
    p = make_params(0.2, 0.4, 40.0, 1.0, gamma, T, K)
    A_lo, _ = analytic.tier_loads(p)
    A_hi, _ = analytic.tier_loads(p.with_(lambda_mu=2.0))
    assert A_hi > A_lo
    assert 0.0 < A_lo < 1.0


@given(st.floats(min_value=0.01, max_value=0.99),
       st.floats(min_value=0.05, max_value=0.95))
def test_incomplete_beta_monotone_in_upper_limit(x, b):
    lo = analytic.incomplete_beta_integral(x * 0.5, b)
    hi = analytic.incomplete_beta_integral(x, b)
    assert 0.0 <= lo < hi
