"""End-to-end acceptance gate: one criterion per test, one PASS/FAIL line.

Run with `pytest -s tests/test_acceptance.py` to see the lines as the
criteria are evaluated.
"""

import math

import numpy as np

from hetnetsim import analytic, planner, simulator
from hetnetsim.params import SystemParams, TierThresholds, db_to_linear
from tests.test_analytic import numeric_mean_rate

P = SystemParams()
N_JOBS = 4


def _report(n, ok, detail):
    print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {n} failed: {detail}"


def test_criterion_1_closed_form_outage():
    quoted = {1: 0.36338, 2: 0.13205, 3: 0.04799}
    devs = []
    for K, O_ref in quoted.items():
        O = analytic.outage(P.with_(K=K))
        devs.append(max(abs(O - O_ref), abs(O - (1 - 2 / math.pi) ** K)))
    ok = all(d < 1e-4 for d in devs)
    _report(1, ok, f"outage K=1..3 max deviation {max(devs):.2e} (tol 1e-4)")


def test_criterion_2_tier_load():
    A1, _ = analytic.tier_loads(P.with_(K=1))
    A3, _ = analytic.tier_loads(P.with_(K=3))
    ok = abs(A1 - 0.388) < 0.005 and abs(A3 - 0.602) < 0.005
    _report(2, ok, f"A_mu(K=1)={A1:.4f} (0.388±0.005), "
                   f"A_mu(K=3)={A3:.4f} (0.602±0.005)")


def test_criterion_3_simulation_agreement():
    seed, devs = 10, []
    for K in range(2, 9):
        est = simulator.monte_carlo(P.with_(K=K), L=20.0, N=10000,
                                    seed=seed, rate_mode="none",
                                    n_jobs=N_JOBS)["outage"]
        exact = analytic.outage(P.with_(K=K))
        devs.append(abs(est.mean - exact) / est.stderr if est.stderr
                    else math.inf * bool(abs(est.mean - exact)))
    within = all(d <= 2.0 for d in devs)

    low_T = P.with_(K=1, T=db_to_linear(-4.0))
    sim_low = simulator.monte_carlo(low_T, L=20.0, N=10000, seed=seed,
                                    rate_mode="none",
                                    n_jobs=N_JOBS)["outage"].mean
    direction = sim_low > analytic.outage(low_T)
    ok = within and direction
    _report(3, ok, f"K=2..8 outage devs/SE {[round(d, 2) for d in devs]} "
                   f"(<=2); K=1 T=-4dB sim {sim_low:.4f} > analytic "
                   f"{analytic.outage(low_T):.4f}: {direction}")


def test_criterion_4_rate_coverage_argmax():
    results = {}
    for ratio, K_expected in ((1.0, 1), (4.0, 2), (8.0, 3)):
        p = P.with_(lambda_mu=ratio * P.lambda_M)
        best = max(range(1, 7),
                   key=lambda K: analytic.rate_coverage(p.with_(K=K)).rc_total)
        results[ratio] = best
    ok = results == {1.0: 1, 4.0: 2, 8.0: 3}
    _report(4, ok, f"argmax_K rate coverage at ratio 1/4/8: {results} "
                   "(expect 1/2/3)")


def test_criterion_5_mean_rate():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        p = P.with_(gamma=float(rng.uniform(3.0, 5.0)),
                    lambda_mu=float(rng.uniform(0.5, 4.0)),
                    lambda_u=float(rng.uniform(10.0, 40.0)),
                    K=int(rng.integers(1, 4)))
        rel = abs(analytic.mean_rate(p) / numeric_mean_rate(p) - 1.0)
        worst = max(worst, rel)
    numeric_ok = worst < 1e-3

    mc_devs = []
    for K in (1, 2, 3):
        est = simulator.monte_carlo(P.with_(K=K), L=20.0, N=10000, seed=0,
                                    rate_mode="average",
                                    n_jobs=N_JOBS)["mean_rate"]
        mc_devs.append(abs(est.mean / analytic.mean_rate(P.with_(K=K)) - 1.0))
    mc_ok = all(d < 0.05 for d in mc_devs)

    rates_K = [analytic.mean_rate(P.with_(K=K)) for K in (1, 2, 3, 4)]
    rates_r = [analytic.mean_rate(P.with_(lambda_mu=r * P.lambda_M))
               for r in (4.0, 8.0, 12.0)]
    mono_ok = (all(a > b for a, b in zip(rates_K, rates_K[1:]))
               and rates_r[0] < rates_r[1] < rates_r[2])

    ok = numeric_ok and mc_ok and mono_ok
    _report(5, ok, f"numeric worst rel {worst:.2e} (<1e-3); MC rel "
                   f"{[round(d, 4) for d in mc_devs]} (<0.05); monotone "
                   f"trends {mono_ok}")


def test_criterion_6_planner():
    req = planner.PlanningRequest()  # reference planning settings
    d = planner.feasibility_floor(req.gamma, req.T)
    sol = planner.solve(req)

    step = 0.05
    oracle = None
    for K in range(d + 1, 11):
        for ratio in np.arange(req.ratio_bounds[0], req.ratio_bounds[1],
                               step):
            if planner._rate_cov(req, float(ratio), K) >= req.rate_cov_min:
                if oracle is None or ratio < oracle[1]:
                    oracle = (K, float(ratio))
                break
    ok = (d == 2 and sol.K == 3 and abs(sol.density_ratio - 5.0) <= 0.5
          and oracle is not None and sol.K == oracle[0]
          and abs(sol.density_ratio - oracle[1]) <= step)
    _report(6, ok, f"d={d} (expect 2); K={sol.K}, ratio="
                   f"{sol.density_ratio:.3f} (expect 3, 5±0.5); grid oracle "
                   f"{oracle}")


def test_criterion_7_scheme_comparison():
    base = P.with_(lambda_M=1.0, lambda_mu=5.0,
                   P_mu=P.P_mu * db_to_linear(26.0 - 30.0))
    outages = {}
    for scheme in simulator.SCHEMES:
        K = 1 if scheme in ("max-rsrp-shared", "max-rsrp-rp1",
                            "biased-rsrp-rp2") else 3
        est = simulator.monte_carlo(base.with_(K=K), L=10.0, N=3000,
                                    seed=0, scheme=scheme, rate_mode="none",
                                    n_jobs=N_JOBS)["outage"]
        outages[scheme] = est
    prio, mx = outages["prioritized-sir"], outages["max-sir"]
    se = math.hypot(prio.stderr, mx.stderr)
    same = abs(prio.mean - mx.mean) <= 2.0 * se if se else prio.mean == mx.mean
    highest = max(outages, key=lambda s: outages[s].mean)
    ok = same and highest == "max-rsrp-shared"
    _report(7, ok, f"prioritized {prio.mean:.4f} vs max-SIR {mx.mean:.4f} "
                   f"(2SE={2 * se:.4f}); highest outage: {highest} "
                   "(expect max-rsrp-shared)")


def test_criterion_8_property_suites():
    rng = np.random.default_rng(99)
    # compact vs expanded rate coverage to 1e-10
    equiv = True
    for _ in range(50):
        p = P.with_(gamma=float(rng.uniform(2.5, 6.0)),
                    lambda_mu=float(rng.uniform(0.1, 4.0)),
                    T=float(rng.uniform(0.5, 20.0)),
                    K=int(rng.integers(1, 7)))
        try:
            compact = analytic._rate_coverage_terms(p, p.K).rc_total
        except analytic.RateThresholdOverflow:
            continue
        equiv &= math.isclose(compact, analytic.rate_coverage_expanded(p),
                              rel_tol=1e-10, abs_tol=1e-12)

    # density/power cancellation in equal-threshold per-band coverage
    th = TierThresholds(T_M=2.0, T_mu=2.0)
    invariant = all(
        math.isclose(
            analytic.general_band_coverage(
                P.with_(lambda_M=s * 0.2, lambda_mu=s * 0.8, P_M=s * 40.0,
                        P_mu=s * 1.0, T=2.0), th),
            analytic.band_coverage(4.0, 2.0), rel_tol=1e-12)
        for s in (0.25, 1.0, 7.0))

    # rate coverage bounded by coverage, equal below the rho-kink
    p_small = P.with_(K=3, R_T=1.0)
    rep = analytic.rate_coverage(p_small)
    P_c = analytic.coverage_report(p_small).P_c
    bound = (rep.rc_total <= P_c + 1e-12
             and math.isclose(rep.rc_total, P_c, rel_tol=1e-9))

    # K=1, T>=1: per-realization coverage sets are disjoint
    disjoint = True
    drng = np.random.default_rng(12)
    for _ in range(200):
        real = simulator.sample_realization(P, 8.0, drng)
        if real.n_enb == 0:
            continue
        links = simulator.link_samples(real, P, drng)
        sir = links.rx_power / (links.rx_power.sum() - links.rx_power)
        disjoint &= int(np.sum(sir >= P.T)) <= 1

    # bit-exact reproducibility across worker counts
    reproducible = (
        simulator.monte_carlo(P, L=8.0, N=240, seed=6, n_jobs=1)
        == simulator.monte_carlo(P, L=8.0, N=240, seed=6, n_jobs=3))

    ok = equiv and invariant and bound and disjoint and reproducible
    _report(8, ok, f"expansion equivalence {equiv}; scale invariance "
                   f"{invariant}; coverage bound/kink {bound}; disjoint "
                   f"coverage {disjoint}; parallel reproducibility "
                   f"{reproducible}")
