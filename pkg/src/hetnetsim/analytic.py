"""Closed-form coverage, load, rate-coverage and mean-rate expressions.

Two-tier PPP network, frequency reuse K, prioritized SIR cell
association: the micro tier is tried first, the macro tier second, and
a user is in outage if neither offers SIR >= T.

Everything here is a pure function of the (linear-unit) parameters.
Where the model offers two algebraically equivalent routes to the same
quantity (compact vs binomially expanded rate coverage), both are
evaluated and required to agree, guarding against transcription slips.
"""

import math
import warnings
from dataclasses import dataclass, replace

from scipy.integrate import quad

from .params import SystemParams, TierThresholds, PathLossTooSmall, \
    NonPositiveParameter

#: Relative tolerance for all adaptive quadrature in this module.
QUAD_RTOL = 1e-8


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class RateThresholdOverflow(OverflowError):
    """The rate-equivalent SIR threshold 2^x - 1 overflows for this R_T."""


class DegenerateCoverage(ZeroDivisionError):
    """Network coverage is zero; tier loads are undefined."""


class ApproximationInvalid(ValueError):
    """Per-band coverage formula exceeds 1 (very small T): unusable here."""


@dataclass(frozen=True)
class CoverageReport:
    """Coverage/outage/load summary at the minimum SIR threshold T.

    approx_valid is False when T < 1 (linear), where the disjoint-cell
    approximation underlying the per-band formula only holds
    approximately (it then under-reports outage, most visibly at K=1).
    """

    P_c1: float       # per-band coverage probability
    P_c: float        # network coverage, 1 - (1 - P_c1)^K
    O: float          # outage, (1 - P_c1)^K
    P_c1_mu: float    # per-band micro-tier coverage
    A_mu: float       # micro-tier load share
    A_M: float        # macro-tier load share
    approx_valid: bool


@dataclass(frozen=True)
class RateReport:
    """Rate-coverage summary at rate threshold R_T."""

    rho_mu: float     # micro rate-equivalent SIR threshold, linear
    rho_M: float      # macro rate-equivalent SIR threshold, linear
    T_mu_eff: float   # max(rho_mu, T)
    T_M_eff: float    # max(rho_M, T)
    rc_micro: float   # P(R >= R_T, served by micro)
    rc_macro: float   # P(R >= R_T, served by macro)
    rc_total: float   # P(R >= R_T)
    mean_rate: float | None = None   # E[R] in bit/s, filled by mean_rate()


def c_gamma(gamma: float) -> float:
    """Interference geometry factor 2*pi^2 / (gamma * sin(2*pi/gamma)).

    Finite and positive only for gamma > 2 (the integral over
    interferer distances diverges otherwise).
    """
    if gamma <= 2:
        raise PathLossTooSmall(f"gamma must be > 2, got {gamma}")
    return 2.0 * math.pi ** 2 / (gamma * math.sin(2.0 * math.pi / gamma))


def band_coverage(gamma: float, T: float) -> float:
    """Per-band equal-threshold noise-free coverage pi/(C(gamma) T^(2/gamma)).

    Independent of densities, powers and K (they cancel in the
    two-tier sum).  The value is returned unclamped: it exceeds 1 for
    very small T, where the disjoint-coverage approximation breaks;
    callers must check `band_coverage_valid`.
    """
    if T <= 0:
        raise NonPositiveParameter(f"SIR threshold must be > 0, got {T}")
    return math.pi / (c_gamma(gamma) * T ** (2.0 / gamma))


def band_coverage_valid(gamma: float, T: float) -> bool:
    """True when the per-band coverage formula stays within [0, 1]."""
    return band_coverage(gamma, T) <= 1.0


def _quad(f, a, b, what: str) -> float:
    val, err = quad(f, a, b, epsabs=1e-14, epsrel=QUAD_RTOL, limit=200)
    if err > max(QUAD_RTOL * abs(val), 1e-12):
        raise QuadratureError(
            f"{what}: error estimate {err:.3e} for value {val:.6e}")
    return val


def general_band_coverage(params: SystemParams,
                          thresholds: TierThresholds) -> float:
    """Per-band coverage with per-tier thresholds and optional noise.

    With sigma2 = 0 this is the closed form
        pi/C(gamma) * (lam_M P_M^(2/g) T_M^(-2/g) + lam_mu P_mu^(2/g) T_mu^(-2/g))
                    / sum_i lam_i P_i^(2/g)
    With sigma2 > 0 the planar integral is reduced to one radial
    dimension (angular symmetry) and evaluated by adaptive quadrature.
    """
    p = params
    e = 2.0 / p.gamma
    if p.sigma2 == 0.0:
        denom = p.lambda_M * p.P_M ** e + p.lambda_mu * p.P_mu ** e
        num = (p.lambda_M * p.P_M ** e * thresholds.T_M ** -e
               + p.lambda_mu * p.P_mu ** e * thresholds.T_mu ** -e)
        return math.pi / c_gamma(p.gamma) * num / denom

    C = c_gamma(p.gamma)
    # density of the co-band superposition, power-weighted
    S = (p.lambda_M * p.P_M ** e + p.lambda_mu * p.P_mu ** e) / p.K
    total = 0.0
    for lam, P, T_j in ((p.lambda_M, p.P_M, thresholds.T_M),
                        (p.lambda_mu, p.P_mu, thresholds.T_mu)):
        c2 = (T_j / P) ** e * C * S
        cg = T_j * p.sigma2 / P

        def radial(u, c2=c2, cg=cg):
            # v = u/(1-u) maps [0,1) onto [0,inf)
            v = u / (1.0 - u)
            return (math.exp(-c2 * v * v - cg * v ** p.gamma)
                    * v / (1.0 - u) ** 2)

        total += (lam / p.K) * 2.0 * math.pi * _quad(
            radial, 0.0, 1.0, "band coverage radial integral")
    return total


def network_coverage(P_c1: float, K) -> float:
    """Network coverage 1 - (1 - P_c1)^K over K independent bands.

    Accepts non-integer K for relaxed planning searches, in which case
    P_c1 must lie in [0, 1].
    """
    if K < 1:
        raise NonPositiveParameter(f"K must be >= 1, got {K}")
    if not 0.0 <= P_c1 <= 1.0:
        if isinstance(K, int):
            # unclamped formula value; meaningful only via the flag
            return 1.0 - (1.0 - P_c1) ** K
        raise ApproximationInvalid(
            f"per-band coverage {P_c1} outside [0, 1] with non-integer K")
    return 1.0 - (1.0 - P_c1) ** K


def outage(params: SystemParams) -> float:
    """Network outage probability (1 - P_c1)^K at threshold T."""
    return 1.0 - network_coverage(band_coverage(params.gamma, params.T),
                                  params.K)


def micro_band_coverage(params: SystemParams, T_mu: float) -> float:
    """Per-band coverage restricted to the micro tier, threshold T_mu."""
    p = params
    e = 2.0 / p.gamma
    denom = p.lambda_M * p.P_M ** e + p.lambda_mu * p.P_mu ** e
    return (math.pi * p.lambda_mu * p.P_mu ** e * T_mu ** -e
            / (c_gamma(p.gamma) * denom))


def tier_loads(params: SystemParams) -> tuple[float, float]:
    """Load shares (A_mu, A_M) of a covered user under prioritization.

    A_mu = [1 - (1 - P_c1_mu)^K] / [1 - (1 - P_c1)^K].
    """
    P_c1 = band_coverage(params.gamma, params.T)
    P_c = network_coverage(P_c1, params.K)
    if P_c <= 0.0:
        raise DegenerateCoverage("zero network coverage, loads undefined")
    P_c_mu = network_coverage(
        micro_band_coverage(params, params.T), params.K)
    A_mu = P_c_mu / P_c
    return A_mu, 1.0 - A_mu


def coverage_report(params: SystemParams) -> CoverageReport:
    """Coverage, outage, and tier loads at the minimum SIR threshold."""
    P_c1 = band_coverage(params.gamma, params.T)
    valid = params.T >= 1.0 and P_c1 <= 1.0
    if P_c1 > 1.0:
        warnings.warn(
            f"per-band coverage formula gives {P_c1:.4f} > 1 at "
            f"T={params.T:g}; disjoint-cell approximation is invalid here",
            RuntimeWarning, stacklevel=2)
        P_c1 = 1.0
    P_c = network_coverage(P_c1, params.K)
    A_mu, A_M = tier_loads(params)
    return CoverageReport(
        P_c1=P_c1, P_c=P_c, O=1.0 - P_c,
        P_c1_mu=micro_band_coverage(params, params.T),
        A_mu=A_mu, A_M=A_M, approx_valid=valid)


def rate_thresholds(params: SystemParams,
                    coverage: CoverageReport) -> tuple[float, float]:
    """Rate-equivalent SIR thresholds (rho_mu, rho_M) for rate R_T.

    rho = 2^(R_T K A lambda_u P_c / (W lambda)) - 1 per tier, where
    A lambda_u P_c / lambda is the mean served population of a cell of
    the tier and W/K its band share.
    """
    p = params
    out = []
    for A, lam in ((coverage.A_mu, p.lambda_mu), (coverage.A_M, p.lambda_M)):
        x = p.R_T * p.K * A * p.lambda_u * coverage.P_c / (p.W_hz * lam)
        if x > 1020.0:  # 2^1020 is near the float64 ceiling
            raise RateThresholdOverflow(
                f"rate threshold exponent {x:.1f} overflows; R_T too large")
        out.append(2.0 ** x - 1.0)
    return out[0], out[1]


def _rate_coverage_terms(params: SystemParams, K) -> RateReport:
    """Tier rate-coverage terms for (possibly non-integer) reuse K."""
    p = params
    P_c1 = band_coverage(p.gamma, p.T)
    P_c = network_coverage(P_c1, K)
    P_c_mu = network_coverage(micro_band_coverage(p, p.T), K)
    if P_c <= 0.0:
        raise DegenerateCoverage("zero network coverage")
    A_mu = P_c_mu / P_c
    A_M = 1.0 - A_mu

    rho = []
    for A, lam in ((A_mu, p.lambda_mu), (A_M, p.lambda_M)):
        x = p.R_T * K * A * p.lambda_u * P_c / (p.W_hz * lam)
        if x > 1020.0:
            raise RateThresholdOverflow(
                f"rate threshold exponent {x:.1f} overflows; R_T too large")
        rho.append(2.0 ** x - 1.0)
    rho_mu, rho_M = rho
    T_mu = max(rho_mu, p.T)
    T_M = max(rho_M, p.T)

    rc_micro = 1.0 - (1.0 - micro_band_coverage(p, T_mu)) ** K
    P_c1_mixed = general_band_coverage(
        p.with_(sigma2=0.0), TierThresholds(T_M=T_M, T_mu=p.T))
    rc_macro = ((1.0 - micro_band_coverage(p, p.T)) ** K
                - (1.0 - P_c1_mixed) ** K)
    return RateReport(
        rho_mu=rho_mu, rho_M=rho_M, T_mu_eff=T_mu, T_M_eff=T_M,
        rc_micro=rc_micro, rc_macro=rc_macro,
        rc_total=rc_micro + rc_macro)


def rate_coverage_expanded(params: SystemParams) -> float:
    """P(R >= R_T) via the binomially expanded form.

    Alternate route used to cross-check `rate_coverage`:
      sum_k (-1)^(k+1) C(K,k) (D/(1+q))^k *
        [ (T_mu/T)^(-2k/g) + sum_i C(k,i) (q (T_M/T)^(-2/g))^i ]
    with q = (lam_M/lam_mu)(P_M/P_mu)^(2/g).
    """
    p = params
    r = _rate_coverage_terms(p, p.K)
    e = 2.0 / p.gamma
    q = (p.lambda_M / p.lambda_mu) * (p.P_M / p.P_mu) ** e
    D = band_coverage(p.gamma, p.T)
    t_mu = (r.T_mu_eff / p.T) ** -e
    t_M = (r.T_M_eff / p.T) ** -e
    total = 0.0
    for k in range(1, p.K + 1):
        inner = t_mu ** k
        for i in range(1, k + 1):
            inner += math.comb(k, i) * (q * t_M) ** i
        total += ((-1) ** (k + 1) * math.comb(p.K, k)
                  * (D / (1.0 + q)) ** k * inner)
    return total


def rate_coverage(params: SystemParams) -> RateReport:
    """Rate coverage P(R >= R_T) with per-tier terms (no mean rate).

    The compact form and the binomial expansion are both evaluated and
    must agree; a mismatch indicates an implementation fault.
    """
    report = _rate_coverage_terms(params, params.K)
    expanded = rate_coverage_expanded(params)
    if not math.isclose(report.rc_total, expanded,
                        rel_tol=1e-9, abs_tol=1e-12):
        raise AssertionError(
            f"rate-coverage forms disagree: {report.rc_total!r} vs "
            f"{expanded!r}")
    return report


def incomplete_beta_integral(x: float, b: float) -> float:
    """Incomplete Beta B_x(b, 1-b) = int_0^x t^(b-1) (1-t)^(-b) dt.

    The second parameter 1-b may be <= 0; the integral still converges
    for x < 1.  The t=0 endpoint singularity (b < 1) is removed by the
    substitution t = u^(1/b), which makes the integrand bounded.
    """
    if not 0.0 <= x < 1.0:
        raise ValueError(f"upper limit must be in [0, 1), got {x}")
    if b <= 0:
        raise ValueError(f"exponent b must be > 0, got {b}")
    if x == 0.0:
        return 0.0
    if b < 1.0:
        # t = u^(1/b): integrand becomes (1/b) (1 - u^(1/b))^(-b)
        return _quad(lambda u: (1.0 - u ** (1.0 / b)) ** -b / b,
                     0.0, x ** b, "incomplete beta (substituted)")
    return _quad(lambda t: t ** (b - 1.0) * (1.0 - t) ** -b,
                 0.0, x, "incomplete beta")


def _tail_integral(a: float, b: float, T: float) -> float:
    """int_0^inf max(2^(a R) - 1, T)^(-b) dR, split at R* = log2(1+T)/a."""
    return (math.log2(1.0 + T) / (a * T ** b)
            + incomplete_beta_integral(1.0 / (1.0 + T), b) / (a * math.log(2.0)))


def mean_rate(params: SystemParams) -> float:
    """Mean user bit-rate E[R] = int_0^inf P(R > R_T) dR_T, in bit/s.

    Assembled term by term from the expanded rate-coverage form: the
    only R_T dependence sits in the effective thresholds, whose tail
    integrals reduce to a logarithmic piece plus an incomplete Beta.
    """
    p = params
    cov = coverage_report(p)
    e = 2.0 / p.gamma
    q = (p.lambda_M / p.lambda_mu) * (p.P_M / p.P_mu) ** e
    D = cov.P_c1
    a_mu = p.K * cov.A_mu * cov.P_c * p.lambda_u / (p.W_hz * p.lambda_mu)
    a_M = p.K * cov.A_M * cov.P_c * p.lambda_u / (p.W_hz * p.lambda_M)

    total = 0.0
    for k in range(1, p.K + 1):
        b_mu = 2.0 * k / p.gamma
        inner = p.T ** b_mu * _tail_integral(a_mu, b_mu, p.T)
        for i in range(1, k + 1):
            b_M = 2.0 * i / p.gamma
            inner += (math.comb(k, i) * q ** i * p.T ** b_M
                      * _tail_integral(a_M, b_M, p.T))
        total += ((-1) ** (k + 1) * math.comb(p.K, k)
                  * (D / (1.0 + q)) ** k * inner)
    return total


def rate_report(params: SystemParams, with_mean_rate: bool = True) -> RateReport:
    """Full rate report; optionally includes E[R]."""
    report = rate_coverage(params)
    if with_mean_rate:
        report = replace(report, mean_rate=mean_rate(params))
    return report
