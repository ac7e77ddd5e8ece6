"""Cell-planning search: pick reuse K and the micro/macro density ratio.

Minimizes the micro-to-macro density ratio subject to an outage cap
and a rate-coverage floor.  The outage constraint depends on K alone
and yields an integer feasibility floor; the rate constraint defines a
level curve in the (K, ratio) plane along which the minimum is found
by relaxing K to a continuous variable and then snapping to the
admissible integers.
"""

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from . import analytic
from .params import SystemParams, db_to_linear

#: Default search windows for the density ratio and the reuse factor.
DEFAULT_RATIO_BOUNDS = (0.1, 30.0)
DEFAULT_K_BOUNDS = (1.0, 12.0)


class InfeasiblePlan(RuntimeError):
    """No (K, ratio) point in bounds satisfies both constraints."""


@dataclass(frozen=True)
class PlanningRequest:
    """Inputs of the planning problem (linear units)."""

    gamma: float = 4.0
    T: float = 1.0
    lambda_u_over_lambda_M: float = 100.0
    P_M_over_P_mu: float = db_to_linear(16.0)
    W_hz: float = 20e6
    R_T: float = 1e6
    outage_max: float = 0.10
    rate_cov_min: float = 0.50
    ratio_bounds: tuple[float, float] = DEFAULT_RATIO_BOUNDS
    K_bounds: tuple[float, float] = DEFAULT_K_BOUNDS

    def __post_init__(self):
        if not 0.0 < self.outage_max < 1.0:
            raise ValueError("outage_max must be in (0, 1)")
        if not 0.0 <= self.rate_cov_min < 1.0:
            raise ValueError("rate_cov_min must be in [0, 1)")
        if not (self.ratio_bounds[0] > 0
                and self.ratio_bounds[0] < self.ratio_bounds[1]):
            raise ValueError("ratio search bounds must be 0 < lo < hi")
        if not (self.K_bounds[0] >= 1 and self.K_bounds[0] < self.K_bounds[1]):
            raise ValueError("K search bounds must be 1 <= lo < hi")

    def params(self, ratio: float, K: int | None = None) -> SystemParams:
        """SystemParams with lambda_M normalized to 1 eNB/km^2."""
        return SystemParams(
            lambda_M=1.0, lambda_mu=ratio,
            lambda_u=self.lambda_u_over_lambda_M,
            P_M=self.P_M_over_P_mu, P_mu=1.0,
            gamma=self.gamma, W_hz=self.W_hz, T=self.T, R_T=self.R_T,
            K=K if K is not None else 1)


@dataclass(frozen=True)
class PlanningSolution:
    K: int
    density_ratio: float
    outage: float
    rate_coverage: float
    path: str  # "stationary-point" | "floor-fallback" | "infeasible"
    diagnostics: tuple = ()   # per-K sweep info when infeasible

    @property
    def feasible(self) -> bool:
        return self.path != "infeasible"


def feasibility_floor(gamma: float, T: float) -> int:
    """Largest integer d such that K <= d violates the outage cap of 10%.

    Admissible reuse factors are {d+1, d+2, ...}.  Refuses to answer
    when the per-band coverage formula exceeds 1 (tiny T), where the
    underlying approximation is invalid.
    """
    D = analytic.band_coverage(gamma, T)
    if D >= 1.0:
        raise analytic.ApproximationInvalid(
            f"per-band coverage {D:.4f} >= 1 at T={T:g}; outage floor "
            "undefined")
    return math.floor(-1.0 / math.log10(1.0 - D))


def _rate_cov(request: PlanningRequest, ratio: float, K: float) -> float:
    return analytic._rate_coverage_terms(request.params(ratio), K).rc_total


def gamma_curve(request: PlanningRequest, K: float,
                rtol: float = 1e-4) -> float | None:
    """Smallest density ratio meeting the rate-coverage floor at this K.

    Root of rate_coverage(ratio) - rate_cov_min over the ratio bounds,
    by bracketing scan plus Brent bisection; the lower bound itself is
    returned when it already satisfies the constraint.  None when the
    constraint cannot be met anywhere in bounds.
    """
    lo, hi = request.ratio_bounds
    target = request.rate_cov_min

    def f(r):
        return _rate_cov(request, r, K) - target

    f_lo = f(lo)
    if f_lo >= 0.0:
        return lo
    # scan for the first sign change so that the smallest root is taken
    n_seg = 64
    prev_r, prev_f = lo, f_lo
    for i in range(1, n_seg + 1):
        r = lo + (hi - lo) * i / n_seg
        fr = f(r)
        if fr >= 0.0:
            root = brentq(f, prev_r, r, xtol=1e-12, rtol=rtol)
            while f(root) < 0.0 and root < hi:  # land on the feasible side
                root = min(root * (1.0 + rtol) + 1e-12, hi)
            return root
        prev_r, prev_f = r, fr
    return None


def _stationary_K(request: PlanningRequest) -> float | None:
    """Interior minimizer K* of the Gamma-curve ratio, if one exists.

    Coarse scan over the K window followed by golden-section
    refinement; returns None when the curve is undefined or its
    minimum sits on the window boundary (no stationary point).
    """
    k_lo, k_hi = request.K_bounds
    n = max(int(round((k_hi - k_lo) / 0.25)), 8)
    ks = [k_lo + (k_hi - k_lo) * i / n for i in range(n + 1)]
    vals = [gamma_curve(request, k) for k in ks]
    defined = [(k, v) for k, v in zip(ks, vals) if v is not None]
    if len(defined) < 3:
        return None
    best_i = min(range(len(defined)), key=lambda i: defined[i][1])
    if best_i in (0, len(defined) - 1):
        return None  # boundary minimum, not a stationary point
    a = defined[best_i - 1][0]
    b = defined[best_i + 1][0]
    # golden-section on the Gamma-restricted ratio
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1 = gamma_curve(request, x1)
    f2 = gamma_curve(request, x2)
    while b - a > 1e-3:
        if f1 is None or (f2 is not None and f2 < f1):
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = gamma_curve(request, x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = gamma_curve(request, x1)
    return (a + b) / 2.0


def solve(request: PlanningRequest) -> PlanningSolution:
    """Select integer K and minimal density ratio meeting both constraints.

    The outage cap admits K >= d+1; along the rate-coverage level
    curve the continuous minimizer K* (when it exists and is
    admissible) is snapped to the better of its two neighboring
    integers, otherwise the floor K = d+1 is used.
    """
    D = analytic.band_coverage(request.gamma, request.T)
    if D >= 1.0:
        raise analytic.ApproximationInvalid(
            f"per-band coverage {D:.4f} >= 1; planner refuses")
    d = _floor_for(request, D)
    k_star = _stationary_K(request)

    path = "floor-fallback"
    if k_star is not None:
        kf = math.floor(k_star)
        if d + 1 <= kf:
            candidates = [kf, kf + 1]
            ratios = [(gamma_curve(request, k), k) for k in candidates]
            ratios = [(r, k) for r, k in ratios if r is not None]
            if ratios:
                ratio, K = min(ratios)
                return _finish(request, K, ratio, "stationary-point")
        # floor(K*)+1 <= d+1: the admissible floor binds
    K = d + 1
    k_max = math.floor(request.K_bounds[1])
    diagnostics = []
    while K <= k_max:
        ratio = gamma_curve(request, K)
        if ratio is not None:
            return _finish(request, K, ratio, path)
        best = max(_rate_cov(request, r, K)
                   for r in _ratio_probe(request))
        diagnostics.append((K, best))
        K += 1
    return PlanningSolution(K=-1, density_ratio=math.nan, outage=math.nan,
                            rate_coverage=math.nan, path="infeasible",
                            diagnostics=tuple(diagnostics))


def _floor_for(request: PlanningRequest, D: float) -> int:
    """Feasibility floor for an arbitrary outage cap (10% -> Eq. floor)."""
    return math.floor(math.log(request.outage_max) / math.log(1.0 - D))


def _ratio_probe(request: PlanningRequest):
    lo, hi = request.ratio_bounds
    return [lo + (hi - lo) * i / 16 for i in range(17)]


def _finish(request: PlanningRequest, K: int, ratio: float,
            path: str) -> PlanningSolution:
    O = (1.0 - analytic.band_coverage(request.gamma, request.T)) ** K
    rc = _rate_cov(request, ratio, K)
    if O >= request.outage_max or rc < request.rate_cov_min - 1e-6:
        raise InfeasiblePlan(
            f"candidate K={K}, ratio={ratio:.4f} fails verification "
            f"(O={O:.4f}, rate coverage={rc:.4f})")
    return PlanningSolution(K=K, density_ratio=ratio, outage=O,
                            rate_coverage=rc, path=path)


def contour_grid(request: PlanningRequest, K_values=None, ratio_values=None):
    """Rate-coverage level grid over (K, ratio), as (K, ratio, rc) rows."""
    if K_values is None:
        K_values = range(1, math.floor(request.K_bounds[1]) + 1)
    if ratio_values is None:
        lo, hi = request.ratio_bounds
        ratio_values = [lo + (hi - lo) * i / 60 for i in range(61)]
    return [(k, r, _rate_cov(request, r, k))
            for k in K_values for r in ratio_values]


def request_from_config(config: dict) -> PlanningRequest:
    """PlanningRequest from a JSON-style dict in dB convention.

    Recognized keys: gamma, T_db, lambda_u_over_lambda_M,
    P_M_over_P_mu_db, W_hz, R_T, outage_max, rate_cov_min,
    ratio_bounds, K_bounds.
    """
    kwargs = {}
    mapping = {
        "gamma": "gamma", "lambda_u_over_lambda_M": "lambda_u_over_lambda_M",
        "W_hz": "W_hz", "R_T": "R_T", "outage_max": "outage_max",
        "rate_cov_min": "rate_cov_min",
    }
    for key, value in config.items():
        if key in mapping:
            kwargs[mapping[key]] = value
        elif key == "T_db":
            kwargs["T"] = db_to_linear(value)
        elif key == "P_M_over_P_mu_db":
            kwargs["P_M_over_P_mu"] = db_to_linear(value)
        elif key in ("ratio_bounds", "K_bounds"):
            kwargs[key] = tuple(value)
        else:
            raise ValueError(f"unknown planning field {key!r}")
    return PlanningRequest(**kwargs)
