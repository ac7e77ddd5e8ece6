"""Monte Carlo engine for the two-tier PPP network.

One run samples eNB/UE positions on an L x L square centered on a
reference UE at the origin, draws unit-mean exponential fading per
link, applies a cell-association scheme, and records outage, tier
association, and the reference UE's round-robin Shannon rate.

Reproducibility contract: estimates are bit-identical for a given
(master seed, N, params, scheme, rate mode) regardless of how runs are
scheduled (n_jobs), because every run derives its own RNG stream from
the master seed and run index, and aggregation is done in run order.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from ._kernels import serve_ues, sir_from_rx
from .params import SystemParams, db_to_linear

logger = logging.getLogger(__name__)

SCHEMES = (
    "prioritized-sir",
    "max-sir",
    "max-rsrp-shared",
    "max-rsrp-K",
    "max-rsrp-rp1",
    "biased-rsrp-rp2",
)

#: §VI.B comparison defaults: micro bias and dedicated band fraction for
#: the biased resource-partitioning baseline, band split for RP1.
RP2_BIAS_DB = 15.0
RP2_F2_FRACTION = 0.47
RP1_MACRO_FRACTION = 0.5

#: Default region side in km; large enough that edge interference at the
#: origin is negligible at the default densities.
DEFAULT_REGION_KM = 20.0


@dataclass(frozen=True)
class Realization:
    """One sampled network around the reference UE at the origin."""

    enb_xy: np.ndarray     # (n_enb, 2) positions, km
    is_micro: np.ndarray   # (n_enb,) tier flags
    band: np.ndarray       # (n_enb,) band index in [0, K)
    tx_power: np.ndarray   # (n_enb,) watts
    ue_xy: np.ndarray      # (n_ue, 2) other-UE positions, km
    L: float               # region side, km

    @property
    def n_enb(self) -> int:
        return self.enb_xy.shape[0]

    @property
    def n_ue(self) -> int:
        return self.ue_xy.shape[0]


@dataclass(frozen=True)
class LinkSample:
    """Fading, distance and received power per eNB-to-reference link."""

    h: np.ndarray          # unit-mean exponential gains
    distance: np.ndarray   # km
    rx_power: np.ndarray   # watts, tx_power * h * distance^-gamma


@dataclass(frozen=True)
class AssociationOutcome:
    """Association result for the reference UE."""

    tier: str              # "macro" | "micro" | "outage"
    index: int             # serving eNB index, -1 for outage
    sir: float             # serving SIR (best candidate SIR for outage)
    biased: bool = False   # RP2 only: biased UE on the dedicated band

    @property
    def in_outage(self) -> bool:
        return self.tier == "outage"


@dataclass(frozen=True)
class MonteCarloEstimate:
    metric: str
    mean: float
    stderr: float
    n: int
    seed: int


def sample_realization(params: SystemParams, L: float,
                       rng: np.random.Generator) -> Realization:
    """Sample one PPP realization on the centered L x L square."""
    half = L / 2.0
    n_M = rng.poisson(params.lambda_M * L * L)
    n_mu = rng.poisson(params.lambda_mu * L * L)
    n_u = rng.poisson(params.lambda_u * L * L)
    enb_xy = rng.uniform(-half, half, size=(n_M + n_mu, 2))
    ue_xy = rng.uniform(-half, half, size=(n_u, 2))
    band = rng.integers(0, params.K, size=n_M + n_mu)
    # an eNB exactly at the origin would collide with the reference UE
    while True:
        bad = np.flatnonzero((enb_xy == 0.0).all(axis=1))
        if bad.size == 0:
            break
        logger.warning("resampling %d eNB position(s) at the origin", bad.size)
        enb_xy[bad] = rng.uniform(-half, half, size=(bad.size, 2))
    is_micro = np.zeros(n_M + n_mu, dtype=bool)
    is_micro[n_M:] = True
    tx_power = np.where(is_micro, params.P_mu, params.P_M)
    return Realization(enb_xy=enb_xy, is_micro=is_micro, band=band,
                       tx_power=tx_power, ue_xy=ue_xy, L=L)


def link_samples(realization: Realization, params: SystemParams,
                 rng: np.random.Generator) -> LinkSample:
    """Draw fresh fading for every eNB-to-reference link."""
    h = rng.exponential(1.0, size=realization.n_enb)
    d = np.hypot(realization.enb_xy[:, 0], realization.enb_xy[:, 1])
    rx = realization.tx_power * h * d ** -params.gamma
    return LinkSample(h=h, distance=d, rx_power=rx)


def sir_at_origin(realization: Realization, links: LinkSample,
                  target: int) -> float:
    """SIR of one eNB at the reference UE under the reuse-K layout."""
    if not 0 <= target < realization.n_enb:
        raise IndexError(f"target eNB {target} not in realization")
    K = int(realization.band.max(initial=-1)) + 1
    sir = sir_from_rx(links.rx_power, realization.band,
                      max(K, 1))
    return float(sir[target])


def _masked_best(sir: np.ndarray, mask: np.ndarray) -> tuple[int, float]:
    """Index and value of the best SIR within mask; (-1, -inf) if empty."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return -1, -math.inf
    best = idx[np.argmax(sir[idx])]
    return int(best), float(sir[best])


def associate(realization: Realization, links: LinkSample,
              params: SystemParams, scheme: str) -> AssociationOutcome:
    """Associate the reference UE under the given scheme.

    SIR-based schemes pick by fading-inclusive SIR; RSRP schemes pick
    by mean received power (fading averaged out) and are then in
    outage iff the serving cell's SIR under the scheme's spectrum
    layout falls below T.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown association scheme {scheme!r}")
    rx = links.rx_power
    is_micro = realization.is_micro
    if realization.n_enb == 0:
        return AssociationOutcome("outage", -1, -math.inf)

    if scheme in ("prioritized-sir", "max-sir"):
        sir = sir_from_rx(rx, realization.band, params.K)
        i_mic, s_mic = _masked_best(sir, is_micro)
        i_mac, s_mac = _masked_best(sir, ~is_micro)
        if scheme == "prioritized-sir":
            if s_mic >= params.T:
                return AssociationOutcome("micro", i_mic, s_mic)
            if s_mac >= params.T:
                return AssociationOutcome("macro", i_mac, s_mac)
            return AssociationOutcome("outage", -1, max(s_mic, s_mac))
        # max-sir; ties (e.g. two lone-band cells at +inf) keep lowest index
        best = int(np.argmax(sir))
        if sir[best] >= params.T:
            tier = "micro" if is_micro[best] else "macro"
            return AssociationOutcome(tier, best, float(sir[best]))
        return AssociationOutcome("outage", -1, float(sir[best]))

    mean_rx = realization.tx_power * links.distance ** -params.gamma

    if scheme == "max-rsrp-shared":
        best = int(np.argmax(mean_rx))
        sir = sir_from_rx(rx, np.zeros_like(realization.band), 1)
    elif scheme == "max-rsrp-K":
        best = int(np.argmax(mean_rx))
        sir = sir_from_rx(rx, realization.band, params.K)
    elif scheme == "max-rsrp-rp1":
        best = int(np.argmax(mean_rx))
        sir = sir_from_rx(rx, is_micro.astype(np.int64), 2)
    else:  # biased-rsrp-rp2
        return _associate_rp2(realization, rx, mean_rx, params.T)

    s = float(sir[best])
    tier = "micro" if is_micro[best] else "macro"
    if s < params.T:
        return AssociationOutcome("outage", -1, s)
    return AssociationOutcome(tier, best, s)


def _associate_rp2(realization, rx, mean_rx, T,
                   bias_db: float = RP2_BIAS_DB) -> AssociationOutcome:
    """Biased-RSRP with a dedicated band for biased UEs.

    Macro and plain micro UEs share one band used by every cell; biased
    UEs get a band used by micro cells only.
    """
    is_micro = realization.is_micro
    bias = db_to_linear(bias_db)
    i_mac, p_mac = _masked_best(mean_rx, ~is_micro)
    i_mic, p_mic = _masked_best(mean_rx, is_micro)
    if p_mic > p_mac:
        tier, best, biased = "micro", i_mic, False
    elif p_mic * bias > p_mac:
        tier, best, biased = "micro", i_mic, True
    else:
        tier, best, biased = "macro", i_mac, False
    if best < 0:
        return AssociationOutcome("outage", -1, -math.inf)
    if biased:
        interf = rx[is_micro].sum() - rx[best]
    else:
        interf = rx.sum() - rx[best]
    s = rx[best] / interf if interf > 0.0 else math.inf
    if s < T:
        return AssociationOutcome("outage", -1, s, biased)
    return AssociationOutcome(tier, best, s, biased)


def _band_width(params: SystemParams, scheme: str,
                outcome: AssociationOutcome) -> float:
    """Bandwidth of the serving cell's band for the reference UE."""
    if scheme in ("prioritized-sir", "max-sir", "max-rsrp-K"):
        return params.W_hz / params.K
    if scheme == "max-rsrp-shared":
        return params.W_hz
    if scheme == "max-rsrp-rp1":
        frac = RP1_MACRO_FRACTION
        return params.W_hz * (frac if outcome.tier == "macro" else 1.0 - frac)
    # biased-rsrp-rp2
    if outcome.biased:
        return params.W_hz * RP2_F2_FRACTION
    return params.W_hz * (1.0 - RP2_F2_FRACTION)


def _serving_counts(realization: Realization, params: SystemParams,
                    scheme: str, rng: np.random.Generator,
                    ue_chunk: int = 2048) -> np.ndarray:
    """Number of sampled UEs served by each eNB under the scheme.

    SIR schemes draw independent fading per UE-eNB link (chunked to
    bound memory); RSRP schemes associate on mean power only.
    """
    n_enb = realization.n_enb
    counts = np.zeros(n_enb, dtype=np.int64)
    if realization.n_ue == 0 or n_enb == 0:
        return counts
    dx = realization.ue_xy[:, 0:1] - realization.enb_xy[None, :, 0]
    dy = realization.ue_xy[:, 1:2] - realization.enb_xy[None, :, 1]
    mean_pow = realization.tx_power[None, :] * np.hypot(dx, dy) ** -params.gamma

    if scheme in ("prioritized-sir", "max-sir"):
        prioritized = scheme == "prioritized-sir"
        for lo in range(0, realization.n_ue, ue_chunk):
            chunk = mean_pow[lo:lo + ue_chunk]
            fading = rng.exponential(1.0, size=chunk.shape)
            serving = serve_ues(chunk * fading, realization.band,
                                realization.is_micro, params.K, params.T,
                                prioritized)
            served = serving[serving >= 0]
            counts += np.bincount(served, minlength=n_enb)
        return counts

    if scheme in ("max-rsrp-shared", "max-rsrp-K", "max-rsrp-rp1"):
        serving = np.argmax(mean_pow, axis=1)
        return np.bincount(serving, minlength=n_enb)

    # biased-rsrp-rp2: biased UEs still land on their best micro cell,
    # so the per-cell population does not depend on the bias split here
    bias = db_to_linear(RP2_BIAS_DB)
    weighted = np.where(realization.is_micro[None, :], mean_pow * bias,
                        mean_pow)
    serving = np.argmax(weighted, axis=1)
    return np.bincount(serving, minlength=n_enb)


def reference_rate(realization: Realization, links: LinkSample,
                   outcome: AssociationOutcome, params: SystemParams,
                   scheme: str = "prioritized-sir",
                   mode: str = "average",
                   rng: np.random.Generator | None = None,
                   coverage: "analytic.CoverageReport | None" = None) -> float:
    """Round-robin Shannon rate of the reference UE, bit/s.

    mode "average" divides the band by the model's mean cell
    population (prioritized scheme only); mode "realized" counts the
    UEs of this realization that associate with the serving cell under
    the same scheme, reference included.
    Outage yields 0 by definition.
    """
    if outcome.in_outage:
        return 0.0
    W_band = _band_width(params, scheme, outcome)
    if mode == "average":
        if scheme != "prioritized-sir":
            raise ValueError(
                "average-population rate mode is defined only for the "
                "prioritized scheme")
        if coverage is None:
            coverage = analytic.coverage_report(params)
        if outcome.tier == "micro":
            count = coverage.A_mu * coverage.P_c * params.lambda_u / params.lambda_mu
        else:
            count = coverage.A_M * coverage.P_c * params.lambda_u / params.lambda_M
        count = max(count, 1e-300)
    elif mode == "realized":
        if rng is None:
            raise ValueError("realized rate mode needs the run RNG")
        counts = _serving_counts(realization, params, scheme, rng)
        count = counts[outcome.index] + 1  # reference UE included
    else:
        raise ValueError(f"unknown rate mode {mode!r}")
    return W_band / count * math.log2(1.0 + outcome.sir)


def _run_indices(params: SystemParams, L: float, scheme: str,
                 rate_mode: str, master_seed: int, indices: range,
                 coverage) -> np.ndarray:
    """Raw per-run observations for a contiguous block of run indices.

    Columns: outage(0/1), micro(0/1, nan in outage), rate_ok(0/1), rate.
    """
    out = np.empty((len(indices), 4))
    for row, i in enumerate(indices):
        rng = np.random.default_rng(
            np.random.SeedSequence(master_seed, spawn_key=(i,)))
        real = sample_realization(params, L, rng)
        links = link_samples(real, params, rng)
        outcome = associate(real, links, params, scheme)
        if rate_mode == "none":
            rate = math.nan
            rate_ok = math.nan
        else:
            rate = reference_rate(real, links, outcome, params, scheme,
                                  mode=rate_mode, rng=rng, coverage=coverage)
            rate_ok = 1.0 if rate >= params.R_T else 0.0
        out[row, 0] = 1.0 if outcome.in_outage else 0.0
        out[row, 1] = (math.nan if outcome.in_outage
                       else 1.0 if outcome.tier == "micro" else 0.0)
        out[row, 2] = rate_ok
        out[row, 3] = rate
    return out


def _estimate(metric: str, values: np.ndarray, n_runs: int,
              seed: int) -> MonteCarloEstimate:
    n = values.size
    mean = float(values.mean()) if n else math.nan
    stderr = float(values.std(ddof=0) / math.sqrt(n)) if n else math.nan
    return MonteCarloEstimate(metric, mean, stderr, n_runs, seed)


def monte_carlo(params: SystemParams, L: float = DEFAULT_REGION_KM,
                N: int = 10000, seed: int = 0,
                scheme: str = "prioritized-sir",
                rate_mode: str = "average",
                n_jobs: int = 1, return_rows: bool = False):
    """Estimate outage, micro load, rate coverage and mean rate.

    rate_mode: "average" (mean cell population from the closed forms),
    "realized" (count the sampled UEs per cell), or "none" (skip rate
    metrics; association metrics only).

    Returns the estimate dict, or (estimates, rows) when return_rows is
    set; rows holds the raw per-run observations in run order with
    columns outage, micro, rate_ok, rate.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown association scheme {scheme!r}")
    coverage = (analytic.coverage_report(params)
                if rate_mode == "average" and scheme == "prioritized-sir"
                else None)

    if n_jobs <= 1:
        rows = _run_indices(params, L, scheme, rate_mode, seed, range(N),
                            coverage)
    else:
        blocks = np.array_split(np.arange(N), n_jobs * 4)
        rows = np.empty((N, 4))
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            futures = [
                (blk, pool.submit(_run_indices, params, L, scheme, rate_mode,
                                  seed, range(int(blk[0]), int(blk[-1]) + 1),
                                  coverage))
                for blk in blocks if blk.size]
            for blk, fut in futures:
                rows[blk[0]:blk[-1] + 1] = fut.result()

    covered = rows[:, 0] == 0.0
    estimates = {
        "outage": _estimate("outage", rows[:, 0], N, seed),
        "A_mu": _estimate("A_mu", rows[covered, 1], N, seed),
    }
    if rate_mode != "none":
        estimates["rate_coverage"] = _estimate("rate_coverage", rows[:, 2],
                                               N, seed)
        estimates["mean_rate"] = _estimate("mean_rate", rows[:, 3], N, seed)
    if return_rows:
        return estimates, rows
    return estimates
