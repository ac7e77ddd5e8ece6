"""Hot numeric kernels for the Monte Carlo engine.

Each kernel exists twice: a numba @njit version and a pure-numpy
version.  The numba path is used when numba imports successfully and
the environment variable HETNETSIM_NO_NUMBA is unset; set
HETNETSIM_NO_NUMBA=1 to force the numpy fallback.  Both paths consume
the same pre-drawn random arrays, so a run is reproducible within a
backend; across backends results agree to floating-point roundoff
(summation order differs).

benchmarks/bench_kernels.py times the two paths against each other.
"""

import os

import numpy as np

_DISABLED = os.environ.get("HETNETSIM_NO_NUMBA", "").strip().lower() in (
    "1", "true", "yes")

if not _DISABLED:
    try:
        from numba import njit
        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover
        _HAVE_NUMBA = False
else:
    _HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy implementations

def sir_from_rx_numpy(rx, band, n_bands):
    """Per-eNB SIR at the reference point.

    rx      : (n,) received powers P*h*d^-gamma
    band    : (n,) int64 band index of each eNB, in [0, n_bands)
    returns : (n,) SIR, +inf where the co-band interferer set is empty
    """
    sums = np.bincount(band, weights=rx, minlength=n_bands)
    interf = sums[band] - rx
    out = np.full(rx.shape, np.inf)
    pos = interf > 0.0
    out[pos] = rx[pos] / interf[pos]
    return out


def serve_ues_numpy(rx_mat, band, is_micro, n_bands, threshold, prioritized):
    """Serving-cell index per UE under SIR-based association.

    rx_mat      : (n_ue, n_enb) received power per UE-eNB link
    band        : (n_enb,) int64 band indices
    is_micro    : (n_enb,) bool tier flags
    prioritized : True for micro-first association, False for max-SIR
    returns     : (n_ue,) int64 serving eNB index, -1 for outage
    """
    n_ue, n_enb = rx_mat.shape
    sums = np.zeros((n_ue, n_bands))
    for b in range(n_bands):
        mask = band == b
        if mask.any():
            sums[:, b] = rx_mat[:, mask].sum(axis=1)
    interf = sums[:, band] - rx_mat
    sir = np.where(interf > 0.0, rx_mat / np.where(interf > 0.0, interf, 1.0),
                   np.inf)
    if not prioritized:
        best = np.argmax(sir, axis=1)
        ok = sir[np.arange(n_ue), best] >= threshold
        return np.where(ok, best, -1).astype(np.int64)

    neg = np.full_like(sir, -np.inf)
    sir_mic = np.where(is_micro[None, :], sir, neg)
    sir_mac = np.where(is_micro[None, :], neg, sir)
    best_mic = np.argmax(sir_mic, axis=1)
    best_mac = np.argmax(sir_mac, axis=1)
    idx = np.arange(n_ue)
    mic_ok = sir_mic[idx, best_mic] >= threshold
    mac_ok = sir_mac[idx, best_mac] >= threshold
    serving = np.where(mic_ok, best_mic, np.where(mac_ok, best_mac, -1))
    return serving.astype(np.int64)


# ---------------------------------------------------------------------------
# numba implementations

if _HAVE_NUMBA:

    @njit(cache=True)
    def _sir_from_rx_jit(rx, band, n_bands):
        n = rx.shape[0]
        sums = np.zeros(n_bands)
        for i in range(n):
            sums[band[i]] += rx[i]
        out = np.empty(n)
        for i in range(n):
            interf = sums[band[i]] - rx[i]
            out[i] = rx[i] / interf if interf > 0.0 else np.inf
        return out

    @njit(cache=True)
    def _serve_ues_jit(rx_mat, band, is_micro, n_bands, threshold,
                       prioritized):
        n_ue, n_enb = rx_mat.shape
        serving = np.empty(n_ue, dtype=np.int64)
        sums = np.zeros(n_bands)
        for u in range(n_ue):
            for b in range(n_bands):
                sums[b] = 0.0
            for i in range(n_enb):
                sums[band[i]] += rx_mat[u, i]
            best_mic = -1
            best_mac = -1
            best_all = -1
            sir_mic = -1.0
            sir_mac = -1.0
            sir_all = -1.0
            for i in range(n_enb):
                interf = sums[band[i]] - rx_mat[u, i]
                sir = rx_mat[u, i] / interf if interf > 0.0 else np.inf
                # strict > keeps the lowest index on (measure-zero) ties
                if sir > sir_all:
                    sir_all = sir
                    best_all = i
                if is_micro[i]:
                    if sir > sir_mic:
                        sir_mic = sir
                        best_mic = i
                elif sir > sir_mac:
                    sir_mac = sir
                    best_mac = i
            if prioritized:
                if sir_mic >= threshold:
                    serving[u] = best_mic
                elif sir_mac >= threshold:
                    serving[u] = best_mac
                else:
                    serving[u] = -1
            else:
                serving[u] = best_all if sir_all >= threshold else -1
        return serving

    def sir_from_rx_numba(rx, band, n_bands):
        return _sir_from_rx_jit(rx, band, n_bands)

    def serve_ues_numba(rx_mat, band, is_micro, n_bands, threshold,
                        prioritized):
        return _serve_ues_jit(rx_mat, band, is_micro, n_bands, threshold,
                              prioritized)

    sir_from_rx = sir_from_rx_numba
    serve_ues = serve_ues_numba
    BACKEND = "numba"
else:
    sir_from_rx = sir_from_rx_numpy
    serve_ues = serve_ues_numpy
    BACKEND = "numpy"


def backend_name() -> str:
    """Active kernel backend, "numba" or "numpy"."""
    return BACKEND
