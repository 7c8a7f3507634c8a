"""Pure-NumPy implementations of the Monte Carlo trial kernels."""

import numpy as np
from scipy.special import erfc

SR, SCR, ASR = 0, 1, 2


def effective_snr(g0, sr, rd, scheme):
    """Max-min relay selection and the combined SNR for every trial.

    Returns ``(beta, best, g1)``; ties go to the lowest relay index.
    """
    mins = np.minimum(sr, rd)
    best = np.argmax(mins, axis=1)
    g1 = mins[np.arange(mins.shape[0]), best]
    if scheme == SCR:
        beta = g0 + g1
    elif scheme == ASR:
        beta = np.maximum(g0, g1)
    else:
        beta = g1.copy()
    return beta, best.astype(np.intp), g1


def conditional_ber(beta):
    return 0.5 * erfc(np.sqrt(beta))


def genie_errors(beta, noise):
    """Hard BPSK decision on sqrt(beta) + noise (noise variance 1/2)."""
    return (np.sqrt(beta) + noise < 0.0).astype(np.uint8)


def df_errors(g0, sr, rd, best, g1, noise, scheme):
    """Detect-and-forward: the selected relay decides, re-sends, destination combines.

    ``noise`` has columns (direct, source->relay, relay->destination), each
    with variance 1/2. The source sends +1.
    """
    idx = np.arange(sr.shape[0])
    a0 = np.sqrt(g0)
    a_sr = np.sqrt(sr[idx, best])
    a_rd = np.sqrt(rd[idx, best])
    relay_sym = np.where(a_sr + noise[:, 1] < 0.0, -1.0, 1.0)
    y_sd = a0 + noise[:, 0]
    y_rd = a_rd * relay_sym + noise[:, 2]
    if scheme == SCR:
        z = a0 * y_sd + a_rd * y_rd
    elif scheme == ASR:
        z = np.where(g0 > g1, y_sd, y_rd)
    else:
        z = y_rd
    return (z < 0.0).astype(np.uint8)
