"""Seeded, stream-partitioned Monte Carlo link simulator.

Trials are split over ``streams`` independently seeded generators
(:func:`selrelay.chanmodel.rng_stream`). Each stream is processed in fixed
size chunks and reduced to (count, mean, M2); the per-stream partials are
merged in stream order, so serial and threaded runs give identical bits.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from . import kernels
from .analytic import CapacityConvention
from .chanmodel import ChannelBatch, NetworkConfig, OutageSpec, Scheme, rng_stream, sample_channels

__all__ = [
    "SimMode",
    "MonteCarloResult",
    "TrialOutcome",
    "run_trial",
    "estimate_ber",
    "estimate_outage",
    "estimate_capacity",
    "DEFAULT_STREAMS",
]

CHUNK = 1 << 16
DEFAULT_STREAMS = 8
MIN_TRIALS = 1000
_NOISE_STD = math.sqrt(0.5)
_WILSON_BELOW = 30


class SimMode(enum.Enum):
    SEMI_ANALYTIC = "semi"
    SYMBOL_GENIE = "genie"
    SYMBOL_DF = "df"


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    std_error: float
    n_trials: int
    n_events: Optional[int]
    seed: int
    streams: int

    def brackets(self, value: float, k: float = 3.0) -> bool:
        return abs(self.estimate - value) <= k * self.std_error

    def z_score(self, value: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.estimate == value else math.inf
        return (self.estimate - value) / self.std_error


@dataclass(frozen=True)
class TrialOutcome:
    value: float
    beta: float


def _require_direct(scheme: Scheme, cfg: NetworkConfig) -> None:
    if scheme.uses_direct_path:
        cfg.require_direct(scheme)


def _draw_noise(noise_rng: np.random.Generator, mode: SimMode, n: int) -> Optional[np.ndarray]:
    if mode is SimMode.SYMBOL_GENIE:
        return noise_rng.standard_normal(n) * _NOISE_STD
    if mode is SimMode.SYMBOL_DF:
        return noise_rng.standard_normal((n, 3)) * _NOISE_STD
    return None


def _ber_values(batch: ChannelBatch, scheme: Scheme, mode: SimMode, noise) -> np.ndarray:
    beta, best, g1 = kernels.effective_snr(batch.g0, batch.sr, batch.rd, scheme.code)
    if mode is SimMode.SEMI_ANALYTIC:
        return kernels.conditional_ber(beta)
    if mode is SimMode.SYMBOL_GENIE:
        return kernels.genie_errors(beta, noise)
    return kernels.df_errors(batch.g0, batch.sr, batch.rd, best, g1, noise, scheme.code)


def run_trial(scheme: Scheme, mode: SimMode, rng_stream: np.random.Generator, cfg: NetworkConfig) -> TrialOutcome:
    """One block-fading trial.

    SEMI_ANALYTIC returns the conditional BER 1/2 erfc(sqrt(beta)); the
    symbol modes return a 0/1 error indicator for one BPSK symbol. Noise
    for the symbol modes is drawn from the same stream after the channel.
    """
    _require_direct(scheme, cfg)
    batch = sample_channels(rng_stream, cfg, 1)
    noise = _draw_noise(rng_stream, mode, 1)
    beta, _, _ = kernels.effective_snr(batch.g0, batch.sr, batch.rd, scheme.code)
    value = _ber_values(batch, scheme, mode, noise)
    return TrialOutcome(float(value[0]), float(beta[0]))


_Partial = Tuple[int, float, float, int]


def _stream_partial(cfg: NetworkConfig, n: int, master_seed: int, index: int,
                    values_fn: Callable[[ChannelBatch, np.random.Generator], np.ndarray]) -> _Partial:
    chan_rng = rng_stream(master_seed, index, 0)
    noise_rng = rng_stream(master_seed, index, 1)
    count, mean, m2, events = 0, 0.0, 0.0, 0
    done = 0
    while done < n:
        size = min(CHUNK, n - done)
        batch = sample_channels(chan_rng, cfg, size)
        vals = values_fn(batch, noise_rng)
        if vals.dtype == np.uint8:
            events += int(vals.sum(dtype=np.int64))
        vals = vals.astype(float, copy=False)
        c_mean = float(np.mean(vals))
        c_m2 = float(np.sum((vals - c_mean) ** 2))
        count, mean, m2 = _merge((count, mean, m2), (size, c_mean, c_m2))
        done += size
    return count, mean, m2, events


def _merge(a: Tuple[int, float, float], b: Tuple[int, float, float]) -> Tuple[int, float, float]:
    na, ma, sa = a
    nb, mb, sb = b
    if na == 0:
        return b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def _partition(n_trials: int, streams: int) -> List[int]:
    base, extra = divmod(n_trials, streams)
    return [base + (1 if k < extra else 0) for k in range(streams)]


def _run(cfg: NetworkConfig, n_trials: int, master_seed: int, streams: int, workers: int, values_fn) -> List[_Partial]:
    if n_trials < MIN_TRIALS:
        raise ValueError(f"n_trials must be >= {MIN_TRIALS}, got {n_trials}")
    if streams < 1:
        raise ValueError(f"streams must be >= 1, got {streams}")
    sizes = _partition(n_trials, streams)

    def job(k):
        return _stream_partial(cfg, sizes[k], master_seed, k, values_fn)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, range(streams)))
    return [job(k) for k in range(streams)]


def _moment_result(parts: List[_Partial], seed: int, streams: int, n_events: Optional[int] = None) -> MonteCarloResult:
    acc = (0, 0.0, 0.0)
    for count, mean, m2, _ in parts:
        acc = _merge(acc, (count, mean, m2))
    n, mean, m2 = acc
    se = math.sqrt(m2 / (n - 1) / n)
    return MonteCarloResult(mean, se, n, n_events, seed, streams)


def _indicator_result(parts: List[_Partial], seed: int, streams: int) -> MonteCarloResult:
    n = sum(p[0] for p in parts)
    k = sum(p[3] for p in parts)
    p = k / n
    if min(k, n - k) < _WILSON_BELOW:
        # half-width of the one-sigma Wilson score interval
        se = math.sqrt(p * (1 - p) / n + 1 / (4 * n * n)) / (1 + 1 / n)
    else:
        se = math.sqrt(p * (1 - p) / n)
    return MonteCarloResult(p, se, n, k, seed, streams)


def estimate_ber(scheme: Scheme, mode: SimMode, cfg: NetworkConfig, n_trials: int, master_seed: int,
                 streams: int = DEFAULT_STREAMS, workers: int = 1) -> MonteCarloResult:
    """BPSK bit error rate.

    SEMI_ANALYTIC averages the conditional error probability (standard error
    from the sample variance); the symbol modes count hard-decision errors
    (binomial standard error, Wilson below 30 events).
    """
    _require_direct(scheme, cfg)

    def values_fn(batch, noise_rng):
        noise = _draw_noise(noise_rng, mode, len(batch))
        return _ber_values(batch, scheme, mode, noise)

    parts = _run(cfg, n_trials, master_seed, streams, workers, values_fn)
    if mode is SimMode.SEMI_ANALYTIC:
        return _moment_result(parts, master_seed, streams)
    return _indicator_result(parts, master_seed, streams)


def estimate_outage(scheme: Scheme, cfg: NetworkConfig, spec: OutageSpec, n_trials: int, master_seed: int,
                    streams: int = DEFAULT_STREAMS, workers: int = 1) -> MonteCarloResult:
    """Frequency of beta_eff < 2^(2R) - 1."""
    _require_direct(scheme, cfg)
    a = spec.threshold

    def values_fn(batch, noise_rng):
        beta, _, _ = kernels.effective_snr(batch.g0, batch.sr, batch.rd, scheme.code)
        return (beta < a).astype(np.uint8)

    return _indicator_result(_run(cfg, n_trials, master_seed, streams, workers, values_fn), master_seed, streams)


def estimate_capacity(scheme: Scheme, cfg: NetworkConfig, conv: CapacityConvention, n_trials: int,
                      master_seed: int, streams: int = DEFAULT_STREAMS, workers: int = 1) -> MonteCarloResult:
    """Sample mean of prelog * log2(1 + beta_eff)."""
    _require_direct(scheme, cfg)
    prelog = conv.prelog

    def values_fn(batch, noise_rng):
        beta, _, _ = kernels.effective_snr(batch.g0, batch.sr, batch.rd, scheme.code)
        return prelog * np.log1p(beta) / math.log(2.0)

    return _moment_result(_run(cfg, n_trials, master_seed, streams, workers, values_fn), master_seed, streams)
