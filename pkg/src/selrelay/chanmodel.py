"""Network configuration, SNR distributions and block-fading sampling.

All SNRs are linear power ratios. Per-link SNRs are exponential (Rayleigh
amplitude); the selected relay path SNR ``g1`` is the max over relays of the
min of the two hop SNRs, whose individual mean is ``gbar1 / 2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import mpmath
import numpy as np

from .specfun import DomainError, alternating_sum, binom, stable_eval

__all__ = [
    "NetworkConfig",
    "Scheme",
    "OutageSpec",
    "ChannelDraw",
    "ChannelBatch",
    "EffectiveSnr",
    "db_to_linear",
    "linear_to_db",
    "pdf_gamma1",
    "pdf_gamma1_expanded",
    "cdf_gamma1",
    "pdf_beta",
    "is_singular_term",
    "rng_stream",
    "sample_channel",
    "sample_channels",
    "select_best_relay",
    "effective_snr",
]

# relative closeness of 2*i*gbar0 and gbar1 below which the equal-rate limit is used
SINGULAR_RTOL = 1e-9
# digits allowed to cancel in double before a density is re-evaluated in extended precision
_CANCEL_LIMIT = 1e6


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


class Scheme(enum.Enum):
    SR = "sr"
    SCR = "scr"
    ASR = "asr"

    @property
    def uses_direct_path(self) -> bool:
        return self is not Scheme.SR

    @property
    def code(self) -> int:
        return _SCHEME_CODES[self]


_SCHEME_CODES = {Scheme.SR: 0, Scheme.SCR: 1, Scheme.ASR: 2}


@dataclass(frozen=True)
class NetworkConfig:
    """Relay count and mean link SNRs.

    ``gbar0`` is the mean S-D SNR and may be ``None`` when only the relay
    path is of interest (SR). ``gbar1`` is the common mean of every S-R and
    R-D link.
    """

    n_relays: int
    gbar1: float
    gbar0: Optional[float] = None

    def __post_init__(self):
        if int(self.n_relays) != self.n_relays or self.n_relays < 1:
            raise ValueError(f"n_relays must be a positive integer, got {self.n_relays}")
        if not (math.isfinite(self.gbar1) and self.gbar1 > 0):
            raise ValueError(f"gbar1 must be positive and finite, got {self.gbar1}")
        if self.gbar0 is not None and not (math.isfinite(self.gbar0) and self.gbar0 > 0):
            raise ValueError(f"gbar0 must be positive and finite, got {self.gbar0}")

    @classmethod
    def from_db(cls, n_relays: int, gbar1_db: float, gbar0_db: Optional[float] = None) -> "NetworkConfig":
        gbar0 = None if gbar0_db is None else db_to_linear(gbar0_db)
        return cls(n_relays, db_to_linear(gbar1_db), gbar0)

    def require_direct(self, scheme: Scheme) -> float:
        if self.gbar0 is None:
            raise ValueError(f"scheme {scheme.name} needs the direct-path mean SNR gbar0")
        return self.gbar0


@dataclass(frozen=True)
class OutageSpec:
    """Target rate R (bits/s/Hz) and the SNR threshold 2^(2R) - 1.

    R = 0 is accepted and gives a zero threshold (outage probability 0).
    """

    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate >= 0):
            raise ValueError(f"rate must be non-negative and finite, got {self.rate}")

    @property
    def threshold(self) -> float:
        return math.expm1(2.0 * self.rate * math.log(2.0))


@dataclass(frozen=True)
class ChannelDraw:
    g0: float
    hops: Tuple[Tuple[float, float], ...]
    best_relay: int
    g1: float


@dataclass(frozen=True)
class EffectiveSnr:
    value: float


@dataclass
class ChannelBatch:
    """Vectorized block-fading realizations; ``sr`` and ``rd`` have shape (n, n_relays)."""

    g0: np.ndarray
    sr: np.ndarray
    rd: np.ndarray

    def __len__(self) -> int:
        return self.g0.shape[0]


def _as_nonneg(name, x):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name}: SNR argument must be >= 0")
    return arr


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


def pdf_gamma1(g, cfg: NetworkConfig):
    """Density of the selected relay-path SNR, product form. Accepts arrays."""
    g = _as_nonneg("pdf_gamma1", g)
    n = cfg.n_relays
    mu = 2.0 / cfg.gbar1
    with np.errstate(over="ignore", under="ignore"):
        x = mu * g
        val = n * mu * np.exp(-x) * (-np.expm1(-x)) ** (n - 1)
    return _out(val)


def cdf_gamma1(g, cfg: NetworkConfig):
    """(1 - exp(-2 g / gbar1)) ** n_relays. Accepts arrays."""
    g = _as_nonneg("cdf_gamma1", g)
    with np.errstate(under="ignore"):
        val = (-np.expm1(-2.0 * g / cfg.gbar1)) ** cfg.n_relays
    return _out(val)


def _expanded_terms(g: float, cfg: NetworkConfig):
    n = cfg.n_relays
    for i in range(1, n + 1):
        mu = 2.0 * i / cfg.gbar1
        yield (-1) ** (i - 1) * binom(n, i) * mu * math.exp(-mu * g)


def _expanded_mp(g: float, cfg: NetworkConfig):
    n = cfg.n_relays
    g = mpmath.mpf(g)
    total = mpmath.mpf(0)
    for i in range(1, n + 1):
        mu = 2 * i / mpmath.mpf(cfg.gbar1)
        total += (-1) ** (i - 1) * binom(n, i) * mu * mpmath.exp(-mu * g)
    return total


def _cancellation_safe(terms, fallback):
    terms = list(terms)
    s = alternating_sum(terms)
    mag = math.fsum(abs(t) for t in terms)
    if s <= 0.0 or mag > _CANCEL_LIMIT * s:
        return max(stable_eval(fallback), 0.0)
    return s


def pdf_gamma1_expanded(g: float, cfg: NetworkConfig) -> float:
    """Density of the selected relay-path SNR as the alternating binomial sum.

    Falls back to extended precision when the sum cancels heavily.
    """
    g = float(_as_nonneg("pdf_gamma1_expanded", g))
    if math.isinf(g):
        return 0.0
    return _cancellation_safe(_expanded_terms(g, cfg), lambda: _expanded_mp(g, cfg))


def is_singular_term(i: int, gbar0: float, gbar1: float) -> bool:
    """True when the (2 i gbar0 - gbar1) denominator is numerically zero."""
    return abs(2 * i * gbar0 - gbar1) < SINGULAR_RTOL * gbar1


def _beta_term(i: int, b: float, gbar0: float, gbar1: float) -> float:
    # density of Exp(lam) + Exp(mu): lam mu / (mu - lam) (e^{-lam b} - e^{-mu b})
    lam = 1.0 / gbar0
    mu = 2.0 * i / gbar1
    if is_singular_term(i, gbar0, gbar1):
        c = 0.5 * (lam + mu)
        return lam * mu * b * math.exp(-c * b)
    diff = math.exp(-lam * b) * -math.expm1(-(mu - lam) * b)
    return 2.0 * i / (2.0 * i * gbar0 - gbar1) * diff


def _beta_mp(b: float, cfg: NetworkConfig, gbar0: float):
    b = mpmath.mpf(b)
    g0 = mpmath.mpf(gbar0)
    g1 = mpmath.mpf(cfg.gbar1)
    n = cfg.n_relays
    total = mpmath.mpf(0)
    for i in range(1, n + 1):
        lam = 1 / g0
        mu = 2 * i / g1
        if is_singular_term(i, gbar0, cfg.gbar1):
            t = lam * mu * b * mpmath.exp(-(lam + mu) / 2 * b)
        else:
            t = 2 * i / (2 * i * g0 - g1) * (mpmath.exp(-lam * b) - mpmath.exp(-mu * b))
        total += (-1) ** (i - 1) * binom(n, i) * t
    return total


def pdf_beta(b: float, cfg: NetworkConfig) -> float:
    """Density of gamma0 + gamma1 (the SCR combined SNR)."""
    b = float(_as_nonneg("pdf_beta", b))
    gbar0 = cfg.require_direct(Scheme.SCR)
    if b == 0.0 or math.isinf(b):
        return 0.0
    n = cfg.n_relays
    terms = [(-1) ** (i - 1) * binom(n, i) * _beta_term(i, b, gbar0, cfg.gbar1) for i in range(1, n + 1)]
    return _cancellation_safe(terms, lambda: _beta_mp(b, cfg, gbar0))


def rng_stream(master_seed: int, index: int = 0, purpose: int = 0) -> np.random.Generator:
    """Independent generator for stream ``index`` of ``master_seed``.

    ``purpose`` separates the channel draws (0) from detection noise (1) so
    that channel realizations do not depend on the simulation mode.
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(index), int(purpose)))
    return np.random.Generator(np.random.PCG64(seq))


def sample_channels(rng: np.random.Generator, cfg: NetworkConfig, n: int) -> ChannelBatch:
    """Draw ``n`` independent block-fading realizations.

    Order of consumption: n direct-path values, then n*N_R S-R values, then
    n*N_R R-D values. The direct path is always drawn so that all schemes see
    the same relay links for the same stream; with ``gbar0=None`` it is zero.
    """
    e0 = rng.standard_exponential(n)
    sr = rng.standard_exponential((n, cfg.n_relays))
    rd = rng.standard_exponential((n, cfg.n_relays))
    g0 = e0 * (cfg.gbar0 if cfg.gbar0 is not None else 0.0)
    sr *= cfg.gbar1
    rd *= cfg.gbar1
    return ChannelBatch(g0, sr, rd)


def select_best_relay(hops: Sequence[Tuple[float, float]]) -> Tuple[int, float]:
    """Max-min relay selection; ties go to the lowest (0-based) index."""
    if len(hops) == 0:
        raise DomainError("select_best_relay: at least one relay is required")
    best, best_val = 0, min(hops[0])
    for r, (a, b) in enumerate(hops[1:], start=1):
        v = min(a, b)
        if v > best_val:
            best, best_val = r, v
    return best, float(best_val)


def sample_channel(rng: np.random.Generator, cfg: NetworkConfig) -> ChannelDraw:
    """One realization; consumes the stream exactly like ``sample_channels(rng, cfg, 1)``."""
    batch = sample_channels(rng, cfg, 1)
    hops = tuple((float(a), float(b)) for a, b in zip(batch.sr[0], batch.rd[0]))
    best, g1 = select_best_relay(hops)
    return ChannelDraw(float(batch.g0[0]), hops, best, g1)


def effective_snr(draw: ChannelDraw, scheme: Scheme) -> EffectiveSnr:
    if scheme is Scheme.SCR:
        return EffectiveSnr(draw.g0 + draw.g1)
    if scheme is Scheme.ASR:
        return EffectiveSnr(max(draw.g0, draw.g1))
    return EffectiveSnr(draw.g1)
