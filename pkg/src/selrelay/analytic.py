"""Closed-form BER, outage and ergodic capacity for SR and SCR.

Every metric is an alternating binomial sum over i = 1..N_R. At high SNR
the sum cancels by many orders of magnitude, so the terms are built in
mpmath and re-evaluated at doubling precision until stable
(:func:`selrelay.specfun.stable_eval`). The SCR terms share the
denominator (2 i gbar0 - gbar1); when it vanishes the term is replaced by
its equal-rate limit.
"""

from __future__ import annotations

import enum
import math
from typing import Callable, Sequence, Tuple

import mpmath
import numpy as np

from .chanmodel import NetworkConfig, OutageSpec, Scheme, is_singular_term
from .quadrature import Density, IntegralSpec, Kernel, integrate
from .specfun import DomainError, binom, exp1_mp, inc_beta_1_half, stable_eval

__all__ = [
    "CapacityConvention",
    "StabilityError",
    "MAX_RELAYS",
    "check_relays",
    "ber_scr",
    "ber_sr",
    "ber_asr_numeric",
    "outage_scr",
    "outage_sr",
    "capacity_scr",
    "capacity_sr",
    "diversity_order_estimate",
]

MAX_RELAYS = 30


class StabilityError(ValueError):
    """Closed form refused because the alternating sum is too long."""


class CapacityConvention(enum.Enum):
    HALF = "half"
    FULL = "full"

    @property
    def prelog(self) -> float:
        return 0.5 if self is CapacityConvention.HALF else 1.0


def check_relays(cfg: NetworkConfig) -> int:
    if cfg.n_relays > MAX_RELAYS:
        raise StabilityError(
            f"closed forms are limited to N_R <= {MAX_RELAYS} (got {cfg.n_relays}); "
            "alternating binomial sums cancel catastrophically beyond that, use quadrature"
        )
    return cfg.n_relays


def _binomial_sum(n: int, term: Callable[[int], "mpmath.mpf"]) -> "mpmath.mpf":
    return mpmath.fsum((-1) ** (i - 1) * binom(n, i) * term(i) for i in range(1, n + 1))


def _scr_sum(cfg: NetworkConfig, regular, transform_slope) -> float:
    """Sum over SCR terms, each lam*mu/(mu-lam) * (H(lam) - H(mu)).

    ``regular(i, g0, g1)`` is the printed term; ``transform_slope(c)`` is
    H'(c), used at a singular point where the term tends to -lam*mu*H'(c).
    """
    n = check_relays(cfg)
    gbar0 = cfg.require_direct(Scheme.SCR)

    def build():
        g0 = mpmath.mpf(gbar0)
        g1 = mpmath.mpf(cfg.gbar1)

        def term(i):
            if is_singular_term(i, gbar0, cfg.gbar1):
                lam, mu = 1 / g0, 2 * i / g1
                return -lam * mu * transform_slope((lam + mu) / 2)
            return regular(i, g0, g1)

        return _binomial_sum(n, term)

    return stable_eval(build)


def _ber_slope(m):
    # H(m) = (1 - (1+m)^(-1/2)) / (2m), the Laplace transform of erfc(sqrt x)/2
    return -(1 - (1 + m) ** -0.5) / (2 * m * m) + (1 + m) ** -1.5 / (4 * m)


def ber_scr(cfg: NetworkConfig) -> float:
    """BPSK bit error rate with the best relay path MRC-combined with the direct path."""

    def regular(i, g0, g1):
        z0 = 1 / (g0 + 1)
        z1 = 2 * i / (g1 + 2 * i)
        return i / (2 * (2 * i * g0 - g1)) * (g0 * inc_beta_1_half(z0) - g1 / (2 * i) * inc_beta_1_half(z1))

    return _scr_sum(cfg, regular, _ber_slope)


def ber_sr(cfg: NetworkConfig) -> float:
    """BPSK bit error rate over the best relay path alone."""
    n = check_relays(cfg)

    def build():
        g1 = mpmath.mpf(cfg.gbar1)
        return _binomial_sum(n, lambda i: inc_beta_1_half(2 * i / (g1 + 2 * i))) / 4

    return stable_eval(build)


def outage_scr(cfg: NetworkConfig, spec: OutageSpec) -> float:
    """Probability that gamma0 + gamma1 falls below the rate threshold."""
    if spec.rate == 0.0:
        check_relays(cfg)
        cfg.require_direct(Scheme.SCR)
        return 0.0

    def threshold():
        # 2^(2R) - 1 at working precision
        return mpmath.expm1(2 * mpmath.mpf(spec.rate) * mpmath.ln2)

    def regular(i, g0, g1):
        a = threshold()
        return 1 + (g1 * mpmath.exp(-2 * i * a / g1) - 2 * i * g0 * mpmath.exp(-a / g0)) / (2 * i * g0 - g1)

    def slope(m):
        a = threshold()
        return -(-mpmath.expm1(-m * a)) / (m * m) + a * mpmath.exp(-m * a) / m

    return _scr_sum(cfg, regular, slope)


def outage_sr(cfg: NetworkConfig, spec: OutageSpec) -> float:
    """Probability that the best relay path SNR falls below the rate threshold."""
    n = check_relays(cfg)
    if spec.rate == 0.0:
        return 0.0

    def build():
        a = mpmath.expm1(2 * mpmath.mpf(spec.rate) * mpmath.ln2)
        g1 = mpmath.mpf(cfg.gbar1)
        return _binomial_sum(n, lambda i: 1 - mpmath.exp(-2 * i * a / g1))

    return stable_eval(build)


def capacity_scr(cfg: NetworkConfig, conv: CapacityConvention = CapacityConvention.HALF) -> float:
    """Ergodic capacity of SCR in bits/s/Hz under the chosen pre-log."""

    def regular(i, g0, g1):
        x0 = 1 / g0
        x1 = 2 * i / g1
        bracket = -2 * i * g0 * mpmath.exp(x0) * exp1_mp(x0) + g1 * mpmath.exp(x1) * exp1_mp(x1)
        return bracket / ((g1 - 2 * i * g0) * mpmath.ln2)

    def slope(m):
        # H(m) = e^m E1(m) / (m ln 2)
        em = mpmath.exp(m) * exp1_mp(m)
        return (em / m - 1 / (m * m) - em / (m * m)) / mpmath.ln2

    return conv.prelog * _scr_sum(cfg, regular, slope)


def capacity_sr(cfg: NetworkConfig, conv: CapacityConvention = CapacityConvention.HALF) -> float:
    """Ergodic capacity of SR in bits/s/Hz under the chosen pre-log."""
    n = check_relays(cfg)

    def build():
        g1 = mpmath.mpf(cfg.gbar1)

        def term(i):
            x = 2 * i / g1
            return mpmath.exp(x) * exp1_mp(x) / mpmath.ln2

        return _binomial_sum(n, term)

    return conv.prelog * stable_eval(build)


def ber_asr_numeric(cfg: NetworkConfig, rel_tol: float = 1e-10) -> float:
    """ASR bit error rate by quadrature over the law of max(gamma0, gamma1).

    Raises :class:`selrelay.quadrature.QuadratureError` if the integration
    does not converge.
    """
    cfg.require_direct(Scheme.ASR)
    return integrate(IntegralSpec(Kernel.BER, Density.PDF_MAX), cfg, rel_tol).value


def diversity_order_estimate(metric_curve: Sequence[Tuple[float, float]], window_db: float = 10.0) -> float:
    """Negative log-log slope of an error curve.

    Least-squares slope of log10(value) against SNR in dB over the top
    ``window_db`` of the curve, returned as -10 * slope.
    """
    pts = [(float(s), float(v)) for s, v in metric_curve]
    if len(pts) < 2:
        raise DomainError("diversity_order_estimate: need at least two points")
    snr = np.array([p[0] for p in pts])
    val = np.array([p[1] for p in pts])
    if np.any(~(val > 0)):
        raise DomainError("diversity_order_estimate: values must be positive")
    if np.any(np.diff(snr) <= 0):
        raise DomainError("diversity_order_estimate: SNRs must be strictly increasing")
    keep = snr >= snr[-1] - window_db - 1e-9
    if keep.sum() < 2:
        keep[-2:] = True
    slope = np.polyfit(snr[keep], np.log10(val[keep]), 1)[0]
    return -10.0 * float(slope)
