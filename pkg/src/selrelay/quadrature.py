"""Adaptive quadrature oracle for the performance integrals.

Densities here are built only from the product-form selected-relay density
and the exponential law of the direct path, never from the binomial
expansions the closed forms use. The SCR combined-SNR density is obtained
by numerical convolution.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Sequence, Tuple

import numpy as np

from .chanmodel import NetworkConfig, Scheme, cdf_gamma1, pdf_gamma1
from .specfun import erfc

__all__ = [
    "Kernel",
    "Density",
    "IntegralSpec",
    "QuadResult",
    "QuadratureError",
    "adaptive_integrate",
    "integrate",
    "density_function",
]

_LN2 = math.log(2.0)

# Gauss-Kronrod 15/7 abscissae and weights (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[7] = _WG[3]
_WG15[[9, 11, 13]] = _WG[2::-1]


class Kernel(enum.Enum):
    BER = "ber"
    CAPACITY = "capacity"
    OUTAGE_INDICATOR = "outage"
    UNIT = "unit"


class Density(enum.Enum):
    PDF_BETA = "beta"
    PDF_GAMMA1 = "gamma1"
    PDF_MAX = "max"


@dataclass(frozen=True)
class IntegralSpec:
    """Kernel/density pairing over [0, upper).

    For ``OUTAGE_INDICATOR`` the upper limit is the SNR threshold; ``prelog``
    only matters for ``CAPACITY``.
    """

    kernel: Kernel
    density: Density
    upper: float = math.inf
    prelog: float = 1.0

    def __post_init__(self):
        if self.kernel is Kernel.OUTAGE_INDICATOR and not math.isfinite(self.upper):
            raise ValueError("OUTAGE_INDICATOR needs a finite threshold as upper limit")
        if not self.upper >= 0:
            raise ValueError(f"upper limit must be >= 0, got {self.upper}")
        if not self.prelog > 0:
            raise ValueError(f"prelog must be positive, got {self.prelog}")


class QuadResult(NamedTuple):
    value: float
    error_estimate: float


class QuadratureError(ArithmeticError):
    """Subdivision budget exhausted; carries the partial result."""

    def __init__(self, message: str, value: float, achieved: float):
        super().__init__(f"{message} (partial value {value:.6e}, achieved error {achieved:.3e})")
        self.value = value
        self.achieved = achieved


def _gk15(f, a: float, b: float) -> Tuple[float, float]:
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _NODES
    y = f(x)
    k = half * float(np.dot(_WK, y))
    g = half * float(np.dot(_WG15, y))
    return k, abs(k - g)


def adaptive_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    rel_tol: float,
    abs_tol: float = 0.0,
    max_intervals: int = 2000,
) -> QuadResult:
    """Globally adaptive GK15 over consecutive breakpoint intervals.

    Bisects the interval with the largest error estimate until the summed
    estimate is within ``max(rel_tol * |I|, abs_tol)``.
    """
    heap: List[Tuple[float, float, float, float]] = []
    total = 0.0
    total_err = 0.0
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        if b <= a:
            continue
        v, e = _gk15(f, a, b)
        total += v
        total_err += e
        heapq.heappush(heap, (-e, a, b, v))
    n = len(heap)
    while total_err > max(rel_tol * abs(total), abs_tol):
        if n >= max_intervals:
            vals = math.fsum(item[3] for item in heap)
            raise QuadratureError("adaptive quadrature did not converge", vals, total_err)
        neg_e, a, b, v = heapq.heappop(heap)
        m = 0.5 * (a + b)
        if not a < m < b:
            # interval cannot be split further in double precision
            heapq.heappush(heap, (0.0, a, b, v))
            total_err += neg_e
            continue
        v1, e1 = _gk15(f, a, m)
        v2, e2 = _gk15(f, m, b)
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, a, m, v1))
        heapq.heappush(heap, (-e2, m, b, v2))
        n += 1
    value = math.fsum(item[3] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return QuadResult(value, err)


def _pdf_exp(x, mean):
    return np.exp(-x / mean) / mean


def _cdf_exp(x, mean):
    return -np.expm1(-x / mean)


def _convolved_beta_density(cfg: NetworkConfig, rel_tol: float) -> Callable[[np.ndarray], np.ndarray]:
    gbar0 = cfg.require_direct(Scheme.SCR)

    def at(b: float) -> float:
        if b <= 0.0:
            return 0.0

        def integrand(t):
            return _pdf_exp(b - t, gbar0) * pdf_gamma1(t, cfg)

        return adaptive_integrate(integrand, [0.0, b], rel_tol, abs_tol=1e-300).value

    def density(x):
        return np.array([at(v) for v in np.atleast_1d(x)])

    return density


def density_function(density: Density, cfg: NetworkConfig, rel_tol: float = 1e-12):
    """Vectorized density of the effective SNR for one of the oracle densities."""
    if density is Density.PDF_GAMMA1:
        return lambda x: pdf_gamma1(x, cfg)
    if density is Density.PDF_MAX:
        gbar0 = cfg.require_direct(Scheme.ASR)
        return lambda x: (_pdf_exp(x, gbar0) * cdf_gamma1(x, cfg)
                          + _cdf_exp(x, gbar0) * pdf_gamma1(x, cfg))
    return _convolved_beta_density(cfg, rel_tol)


def _survival_envelope(density: Density, cfg: NetworkConfig) -> List[Tuple[float, float]]:
    # P(X > u) <= sum w exp(-c u)
    n = cfg.n_relays
    if density is Density.PDF_GAMMA1:
        return [(float(n), 2.0 / cfg.gbar1)]
    if density is Density.PDF_MAX:
        return [(1.0, 1.0 / cfg.gbar0), (float(n), 2.0 / cfg.gbar1)]
    # gamma0 + gamma1 > u needs gamma0 > u/2 or gamma1 > u/2
    return [(1.0, 0.5 / cfg.gbar0), (float(n), 1.0 / cfg.gbar1)]


def _survival(env, u: float) -> float:
    return sum(w * math.exp(-c * u) for w, c in env)


def _tail_bound(spec: IntegralSpec, env, u: float) -> float:
    s = _survival(env, u)
    if spec.kernel is Kernel.UNIT:
        return s
    if spec.kernel is Kernel.BER:
        return 0.5 * erfc(math.sqrt(u)) * min(1.0, s)
    # log2(1+x) <= log2(1+u) + (x-u)/((1+u) ln 2) for x >= u
    excess = sum(w * math.exp(-c * u) / c for w, c in env)
    return spec.prelog * (math.log2(1.0 + u) * s + excess / ((1.0 + u) * _LN2))


def _kernel_function(spec: IntegralSpec):
    if spec.kernel is Kernel.BER:
        kern = np.frompyfunc(lambda v: 0.5 * erfc(math.sqrt(v)), 1, 1)
        return lambda x: kern(x).astype(float)
    if spec.kernel is Kernel.CAPACITY:
        return lambda x: spec.prelog * np.log1p(x) / _LN2
    return lambda x: np.ones_like(x, dtype=float)


def _breakpoints(env, upper: float, lower: float = 0.0) -> List[float]:
    scale = min([1.0] + [1.0 / c for _, c in env]) / 64.0
    pts = [lower]
    x = max(scale, lower)
    while x < upper:
        if x > lower:
            pts.append(x)
        x *= 4.0
    pts.append(upper)
    return pts


def integrate(spec: IntegralSpec, cfg: NetworkConfig, rel_tol: float = 1e-10,
              max_intervals: int = 2000) -> QuadResult:
    """Integrate kernel x density over [0, spec.upper).

    Semi-infinite domains are truncated at a point where the analytic tail
    envelope falls below ``rel_tol * value / 10``; the truncation point is
    doubled until that holds.
    """
    if not 1e-12 <= rel_tol <= 1e-3:
        raise ValueError(f"rel_tol must lie in [1e-12, 1e-3], got {rel_tol}")
    dens = density_function(spec.density, cfg, rel_tol * 0.01)
    kern = _kernel_function(spec)

    def f(x):
        return kern(x) * dens(x)

    env = _survival_envelope(spec.density, cfg)
    if spec.upper == 0.0:
        return QuadResult(0.0, 0.0)
    if math.isfinite(spec.upper):
        res = adaptive_integrate(f, _breakpoints(env, spec.upper), rel_tol, 1e-300, max_intervals)
        return res

    eps = rel_tol * 1e-3
    u = max(math.log(len(env) * w / eps) / c for w, c in env)
    res = adaptive_integrate(f, _breakpoints(env, u), rel_tol * 0.5, 1e-300, max_intervals)
    value, err = res.value, res.error_estimate
    for _ in range(64):
        tail = _tail_bound(spec, env, u)
        if tail == 0.0 or tail <= rel_tol * abs(value) / 10:
            return QuadResult(value, err + tail)
        ext = adaptive_integrate(f, [u, 2 * u], rel_tol * 0.5, 1e-300, max_intervals)
        value += ext.value
        err += ext.error_estimate
        u *= 2
    raise QuadratureError("tail truncation did not settle", value, err)
