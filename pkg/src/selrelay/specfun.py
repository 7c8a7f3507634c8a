"""Special functions and summation helpers.

Double-precision implementations of erfc, the exponential integral E1 and the
lower incomplete beta function, plus the binomial coefficient and the
extended-precision evaluator used by the closed-form performance metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import mpmath

__all__ = [
    "AccuracyBudget",
    "DomainError",
    "ConvergenceError",
    "BinomialCapacityError",
    "erfc",
    "inc_beta_lower",
    "inc_beta_1_half",
    "exp1",
    "exp1_mp",
    "binom",
    "alternating_sum",
    "stable_eval",
]

EULER_GAMMA = 0.57721566490153286061
_SQRT_PI = math.sqrt(math.pi)
_TINY = 1e-300
BINOM_MAX_N = 64


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class ConvergenceError(ArithmeticError):
    """Series or continued fraction did not converge within the term budget."""


class BinomialCapacityError(ValueError):
    """Binomial coefficient requested beyond the supported ``n``."""


@dataclass(frozen=True)
class AccuracyBudget:
    rel_tol: float = 1e-12
    max_terms: int = 500

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")

    @property
    def stop(self) -> float:
        # terms are dropped two digits below the target
        return max(self.rel_tol * 1e-2, 2.0**-53)


DEFAULT_BUDGET = AccuracyBudget()


def _check_finite(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name}: argument must be finite, got {x}")
    return x


def _exp_neg_square(x: float) -> float:
    """exp(-x*x) without the rounding error of forming x*x."""
    # Dekker split of x so that x*x = hi + lo exactly
    c = 134217729.0 * x
    xh = c - (c - x)
    xl = x - xh
    hi = x * x
    lo = ((xh * xh - hi) + 2.0 * xh * xl) + xl * xl
    return math.exp(-hi) * (1.0 - lo)


def erfc(x: float, budget: AccuracyBudget = DEFAULT_BUDGET) -> float:
    """Complementary error function.

    Uses the all-positive-terms series for erf below 1.25 and the even
    contraction of the Laplace continued fraction above it. Underflows to
    zero (through the subnormal range) above x ~ 26.5.
    """
    x = _check_finite("erfc", x)
    if x < 0.0:
        return 2.0 - erfc(-x, budget)
    if x == 0.0:
        return 1.0
    if x < 1.25:
        # erf(x) = 2x/sqrt(pi) e^{-x^2} sum (2x^2)^n / (2n+1)!!
        x2 = 2.0 * x * x
        term = 1.0
        total = 1.0
        for n in range(1, budget.max_terms + 1):
            term *= x2 / (2 * n + 1)
            total += term
            if term < budget.stop * total:
                break
        else:
            raise ConvergenceError(f"erfc series did not converge at x={x}")
        return 1.0 - 2.0 * x / _SQRT_PI * _exp_neg_square(x) * total
    if x > 27.3:
        return 0.0
    # 2x^2+1 - 1*2/(2x^2+5 - 3*4/(2x^2+9 - ...)), modified Lentz
    base = 2.0 * x * x + 1.0
    f = base
    c = base
    d = 0.0
    for k in range(1, budget.max_terms + 1):
        a = -(2.0 * k - 1.0) * (2.0 * k)
        b = base + 4.0 * k
        d = b + a * d
        if d == 0.0:
            d = _TINY
        c = b + a / c
        if c == 0.0:
            c = _TINY
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < budget.stop:
            break
    else:
        raise ConvergenceError(f"erfc continued fraction did not converge at x={x}")
    return 2.0 * x / _SQRT_PI * _exp_neg_square(x) / f


def _betacf(x: float, a: float, b: float, budget: AccuracyBudget) -> float:
    # continued fraction for I_x(a, b), modified Lentz
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, budget.max_terms + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < budget.stop:
            return h
    raise ConvergenceError(f"incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})")


def inc_beta_lower(x: float, a: float, b: float, budget: AccuracyBudget = DEFAULT_BUDGET) -> float:
    """Unregularized lower incomplete beta B_x[a, b] = int_0^x t^(a-1) (1-t)^(b-1) dt."""
    x = _check_finite("inc_beta_lower", x)
    a = _check_finite("inc_beta_lower", a)
    b = _check_finite("inc_beta_lower", b)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"inc_beta_lower: x must lie in [0, 1], got {x}")
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"inc_beta_lower: a and b must be positive, got a={a}, b={b}")
    if x == 0.0:
        return 0.0
    complete = math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
    if x == 1.0:
        return complete
    log_front = a * math.log(x) + b * math.log1p(-x)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) / a * _betacf(x, a, b, budget)
    return complete - math.exp(log_front) / b * _betacf(1.0 - x, b, a, budget)


def inc_beta_1_half(x):
    """B_x[1, 1/2] = 2 (1 - sqrt(1 - x)), written without the cancellation.

    Works on floats and on mpmath numbers alike.
    """
    if not 0 <= x <= 1:
        raise DomainError(f"inc_beta_1_half: x must lie in [0, 1], got {x}")
    sqrt = mpmath.sqrt if isinstance(x, mpmath.mpf) else math.sqrt
    return 2 * x / (1 + sqrt(1 - x))


def _exp1_series(x, log, euler, stop, max_terms):
    # E1(x) = -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k k!)
    total = 0 * x
    power = 1 + 0 * x
    for k in range(1, max_terms + 1):
        power *= -x / k
        term = power / k
        total -= term
        if abs(term) < stop * abs(total):
            return -euler - log(x) + total
    raise ConvergenceError(f"E1 series did not converge at x={x}")


def _exp1_cf(x, exp, stop, max_terms):
    # E1(x) = e^{-x} / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...))), modified Lentz
    b = x + 1
    c = 1 / (0 * x + _TINY)
    d = 1 / b
    h = d
    for i in range(1, max_terms + 1):
        an = -i * i
        b += 2
        d = 1 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1) < stop:
            return h * exp(-x)
    raise ConvergenceError(f"E1 continued fraction did not converge at x={x}")


def exp1(x: float, budget: AccuracyBudget = DEFAULT_BUDGET) -> float:
    """Exponential integral E1(x) for x > 0."""
    x = _check_finite("exp1", x)
    if x <= 0.0:
        raise DomainError(f"exp1: argument must be positive, got {x}")
    if x <= 1.0:
        return _exp1_series(x, math.log, EULER_GAMMA, budget.stop, budget.max_terms)
    return _exp1_cf(x, math.exp, budget.stop, budget.max_terms)


def exp1_mp(x) -> mpmath.mpf:
    """E1 at the current mpmath working precision (same series/fraction split as :func:`exp1`)."""
    x = mpmath.mpf(x)
    if not x > 0:
        raise DomainError(f"exp1_mp: argument must be positive, got {x}")
    stop = mpmath.mp.eps
    max_terms = 40 * mpmath.mp.dps + 500
    if x <= 1:
        return _exp1_series(x, mpmath.log, +mpmath.euler, stop, max_terms)
    return _exp1_cf(x, mpmath.exp, stop, max_terms)


def binom(n: int, k: int) -> int:
    """Exact binomial coefficient, refused for n > 64."""
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"binom: need 0 <= k <= n, got n={n}, k={k}")
    if n > BINOM_MAX_N:
        raise BinomialCapacityError(f"binom: n={n} exceeds the supported maximum {BINOM_MAX_N}")
    return math.comb(n, k)


def alternating_sum(terms: Iterable[float]) -> float:
    """Correctly rounded sum of signed terms (Shewchuk error-free transformations)."""
    return math.fsum(terms)


def stable_eval(
    build: Callable[[], "mpmath.mpf"],
    rel_tol: float = 2.0**-52,
    start_dps: int = 30,
    max_dps: int = 1000,
) -> float:
    """Evaluate ``build()`` in mpmath at doubling precision until two runs agree.

    ``build`` must construct its result from scratch under the ambient
    ``mpmath.mp`` context, so that each call sees the new precision. The
    result is returned as a float.
    """
    dps = start_dps
    with mpmath.workdps(dps):
        prev = build()
    while True:
        dps *= 2
        with mpmath.workdps(dps):
            cur = build()
            diff = abs(cur - prev)
            if diff <= rel_tol * abs(cur) or abs(cur) < 1e-300:
                return float(cur)
        if dps >= max_dps:
            raise ConvergenceError(f"extended-precision evaluation unstable at {dps} digits")
        prev = cur
