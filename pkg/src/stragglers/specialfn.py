"""Special functions used by the closed-form latency and cost expressions.

Gamma is evaluated with a Lanczos approximation (g=7, 9 terms) and extended
to negative non-integer arguments by reflection.  Several expressions need
Beta values with one negative parameter, so ``beta_ext`` goes through the
signed log-gamma rather than through ``math.lgamma`` (which drops the sign).
"""
from __future__ import annotations

import math

__all__ = [
    "PoleError",
    "gamma",
    "log_gamma",
    "signed_log_gamma",
    "gamma_ratio",
    "digamma",
    "harmonic",
    "gen_harmonic2",
    "beta",
    "beta_ext",
    "inc_beta",
    "reg_inc_beta",
]

EULER_GAMMA = 0.57721566490153286061

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class PoleError(ValueError):
    """Raised when a Gamma argument is a non-positive integer."""


def _check_pole(x: float) -> None:
    if not math.isfinite(x):
        raise ValueError(f"non-finite argument {x!r}")
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x!r}")


def _lanczos_log(x: float) -> float:
    # log Gamma(x) for x >= 0.5
    z = x - 1.0
    s = _LANCZOS_COEF[0]
    for i in range(1, 9):
        s += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * math.log(t) - t + math.log(s)


def signed_log_gamma(x: float) -> tuple[float, float]:
    """Return ``(sign, log|Gamma(x)|)``, valid for negative non-integers too."""
    _check_pole(x)
    if x >= 0.5:
        return 1.0, _lanczos_log(x)
    # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    s = math.sin(math.pi * x)
    sign = 1.0 if s > 0 else -1.0
    return sign, math.log(math.pi / abs(s)) - _lanczos_log(1.0 - x)


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if x <= 0:
        raise ValueError(f"log_gamma needs x > 0, got {x!r}")
    return signed_log_gamma(x)[1]


def gamma(x: float) -> float:
    """Gamma function with analytic continuation to negative non-integers.

    Raises PoleError at 0, -1, -2, ... and OverflowError when the result is
    not representable as a double.
    """
    _check_pole(x)
    if x == math.floor(x) and 0 < x <= 23:
        return float(math.factorial(int(x) - 1))
    sign, lg = signed_log_gamma(x)
    if lg > 709.78:
        raise OverflowError(f"Gamma({x!r}) overflows a double")
    return sign * math.exp(lg)


def gamma_ratio(num: list[float], den: list[float]) -> float:
    """Evaluate prod(Gamma(a) for a in num) / prod(Gamma(b) for b in den).

    Works in log space so that ratios of huge factorials stay finite.
    """
    sign, acc = 1.0, 0.0
    for a in num:
        s, lg = signed_log_gamma(a)
        sign *= s
        acc += lg
    for b in den:
        s, lg = signed_log_gamma(b)
        sign *= s
        acc -= lg
    return sign * math.exp(acc)


_BERNOULLI_TERMS = (
    1.0 / 12,
    -1.0 / 120,
    1.0 / 252,
    -1.0 / 240,
    1.0 / 132,
    -691.0 / 32760,
    1.0 / 12,
)


def digamma(x: float) -> float:
    """psi(x): upward recurrence, then the asymptotic series; reflection below 0."""
    _check_pole(x)
    if x < 0:
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series, p = 0.0, inv2
    for c in _BERNOULLI_TERMS:
        series += c * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x - series


_EXACT_SUM_LIMIT = 100_000


def harmonic(n: float) -> float:
    """Harmonic number H_n for real n >= 0.

    Integer n below 1e5 is summed exactly (compensated); everything else uses
    H_n = psi(n + 1) + Euler's constant, which matches the integral
    definition for real n.
    """
    if n < 0 or not math.isfinite(n):
        raise ValueError(f"harmonic needs a finite n >= 0, got {n!r}")
    if n == math.floor(n) and n <= _EXACT_SUM_LIMIT:
        return math.fsum(1.0 / i for i in range(1, int(n) + 1))
    return digamma(n + 1.0) + EULER_GAMMA


def gen_harmonic2(n: int) -> float:
    """Sum of 1/i**2 for i = 1..n."""
    if n < 0 or int(n) != n:
        raise ValueError(f"gen_harmonic2 needs an integer n >= 0, got {n!r}")
    return math.fsum(1.0 / (i * i) for i in range(1, int(n) + 1))


def beta(m: float, n: float) -> float:
    if m <= 0 or n <= 0:
        raise ValueError(f"beta needs m, n > 0, got ({m!r}, {n!r})")
    return math.exp(log_gamma(m) + log_gamma(n) - log_gamma(m + n))


def beta_ext(m: float, n: float) -> float:
    """Gamma(m) Gamma(n) / Gamma(m + n), allowing negative non-integer m, n."""
    for a in (m, n, m + n):
        if a <= 0 and a == math.floor(a):
            raise PoleError(f"beta_ext({m!r}, {n!r}): Gamma pole at {a!r}")
    return gamma_ratio([m, n], [m + n])


def _beta_cf(x: float, a: float, b: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})")


def _check_beta_domain(q: float, m: float, n: float) -> None:
    if not (0.0 <= q <= 1.0):
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    if not (m > 0 and n > 0):
        raise ValueError(f"m and n must be positive, got ({m!r}, {n!r})")


def reg_inc_beta(q: float, m: float, n: float) -> float:
    """Regularized incomplete Beta I(q; m, n) = B(q; m, n) / B(m, n)."""
    _check_beta_domain(q, m, n)
    if q == 0.0:
        return 0.0
    if q == 1.0:
        return 1.0
    log_front = (
        m * math.log(q) + n * math.log1p(-q)
        - (log_gamma(m) + log_gamma(n) - log_gamma(m + n))
    )
    if q < (m + 1.0) / (m + n + 2.0):
        val = math.exp(log_front) * _beta_cf(q, m, n) / m
    else:
        val = 1.0 - math.exp(log_front) * _beta_cf(1.0 - q, n, m) / n
    return min(1.0, max(0.0, val))


def inc_beta(q: float, m: float, n: float) -> float:
    """Incomplete Beta: integral of u**(m-1) (1-u)**(n-1) over [0, q]."""
    _check_beta_domain(q, m, n)
    if q == 0.0:
        return 0.0
    full = beta(m, n)
    if q == 1.0:
        return full
    if q < (m + 1.0) / (m + n + 2.0):
        # direct branch keeps relative accuracy for small results
        return math.exp(m * math.log(q) + n * math.log1p(-q)) * _beta_cf(q, m, n) / m
    return full * reg_inc_beta(q, m, n)
