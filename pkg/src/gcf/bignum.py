"""Exact rationals and arbitrary-precision constants.

Rationals are :class:`fractions.Fraction`; reals are :class:`decimal.Decimal`
values produced under a thread-local context. Every public function takes a
``precision`` in significant decimal digits and works internally with
``GUARD`` extra digits. Series are summed exactly in rational arithmetic
(binary splitting where it matters) and only the final quotient is rounded,
so the truncation bound is the only source of error besides that rounding.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Union

Rational = Fraction
BigFloat = Decimal
RationalLike = Union[int, Fraction]

GUARD = 10
MIN_PRECISION = 10


def check_precision(precision: int) -> None:
    if not isinstance(precision, int) or precision < MIN_PRECISION:
        raise ValueError(f"precision must be an integer >= {MIN_PRECISION}, got {precision!r}")


def to_decimal(x: RationalLike, precision: int) -> Decimal:
    """Round the exact rational ``x`` to ``precision`` significant digits."""
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = precision
        return Decimal(x.numerator) / Decimal(x.denominator)


def round_to(x: Decimal, precision: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = precision
        return +x


def log10_abs(x: RationalLike | Decimal) -> float:
    """log10|x| for huge ints/fractions without overflow; -inf for zero."""
    if x == 0:
        return -math.inf
    if isinstance(x, Decimal):
        return float(abs(x).log10())
    x = Fraction(x)
    return math.log10(abs(x.numerator)) - math.log10(x.denominator)


def factorial(n: int) -> int:
    if n < 0:
        raise ValueError("factorial of a negative integer")
    return math.factorial(n)


def derangement(k: int) -> int:
    """Number of fixed-point-free permutations of ``k`` objects."""
    if k < 0:
        raise ValueError("derangement index must be nonnegative")
    d = 1
    for j in range(1, k + 1):
        d = j * d + (-1) ** j
    return d


def _exp_series_bs(u: int, v: int, a: int, b: int) -> tuple[int, int, int]:
    # Binary splitting over terms j in [a, b) with ratio u / (v * j).
    if b - a == 1:
        return u, v * a, u
    mid = (a + b) // 2
    p1, q1, t1 = _exp_series_bs(u, v, a, mid)
    p2, q2, t2 = _exp_series_bs(u, v, mid, b)
    return p1 * p2, q1 * q2, t1 * q2 + p1 * t2


def _exp_terms_needed(x: Fraction, digits: int) -> int:
    # smallest N with 2 |x|^N / N! < 10^-digits (valid once |x| <= N / 2)
    ax = float(abs(x))
    target = -(digits + 1) * math.log(10)
    n = max(2, int(2 * ax) + 2)
    lx = math.log(ax) if ax > 0 else -math.inf
    while math.log(2) + n * lx - math.lgamma(n + 1) > target:
        n += 1
    return n


def exp_partial_sum(x: Fraction, n_terms: int) -> Fraction:
    """Exact value of sum_{k < n_terms} x^k / k!."""
    if n_terms <= 0:
        return Fraction(0)
    if n_terms == 1 or x == 0:
        return Fraction(1)
    p, q, t = _exp_series_bs(x.numerator, x.denominator, 1, n_terms)
    return 1 + Fraction(t, q)


def eval_exp(x: RationalLike, precision: int) -> Decimal:
    """e**x for rational ``x``.

    The argument is halved ``s`` times until |x| <= 1/2, the Taylor series is
    summed exactly by binary splitting with the tail bounded by
    ``2 |x|^N / N!``, and the result is squared back ``s`` times with
    ``s * log10(2)`` extra digits to absorb the relative error doubling.
    Negative arguments are evaluated as reciprocals.
    """
    check_precision(precision)
    x = Fraction(x)
    if x == 0:
        return Decimal(1)
    if x < 0:
        inv = eval_exp(-x, precision + 2)
        with localcontext() as ctx:
            ctx.prec = precision
            return 1 / inv
    s = 0
    while abs(x) / (1 << s) > Fraction(1, 2):
        s += 1
    y = x / (1 << s)
    work = precision + GUARD + math.ceil(s * 0.30103) + 2
    total = exp_partial_sum(y, _exp_terms_needed(y, work))
    with localcontext() as ctx:
        ctx.prec = work
        r = Decimal(total.numerator) / Decimal(total.denominator)
        for _ in range(s):
            r = r * r
        ctx.prec = precision
        return +r


def _arctan_inv_fixed(n: int, scale: int) -> int:
    # arctan(1/n) * scale; each truncating division costs < 1 unit
    power = scale // n
    n2 = n * n
    total = power
    k = 1
    sign = -1
    while power:
        power //= n2
        total += sign * (power // (2 * k + 1))
        sign = -sign
        k += 1
    return total


def eval_pi(precision: int) -> Decimal:
    """pi by Machin's formula, pi = 16 atan(1/5) - 4 atan(1/239)."""
    check_precision(precision)
    work = precision + GUARD
    scale = 10 ** work
    fixed = 16 * _arctan_inv_fixed(5, scale) - 4 * _arctan_inv_fixed(239, scale)
    with localcontext() as ctx:
        ctx.prec = precision
        return Decimal(fixed) / Decimal(scale)


_BERNOULLI = [Fraction(1)]


def bernoulli(n: int) -> Fraction:
    """B_n (B_1 = -1/2), extended incrementally from sum_k C(m+1, k) B_k = 0."""
    while len(_BERNOULLI) <= n:
        m = len(_BERNOULLI)
        acc = sum((math.comb(m + 1, k) * _BERNOULLI[k] for k in range(m)), Fraction(0))
        _BERNOULLI.append(-acc / (m + 1))
    return _BERNOULLI[n]


def hurwitz_zeta_exact(s: int, z: Fraction, digits: int) -> Fraction:
    """Rational approximation of sum_{j>=0} (z+j)^-s within 10^-digits.

    Direct summation of the first N terms plus the Euler-Maclaurin tail
    integral, half-term and Bernoulli corrections. The remainder is bounded
    by twice the first omitted correction (real s > 1, monotone derivatives).
    """
    n_direct = max(10, digits // 2 + s)
    total = sum((Fraction(1) / (z + j) ** s for j in range(n_direct)), Fraction(0))
    w = z + n_direct
    total += Fraction(1, s - 1) / w ** (s - 1) + Fraction(1, 2) / w ** s
    bound = Fraction(1, 10 ** (digits + 1))
    rising = Fraction(s)  # s (s+1) ... (s + 2j - 2)
    j = 1
    while True:
        term = bernoulli(2 * j) / math.factorial(2 * j) * rising / w ** (s + 2 * j - 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        nxt = bernoulli(2 * j + 2) / math.factorial(2 * j + 2) * rising / w ** (s + 2 * j + 1)
        total += term
        if 2 * abs(nxt) < bound:
            return total
        j += 1
        if j > 10 * digits + 100:
            raise ArithmeticError("Euler-Maclaurin tail failed to converge")


def eval_zeta(k: int, precision: int) -> Decimal:
    """Riemann zeta at an integer k >= 2."""
    check_precision(precision)
    if not isinstance(k, int) or k < 2:
        raise ValueError("zeta is only provided for integers k >= 2")
    # zeta(k) in [1, 2], so absolute and relative digits coincide up to one
    return to_decimal(hurwitz_zeta_exact(k, Fraction(1), precision + GUARD), precision)


def polygamma_series(k: int, z: RationalLike, precision: int) -> Decimal:
    """(-1)^(k+1) k! sum_{j>=0} (z+j)^-(k+1), taken literally as a definition."""
    check_precision(precision)
    z = Fraction(z)
    if not isinstance(k, int) or k < 1:
        raise ValueError("polygamma order must be an integer >= 1")
    if z <= 0:
        raise ValueError("polygamma_series requires z > 0")
    # sum is at least z^-(k+1); ask for enough absolute digits to cover it
    lead = max(0, math.ceil((k + 1) * math.log10(float(z + 1))))
    h = hurwitz_zeta_exact(k + 1, z, precision + GUARD + lead)
    return to_decimal((-1) ** (k + 1) * math.factorial(k) * h, precision)


def eval_sinh_cosh(x: RationalLike | Decimal, precision: int) -> tuple[Decimal, Decimal]:
    """(sinh x, cosh x); a Decimal argument is taken as the exact rational it encodes."""
    check_precision(precision)
    x = Fraction(x)
    if x == 0:
        return Decimal(0), Decimal(1)
    # sinh loses about -log10|x| digits to cancellation for small |x|
    extra = max(0, math.ceil(-log10_abs(x))) + 2
    e = eval_exp(x, precision + GUARD + extra)
    with localcontext() as ctx:
        ctx.prec = precision + GUARD + extra
        inv = 1 / e
        sinh, cosh = (e - inv) / 2, (e + inv) / 2
    return round_to(sinh, precision), round_to(cosh, precision)


def incomplete_gamma_int(m: int, a: RationalLike, precision: int) -> Decimal:
    """Upper incomplete gamma Gamma(m, a) for integer m >= 1 and rational a.

    Uses the terminating identity Gamma(m, a) = (m-1)! e^-a sum_{s<m} a^s/s!;
    the polynomial part is exact, so only e^-a carries rounding error.
    """
    check_precision(precision)
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise ValueError("incomplete_gamma_int needs an integer order m >= 1")
    a = Fraction(a)
    poly = math.factorial(m - 1) * exp_partial_sum(a, m)
    if poly == 0:
        return Decimal(0)
    ea = eval_exp(-a, precision + GUARD)
    with localcontext() as ctx:
        ctx.prec = precision + GUARD
        r = ea * Decimal(poly.numerator) / Decimal(poly.denominator)
    return round_to(r, precision)
