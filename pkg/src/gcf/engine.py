"""Convergents, limits and transformations of general continued fractions.

Indexing follows the numerator/denominator recurrences

    p(0) = a(1),  p(1) = a(1) a(2) + b(1),  p(n+2) = a(n+3) p(n+1) + b(n+2) p(n)
    q(0) = 1,     q(1) = a(2),              q(n+2) = a(n+3) q(n+1) + b(n+2) q(n)

so p(m)/q(m) is the convergent of depth K = m + 1.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .bignum import GUARD, check_precision, log10_abs, round_to, to_decimal
from .polyseq import CFSpec, PolySeq

GEOMETRIC = "geometric"
POLYNOMIAL = "polynomial"
UNDETERMINED = "undetermined"
DIVERGENT = "divergent"
UNDEFINED = "undefined"


class CFError(ArithmeticError):
    pass


class ZeroTailDenominator(CFError):
    def __init__(self, depth: int):
        super().__init__(f"tail of the continued fraction vanishes at depth {depth}")
        self.depth = depth


class Divergent(CFError):
    def __init__(self, message: str, estimate: "Optional[LimitEstimate]" = None):
        super().__init__(message)
        self.estimate = estimate


class UndefinedConvergents(CFError):
    def __init__(self, message: str, gaps: int = 0):
        super().__init__(message)
        self.gaps = gaps


@dataclass(frozen=True)
class ConvergentPair:
    m: int
    p: Fraction
    q: Fraction

    @property
    def depth(self) -> int:
        return self.m + 1

    @property
    def value(self) -> Optional[Fraction]:
        return None if self.q == 0 else Fraction(self.p) / Fraction(self.q)


@dataclass(frozen=True)
class LimitEstimate:
    value: Decimal
    achieved_digits: int
    terms_used: int
    convergence_class: str
    order: Optional[int] = None

    @property
    def label(self) -> str:
        if self.convergence_class == POLYNOMIAL:
            return f"polynomial(order {self.order})"
        return self.convergence_class


def eval_finite(pairs: Sequence[tuple]) -> Fraction:
    """Exact value of a1 + b1/(a2 + b2/(... + b_{K-1}/aK)); bK is never used."""
    if not pairs:
        raise ValueError("eval_finite needs at least one (a, b) pair")
    value = Fraction(pairs[-1][0])
    for depth in range(len(pairs) - 1, 0, -1):
        a, b = pairs[depth - 1]
        if value == 0:
            raise ZeroTailDenominator(depth + 1)
        value = Fraction(a) + Fraction(b) / value
    return value


def instantiate(spec: CFSpec, K: int) -> list[tuple]:
    if K < 1:
        raise ValueError("K must be a positive integer")
    return [(Fraction(spec.a(n)), Fraction(spec.b(n))) for n in range(1, K + 1)]


def _stream(spec: CFSpec) -> Iterator[tuple]:
    """Yield (m, p(m), q(m), prod_{j=1}^{m} b(j)) forever."""
    a, b = spec.a, spec.b
    a1, a2, b1 = a(1), a(2), b(1)
    p0, q0 = a1, 1
    p1, q1 = a1 * a2 + b1, a2
    yield 0, p0, q0, 1
    bprod = b1
    yield 1, p1, q1, bprod
    m = 1
    while True:
        an, bn = a(m + 2), b(m + 1)
        p0, p1 = p1, an * p1 + bn * p0
        q0, q1 = q1, an * q1 + bn * q0
        bprod *= bn
        m += 1
        yield m, p1, q1, bprod


def iter_convergents(spec: CFSpec) -> Iterator[ConvergentPair]:
    for m, p, q, _ in _stream(spec):
        yield ConvergentPair(m, p, q)


def pq_convergents(spec: CFSpec, M: int) -> list[ConvergentPair]:
    """Exact (p(m), q(m)) for m = 0..M; zero q(m) is kept, not raised."""
    if M < 0:
        raise ValueError("M must be nonnegative")
    out = []
    for pair in iter_convergents(spec):
        if pair.m > M:
            break
        out.append(pair)
    return out


def richardson(values: Sequence, n: int, order: int, precision: int) -> Decimal:
    """Richardson extrapolation in 1/m of x_n, ..., x_{n+order}.

    Removes the c_1/m, ..., c_order/m^order terms of an expansion
    x_m = L + c_1/m + c_2/m^2 + ... using the weights
    (n+k)^N (-1)^(k+N) / (k! (N-k)!).
    """
    N = order
    if len(values) < N + 1:
        raise ValueError("richardson needs order + 1 values")
    with localcontext() as ctx:
        ctx.prec = precision
        acc = Decimal(0)
        for k in range(N + 1):
            w = (n + k) ** N * math.comb(N, k) * (-1) ** (k + N)
            x = values[k] if isinstance(values[k], Decimal) else to_decimal(values[k], precision)
            acc += x * w
        return acc / math.factorial(N)


_RICHARDSON_MAX = 60


def _richardson_weight_digits(n: int, N: int) -> int:
    # log10 of sum |w_k| <= (n+N)^N 2^N / N!
    if N == 0:
        return 0
    return max(0, math.ceil(N * math.log10(n + N) + N * math.log10(2) - math.lgamma(N + 1) / math.log(10)))


def _try_richardson(window: Sequence[tuple], work: int):
    """Best extrapolation over the orders usable on the trailing window.

    The error of order N is estimated as the larger of the last two
    order-to-order changes, so a single accidental agreement cannot
    masquerade as convergence. Returns (value, log10 error, order).
    """
    M = window[-1][0]
    n_max = min(_RICHARDSON_MAX, len(window) - 1, M // 2)
    if n_max < 3:
        return None
    wp = work + _richardson_weight_digits(M - n_max, n_max) + 10
    xs = {m: to_decimal(Fraction(p) / Fraction(q), wp) for m, p, q in window}
    estimates = []
    for N in range(1, n_max + 1):
        n = M - N
        estimates.append(richardson([xs[n + k] for k in range(N + 1)], n, N, wp))
    with localcontext() as ctx:
        ctx.prec = wp
        diffs = [abs(estimates[i] - estimates[i - 1]) for i in range(1, len(estimates))]
    best = None
    for i in range(1, len(diffs)):
        d = max(diffs[i], diffs[i - 1])
        err = -math.inf if d == 0 else float(d.log10())
        if best is None or err < best[1]:
            best = (estimates[i + 1], err, i + 2)
    return best


def _rel(logd: float, logx: float) -> float:
    return logd - max(0.0, logx)


def estimate_limit(spec: CFSpec, precision: int = 50, max_terms: int = 100_000, max_gaps: int = 25) -> LimitEstimate:
    """Numerical limit of p(m)/q(m) with an honest digit count.

    Successive differences come for free from the determinant identity
    p(m)q(m-1) - p(m-1)q(m) = (-1)^(m+1) prod_{j<=m} b(j), so each step costs
    only logarithms of the exact integers. Geometric (or faster) convergence
    stops once the tail bound |d_m| rho/(1-rho) drops below the working
    precision. At dyadic checkpoints the slope of log|d_m| against log m
    identifies polynomial convergence of order r (|d_m| ~ m^-(r+1)), which is
    then accelerated by Richardson extrapolation in 1/m.
    """
    check_precision(precision)
    work = precision + GUARD
    window: deque = deque(maxlen=_RICHARDSON_MAX + 1)
    rel_at: dict[int, float] = {}
    slopes: list[float] = []
    gaps = 0
    prev_m, prev_q, prev_rel = None, None, None
    sign_prev = None
    sign_flips = 0
    poly_best = None  # (value, err, N, order, m)
    last = None

    def finish(value, digits, m, cls, order=None):
        return LimitEstimate(round_to(value, work), int(min(work, max(0, digits))), m + 1, cls, order)

    for m, p, q, bprod in _stream(spec):
        if m > max_terms:
            break
        if q == 0:
            gaps += 1
            if gaps > max_gaps:
                raise UndefinedConvergents(f"{gaps} vanishing denominators within {m + 1} terms", gaps)
            prev_m = None
            window.clear()
            continue
        window.append((m, p, q))
        last = (m, p, q)
        if bprod == 0:
            # some b(j) = 0 with j <= m: the fraction terminates and p(m)/q(m) is exact
            return finish(to_decimal(Fraction(p) / Fraction(q), work), work, m, GEOMETRIC)
        if prev_m != m - 1:
            prev_m, prev_q = m, q
            continue
        logx = log10_abs(p) - log10_abs(q) if p != 0 else -math.inf
        logd = log10_abs(bprod) - log10_abs(q) - log10_abs(prev_q)
        rel = _rel(logd, logx)
        rel_at[m] = rel
        # sign of d_m = x_m - x_{m-1}
        sign = (1 if (m + 1) % 2 == 0 else -1) * (1 if bprod > 0 else -1) * (1 if q * prev_q > 0 else -1)
        if sign_prev is not None and sign != sign_prev:
            sign_flips += 1
        elif sign_prev is not None:
            sign_flips = 0
        sign_prev = sign

        if prev_rel is not None and rel < prev_rel:
            rho_log = rel - prev_rel
            rho = 10 ** rho_log
            bound = rel + math.log10(rho / (1 - rho)) if rho < 1 else math.inf
            if bound < -work and rel < -work:
                digits = -bound if bound > -math.inf else work
                return finish(to_decimal(Fraction(p) / Fraction(q), work), digits, m, GEOMETRIC)
        prev_m, prev_q, prev_rel = m, q, rel

        if m >= 16 and m & (m - 1) == 0 and (m // 2) in rel_at:
            slope = (rel - rel_at[m // 2]) / math.log10(2)
            slopes.append(slope)
            if len(slopes) >= 3 and m >= 64 and all(s > -0.1 for s in slopes[-3:]):
                raise Divergent(f"convergents stop contracting by m = {m}")
            if len(slopes) >= 2 and sign_flips == 0:
                s1, s2 = slopes[-2], slopes[-1]
                r1 = -s2 - 1
                if abs(s1 - s2) < 0.15 and r1 > 0.6 and abs(r1 - round(r1)) < 0.2:
                    order = int(round(r1))
                    contiguous = [w for w in window]
                    if all(contiguous[i + 1][0] == contiguous[i][0] + 1 for i in range(len(contiguous) - 1)):
                        res = _try_richardson(contiguous, work)
                        stalled = res is not None and poly_best is not None and res[1] > poly_best[1] - 1
                        if res is not None and (poly_best is None or res[1] <= poly_best[1]):
                            poly_best = (res[0], res[1], res[2], order, m)
                        if stalled and m >= 512:
                            break
                        if poly_best is not None:
                            scale = max(0.0, float(log10_abs(poly_best[0])) if poly_best[0] != 0 else 0.0)
                            if -(poly_best[1] - scale) >= precision:
                                v, err, _, order, mm = poly_best
                                return finish(v, -(err - scale), mm, POLYNOMIAL, order)

    if last is None:
        raise UndefinedConvergents("no defined convergent", gaps)
    m, p, q = last
    if poly_best is not None:
        v, err, _, order, mm = poly_best
        scale = max(0.0, float(log10_abs(v)) if v != 0 else 0.0)
        return finish(v, math.floor(-(err - scale)), mm, POLYNOMIAL, order)
    x = to_decimal(Fraction(p) / Fraction(q), work)
    if prev_rel is None:
        raise UndefinedConvergents("too few consecutive defined convergents", gaps)
    if slopes and slopes[-1] > -0.1:
        raise Divergent(f"no contraction within {max_terms} terms",
                        LimitEstimate(x, 0, m + 1, DIVERGENT))
    return finish(x, math.floor(-prev_rel), m, UNDETERMINED)


def scale_equivalence(spec: CFSpec, c: PolySeq) -> CFSpec:
    """[a(n) : b(n)] -> [c(n-1) a(n) : c(n-1) c(n) b(n)], requiring c(0) = 1."""
    if not isinstance(c, PolySeq):
        c = PolySeq.const(c)
    if Fraction(c(0)) != 1:
        raise ValueError("equivalence transformation needs c(0) = 1")
    c_prev = c.shift(-1)
    return CFSpec(c_prev * spec.a, c_prev * c * spec.b)


def to_euler_form(spec: CFSpec) -> Optional[PolySeq]:
    """r(n) = -b(n) when a(n) = r(n-1) + 1 identically, else None."""
    residual = spec.a - 1 + spec.b.shift(-1)
    if residual.is_zero():
        return -spec.b
    return None


def euler_value(r: PolySeq, precision: int = 50, max_terms: int = 100_000) -> LimitEstimate:
    """r(0) + 1 / sum_{k>=0} prod_{j=1}^{k} r(j), the value of [r(n-1)+1 : -r(n)]."""
    check_precision(precision)
    work = precision + GUARD
    r0 = Fraction(r(0))
    with localcontext() as ctx:
        ctx.prec = work + 5
        total = Decimal(1)
        term = Decimal(1)
        prev_ratio = None
        for k in range(1, max_terms + 1):
            rk = Fraction(r(k))
            term = term * Decimal(rk.numerator) / Decimal(rk.denominator)
            total += term
            if term == 0:
                break
            ratio = abs(rk)
            if ratio < 1 and (prev_ratio is None or ratio <= prev_ratio * (1 + Fraction(1, 10**6))):
                rho = Decimal(ratio.numerator) / Decimal(ratio.denominator)
                tail = abs(term) * rho / (1 - rho)
                if tail == 0 or tail < abs(total) * Decimal(10) ** (-work):
                    break
            prev_ratio = ratio
        else:
            raise Divergent(f"sum of products fails the ratio test within {max_terms} terms")
        if total == 0:
            raise Divergent("sum of products vanishes; value is infinite")
        value = Decimal(r0.numerator) / Decimal(r0.denominator) + 1 / total
    return LimitEstimate(round_to(value, work), work, k, GEOMETRIC)
