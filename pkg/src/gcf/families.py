"""Closed forms for three infinite families of continued fractions.

* linear family  [n + k : a n] = a^D / ((D-1)! (e^a - sum_{s<D} a^s/s!)),  D = a + k + 1 >= 1
* quadratic family  [a n^2 + b n + 1 : -a n^2 - b n] = (F + 2(2a+b)(a+b+1)) / (F + 2(2a+b))
  with F(a, b) = 2 sum_k 1 / ((k+2)! (3 + b/a)^(k) a^k)
* zeta family  [(n-1)^k + n^k : -n^(2k)] = 1/zeta(k)

plus the Kummer/Tricomi pieces whose differential equation governs the
generating functions of the linear family's convergents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Optional

from .bignum import (
    GUARD,
    check_precision,
    derangement,
    eval_exp,
    eval_pi,
    eval_sinh_cosh,
    eval_zeta,
    exp_partial_sum,
    log10_abs,
    polygamma_series,
    round_to,
    to_decimal,
)
from .engine import estimate_limit
from .polyseq import CFSpec, PolySeq, parse_polyseq

BASES = ("1", "exp", "sinh", "cosh", "zeta", "pi_pow")
_LOG10E = math.log10(math.e)


class CrossCheckError(ArithmeticError):
    """Closed form and convergent extrapolation disagree."""


@dataclass(frozen=True)
class Term:
    coeff: Fraction
    basis: str = "1"
    arg: Fraction = Fraction(0)

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        object.__setattr__(self, "arg", Fraction(self.arg))

    def evaluate(self, precision: int) -> Decimal:
        if self.basis == "1":
            base = Decimal(1)
        elif self.basis == "exp":
            base = eval_exp(self.arg, precision)
        elif self.basis in ("sinh", "cosh"):
            s, c = eval_sinh_cosh(self.arg, precision)
            base = s if self.basis == "sinh" else c
        elif self.basis == "zeta":
            base = eval_zeta(int(self.arg), precision)
        else:
            with localcontext() as ctx:
                ctx.prec = precision
                base = eval_pi(precision) ** int(self.arg)
        with localcontext() as ctx:
            ctx.prec = precision
            return base * Decimal(self.coeff.numerator) / Decimal(self.coeff.denominator)

    def to_json(self) -> dict:
        return {"coeff": _fs(self.coeff), "basis": self.basis, "arg": _fs(self.arg)}

    @classmethod
    def from_json(cls, obj: dict) -> "Term":
        return cls(Fraction(obj["coeff"]), obj["basis"], Fraction(obj["arg"]))


def _fs(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class ClosedFormValue:
    """A value together with its exact description.

    ``terms`` / ``den_terms`` are the numerator and denominator as rational
    combinations of basis constants; both empty means the value has no such
    description (only ``expr``). ``value`` is correct to ``precision`` digits.
    """

    expr: str
    value: Decimal
    precision: int
    terms: tuple = ()
    den_terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(t for t in self.terms if t.coeff != 0))
        object.__setattr__(self, "den_terms", tuple(t for t in self.den_terms if t.coeff != 0))

    def reevaluate(self, precision: int) -> Decimal:
        if not self.terms:
            raise ValueError(f"no exact term structure for {self.expr}")
        work = precision + GUARD
        # the denominators here can cancel badly (e^a minus its Taylor head)
        for extra in (10, 40, 160, 640):
            num = _sum_terms(self.terms, work + extra)
            den = _sum_terms(self.den_terms, work + extra) if self.den_terms else Decimal(1)
            parts = [abs(t.evaluate(work + extra)) for t in self.den_terms] or [Decimal(1)]
            lost = 0 if den == 0 else max(0.0, float((max(parts) / abs(den)).log10()))
            if lost < extra - 2:
                break
        with localcontext() as ctx:
            ctx.prec = work
            return round_to(num / den, precision)

    def to_json(self) -> dict:
        out = {
            "expr": self.expr,
            "terms": [t.to_json() for t in self.terms],
            "value": str(self.value),
            "precision": self.precision,
        }
        if self.den_terms:
            out["den_terms"] = [t.to_json() for t in self.den_terms]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ClosedFormValue":
        return cls(
            expr=obj["expr"],
            value=Decimal(obj["value"]),
            precision=int(obj["precision"]),
            terms=tuple(Term.from_json(t) for t in obj.get("terms", [])),
            den_terms=tuple(Term.from_json(t) for t in obj.get("den_terms", [])),
        )


def _sum_terms(terms, precision: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = precision
        total = Decimal(0)
        for t in terms:
            total += t.evaluate(precision)
        return total


# -- linear family ------------------------------------------------------------


@dataclass(frozen=True)
class Family1Params:
    a: int
    k: int
    D: int = field(init=False)

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("a = 0 degenerates the fraction to a(1)")
        D = self.a + self.k + 1
        if D < 1:
            raise ValueError(f"need D = a + k + 1 >= 1, got {D}")
        object.__setattr__(self, "D", D)

    def spec(self) -> CFSpec:
        return CFSpec(PolySeq((self.k, 1)), PolySeq((0, self.a)))


def _exp_head(a: int, D: int) -> Fraction:
    return exp_partial_sum(Fraction(a), D)


def _exp_minus_head(a: int, D: int, precision: int) -> Decimal:
    """e^a - sum_{s<D} a^s/s! with enough digits to survive the cancellation."""
    head = _exp_head(a, D)
    # |tail| >= |a|^D e^min(a,0) / D!, while the operands are about max(e^a, |head|)
    floor = log10_abs(Fraction(a) ** D / math.factorial(D)) + min(a, 0) * _LOG10E
    top = max(a * _LOG10E, log10_abs(head) if head else 0.0)
    work = precision + GUARD + max(0, math.ceil(top - floor)) + 5
    ea = eval_exp(a, work)
    with localcontext() as ctx:
        ctx.prec = work
        return ea - Decimal(head.numerator) / Decimal(head.denominator)


def family1_limit(params: Family1Params, precision: int = 50) -> ClosedFormValue:
    check_precision(precision)
    a, D = params.a, params.D
    work = precision + GUARD
    tail = _exp_minus_head(a, D, work)
    num = Fraction(a) ** D
    fact = math.factorial(D - 1)
    with localcontext() as ctx:
        ctx.prec = work
        value = Decimal(num.numerator) / (fact * tail)
    head = _exp_head(a, D)
    return ClosedFormValue(
        expr=f"({a})^{D} / ({D - 1}! (e^({a}) - sum_{{s<{D}}} ({a})^s/s!))",
        value=round_to(value, precision),
        precision=precision,
        terms=(Term(num),),
        den_terms=(Term(fact, "exp", a), Term(-fact * head)),
    )


def family1_moebius(params: Family1Params) -> tuple:
    """Integers (p1, p2, p3, p4) with limit = (p1 + p2 e)/(p3 + p4 e), for a = +-1.

    Read off the exact data of family1_limit: N / (F e^a + G) with N, F, G
    rational, cleared of denominators. Not reduced or sign-normalized.
    """
    if abs(params.a) != 1:
        raise ValueError("a Möbius form in e exists only for a = 1 or a = -1")
    cf = family1_limit(params, 20)
    N = cf.terms[0].coeff
    F = next(t.coeff for t in cf.den_terms if t.basis == "exp")
    G = sum((t.coeff for t in cf.den_terms if t.basis == "1"), Fraction(0))
    L = math.lcm(N.denominator, F.denominator, G.denominator)
    N, F, G = int(N * L), int(F * L), int(G * L)
    if params.a == 1:
        return (N, 0, G, F)
    # N / (F/e + G) = N e / (F + G e)
    return (0, N, F, G)


def family1_derangement_form(k: int, precision: int = 50) -> ClosedFormValue:
    """[n + k + 1 : -n] = (-1)^k e / (e k! sum_{s<=k} (-1)^s/s! - k!).

    Evaluated twice: literally, and through the derangement number
    D_k = k! sum_{s<=k} (-1)^s/s!; the two must agree.
    """
    check_precision(precision)
    if k < 0:
        raise ValueError("k must be nonnegative")
    kf = math.factorial(k)
    dk = derangement(k)
    # e D_k - k! ~ 1/(k+1): about log10(k!) digits cancel
    work = precision + GUARD + math.ceil(math.log10(kf + 1)) + 5
    e = eval_exp(1, work)
    sign = (-1) ** k
    with localcontext() as ctx:
        ctx.prec = work
        partial = Decimal(0)
        term = Decimal(1)
        for s in range(k + 1):
            if s:
                term = -term / s
            partial += term
        literal = sign * e / (e * kf * partial - kf)
        via_dk = sign * e / (e * dk - kf)
        if literal != via_dk and abs(literal - via_dk) > abs(via_dk) * Decimal(10) ** (-(precision + 2)):
            raise ArithmeticError("derangement form disagrees with its literal evaluation")
    return ClosedFormValue(
        expr=f"(-1)^{k} e / (e * D_{k} - {k}!)",
        value=round_to(via_dk, precision),
        precision=precision,
        terms=(Term(sign, "exp", 1),),
        den_terms=(Term(dk, "exp", 1), Term(-kf)),
    )


def family1_asymptotic_constants(params: Family1Params, precision: int = 50):
    """(B_p, B_q): coefficients of the Tricomi solution in the egfs of p and q.

    B_p = (-a)^(D+1) is rational; B_q = (-1)^D a (D-1)! (sum_{s<D} a^s/s! - e^a).
    Their ratio is the limit of the fraction.
    """
    check_precision(precision)
    a, D = params.a, params.D
    bp = Fraction(-a) ** (D + 1)
    c = (-1) ** D * a * math.factorial(D - 1)
    head = _exp_head(a, D)
    work = precision + GUARD
    tail = _exp_minus_head(a, D, work)
    with localcontext() as ctx:
        ctx.prec = work
        bq = -c * tail
        ratio = Decimal(bp.numerator) / Decimal(bp.denominator) / bq
    bq_value = ClosedFormValue(
        expr=f"(-1)^{D} ({a}) ({D - 1})! (sum_{{s<{D}}} ({a})^s/s! - e^({a}))",
        value=round_to(bq, precision),
        precision=precision,
        terms=(Term(c * head), Term(-c, "exp", a)),
    )
    limit = family1_limit(params, precision).value
    if abs(ratio - limit) > abs(limit) * Decimal(10) ** (-(precision - 2)):
        raise ArithmeticError("B_p / B_q does not reproduce the closed form")
    return bp, bq_value


# -- confluent hypergeometric pieces ---------------------------------------------


def _falling(k: int, d: int) -> int:
    out = 1
    for i in range(d):
        out *= k - i
    return out


def kummer_M(a, b, z, precision: int = 50, terms: Optional[int] = None, derivative: int = 0) -> Decimal:
    """Kummer's M(a, b, z) = sum_k a^(k) / (b^(k) k!) z^k, or its derivative.

    Rational a, b, z. The series is summed exactly; the tail after the last
    term is bounded geometrically using the term ratio bound
    |z| (|a| + k) / ((k - |b|)(k + 1 - d)). With ``terms`` given, a
    ValueError is raised if that many terms cannot meet the precision.
    """
    check_precision(precision)
    a, b, z = Fraction(a), Fraction(b), Fraction(z)
    if b <= 0 and b.denominator == 1:
        raise ValueError("b must not be a nonpositive integer")
    d = derivative
    work = precision + GUARD
    mag_a, mag_b, mag_z = abs(a), abs(b), abs(z)
    coeff = Fraction(1)  # a^(k) / (b^(k) k!)
    total = Fraction(0)
    target = Fraction(1, 10 ** (work + 1))
    k = 0
    limit = terms if terms is not None else 100 * work + 1000
    while k < limit:
        if k >= d:
            total += coeff * _falling(k, d) * z ** (k - d)
        coeff = coeff * (a + k) / ((b + k) * (k + 1))
        k += 1
        if coeff == 0:
            break
        if k > d and k > mag_b + 1:
            rho = mag_z * (mag_a + k) / ((k - mag_b) * (k + 1 - d))
            if rho < Fraction(1, 2):
                nxt = abs(coeff * _falling(k, d)) * mag_z ** (k - d)
                if 2 * nxt < target * max(1, abs(total)):
                    break
    else:
        if terms is not None:
            raise ValueError(f"{terms} terms do not reach {precision} digits")
    return to_decimal(total, precision)


def tricomi_U_terminating(a, n: int, z, precision: int = 50, derivative: int = 0) -> Decimal:
    """U(a, a+n+1, z) = z^-a sum_{s<=n} C(n, s) a^(s) z^-s for a nonnegative integer n."""
    check_precision(precision)
    a = Fraction(a)
    if n < 0:
        raise ValueError("n must be nonnegative")
    zq = Fraction(z)
    if zq == 0:
        raise ValueError("U has a pole at z = 0")
    if a.denominator != 1:
        raise ValueError("only integer a is supported (keeps powers of z rational)")
    total = Fraction(0)
    rising = Fraction(1)
    for s in range(n + 1):
        if s:
            rising *= a + s - 1
        e = -(a + s)  # z^e, differentiated `derivative` times
        c = Fraction(math.comb(n, s)) * rising
        for i in range(derivative):
            c *= e - i
        total += c * zq ** int(e - derivative)
    return to_decimal(total, precision)


def tricomi_U_special(D: int, z, precision: int = 50, derivative: int = 0) -> Decimal:
    """U(D, D+2, z) = z^-D (1 + D/z)."""
    if not isinstance(D, int) or D < 1:
        raise ValueError("D must be a positive integer")
    return tricomi_U_terminating(D, 1, z, precision, derivative)


# -- quadratic family ------------------------------------------------------------


@dataclass(frozen=True)
class Family2Params:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.a <= 0:
            raise ValueError("family 2 needs a > 0")
        if self.b < 0:
            raise ValueError("family 2 needs b >= 0")

    def spec(self) -> CFSpec:
        a, b = self.a, self.b
        return CFSpec(PolySeq((1, b, a)), PolySeq((0, -b, -a)))


def family2_F(a, b, precision: int = 50) -> Decimal:
    """F(a, b) = 2 sum_{k>=0} 1 / ((k+2)! (3 + b/a)^(k) a^k).

    Also accepts b < 0 as long as 3 + b/a is not a nonpositive integer.
    """
    check_precision(precision)
    a, b = Fraction(a), Fraction(b)
    if a <= 0:
        raise ValueError("F(a, b) needs a > 0")
    c = 3 + b / a
    if c <= 0 and c.denominator == 1:
        raise ValueError("3 + b/a must not be a nonpositive integer")
    work = precision + GUARD
    target = Fraction(1, 10 ** (work + 1))
    term = Fraction(1, 2)  # k = 0: 1/2!
    total = Fraction(0)
    k = 0
    while True:
        total += term
        ratio = 1 / ((k + 3) * (c + k) * a)
        term = term * ratio
        k += 1
        rho = abs(1 / ((k + 3) * (c + k) * a)) if c + k > 0 else None
        if rho is not None and rho < Fraction(1, 2) and 2 * abs(term) < target * max(1, abs(total)):
            break
    return to_decimal(2 * total, precision)


def family2_halfint_series(a, m: int, precision: int = 50) -> Decimal:
    """F(a, a(m - 1/2)) through the factorial form valid when b/a = m - 1/2.

    2 (4+2m)! / (m+2)! * sum_k (k+m+2)! / ((k+2)! (2k+2m+4)!) (4/a)^k
    """
    check_precision(precision)
    a = Fraction(a)
    if a <= 0:
        raise ValueError("a must be positive")
    if m < 0:
        raise ValueError("m must be nonnegative")
    work = precision + GUARD
    target = Fraction(1, 10 ** (work + 1))
    x = 4 / a
    term = Fraction(math.factorial(m + 2), 2 * math.factorial(2 * m + 4))
    total = Fraction(0)
    k = 0
    while True:
        total += term
        # t_{k+1}/t_k = (k+m+3) x / ((k+3)(2k+2m+5)(2k+2m+6))
        term = term * (k + m + 3) * x / ((k + 3) * (2 * k + 2 * m + 5) * (2 * k + 2 * m + 6))
        k += 1
        if 2 * term < target * total:
            break
    pref = Fraction(2 * math.factorial(4 + 2 * m), math.factorial(m + 2))
    return to_decimal(pref * total, precision)


def _family2_affine(params: Family2Params):
    a, b = params.a, params.b
    return 2 * (2 * a + b) * (a + b + 1), 2 * (2 * a + b)


def family2_limit(params: Family2Params, precision: int = 50, check: bool = True) -> ClosedFormValue:
    """(F + 2(2a+b)(a+b+1)) / (F + 2(2a+b)), cross-checked against the convergents."""
    check_precision(precision)
    work = precision + GUARD
    F = family2_F(params.a, params.b, work)
    X, Y = _family2_affine(params)
    with localcontext() as ctx:
        ctx.prec = work
        value = (F + Decimal(X.numerator) / Decimal(X.denominator)) / (F + Decimal(Y.numerator) / Decimal(Y.denominator))
    if check:
        est = estimate_limit(params.spec(), precision=20, max_terms=20_000)
        tol = Decimal(10) ** -min(est.achieved_digits - 2, precision)
        if est.achieved_digits < 6 or abs(est.value - value) > tol * max(1, abs(value)):
            raise CrossCheckError(
                f"family 2 at a={params.a}, b={params.b}: closed form {value} vs convergents {est.value}"
            )
    a, b = params.a, params.b
    return ClosedFormValue(
        expr=f"(F({a}, {b}) + {X}) / (F({a}, {b}) + {Y})",
        value=round_to(value, precision),
        precision=precision,
    )


# -- zeta family -----------------------------------------------------------------


@dataclass(frozen=True)
class Family3Params:
    k: int

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 2:
            raise ValueError("family 3 needs an integer k >= 2")

    def spec(self) -> CFSpec:
        k = self.k
        return CFSpec(parse_polyseq(f"(n-1)^{k} + n^{k}"), parse_polyseq(f"-n^{2 * k}"))


def family3_limit(params: Family3Params, precision: int = 50) -> ClosedFormValue:
    check_precision(precision)
    z = eval_zeta(params.k, precision + GUARD)
    with localcontext() as ctx:
        ctx.prec = precision + GUARD
        value = 1 / z
    return ClosedFormValue(
        expr=f"1/zeta({params.k})",
        value=round_to(value, precision),
        precision=precision,
        terms=(Term(1),),
        den_terms=(Term(1, "zeta", params.k),),
    )


def family3_pq_closed(k: int, n: int) -> tuple[int, Fraction]:
    """p(n) = (n+1)!^k and q(n) = (n+1)!^k H_{n+1}^(k) (generalized harmonic number)."""
    if k < 2 or n < 0:
        raise ValueError("need k >= 2 and n >= 0")
    p = math.factorial(n + 1) ** k
    h = sum((Fraction(1, j**k) for j in range(1, n + 2)), Fraction(0))
    return p, p * h


def family3_q_polygamma(k: int, n: int, precision: int = 50) -> Decimal:
    """(n+1)!^k (psi(k, n+2)/(k-1)! + zeta(k)) with psi taken as the displayed series.

    Kept to document that this form does not reproduce the recurrence's
    q(n) (k=3, n=1 gives about 10.09 rather than 9); see family3_pq_closed.
    """
    check_precision(precision)
    work = precision + GUARD
    psi = polygamma_series(k, n + 2, work)
    z = eval_zeta(k, work)
    with localcontext() as ctx:
        ctx.prec = work
        v = math.factorial(n + 1) ** k * (psi / math.factorial(k - 1) + z)
    return round_to(v, precision)


def hyperbolic_69(precision: int = 50) -> Decimal:
    """The closed form printed for [6n^2 + 9n + 1 : -6n^2 - 9n].

    (-9 sqrt6 sinh(sqrt6/3) + 18 cosh(sqrt6/3)) / (same - 4)
    """
    work = precision + GUARD
    with localcontext() as ctx:
        ctx.prec = work + 5
        r6 = Decimal(6).sqrt()
        x = r6 / 3
    s, c = eval_sinh_cosh(x, work)
    with localcontext() as ctx:
        ctx.prec = work
        top = -9 * r6 * s + 18 * c
        return round_to(top / (top - 4), precision)
