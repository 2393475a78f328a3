"""Shared oracles for the test suite."""

import math
from decimal import Decimal, localcontext

from gcf.bignum import log10_abs
from gcf.engine import pq_convergents


def convergent_errors(spec, closed_form, ms):
    """{m: |p(m)/q(m) - L|} with L from ``closed_form(precision)`` at enough digits.

    The step |x_m - x_{m+1}| at the deepest m fixes how many digits of L are
    needed to resolve every error.
    """
    top = max(ms)
    cs = pq_convergents(spec, top + 1)
    step = abs(cs[top].value - cs[top + 1].value)
    need = max(30, math.ceil(-log10_abs(step)) + 30)
    L = closed_form(need)
    out = {}
    with localcontext() as ctx:
        ctx.prec = need + 10
        for m in ms:
            x = cs[m].value
            out[m] = abs(Decimal(x.numerator) / Decimal(x.denominator) - L)
    return out


def ratio(errs, m):
    return errs[2 * m] / errs[m]
