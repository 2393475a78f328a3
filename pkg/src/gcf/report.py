"""Markdown verification reports for the three parametric families."""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction

from .bignum import log10_abs
from .engine import CFError, estimate_limit, eval_finite, instantiate, pq_convergents
from .families import (
    Family1Params,
    Family2Params,
    Family3Params,
    family1_asymptotic_constants,
    family1_derangement_form,
    family1_limit,
    family2_limit,
    family3_limit,
    family3_pq_closed,
)

RESIDUAL_DEPTHS = (50, 100, 200)


def family_params(family: int, a=None, b=None, k=None):
    if family == 1:
        return Family1Params(a, k)
    if family == 2:
        return Family2Params(a, b)
    if family == 3:
        return Family3Params(k)
    raise ValueError(f"unknown family {family}")


def closed_form(params, precision: int):
    if isinstance(params, Family1Params):
        return family1_limit(params, precision)
    if isinstance(params, Family2Params):
        return family2_limit(params, precision, check=False)
    return family3_limit(params, precision)


def describe_params(params) -> str:
    if isinstance(params, Family1Params):
        return f"family 1, a = {params.a}, k = {params.k} (D = {params.D})"
    if isinstance(params, Family2Params):
        return f"family 2, a = {params.a}, b = {params.b}"
    return f"family 3, k = {params.k}"


def determinant_holds(spec, n_max: int = 30) -> bool:
    pairs = pq_convergents(spec, n_max + 1)
    bprod = 1
    for n in range(n_max + 1):
        bprod *= spec.b(n + 1)
        lhs = pairs[n].p * pairs[n + 1].q - pairs[n + 1].p * pairs[n].q
        if lhs != (-1) ** (n + 1) * bprod:
            return False
    return True


def recurrence_matches_finite(spec, depth: int = 12) -> bool:
    pairs = pq_convergents(spec, depth - 1)
    for c in pairs:
        if c.q == 0:
            continue
        try:
            if eval_finite(instantiate(spec, c.depth)) != c.value:
                return False
        except CFError:
            return False
    return True


def _sci(x: Decimal) -> str:
    if x == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = 3
        return f"{+x:.2E}"


def residual_rows(spec, params, depths=RESIDUAL_DEPTHS):
    """(m, |p(m)/q(m) - L|) with L evaluated well past the residual's magnitude."""
    pairs = pq_convergents(spec, max(depths) + 1)
    # |x_m - x_{m+1}| sets the scale of the residual at the deepest m
    last = pairs[max(depths)]
    nxt = pairs[max(depths) + 1]
    step = abs(last.value - nxt.value) if last.q and nxt.q else Fraction(0)
    need = 30 if step == 0 else max(30, math.ceil(-log10_abs(step)) + 30)
    L = closed_form(params, need).value
    rows = []
    with localcontext() as ctx:
        ctx.prec = need + 10
        for m in depths:
            x = pairs[m].value
            err = abs(Decimal(x.numerator) / Decimal(x.denominator) - L)
            rows.append((m, err))
    return rows


def build_report(params, precision: int = 50) -> str:
    """Deterministic markdown: spec, convergents, closed form, residuals, checklist."""
    spec = params.spec()
    cf = closed_form(params, precision)
    lines = [f"# Verification report: {describe_params(params)}", ""]
    lines += ["## Continued fraction", "", f"`{spec}`", ""]
    lines += ["## First 8 convergents", "", "| depth | p | q | p/q |", "|---|---|---|---|"]
    for c in pq_convergents(spec, 7):
        v = "undefined" if c.q == 0 else str(c.value)
        lines.append(f"| {c.depth} | {c.p} | {c.q} | {v} |")
    lines += ["", "## Closed form", "", f"`{cf.expr}`", "", f"= {cf.value}", ""]

    rows = residual_rows(spec, params)
    lines += ["## Residuals", "", "| m | abs(p(m)/q(m) - L) | log10 |", "|---|---|---|"]
    for m, err in rows:
        lg = "-inf" if err == 0 else f"{float(err.log10()):.1f}"
        lines.append(f"| {m} | {_sci(err)} | {lg} |")
    if all(e > 0 for _, e in rows):
        (m0, e0), (m1, e1) = rows[0], rows[1]
        slope = (float(e1.log10()) - float(e0.log10())) / math.log10(m1 / m0)
        lines += ["", f"Observed log-log slope between m = {m0} and m = {m1}: {slope:.2f}"]
    lines.append("")

    checks = []
    checks.append(("determinant identity, n <= 30", determinant_holds(spec)))
    checks.append(("recurrence agrees with bottom-up evaluation, depth <= 12", recurrence_matches_finite(spec)))
    try:
        est = estimate_limit(spec, precision)
        trusted = min(est.achieved_digits, precision)
        diff = abs(est.value - cf.value)
        ok = trusted >= 6 and diff <= Decimal(10) ** -max(trusted - 5, 1) * max(1, abs(cf.value))
        checks.append((f"closed form vs extrapolated limit ({est.label}, {trusted} digits, diff {_sci(diff)})", ok))
    except CFError as exc:
        checks.append((f"closed form vs extrapolated limit ({exc})", False))
    if isinstance(params, Family1Params):
        try:
            family1_asymptotic_constants(params, precision)
            checks.append(("asymptotic constants B_p/B_q reproduce the limit", True))
        except ArithmeticError:
            checks.append(("asymptotic constants B_p/B_q reproduce the limit", False))
        if params.a == -1 and params.k >= 1:
            d = family1_derangement_form(params.k - 1, precision)
            checks.append(("derangement form agrees", abs(d.value - cf.value) < Decimal(10) ** -(precision - 5)))
    if isinstance(params, Family3Params):
        ok = all(
            (c.p, c.q) == family3_pq_closed(params.k, c.m) for c in pq_convergents(spec, 20)
        )
        checks.append(("p(n), q(n) closed forms match the recurrence, n <= 20", ok))
    lines += ["## Invariant checklist", ""]
    for name, ok in checks:
        lines.append(f"- [{'x' if ok else ' '}] {name}")
    lines.append("")
    return "\n".join(lines)
