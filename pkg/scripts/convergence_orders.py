"""Observed convergence of the three families.

For each family the raw error |p(m)/q(m) - L| is measured at doubling depths
and the local log-log slope and error ratio are printed. Families 1 and 2 show
ratios collapsing toward zero; family 3 settles near 2^-(k-1).
"""

import argparse
import math
from decimal import Decimal, localcontext

from gcf.bignum import log10_abs
from gcf.engine import pq_convergents
from gcf.families import Family1Params, Family2Params, Family3Params
from gcf.report import closed_form


def errors(params, ms):
    top = max(ms)
    cs = pq_convergents(params.spec(), top + 1)
    step = abs(cs[top].value - cs[top + 1].value)
    need = max(30, math.ceil(-log10_abs(step)) + 30)
    L = closed_form(params, need).value
    out = []
    with localcontext() as ctx:
        ctx.prec = need + 10
        for m in ms:
            x = cs[m].value
            out.append(abs(Decimal(x.numerator) / Decimal(x.denominator) - L))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depths", default="50,100,200,400,800")
    args = ap.parse_args()
    ms = [int(m) for m in args.depths.split(",")]
    cases = [Family1Params(-1, 3), Family1Params(2, 1), Family2Params(4, 6), Family2Params(1, 0)]
    cases += [Family3Params(k) for k in (2, 3, 4)]
    for params in cases:
        errs = errors(params, ms)
        print(f"{params.spec()}")
        prev = None
        for m, e in zip(ms, errs):
            lg = float(e.log10())
            line = f"  m = {m:>5}  log10 err = {lg:10.2f}"
            if prev is not None:
                pm, pe = prev
                slope = (lg - float(pe.log10())) / math.log10(m / pm)
                line += f"  slope = {slope:9.2f}  ratio = {e / pe:.3E}"
            print(line)
            prev = (m, e)


if __name__ == "__main__":
    main()
