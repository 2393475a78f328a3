"""Family-1 grid: closed form, extrapolated limit, and raw error ratios.

Prints one row per (a, k) with D = a + k + 1 in 1..5.
"""

import argparse
import math
from decimal import Decimal, localcontext

from gcf.bignum import log10_abs
from gcf.engine import estimate_limit, pq_convergents
from gcf.families import Family1Params, family1_limit


def raw_errors(p, ms):
    top = max(ms)
    cs = pq_convergents(p.spec(), top + 1)
    step = abs(cs[top].value - cs[top + 1].value)
    need = max(30, math.ceil(-log10_abs(step)) + 30)
    L = family1_limit(p, need).value
    out = {}
    with localcontext() as ctx:
        ctx.prec = need + 10
        for m in ms:
            x = cs[m].value
            out[m] = abs(Decimal(x.numerator) / Decimal(x.denominator) - L)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--precision", type=int, default=30)
    ap.add_argument("-m", type=int, default=2000, help="ratio e(2m)/e(m) is reported at this m")
    args = ap.parse_args()
    print(f"{'a':>3} {'k':>3} {'D':>2}  {'limit':<24} {'|est - L|':>10}  {'log10 e(m)':>11}  {'e(2m)/e(m)':>12}")
    for a in (-3, -2, -1, 1, 2, 3):
        for D in range(1, 6):
            p = Family1Params(a, D - a - 1)
            L = family1_limit(p, args.precision).value
            est = estimate_limit(p.spec(), args.precision)
            errs = raw_errors(p, [args.m, 2 * args.m])
            r = errs[2 * args.m] / errs[args.m]
            print(f"{a:>3} {p.k:>3} {D:>2}  {str(L)[:24]:<24} {float(abs(est.value - L)):>10.1e}  "
                  f"{float(errs[args.m].log10()):>11.1f}  {r:>12.3E}")


if __name__ == "__main__":
    main()
