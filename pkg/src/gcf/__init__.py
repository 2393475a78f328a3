"""Exact and high-precision evaluation of general continued fractions [a(n) : b(n)]."""

from .bignum import BigFloat, Rational
from .engine import (
    ConvergentPair,
    Divergent,
    LimitEstimate,
    UndefinedConvergents,
    ZeroTailDenominator,
    estimate_limit,
    euler_value,
    eval_finite,
    instantiate,
    pq_convergents,
    scale_equivalence,
    to_euler_form,
)
from .polyseq import CFSpec, PolySeq, parse_polyseq

__version__ = "0.1.0"
