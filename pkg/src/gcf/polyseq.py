"""Polynomial (and rational-function) sequences in n, and continued-fraction specs."""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

Coeffs = tuple  # ascending-degree tuple of Fraction


class PolyDenominatorZero(ZeroDivisionError):
    def __init__(self, n):
        super().__init__(f"sequence denominator vanishes at n = {n}")
        self.n = n


def _strip(coeffs: Iterable) -> Coeffs:
    out = [Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _add(p: Coeffs, q: Coeffs) -> Coeffs:
    n = max(len(p), len(q))
    return _strip((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n))


def _neg(p: Coeffs) -> Coeffs:
    return tuple(-c for c in p)


def _mul(p: Coeffs, q: Coeffs) -> Coeffs:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _strip(out)


def _pow(p: Coeffs, k: int) -> Coeffs:
    out: Coeffs = (Fraction(1),)
    for _ in range(k):
        out = _mul(out, p)
    return out


def _shift(p: Coeffs, k: int) -> Coeffs:
    # coefficients of p(n + k)
    out: Coeffs = ()
    for c in reversed(p):
        out = _add(_mul(out, (Fraction(k), Fraction(1))), (c,))
    return out


def _horner(p: Coeffs, n):
    acc = 0
    for c in reversed(p):
        acc = acc * n + c
    return acc


def _as_number(x: Fraction):
    return x.numerator if x.denominator == 1 else x


@dataclass(frozen=True)
class PolySeq:
    """n -> num(n) / den(n), coefficients listed from the constant term up."""

    num: Coeffs
    den: Optional[Coeffs] = None

    def __post_init__(self):
        num = _strip(self.num)
        den = _strip(self.den) if self.den is not None else None
        if den is not None and not den:
            raise ValueError("denominator polynomial is identically zero")
        if den == (Fraction(1),):
            den = None
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        integral = den is None and all(c.denominator == 1 for c in num)
        object.__setattr__(self, "_int_coeffs", tuple(int(c) for c in num) if integral else None)

    @classmethod
    def const(cls, c) -> "PolySeq":
        return cls((Fraction(c),))

    @classmethod
    def parse(cls, text: str) -> "PolySeq":
        return parse_polyseq(text)

    @property
    def degree(self) -> int:
        return len(self.num) - 1

    def is_zero(self) -> bool:
        return not self.num

    def __call__(self, n: int):
        """Exact value at integer ``n``: an int when integral, else a Fraction."""
        if self._int_coeffs is not None:
            return _horner(self._int_coeffs, n)
        v = _horner(self.num, Fraction(n))
        if self.den is not None:
            d = _horner(self.den, Fraction(n))
            if d == 0:
                raise PolyDenominatorZero(n)
            v = v / d
        return _as_number(Fraction(v))

    def shift(self, k: int) -> "PolySeq":
        return PolySeq(_shift(self.num, k), _shift(self.den, k) if self.den else None)

    def __mul__(self, other: "PolySeq") -> "PolySeq":
        if not isinstance(other, PolySeq):
            other = PolySeq.const(other)
        den = _mul(self.den or (Fraction(1),), other.den or (Fraction(1),))
        return PolySeq(_mul(self.num, other.num), den)

    __rmul__ = __mul__

    def __add__(self, other: "PolySeq") -> "PolySeq":
        if not isinstance(other, PolySeq):
            other = PolySeq.const(other)
        one = (Fraction(1),)
        d1, d2 = self.den or one, other.den or one
        num = _add(_mul(self.num, d2), _mul(other.num, d1))
        return PolySeq(num, _mul(d1, d2))

    def __neg__(self) -> "PolySeq":
        return PolySeq(_neg(self.num), self.den)

    def __sub__(self, other: "PolySeq") -> "PolySeq":
        if not isinstance(other, PolySeq):
            other = PolySeq.const(other)
        return self + (-other)

    def reciprocal(self) -> "PolySeq":
        if self.is_zero():
            raise ZeroDivisionError("reciprocal of the zero sequence")
        return PolySeq(self.den or (Fraction(1),), self.num)

    def __str__(self) -> str:
        text = _poly_str(self.num)
        if self.den is None:
            return text
        return f"({text})/({_poly_str(self.den)})"

    def to_json(self) -> dict:
        out = {"num": [_frac_str(c) for c in self.num]}
        if self.den is not None:
            out["den"] = [_frac_str(c) for c in self.den]
        return out


def _frac_str(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def _poly_str(p: Coeffs) -> str:
    if not p:
        return "0"
    parts = []
    for i in range(len(p) - 1, -1, -1):
        c = p[i]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if i == 0:
            body = str(mag)
        else:
            var = "n" if i == 1 else f"n^{i}"
            body = var if mag == 1 else f"{mag}*{var}"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


_MAX_POWER = 64


def _eval_node(node) -> Coeffs:
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return _strip((node.value,))
    if isinstance(node, ast.Name):
        if node.id != "n":
            raise ValueError(f"unknown symbol {node.id!r}; sequences use the single variable n")
        return (Fraction(0), Fraction(1))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _eval_node(node.operand)
        return _neg(inner) if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        left, right = _eval_node(node.left), _eval_node(node.right)
        if isinstance(node.op, ast.Add):
            return _add(left, right)
        if isinstance(node.op, ast.Sub):
            return _add(left, _neg(right))
        if isinstance(node.op, ast.Mult):
            return _mul(left, right)
        if isinstance(node.op, ast.Div):
            if len(right) != 1:
                raise ValueError("division is only allowed by a nonzero constant")
            return tuple(c / right[0] for c in left)
        if isinstance(node.op, ast.Pow):
            if len(right) > 1 or (right and right[0].denominator != 1):
                raise ValueError("exponents must be nonnegative integer constants")
            k = int(right[0]) if right else 0
            if not 0 <= k <= _MAX_POWER:
                raise ValueError(f"exponent {k} out of range")
            return _pow(left, k)
    raise ValueError(f"unsupported syntax in sequence expression: {ast.dump(node)}")


def parse_polyseq(text: str) -> PolySeq:
    """Parse an expression over n using integer literals, + - * / ^ and parentheses.

    Division must be by a constant, so ``1/2*n`` and ``n/3`` are fine but
    ``1/n`` is rejected.

    >>> parse_polyseq("-n*(2*n-1)").num
    (Fraction(0, 1), Fraction(1, 1), Fraction(-2, 1))
    """
    if not isinstance(text, str) or not text.strip():
        raise ValueError("empty sequence expression")
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse sequence expression {text!r}") from exc
    try:
        return PolySeq(_eval_node(tree))
    except ZeroDivisionError as exc:
        raise ValueError("division by zero in sequence expression") from exc


@dataclass(frozen=True)
class CFSpec:
    """The continued fraction [a(n) : b(n)] = a(1) + b(1)/(a(2) + b(2)/(a(3) + ...))."""

    a: PolySeq
    b: PolySeq

    @classmethod
    def parse(cls, a: str, b: str) -> "CFSpec":
        return cls(parse_polyseq(a), parse_polyseq(b))

    @classmethod
    def from_coeffs(cls, a: Sequence, b: Sequence) -> "CFSpec":
        return cls(PolySeq(tuple(a)), PolySeq(tuple(b)))

    def __str__(self) -> str:
        return f"[{self.a} : {self.b}]"

    def to_json(self) -> dict:
        out = {"a": [_frac_str(c) for c in self.a.num], "b": [_frac_str(c) for c in self.b.num]}
        if self.a.den is not None:
            out["a_den"] = [_frac_str(c) for c in self.a.den]
        if self.b.den is not None:
            out["b_den"] = [_frac_str(c) for c in self.b.den]
        return out

    @classmethod
    def from_json(cls, obj) -> "CFSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)

        def seq(key):
            num = tuple(Fraction(c) for c in obj[key])
            den = obj.get(f"{key}_den")
            return PolySeq(num, tuple(Fraction(c) for c in den) if den is not None else None)

        return cls(seq("a"), seq("b"))
