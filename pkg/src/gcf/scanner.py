"""Brute-force search for continued fractions whose limits are Möbius forms of known constants.

Candidates are integer-coefficient specs [a(n) : b(n)] of bounded degree and
height. A float64 pass over all candidates at once (numpy) keeps only those
whose convergents settle and whose float limit sits within 1e-9 of some
(p1 + p2 C)/(p3 + p4 C). Survivors get the exact treatment: estimate_limit,
an exhaustive match, and a recheck at doubled precision.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, Iterator, Optional

import numpy as np

from .bignum import eval_exp, eval_pi, eval_zeta, round_to
from .engine import (
    GEOMETRIC,
    POLYNOMIAL,
    CFError,
    estimate_limit,
)
from .polyseq import CFSpec


def _sqrt2(precision: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = precision
        return Decimal(2).sqrt()


def _phi(precision: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = precision + 2
        v = (1 + Decimal(5).sqrt()) / 2
        ctx.prec = precision
        return +v


CONSTANTS: dict[str, Callable[[int], Decimal]] = {
    "e": lambda p: eval_exp(1, p),
    "pi": eval_pi,
    "zeta3": lambda p: eval_zeta(3, p),
    "sqrt2": _sqrt2,
    "phi": _phi,
}

DEFAULT_LIBRARY = ("e", "pi", "zeta3", "sqrt2", "phi")
MIN_TRUSTED = 25
SURPLUS = 5  # residual must beat 10^-(trusted - SURPLUS)

_open = open  # indirection so tests can inject I/O failures


@dataclass(frozen=True)
class ScanConfig:
    max_degree: int = 2
    coeff_bound: int = 6
    precision: int = 30
    constant_library: tuple = DEFAULT_LIBRARY
    moebius_bound: int = 8
    max_terms: int = 2000
    prescreen_terms: int = 512
    chunk_rows: int = 100

    def __post_init__(self):
        object.__setattr__(self, "constant_library", tuple(self.constant_library))
        if not 0 <= self.max_degree <= 2:
            raise ValueError("max_degree must be 0, 1 or 2")
        if self.coeff_bound < 1:
            raise ValueError("coeff_bound must be positive")
        if self.precision < MIN_TRUSTED:
            raise ValueError(f"precision must be at least {MIN_TRUSTED}")
        if self.moebius_bound < 1:
            raise ValueError("moebius_bound must be at least 1")
        if self.max_terms < 16:
            raise ValueError("max_terms must be at least 16")
        for name in self.constant_library:
            if name not in CONSTANTS:
                raise ValueError(f"unknown constant {name!r}; known: {sorted(CONSTANTS)}")

    def to_json(self) -> dict:
        out = asdict(self)
        out["constant_library"] = list(self.constant_library)
        return out

    @classmethod
    def from_json(cls, obj) -> "ScanConfig":
        if isinstance(obj, str):
            obj = json.loads(obj)
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown ScanConfig fields: {sorted(unknown)}")
        return cls(**obj)


@dataclass(frozen=True)
class MatchResult:
    spec: Optional[CFSpec]
    constant_name: str
    coefficients: tuple
    residual: Decimal
    limit_digits: int

    @property
    def is_rational(self) -> bool:
        return self.coefficients[1] == 0 and self.coefficients[3] == 0

    @property
    def height(self) -> int:
        return max(abs(c) for c in self.coefficients)

    def describe(self) -> str:
        p1, p2, p3, p4 = self.coefficients
        c = self.constant_name

        def lin(u, v):
            if v == 0:
                return str(u)
            t = c if abs(v) == 1 else f"{abs(v)}{c}"
            if u == 0:
                return t if v > 0 else f"-{t}"
            return f"{u} {'+' if v > 0 else '-'} {t}"

        return f"({lin(p1, p2)})/({lin(p3, p4)})"


# candidate enumeration

def _coeff_tuples(config: ScanConfig) -> list[tuple]:
    r = range(-config.coeff_bound, config.coeff_bound + 1)
    return list(itertools.product(r, repeat=config.max_degree + 1))


def _a_rows(config: ScanConfig) -> list[tuple]:
    out = []
    for c in _coeff_tuples(config):
        if all(sum(ci * n ** i for i, ci in enumerate(c)) > 0 for n in range(1, 6)):
            out.append(c)
    return out


def _b_rows(config: ScanConfig) -> list[tuple]:
    return [c for c in _coeff_tuples(config) if any(c)]


def candidate_count(config: ScanConfig) -> int:
    return len(_a_rows(config)) * len(_b_rows(config))


def _iter_coeffs(config: ScanConfig) -> Iterator[tuple]:
    b_rows = _b_rows(config)
    for a in _a_rows(config):
        for b in b_rows:
            yield a, b


def enumerate_candidates(config: ScanConfig) -> Iterator[CFSpec]:
    """Every spec in the search box, in the canonical scan order.

    Coefficient tuples run from the constant term up; a varies slowest.
    Each (a, b) coefficient pair appears exactly once.
    """
    for a, b in _iter_coeffs(config):
        yield CFSpec.from_coeffs(a, b)


# matching

def _canonical(p: tuple) -> tuple:
    g = 0
    for c in p:
        g = math.gcd(g, c)
    if g > 1:
        p = tuple(c // g for c in p)
    # sign fixed by the denominator: C coefficient first, then the constant
    lead = p[3] if p[3] != 0 else p[2]
    if lead < 0:
        p = tuple(-c for c in p)
    return p


def _sort_key(m: MatchResult):
    return (m.height, sum(abs(c) for c in m.coefficients), m.constant_name, m.coefficients)


def _residual(x: Decimal, C: Decimal, p: tuple, work: int) -> Decimal:
    p1, p2, p3, p4 = p
    with localcontext() as ctx:
        ctx.prec = work
        return abs(x - (p1 + p2 * C) / (p3 + p4 * C))


def match_constant(x: Decimal, config: ScanConfig, trusted_digits: Optional[int] = None,
                   constants: Optional[dict] = None) -> list[MatchResult]:
    """All bounded Möbius forms of library constants that reproduce ``x``.

    ``trusted_digits`` defaults to config.precision. Every (p2, p3, p4) in the
    box is tried for each constant and p1 is solved for, so the search is
    exhaustive; a float pass narrows the box before exact verification.
    Constant matches come first sorted by height, then rational ones.
    """
    trusted = config.precision if trusted_digits is None else min(trusted_digits, config.precision)
    if trusted < MIN_TRUSTED:
        raise ValueError(f"matching needs at least {MIN_TRUSTED} trusted digits, got {trusted}")
    work = trusted + 10
    x = round_to(Decimal(x), work)
    threshold = Decimal(10) ** (-(trusted - SURPLUS))
    B = config.moebius_bound
    xf = float(x)
    found: dict[tuple, MatchResult] = {}

    for name in config.constant_library:
        C = constants[name] if constants and name in constants else CONSTANTS[name](work)
        cf = float(C)
        grid = np.arange(-B, B + 1, dtype=np.float64)
        p2, p3, p4 = np.meshgrid(grid, grid, grid, indexing="ij")
        p2, p3, p4 = p2.ravel(), p3.ravel(), p4.ravel()
        den = p3 + p4 * cf
        y = xf * den - p2 * cf
        p1 = np.rint(y)
        ok = (p4 != 0) | (p2 != 0)
        ok &= np.abs(den) > 1e-12
        ok &= np.abs(p1) <= B
        ok &= np.abs(y - p1) <= 1e-8 * (1 + abs(xf)) * (1 + B * (1 + abs(cf)))
        for i in np.nonzero(ok)[0]:
            p = (int(p1[i]), int(p2[i]), int(p3[i]), int(p4[i]))
            if p[0] * p[3] - p[1] * p[2] == 0:
                continue
            p = _canonical(p)
            key = (name, p)
            if key in found:
                continue
            res = _residual(x, C, p, work)
            if res < threshold:
                found[key] = MatchResult(None, name, p, res, trusted)

    consts = sorted(found.values(), key=_sort_key)
    return consts + match_rational(x, config, trusted)


def match_rational(x: Decimal, config: ScanConfig, trusted_digits: Optional[int] = None) -> list[MatchResult]:
    trusted = config.precision if trusted_digits is None else min(trusted_digits, config.precision)
    work = trusted + 10
    threshold = Decimal(10) ** (-(trusted - SURPLUS))
    B = config.moebius_bound
    out = []
    with localcontext() as ctx:
        ctx.prec = work
        for p3 in range(1, B + 1):
            p1 = int((x * p3).to_integral_value())
            if abs(p1) > B or math.gcd(p1, p3) != 1:
                continue
            res = abs(x - Decimal(p1) / p3)
            if res < threshold:
                out.append(MatchResult(None, "rational", (p1, 0, p3, 0), res, trusted))
    return out


# float prescreen

FAST, SLOW, DROP = 0, 1, 2


def _poly_at(rows: np.ndarray, n: int) -> np.ndarray:
    return sum(rows[:, i] * float(n) ** i for i in range(rows.shape[1]))


def prescreen(a_rows: np.ndarray, b_rows: np.ndarray, steps: int):
    """Float64 convergents for every (a, b) pair; returns (status, limit) of shape (len(a), len(b)).

    FAST: the last step moves x by < 1e-13 relative and the back half by < 1e-11.
    SLOW: still moving, but dyadic differences shrink like m^-r for an
    integer r >= 1 (polynomial convergence).
    DROP: anything else, including overflow and vanishing denominators.
    """
    A = a_rows.astype(np.float64)
    Bm = b_rows.astype(np.float64)
    na, nb = len(A), len(Bm)
    a1, a2 = _poly_at(A, 1)[:, None], _poly_at(A, 2)[:, None]
    b1 = _poly_at(Bm, 1)[None, :]
    with np.errstate(all="ignore"):
        p0 = np.broadcast_to(a1, (na, nb)).copy()
        q0 = np.ones((na, nb))
        p1 = a1 * a2 + b1
        q1 = np.broadcast_to(a2, (na, nb)).copy()
        marks = {steps // 8: None, steps // 4: None, steps // 2: None}
        for m in range(2, steps + 1):
            an = _poly_at(A, m + 1)[:, None]
            bn = _poly_at(Bm, m)[None, :]
            p0, p1 = p1, an * p1 + bn * p0
            q0, q1 = q1, an * q1 + bn * q0
            if m % 4 == 0:
                s = np.maximum(np.maximum(np.abs(p1), np.abs(q1)), np.maximum(np.abs(p0), np.abs(q0)))
                s = np.where((s > 0) & np.isfinite(s), s, 1.0)
                p0, p1, q0, q1 = p0 / s, p1 / s, q0 / s, q1 / s
            if m in marks:
                marks[m] = p1 / q1
        x = p1 / q1
        xprev = p0 / q0
        xh, xq, xe = marks[steps // 2], marks[steps // 4], marks[steps // 8]
        scale = np.maximum(1.0, np.abs(x))
        d1 = np.abs(x - xprev)
        dh = np.abs(x - xh)
        dq = np.abs(xh - xq)
        de = np.abs(xq - xe)
        finite = np.isfinite(x) & np.isfinite(xprev) & np.isfinite(xh) & np.isfinite(xq) & np.isfinite(xe)
        fast = finite & (d1 <= 1e-13 * scale) & (dh <= 1e-11 * scale)
        # x_m - x_{m/2} ~ m^-r: both dyadic ratios must point at one integer order r >= 1,
        # the only case the exact path can accelerate
        o1, o2 = -np.log2(dq / de), -np.log2(dh / dq)
        r = np.rint(o2)
        # and a monotone tail: one step moves about r dh / T, not O(dh) as when even and odd convergents interleave
        monotone = d1 < 8 * np.maximum(r, 1) * dh / steps
        slow = finite & ~fast & monotone & (r >= 1) & (np.abs(o2 - r) < 0.25) & (np.abs(o1 - r) < 0.35) & (dh < 1e-2 * scale)
    status = np.full((na, nb), DROP, dtype=np.int8)
    status[slow] = SLOW
    status[fast] = FAST
    return status, x


def _moebius_hits(xs: np.ndarray, C: float, B: int, tol: float = 1e-9) -> np.ndarray:
    """Boolean mask of xs lying near some nondegenerate (p1 + p2 C)/(p3 + p4 C)."""
    r = np.arange(-B, B + 1)
    P1, P2 = np.meshgrid(r, r, indexing="ij")
    P1, P2 = P1.ravel(), P2.ravel()
    V = P1 + P2 * C
    order = np.argsort(V)
    V, P1, P2 = V[order], P1[order], P2[order]
    hit = np.zeros(len(xs), dtype=bool)
    for p3 in range(0, B + 1):
        for p4 in range(-B, B + 1):
            if p3 == 0 and p4 <= 0:
                continue
            den = p3 + p4 * C
            if abs(den) < 1e-12:
                continue
            y = xs * den
            idx = np.clip(np.searchsorted(V, y), 1, len(V) - 1)
            for j in (idx - 1, idx):
                close = np.abs(y - V[j]) <= tol * np.maximum(1.0, np.abs(y))
                nondeg = (P1[j] * p4 - P2[j] * p3) != 0
                genuine = (P2[j] != 0) | (p4 != 0)
                hit |= close & nondeg & genuine
    return hit


def _is_rational_float(xs: np.ndarray, B: int, tol: float = 1e-9) -> np.ndarray:
    out = np.zeros(len(xs), dtype=bool)
    for p3 in range(1, B + 1):
        y = xs * p3
        r = np.rint(y)
        out |= (np.abs(y - r) <= tol * np.maximum(1.0, np.abs(y))) & (np.abs(r) <= B)
    return out


# scan driver

@dataclass
class ScanSummary:
    candidates: int = 0
    converged: int = 0
    matched: int = 0
    spurious: int = 0
    rational: int = 0
    exact_checked: int = 0
    resumed_from: Optional[int] = None
    complete: bool = False
    matches: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = asdict(self)
        out.pop("matches")
        return out


def _record(m: MatchResult, limit: Decimal, trusted: int, terms: int, width: int) -> dict:
    res = m.residual
    residual_exp = math.floor(float(res.log10())) if res > 0 else -(trusted + 10)
    with localcontext() as ctx:
        ctx.prec = trusted
        lim = str(+limit)
    return {
        "a": list(_pad([int(c) for c in m.spec.a.num], width)),
        "b": list(_pad([int(c) for c in m.spec.b.num], width)),
        "constant": m.constant_name,
        "mobius": list(m.coefficients),
        "limit": lim,
        "residual_exp": residual_exp,
        "terms_used": terms,
    }


def _pad(c: tuple, n: int) -> tuple:
    return tuple(c) + (0,) * (n - len(c))


def verify_candidate(spec: CFSpec, config: ScanConfig, names, constants):
    """Exact limit, matches, and the doubled-precision recheck for one spec.

    Returns (estimate, verified matches, spurious count) or None when the
    limit cannot be trusted to MIN_TRUSTED digits.
    """
    try:
        est = estimate_limit(spec, config.precision, config.max_terms)
    except CFError:
        return None
    if est.convergence_class not in (GEOMETRIC, POLYNOMIAL):
        return None
    trusted = min(est.achieved_digits, config.precision)
    if trusted < MIN_TRUSTED:
        return None
    sub = ScanConfig(**{**config.to_json(), "constant_library": tuple(names)})
    matches = [m for m in match_constant(est.value, sub, trusted, constants[0]) if not m.is_rational]
    if not matches:
        return est, [], 0
    try:
        est2 = estimate_limit(spec, 2 * config.precision, 2 * config.max_terms)
    except CFError:
        return est, [], len(matches)
    trusted2 = min(est2.achieved_digits, 2 * config.precision)
    thr2 = Decimal(10) ** (-(trusted2 - SURPLUS))
    good, spurious = [], 0
    for m in matches:
        C2 = constants[1][m.constant_name]
        res2 = _residual(est2.value, C2, m.coefficients, 2 * config.precision + 10)
        # a genuine identity tracks the extra digits; a coincidence stalls near its first residual
        if trusted2 > trusted and res2 < thr2:
            good.append(MatchResult(spec, m.constant_name, m.coefficients, m.residual, trusted))
        else:
            spurious += 1
    return est, good, spurious


def _truncate_partial(path: str, keep: Callable[[dict], bool]) -> None:
    """Drop a torn last line and any record past the resume point."""
    with _open(path, "rb+") as fh:
        data = fh.read()
        lines = data[: data.rfind(b"\n") + 1].splitlines(keepends=True)
        while lines and not keep(json.loads(lines[-1])):
            lines.pop()
        fh.seek(0)
        fh.write(b"".join(lines))
        fh.truncate()


def scan(config: ScanConfig, output_path, resume: bool = False, log: Optional[Callable[[str], None]] = None) -> ScanSummary:
    """Run the search, appending one JSON object per verified match to ``output_path``.

    The first line is a header with the config and a timestamp. On an I/O
    error the file keeps every complete record written so far and
    ``<output>.resume`` holds the index of the last finished candidate;
    ``resume=True`` continues from there. A summary is written to
    ``<output>.summary.json``.
    """
    output_path = os.fspath(output_path)
    marker = output_path + ".resume"
    summary_path = output_path + ".summary.json"
    summary = ScanSummary()
    start = 0
    if resume and os.path.exists(marker):
        with _open(marker) as fh:
            start = int(fh.read().strip()) + 1
        summary.resumed_from = start
        mode = "a"
    else:
        mode = "w"

    names = list(config.constant_library)
    work1, work2 = config.precision + 10, 2 * config.precision + 10
    constants = ({n: CONSTANTS[n](work1) for n in names}, {n: CONSTANTS[n](work2) for n in names})
    floats = {n: float(constants[0][n]) for n in names}

    a_rows, b_rows = _a_rows(config), _b_rows(config)
    nb = len(b_rows)
    summary.candidates = len(a_rows) * nb
    width = config.max_degree + 1
    A = np.array(a_rows, dtype=np.int64).reshape(-1, width)
    Bm = np.array(b_rows, dtype=np.int64).reshape(-1, width)
    last_done = start - 1
    if mode == "a":
        a_index = {_pad(r, width): i for i, r in enumerate(a_rows)}
        b_index = {_pad(r, width): i for i, r in enumerate(b_rows)}

        def keep(obj):
            if "header" in obj:
                return True
            return a_index[tuple(obj["a"])] * nb + b_index[tuple(obj["b"])] <= last_done

        _truncate_partial(output_path, keep)

    def say(msg):
        if log:
            log(msg)

    try:
        out = _open(output_path, mode)
    except OSError:
        _write_marker(marker, last_done)
        raise
    try:
        if mode == "w":
            header = {"header": {"config": config.to_json(),
                                 "started": datetime.now(timezone.utc).isoformat(timespec="seconds")}}
            out.write(json.dumps(header) + "\n")
        for r0 in range(0, len(a_rows), config.chunk_rows):
            r1 = min(len(a_rows), r0 + config.chunk_rows)
            base = r0 * nb
            if r1 * nb <= start:
                continue
            status, xs = prescreen(A[r0:r1], Bm, config.prescreen_terms)
            status, xs = status.ravel(), xs.ravel()
            idx = np.arange(base, base + len(status))
            keep = idx >= start
            fast = keep & (status == FAST)
            slow = keep & (status == SLOW)
            summary.converged += int(fast.sum())
            exact = set(np.nonzero(slow)[0].tolist())
            fi = np.nonzero(fast)[0]
            if len(fi):
                fx = xs[fi]
                ux, inv = np.unique(fx, return_inverse=True)
                rat = _is_rational_float(ux, config.moebius_bound)
                summary.rational += int(rat[inv].sum())
                hit_u = np.zeros(len(ux), dtype=bool)
                for n in names:
                    hit_u |= _moebius_hits(ux, floats[n], config.moebius_bound)
                exact.update(fi[hit_u[inv]].tolist())
            for local in sorted(exact):
                gi = base + local
                ai, bi = divmod(gi, nb)
                spec = CFSpec.from_coeffs(_pad(a_rows[ai], width), _pad(b_rows[bi], width))
                summary.exact_checked += 1
                got = verify_candidate(spec, config, names, constants)
                if got is not None and status[local] == SLOW:
                    summary.converged += 1
                if got is not None:
                    est, good, spurious = got
                    summary.spurious += spurious
                    if good:
                        summary.matched += 1
                    for m in good:
                        out.write(json.dumps(_record(m, est.value, m.limit_digits, est.terms_used, width)) + "\n")
                        summary.matches.append(m)
                    if good:
                        out.flush()
                last_done = gi
            out.flush()
            last_done = base + len(status) - 1
            say(f"rows {r1}/{len(a_rows)}: converged {summary.converged}, matched {summary.matched}")
    except OSError:
        try:
            out.close()
        except OSError:
            pass
        _write_marker(marker, last_done)
        raise
    out.close()
    if os.path.exists(marker):
        os.remove(marker)
    summary.complete = True
    with _open(summary_path, "w") as fh:
        json.dump(summary.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _write_marker(path: str, index: int) -> None:
    with open(path, "w") as fh:
        fh.write(f"{index}\n")


def read_matches(path) -> tuple[dict, list[dict]]:
    """(header, records) of a scan output file."""
    header, records = {}, []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if "header" in obj:
                header = obj["header"]
            else:
                records.append(obj)
    return header, records
