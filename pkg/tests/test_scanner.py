import itertools
import json
import math
from decimal import Decimal

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcf import scanner
from gcf.engine import estimate_limit
from gcf.families import Family1Params, family1_moebius
from gcf.polyseq import CFSpec
from gcf.scanner import (
    MatchResult,
    ScanConfig,
    _canonical,
    candidate_count,
    enumerate_candidates,
    match_constant,
    read_matches,
    scan,
)

SMALL = ScanConfig(max_degree=1, coeff_bound=3, precision=30, moebius_bound=8)


def coeffs(spec):
    return tuple(spec.a.num), tuple(spec.b.num)


def mp_str(x, digits=60):
    with mpmath.workdps(digits):
        return mpmath.nstr(x, digits, strip_zeros=False)


# enumeration

def test_degree1_bound3_contains_n_plus_3_minus_n():
    target = CFSpec.from_coeffs((3, 1), (0, -1))
    assert any(s == target for s in enumerate_candidates(SMALL))


def test_degree2_bound6_contains_3n_and_minus_n_2n_minus_1():
    cfg = ScanConfig(max_degree=2, coeff_bound=6)
    a_rows, b_rows = scanner._a_rows(cfg), scanner._b_rows(cfg)
    assert (0, 3, 0) in a_rows
    assert (0, 1, -2) in b_rows


def test_count_degree1_bound1_matches_brute_force():
    # independent count: walk every polynomial pair and evaluate directly
    total = 0
    for a0, a1, b0, b1 in itertools.product(range(-1, 2), repeat=4):
        if (b0, b1) == (0, 0):
            continue
        if all(a0 + a1 * n > 0 for n in range(1, 6)):
            total += 1
    cfg = ScanConfig(max_degree=1, coeff_bound=1)
    assert total == 24
    assert candidate_count(cfg) == total
    assert sum(1 for _ in enumerate_candidates(cfg)) == total


def test_enumeration_has_no_duplicates():
    seen = [coeffs(s) for s in enumerate_candidates(SMALL)]
    assert len(seen) == len(set(seen)) == candidate_count(SMALL)


def test_enumeration_respects_pruning():
    for s in enumerate_candidates(SMALL):
        assert all(s.a(n) > 0 for n in range(1, 6))
        assert any(s.b(n) != 0 for n in range(1, 4))


def test_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(precision=24)
    with pytest.raises(ValueError):
        ScanConfig(moebius_bound=0)
    with pytest.raises(ValueError):
        ScanConfig(max_degree=3)
    with pytest.raises(ValueError):
        ScanConfig(constant_library=("catalan",))


def test_config_json_round_trip():
    cfg = ScanConfig(max_degree=1, coeff_bound=4, constant_library=("e", "pi"))
    assert ScanConfig.from_json(json.dumps(cfg.to_json())) == cfg
    with pytest.raises(ValueError):
        ScanConfig.from_json({"nope": 1})


# matching

def test_match_pi_anchor():
    spec = CFSpec.from_coeffs((0, 3), (0, 1, -2))
    est = estimate_limit(spec, 40)
    cfg = ScanConfig(precision=30, constant_library=("pi",))
    got = match_constant(est.value, cfg, min(est.achieved_digits, 30))
    assert got[0].constant_name == "pi"
    assert got[0].coefficients == (4, 0, -8, 3)


def test_match_e_over_e_minus_2():
    with mpmath.workdps(60):
        x = Decimal(mp_str(mpmath.e / (mpmath.e - 2)))
    got = match_constant(x, ScanConfig(constant_library=("e",)))
    assert [m.coefficients for m in got if m.constant_name == "e"] == [(0, 1, -2, 1)]


def test_match_half_is_rational():
    got = match_constant(Decimal("0.5"), ScanConfig(constant_library=("e",)))
    rational = [m for m in got if m.is_rational]
    assert [m.coefficients for m in rational] == [(1, 0, 2, 0)]
    assert all(m.constant_name == "rational" for m in rational)


def test_match_needs_trusted_digits():
    with pytest.raises(ValueError):
        match_constant(Decimal("0.5"), ScanConfig(), trusted_digits=20)


def test_no_match_for_unrelated_constant():
    with mpmath.workdps(60):
        x = Decimal(mp_str(mpmath.euler))
    got = match_constant(x, ScanConfig())
    assert got == []


def test_matches_sorted_by_height():
    with mpmath.workdps(60):
        x = Decimal(mp_str(mpmath.sqrt(2)))
    got = [m for m in match_constant(x, ScanConfig()) if not m.is_rational]
    assert got
    heights = [m.height for m in got]
    assert heights == sorted(heights)
    assert got[0].constant_name == "sqrt2" and got[0].coefficients == (0, 1, 1, 0)


def test_match_residual_invariant():
    with mpmath.workdps(60):
        x = Decimal(mp_str((1 + 2 * mpmath.zeta(3)) / (3 - mpmath.zeta(3))))
    got = match_constant(x, ScanConfig(constant_library=("zeta3",)))
    assert got[0].coefficients == (-1, -2, -3, 1)
    for m in got:
        assert m.residual < Decimal(10) ** -(m.limit_digits - 5)


def test_describe():
    m = MatchResult(None, "pi", (4, 0, -8, 3), Decimal(0), 30)
    assert m.describe() == "(4)/(-8 + 3pi)"


@given(st.tuples(*[st.integers(-8, 8)] * 4).filter(lambda p: p[2] or p[3]),
       st.integers(-5, 5).filter(lambda s: s != 0))
def test_canonical_unique_under_sign_and_scale(p, s):
    scaled = tuple(s * c for c in p)
    assert _canonical(scaled) == _canonical(p)
    c = _canonical(p)
    g = 0
    for v in c:
        g = math.gcd(g, v)
    assert g == 1
    lead = c[3] if c[3] != 0 else c[2]
    assert lead > 0


@settings(max_examples=30, deadline=None)
@given(st.tuples(*[st.integers(-8, 8)] * 4))
def test_match_recovers_random_moebius_of_e(p):
    p1, p2, p3, p4 = p
    if p1 * p4 - p2 * p3 == 0 or p2 == p4 == 0:
        return
    with mpmath.workdps(60):
        x = Decimal(mp_str((p1 + p2 * mpmath.e) / (p3 + p4 * mpmath.e)))
    got = match_constant(x, ScanConfig(constant_library=("e",)))
    assert _canonical(p) in [m.coefficients for m in got]


# scanning

def body(path):
    with open(path) as fh:
        return [line for line in fh if '"header"' not in line]


def test_small_scan_finds_e_over_e_minus_2(tmp_path):
    out = tmp_path / "m.jsonl"
    summary = scan(SMALL, out)
    header, records = read_matches(out)
    assert header["config"]["coeff_bound"] == 3
    hit = [r for r in records if r["a"] == [3, 1] and r["b"] == [0, -1]]
    assert hit and hit[0]["constant"] == "e" and hit[0]["mobius"] == [0, 1, -2, 1]
    assert summary.complete and summary.spurious == 0
    assert summary.matched == len({(tuple(r["a"]), tuple(r["b"])) for r in records})
    stored = json.loads((tmp_path / "m.jsonl.summary.json").read_text())
    assert stored["candidates"] == candidate_count(SMALL)
    assert stored["matched"] == summary.matched


def test_records_follow_candidate_order(tmp_path):
    out = tmp_path / "m.jsonl"
    scan(SMALL, out)
    _, records = read_matches(out)
    pairs = itertools.product(scanner._a_rows(SMALL), scanner._b_rows(SMALL))
    order = {p: i for i, p in enumerate(pairs)}

    def idx(r):
        return order[(tuple(r["a"]), tuple(r["b"]))]

    got = [idx(r) for r in records]
    assert got == sorted(got)


def test_records_reverify(tmp_path):
    out = tmp_path / "m.jsonl"
    scan(SMALL, out)
    _, records = read_matches(out)
    assert records
    for r in records:
        p1, p2, p3, p4 = r["mobius"]
        with mpmath.workdps(60):
            consts = {"e": mpmath.e, "pi": mpmath.pi, "zeta3": mpmath.zeta(3),
                      "sqrt2": mpmath.sqrt(2), "phi": (1 + mpmath.sqrt(5)) / 2}
            C = consts[r["constant"]]
            target = (p1 + p2 * C) / (p3 + p4 * C)
            assert abs(mpmath.mpf(r["limit"]) - target) < mpmath.mpf(10) ** -20
        assert r["residual_exp"] < -20


def test_empty_library_writes_summary(tmp_path):
    cfg = ScanConfig(max_degree=1, coeff_bound=2, constant_library=())
    out = tmp_path / "m.jsonl"
    summary = scan(cfg, out)
    assert summary.matched == 0 and body(out) == []
    assert json.loads((tmp_path / "m.jsonl.summary.json").read_text())["matched"] == 0


def test_rerun_is_byte_identical(tmp_path):
    scan(SMALL, tmp_path / "a.jsonl")
    scan(SMALL, tmp_path / "b.jsonl")
    assert body(tmp_path / "a.jsonl") == body(tmp_path / "b.jsonl")
    assert body(tmp_path / "a.jsonl")


class FailingFile:
    """Wraps a file and raises after a number of writes."""

    def __init__(self, fh, budget):
        self.fh, self.budget = fh, budget

    def write(self, data):
        if self.budget == 0:
            self.fh.write(data[: len(data) // 2])
            self.fh.flush()
            raise OSError("disk full")
        self.budget -= 1
        return self.fh.write(data)

    def __getattr__(self, name):
        return getattr(self.fh, name)


@pytest.mark.parametrize("budget", [1, 3])
def test_io_failure_leaves_marker_and_resume_completes(tmp_path, monkeypatch, budget):
    ref = tmp_path / "ref.jsonl"
    scan(SMALL, ref)
    out = tmp_path / "m.jsonl"
    real_open = scanner._open

    def bad_open(path, mode="r", *args, **kw):
        fh = real_open(path, mode, *args, **kw)
        if str(path) == str(out) and mode == "w":
            return FailingFile(fh, budget)
        return fh

    monkeypatch.setattr(scanner, "_open", bad_open)
    with pytest.raises(OSError):
        scan(SMALL, out)
    marker = tmp_path / "m.jsonl.resume"
    assert marker.exists()
    int(marker.read_text().strip())
    assert not (tmp_path / "m.jsonl.summary.json").exists()
    monkeypatch.setattr(scanner, "_open", real_open)

    summary = scan(SMALL, out, resume=True)
    assert summary.complete and summary.resumed_from is not None
    assert not marker.exists()
    assert body(out) == body(ref)


def test_family1_cross_check(tmp_path):
    # every a = +-1 family-1 spec in the box must come back matched to e with
    # the closed form's own rational data, when that data fits the bound
    cfg = ScanConfig(max_degree=1, coeff_bound=6, moebius_bound=8, constant_library=("e",))
    out = tmp_path / "m.jsonl"
    scan(cfg, out)
    _, records = read_matches(out)
    found = {(tuple(r["a"]), tuple(r["b"])): tuple(r["mobius"]) for r in records}
    checked = 0
    for a in (-1, 1):
        for k in range(0, 7):
            if a == -1 and k == 0:
                continue
            expected = _canonical(family1_moebius(Family1Params(a, k)))
            key = ((k, 1), (0, a))
            if max(abs(c) for c in expected) <= cfg.moebius_bound:
                assert found.get(key) == expected, (a, k)
                checked += 1
            else:
                assert key not in found
    assert checked >= 4
