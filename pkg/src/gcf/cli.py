"""Command-line interface: ``gcf <subcommand> ...``.

Exit codes: 0 success, 2 evaluation error, 3 verification failure, 4 bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from decimal import Decimal, localcontext
from fractions import Fraction

from .bignum import MIN_PRECISION, round_to, to_decimal
from .engine import (
    CFError,
    ZeroTailDenominator,
    estimate_limit,
    euler_value,
    eval_finite,
    instantiate,
    pq_convergents,
    scale_equivalence,
    to_euler_form,
)
from .families import CrossCheckError
from .polyseq import CFSpec, parse_polyseq
from .report import build_report, closed_form, describe_params, determinant_holds, family_params, recurrence_matches_finite
from .scanner import CONSTANTS, ScanConfig, scan

EXIT_OK, EXIT_EVAL, EXIT_VERIFY, EXIT_ARGS = 0, 2, 3, 4


class BadArguments(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ARGS, f"{self.prog}: error: {message}\n")


def _precision(text: str) -> int:
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"precision must be an integer, got {text!r}")
    if p < MIN_PRECISION:
        raise argparse.ArgumentTypeError(f"precision must be >= {MIN_PRECISION}")
    return p


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _simple_terms(text: str) -> list[Fraction]:
    # "1x10" is ten ones; items may be mixed: "3,7,15,1" or "2,1x5"
    out = []
    for item in text.replace(" ", "").split(","):
        if not item:
            continue
        value, _, count = item.partition("x")
        try:
            out += [Fraction(value)] * (int(count) if count else 1)
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError(f"bad simple term {item!r}")
    if not out:
        raise argparse.ArgumentTypeError("no terms given")
    return out


def _pairs(text: str) -> list[tuple]:
    out = []
    for item in text.replace(" ", "").split(";"):
        if not item:
            continue
        parts = item.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"pairs are 'a,b' separated by ';', got {item!r}")
        try:
            out.append((Fraction(parts[0]), Fraction(parts[1])))
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError(f"bad pair {item!r}")
    if not out:
        raise argparse.ArgumentTypeError("no pairs given")
    return out


def _spec(args) -> CFSpec:
    if args.a is None or args.b is None:
        raise BadArguments("both --a and --b are required")
    try:
        return CFSpec(parse_polyseq(args.a), parse_polyseq(args.b))
    except ValueError as exc:
        raise BadArguments(str(exc))


def _frac(x: Fraction) -> str:
    return str(x)


def _dec(x: Fraction, precision: int) -> str:
    return str(to_decimal(x, precision))


def _emit_table(out, fmt: str, header: list, rows: list, extra: dict | None = None):
    if fmt == "json":
        obj = {"rows": [dict(zip(header, r)) for r in rows]}
        if extra:
            obj.update(extra)
        out.write(json.dumps(obj, indent=2) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        out.write(buf.getvalue())
    else:
        widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) for i, h in enumerate(header)]
        out.write("  ".join(str(h).ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
        for r in rows:
            out.write("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def _emit_kv(out, fmt: str, obj: dict):
    if fmt == "json":
        out.write(json.dumps(obj, indent=2) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in obj.items():
            w.writerow([k, v if not isinstance(v, (dict, list)) else json.dumps(v)])
        out.write(buf.getvalue())
    else:
        for k, v in obj.items():
            out.write(f"{k}: {v}\n")


# subcommands

def cmd_eval(args, out) -> int:
    if args.simple is not None:
        pairs = [(t, Fraction(1)) for t in args.simple]
    elif args.pairs is not None:
        pairs = args.pairs
    else:
        spec = _spec(args)
        if args.K is None or args.K < 1:
            raise BadArguments("-K (a positive depth) is required with --a/--b")
        pairs = instantiate(spec, args.K)
    depths = range(1, len(pairs) + 1) if args.table else [len(pairs)]
    rows = []
    for K in depths:
        try:
            v = eval_finite(pairs[:K])
        except ZeroTailDenominator as exc:
            sys.stderr.write(f"error: {exc}\n")
            return EXIT_EVAL
        rows.append((K, _frac(v), _dec(v, args.precision)))
    if args.format == "plain" and not args.table:
        out.write(rows[-1][1] + "\n")
    else:
        _emit_table(out, args.format, ["depth", "value", "decimal"], rows,
                    {"value": rows[-1][1], "decimal": rows[-1][2]})
    return EXIT_OK


def cmd_convergents(args, out) -> int:
    spec = _spec(args)
    if args.M < 0:
        raise BadArguments("-M must be nonnegative")
    rows = []
    for c in pq_convergents(spec, args.M):
        v = c.value
        rows.append((c.m, c.depth, str(c.p), str(c.q),
                     "undefined" if v is None else _frac(v),
                     "undefined" if v is None else _dec(v, args.precision)))
    _emit_table(out, args.format, ["m", "depth", "p", "q", "value", "decimal"], rows, {"spec": str(spec)})
    return EXIT_OK


def _family(args):
    try:
        return family_params(args.family, a=args.a, b=args.b, k=args.k)
    except (TypeError, ValueError) as exc:
        raise BadArguments(str(exc))


def cmd_family(args, out) -> int:
    need = {1: ("a", "k"), 2: ("a", "b"), 3: ("k",)}[args.family]
    missing = [f"--{n}" for n in need if getattr(args, n) is None]
    if missing:
        raise BadArguments(f"family {args.family} needs {' '.join(missing)}")
    params = _family(args)
    spec = params.spec()
    try:
        cf = closed_form(params, args.precision)
        est = estimate_limit(spec, args.precision, args.max_terms)
    except CFError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_EVAL
    trusted = min(est.achieved_digits, args.precision)
    diff = abs(est.value - cf.value)
    tol = Decimal(10) ** -max(trusted - 5, 1) * max(1, abs(cf.value))
    residual_exp = None if diff == 0 else int(diff.adjusted())
    ok = diff <= tol
    _emit_kv(out, args.format, {
        "family": describe_params(params),
        "spec": str(spec),
        "closed_form": cf.expr,
        "value": str(cf.value),
        "limit": str(round_to(est.value, args.precision)),
        "convergence": est.label,
        "trusted_digits": trusted,
        "residual": str(diff),
        "residual_exp": residual_exp,
        "cross_check": "pass" if ok else "FAIL",
    })
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_verify(args, out) -> int:
    spec = _spec(args)
    result = {"spec": str(spec)}
    ok = True
    result["determinant_identity"] = determinant_holds(spec, 30)
    result["recurrence_vs_finite"] = recurrence_matches_finite(spec, 12)
    ok &= result["determinant_identity"] and result["recurrence_vs_finite"]
    if args.constant is not None:
        if args.mobius is None or len(args.mobius) != 4:
            raise BadArguments("--constant needs --mobius p1,p2,p3,p4")
        if args.constant not in CONSTANTS:
            raise BadArguments(f"unknown constant {args.constant!r}; known: {', '.join(sorted(CONSTANTS))}")
        try:
            est = estimate_limit(spec, args.precision, args.max_terms)
        except CFError as exc:
            sys.stderr.write(f"error: {exc}\n")
            return EXIT_EVAL
        trusted = min(est.achieved_digits, args.precision)
        C = CONSTANTS[args.constant](args.precision + 10)
        p1, p2, p3, p4 = args.mobius
        with localcontext() as ctx:
            ctx.prec = args.precision + 10
            den = p3 + p4 * C
            if den == 0:
                raise BadArguments("Möbius denominator vanishes")
            target = (p1 + p2 * C) / den
            diff = abs(est.value - target)
        match = trusted >= 6 and diff <= Decimal(10) ** -max(trusted - 5, 1) * max(1, abs(target))
        result.update({
            "limit": str(round_to(est.value, args.precision)),
            "convergence": est.label,
            "trusted_digits": trusted,
            "target": str(round_to(target, args.precision)),
            "residual": str(diff),
            "match": match,
        })
        ok &= match
    result["verified"] = bool(ok)
    _emit_kv(out, args.format, result)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_transform(args, out) -> int:
    spec = _spec(args)
    if (args.scale is None) == (not args.euler):
        raise BadArguments("give exactly one of --scale EXPR or --euler")
    if args.scale is not None:
        try:
            c = parse_polyseq(args.scale)
            new = scale_equivalence(spec, c)
        except ValueError as exc:
            raise BadArguments(str(exc))
        try:
            same = all(
                eval_finite(instantiate(spec, K)) == eval_finite(instantiate(new, K)) for K in range(1, 13)
            )
        except (CFError, ZeroDivisionError):
            same = False
        _emit_kv(out, args.format, {"spec": str(spec), "transformed": str(new),
                                    "a": str(new.a), "b": str(new.b), "convergents_agree": same})
        return EXIT_OK if same else EXIT_VERIFY
    r = to_euler_form(spec)
    if r is None:
        _emit_kv(out, args.format, {"spec": str(spec), "euler_form": None})
        return EXIT_VERIFY
    try:
        ev = euler_value(r, args.precision, args.max_terms)
        est = estimate_limit(spec, args.precision, args.max_terms)
    except CFError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_EVAL
    trusted = min(est.achieved_digits, args.precision)
    diff = abs(ev.value - est.value)
    ok = diff <= Decimal(10) ** -max(trusted - 5, 1) * max(1, abs(ev.value))
    _emit_kv(out, args.format, {"spec": str(spec), "euler_form": str(r),
                                "euler_value": str(round_to(ev.value, args.precision)),
                                "limit": str(round_to(est.value, args.precision)),
                                "residual": str(diff), "agree": ok})
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_report(args, out) -> int:
    need = {1: ("a", "k"), 2: ("a", "b"), 3: ("k",)}[args.family]
    missing = [f"--{n}" for n in need if getattr(args, n) is None]
    if missing:
        raise BadArguments(f"family {args.family} needs {' '.join(missing)}")
    params = _family(args)
    try:
        text = build_report(params, args.precision)
    except (CFError, CrossCheckError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_EVAL
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_scan(args, out) -> int:
    fields = {}
    if args.config:
        try:
            with open(args.config) as fh:
                fields.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise BadArguments(f"cannot read config: {exc}")
    for name in ("max_degree", "coeff_bound", "moebius_bound", "max_terms"):
        v = getattr(args, name)
        if v is not None:
            fields[name] = v
    if args.scan_precision is not None:
        fields["precision"] = args.scan_precision
    if args.constants is not None:
        fields["constant_library"] = [c for c in args.constants.split(",") if c]
    try:
        config = ScanConfig.from_json(fields)
    except (TypeError, ValueError) as exc:
        raise BadArguments(str(exc))
    log = (lambda m: sys.stderr.write(m + "\n")) if args.verbose else None
    summary = scan(config, args.output, resume=args.resume, log=log)
    obj = summary.to_json()
    obj["output"] = args.output
    _emit_kv(out, args.format, obj)
    if args.format == "plain":
        for m in summary.matches:
            out.write(f"{m.spec} = {m.describe()}\n")
    return EXIT_OK


def _common(max_terms: bool = True) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=_precision, default=50, help="significant digits (default 50)")
    common.add_argument("--format", choices=("plain", "json", "csv"), default="plain")
    if max_terms:
        common.add_argument("--max-terms", dest="max_terms", type=int, default=100_000)
    return common


# options whose values may legitimately start with "-"
_VALUE_OPTIONS = ("--a", "--b", "--k", "--scale", "--mobius", "--simple", "--pairs")


def _glue_negative_values(argv: list) -> list:
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _common()

    spec_args = argparse.ArgumentParser(add_help=False)
    spec_args.add_argument("--a", help="partial denominators a(n), e.g. '4*n-2'")
    spec_args.add_argument("--b", help="partial numerators b(n), e.g. '-n*(2*n-1)'")

    fam_args = argparse.ArgumentParser(add_help=False)
    fam_args.add_argument("family", type=int, choices=(1, 2, 3))
    fam_args.add_argument("--a", type=int)
    fam_args.add_argument("--b", type=int)
    fam_args.add_argument("--k", type=int)

    p = _Parser(prog="gcf", description="General continued fractions [a(n) : b(n)].")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", parents=[common, spec_args], help="exact value of a finite fraction")
    src = e.add_mutually_exclusive_group()
    src.add_argument("--simple", type=_simple_terms, help="simple fraction terms, e.g. 1x10 or 3,7,15,1")
    src.add_argument("--pairs", type=_pairs, help="'a1,b1;a2,b2;...'")
    e.add_argument("-K", type=int, help="depth when using --a/--b")
    e.add_argument("--table", action="store_true", help="print every depth 1..K")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("convergents", parents=[common, spec_args], help="table of p(m), q(m)")
    c.add_argument("-M", type=int, default=10, help="last index m (default 10)")
    c.set_defaults(func=cmd_convergents)

    f = sub.add_parser("family", parents=[common, fam_args], help="closed form and cross-check")
    f.set_defaults(func=cmd_family)

    v = sub.add_parser("verify", parents=[common, spec_args], help="check invariants and a conjectured value")
    v.add_argument("--constant", help=f"one of {', '.join(sorted(CONSTANTS))}")
    v.add_argument("--mobius", type=_int_list, help="p1,p2,p3,p4 for (p1 + p2 C)/(p3 + p4 C)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("scan", parents=[_common(max_terms=False)], help="search small specs for Möbius matches")
    s.add_argument("--output", required=True)
    s.add_argument("--config", help="JSON file with ScanConfig fields")
    s.add_argument("--max-degree", dest="max_degree", type=int)
    s.add_argument("--coeff-bound", dest="coeff_bound", type=int)
    s.add_argument("--moebius-bound", dest="moebius_bound", type=int)
    s.add_argument("--scan-precision", dest="scan_precision", type=int, help="matching precision (default 30)")
    s.add_argument("--max-terms", dest="max_terms", type=int, help="exact-path term budget (default 2000)")
    s.add_argument("--constants", help="comma-separated library, e.g. e,pi")
    s.add_argument("--resume", action="store_true")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_scan)

    t = sub.add_parser("transform", parents=[common, spec_args], help="equivalence or Euler form")
    t.add_argument("--scale", help="c(n) with c(0) = 1")
    t.add_argument("--euler", action="store_true")
    t.set_defaults(func=cmd_transform)

    r = sub.add_parser("report", parents=[common, fam_args], help="markdown verification report")
    r.add_argument("--output")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_negative_values(list(sys.argv[1:] if argv is None else argv)))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ARGS
    try:
        return args.func(args, out)
    except BadArguments as exc:
        sys.stderr.write(f"gcf {args.command}: error: {exc}\n")
        return EXIT_ARGS
    except OSError as exc:
        sys.stderr.write(f"gcf {args.command}: I/O error: {exc}\n")
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
