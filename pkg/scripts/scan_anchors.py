"""Run the default scan and report the two anchor identities.

Writes matches to the given JSONL path (default matches.jsonl) and prints the
summary, the anchors, and a count of matches per constant.
"""

import argparse
import collections
import sys
import time

from gcf.scanner import ScanConfig, read_matches, scan

ANCHORS = {
    ((0, 3, 0), (0, 1, -2)): ("pi", (4, 0, -8, 3)),
    ((3, 1, 0), (0, -1, 0)): ("e", (0, 1, -2, 1)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output", default="matches.jsonl")
    ap.add_argument("--coeff-bound", type=int, default=6)
    ap.add_argument("--max-degree", type=int, default=2)
    ap.add_argument("--moebius-bound", type=int, default=8)
    ap.add_argument("--resume", action="store_true")
    args = ap.parse_args()
    cfg = ScanConfig(max_degree=args.max_degree, coeff_bound=args.coeff_bound, moebius_bound=args.moebius_bound)
    t0 = time.perf_counter()
    summary = scan(cfg, args.output, resume=args.resume, log=lambda m: print(m, file=sys.stderr))
    print(f"elapsed {time.perf_counter() - t0:.1f} s")
    for k, v in summary.to_json().items():
        print(f"{k}: {v}")
    _, records = read_matches(args.output)
    found = {(tuple(r["a"]), tuple(r["b"])): (r["constant"], tuple(r["mobius"])) for r in records}
    for key, want in ANCHORS.items():
        got = found.get(key)
        print(f"anchor a={list(key[0])} b={list(key[1])}: {'found' if got == want else 'MISSING'} {got}")
    per = collections.Counter(r["constant"] for r in records)
    for name, n in sorted(per.items()):
        print(f"  {name}: {n} records")


if __name__ == "__main__":
    main()
