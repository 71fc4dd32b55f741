#!/usr/bin/env python3
"""Probe the weighted exponential functional S(j) = integral of
e^{alpha w_j^2} |x|^{-gamma} over the disk along the bubble family.

At and below the critical scaling alpha/(4 pi) + gamma/2 = 1 the values stay
bounded in j; above it they grow without bound.  Writes one CSV per alpha.
"""

import argparse
import csv
import math
import sys
from pathlib import Path

from singtm.moser import criticality_probe


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, default=0.0)
    ap.add_argument("--alphas", default="pi,2pi,4pi,5pi",
                    help="comma list; 'Npi' multiplies pi")
    ap.add_argument("--max-j", type=int, default=4096)
    ap.add_argument("--out-dir", default="out/probe")
    args = ap.parse_args()

    js = []
    j = 2
    while j <= args.max_j:
        js.append(j)
        j *= 2

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for tok in args.alphas.split(","):
        tok = tok.strip()
        alpha = float(tok[:-2]) * math.pi if tok.endswith("pi") and tok != "pi" else (
            math.pi if tok == "pi" else float(tok))
        probe = criticality_probe(js, alpha, args.gamma)
        tag = tok.replace(".", "_")
        path = out / f"probe_alpha_{tag}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j", "S", "baseline", "critical"])
            for jv, sv in zip(probe.j_values, probe.S_values):
                w.writerow([jv, repr(sv), repr(probe.baseline), probe.critical])
        flag = "critical" if probe.critical else "supercritical"
        print(f"alpha = {tok:>5} ({flag}): S ranges [{min(probe.S_values):.4f}, "
              f"{max(probe.S_values):.4f}] over j <= {args.max_j} -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
