#!/usr/bin/env python3
"""Canonical mountain-pass experiment: unit disk, gamma = 0, alpha = 4 pi,
rational nonlinearity with beta0 = 1.

Runs the full pipeline (mesh, eigenvalues, hypothesis checks, ridge scan,
sphere infimum, path solve) and writes the report plus CSV profiles.
"""

import argparse
import math
import sys

from singtm.config import config_from_dict
from singtm.runner import run_experiment


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="out/theorem11")
    ap.add_argument("--beta0", type=float, default=1.0)
    ap.add_argument("--refine-levels", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = config_from_dict({
        "problem": {"alpha": 4 * math.pi, "gamma": 0.0,
                    "domain": {"kind": "disk", "radius": 1.0}},
        "nonlinearity": {"family": "rational", "beta0": args.beta0},
        "theorem": "1.1",
        "mesh": {"target_h": 0.125, "refine_levels": args.refine_levels},
        "solver": {"tol": 1e-6, "path_points": 25, "max_iter": 200,
                   "rho": 0.05, "sphere_samples": 500},
        "checks": {"sigma1": 4.5, "delta": 0.1, "grid_points": 100000},
        "ridge": {"j_values": [2, 4, 8, 16, 32, 64]},
        "output_dir": args.out_dir,
        "seed": args.seed,
    })
    rep = run_experiment(cfg)
    d = rep.data
    print(f"lambda1 = {d['eigenvalues']['values'][0]:.6f}")
    print(f"kappa = {d['constants']['kappa']}, threshold = {d['constants']['threshold']}")
    print(f"hypotheses satisfied: {d['hypotheses']['satisfied']}")
    print(f"certified bubble indices: {d['ridge']['certified_j']} (j0 = {d['ridge']['j0']})")
    if "minimax" in d:
        m = d["minimax"]
        print(f"solve: converged={m['converged']} level={m['level']:.6f} "
              f"residual={m['residual_norm']:.2e} below_threshold={m['below_threshold']}")
    print(f"report written to {args.out_dir}/report.json (exit code {rep.exit_code})")
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
