"""Command-line interface.

Commands: mesh, eigs, moser, check, ridge, solve-mp, link-sup, link-solve,
run, table.  Results are emitted as JSON (reports) and CSV (profiles and
tables).  The SINGTM_THREADS environment variable caps BLAS thread counts
for reproducible timings; computations themselves are deterministic given
--seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np


def _apply_thread_env() -> None:
    n = os.environ.get("SINGTM_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


def _rule_from_args(args):
    from .quadrature import QuadratureRule

    radial, angular = 12, 8
    if args.polar_nodes:
        parts = args.polar_nodes.split(",")
        radial = int(parts[0])
        angular = int(parts[1]) if len(parts) > 1 else angular
    return QuadratureRule(order=args.quad_order, radial_nodes=radial, angular_nodes=angular)


def _domain_from_args(args):
    from .mesh import DomainSpec

    if args.shape == "disk":
        return DomainSpec.disk(args.radius)
    if not args.vertices:
        raise SystemExit("polygon shape needs --vertices 'x,y;x,y;...'")
    pts = [tuple(map(float, p.split(","))) for p in args.vertices.split(";") if p.strip()]
    return DomainSpec.polygon(pts)


def _mesh_from_args(args):
    from .mesh import build_mesh, load_mesh, refine

    if getattr(args, "mesh", None):
        mesh = load_mesh(args.mesh)
    else:
        mesh = build_mesh(_domain_from_args(args), args.h)
    for _ in range(getattr(args, "levels", 0) or 0):
        mesh = refine(mesh)
    return mesh


def _add_domain_args(p, with_mesh_file=True):
    p.add_argument("--shape", choices=["disk", "polygon"], default="disk")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--vertices", help="polygon vertices as 'x,y;x,y;...' (CCW)")
    p.add_argument("--h", type=float, default=0.125, help="target mesh size")
    p.add_argument("--levels", type=int, default=2, help="uniform refinements")
    if with_mesh_file:
        p.add_argument("--mesh", help="load mesh from file instead of building")


def _add_family_args(p):
    p.add_argument("--family", default="rational",
                   choices=["rational", "sign_perturbed", "shifted_quadratic", "user_table"])
    p.add_argument("--beta0", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--table", help="path to two-column (t, h) file for user_table")


def _nl_from_args(args, alpha):
    from .nonlinearity import NonlinearitySpec

    table = None
    if args.family == "user_table":
        if not args.table:
            raise SystemExit("user_table family needs --table FILE")
        rows = np.loadtxt(args.table, ndmin=2)
        table = tuple((float(r[0]), float(r[1])) for r in rows)
    return NonlinearitySpec(family=args.family, alpha=alpha, beta0=args.beta0,
                            nu=args.nu, a=args.a, table=table)


def _parse_j(spec: str) -> list[int]:
    """'2:64' doubles from lo to hi (2, 4, ..., 64); '2,3,5' is a plain list."""
    if ":" in spec:
        lo, hi = map(int, spec.split(":"))
        out = []
        j = lo
        while j <= hi:
            out.append(j)
            j *= 2
        return out
    return [int(v) for v in spec.split(",")]


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def main(argv=None) -> int:
    _apply_thread_env()
    ap = argparse.ArgumentParser(prog="singtm", description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--quad-order", type=int, default=7)
    ap.add_argument("--polar-nodes", help="radial[,angular] node counts for origin triangles")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("mesh", help="build a mesh and write the plain-text format")
    _add_domain_args(p, with_mesh_file=False)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eigs", help="weighted eigenvalues with a refinement convergence table")
    _add_domain_args(p)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--count", type=int, default=2)
    p.add_argument("--out")

    p = sub.add_parser("moser", help="bubble integrals, norm check, criticality probe")
    p.add_argument("--j", type=int, default=2)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--probe-j", default="2:4096", help="j list for the probe (lo:hi doubling)")
    p.add_argument("--out", help="CSV output path for the probe table")

    p = sub.add_parser("check", help="hypothesis checks for one theorem configuration")
    _add_domain_args(p)
    _add_family_args(p)
    p.add_argument("--theorem", required=True, choices=["1.1", "1.2", "1.3"])
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--sigma0", type=float, default=0.0)
    p.add_argument("--sigma1", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--c-user", type=float)
    p.add_argument("--out")

    p = sub.add_parser("ridge", help="scan sup_t E(t w_j) over bubble indices")
    _add_domain_args(p, with_mesh_file=False)
    _add_family_args(p)
    p.add_argument("--j", default="2:64")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--out")
    p.add_argument("--csv-dir", help="write one t,H profile CSV per j")

    p = sub.add_parser("solve-mp", help="mountain-pass solve on the canonical pipeline")
    _add_domain_args(p)
    _add_family_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--j0", type=int, help="bubble index for the endpoint (default: scan)")
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--path-points", type=int, default=25)
    p.add_argument("--out")
    p.add_argument("--field-out", help="write the converged coefficient vector")

    p = sub.add_parser("link-sup", help="supremum of E over the linking cone")
    _add_domain_args(p)
    _add_family_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--j", type=int, default=16)
    p.add_argument("--restarts", type=int, default=6)
    p.add_argument("--out")

    p = sub.add_parser("link-solve", help="cone supremum followed by heuristic descent")
    _add_domain_args(p)
    _add_family_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--j", type=int, default=16)
    p.add_argument("--restarts", type=int, default=6)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.add_argument("--field-out")

    p = sub.add_parser("run", help="run a config-driven experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", help="override the config's output directory")

    p = sub.add_parser("table", help="convergence table over refinement levels")
    p.add_argument("--config", required=True)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--no-solve", action="store_true", help="skip the per-level solve column")
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("energy", help="evaluate E on a stored coefficient vector")
    _add_domain_args(p)
    _add_family_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--field", required=True, help="plain-text coefficient vector")

    args = ap.parse_args(argv)
    return _dispatch(args)


def _dispatch(args) -> int:
    from .mesh import save_mesh

    rule = _rule_from_args(args)

    if args.cmd == "mesh":
        mesh = _mesh_from_args(args)
        save_mesh(mesh, args.out)
        print(f"wrote {mesh.n_vertices} vertices, {mesh.n_triangles} triangles, "
              f"inradius {mesh.inradius_d:.6g} to {args.out}")
        return 0

    if args.cmd == "eigs":
        return _cmd_eigs(args, rule)
    if args.cmd == "moser":
        return _cmd_moser(args)
    if args.cmd == "check":
        return _cmd_check(args, rule)
    if args.cmd == "ridge":
        return _cmd_ridge(args)
    if args.cmd == "solve-mp":
        return _cmd_solve_mp(args, rule)
    if args.cmd in ("link-sup", "link-solve"):
        return _cmd_link(args, rule)
    if args.cmd == "run":
        return _cmd_run(args)
    if args.cmd == "table":
        return _cmd_table(args)
    if args.cmd == "energy":
        return _cmd_energy(args, rule)
    raise SystemExit(f"unknown command {args.cmd}")


def _cmd_eigs(args, rule) -> int:
    from .mesh import refine
    from .spectral import assemble, solve_eigs

    # the convergence table refines the *initial* mesh level by level
    base = _mesh_from_args(argparse.Namespace(**{**vars(args), "levels": 0}))
    table = []
    m = base
    for lvl in range(max(1, args.levels + 1)):
        forms = assemble(m, args.gamma, rule)
        pairs = solve_eigs(forms, args.count)
        res = [float(np.linalg.norm(forms.K @ p.field.values
                                    - p.lam * (forms.M @ p.field.values))) for p in pairs]
        table.append({"level": lvl, "n_triangles": m.n_triangles,
                      "eigenvalues": [p.lam for p in pairs], "residuals": res})
        if lvl < args.levels:
            m = refine(m)
    _emit({"gamma": args.gamma, "count": args.count, "levels": table}, args.out)
    return 0


def _cmd_moser(args) -> int:
    from .moser import (criticality_probe, moser_grad_norm_exact,
                        moser_integral_first, moser_integral_second)
    from .quadrature import radial_integrate
    from .moser import moser_radial

    alpha = args.alpha if args.alpha is not None else 4.0 * math.pi * (1.0 - args.gamma / 2.0)
    i1 = moser_integral_first(args.j, args.d, args.gamma)
    i2 = moser_integral_second(args.j, args.d, args.gamma)
    i1q = radial_integrate(lambda r: moser_radial(r, args.j, args.d), args.d, args.gamma,
                           breakpoints=(args.d / args.j,))
    i2q = radial_integrate(lambda r: moser_radial(r, args.j, args.d) ** 2, args.d, args.gamma,
                           breakpoints=(args.d / args.j,))
    print(f"first integral  closed {i1!r}  quadrature {i1q!r}  rel {abs(i1 - i1q) / i1:.2e}")
    print(f"second integral closed {i2!r}  quadrature {i2q!r}  rel {abs(i2 - i2q) / i2:.2e}")
    print(f"gradient norm (analytic radial): {moser_grad_norm_exact(args.j, args.d)!r}")
    probe = criticality_probe(_parse_j(args.probe_j), alpha, args.gamma, args.d)
    rows = [("j", "S", "baseline", "critical")]
    rows += [(j, s, probe.baseline, probe.critical)
             for j, s in zip(probe.j_values, probe.S_values)]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
        print(f"probe table written to {args.out}")
    else:
        for r in rows:
            print(",".join(str(v) for v in r))
    return 0


def _cmd_check(args, rule) -> int:
    from .nonlinearity import CheckConstants, ProblemSpec, check_hypotheses
    from .spectral import assemble, solve_eigs

    mesh = _mesh_from_args(args)
    dom = mesh.domain if mesh.domain is not None else _domain_from_args(args)
    problem = ProblemSpec(alpha=args.alpha, gamma=args.gamma, domain=dom)
    nl = _nl_from_args(args, args.alpha)
    forms = assemble(mesh, args.gamma, rule)
    pairs = solve_eigs(forms, max(2, args.k))
    cc = CheckConstants(sigma0=args.sigma0, sigma1=args.sigma1, delta=args.delta,
                        k=args.k, c_user=args.c_user)
    rep = check_hypotheses(problem, nl, args.theorem, cc, pairs)
    _emit(rep.to_dict(), args.out)
    return 0 if rep.satisfied else 2


def _cmd_ridge(args) -> int:
    from .minimax import ridge_scan
    from .nonlinearity import ProblemSpec

    dom = _domain_from_args(args)
    problem = ProblemSpec(alpha=args.alpha, gamma=args.gamma, domain=dom)
    nl = _nl_from_args(args, args.alpha)
    profiles = ridge_scan(_parse_j(args.j), problem, nl)
    if args.csv_dir:
        Path(args.csv_dir).mkdir(parents=True, exist_ok=True)
        for p in profiles:
            with open(Path(args.csv_dir) / f"ridge_j{p.j}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["t", "H"])
                for t, H in zip(p.t_samples, p.H_samples):
                    w.writerow([repr(float(t)), repr(float(H))])
    summary = []
    for p in profiles:
        d = p.to_dict()
        d.pop("t_samples")
        d.pop("H_samples")
        summary.append(d)
    certified = [p.j for p in profiles if p.below_threshold]
    _emit({"profiles": summary, "certified_j": certified,
           "j0": min(certified) if certified else None}, args.out)
    return 0 if certified else 4


def _cmd_solve_mp(args, rule) -> int:
    from .energy import EnergyModel
    from .minimax import mountain_pass_endpoint, mountain_pass_solve, ridge_scan
    from .nonlinearity import ProblemSpec

    mesh = _mesh_from_args(args)
    dom = mesh.domain if mesh.domain is not None else _domain_from_args(args)
    problem = ProblemSpec(alpha=args.alpha, gamma=args.gamma, domain=dom)
    nl = _nl_from_args(args, args.alpha)
    model = EnergyModel(mesh, problem, nl, rule=rule)
    j0 = args.j0
    if j0 is None:
        profiles = ridge_scan([2, 4, 8, 16, 32, 64], problem, nl)
        certified = [p.j for p in profiles if p.below_threshold]
        if not certified:
            print("no certified bubble index; mountain-pass geometry not established",
                  file=sys.stderr)
            return 4
        j0 = min(certified)
    endpoint = mountain_pass_endpoint(model, j0, args.rho)
    res = mountain_pass_solve(endpoint, model, path_points=args.path_points, tol=args.tol)
    out = res.to_dict()
    out["j0"] = j0
    _emit(out, args.out)
    if args.field_out and res.field is not None:
        np.savetxt(args.field_out, res.field.values)
    if not res.converged:
        return 3
    return 0 if res.below_threshold and res.nontrivial else 4


def _cmd_link(args, rule) -> int:
    from .energy import EnergyModel
    from .minimax import linking_descent, linking_sup
    from .nonlinearity import ProblemSpec
    from .spectral import assemble, solve_eigs, split

    mesh = _mesh_from_args(args)
    dom = mesh.domain if mesh.domain is not None else _domain_from_args(args)
    problem = ProblemSpec(alpha=args.alpha, gamma=args.gamma, domain=dom)
    nl = _nl_from_args(args, args.alpha)
    forms = assemble(mesh, args.gamma, rule)
    pairs = solve_eigs(forms, max(2, args.k))
    sp = split(pairs, args.k, forms)
    model = EnergyModel(mesh, problem, nl, forms=forms)
    ls = linking_sup(sp, args.j, model, restarts=args.restarts, seed=args.seed)
    if args.cmd == "link-sup":
        _emit(ls.to_dict(), args.out)
        return 0
    res = linking_descent(ls.field, model, tol=args.tol)
    out = {"linking_sup": ls.to_dict(), "descent": res.to_dict()}
    _emit(out, args.out)
    if args.field_out and res.field is not None:
        np.savetxt(args.field_out, res.field.values)
    return 0 if res.converged and res.nontrivial else 3


def _cmd_run(args) -> int:
    from .config import load_config, config_from_dict
    from .runner import StageError, run_experiment

    cfg = load_config(args.config)
    if args.out_dir:
        raw = dict(cfg.raw)
        raw["output_dir"] = args.out_dir
        cfg = config_from_dict(raw)
    try:
        rep = run_experiment(cfg)
    except StageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(rep.to_json())
    return rep.exit_code


def _cmd_table(args) -> int:
    from .config import load_config
    from .runner import convergence_table, write_table_csv

    cfg = load_config(args.config)
    table = convergence_table(cfg, args.levels, include_solve=not args.no_solve)
    if args.out:
        write_table_csv(table, args.out)
        print(f"table written to {args.out}")
    else:
        for row in table["rows"]:
            print(row)
    return 0


def _cmd_energy(args, rule) -> int:
    from .energy import EnergyModel
    from .fields import DiscreteField
    from .nonlinearity import ProblemSpec

    mesh = _mesh_from_args(args)
    dom = mesh.domain if mesh.domain is not None else _domain_from_args(args)
    problem = ProblemSpec(alpha=args.alpha, gamma=args.gamma, domain=dom)
    nl = _nl_from_args(args, args.alpha)
    model = EnergyModel(mesh, problem, nl, rule=rule)
    vals = np.loadtxt(args.field)
    u = DiscreteField(mesh, np.atleast_1d(vals))
    ev = model.energy(u)
    print(json.dumps({"total": ev.total, "quadratic": ev.quadratic,
                      "potential": ev.potential, "overflow": ev.overflow},
                     indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
