"""Pipeline orchestration: mesh -> eigs -> checks -> geometry -> solve.

Exit-code contract for experiment runs:
    0  all checks passed and a solution was certified below the threshold
    2  hypothesis conditions unsatisfied
    3  solver failed to converge
    4  solution or geometry not certified below the compactness threshold
Stage errors are re-raised as StageError with the failing stage tagged.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .energy import EnergyModel
from .mesh import build_mesh, geometry_constants, refine
from .minimax import (
    MinimaxResult,
    compactness_threshold,
    linking_descent,
    linking_sup,
    mountain_pass_endpoint,
    mountain_pass_solve,
    ridge_scan,
    sphere_infimum,
)
from .moser import moser_grad_norm
from .nonlinearity import (
    CheckConstants,
    NonlinearitySpec,
    ProblemSpec,
    check_hypotheses,
    threshold_1_8,
    threshold_1_10,
    threshold_1_13,
)
from .quadrature import QuadratureRule
from .spectral import assemble, solve_eigs, split

__all__ = ["RunReport", "StageError", "run_experiment", "convergence_table", "EXIT_CODES"]

EXIT_CODES = {"ok": 0, "hypotheses_unsatisfied": 2, "solver_nonconvergence": 3,
              "certification_failed": 4}


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunReport:
    data: dict

    @property
    def exit_code(self) -> int:
        return self.data["certification"]["exit_code"]

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)

    def numeric_snapshot(self) -> str:
        """JSON with the non-reproducible metadata (timings) stripped."""
        d = {k: v for k, v in self.data.items() if k != "timings"}
        return json.dumps(d, indent=2, sort_keys=True)


def _quad_rule(cfg: ExperimentConfig) -> QuadratureRule:
    q = cfg.section("quadrature")
    return QuadratureRule(order=q["order"], radial_nodes=q["radial_nodes"],
                          angular_nodes=q["angular_nodes"])


def _nonlinearity(cfg: ExperimentConfig, lam: list[float] | None) -> NonlinearitySpec:
    nlc = cfg.section("nonlinearity")
    a = nlc["a"]
    if nlc["family"] == "shifted_quadratic" and a is None:
        if lam is None:
            raise ValueError("shifted_quadratic with a=null resolves a at runtime; eigenvalues missing")
        k = cfg.section("checks")["k"]
        a = lam[k - 2] + cfg.section("checks")["sigma0"]
    table = None if nlc["table"] is None else tuple(tuple(p) for p in nlc["table"])
    return NonlinearitySpec(family=nlc["family"], alpha=cfg.alpha, beta0=nlc["beta0"],
                            nu=nlc["nu"], a=a or 0.0, table=table)


def run_experiment(cfg: ExperimentConfig, write_files: bool = True) -> RunReport:
    """Execute the pipeline targeted by the config's theorem; returns the report."""
    timings: dict[str, float] = {}
    report: dict = {
        "config": cfg.raw,
        "tool_version": __version__,
        "seed": cfg.seed,
        "timings": timings,
    }

    def stage(name):
        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, exc_type, exc, tb):
                timings[name] = time.perf_counter() - self.t0
                if exc is not None and not isinstance(exc, StageError):
                    raise StageError(name, exc) from exc
        return _Timer()

    with stage("mesh"):
        dom = cfg.domain()
        mesh = build_mesh(dom, cfg.section("mesh")["target_h"])
        for _ in range(cfg.section("mesh")["refine_levels"]):
            mesh = refine(mesh)
        report["mesh"] = {"n_vertices": mesh.n_vertices, "n_triangles": mesh.n_triangles,
                          "max_edge": mesh.max_edge_length(),
                          "refine_levels": cfg.section("mesh")["refine_levels"]}

    rule = _quad_rule(cfg)
    with stage("assemble"):
        forms = assemble(mesh, cfg.gamma, rule)

    with stage("eigs"):
        count = max(cfg.section("eig_count"), cfg.section("checks")["k"])
        pairs = solve_eigs(forms, count)
        lam = [p.lam for p in pairs]
        resids = [_eig_residual(forms, p) for p in pairs]
        report["eigenvalues"] = {"values": lam, "residuals": resids, "count": count}

    with stage("geometry"):
        geo = geometry_constants(mesh, cfg.gamma)
        thr = compactness_threshold(cfg.alpha, cfg.gamma)
        cc = cfg.section("checks")
        const = {"d": geo.d, "kappa": geo.kappa, "threshold": thr,
                 "rhs_1_8": threshold_1_8(geo.kappa, cfg.alpha),
                 "rhs_1_10": threshold_1_10(geo.kappa, cfg.alpha, cc["sigma0"]),
                 "rhs_1_13": (None if cc["c_user"] is None or cc["sigma0"] <= 0
                              else threshold_1_13(geo.kappa, cfg.alpha, cc["sigma0"], cc["c_user"]))}
        report["constants"] = const

    problem = ProblemSpec(alpha=cfg.alpha, gamma=cfg.gamma, domain=dom)
    nl = _nonlinearity(cfg, lam)
    report["nonlinearity_resolved"] = {"family": nl.family, "beta0": nl.beta0,
                                       "nu": nl.nu, "a": nl.a}

    with stage("hypotheses"):
        constants = CheckConstants(sigma0=cc["sigma0"], sigma1=cc["sigma1"], delta=cc["delta"],
                                   k=cc["k"], c_user=cc["c_user"], t_check=cc["t_check"],
                                   grid_points=cc["grid_points"])
        hyp = check_hypotheses(problem, nl, cfg.theorem, constants, pairs)
        report["hypotheses"] = hyp.to_dict()

    model = EnergyModel(mesh, problem, nl, forms=forms)
    sol = cfg.section("solver")
    geometry_ok = True
    result: MinimaxResult | None = None

    if cfg.theorem in ("1.1", "1.2"):
        with stage("sphere"):
            inf_val = sphere_infimum(model, sol["rho"], samples=sol["sphere_samples"],
                                     seed=cfg.seed)
            report["sphere_infimum"] = {"rho": sol["rho"], "min_sampled": inf_val,
                                        "samples": sol["sphere_samples"], "seed": cfg.seed}
            geometry_ok &= inf_val > 0.0
        with stage("ridge"):
            profiles = ridge_scan(cfg.section("ridge")["j_values"], problem, nl)
            certified = [p.j for p in profiles if p.below_threshold]
            j0 = min(certified) if certified else None
            report["ridge"] = {"profiles": [_ridge_summary(p) for p in profiles],
                               "certified_j": certified, "j0": j0}
            if write_files:
                _write_ridge_csv(cfg, profiles)
            geometry_ok &= j0 is not None
        if hyp.satisfied and j0 is not None:
            with stage("solve"):
                endpoint = mountain_pass_endpoint(model, j0, sol["rho"])
                result = mountain_pass_solve(endpoint, model,
                                             path_points=sol["path_points"],
                                             tol=sol["tol"], max_iter=sol["max_iter"])
                report["minimax"] = result.to_dict()
    else:
        with stage("split"):
            sp = split(pairs, cc["k"], forms)
        with stage("sphere"):
            inf_val = sphere_infimum(model, sol["rho"], samples=sol["sphere_samples"],
                                     seed=cfg.seed, split=sp)
            report["sphere_infimum"] = {"rho": sol["rho"], "min_sampled": inf_val,
                                        "samples": sol["sphere_samples"], "seed": cfg.seed,
                                        "subspace": "W"}
            geometry_ok &= inf_val > 0.0
        with stage("link_sup"):
            j0 = min(cfg.section("ridge")["j_values"])
            ls = linking_sup(sp, j0, model, restarts=sol["restarts"], seed=cfg.seed,
                             rho=sol["rho"])
            report["linking"] = ls.to_dict()
            report["linking"]["j"] = j0
            geometry_ok &= ls.boundary_sup <= 1e-8 and ls.attained_interior
        if hyp.satisfied:
            with stage("solve"):
                result = linking_descent(ls.field, model, tol=sol["tol"],
                                         max_iter=sol["max_iter"])
                report["minimax"] = result.to_dict()

    code = EXIT_CODES["ok"]
    if not hyp.satisfied:
        code = EXIT_CODES["hypotheses_unsatisfied"]
    elif result is None:
        # hypotheses fine but the geometry stage found nothing to solve from
        code = (EXIT_CODES["certification_failed"] if not geometry_ok
                else EXIT_CODES["solver_nonconvergence"])
    elif not result.converged:
        code = EXIT_CODES["solver_nonconvergence"]
    elif not (geometry_ok and result.below_threshold and result.nontrivial):
        code = EXIT_CODES["certification_failed"]
    report["certification"] = {
        "hypotheses_ok": hyp.satisfied,
        "geometry_ok": geometry_ok,
        "solver_converged": bool(result is not None and result.converged),
        "below_threshold": bool(result is not None and result.below_threshold),
        "nontrivial": bool(result is not None and result.nontrivial),
        "exit_code": code,
    }
    rep = RunReport(data=report)
    if write_files:
        out = cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(rep.to_json() + "\n")
        if result is not None:
            np.savetxt(out / "solution_field.txt", result.field.values)
    return rep


def _eig_residual(forms, pair) -> float:
    r = forms.K @ pair.field.values - pair.lam * (forms.M @ pair.field.values)
    return float(np.linalg.norm(r))


def _ridge_summary(p) -> dict:
    d = p.to_dict()
    d.pop("t_samples")
    d.pop("H_samples")
    return d


def _write_ridge_csv(cfg: ExperimentConfig, profiles) -> None:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    for p in profiles:
        with open(out / f"ridge_j{p.j}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "H"])
            for t, H in zip(p.t_samples, p.H_samples):
                w.writerow([repr(float(t)), repr(float(H))])


def convergence_table(cfg: ExperimentConfig, levels: int, include_solve: bool = True) -> dict:
    """Per-refinement-level eigenvalue, bubble-norm error, and solve level.

    Rates are Richardson estimates from consecutive differences.
    """
    if levels < 2:
        raise ValueError("need at least 2 levels")
    dom = cfg.domain()
    problem = ProblemSpec(alpha=cfg.alpha, gamma=cfg.gamma, domain=dom)
    rule = _quad_rule(cfg)
    mesh = build_mesh(dom, cfg.section("mesh")["target_h"])
    rows = []
    for lvl in range(levels):
        forms = assemble(mesh, cfg.gamma, rule)
        pairs = solve_eigs(forms, max(2, cfg.section("checks")["k"]))
        lam1 = pairs[0].lam
        moser_err = abs(moser_grad_norm(2, mesh.inradius_d, mesh) - 1.0)
        row = {"level": lvl, "n_triangles": mesh.n_triangles, "lambda1": lam1,
               "moser_norm_error": moser_err, "solve_level": None}
        if include_solve and cfg.theorem in ("1.1", "1.2"):
            nl = _nonlinearity(cfg, [p.lam for p in pairs])
            model = EnergyModel(mesh, problem, nl, forms=forms)
            try:
                endpoint = mountain_pass_endpoint(model, min(cfg.section("ridge")["j_values"]),
                                                  cfg.section("solver")["rho"])
                res = mountain_pass_solve(endpoint, model,
                                          path_points=cfg.section("solver")["path_points"],
                                          tol=cfg.section("solver")["tol"])
                if res.converged:
                    row["solve_level"] = res.level
            except RuntimeError:
                pass
        rows.append(row)
        if lvl < levels - 1:
            mesh = refine(mesh)
    lam_seq = [r["lambda1"] for r in rows]
    rates = [None, None]
    for i in range(2, len(lam_seq)):
        d1 = lam_seq[i - 2] - lam_seq[i - 1]
        d2 = lam_seq[i - 1] - lam_seq[i]
        rates.append(math.log2(abs(d1 / d2)) if d2 != 0 and d1 * d2 > 0 else None)
    for r, rate in zip(rows, rates):
        r["lambda1_rate"] = rate
    return {"rows": rows, "config": cfg.raw}


def write_table_csv(table: dict, path) -> None:
    rows = table["rows"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "n_triangles", "lambda1", "lambda1_rate",
                    "moser_norm_error", "solve_level"])
        for r in rows:
            w.writerow([r["level"], r["n_triangles"], repr(r["lambda1"]),
                        "" if r["lambda1_rate"] is None else repr(r["lambda1_rate"]),
                        repr(r["moser_norm_error"]),
                        "" if r["solve_level"] is None else repr(r["solve_level"])])
