"""Command line front end.

Commands: generate, check-feas, fixed-point, solve, solve-mc, sweep,
certify-if, oracle, plot.  Every command validates the scenario, runs
the deterministic core, and writes a JSON run report plus CSV and PNG
artifacts into --out.

Exit codes: 0 success, 2 invalid input, 3 infeasible, 4 non-convergence,
5 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, plots, report, scenario as scen
from .errors import (
    ConvergenceError,
    DivergenceError,
    InfeasibleProblemError,
    InvalidUtilityError,
    ModelError,
    NonConcaveError,
    OscillationError,
    PowerControlError,
    ScenarioError,
    UtilityDomainError,
)
from .feasibility import check_feasibility, max_uniform_scaling
from .fixedpoint import (
    AsyncSchedule,
    PowerCappedMap,
    TargetSinrMap,
    certify_standard,
    iterate_async,
    iterate_sync,
)
from .gridsearch import grid_search
from .logopt import G2offConfig, G2TooConfig, solve_g2off, solve_g2too
from .model import sinr, total_utility
from .multicarrier import McConfig, budget_check, solve_mc
from .report import RunReport, Stopwatch

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_NO_CONVERGENCE = 4
EXIT_INTERNAL = 5


def _add_common(p: argparse.ArgumentParser, scenario_required: bool = True):
    p.add_argument("--scenario", required=scenario_required, metavar="FILE",
                   help="scenario JSON file")
    p.add_argument("--out", default=".", metavar="DIR",
                   help="directory for the report and artifacts (default: .)")
    p.add_argument("--seed", type=int, default=None, help="seed override")
    p.add_argument("--tol", type=float, default=None, help="tolerance override")
    p.add_argument("--max-iter", type=int, default=None, help="iteration budget override")
    p.add_argument("--allow-nonconcave", action="store_true",
                   help="run solvers even if the concavity certificate fails")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="powerctl",
        description="Utility-based power control workbench for interference-limited networks",
    )
    p.add_argument("--version", action="version", version=f"powerctl {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="materialize a placement-generator scenario")
    g.add_argument("--num-links", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--area-size", type=float, default=1000.0)
    g.add_argument("--path-loss-exponent", type=float, default=3.5)
    g.add_argument("--min-distance", type=float, default=10.0)
    g.add_argument("--noise", type=float, default=1e-10)
    g.add_argument("--p-max", type=float, default=1.0)
    g.add_argument("--name", default=None)
    g.add_argument("--out", default=".", metavar="DIR")

    cf = sub.add_parser("check-feas", help="SINR-target feasibility via the Perron root")
    _add_common(cf)
    cf.add_argument("--gamma", default=None,
                    help="uniform SINR target (overrides the scenario's gamma_target)")

    fp = sub.add_parser("fixed-point", help="standard-interference-function iteration")
    _add_common(fp)
    fp.add_argument("--gamma", default=None, help="uniform SINR target")
    fp.add_argument("--uncapped", action="store_true",
                    help="iterate the raw target map without power caps")
    fp.add_argument("--async-staleness", type=int, default=None, metavar="D",
                    help="run asynchronously with staleness bound D")
    fp.add_argument("--update-prob", type=float, default=1.0)

    sv = sub.add_parser("solve", help="log-domain utility maximization")
    _add_common(sv)
    sv.add_argument("--algo", choices=("g2off", "g2too"), default=None)
    sv.add_argument("--async-staleness", type=int, default=None, metavar="D")
    sv.add_argument("--update-prob", type=float, default=None)
    sv.add_argument("--noise", type=float, default=None,
                    help="measurement-noise bound for g2too")

    mc = sub.add_parser("solve-mc", help="multi-carrier budgeted utility maximization")
    _add_common(mc)

    sw = sub.add_parser("sweep", help="sweep a uniform SINR target or budget")
    _add_common(sw)
    sw.add_argument("--gamma", default=None, metavar="LO:HI:STEP",
                    help="uniform SINR target range")
    sw.add_argument("--budget", default=None, metavar="LO:HI:STEP",
                    help="per-link budget range (multi-carrier scenarios)")

    ci = sub.add_parser("certify-if", help="randomized standard-interference-function check")
    _add_common(ci)
    ci.add_argument("--gamma", default=None, help="uniform SINR target")
    ci.add_argument("--pairs", type=int, default=1000)

    orc = sub.add_parser("oracle", help="brute-force grid-search optimum (n <= 3)")
    _add_common(orc)
    orc.add_argument("--resolution", type=int, default=41)
    orc.add_argument("--refine-rounds", type=int, default=4)

    pl = sub.add_parser("plot", help="render convergence and sweep figures")
    _add_common(pl)
    pl.add_argument("--gamma", default=None, metavar="LO:HI:STEP",
                    help="sweep range (default 0.1:2.5:0.1)")
    return p


def _parse_gamma(text, n):
    """Scalar '1.5' -> uniform target; 'LO:HI:STEP' -> sweep values."""
    if text is None:
        return None
    if ":" in str(text):
        parts = str(text).split(":")
        if len(parts) != 3:
            raise ScenarioError([f"--gamma: expected LO:HI:STEP, got {text!r}"])
        lo, hi, step = (float(x) for x in parts)
        if step <= 0 or hi < lo:
            raise ScenarioError(["--gamma: need LO <= HI and STEP > 0"])
        count = int(round((hi - lo) / step)) + 1
        return lo + step * np.arange(count)
    return np.full(n, float(text))


def _resolve_target(sc: scen.Scenario, gamma_flag):
    if gamma_flag is not None:
        return _parse_gamma(gamma_flag, sc.num_links)
    target = sc.gamma_target()
    if target is None:
        raise ScenarioError(
            ["gamma_target: not in the scenario and no --gamma flag given"]
        )
    return target


def _report_base(args, sc: scen.Scenario, command: str) -> RunReport:
    return RunReport(
        command=command,
        tool_version=__version__,
        scenario_name=sc.name,
        input_digest=sc.digest,
        seed=getattr(args, "seed", None),
    )


def _cmd_generate(args) -> int:
    sc = scen.generate(
        {
            "num_links": args.num_links,
            "area_size": args.area_size,
            "path_loss_exponent": args.path_loss_exponent,
            "min_tx_rx_distance": args.min_distance,
        },
        seed=args.seed,
        name=args.name,
        noise=args.noise,
        limits={"p_min": 0.0, "p_max": args.p_max},
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "scenario.json"
    sc.save(path)
    rep = RunReport(
        command="generate", tool_version=__version__, scenario_name=sc.name,
        input_digest=sc.digest, seed=args.seed,
        parameters={"num_links": args.num_links},
        results={"scenario_file": str(path), "digest": sc.digest},
    )
    rep.write(out)
    print(f"wrote {path} (digest {sc.digest[:12]})")
    return EXIT_OK


def _cmd_check_feas(args, sc: scen.Scenario) -> int:
    model = sc.to_model()
    target = _resolve_target(sc, args.gamma)
    rep = _report_base(args, sc, "check-feas")
    with Stopwatch() as sw:
        verdict = check_feasibility(model, target)
        scaling = max_uniform_scaling(model, target)
    rep.wall_time_s = sw.elapsed
    rep.parameters = {"gamma_target": target}
    rep.results = {
        "rho": verdict.rho,
        "status": verdict.status.value,
        "feasible": verdict.feasible,
        "p_star": verdict.p_star,
        "bound_violations": verdict.bound_violations,
        "fixed_point_residual": verdict.residual,
        "max_uniform_scaling": scaling,
    }
    rep.write(Path(args.out))
    status = verdict.status.value
    print(f"rho = {verdict.rho:.9g}  status = {status}")
    if verdict.p_star is not None:
        print("p_star =", np.array2string(verdict.p_star, precision=9))
    return EXIT_OK if verdict.feasible else EXIT_INFEASIBLE


def _cmd_fixed_point(args, sc: scen.Scenario) -> int:
    model = sc.to_model()
    target = _resolve_target(sc, args.gamma)
    tol = args.tol if args.tol is not None else 1e-9
    max_iter = args.max_iter if args.max_iter is not None else 100000
    inner = TargetSinrMap(model, target)
    imap = inner if args.uncapped else PowerCappedMap(inner, model.p_max)
    p0 = np.zeros(model.num_links)
    rep = _report_base(args, sc, "fixed-point")
    with Stopwatch() as sw:
        if args.async_staleness is not None:
            schedule = AsyncSchedule(
                staleness_bound=args.async_staleness,
                update_probability=args.update_prob,
                seed=args.seed if args.seed is not None else 0,
            )
            result = iterate_async(imap, p0, schedule, tol=tol, max_iter=max_iter,
                                   record_trajectory=True)
        else:
            result = iterate_sync(imap, p0, tol=tol, max_iter=max_iter,
                                  record_trajectory=True)
    rep.wall_time_s = sw.elapsed
    out = Path(args.out)
    rep.parameters = {
        "gamma_target": target, "tol": tol, "max_iter": max_iter,
        "capped": not args.uncapped,
        "async_staleness": args.async_staleness,
    }
    rep.results = {
        "p_bar": result.p_bar,
        "iterations": result.iterations,
        "residual": result.residual,
        "converged": result.converged,
        "sinr": sinr(model, result.p_bar),
    }
    out.mkdir(parents=True, exist_ok=True)
    if result.trajectory is not None:
        csv_path = report.write_trajectory_csv(
            out / "trajectory.csv", result.trajectory_iters,
            result.trajectory, result.trajectory_residuals,
        )
        fig_path = plots.convergence_figure(
            out / "convergence.png", result.trajectory_iters,
            result.trajectory, result.trajectory_residuals,
        )
        rep.artifacts = [str(csv_path), str(fig_path)]
    rep.write(out)
    print(f"converged = {result.converged} after {result.iterations} iterations, "
          f"residual {result.residual:.3g}")
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _solver_settings(args, sc: scen.Scenario) -> dict:
    cfg = sc.solver_overrides()
    if args.tol is not None:
        cfg["tol"] = args.tol
    if args.max_iter is not None:
        cfg["max_iter"] = args.max_iter
    if getattr(args, "algo", None) is not None:
        cfg["algo"] = args.algo
    if args.allow_nonconcave:
        cfg["allow_nonconcave"] = True
    return cfg


def _cmd_solve(args, sc: scen.Scenario) -> int:
    model = sc.to_model()
    spec = sc.utility_spec()
    cfg = _solver_settings(args, sc)
    algo = cfg.get("algo", "g2off")
    rep = _report_base(args, sc, "solve")
    with Stopwatch() as sw:
        if algo == "g2too":
            async_cfg = cfg.get("async", {})
            schedule = AsyncSchedule(
                staleness_bound=(args.async_staleness
                                 if args.async_staleness is not None
                                 else int(async_cfg.get("staleness", 0))),
                update_probability=(args.update_prob
                                    if args.update_prob is not None
                                    else float(async_cfg.get("update_probability", 1.0))),
                seed=args.seed if args.seed is not None else int(async_cfg.get("seed", 0)),
            )
            solution = solve_g2too(model, spec, G2TooConfig(
                schedule=schedule,
                noise_bound=(args.noise if args.noise is not None
                             else float(cfg.get("noise_bound", 0.0))),
                tol=float(cfg.get("tol", 1e-8)),
                max_iter=int(cfg.get("max_iter", 200000)),
                allow_nonconcave=bool(cfg.get("allow_nonconcave", False)),
                record_trajectory=True,
            ))
        else:
            solution = solve_g2off(model, spec, G2offConfig(
                tol=float(cfg.get("tol", 1e-8)),
                max_iter=int(cfg.get("max_iter", 50000)),
                step=float(cfg.get("step", 1.0)),
                allow_nonconcave=bool(cfg.get("allow_nonconcave", False)),
                record_trajectory=True,
            ))
    rep.wall_time_s = sw.elapsed
    out = Path(args.out)
    rep.parameters = {"algo": algo, "tol": cfg.get("tol", 1e-8)}
    rep.results = {
        "powers": solution.powers,
        "sinr": sinr(model, solution.powers),
        "objective": solution.objective,
        "iterations": solution.iterations,
        "converged": solution.converged,
        "penalty_weight": solution.penalty_weight,
        "multipliers": {
            "lambda_lower": solution.multipliers.lambda_lower,
            "lambda_upper": solution.multipliers.lambda_upper,
            "mu": solution.multipliers.mu,
            "nu": solution.multipliers.nu,
        },
        "kkt": {
            "stationarity_inf_norm": solution.kkt.stationarity_inf_norm,
            "primal_violation": solution.kkt.primal_violation,
            "comp_slack_max": solution.kkt.comp_slack_max,
        },
    }
    out.mkdir(parents=True, exist_ok=True)
    artifacts = []
    if solution.trajectory is not None:
        artifacts.append(str(report.write_trajectory_csv(
            out / "trajectory.csv", solution.trajectory_iters,
            solution.trajectory, solution.trajectory_residuals)))
        artifacts.append(str(plots.convergence_figure(
            out / "convergence.png", solution.trajectory_iters,
            solution.trajectory, solution.trajectory_residuals,
            title=f"{algo} convergence")))
    if solution.objective_history is not None:
        artifacts.append(str(plots.objective_figure(
            out / "objective.png", solution.objective_history,
            title=f"{algo} objective ascent")))
    rep.artifacts = artifacts
    rep.write(out)
    print(f"{algo}: objective {solution.objective:.9g}, converged = {solution.converged} "
          f"({solution.iterations} iterations)")
    print("powers =", np.array2string(solution.powers, precision=9))
    return EXIT_OK if solution.converged else EXIT_NO_CONVERGENCE


def _cmd_solve_mc(args, sc: scen.Scenario) -> int:
    model = sc.to_mc_model()
    split = sc.carrier_split()
    cfg = _solver_settings(args, sc)
    rep = _report_base(args, sc, "solve-mc")
    with Stopwatch() as sw:
        solution = solve_mc(model, split, McConfig(
            tol=float(cfg.get("tol", 1e-8)),
            allow_nonconcave=bool(cfg.get("allow_nonconcave", False)),
            qos_per_carrier=bool(cfg.get("qos_per_carrier", False)),
        ))
    rep.wall_time_s = sw.elapsed
    out = Path(args.out)
    budget = budget_check(model, solution.powers)
    rep.results = {
        "powers": solution.powers,
        "budget_used": budget.used,
        "budget_slack": budget.slack,
        "budget_duals": solution.budget_duals,
        "objective": solution.objective,
        "converged": solution.converged,
        "inner_iterations": solution.inner_iterations,
        "outer_iterations": solution.outer_iterations,
        "kkt": {
            "stationarity_inf_norm": solution.kkt.stationarity_inf_norm,
            "primal_violation": solution.kkt.primal_violation,
            "comp_slack_max": solution.kkt.comp_slack_max,
        },
    }
    out.mkdir(parents=True, exist_ok=True)
    csv_path = report.write_power_matrix_csv(out / "powers.csv", solution.powers)
    fig_path = plots.power_matrix_figure(out / "powers.png", solution.powers)
    rep.artifacts = [str(csv_path), str(fig_path)]
    rep.write(out)
    print(f"solve-mc: objective {solution.objective:.9g}, converged = {solution.converged}")
    return EXIT_OK if solution.converged else EXIT_NO_CONVERGENCE


def _sweep_rows(model, spec, gammas):
    # the feasible column tracks the spectral condition rho < 1 (the
    # threshold max_uniform_scaling reports); box violations still show
    # up in the status column
    rows = []
    for g in gammas:
        target = np.full(model.num_links, float(g))
        verdict = check_feasibility(model, target)
        objective = float("nan")
        total_power = float("nan")
        if verdict.p_star is not None:
            total_power = float(np.sum(verdict.p_star))
            try:
                objective = total_utility(model, verdict.p_star, spec)
            except UtilityDomainError:
                objective = float("nan")
        rows.append({
            "gamma": float(g),
            "rho": verdict.rho,
            "feasible": bool(verdict.rho < 1.0),
            "status": verdict.status.value,
            "objective": objective,
            "total_power": total_power,
        })
    return rows


def _cmd_sweep(args, sc: scen.Scenario) -> int:
    if args.budget is not None:
        return _cmd_sweep_budget(args, sc)
    if args.gamma is None or ":" not in str(args.gamma):
        raise ScenarioError(["--gamma: sweep needs a LO:HI:STEP range"])
    gammas = _parse_gamma(args.gamma, sc.num_links)
    model = sc.to_model()
    spec = sc.utility_spec()
    rep = _report_base(args, sc, "sweep")
    with Stopwatch() as sw:
        rows = _sweep_rows(model, spec, gammas)
    rep.wall_time_s = sw.elapsed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = report.write_table_csv(
        out / "sweep.csv",
        ["gamma", "rho", "feasible", "status", "objective", "total_power"],
        [[r["gamma"], r["rho"], int(r["feasible"]), r["status"], r["objective"],
          r["total_power"]] for r in rows],
    )
    fig_path = plots.sweep_figure(
        out / "sweep.png",
        [r["gamma"] for r in rows], [r["rho"] for r in rows],
        [r["feasible"] for r in rows], [r["objective"] for r in rows],
    )
    rep.parameters = {"gamma_range": str(args.gamma)}
    rep.results = {"rows": rows}
    rep.artifacts = [str(csv_path), str(fig_path)]
    rep.write(out)
    feasible_count = sum(r["feasible"] for r in rows)
    print(f"sweep: {feasible_count}/{len(rows)} targets feasible")
    return EXIT_OK


def _cmd_sweep_budget(args, sc: scen.Scenario) -> int:
    budgets = _parse_gamma(args.budget, 1)
    if np.ndim(budgets) == 0 or len(np.atleast_1d(budgets)) == 1:
        raise ScenarioError(["--budget: sweep needs a LO:HI:STEP range"])
    split = sc.carrier_split()
    cfg = _solver_settings(args, sc)
    base = sc.to_mc_model()
    rows = []
    rep = _report_base(args, sc, "sweep")
    with Stopwatch() as sw:
        for b in np.atleast_1d(budgets):
            model = type(base)(
                gains=base.gains, noise=base.noise, p_cap=base.p_cap,
                p_budget=np.full(base.num_links, float(b)),
                u_min=base.u_min, v_max=base.v_max,
            )
            solution = solve_mc(model, split, McConfig(
                tol=float(cfg.get("tol", 1e-8)),
                allow_nonconcave=bool(cfg.get("allow_nonconcave", False)),
            ))
            rows.append({
                "budget": float(b),
                "objective": solution.objective,
                "converged": solution.converged,
                "total_power": float(np.sum(solution.powers)),
            })
    rep.wall_time_s = sw.elapsed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = report.write_table_csv(
        out / "sweep.csv",
        ["budget", "objective", "converged", "total_power"],
        [[r["budget"], r["objective"], int(r["converged"]), r["total_power"]]
         for r in rows],
    )
    rep.parameters = {"budget_range": str(args.budget)}
    rep.results = {"rows": rows}
    rep.artifacts = [str(csv_path)]
    rep.write(out)
    print(f"sweep: {len(rows)} budget points")
    return EXIT_OK


def _cmd_certify(args, sc: scen.Scenario) -> int:
    model = sc.to_model()
    target = _resolve_target(sc, args.gamma)
    seed = args.seed if args.seed is not None else 0
    inner = TargetSinrMap(model, target)
    capped = PowerCappedMap(inner, model.p_max)
    rep = _report_base(args, sc, "certify-if")
    with Stopwatch() as sw:
        reports = {
            "target_sinr": certify_standard(inner, num_pairs=args.pairs, seed=seed),
            "power_capped": certify_standard(capped, num_pairs=args.pairs, seed=seed),
        }
    rep.wall_time_s = sw.elapsed
    rep.parameters = {"pairs": args.pairs, "gamma_target": target}
    rep.results = {
        name: {
            "passed": r.passed,
            "witnesses": [w.describe() for w in r.witnesses()],
        }
        for name, r in reports.items()
    }
    rep.write(Path(args.out))
    for name, r in reports.items():
        print(f"{name}: {'all axioms hold' if r.passed else 'VIOLATIONS FOUND'} "
              f"({args.pairs} pairs, seed {seed})")
    return EXIT_OK


def _cmd_oracle(args, sc: scen.Scenario) -> int:
    model = sc.to_model()
    spec = sc.utility_spec()
    rep = _report_base(args, sc, "oracle")
    with Stopwatch() as sw:
        result = grid_search(model, spec, resolution=args.resolution,
                             refine_rounds=args.refine_rounds)
    rep.wall_time_s = sw.elapsed
    rep.parameters = {"resolution": args.resolution, "refine_rounds": args.refine_rounds}
    rep.results = {
        "p_best": result.p_best,
        "objective": result.objective,
        "evaluations": result.evaluations,
    }
    rep.write(Path(args.out))
    print(f"oracle: objective {result.objective:.9g} at "
          f"p = {np.array2string(result.p_best, precision=9)}")
    return EXIT_OK


def _cmd_plot(args, sc: scen.Scenario) -> int:
    model = sc.to_model()
    spec = sc.utility_spec()
    target = sc.gamma_target()
    if target is None:
        target = np.ones(model.num_links)
    imap = PowerCappedMap(TargetSinrMap(model, target), model.p_max)
    gammas = _parse_gamma(args.gamma if args.gamma is not None else "0.1:2.5:0.1",
                          model.num_links)
    rep = _report_base(args, sc, "plot")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with Stopwatch() as sw:
        fp = iterate_sync(imap, np.zeros(model.num_links), tol=1e-9,
                          record_trajectory=True)
        rows = _sweep_rows(model, spec, gammas)
    rep.wall_time_s = sw.elapsed
    artifacts = [
        str(report.write_trajectory_csv(out / "convergence.csv", fp.trajectory_iters,
                                        fp.trajectory, fp.trajectory_residuals)),
        str(plots.convergence_figure(out / "convergence.png", fp.trajectory_iters,
                                     fp.trajectory, fp.trajectory_residuals)),
        str(report.write_table_csv(
            out / "sweep.csv",
            ["gamma", "rho", "feasible", "status", "objective", "total_power"],
            [[r["gamma"], r["rho"], int(r["feasible"]), r["status"], r["objective"],
              r["total_power"]] for r in rows])),
        str(plots.sweep_figure(out / "sweep.png",
                               [r["gamma"] for r in rows], [r["rho"] for r in rows],
                               [r["feasible"] for r in rows],
                               [r["objective"] for r in rows])),
    ]
    rep.parameters = {"gamma_target": target, "gamma_range": str(args.gamma or "0.1:2.5:0.1")}
    rep.results = {
        "fixed_point": {"p_bar": fp.p_bar, "iterations": fp.iterations,
                        "converged": fp.converged},
        "sweep_rows": rows,
    }
    rep.artifacts = artifacts
    rep.write(out)
    print(f"plot: wrote {len(artifacts)} artifacts to {out}")
    return EXIT_OK


_COMMANDS = {
    "check-feas": _cmd_check_feas,
    "fixed-point": _cmd_fixed_point,
    "solve": _cmd_solve,
    "solve-mc": _cmd_solve_mc,
    "sweep": _cmd_sweep,
    "certify-if": _cmd_certify,
    "oracle": _cmd_oracle,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        sc = scen.load(args.scenario)
        return _COMMANDS[args.command](args, sc)
    except ScenarioError as exc:
        print("invalid scenario:", file=sys.stderr)
        for item in exc.problems:
            print(f"  - {item}", file=sys.stderr)
        return EXIT_INVALID
    except (ModelError, InvalidUtilityError, UtilityDomainError, NonConcaveError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InfeasibleProblemError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConvergenceError, DivergenceError, OscillationError) as exc:
        print(f"did not converge: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except PowerControlError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - safety net
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entrypoint():  # console_scripts hook
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
