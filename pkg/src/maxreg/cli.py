"""Experiment runner: config in, CSV artifacts and a flat summary out.

Subcommands: solve, spacetime, glue, convergence, verify-bounds, verify-mr,
quasilinear, sweep.  Every command writes a CSV (schema version in a
leading comment row) plus a ``<out>.summary`` file of ``key = value``
lines, and exits 0 iff its asserted checks pass.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import evolve as E
from . import forms as F
from . import oracle as O
from . import quasilinear as Q
from . import sqrtop as S
from .config import ConfigError, load_config
from .expressions import ExpressionError
from .randgen import random_mr_problem
from .triple import ValidationError


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: str, schema: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# schema={schema}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_summary(path: str, pairs) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in pairs:
            fh.write(f"{key} = {_fmt(value)}\n")


def _resolve_out(out, default_name: str):
    """--out may be a CSV file path or a directory."""
    if out is None:
        out = default_name
    if os.path.isdir(out) or out.endswith(os.sep):
        os.makedirs(out, exist_ok=True)
        out = os.path.join(out, default_name)
    parent = os.path.dirname(os.path.abspath(out))
    os.makedirs(parent, exist_ok=True)
    stem = out[:-4] if out.endswith(".csv") else out
    return out, stem + ".summary"


def _trajectory_rows(traj: E.Trajectory):
    n = len(traj.times) - 1
    for k, t in enumerate(traj.times):
        deriv = traj.derivative[min(k, n - 1)]
        yield [t, *traj.states[k], *deriv]


def _trajectory_header(dim: int):
    return (["t"] + [f"u{i}" for i in range(dim)]
            + [f"du{i}" for i in range(dim)])


def _write_trajectory(problem, traj, csv_path, summary_path, extra=()):
    diag = E.mr_diagnostics(problem, traj)
    write_csv(csv_path, "trajectory-v1", _trajectory_header(traj.dim),
              _trajectory_rows(traj))
    tr = problem.triple
    pairs = [
        ("n_steps", len(traj.times) - 1),
        ("T", traj.times[-1]),
        ("final_norm_H", tr.norm_H(traj.states[-1])),
        ("final_norm_V", tr.norm_V(traj.states[-1])),
        ("norm_MR", diag.norm_MR),
        ("norm_L2V", diag.norm_L2V),
        ("norm_H1H", diag.norm_H1H),
        ("sup_V_norm", diag.sup_V_norm),
        ("energy_residual", diag.energy_residual),
        ("apriori_C", diag.apriori_C),
        ("apriori_rhs", diag.apriori_rhs),
        ("apriori_satisfied", diag.apriori_satisfied),
        *extra,
    ]
    write_summary(summary_path, pairs)
    return diag


# -- subcommands --------------------------------------------------------------------


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    problem = cfg.build_problem()
    steps = args.steps or cfg.get_int("run", "steps", default=100)
    theta = args.theta if args.theta is not None else cfg.get_float("run", "theta", default=1.0)
    traj = E.solve_theta(problem, steps, theta=theta)
    csv_path, summary_path = _resolve_out(args.out, "traj.csv")
    _write_trajectory(problem, traj, csv_path, summary_path,
                      extra=[("theta", theta)])
    return 0


def cmd_spacetime(args) -> int:
    cfg = load_config(args.config)
    problem = cfg.build_problem()
    cells = args.cells or cfg.get_int("run", "cells", default=32)
    sys_ = E.spacetime_system(problem, cells)
    traj = E.solve_spacetime(problem, cells)
    csv_path, summary_path = _resolve_out(args.out, "spacetime.csv")
    u0_gap = problem.triple.norm_V(traj.states[0] - problem.u0)
    _write_trajectory(problem, traj, csv_path, summary_path, extra=[
        ("cells", cells),
        ("gamma", sys_.gamma),
        ("delta", sys_.delta),
        ("epsilon", sys_.epsilon),
        ("initial_value_V_gap", u0_gap),
    ])
    return 0


def cmd_glue(args) -> int:
    cfg = load_config(args.config)
    problem = cfg.build_problem()
    if not isinstance(problem.form, F.PiecewiseForm):
        raise ConfigError("glue needs a piecewise form (form.kind = piecewise)")
    steps = args.steps_per_piece or cfg.get_int("run", "steps_per_piece", default=50)
    theta = args.theta if args.theta is not None else cfg.get_float("run", "theta", default=1.0)
    traj = E.solve_glued(problem, steps, theta=theta)
    csv_path, summary_path = _resolve_out(args.out, "glued.csv")
    bp = problem.form.breakpoints
    _write_trajectory(problem, traj, csv_path, summary_path, extra=[
        ("pieces", len(problem.form.pieces)),
        ("breakpoints", " ".join(_fmt(b) for b in bp)),
        ("theta", theta),
    ])
    return 0


def cmd_convergence(args) -> int:
    cfg = load_config(args.config)
    problem = cfg.build_problem()
    refinements = _int_list(args.refinements) or [
        int(n) for n in (cfg.get_floats("run", "refinements", default=[10, 20, 40, 80]))
    ]
    theta = args.theta if args.theta is not None else cfg.get_float("run", "theta", default=1.0)
    sol = O.reference_solve(problem, tol=args.oracle_tol)
    ref_final = sol.at(problem.T)
    tr = problem.triple
    rows = []
    errors = []
    prev = None
    for n in refinements:
        traj = E.solve_theta(problem, n, theta=theta)
        err = tr.norm_H(traj.states[-1] - ref_final)
        order = np.nan
        if prev is not None and err > 0 and prev[1] > 0:
            order = np.log(prev[1] / err) / np.log(n / prev[0])
        rows.append([n, problem.T / n, err, order])
        errors.append(err)
        prev = (n, err)
    csv_path, summary_path = _resolve_out(args.out, "convergence.csv")
    write_csv(csv_path, "convergence-v1",
              ["n_steps", "dt", "error", "observed_order"], rows)
    ok = all(np.isfinite(errors)) and errors[-1] < errors[0]
    write_summary(summary_path, [
        ("theta", theta),
        ("refinements", " ".join(str(n) for n in refinements)),
        ("final_error", errors[-1]),
        ("final_observed_order", rows[-1][3]),
        ("oracle_accuracy", sol.accuracy_estimate),
        ("errors_decreasing", ok),
    ])
    return 0 if ok else 1


def cmd_verify_bounds(args) -> int:
    if not args.config:
        raise ConfigError("verify-bounds needs --config (or --form) FILE")
    cfg = load_config(args.config)
    form = cfg.build_form()
    if isinstance(form, F.PiecewiseForm):
        raise ConfigError("verify-bounds needs a single (non-piecewise) form")
    times = _float_list(args.times) or [0.0, form.constants.T]
    lam_grid = _float_list(args.lambda_grid)
    if lam_grid is None:
        lam_grid = [0.0, *np.logspace(-1, 3, 9)]
    rows = []
    all_pass = True
    for t in times:
        report = S.verify_resolvent_bounds(form, t, lam_grid)
        all_pass &= report.all_pass
        for chk in report.checks:
            rows.append([t, np.nan if chk.lam is None else chk.lam,
                         chk.name, chk.measured, chk.ceiling, chk.passed])
    csv_path, summary_path = _resolve_out(args.out, "bounds.csv")
    write_csv(csv_path, "bounds-v1",
              ["t", "lambda", "bound_name", "measured", "ceiling", "pass"],
              rows)
    write_summary(summary_path, [
        ("times", " ".join(_fmt(t) for t in times)),
        ("n_checks", len(rows)),
        ("all_pass", all_pass),
    ])
    return 0 if all_pass else 1


def cmd_verify_mr(args) -> int:
    if args.config:
        return _verify_mr_refinement(args)
    return _verify_mr_random(args)


def _verify_mr_refinement(args) -> int:
    cfg = load_config(args.config)
    problem = cfg.build_problem()
    base = cfg.get_int("run", "steps", default=32)
    levels = args.refinements or 4
    rows = []
    satisfied = []
    for i in range(levels):
        n = base * (2 ** i)
        traj = E.solve_theta(problem, n, theta=1.0)
        d = E.mr_diagnostics(problem, traj)
        rows.append([n, d.norm_MR, d.apriori_C, d.apriori_rhs,
                     d.apriori_satisfied, d.energy_residual, d.sup_V_norm])
        satisfied.append(d.apriori_satisfied)
    csv_path, summary_path = _resolve_out(args.out, "mr.csv")
    write_csv(csv_path, "mr-refinement-v1",
              ["n_steps", "norm_MR", "apriori_C", "rhs", "satisfied",
               "energy_residual", "sup_V_norm"], rows)
    ok = bool(satisfied[-1])
    write_summary(summary_path, [
        ("levels", levels),
        ("finest_n_steps", rows[-1][0]),
        ("finest_satisfied", ok),
        ("all_satisfied", all(satisfied)),
    ])
    return 0 if ok else 1


def _verify_mr_random(args) -> int:
    n_problems = args.random or 100
    rng = np.random.default_rng(args.seed)
    rows = []
    n_ok = 0

    def run_case(idx_rng):
        idx, case_rng = idx_rng
        dim = int(case_rng.integers(2, args.dim_max + 1))
        problem = random_mr_problem(case_rng, dim)
        sol = O.reference_solve(problem, tol=args.oracle_tol)
        traj = O.oracle_trajectory(problem, sol, 256)
        d = E.mr_diagnostics(problem, traj)
        return [idx, dim, d.norm_MR, d.apriori_C, d.apriori_rhs,
                d.apriori_satisfied]

    cases = [(i, np.random.default_rng(rng.integers(0, 2 ** 63)))
             for i in range(n_problems)]
    if args.jobs and args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_case, cases))
    else:
        results = [run_case(c) for c in cases]
    for row in results:
        rows.append(row)
        n_ok += bool(row[-1])
    csv_path, summary_path = _resolve_out(args.out, "mr.csv")
    write_csv(csv_path, "mr-random-v1",
              ["index", "dim", "norm_MR", "apriori_C", "rhs", "satisfied"],
              rows)
    write_summary(summary_path, [
        ("seed", args.seed),
        ("n_problems", n_problems),
        ("n_satisfied", n_ok),
        ("all_satisfied", n_ok == n_problems),
    ])
    return 0 if n_ok == n_problems else 1


def cmd_quasilinear(args) -> int:
    cfg = load_config(args.config)
    problem = cfg.build_quasilinear()
    steps = args.steps or cfg.get_int("run", "steps", default=100)
    theta = args.theta if args.theta is not None else cfg.get_float("run", "theta", default=1.0)
    result = Q.solve_fixed_point(
        problem, steps, tol=args.tol, max_iter=args.max_iter,
        damping=args.damping, theta=theta,
    )
    csv_path, summary_path = _resolve_out(args.out, "nlcp.csv")
    write_csv(csv_path, "quasilinear-v1",
              ["iter", "distance", "sub_mr_norm", "apriori_satisfied"],
              [[r.iteration, r.distance, r.sub_mr_norm, r.apriori_satisfied]
               for r in result.history])
    traj_path = csv_path[:-4] + "_traj.csv" if csv_path.endswith(".csv") else csv_path + "_traj.csv"
    write_csv(traj_path, "trajectory-v1",
              _trajectory_header(result.trajectory.dim),
              _trajectory_rows(result.trajectory))
    ok = result.converged and result.residual <= 10.0 * args.tol
    write_summary(summary_path, [
        ("converged", result.converged),
        ("iterations", result.n_iterations),
        ("residual", result.residual),
        ("residual_bound", 10.0 * args.tol),
        ("tol", args.tol),
        ("damping", args.damping),
        ("all_subsolves_mr_satisfied",
         all(r.apriori_satisfied for r in result.history)),
        ("trajectory_csv", os.path.basename(traj_path)),
    ])
    if not result.converged:
        sys.stderr.write(
            "quasilinear: no convergence after "
            f"{result.n_iterations} iterations; distances: "
            + " ".join(_fmt(r.distance) for r in result.history) + "\n"
        )
    return 0 if ok else 1


def cmd_sqrt_probe(args) -> int:
    cfg = load_config(args.config)
    kind = (cfg.get("form", "kind", required=True) or "").lower()
    if kind != "robin1d":
        raise ConfigError("sqrt-probe needs a robin1d form family")
    refinements = _int_list(args.refinements) or [
        int(n) for n in cfg.get_floats("run", "refinements",
                                       default=[8, 16, 32, 64])
    ]
    T = cfg.get_float("form", "t", default=1.0)
    beta, lip = cfg._beta_from(cfg.section("form"))
    b_scale = args.b_scale if args.b_scale is not None else \
        cfg.get_float("form", "b_transport", default=0.3)
    forms = {}
    for n in refinements:
        if b_scale:
            forms[n] = F.robin_transport_form_1d(n, beta, lip, T,
                                                 b_scale=b_scale)
        else:
            forms[n] = F.robin_form_1d(n, beta, lip, T)
    report = E.sqrt_property_probe(forms)
    csv_path, summary_path = _resolve_out(args.out, "sqrt.csv")
    write_csv(csv_path, "sqrt-ratio-v1",
              ["n", "r_upper", "r_lower", "route"],
              [[r.n, r.r_upper, r.r_lower, r.route] for r in report.rows])
    write_summary(summary_path, [
        ("refinements", " ".join(str(n) for n in refinements)),
        ("b_transport", b_scale),
        ("spread", report.spread),
        ("spread_ok", report.ok),
    ])
    return 0 if report.ok else 1


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    problem = cfg.build_problem()
    steps_list = _int_list(args.steps_list) or [
        int(n) for n in cfg.get_floats("run", "sweep_steps",
                                       default=cfg.get_floats("run", "refinements",
                                                              default=[20, 40, 80]))
    ]
    theta_list = _float_list(args.theta_list) or cfg.get_floats(
        "run", "sweep_theta", default=[1.0]
    )
    sol = O.reference_solve(problem, tol=args.oracle_tol)
    ref_final = sol.at(problem.T)
    tr = problem.triple
    cases = [(i, n, th) for i, (n, th) in enumerate(
        (n, th) for th in theta_list for n in steps_list
    )]

    def run_case(case):
        idx, n, th = case
        traj = E.solve_theta(problem, n, theta=th)
        d = E.mr_diagnostics(problem, traj)
        err = tr.norm_H(traj.states[-1] - ref_final)
        return [idx, n, th, err, d.norm_MR]

    if args.jobs and args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_case, cases))
    else:
        results = [run_case(c) for c in cases]
    csv_path, summary_path = _resolve_out(args.out, "sweep.csv")
    write_csv(csv_path, "sweep-v1",
              ["case", "n_steps", "theta", "error", "norm_MR"], results)
    ok = all(np.isfinite(r[3]) for r in results)
    write_summary(summary_path, [
        ("n_cases", len(results)),
        ("oracle_accuracy", sol.accuracy_estimate),
        ("all_finite", ok),
    ])
    return 0 if ok else 1


# -- wiring -------------------------------------------------------------------------


def _int_list(raw):
    if raw is None:
        return None
    return [int(p) for p in str(raw).replace(",", " ").split()]


def _float_list(raw):
    if raw is None:
        return None
    return [float(p) for p in str(raw).replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxreg",
        description="Solvers and verifiers for non-autonomous evolution "
                    "problems governed by time-dependent forms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="experiment config file")
        p.add_argument("--out", help="output CSV path (or directory)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--oracle-tol", type=float, default=1e-10,
                       dest="oracle_tol")

    p = sub.add_parser("solve", help="theta-scheme time stepping")
    common(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--theta", type=float)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("spacetime", help="weighted space-time Galerkin solve")
    common(p)
    p.add_argument("--cells", type=int)
    p.set_defaults(func=cmd_spacetime)

    p = sub.add_parser("glue", help="piecewise solve with breakpoint gluing")
    common(p)
    p.add_argument("--steps-per-piece", type=int, dest="steps_per_piece")
    p.add_argument("--theta", type=float)
    p.set_defaults(func=cmd_glue)

    p = sub.add_parser("convergence", help="refinement study against the oracle")
    common(p)
    p.add_argument("--refinements", help="comma/space-separated step counts")
    p.add_argument("--theta", type=float)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("verify-bounds", help="resolvent/square-root bound table")
    common(p, config_required=False)
    # --form is an accepted alias for the form-family config here
    p.add_argument("--form", dest="config")
    p.add_argument("--times", help="comma-separated times")
    p.add_argument("--lambda-grid", dest="lambda_grid",
                   help="comma-separated nonnegative shifts")
    p.set_defaults(func=cmd_verify_bounds)

    p = sub.add_parser("verify-mr", help="maximal-regularity estimate checks")
    common(p, config_required=False)
    p.add_argument("--refinements", type=int,
                   help="refinement levels (config mode)")
    p.add_argument("--random", type=int,
                   help="number of random problems (no-config mode)")
    p.add_argument("--dim-max", type=int, default=10, dest="dim_max")
    p.set_defaults(func=cmd_verify_mr)

    p = sub.add_parser("quasilinear", help="Picard iteration for the "
                                           "quasilinear heat problem")
    common(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=50, dest="max_iter")
    p.add_argument("--damping", type=float, default=1.0)
    p.set_defaults(func=cmd_quasilinear)

    p = sub.add_parser("sqrt-probe", help="square-root property ratios "
                                          "across mesh refinements")
    common(p)
    p.add_argument("--refinements", help="comma/space-separated mesh sizes")
    p.add_argument("--b-scale", type=float, dest="b_scale",
                   help="transport perturbation strength (default 0.3)")
    p.set_defaults(func=cmd_sqrt_probe)

    p = sub.add_parser("sweep", help="parameter sweep over steps and theta")
    common(p)
    p.add_argument("--steps-list", dest="steps_list")
    p.add_argument("--theta-list", dest="theta_list")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError, ExpressionError,
            S.NumericalError, O.StiffnessError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
