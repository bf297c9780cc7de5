"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
Every tolerance is fixed here, none deferred to calibration.
"""

import numpy as np
import pytest

import maxreg as mx
from maxreg import oracle
from maxreg.randgen import random_mr_problem, random_symmetric_coercive_form
from helpers import (
    piecewise_scalar,
    robin_jump_form,
    robin_problem,
    scalar_decay_problem,
    transport_perturbed_robin,
)


def report(name: str, ok: bool, detail: str = ""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


def observed_orders(values):
    v = np.asarray(values, dtype=float)
    return np.log2(v[:-1] / v[1:])


def test_analytic_convergence_theta_schemes():
    problem = scalar_decay_problem()
    exact = np.exp(-1.0)

    errors1 = []
    within = True
    for n in (10, 20, 40, 80):  # dt in {0.1, 0.05, 0.025, 0.0125}
        traj = mx.solve_theta(problem, n, theta=1.0)
        err = abs(traj.states[-1, 0] - exact)
        within &= err <= 0.5 / n
        errors1.append(err)
    orders1 = observed_orders(errors1)

    errors05 = []
    for n in (10, 20, 40, 80):
        traj = mx.solve_theta(problem, n, theta=0.5)
        errors05.append(abs(traj.states[-1, 0] - exact))
    orders05 = observed_orders(errors05)

    ok = (within
          and np.all((orders1 >= 0.8) & (orders1 <= 1.2))
          and np.all((orders05 >= 1.8) & (orders05 <= 2.2)))
    report("analytic convergence (theta = 1 first order, theta = 1/2 "
           "second order)", ok,
           f"orders theta=1: {np.round(orders1, 3)}, "
           f"theta=1/2: {np.round(orders05, 3)}")


def test_resolvent_bound_suite_200_random_forms():
    rng = np.random.default_rng(20240517)
    lam_grid = [0.0, *np.logspace(-1.0, 3.0, 11)]  # 12-point grid in [0, 1e3]
    failures = 0
    for _ in range(200):
        dim = int(rng.integers(2, 21))
        form = random_symmetric_coercive_form(rng, dim)
        rep = mx.verify_resolvent_bounds(form, 0.0, lam_grid, rel_slack=1e-10)
        failures += 0 if rep.all_pass else 1
    report("resolvent and square-root bounds on 200 random symmetric "
           "coercive forms", failures == 0, f"{200 - failures}/200 clean")


def shipped_forms():
    grid = np.linspace(-1.0, 1.0, 33)
    return {
        "robin16": mx.robin_form_1d(16, lambda t, e: 1.0 + t, 1.0, 1.0),
        "robin32": mx.robin_form_1d(32, lambda t, e: t ** 2, 2.0, 1.0),
        "schrodinger": mx.schrodinger_form_1d(
            grid, 1.0 + grid ** 2,
            lambda t, x: (1.5 + 0.5 * np.sin(t)) * (1.0 + x ** 2),
            alpha1=1.0, alpha2=2.0, M=0.5, T=1.0),
        "scalar": mx.scalar_form(lambda t: 1.0 + t, T=1.0, g_min=1.0,
                                 g_max=2.0, g_lipschitz=1.0),
    }


def test_square_root_two_route_agreement():
    rng = np.random.default_rng(99)
    worst = 0.0
    spectra = []
    for name, form in shipped_forms().items():
        for t in (0.0, 0.5, 1.0):
            fact = mx.spectral_decompose(form, t)
            spectra.append((fact.eigvals[0], fact.eigvals[-1]))
            for x in rng.standard_normal((20, form.triple.dim)):
                spectral = mx.power_apply(fact, -0.5, x)
                quad = mx.invsqrt_quadrature(form, t, x, n_nodes=200)
                worst = max(worst, np.linalg.norm(quad - spectral)
                            / np.linalg.norm(spectral))
    lo = min(s[0] for s in spectra)
    hi = max(s[1] for s in spectra)
    ok = worst <= 1e-8 and lo >= 0.1 and hi <= 1e4
    report("square-root two-route agreement on all shipped forms",
           ok, f"max rel err {worst:.2e}, spectra within [{lo:.2f}, {hi:.0f}]")


def test_mr_apriori_estimate_100_random_problems():
    rng = np.random.default_rng(7)
    satisfied = 0
    for _ in range(100):
        dim = int(rng.integers(2, 11))
        problem = random_mr_problem(rng, dim)
        sol = oracle.reference_solve(problem, tol=1e-10)
        traj = oracle.oracle_trajectory(problem, sol, 256)
        diag = mx.mr_diagnostics(problem, traj, slack=0.05)
        satisfied += bool(diag.apriori_satisfied)
    report("maximal-regularity a-priori estimate on 100 randomized problems",
           satisfied == 100, f"{satisfied}/100 within C (||u0||_V + ||f||)")


def test_energy_identity_residual_first_order():
    problem = robin_problem(n=8)  # beta(t, .) = 1 + t
    residuals = []
    for n in (16, 32, 64, 128):
        traj = mx.solve_theta(problem, n, theta=0.5)
        residuals.append(mx.mr_diagnostics(problem, traj).energy_residual)
    orders = observed_orders(residuals)
    ok = bool(np.all(orders >= 1.0))
    report("energy identity residual decays at first order", ok,
           f"orders {np.round(orders, 4)}")


def test_gluing_piecewise_problems():
    # scalar: a = 1 then a = 2 -> u(1) = e^{-3/2}
    pw = piecewise_scalar()
    problem = mx.make_problem(pw, [1.0])
    scalar_ok = True
    for n in (20, 40, 80):
        traj = mx.solve_glued(problem, n, theta=1.0)
        dt = 0.5 / n
        scalar_ok &= abs(traj.states[-1, 0] - np.exp(-1.5)) <= 0.5 * dt

    # bitwise continuity at the breakpoint
    glued = mx.solve_glued(problem, 16, theta=1.0)
    from maxreg.evolve import _theta_march
    solo = _theta_march(mx.make_problem(pw.pieces[0], [1.0]),
                        np.linspace(0.0, 0.5, 17), 1.0)
    k = int(np.searchsorted(glued.times, 0.5))
    continuity_ok = (glued.times[k] == 0.5
                     and np.array_equal(glued.states[k], solo.states[-1]))

    # Robin with a jump: first order against the piecewise oracle
    form = robin_jump_form(n=8)
    x = np.linspace(0, 1, 9)
    robin_prob = mx.make_problem(form, x, f=lambda t: np.ones(9))
    sol = oracle.reference_solve(robin_prob, tol=1e-10)
    errors = []
    for n in (8, 16, 32):
        traj = mx.solve_glued(robin_prob, n, theta=1.0)
        ref = mx.trajectory_from_states(traj.times, sol.sample(traj.times))
        errors.append(mx.l2_h_distance(robin_prob.triple, traj, ref))
    orders = observed_orders(errors)
    robin_ok = bool(np.all(orders >= 0.8) and errors[-1] < errors[0])

    report("piecewise gluing (scalar closed form, bitwise continuity, "
           "Robin jump first order)",
           scalar_ok and continuity_ok and robin_ok,
           f"robin orders {np.round(orders, 3)}")


def test_spacetime_galerkin_construction():
    # discrete coercivity on 100 random elements
    problem = robin_problem(n=4)
    sys_ = mx.spacetime_system(problem, 12)
    rng = np.random.default_rng(42)
    coercive = True
    for _ in range(100):
        w = rng.standard_normal(sys_.E.shape[0])
        coercive &= bool(w @ sys_.E @ w >= sys_.delta * (w @ sys_.vnorm @ w)
                         * (1.0 - 1e-8))

    # scalar nodal convergence with order >= 1
    scalar = scalar_decay_problem()
    errors = [abs(mx.solve_spacetime(scalar, n).states[-1, 0] - np.exp(-1.0))
              for n in (8, 16, 32, 64)]
    orders = observed_orders(errors)
    order_ok = bool(np.all(orders >= 1.0))

    # agreement with the theta scheme within the summed oracle errors
    sol = oracle.reference_solve(problem, tol=1e-10)
    n = 32
    st = mx.solve_spacetime(problem, n)
    th = mx.solve_theta(problem, n, theta=1.0)
    ref = oracle.oracle_trajectory(problem, sol, n)
    tr = problem.triple
    agree_ok = (mx.l2_h_distance(tr, st, th)
                <= mx.l2_h_distance(tr, st, ref)
                + mx.l2_h_distance(tr, th, ref))

    report("space-time Galerkin (coercivity, order >= 1, theta agreement)",
           coercive and order_ok and agree_ok,
           f"scalar orders {np.round(orders, 3)}")


def test_appendix_discrete_calculus():
    rng = np.random.default_rng(2)
    times = np.linspace(0.0, 1.0, 17)
    ibp_ok = True
    for _ in range(50):
        u = (times, rng.standard_normal((17, 5)))
        v = (times, rng.standard_normal((17, 5)))
        ibp_ok &= oracle.ibp_check(u, v) <= 1e-12

    form = mx.robin_form_1d(8, lambda t, e: t ** 2, 2.0, 1.0)
    base = rng.standard_normal(9)
    slope = rng.standard_normal(9)
    prod_res, chain_res = [], []
    for cells in (4, 8, 16, 32):
        tt = np.linspace(0.0, 1.0, cells + 1)
        states = base[None, :] + tt[:, None] * slope[None, :]
        prod_res.append(oracle.product_rule_check(form.a1_matrix,
                                                  (tt, states), form.triple))
        chain_res.append(oracle.chain_rule_sqrt_check(form, (tt, states)))
    prod_orders = observed_orders(prod_res)
    chain_orders = observed_orders(chain_res)
    ok = (ibp_ok and np.all(prod_orders >= 1.0)
          and np.all(chain_orders >= 1.0))
    report("appendix calculus (ibp exact, product/chain rules first order)",
           ok, f"product {np.round(prod_orders, 2)}, "
               f"chain {np.round(chain_orders, 2)}")


def test_quasilinear_fixed_point():
    # scalar analog against the stiff nonlinear ODE oracle
    form = mx.scalar_form(1.0, T=1.0)
    qp = mx.make_quasilinear_problem(
        form, lambda t, xi: 1.0 + xi ** 2, 0.1, u0=[1.0])
    result = mx.solve_fixed_point(qp, n_steps=512, tol=1e-9, max_iter=50,
                                  theta=0.5)
    ode = mx.OdeProblem(
        rhs=lambda t, u: -np.clip(1.0 + u ** 2, 0.1, 10.0) * u,
        u0=np.array([1.0]), T=1.0)
    sol = oracle.reference_solve(ode, tol=1e-10)
    sup_gap = float(np.max(np.abs(sol.sample(result.trajectory.times)
                                  - result.trajectory.states)))
    scalar_ok = (result.converged and result.n_iterations <= 50
                 and result.residual <= 1e-8 and sup_gap <= 1e-4)

    # Robin (NLCP) with n = 32, beta = 1 + t
    rform = mx.robin_form_1d(32, lambda t, e: 1.0 + t, 1.0, 1.0)
    x = np.linspace(0.0, 1.0, 33)
    rqp = mx.make_quasilinear_problem(
        rform, lambda t, xi: 1.0 + xi ** 2, 0.1,
        f=lambda t: np.ones(33), u0=x)
    rres = mx.solve_fixed_point(rqp, n_steps=64, tol=1e-9, max_iter=50)
    robin_ok = (rres.converged
                and all(rec.apriori_satisfied for rec in rres.history))

    report("quasilinear Picard iteration (scalar analog + Robin NLCP)",
           scalar_ok and robin_ok,
           f"scalar iters {result.n_iterations}, sup gap {sup_gap:.1e}; "
           f"robin iters {rres.n_iterations}")


def test_square_root_property_probe_across_refinements():
    forms = {n: transport_perturbed_robin(n)
             for n in (8, 16, 32, 64, 128, 256)}
    rep = mx.sqrt_property_probe(forms)
    report("square-root property ratio spread <= 4 across refinements",
           rep.ok, f"spread {rep.spread:.4f}")
