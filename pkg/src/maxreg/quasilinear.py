"""Picard iteration for u' = m(t, u) (Laplace u) + f with Robin boundaries.

Each iterate freezes the nonlinearity at the previous trajectory v and
solves the linear problem

    B_v(t) u' + A(t) u = B_v(t) f(t),   B_v(t) = diag(1 / m(t, v(t, x_i))),

with the theta scheme.  The diagonal node-lumped B_v sits inside
[delta_m, 1/delta_m] by construction (m is clipped at evaluation time), so
every sub-solve enjoys the same maximal-regularity constant.  A fixed point
exists by compactness; the iteration itself may or may not find it, so
non-convergence is reported, never raised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolve import (
    EvolutionProblem,
    Perturbation,
    Trajectory,
    l2_h_distance,
    make_problem,
    mr_diagnostics,
    solve_theta,
    trajectory_from_states,
)
from .forms import FormDecomposition
from .triple import ValidationError


@dataclass(frozen=True)
class QuasilinearProblem:
    """Quasilinear heat problem data; ``m`` is clipped into [delta_m, 1/delta_m]."""

    form: FormDecomposition
    m: object  # Callable[[float, float], float]
    delta_m: float
    f: object  # Callable[[float], ndarray]
    u0: np.ndarray

    @property
    def T(self) -> float:
        return self.form.interval[1]

    def m_value(self, t: float, xi: float) -> float:
        return float(np.clip(self.m(t, xi), self.delta_m, 1.0 / self.delta_m))

    def m_values(self, t: float, states: np.ndarray) -> np.ndarray:
        raw = np.array([float(self.m(t, float(x))) for x in states])
        return np.clip(raw, self.delta_m, 1.0 / self.delta_m)


def make_quasilinear_problem(form: FormDecomposition, m, delta_m: float,
                             f=None, u0=None) -> QuasilinearProblem:
    if not (0.0 < delta_m <= 1.0):
        raise ValidationError(f"delta_m must lie in (0, 1], got {delta_m}")
    dim = form.triple.dim
    u0 = np.zeros(dim) if u0 is None else np.atleast_1d(np.asarray(u0, float))
    if u0.shape != (dim,) or not np.all(np.isfinite(u0)):
        raise ValidationError("u0 must be a finite vector of the form's dimension")
    if f is None:
        zero = np.zeros(dim)
        f = lambda t: zero
    problem = QuasilinearProblem(form=form, m=m, delta_m=delta_m, f=f, u0=u0)
    # Continuity is not checkable; sample (t, xi) for finiteness at least.
    for t in np.linspace(0.0, problem.T, 5):
        for xi in np.linspace(-2.0, 2.0, 5):
            if not np.isfinite(problem.m(t, xi)):
                raise ValidationError(f"m({t}, {xi}) is not finite")
    return problem


def linearized_B(problem: QuasilinearProblem, v: Trajectory,
                 t_index: int) -> np.ndarray:
    """Node-lumped multiplication operator diag(1/m(t_k, v_i(t_k)))."""
    t = float(v.times[t_index])
    return np.diag(1.0 / problem.m_values(t, v.states[t_index]))


def _perturbation_from(problem: QuasilinearProblem, v: Trajectory) -> Perturbation:
    def B(t):
        return np.diag(1.0 / problem.m_values(t, v.interp(t)))

    return Perturbation(B=B, beta0=problem.delta_m,
                        beta1=1.0 / problem.delta_m)


def _sub_problem(problem: QuasilinearProblem, v: Trajectory) -> EvolutionProblem:
    pert = _perturbation_from(problem, v)

    def rhs(t):
        return np.asarray(problem.f(t), dtype=float) / problem.m_values(t, v.interp(t))

    return make_problem(problem.form, problem.u0, f=rhs, B=pert)


def equation_residual(problem: QuasilinearProblem, traj: Trajectory,
                      theta: float = 1.0) -> float:
    """Discrete L^2(0,T;H) residual of B_u u' + A u - B_u f at the theta points."""
    tr = problem.form.triple
    total = 0.0
    for k in range(len(traj.times) - 1):
        dt = traj.times[k + 1] - traj.times[k]
        tstar = traj.times[k] + theta * dt
        u_theta = (1.0 - theta) * traj.states[k] + theta * traj.states[k + 1]
        m_vals = problem.m_values(tstar, traj.interp(tstar))
        b_du = traj.derivative[k] / m_vals
        au = problem.form.apply_full_H(min(tstar, problem.T), u_theta)
        b_f = np.asarray(problem.f(tstar), dtype=float) / m_vals
        total += dt * tr.norm_H(b_du + au - b_f) ** 2
    return float(np.sqrt(total))


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    distance: float
    sub_mr_norm: float
    apriori_satisfied: bool


@dataclass(frozen=True)
class FixedPointResult:
    converged: bool
    trajectory: Trajectory
    history: tuple
    residual: float
    diagnostics: tuple  # MRDiagnostics per sub-solve

    @property
    def n_iterations(self) -> int:
        return len(self.history)


def solve_fixed_point(problem: QuasilinearProblem, n_steps: int, tol: float,
                      max_iter: int = 50, damping: float = 1.0,
                      theta: float = 1.0,
                      mr_slack: float = 0.05) -> FixedPointResult:
    """Damped Picard iteration v_{k+1} = (1-damping) v_k + damping S(v_k).

    S(v) is one theta-scheme solve of the frozen-coefficient problem; the
    start iterate holds u0 constant in time.  Iteration stops once the
    discrete L^2(0,T;H) update distance drops below ``tol``; the returned
    trajectory then satisfies the discrete equation within about 10 tol.
    Hitting ``max_iter`` yields ``converged=False`` with the full distance
    history (existence of a fixed point does not make Picard find it).
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    if not (0.0 < damping <= 1.0):
        raise ValidationError(f"damping must lie in (0, 1], got {damping}")
    tr = problem.form.triple
    times = np.linspace(0.0, problem.T, n_steps + 1)
    v = trajectory_from_states(times, np.tile(problem.u0, (n_steps + 1, 1)))

    history = []
    diags = []
    converged = False
    for it in range(1, max_iter + 1):
        sub = _sub_problem(problem, v)
        u = solve_theta(sub, n_steps, theta=theta)
        diag = mr_diagnostics(sub, u, slack=mr_slack)
        if damping == 1.0:
            v_next = u
        else:
            blended = (1.0 - damping) * v.states + damping * u.states
            v_next = trajectory_from_states(times, blended)
        dist = l2_h_distance(tr, v_next, v)
        history.append(IterationRecord(
            iteration=it, distance=dist, sub_mr_norm=diag.norm_MR,
            apriori_satisfied=diag.apriori_satisfied,
        ))
        diags.append(diag)
        v = v_next
        if dist <= tol:
            converged = True
            break

    residual = equation_residual(problem, v, theta=theta)
    return FixedPointResult(
        converged=converged, trajectory=v, history=tuple(history),
        residual=residual, diagnostics=tuple(diags),
    )
