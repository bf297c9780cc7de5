"""High-accuracy reference solutions and discrete-calculus verifiers.

The reference integrator is deliberately independent of the solvers under
test: it rewrites B(t) u' + A(t) u = f as an explicit ODE and hands it to
an adaptive embedded Runge-Kutta pair (Dormand-Prince via scipy's RK45,
dense output included).  Every solve is cross-checked against a second run
with the higher-order DOP853 pair; the worst discrepancy over a time sample
is the reported accuracy estimate.  Should the explicit integrator give up
(stiffness), an implicit fallback (backward Euler with Richardson
extrapolation on a doubling grid) takes over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .evolve import EvolutionProblem, Trajectory
from .forms import PiecewiseForm
from .triple import ValidationError


class StiffnessError(RuntimeError):
    """The explicit reference integrator underflowed its step size."""


@dataclass(frozen=True)
class OdeProblem:
    """A plain (possibly nonlinear) ODE u' = rhs(t, u), u(0) = u0 on [0, T]."""

    rhs: object
    u0: np.ndarray
    T: float


@dataclass(frozen=True)
class OracleSolution:
    """Dense-output reference trajectory with a measured accuracy estimate."""

    T: float
    accuracy_estimate: float
    _segments: tuple  # ((t_lo, t_hi, dense_sol), ...)

    def at(self, t: float) -> np.ndarray:
        if t < -1e-12 or t > self.T + 1e-12:
            raise ValidationError(f"time {t} outside [0, {self.T}]")
        t = min(max(t, 0.0), self.T)
        for lo, hi, sol in self._segments:
            if t <= hi + 1e-12:
                return np.atleast_1d(sol(min(t, hi)))
        return np.atleast_1d(self._segments[-1][2](self.T))

    def sample(self, times) -> np.ndarray:
        return np.array([self.at(t) for t in np.asarray(times, dtype=float)])


def _problem_rhs(problem: EvolutionProblem):
    """u' = B(t)^{-1} (f(t) - A_H(t) u) in H coordinates."""
    form = problem.form

    def rhs(t, u):
        if isinstance(form, PiecewiseForm):
            piece = form.piece_at(t)
        else:
            piece = form
        t_eval = min(max(t, piece.interval[0]), piece.interval[1])
        au = piece.apply_full_H(t_eval, u)
        return np.linalg.solve(problem.B.matrix(t), problem.f_at(t) - au)

    return rhs


def _breakpoints(problem) -> np.ndarray:
    if isinstance(problem, EvolutionProblem) and isinstance(problem.form, PiecewiseForm):
        return problem.form.breakpoints
    T = problem.T
    return np.array([0.0, T])


def _integrate(rhs, u0, segments, method: str, tol: float):
    sols = []
    u = np.atleast_1d(np.asarray(u0, dtype=float))
    for lo, hi in segments:
        res = solve_ivp(rhs, (lo, hi), u, method=method, dense_output=True,
                        rtol=tol, atol=tol)
        if not res.success:
            raise StiffnessError(
                f"{method} failed on [{lo}, {hi}]: {res.message}"
            )
        sols.append((lo, hi, res.sol))
        u = res.y[:, -1]
    return sols


def _implicit_fallback(rhs, u0, T, tol):
    """Backward Euler + Richardson on doubling grids until increments settle."""
    def run(n):
        ts = np.linspace(0.0, T, n + 1)
        u = np.atleast_1d(np.asarray(u0, dtype=float)).copy()
        out = [u.copy()]
        for k in range(n):
            dt = ts[k + 1] - ts[k]
            guess = u + dt * np.asarray(rhs(ts[k], u))
            for _ in range(50):
                new = u + dt * np.asarray(rhs(ts[k + 1], guess))
                if np.linalg.norm(new - guess) <= 1e-14 * (1 + np.linalg.norm(new)):
                    guess = new
                    break
                guess = new
            u = guess
            out.append(u.copy())
        return ts, np.array(out)

    n = 256
    ts, coarse = run(n)
    for _ in range(12):
        ts2, fine = run(2 * n)
        extrap = 2.0 * fine[::2] - coarse
        err = float(np.max(np.linalg.norm(extrap - fine[::2], axis=1)))
        if err <= tol:
            from scipy.interpolate import CubicSpline
            spline = CubicSpline(ts, extrap, axis=0)
            return [(0.0, T, spline)], err
        n *= 2
        ts, coarse = ts2, fine
    raise StiffnessError("implicit fallback failed to reach the tolerance")


def reference_solve(problem, tol: float = 1e-10) -> OracleSolution:
    """Adaptive Runge-Kutta reference solution with a verified error estimate.

    Accepts an :class:`EvolutionProblem` (piecewise forms restart the
    integration at every breakpoint) or a raw :class:`OdeProblem`.  ``tol``
    must lie in [1e-12, 1e-6]; the returned accuracy estimate (max H-norm,
    or Euclidean for raw ODEs, discrepancy between the RK45 and DOP853
    runs over a uniform time sample) is required to meet it.
    """
    if not (1e-12 <= tol <= 1e-6):
        raise ValidationError(f"tol must lie in [1e-12, 1e-6], got {tol}")

    if isinstance(problem, EvolutionProblem):
        rhs = _problem_rhs(problem)
        u0 = problem.u0
        T = problem.T
        norm = problem.triple.norm_H
        bp = _breakpoints(problem)
    elif isinstance(problem, OdeProblem):
        rhs = problem.rhs
        u0 = np.atleast_1d(np.asarray(problem.u0, dtype=float))
        T = problem.T
        norm = np.linalg.norm
        bp = np.array([0.0, T])
    else:
        raise ValidationError(
            f"expected EvolutionProblem or OdeProblem, got {type(problem)!r}"
        )
    segments = list(zip(bp[:-1], bp[1:]))

    rtol_floor = 3e-14  # scipy clamps rtol at ~100 eps anyway
    internal = max(tol / 20.0, 1e-13)
    probe = np.linspace(0.0, T, 65)
    for _ in range(3):
        try:
            main = _integrate(rhs, u0, segments, "RK45", internal)
            check = _integrate(rhs, u0, segments, "DOP853", internal)
        except StiffnessError:
            sols, err = _implicit_fallback(rhs, u0, T, tol)
            return OracleSolution(T=T, accuracy_estimate=err, _segments=tuple(sols))
        sol = OracleSolution(T=T, accuracy_estimate=np.nan, _segments=tuple(main))
        ref = OracleSolution(T=T, accuracy_estimate=np.nan, _segments=tuple(check))
        est = max(norm(sol.at(t) - ref.at(t)) for t in probe)
        if est <= tol:
            return OracleSolution(T=T, accuracy_estimate=float(est),
                                  _segments=tuple(main))
        internal = max(internal / 10.0, rtol_floor)
    raise StiffnessError(
        f"reference solve could not certify tolerance {tol} "
        f"(best estimate {est:.3e})"
    )


def oracle_trajectory(problem: EvolutionProblem, sol: OracleSolution,
                      n_steps: int) -> Trajectory:
    """Sample an oracle solution onto a uniform trajectory grid."""
    from .evolve import trajectory_from_states

    times = np.linspace(0.0, problem.T, n_steps + 1)
    return trajectory_from_states(times, sol.sample(times))


# -- discrete calculus checks -------------------------------------------------------


def _simpson_cell(fa, fm, fb, dt):
    return (dt / 6.0) * (fa + 4.0 * fm + fb)


def _times_values(traj, expected_dim=None):
    if isinstance(traj, Trajectory):
        times, values = traj.times, traj.states
    else:
        times, values = traj
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
    if expected_dim is not None and values.shape[1] != expected_dim:
        raise ValidationError("trajectory dimension mismatch")
    return times, values


def ibp_check(u, v) -> float:
    """Relative residual of the integration-by-parts identity.

    ``u`` holds V-states, ``v`` functional coordinates, both piecewise
    linear on the same grid; the pairing is the plain dot product.  Simpson
    per cell integrates the (piecewise-quadratic) pairing derivative
    exactly, so the residual is pure rounding.
    """
    tu, su = _times_values(u)
    tv, sv = _times_values(v)
    if not np.array_equal(tu, tv):
        raise ValidationError("u and v live on different grids")
    total = 0.0
    scale = 0.0
    for k in range(len(tu) - 1):
        dt = tu[k + 1] - tu[k]
        du = (su[k + 1] - su[k]) / dt
        dv = (sv[k + 1] - sv[k]) / dt
        um = 0.5 * (su[k] + su[k + 1])
        vm = 0.5 * (sv[k] + sv[k + 1])
        fa = dv @ su[k] + sv[k] @ du
        fm = dv @ um + vm @ du
        fb = dv @ su[k + 1] + sv[k + 1] @ du
        contrib = _simpson_cell(fa, fm, fb, dt)
        total += contrib
        scale += abs(contrib)
    boundary = sv[-1] @ su[-1] - sv[0] @ su[0]
    scale += abs(sv[-1] @ su[-1]) + abs(sv[0] @ su[0])
    residual = abs(boundary - total)
    return residual / max(scale, np.finfo(float).tiny)


def _rule_residual(S, s_dot, u, dual_norm) -> float:
    """Integrated product-rule residual sum_k ||(Su)|_cell - int(S' u + S u')||."""
    times, states = _times_values(u)
    residual = 0.0
    for k in range(len(times) - 1):
        t0, t1 = times[k], times[k + 1]
        dt = t1 - t0
        tm = 0.5 * (t0 + t1)
        du = (states[k + 1] - states[k]) / dt
        um = 0.5 * (states[k] + states[k + 1])
        s0, sm, s1 = S(t0), S(tm), S(t1)
        fa = s_dot(t0) @ states[k] + s0 @ du
        fm = s_dot(tm) @ um + sm @ du
        fb = s_dot(t1) @ states[k + 1] + s1 @ du
        integral = _simpson_cell(fa, fm, fb, dt)
        increment = s1 @ states[k + 1] - s0 @ states[k]
        residual += dual_norm(increment - integral)
    return residual


def product_rule_check(S, u, triple, h: float | None = None) -> float:
    """Residual of (S u)' = S' u + S u' for a Lipschitz matrix family.

    ``S`` maps t to a V->V' matrix; the derivative is estimated by central
    finite differences (one-sided at the interval ends) with a step tied to
    the grid, so the stencil bias refines together with the quadrature.
    The residual is summed in the V' norm and decays at least linearly
    under refinement for smooth families.
    """
    from .sqrtop import family_derivative

    times, _ = _times_values(u)
    lo, hi = float(times[0]), float(times[-1])
    if h is None:
        h = 0.25 * float(np.min(np.diff(times)))

    def s_dot(t):
        return family_derivative(S, t, h, lo, hi)

    wrapped = lambda t: np.asarray(S(t), dtype=float)
    return _rule_residual(wrapped, s_dot, u, triple.dual_norm)


def chain_rule_sqrt_check(form, u, h: float | None = None) -> float:
    """Residual of (A^{1/2} u)' = (A^{1/2})' u + A^{1/2} u' in the V' norm.

    A^{1/2}(t) comes from the spectral route; its time derivative from
    finite differences of the square-root family itself.
    """
    from .sqrtop import spectral_decompose, sqrt_vprime_matrix

    def S(t):
        return sqrt_vprime_matrix(spectral_decompose(form, t))

    return product_rule_check(S, u, form.triple, h=h)
