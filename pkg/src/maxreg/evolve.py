"""Solvers and diagnostics for B(t) u' + A(t) u = f(t), u(0) = u0.

Two independent discretizations are provided: a one-step theta scheme
(:func:`solve_theta`, with :func:`solve_glued` for piecewise-Lipschitz
forms) and a space-time Galerkin method (:func:`solve_spacetime`) built on
the exponentially weighted coercive form

    E(u, w) = int (B u' | w')_H e^{-gamma t}
            + int a(t, u, w') e^{-gamma t}
            + a1(0, u(0), w(0)),
    L(w)    = a1(0, u0, w(0)) + int (f | w')_H e^{-gamma t},

whose coercivity constant delta comes from :func:`coercivity_constants`.
:func:`mr_diagnostics` evaluates the maximal-regularity norms, the energy
identity residual and the derived a-priori inequality for any trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .forms import FormConstants, FormDecomposition, PiecewiseForm
from .sqrtop import NumericalError, family_derivative
from .triple import GelfandTriple, ValidationError, operator_norm_extremes


class ConfigurationError(ValidationError):
    """Solver invoked with inconsistent grids or the wrong form flavor."""


# -- problem data -------------------------------------------------------------------


@dataclass(frozen=True)
class Perturbation:
    """Multiplicative perturbation B(t) on H with uniform positivity bounds."""

    B: object  # Callable[[float], ndarray]
    beta0: float
    beta1: float

    def __post_init__(self):
        if not (0.0 < self.beta0 <= self.beta1):
            raise ValidationError(
                f"need 0 < beta0 <= beta1, got ({self.beta0}, {self.beta1})"
            )

    def matrix(self, t: float) -> np.ndarray:
        return np.asarray(self.B(t), dtype=float)


def identity_perturbation(dim: int) -> Perturbation:
    eye = np.eye(dim)
    return Perturbation(B=lambda t: eye, beta0=1.0, beta1=1.0)


def constant_perturbation(matrix, triple: GelfandTriple) -> Perturbation:
    """Wrap a constant matrix with measured H-positivity bounds."""
    b = np.asarray(matrix, dtype=float)
    sym = 0.5 * (triple.gram_H @ b + (triple.gram_H @ b).T)
    ev = sla.eigh(sym, triple.gram_H, eigvals_only=True)
    if ev[0] <= 0:
        raise ValidationError(
            f"perturbation is not uniformly positive: beta0 = {ev[0]:.6e}"
        )
    return Perturbation(B=lambda t: b, beta0=float(ev[0]), beta1=float(ev[-1]))


def validate_perturbation(pert: Perturbation, triple: GelfandTriple,
                          T: float, n_samples: int = 5) -> None:
    """Check the declared bounds via the symmetric-part eigenvalues."""
    for t in np.linspace(0.0, T, n_samples):
        gb = triple.gram_H @ pert.matrix(t)
        sym = 0.5 * (gb + gb.T)
        ev = sla.eigh(sym, triple.gram_H, eigvals_only=True)
        if ev[0] < pert.beta0 * (1.0 - 1e-10) - 1e-14:
            raise ValidationError(
                f"B({t}) violates the lower bound: {ev[0]:.6e} < {pert.beta0}"
            )
        if ev[-1] > pert.beta1 * (1.0 + 1e-10) + 1e-14:
            raise ValidationError(
                f"B({t}) violates the upper bound: {ev[-1]:.6e} > {pert.beta1}"
            )


@dataclass(frozen=True)
class EvolutionProblem:
    form: object  # FormDecomposition | PiecewiseForm
    B: Perturbation
    f: object  # Callable[[float], ndarray], H coordinates
    u0: np.ndarray

    @property
    def triple(self) -> GelfandTriple:
        return self.form.triple

    @property
    def dim(self) -> int:
        return self.form.triple.dim

    @property
    def T(self) -> float:
        if isinstance(self.form, PiecewiseForm):
            return self.form.T
        return self.form.interval[1]

    def constants(self) -> FormConstants:
        if isinstance(self.form, PiecewiseForm):
            return self.form.worst_constants()
        return self.form.constants

    def f_at(self, t: float) -> np.ndarray:
        return np.asarray(self.f(t), dtype=float)


def make_problem(form, u0, f=None, B: Perturbation | None = None,
                 validate: bool = True) -> EvolutionProblem:
    """Assemble an evolution problem; f defaults to zero, B to the identity."""
    dim = form.triple.dim
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    if u0.shape != (dim,):
        raise ValidationError(f"u0 has shape {u0.shape}, expected ({dim},)")
    if not np.all(np.isfinite(u0)):
        raise ValidationError("u0 contains non-finite entries")
    if f is None:
        zero = np.zeros(dim)
        f = lambda t: zero
    if B is None:
        B = identity_perturbation(dim)
    problem = EvolutionProblem(form=form, B=B, f=f, u0=u0)
    if validate:
        T = problem.T
        for t in np.linspace(0.0, T, 5):
            if not np.all(np.isfinite(problem.f_at(t))):
                raise ValidationError(f"f({t}) contains non-finite entries")
        validate_perturbation(B, form.triple, T)
    return problem


# -- trajectories -------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Discrete solution: nodal V-states plus backward-difference derivatives."""

    times: np.ndarray      # (N+1,), strictly increasing
    states: np.ndarray     # (N+1, dim)
    derivative: np.ndarray  # (N, dim), (u_{k+1} - u_k) / dt_k

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.states, dtype=float)
        if t.ndim != 1 or np.any(np.diff(t) <= 0):
            raise ValidationError("times must be strictly increasing")
        if s.shape[0] != len(t):
            raise ValidationError("states and times lengths differ")
        if self.derivative.shape != (len(t) - 1, s.shape[1]):
            raise ValidationError("derivative must hold one row per interval")
        if not np.all(np.isfinite(s)):
            raise ValidationError("trajectory states contain non-finite entries")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def interval_index(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return min(max(i, 0), len(self.times) - 2)

    def interp(self, t: float) -> np.ndarray:
        """Piecewise-linear interpolation of the states."""
        k = self.interval_index(t)
        t0, t1 = self.times[k], self.times[k + 1]
        lam = (t - t0) / (t1 - t0)
        lam = min(max(lam, 0.0), 1.0)
        return (1.0 - lam) * self.states[k] + lam * self.states[k + 1]


def trajectory_from_states(times, states) -> Trajectory:
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    dt = np.diff(times)[:, None]
    return Trajectory(times=times, states=states,
                      derivative=np.diff(states, axis=0) / dt)


def l2_h_distance(triple: GelfandTriple, a: Trajectory, b: Trajectory) -> float:
    """Discrete L^2(0,T;H) distance of two trajectories on the same grid."""
    if a.states.shape != b.states.shape or not np.array_equal(a.times, b.times):
        raise ConfigurationError("trajectories live on different grids")
    d = a.states - b.states
    vals = np.einsum("ki,ij,kj->k", d, triple.gram_H, d)
    return float(np.sqrt(np.trapezoid(vals, a.times)))


# -- the theta scheme ---------------------------------------------------------------


def _piece_for_interval(form, t0: float, t1: float) -> FormDecomposition:
    if isinstance(form, PiecewiseForm):
        mid = 0.5 * (t0 + t1)
        piece = form.piece_at(mid)
        lo, hi = piece.interval
        if t0 < lo - 1e-12 or t1 > hi + 1e-12:
            raise ConfigurationError(
                f"step [{t0}, {t1}] straddles the breakpoint at {hi}; "
                "the time grid must contain every breakpoint"
            )
        return piece
    return form


def _theta_march(problem: EvolutionProblem, times: np.ndarray,
                 theta: float) -> Trajectory:
    gh = problem.triple.gram_H
    n = len(times) - 1
    tstars = np.array([times[k] + theta * (times[k + 1] - times[k])
                       for k in range(n)])
    fvals = [problem.f_at(t) for t in tstars]

    states = np.empty((n + 1, problem.dim))
    states[0] = problem.u0
    if not np.any(problem.u0) and not any(np.any(fv) for fv in fvals):
        states[:] = 0.0  # exact zero solution, skip the solves
        return trajectory_from_states(times, states)

    u = problem.u0.astype(float)
    for k in range(n):
        dt = times[k + 1] - times[k]
        piece = _piece_for_interval(problem.form, times[k], times[k + 1])
        a_full = piece.full_vprime(min(tstars[k], piece.interval[1]))
        mass = gh @ problem.B.matrix(tstars[k]) / dt
        lhs = mass + theta * a_full
        rhs = (mass - (1.0 - theta) * a_full) @ u + gh @ fvals[k]
        try:
            u = sla.solve(lhs, rhs)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"theta step {k} failed to solve") from exc
        if not np.all(np.isfinite(u)):
            raise NumericalError(f"theta step {k} produced non-finite states")
        states[k + 1] = u
    return trajectory_from_states(times, states)


def _piecewise_grid(form: PiecewiseForm, n_steps: int) -> np.ndarray:
    """Uniform-per-piece grid containing every breakpoint."""
    bp = form.breakpoints
    total = bp[-1] - bp[0]
    parts = []
    for i in range(len(bp) - 1):
        frac = (bp[i + 1] - bp[i]) / total
        n_i = max(1, int(round(n_steps * frac)))
        seg = np.linspace(bp[i], bp[i + 1], n_i + 1)
        parts.append(seg if i == 0 else seg[1:])
    return np.concatenate(parts)


def solve_theta(problem: EvolutionProblem, n_steps: int,
                theta: float = 1.0) -> Trajectory:
    """One-step theta scheme with operators evaluated at t_k + theta dt.

    theta = 1 is implicit Euler (first order), theta = 1/2 the midpoint rule
    (second order).  For piecewise forms the grid is built to contain every
    breakpoint.
    """
    if n_steps < 1:
        raise ConfigurationError("n_steps must be >= 1")
    if not (0.5 <= theta <= 1.0):
        raise ConfigurationError(f"theta must lie in [1/2, 1], got {theta}")
    if isinstance(problem.form, PiecewiseForm):
        times = _piecewise_grid(problem.form, n_steps)
    else:
        times = np.linspace(0.0, problem.T, n_steps + 1)
    return _theta_march(problem, times, theta)


def solve_glued(problem: EvolutionProblem, n_steps_per_piece,
                theta: float = 1.0) -> Trajectory:
    """Solve piece by piece, restarting from the previous final state verbatim.

    The concatenated trajectory shares the exact state vector at every
    breakpoint.  A single-piece form reproduces :func:`solve_theta` bitwise.
    """
    form = problem.form
    if not isinstance(form, PiecewiseForm):
        return solve_theta(problem, int(n_steps_per_piece), theta)
    n_pieces = len(form.pieces)
    if np.isscalar(n_steps_per_piece):
        per_piece = [int(n_steps_per_piece)] * n_pieces
    else:
        per_piece = [int(n) for n in n_steps_per_piece]
        if len(per_piece) != n_pieces:
            raise ConfigurationError(
                f"{n_pieces} pieces but {len(per_piece)} step counts"
            )

    all_times = [np.array([form.breakpoints[0]])]
    all_states = [problem.u0[None, :].astype(float)]
    u_start = problem.u0
    for i, piece in enumerate(form.pieces):
        sub_problem = EvolutionProblem(form=piece, B=problem.B,
                                       f=problem.f, u0=np.asarray(u_start, dtype=float))
        lo, hi = piece.interval
        times = np.linspace(lo, hi, per_piece[i] + 1)
        traj = _theta_march(sub_problem, times, theta)
        all_times.append(traj.times[1:])
        all_states.append(traj.states[1:])
        u_start = traj.states[-1]
    times = np.concatenate(all_times)
    states = np.concatenate(all_states, axis=0)
    return trajectory_from_states(times, states)


# -- space-time Galerkin ------------------------------------------------------------


def coercivity_constants(constants: FormConstants, beta0) -> tuple:
    """Canonical (epsilon, gamma, delta) for the weighted form E.

    epsilon = beta0 / 2 and gamma = (Mdot1 + M2^2/(2 epsilon) + alpha)/alpha
    make gamma*alpha - Mdot1 - M2^2/(2 epsilon) equal alpha, so
    delta = e^{-gamma T} min{beta0/2, alpha/2}.
    """
    if isinstance(beta0, Perturbation):
        beta0 = beta0.beta0
    c = constants
    eps = beta0 / 2.0
    gamma = (c.Mdot1 + c.M2 ** 2 / (2.0 * eps) + c.alpha) / c.alpha
    delta = float(np.exp(-gamma * c.T) * min(beta0 / 2.0, c.alpha / 2.0))
    if not (eps > 0 and gamma > 0 and delta > 0):
        raise ConfigurationError(
            f"degenerate coercivity constants: eps={eps}, gamma={gamma}, "
            f"delta={delta}"
        )
    return float(eps), float(gamma), delta


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class SpacetimeSystem:
    """Assembled weighted Galerkin system plus the discrete V-norm matrix."""

    times: np.ndarray
    E: np.ndarray
    L: np.ndarray
    vnorm: np.ndarray  # quadratic form of ||w||_V^2-type trial norm
    epsilon: float
    gamma: float
    delta: float


def spacetime_system(problem: EvolutionProblem, n_time_cells: int) -> SpacetimeSystem:
    """Assemble E, L and the trial-space norm on piecewise-linear-in-time states.

    Per-cell 4-point Gauss-Legendre is exact for the polynomial integrands;
    the weight e^{-gamma t} is evaluated at the quadrature nodes.
    """
    form = problem.form
    if isinstance(form, PiecewiseForm):
        raise ConfigurationError(
            "the space-time solver needs a single Lipschitz form; "
            "use solve_glued for piecewise problems"
        )
    if n_time_cells < 1:
        raise ConfigurationError("n_time_cells must be >= 1")
    eps, gamma, delta = coercivity_constants(form.constants, problem.B.beta0)

    tr = problem.triple
    gh, gv = tr.gram_H, tr.gram_V
    d = tr.dim
    times = np.linspace(0.0, problem.T, n_time_cells + 1)
    size = (n_time_cells + 1) * d
    E = np.zeros((size, size))
    L = np.zeros(size)
    vnorm = np.zeros((size, size))

    a1_0 = form.a1_matrix(0.0)
    E[:d, :d] += a1_0
    L[:d] += a1_0 @ problem.u0
    vnorm[:d, :d] += gv

    for k in range(n_time_cells):
        t0, t1 = times[k], times[k + 1]
        dt = t1 - t0
        sl = (slice(k * d, (k + 1) * d), slice((k + 1) * d, (k + 2) * d))
        dphi = (-1.0 / dt, 1.0 / dt)
        for q in range(4):
            tau = t0 + 0.5 * (_GL_NODES[q] + 1.0) * dt
            wq = 0.5 * _GL_WEIGHTS[q] * dt
            ew = float(np.exp(-gamma * tau))
            phi = ((t1 - tau) / dt, (tau - t0) / dt)
            b_full = gh @ problem.B.matrix(tau)
            a_full = form.full_vprime(tau)
            f_h = gh @ problem.f_at(tau)
            for b in range(2):        # test node
                for a in range(2):    # trial node
                    E[sl[b], sl[a]] += wq * ew * (
                        dphi[a] * dphi[b] * b_full + phi[a] * dphi[b] * a_full
                    )
                    vnorm[sl[b], sl[a]] += wq * (
                        dphi[a] * dphi[b] * gh + phi[a] * phi[b] * gv
                    )
                L[sl[b]] += wq * ew * dphi[b] * f_h
    return SpacetimeSystem(times=times, E=E, L=L, vnorm=vnorm,
                           epsilon=eps, gamma=gamma, delta=delta)


def solve_spacetime(problem: EvolutionProblem, n_time_cells: int) -> Trajectory:
    """Galerkin solve of E(u, w) = L(w) on the piecewise-linear time space.

    The initial condition is not imposed: testing with constant-in-time
    functions forces a1(0, u_h(0) - u0, .) = 0, so u_h(0) = u0 emerges from
    the system itself (up to solver rounding).
    """
    sys = spacetime_system(problem, n_time_cells)
    try:
        flat = sla.solve(sys.E, sys.L)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "space-time system is singular; this indicates a coercivity "
            "violation upstream"
        ) from exc
    states = flat.reshape(n_time_cells + 1, problem.dim)
    if not np.all(np.isfinite(states)):
        raise NumericalError("space-time solve produced non-finite states")
    return trajectory_from_states(sys.times, states)


# -- maximal-regularity diagnostics --------------------------------------------------


@dataclass(frozen=True)
class MRDiagnostics:
    norm_L2V: float
    norm_H1H: float          # the derivative part ||u'||_{L^2(0,T;H)}
    norm_MR: float
    norm_Au_L2H: float
    sup_V_norm: float
    energy_residual: float
    apriori_C: float
    apriori_lhs: float
    apriori_rhs: float
    apriori_satisfied: bool
    epsilon: float
    gamma: float
    delta: float


def apriori_constant(constants: FormConstants, beta0) -> float:
    """C = max{1/delta, sqrt(M1/(2 delta))} from the energy inequality.

    The weighted estimate gives delta ||u||_MR^2 <= ||f|| ||u'|| +
    (M1/2) ||u0||_V^2; solving the quadratic in ||u||_MR and applying
    Young's inequality yields ||u||_MR <= C (||u0||_V + ||f||).
    """
    _, _, delta = coercivity_constants(constants, beta0)
    return float(max(1.0 / delta, np.sqrt(constants.M1 / (2.0 * delta))))


def _form_pieces_for_trajectory(form, times):
    """Per-interval (piece, t_k) pairs so breakpoints never get straddled."""
    out = []
    for k in range(len(times) - 1):
        out.append(_piece_for_interval(form, times[k], times[k + 1]))
    return out


def mr_diagnostics(problem: EvolutionProblem, trajectory: Trajectory,
                   slack: float = 0.05) -> MRDiagnostics:
    """MR norms, energy-identity residual and the a-priori estimate check.

    Time integrals use the trapezoid rule on the trajectory grid (the
    derivative part is exact for the piecewise-constant discrete
    derivative).  The residual accumulates, interval by interval,

        | a1(t_{k+1}, u_{k+1}, u_{k+1}) - a1(t_k, u_k, u_k)
          - (da1/dt(t_k, u_k, u_k) + 2 (A1(t_k) u_k | u'_k)_H) dt |.
    """
    tr = problem.triple
    times = trajectory.times
    states = trajectory.states
    n = len(times) - 1

    v_sq = np.array([tr.norm_V(u) ** 2 for u in states])
    norm_l2v = float(np.sqrt(np.trapezoid(v_sq, times)))
    sup_v = float(np.sqrt(np.max(v_sq)))

    dts = np.diff(times)
    du_sq = np.array([tr.norm_H(trajectory.derivative[k]) ** 2 for k in range(n)])
    norm_h1h = float(np.sqrt(np.sum(du_sq * dts)))
    norm_mr = float(np.sqrt(norm_l2v ** 2 + norm_h1h ** 2))

    pieces = _form_pieces_for_trajectory(problem.form, times)
    au_sq = np.empty(n + 1)
    for k in range(n + 1):
        piece = pieces[min(k, n - 1)]
        au = piece.apply_full_H(min(times[k], piece.interval[1]), states[k])
        au_sq[k] = tr.norm_H(au) ** 2
    norm_au = float(np.sqrt(np.trapezoid(au_sq, times)))

    residual = 0.0
    for k in range(n):
        piece = pieces[k]
        t0, t1 = times[k], times[k + 1]
        a1_t0 = piece.a1_matrix(t0)
        a1_t1 = piece.a1_matrix(t1)
        increment = states[k + 1] @ a1_t1 @ states[k + 1] - states[k] @ a1_t0 @ states[k]
        lo, hi = piece.interval
        h = 1e-5 * max(problem.T, 1e-12)
        a1_dot = family_derivative(piece.a1_matrix, t0, min(h, 0.5 * (hi - lo)),
                                   lo, hi)
        rate = (states[k] @ a1_dot @ states[k]
                + 2.0 * states[k] @ a1_t0 @ trajectory.derivative[k])
        residual += abs(increment - rate * (t1 - t0))

    f_sq = np.array([tr.norm_H(problem.f_at(t)) ** 2 for t in times])
    f_norm = float(np.sqrt(np.trapezoid(f_sq, times)))
    constants = problem.constants()
    eps, gamma, delta = coercivity_constants(constants, problem.B.beta0)
    c_ap = apriori_constant(constants, problem.B.beta0)
    rhs = c_ap * (tr.norm_V(problem.u0) + f_norm)

    return MRDiagnostics(
        norm_L2V=norm_l2v,
        norm_H1H=norm_h1h,
        norm_MR=norm_mr,
        norm_Au_L2H=norm_au,
        sup_V_norm=sup_v,
        energy_residual=float(residual),
        apriori_C=c_ap,
        apriori_lhs=norm_mr,
        apriori_rhs=rhs,
        apriori_satisfied=bool(norm_mr <= rhs * (1.0 + slack)),
        epsilon=eps,
        gamma=gamma,
        delta=delta,
    )


# -- square-root property probe -----------------------------------------------------


@dataclass(frozen=True)
class SqrtPropertyRow:
    n: int
    r_upper: float
    r_lower: float
    route: str


@dataclass(frozen=True)
class SqrtPropertyReport:
    rows: tuple
    spread: float

    @property
    def ok(self) -> bool:
        return self.spread <= 4.0


def sqrt_property_probe(forms_by_n, t0: float = 0.0) -> SqrtPropertyReport:
    """Norm-equivalence proxy for V = D(A^{1/2}) across refinements.

    For each resolution the full operator A = A1 + A2 is reduced to its
    H-realization; symmetric operators go through the generalized spectral
    route, non-symmetric ones through the real Schur square root.  Reported
    are the extremes of ||A^{1/2} u||_H / ||u||_V and the spread
    max_n r_upper / min_n r_lower.
    """
    rows = []
    for n, form in sorted(dict(forms_by_n).items()):
        tr = form.triple
        a_full = form.full_vprime(t0)
        scale = np.linalg.norm(a_full)
        if np.linalg.norm(a_full - a_full.T) <= 1e-12 * scale:
            fact_vals, fact_vecs = sla.eigh(0.5 * (a_full + a_full.T), tr.gram_H)
            if fact_vals[0] <= 0:
                raise NumericalError(
                    f"full operator at n={n} is not positive definite"
                )
            s_mat = fact_vecs @ np.diag(np.sqrt(fact_vals)) @ fact_vecs.T @ tr.gram_H
            route = "spectral"
        else:
            a_h = tr.solve_H(a_full)
            s_mat = sla.sqrtm(a_h)
            if np.iscomplexobj(s_mat):
                imag = float(np.max(np.abs(s_mat.imag)))
                if imag > 1e-8 * max(1.0, np.linalg.norm(s_mat.real)):
                    raise NumericalError(
                        f"Schur square root at n={n} is genuinely complex "
                        f"(max imaginary part {imag:.3e})"
                    )
                s_mat = s_mat.real
            route = "schur"
        r_upper, r_lower = operator_norm_extremes(tr, s_mat, "V", "H")
        rows.append(SqrtPropertyRow(n=int(n), r_upper=r_upper,
                                    r_lower=r_lower, route=route))
    spread = max(r.r_upper for r in rows) / min(r.r_lower for r in rows)
    return SqrtPropertyReport(rows=tuple(rows), spread=float(spread))
