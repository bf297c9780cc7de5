"""Time-dependent form families a(t,.,.) = a1(t,.,.) + a2(t,.,.).

A :class:`FormDecomposition` stores the symmetric coercive Lipschitz part
``a1`` as a matrix family ``A1(t)`` (bilinear coordinates, so
``a1(t,u,v) = u @ A1(t) @ v``) and the rough part ``a2`` as a V->H operator
family ``A2(t)`` with ``a2(t,u,v) = (A2(t) u | v)_H``.  Both are plain
callables of t; constants are validated eagerly at construction on a sample
grid, evaluation stays lazy.

The stored pair is always theory-ready: ``A1`` is coercive as stored and
``constants.omega`` only records a quasi-coercive shift that has already
been absorbed (see :func:`shifted_decomposition` and :func:`robin_form_1d`).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .triple import (
    GelfandTriple,
    ValidationError,
    new_triple,
    operator_norm,
)

DEFAULT_TIME_SAMPLES = 33


class FormValidationError(ValidationError):
    """A form decomposition violates one of its declared constants."""


@dataclass(frozen=True)
class FormConstants:
    """Constants of a decomposition a = a1 + a2 on [0, T].

    M1 bounds a1 on V x V, alpha is the coercivity constant of a1, Mdot1 the
    Lipschitz constant of t -> a1(t,.,.), M2 bounds a2 on V x H, omega
    records the quasi-coercive shift absorbed into the pair.
    """

    M1: float
    alpha: float
    Mdot1: float
    M2: float
    omega: float
    T: float

    def __post_init__(self):
        if not (self.alpha > 0.0):
            raise ValidationError(f"alpha must be positive, got {self.alpha}")
        # rounding slack: equal constants may come from different routes
        # (svd vs eigh) and land one ulp apart
        if self.M1 < self.alpha * (1.0 - 1e-12):
            raise ValidationError(
                f"M1 = {self.M1} must dominate alpha = {self.alpha}"
            )
        if self.Mdot1 < 0 or self.M2 < 0 or self.omega < 0:
            raise ValidationError("Mdot1, M2 and omega must be nonnegative")
        # T = 0 is allowed so constant formulas can be probed degenerately.
        if not (self.T >= 0.0):
            raise ValidationError(f"horizon T must be nonnegative, got {self.T}")


@dataclass(frozen=True)
class FormDecomposition:
    triple: GelfandTriple
    A1: Callable[[float], np.ndarray]
    A2: Callable[[float], np.ndarray]
    constants: FormConstants
    interval: tuple = None  # (t_lo, t_hi); defaults to (0, T)

    def __post_init__(self):
        if self.interval is None:
            object.__setattr__(self, "interval", (0.0, self.constants.T))

    def _check_t(self, t: float) -> float:
        lo, hi = self.interval
        slack = 1e-12 * max(1.0, hi - lo)
        if not (lo - slack <= t <= hi + slack):
            raise ValidationError(
                f"time {t} outside the form's interval [{lo}, {hi}]"
            )
        return min(max(t, lo), hi)

    def a1_matrix(self, t: float) -> np.ndarray:
        t = self._check_t(t)
        return np.asarray(self.A1(t), dtype=float)

    def a2_matrix(self, t: float) -> np.ndarray:
        t = self._check_t(t)
        return np.asarray(self.A2(t), dtype=float)

    def full_vprime(self, t: float) -> np.ndarray:
        """The full operator A(t): V -> V' in functional coordinates."""
        return self.a1_matrix(t) + self.triple.gram_H @ self.a2_matrix(t)

    def apply_full_H(self, t: float, u) -> np.ndarray:
        """A(t)u as an H-state: gram_H^{-1} A1(t) u + A2(t) u."""
        u = np.asarray(u, dtype=float)
        return self.triple.solve_H(self.a1_matrix(t) @ u) + self.a2_matrix(t) @ u

    def a1_value(self, t: float, u, v) -> float:
        return float(np.asarray(u) @ self.a1_matrix(t) @ np.asarray(v))

    def a_value(self, t: float, u, v) -> float:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return float(u @ self.a1_matrix(t) @ v + (self.a2_matrix(t) @ u) @ self.triple.gram_H @ v)


@dataclass(frozen=True)
class PiecewiseForm:
    """Forms that are Lipschitz on each cell of a partition of [0, T]."""

    breakpoints: np.ndarray  # 0 = t0 < t1 < ... < tn = T
    pieces: tuple

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 1 or len(bp) < 2 or np.any(np.diff(bp) <= 0):
            raise ValidationError("breakpoints must be strictly increasing")
        if len(self.pieces) != len(bp) - 1:
            raise ValidationError(
                f"{len(bp) - 1} intervals but {len(self.pieces)} pieces"
            )
        for i, piece in enumerate(self.pieces):
            lo, hi = piece.interval
            if not (np.isclose(lo, bp[i]) and np.isclose(hi, bp[i + 1])):
                raise ValidationError(
                    f"piece {i} covers [{lo}, {hi}], expected [{bp[i]}, {bp[i+1]}]"
                )
        object.__setattr__(self, "breakpoints", bp)

    @property
    def triple(self) -> GelfandTriple:
        return self.pieces[0].triple

    @property
    def T(self) -> float:
        return float(self.breakpoints[-1])

    def piece_index(self, t: float) -> int:
        """Index of the piece owning t ([t_{i-1}, t_i) and the last closed)."""
        bp = self.breakpoints
        if t < bp[0] - 1e-12 or t > bp[-1] + 1e-12:
            raise ValidationError(f"time {t} outside [{bp[0]}, {bp[-1]}]")
        i = int(np.searchsorted(bp, t, side="right")) - 1
        return min(max(i, 0), len(self.pieces) - 1)

    def piece_at(self, t: float) -> FormDecomposition:
        return self.pieces[self.piece_index(t)]

    def worst_constants(self) -> FormConstants:
        """Envelope constants across pieces (Lipschitz within pieces only)."""
        cs = [p.constants for p in self.pieces]
        return FormConstants(
            M1=max(c.M1 for c in cs),
            alpha=min(c.alpha for c in cs),
            Mdot1=max(c.Mdot1 for c in cs),
            M2=max(c.M2 for c in cs),
            omega=max(c.omega for c in cs),
            T=self.T,
        )


def assemble(form, t: float):
    """Evaluate the two coordinate matrices (A1(t), A2(t)) at time t."""
    if isinstance(form, PiecewiseForm):
        piece = form.piece_at(t)
        return piece.a1_matrix(t), piece.a2_matrix(t)
    return form.a1_matrix(t), form.a2_matrix(t)


# -- validation -------------------------------------------------------------------


def sample_times(interval, n: int) -> np.ndarray:
    lo, hi = interval
    return np.linspace(lo, hi, n)


def measure_constants_on(form: FormDecomposition, times) -> FormConstants:
    """Measured constants over the given times (eigen/operator-norm extrema)."""
    tr = form.triple
    alpha = np.inf
    m1 = 0.0
    m2 = 0.0
    mdot = 0.0
    prev = None
    for i, t in enumerate(times):
        a1 = form.a1_matrix(t)
        a2 = form.a2_matrix(t)
        sym = 0.5 * (a1 + a1.T)
        alpha = min(alpha, float(sla.eigh(sym, tr.gram_V, eigvals_only=True)[0]))
        m1 = max(m1, operator_norm(tr, a1, "V", "Vp"))
        if a2.shape == a1.shape and np.any(a2):
            m2 = max(m2, operator_norm(tr, a2, "V", "H"))
        if prev is not None:
            dt = t - prev[0]
            if dt > 0:
                mdot = max(
                    mdot, operator_norm(tr, a1 - prev[1], "V", "Vp") / dt
                )
        prev = (t, a1)
    return FormConstants(
        M1=m1 if m1 > 0 else max(alpha, np.finfo(float).tiny),
        alpha=alpha,
        Mdot1=mdot,
        M2=m2,
        omega=form.constants.omega,
        T=form.constants.T,
    )


def estimate_constants(form: FormDecomposition, n_time_samples: int = DEFAULT_TIME_SAMPLES) -> FormConstants:
    """Measure (M1, alpha, Mdot1, M2) on a uniform time sample of the form."""
    if n_time_samples < 2:
        raise ValidationError("n_time_samples must be >= 2")
    return measure_constants_on(form, sample_times(form.interval, n_time_samples))


def validate_decomposition(form: FormDecomposition, n_samples: int = DEFAULT_TIME_SAMPLES) -> None:
    """Check symmetry, coercivity, bounds and Lipschitz continuity of a form.

    Symmetry of A1(t) is required within 1e-12 relative; the measured
    coercivity must reach alpha up to 1e-10 relative, and the measured upper
    constants must not exceed the declared ones by more than 1e-8 relative.
    """
    c = form.constants
    times = sample_times(form.interval, n_samples)
    for t in times:
        a1 = form.a1_matrix(t)
        scale = np.linalg.norm(a1)
        if scale > 0 and np.linalg.norm(a1 - a1.T) > 1e-12 * scale:
            raise FormValidationError(f"A1({t}) is not symmetric")
        a2 = form.a2_matrix(t)
        if a2.shape != a1.shape:
            raise FormValidationError(f"A2({t}) has shape {a2.shape}")
        if not (np.all(np.isfinite(a1)) and np.all(np.isfinite(a2))):
            raise FormValidationError(f"non-finite form matrix at t = {t}")
    meas = measure_constants_on(form, times)
    if meas.alpha < c.alpha * (1.0 - 1e-10):
        raise FormValidationError(
            f"coercivity violated: measured alpha {meas.alpha:.6e} "
            f"< declared {c.alpha:.6e}"
        )
    if meas.M1 > c.M1 * (1.0 + 1e-8):
        raise FormValidationError(
            f"V-bound violated: measured M1 {meas.M1:.6e} > declared {c.M1:.6e}"
        )
    if meas.Mdot1 > c.Mdot1 * (1.0 + 1e-8) + 1e-14:
        raise FormValidationError(
            f"Lipschitz bound violated: measured {meas.Mdot1:.6e} "
            f"> declared {c.Mdot1:.6e}"
        )
    if meas.M2 > c.M2 * (1.0 + 1e-8) + 1e-14:
        raise FormValidationError(
            f"a2 bound violated: measured M2 {meas.M2:.6e} > declared {c.M2:.6e}"
        )


def make_decomposition(
    triple: GelfandTriple,
    A1: Callable[[float], np.ndarray],
    A2: Callable[[float], np.ndarray] | None,
    constants: FormConstants,
    interval=None,
    validate: bool = True,
    n_samples: int = DEFAULT_TIME_SAMPLES,
) -> FormDecomposition:
    """Wrap user callables into a validated decomposition.

    ``A2 = None`` means a2 = 0.  Validation samples ``n_samples`` uniform
    times on the interval (plus nothing else; piecewise construction
    validates each piece on its own interval).
    """
    dim = triple.dim
    zero = np.zeros((dim, dim))

    def a1_wrapped(t, _f=A1):
        return np.asarray(_f(t), dtype=float).reshape(dim, dim)

    if A2 is None:
        def a2_wrapped(t, _z=zero):
            return _z
    else:
        def a2_wrapped(t, _f=A2):
            return np.asarray(_f(t), dtype=float).reshape(dim, dim)

    form = FormDecomposition(
        triple=triple, A1=a1_wrapped, A2=a2_wrapped,
        constants=constants, interval=interval,
    )
    if validate:
        validate_decomposition(form, n_samples=n_samples)
    return form


def shifted_decomposition(form: FormDecomposition, omega: float,
                          alpha: float | None = None,
                          validate: bool = True) -> FormDecomposition:
    """Absorb a quasi-coercive shift: a1 += omega (.|.)_H, a2 -= omega (.|.)_H.

    The sum a1 + a2 is unchanged; the returned pair has a coercive a1
    whenever ``a1 + omega (.|.)_H`` is coercive.  ``alpha`` overrides the
    declared coercivity constant (measured on the sample grid if omitted).
    """
    if omega < 0:
        raise ValidationError("omega must be nonnegative")
    tr = form.triple
    gh = tr.gram_H
    eye = np.eye(tr.dim)
    a1_old, a2_old = form.A1, form.A2

    def a1_new(t):
        return a1_old(t) + omega * gh

    def a2_new(t):
        return a2_old(t) - omega * eye

    shifted = FormDecomposition(
        triple=tr, A1=a1_new, A2=a2_new,
        constants=form.constants, interval=form.interval,
    )
    if alpha is None:
        alpha = measure_constants_on(
            shifted, sample_times(form.interval, DEFAULT_TIME_SAMPLES)
        ).alpha
    c = form.constants
    new_constants = FormConstants(
        M1=c.M1 + omega * tr.c_H ** 2,
        alpha=alpha,
        Mdot1=c.Mdot1,
        M2=c.M2 + omega * tr.c_H,
        omega=c.omega + omega,
        T=c.T,
    )
    shifted = replace(shifted, constants=new_constants)
    if validate:
        validate_decomposition(shifted)
    return shifted


# -- concrete 1D instances --------------------------------------------------------


def p1_matrices(nodes: np.ndarray):
    """Stiffness and consistent mass matrix of P1 elements on the given nodes."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes) - 1
    dim = n + 1
    K = np.zeros((dim, dim))
    M = np.zeros((dim, dim))
    for e in range(n):
        h = nodes[e + 1] - nodes[e]
        ke = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
        me = np.array([[2.0, 1.0], [1.0, 2.0]]) * (h / 6.0)
        idx = (e, e + 1)
        for a in range(2):
            for b in range(2):
                K[idx[a], idx[b]] += ke[a, b]
                M[idx[a], idx[b]] += me[a, b]
    return K, M


def robin_form_1d(
    n_elements: int,
    beta: Callable[[float, int], float],
    beta_lipschitz: float,
    T: float,
    n_time_samples: int = DEFAULT_TIME_SAMPLES,
) -> FormDecomposition:
    """Heat form on (0,1) with time-dependent Robin weights at both endpoints.

    P1 elements on the uniform mesh; ``beta(t, e)`` is the Robin coefficient
    at endpoint e in {0, 1} and must be Lipschitz in t with the given
    constant.  The decomposition is delivered pre-shifted: A1 contains the
    quasi-coercive shift ``omega * mass`` chosen through the 1D trace
    inequality ``u(0)^2 <= eps ||u'||^2 + (1 + 1/eps) ||u||^2`` so that a1
    is coercive with alpha = 1/2, and A2 = -omega * identity compensates.

    gram_H is the *lumped* mass matrix: with a diagonal H inner product a
    diagonal multiplicative perturbation (the quasilinear solver's B_v)
    satisfies its positivity bounds exactly, which the consistent mass
    matrix cannot guarantee.
    """
    if n_elements < 2:
        raise ValidationError("n_elements must be >= 2")
    nodes = np.linspace(0.0, 1.0, n_elements + 1)
    K, M_consistent = p1_matrices(nodes)
    M = np.diag(M_consistent.sum(axis=1))
    dim = n_elements + 1
    triple = new_triple(M, K + M)

    times = np.linspace(0.0, T, n_time_samples)
    vals = np.array([[float(beta(t, e)) for e in (0, 1)] for t in times])
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        raise ValidationError(
            f"beta returned a non-finite value at t = {times[bad[0]]}, "
            f"endpoint {bad[1]}"
        )
    gap = T / (n_time_samples - 1)
    # Between samples each endpoint value can drift by a Lipschitz increment.
    margin = 0.5 * beta_lipschitz * gap
    b_neg = float(np.max(np.sum(np.maximum(-vals + margin, 0.0), axis=1)))
    b_abs = float(np.max(np.sum(np.abs(vals) + margin, axis=1)))

    if b_neg > 0.0:
        omega = 0.5 + 2.0 * b_neg + 8.0 * b_neg ** 2
    else:
        omega = 0.5
    alpha = 0.5
    M1 = 1.0 + omega + 2.0 * b_abs
    Mdot1 = 4.0 * beta_lipschitz
    M2 = omega * triple.c_H
    constants = FormConstants(M1=M1, alpha=alpha, Mdot1=Mdot1, M2=M2,
                              omega=omega, T=T)

    base = K + omega * M
    e0 = np.zeros((dim, dim))
    e0[0, 0] = 1.0
    e1 = np.zeros((dim, dim))
    e1[-1, -1] = 1.0
    minus_omega_eye = -omega * np.eye(dim)

    def A1(t):
        return base + float(beta(t, 0)) * e0 + float(beta(t, 1)) * e1

    def A2(t):
        return minus_omega_eye

    form = FormDecomposition(triple=triple, A1=A1, A2=A2, constants=constants)
    validate_decomposition(form, n_samples=n_time_samples)
    return form


def robin_transport_form_1d(
    n_elements: int,
    beta: Callable[[float, int], float],
    beta_lipschitz: float,
    T: float,
    b_scale: float = 0.3,
) -> FormDecomposition:
    """Robin form plus the genuine V x H part a2(u,v) += b int u' v dx.

    The transport term is bounded V -> H but not V -> V-symmetric, so the
    full operator A1 + A2 exercises the non-symmetric square-root route.
    """
    base = robin_form_1d(n_elements, beta, beta_lipschitz, T)
    tr = base.triple
    dim = n_elements + 1
    C = np.zeros((dim, dim))
    for e in range(n_elements):
        for i_loc in range(2):          # test function (the H side)
            for j_loc in range(2):      # trial function (differentiated)
                sign = -1.0 if j_loc == 0 else 1.0
                C[e + i_loc, e + j_loc] += b_scale * sign * 0.5
    extra = tr.solve_H(C)  # (extra u | v)_H = b int u' v dx
    m2 = operator_norm(tr, extra, "V", "H")
    c = base.constants
    constants = FormConstants(M1=c.M1, alpha=c.alpha, Mdot1=c.Mdot1,
                              M2=c.M2 + m2, omega=c.omega, T=c.T)
    base_a2 = base.A2
    return make_decomposition(
        tr, base.A1, lambda t: base_a2(t) + extra, constants,
    )


def schrodinger_form_1d(
    grid: np.ndarray,
    m0: np.ndarray,
    m: Callable[[float, float], float],
    alpha1: float,
    alpha2: float,
    M: float,
    T: float,
    n_time_samples: int = DEFAULT_TIME_SAMPLES,
) -> FormDecomposition:
    """Free Laplacian plus a time-dependent lumped potential on a uniform grid.

    a1(t,u,v) = u' v' integral + sum_i m(t, x_i) u_i v_i w_i with trapezoid
    weights w_i; the potential must satisfy
    ``alpha1 m0(x) <= m(t,x) <= alpha2 m0(x)`` and be Lipschitz in t with
    constant M relative to m0.  The V norm is stiffness + diag(m0 w), with a
    small mass floor added when m0 vanishes somewhere so gram_V stays SPD.
    """
    grid = np.asarray(grid, dtype=float)
    m0 = np.asarray(m0, dtype=float)
    if grid.ndim != 1 or len(grid) < 3:
        raise ValidationError("grid must be a 1D array of at least 3 nodes")
    h = np.diff(grid)
    if np.any(h <= 0) or not np.allclose(h, h[0], rtol=1e-12):
        raise ValidationError("grid must be uniform and increasing")
    if m0.shape != grid.shape or np.any(m0 < 0):
        raise ValidationError("m0 must be a nonnegative weight per grid node")
    if not (0.0 < alpha1 <= alpha2):
        raise ValidationError("need 0 < alpha1 <= alpha2")

    K, Mass = p1_matrices(grid)
    w = np.full(len(grid), h[0])
    w[0] = w[-1] = h[0] / 2.0

    # Bound check at sampled times on every node, reporting the worst offence.
    times = np.linspace(0.0, T, n_time_samples)
    worst = (0.0, None)
    prev_vals = None
    for i, t in enumerate(times):
        vals = np.array([float(m(t, x)) for x in grid])
        if not np.all(np.isfinite(vals)):
            raise ValidationError(f"m returned non-finite values at t = {t}")
        tol = 1e-10 * np.maximum(m0, 1.0)
        low = alpha1 * m0 - vals - tol
        high = vals - alpha2 * m0 - tol
        for viol, kind in ((low, "below alpha1*m0"), (high, "above alpha2*m0")):
            j = int(np.argmax(viol))
            if viol[j] > worst[0]:
                worst = (float(viol[j]),
                         f"m({t}, {grid[j]}) = {vals[j]:.6e} {kind}")
        if prev_vals is not None:
            dt = times[i] - times[i - 1]
            lip = np.abs(vals - prev_vals) - M * dt * m0 - tol
            j = int(np.argmax(lip))
            if lip[j] > worst[0]:
                worst = (float(lip[j]),
                         f"|m({t},{grid[j]}) - m({times[i-1]},{grid[j]})| "
                         f"exceeds M |t-s| m0")
        prev_vals = vals
    if worst[1] is not None:
        raise ValidationError(f"potential bound violated: {worst[1]}")

    gram_V = K + np.diag(m0 * w)
    floored = bool(np.min(m0) <= 0.0)
    if floored:
        gram_V = gram_V + 1e-6 * Mass
    triple = new_triple(Mass, gram_V)

    alpha = min(1.0, alpha1)
    if floored:
        lower = K + alpha1 * np.diag(m0 * w)
        alpha = min(alpha, float(sla.eigh(lower, gram_V, eigvals_only=True)[0]))
    constants = FormConstants(
        M1=max(1.0, alpha2), alpha=alpha, Mdot1=M, M2=0.0, omega=0.0, T=T,
    )

    def A1(t):
        pot = np.array([float(m(t, x)) for x in grid]) * w
        return K + np.diag(pot)

    form = FormDecomposition(triple=triple, A1=A1,
                             A2=lambda t: np.zeros((len(grid), len(grid))),
                             constants=constants)
    validate_decomposition(form, n_samples=n_time_samples)
    return form


def constant_form(triple: GelfandTriple, A1_matrix, T: float = 1.0,
                  A2_matrix=None) -> FormDecomposition:
    """Autonomous decomposition from fixed matrices with measured constants."""
    a1 = np.asarray(A1_matrix, dtype=float)
    if a1.ndim == 0:
        a1 = a1.reshape(1, 1)
    a2 = None if A2_matrix is None else np.asarray(A2_matrix, dtype=float)
    alpha = float(sla.eigh(0.5 * (a1 + a1.T), triple.gram_V, eigvals_only=True)[0])
    if alpha <= 0:
        raise ValidationError(
            f"constant form is not coercive: minimal eigenvalue {alpha:.6e}"
        )
    m1 = operator_norm(triple, a1, "V", "Vp")
    m2 = 0.0 if a2 is None else operator_norm(triple, a2, "V", "H")
    constants = FormConstants(M1=m1, alpha=alpha, Mdot1=0.0, M2=m2,
                              omega=0.0, T=T)
    return make_decomposition(
        triple, lambda t: a1,
        None if a2 is None else (lambda t: a2),
        constants,
    )


def scalar_form(g: Callable[[float], float] | float, T: float,
                g_min: float | None = None, g_max: float | None = None,
                g_lipschitz: float = 0.0,
                gram_H: float = 1.0, gram_V: float = 1.0) -> FormDecomposition:
    """Dimension-1 form a1(t,u,v) = g(t) u v, handy for analytic test cases."""
    triple = new_triple([[gram_H]], [[gram_V]])
    if not callable(g):
        value = float(g)
        g_min = g_max = value
        g_lipschitz = 0.0
        g = lambda t, _v=value: _v
    if g_min is None or g_max is None:
        samples = [float(g(t)) for t in np.linspace(0.0, T, 65)]
        g_min = min(samples) if g_min is None else g_min
        g_max = max(samples) if g_max is None else g_max
    constants = FormConstants(
        M1=g_max / gram_V, alpha=g_min / gram_V, Mdot1=g_lipschitz / gram_V,
        M2=0.0, omega=0.0, T=T,
    )
    return make_decomposition(
        triple, lambda t: np.array([[float(g(t))]]), None, constants,
    )


def piecewise_form(breakpoints, builders) -> PiecewiseForm:
    """Assemble a piecewise form from per-interval decomposition builders.

    ``builders`` may be FormDecompositions already scoped to the right
    intervals or callables ``(t_lo, t_hi) -> FormDecomposition``.
    """
    bp = np.asarray(breakpoints, dtype=float)
    pieces = []
    for i, b in enumerate(builders):
        if callable(b) and not isinstance(b, FormDecomposition):
            piece = b(bp[i], bp[i + 1])
        else:
            piece = b
            if piece.interval != (bp[i], bp[i + 1]):
                piece = replace(piece, interval=(float(bp[i]), float(bp[i + 1])))
                validate_decomposition(piece)
        pieces.append(piece)
    return PiecewiseForm(breakpoints=bp, pieces=tuple(pieces))
