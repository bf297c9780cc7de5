"""Spectral representation of symmetric coercive forms and operator powers.

For a symmetric coercive ``a1`` at a fixed time the generalized eigenproblem
``A1 v = m gram_H v`` delivers the multiplication-operator picture: with
gram_H-orthonormal eigenvectors and positive multipliers ``m_i`` every state
``x`` has coefficients ``x_hat = eigvecs.T @ gram_H @ x`` and

    A^p x = eigvecs @ diag(m_i^p) @ x_hat    (p in {1/2, -1/2, 1, -1}).

The inverse square root is also computed along a second, independent route:
the half-line resolvent integral

    A^{-1/2} x = (1/pi) * integral_0^inf lam^{-1/2} (lam + A)^{-1} x dlam,

mapped to a bounded interval with the substitution lam = tan(theta)^2 and
integrated by Gauss-Legendre.  Each node costs one shifted linear solve, so
the quadrature never touches the eigendecomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .forms import FormDecomposition
from .triple import GelfandTriple, ValidationError, operator_norm

VALID_POWERS = (0.5, -0.5, 1.0, -1.0)


class NumericalError(RuntimeError):
    """A linear solve failed where the theory guarantees solvability."""


@dataclass(frozen=True)
class SpectralFactorization:
    """Diagonalization A1(t) v_i = m_i gram_H v_i with (v_i | v_j)_H = delta_ij."""

    eigvals: np.ndarray
    eigvecs: np.ndarray
    triple: GelfandTriple
    t: float

    @property
    def dim(self) -> int:
        return len(self.eigvals)


def _require_symmetric(a1: np.ndarray, t: float) -> np.ndarray:
    scale = np.linalg.norm(a1)
    if scale > 0 and np.linalg.norm(a1 - a1.T) > 1e-12 * scale:
        raise ValidationError(
            f"A1({t}) is not symmetric; spectral powers are defined only "
            "for the symmetric coercive part"
        )
    return 0.5 * (a1 + a1.T)


def spectral_decompose(form: FormDecomposition, t: float) -> SpectralFactorization:
    """Generalized symmetric eigendecomposition of a1 at time t.

    The multipliers land in [alpha / c_H^2, inf); eigenvectors come back
    gram_H-orthonormal.
    """
    a1 = _require_symmetric(form.a1_matrix(t), t)
    vals, vecs = sla.eigh(a1, form.triple.gram_H)
    if vals[0] <= 0.0:
        raise ValidationError(
            f"a1({t}) is not coercive: smallest multiplier {vals[0]:.6e}"
        )
    return SpectralFactorization(
        eigvals=vals, eigvecs=vecs, triple=form.triple, t=t,
    )


def power_apply(fact: SpectralFactorization, p: float, x) -> np.ndarray:
    """Apply A^p to a state vector through the spectral factorization."""
    if p not in VALID_POWERS:
        raise ValidationError(f"power p = {p} not in {VALID_POWERS}")
    x = np.asarray(x, dtype=float)
    if x.shape != (fact.dim,):
        raise ValidationError(f"x has shape {x.shape}, expected ({fact.dim},)")
    coeff = fact.eigvecs.T @ (fact.triple.gram_H @ x)
    return fact.eigvecs @ (fact.eigvals ** p * coeff)


def power_matrix(fact: SpectralFactorization, p: float) -> np.ndarray:
    """A^p as a matrix on state coordinates."""
    if p not in VALID_POWERS:
        raise ValidationError(f"power p = {p} not in {VALID_POWERS}")
    v = fact.eigvecs
    return v @ np.diag(fact.eigvals ** p) @ v.T @ fact.triple.gram_H


def sqrt_vprime_matrix(fact: SpectralFactorization) -> np.ndarray:
    """A^{1/2} as a V -> V' matrix in functional coordinates."""
    return fact.triple.gram_H @ power_matrix(fact, 0.5)


def invsqrt_quadrature(form: FormDecomposition, t: float, x,
                       n_nodes: int = 200) -> np.ndarray:
    """Resolvent-quadrature A^{-1/2} x, independent of the spectral route.

    Gauss-Legendre on theta in (0, pi/2) after lam = tan(theta)^2; each node
    solves (lam gram_H + A1(t)) y = gram_H x.  With 200 nodes the relative
    error against the spectral route is far below 1e-8 for spectra within
    [0.1, 1e4].
    """
    if n_nodes < 8:
        raise ValidationError("n_nodes must be >= 8")
    a1 = _require_symmetric(form.a1_matrix(t), t)
    gh = form.triple.gram_H
    x = np.asarray(x, dtype=float)
    if x.shape != (gh.shape[0],):
        raise ValidationError(f"x has shape {x.shape}, expected ({gh.shape[0]},)")
    rhs = gh @ x

    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    theta = (nodes + 1.0) * (np.pi / 4.0)
    wt = weights * (np.pi / 4.0)

    acc = np.zeros_like(x)
    # Fixed ascending-node order keeps the reduction deterministic.
    for k in range(n_nodes):
        lam = np.tan(theta[k]) ** 2
        try:
            y = sla.solve(lam * gh + a1, rhs, assume_a="pos")
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"shifted solve failed at node {k} (lambda = {lam:.6e})"
            ) from exc
        acc = acc + (wt[k] / np.cos(theta[k]) ** 2) * y
    return (2.0 / np.pi) * acc


# -- Proposition-style resolvent bounds --------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lam: float | None
    measured: float
    ceiling: float
    passed: bool


@dataclass(frozen=True)
class BoundReport:
    t: float
    alpha: float
    M: float
    c_H: float
    c1: float
    checks: tuple

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)


def verify_resolvent_bounds(form: FormDecomposition, t: float,
                            lambda_grid, rel_slack: float = 1e-10) -> BoundReport:
    """Measure the four resolvent/square-root norms against their ceilings.

    a) ||(lam + A)^{-1}||_{V->V}  <= c1 (1 + lam)^{-1}
    b) ||(lam + A)^{-1}||_{V'->V} <= 1/alpha
    c) ||A^{-1/2}||_{H->V}        <= 1/sqrt(alpha)
    d) ||A^{1/2}||_{H->V'}        <= sqrt(M)
    with c1 = sqrt(M/alpha) max{1, c_H^2/alpha}.  alpha and M are measured
    at time t (extremal generalized eigenvalues of (A1, gram_V)), so the
    ceilings are the tightest the estimates allow.
    """
    tr = form.triple
    a1 = _require_symmetric(form.a1_matrix(t), t)
    ev = sla.eigh(a1, tr.gram_V, eigvals_only=True)
    alpha, M = float(ev[0]), float(ev[-1])
    if alpha <= 0:
        raise ValidationError(f"a1({t}) is not coercive (alpha = {alpha:.3e})")
    c1 = np.sqrt(M / alpha) * max(1.0, tr.c_H ** 2 / alpha)

    def check(name, lam, measured, ceiling):
        return BoundCheck(
            name=name, lam=lam, measured=measured, ceiling=ceiling,
            passed=bool(measured <= ceiling * (1.0 + rel_slack)),
        )

    checks = []
    gh = tr.gram_H
    for lam in np.asarray(lambda_grid, dtype=float):
        if lam < 0:
            raise ValidationError(f"lambda grid must be nonnegative, got {lam}")
        shifted_inv = sla.solve(lam * gh + a1, np.eye(tr.dim), assume_a="pos")
        res_state = shifted_inv @ gh  # resolvent on states, (lam + A)^{-1}|_V
        checks.append(check(
            "resolvent_V_to_V", float(lam),
            operator_norm(tr, res_state, "V", "V"), c1 / (1.0 + lam),
        ))
        checks.append(check(
            "resolvent_Vprime_to_V", float(lam),
            operator_norm(tr, shifted_inv, "Vp", "V"), 1.0 / alpha,
        ))

    fact = spectral_decompose(form, t)
    checks.append(check(
        "invsqrt_H_to_V", None,
        operator_norm(tr, power_matrix(fact, -0.5), "H", "V"),
        1.0 / np.sqrt(alpha),
    ))
    checks.append(check(
        "sqrt_H_to_Vprime", None,
        operator_norm(tr, gh @ power_matrix(fact, 0.5), "H", "Vp"),
        np.sqrt(M),
    ))
    return BoundReport(t=t, alpha=alpha, M=M, c_H=tr.c_H, c1=float(c1),
                       checks=tuple(checks))


# -- time derivatives and Lipschitz probes -----------------------------------------


def family_derivative(fn, t: float, h: float, lo: float, hi: float) -> np.ndarray:
    """Finite-difference derivative of a matrix family, one-sided at endpoints."""
    if not (lo <= t <= hi):
        raise ValidationError(f"time {t} outside [{lo}, {hi}]")
    if t - h >= lo and t + h <= hi:
        return (np.asarray(fn(t + h)) - np.asarray(fn(t - h))) / (2.0 * h)
    if t + h <= hi:
        return (np.asarray(fn(t + h)) - np.asarray(fn(t))) / h
    return (np.asarray(fn(t)) - np.asarray(fn(t - h))) / h


def derivative_estimate(form: FormDecomposition, t: float,
                        h: float | None = None) -> np.ndarray:
    """Finite-difference estimate of d/dt A1(t); exact for linear families."""
    lo, hi = form.interval
    if h is None:
        h = 1e-5 * max(form.constants.T, hi - lo)
    return family_derivative(form.a1_matrix, t, h, lo, hi)


@dataclass(frozen=True)
class LipschitzProbe:
    invsqrt_measured: float
    sqrt_measured: float
    invsqrt_ceiling: float
    sqrt_ceiling: float

    @property
    def within_ceilings(self) -> bool:
        return (self.invsqrt_measured <= self.invsqrt_ceiling * (1 + 1e-9)
                and self.sqrt_measured <= self.sqrt_ceiling * (1 + 1e-9))


def sqrt_lipschitz_probe(form: FormDecomposition, sample_pairs) -> LipschitzProbe:
    """Measured Lipschitz constants of t -> A^{-1/2} (V->V) and t -> A^{1/2} (V->V').

    Ceilings follow the resolvent-integral estimate: with
    c1 = sqrt(M1/alpha) max{1, c_H^2/alpha} the inverse root obeys
    c1 * Mdot1 / alpha (the half-line integral of lam^{-1/2} (1+lam)^{-1}
    contributes exactly pi), and the root adds the triangle-inequality terms
    Mdot1 c_H / sqrt(alpha) + M1 * (c1 * Mdot1 / alpha).
    """
    tr = form.triple
    c = form.constants
    cache: dict[float, SpectralFactorization] = {}

    def fact_at(t):
        if t not in cache:
            cache[t] = spectral_decompose(form, t)
        return cache[t]

    inv_meas = 0.0
    sq_meas = 0.0
    for s, t in sample_pairs:
        gap = abs(t - s)
        if gap < 1e-12:
            continue
        fs, ft = fact_at(float(s)), fact_at(float(t))
        d_inv = power_matrix(ft, -0.5) - power_matrix(fs, -0.5)
        d_sqrt = sqrt_vprime_matrix(ft) - sqrt_vprime_matrix(fs)
        inv_meas = max(inv_meas, operator_norm(tr, d_inv, "V", "V") / gap)
        sq_meas = max(sq_meas, operator_norm(tr, d_sqrt, "V", "Vp") / gap)

    c1 = np.sqrt(c.M1 / c.alpha) * max(1.0, tr.c_H ** 2 / c.alpha)
    inv_ceiling = c1 * c.Mdot1 / c.alpha
    sq_ceiling = c.Mdot1 * tr.c_H / np.sqrt(c.alpha) + c.M1 * inv_ceiling
    return LipschitzProbe(
        invsqrt_measured=inv_meas, sqrt_measured=sq_meas,
        invsqrt_ceiling=float(inv_ceiling), sqrt_ceiling=float(sq_ceiling),
    )
