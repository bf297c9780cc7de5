"""Seeded generators for the randomized verification suites.

Every generated object carries constants that are *exactly* valid by
construction (extremal eigenvalues are computed, never guessed), so the
randomized inequality suites test the theory, not the generator.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .evolve import EvolutionProblem, Perturbation, make_problem
from .forms import FormConstants, FormDecomposition, make_decomposition
from .triple import GelfandTriple, new_triple, operator_norm


def random_spd(rng: np.random.Generator, dim: int, spectrum) -> np.ndarray:
    """Random SPD matrix with log-uniform spectrum inside the given range."""
    lo, hi = spectrum
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = np.exp(rng.uniform(np.log(lo), np.log(hi), size=dim))
    return q @ np.diag(eigs) @ q.T


def random_triple(rng: np.random.Generator, dim: int,
                  spread: float = 4.0) -> GelfandTriple:
    gh = random_spd(rng, dim, (1.0 / spread, spread))
    gv = random_spd(rng, dim, (1.0 / spread, spread))
    return new_triple(gh, gv)


def random_symmetric_coercive_form(rng: np.random.Generator, dim: int,
                                   T: float = 1.0,
                                   spectrum=(0.1, 1e3)) -> FormDecomposition:
    """Autonomous symmetric coercive form with a random triple."""
    triple = random_triple(rng, dim)
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = np.exp(rng.uniform(np.log(spectrum[0]), np.log(spectrum[1]), size=dim))
    # Spectrum prescribed w.r.t. gram_V so the coercivity range is controlled.
    lv = np.linalg.cholesky(triple.gram_V)
    a1 = lv @ q @ np.diag(eigs) @ q.T @ lv.T
    a1 = 0.5 * (a1 + a1.T)
    constants = FormConstants(
        M1=float(np.max(eigs)), alpha=float(np.min(eigs)),
        Mdot1=0.0, M2=0.0, omega=0.0, T=T,
    )
    return make_decomposition(triple, lambda t: a1, None, constants)


def random_mr_problem(rng: np.random.Generator, dim: int,
                      T: float = 1.0) -> EvolutionProblem:
    """Random non-autonomous problem with exactly valid declared constants.

    a1(t) = C0 + r(t) C1 with C0 coercive and C1 symmetric psd, r in [0, 1];
    a2(t) = s(t) E with |s| <= 1; B(t) = gram_H^{-1} (S0 + q(t) S1) with S0
    SPD and S1 psd, q in [0, 1].
    """
    triple = random_triple(rng, dim, spread=2.0)
    gv, gh = triple.gram_V, triple.gram_H

    c0 = random_spd(rng, dim, (0.5, 4.0))
    w1 = rng.standard_normal((dim, dim))
    c1 = w1 @ w1.T
    c1 *= rng.uniform(0.05, 0.3) * np.linalg.norm(c0) / np.linalg.norm(c1)
    freq = rng.uniform(0.5, 4.0)
    phase = rng.uniform(0.0, 2 * np.pi)

    def r(t):
        return 0.5 * (1.0 + np.sin(freq * t + phase))

    alpha = float(sla.eigh(c0, gv, eigvals_only=True)[0])
    m1 = float(sla.eigh(c0, gv, eigvals_only=True)[-1]
               + sla.eigh(c1, gv, eigvals_only=True)[-1])
    mdot1 = 0.5 * freq * operator_norm(triple, c1, "V", "Vp")

    e_mat = rng.standard_normal((dim, dim))
    e_norm = operator_norm(triple, e_mat, "V", "H")
    target_m2 = rng.uniform(0.1, 0.6) * alpha
    e_mat *= target_m2 / e_norm
    freq2 = rng.uniform(0.5, 4.0)
    phase2 = rng.uniform(0.0, 2 * np.pi)

    def s(t):
        return np.cos(freq2 * t + phase2)

    constants = FormConstants(M1=m1, alpha=alpha, Mdot1=float(mdot1),
                              M2=float(target_m2), omega=0.0, T=T)
    form = make_decomposition(
        triple,
        lambda t: c0 + r(t) * c1,
        lambda t: s(t) * e_mat,
        constants,
    )

    s0 = random_spd(rng, dim, (0.5, 2.0))
    w2 = rng.standard_normal((dim, dim))
    s1 = w2 @ w2.T
    s1 *= rng.uniform(0.1, 0.5) * np.linalg.norm(s0) / np.linalg.norm(s1)
    freq3 = rng.uniform(0.5, 4.0)
    phase3 = rng.uniform(0.0, 2 * np.pi)

    def q(t):
        return 0.5 * (1.0 + np.cos(freq3 * t + phase3))

    beta0 = float(sla.eigh(s0, gh, eigvals_only=True)[0])
    beta1 = float(sla.eigh(s0, gh, eigvals_only=True)[-1]
                  + sla.eigh(s1, gh, eigvals_only=True)[-1])
    gh_cho = (np.linalg.cholesky(gh), True)

    def B(t):
        return sla.cho_solve(gh_cho, s0 + q(t) * s1)

    pert = Perturbation(B=B, beta0=beta0, beta1=beta1)

    f0 = rng.standard_normal(dim)
    f1 = rng.standard_normal(dim)
    freq4 = rng.uniform(0.5, 4.0)

    def f(t):
        return f0 + np.sin(freq4 * t) * f1

    u0 = rng.standard_normal(dim)
    return make_problem(form, u0, f=f, B=pert)
