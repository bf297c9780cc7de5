"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

import maxreg as mx


def p1_mesh_matrices(n: int):
    """Hand-assembled stiffness/consistent-mass on (0,1), textbook stencils."""
    h = 1.0 / n
    K = np.zeros((n + 1, n + 1))
    M = np.zeros((n + 1, n + 1))
    for e in range(n):
        K[e:e + 2, e:e + 2] += np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
        M[e:e + 2, e:e + 2] += np.array([[2.0, 1.0], [1.0, 2.0]]) * (h / 6.0)
    return K, M


def scalar_decay_problem(rate=1.0, u0=1.0, T=1.0):
    """u' + rate * u = 0 as an evolution problem (closed-form exp decay)."""
    form = mx.scalar_form(float(rate), T=T)
    return mx.make_problem(form, [float(u0)])


def time_scalar_problem():
    """u' + (1+t) u = 0, u0 = 1: solution exp(-t - t^2/2)."""
    form = mx.scalar_form(lambda t: 1.0 + t, T=1.0, g_min=1.0, g_max=2.0,
                          g_lipschitz=1.0)
    return mx.make_problem(form, [1.0])


def robin_problem(n=16, beta=lambda t, e: 1.0 + t, lip=1.0, T=1.0,
                  with_source=True):
    form = mx.robin_form_1d(n, beta, lip, T)
    x = np.linspace(0.0, 1.0, n + 1)
    f = (lambda t: np.ones(n + 1)) if with_source else None
    return mx.make_problem(form, x, f=f)


def transport_perturbed_robin(n: int, b_scale: float = 0.3,
                              T: float = 1.0) -> mx.FormDecomposition:
    """Robin form plus the genuine V x H part a2(u,v) = int b u' v dx."""
    return mx.robin_transport_form_1d(n, lambda t, e: 1.0, 0.0, T,
                                      b_scale=b_scale)


def piecewise_scalar(rates=(1.0, 2.0), breakpoints=(0.0, 0.5, 1.0)):
    triple = mx.new_triple([[1.0]], [[1.0]])
    T = breakpoints[-1]
    builders = []
    for rate in rates:
        def build(lo, hi, r=rate):
            return mx.make_decomposition(
                triple, lambda t: np.array([[r]]), None,
                mx.FormConstants(M1=r, alpha=r, Mdot1=0.0, M2=0.0,
                                 omega=0.0, T=T),
                interval=(lo, hi),
            )
        builders.append(build)
    return mx.piecewise_form(list(breakpoints), builders)


def robin_jump_form(n=16, T=1.0, t_jump=0.5, beta_lo=0.0, beta_hi=1.0):
    """Robin form whose boundary weight jumps at t_jump."""
    from dataclasses import replace

    pieces = []
    for lo, hi, value in ((0.0, t_jump, beta_lo), (t_jump, T, beta_hi)):
        rf = mx.robin_form_1d(n, lambda t, e, v=value: v, 0.0, T)
        rf = replace(rf, interval=(lo, hi))
        mx.validate_decomposition(rf)
        pieces.append(rf)
    return mx.PiecewiseForm(breakpoints=np.array([0.0, t_jump, T]),
                            pieces=tuple(pieces))


def random_pl_trajectory(rng, times, dim, scale=1.0):
    """Random piecewise-linear data on a grid (as raw (times, values))."""
    return np.asarray(times, dtype=float), scale * rng.standard_normal(
        (len(times), dim))
