"""Quasilinear heat with Robin boundaries via Picard iteration.

u' = m(t, u) (Laplace u) + f with m clipped into [delta, 1/delta].  Each
iterate freezes m along the previous trajectory, turning the step into a
linear solve with the diagonal multiplicative perturbation
B_v = diag(1/m(t, v)).  All iterates share one maximal-regularity constant
because the perturbation bounds never leave [delta, 1/delta].
"""

import numpy as np

import maxreg as mx
from maxreg import oracle

# scalar analog first: u' = -m(t, u) u, m = clip(1 + u^2, 0.1, 10)
form = mx.scalar_form(1.0, T=1.0)
qp = mx.make_quasilinear_problem(form, lambda t, xi: 1.0 + xi ** 2, 0.1,
                                 u0=[1.0])
result = mx.solve_fixed_point(qp, n_steps=512, tol=1e-9, theta=0.5)
print(f"scalar analog: converged = {result.converged} after "
      f"{result.n_iterations} iterations, residual = {result.residual:.2e}")
print("  distances:", " ".join(f"{r.distance:.1e}" for r in result.history))

ode = mx.OdeProblem(rhs=lambda t, u: -np.clip(1 + u ** 2, 0.1, 10.0) * u,
                    u0=np.array([1.0]), T=1.0)
ref = oracle.reference_solve(ode, tol=1e-10)
gap = np.max(np.abs(ref.sample(result.trajectory.times)
                    - result.trajectory.states))
print(f"  sup-norm gap to the nonlinear ODE oracle: {gap:.2e}")

# the full Robin problem on (0,1)
rform = mx.robin_form_1d(32, lambda t, e: 1.0 + t, 1.0, 1.0)
x = np.linspace(0.0, 1.0, 33)
rqp = mx.make_quasilinear_problem(
    rform, lambda t, xi: 1.0 + xi ** 2, 0.1,
    f=lambda t: np.ones(33), u0=x,
)
rres = mx.solve_fixed_point(rqp, n_steps=64, tol=1e-9)
print(f"\nRobin problem (n = 32, beta = 1 + t): converged = "
      f"{rres.converged} after {rres.n_iterations} iterations")
print(f"  every linear sub-solve satisfied its MR estimate: "
      f"{all(r.apriori_satisfied for r in rres.history)}")
print(f"  shared a-priori constant C = {rres.diagnostics[0].apriori_C:.1f}")
print(f"  equation residual: {rres.residual:.2e}")
