"""Non-autonomous evolution problems governed by time-dependent forms.

The library solves B(t) u'(t) + A(t) u(t) = f(t), u(0) = u0 on a
finite-dimensional Gelfand triple, where A(t) comes from a decomposition
a = a1 + a2 into a symmetric coercive Lipschitz part and a V x H-bounded
part.  It ships two independent discretizations (theta stepping and a
weighted space-time Galerkin method), operator square roots computed two
independent ways, maximal-regularity diagnostics, piecewise gluing, and a
Picard solver for a quasilinear heat problem.
"""

from .triple import (
    GelfandTriple,
    ValidationError,
    check_spd,
    new_triple,
    operator_norm,
    operator_norm_extremes,
)
from .forms import (
    FormConstants,
    FormDecomposition,
    FormValidationError,
    PiecewiseForm,
    assemble,
    constant_form,
    estimate_constants,
    make_decomposition,
    p1_matrices,
    piecewise_form,
    robin_form_1d,
    robin_transport_form_1d,
    scalar_form,
    schrodinger_form_1d,
    shifted_decomposition,
    validate_decomposition,
)
from .sqrtop import (
    BoundReport,
    NumericalError,
    SpectralFactorization,
    derivative_estimate,
    invsqrt_quadrature,
    power_apply,
    power_matrix,
    spectral_decompose,
    sqrt_lipschitz_probe,
    verify_resolvent_bounds,
)
from .evolve import (
    ConfigurationError,
    EvolutionProblem,
    MRDiagnostics,
    Perturbation,
    SqrtPropertyReport,
    Trajectory,
    apriori_constant,
    coercivity_constants,
    constant_perturbation,
    identity_perturbation,
    l2_h_distance,
    make_problem,
    mr_diagnostics,
    solve_glued,
    solve_spacetime,
    solve_theta,
    spacetime_system,
    sqrt_property_probe,
    trajectory_from_states,
)
from .quasilinear import (
    FixedPointResult,
    QuasilinearProblem,
    equation_residual,
    linearized_B,
    make_quasilinear_problem,
    solve_fixed_point,
)
from .oracle import (
    OdeProblem,
    OracleSolution,
    StiffnessError,
    chain_rule_sqrt_check,
    ibp_check,
    oracle_trajectory,
    product_rule_check,
    reference_solve,
)

__version__ = "0.1.0"
