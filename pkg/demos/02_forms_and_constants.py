"""Time-dependent form families and their verified constants.

A decomposition a = a1 + a2 keeps the symmetric coercive Lipschitz part and
the rough V x H-bounded part separate.  Constructors validate the declared
constants (M1, alpha, Mdot1, M2) against dense measurements on a time grid,
so a shipped form can never over-claim.
"""

import numpy as np

import maxreg as mx

# Heat form on (0,1) with Robin weights beta(t, .) = 1 + t at both ends.
robin = mx.robin_form_1d(16, lambda t, e: 1.0 + t, beta_lipschitz=1.0, T=1.0)
c = robin.constants
print("Robin form, n = 16, beta = 1 + t:")
print(f"  declared: alpha = {c.alpha}, M1 = {c.M1}, Mdot1 = {c.Mdot1}, "
      f"M2 = {c.M2:.4f}, omega = {c.omega}")
meas = mx.estimate_constants(robin, 64)
print(f"  measured: alpha = {meas.alpha:.4f}, M1 = {meas.M1:.4f}, "
      f"Mdot1 = {meas.Mdot1:.4f}, M2 = {meas.M2:.4f}")

# Negative boundary weights are allowed: the quasi-coercive shift of the
# form raises omega until a1 is coercive again (alpha stays 1/2).
sign_flip = mx.robin_form_1d(16, lambda t, e: np.cos(3 * t) - 0.5, 3.0, 1.0)
print(f"\nbeta dipping negative: omega raised to "
      f"{sign_flip.constants.omega:.4f} (alpha still "
      f"{sign_flip.constants.alpha})")

# Free Laplacian plus a time-dependent potential on (-1, 1).
grid = np.linspace(-1.0, 1.0, 33)
m0 = 1.0 + grid ** 2
schrodinger = mx.schrodinger_form_1d(
    grid, m0, lambda t, x: (1.5 + 0.5 * np.sin(t)) * (1.0 + x ** 2),
    alpha1=1.0, alpha2=2.0, M=0.5, T=1.0,
)
print(f"\nSchrodinger form: alpha = {schrodinger.constants.alpha}, "
      f"M1 = {schrodinger.constants.M1}, Mdot1 = {schrodinger.constants.Mdot1}")

# The shift identity: moving omega*( . | . )_H between a1 and a2 never
# changes the assembled operator.
shifted = mx.shifted_decomposition(robin, omega=0.8)
gh = robin.triple.gram_H
t = 0.3
before = robin.a1_matrix(t) + gh @ robin.a2_matrix(t)
after = shifted.a1_matrix(t) + gh @ shifted.a2_matrix(t)
print(f"\nshift identity residual at t = {t}: "
      f"{np.linalg.norm(after - before):.2e}")
