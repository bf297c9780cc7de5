"""Build a finite-dimensional Gelfand triple and inspect its geometry.

The triple V -> H -> V' lives on one coordinate space; two SPD Gram
matrices induce the V and H inner products, and functionals are plain
coordinate vectors paired by the dot product.  We use the P1 finite-element
matrices on (0,1): H carries the mass inner product, V the H^1 one.
"""

import numpy as np

import maxreg as mx

n = 16
K, M = mx.p1_matrices(np.linspace(0.0, 1.0, n + 1))
triple = mx.new_triple(M, K + M)

print(f"P1 mesh with {n} elements: dim = {triple.dim}")
print(f"embedding constant c_H = {triple.c_H:.6f}")
print("(constants maximize ||u||_H / ||u||_V here, so c_H = 1)")

rng = np.random.default_rng(0)
u = rng.standard_normal(triple.dim)
print(f"\nrandom u:  ||u||_H = {triple.norm_H(u):.4f}   "
      f"||u||_V = {triple.norm_V(u):.4f}")
print(f"chain: ||emb(u)||_V' = {triple.dual_norm(triple.embed_H_to_Vprime(u)):.4f}"
      f" <= c_H ||u||_H = {triple.c_H * triple.norm_H(u):.4f}")

# duality: |<f, v>| <= ||f||_V' ||v||_V with equality at the Riesz vector
f = rng.standard_normal(triple.dim)
v_star = triple.riesz_V(f)
print(f"\nfunctional f: ||f||_V' = {triple.dual_norm(f):.4f}")
print(f"pairing at the Riesz representative: "
      f"{triple.pairing(f, v_star) / triple.norm_V(v_star):.4f} (equal)")

vals = [abs(triple.pairing(f, v)) / triple.norm_V(v)
        for v in rng.standard_normal((2000, triple.dim))]
print(f"best of 2000 random directions: {max(vals):.4f} (never exceeds)")
