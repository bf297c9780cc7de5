"""Finite-dimensional Gelfand triple V -> H -> V'.

All three spaces share one coordinate system of dimension ``dim``.  States
(elements of V or H) are plain vectors; elements of V' are stored as
*functional coordinates* ``f`` acting by ``<f, v> = f @ v``.  The inner
products are induced by two SPD Gram matrices, and the V' norm is the one
induced by ``gram_V^{-1}`` (the Riesz dual norm).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla


class ValidationError(ValueError):
    """Raised when input data violates a structural requirement."""


SYM_TOL = 1e-12


def _as_square_matrix(mat, name: str) -> np.ndarray:
    a = np.asarray(mat, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite entries")
    return a


def check_spd(mat, name: str, sym_tol: float = SYM_TOL) -> np.ndarray:
    """Validate that ``mat`` is symmetric (relative tolerance) positive definite.

    Returns the validated array.  The error message names the offending
    matrix and, for indefinite input, its minimal eigenvalue.
    """
    a = _as_square_matrix(mat, name)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        raise ValidationError(f"{name} is the zero matrix, not positive definite")
    asym = np.linalg.norm(a - a.T)
    if asym > sym_tol * scale:
        raise ValidationError(
            f"{name} is not symmetric: ||A - A^T|| = {asym:.3e} "
            f"exceeds {sym_tol:.1e} * ||A|| = {sym_tol * scale:.3e}"
        )
    a = 0.5 * (a + a.T)
    min_eig = float(sla.eigvalsh(a)[0])
    if min_eig <= 0.0:
        raise ValidationError(
            f"{name} is not positive definite: minimal eigenvalue {min_eig:.6e}"
        )
    return a


@dataclass(frozen=True)
class GelfandTriple:
    """V -> H -> V' realized by two SPD Gram matrices on one coordinate space.

    Attributes
    ----------
    dim : int
        Dimension of the shared coordinate space.
    gram_H, gram_V : ndarray
        SPD matrices inducing the H and V inner products.
    c_H : float
        Smallest constant with ``||u||_H <= c_H ||u||_V`` for all u; equals
        the square root of the largest generalized eigenvalue of
        ``gram_H x = lam gram_V x``.
    """

    dim: int
    gram_H: np.ndarray
    gram_V: np.ndarray
    c_H: float
    # Cholesky factors (lower) cached for norm/solve work.
    _chol_H: np.ndarray = field(repr=False, default=None)
    _chol_V: np.ndarray = field(repr=False, default=None)

    # -- inner products and norms -------------------------------------------------

    def inner_H(self, u, v) -> float:
        return float(np.asarray(u) @ self.gram_H @ np.asarray(v))

    def inner_V(self, u, v) -> float:
        return float(np.asarray(u) @ self.gram_V @ np.asarray(v))

    def norm_H(self, u) -> float:
        return float(np.linalg.norm(self._chol_H.T @ np.asarray(u, dtype=float)))

    def norm_V(self, u) -> float:
        return float(np.linalg.norm(self._chol_V.T @ np.asarray(u, dtype=float)))

    def dual_norm(self, f) -> float:
        """Norm of the functional ``v -> f @ v`` in V' (the gram_V^{-1} norm)."""
        f = self._check_vec(f)
        y = sla.solve_triangular(self._chol_V, f, lower=True)
        return float(np.linalg.norm(y))

    def pairing(self, f, v) -> float:
        """Duality pairing <f, v> for functional coordinates f and state v."""
        return float(np.asarray(f) @ np.asarray(v))

    def embed_H_to_Vprime(self, g) -> np.ndarray:
        """Functional coordinates of the H-element g: <emb(g), v> = (g | v)_H."""
        g = self._check_vec(g)
        return self.gram_H @ g

    def riesz_V(self, f) -> np.ndarray:
        """The V-representative gram_V^{-1} f, the maximizer of <f,v>/||v||_V."""
        f = self._check_vec(f)
        return sla.cho_solve((self._chol_V, True), f)

    def solve_H(self, g) -> np.ndarray:
        """gram_H^{-1} g, the H-representative of a functional in H."""
        return sla.cho_solve((self._chol_H, True), np.asarray(g, dtype=float))

    def _check_vec(self, v) -> np.ndarray:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if v.shape != (self.dim,):
            raise ValidationError(
                f"vector has shape {v.shape}, expected ({self.dim},)"
            )
        return v


def new_triple(gram_H, gram_V) -> GelfandTriple:
    """Build a Gelfand triple from SPD Gram matrices of equal size.

    The embedding constant ``c_H`` is the square root of the largest
    eigenvalue of the generalized symmetric problem
    ``gram_H x = lam gram_V x``.
    """
    gh = check_spd(gram_H, "gram_H")
    gv = check_spd(gram_V, "gram_V")
    if gh.shape != gv.shape:
        raise ValidationError(
            f"gram_H {gh.shape} and gram_V {gv.shape} differ in size"
        )
    lam_max = float(sla.eigh(gh, gv, eigvals_only=True)[-1])
    triple = GelfandTriple(
        dim=gh.shape[0],
        gram_H=gh,
        gram_V=gv,
        c_H=float(np.sqrt(lam_max)),
        _chol_H=np.linalg.cholesky(gh),
        _chol_V=np.linalg.cholesky(gv),
    )
    triple.gram_H.setflags(write=False)
    triple.gram_V.setflags(write=False)
    return triple


def embedding_extremal_vector(triple: GelfandTriple) -> np.ndarray:
    """A vector attaining ||u||_H = c_H ||u||_V (top generalized eigenvector)."""
    _, vecs = sla.eigh(triple.gram_H, triple.gram_V)
    return vecs[:, -1]


# -- operator norms between the three spaces --------------------------------------

#: Space labels accepted by :func:`operator_norm`.
SPACES = ("V", "H", "Vp")


def _euclidean_map(triple: GelfandTriple, space: str, inverse: bool) -> np.ndarray:
    """T with ||x||_space = ||T x||_2 (or T^{-1} when ``inverse``).

    V and H use the transposed Cholesky factor of their Gram matrix; V' uses
    the inverse Cholesky factor of gram_V, realizing the gram_V^{-1} norm.
    """
    if space == "V":
        L = triple._chol_V
        return np.linalg.inv(L.T) if inverse else L.T
    if space == "H":
        L = triple._chol_H
        return np.linalg.inv(L.T) if inverse else L.T
    if space == "Vp":
        L = triple._chol_V
        return L if inverse else np.linalg.inv(L)
    raise ValueError(f"unknown space {space!r}, expected one of {SPACES}")


def operator_norm(triple: GelfandTriple, mat, dom: str, cod: str) -> float:
    """Operator norm of ``mat`` acting dom -> cod between V, H and V'.

    ``dom`` and ``cod`` are space labels from :data:`SPACES`; ``"Vp"`` is V'
    with functional coordinates.  Computed as the largest singular value of
    the congruence-transformed matrix.
    """
    a = np.asarray(mat, dtype=float)
    t_out = _euclidean_map(triple, cod, inverse=False)
    t_in_inv = _euclidean_map(triple, dom, inverse=True)
    return float(sla.svdvals(t_out @ a @ t_in_inv)[0])


def operator_norm_extremes(triple: GelfandTriple, mat, dom: str, cod: str):
    """(sigma_max, sigma_min) of ``mat`` as an operator dom -> cod."""
    a = np.asarray(mat, dtype=float)
    t_out = _euclidean_map(triple, cod, inverse=False)
    t_in_inv = _euclidean_map(triple, dom, inverse=True)
    s = sla.svdvals(t_out @ a @ t_in_inv)  # descending
    return float(s[0]), float(s[-1])
