"""Symplectic phase-space primitives.

Phase-space vectors are plain real numpy arrays of length ``2m`` ordered as
``(x_1, ..., x_m, p_1, ..., p_m)``. The symplectic form acts as
``J e_x(i) = e_p(i)`` and ``J e_p(i) = -e_x(i)``, i.e. ``J = [[0, -I], [I, 0]]``,
which gives ``[X, P] = 2i`` with unit shot noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

MODE_TOL = 1e-10


def mode_count(v) -> int:
    n = np.shape(v)[-1]
    if n % 2:
        raise ValueError(f"phase-space dimension must be even, got {n}")
    return n // 2


def symplectic_form(m: int) -> np.ndarray:
    """Dense ``2m x 2m`` matrix of J."""
    z = np.zeros((m, m))
    eye = np.eye(m)
    return np.block([[z, -eye], [eye, z]])


def apply_J(v):
    """Apply J to a vector (or to the last axis of a stack of vectors)."""
    v = np.asarray(v, dtype=float)
    m = mode_count(v)
    return np.concatenate([-v[..., m:], v[..., :m]], axis=-1)


def symplectic_product(f1, f2) -> float:
    """Return ``(f1, J f2)``.

    With this convention ``[Q(f1), Q(f2)] = -2i (f1, J f2)``; for example
    ``symplectic_product(e_x, e_p) == -1``.
    """
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    if f1.shape != f2.shape:
        raise ValueError(f"dimension mismatch: {f1.shape} vs {f2.shape}")
    return float(f1 @ apply_J(f2))


def check_mode(g, tol: float = MODE_TOL) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    mode_count(g)
    norm = np.linalg.norm(g)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"mode vector must be normalised, got norm {norm:.15g}")
    return g


def mode_projector(g, tol: float = MODE_TOL) -> np.ndarray:
    """Projector ``P_g + P_{Jg}`` onto the two-dimensional phase space of mode g."""
    g = check_mode(g, tol)
    jg = apply_J(g)
    return np.outer(g, g) + np.outer(jg, jg)


def is_orthogonal_symplectic(O, tol: float = 1e-10) -> bool:
    O = np.asarray(O, dtype=float)
    if O.ndim != 2 or O.shape[0] != O.shape[1] or O.shape[0] % 2:
        raise ValueError("expected a square matrix of even dimension")
    J = symplectic_form(O.shape[0] // 2)
    eye = np.eye(O.shape[0])
    return bool(np.max(np.abs(O.T @ O - eye)) < tol and np.max(np.abs(O @ J - J @ O)) < tol)


def is_symplectic(S, tol: float = 1e-8) -> bool:
    S = np.asarray(S, dtype=float)
    J = symplectic_form(S.shape[0] // 2)
    return bool(np.max(np.abs(S.T @ J @ S - J)) < tol)


def unitary_to_orthosymplectic(u) -> np.ndarray:
    """Real ``2m x 2m`` representation of an ``m x m`` unitary (J plays the role of i)."""
    u = np.asarray(u)
    re, im = u.real, u.imag
    return np.block([[re, -im], [im, re]])


def orthosymplectic_to_unitary(O) -> np.ndarray:
    O = np.asarray(O, dtype=float)
    m = O.shape[0] // 2
    return O[:m, :m] + 1j * O[m:, :m]


def random_orthogonal_symplectic(m: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    if m == 1:
        u = np.exp(1j * rng.uniform(0, 2 * np.pi)) * np.ones((1, 1))
    else:
        u = unitary_group.rvs(m, random_state=rng)
    return unitary_to_orthosymplectic(u)


def random_mode(m: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    g = rng.normal(size=2 * m)
    return g / np.linalg.norm(g)


@dataclass(frozen=True)
class SymplecticBasis:
    """Orthonormal symplectic basis ``[e(1)..e(m), Je(1)..Je(m)]``.

    ``vectors`` holds the basis vectors as rows. ``degenerate`` marks bases
    that are not uniquely determined by the matrix they were derived from.
    """

    vectors: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=float)
        object.__setattr__(self, "vectors", vecs)
        n = vecs.shape[0]
        if vecs.ndim != 2 or n != vecs.shape[1] or n % 2:
            raise ValueError("basis must be a square array of 2m row vectors")

    @property
    def m(self) -> int:
        return self.vectors.shape[0] // 2

    @property
    def modes(self) -> np.ndarray:
        """The amplitude vectors ``e(1)..e(m)``."""
        return self.vectors[: self.m]

    def check(self, tol: float = 1e-10) -> None:
        vecs = self.vectors
        gram = vecs @ vecs.T
        if np.max(np.abs(gram - np.eye(len(vecs)))) > tol:
            raise ValueError("basis vectors are not orthonormal")
        if np.max(np.abs(vecs[self.m :] - apply_J(vecs[: self.m]))) > tol:
            raise ValueError("second half of the basis is not J applied to the first")

    def coordinates(self, beta) -> np.ndarray:
        """Coordinates of ``beta`` in this basis (xxpp order)."""
        return np.asarray(beta, dtype=float) @ self.vectors.T
