"""Reduced states on a subset of modes and their purity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .degauss import DegaussedState, Sign
from .gaussian import gaussian_density
from .phasespace import SymplecticBasis, apply_J, check_mode


@dataclass(frozen=True)
class ModeSubset:
    """Rows ``[nu(1)..nu(m'), J nu(1)..J nu(m')]`` spanning a J-closed subspace."""

    vectors: np.ndarray

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if B.shape[0] % 2 or B.shape[1] % 2 or B.shape[0] > B.shape[1]:
            raise ValueError("subset needs 2m' row vectors of length 2m with m' <= m")
        mp = B.shape[0] // 2
        if np.max(np.abs(B @ B.T - np.eye(len(B)))) > 1e-10:
            raise ValueError("subset vectors are not orthonormal")
        if np.max(np.abs(B[mp:] - apply_J(B[:mp]))) > 1e-10:
            raise ValueError("subset is not closed under J")
        object.__setattr__(self, "vectors", B)

    @classmethod
    def from_modes(cls, modes) -> "ModeSubset":
        modes = np.atleast_2d(np.asarray(modes, dtype=float))
        for nu in modes:
            check_mode(nu)
        return cls(np.vstack([modes, apply_J(modes)]))

    @classmethod
    def coordinate_modes(cls, m: int, indices) -> "ModeSubset":
        """Subset of the standard modes ``indices`` (0-based) among ``m``."""
        eye = np.eye(2 * m)
        return cls.from_modes(eye[list(indices)])

    @classmethod
    def from_basis(cls, basis: SymplecticBasis, indices) -> "ModeSubset":
        return cls.from_modes(basis.modes[list(indices)])

    @property
    def m(self) -> int:
        return self.vectors.shape[0] // 2


@dataclass(frozen=True)
class ReducedDegaussedState:
    Vred: np.ndarray
    Ared: np.ndarray
    sign: Sign

    @property
    def m(self) -> int:
        return self.Vred.shape[0] // 2


def reduce(state: DegaussedState, subset: ModeSubset) -> ReducedDegaussedState:
    if subset.vectors.shape[1] != state.V.shape[0]:
        raise ValueError("subset and state live in different phase spaces")
    B = subset.vectors
    return ReducedDegaussedState(B @ state.V @ B.T, B @ state.A @ B.T, state.sign)


def reduced_wigner(red: ReducedDegaussedState, beta):
    """Wigner function of the reduced state in subset coordinates."""
    beta = np.asarray(beta, dtype=float)
    Vinv = np.linalg.inv(red.Vred)
    M = Vinv @ red.Ared @ Vinv
    poly = 0.5 * (np.einsum("...i,ij,...j->...", beta, M, beta)
                  - np.trace(Vinv @ red.Ared) + 2.0)
    return poly * gaussian_density(red.Vred, beta)


def purity(red: ReducedDegaussedState) -> float:
    """``(4 pi)^m' * integral of W^2``, evaluated in closed form.

    ``W^2`` is a squared quadratic times a Gaussian of covariance ``Vred/2``;
    the fourth moment follows from Isserlis' theorem.
    """
    V = red.Vred
    Vinv = np.linalg.inv(V)
    M = Vinv @ red.Ared @ Vinv
    c = np.trace(Vinv @ red.Ared) - 2.0
    MS = 0.5 * M @ V
    t = np.trace(MS)
    quartic = t * t + 2.0 * np.trace(MS @ MS)
    return float((quartic - 2.0 * c * t + c * c) / (4.0 * np.sqrt(np.linalg.det(V))))
