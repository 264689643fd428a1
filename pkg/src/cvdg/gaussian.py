"""Gaussian states: covariance algebra, validity, phase-space functions and
the Williamson / Bloch-Messiah machinery behind the pure-plus-noise split."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import InvalidStateError
from .phasespace import (
    SymplecticBasis,
    apply_J,
    mode_count,
    orthosymplectic_to_unitary,
    random_orthogonal_symplectic,
    symplectic_form,
    unitary_to_orthosymplectic,
)

VALIDITY_TOL = 1e-9
SYMMETRY_TOL = 1e-10


class Validity(NamedTuple):
    valid: bool
    min_eigenvalue: float


def _as_matrix(V) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 2:
        raise ValueError(f"covariance matrix must be 2m x 2m, got shape {V.shape}")
    return V


def check_symmetric(V, tol: float = SYMMETRY_TOL) -> np.ndarray:
    V = _as_matrix(V)
    if np.max(np.abs(V - V.T)) > tol * max(1.0, np.max(np.abs(V))):
        raise ValueError("covariance matrix is not symmetric")
    return 0.5 * (V + V.T)


def validate(V, tol: float = VALIDITY_TOL) -> Validity:
    """Uncertainty-relation check: smallest eigenvalue of ``V + iJ``."""
    V = check_symmetric(V)
    J = symplectic_form(V.shape[0] // 2)
    lo = float(np.linalg.eigvalsh(V + 1j * J)[0])
    return Validity(lo >= -tol, lo)


def require_valid(V) -> np.ndarray:
    V = check_symmetric(V)
    ok, lo = validate(V)
    if not ok:
        raise InvalidStateError(f"V + iJ has eigenvalue {lo:.3g} < 0")
    return V


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state with covariance ``V`` and displacement ``xi``."""

    V: np.ndarray
    xi: np.ndarray = None

    def __post_init__(self):
        V = require_valid(self.V)
        xi = np.zeros(V.shape[0]) if self.xi is None else np.asarray(self.xi, dtype=float)
        if xi.shape != (V.shape[0],):
            raise ValueError(f"displacement must have length {V.shape[0]}")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "xi", xi)

    @property
    def m(self) -> int:
        return self.V.shape[0] // 2

    @property
    def displaced(self) -> bool:
        return bool(np.any(self.xi != 0))


def gaussian_density(V, y) -> np.ndarray:
    """Normalised centred Gaussian ``N(0, V)`` at ``y`` (vectorised over leading axes)."""
    V = np.asarray(V, dtype=float)
    y = np.asarray(y, dtype=float)
    sign, logdet = np.linalg.slogdet(V)
    if sign <= 0:
        raise np.linalg.LinAlgError("covariance matrix is singular or not positive definite")
    quad = np.einsum("...i,ij,...j->...", y, np.linalg.inv(V), y)
    n = V.shape[0]
    return np.exp(-0.5 * quad - 0.5 * logdet - 0.5 * n * np.log(2 * np.pi))


def gaussian_wigner(state: GaussianState, beta):
    return gaussian_density(state.V, np.asarray(beta, dtype=float) - state.xi)


def gaussian_characteristic(state: GaussianState, alpha):
    """``exp(-(a, V a)/2 + i (xi, a))``."""
    alpha = np.asarray(alpha, dtype=float)
    quad = np.einsum("...i,ij,...j->...", alpha, state.V, alpha)
    return np.exp(-0.5 * quad + 1j * (alpha @ state.xi))


def gaussian_purity(V) -> float:
    return float(1.0 / np.sqrt(np.linalg.det(V)))


# --- decompositions ---------------------------------------------------------


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """``V = S^t Delta S`` with S symplectic and Delta the symplectic spectrum."""

    S: np.ndarray
    Delta: np.ndarray

    @property
    def spectrum(self) -> np.ndarray:
        m = self.S.shape[0] // 2
        return np.diag(self.Delta)[:m].copy()


@dataclass(frozen=True)
class BlochMessiahDecomposition:
    """``S = Oprime K O`` with ``O``, ``Oprime`` orthogonal symplectic."""

    Oprime: np.ndarray
    K: np.ndarray
    O: np.ndarray


@dataclass(frozen=True)
class PurificationSplit:
    """``V = Vs + Vc``: a pure squeezed part and positive classical noise.

    ``O`` and ``K`` are kept so that ``Vs = O^t K^2 O``.
    """

    Vs: np.ndarray
    Vc: np.ndarray
    O: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)

    @property
    def V(self) -> np.ndarray:
        return self.Vs + self.Vc


def _sqrtm_pd(V):
    w, U = np.linalg.eigh(V)
    if w[0] <= 0:
        raise InvalidStateError("covariance matrix is not positive definite")
    return (U * np.sqrt(w)) @ U.T, (U / np.sqrt(w)) @ U.T


def williamson(V) -> WilliamsonDecomposition:
    """Williamson normal form of a positive-definite covariance matrix.

    Symplectic eigenvalues are sorted in descending order and duplicated at
    positions ``(i, m+i)``.
    """
    V = check_symmetric(V)
    m = mode_count(V)
    vh, vmh = _sqrtm_pd(V)
    M = vmh @ symplectic_form(m) @ vmh
    M = 0.5 * (M - M.T)
    # i M is Hermitian; its eigenvalues come in pairs +-1/d.
    w, U = np.linalg.eigh(1j * M)
    omega = w[m:]
    u = U[:, m:] * np.sqrt(2.0)
    W = np.hstack([u.real, u.imag])
    d = 1.0 / omega
    delta = np.concatenate([d, d])
    S = (W.T @ vh) / np.sqrt(delta)[:, None]
    return WilliamsonDecomposition(S=S, Delta=np.diag(delta))


def symplectic_spectrum(V) -> np.ndarray:
    return williamson(V).spectrum


def _symplectic_eigenbasis(P, tol: float = 1e-9) -> np.ndarray:
    """Orthogonal symplectic O whose rows diagonalise a positive symplectic P.

    Rows ``0..m-1`` carry the eigenvalues below one (ascending); rows
    ``m..2m-1`` are their J images.
    """
    m = P.shape[0] // 2
    lam, U = np.linalg.eigh(P)
    chosen = []

    def residual(v):
        for c in chosen:
            v = v - (c @ v) * c
            jc = apply_J(c)
            v = v - (jc @ v) * jc
        return v

    low = np.flatnonzero(lam < 1 - tol)
    for i in low:
        v = residual(U[:, i])
        chosen.append(v / np.linalg.norm(v))
    cluster = [U[:, i] for i in np.flatnonzero(np.abs(lam - 1) <= tol)]
    while len(chosen) < m:
        # pivot on the cluster vector least covered by the basis built so far
        res = [residual(v) for v in cluster]
        v = max(res, key=np.linalg.norm)
        chosen.append(v / np.linalg.norm(v))
    E = np.array(chosen)
    # snap to the nearest exactly orthogonal symplectic matrix (polar factor)
    z = E[:, :m] + 1j * E[:, m:]
    a, _, bh = np.linalg.svd(z)
    z = a @ bh
    E = np.hstack([z.real, z.imag])
    return np.vstack([E, apply_J(E)])


def bloch_messiah(S, tol: float = 1e-8) -> BlochMessiahDecomposition:
    S = np.asarray(S, dtype=float)
    m = mode_count(S)
    J = symplectic_form(m)
    if np.max(np.abs(S.T @ J @ S - J)) > tol * max(1.0, np.linalg.norm(S) ** 2):
        raise ValueError("matrix is not symplectic")
    P = S.T @ S
    P = 0.5 * (P + P.T)
    O = _symplectic_eigenbasis(P)
    k2 = np.einsum("ij,jk,ik->i", O[:m], P, O[:m])
    k = np.sqrt(k2)
    K = np.diag(np.concatenate([k, 1.0 / k]))
    Oprime = S @ O.T @ np.diag(1.0 / np.diag(K))
    return BlochMessiahDecomposition(Oprime=Oprime, K=K, O=O)


def purification_split(V) -> PurificationSplit:
    V = require_valid(V)
    bm = bloch_messiah(williamson(V).S)
    Vs = bm.O.T @ bm.K @ bm.K @ bm.O
    Vs = 0.5 * (Vs + Vs.T)
    return PurificationSplit(Vs=Vs, Vc=V - Vs, O=bm.O, K=bm.K)


def supermode_basis(split: PurificationSplit, tol: float = 1e-8) -> SymplecticBasis:
    """Symplectic eigenbasis of the pure part; flagged when it is not unique."""
    ev = np.sort(np.diag(split.K) ** 2)
    degenerate = bool(np.any(np.diff(ev) <= tol * ev[1:]))
    return SymplecticBasis(split.O, degenerate=degenerate)


# --- constructors -----------------------------------------------------------


def vacuum(m: int) -> np.ndarray:
    return np.eye(2 * m)


def thermal(m: int, nu: float) -> np.ndarray:
    return nu * np.eye(2 * m)


def two_mode_squeezed(s_db: float) -> np.ndarray:
    """Symmetric two-mode squeezed vacuum in its supermode basis.

    Both amplitude quadratures have variance ``10**(-s/10)`` (s in dB).
    """
    a = 10.0 ** (-s_db / 10.0)
    return np.diag([a, a, 1 / a, 1 / a])


def add_noise(V, delta: float) -> np.ndarray:
    """``V + delta * 1``: isotropic classical noise in units of shot noise."""
    V = np.asarray(V, dtype=float)
    return V + delta * np.eye(V.shape[0])


def squeezing_matrix(db) -> np.ndarray:
    """Diagonal symplectic K with amplitude variances ``10**(-db/10)``."""
    db = np.atleast_1d(np.asarray(db, dtype=float))
    k = 10.0 ** (-db / 20.0)
    return np.diag(np.concatenate([k, 1 / k]))


def random_symplectic(m: int, rng=None, max_db: float = 6.0) -> np.ndarray:
    rng = np.random.default_rng(rng)
    O1 = random_orthogonal_symplectic(m, rng)
    O2 = random_orthogonal_symplectic(m, rng)
    return O1 @ squeezing_matrix(rng.uniform(0, max_db, size=m)) @ O2


def random_covariance(m: int, rng=None, max_db: float = 6.0, max_nu: float = 2.0,
                      pure: bool = False) -> np.ndarray:
    """Random valid covariance ``S^t Delta S``; ``pure`` forces Delta = 1."""
    rng = np.random.default_rng(rng)
    S = random_symplectic(m, rng, max_db)
    nu = np.ones(m) if pure else rng.uniform(1.0, max_nu, size=m)
    V = S.T @ np.diag(np.concatenate([nu, nu])) @ S
    return 0.5 * (V + V.T)


# --- JSON i/o ---------------------------------------------------------------


def covariance_from_dict(d: dict) -> np.ndarray:
    if d.get("ordering") != "xxpp":
        raise ValueError('covariance JSON must declare "ordering": "xxpp"')
    V = _as_matrix(d["V"])
    if "m" in d and int(d["m"]) != V.shape[0] // 2:
        raise ValueError(f"declared m={d['m']} does not match a {V.shape[0]}x{V.shape[0]} matrix")
    return check_symmetric(V)


def covariance_to_dict(V) -> dict:
    V = _as_matrix(V)
    return {"m": V.shape[0] // 2, "ordering": "xxpp", "V": V.tolist()}


def load_covariance(path) -> np.ndarray:
    return covariance_from_dict(json.loads(Path(path).read_text()))


def dump_covariance(V, path) -> None:
    Path(path).write_text(json.dumps(covariance_to_dict(V), indent=2) + "\n")


__all__ = [
    "BlochMessiahDecomposition",
    "GaussianState",
    "PurificationSplit",
    "Validity",
    "WilliamsonDecomposition",
    "add_noise",
    "bloch_messiah",
    "covariance_from_dict",
    "covariance_to_dict",
    "dump_covariance",
    "gaussian_characteristic",
    "gaussian_density",
    "gaussian_purity",
    "gaussian_wigner",
    "load_covariance",
    "orthosymplectic_to_unitary",
    "purification_split",
    "random_covariance",
    "random_symplectic",
    "squeezing_matrix",
    "supermode_basis",
    "symplectic_spectrum",
    "thermal",
    "two_mode_squeezed",
    "unitary_to_orthosymplectic",
    "vacuum",
    "validate",
    "williamson",
]
