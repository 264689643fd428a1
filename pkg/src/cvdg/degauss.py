"""Single-photon addition and subtraction on Gaussian states.

Everything non-Gaussian about the resulting state is carried by the induced
correlation matrix

    A = 2 (V +- 1) Pbar (V +- 1) / tr{(V +- 1) Pbar},

where ``Pbar = sum_k gamma_k (P_gk + P_Jgk)`` is the weighted projector of the
modes in which the photon is added (+) or subtracted (-).
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateNoiseError, VacuumSubtractionError
from .gaussian import GaussianState, PurificationSplit, gaussian_density
from .phasespace import MODE_TOL, apply_J, check_mode, mode_projector


class Sign(enum.IntEnum):
    SUBTRACT = -1
    ADD = 1

    @classmethod
    def parse(cls, value) -> "Sign":
        if isinstance(value, Sign):
            return value
        if isinstance(value, str):
            try:
                return cls[value.upper()]
            except KeyError:
                raise ValueError(f"sign must be 'subtract' or 'add', got {value!r}") from None
        return cls(int(value))


class Negativity(enum.Enum):
    NEGATIVE = "negative"
    TOUCHES_ZERO = "touches-zero"
    NON_NEGATIVE = "non-negative"


@dataclass(frozen=True)
class SubtractionSpec:
    """Photon addition or subtraction in a weighted mixture of modes.

    ``modes`` is a ``(k, 2m)`` array of normalised mode vectors and
    ``gammas`` their probabilities. With ``orthogonal_mixture`` set, the
    modes must also be pairwise orthogonal as modes (g_i orthogonal to g_j and Jg_j).
    """

    sign: Sign
    modes: np.ndarray
    gammas: np.ndarray
    orthogonal_mixture: bool = False

    def __post_init__(self):
        sign = Sign.parse(self.sign)
        modes = np.atleast_2d(np.asarray(self.modes, dtype=float))
        gammas = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        if gammas.shape != (modes.shape[0],):
            raise ValueError("need exactly one weight per mode")
        if np.any(gammas < 0) or abs(gammas.sum() - 1) > 1e-10:
            raise ValueError("weights must be non-negative and sum to one")
        for g in modes:
            check_mode(g)
        if self.orthogonal_mixture:
            gram = modes @ modes.T
            sym = modes @ apply_J(modes).T
            if (np.max(np.abs(gram - np.eye(len(modes)))) > MODE_TOL
                    or np.max(np.abs(sym)) > MODE_TOL):
                raise ValueError("mixture modes are not mutually orthogonal")
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "gammas", gammas)

    @classmethod
    def single(cls, g, sign) -> "SubtractionSpec":
        return cls(sign, np.atleast_2d(g), np.ones(1))

    @classmethod
    def uniform(cls, modes, sign, orthogonal: bool = True) -> "SubtractionSpec":
        modes = np.atleast_2d(modes)
        k = len(modes)
        return cls(sign, modes, np.full(k, 1.0 / k), orthogonal_mixture=orthogonal)

    @property
    def m(self) -> int:
        return self.modes.shape[1] // 2

    def components(self):
        """Single-mode specs, one per mixture component."""
        return [SubtractionSpec.single(g, self.sign) for g in self.modes]

    def projector(self) -> np.ndarray:
        """Weighted projector sum over the mixture."""
        return sum(gam * mode_projector(g) for g, gam in zip(self.modes, self.gammas))

    @classmethod
    def from_dict(cls, d: dict) -> "SubtractionSpec":
        comps = d["components"]
        return cls(
            Sign.parse(d["sign"]),
            np.array([c["g"] for c in comps], dtype=float),
            np.array([c["gamma"] for c in comps], dtype=float),
            orthogonal_mixture=bool(d.get("orthogonal_mixture", False)),
        )

    def to_dict(self) -> dict:
        d = {
            "sign": self.sign.name.lower(),
            "components": [{"g": g.tolist(), "gamma": float(gam)}
                           for g, gam in zip(self.modes, self.gammas)],
        }
        if self.orthogonal_mixture:
            d["orthogonal_mixture"] = True
        return d


def mean_photon_number(V, g) -> float:
    """``<n(g)> = ((g, V g) + (Jg, V Jg) - 2) / 4`` in a centred Gaussian state."""
    g = check_mode(g)
    jg = apply_J(g)
    V = np.asarray(V, dtype=float)
    return float((g @ V @ g + jg @ V @ jg - 2.0) / 4.0)


def _shifted(V, sign: Sign) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    return V + int(sign) * np.eye(V.shape[0])


def induced_matrix(V, spec: SubtractionSpec) -> np.ndarray:
    """Induced correlation matrix for the (mixed) process ``spec``."""
    W = _shifted(V, spec.sign)
    P = spec.projector()
    denom = np.trace(W @ P)
    if denom <= 1e-12 * np.trace(_shifted(V, Sign.ADD)):
        raise VacuumSubtractionError("cannot subtract from vacuum-like mode")
    A = 2.0 * W @ P @ W / denom
    return 0.5 * (A + A.T)


@dataclass(frozen=True)
class DegaussedState:
    """Gaussian state after adding or subtracting one photon.

    ``A`` is computed once on construction and reused by every evaluation.
    """

    base: GaussianState
    spec: SubtractionSpec

    def __post_init__(self):
        if self.spec.m != self.base.m:
            raise ValueError("mode count of spec and state differ")
        try:
            A = induced_matrix(self.base.V, self.spec)
        except VacuumSubtractionError:
            # a displaced vacuum still has photons to subtract
            if not self.base.displaced:
                raise
            A = None
        if self.base.displaced:
            displaced_weights(self.base.V, self.base.xi, self.spec)
        object.__setattr__(self, "_A", A)

    @classmethod
    def from_covariance(cls, V, spec: SubtractionSpec, xi=None) -> "DegaussedState":
        return cls(GaussianState(V, xi), spec)

    @property
    def A(self) -> np.ndarray:
        if self._A is None:
            raise VacuumSubtractionError("no induced matrix: the centred state has no photons in these modes")
        return self._A

    @property
    def V(self) -> np.ndarray:
        return self.base.V

    @property
    def sign(self) -> Sign:
        return self.spec.sign

    @property
    def m(self) -> int:
        return self.base.m

    def wigner(self, beta):
        """Wigner function, using the displaced formula when ``xi != 0``."""
        if self.base.displaced:
            return displaced_mixture_wigner(self.base, self.spec, beta)
        return degauss_wigner(self, beta)


def _require_centred(state: DegaussedState):
    if state.base.displaced:
        raise ValueError("closed form needs a non-displaced base state; "
                         "use displaced_degauss_wigner instead")


def degauss_characteristic(state: DegaussedState, alpha):
    """``(1 - (a, A a)/2) exp(-(a, V a)/2)``."""
    _require_centred(state)
    alpha = np.asarray(alpha, dtype=float)
    qa = np.einsum("...i,ij,...j->...", alpha, state.A, alpha)
    qv = np.einsum("...i,ij,...j->...", alpha, state.V, alpha)
    return (1.0 - 0.5 * qa) * np.exp(-0.5 * qv) + 0j


def _wigner_polynomial(Vinv, A, y):
    M = Vinv @ A @ Vinv
    return 0.5 * (np.einsum("...i,ij,...j->...", y, M, y) - np.trace(Vinv @ A) + 2.0)


def degauss_wigner(state: DegaussedState, beta):
    """Closed-form Wigner function: quadratic polynomial times the Gaussian."""
    _require_centred(state)
    beta = np.asarray(beta, dtype=float)
    Vinv = np.linalg.inv(state.V)
    return _wigner_polynomial(Vinv, state.A, beta) * gaussian_density(state.V, beta)


def negativity_witness(state: DegaussedState) -> float:
    """``tr(V^-1 A)``; the Wigner function takes negative values iff it exceeds 2."""
    return float(np.trace(np.linalg.solve(state.V, state.A)))


def classify_negativity(witness: float, tol: float = 1e-12) -> Negativity:
    if witness > 2 + tol:
        return Negativity.NEGATIVE
    if witness >= 2 - tol:
        return Negativity.TOUCHES_ZERO
    return Negativity.NON_NEGATIVE


def negativity_witness_overlap_form(V, spec: SubtractionSpec) -> float:
    """``sum_k gamma_k [(g_k, V^-1 g_k) + (Jg_k, V^-1 Jg_k)]``.

    Subtraction yields negativity iff this exceeds 2; for addition the
    corresponding condition (> -2) always holds.
    """
    Vinv = np.linalg.inv(np.asarray(V, dtype=float))
    return float(np.trace(Vinv @ spec.projector()))


class ZeroManifold(NamedTuple):
    """Ellipsoid ``(beta, M beta) = level`` on which the Wigner function vanishes."""

    M: np.ndarray
    level: float

    @property
    def empty(self) -> bool:
        return self.level < 0


def zero_manifold(state: DegaussedState) -> ZeroManifold:
    Vinv = np.linalg.inv(state.V)
    return ZeroManifold(Vinv @ state.A @ Vinv, float(np.trace(Vinv @ state.A)) - 2.0)


def displaced_mean_photon_number(V, xi, g) -> float:
    g = check_mode(g)
    xi = np.asarray(xi, dtype=float)
    return mean_photon_number(V, g) + 0.25 * ((xi @ g) ** 2 + (xi @ apply_J(g)) ** 2)


def displaced_degauss_wigner(base: GaussianState, sign, g, beta):
    """Wigner function after adding/subtracting a photon in mode g of a
    displaced Gaussian state (pure single-mode process)."""
    sign = Sign.parse(sign)
    g = check_mode(g)
    V, xi = base.V, base.xi
    eye = np.eye(V.shape[0])
    P = mode_projector(g)
    Vinv = np.linalg.inv(V)
    xi_norm2_Pxi = np.outer(xi, xi)
    denom = np.trace((V + xi_norm2_Pxi + int(sign) * eye) @ P)
    if denom <= 1e-12 * np.trace(V + eye):
        raise VacuumSubtractionError("cannot subtract from vacuum-like mode")
    y = np.asarray(beta, dtype=float) - xi
    B = P @ (eye + int(sign) * Vinv)
    u = np.einsum("ij,...j->...i", B, y)
    norm2 = np.einsum("...i,...i->...", u, u)
    cross = 2.0 * (u @ xi)
    trace_term = np.trace(P @ (xi_norm2_Pxi - Vinv - int(sign) * eye))
    return gaussian_density(V, y) * (norm2 + cross + trace_term) / denom


def displaced_weights(V, xi, spec: SubtractionSpec) -> np.ndarray:
    """Mixture weights for the displaced case (photon numbers include displacement)."""
    V = np.asarray(V, dtype=float)
    xi = np.asarray(xi, dtype=float)
    W = _shifted(V, spec.sign) + np.outer(xi, xi)
    t = np.array([gam * np.trace(W @ mode_projector(g))
                  for g, gam in zip(spec.modes, spec.gammas)])
    if t.sum() <= 1e-12 * np.trace(V + np.eye(len(V))):
        raise VacuumSubtractionError("cannot subtract from vacuum-like mode")
    return t / t.sum()


def displaced_mixture_wigner(base: GaussianState, spec: SubtractionSpec, beta):
    lam = displaced_weights(base.V, base.xi, spec)
    return sum(l * displaced_degauss_wigner(base, spec.sign, g, beta)
               for l, g in zip(lam, spec.modes) if l > 0)


def convex_decomposition_weights(V, spec: SubtractionSpec) -> np.ndarray:
    """Weights ``lambda_k`` with ``W_mix = sum_k lambda_k W_gk``."""
    return displaced_weights(V, np.zeros(np.shape(V)[0]), spec)


class SingularNoiseWarning(UserWarning):
    pass


def noise_density(Vc, xi, tol: float = 1e-10) -> float:
    """Gaussian density of the classical noise ``p_c``.

    A rank-deficient ``Vc`` is handled with its pseudo-inverse on the
    support; a ``SingularNoiseWarning`` flags that case.
    """
    Vc = np.asarray(Vc, dtype=float)
    xi = np.asarray(xi, dtype=float)
    w, U = np.linalg.eigh(0.5 * (Vc + Vc.T))
    scale = max(1.0, float(np.max(np.abs(w))))
    keep = w > tol * scale
    if not np.any(keep):
        raise DegenerateNoiseError("degenerate noise: Vc vanishes")
    if not np.all(keep):
        warnings.warn("Vc is singular; density evaluated on its support",
                      SingularNoiseWarning, stacklevel=3)
    z = xi @ U[:, keep]
    wk = w[keep]
    r = len(wk)
    return float(np.exp(-0.5 * np.sum(z * z / wk) - 0.5 * np.sum(np.log(wk))
                        - 0.5 * r * np.log(2 * np.pi)))


def classical_noise_densities(split: PurificationSplit, g, sign, xi) -> float:
    """Density ``p^+-_c(xi)`` of displacements in the pure-state decomposition."""
    sign = Sign.parse(sign)
    g = check_mode(g)
    xi = np.asarray(xi, dtype=float)
    extra = 1.0 if sign is Sign.ADD else 0.0
    n_s = mean_photon_number(split.Vs, g)
    n_g = mean_photon_number(split.V, g)
    if n_g + extra <= 1e-12:
        raise VacuumSubtractionError("cannot subtract from vacuum-like mode")
    shift = 0.25 * ((xi @ g) ** 2 + (xi @ apply_J(g)) ** 2)
    return (n_s + extra + shift) / (n_g + extra) * noise_density(split.Vc, xi)
