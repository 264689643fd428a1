"""Truncated Fock-space oracle for one or two modes.

Brute force and slow, but independent of every closed-form expression in the
package: states are built as density matrices, photons are added or removed
with explicit ladder matrices and the Wigner function is read off the
displaced parity.

Conventions: ``X = a + a^dag`` and ``P = -i (a - a^dag)`` so the vacuum has
unit quadrature variance, and ``a(g) = sum_i (g_x,i - i g_p,i) a_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm, logm
from scipy.special import eval_genlaguerre, gammaln

from .degauss import Sign
from .errors import CutoffError, VacuumSubtractionError
from .gaussian import bloch_messiah, require_valid, williamson
from .phasespace import check_mode, orthosymplectic_to_unitary, symplectic_form

DEFAULT_CUTOFF = 25
LEAKAGE_TOL = 1e-6
MAX_MODES = 2
# extra levels kept while the unitaries act, so edge effects stay out of the
# retained block
PAD = 20


@dataclass(frozen=True)
class FockState:
    """Density matrix over the product basis ``|n_1, .., n_m>``, ``n_i <= cutoff``.

    ``leakage`` is the probability lost to truncation before renormalising.
    """

    rho: np.ndarray
    cutoff: int
    m: int
    leakage: float = 0.0

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    def tensor(self) -> np.ndarray:
        d = self.dim
        return self.rho.reshape((d,) * (2 * self.m))


def _check_m(m):
    if not 1 <= m <= MAX_MODES:
        raise ValueError(f"the Fock oracle handles 1 or 2 modes, got {m}")


@lru_cache(maxsize=None)
def _annihilation(dim: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, dim)), 1, format="csr")


def ladder(m: int, dim: int) -> list[sp.csr_matrix]:
    """Annihilation operators ``a_1..a_m`` on the truncated product space."""
    a = _annihilation(dim)
    eye = sp.identity(dim, format="csr")
    if m == 1:
        return [a]
    return [sp.kron(a, eye, format="csr"), sp.kron(eye, a, format="csr")]


def quadratures(m: int, dim: int) -> list[sp.csr_matrix]:
    """``[X_1..X_m, P_1..P_m]`` as sparse matrices."""
    a = ladder(m, dim)
    xs = [ai + ai.getH() for ai in a]
    ps = [-1j * (ai - ai.getH()) for ai in a]
    return xs + ps


def mode_annihilation(g, dim: int) -> sp.csr_matrix:
    g = check_mode(g)
    m = len(g) // 2
    _check_m(m)
    coeff = g[:m] - 1j * g[m:]
    return sum(c * ai for c, ai in zip(coeff, ladder(m, dim)))


def _quadratic_hamiltonian(H, m, dim):
    """``Q^t H Q / 2`` for symmetric real H."""
    Q = quadratures(m, dim)
    H = 0.5 * (H + H.T)
    out = sp.csr_matrix((dim**m, dim**m), dtype=complex)
    for i in range(2 * m):
        for j in range(2 * m):
            if H[i, j] != 0:
                out = out + H[i, j] * (Q[i] @ Q[j])
    return 0.5 * out


def _generator(L, m, dim):
    """Hamiltonian whose unitary U satisfies ``U^dag Q U = exp(L)^t Q``."""
    J = symplectic_form(m)
    return _quadratic_hamiltonian(0.5 * J @ L.T, m, dim)


def _orthosymplectic_log(O):
    u = orthosymplectic_to_unitary(O)
    lu = logm(u)
    # anti-Hermitian log of a unitary
    lu = 0.5 * (lu - lu.conj().T)
    re, im = lu.real, lu.imag
    return np.block([[re, -im], [im, re]])


def _passive_apply(vectors, O, m, dim):
    """Apply the linear-optics unitary of O.

    Its generator conserves total photon number, so it is exponentiated
    exactly on each fixed-number block of the product basis.
    """
    L = _orthosymplectic_log(O)
    if np.max(np.abs(L)) < 1e-14:
        return vectors
    H = _generator(L, m, dim).tocsr()
    total = np.sum(_multi_index(m, dim), axis=1)
    out = np.empty_like(vectors)
    for N in np.unique(total):
        idx = np.flatnonzero(total == N)
        block = H[idx][:, idx].toarray()
        out[idx] = expm(-1j * block) @ vectors[idx]
    return out


def _squeeze_apply(vectors, k, m, dim):
    """Apply the product of single-mode squeezers with amplitude factors k."""
    mats = []
    for ki in k:
        L = np.diag([np.log(ki), -np.log(ki)])
        mats.append(expm(-1j * _generator(L, 1, dim).toarray()))
    if m == 1:
        return mats[0] @ vectors
    t = vectors.reshape(dim, dim, -1)
    t = np.einsum("ia,jb,abk->ijk", mats[0], mats[1], t, optimize=True)
    return t.reshape(dim * dim, -1)


def _apply_symplectic(vectors, S, m, dim):
    """Act on state columns with the unitary implementing the symplectic S."""
    bm = bloch_messiah(S)
    # U = U_O U_K U_O', applied right to left
    vectors = _passive_apply(vectors, bm.Oprime, m, dim)
    vectors = _squeeze_apply(vectors, np.diag(bm.K)[:m], m, dim)
    return _passive_apply(vectors, bm.O, m, dim)


def _multi_index(m, dim):
    return np.array(np.unravel_index(np.arange(dim**m), (dim,) * m)).T


def _box_indices(m, big, small):
    idx = _multi_index(m, big)
    return np.flatnonzero(np.all(idx < small, axis=1))


def displacement_matrix(gamma: complex, dim: int) -> np.ndarray:
    """Exact matrix elements ``<j|D(gamma)|k>`` of ``exp(gamma a^dag - gamma* a)``."""
    j = np.arange(dim)[:, None]
    k = np.arange(dim)[None, :]
    lo = np.minimum(j, k)
    diff = np.abs(j - k)
    r2 = abs(gamma) ** 2
    lag = eval_genlaguerre(lo, diff, r2)
    pref = np.exp(0.5 * (gammaln(lo + 1) - gammaln(lo + diff + 1)) - 0.5 * r2)
    phase = np.where(j >= k, gamma ** diff, (-np.conj(gamma)) ** diff)
    return pref * phase * lag


def _displacement(xi, m, dim):
    xi = np.asarray(xi, dtype=float)
    mats = [displacement_matrix(0.5 * (xi[i] + 1j * xi[m + i]), dim) for i in range(m)]
    return mats[0] if m == 1 else np.kron(mats[0], mats[1])


def _truncate(cols, weights, m, big, cutoff, tol):
    """Density matrix of the mixture of ``cols`` restricted to the cutoff box.

    Leakage is measured against the trace in the padded space.
    """
    total = float(np.sum(weights * np.sum(np.abs(cols) ** 2, axis=0)))
    keep = _box_indices(m, big, cutoff + 1)
    c = cols[keep]
    kept = float(np.sum(weights * np.sum(np.abs(c) ** 2, axis=0)))
    leakage = 1.0 - kept / total
    if leakage > tol:
        raise CutoffError(f"truncation at {cutoff} photons loses {leakage:.3g} probability")
    rho = (c * weights) @ c.conj().T / kept
    return 0.5 * (rho + rho.conj().T), max(leakage, 0.0)


def _gaussian_columns(V, xi, big):
    """Pure-state columns and weights whose mixture is the Gaussian state."""
    V = require_valid(V)
    m = V.shape[0] // 2
    _check_m(m)
    xi = np.zeros(2 * m) if xi is None else np.asarray(xi, dtype=float)
    wd = williamson(V)
    nbar = np.maximum((wd.spectrum - 1.0) / 2.0, 0.0)

    # thermal populations, product over modes
    n = np.arange(big)
    probs = []
    for nb in nbar:
        p = np.zeros(big)
        if nb == 0:
            p[0] = 1.0
        else:
            p = (nb / (nb + 1)) ** n / (nb + 1)
        probs.append(p)
    pop = probs[0] if m == 1 else np.kron(probs[0], probs[1])
    support = np.flatnonzero(pop > 1e-16)
    cols = np.zeros((big**m, len(support)), dtype=complex)
    cols[support, np.arange(len(support))] = 1.0

    cols = _apply_symplectic(cols, wd.S, m, big)
    if np.any(xi != 0):
        cols = _displacement(xi, m, big) @ cols
    return cols, pop[support], m


def build_gaussian(V, xi=None, cutoff: int = DEFAULT_CUTOFF,
                   leakage_tol: float = LEAKAGE_TOL) -> FockState:
    """Gaussian density matrix from its covariance and displacement.

    Thermal occupations from the symplectic spectrum, then squeezing and
    passive optics from Bloch-Messiah, then displacement. Everything is done
    in a padded space and cut back to ``cutoff`` at the end.
    """
    big = cutoff + 1 + PAD
    cols, w, m = _gaussian_columns(V, xi, big)
    rho, leak = _truncate(cols, w, m, big, cutoff, leakage_tol)
    return FockState(rho, cutoff, m, leak)


def build_degaussed(V, xi, spec, cutoff: int = DEFAULT_CUTOFF,
                    leakage_tol: float = LEAKAGE_TOL) -> FockState:
    """Photon-added/subtracted Gaussian state, truncated only at the very end.

    Applying the ladder operators before truncation means the leakage check
    sees the tail of the final state, which the photon-number weighting can
    make much heavier than the Gaussian's.
    """
    big = cutoff + 2 + PAD
    cols, w, m = _gaussian_columns(V, xi, big)
    if spec.m != m:
        raise ValueError("mode and state differ in mode count")
    sign = Sign.parse(spec.sign)
    out_cols, out_w = [], []
    for g, gam in zip(spec.modes, spec.gammas):
        if gam == 0:
            continue
        a = mode_annihilation(g, big)
        op = a.getH() if sign is Sign.ADD else a
        out_cols.append(op @ cols)
        out_w.append(gam * w)
    cols = np.hstack(out_cols)
    w = np.concatenate(out_w)
    norm = float(np.sum(w * np.sum(np.abs(cols) ** 2, axis=0)))
    if norm <= 1e-12:
        raise VacuumSubtractionError("cannot subtract from vacuum-like mode")
    rho, leak = _truncate(cols, w, m, big, cutoff, leakage_tol)
    return FockState(rho, cutoff, m, leak)


def fock_state(ns, cutoff: int = DEFAULT_CUTOFF) -> FockState:
    """Number state ``|n_1, .., n_m>``."""
    ns = list(ns)
    m = len(ns)
    _check_m(m)
    dim = cutoff + 1
    idx = np.ravel_multi_index(ns, (dim,) * m)
    rho = np.zeros((dim**m, dim**m), dtype=complex)
    rho[idx, idx] = 1.0
    return FockState(rho, cutoff, m)


def _pad(state: FockState, extra: int) -> FockState:
    m, d, new = state.m, state.dim, state.dim + extra
    idx = _box_indices(m, new, d)
    rho = np.zeros((new**m, new**m), dtype=complex)
    rho[np.ix_(idx, idx)] = state.rho
    return FockState(rho, state.cutoff + extra, m, state.leakage)


def apply_mode_operator(state: FockState, g, sign) -> tuple[FockState, float]:
    """``a(g) rho a^dag(g)`` (or the creation analogue), renormalised.

    Returns the new state and the trace ratio, which equals ``<n(g)>`` for
    subtraction and ``<n(g)> + 1`` for addition. Addition grows the cutoff
    by one so nothing is truncated.
    """
    sign = Sign.parse(sign)
    g = check_mode(g)
    if len(g) // 2 != state.m:
        raise ValueError("mode and state differ in mode count")
    if sign is Sign.ADD:
        state = _pad(state, 1)
    a = mode_annihilation(g, state.dim)
    op = a.getH() if sign is Sign.ADD else a
    tmp = op @ state.rho
    new = (op @ tmp.conj().T).conj().T
    tr = float(np.trace(new).real)
    if tr <= 1e-12:
        raise VacuumSubtractionError("cannot subtract from vacuum-like mode")
    new = new / tr
    return FockState(0.5 * (new + new.conj().T), state.cutoff, state.m, state.leakage), tr


def apply_mode_mixture(state: FockState, spec) -> FockState:
    """Impure process: ``sum_k gamma_k O_k rho O_k^dag`` normalised as a whole."""
    parts = []
    for g, gam in zip(spec.modes, spec.gammas):
        if gam == 0:
            continue
        new, tr = apply_mode_operator(state, g, spec.sign)
        parts.append((gam * tr, new))
    total = sum(w for w, _ in parts)
    rho = sum(w * s.rho for w, s in parts) / total
    first = parts[0][1]
    return FockState(rho, first.cutoff, first.m, first.leakage)


def _parity_displacement(gamma, dim):
    D = displacement_matrix(gamma, dim)
    return D * ((-1.0) ** np.arange(dim))[None, :]


def fock_wigner(state: FockState, beta) -> float:
    """``W(beta) = (2 pi)^-m tr(rho D(x + ip) Pi)`` per mode."""
    beta = np.asarray(beta, dtype=float)
    m, d = state.m, state.dim
    mats = [_parity_displacement(beta[i] + 1j * beta[m + i], d) for i in range(m)]
    if m == 1:
        val = np.sum(state.rho.T * mats[0])
    else:
        r = state.tensor()  # indices (n1, n2, n1', n2')
        # tr(rho (A kron B)) = sum rho[n1 n2, k1 k2] A[k1, n1] B[k2, n2]
        val = np.einsum("abcd,ca,db->", r, mats[0], mats[1])
    return float(val.real / (2 * np.pi) ** m)


def fock_moment(state: FockState, fs) -> complex:
    """``tr(rho Q(f_1) ... Q(f_n))`` with the operators in the given order."""
    n = len(fs)
    if n > 4:
        raise ValueError("oracle moments are limited to order 4")
    padded = _pad(state, n)
    Q = quadratures(state.m, padded.dim)
    ops = [sum(c * q for c, q in zip(np.asarray(f, dtype=float), Q)) for f in fs]
    vec = padded.rho
    for op in reversed(ops):
        vec = op @ vec
    return complex(np.trace(vec))


def fock_purity(state: FockState) -> float:
    return float(np.real(np.vdot(state.rho.conj().T, state.rho)))


def partial_trace(state: FockState, keep: int) -> FockState:
    """Reduce a two-mode state to mode ``keep`` (0 or 1)."""
    if state.m != 2:
        raise ValueError("partial trace needs a two-mode state")
    r = state.tensor()
    red = np.einsum("abcb->ac", r) if keep == 0 else np.einsum("abad->bd", r)
    return FockState(red, state.cutoff, 1, state.leakage)


def mean_photons(state: FockState) -> float:
    n = np.sum(_multi_index(state.m, state.dim), axis=1)
    return float(np.real(np.diag(state.rho)) @ n)


def _escalate(build, cutoffs):
    for c in cutoffs[:-1]:
        try:
            return build(c)
        except CutoffError:
            pass
    return build(cutoffs[-1])


def build_gaussian_adaptive(V, xi=None, cutoffs=(25, 35, 45, 60),
                            leakage_tol: float = 1e-7) -> FockState:
    """``build_gaussian`` at the first cutoff in ``cutoffs`` that keeps leakage below tol."""
    return _escalate(lambda c: build_gaussian(V, xi, c, leakage_tol), cutoffs)


def build_degaussed_adaptive(V, xi, spec, cutoffs=(25, 35, 45, 60),
                             leakage_tol: float = 1e-7) -> FockState:
    """``build_degaussed`` with the cutoff raised until leakage is below tol."""
    return _escalate(lambda c: build_degaussed(V, xi, spec, c, leakage_tol), cutoffs)
