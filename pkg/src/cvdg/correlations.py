"""Moments, truncated correlations and cumulants.

All quantities are ordered products ``<Q(f_1) ... Q(f_n)>``; nothing is
symmetrised, so complex values appear whenever the arguments do not commute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .degauss import DegaussedState
from .gaussian import require_valid
from .phasespace import apply_J

MAX_MATCHING_ORDER = 12
MAX_RECURSION_ORDER = 8

Pairing = tuple[tuple[int, int], ...]
Partition = tuple[tuple[int, ...], ...]


@lru_cache(maxsize=None)
def pair_partitions(n: int) -> tuple[Pairing, ...]:
    """All perfect matchings of ``range(n)`` in canonical order."""
    if n % 2:
        raise ValueError(f"pair partitions need an even number of points, got {n}")
    if n > MAX_MATCHING_ORDER:
        raise ValueError(f"order {n} exceeds the guard {MAX_MATCHING_ORDER}")

    def rec(items):
        if not items:
            yield ()
            return
        first, rest = items[0], items[1:]
        for j, partner in enumerate(rest):
            for tail in rec(rest[:j] + rest[j + 1:]):
                yield ((first, partner),) + tail

    return tuple(rec(tuple(range(n))))


def set_partitions(n: int):
    """Yield all set partitions of ``range(n)`` via restricted-growth strings.

    Blocks are sorted tuples, ordered by their smallest element.
    """
    if n == 0:
        yield ()
        return
    a = [0] * n
    while True:
        blocks: list[list[int]] = [[] for _ in range(max(a) + 1)]
        for i, b in enumerate(a):
            blocks[b].append(i)
        yield tuple(tuple(b) for b in blocks)
        # next restricted-growth string
        i = n - 1
        while i > 0 and a[i] > max(a[:i]):
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0


def even_partitions(n: int):
    """Set partitions of ``range(n)`` whose blocks all have even size."""
    for p in set_partitions(n):
        if all(len(b) % 2 == 0 for b in p):
            yield p


@dataclass(frozen=True)
class CentredGaussian:
    """Centred Gaussian state viewed as a degaussed state with ``A = 0``.

    Lets the correlation routines run on plain Gaussian states.
    """

    V: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "V", require_valid(self.V))

    @property
    def A(self) -> np.ndarray:
        return np.zeros_like(self.V)


def _check_centred(state):
    base = getattr(state, "base", None)
    if base is not None and base.displaced:
        raise ValueError("moments are only implemented for centred states")


def gaussian_two_point(V, f1, f2) -> complex:
    """``(f1, V f2) - i (f1, J f2)``."""
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    return complex(f1 @ np.asarray(V) @ f2, -(f1 @ apply_J(f2)))


def _pair_tables(state: DegaussedState, fs):
    F = np.asarray(fs, dtype=float)
    G = F @ state.V @ F.T - 1j * (F @ apply_J(F).T)
    Amat = F @ state.A @ F.T
    return G, Amat


def degauss_moment(state: DegaussedState, fs: Sequence) -> complex:
    """Ordered moment ``tr(rho Q(f_1)...Q(f_n))`` of a centred degaussed state.

    Wick sum over pairings where at most one pair carries ``(f_i, A f_j)``
    instead of the Gaussian two-point function.
    """
    _check_centred(state)
    n = len(fs)
    if n > MAX_RECURSION_ORDER:
        raise ValueError(f"order {n} exceeds the guard {MAX_RECURSION_ORDER}")
    if n % 2:
        return 0j
    if n == 0:
        return 1 + 0j
    G, Amat = _pair_tables(state, fs)
    total = 0j
    for p in pair_partitions(n):
        g = np.array([G[i, j] for i, j in p])
        a = np.array([Amat[i, j] for i, j in p])
        total += np.prod(g)
        for k in range(len(p)):
            total += a[k] * np.prod(np.delete(g, k))
    return complex(total)


def truncated_correlation_recursive(state: DegaussedState, fs: Sequence) -> complex:
    """Truncated correlation from moments by recursion over set partitions.

    ``<Q_1..Q_n>_T = <Q_1..Q_n> - sum_{proper partitions} prod <Q_B>_T``,
    with each block keeping the original operator order.
    """
    n = len(fs)
    if n > MAX_RECURSION_ORDER:
        raise ValueError(f"order {n} exceeds the guard {MAX_RECURSION_ORDER}")
    fs = [np.asarray(f, dtype=float) for f in fs]

    @lru_cache(maxsize=None)
    def trunc(idx: tuple[int, ...]) -> complex:
        moment = degauss_moment(state, [fs[i] for i in idx])
        if len(idx) == 1:
            return moment
        acc = 0j
        for p in set_partitions(len(idx)):
            if len(p) == 1:
                continue
            term = 1 + 0j
            for block in p:
                term *= trunc(tuple(idx[i] for i in block))
                if term == 0:
                    break
            acc += term
        return moment - acc

    return trunc(tuple(range(n)))


def truncated_correlation_closed(state: DegaussedState, fs: Sequence) -> complex:
    """Closed form: ``(-1)^(k-1) (k-1)! sum_pairings prod (f_i, A f_j)`` for 2k > 2.

    Order two also carries the Gaussian two-point function.
    """
    n = len(fs)
    if n > MAX_MATCHING_ORDER:
        raise ValueError(f"order {n} exceeds the guard {MAX_MATCHING_ORDER}")
    if n % 2 or n == 0:
        return 0j
    G, Amat = _pair_tables(state, fs)
    if n == 2:
        return complex(G[0, 1] + Amat[0, 1])
    k = n // 2
    s = sum(np.prod([Amat[i, j] for i, j in p]) for p in pair_partitions(n))
    return complex((-1) ** (k - 1) * math.factorial(k - 1) * s)


def cumulant(state: DegaussedState, f, n: int) -> float:
    """``<Q(f)^n>_T`` for identical arguments."""
    if n > MAX_MATCHING_ORDER:
        raise ValueError(f"order {n} exceeds the guard {MAX_MATCHING_ORDER}")
    if n < 1:
        raise ValueError("order must be positive")
    f = np.asarray(f, dtype=float)
    if n % 2:
        return 0.0
    fAf = float(f @ state.A @ f)
    if n == 2:
        return float(f @ state.V @ f) + fAf
    k = n // 2
    # (2k-1)!! matchings, all equal
    matchings = math.prod(range(1, n, 2))
    return float((-1) ** (k - 1) * math.factorial(k - 1) * matchings * fAf ** k)
