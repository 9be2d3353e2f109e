"""Hyperbolic functional calculus of a symmetric pair-excitation kernel ``k``.

    sh(k) = k + k∘k̄∘k/3! + ...        ch(k) = δ + k̄∘k/2! + ...

Series are truncated at the first depth where the factorial tail bound
``b^(2m+1)/(2m+1)!`` (``b`` the operator norm of ``k``) drops below the
requested tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import Grid
from .kernels import SYMMETRY_TOL, compose, operator_matrix, operator_norm

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class PairKernel:
    k: np.ndarray
    grid: Grid
    series_tol: float = 1e-15

    def __post_init__(self):
        k = self.k
        scale = max(float(np.max(np.abs(k))), 1.0)
        if np.max(np.abs(k - k.T)) > SYMMETRY_TOL * scale:
            raise ValueError("pair kernel k must be symmetric")

    @property
    def op_norm_bound(self) -> float:
        return operator_norm(self.k, self.grid)


def series_depth(bound: float, tol: float, parity: int) -> int:
    """Smallest ``m`` such that the first omitted term and its tail are below ``tol``.

    ``parity`` is 1 for sh (odd powers) and 0 for ch (even powers).  Relative
    to the leading term the tail is bounded by a geometric series.
    """
    if not math.isfinite(bound):
        raise ValueError("operator norm of k is not finite")
    m = 0
    while True:
        p = 2 * (m + 1) + parity
        term = bound**p / math.factorial(p)
        ratio = bound**2 / ((p + 1) * (p + 2))
        if ratio < 1 and term / (1 - ratio) < tol:
            return m
        m += 1
        if m > 500:
            raise ValueError(f"series for |k| = {bound:.3g} does not converge to tol {tol:g}")


def _as_pair(k, grid: Grid | None, tol: float) -> PairKernel:
    if isinstance(k, PairKernel):
        return k
    if grid is None:
        raise TypeError("a grid is required when k is a plain array")
    return PairKernel(np.asarray(k, dtype=complex), grid, tol)


def sh(k, grid: Grid | None = None, tol: float = 1e-15, depth: int | None = None) -> np.ndarray:
    """``sh(k) = sum_m k∘(k̄∘k)^m / (2m+1)!``."""
    pk = _as_pair(k, grid, tol)
    g, kk = pk.grid, pk.k
    if depth is None:
        depth = series_depth(pk.op_norm_bound, pk.series_tol, 1)
    kbk = compose(np.conj(kk), kk, g)
    term = kk.copy()
    out = term.copy()
    for m in range(depth):
        term = compose(term, kbk, g) / ((2 * m + 2) * (2 * m + 3))
        out += term
    return out


def ch(k, grid: Grid | None = None, tol: float = 1e-15, depth: int | None = None) -> np.ndarray:
    """``ch(k) = δ + sum_{m>=1} (k̄∘k)^m / (2m)!``."""
    pk = _as_pair(k, grid, tol)
    g, kk = pk.grid, pk.k
    if depth is None:
        depth = series_depth(pk.op_norm_bound, pk.series_tol, 0)
    kbk = compose(np.conj(kk), kk, g)
    term = g.delta()
    out = term.copy()
    for m in range(depth):
        term = compose(term, kbk, g) / ((2 * m + 1) * (2 * m + 2))
        out += term
    return out


def sh2k(k, grid: Grid | None = None, tol: float = 1e-15) -> np.ndarray:
    pk = _as_pair(k, grid, tol)
    return sh(PairKernel(2 * pk.k, pk.grid, pk.series_tol))


def ch_inverse(k, grid: Grid | None = None, tol: float = 1e-15) -> np.ndarray:
    """Kernel of the inverse operator of ``ch(k)``."""
    pk = _as_pair(k, grid, tol)
    g = pk.grid
    op = operator_matrix(ch(pk), g)
    cond = np.linalg.cond(op)
    if cond > MAX_CONDITION:
        raise ValueError(f"ch(k) is ill-conditioned (condition number {cond:.3g})")
    return np.linalg.inv(op) / g.weight


class PairDensities(NamedTuple):
    lam_p: np.ndarray
    gam_p: np.ndarray
    p2: np.ndarray
    sh2k: np.ndarray


def pair_densities(k, N: float, grid: Grid | None = None, tol: float = 1e-15) -> PairDensities:
    """``Λ_p = sh(2k)/(2N)``, ``Γ_p = p2/N`` with ``p2 = conj(sh(k))∘sh(k)``."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    pk = _as_pair(k, grid, tol)
    s = sh(pk)
    p2 = compose(np.conj(s), s, pk.grid)
    s2 = sh2k(pk)
    return PairDensities(s2 / (2 * N), p2 / N, p2, s2)
