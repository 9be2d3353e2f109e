"""Two-point kernel algebra on a :class:`~hfbkit.grid.Grid`.

Kernels are dense complex matrices ``A[x, y]``.  Composition is the quadrature
of ``int u(x, z) v(z, y) dz``, i.e. a matrix product scaled by ``h^d``; the
discrete delta is ``I / h^d`` so that it is the identity for composition.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid

SYMMETRY_TOL = 1e-10


def _check_same(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise ValueError(f"kernel shapes differ: {a.shape} vs {b.shape}")


def compose(u: np.ndarray, v: np.ndarray, grid: Grid) -> np.ndarray:
    _check_same(u, v)
    if u.shape != grid.kernel_shape:
        raise ValueError(f"kernel shape {u.shape} does not match grid {grid.kernel_shape}")
    return grid.weight * (u @ v)


def adjoint(a: np.ndarray) -> np.ndarray:
    """``A*(x, y) = conj(A(y, x))``."""
    return np.conj(a).T


def commutator(a: np.ndarray, b: np.ndarray, grid: Grid) -> np.ndarray:
    return compose(a, b, grid) - compose(b, a, grid)


def anticommutator(a: np.ndarray, b: np.ndarray, grid: Grid) -> np.ndarray:
    return compose(a, b, grid) + compose(b, a, grid)


def symmetrize(a: np.ndarray) -> np.ndarray:
    """``A(x, y) + A(y, x)``."""
    return a + a.T


def skew(a: np.ndarray) -> np.ndarray:
    """``A(x, y) - conj(A(y, x))``; the result is anti-hermitian."""
    return a - np.conj(a).T


def diagonal(a: np.ndarray, grid: Grid) -> np.ndarray:
    """Restriction ``A(x, x)`` as a field on ``grid``."""
    return np.diagonal(a).reshape(grid.field_shape).copy()


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(a ⊗ b)(x, y) = a(x) b(y)``."""
    return np.multiply.outer(np.ravel(a), np.ravel(b))


def multiplication_kernel(w: np.ndarray, grid: Grid) -> np.ndarray:
    """Kernel of the operator ``f -> w f``: ``w(x) delta(x - y)``."""
    return np.diag(np.ravel(w)).astype(complex) / grid.weight


def difference_kernel(v: np.ndarray, grid: Grid) -> np.ndarray:
    """Matrix ``V[x, y] = v(x - y)`` for a field ``v`` on the torus."""
    n, d = grid.n, grid.d
    idx = np.indices((n,) * (2 * d))
    diff = tuple((idx[i] - idx[d + i]) % n for i in range(d))
    return np.asarray(v)[diff].reshape(grid.kernel_shape)


def trace(a: np.ndarray, grid: Grid) -> complex:
    """``int A(x, x) dx``."""
    return grid.weight * np.trace(a)


def operator_matrix(a: np.ndarray, grid: Grid) -> np.ndarray:
    """Matrix acting on sample vectors: ``(A f)(x) = h^d sum_y A[x, y] f[y]``."""
    return grid.weight * a


def operator_norm(a: np.ndarray, grid: Grid) -> float:
    return float(np.linalg.norm(operator_matrix(a, grid), 2))


def classify_symmetry(a: np.ndarray, tol: float = SYMMETRY_TOL) -> str:
    """Return ``"symmetric"``, ``"hermitian"``, ``"both"`` or ``"none"``.

    The tolerance is relative to ``max|A|`` (absolute when ``A`` vanishes).
    """
    scale = max(float(np.max(np.abs(a))), 1.0) if a.size else 1.0
    sym = np.max(np.abs(a - a.T)) <= tol * scale
    herm = np.max(np.abs(a - np.conj(a).T)) <= tol * scale
    if sym and herm:
        return "both"
    return "symmetric" if sym else "hermitian" if herm else "none"


def symmetry_residual(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.T)))


def hermiticity_residual(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - np.conj(a).T)))


# --- rotated coordinates ------------------------------------------------------


def _rotation_index(grid: Grid):
    n, d = grid.n, grid.d
    if n % 2 == 0:
        raise ValueError("rotated coordinates need an odd number of points per axis")
    inv2 = (n + 1) // 2
    idx = np.indices((n,) * (2 * d))
    u, w = idx[:d], idx[d:]
    xs = tuple(((u[i] + w[i]) * inv2) % n for i in range(d))
    ys = tuple(((w[i] - u[i]) * inv2) % n for i in range(d))
    return xs + ys


def rotate(a: np.ndarray, grid: Grid) -> np.ndarray:
    """View ``A`` in the coordinates ``u = x - y``, ``w = x + y`` (mod ``L``).

    Returns ``B`` with ``B[u, w] = A[x, y]``; rows are indexed by ``u``.  The
    index map is a bijection of the lattice torus for odd ``n``.  Norms over
    ``(u, w)`` with weight ``h^d`` on each slot equal the continuum rotated
    norms up to the fixed Jacobian :data:`ROTATION_JACOBIAN`.
    """
    shape = a.shape[:-2]
    full = a.reshape(shape + (grid.n,) * (2 * grid.d))
    sel = (Ellipsis,) + _rotation_index(grid)
    return full[sel].reshape(shape + grid.kernel_shape)


def unrotate(b: np.ndarray, grid: Grid) -> np.ndarray:
    """Inverse of :func:`rotate`."""
    n, d = grid.n, grid.d
    if n % 2 == 0:
        raise ValueError("rotated coordinates need an odd number of points per axis")
    shape = b.shape[:-2]
    full = b.reshape(shape + (n,) * (2 * d))
    idx = np.indices((n,) * (2 * d))
    x, y = idx[:d], idx[d:]
    us = tuple((x[i] - y[i]) % n for i in range(d))
    ws = tuple((x[i] + y[i]) % n for i in range(d))
    return full[(Ellipsis,) + us + ws].reshape(shape + grid.kernel_shape)


# d(x-y) d(x+y) = 2^d dx dy in the continuum; the lattice index map uses unit
# steps in both u and w, so discrete rotated norms carry this factor squared
# away.  Boundedness checks never depend on it.
ROTATION_JACOBIAN = 1.0


# --- 2x2 operator matrices ----------------------------------------------------


def block(gamma: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Operator matrix ``[[-Γ, -conj(Λ)], [Λ, conj(Γ)]]`` as a ``2M x 2M`` array."""
    return np.block([[-gamma, -np.conj(lam)], [lam, np.conj(gamma)]])


def unblock(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Recover ``(Γ, Λ)`` from :func:`block` output."""
    k = m.shape[0] // 2
    return -m[:k, :k], m[k:, :k]


@dataclass
class MatrixState:
    """Pair block ``psi`` and condensate block ``phi`` of ``Ω = Ψ + Φ``."""

    t: float
    psi: np.ndarray
    phi: np.ndarray

    @classmethod
    def from_kernels(cls, t, lam_p, gam_p, lam_c, gam_c) -> "MatrixState":
        return cls(t, block(gam_p, lam_p), block(gam_c, lam_c))

    @property
    def omega(self) -> np.ndarray:
        return self.psi + self.phi

    @staticmethod
    def s3(npts: int) -> np.ndarray:
        """``S_3 = diag(-I, I)`` as a sign vector of length ``2 npts``."""
        return np.concatenate([-np.ones(npts), np.ones(npts)])

    def kernels(self):
        """``(lam_p, gam_p, lam_c, gam_c)`` extracted from the blocks."""
        gp, lp = unblock(self.psi)
        gc, lc = unblock(self.phi)
        return lp, gp, lc, gc
