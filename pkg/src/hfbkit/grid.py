"""Periodic lattice, discrete Fourier transforms and Fourier multipliers.

Fields live on the torus ``[0, L)^d`` sampled at ``n`` points per axis.  A
one-point field has shape ``(n,)*d``; a two-point kernel is stored as a dense
``(n**d, n**d)`` matrix whose row index is ``x`` and column index is ``y``
(row-major flattening of the ``d`` axis indices).

The forward transform is the unnormalized DFT and the inverse divides by the
number of points, i.e. numpy's default convention.  With this choice

    h^d * sum |f|^2  ==  (h^d / n^d) * sum |fhat|^2 .
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

BINDINGS = ("x", "y", "x-y", "x+y", "xy", "t")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid in ``d`` dimensions."""

    d: int
    n: int
    L: float
    h: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "h", self.L / self.n)

    @property
    def npts(self) -> int:
        return self.n**self.d

    @property
    def field_shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def kernel_shape(self) -> tuple[int, int]:
        return (self.npts, self.npts)

    @property
    def weight(self) -> float:
        """Quadrature weight ``h**d`` of one lattice point."""
        return self.h**self.d

    @property
    def x(self) -> np.ndarray:
        """Coordinates ``j*h``, ``j = 0..n-1`` along one axis."""
        return np.arange(self.n) * self.h

    @property
    def freq(self) -> np.ndarray:
        """Angular frequencies ``2*pi*j/L`` along one axis, in FFT order.

        For even ``n`` the unpaired Nyquist mode is negative.
        """
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @property
    def max_freq(self) -> float:
        """Largest lattice frequency modulus (Euclidean over the ``d`` axes)."""
        return float(np.max(np.abs(self.freq))) * math.sqrt(self.d)

    def coords(self) -> np.ndarray:
        """Coordinate mesh of shape ``(d, n, ..., n)``."""
        return np.array(np.meshgrid(*([self.x] * self.d), indexing="ij"))

    def field_freqs(self) -> np.ndarray:
        """Frequency mesh of shape ``(d, n, ..., n)`` matching field spectra."""
        return np.array(np.meshgrid(*([self.freq] * self.d), indexing="ij"))

    def kernel_freqs(self) -> tuple[np.ndarray, np.ndarray]:
        """Frequency meshes ``(xi, eta)`` for kernel spectra of shape ``(n,)*2d``."""
        k = self.freq
        mesh = np.meshgrid(*([k] * (2 * self.d)), indexing="ij")
        return np.array(mesh[: self.d]), np.array(mesh[self.d :])

    def delta(self) -> np.ndarray:
        """Discrete delta kernel: identity scaled by ``1/h^d``."""
        return np.eye(self.npts, dtype=complex) / self.weight


def make_grid(d: int, n: int, L: float) -> Grid:
    if d not in (1, 2, 3):
        raise ValueError(f"dimension d must be 1, 2 or 3, got {d}")
    if int(n) != n or n < 4:
        raise ValueError(f"need at least 4 points per axis, got n={n}")
    if not math.isfinite(L) or L <= 0:
        raise ValueError(f"torus length must be finite and positive, got L={L}")
    return Grid(int(d), int(n), float(L))


def _kind(values: np.ndarray, grid: Grid) -> str:
    """``"kernel"`` or ``"field"`` from the trailing axes (leading axes form a batch)."""
    if values.shape[-2:] == grid.kernel_shape and values.ndim >= 2:
        return "kernel"
    if values.shape[values.ndim - grid.d:] == grid.field_shape:
        return "field"
    raise ValueError(
        f"array of shape {values.shape} is neither a field {grid.field_shape} "
        f"nor a kernel {grid.kernel_shape} on this grid"
    )


def _check_trailing(values: np.ndarray, grid: Grid, kind: str) -> int:
    base = grid.field_shape if kind == "field" else grid.kernel_shape
    nb = values.ndim - len(base)
    if nb < 0 or values.shape[nb:] != base:
        raise ValueError(f"shape {values.shape} does not end with {kind} shape {base}")
    return nb


def to_spectrum(values: np.ndarray, grid: Grid, kind: str | None = None) -> np.ndarray:
    """Unnormalized DFT over the spatial axes.

    Leading axes are treated as a batch (e.g. time) when ``kind`` is given.
    Kernel spectra are returned with shape ``batch + (n,)*2d`` so that the
    first ``d`` frequency axes pair with ``x`` and the last ``d`` with ``y``.
    """
    values = np.asarray(values)
    kind = kind or _kind(values, grid)
    nb = _check_trailing(values, grid, kind)
    if kind == "kernel":
        values = values.reshape(values.shape[:nb] + (grid.n,) * (2 * grid.d))
    axes = tuple(range(nb, values.ndim))
    return np.fft.fftn(values, axes=axes)


def from_spectrum(spec: np.ndarray, grid: Grid, kind: str) -> np.ndarray:
    """Inverse of :func:`to_spectrum`; kernels come back as matrices."""
    spec = np.asarray(spec)
    naxes = grid.d if kind == "field" else 2 * grid.d
    nb = spec.ndim - naxes
    if nb < 0 or spec.shape[nb:] != (grid.n,) * naxes:
        raise ValueError(f"spectrum of shape {spec.shape} does not match a {kind}")
    out = np.fft.ifftn(spec, axes=tuple(range(nb, spec.ndim)))
    if kind == "kernel":
        out = out.reshape(spec.shape[:nb] + grid.kernel_shape)
    return out


def norm_l2(values: np.ndarray, grid: Grid) -> float:
    """L^2 norm with quadrature weight ``h^d`` per spatial point.

    Kernels use weight ``h^(2d)`` per entry.
    """
    values = np.asarray(values)
    w = grid.weight if _kind(values, grid) == "field" else grid.weight**2
    return float(np.sqrt(w * np.sum(np.abs(values) ** 2)))


# --- smooth cutoff profile ---------------------------------------------------


def _smooth_exp(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=float)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def bump_profile(s) -> np.ndarray:
    """C-infinity radial profile: 1 on ``|s| <= 1``, 0 on ``|s| >= 2``."""
    a = np.abs(np.asarray(s, dtype=float))
    up = _smooth_exp(2.0 - a)
    down = _smooth_exp(a - 1.0)
    return up / (up + down)


def vector_norm(k: np.ndarray) -> np.ndarray:
    """Euclidean norm over the leading (component) axis."""
    return np.sqrt(np.sum(np.asarray(k) ** 2, axis=0))


# --- multipliers --------------------------------------------------------------


@dataclass(frozen=True)
class Multiplier:
    """Fourier multiplier with the frequency variable it reads.

    ``symbol`` receives a frequency-vector array with the ``d`` components on
    its leading axis (for ``binding == "xy"`` it receives ``(xi, eta)``; for
    ``"t"`` a one-dimensional array of angular time frequencies).
    """

    symbol: Callable
    binding: str = "x"
    name: str = ""

    def __post_init__(self):
        if self.binding not in BINDINGS:
            raise ValueError(f"unknown binding {self.binding!r}; choose from {BINDINGS}")

    def evaluate_pair(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        b = self.binding
        if b == "xy":
            return np.asarray(self.symbol(xi, eta))
        if b == "t":
            raise ValueError("time multiplier cannot act on spatial frequencies")
        k = {"x": xi, "y": eta, "x+y": xi + eta, "x-y": xi - eta}[b]
        return np.asarray(self.symbol(k))

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        if not isinstance(other, Multiplier):
            return NotImplemented
        name = f"{self.name}*{other.name}"
        if self.binding == other.binding and self.binding != "xy":
            s1, s2 = self.symbol, other.symbol
            return Multiplier(lambda k: s1(k) * s2(k), self.binding, name)
        if "t" in (self.binding, other.binding):
            raise ValueError("cannot fuse a time multiplier with a spatial one")
        a, b = self, other
        return Multiplier(lambda xi, eta: a.evaluate_pair(xi, eta) * b.evaluate_pair(xi, eta),
                          "xy", name)


def bessel(alpha: float, binding: str = "x") -> Multiplier:
    """``<nabla>^alpha``, symbol ``(1 + |k|^2)^(alpha/2)``."""
    return Multiplier(lambda k: (1.0 + np.sum(k**2, axis=0)) ** (alpha / 2), binding,
                      f"<D_{binding}>^{alpha:g}")


def riesz(alpha: float, binding: str = "x") -> Multiplier:
    """``|nabla|^alpha``, symbol ``|k|^alpha`` (zero at ``k = 0`` for ``alpha > 0``)."""
    def sym(k):
        r = vector_norm(k)
        return r**alpha if alpha != 0 else np.ones_like(r)
    return Multiplier(sym, binding, f"|D_{binding}|^{alpha:g}")


def cutoff(M: float, binding: str = "x") -> Multiplier:
    """Smooth low-pass ``P_{|k| < M}`` built from :func:`bump_profile`."""
    return Multiplier(lambda k: bump_profile(vector_norm(k) / M), binding, f"P<{M:g}")


def time_riesz(power: float) -> Multiplier:
    return Multiplier(lambda tau: np.abs(tau) ** power, "t", f"|D_t|^{power:g}")


def apply_multiplier(m: Multiplier, values: np.ndarray, grid: Grid, *, kind: str | None = None,
                     frame_dt: float | None = None) -> np.ndarray:
    """Multiply the spectrum of a field, kernel or series by ``m``'s symbol.

    Leading axes beyond the field/kernel shape are a batch.  A time-bound
    multiplier needs a series (leading axis = time) and its frame spacing.
    """
    values = np.asarray(values)
    kind = kind or _kind(values, grid)
    nb = _check_trailing(values, grid, kind)
    if m.binding == "t":
        if frame_dt is None or nb < 1:
            raise ValueError("a time multiplier acts on a trajectory, not a single time slice")
        nt = values.shape[0]
        tau = 2 * np.pi * np.fft.fftfreq(nt, d=frame_dt)
        sym = np.asarray(m.symbol(tau)).reshape((nt,) + (1,) * (values.ndim - 1))
        return np.fft.ifft(np.fft.fft(values, axis=0) * sym, axis=0)
    if kind == "field":
        if m.binding not in ("x",):
            raise ValueError(f"binding {m.binding!r} needs a two-point kernel")
        sym = np.asarray(m.symbol(grid.field_freqs()))
    else:
        xi, eta = grid.kernel_freqs()
        sym = m.evaluate_pair(xi, eta)
    if not np.all(np.isfinite(sym)):
        raise ValueError(f"multiplier {m.name!r} is not finite on the lattice")
    spec = to_spectrum(values, grid, kind)
    return from_spectrum(spec * sym, grid, kind)
