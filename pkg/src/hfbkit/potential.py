"""Scaled pair interaction ``V_N``, its per-particle form ``v_M`` and the main/tail split."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .grid import Grid, bump_profile, from_spectrum, to_spectrum, vector_norm

# plateau radius of the frequency-split profile, in units of M
SPLIT_PLATEAU = 0.1


def bump(r, r0: float = 1.0, c: float = 1.0) -> np.ndarray:
    """``c * exp(-1 / (1 - (r/r0)^2))`` for ``r < r0``, zero outside."""
    s2 = (np.asarray(r, dtype=float) / r0) ** 2
    out = np.zeros_like(s2)
    inside = s2 < 1
    out[inside] = c * np.exp(-1.0 / (1.0 - s2[inside]))
    return out


def _sphere_area(d: int) -> float:
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


@dataclass(frozen=True)
class PotentialSpec:
    """Radial bump profile ``v`` together with the scaling parameters.

    ``amplitude=None`` normalizes ``int v = 1`` in dimension ``d``.
    ``strength`` multiplies the profile; ``strength=0`` switches the
    interaction off entirely.
    """

    beta: float = 0.5
    N: float = 16.0
    eps: float = 0.1
    r0: float = 1.0
    amplitude: float | None = None
    d: int = 1
    strength: float = 1.0

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.r0 <= 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")

    @property
    def M(self) -> float:
        return self.N ** (self.beta + self.eps)

    @cached_property
    def c(self) -> float:
        if self.amplitude is not None:
            return self.amplitude
        return 1.0 / bump_integral(self.r0, 1.0, self.d)

    @property
    def mass(self) -> float:
        """Closed-form ``int v dx`` (radial quadrature)."""
        return self.strength * self.c * bump_integral(self.r0, 1.0, self.d)

    def profile(self, r) -> np.ndarray:
        return self.strength * bump(r, self.r0, self.c)


def bump_integral(r0: float, c: float, d: int) -> float:
    """``int_{R^d} bump(|x|) dx`` by one-dimensional radial quadrature."""
    f = lambda s: math.exp(-1.0 / (1.0 - s * s)) * s ** (d - 1) if s < 1 else 0.0
    val, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    if d == 1:
        return 2 * c * r0 * val
    return c * r0**d * _sphere_area(d) * val


def _torus_radius(grid: Grid) -> np.ndarray:
    x = grid.coords()
    x = np.minimum(x, grid.L - x)
    return vector_norm(x)


def sample_VN(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    """``V_N(x) = N^(d beta) v(N^beta x)`` sampled on the torus (minimal image)."""
    if spec.d != grid.d:
        raise ValueError(f"potential built for d={spec.d}, grid has d={grid.d}")
    scale = spec.N**spec.beta
    if spec.r0 / scale >= grid.L / 2:
        raise ValueError(
            f"support radius r0/N^beta = {spec.r0 / scale:.4g} overlaps itself on a torus of side {grid.L}"
        )
    return spec.N ** (grid.d * spec.beta) * spec.profile(scale * _torus_radius(grid))


def sample_vM(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    """Per-particle potential ``v_M = V_N / N``."""
    return sample_VN(spec, grid) / spec.N


class PotentialSplit(NamedTuple):
    main: np.ndarray
    tail: np.ndarray

    @property
    def tail_sup(self) -> float:
        return float(np.max(np.abs(self.tail)))


def split_profile(s) -> np.ndarray:
    """Frequency-split profile: 1 for ``|s| <= 0.1``, 0 for ``|s| >= 0.2``."""
    return bump_profile(np.asarray(s) / SPLIT_PLATEAU)


def split_main_tail(spec: PotentialSpec, grid: Grid) -> PotentialSplit:
    """Split ``v_M`` into a band-limited main part and a small tail.

    The main part has spectrum ``v_M^(xi) * split_profile(|xi| / M)``,
    supported in ``|xi| <= 0.2 M``.  A roll-off band that straddles the
    lattice edge cannot be represented and is rejected; a cutoff entirely
    beyond the lattice gives a zero tail.
    """
    M = spec.M
    lo, hi = SPLIT_PLATEAU * M, 2 * SPLIT_PLATEAU * M
    nyq = np.pi / grid.h
    if hi > nyq and lo < grid.max_freq:
        raise ValueError(
            f"split roll-off [{lo:.4g}, {hi:.4g}] crosses the lattice Nyquist frequency {nyq:.4g}"
        )
    vm = sample_vM(spec, grid)
    mult = split_profile(vector_norm(grid.field_freqs()) / M)
    main = from_spectrum(to_spectrum(vm, grid) * mult, grid, "field").real
    return PotentialSplit(main, vm - main)


def convolve_density(V: np.ndarray, rho: np.ndarray, grid: Grid) -> np.ndarray:
    """Periodic convolution ``(V * rho)(x) = int V(x - z) rho(z) dz``."""
    V, rho = np.asarray(V), np.asarray(rho)
    if V.shape != grid.field_shape or rho.shape != grid.field_shape:
        raise ValueError("potential and density must be fields on the same grid")
    out = grid.weight * np.fft.ifftn(np.fft.fftn(V) * np.fft.fftn(rho))
    if np.isrealobj(V) and np.isrealobj(rho):
        return out.real
    return out


def lp_norm(f: np.ndarray, grid: Grid, p: float) -> float:
    """``L^p`` norm of a field with weight ``h^d``."""
    a = np.abs(np.asarray(f))
    if math.isinf(p):
        return float(a.max())
    return float((grid.weight * np.sum(a**p)) ** (1.0 / p))


def scaling_exponent(d: int, beta: float, p: float, prefactor: float = -1.0) -> float:
    """Exponent of ``N`` in ``|| N^(d beta + prefactor) v(N^beta .) ||_{L^p}``."""
    return d * beta + prefactor - d * beta / p


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
