"""Time integration of the Hartree-Fock-Bogoliubov system.

Conventions (``A_x`` the annihilation field scaled by ``N^-1/2``)::

    Γ(x, y) = <A*_x A_y> = conj(φ(x)) φ(y) + Γ_p(x, y)
    Λ(x, y) = <A_x A_y>  = φ(x) φ(y)       + Λ_p(x, y)

Component form, with ``S = (1/i)∂_t - Δ_x - Δ_y``, ``u = V_N * ρ`` and
``V A`` the entrywise product ``V_N(x - y) A(x, y)``::

    S Λ_p = -{u, Λ_p} - (V/N) Λ_p - ((VΓ̄_p)∘Λ_p + (VΛ_p)∘Γ_p)_symm
            - ((VΓ̄_c)∘Λ_p + (VΛ_c)∘Γ_p)_symm - (V/N) Λ_c
    S Λ_c = -{u, Λ_c} - ((VΓ̄_p)∘Λ_c + (VΛ_p)∘Γ_c)_symm
    ((1/i)∂_t + Δ_x - Δ_y) Γ_p = [u, Γ_p] + ((VΓ_p)∘Γ_p + (VΛ̄_p)∘Λ_p)_skew
                                 + ((VΓ_c)∘Γ_p + (VΛ̄_c)∘Λ_p)_skew
    ((1/i)∂_t + Δ_x - Δ_y) Γ_c = [u, Γ_c] + ((VΓ_p)∘Γ_c + (VΛ̄_p)∘Λ_c)_skew
    ((1/i)∂_t - Δ) φ = -u φ - ∫V(x-y) Γ_p(y, x) φ(y) dy - ∫V(x-y) Λ_p(x, y) φ̄(y) dy

The Γ equations are written with the time orientation that matches
``Γ_c = φ̄ ⊗ φ`` and the 2x2 matrix form; :func:`rhs_matrix` integrates the
matrix form independently.  Time stepping is Strang splitting: exact
spectral free flow for half a step, an explicit-midpoint step of the
nonlinear part, another half step of free flow.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .bogoliubov import pair_densities
from .grid import Grid, bessel, apply_multiplier, riesz
from .kernels import (
    MatrixState,
    difference_kernel,
    hermiticity_residual,
    skew,
    symmetrize,
    symmetry_residual,
    tensor,
)
from .potential import PotentialSpec, convolve_density, sample_VN

log = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    """Raised when a run produces non-finite values; carries the partial trajectory."""

    def __init__(self, message, trajectory=None, state=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.state = state


@dataclass(frozen=True)
class Interaction:
    """Sampled pair potential on a grid together with the particle number ``N``."""

    grid: Grid
    V: np.ndarray
    N: float

    @classmethod
    def from_spec(cls, spec: PotentialSpec, grid: Grid) -> "Interaction":
        return cls(grid, sample_VN(spec, grid), spec.N)

    @classmethod
    def zero(cls, grid: Grid, N: float = 1.0) -> "Interaction":
        return cls(grid, np.zeros(grid.field_shape), N)

    @cached_property
    def Vmat(self) -> np.ndarray:
        return difference_kernel(self.V, self.grid)

    def mean_field(self, rho: np.ndarray) -> np.ndarray:
        return convolve_density(self.V, rho, self.grid)


@dataclass
class StateHFB:
    """Condensate ``φ`` and pair densities ``Λ_p`` (symmetric), ``Γ_p`` (hermitian).

    When ``phi`` is ``None`` the condensate kernels ``lam_c_k``/``gam_c_k`` are
    carried directly instead of being rebuilt from ``φ``.
    """

    t: float
    phi: np.ndarray | None
    lam_p: np.ndarray
    gam_p: np.ndarray
    lam_c_k: np.ndarray | None = None
    gam_c_k: np.ndarray | None = None

    def __post_init__(self):
        if self.phi is None and (self.lam_c_k is None or self.gam_c_k is None):
            raise ValueError("state needs either phi or both condensate kernels")

    @property
    def lam_c(self) -> np.ndarray:
        if self.lam_c_k is not None:
            return self.lam_c_k
        return tensor(self.phi, self.phi)

    @property
    def gam_c(self) -> np.ndarray:
        if self.gam_c_k is not None:
            return self.gam_c_k
        return tensor(np.conj(self.phi), self.phi)

    @property
    def lam(self) -> np.ndarray:
        return self.lam_c + self.lam_p

    @property
    def gam(self) -> np.ndarray:
        return self.gam_c + self.gam_p

    def rho(self, grid: Grid) -> np.ndarray:
        return np.real(np.diagonal(self.gam)).reshape(grid.field_shape)

    def condensate_density(self, grid: Grid) -> np.ndarray:
        if self.phi is not None:
            return np.abs(self.phi) ** 2
        return np.real(np.diagonal(self.gam_c_k)).reshape(grid.field_shape)

    def arrays(self) -> dict:
        out = {"lam_p": self.lam_p, "gam_p": self.gam_p}
        if self.phi is not None:
            out["phi"] = self.phi
        if self.lam_c_k is not None:
            out["lam_c"] = self.lam_c_k
            out["gam_c"] = self.gam_c_k
        return out

    @classmethod
    def from_arrays(cls, t: float, a: dict) -> "StateHFB":
        return cls(t, a.get("phi"), a["lam_p"], a["gam_p"], a.get("lam_c"), a.get("gam_c"))

    def with_condensate_kernels(self) -> "StateHFB":
        """Same state with ``Λ_c``, ``Γ_c`` carried as kernels (no ``φ``)."""
        return StateHFB(self.t, None, self.lam_p.copy(), self.gam_p.copy(),
                        self.lam_c.copy(), self.gam_c.copy())


class ComponentRHS(NamedTuple):
    d_lam_p: np.ndarray
    d_gam_p: np.ndarray
    d_lam_c: np.ndarray
    d_gam_c: np.ndarray
    d_phi: np.ndarray | None


def _nonlinear(a: dict, inter: Interaction) -> dict:
    """Time derivative of the nonlinear part for the arrays in ``a``."""
    g = inter.grid
    w = g.weight
    V = inter.Vmat
    N = inter.N
    phi = a.get("phi")
    lam_p, gam_p = a["lam_p"], a["gam_p"]
    if "lam_c" in a:
        lam_c, gam_c = a["lam_c"], a["gam_c"]
    else:
        lam_c, gam_c = tensor(phi, phi), tensor(np.conj(phi), phi)

    rho = np.real(np.diagonal(gam_c) + np.diagonal(gam_p)).reshape(g.field_shape)
    u = np.ravel(inter.mean_field(rho))
    u_sum = u[:, None] + u[None, :]
    u_diff = u[:, None] - u[None, :]

    vl_p, vg_p = V * lam_p, V * gam_p
    vl_c, vg_c = V * lam_c, V * gam_c
    vgb_p, vlb_p = np.conj(vg_p), np.conj(vl_p)
    vgb_c, vlb_c = np.conj(vg_c), np.conj(vl_c)

    out = {}
    nl = -u_sum * lam_p - vl_p / N - vl_c / N
    nl -= symmetrize(w * (vgb_p @ lam_p) + w * (vl_p @ gam_p))
    nl -= symmetrize(w * (vgb_c @ lam_p) + w * (vl_c @ gam_p))
    out["lam_p"] = 1j * nl

    ng = u_diff * gam_p
    ng += skew(w * (vg_p @ gam_p) + w * (vlb_p @ lam_p))
    ng += skew(w * (vg_c @ gam_p) + w * (vlb_c @ lam_p))
    out["gam_p"] = 1j * ng

    if "lam_c" in a:
        nlc = -u_sum * lam_c - symmetrize(w * (vgb_p @ lam_c) + w * (vl_p @ gam_c))
        ngc = u_diff * gam_c + skew(w * (vg_p @ gam_c) + w * (vlb_p @ lam_c))
        out["lam_c"] = 1j * nlc
        out["gam_c"] = 1j * ngc

    if phi is not None:
        f = np.ravel(phi)
        nphi = -u * f - w * (vg_p.T @ f) - w * (vl_p @ np.conj(f))
        out["phi"] = 1j * nphi.reshape(g.field_shape)
    return out


def rhs_component(state: StateHFB, inter: Interaction) -> ComponentRHS:
    """Nonlinear time derivatives of every component, assembled term by term.

    ``d_lam_c``/``d_gam_c`` are always returned (from the condensate
    equations for the kernels); ``d_phi`` is ``None`` for kernel-carried states.
    """
    a = state.arrays()
    if "lam_c" not in a:
        a = dict(a, lam_c=state.lam_c, gam_c=state.gam_c)
    out = _nonlinear(a, inter)
    return ComponentRHS(out["lam_p"], out["gam_p"], out["lam_c"], out["gam_c"], out.get("phi"))


# --- free flow ----------------------------------------------------------------


class FreeFlow:
    """Exact spectral propagators for the kinetic parts over a fixed time ``tau``."""

    def __init__(self, grid: Grid, tau: float):
        self.grid = grid
        self.tau = tau
        k2 = np.sum(grid.field_freqs() ** 2, axis=0)
        xi, eta = grid.kernel_freqs()
        x2, y2 = np.sum(xi**2, axis=0), np.sum(eta**2, axis=0)
        self.phi = np.exp(-1j * tau * k2)
        self.lam = np.exp(-1j * tau * (x2 + y2))
        self.gam = np.exp(1j * tau * (x2 - y2))

    def _kernel(self, a: np.ndarray, phase: np.ndarray) -> np.ndarray:
        g = self.grid
        full = a.reshape((g.n,) * (2 * g.d))
        return np.fft.ifftn(np.fft.fftn(full) * phase).reshape(a.shape)

    def apply(self, a: dict) -> dict:
        out = {}
        for key, val in a.items():
            if key == "phi":
                out[key] = np.fft.ifftn(np.fft.fftn(val) * self.phi)
            elif key.startswith("lam"):
                out[key] = self._kernel(val, self.lam)
            else:
                out[key] = self._kernel(val, self.gam)
        return out

    def apply_blocks(self, m: np.ndarray) -> np.ndarray:
        """Free flow of a ``2M x 2M`` operator matrix ``[[-Γ, -Λ̄], [Λ, Γ̄]]``."""
        k = m.shape[0] // 2
        out = np.empty_like(m)
        out[:k, :k] = self._kernel(m[:k, :k], self.gam)
        out[k:, :k] = self._kernel(m[k:, :k], self.lam)
        out[:k, k:] = self._kernel(m[:k, k:], np.conj(self.lam))
        out[k:, k:] = self._kernel(m[k:, k:], np.conj(self.gam))
        return out


# magnitudes far beyond any normalized state; treated as overflow
BLOWUP = 1e100


def _check_finite(a: dict, t: float):
    for key, val in a.items():
        if not np.all(np.isfinite(val)):
            raise SimulationError(f"non-finite values in {key} at t={t:.6g}")
        if np.max(np.abs(val)) > BLOWUP:
            raise SimulationError(f"overflow in {key} at t={t:.6g}")


def _axpy(a: dict, b: dict, s: float) -> dict:
    return {k: a[k] + s * b[k] for k in a}


def step_strang(state: StateHFB, inter: Interaction, dt: float,
                half: FreeFlow | None = None) -> StateHFB:
    """One Strang step: half free flow, explicit midpoint nonlinear step, half free flow."""
    half = half or FreeFlow(inter.grid, dt / 2)
    a = half.apply(state.arrays())
    k1 = _nonlinear(a, inter)
    mid = _axpy(a, k1, dt / 2)
    k2 = _nonlinear(mid, inter)
    a = half.apply(_axpy(a, k2, dt))
    t = state.t + dt
    _check_finite(a, t)
    return StateHFB.from_arrays(t, a)


# --- matrix form ----------------------------------------------------------------


def _comm(a: np.ndarray, b: np.ndarray, w: float) -> np.ndarray:
    return w * (a @ b - b @ a)


def rhs_matrix(ms: MatrixState, inter: Interaction) -> tuple[np.ndarray, np.ndarray]:
    """Nonlinear time derivatives ``(dΨ/dt, dΦ/dt)`` of the 2x2 operator form::

        (1/i)∂_t Φ - [Δ δ S3, Φ] = -[u δ S3, Φ] - [V Ψ*, Φ]
        (1/i)∂_t Ψ - [Δ δ S3, Ψ] = -[u δ S3, Ψ] - (1/2N)[S3, V Ψ]
                                   - [V Ω*, Ψ] - (1/2N)[S3, V Φ]
    """
    g = inter.grid
    w = g.weight
    k = g.npts
    N = inter.N
    V = np.tile(inter.Vmat, (2, 2))
    psi, phi = ms.psi, ms.phi
    omega = psi + phi
    rho = -np.real(np.diagonal(omega)[:k]).reshape(g.field_shape)
    u = np.ravel(inter.mean_field(rho))
    s3 = MatrixState.s3(k)
    us3 = np.concatenate([u, u]) * s3

    def comm_us3(x):
        return us3[:, None] * x - x * us3[None, :]

    def comm_s3(x):
        return s3[:, None] * x - x * s3[None, :]

    d_phi = -comm_us3(phi) - _comm(V * np.conj(psi).T, phi, w)
    d_psi = (-comm_us3(psi) - comm_s3(V * psi) / (2 * N)
             - _comm(V * np.conj(omega).T, psi, w) - comm_s3(V * phi) / (2 * N))
    return 1j * d_psi, 1j * d_phi


def step_matrix(ms: MatrixState, inter: Interaction, dt: float,
                half: FreeFlow | None = None) -> MatrixState:
    """Strang step of the matrix form (same splitting as :func:`step_strang`)."""
    half = half or FreeFlow(inter.grid, dt / 2)
    psi, phi = half.apply_blocks(ms.psi), half.apply_blocks(ms.phi)
    k1 = rhs_matrix(MatrixState(ms.t, psi, phi), inter)
    mid = MatrixState(ms.t, psi + dt / 2 * k1[0], phi + dt / 2 * k1[1])
    k2 = rhs_matrix(mid, inter)
    psi = half.apply_blocks(psi + dt * k2[0])
    phi = half.apply_blocks(phi + dt * k2[1])
    t = ms.t + dt
    _check_finite({"psi": psi, "phi": phi}, t)
    return MatrixState(t, psi, phi)


def to_matrix_state(state: StateHFB) -> MatrixState:
    return MatrixState.from_kernels(state.t, state.lam_p, state.gam_p, state.lam_c, state.gam_c)


# --- conserved quantities ---------------------------------------------------------


def particle_number(state: StateHFB, grid: Grid) -> float:
    """``tr Γ = ∫ Γ(x, x) dx``."""
    return float(grid.weight * np.real(np.trace(state.gam)))


def kinetic_energy(gam: np.ndarray, grid: Grid) -> float:
    """``tr{∇_x·∇_y Γ}`` as the spectral pairing ``∫ (-Δ_y Γ)(x, x) dx``."""
    lap = apply_multiplier(riesz(2.0, "y"), gam, grid, kind="kernel")
    return float(grid.weight * np.real(np.trace(lap)))


def energy(state: StateHFB, inter: Interaction) -> float:
    """Energy per particle: kinetic term plus the four interaction terms."""
    g = inter.grid
    w2 = g.weight**2
    V = inter.Vmat
    lam, gam = state.lam, state.gam
    rho = state.rho(g)
    rc = np.ravel(state.condensate_density(g))
    r = np.ravel(rho)
    e_kin = kinetic_energy(gam, g)
    e_lam = 0.5 * w2 * np.sum(V * np.abs(lam) ** 2)
    e_gam = 0.5 * w2 * np.sum(V * (np.abs(gam) ** 2 + np.outer(r, r)))
    e_c = w2 * np.sum(V * np.outer(rc, rc))
    return float(e_kin + e_lam + e_gam - e_c)


def min_eig(gam_p: np.ndarray, grid: Grid) -> float:
    h = grid.weight * 0.5 * (gam_p + np.conj(gam_p).T)
    return float(np.linalg.eigvalsh(h)[0])


def monitors(state: StateHFB, inter: Interaction) -> dict:
    g = inter.grid
    return {
        "t": state.t,
        "trace": particle_number(state, g),
        "energy": energy(state, inter),
        "sym_residual": symmetry_residual(state.lam),
        "herm_residual": hermiticity_residual(state.gam),
        "min_eig_gamma_p": min_eig(state.gam_p, g),
    }


MONITOR_COLUMNS = ("t", "trace", "energy", "sym_residual", "herm_residual", "min_eig_gamma_p")


# --- trajectories ----------------------------------------------------------------


@dataclass
class Trajectory:
    """Snapshots every ``stride`` steps of size ``dt`` on ``[0, T]``."""

    grid: Grid
    dt: float
    stride: int
    meta: dict = field(default_factory=dict)
    times: list = field(default_factory=list)
    frames: list = field(default_factory=list)
    monitor_rows: list = field(default_factory=list)

    @property
    def frame_dt(self) -> float:
        return self.dt * self.stride

    @property
    def nframes(self) -> int:
        return len(self.frames)

    def append(self, state: StateHFB, row: dict | None = None):
        self.times.append(state.t)
        self.frames.append(state)
        if row is not None:
            self.monitor_rows.append(row)

    def series(self, name: str) -> np.ndarray:
        """Stacked frames of ``phi``, ``lam_p``, ``gam_p``, ``lam_c``, ``gam_c``, ``lam``, ``gam``
        or ``rho``."""
        if name == "rho":
            return np.array([s.rho(self.grid) for s in self.frames])
        return np.array([getattr(s, name) for s in self.frames])

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.times)

    def monitor_series(self) -> dict:
        return {c: np.array([r[c] for r in self.monitor_rows]) for c in MONITOR_COLUMNS}


def suggested_dt(state: StateHFB, inter: Interaction) -> float:
    """Nonlinear step bound ``0.1 / ||V_N * rho||_inf``."""
    u = inter.mean_field(state.rho(inter.grid))
    top = float(np.max(np.abs(u)))
    return np.inf if top == 0 else 0.1 / top


def evolve(state: StateHFB, inter: Interaction, dt: float, steps: int, stride: int = 1,
           meta: dict | None = None, record_monitors: bool = True) -> Trajectory:
    """Integrate ``steps`` Strang steps, keeping every ``stride``-th state."""
    if steps % stride:
        raise ValueError(f"steps ({steps}) must be a multiple of stride ({stride})")
    bound = suggested_dt(state, inter)
    if dt > bound:
        log.warning("dt=%g exceeds the nonlinear step bound %.3g", dt, bound)
    traj = Trajectory(inter.grid, dt, stride, dict(meta or {}))
    half = FreeFlow(inter.grid, dt / 2)
    traj.append(state, monitors(state, inter) if record_monitors else None)
    t_start = state.t
    for i in range(1, steps + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                state = step_strang(state, inter, dt, half)
        except SimulationError as exc:
            exc.trajectory = traj
            raise
        # exact frame times, free of accumulated rounding
        state.t = t_start + i * dt
        if i % stride == 0:
            with np.errstate(over="ignore", invalid="ignore"):
                traj.append(state, monitors(state, inter) if record_monitors else None)
    return traj


def evolve_matrix(ms: MatrixState, inter: Interaction, dt: float, steps: int) -> MatrixState:
    half = FreeFlow(inter.grid, dt / 2)
    for _ in range(steps):
        ms = step_matrix(ms, inter, dt, half)
    return ms


# --- initial data -------------------------------------------------------------------


def periodic_gaussian(grid: Grid, center: float, width: float, momentum: float = 0.0,
                      images: int = 3) -> np.ndarray:
    """Gaussian summed over periodic images (smooth on the torus), times a plane wave."""
    x = grid.coords()
    out = np.zeros(grid.field_shape)
    shifts = np.arange(-images, images + 1) * grid.L
    for idx in np.ndindex(*([len(shifts)] * grid.d)):
        r2 = sum((x[i] - center - shifts[idx[i]]) ** 2 for i in range(grid.d))
        out = out + np.exp(-r2 / (2 * width**2))
    if momentum:
        # momentum along the first axis, snapped to the lattice
        kq = 2 * np.pi / grid.L * np.round(momentum * grid.L / (2 * np.pi))
        return out * np.exp(1j * kq * x[0])
    return out.astype(complex)


def smooth_pair_kernel(grid: Grid, op_norm: float, width: float, envelope: float,
                       center: float | None = None) -> np.ndarray:
    """Symmetric seed ``k(x, y) ∝ g(x) g(y) exp(-|x - y|^2 / 2 width^2)`` scaled to ``op_norm``."""
    if op_norm == 0:
        return np.zeros(grid.kernel_shape, dtype=complex)
    center = grid.L / 2 if center is None else center
    env = np.ravel(periodic_gaussian(grid, center, envelope).real)
    x = grid.coords().reshape(grid.d, -1)
    diff = x[:, :, None] - x[:, None, :]
    diff = np.minimum(np.abs(diff), grid.L - np.abs(diff))
    core = np.exp(-np.sum(diff**2, axis=0) / (2 * width**2))
    k = env[:, None] * core * env[None, :]
    k = k.astype(complex)
    return k * (op_norm / np.linalg.norm(grid.weight * k, 2))


def random_pair_kernel(grid: Grid, op_norm: float, rng: np.random.Generator,
                       band: float | None = None) -> np.ndarray:
    """Random band-limited symmetric complex kernel with the given operator norm."""
    shape = (grid.n,) * (2 * grid.d)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    spec = np.fft.fftn(z)
    band = band if band is not None else grid.max_freq / 4
    xi, eta = grid.kernel_freqs()
    mask = (np.sqrt(np.sum(xi**2, 0)) <= band) & (np.sqrt(np.sum(eta**2, 0)) <= band)
    k = np.fft.ifftn(spec * mask).reshape(grid.kernel_shape)
    k = 0.5 * (k + k.T)
    return k * (op_norm / np.linalg.norm(grid.weight * k, 2))


def random_field(grid: Grid, rng: np.random.Generator, band: float | None = None) -> np.ndarray:
    z = rng.standard_normal(grid.field_shape) + 1j * rng.standard_normal(grid.field_shape)
    band = band if band is not None else grid.max_freq / 4
    mask = np.sqrt(np.sum(grid.field_freqs() ** 2, 0)) <= band
    return np.fft.ifftn(np.fft.fftn(z) * mask)


def assemble_state(grid: Grid, phi_shape: np.ndarray, k: np.ndarray, N: float) -> StateHFB:
    """Build a state with ``tr Γ = 1`` from a condensate shape and a seed ``k``."""
    pd = pair_densities(k, N, grid)
    tr_p = float(grid.weight * np.real(np.trace(pd.gam_p)))
    if tr_p >= 1:
        raise ValueError(f"pair trace tr Γ_p = {tr_p:.4g} leaves no room for a condensate")
    norm2 = grid.weight * np.sum(np.abs(phi_shape) ** 2)
    if not np.isfinite(norm2) or norm2 == 0:
        raise ValueError("condensate profile is not normalizable")
    phi = phi_shape * np.sqrt((1 - tr_p) / norm2)
    return StateHFB(0.0, phi, pd.lam_p, pd.gam_p)


def data_norms(state: StateHFB, grid: Grid, alpha: float, N: float) -> dict:
    """Weighted-derivative norms of the initial data named in the data hypotheses."""
    def l2(a):
        return float(np.sqrt(grid.weight**2 * np.sum(np.abs(a) ** 2)))
    m = bessel(alpha, "x") * bessel(alpha, "y")
    dd = riesz(1.0, "x") * riesz(1.0, "y")
    out = {
        "trace": particle_number(state, grid),
        "weighted_gamma": l2(apply_multiplier(m, state.gam, grid, kind="kernel")),
        "weighted_lambda": l2(apply_multiplier(m, state.lam, grid, kind="kernel")),
        "weighted_gamma_p": l2(apply_multiplier(m, state.gam_p, grid, kind="kernel")),
        "grad_grad_lambda_over_N": l2(apply_multiplier(dd, state.lam, grid, kind="kernel")) / N,
    }
    return out


def make_initial_data(grid: Grid, data, N: float, alpha: float = 0.6, rng=None):
    """Initial state from a data configuration section.

    ``data`` provides ``phi_center``, ``phi_width``, ``phi_momentum``,
    ``k_norm``, ``k_width``, ``k_envelope``, ``k_random`` and
    ``small_exponent``.  Returns ``(state, report)`` where the report holds the
    data norms and whether ``||<∇x>^a <∇y>^a Γ_p(0)|| <= N^-small_exponent``.
    """
    center = grid.L / 2 if data.phi_center is None else data.phi_center
    phi = periodic_gaussian(grid, center, data.phi_width, data.phi_momentum)
    if data.k_random:
        rng = rng if rng is not None else np.random.default_rng(0)
        k = random_pair_kernel(grid, data.k_norm, rng)
    else:
        k = smooth_pair_kernel(grid, data.k_norm, data.k_width, data.k_envelope, center)
    state = assemble_state(grid, phi, k, N)
    report = data_norms(state, grid, alpha, N)
    report["small_bound"] = float(N ** (-data.small_exponent))
    report["small_ok"] = report["weighted_gamma_p"] <= report["small_bound"]
    return state, report
