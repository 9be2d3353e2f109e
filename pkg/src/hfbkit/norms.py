"""Mixed space-time norms, Strichartz families, fractional time derivatives,
Littlewood-Paley banks and conservation monitors.

A norm layout is written outermost first, as in ``L^p(dt) L^q(dx) L^2(dy)``
-> ``[("t", p), ("x", q), ("y", 2)]``.  Spatial slots carry weight ``h^d``
and the time slot ``dt * stride``.  Rotated slots ``x-y`` / ``x+y`` group
the kernel entries along the fibres ``x - y = u`` (resp. ``x + y = w``)
modulo the torus; the fibre is parametrized by ``y``, which is a bijection
for any ``n`` and agrees with :func:`hfbkit.kernels.rotate` for odd ``n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.signal.windows import tukey
from scipy.special import gamma as gamma_fn

from .evolution import Interaction, Trajectory, energy, particle_number
from .grid import Grid, Multiplier, apply_multiplier, bump_profile, vector_norm

INF = math.inf
SPATIAL_AXES = ("x", "y", "x-y", "x+y")
PARTNER = {"x": "y", "y": "x", "x-y": "x+y", "x+y": "x-y"}

# finite samples of the admissible sets 2/p + d/q = d/2 (endpoints excluded
# where the estimate fails)
ADMISSIBLE = {
    1: ((4.0, INF), (6.0, 6.0), (8.0, 4.0), (INF, 2.0)),
    2: ((3.0, 6.0), (4.0, 4.0), (6.0, 3.0), (INF, 2.0)),
    3: ((2.0, 6.0), (8.0 / 3.0, 4.0), (4.0, 3.0), (INF, 2.0)),
}


def is_admissible(p: float, q: float, d: int, tol: float = 1e-12) -> bool:
    return abs(2.0 / p + d / q - d / 2.0) <= tol


def dual_exponent(p: float) -> float:
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


# --- layout evaluation ----------------------------------------------------------


def _reduce(a: np.ndarray, axis: int, p: float, weight: float) -> np.ndarray:
    a = np.abs(a)
    if math.isinf(p):
        return np.max(a, axis=axis)
    if p == 2:
        return np.sqrt(weight * np.sum(a * a, axis=axis))
    return (weight * np.sum(a**p, axis=axis)) ** (1.0 / p)


def _fibre_index(grid: Grid, outer: str) -> tuple[np.ndarray, np.ndarray]:
    """Flat ``(x, y)`` index arrays of shape ``(M, M)``: row = fibre label, column = ``y``."""
    n, d = grid.n, grid.d
    idx = np.indices((n,) * (2 * d))
    lab, y = idx[:d], idx[d:]
    if outer == "x-y":
        x = tuple((lab[i] + y[i]) % n for i in range(d))
    else:
        x = tuple((lab[i] - y[i]) % n for i in range(d))
    xf = np.ravel_multi_index(x, (n,) * d).reshape(grid.kernel_shape)
    yf = np.ravel_multi_index(tuple(y), (n,) * d).reshape(grid.kernel_shape)
    return xf, yf


def regroup(a: np.ndarray, grid: Grid, outer: str) -> np.ndarray:
    """Kernel(s) re-indexed as ``B[label, y] = A[x, y]`` with ``label = x - y`` or ``x + y``."""
    xf, yf = _fibre_index(grid, outer)
    return a[..., xf, yf]


def evaluate_layout(values: np.ndarray, grid: Grid, layout: Sequence[tuple[str, float]],
                    frame_dt: float | None = None) -> float:
    """Evaluate a mixed norm of a kernel, a field or a time series of either.

    ``values`` has an optional leading time axis iff ``"t"`` appears in the
    layout.  Kernels need two spatial slots, fields one.
    """
    values = np.asarray(values)
    names = [ax for ax, _ in layout]
    if len(set(names)) != len(names):
        raise ValueError(f"repeated axis in layout {names}")
    has_t = "t" in names
    space = [ax for ax in names if ax != "t"]
    nb = 1 if has_t else 0
    if has_t and frame_dt is None:
        raise ValueError("time slot needs the frame spacing")
    base = values.shape[nb:]
    if base == grid.kernel_shape and sorted(space) == ["x", "y"]:
        arr = values
        labelled = {"x": nb, "y": nb + 1}
    elif base == grid.field_shape and space == ["x"]:
        arr = values.reshape(values.shape[:nb] + (grid.npts,))
        labelled = {"x": nb}
    else:
        raise ValueError(f"layout {names} does not fit input of shape {values.shape}")
    if has_t:
        labelled["t"] = 0
    return _collapse(arr, labelled, layout, grid.weight, frame_dt)


def _collapse(arr, labelled, layout, w, frame_dt) -> float:
    order = list(layout)
    labelled = dict(labelled)
    for ax, p in reversed(order):
        pos = labelled.pop(ax)
        arr = _reduce(arr, pos, p, frame_dt if ax == "t" else w)
        for k in labelled:
            if labelled[k] > pos:
                labelled[k] -= 1
    return float(arr)


def rotated_layout_norm(values: np.ndarray, grid: Grid, layout, frame_dt=None) -> float:
    """Mixed norm whose spatial slots are ``x-y`` and ``x+y``."""
    names = [ax for ax, _ in layout]
    space = [ax for ax in names if ax != "t"]
    if sorted(space) != ["x+y", "x-y"]:
        raise ValueError(f"rotated layout needs slots x-y and x+y, got {space}")
    outer = space[0]
    values = np.asarray(values)
    if values.shape[-2:] != grid.kernel_shape:
        raise ValueError("rotated norms need two-point kernels")
    has_t = "t" in names
    if has_t and frame_dt is None:
        raise ValueError("time slot needs the frame spacing")
    arr = regroup(values, grid, outer)
    nb = 1 if has_t else 0
    labelled = {outer: nb, space[1]: nb + 1}
    if has_t:
        labelled["t"] = 0
    return _collapse(arr, labelled, layout, grid.weight, frame_dt)


def layout_norm(values, grid: Grid, layout, frame_dt=None) -> float:
    names = {ax for ax, _ in layout}
    if names & {"x-y", "x+y"}:
        return rotated_layout_norm(values, grid, layout, frame_dt)
    return evaluate_layout(values, grid, layout, frame_dt)


def bruteforce_rotated_norm(a: np.ndarray, grid: Grid, q: float, outer: str = "x-y") -> float:
    """Pair-enumeration oracle for ``L^q(d outer) L^2(d partner)`` of one kernel."""
    n, d = grid.n, grid.d
    w = grid.weight
    shape = (n,) * d
    fibres: dict = {}
    for i in range(grid.npts):
        xi = np.unravel_index(i, shape)
        for j in range(grid.npts):
            yj = np.unravel_index(j, shape)
            sign = 1 if outer == "x-y" else -1
            key = tuple((xi[c] - sign * yj[c]) % n for c in range(d))
            fibres[key] = fibres.get(key, 0.0) + w * abs(a[i, j]) ** 2
    inner = np.sqrt(np.array([fibres[k] for k in sorted(fibres)]))
    if math.isinf(q):
        return float(inner.max())
    return float((w * np.sum(inner**q)) ** (1.0 / q))


# --- norm specifications --------------------------------------------------------


@dataclass(frozen=True)
class NormSpec:
    """``L^p(dt) L^q(d axis) L^2(d partner)`` after optional pre-multipliers.

    ``collapsing=True`` moves the time slot between the outer and inner
    spatial slots: ``L^q(d axis) L^p(dt) L^2(d partner)``.
    """

    p: float
    q: float
    axis: str = "x"
    multipliers: tuple = ()
    window: tuple | None = None
    collapsing: bool = False

    def __post_init__(self):
        if self.axis not in SPATIAL_AXES:
            raise ValueError(f"unknown axis {self.axis!r}; choose from {SPATIAL_AXES}")
        for e in (self.p, self.q):
            if not (e >= 1):
                raise ValueError(f"exponents must lie in [1, inf], got {e}")

    def layout(self, with_time: bool = True):
        inner = (PARTNER[self.axis], 2.0)
        outer = (self.axis, self.q)
        if not with_time:
            return [outer, inner]
        if self.collapsing:
            return [outer, ("t", self.p), inner]
        return [("t", self.p), outer, inner]


def window_slice(times: np.ndarray, window, tol: float = 1e-9) -> slice:
    if window is None:
        return slice(None)
    t0, t1 = window
    if t0 < times[0] - tol or t1 > times[-1] + tol or t1 < t0:
        raise ValueError(f"window [{t0}, {t1}] outside trajectory [{times[0]}, {times[-1]}]")
    idx = np.nonzero((times >= t0 - tol) & (times <= t1 + tol))[0]
    return slice(int(idx[0]), int(idx[-1]) + 1)


def apply_all(multipliers, values: np.ndarray, grid: Grid, kind: str,
              frame_dt: float | None = None) -> np.ndarray:
    out = values
    for m in multipliers:
        out = apply_multiplier(m, out, grid, kind=kind, frame_dt=frame_dt)
    return out


def mixed_norm(data, spec: NormSpec, grid: Grid | None = None, *, quantity: str = "lam",
               frame_dt: float | None = None, times=None) -> float:
    """Evaluate ``spec`` on a trajectory (``quantity`` names the series) or an array.

    A bare kernel or field (no time axis) drops the time slot.
    """
    if isinstance(data, Trajectory):
        grid = data.grid
        times = data.t
        frame_dt = data.frame_dt
        values = data.series(quantity)
        timed = True
    else:
        if grid is None:
            raise ValueError("a grid is required for array input")
        values = np.asarray(data)
        timed = values.shape not in (grid.kernel_shape, grid.field_shape)
        if timed and times is None:
            times = np.arange(values.shape[0]) * (frame_dt or 1.0)
    kind = "kernel" if values.shape[-2:] == grid.kernel_shape and values.ndim >= 2 else "field"
    if timed:
        values = values[window_slice(np.asarray(times), spec.window)]
    if kind == "field" and spec.axis != "x":
        raise ValueError(f"axis {spec.axis!r} needs a two-point kernel input")
    values = apply_all(spec.multipliers, values, grid, kind, frame_dt)
    if kind == "field":
        layout = [("t", spec.p), ("x", spec.q)] if timed else [("x", spec.q)]
    else:
        layout = spec.layout(with_time=timed)
    return layout_norm(values, grid, layout, frame_dt)


# --- Strichartz families ------------------------------------------------------


class FamilyResult(NamedTuple):
    value: float
    label: str
    members: dict


def _check_family(family, d):
    if not family:
        raise ValueError("admissible family is empty")
    for p, q in family:
        if not is_admissible(p, q, d):
            raise ValueError(f"pair ({p}, {q}) is not admissible in d={d}")


def family_norms(values: np.ndarray, grid: Grid, frame_dt: float, family, axes=("x", "y"),
                 dual_range: tuple | None = None) -> FamilyResult:
    """Sup (or, with ``dual_range=(p0, p1)``, sampled inf of the dual exponents) over a family.

    ``values`` is a kernel time series after any pre-multipliers.
    """
    family = tuple(family)
    _check_family(family, grid.d)
    if dual_range is not None:
        p0, p1 = dual_range
        if not (p0 > 2 and math.isfinite(p1) and p1 >= p0):
            raise ValueError(f"dual bounds need 2 < p0 <= p1 < inf, got ({p0}, {p1})")
        family = tuple((p, q) for p, q in family if p0 <= p <= p1)
        if not family:
            raise ValueError(f"no admissible pair of the family lies in [{p0}, {p1}]")
    members = {}
    for p, q in family:
        for ax in axes:
            if dual_range is None:
                spec = NormSpec(p, q, ax)
            else:
                spec = NormSpec(dual_exponent(p), dual_exponent(q), ax)
            members[(p, q, ax)] = layout_norm(values, grid, spec.layout(), frame_dt)
    if dual_range is None:
        return FamilyResult(max(members.values()), "sup", members)
    return FamilyResult(min(members.values()), "sampled-inf", members)


def _prepared(traj: Trajectory, quantity, multipliers, window):
    values = traj.series(quantity)[window_slice(traj.t, window)]
    return apply_all(multipliers, values, traj.grid, "kernel", traj.frame_dt)


def strichartz_norm(traj: Trajectory, family=None, quantity: str = "lam", multipliers=(),
                    axes=("x", "y"), window=None) -> FamilyResult:
    """Sup over the sampled admissible family and both orderings of the outer slot."""
    family = ADMISSIBLE[traj.grid.d] if family is None else family
    values = _prepared(traj, quantity, multipliers, window)
    return family_norms(values, traj.grid, traj.frame_dt, family, axes)


def dual_strichartz(traj: Trajectory, p0: float, p1: float, family=None, quantity: str = "lam",
                    multipliers=(), axes=("x", "y"), window=None) -> FamilyResult:
    """Sampled infimum of ``L^p'(dt) L^q'(d axis) L^2`` over family pairs with ``p0 <= p <= p1``.

    This bounds the infimum over the full admissible range from above and is
    labelled ``sampled-inf``.
    """
    family = ADMISSIBLE[traj.grid.d] if family is None else family
    values = _prepared(traj, quantity, multipliers, window)
    return family_norms(values, traj.grid, traj.frame_dt, family, axes, dual_range=(p0, p1))


# --- fractional time derivative ----------------------------------------------------

MIN_FRAMES = 16


@dataclass
class TimeDerivative:
    """``|∂_t|^power`` of a windowed series.

    ``values`` is restricted to the input frames; ``extended`` covers the whole
    zero-padded period, over which time norms of the derivative are taken.
    """

    values: np.ndarray
    extended: np.ndarray
    frame_dt: float
    meta: dict = field(default_factory=dict)


def prepare_window(series: np.ndarray, taper: float) -> np.ndarray:
    """Remove the time mean and apply a raised-cosine (Tukey) taper."""
    g = series - series.mean(axis=0, keepdims=True)
    win = tukey(series.shape[0], alpha=taper) if taper > 0 else np.ones(series.shape[0])
    return g * win.reshape((-1,) + (1,) * (series.ndim - 1))


def quarter_time_derivative(series: np.ndarray, frame_dt: float, power: float = 0.25,
                            taper: float = 0.1, pad: int = 4) -> TimeDerivative:
    """Multiplier ``|τ|^power`` on the discrete time spectrum of every spatial point.

    The series is mean-subtracted, tapered over the fraction ``taper`` of the
    window and zero-padded to ``pad`` times its length (a zero extension
    outside the window).  ``taper=0, pad=1`` is the plain periodic multiplier.
    """
    series = np.asarray(series)
    nt = series.shape[0]
    if nt < MIN_FRAMES:
        raise ValueError(f"fractional time derivative needs at least {MIN_FRAMES} frames, got {nt}")
    if pad < 1 or int(pad) != pad:
        raise ValueError(f"pad must be a positive integer, got {pad}")
    g = prepare_window(series, taper)
    ntot = int(pad) * nt
    tau = 2 * np.pi * np.fft.fftfreq(ntot, d=frame_dt)
    spec = np.fft.fft(g, n=ntot, axis=0)
    sym = (np.abs(tau) ** power).reshape((-1,) + (1,) * (series.ndim - 1))
    ext = np.fft.ifft(spec * sym, axis=0)
    meta = {"power": power, "taper": taper, "taper_kind": "tukey", "pad": int(pad),
            "mean_removed": True, "extension": "zero"}
    return TimeDerivative(ext[:nt], ext, frame_dt, meta)


def seminorm_constant(k: float) -> float:
    """``C(k)`` with ``∫∫|u(t)-u(s)|^2/|t-s|^(1+2k) = C(k) ||·|∂_t|^k u||^2``, ``0 < k < 1/2``."""
    if not 0 < k < 0.5:
        raise ValueError(f"k must lie in (0, 1/2), got {k}")
    return 2 * gamma_fn(1 - 2 * k) * math.cos(math.pi * k) / k


def derivative_norm(td: TimeDerivative, space_weight: float) -> float:
    """``L^2`` norm of the derivative over the padded time axis and space."""
    return float(np.sqrt(td.frame_dt * space_weight * np.sum(np.abs(td.extended) ** 2)))


def sobolev_seminorm_time(series: np.ndarray, frame_dt: float, k: float = 0.25,
                          space_weight: float = 1.0, taper: float = 0.1) -> float:
    """``(∫∫ ||g(t)-g(s)||^2 / |t-s|^(1+2k) dt ds / C(k))^(1/2)`` of the windowed series.

    ``g`` is the mean-free tapered series on ``[0, T]``, zero outside; the
    outside part of the double integral is done in closed form and the
    excluded diagonal cells by the local expansion ``||g'||^2 |t-s|^2``.
    """
    series = np.asarray(series)
    nt = series.shape[0]
    if nt < MIN_FRAMES:
        raise ValueError(f"seminorm needs at least {MIN_FRAMES} frames, got {nt}")
    g = prepare_window(series, taper).reshape(nt, -1)
    dt = frame_dt
    gram = space_weight * (g @ np.conj(g).T)
    sq = np.real(np.diagonal(gram))
    diff2 = np.maximum(sq[:, None] + sq[None, :] - 2 * np.real(gram), 0.0)
    t = (np.arange(nt) + 0.5) * dt
    gap = np.abs(t[:, None] - t[None, :])
    np.fill_diagonal(gap, 1.0)
    kern = 1.0 / gap ** (1 + 2 * k)
    np.fill_diagonal(kern, 0.0)
    inside = dt * dt * np.sum(diff2 * kern)
    deriv = np.gradient(g, dt, axis=0)
    d2 = space_weight * np.sum(np.abs(deriv) ** 2, axis=1)
    half = dt / 2
    diag = dt * np.sum(d2) * 2 * half ** (2 - 2 * k) / (2 - 2 * k)
    T = nt * dt
    outside = 2 * dt * np.sum(sq * (t ** (-2 * k) + (T - t) ** (-2 * k))) / (2 * k)
    return float(np.sqrt((inside + diag + outside) / seminorm_constant(k)))


# --- Littlewood-Paley ---------------------------------------------------------------

_LP_BINDINGS = ("x", "y", "x-y", "x+y")


def _band_max(grid: Grid, binding: str) -> float:
    top = grid.max_freq
    return 2 * top if binding in ("x-y", "x+y") else top


@dataclass(frozen=True)
class LPStack:
    """Dyadic bank ``ψ_0 = φ̂``, ``ψ_k = φ̂(·/2^k) - φ̂(·/2^(k-1))`` on one frequency binding.

    ``φ̂`` is the smooth profile equal to 1 on ``|ξ| <= 1`` and 0 on ``|ξ| >= 2``.
    ``k_max`` is the least ``k`` with ``2^k`` above every lattice frequency of
    the binding, so the bank sums to one on the lattice.
    """

    grid: Grid
    binding: str = "x"
    k_max: int | None = None

    def __post_init__(self):
        if self.binding not in _LP_BINDINGS:
            raise ValueError(f"unknown binding {self.binding!r}")
        need = max(0, math.ceil(math.log2(_band_max(self.grid, self.binding))))
        if self.k_max is None:
            object.__setattr__(self, "k_max", need)
        elif self.k_max < need:
            raise ValueError(f"k_max={self.k_max} does not cover the lattice band (needs {need})")
        elif self.k_max > need:
            raise ValueError(f"bands above {need} lie beyond the lattice Nyquist frequency")

    def symbol(self, k: int):
        if not 0 <= k <= self.k_max:
            raise ValueError(f"band {k} outside the bank 0..{self.k_max}")
        if k == 0:
            return lambda xi: bump_profile(vector_norm(xi))
        s = 2.0**k
        return lambda xi: bump_profile(vector_norm(xi) / s) - bump_profile(vector_norm(xi) / (s / 2))

    def multiplier(self, k: int) -> Multiplier:
        return Multiplier(self.symbol(k), self.binding, f"P{k}[{self.binding}]")

    def partial_sum(self, l: int) -> Multiplier:
        """Telescoped ``sum_{k<=l} ψ_k = φ̂(·/2^l)``."""
        s = 2.0**l
        return Multiplier(lambda xi: bump_profile(vector_norm(xi) / s), self.binding, f"S{l}")

    @property
    def bands(self) -> range:
        return range(self.k_max + 1)


def _kind_of(values: np.ndarray, grid: Grid) -> str:
    return "kernel" if values.shape[-2:] == grid.kernel_shape and values.ndim >= 2 else "field"


def lp_project(values: np.ndarray, stack: LPStack, k: int) -> np.ndarray:
    values = np.asarray(values)
    return apply_multiplier(stack.multiplier(k), values, stack.grid, kind=_kind_of(values, stack.grid))


def lp_reconstruct(values: np.ndarray, stack: LPStack) -> np.ndarray:
    return sum(lp_project(values, stack, k) for k in stack.bands)


def square_function(values: np.ndarray, stack: LPStack) -> np.ndarray:
    """Pointwise ``(sum_k |P_k f|^2)^(1/2)``."""
    acc = sum(np.abs(lp_project(values, stack, k)) ** 2 for k in stack.bands)
    return np.sqrt(acc)


def double_square_rotated(kernel: np.ndarray, stack_a: LPStack, stack_b: LPStack) -> np.ndarray:
    """``(sum_{k', k''} |P^a_{k'} P^b_{k''} f|^2)^(1/2)`` for two bindings (default use: x-y, x+y)."""
    g = stack_a.grid
    if stack_b.grid != g:
        raise ValueError("stacks live on different grids")
    acc = np.zeros(np.shape(kernel))
    for k1 in stack_a.bands:
        pa = lp_project(kernel, stack_a, k1)
        for k2 in stack_b.bands:
            acc += np.abs(apply_multiplier(stack_b.multiplier(k2), pa, g, kind="kernel")) ** 2
    return np.sqrt(acc)


def bernstein_ratio(values: np.ndarray, stack: LPStack, k: int, alpha: float,
                    p: float = 2.0) -> float:
    """``||<∇>^α P_k f||_p / (2^(αk) ||P_k f||_p)`` on the stack's binding; ``nan`` for an empty band."""
    from .grid import bessel

    g = stack.grid
    values = np.asarray(values)
    kind = _kind_of(values, g)
    pk = lp_project(values, stack, k)
    dk = apply_multiplier(bessel(alpha, stack.binding), pk, g, kind=kind)
    den = _flat_lp(pk, g, p, kind)
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    if den <= 1e-13 * max(scale, 1e-300) * math.sqrt(values.size):
        return math.nan
    return _flat_lp(dk, g, p, kind) / (2.0 ** (alpha * k) * den)


def _flat_lp(a, grid, p, kind):
    w = grid.weight if kind == "field" else grid.weight**2
    a = np.abs(a)
    if math.isinf(p):
        return float(a.max())
    return float((w * np.sum(a**p)) ** (1 / p))


def sobolev_angle_constant(grid: Grid, alpha: float) -> float:
    """Lattice constant ``C`` in ``||Λ||_{L^∞(d(x-y))L^2(d(x+y))} <= C ||<∇_x>^α Λ||_{L^2}``.

    ``C^2 = L^-d sum_ξ <ξ>^(-2α)`` over the lattice frequencies (Cauchy-Schwarz on
    the Fourier series in ``x`` at fixed ``y``).
    """
    k2 = np.sum(grid.field_freqs() ** 2, axis=0)
    return float(np.sqrt(np.sum((1 + k2) ** (-alpha)) / grid.L**grid.d))


# --- monitors --------------------------------------------------------------------------


def morawetz(traj: Trajectory, window=None) -> float:
    """``||Γ(t, x, x)||_{L^2_{t,x}}`` over the window."""
    rho = traj.series("rho")[window_slice(traj.t, window)]
    return float(np.sqrt(traj.frame_dt * traj.grid.weight * np.sum(rho**2)))


def conserved_monitors(traj: Trajectory, inter: Interaction) -> dict:
    """Per-frame trace and energy plus the running Morawetz norm."""
    g = traj.grid
    tr = np.array([particle_number(s, g) for s in traj.frames])
    en = np.array([energy(s, inter) for s in traj.frames])
    rho = traj.series("rho").reshape(traj.nframes, -1)
    run = np.sqrt(traj.frame_dt * g.weight * np.cumsum(np.sum(rho**2, axis=1)))
    return {"t": traj.t, "trace": tr, "energy": en, "morawetz_partial": run}
