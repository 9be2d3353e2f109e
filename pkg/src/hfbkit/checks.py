"""Named invariant suites; each returns a list of :class:`CheckResult`."""
from __future__ import annotations

import filecmp
import math
import tempfile
import time
from functools import lru_cache
from pathlib import Path

import numpy as np

from .bogoliubov import ch, ch_inverse, sh, sh2k
from .config import RunConfig, sweep_preset
from .evolution import (
    FreeFlow,
    Interaction,
    StateHFB,
    assemble_state,
    evolve,
    evolve_matrix,
    random_field,
    random_pair_kernel,
    step_matrix,
    step_strang,
    to_matrix_state,
)
from .grid import make_grid
from .harness import (
    CheckResult,
    execute_run,
    prepare,
    run_checks,
    run_sweep,
    simulate,
)
from .kernels import MatrixState, compose, operator_norm
from .norms import (
    LPStack,
    bernstein_ratio,
    bruteforce_rotated_norm,
    derivative_norm,
    double_square_rotated,
    layout_norm,
    lp_reconstruct,
    quarter_time_derivative,
    sobolev_seminorm_time,
)

SWEEP_NS = (8, 16, 32, 64, 128)
# empirical brackets for the "~" equivalences
DOUBLE_SQUARE_BRACKET = (0.3, 3.0)
BERNSTEIN_SPREAD = 4.0


def reference_config(dt: float = 1e-3) -> RunConfig:
    cfg = RunConfig()
    cfg.stepping.dt = dt
    cfg.stepping.stride = int(round(0.01 / dt))
    return cfg.validate()


@lru_cache(maxsize=4)
def _reference(dt: float):
    t0 = time.perf_counter()
    traj, _, err = simulate(reference_config(dt))
    if err:
        raise RuntimeError(err)
    return traj, time.perf_counter() - t0


def _energy_drift(traj) -> float:
    e = traj.monitor_series()["energy"]
    return float(np.max(np.abs(e - e[0])) / abs(e[0]))


def conservation() -> list[CheckResult]:
    traj, elapsed = _reference(1e-3)
    m = traj.monitor_series()
    dev = float(np.max(np.abs(m["trace"] - 1)))
    d1 = _energy_drift(traj)
    d2 = _energy_drift(_reference(5e-4)[0])
    return [
        CheckResult("C1 particle-number conservation", dev <= 1e-6, dev, 1e-6, "max |tr Γ(t) - 1|"),
        CheckResult("C1 runtime", elapsed < 60, elapsed, 60, "seconds"),
        CheckResult("C2 energy drift", d1 <= 1e-4, d1, 1e-4, "relative"),
        CheckResult("C2 drift reduction on halving dt", d1 / d2 >= 3, d1 / d2, 3, "drift(dt) / drift(dt/2)"),
    ]


def structure() -> list[CheckResult]:
    traj, _ = _reference(1e-3)
    return [c for c in run_checks(traj) if c.criterion.startswith("C3")]


def _random_states(grid, count, N, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        phi = random_field(grid, rng)
        k = random_pair_kernel(grid, rng.uniform(0.2, 0.8), rng)
        out.append(assemble_state(grid, phi, k, N))
    return out


def _block_gap(ms: MatrixState, state: StateHFB) -> float:
    lp, gp, lc, gc = ms.kernels()
    return max(float(np.max(np.abs(x - y))) for x, y in
               ((lp, state.lam_p), (gp, state.gam_p), (lc, state.lam_c), (gc, state.gam_c)))


def form_equivalence(count: int = 5, seed: int = 11) -> list[CheckResult]:
    grid = make_grid(1, 32, 10.0)
    cfg = reference_config()
    inter = Interaction.from_spec(cfg.potential_spec(), grid)
    dt, steps = 1e-3, 500
    one, many = 0.0, 0.0
    for s in _random_states(grid, count, cfg.potential.N, seed):
        comp = s.with_condensate_kernels()
        one = max(one, _block_gap(step_matrix(to_matrix_state(s), inter, dt), step_strang(comp, inter, dt)))
        end = evolve(comp, inter, dt, steps, steps, record_monitors=False).frames[-1]
        many = max(many, _block_gap(evolve_matrix(to_matrix_state(s), inter, dt, steps), end))
    return [
        CheckResult("C4 matrix vs component, one step", one <= 1e-10, one, 1e-10, f"{count} random states"),
        CheckResult("C4 matrix vs component, T=0.5", many <= 1e-7, many, 1e-7, f"{count} random states"),
    ]


def condensate_consistency() -> list[CheckResult]:
    cfg = reference_config()
    grid, inter, state, _ = prepare(cfg)
    steps = 500
    a = evolve(state.with_condensate_kernels(), inter, 1e-3, steps, steps, record_monitors=False).frames[-1]
    b = evolve(state, inter, 1e-3, steps, steps, record_monitors=False).frames[-1]
    w = grid.weight
    gap = max(math.sqrt(w * w * np.sum(np.abs(a.lam_c - b.lam_c) ** 2)),
              math.sqrt(w * w * np.sum(np.abs(a.gam_c - b.gam_c) ** 2)))
    return [CheckResult("C5 condensate kernels vs rebuilt from φ", gap <= 1e-5, gap, 1e-5, "L2 at T=0.5")]


def bogoliubov_identities(count: int = 10, seed: int = 5) -> list[CheckResult]:
    grid = make_grid(1, 32, 10.0)
    rng = np.random.default_rng(seed)
    e1 = e2 = 0.0
    for _ in range(count):
        k = random_pair_kernel(grid, rng.uniform(0.1, 1.0), rng, band=grid.max_freq)
        s, c, s2 = sh(k, grid), ch(k, grid), sh2k(k, grid)
        e1 = max(e1, operator_norm(s2 - 2 * compose(s, c, grid), grid))
        e2 = max(e2, operator_norm(s - 0.5 * compose(s2, ch_inverse(k, grid), grid), grid))
    e3 = 0.0
    for z in (0.3, -1.0, 0.7 * np.exp(0.4j), 1.5):
        k = z * grid.delta()
        hs = np.diagonal(sh(k, grid)) * grid.weight
        hc = np.diagonal(ch(k, grid)) * grid.weight
        r = abs(z)
        e3 = max(e3, float(np.max(np.abs(hs - z / r * math.sinh(r)))), float(np.max(np.abs(hc - math.cosh(r)))))
    return [
        CheckResult("C6 sh(2k) = 2 sh(k)∘ch(k)", e1 <= 1e-8, e1, 1e-8, f"{count} random k, operator norm"),
        CheckResult("C6 sh(k) = sh(2k)∘ch(k)^-1 / 2", e2 <= 1e-8, e2, 1e-8, f"{count} random k, operator norm"),
        CheckResult("C6 scalar k vs sinh/cosh", e3 <= 1e-10, e3, 1e-10, "k = z δ"),
    ]


def rotation(seed: int = 3) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (5, 9):
        grid = make_grid(1, n, 2.0)
        for _ in range(3):
            a = rng.standard_normal(grid.kernel_shape) + 1j * rng.standard_normal(grid.kernel_shape)
            for outer in ("x-y", "x+y"):
                for q in (1.0, 2.0, 4.0, math.inf):
                    layout = [(outer, q), ("x+y" if outer == "x-y" else "x-y", 2.0)]
                    v = layout_norm(a, grid, layout)
                    ref = bruteforce_rotated_norm(a, grid, q, outer)
                    worst = max(worst, abs(v - ref) / max(1.0, abs(ref)))
    return [CheckResult("C7 rotated norms vs pair enumeration", worst <= 1e-12, worst, 1e-12, "n in {5, 9}")]


def free_flow(seed: int = 2) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    dt = 1e-2
    for d, n in ((1, 16), (2, 8)):
        grid = make_grid(d, n, 2 * np.pi)
        inter = Interaction.zero(grid)
        half = FreeFlow(grid, dt / 2)
        x = grid.coords().reshape(d, -1)
        for _ in range(4):
            kx = grid.freq[rng.integers(0, n, d)]
            ky = grid.freq[rng.integers(0, n, d)]
            ex, ey = np.exp(1j * kx @ x), np.exp(1j * ky @ x)
            wave = np.multiply.outer(ex, ey)
            a2, b2 = float(kx @ kx), float(ky @ ky)
            s = StateHFB(0.0, ex.reshape(grid.field_shape), wave, wave)
            out = step_strang(s, inter, dt, half)
            worst = max(worst,
                        float(np.max(np.abs(out.phi - np.exp(-1j * dt * a2) * s.phi))),
                        float(np.max(np.abs(out.lam_p - np.exp(-1j * dt * (a2 + b2)) * wave))),
                        float(np.max(np.abs(out.gam_p - np.exp(1j * dt * (a2 - b2)) * wave))))
            ms = MatrixState.from_kernels(0.0, wave, wave, wave, wave)
            mo = step_matrix(ms, inter, dt, half)
            lp, gp, _, _ = mo.kernels()
            worst = max(worst,
                        float(np.max(np.abs(lp - np.exp(-1j * dt * (a2 + b2)) * wave))),
                        float(np.max(np.abs(gp - np.exp(1j * dt * (a2 - b2)) * wave))))
    return [CheckResult("C8 free-flow plane-wave phases", worst <= 1e-12, worst, 1e-12, "per step, d in {1, 2}")]


def harmonic(seed: int = 0, seeds: int = 20) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    rec = 0.0
    grid = make_grid(1, 32, 2 * np.pi)
    for binding in ("x", "y", "x-y", "x+y"):
        k = random_pair_kernel(grid, 1.0, rng)
        rec = max(rec, float(np.max(np.abs(lp_reconstruct(k, LPStack(grid, binding)) - k))))
    f = random_field(grid, rng)
    rec = max(rec, float(np.max(np.abs(lp_reconstruct(f, LPStack(grid, "x")) - f))))
    out.append(CheckResult("C9 LP reconstruction", rec <= 1e-10, rec, 1e-10, "fields and kernels"))

    g128 = make_grid(1, 128, 2 * np.pi)
    st = LPStack(g128, "x")
    spread = 1.0
    for _ in range(5):
        f = random_field(g128, rng, band=g128.max_freq)
        r = [bernstein_ratio(f, st, k, 0.6) for k in range(1, 6)]
        spread = max(spread, max(r) / min(r))
    out.append(CheckResult("C9 Bernstein ratios k=1..5", spread <= BERNSTEIN_SPREAD, spread, BERNSTEIN_SPREAD,
                           "max/min ratio"))

    g33 = make_grid(1, 33, 2 * np.pi)
    su, sw = LPStack(g33, "x-y"), LPStack(g33, "x+y")
    layout = [("x-y", 4.0), ("x+y", 2.0)]
    ratios = []
    for s in range(seeds):
        r = np.random.default_rng(1000 + s)
        a = r.standard_normal(g33.kernel_shape) + 1j * r.standard_normal(g33.kernel_shape)
        ratios.append(layout_norm(double_square_rotated(a, su, sw), g33, layout) / layout_norm(a, g33, layout))
    lo, hi = DOUBLE_SQUARE_BRACKET
    med = float(np.median(ratios))
    inside = all(lo <= v <= hi for v in ratios)
    stable = max(abs(v / med - 1) for v in ratios)
    out.append(CheckResult("C9 double square function in bracket", inside, float(min(ratios)), lo,
                           f"range [{min(ratios):.4g}, {max(ratios):.4g}] in [{lo}, {hi}]"))
    out.append(CheckResult("C9 double square function stability", stable <= 0.2, stable, 0.2,
                           f"max relative deviation from median over {seeds} seeds"))
    return out


def time_derivative(seed: int = 4) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for nt in (64, 128):
        t = np.arange(nt) / nt
        amps = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
        freqs = rng.uniform(0.5, 6.0, 4)
        series = sum(np.outer(np.exp(2j * np.pi * f * t), a) for f, a in zip(freqs, amps))
        a = derivative_norm(quarter_time_derivative(series, 1.0 / nt), 1.0)
        b = sobolev_seminorm_time(series, 1.0 / nt, 0.25, 1.0)
        worst = max(worst, abs(a / b - 1))
    traj, _ = _reference(1e-3)
    rho = traj.series("rho")
    a = derivative_norm(quarter_time_derivative(rho, traj.frame_dt), traj.grid.weight)
    b = sobolev_seminorm_time(rho, traj.frame_dt, 0.25, traj.grid.weight)
    worst = max(worst, abs(a / b - 1))
    return [CheckResult("C10 |∂t|^(1/4) multiplier vs seminorm", worst <= 0.05, worst, 0.05,
                        "relative gap, synthetic and simulated density")]


def sweep(out_dir=None, jobs: int = 1) -> list[CheckResult]:
    with tempfile.TemporaryDirectory() as tmp:
        t0 = time.perf_counter()
        res = run_sweep(sweep_preset(), SWEEP_NS, out_dir or tmp, jobs=jobs)
        elapsed = time.perf_counter() - t0
    return res.checks + [CheckResult("C11 sweep runtime", elapsed < 600, elapsed, 600, "seconds")]


def determinism() -> list[CheckResult]:
    cfg = RunConfig()
    cfg.grid.n = 32
    cfg.stepping.T = 0.1
    cfg.data.k_random = True
    cfg.seed = 1234
    cfg.validate()
    with tempfile.TemporaryDirectory() as tmp:
        dirs = [Path(tmp) / "a", Path(tmp) / "b"]
        for d in dirs:
            execute_run(cfg, d)
        names = sorted(p.name for p in dirs[0].iterdir())
        same = names == sorted(p.name for p in dirs[1].iterdir()) and all(
            filecmp.cmp(dirs[0] / n, dirs[1] / n, shallow=False) for n in names)
    return [CheckResult("C14 bit-identical repeated runs", same, float(same), 1.0, ", ".join(names))]


SUITES = {
    "conservation": conservation,
    "structure": structure,
    "form-equivalence": form_equivalence,
    "condensate": condensate_consistency,
    "bogoliubov-identities": bogoliubov_identities,
    "rotation": rotation,
    "free-flow": free_flow,
    "harmonic": harmonic,
    "time-derivative": time_derivative,
    "sweep": sweep,
    "determinism": determinism,
}
