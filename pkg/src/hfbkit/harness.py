"""Single runs, norm batteries, N- and β-sweeps and their CSV/JSON outputs."""
from __future__ import annotations

import copy
import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig, dump_config
from .evolution import (
    MONITOR_COLUMNS,
    Interaction,
    SimulationError,
    Trajectory,
    evolve,
    make_initial_data,
)
from .grid import apply_multiplier, bessel, riesz
from .norms import (
    ADMISSIBLE,
    INF,
    MIN_FRAMES,
    family_norms,
    layout_norm,
    morawetz,
    quarter_time_derivative,
    window_slice,
)
from .trajectory_io import write_trajectory

log = logging.getLogger(__name__)

NORM_COLUMNS = ("run_id", "norm_name", "axis", "p", "q", "alpha", "window_start", "window_end", "value")
DEGENERATE = "degenerate"


def fmt(x) -> str:
    """Shortest round-trip text for numbers; ``inf`` spelled out."""
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return repr(x)


@dataclass
class CheckResult:
    criterion: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.criterion}: value={fmt(self.value)} threshold={fmt(self.threshold)} {self.detail}".rstrip()


@dataclass
class RunReport:
    run_id: str
    monitors: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    norms: list = field(default_factory=list)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    def to_json(self) -> str:
        d = asdict(self)
        d["passed"] = self.passed
        return json.dumps(d, indent=2, sort_keys=True, default=_jsonable)

    def text(self) -> str:
        lines = [f"run {self.run_id}: {'PASS' if self.passed else 'FAIL'}"]
        if self.error:
            lines.append(f"error: {self.error}")
        lines.extend(c.line() for c in self.checks)
        return "\n".join(lines)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")


# --- single runs ----------------------------------------------------------------


def prepare(cfg: RunConfig):
    """``(grid, interaction, initial state, data report)`` for a configuration."""
    grid = cfg.make_grid()
    inter = Interaction.from_spec(cfg.potential_spec(), grid)
    rng = np.random.default_rng(cfg.seed)
    state, report = make_initial_data(grid, cfg.data, cfg.potential.N, cfg.analysis.alpha, rng)
    return grid, inter, state, report


def trajectory_meta(cfg: RunConfig) -> dict:
    p = cfg.potential
    return {
        "N": p.N, "beta": p.beta, "eps": p.eps, "alpha": cfg.analysis.alpha,
        "potential": {"profile": "bump", "r0": p.r0, "amplitude": p.amplitude, "strength": p.strength},
        "seed": cfg.seed, "T": cfg.stepping.T, "run_id": cfg.output.run_id,
    }


def simulate(cfg: RunConfig):
    """Run the configured evolution; returns ``(trajectory, data report, error)``."""
    cfg.validate()
    _, inter, state, data_report = prepare(cfg)
    try:
        traj = evolve(state, inter, cfg.stepping.dt, cfg.steps, cfg.stepping.stride,
                      meta=trajectory_meta(cfg))
        return traj, data_report, None
    except SimulationError as exc:
        return exc.trajectory, data_report, str(exc)


def run_checks(traj: Trajectory) -> list[CheckResult]:
    m = traj.monitor_series()
    e0 = m["energy"][0]
    trace_drift = float(np.max(np.abs(m["trace"] - m["trace"][0])))
    e_drift = float(np.max(np.abs(m["energy"] - e0)) / max(abs(e0), 1e-300))
    resid = float(max(m["sym_residual"].max(), m["herm_residual"].max()))
    return [
        CheckResult("C1 particle-number conservation", trace_drift <= 1e-6, trace_drift, 1e-6,
                    f"|tr Γ(t) - 1| max = {fmt(float(np.max(np.abs(m['trace'] - 1))))}"),
        CheckResult("C2 energy conservation", e_drift <= 1e-4, e_drift, 1e-4, "relative drift"),
        CheckResult("C3 structure residuals", resid <= 1e-8, resid, 1e-8, "symmetry / hermiticity"),
        CheckResult("C3 Γ_p positivity", m["min_eig_gamma_p"].min() >= -1e-8,
                    float(m["min_eig_gamma_p"].min()), -1e-8, "min eigenvalue"),
    ]


def write_monitors_csv(path, traj: Trajectory):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MONITOR_COLUMNS)
        for row in traj.monitor_rows:
            w.writerow([fmt(row[c]) for c in MONITOR_COLUMNS])


def execute_run(cfg: RunConfig, out_dir, norms: bool = True) -> tuple[Trajectory, RunReport]:
    """Simulate, then persist trajectory, monitors, norms, config echo and report under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rid = cfg.output.run_id
    traj, data_report, error = simulate(cfg)
    (out / f"{rid}.cfg").write_text(dump_config(cfg), encoding="utf-8")
    report = RunReport(rid, data=data_report, error=error)
    if traj is not None and traj.nframes:
        write_trajectory(out / f"{rid}.hfb", traj)
        write_monitors_csv(out / f"{rid}_monitors.csv", traj)
        m = traj.monitor_series()
        report.monitors = {c: [float(v) for v in m[c]] for c in MONITOR_COLUMNS}
        report.checks = run_checks(traj)
        if norms:
            report.norms = norm_battery(traj, cfg)
            write_norms_csv(out / f"{rid}_norms.csv", report.norms)
    if error:
        report.checks.append(CheckResult("run completed", False, math.nan, math.nan, error))
    (out / f"{rid}_report.json").write_text(report.to_json(), encoding="utf-8")
    return traj, report


# --- norm battery ----------------------------------------------------------------


@dataclass(frozen=True)
class NormRow:
    run_id: str
    norm_name: str
    axis: str
    p: str
    q: str
    alpha: str
    window_start: str
    window_end: str
    value: str

    @property
    def quantity(self) -> str:
        return self.norm_name.split(":", 1)[0]

    def key(self) -> tuple:
        return (self.norm_name, self.axis, self.p, self.q, self.alpha)

    def number(self) -> float:
        return math.nan if self.value == DEGENERATE else float(self.value)


COLLAPSING = (("x-y", INF), ("t", 2.0), ("x+y", 2.0))
L2T_SUP_DIFF = (("t", 2.0), ("x-y", INF), ("x+y", 2.0))


def norm_battery(traj: Trajectory, cfg: RunConfig, run_id: str | None = None) -> list[NormRow]:
    """Every norm of the headline estimates, evaluated on one trajectory."""
    an = cfg.analysis
    g = traj.grid
    a = an.alpha
    N = float(traj.meta.get("N", cfg.potential.N))
    run_id = run_id or cfg.output.run_id
    times = traj.t
    sl = window_slice(times, an.window)
    t0, t1 = float(times[sl][0]), float(times[sl][-1])
    nf = len(times[sl])
    fd = traj.frame_dt
    family = an.family or ADMISSIBLE[g.d]
    rows: list[NormRow] = []

    def add(name, axis, p, q, alpha, value):
        # a time integral over a single frame carries no information
        if nf < 2 and not math.isinf(p):
            value = DEGENERATE
        rows.append(NormRow(run_id, name, axis, fmt(p), fmt(q), fmt(alpha), fmt(t0), fmt(t1), fmt(value)))

    raw = {q: traj.series(q)[sl] for q in ("lam", "gam", "lam_p", "gam_p")}
    raw["sh2k"] = 2 * N * raw["lam_p"]
    raw["p2"] = N * raw["gam_p"]

    weight = bessel(a, "x") * bessel(a, "y")

    def fam(values, name, alpha):
        res = family_norms(values, g, fd, family)
        for (p, q, ax), v in res.members.items():
            add(name, ax, p, q, alpha, v)
        rows.append(NormRow(run_id, name, "x|y", "sup", "sup", fmt(alpha), fmt(t0), fmt(t1),
                            DEGENERATE if nf < 2 else fmt(res.value)))

    def mult(m, values):
        return apply_multiplier(m, values, g, kind="kernel")

    for q in ("lam", "gam", "lam_p", "gam_p", "sh2k", "p2"):
        fam(raw[q], f"{q}:S_xy", 0.0)
        fam(mult(weight, raw[q]), f"{q}:S_xy_weighted", a)
        add(f"{q}:Linf_t_L2_xy", "x", INF, 2.0, 0.0,
            layout_norm(raw[q], g, [("t", INF), ("x", 2.0), ("y", 2.0)], fd))

    # sampled infimum of the dual family for the weighted Λ
    dual = family_norms(mult(weight, raw["lam"]), g, fd, family, dual_range=(an.p0, an.p1))
    rows.append(NormRow(run_id, "lam:S_dual_weighted", "x|y", "sampled-inf", "sampled-inf", fmt(a),
                        fmt(t0), fmt(t1), DEGENERATE if nf < 2 else fmt(dual.value)))

    bsum = bessel(a, "x+y")
    lam_b = mult(bsum, raw["lam"])
    add("lam:collapsing_bessel_sum", "x-y", 2.0, INF, a, layout_norm(lam_b, g, COLLAPSING, fd))
    add("lam:L2t_supdiff_bessel_sum", "x-y", 2.0, INF, a, layout_norm(lam_b, g, L2T_SUP_DIFF, fd))
    gam_r = mult(riesz(a, "x+y"), raw["gam"])
    add("gam:collapsing_riesz_sum", "x-y", 2.0, INF, a, layout_norm(gam_r, g, COLLAPSING, fd))
    for j in range(1, an.j_max + 1):
        mj = bsum * riesz(float(j), "x+y")
        for q in ("lam", "gam"):
            add(f"{q}:collapsing_bessel_sum_j{j}", "x-y", 2.0, INF, a,
                layout_norm(mult(mj, raw[q]), g, COLLAPSING, fd))

    if nf >= MIN_FRAMES:
        td = quarter_time_derivative(raw["lam"], fd, taper=an.taper, pad=an.pad)
        qc = layout_norm(td.extended, g, COLLAPSING, fd)
        ql = layout_norm(td.extended, g, L2T_SUP_DIFF, fd)
    else:
        qc = ql = DEGENERATE
    add("lam:collapsing_dt_quarter", "x-y", 2.0, INF, 0.25, qc)
    add("lam:L2t_supdiff_dt_quarter", "x-y", 2.0, INF, 0.25, ql)

    add("rho:morawetz", "x", 2.0, 2.0, 0.0, morawetz(traj, an.window))
    return sorted(rows, key=lambda r: tuple(getattr(r, c) for c in NORM_COLUMNS))


def write_norms_csv(path, rows):
    rows = sorted(rows, key=lambda r: tuple(getattr(r, c) for c in NORM_COLUMNS))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NORM_COLUMNS)
        for r in rows:
            w.writerow([getattr(r, c) for c in NORM_COLUMNS])


def read_norms_csv(path) -> list[NormRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.DictReader(fh)
        if tuple(rd.fieldnames or ()) != NORM_COLUMNS:
            raise ValueError(f"{path}: unexpected norm CSV columns {rd.fieldnames}")
        return [NormRow(**row) for row in rd]


# --- sweeps --------------------------------------------------------------------------


@dataclass
class SweepResult:
    ns: list
    rows: list
    checks: list
    fits: dict
    errors: dict
    elapsed: float

    @property
    def passed(self) -> bool:
        return not self.errors and all(c.passed for c in self.checks)


def _member(args):
    cfg, out_dir = args
    t0 = time.perf_counter()
    _, report = execute_run(cfg, out_dir)
    return cfg.output.run_id, report.norms, report.error, time.perf_counter() - t0


SWEEP_PARAMS = {"N": "potential.N", "beta": "potential.beta"}


def member_config(base: RunConfig, value: float, param: str = "N") -> RunConfig:
    cfg = copy.deepcopy(base)
    setattr(cfg.potential, SWEEP_PARAMS[param].split(".")[1], float(value))
    cfg.output.run_id = f"{param}{value:g}"
    return cfg.validate()


def fit_models(ns, ys) -> dict:
    """Least-squares fits ``y = a + b log N`` and ``y = a + b N`` with AIC."""
    ns, ys = np.asarray(ns, float), np.asarray(ys, float)
    out = {}
    for name, x in (("log", np.log(ns)), ("linear", ns)):
        coef = np.polyfit(x, ys, 1)
        res = ys - np.polyval(coef, x)
        rss = float(np.sum(res**2))
        tss = float(np.sum((ys - ys.mean()) ** 2))
        k = len(ys)
        aic = k * math.log(max(rss, 1e-300) / k) + 4
        out[name] = {"slope": float(coef[0]), "intercept": float(coef[1]), "rss": rss,
                     "r2": 1 - rss / tss if tss > 0 else 1.0, "aic": aic}
    return out


SH2K_TARGET = ("sh2k:S_xy", "x|y", "sup", "sup", "0.0")
MORAWETZ_KEY = ("rho:morawetz", "x", "2.0", "2.0", "0.0")


def _by_key(rows, param: str) -> dict:
    """``{norm key: {parameter value: number}}`` from member rows."""
    by_key: dict = {}
    for r in rows:
        by_key.setdefault(r.key(), {})[float(r.run_id[len(param):])] = r.number()
    return by_key


def sweep_checks(ns, rows) -> tuple[list[CheckResult], dict]:
    ns = sorted(ns)
    by_key = _by_key(rows, "N")
    checks, fits = [], {}

    worst, worst_key = 0.0, None
    for key, vals in sorted(by_key.items()):
        if key[0].split(":")[0] not in ("lam_p", "gam_p"):
            continue
        series = [vals.get(n, math.nan) for n in ns]
        if any(math.isnan(v) for v in series):
            continue
        base = series[0]
        ratio = max(series) / base if base > 0 else (0.0 if max(series) == 0 else math.inf)
        if ratio > worst or worst_key is None:
            worst, worst_key = ratio, key
    fits["uniform_worst"] = {"ratio": worst, "norm": list(worst_key) if worst_key else None}
    checks.append(CheckResult("C11 uniform-in-N Λ_p/Γ_p battery", worst <= 2.0, worst, 2.0,
                              f"max over N / value at N={ns[0]:g}; worst {worst_key}"))

    sh = by_key.get(SH2K_TARGET, {})
    ys = [sh.get(n, math.nan) for n in ns]
    if len(ns) >= 3 and not any(math.isnan(v) for v in ys):
        f = fit_models(ns, ys)
        fits["sh2k"] = {"ns": ns, "values": ys, **f}
        ok = f["log"]["slope"] > 0 and f["log"]["aic"] < f["linear"]["aic"]
        checks.append(CheckResult("C12 log N growth of sh(2k)", ok, f["log"]["aic"] - f["linear"]["aic"], 0.0,
                                  f"AIC(log) - AIC(linear); log slope {fmt(f['log']['slope'])}"))
    else:
        checks.append(CheckResult("C12 log N growth of sh(2k)", False, math.nan, 0.0, "missing values"))

    mor = by_key.get(MORAWETZ_KEY, {})
    mv = [mor.get(n, math.nan) for n in ns]
    ratio = max(mv) / min(mv) if mv and min(mv) > 0 else math.inf
    fits["morawetz"] = {"ns": ns, "values": mv}
    checks.append(CheckResult("C13 Morawetz surrogate bounded", ratio <= 2.0, ratio, 2.0, "max / min over N"))
    return checks, fits


def beta_trends(betas, rows) -> tuple[list[CheckResult], dict]:
    """Tabulate the headline norms against β; no pass/fail beyond member completion."""
    betas = sorted(betas)
    by_key = _by_key(rows, "beta")
    fits = {}
    for key in (SH2K_TARGET, MORAWETZ_KEY):
        vals = by_key.get(key, {})
        fits[key[0]] = {"betas": betas, "values": [vals.get(b, math.nan) for b in betas]}
    ok = all(not any(math.isnan(v) for v in f["values"]) for f in fits.values())
    return [CheckResult("beta sweep members completed", ok, float(len(betas)), float(len(betas)),
                        "trend table only")], fits


def run_sweep(base: RunConfig, ns, out_dir, jobs: int = 1, param: str = "N") -> SweepResult:
    """Run one member per value of ``param`` (``N`` or ``beta``); aggregate norms and fits into ``out_dir``."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"unknown sweep parameter {param!r}; choose from {sorted(SWEEP_PARAMS)}")
    ns = [float(n) for n in ns]
    least = 4 if param == "N" else 2
    if len(ns) < least:
        raise ValueError(f"a sweep over {param} needs at least {least} values")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(member_config(base, n, param), str(out / f"{param}{n:g}")) for n in ns]
    t0 = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_member, tasks))
    else:
        results = [_member(t) for t in tasks]
    rows, errors = [], {}
    for rid, member_rows, err, _ in results:
        if err:
            errors[rid] = err
        rows.extend(member_rows)
    write_norms_csv(out / "sweep_norms.csv", rows)
    if errors:
        checks = [CheckResult("sweep members completed", False, len(errors), 0, json.dumps(errors))]
        fits = {}
    elif param == "N":
        checks, fits = sweep_checks(ns, rows)
    else:
        checks, fits = beta_trends(ns, rows)
    res = SweepResult(ns, rows, checks, fits, errors, time.perf_counter() - t0)
    summary = {"param": param, "values": ns, "fits": fits, "errors": errors,
               "checks": [asdict(c) for c in checks], "passed": res.passed}
    (out / "sweep_report.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=_jsonable),
                                           encoding="utf-8")
    return res
