"""Command line entry point: ``hfbkit {run,norms,sweep,check,report}``.

Exit codes: 0 when every check passes, 1 on a failed check or run, 2 on
usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config, sweep_preset
from .harness import execute_run, norm_battery, run_sweep, write_norms_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _config(args, default=RunConfig) -> RunConfig:
    cfg = load_config(args.config) if args.config else default()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None):
        cfg.output.dir = args.out
    return cfg.validate()


def cmd_run(args) -> int:
    cfg = _config(args)
    _, report = execute_run(cfg, cfg.output.dir)
    print(report.text())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_norms(args) -> int:
    from .trajectory_io import read_trajectory

    cfg = _config(args)
    try:
        traj = read_trajectory(args.trajectory)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    run_id = traj.meta.get("run_id", Path(args.trajectory).stem)
    rows = norm_battery(traj, cfg, run_id)
    out = Path(args.out) if args.out else Path(args.trajectory).parent
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{run_id}_norms.csv"
    write_norms_csv(path, rows)
    degenerate = sum(r.value == "degenerate" for r in rows)
    print(f"wrote {len(rows)} norms to {path}" + (f" ({degenerate} degenerate)" if degenerate else ""))
    return EXIT_OK


def _n_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_sweep(args) -> int:
    from .checks import SWEEP_NS

    cfg = _config(args, default=sweep_preset)
    if args.beta_list:
        param, values, least = "beta", args.beta_list, 2
    else:
        param, values, least = "N", args.n_list or list(SWEEP_NS), 4
    if len(values) < least:
        print(f"error: a sweep over {param} needs at least {least} values", file=sys.stderr)
        return EXIT_USAGE
    res = run_sweep(cfg, values, cfg.output.dir, jobs=args.jobs, param=param)
    for c in res.checks:
        print(c.line())
    print(f"sweep over {param}={','.join(f'{n:g}' for n in values)} took {res.elapsed:.1f} s")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_check(args) -> int:
    from .checks import SUITES

    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; available: all, {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_USAGE
    ok = True
    for name in names:
        for c in SUITES[name]():
            print(c.line())
            ok &= bool(c.passed)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_report(args) -> int:
    out = Path(args.out or "out")
    files = sorted(out.rglob("*_report.json"))
    if not files:
        print(f"error: no reports under {out}", file=sys.stderr)
        return EXIT_USAGE
    ok = True
    for f in files:
        rep = json.loads(f.read_text(encoding="utf-8"))
        print(f"{f.relative_to(out)}: {'PASS' if rep['passed'] else 'FAIL'}")
        for c in rep.get("checks", []):
            status = "PASS" if c["passed"] else "FAIL"
            print(f"  {status} {c['criterion']}: value={c['value']} threshold={c['threshold']}")
        ok &= bool(rep["passed"])
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hfbkit", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", metavar="PATH", help="key = value configuration file")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides output.dir)")
        if seed:
            p.add_argument("--seed", type=int, help="override the configured seed")

    p = sub.add_parser("run", help="simulate one configuration")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("norms", help="evaluate the norm battery on a trajectory file")
    p.add_argument("trajectory", help="HFB1 trajectory file")
    common(p, seed=False)
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("sweep", help="run an N-sweep (trend fits) or a beta-sweep (trend table)")
    common(p)
    which = p.add_mutually_exclusive_group()
    which.add_argument("--n-list", type=_n_list, help="comma-separated particle numbers (default 8,16,32,64,128)")
    which.add_argument("--beta-list", type=_n_list, help="comma-separated scaling exponents in (0, 1)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="run a named invariant suite")
    p.add_argument("--suite", required=True, help="suite name, or 'all'")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("report", help="summarize run and sweep reports in a directory")
    p.add_argument("--out", metavar="DIR", help="directory holding the reports (default: out)")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
