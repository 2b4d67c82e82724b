"""Command-line experiment runner.

Verbs:
    run <config>      integrate the closed loop, write CSV/SVG artifacts, fit rates
    sweep <config>    run the practical-stability probe over its omega grid
    lemma-check ...   compare the comparison-ODE closed form against RK4

Configs are file paths or bundled names (see ueslab/configs/).  The env var
UESLAB_OUT overrides the output directory.  Exit codes: 0 ok, 2 config error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from importlib import resources
from pathlib import Path
from typing import List, Optional

import numpy as np

from .analysis import fit_exp_rate, fit_power_rate, fit_report_csv, oscillation_amplitude
from .averaging import practical_stability_probe, probe_rows_csv
from .config import ExperimentConfig, config_from_text, load_config
from .controllers import es_closed_loop
from .errors import AssemblyError, ConfigError, IntegrationDiverged, WindowTooLate
from .schedules import ASYMPTOTIC, EXPONENTIAL, NOMINAL
from .sim import Lemma1Params, Trajectory, integrate, lemma1_rhs, lemma1_solution
from .svgplot import line_plot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

LEMMA_TOL = 1e-6


def bundled_config_names() -> List[str]:
    root = resources.files("ueslab").joinpath("configs")
    return sorted(path.name[: -len(".conf")] for path in root.iterdir() if path.name.endswith(".conf"))


def resolve_config(arg: str) -> ExperimentConfig:
    path = Path(arg)
    if path.exists():
        return load_config(path)
    name = arg[: -len(".conf")] if arg.endswith(".conf") else arg
    res = resources.files("ueslab").joinpath("configs", f"{name}.conf")
    if res.is_file():
        return config_from_text(res.read_text(encoding="utf-8"), name=name, source=f"bundled:{name}")
    raise ConfigError(f"no config file '{arg}' and no bundled config '{name}'; bundled: {', '.join(bundled_config_names())}")


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(os.environ.get("UESLAB_OUT") or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_run_artifacts(cfg: ExperimentConfig, out: Path, traj: Trajectory, fits) -> None:
    (out / f"{cfg.name}.trajectory.csv").write_text(traj.to_csv(), encoding="utf-8")
    (out / f"{cfg.name}.fits.csv").write_text(fit_report_csv(fits), encoding="utf-8")
    series = [(traj.times, traj.theta[:, i], f"theta_{i + 1}") for i in range(traj.n)]
    if traj.y is not None:
        series.append((traj.times, traj.y, "y"))
    svg = line_plot(series, title=cfg.name, xlabel="t")
    (out / f"{cfg.name}.svg").write_text(svg, encoding="utf-8")


def cmd_run(args) -> int:
    cfg = resolve_config(args.config)
    out = _out_dir(cfg)
    p, map_ = cfg.params, cfg.map
    n = p.n
    t0 = p.schedule.t0
    rhs = es_closed_loop(p, map_)
    x0 = np.append(cfg.theta0, cfg.eta0)
    y_fn = lambda x, t: map_.eval(x[:n])

    try:
        traj = integrate(rhs, x0, t0, t0 + cfg.horizon, cfg.dt, cfg.record_every, y_fn=y_fn, n=n, meta={"config": cfg.name})
    except IntegrationDiverged as e:
        if e.trajectory is not None:
            _write_run_artifacts(cfg, out, e.trajectory, [])
        print(f"{cfg.name}: integration diverged at t = {e.t_last:g}; partial artifacts in {out}", file=sys.stderr)
        return EXIT_NUMERIC

    bits = [f"{cfg.name}:"]
    if map_.optimum is not None:
        gap = float(np.linalg.norm(traj.theta[-1] - map_.optimum))
        bits.append(f"final |theta - theta*| = {gap:.6g};")

    fits = []
    if map_.optimum is not None and p.schedule.kind != NOMINAL:
        window = cfg.fit_window or (t0 + 0.1 * cfg.horizon, t0 + cfg.horizon)
        try:
            if p.schedule.kind == ASYMPTOTIC:
                fit = fit_power_rate(traj, map_.optimum, p.schedule.beta, t0, window)
                bits.append(f"power-law exponent = {fit.estimate:.4g} (residual {fit.residual:.3g});")
            else:
                fit = fit_exp_rate(traj, map_.optimum, window)
                bits.append(f"exponential rate = {fit.estimate:.4g} (residual {fit.residual:.3g});")
            fits.append(fit)
        except WindowTooLate as e:
            bits.append(f"rate fit skipped ({e});")
    elif p.schedule.kind == NOMINAL:
        try:
            _, amp = oscillation_amplitude(traj, cfg.tail_fraction)
            bits.append(f"tail oscillation amplitude = {amp:.4g};")
        except ValueError:
            pass

    _write_run_artifacts(cfg, out, traj, fits)
    bits.append(f"artifacts in {out}")
    print(" ".join(bits))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = resolve_config(args.config)
    if cfg.probe is None:
        raise ConfigError(f"config '{cfg.name}' has no probe.* settings; sweep needs probe.omegas, "
                          "probe.epsilon, probe.delta, probe.horizon, probe.trials")
    out = _out_dir(cfg)
    rows = practical_stability_probe(cfg.params, cfg.map, cfg.probe)
    (out / f"{cfg.name}.probe.csv").write_text(probe_rows_csv(rows), encoding="utf-8")
    worst = {}
    for row in rows:
        worst[row.omega] = max(worst.get(row.omega, 0.0), row.sup_gap)
    gaps = ", ".join(f"omega={w:g}: worst sup_gap {g:.4g}" for w, g in sorted(worst.items()))
    print(f"{cfg.name}: probe wrote {len(rows)} rows ({gaps}); artifacts in {out}")
    return EXIT_OK


def cmd_lemma_check(args) -> int:
    try:
        params = Lemma1Params(beta=args.beta, eps1=args.eps1, eps2=args.eps2, p=args.p, q=args.q, v0=args.v0)
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.t1 <= params.t0 or args.dt <= 0.0:
        print(f"config error: need t1 > {params.t0} and dt > 0, got t1 = {args.t1}, dt = {args.dt}", file=sys.stderr)
        return EXIT_CONFIG
    rhs = lambda V, t: lemma1_rhs(params, V, t)
    traj = integrate(rhs, params.v0, params.t0, args.t1, args.dt)
    numeric = traj.states[:, 0]
    exact = np.array([lemma1_solution(params, t) for t in traj.times])
    rel = float(np.max(np.abs(numeric - exact) / exact))
    verdict = "ok" if rel < LEMMA_TOL else "FAIL"
    print(f"comparison-ODE check: max relative error {rel:.3e} on [{params.t0:g}, {args.t1:g}] with dt = {args.dt:g} ({verdict})")
    return EXIT_OK if rel < LEMMA_TOL else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ueslab", description="Extremum-seeking simulation lab")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="integrate a closed-loop experiment and write artifacts")
    p_run.add_argument("config", help="config file path or bundled config name")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the practical-stability probe over its omega grid")
    p_sweep.add_argument("config", help="config file path or bundled config name")
    p_sweep.set_defaults(func=cmd_sweep)

    p_lemma = sub.add_parser("lemma-check", help="compare the comparison-ODE closed form against RK4")
    for flag in ("--beta", "--eps1", "--eps2", "--p", "--q", "--v0"):
        p_lemma.add_argument(flag, type=float, required=True)
    p_lemma.add_argument("--t1", type=float, default=100.0, help="end time (default 100)")
    p_lemma.add_argument("--dt", type=float, default=1e-3, help="integration step (default 1e-3)")
    p_lemma.set_defaults(func=cmd_lemma_check)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, AssemblyError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationDiverged as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FloatingPointError, OverflowError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
