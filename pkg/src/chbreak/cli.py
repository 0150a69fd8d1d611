"""Batch command-line front end.

Subcommands:

    simulate        integrate a configured run; write trajectory CSV,
                    snapshot CSVs and a JSON summary
    forecast        write the breaking forecast of the configured
                    initial data as JSON
    travelwave      fit a traveling wave; write parameter JSON, profile
                    CSV and a first-integral constancy report
    verify-currents run the exact and floating-point current checks
    convergence     temporal and spatial refinement studies

Exit codes: 0 success, 2 config error, 3 verification failure,
4 numerical failure (non-finite run).  All outputs are plain CSV/JSON
with 17-significant-digit floats, so byte-identical reruns are
guaranteed for identical configs and seeds.  CHBREAK_THREADS caps the
worker pool used by the convergence sweep.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .breaking import forecast as breaking_forecast
from .breaking import DegenerateDataError
from .config import ConfigError, RunConfig, load_config
from .elliptic import (
    NoWaveError,
    fit_traveling_wave,
    first_integral_series,
    snoidal_profile,
)
from .equation import EquationParams
from .invariants import audit
from .jetspace import (
    JetPoint,
    builtin_currents,
    divergence_residual,
    divergence_residual_scale,
    equation_form,
    symbolic_cancellation,
)
from .spectral import PeriodicGrid, quadrature
from .timestepper import (
    TERMINATION_BREAKING,
    TERMINATION_COMPLETED,
    TERMINATION_NONFINITE,
    StepControl,
    integrate,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_NUMERICAL = 4


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.out is not None:
        cfg.out_dir = args.out
    return cfg


# ---------------------------------------------------------------- simulate

def _trajectory_rows(traj, lam):
    times = np.asarray(traj.times)
    if lam == 0.0:
        header = ["t", "min_slope", "xi", "H0", "H", "H1", "h1_norm", "m_h1_norm"]
        cols = [times, traj.min_slope, traj.xi, traj.inv_h0, traj.inv_h,
                traj.inv_h1, traj.u_h1_norm, traj.m_h1_norm]
    else:
        header = ["t", "min_slope", "xi", "H0w", "Hw", "h1_norm", "m_h1_norm"]
        w1 = np.exp(lam * times)
        w2 = np.exp(2.0 * lam * times)
        cols = [times, traj.min_slope, traj.xi,
                w1 * np.asarray(traj.inv_h0), w2 * np.asarray(traj.inv_h),
                traj.u_h1_norm, traj.m_h1_norm]
    return header, list(zip(*[np.asarray(c, dtype=float) for c in cols]))


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    u0 = cfg.make_initial_field()
    traj = integrate(u0, cfg.make_params(), cfg.control,
                     warn=None if args.quiet else lambda m: print(f"warning: {m}"))

    header, rows = _trajectory_rows(traj, cfg.lam)
    if "csv" in cfg.formats:
        _write_csv(out / "trajectory.csv", header, rows)
        snapdir = out / "snapshots"
        snapdir.mkdir(exist_ok=True)
        for i, (t, snap) in enumerate(zip(traj.times, traj.snapshots)):
            lines = [f"# t = {_fmt(t)}", "x,u"]
            lines += [f"{_fmt(x)},{_fmt(v)}" for x, v in zip(snap.grid.x, snap.values)]
            (snapdir / f"snap_{i:05d}.csv").write_text("\n".join(lines) + "\n")

    report = audit(traj, cfg.lam)
    summary = {
        "termination": traj.termination,
        "reason": traj.reason,
        "final_t": traj.final_time,
        "max_drift": {k: v for k, v in report.max_drift.items()},
        "records": len(traj.times),
    }
    if "json" in cfg.formats:
        _write_json(out / "summary.json", summary)
    _say(args, f"simulate: {traj.termination} at t={traj.final_time:.6g} "
               f"({len(traj.times)} records) -> {out}")
    if traj.termination == TERMINATION_NONFINITE:
        return EXIT_NUMERICAL
    return EXIT_OK


# ---------------------------------------------------------------- forecast

def cmd_forecast(args) -> int:
    cfg = _load(args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    u0 = cfg.make_initial_field()
    try:
        fc = breaking_forecast(u0, cfg.lam)
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    payload = fc.as_dict()
    payload["t_plus"] = payload["t_plus"] if np.isfinite(payload["t_plus"]) else "inf"
    _write_json(out / "forecast.json", payload)
    _say(args, f"forecast: condition_holds={fc.condition_holds} "
               f"t_plus={fc.t_plus:.6g} -> {out / 'forecast.json'}")
    return EXIT_OK


# ---------------------------------------------------------------- travelwave

def cmd_travelwave(args) -> int:
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    try:
        wave = fit_traveling_wave(args.L, args.k, mean_level=args.mean)
    except (NoWaveError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY if isinstance(exc, NoWaveError) else EXIT_CONFIG
    grid = PeriodicGrid(args.L, args.n)
    profile = snoidal_profile(wave, grid)
    bracket = first_integral_series(profile, wave.c)
    spread = float(bracket.values.max() - bracket.values.min())
    scale = max(1.0, float(np.max(np.abs(bracket.values))))

    _write_json(out / "wave.json", wave.as_dict())
    _write_csv(out / "profile.csv", ["x", "u"],
               zip(grid.x, profile.values))
    _write_json(out / "first_integral.json", {
        "A": wave.A,
        "bracket_mean": float(bracket.values.mean()),
        "bracket_spread": spread,
        "relative_spread": spread / scale,
        "tolerance": 1e-8 * scale,
        "constant": spread <= 1e-8 * scale,
    })
    _say(args, f"travelwave: c={wave.c:.6g} mean={wave.mean():.6g} "
               f"bracket spread={spread:.3e} -> {out}")
    if spread > 1e-8 * scale:
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------- currents

def cmd_verify_currents(args) -> int:
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    lam = args.lam
    F = equation_form(lam)
    triples = builtin_currents(lam)
    rng = np.random.default_rng(args.seed)
    results = []
    ok = True
    for idx, (c0, c1, phi) in enumerate(triples):
        cancel = symbolic_cancellation(c0, c1, phi, F)
        worst = 0.0
        for _ in range(args.trials):
            jet = JetPoint.random(rng)
            r = divergence_residual(c0, c1, phi, F, jet)
            s = divergence_residual_scale(c0, c1, phi, F, jet)
            worst = max(worst, abs(r) / s)
        entry = {
            "current": idx + 1,
            "symbolic_zero": cancel.is_zero(),
            "max_relative_residual": worst,
            "tolerance": 1e-12,
        }
        ok = ok and cancel.is_zero() and worst <= 1e-12
        results.append(entry)
        _say(args, f"current {idx + 1}: symbolic_zero={entry['symbolic_zero']} "
                   f"max residual={worst:.3e}")
    _write_json(out / "currents.json",
                {"lambda": lam, "trials": args.trials, "seed": args.seed,
                 "results": results, "all_ok": ok})
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------- convergence

def _final_error(u_ref, u):
    """L2 distance of u from the reference restricted to u's grid."""
    stride = u_ref.grid.n // u.grid.n
    diff = u.values - u_ref.values[::stride]
    return float(np.sqrt(u.grid.dx * np.sum(diff * diff)))


def cmd_convergence(args) -> int:
    cfg = _load(args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = cfg.make_params()
    threads = max(1, int(os.environ.get("CHBREAK_THREADS", "1")))

    def run(n, dt, t_end):
        grid = PeriodicGrid(cfg.grid_L, n)
        from .config import build_initial_field
        u0 = build_initial_field(grid, cfg.kind, cfg.data_params)
        ctl = StepControl(t_end=t_end, cfl=cfg.control.cfl,
                          dt_max=cfg.control.dt_max, dt_min=cfg.control.dt_min,
                          record_every=t_end, dealias=cfg.control.dealias,
                          slope_ceiling=cfg.control.slope_ceiling, fixed_dt=dt)
        traj = integrate(u0, params, ctl)
        if traj.termination != TERMINATION_COMPLETED:
            raise RuntimeError(f"convergence member run failed: {traj.reason}")
        return traj.final_state

    t_end = cfg.control.t_end
    dt0 = cfg.control.fixed_dt or cfg.control.dt_max
    rows = []

    # temporal refinement on the configured grid
    dts = [dt0 / 2**i for i in range(4)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(run, cfg.grid_n, dt, t_end) for dt in dts]
        futures.append(pool.submit(run, cfg.grid_n, dt0 / 32, t_end))
        states = [f.result() for f in futures]
    ref = states[-1]
    errs = [
        float(np.sqrt(quadrature((s - ref) * (s - ref)))) for s in states[:-1]
    ]
    for i, (dt, err) in enumerate(zip(dts, errs)):
        order = np.log2(errs[i - 1] / err) if i > 0 and err > 0 else float("nan")
        rows.append(("temporal", dt, err, order))

    # spatial refinement at fixed small dt
    dt_space = dts[-1]
    ns = [cfg.grid_n // 4, cfg.grid_n // 2, cfg.grid_n]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(run, n, dt_space, t_end) for n in ns]
        fut_ref = pool.submit(run, cfg.grid_n * 2, dt_space, t_end)
        states = [f.result() for f in futures]
        ref = fut_ref.result()
    errs_s = [_final_error(ref, s) for s in states]
    for i, (n, err) in enumerate(zip(ns, errs_s)):
        factor = errs_s[i - 1] / err if i > 0 and err > 0 else float("nan")
        rows.append(("spatial", n, err, factor))

    lines = ["study,resolution,error,order_or_factor"]
    for kind, res, err, order in rows:
        lines.append(f"{kind},{_fmt(res)},{_fmt(err)},{_fmt(order)}")
    (out / "convergence.csv").write_text("\n".join(lines) + "\n")
    temporal_orders = [r[3] for r in rows if r[0] == "temporal"][1:]
    _write_json(out / "convergence.json", {
        "temporal_orders": temporal_orders,
        "spatial_factors": [r[3] for r in rows if r[0] == "spatial"][1:],
    })
    _say(args, f"convergence: temporal orders {['%.2f' % o for o in temporal_orders]} -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="chbreak", description=__doc__,
                                  formatter_class=argparse.RawDescriptionHelpFormatter)
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="path to INI run config")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=0, help="RNG seed where applicable")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    common(sub.add_parser("simulate", help="integrate a configured run"))
    common(sub.add_parser("forecast", help="breaking forecast of the initial data"))

    tw = sub.add_parser("travelwave", help="fit a periodic traveling wave")
    tw.add_argument("--L", type=float, required=True, help="wave period")
    tw.add_argument("--k", type=float, required=True, help="elliptic modulus in (0,1)")
    tw.add_argument("--mean", type=float, default=None,
                    help="branch selector: prefer the branch with nearer mean")
    tw.add_argument("--n", type=int, default=512, help="profile sample count")
    common(tw, needs_config=False)

    vc = sub.add_parser("verify-currents", help="exact current verification")
    vc.add_argument("--lam", type=float, default=0.0, help="dissipation constant")
    vc.add_argument("--trials", type=int, default=1000, help="random jet points")
    common(vc, needs_config=False)

    common(sub.add_parser("convergence", help="refinement studies"))
    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "forecast": cmd_forecast,
        "travelwave": cmd_travelwave,
        "verify-currents": cmd_verify_currents,
        "convergence": cmd_convergence,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
