"""Command-line entry points binding the toolkit into runnable workflows."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from typing import List, Optional

import numpy as np

from . import errors as err
from .errors import A2GError, SchemaError, MalformedPattern
from .harness import (
    CampaignConfig,
    experiment_offline,
    experiment_online,
    distance_error_m,
    run_campaign,
)
from .locate import (
    LocalizerConfig,
    SelectionStrategy,
    fixed_point_localize,
    moving_average,
    online_localize,
)
from .patternest import estimate_pattern
from .propagation import GroundParams, PropagationModel
from .traceio import (
    MeasurementTrace,
    load_campaign_config,
    load_trace,
    resolve_pattern,
    write_estimated_pattern,
    write_offline_curve,
    write_offline_estimates,
    write_online_curve,
    write_online_steps,
    write_trace,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

_DATA_ERRORS = (SchemaError, MalformedPattern, FileNotFoundError, IsADirectoryError, PermissionError)
_NUMERICAL_ERRORS = (
    err.DegenerateLink,
    err.DegenerateGeometry,
    err.DegenerateTrajectory,
    err.RankDeficient,
    err.InsufficientSamples,
    err.NonPositivePower,
    err.EmptyInput,
    err.CoincidentPoints,
)


def _apply_campaign_overrides(cfg: CampaignConfig, args) -> CampaignConfig:
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "sigma_db", None) is not None:
        cfg = replace(cfg, sigma_db=args.sigma_db)
    if getattr(args, "epsilon0", None) is not None:
        cfg = replace(cfg, ground=GroundParams(epsilon0=args.epsilon0))
    if getattr(args, "model", None) is not None:
        cfg = replace(cfg, model=PropagationModel(args.model))
    if getattr(args, "height", None) is not None:
        cfg = replace(cfg, trajectory=replace(cfg.trajectory, height_m=args.height))
    return cfg


def _apply_localizer_overrides(loc: LocalizerConfig, args) -> LocalizerConfig:
    if getattr(args, "seed", None) is not None:
        loc = replace(loc, seed=args.seed)
    if getattr(args, "n", None) is not None:
        loc = replace(loc, n_samples=args.n)
    if getattr(args, "k", None) is not None:
        loc = replace(loc, k_iters=args.k)
    if getattr(args, "m", None) is not None:
        loc = replace(loc, m_samples=args.m)
    if getattr(args, "n_max", None) is not None:
        loc = replace(loc, n_max=args.n_max)
    if getattr(args, "strategy", None) is not None:
        loc = replace(loc, selection=SelectionStrategy(args.strategy))
    if getattr(args, "ma_window", None) is not None:
        loc = replace(loc, ma_window=args.ma_window)
    return loc


def _patterns_for(args, cfg: CampaignConfig):
    base = os.path.dirname(os.path.abspath(args.config)) if args.config else "."
    tx = resolve_pattern(args.pattern, base) if args.pattern else cfg.tx_pattern
    rx = resolve_pattern(args.rx_pattern, base) if args.rx_pattern else cfg.rx_pattern
    return tx, rx


def _cmd_simulate(args) -> int:
    cfg, _ = load_campaign_config(args.config)
    cfg = _apply_campaign_overrides(cfg, args)
    trace = run_campaign(cfg)
    out = MeasurementTrace(
        measurements=trace,
        site_id=os.path.splitext(os.path.basename(args.config))[0],
        uav_height_m=cfg.trajectory.height_m,
        freq_hz=cfg.carrier.freq_hz,
        comments=[
            "a2gkit simulate seed=%d model=%s sigma_db=%.9g epsilon0=%.9g"
            % (cfg.seed, cfg.model.value, cfg.sigma_db, cfg.ground.epsilon0)
        ],
    )
    write_trace(out, args.out)
    return EXIT_OK


def _cmd_localize_offline(args) -> int:
    cfg, loc = load_campaign_config(args.config)
    loc = _apply_localizer_overrides(loc, args)
    tx, rx = _patterns_for(args, cfg)
    trace = moving_average(load_trace(args.trace).measurements, loc.ma_window)
    proj = cfg.projection()
    rng = np.random.default_rng(loc.seed)
    idx = rng.choice(len(trace), size=min(loc.n_samples, len(trace)), replace=False)
    subset = [trace[i] for i in idx]
    estimates = fixed_point_localize(subset, tx, rx, cfg.bs.alt_m, loc, cfg.carrier, proj)
    errors = [distance_error_m(e, cfg.bs, proj) for e in estimates]
    write_offline_estimates(
        estimates,
        args.out,
        errors_m=errors,
        comments=[
            "a2gkit localize-offline seed=%d n=%d k=%d ma_window=%d"
            % (loc.seed, loc.n_samples, loc.k_iters, loc.ma_window)
        ],
    )
    return EXIT_OK


def _cmd_localize_online(args) -> int:
    cfg, loc = load_campaign_config(args.config)
    loc = _apply_localizer_overrides(loc, args)
    tx, rx = _patterns_for(args, cfg)
    trace = moving_average(load_trace(args.trace).measurements, loc.ma_window)
    proj = cfg.projection()
    steps = online_localize(
        trace, tx, rx, cfg.bs.alt_m, loc, cfg.trajectory.waypoints, cfg.carrier, proj
    )
    errors = [distance_error_m(s.weighted, cfg.bs, proj) for s in steps]
    write_online_steps(
        steps,
        args.out,
        errors_m=errors,
        comments=[
            "a2gkit localize-online seed=%d m=%d n_max=%d k=%d strategy=%s"
            % (loc.seed, loc.m_samples, loc.n_max, loc.k_iters, loc.selection.value)
        ],
    )
    return EXIT_OK


def _cmd_estimate_pattern(args) -> int:
    cfg, _ = load_campaign_config(args.config)
    trace = load_trace(args.trace)
    est = estimate_pattern(
        trace.measurements, cfg.bs, cfg.carrier, cfg.projection(), bin_deg=args.bin_deg
    )
    write_estimated_pattern(
        est, args.out, comments=["a2gkit estimate-pattern bin_deg=%.9g" % args.bin_deg]
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    cfg, loc = load_campaign_config(args.config)
    cfg = _apply_campaign_overrides(cfg, args)
    loc = _apply_localizer_overrides(loc, args)
    options = {}
    for name in args.patterns.split(","):
        name = name.strip()
        if name == "matched":
            options[name] = (cfg.tx_pattern, cfg.rx_pattern)
        elif name in ("dipole", "isotropic"):
            p = resolve_pattern(name)
            options[name] = (p, p)
        else:
            raise SchemaError(f"unknown pattern option {name!r}")
    header = "a2gkit eval mode=%s seed=%d loc_seed=%d" % (args.mode, cfg.seed, loc.seed)
    if args.mode == "offline":
        n_values = [int(v) for v in args.n_list.split(",")]
        rows = experiment_offline(cfg, loc, args.trials, n_values, options)
        write_offline_curve(rows, args.out, comments=[header])
    else:
        strategies = [SelectionStrategy(s.strip()) for s in args.strategies.split(",")]
        rows = experiment_online(cfg, loc, options, strategies, reverse_route=args.reverse)
        write_online_curve(rows, args.out, comments=[header])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="a2gkit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="synthesize a measurement trace from a site config")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--sigma-db", dest="sigma_db", type=float)
    sim.add_argument("--epsilon0", type=float)
    sim.add_argument("--model", choices=[m.value for m in PropagationModel])
    sim.add_argument("--height", type=float, help="override flight height (m)")
    sim.set_defaults(func=_cmd_simulate)

    off = sub.add_parser("localize-offline", help="fixed-point localization on a trace")
    off.add_argument("--config", required=True)
    off.add_argument("--trace", required=True)
    off.add_argument("--pattern", help="tx pattern: isotropic, dipole, or CSV path")
    off.add_argument("--rx-pattern", dest="rx_pattern")
    off.add_argument("--n", type=int)
    off.add_argument("--k", type=int)
    off.add_argument("--ma-window", dest="ma_window", type=int)
    off.add_argument("--seed", type=int)
    off.add_argument("--out", required=True)
    off.set_defaults(func=_cmd_localize_offline)

    onl = sub.add_parser("localize-online", help="buffered online localization on a trace")
    onl.add_argument("--config", required=True)
    onl.add_argument("--trace", required=True)
    onl.add_argument("--pattern")
    onl.add_argument("--rx-pattern", dest="rx_pattern")
    onl.add_argument("--m", type=int)
    onl.add_argument("--n-max", dest="n_max", type=int)
    onl.add_argument("--k", type=int)
    onl.add_argument("--strategy", choices=[s.value for s in SelectionStrategy])
    onl.add_argument("--ma-window", dest="ma_window", type=int)
    onl.add_argument("--seed", type=int)
    onl.add_argument("--out", required=True)
    onl.set_defaults(func=_cmd_localize_online)

    pat = sub.add_parser("estimate-pattern", help="binned combined-gain estimate from a trace")
    pat.add_argument("--config", required=True)
    pat.add_argument("--trace", required=True)
    pat.add_argument("--bin-deg", dest="bin_deg", type=float, default=1.0)
    pat.add_argument("--out", required=True)
    pat.set_defaults(func=_cmd_estimate_pattern)

    ev = sub.add_parser("eval", help="offline/online RMSE experiment curves")
    ev.add_argument("--config", required=True)
    ev.add_argument("--mode", choices=["offline", "online"], required=True)
    ev.add_argument("--trials", type=int, default=5)
    ev.add_argument("--n-list", dest="n_list", default="50,100,200,300")
    ev.add_argument("--strategies", default="random,equal,waypoint")
    ev.add_argument("--patterns", default="matched,dipole,isotropic")
    ev.add_argument("--reverse", action=argparse.BooleanOptionalAction, default=True)
    ev.add_argument("--seed", type=int)
    ev.add_argument("--sigma-db", dest="sigma_db", type=float)
    ev.add_argument("--epsilon0", type=float)
    ev.add_argument("--model", choices=[m.value for m in PropagationModel])
    ev.add_argument("--out", required=True)
    ev.set_defaults(func=_cmd_eval)
    return p


def cli_dispatch(argv: Optional[List[str]] = None) -> int:
    """Parse argv and run one subcommand; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except _DATA_ERRORS as exc:
        print(f"a2gkit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except _NUMERICAL_ERRORS as exc:
        print(f"a2gkit: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (A2GError, ValueError) as exc:
        print(f"a2gkit: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
