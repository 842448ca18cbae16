"""Synthetic campaign harness: waypoint flights, RSRP traces, RMSE evaluation.

Reproduces the measurement methodology at desk scale: a UAV flies a waypoint
route at fixed height and constant speed, one RSRP sample is synthesized per
sample period, and localization experiments sweep sample counts (offline) or
replay the trace as a stream (online), reporting RMSE against the known
transmitter location. Every experiment is a pure function of its
configuration and seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .antenna import AntennaPattern
from .errors import DegenerateTrajectory, EmptyInput
from .geo import GeoPoint, ProjectionConfig, haversine_distance, link_geometry, planar_offsets
from .locate import (
    LocalizerConfig,
    LocEstimate,
    Measurement,
    SelectionStrategy,
    fixed_point_localize,
    moving_average,
    online_localize,
)
from .propagation import (
    CarrierConfig,
    GroundParams,
    PropagationModel,
    ShadowingModel,
    synthesize_rsrp,
)


@dataclass(frozen=True)
class Trajectory:
    """Waypoint route flown at fixed height and constant ground speed."""

    waypoints: Tuple[GeoPoint, ...]
    height_m: float
    speed_mps: float
    sample_period_s: float

    def __post_init__(self) -> None:
        if len(self.waypoints) < 2:
            raise ValueError("need at least 2 waypoints")
        if self.speed_mps <= 0.0:
            raise ValueError("speed_mps must be positive")
        if self.sample_period_s <= 0.0:
            raise ValueError("sample_period_s must be positive")

    def reversed(self) -> "Trajectory":
        return replace(self, waypoints=tuple(reversed(self.waypoints)))


@dataclass(frozen=True)
class CampaignConfig:
    """Everything needed to synthesize one measurement flight."""

    bs: GeoPoint
    carrier: CarrierConfig
    ground: GroundParams
    model: PropagationModel
    tx_pattern: AntennaPattern
    rx_pattern: AntennaPattern
    trajectory: Trajectory
    sigma_db: float = 0.0
    seed: int = 0

    def projection(self) -> ProjectionConfig:
        return ProjectionConfig.centered_on(self.bs)


def gen_trajectory(t: Trajectory) -> List[Tuple[float, GeoPoint]]:
    """Sample the route every sample_period_s at constant speed.

    Positions interpolate linearly along each leg; the final sample is pinned
    to the route end, so a run of duration D yields ceil(D / period) + 1
    samples.
    """
    proj = ProjectionConfig.centered_on(t.waypoints[0])
    legs = [
        haversine_distance(a, b, proj) for a, b in zip(t.waypoints[:-1], t.waypoints[1:])
    ]
    cum = np.concatenate(([0.0], np.cumsum(legs)))
    total = float(cum[-1])
    if total == 0.0:
        raise DegenerateTrajectory("route has zero length")
    duration = total / t.speed_mps

    out: List[Tuple[float, GeoPoint]] = []
    n_steps = math.ceil(duration / t.sample_period_s)
    for k in range(n_steps + 1):
        ts = min(k * t.sample_period_s, duration)
        s = ts * t.speed_mps
        i = min(int(np.searchsorted(cum, s, side="right")) - 1, len(legs) - 1)
        frac = 0.0 if legs[i] == 0.0 else (s - cum[i]) / legs[i]
        a, b = t.waypoints[i], t.waypoints[i + 1]
        out.append(
            (
                ts,
                GeoPoint(
                    lon_deg=a.lon_deg + frac * (b.lon_deg - a.lon_deg),
                    lat_deg=a.lat_deg + frac * (b.lat_deg - a.lat_deg),
                    alt_m=t.height_m,
                ),
            )
        )
    return out


def run_campaign(cfg: CampaignConfig) -> List[Measurement]:
    """Synthesize one RSRP measurement per trajectory sample."""
    proj = cfg.projection()
    sh = ShadowingModel(cfg.sigma_db, cfg.seed)
    out = []
    for ts, pos in gen_trajectory(cfg.trajectory):
        geom = link_geometry(cfg.bs, pos, proj)
        sample = synthesize_rsrp(
            geom, cfg.model, cfg.tx_pattern, cfg.rx_pattern, cfg.carrier, cfg.ground, sh
        )
        out.append(Measurement(t_s=ts, uav=pos, rsrp_dbm=sample.rsrp_dbm))
    return out


def distance_error_m(est: LocEstimate, truth: GeoPoint, proj: ProjectionConfig) -> float:
    """Planar distance in meters between an estimate and the true location."""
    east, north = planar_offsets(truth.lon_deg, truth.lat_deg, est.lon_deg, est.lat_deg, proj)
    return float(np.hypot(east, north))


def evaluate_rmse(
    estimates: Sequence[LocEstimate], truth: GeoPoint, proj: ProjectionConfig
) -> float:
    """Root mean square of the planar distance errors of the estimates."""
    if not estimates:
        raise EmptyInput("no estimates")
    errs = np.array([distance_error_m(e, truth, proj) for e in estimates])
    return float(np.sqrt(np.mean(errs**2)))


@dataclass(frozen=True)
class OfflineCurvePoint:
    n_samples: int
    rmse_m: float
    pattern: str


@dataclass(frozen=True)
class OnlineCurvePoint:
    t_s: float
    rmse_m: float
    pattern: str
    strategy: str


PatternOptions = Dict[str, Tuple[AntennaPattern, AntennaPattern]]


def experiment_offline(
    cfg: CampaignConfig,
    loc_cfg: LocalizerConfig,
    trials: int,
    n_values: Sequence[int],
    loc_patterns: PatternOptions,
) -> List[OfflineCurvePoint]:
    """RMSE versus sample count N, per localization pattern option.

    One campaign is synthesized from cfg; each trial draws its own N random
    samples (the draw is shared across pattern options so comparisons are
    paired) and runs the fixed-point localizer; the final iterate's error
    enters the RMSE for that (N, pattern) point.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    trace = moving_average(run_campaign(cfg), loc_cfg.ma_window)
    proj = cfg.projection()
    rows: List[OfflineCurvePoint] = []
    for name, (txp, rxp) in loc_patterns.items():
        for n in n_values:
            errs = []
            for trial in range(trials):
                rng = np.random.default_rng([loc_cfg.seed, trial, n])
                idx = rng.choice(len(trace), size=min(n, len(trace)), replace=False)
                subset = [trace[i] for i in idx]
                ests = fixed_point_localize(
                    subset, txp, rxp, cfg.bs.alt_m, loc_cfg, cfg.carrier, proj
                )
                errs.append(distance_error_m(ests[-1], cfg.bs, proj))
            rows.append(
                OfflineCurvePoint(
                    n_samples=n,
                    rmse_m=float(np.sqrt(np.mean(np.array(errs) ** 2))),
                    pattern=name,
                )
            )
    return rows


def experiment_online(
    cfg: CampaignConfig,
    loc_cfg: LocalizerConfig,
    loc_patterns: PatternOptions,
    strategies: Sequence[SelectionStrategy],
    reverse_route: bool = True,
) -> List[OnlineCurvePoint]:
    """Time-indexed RMSE of the online localizer per pattern and strategy.

    With reverse_route the trajectory is replayed from its last waypoint to
    the first (the approach flight); the trace is prefiltered with the
    configured moving-average window before streaming.
    """
    run_cfg = cfg if not reverse_route else replace(cfg, trajectory=cfg.trajectory.reversed())
    trace = moving_average(run_campaign(run_cfg), loc_cfg.ma_window)
    proj = cfg.projection()
    waypoints = run_cfg.trajectory.waypoints
    rows: List[OnlineCurvePoint] = []
    for name, (txp, rxp) in loc_patterns.items():
        for strat in strategies:
            steps = online_localize(
                trace,
                txp,
                rxp,
                cfg.bs.alt_m,
                replace(loc_cfg, selection=strat),
                waypoints,
                cfg.carrier,
                proj,
            )
            for s in steps:
                rows.append(
                    OnlineCurvePoint(
                        t_s=s.t_s,
                        rmse_m=distance_error_m(s.weighted, cfg.bs, proj),
                        pattern=name,
                        strategy=strat.value,
                    )
                )
    return rows
