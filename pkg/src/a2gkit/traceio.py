"""CSV ingestion/emission and config-file parsing.

Measurement traces use the schema ``t_s,lon_deg,lat_deg,alt_m,rsrp_dbm`` with
``#`` comment lines for metadata. All emitted numbers are formatted with 9
significant digits so that emit(load(f)) is byte-identical for files this
module wrote. Writes go through a temp file and a rename.
"""

from __future__ import annotations

import configparser
import csv
import math
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .antenna import AntennaPattern, load_pattern
from .errors import SchemaError
from .geo import GeoPoint
from .harness import CampaignConfig, OfflineCurvePoint, OnlineCurvePoint, Trajectory
from .locate import LocalizerConfig, Measurement, OnlineStep, SelectionStrategy
from .patternest import EstimatedPattern
from .propagation import CarrierConfig, GroundParams, PropagationModel

TRACE_HEADER = ["t_s", "lon_deg", "lat_deg", "alt_m", "rsrp_dbm"]


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    os.replace(tmp, path)


@dataclass
class MeasurementTrace:
    """Ordered measurement rows plus optional campaign metadata."""

    measurements: List[Measurement]
    site_id: str = ""
    uav_height_m: Optional[float] = None
    freq_hz: Optional[float] = None
    comments: List[str] = field(default_factory=list)


def load_trace(path) -> MeasurementTrace:
    """Load and validate a measurement CSV; rows must be time-sorted."""
    meta = {}
    rows: List[Measurement] = []
    header_seen = False
    with open(path, "r", encoding="utf-8", newline="") as f:
        for lineno, rec in enumerate(csv.reader(f), start=1):
            if not rec:
                continue
            if rec[0].lstrip().startswith("#"):
                text = ",".join(rec).lstrip()[1:].strip()
                if "=" in text:
                    k, _, v = text.partition("=")
                    meta[k.strip()] = v.strip()
                continue
            if not header_seen:
                if [c.strip() for c in rec] != TRACE_HEADER:
                    raise SchemaError(f"bad header {rec}, expected {TRACE_HEADER}")
                header_seen = True
                continue
            if len(rec) != 5:
                raise SchemaError(f"line {lineno}: expected 5 fields, got {len(rec)}")
            try:
                vals = [float(v) for v in rec]
            except ValueError as exc:
                raise SchemaError(f"line {lineno}: non-numeric field in {rec}") from exc
            if not all(math.isfinite(v) for v in vals):
                raise SchemaError(f"line {lineno}: non-finite value in {rec}")
            t_s, lon, lat, alt, rsrp = vals
            if rows and t_s < rows[-1].t_s:
                raise SchemaError(
                    f"row {len(rows) + 1}: timestamp {t_s} regresses below {rows[-1].t_s}"
                )
            try:
                rows.append(Measurement(t_s=t_s, uav=GeoPoint(lon, lat, alt), rsrp_dbm=rsrp))
            except ValueError as exc:
                raise SchemaError(f"line {lineno}: {exc}") from exc
    if not header_seen:
        raise SchemaError("missing header row")
    return MeasurementTrace(
        measurements=rows,
        site_id=meta.get("site_id", ""),
        uav_height_m=float(meta["uav_height_m"]) if "uav_height_m" in meta else None,
        freq_hz=float(meta["freq_hz"]) if "freq_hz" in meta else None,
    )


def write_trace(trace: MeasurementTrace, path) -> None:
    lines = []
    for c in trace.comments:
        lines.append(f"# {c}")
    if trace.site_id:
        lines.append(f"# site_id={trace.site_id}")
    if trace.uav_height_m is not None:
        lines.append(f"# uav_height_m={_fmt(trace.uav_height_m)}")
    if trace.freq_hz is not None:
        lines.append(f"# freq_hz={_fmt(trace.freq_hz)}")
    lines.append(",".join(TRACE_HEADER))
    for m in trace.measurements:
        lines.append(
            ",".join(
                _fmt(v) for v in (m.t_s, m.uav.lon_deg, m.uav.lat_deg, m.uav.alt_m, m.rsrp_dbm)
            )
        )
    _atomic_write(str(path), "\n".join(lines) + "\n")


def write_estimated_pattern(est: EstimatedPattern, path, comments: Sequence[str] = ()) -> None:
    """Emit visited bins as ``az_deg,el_deg,gain_db,count`` rows."""
    lines = [f"# {c}" for c in comments]
    lines.append("az_deg,el_deg,gain_db,count")
    for i, az in enumerate(est.az_bins_deg):
        for j, el in enumerate(est.el_bins_deg):
            if est.counts[i, j] > 0:
                lines.append(
                    f"{_fmt(az)},{_fmt(el)},{_fmt(est.gain_db[i, j])},{est.counts[i, j]}"
                )
    _atomic_write(str(path), "\n".join(lines) + "\n")


def write_offline_curve(rows: Sequence[OfflineCurvePoint], path, comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append("n_samples,rmse_m,pattern")
    for r in rows:
        lines.append(f"{r.n_samples},{_fmt(r.rmse_m)},{r.pattern}")
    _atomic_write(str(path), "\n".join(lines) + "\n")


def write_online_curve(rows: Sequence[OnlineCurvePoint], path, comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append("t_s,rmse_m,pattern,strategy")
    for r in rows:
        lines.append(f"{_fmt(r.t_s)},{_fmt(r.rmse_m)},{r.pattern},{r.strategy}")
    _atomic_write(str(path), "\n".join(lines) + "\n")


def write_online_steps(
    steps: Sequence[OnlineStep],
    path,
    errors_m: Optional[Sequence[float]] = None,
    comments: Sequence[str] = (),
) -> None:
    """Per-arrival fused estimates; the error column is NaN without ground truth."""
    lines = [f"# {c}" for c in comments]
    lines.append("t_s,est_lon_deg,est_lat_deg,weight,residual_m2,rmse_m")
    for i, s in enumerate(steps):
        err = errors_m[i] if errors_m is not None else float("nan")
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    s.t_s,
                    s.weighted.lon_deg,
                    s.weighted.lat_deg,
                    s.weight,
                    s.residual_m2,
                    err,
                )
            )
        )
    _atomic_write(str(path), "\n".join(lines) + "\n")


def write_offline_estimates(
    estimates, path, errors_m: Optional[Sequence[float]] = None, comments: Sequence[str] = ()
) -> None:
    """Per-iteration estimates of one fixed-point run."""
    lines = [f"# {c}" for c in comments]
    lines.append("k,est_lon_deg,est_lat_deg,err_m")
    for k, e in enumerate(estimates, start=1):
        err = errors_m[k - 1] if errors_m is not None else float("nan")
        lines.append(f"{k},{_fmt(e.lon_deg)},{_fmt(e.lat_deg)},{_fmt(err)}")
    _atomic_write(str(path), "\n".join(lines) + "\n")


def resolve_pattern(spec: str, base_dir: str = ".") -> AntennaPattern:
    """Turn a config/CLI pattern spec into a pattern.

    ``isotropic`` and ``dipole`` select the analytic options; anything else is
    a tabulated-pattern CSV path, relative paths resolving against base_dir.
    """
    s = spec.strip()
    if s == "isotropic":
        return AntennaPattern.isotropic()
    if s == "dipole":
        return AntennaPattern.dipole()
    path = s if os.path.isabs(s) else os.path.join(base_dir, s)
    return load_pattern(path)


def _parse_waypoints(raw: str) -> tuple:
    wps = []
    for line in raw.strip().splitlines():
        parts = line.replace(",", " ").split()
        if not parts:
            continue
        if len(parts) != 2:
            raise SchemaError(f"waypoint line needs 'lon lat': {line!r}")
        wps.append(GeoPoint(lon_deg=float(parts[0]), lat_deg=float(parts[1])))
    return tuple(wps)


def load_campaign_config(path) -> tuple[CampaignConfig, LocalizerConfig]:
    """Parse the key=value site config into campaign and localizer configs."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = cp.read(path)
    if not read:
        raise SchemaError(f"cannot read config {path}")
    base_dir = os.path.dirname(os.path.abspath(path))
    try:
        site = cp["site"]
        carrier = cp["carrier"]
        model = cp["model"] if cp.has_section("model") else {}
        ground = cp["ground"] if cp.has_section("ground") else {}
        traj = cp["trajectory"]
        patterns = cp["patterns"] if cp.has_section("patterns") else {}

        bs = GeoPoint(
            lon_deg=float(site["bs_lon_deg"]),
            lat_deg=float(site["bs_lat_deg"]),
            alt_m=float(site.get("bs_alt_m", "10")),
        )
        campaign = CampaignConfig(
            bs=bs,
            carrier=CarrierConfig(
                freq_hz=float(carrier.get("freq_hz", "3.51e9")),
                tx_power_dbm=float(carrier.get("tx_power_dbm", "10")),
            ),
            ground=GroundParams(epsilon0=float(ground.get("epsilon0", "15"))),
            model=PropagationModel(model.get("kind", "tworay")),
            tx_pattern=resolve_pattern(patterns.get("tx", "dipole"), base_dir),
            rx_pattern=resolve_pattern(patterns.get("rx", "dipole"), base_dir),
            trajectory=Trajectory(
                waypoints=_parse_waypoints(traj["waypoints"]),
                height_m=float(traj.get("height_m", "70")),
                speed_mps=float(traj.get("speed_mps", "10")),
                sample_period_s=float(traj.get("sample_period_s", "1")),
            ),
            sigma_db=float(model.get("sigma_db", "0")),
            seed=int(model.get("seed", "0")),
        )
        loc = cp["localizer"] if cp.has_section("localizer") else {}
        localizer = LocalizerConfig(
            k_iters=int(loc.get("k_iters", "50")),
            n_samples=int(loc.get("n_samples", "300")),
            m_samples=int(loc.get("m_samples", "10")),
            n_max=int(loc.get("n_max", "10000")),
            selection=SelectionStrategy(loc.get("selection", "random")),
            ma_window=int(loc.get("ma_window", "5")),
            seed=int(loc.get("seed", "0")),
        )
    except (KeyError, ValueError, configparser.Error) as exc:
        raise SchemaError(f"config {path}: {exc}") from exc
    return campaign, localizer
