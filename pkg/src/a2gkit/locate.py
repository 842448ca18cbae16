"""RSRP-based localization of a ground transmitter from UAV measurements.

The offline path inverts the free-space link budget into squared distances,
linearizes them against a reference sample into a 2-unknown least-squares
system over (longitude, latitude), and refines antenna gains by fixed-point
iteration: solve for the source with the current gains, re-evaluate the gains
at the new estimate, repeat. The online path maintains FIFO measurement
buffers, localizes on a small selected subset at every arrival, and fuses the
per-step estimates with residual-derived confidence weights.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .antenna import AntennaPattern, gain_many
from .errors import (
    DegenerateGeometry,
    EmptyInput,
    InsufficientSamples,
    NonPositivePower,
    RankDeficient,
)
from .geo import GeoPoint, ProjectionConfig, los_fields, planar_offsets
from .propagation import CarrierConfig

# Residual floor (m^2) that keeps the confidence weight n_buf/log10(e_res)
# positive and bounded; below 1 m^2 the raw expression flips sign or blows up.
E_RES_FLOOR_M2 = 10.0


@dataclass(frozen=True)
class Measurement:
    """One timestamped UAV position with its RSRP sample."""

    t_s: float
    uav: GeoPoint
    rsrp_dbm: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.rsrp_dbm):
            raise ValueError("rsrp_dbm must be finite")


@dataclass(frozen=True)
class LocEstimate:
    """Estimated source coordinates (degrees)."""

    lon_deg: float
    lat_deg: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lon_deg) and math.isfinite(self.lat_deg)):
            raise ValueError("estimate must be finite")


@dataclass
class LsSystem:
    """Linearized system A @ [lon, lat] = b built from distance differences.

    ``clamped_count`` records how many samples had their squared horizontal
    distance clamped to zero because noise pushed the inverted squared 3D
    distance below the squared vertical separation.
    """

    a_matrix: np.ndarray
    b_vector: np.ndarray
    ref_index: int
    clamped_count: int = 0


class SelectionStrategy(enum.Enum):
    RANDOM = "random"
    EQUAL_INTERVAL = "equal"
    NEARBY_WAYPOINTS = "waypoint"


@dataclass(frozen=True)
class LocalizerConfig:
    """Knobs for the offline and online localization runs."""

    k_iters: int = 50
    n_samples: int = 300
    m_samples: int = 10
    n_max: int = 10000
    selection: SelectionStrategy = SelectionStrategy.RANDOM
    ma_window: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k_iters < 1:
            raise ValueError("k_iters must be >= 1")
        if self.m_samples < 2:
            raise ValueError("m_samples must be >= 2")
        if self.ma_window < 1:
            raise ValueError("ma_window must be >= 1")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")


@dataclass(frozen=True)
class OnlineStep:
    """Output of one online arrival: per-step estimate and fused estimate."""

    t_s: float
    estimate: LocEstimate
    weight: float
    residual_m2: float
    weighted: LocEstimate
    n_buf: int


def moving_average(trace: Sequence[Measurement], window: int) -> List[Measurement]:
    """Centered moving mean of RSRP with the window truncated at the edges.

    Positions and timestamps are unchanged; window = 1 is the identity.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if not trace:
        raise EmptyInput("empty trace")
    n = len(trace)
    r = np.array([m.rsrp_dbm for m in trace], dtype=float)
    half_lo = (window - 1) // 2
    half_hi = window // 2
    idx = np.arange(n)
    lo = np.maximum(0, idx - half_lo)
    hi = np.minimum(n, idx + half_hi + 1)
    cs = np.concatenate(([0.0], np.cumsum(r)))
    means = (cs[hi] - cs[lo]) / (hi - lo)
    return [replace(m, rsrp_dbm=float(v)) for m, v in zip(trace, means)]


def rsrp_to_distance_sq(r_dbm: float, g_tx: float, g_rx: float, c: CarrierConfig) -> float:
    """Invert the free-space budget into a squared 3D distance (m^2).

    d3^2 = P_tx * (lambda / 4 pi)^2 * G_tx * G_rx / r, with transmit power and
    received power in consistent linear units.
    """
    out = _distance_sq(np.asarray(r_dbm, dtype=float), np.asarray(g_tx * g_rx, dtype=float), c)
    if np.ndim(r_dbm) == 0:
        return float(out)
    return out


def _distance_sq(r_dbm: np.ndarray, g_prod: np.ndarray, c: CarrierConfig) -> np.ndarray:
    r_mw = 10.0 ** (r_dbm / 10.0)
    if not np.all(np.isfinite(r_mw) & (r_mw > 0.0)):
        raise NonPositivePower("received power must convert to a positive linear value")
    return c.tx_power_mw * (c.lambda_m / (4.0 * math.pi)) ** 2 * g_prod / r_mw


def _build_ab(
    lon: np.ndarray,
    lat: np.ndarray,
    alt: np.ndarray,
    rsrp: np.ndarray,
    g_prod: np.ndarray,
    bs_alt_m: float,
    c: CarrierConfig,
    proj: ProjectionConfig,
):
    """Assemble the least-squares matrix/vector; returns (A, b, ref, clamped)."""
    d3_sq = _distance_sq(rsrp, g_prod, c)
    d_v = np.abs(bs_alt_m - alt)
    dh_sq = d3_sq - d_v**2
    clamped = int(np.count_nonzero(dh_sq < 0.0))
    dh_sq = np.maximum(dh_sq, 0.0)

    ref = int(np.argmax(rsrp))
    others = np.arange(lon.size) != ref
    c2 = proj.cos_psi0**2
    a = np.column_stack(
        (
            (-2.0 * lon[ref] + 2.0 * lon[others]) * c2,
            -2.0 * lat[ref] + 2.0 * lat[others],
        )
    )
    inv_scale_sq = 1.0 / proj.meters_per_degree**2
    b = (
        inv_scale_sq * (dh_sq[ref] - dh_sq[others])
        - (lon[ref] ** 2 - lon[others] ** 2) * c2
        - (lat[ref] ** 2 - lat[others] ** 2)
    )
    if np.max(np.abs(a)) == 0.0:
        raise DegenerateGeometry("all samples share one position")
    return a, b, ref, clamped


def build_ls_system(
    samples: Sequence[Measurement],
    gains: Sequence[Tuple[float, float]],
    bs_alt_m: float,
    c: CarrierConfig,
    proj: ProjectionConfig,
) -> LsSystem:
    """Build the linear system from measurements and per-sample (tx, rx) gains.

    The reference sample is the one with the strongest RSRP. Each sample's
    squared horizontal distance is the inverted squared 3D distance minus the
    squared vertical separation to the station altitude.
    """
    if len(samples) < 3:
        raise InsufficientSamples(f"need >= 3 samples, got {len(samples)}")
    if len(gains) != len(samples):
        raise ValueError("one (g_tx, g_rx) pair per sample required")
    g = np.asarray(gains, dtype=float)
    if np.any(g <= 0.0):
        raise ValueError("gains must be strictly positive")
    lon = np.array([m.uav.lon_deg for m in samples])
    lat = np.array([m.uav.lat_deg for m in samples])
    alt = np.array([m.uav.alt_m for m in samples])
    rsrp = np.array([m.rsrp_dbm for m in samples])
    a, b, ref, clamped = _build_ab(lon, lat, alt, rsrp, g[:, 0] * g[:, 1], bs_alt_m, c, proj)
    return LsSystem(a_matrix=a, b_vector=b, ref_index=ref, clamped_count=clamped)


def _solve(a: np.ndarray, b: np.ndarray) -> LocEstimate:
    sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < 2:
        raise RankDeficient(f"system rank {rank} < 2; geometry is collinear")
    return LocEstimate(lon_deg=float(sol[0]), lat_deg=float(sol[1]))


def solve_ls(sys: LsSystem) -> LocEstimate:
    """Least-squares solution of the system (Moore-Penrose pseudo-inverse)."""
    return _solve(sys.a_matrix, sys.b_vector)


def _pattern_gains(
    tx_pat: AntennaPattern,
    rx_pat: AntennaPattern,
    bs_lon: float,
    bs_lat: float,
    bs_alt_m: float,
    lon: np.ndarray,
    lat: np.ndarray,
    alt: np.ndarray,
    proj: ProjectionConfig,
):
    _, _, _, az, el = los_fields(bs_lon, bs_lat, bs_alt_m, lon, lat, alt, proj)
    return gain_many(tx_pat, az, el), gain_many(rx_pat, az, el)


def _fixed_point(
    lon: np.ndarray,
    lat: np.ndarray,
    alt: np.ndarray,
    rsrp: np.ndarray,
    tx_pat: AntennaPattern,
    rx_pat: AntennaPattern,
    bs_alt_m: float,
    k_iters: int,
    c: CarrierConfig,
    proj: ProjectionConfig,
):
    g_tx = np.ones(lon.size)
    g_rx = np.ones(lon.size)
    estimates: List[LocEstimate] = []
    for _ in range(k_iters):
        a, b, _, _ = _build_ab(lon, lat, alt, rsrp, g_tx * g_rx, bs_alt_m, c, proj)
        est = _solve(a, b)
        estimates.append(est)
        g_tx, g_rx = _pattern_gains(
            tx_pat, rx_pat, est.lon_deg, est.lat_deg, bs_alt_m, lon, lat, alt, proj
        )
    return estimates, g_tx, g_rx


def fixed_point_localize(
    samples: Sequence[Measurement],
    tx_pat: AntennaPattern,
    rx_pat: AntennaPattern,
    bs_alt_m: float,
    cfg: LocalizerConfig,
    c: CarrierConfig,
    proj: ProjectionConfig,
) -> List[LocEstimate]:
    """Alternate least-squares solves and gain updates; returns all K iterates.

    Iteration 1 uses unit gains for every sample; iteration k re-evaluates
    both patterns at the line-of-sight angles seen from estimate k-1.
    """
    if len(samples) < 3:
        raise InsufficientSamples(f"need >= 3 samples, got {len(samples)}")
    lon = np.array([m.uav.lon_deg for m in samples])
    lat = np.array([m.uav.lat_deg for m in samples])
    alt = np.array([m.uav.alt_m for m in samples])
    rsrp = np.array([m.rsrp_dbm for m in samples])
    estimates, _, _ = _fixed_point(
        lon, lat, alt, rsrp, tx_pat, rx_pat, bs_alt_m, cfg.k_iters, c, proj
    )
    return estimates


class OnlineState:
    """Aligned FIFO buffers of arrivals plus the running fused estimate."""

    def __init__(self, n_max: int):
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        self.n_max = n_max
        self._t = deque(maxlen=n_max)
        self._lon = deque(maxlen=n_max)
        self._lat = deque(maxlen=n_max)
        self._alt = deque(maxlen=n_max)
        self._rsrp = deque(maxlen=n_max)
        self.estimates: List[Tuple[LocEstimate, float]] = []
        self._w_lon = 0.0
        self._w_lat = 0.0
        self._w_sum = 0.0

    def __len__(self) -> int:
        return len(self._rsrp)

    def push(self, m: Measurement) -> None:
        """Append one arrival, evicting the oldest entries once full."""
        self._t.append(m.t_s)
        self._lon.append(m.uav.lon_deg)
        self._lat.append(m.uav.lat_deg)
        self._alt.append(m.uav.alt_m)
        self._rsrp.append(m.rsrp_dbm)

    def arrays(self, idx: Optional[np.ndarray] = None):
        lon = np.fromiter(self._lon, dtype=float)
        lat = np.fromiter(self._lat, dtype=float)
        alt = np.fromiter(self._alt, dtype=float)
        rsrp = np.fromiter(self._rsrp, dtype=float)
        if idx is None:
            return lon, lat, alt, rsrp
        return lon[idx], lat[idx], alt[idx], rsrp[idx]

    def record(self, est: LocEstimate, mu: float) -> None:
        """Fold one weighted estimate into the running combination."""
        self.estimates.append((est, mu))
        self._w_lon += est.lon_deg * mu
        self._w_lat += est.lat_deg * mu
        self._w_sum += mu

    @property
    def weighted_estimate(self) -> Optional[LocEstimate]:
        if self._w_sum == 0.0:
            return None
        return LocEstimate(self._w_lon / self._w_sum, self._w_lat / self._w_sum)


def select_samples(
    state: OnlineState,
    m: int,
    strategy: SelectionStrategy,
    waypoints: Optional[Sequence[GeoPoint]] = None,
    rng=None,
    proj: Optional[ProjectionConfig] = None,
) -> np.ndarray:
    """Pick m buffer indices per the strategy; the whole buffer if it is small.

    Random draws m distinct uniform indices. Equal-interval takes the 1-based
    indices round(j * n / m) for j = 1..m, resolving rounding collisions by
    stepping toward the buffer head. Nearby-waypoints balances per-waypoint
    quotas (larger quotas to earlier waypoints) and picks the samples closest
    to each waypoint.
    """
    n = len(state)
    if n < 2:
        raise InsufficientSamples(f"buffer holds {n} < 2 samples")
    if m < 2:
        raise ValueError("m must be >= 2")
    if n <= m:
        return np.arange(n)

    if strategy is SelectionStrategy.RANDOM:
        gen = np.random.default_rng(rng)
        return np.sort(gen.choice(n, size=m, replace=False))

    if strategy is SelectionStrategy.EQUAL_INTERVAL:
        used = set()
        for j in range(1, m + 1):
            idx = int(math.floor(j * n / m + 0.5))
            idx = min(max(idx, 1), n)
            if idx in used:
                cand = idx - 1
                while cand >= 1 and cand in used:
                    cand -= 1
                if cand < 1:
                    cand = idx + 1
                    while cand in used:
                        cand += 1
                idx = cand
            used.add(idx)
        return np.array(sorted(i - 1 for i in used))

    if strategy is SelectionStrategy.NEARBY_WAYPOINTS:
        if not waypoints or proj is None:
            raise ValueError("nearby-waypoints selection needs waypoints and a projection")
        lon, lat, _, _ = state.arrays()
        # Distance of every buffered sample to every waypoint, then assign
        # each sample to its nearest waypoint.
        dists = np.empty((len(waypoints), n))
        for w, wp in enumerate(waypoints):
            east, north = planar_offsets(wp.lon_deg, wp.lat_deg, lon, lat, proj)
            dists[w] = np.hypot(east, north)
        assigned = np.argmin(dists, axis=0)
        present = sorted(set(int(w) for w in assigned))
        n_wp = len(present)
        base, rem = divmod(m, n_wp)
        quotas = {w: base + (1 if k < rem else 0) for k, w in enumerate(present)}

        chosen: List[int] = []
        leftovers: List[Tuple[float, int]] = []
        for w in present:
            members = np.flatnonzero(assigned == w)
            order = members[np.lexsort((members, dists[w, members]))]
            take = min(quotas[w], order.size)
            chosen.extend(int(i) for i in order[:take])
            leftovers.extend((float(dists[w, i]), int(i)) for i in order[take:])
        if len(chosen) < m:
            # Some waypoints had fewer samples than their quota; fill from the
            # globally nearest remaining samples.
            leftovers.sort()
            chosen.extend(i for _, i in leftovers[: m - len(chosen)])
        return np.array(sorted(chosen[:m]))

    raise ValueError(f"unknown strategy {strategy}")


def _residual(
    est: LocEstimate,
    lon: np.ndarray,
    lat: np.ndarray,
    alt: np.ndarray,
    rsrp: np.ndarray,
    g_tx: np.ndarray,
    g_rx: np.ndarray,
    bs_alt_m: float,
    c: CarrierConfig,
    proj: ProjectionConfig,
) -> float:
    d_meas = np.sqrt(_distance_sq(rsrp, g_tx * g_rx, c))
    _, _, d_geo, _, _ = los_fields(est.lon_deg, est.lat_deg, bs_alt_m, lon, lat, alt, proj)
    return float(np.mean((d_meas - d_geo) ** 2))


def residual(
    est: LocEstimate,
    samples: Sequence[Measurement],
    gains: Sequence[Tuple[float, float]],
    bs_alt_m: float,
    c: CarrierConfig,
    proj: ProjectionConfig,
) -> float:
    """Mean squared gap (m^2) between RSRP-inferred and geometric 3D distances."""
    if not samples:
        raise EmptyInput("no samples")
    g = np.asarray(gains, dtype=float)
    lon = np.array([m.uav.lon_deg for m in samples])
    lat = np.array([m.uav.lat_deg for m in samples])
    alt = np.array([m.uav.alt_m for m in samples])
    rsrp = np.array([m.rsrp_dbm for m in samples])
    return _residual(est, lon, lat, alt, rsrp, g[:, 0], g[:, 1], bs_alt_m, c, proj)


def weight(e_res: float, n_buf: int) -> float:
    """Confidence weight n_buf / log10(e_res), floored at e_res = 10 m^2."""
    if n_buf < 1:
        raise ValueError("n_buf must be >= 1")
    return n_buf / math.log10(max(e_res, E_RES_FLOOR_M2))


def online_localize(
    stream: Iterable[Measurement],
    tx_pat: AntennaPattern,
    rx_pat: AntennaPattern,
    bs_alt_m: float,
    cfg: LocalizerConfig,
    waypoints: Optional[Sequence[GeoPoint]],
    c: CarrierConfig,
    proj: ProjectionConfig,
) -> List[OnlineStep]:
    """Run the buffered online localizer over a time-ordered stream.

    Every arrival is pushed into the FIFO buffers; once the buffer holds
    enough samples, m of them are selected, the fixed-point localizer runs on
    the subset, and the new estimate joins the running weighted combination
    sum(mu_k * est_k) / sum(mu_k). Warm-up arrivals emit nothing.
    """
    state = OnlineState(cfg.n_max)
    rng = np.random.default_rng(cfg.seed)
    # The solve needs 3 samples even when m_samples is set lower.
    warmup = max(cfg.m_samples, 3)
    steps: List[OnlineStep] = []
    for meas in stream:
        state.push(meas)
        if len(state) < warmup:
            continue
        idx = select_samples(state, cfg.m_samples, cfg.selection, waypoints, rng, proj)
        lon, lat, alt, rsrp = state.arrays(idx)
        try:
            estimates, g_tx, g_rx = _fixed_point(
                lon, lat, alt, rsrp, tx_pat, rx_pat, bs_alt_m, cfg.k_iters, c, proj
            )
        except (RankDeficient, DegenerateGeometry):
            # A straight flight leg (or repeated positions) cannot determine
            # both coordinates yet; emit nothing and wait for more geometry.
            continue
        est = estimates[-1]
        e_res = _residual(est, lon, lat, alt, rsrp, g_tx, g_rx, bs_alt_m, c, proj)
        mu = weight(e_res, len(state))
        state.record(est, mu)
        steps.append(
            OnlineStep(
                t_s=meas.t_s,
                estimate=est,
                weight=mu,
                residual_m2=e_res,
                weighted=state.weighted_estimate,
                n_buf=len(state),
            )
        )
    return steps
