"""3D antenna radiation patterns: tabulated grids, analytic dipole, isotropic.

Tabulated patterns hold dBi gain on an (azimuth, elevation) grid and are
evaluated by bilinear interpolation in dB (then converted to linear power
gain). The azimuth axis is periodic and wraps modulo 360 degrees; elevation
queries outside the grid clamp to the nearest edge. The dipole option is the
classic donut pattern cos((pi/2)cos(theta))/sin(theta) with theta measured
from the antenna axis (zenith), i.e. unity gain broadside at elevation 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import MalformedPattern
from .geo import LinkGeometry

ISOTROPIC = "isotropic"
DIPOLE = "dipole"
TABULATED = "tabulated"

PATTERN_CSV_HEADER = ["az_deg", "el_deg", "gain_dbi"]


@dataclass(frozen=True)
class AnglePair:
    """Azimuth/elevation pair in the pattern frame (degrees)."""

    az_deg: float
    el_deg: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.az_deg < 360.0):
            raise ValueError(f"az_deg out of [0, 360): {self.az_deg}")
        if not (-90.0 <= self.el_deg <= 90.0):
            raise ValueError(f"el_deg out of [-90, 90]: {self.el_deg}")


@dataclass(frozen=True)
class AntennaPattern:
    """Gain-versus-angle model; build via the isotropic/dipole/tabulated factories."""

    kind: str
    az_grid_deg: Optional[np.ndarray] = None
    el_grid_deg: Optional[np.ndarray] = None
    gain_dbi: Optional[np.ndarray] = None  # shape (n_az, n_el)

    @classmethod
    def isotropic(cls) -> "AntennaPattern":
        return cls(kind=ISOTROPIC)

    @classmethod
    def dipole(cls) -> "AntennaPattern":
        return cls(kind=DIPOLE)

    @classmethod
    def tabulated(cls, az_grid_deg, el_grid_deg, gain_dbi) -> "AntennaPattern":
        az = np.asarray(az_grid_deg, dtype=float)
        el = np.asarray(el_grid_deg, dtype=float)
        g = np.asarray(gain_dbi, dtype=float)
        if az.ndim != 1 or el.ndim != 1 or az.size < 2 or el.size < 2:
            raise MalformedPattern("grid needs at least 2 samples per axis")
        if np.any(np.diff(az) <= 0.0) or np.any(np.diff(el) <= 0.0):
            raise MalformedPattern("grid angles must be strictly ascending")
        if az[0] < 0.0 or az[-1] >= 360.0:
            raise MalformedPattern("azimuth grid must lie within [0, 360)")
        if el[0] < -90.0 or el[-1] > 90.0:
            raise MalformedPattern("elevation grid must lie within [-90, 90]")
        if g.shape != (az.size, el.size):
            raise MalformedPattern(f"gain grid shape {g.shape} != ({az.size}, {el.size})")
        if not np.all(np.isfinite(g)):
            raise MalformedPattern("gain grid contains non-finite values")
        return cls(kind=TABULATED, az_grid_deg=az, el_grid_deg=el, gain_dbi=g)


def dipole_gain(el_deg):
    """Linear gain of the analytic dipole at the given elevation(s).

    Evaluates cos((pi/2)cos(theta))/sin(theta) with theta = 90 deg - elevation.
    The axial nulls at elevation +/-90 deg are returned as exactly 0 (limit
    value). Accepts scalars or arrays.
    """
    el = np.asarray(el_deg, dtype=float)
    theta = np.radians(90.0 - el)
    sin_t = np.sin(theta)
    on_axis = sin_t <= 1e-12
    g = np.cos(0.5 * np.pi * np.cos(theta)) / np.where(on_axis, 1.0, sin_t)
    g = np.where(on_axis, 0.0, g)
    if np.ndim(el_deg) == 0:
        return float(g)
    return g


def _tabulated_db(p: AntennaPattern, az_deg, el_deg):
    """Bilinear interpolation on the dB grid; azimuth wraps, elevation clamps."""
    az_grid = p.az_grid_deg
    el_grid = p.el_grid_deg
    g = p.gain_dbi
    n_az = az_grid.size

    az = np.asarray(az_deg, dtype=float) % 360.0
    el = np.clip(np.asarray(el_deg, dtype=float), el_grid[0], el_grid[-1])

    # Periodic azimuth: the final segment runs from the last node back to the
    # first node shifted by +360.
    az_adj = np.where(az < az_grid[0], az + 360.0, az)
    seg = np.searchsorted(az_grid, az_adj, side="right") - 1
    seg = np.clip(seg, 0, n_az - 1)
    i0 = seg
    i1 = (seg + 1) % n_az
    az_lo = az_grid[i0]
    az_hi = np.where(seg == n_az - 1, az_grid[0] + 360.0, az_grid[np.minimum(seg + 1, n_az - 1)])
    fa = (az_adj - az_lo) / (az_hi - az_lo)

    j0 = np.searchsorted(el_grid, el, side="right") - 1
    j0 = np.clip(j0, 0, el_grid.size - 2)
    j1 = j0 + 1
    fe = (el - el_grid[j0]) / (el_grid[j1] - el_grid[j0])

    v00 = g[i0, j0]
    v01 = g[i0, j1]
    v10 = g[i1, j0]
    v11 = g[i1, j1]
    return (1.0 - fa) * ((1.0 - fe) * v00 + fe * v01) + fa * ((1.0 - fe) * v10 + fe * v11)


def tabulated_gain(p: AntennaPattern, a: AnglePair) -> float:
    """Linear gain of a tabulated pattern at one angle pair."""
    if p.kind != TABULATED:
        raise ValueError(f"pattern kind is {p.kind}, expected {TABULATED}")
    return float(10.0 ** (_tabulated_db(p, a.az_deg, a.el_deg) / 10.0))


def gain(p: AntennaPattern, a: AnglePair) -> float:
    """Linear gain of any pattern kind at one angle pair."""
    if p.kind == ISOTROPIC:
        return 1.0
    if p.kind == DIPOLE:
        return dipole_gain(a.el_deg)
    return tabulated_gain(p, a)


def gain_many(p: AntennaPattern, az_deg, el_deg):
    """Vectorized linear gain over arrays of azimuth/elevation angles."""
    el = np.asarray(el_deg, dtype=float)
    if p.kind == ISOTROPIC:
        return np.ones(np.broadcast(np.asarray(az_deg, dtype=float), el).shape)
    if p.kind == DIPOLE:
        return np.asarray(dipole_gain(el))
    return 10.0 ** (_tabulated_db(p, az_deg, el_deg) / 10.0)


def load_pattern(path) -> AntennaPattern:
    """Load a tabulated pattern from CSV (``az_deg,el_deg,gain_dbi``).

    The file must contain every (az, el) grid cell exactly once; the axes are
    inferred from the distinct sorted values. Raises MalformedPattern on
    duplicates, missing cells, or non-finite gains.
    """
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = None
        for rec in reader:
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in rec]
                if header != PATTERN_CSV_HEADER:
                    raise MalformedPattern(f"bad header {header}, expected {PATTERN_CSV_HEADER}")
                continue
            if len(rec) != 3:
                raise MalformedPattern(f"row has {len(rec)} fields, expected 3: {rec}")
            try:
                rows.append((float(rec[0]), float(rec[1]), float(rec[2])))
            except ValueError as exc:
                raise MalformedPattern(f"non-numeric value in row {rec}") from exc
    if header is None or not rows:
        raise MalformedPattern("pattern file has no data rows")

    az_vals = np.unique([r[0] for r in rows])
    el_vals = np.unique([r[1] for r in rows])
    if len(rows) != az_vals.size * el_vals.size:
        raise MalformedPattern(
            f"{len(rows)} rows do not tile a {az_vals.size}x{el_vals.size} grid "
            "(duplicate or missing cells)"
        )
    grid = np.full((az_vals.size, el_vals.size), np.nan)
    ai = {v: i for i, v in enumerate(az_vals)}
    ej = {v: j for j, v in enumerate(el_vals)}
    for az, el, g in rows:
        i, j = ai[az], ej[el]
        if not np.isnan(grid[i, j]):
            raise MalformedPattern(f"duplicated cell az={az} el={el}")
        grid[i, j] = g
    if np.any(np.isnan(grid)):
        raise MalformedPattern("grid has missing cells")
    return AntennaPattern.tabulated(az_vals, el_vals, grid)


def link_gains(tx: AntennaPattern, rx: AntennaPattern, g: LinkGeometry):
    """Tx/Rx linear gains for the direct and ground-reflected rays of a link.

    Direct-ray gains are taken at the link (azimuth, elevation). The
    reflected ray leaves the transmitter below the horizontal, so its Tx gain
    is taken at elevation -theta_r; at the receiver the same grazing angle
    appears from below and the Rx gain is taken at +theta_r in the link
    elevation frame (downward mounts are assumed baked into the Rx data).
    """
    g_tx_los = gain(tx, AnglePair(g.az_deg, g.el_deg))
    g_rx_los = gain(rx, AnglePair(g.az_deg, g.el_deg))
    g_tx_refl = gain(tx, AnglePair(g.az_deg, -g.theta_r_deg))
    g_rx_refl = gain(rx, AnglePair(g.az_deg, g.theta_r_deg))
    return g_tx_los, g_rx_los, g_tx_refl, g_rx_refl
