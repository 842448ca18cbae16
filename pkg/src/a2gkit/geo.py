"""Planar projection, great-circle distance, and ground-station/UAV link geometry.

Horizontal distances use an equirectangular projection scaled at a standard
parallel; the exact great-circle (haversine) distance is kept alongside as the
accuracy oracle for that approximation. Link geometry adds the vertical leg,
the 3D line-of-sight distance, the single ground-bounce path length (image
method over a flat plane at datum altitude 0), and the relevant angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints

EARTH_RADIUS_M = 6378137.0


@dataclass(frozen=True)
class GeoPoint:
    """Geographic position: degrees longitude/latitude plus altitude in meters."""

    lon_deg: float
    lat_deg: float
    alt_m: float = 0.0

    def __post_init__(self) -> None:
        if not (-180.0 <= self.lon_deg <= 180.0):
            raise ValueError(f"lon_deg out of range: {self.lon_deg}")
        if not (-90.0 <= self.lat_deg <= 90.0):
            raise ValueError(f"lat_deg out of range: {self.lat_deg}")
        if not math.isfinite(self.alt_m):
            raise ValueError("alt_m must be finite")


@dataclass(frozen=True)
class ProjectionConfig:
    """Equirectangular projection parameters: standard parallel and earth radius."""

    psi0_deg: float
    earth_radius_m: float = EARTH_RADIUS_M

    def __post_init__(self) -> None:
        if not (-90.0 <= self.psi0_deg <= 90.0):
            raise ValueError(f"psi0_deg out of range: {self.psi0_deg}")
        if self.earth_radius_m <= 0.0:
            raise ValueError("earth_radius_m must be positive")

    @classmethod
    def centered_on(cls, p: GeoPoint, earth_radius_m: float = EARTH_RADIUS_M) -> "ProjectionConfig":
        """Projection with the standard parallel at the given point's latitude."""
        return cls(psi0_deg=p.lat_deg, earth_radius_m=earth_radius_m)

    @property
    def meters_per_degree(self) -> float:
        """Arc length of one degree along a meridian."""
        return self.earth_radius_m * math.pi / 180.0

    @property
    def cos_psi0(self) -> float:
        return math.cos(math.radians(self.psi0_deg))


@dataclass(frozen=True)
class LinkGeometry:
    """All distances and angles of one ground-station-to-UAV link.

    Attributes:
        d_h_m: horizontal (projected) distance.
        d_v_m: vertical separation |alt_bs - alt_uav|.
        d3_m: 3D line-of-sight distance.
        d_refl_m: total ground-bounce path length (image method).
        az_deg: bearing from the ground station to the UAV, clockwise from
            true north, in [0, 360).
        el_deg: elevation of the line of sight above the horizontal at the
            ground station, signed (positive when the UAV is higher).
        theta_r_deg: grazing angle of the ground reflection.
    """

    d_h_m: float
    d_v_m: float
    d3_m: float
    d_refl_m: float
    az_deg: float
    el_deg: float
    theta_r_deg: float


def planar_offsets(origin_lon_deg, origin_lat_deg, lon_deg, lat_deg, proj: ProjectionConfig):
    """East/north offsets in meters of (lon, lat) relative to the origin.

    Equirectangular: east = dlon * cos(psi0), north = dlat, both scaled by
    R*pi/180. Accepts scalars or arrays.
    """
    scale = proj.meters_per_degree
    east = (np.asarray(lon_deg, dtype=float) - origin_lon_deg) * proj.cos_psi0 * scale
    north = (np.asarray(lat_deg, dtype=float) - origin_lat_deg) * scale
    return east, north


def horizontal_distance(bs: GeoPoint, uav: GeoPoint, proj: ProjectionConfig) -> float:
    """Projected horizontal distance in meters between two points."""
    east, north = planar_offsets(bs.lon_deg, bs.lat_deg, uav.lon_deg, uav.lat_deg, proj)
    return float(np.hypot(east, north))


def haversine_distance(bs: GeoPoint, uav: GeoPoint, proj: ProjectionConfig) -> float:
    """Great-circle distance in meters.

    Uses the haversine form, which is numerically stable for short baselines
    where the spherical law of cosines loses precision.
    """
    lat1 = math.radians(bs.lat_deg)
    lat2 = math.radians(uav.lat_deg)
    dlat = lat2 - lat1
    dlon = math.radians(uav.lon_deg - bs.lon_deg)
    a = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * proj.earth_radius_m * math.asin(min(1.0, math.sqrt(a)))


def los_fields(bs_lon_deg, bs_lat_deg, bs_alt_m, lon_deg, lat_deg, alt_m, proj: ProjectionConfig):
    """Vectorized line-of-sight fields from one ground station to many positions.

    Returns (d_h_m, d_v_m, d3_m, az_deg, el_deg) as arrays matching the input
    shape. Azimuth is the bearing from the station, clockwise from north in
    [0, 360); elevation is signed by whether the target is above the station.
    """
    east, north = planar_offsets(bs_lon_deg, bs_lat_deg, lon_deg, lat_deg, proj)
    d_h = np.hypot(east, north)
    dalt = np.asarray(alt_m, dtype=float) - bs_alt_m
    d_v = np.abs(dalt)
    d3 = np.hypot(d_h, d_v)
    az = np.degrees(np.arctan2(east, north)) % 360.0
    el = np.degrees(np.arctan2(dalt, d_h))
    return d_h, d_v, d3, az, el


def link_geometry(bs: GeoPoint, uav: GeoPoint, proj: ProjectionConfig) -> LinkGeometry:
    """Full link geometry between a ground station and a UAV position.

    The ground-bounce path is computed with the image method over a flat
    reflection plane at datum altitude 0, so ``alt_m`` of both endpoints must
    be heights above local ground. Raises CoincidentPoints when the two
    positions coincide in both the horizontal plane and altitude.
    """
    d_h, d_v, d3, az, el = los_fields(
        bs.lon_deg, bs.lat_deg, bs.alt_m, uav.lon_deg, uav.lat_deg, uav.alt_m, proj
    )
    d_h = float(d_h)
    d_v = float(d_v)
    d3 = float(d3)
    if d3 == 0.0:
        raise CoincidentPoints("ground station and UAV positions coincide")
    h_sum = bs.alt_m + uav.alt_m
    d_refl = math.hypot(d_h, h_sum)
    theta_r = math.degrees(math.atan2(h_sum, d_h))
    return LinkGeometry(
        d_h_m=d_h,
        d_v_m=d_v,
        d3_m=d3,
        d_refl_m=d_refl,
        az_deg=float(az),
        el_deg=float(el),
        theta_r_deg=theta_r,
    )
