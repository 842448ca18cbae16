"""Shared fixtures: synthetic site, directional test pattern, placement helpers."""

import math

import numpy as np
import pytest

from a2gkit.antenna import AntennaPattern
from a2gkit.geo import EARTH_RADIUS_M, GeoPoint, ProjectionConfig
from a2gkit.harness import CampaignConfig, Trajectory
from a2gkit.propagation import CarrierConfig, GroundParams, PropagationModel

DEG_PER_M = 180.0 / (EARTH_RADIUS_M * math.pi)


def offset_point(origin: GeoPoint, east_m: float, north_m: float, alt_m: float = 0.0) -> GeoPoint:
    """Point displaced from origin by planar meters, with cos(lat0) lon scaling."""
    cos0 = math.cos(math.radians(origin.lat_deg))
    return GeoPoint(
        lon_deg=origin.lon_deg + east_m * DEG_PER_M / cos0,
        lat_deg=origin.lat_deg + north_m * DEG_PER_M,
        alt_m=alt_m,
    )


def point_at_angles(bs: GeoPoint, az_deg: float, el_deg: float, d_h_m: float) -> GeoPoint:
    """UAV position whose line-of-sight from bs has exactly these angles."""
    east = d_h_m * math.sin(math.radians(az_deg))
    north = d_h_m * math.cos(math.radians(az_deg))
    alt = bs.alt_m + d_h_m * math.tan(math.radians(el_deg))
    return offset_point(bs, east, north, alt)


def directional_pattern(
    step_deg: float = 5.0,
    peak_dbi: float = 10.0,
    az0_deg: float = 90.0,
    el0_deg: float = 20.0,
    az_width_deg: float = 70.0,
    el_width_deg: float = 18.0,
    floor_dbi: float = -12.0,
) -> AntennaPattern:
    """Smooth directional test pattern: a tilted beam with a gain floor."""
    az = np.arange(0.0, 360.0, step_deg)
    el = np.arange(-90.0, 90.0 + step_deg / 2, step_deg)
    azg, elg = np.meshgrid(az, el, indexing="ij")
    d_az = (azg - az0_deg + 180.0) % 360.0 - 180.0
    g = peak_dbi - 3.0 * (d_az / az_width_deg) ** 2 - 3.0 * ((elg - el0_deg) / el_width_deg) ** 2
    return AntennaPattern.tabulated(az, el, np.maximum(g, floor_dbi))


def zigzag_waypoints(bs: GeoPoint, n_rows: int = 6, sweep_m: float = 1200.0, row_m: float = 250.0):
    """12-waypoint east-west zig-zag advancing north, offset from the station."""
    wps = []
    for r in range(n_rows):
        north = 100.0 + r * row_m
        left = offset_point(bs, 150.0, north)
        right = offset_point(bs, 150.0 + sweep_m, north)
        wps.extend([left, right] if r % 2 == 0 else [right, left])
    return tuple(wps)


@pytest.fixture(scope="session")
def bs() -> GeoPoint:
    return GeoPoint(lon_deg=-78.700, lat_deg=35.728, alt_m=10.0)


@pytest.fixture(scope="session")
def proj(bs) -> ProjectionConfig:
    return ProjectionConfig.centered_on(bs)


@pytest.fixture(scope="session")
def carrier() -> CarrierConfig:
    return CarrierConfig(freq_hz=3.51e9, tx_power_dbm=10.0)


@pytest.fixture(scope="session")
def site_trajectory(bs) -> Trajectory:
    return Trajectory(
        waypoints=zigzag_waypoints(bs), height_m=70.0, speed_mps=10.0, sample_period_s=1.0
    )


@pytest.fixture(scope="session")
def iso() -> AntennaPattern:
    return AntennaPattern.isotropic()


@pytest.fixture(scope="session")
def tx_directional() -> AntennaPattern:
    return directional_pattern()


@pytest.fixture(scope="session")
def fs_iso_campaign(bs, carrier, site_trajectory, iso) -> CampaignConfig:
    """Deterministic free-space isotropic campaign over the default site."""
    return CampaignConfig(
        bs=bs,
        carrier=carrier,
        ground=GroundParams(),
        model=PropagationModel.FREE_SPACE,
        tx_pattern=iso,
        rx_pattern=iso,
        trajectory=site_trajectory,
    )


@pytest.fixture(scope="session")
def tworay_dir_campaign(bs, carrier, site_trajectory, tx_directional) -> CampaignConfig:
    """Deterministic two-ray campaign with a directional Tx and dipole Rx."""
    return CampaignConfig(
        bs=bs,
        carrier=carrier,
        ground=GroundParams(15.0),
        model=PropagationModel.TWO_RAY,
        tx_pattern=tx_directional,
        rx_pattern=AntennaPattern.dipole(),
        trajectory=site_trajectory,
    )
