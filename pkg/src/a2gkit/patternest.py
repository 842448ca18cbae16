"""Estimate the combined Tx+Rx antenna pattern from RSRP measurements.

Each measurement is converted into one combined-gain observation by removing
the transmit power and adding back the unit-gain free-space loss of its link,
all in dB: gain_obs = rsrp - tx_power + 20*log10(4 pi d3 / lambda). The
observations are averaged (in dB) into uniform azimuth/elevation bins indexed
by the line-of-sight angles from the ground station.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from .antenna import AntennaPattern, gain_many
from .errors import EmptyInput
from .geo import GeoPoint, ProjectionConfig, los_fields
from .locate import Measurement
from .propagation import CarrierConfig


@dataclass
class EstimatedPattern:
    """Binned combined-gain estimate with per-bin sample counts.

    ``gain_db`` holds NaN for bins that received no samples; ``counts`` is
    zero there. Axes are bin centers with uniform width ``bin_deg``.
    """

    az_bins_deg: np.ndarray
    el_bins_deg: np.ndarray
    gain_db: np.ndarray  # shape (n_az, n_el), NaN where absent
    counts: np.ndarray  # same shape, int
    bin_deg: float

    @property
    def visited(self) -> np.ndarray:
        return self.counts > 0


def estimate_pattern(
    meas: Sequence[Measurement],
    bs: GeoPoint,
    c: CarrierConfig,
    proj: ProjectionConfig,
    bin_deg: float = 1.0,
) -> EstimatedPattern:
    """Bin per-sample combined-gain observations over (azimuth, elevation).

    The bin width must evenly divide both the 360 degree azimuth span and the
    180 degree elevation span. The bin mean is an arithmetic mean in dB.
    """
    if not meas:
        raise EmptyInput("no measurements")
    n_az = round(360.0 / bin_deg)
    n_el = round(180.0 / bin_deg)
    if bin_deg <= 0.0 or abs(n_az * bin_deg - 360.0) > 1e-9 or abs(n_el * bin_deg - 180.0) > 1e-9:
        raise ValueError(f"bin_deg {bin_deg} must evenly divide 360 and 180")

    lon = np.array([m.uav.lon_deg for m in meas])
    lat = np.array([m.uav.lat_deg for m in meas])
    alt = np.array([m.uav.alt_m for m in meas])
    rsrp = np.array([m.rsrp_dbm for m in meas])
    _, _, d3, az, el = los_fields(bs.lon_deg, bs.lat_deg, bs.alt_m, lon, lat, alt, proj)

    pl_unit_db = 20.0 * np.log10(4.0 * math.pi * d3 / c.lambda_m)
    obs_db = rsrp - c.tx_power_dbm + pl_unit_db

    ai = np.clip((az / bin_deg).astype(int), 0, n_az - 1)
    ej = np.clip(((el + 90.0) / bin_deg).astype(int), 0, n_el - 1)

    sums = np.zeros((n_az, n_el))
    counts = np.zeros((n_az, n_el), dtype=int)
    np.add.at(sums, (ai, ej), obs_db)
    np.add.at(counts, (ai, ej), 1)

    with np.errstate(invalid="ignore"):
        gain_db = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    az_bins = (np.arange(n_az) + 0.5) * bin_deg
    el_bins = -90.0 + (np.arange(n_el) + 0.5) * bin_deg
    return EstimatedPattern(
        az_bins_deg=az_bins, el_bins_deg=el_bins, gain_db=gain_db, counts=counts, bin_deg=bin_deg
    )


def pattern_error(
    reference: Union[AntennaPattern, Tuple[AntennaPattern, AntennaPattern]],
    est: EstimatedPattern,
) -> np.ndarray:
    """Per-bin |reference - estimate| in dB, NaN where the estimate is absent.

    ``reference`` is either a single pattern holding the combined gain or a
    (tx, rx) pair whose dB gains are summed; it is evaluated at bin centers.
    """
    if not np.any(est.visited):
        raise EmptyInput("estimated pattern has no visited bins")
    az_grid, el_grid = np.meshgrid(est.az_bins_deg, est.el_bins_deg, indexing="ij")
    if isinstance(reference, AntennaPattern):
        ref_db = 10.0 * np.log10(gain_many(reference, az_grid, el_grid))
    else:
        tx, rx = reference
        ref_db = 10.0 * np.log10(gain_many(tx, az_grid, el_grid)) + 10.0 * np.log10(
            gain_many(rx, az_grid, el_grid)
        )
    return np.where(est.visited, np.abs(ref_db - est.gain_db), np.nan)
