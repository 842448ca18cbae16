"""Free-space and two-ray channel gains, ground reflection, RSRP synthesis.

Both channel models are expressed as linear received/transmitted power ratios
(gains below unity); the decibel path loss used in the link budget
``rsrp = tx_power - path_loss + shadowing`` is the negated dB value of that
gain. The two-ray model sums the direct ray and a single ground-reflected ray
coherently, with the vertical-polarization reflection coefficient applied to
the bounce.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .antenna import AntennaPattern, link_gains
from .errors import DegenerateLink
from .geo import LinkGeometry

SPEED_OF_LIGHT_MPS = 299792458.0


@dataclass(frozen=True)
class CarrierConfig:
    """Carrier frequency and transmit power; wavelength is derived."""

    freq_hz: float
    tx_power_dbm: float

    def __post_init__(self) -> None:
        if self.freq_hz <= 0.0:
            raise ValueError("freq_hz must be positive")
        if not math.isfinite(self.tx_power_dbm):
            raise ValueError("tx_power_dbm must be finite")

    @property
    def lambda_m(self) -> float:
        return SPEED_OF_LIGHT_MPS / self.freq_hz

    @property
    def tx_power_mw(self) -> float:
        return 10.0 ** (self.tx_power_dbm / 10.0)


@dataclass(frozen=True)
class GroundParams:
    """Ground electrical properties for the reflection coefficient."""

    epsilon0: float = 15.0

    def __post_init__(self) -> None:
        if self.epsilon0 <= 1.0:
            raise ValueError("relative permittivity must exceed 1")


class PropagationModel(enum.Enum):
    FREE_SPACE = "fs"
    TWO_RAY = "tworay"


class ShadowingModel:
    """Seeded log-normal shadowing stream (dB domain).

    With sigma_db = 0 the stream is deterministic and never consumes RNG
    state, so zero-shadowing runs are reproducible without a seed.
    """

    def __init__(self, sigma_db: float = 0.0, seed: Optional[int] = None):
        if sigma_db < 0.0:
            raise ValueError("sigma_db must be non-negative")
        self.sigma_db = sigma_db
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def sample(self) -> float:
        if self.sigma_db == 0.0:
            return 0.0
        return float(self._rng.normal(0.0, self.sigma_db))


@dataclass(frozen=True)
class RsrpSample:
    """One synthesized received-power value in dBm."""

    rsrp_dbm: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.rsrp_dbm):
            raise ValueError("rsrp_dbm must be finite")


def reflection_coefficient(theta_r_deg, gp: GroundParams):
    """Vertical-polarization ground reflection coefficient at a grazing angle.

    Gamma = (eps*sin(t) - sqrt(eps - cos^2(t))) / (eps*sin(t) + sqrt(eps - cos^2(t)))

    Tends to -1 at grazing incidence and crosses zero at the pseudo-Brewster
    angle asin(1/sqrt(eps+1)). Accepts scalars or arrays.
    """
    t = np.radians(np.asarray(theta_r_deg, dtype=float))
    s = np.sin(t)
    root = np.sqrt(gp.epsilon0 - np.cos(t) ** 2)
    out = (gp.epsilon0 * s - root) / (gp.epsilon0 * s + root)
    if np.ndim(theta_r_deg) == 0:
        return float(out)
    return out


def free_space_gain(
    g: LinkGeometry, tx: AntennaPattern, rx: AntennaPattern, c: CarrierConfig
) -> float:
    """Free-space linear channel gain (lambda/(4 pi d3))^2 * G_tx * G_rx."""
    if g.d3_m <= 0.0:
        raise DegenerateLink("d3 must be positive")
    g_tx, g_rx, _, _ = link_gains(tx, rx, g)
    return (c.lambda_m / (4.0 * math.pi)) ** 2 * g_tx * g_rx / g.d3_m**2


def two_ray_gain(
    g: LinkGeometry,
    tx: AntennaPattern,
    rx: AntennaPattern,
    c: CarrierConfig,
    gp: GroundParams,
) -> float:
    """Two-ray linear channel gain: coherent sum of direct and ground-bounce rays.

    The bounce is scaled by the reflection coefficient at the grazing angle
    and delayed by the excess path, giving the phase term
    exp(-j * 2 pi (d_refl - d3) / lambda).
    """
    if g.d3_m <= 0.0:
        raise DegenerateLink("d3 must be positive")
    g_tx_los, g_rx_los, g_tx_refl, g_rx_refl = link_gains(tx, rx, g)
    gamma = reflection_coefficient(g.theta_r_deg, gp)
    dtau = 2.0 * math.pi * (g.d_refl_m - g.d3_m) / c.lambda_m
    total = math.sqrt(g_tx_los * g_rx_los) / g.d3_m + (
        gamma * math.sqrt(g_tx_refl * g_rx_refl) * complex(math.cos(dtau), -math.sin(dtau))
    ) / g.d_refl_m
    return (c.lambda_m / (4.0 * math.pi)) ** 2 * abs(total) ** 2


def path_loss_db(gain: float) -> float:
    """Decibel path loss of a linear channel gain: PL = -10*log10(gain)."""
    if gain <= 0.0:
        raise DegenerateLink("channel gain must be positive")
    return -10.0 * math.log10(gain)


def synthesize_rsrp(
    g: LinkGeometry,
    model: PropagationModel,
    tx: AntennaPattern,
    rx: AntennaPattern,
    c: CarrierConfig,
    gp: Optional[GroundParams] = None,
    sh: Optional[ShadowingModel] = None,
) -> RsrpSample:
    """Synthesize one RSRP value: tx_power_dbm - path_loss_db + shadowing."""
    if model is PropagationModel.TWO_RAY:
        ch_gain = two_ray_gain(g, tx, rx, c, gp if gp is not None else GroundParams())
    else:
        ch_gain = free_space_gain(g, tx, rx, c)
    s = sh.sample() if sh is not None else 0.0
    return RsrpSample(rsrp_dbm=c.tx_power_dbm - path_loss_db(ch_gain) + s)
