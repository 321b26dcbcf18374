"""Large-scale losses: macro path loss, shadowing, attachment, noise floor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

THERMAL_NOISE_DBM_PER_HZ = -174.0
MIN_DISTANCE_KM = 0.035  # clamp below 35 m to keep log10(R) out of the near field
MAX_BS_HEIGHT_M = 250.0  # above this the distance slope of the macro model flips sign


@dataclass(frozen=True)
class LinkBudget:
    """Decomposed link budget; coupling_gain = gain - all losses."""

    path_loss_db: float
    shadowing_db: float
    antenna_attenuation_db: float
    antenna_gain_dbi: float
    tx_power_dbm: float

    @property
    def coupling_gain_db(self) -> float:
        return self.antenna_gain_dbi - self.antenna_attenuation_db - self.path_loss_db - self.shadowing_db

    @property
    def rx_power_dbm(self) -> float:
        return self.tx_power_dbm + self.coupling_gain_db


def path_loss_db(distance_km, bs_height_m, carrier_mhz, min_distance_km: float = MIN_DISTANCE_KM):
    """Urban macro path loss.

    L = 40(1 - 4e-3 h) log10(R) - 18 log10(h) + 21 log10(f) + 80, with R in
    kilometres, h the BS antenna height in metres and f the carrier in MHz.
    Distances are clamped below at min_distance_km (35 m default).
    """
    h = float(bs_height_m)
    if not 0.0 < h < MAX_BS_HEIGHT_M:
        raise ValueError(f"bs_height_m must be in (0, {MAX_BS_HEIGHT_M:.0f}) m, got {h}")
    r = np.maximum(np.asarray(distance_km, dtype=float), min_distance_km)
    loss = (
        40.0 * (1.0 - 4e-3 * h) * np.log10(r)
        - 18.0 * np.log10(h)
        + 21.0 * np.log10(float(carrier_mhz))
        + 80.0
    )
    return loss if loss.ndim else float(loss)


def shadowing_db(rng: np.random.Generator, sigma_db: float, size=None):
    """Zero-mean log-normal shadowing draw (dB domain), fixed per link per drop."""
    if sigma_db < 0:
        raise ValueError("sigma_db must be >= 0")
    if sigma_db == 0:
        return 0.0 if size is None else np.zeros(size)
    return rng.normal(0.0, sigma_db, size=size)


def noise_power_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Thermal noise floor over the given bandwidth plus receiver noise figure."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth_hz must be positive")
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * np.log10(bandwidth_hz) + noise_figure_db


def attach(rx_power_dbm_per_sector) -> int:
    """Serving-sector selection: argmax of rx power, ties to the lowest index."""
    rx = np.asarray(rx_power_dbm_per_sector, dtype=float)
    if rx.size == 0:
        raise ValueError("at least one sector required")
    return int(np.argmax(rx))


def attach_all(rx_power_dbm: np.ndarray) -> np.ndarray:
    """Vectorised attachment: argmax over the last axis (ties to lowest index)."""
    return np.argmax(rx_power_dbm, axis=-1)
