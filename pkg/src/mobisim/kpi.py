"""Network KPIs from per-UE throughput: mean, cell edge, spectral efficiency, fairness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def average_throughput(per_ue_bps) -> float:
    """Arithmetic mean of per-UE throughput."""
    t = np.asarray(per_ue_bps, dtype=float)
    if t.size == 0:
        raise ValueError("per-UE throughput must be non-empty")
    return float(t.mean())


def cell_edge_throughput(per_ue_bps) -> float:
    """5th percentile by the nearest-rank rule (index ceil(0.05 n), 1-based)."""
    t = np.sort(np.asarray(per_ue_bps, dtype=float))
    if t.size == 0:
        raise ValueError("per-UE throughput must be non-empty")
    rank = math.ceil(0.05 * t.size)
    return float(t[max(rank, 1) - 1])


def spectral_efficiency(per_ue_bps, bandwidth_hz: float) -> float:
    """Sum throughput over the system bandwidth (bits/s/Hz)."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    t = np.asarray(per_ue_bps, dtype=float)
    if t.size == 0:
        raise ValueError("per-UE throughput must be non-empty")
    return float(t.sum() / bandwidth_hz)


def jain_fairness(per_ue_bps) -> float:
    """Jain index (sum T)^2 / (n sum T^2); 1 for equal shares, 1/n for one taker.

    The all-zero vector returns 1.0 by the equal-share convention.
    """
    t = np.asarray(per_ue_bps, dtype=float)
    if t.size == 0:
        raise ValueError("per-UE throughput must be non-empty")
    s2 = float((t * t).sum())
    if s2 == 0.0:
        return 1.0
    s = float(t.sum())
    return s * s / (t.size * s2)


@dataclass(frozen=True)
class KpiReport:
    """KPIs of one sweep point and seed, plus the underlying per-UE series."""

    speed_kmph: float
    scheduler: str
    tx: int
    rx: int
    seed: int
    per_ue_bps: np.ndarray
    bandwidth_hz: float

    @property
    def average_ue_throughput_bps(self) -> float:
        return average_throughput(self.per_ue_bps)

    @property
    def cell_edge_throughput_bps(self) -> float:
        return cell_edge_throughput(self.per_ue_bps)

    @property
    def spectral_efficiency_bps_hz(self) -> float:
        return spectral_efficiency(self.per_ue_bps, self.bandwidth_hz)

    @property
    def fairness(self) -> float:
        return jain_fairness(self.per_ue_bps)
