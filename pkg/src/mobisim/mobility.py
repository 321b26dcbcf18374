"""Random-walk UE mobility with reflection at the network boundary."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import HEX_EDGE_NORMALS, NetworkLayout

BOUNDARY_MARGIN_M = 100.0


@dataclass
class MotionState:
    position: np.ndarray  # (2,) metres
    speed_kmph: float
    heading_rad: float = 0.0


class HexRegion:
    """Hexagonal region as an intersection of six half planes."""

    def __init__(self, offsets_m: np.ndarray):
        self.normals = HEX_EDGE_NORMALS
        self.offsets = np.asarray(offsets_m, dtype=float)

    @classmethod
    def around_layout(cls, layout: NetworkLayout, margin_m: float = BOUNDARY_MARGIN_M) -> "HexRegion":
        proj = layout.site_xy @ HEX_EDGE_NORMALS.T
        return cls(proj.max(axis=0) + layout.inter_site_distance / 2.0 + margin_m)

    def contains(self, points: np.ndarray) -> np.ndarray:
        proj = np.atleast_2d(points) @ self.normals.T
        return np.all(proj <= self.offsets + 1e-9, axis=1)

    def reflect(self, position: np.ndarray, velocity: np.ndarray):
        """Mirror position and velocity across any violated edge (iterated)."""
        p = position.astype(float).copy()
        v = velocity.astype(float).copy()
        for _ in range(8):
            proj = self.normals @ p - self.offsets
            k = int(np.argmax(proj))
            if proj[k] <= 1e-12:
                break
            n = self.normals[k]
            p -= 2.0 * proj[k] * n
            v -= 2.0 * np.dot(v, n) * n
        return p, v


def step(motion: MotionState, dt_s: float, rng: np.random.Generator, region: HexRegion | None = None) -> MotionState:
    """One random-walk step: fresh uniform heading, displacement (v/3.6) dt."""
    if dt_s <= 0:
        raise ValueError("dt_s must be positive")
    if motion.speed_kmph < 0:
        raise ValueError("speed must be >= 0")
    heading = rng.uniform(0.0, 2.0 * np.pi)
    if motion.speed_kmph == 0:
        return MotionState(position=motion.position.copy(), speed_kmph=0.0, heading_rad=heading)
    length = motion.speed_kmph / 3.6 * dt_s
    v = length * np.array([np.cos(heading), np.sin(heading)])
    p = motion.position + v
    if region is not None and not region.contains(p)[0]:
        p, v = region.reflect(p, v)
        heading = float(np.arctan2(v[1], v[0]))
    return MotionState(position=p, speed_kmph=motion.speed_kmph, heading_rad=heading)


def step_all(positions: np.ndarray, speed_kmph: float, dt_s: float, headings: np.ndarray, region: HexRegion) -> np.ndarray:
    """Vectorised step for all UEs (shared speed, per-UE headings)."""
    if speed_kmph == 0:
        return positions
    length = speed_kmph / 3.6 * dt_s
    vel = length * np.stack([np.cos(headings), np.sin(headings)], axis=1)
    new = positions + vel
    inside = np.atleast_1d(region.contains(new))
    if not inside.all():
        for i in np.nonzero(~inside)[0]:
            new[i], _ = region.reflect(new[i], vel[i])
    return new
