"""Hexagonal multi-site network layout, sector antennas and UE drops."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Parametric tri-sector pattern (Kathrein-style macro antenna).
HORIZONTAL_HPBW_DEG = 70.0
VERTICAL_HPBW_DEG = 10.0
FRONT_TO_BACK_CAP_DB = 20.0
DEFAULT_DOWNTILT_DEG = 8.0
DEFAULT_BORESIGHT_GAIN_DBI = 15.0
DEFAULT_BS_HEIGHT_M = 20.0

# Unit normals of the six Voronoi-cell edges of a triangular site grid
# (edges face the six nearest neighbours).
_HEX_EDGE_ANGLES = np.deg2rad(np.arange(0, 360, 60))
HEX_EDGE_NORMALS = np.stack([np.cos(_HEX_EDGE_ANGLES), np.sin(_HEX_EDGE_ANGLES)], axis=1)


@dataclass(frozen=True)
class AntennaPattern:
    """Sector antenna pattern: parabolic main lobe capped at the back-lobe level."""

    horizontal_hpbw_deg: float = HORIZONTAL_HPBW_DEG
    vertical_hpbw_deg: float = VERTICAL_HPBW_DEG
    front_to_back_cap_db: float = FRONT_TO_BACK_CAP_DB
    boresight_gain_dbi: float = DEFAULT_BORESIGHT_GAIN_DBI
    downtilt_deg: float = DEFAULT_DOWNTILT_DEG


@dataclass(frozen=True)
class Site:
    position: tuple[float, float]
    height_m: float


@dataclass(frozen=True)
class Sector:
    site: int
    azimuth_deg: float
    downtilt_deg: float
    boresight_gain_dbi: float


@dataclass(frozen=True)
class NetworkLayout:
    sites: tuple[Site, ...]
    sectors: tuple[Sector, ...]
    inter_site_distance: float
    rings: int

    # Cached coordinate arrays for vectorised geometry queries.
    site_xy: np.ndarray = field(repr=False, default=None)
    sector_site: np.ndarray = field(repr=False, default=None)
    sector_azimuth_deg: np.ndarray = field(repr=False, default=None)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_sectors(self) -> int:
        return len(self.sectors)


def hex_site_count(rings: int) -> int:
    """Number of sites in a hexagonal grid with the given ring count."""
    return 1 + 3 * rings * (rings + 1)


def build_layout(
    inter_site_distance: float,
    rings: int,
    azimuth_offset_deg: float = 30.0,
    bs_height_m: float = DEFAULT_BS_HEIGHT_M,
    downtilt_deg: float = DEFAULT_DOWNTILT_DEG,
    boresight_gain_dbi: float = DEFAULT_BORESIGHT_GAIN_DBI,
) -> NetworkLayout:
    """Build a hexagonal grid of tri-sector sites.

    Sites sit on a triangular lattice with the requested inter-site
    distance; ring r adds 6r sites, so the total is 1 + 3r(r+1).  Each
    site carries three sectors whose azimuths are the offset plus 0, 120
    and 240 degrees.
    """
    if rings < 0:
        raise ValueError("rings must be >= 0")
    if inter_site_distance <= 0:
        raise ValueError("inter_site_distance must be positive")

    # Axial coordinates (q, r) of the hexagonal ball of the given radius,
    # ordered centre outwards ring by ring.
    coords = [(0, 0)]
    for ring in range(1, rings + 1):
        ring_coords = []
        for q in range(-ring, ring + 1):
            for r in range(-ring, ring + 1):
                if max(abs(q), abs(r), abs(q + r)) == ring:
                    ring_coords.append((q, r))
        ring_coords.sort(key=lambda c: np.arctan2(c[1] * np.sqrt(3) / 2, c[0] + c[1] / 2) % (2 * np.pi))
        coords.extend(ring_coords)

    sites = []
    for q, r in coords:
        x = inter_site_distance * (q + r / 2.0)
        y = inter_site_distance * (np.sqrt(3) / 2.0) * r
        sites.append(Site(position=(float(x), float(y)), height_m=bs_height_m))

    sectors = []
    for si in range(len(sites)):
        for k in range(3):
            sectors.append(
                Sector(
                    site=si,
                    azimuth_deg=float((azimuth_offset_deg + 120.0 * k) % 360.0),
                    downtilt_deg=downtilt_deg,
                    boresight_gain_dbi=boresight_gain_dbi,
                )
            )

    site_xy = np.array([s.position for s in sites], dtype=float)
    return NetworkLayout(
        sites=tuple(sites),
        sectors=tuple(sectors),
        inter_site_distance=float(inter_site_distance),
        rings=rings,
        site_xy=site_xy,
        sector_site=np.array([s.site for s in sectors], dtype=np.intp),
        sector_azimuth_deg=np.array([s.azimuth_deg for s in sectors], dtype=float),
    )


def wrap_angle_deg(angle):
    """Normalise angles to (-180, 180]."""
    a = np.asarray(angle, dtype=float)
    wrapped = -((-a + 180.0) % 360.0 - 180.0)
    return wrapped if wrapped.ndim else float(wrapped)


def antenna_attenuation_db(pattern: AntennaPattern, horizontal_angle_deg, vertical_angle_deg):
    """Pattern attenuation (dB >= 0) at the given angles off boresight.

    Horizontal angle is measured from the sector azimuth, vertical angle
    downward from the horizon; both parabolic terms are capped at the
    front-to-back level and so is their sum.
    """
    phi = np.abs(wrap_angle_deg(horizontal_angle_deg))
    theta = np.asarray(vertical_angle_deg, dtype=float) - pattern.downtilt_deg
    a_h = np.minimum(12.0 * (phi / pattern.horizontal_hpbw_deg) ** 2, pattern.front_to_back_cap_db)
    a_v = np.minimum(12.0 * (theta / pattern.vertical_hpbw_deg) ** 2, pattern.front_to_back_cap_db)
    total = np.minimum(a_h + a_v, pattern.front_to_back_cap_db)
    return total if total.ndim else float(total)


def point_in_site_hexagon(points: np.ndarray, centre: np.ndarray, isd: float) -> np.ndarray:
    """True for points inside the Voronoi hexagon of a site (half ISD apothem)."""
    rel = np.atleast_2d(points) - centre
    proj = rel @ HEX_EDGE_NORMALS.T
    return np.all(proj <= isd / 2.0 + 1e-9, axis=1)


def drop_ues(layout: NetworkLayout, per_sector: int, rng: np.random.Generator) -> np.ndarray:
    """Drop UE positions uniformly inside every sector's dominance area.

    Dominance area = the 120-degree wedge of the site's Voronoi hexagon
    around the sector azimuth; positions are rejection-sampled.  Returns
    an array of shape (per_sector * n_sectors, 2); row i belongs to
    sector i // per_sector.
    """
    if per_sector < 1:
        raise ValueError("per_sector must be >= 1")
    isd = layout.inter_site_distance
    circumradius = isd / np.sqrt(3.0)
    out = np.empty((per_sector * layout.n_sectors, 2), dtype=float)
    row = 0
    for sec_idx, sec in enumerate(layout.sectors):
        centre = layout.site_xy[sec.site]
        need = per_sector
        while need:
            cand = centre + rng.uniform(-circumradius, circumradius, size=(4 * need, 2))
            rel = cand - centre
            ang = np.degrees(np.arctan2(rel[:, 1], rel[:, 0]))
            in_wedge = np.abs(wrap_angle_deg(ang - sec.azimuth_deg)) <= 60.0
            ok = cand[in_wedge & point_in_site_hexagon(cand, centre, isd)]
            take = ok[:need]
            out[row : row + len(take)] = take
            row += len(take)
            need -= len(take)
        assert row == (sec_idx + 1) * per_sector
    return out


def export_layout_csv(layout: NetworkLayout) -> str:
    """Serialise site/sector coordinates for plotting."""
    lines = ["kind,index,site,x_m,y_m,azimuth_deg"]
    for i, site in enumerate(layout.sites):
        lines.append(f"site,{i},{i},{site.position[0]:.3f},{site.position[1]:.3f},")
    for i, sec in enumerate(layout.sectors):
        x, y = layout.sites[sec.site].position
        lines.append(f"sector,{i},{sec.site},{x:.3f},{y:.3f},{sec.azimuth_deg:.1f}")
    return "\n".join(lines) + "\n"
