"""Constellation and ground-station geometry.

Satellites fly circular polar orbits arranged as a Walker star: the ascending
nodes of the rings are spread evenly over 180 degrees of longitude, and the
satellites within a ring are evenly phased. Orbital planes are fixed in the
inertial frame (no nodal precession) while the Earth rotates underneath with
its sidereal period. All positions are Earth-centered inertial, in km.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ConfigurationError(ValueError):
    """Invalid constellation or geometry parameters."""


@dataclass(frozen=True)
class EarthModel:
    """Spherical Earth with uniform rotation.

    radius_km: mean equatorial radius.
    rotation_period_s: sidereal day.
    mu_km3_s2: gravitational parameter, used for circular-orbit rates.
    """

    radius_km: float = 6378.0
    rotation_period_s: float = 86164.0905
    mu_km3_s2: float = 398600.4418

    def __post_init__(self):
        if self.radius_km <= 0 or self.rotation_period_s <= 0 or self.mu_km3_s2 <= 0:
            raise ConfigurationError("EarthModel parameters must be strictly positive")


@dataclass(frozen=True)
class GeodeticCoordinate:
    """Latitude/longitude position on (or above) the spherical Earth.

    Longitude is normalized into [-180, 180). Latitude outside [-90, 90] is
    rejected rather than wrapped.
    """

    latitude_deg: float
    longitude_deg: float
    altitude_km: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ConfigurationError(f"latitude {self.latitude_deg} outside [-90, 90]")
        if self.altitude_km < 0:
            raise ConfigurationError("altitude_km must be >= 0")
        lon = (self.longitude_deg + 180.0) % 360.0 - 180.0
        object.__setattr__(self, "longitude_deg", lon)


@dataclass(frozen=True)
class ConstellationConfig:
    """Walker-star constellation: num_rings polar rings, sats_per_ring each.

    Ring k has its ascending node at longitude k*180/num_rings +
    ring_node_offset_deg (inertial frame). Satellite m of ring k sits at phase
    m*360/sats_per_ring + k*inter_ring_phase_deg at t=0, measured from the
    ascending node.
    """

    num_rings: int
    sats_per_ring: int
    altitude_km: float
    ring_node_offset_deg: float = 0.0
    inter_ring_phase_deg: float = 0.0

    def __post_init__(self):
        if self.num_rings < 1 or self.sats_per_ring < 1:
            raise ConfigurationError("num_rings and sats_per_ring must be >= 1")
        if self.altitude_km <= 0:
            raise ConfigurationError("altitude_km must be > 0")

    @property
    def total_satellites(self) -> int:
        return self.num_rings * self.sats_per_ring


def orbital_angular_rate(earth: EarthModel, altitude_km: float) -> float:
    """Circular-orbit angular rate sqrt(mu / (R+h)^3) in rad/s."""
    r = earth.radius_km + altitude_km
    return math.sqrt(earth.mu_km3_s2 / r**3)


def orbital_period(earth: EarthModel, altitude_km: float) -> float:
    return 2.0 * math.pi / orbital_angular_rate(earth, altitude_km)


def _ring_phase_arrays(config: ConstellationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-satellite (ascending node, epoch phase) in radians, ring-major order."""
    k = np.repeat(np.arange(config.num_rings), config.sats_per_ring)
    m = np.tile(np.arange(config.sats_per_ring), config.num_rings)
    node = np.deg2rad(k * 180.0 / config.num_rings + config.ring_node_offset_deg)
    phase0 = np.deg2rad(m * 360.0 / config.sats_per_ring + k * config.inter_ring_phase_deg)
    return node, phase0


def constellation_positions(
    config: ConstellationConfig, earth: EarthModel, times_s: np.ndarray
) -> np.ndarray:
    """ECI positions of every satellite at every time.

    Args:
        times_s: shape (T,) array of times in seconds, each >= 0.

    Returns:
        Array of shape (T, num_rings*sats_per_ring, 3) in km. Satellite index
        i = ring*sats_per_ring + sat; satellite ids elsewhere are i+1.
    """
    times_s = np.asarray(times_s, dtype=float)
    node, phase0 = _ring_phase_arrays(config)
    omega = orbital_angular_rate(earth, config.altitude_km)
    phi = omega * times_s[:, None] + phase0[None, :]
    r = earth.radius_km + config.altitude_km
    cos_phi = np.cos(phi)
    x = r * cos_phi * np.cos(node)[None, :]
    y = r * cos_phi * np.sin(node)[None, :]
    z = r * np.sin(phi)
    return np.stack([x, y, z], axis=-1)


def satellite_position(
    config: ConstellationConfig,
    earth: EarthModel,
    ring_index: int,
    sat_index: int,
    t_s: float,
) -> np.ndarray:
    """ECI position (km) of one satellite at time t_s.

    The satellite moves from the ascending node northward over the pole
    (inclination 90 degrees).
    """
    if not 0 <= ring_index < config.num_rings:
        raise ConfigurationError(f"ring_index {ring_index} out of range")
    if not 0 <= sat_index < config.sats_per_ring:
        raise ConfigurationError(f"sat_index {sat_index} out of range")
    if t_s < 0:
        raise ConfigurationError("t_s must be >= 0")
    node = math.radians(ring_index * 180.0 / config.num_rings + config.ring_node_offset_deg)
    phase = (
        orbital_angular_rate(earth, config.altitude_km) * t_s
        + math.radians(sat_index * 360.0 / config.sats_per_ring
                       + ring_index * config.inter_ring_phase_deg)
    )
    r = earth.radius_km + config.altitude_km
    return np.array([
        r * math.cos(phase) * math.cos(node),
        r * math.cos(phase) * math.sin(node),
        r * math.sin(phase),
    ])


def station_positions(
    station: GeodeticCoordinate, earth: EarthModel, times_s: np.ndarray
) -> np.ndarray:
    """ECI positions (T, 3) of a ground station carried by the rotating Earth."""
    times_s = np.asarray(times_s, dtype=float)
    spin = 2.0 * math.pi / earth.rotation_period_s
    lon = math.radians(station.longitude_deg) + spin * times_s
    lat = math.radians(station.latitude_deg)
    r = earth.radius_km + station.altitude_km
    return np.stack([
        r * math.cos(lat) * np.cos(lon),
        r * math.cos(lat) * np.sin(lon),
        np.full_like(times_s, r * math.sin(lat)),
    ], axis=-1)


def ground_station_position(
    station: GeodeticCoordinate, earth: EarthModel, t_s: float
) -> np.ndarray:
    """ECI position (km) of a ground station at time t_s."""
    return station_positions(station, earth, np.array([float(t_s)]))[0]


def slant_range(a: np.ndarray, b: np.ndarray) -> float | np.ndarray:
    """Euclidean distance between positions; broadcasts over leading axes."""
    return np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), axis=-1)


def great_circle_distance(
    a: GeodeticCoordinate, b: GeodeticCoordinate, earth: EarthModel
) -> float:
    """Haversine distance (km) on the sphere of radius earth.radius_km."""
    la1, lo1 = math.radians(a.latitude_deg), math.radians(a.longitude_deg)
    la2, lo2 = math.radians(b.latitude_deg), math.radians(b.longitude_deg)
    s = (
        math.sin((la2 - la1) / 2.0) ** 2
        + math.cos(la1) * math.cos(la2) * math.sin((lo2 - lo1) / 2.0) ** 2
    )
    return 2.0 * earth.radius_km * math.asin(min(1.0, math.sqrt(s)))


def equator_separation_deg(distance_km: float, earth: EarthModel) -> float:
    """Longitude offset (deg) putting two equator stations distance_km apart."""
    return math.degrees(distance_km / earth.radius_km)


def max_dual_visibility_arc_km(altitude_km: float, earth: EarthModel) -> float:
    """Longest ground arc between two stations that can both see one satellite.

    Equals twice the geometric horizon arc 2*R*arccos(R/(R+h)); beyond this
    separation no satellite at altitude h is ever simultaneously visible.
    """
    return 2.0 * earth.radius_km * math.acos(earth.radius_km / (earth.radius_km + altitude_km))
