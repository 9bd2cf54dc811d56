"""Satellite-to-ground optical transmittance model.

The downlink transmittance factorizes as eta_sg = eta_fs * eta_atm. The
free-space factor is the fraction of a diffracting Gaussian beam collected by
a circular receiving aperture,

    eta_fs(L) = 1 - exp(-2 r^2 / w(L)^2),   w(L) = w0 sqrt(1 + (L/L_R)^2),

with L_R = pi w0^2 / lambda the Rayleigh range. The atmospheric factor follows
a Beer-Lambert law through a thin homogeneous layer,

    eta_atm = (eta_zen)^(sec zeta)  for |zeta| < pi/2, else 0,

where zeta is the zenith angle of the line of sight seen from the station,
obtained in closed form from the slant range L and orbit altitude h:

    cos zeta = h/L - (L^2 - h^2) / (2 R_E L).

All transmittance functions accept scalars or numpy arrays for the range
argument and are pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ConfigurationError, EarthModel


class GeometryError(ValueError):
    """Physically impossible link geometry (e.g. slant range below altitude)."""


@dataclass(frozen=True)
class OpticalLinkParams:
    """Downlink optics: receiver aperture, initial beam waist, wavelength,
    atmospheric transmittance at zenith."""

    receiver_radius_m: float = 0.75
    beam_waist_m: float = 0.025
    wavelength_m: float = 810e-9
    zenith_transmittance: float = 0.5

    def __post_init__(self):
        if min(self.receiver_radius_m, self.beam_waist_m, self.wavelength_m) <= 0:
            raise ConfigurationError("optical parameters must be strictly positive")
        if not 0.0 < self.zenith_transmittance <= 1.0:
            raise ConfigurationError("zenith_transmittance must be in (0, 1]")


def rayleigh_range_m(params: OpticalLinkParams) -> float:
    """Rayleigh range pi w0^2 / lambda in meters."""
    return math.pi * params.beam_waist_m**2 / params.wavelength_m


def beam_waist_m(distance_m, params: OpticalLinkParams):
    """Beam waist w(L) at distance L (m) from the focal region."""
    lr = rayleigh_range_m(params)
    return params.beam_waist_m * np.sqrt(1.0 + (np.asarray(distance_m, dtype=float) / lr) ** 2)


def free_space_transmittance(distance_m, params: OpticalLinkParams):
    """Diffraction-limited collection efficiency 1 - exp(-2 r^2 / w(L)^2)."""
    w = beam_waist_m(distance_m, params)
    return -np.expm1(-2.0 * params.receiver_radius_m**2 / w**2)


def cos_zenith_angle(slant_range_km, altitude_km: float, earth: EarthModel):
    """cos(zenith angle), clamped into [-1, 1] to absorb float spill at the
    horizon and at the antipode."""
    L = np.asarray(slant_range_km, dtype=float)
    cz = altitude_km / L - (L**2 - altitude_km**2) / (2.0 * earth.radius_km * L)
    return np.clip(cz, -1.0, 1.0)


def zenith_angle_rad(slant_range_km, altitude_km: float, earth: EarthModel):
    """Zenith angle of the line of sight, in radians.

    Raises GeometryError when the slant range is below the orbit altitude,
    which no geometry can produce.
    """
    L = np.asarray(slant_range_km, dtype=float)
    if np.any(L < altitude_km * (1.0 - 1e-12)):
        raise GeometryError("slant range below orbit altitude")
    out = np.arccos(cos_zenith_angle(np.maximum(L, altitude_km), altitude_km, earth))
    return float(out) if np.isscalar(slant_range_km) else out


def atmospheric_transmittance(slant_range_km, altitude_km: float,
                              params: OpticalLinkParams, earth: EarthModel):
    """(eta_zen)^(sec zeta) above the horizon, exactly 0 at or below it."""
    cz = cos_zenith_angle(slant_range_km, altitude_km, earth)
    visible = cz > 0.0
    # sec(zeta) = 1/cos(zeta); guard the masked-out entries before dividing
    safe = np.where(visible, cz, 1.0)
    eta = np.exp(math.log(params.zenith_transmittance) / safe)
    return np.where(visible, eta, 0.0)


def link_transmittance(slant_range_km, altitude_km: float,
                       params: OpticalLinkParams, earth: EarthModel):
    """Single-arm downlink transmittance eta_sg = eta_fs * eta_atm."""
    fs = free_space_transmittance(np.asarray(slant_range_km, dtype=float) * 1000.0, params)
    return fs * atmospheric_transmittance(slant_range_km, altitude_km, params, earth)


def pair_transmittance(slant_range_1_km, slant_range_2_km, altitude_km: float,
                       params: OpticalLinkParams, earth: EarthModel):
    """Two-arm transmittance for one satellite serving a station pair:
    eta_tot = eta_sg(L1) * eta_sg(L2)."""
    return (link_transmittance(slant_range_1_km, altitude_km, params, earth)
            * link_transmittance(slant_range_2_km, altitude_km, params, earth))


def loss_db(transmittance):
    """Loss in dB, -10 log10(eta); eta = 0 maps to +inf."""
    eta = np.asarray(transmittance, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(eta > 0.0, -10.0 * np.log10(np.where(eta > 0.0, eta, 1.0)), np.inf)
    return float(out) if np.isscalar(transmittance) else out


def erasure_survival_probability(transmittance: float, arrival_probability: float = 1.0) -> float:
    """Probability the dual-rail qubit survives the erasure channel.

    A qubit present with probability arrival_probability passes with
    probability transmittance and is replaced by vacuum otherwise.
    """
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError("transmittance must be in [0, 1]")
    if not 0.0 <= arrival_probability <= 1.0:
        raise ValueError("arrival_probability must be in [0, 1]")
    return transmittance * arrival_probability


def pair_arrival_probability(eta_1: float, eta_2: float) -> float:
    """Joint survival of both halves of an entangled pair (independent arms)."""
    return erasure_survival_probability(eta_1) * erasure_survival_probability(eta_2)


def midpoint_slant_range_km(ground_distance_km, altitude_km: float, earth: EarthModel):
    """Slant range from a satellite at the zenith of the midpoint of two
    stations separated along a great circle by ground_distance_km."""
    theta = np.asarray(ground_distance_km, dtype=float) / 2.0 / earth.radius_km
    r1, r2 = earth.radius_km, earth.radius_km + altitude_km
    return np.sqrt(r1**2 + r2**2 - 2.0 * r1 * r2 * np.cos(theta))


def midpoint_pair_transmittance(ground_distance_km, altitude_km: float,
                                params: OpticalLinkParams, earth: EarthModel):
    """eta_sg^2 for the static midpoint-zenith scenario (both arms equal)."""
    L = midpoint_slant_range_km(ground_distance_km, altitude_km, earth)
    return link_transmittance(L, altitude_km, params, earth) ** 2


@dataclass(frozen=True)
class LinkSample:
    """One (satellite, station-pair) link evaluation at a fixed time."""

    time_s: float
    satellite_id: int
    station_ids: tuple[str, str]
    slant_range_1_km: float
    slant_range_2_km: float
    zenith_1_rad: float
    zenith_2_rad: float
    eta_sg_1: float
    eta_sg_2: float
    eta_tot: float
    loss_db: float
    in_range: bool
