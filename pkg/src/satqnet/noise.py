"""Thermal-background noise model and post-selected Bell-pair fidelity.

Each downlink arm mixes the dual-rail signal photon with a weak unpolarized
thermal background (mean photon number n_bar per detection window, split
evenly between the two polarization modes). Conditioning on a coincidence --
exactly one photon at each receiver -- the surviving two-photon state is a
Bell-diagonal mixture whose weights are bilinear in three per-arm
coefficients:

    x = (1 - n) eta + (n/2) ((1 - 2 eta)^2 + eta^2)
    y = (n/2) (1 - eta)^2
    z = (1 - n) eta - n eta (1 - 2 eta)

In the symmetric high-loss/low-noise regime the fidelity collapses to
F = 1/4 (1 + 3 / (1 + n/eta)^2), with eta/n the per-site signal-to-noise
ratio.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import PLANCK_CONSTANT_J_S, SPEED_OF_LIGHT_M_S
from .geometry import ConfigurationError, EarthModel
from .link_budget import OpticalLinkParams, link_transmittance, midpoint_slant_range_km

# The thermal state is expanded to first order in n_bar; warn beyond this.
NBAR_VALIDITY_LIMIT = 0.1


@dataclass(frozen=True)
class NoiseParams:
    """Receiver-side background collection parameters.

    The receiver radius here is the one entering the background photon rate;
    it is configured independently of the link-budget aperture so the two can
    be set per scenario.
    """

    coincidence_window_s: float = 1e-9
    filter_bandwidth_m: float = 1e-9
    field_of_view_sr: float = 100e-6
    receiver_radius_m: float = 0.5
    wavelength_m: float = 810e-9

    def __post_init__(self):
        for name in ("coincidence_window_s", "filter_bandwidth_m",
                     "field_of_view_sr", "receiver_radius_m", "wavelength_m"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        if self.wavelength_m <= 0:
            raise ConfigurationError("wavelength_m must be > 0")


@dataclass(frozen=True)
class ArmCoefficients:
    """Coincidence-subspace coefficients (x, y, z) of one noisy arm."""

    x: float
    y: float
    z: float


@dataclass(frozen=True)
class BellMixture:
    """Weights over the Bell basis (Phi+, Phi-, Psi+, Psi-); not necessarily
    normalized."""

    phi_plus: float
    phi_minus: float
    psi_plus: float
    psi_minus: float

    @property
    def total(self) -> float:
        return self.phi_plus + self.phi_minus + self.psi_plus + self.psi_minus

    @property
    def fidelity_phi_plus(self) -> float:
        return self.phi_plus / self.total

    def normalized(self) -> "BellMixture":
        t = self.total
        return BellMixture(self.phi_plus / t, self.phi_minus / t,
                           self.psi_plus / t, self.psi_minus / t)

    @staticmethod
    def bell(which: str) -> "BellMixture":
        weights = {"phi+": (1, 0, 0, 0), "phi-": (0, 1, 0, 0),
                   "psi+": (0, 0, 1, 0), "psi-": (0, 0, 0, 1)}
        if which not in weights:
            raise ValueError(f"unknown Bell state {which!r}")
        return BellMixture(*map(float, weights[which]))

    @staticmethod
    def werner(f0: float) -> "BellMixture":
        """Phi+ with fidelity f0, remainder spread over the other three."""
        if not 0.25 <= f0 <= 1.0:
            raise ValueError("f0 must be in [1/4, 1]")
        rest = (1.0 - f0) / 3.0
        return BellMixture(f0, rest, rest, rest)


def arm_coefficients(eta: float, n_bar: float) -> ArmCoefficients:
    """Arm coefficients (x, y, z) for transmittance eta and background n_bar."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must be in [0, 1]")
    if n_bar < 0.0:
        raise ValueError("n_bar must be >= 0")
    if n_bar > NBAR_VALIDITY_LIMIT:
        warnings.warn(
            f"n_bar={n_bar:.3g} exceeds the first-order validity regime "
            f"(<= {NBAR_VALIDITY_LIMIT})", stacklevel=2)
    x = (1.0 - n_bar) * eta + (n_bar / 2.0) * ((1.0 - 2.0 * eta) ** 2 + eta**2)
    y = (n_bar / 2.0) * (1.0 - eta) ** 2
    z = (1.0 - n_bar) * eta - n_bar * eta * (1.0 - 2.0 * eta)
    return ArmCoefficients(x, y, z)


def postselected_mixture(source: BellMixture, arm_1: ArmCoefficients,
                         arm_2: ArmCoefficients) -> BellMixture:
    """Unnormalized Bell weights after both arms, conditioned on coincidence.

    A Phi source component maps to weights ((s+zz)/2, (s-zz)/2, m/2, m/2) and
    a Psi component to (m/2, m/2, (s+zz)/2, (s-zz)/2), with
    s = x1 x2 + y1 y2, zz = z1 z2, m = x1 y2 + y1 x2; the minus states swap
    the +-zz pairing. Extended to arbitrary source mixtures by linearity.
    """
    s = arm_1.x * arm_2.x + arm_1.y * arm_2.y
    zz = arm_1.z * arm_2.z
    m = arm_1.x * arm_2.y + arm_1.y * arm_2.x
    w = np.zeros(4)
    w += source.phi_plus * np.array([s + zz, s - zz, m, m])
    w += source.phi_minus * np.array([s - zz, s + zz, m, m])
    w += source.psi_plus * np.array([m, m, s + zz, s - zz])
    w += source.psi_minus * np.array([m, m, s - zz, s + zz])
    w /= 2.0
    return BellMixture(*w)


def postselected_fidelity(source: BellMixture, arm_1: ArmCoefficients,
                          arm_2: ArmCoefficients) -> float:
    """Fidelity to Phi+ of the normalized post-selected state."""
    return postselected_mixture(source, arm_1, arm_2).fidelity_phi_plus


def fidelity_ideal(eta: float, n_bar: float) -> float:
    """Symmetric-arm coincidence fidelity 1/4 (1 + 3/(1 + n_bar/eta)^2).

    Valid in the high-loss, low-noise regime with a perfect Phi+ source.
    """
    if eta == 0.0:
        return 1.0 if n_bar == 0.0 else 0.25
    ratio = n_bar / eta
    return 0.25 * (1.0 + 3.0 / (1.0 + ratio) ** 2)


def fidelity_nonideal(f0: float, eta: float, n_bar: float) -> float:
    """Coincidence fidelity for a source of initial fidelity f0:
    1/4 (1 + (4 f0 - 1)/(1 + n_bar/eta)^2). Lies in [1/4, f0]."""
    if not 0.25 <= f0 <= 1.0:
        raise ValueError("f0 must be in [1/4, 1]")
    if eta == 0.0:
        return f0 if n_bar == 0.0 else 0.25
    ratio = n_bar / eta
    return 0.25 * (1.0 + (4.0 * f0 - 1.0) / (1.0 + ratio) ** 2)


def required_snr(f_star: float) -> float:
    """Per-site signal-to-noise ratio needed to sustain fidelity f_star.

    Exact inversion of fidelity_ideal: 1 / (sqrt(3/(4 f_star - 1)) - 1).
    Returns inf as f_star -> 1; no finite SNR exists for f_star <= 1/4.
    """
    if f_star <= 0.25:
        raise ValueError("no finite SNR reaches fidelity <= 1/4")
    if f_star > 1.0:
        raise ValueError("fidelity target cannot exceed 1")
    if f_star == 1.0:
        return math.inf
    return 1.0 / (math.sqrt(3.0 / (4.0 * f_star - 1.0)) - 1.0)


def required_snr_first_order(f_star: float) -> float:
    """First-order approximation (3/2) / (1 - f_star), for f_star near 1."""
    if not 0.25 < f_star < 1.0:
        raise ValueError("f_star must be in (1/4, 1)")
    return 1.5 / (1.0 - f_star)


def background_photon_rate(spectral_irradiance: float, params: NoiseParams) -> float:
    """Background photons per second collected by the receiver.

    spectral_irradiance is in W m^-2 um^-1 sr^-1; the filter bandwidth is
    converted from meters to micrometers to match. The rate is
    H * Omega_fov * pi r^2 * delta_lambda / (h c / lambda).
    """
    if spectral_irradiance < 0:
        raise ValueError("spectral_irradiance must be >= 0")
    bandwidth_um = params.filter_bandwidth_m * 1e6
    collected_w = (spectral_irradiance * params.field_of_view_sr
                   * math.pi * params.receiver_radius_m**2 * bandwidth_um)
    photon_energy_j = PLANCK_CONSTANT_J_S * SPEED_OF_LIGHT_M_S / params.wavelength_m
    return collected_w / photon_energy_j


def mean_background_photons(rate_per_s: float, window_s: float) -> float:
    """Mean background photons per detection window: rate * window."""
    return rate_per_s * window_s


@dataclass(frozen=True)
class IrradiancePoint:
    spectral_irradiance: float
    n_bar: float
    eta_sg: float
    fidelity: float


def fidelity_vs_irradiance_curve(
    ground_distance_km: float,
    altitude_km: float,
    irradiance_values,
    link_params: OpticalLinkParams,
    noise_params: NoiseParams,
    earth: EarthModel,
) -> list[IrradiancePoint]:
    """Fidelity against spectral irradiance in the midpoint-zenith geometry.

    The satellite sits at the zenith of the midpoint between two stations
    ground_distance_km apart; both arms share the same eta_sg.
    """
    L = midpoint_slant_range_km(ground_distance_km, altitude_km, earth)
    eta = float(link_transmittance(L, altitude_km, link_params, earth))
    points = []
    for h_irr in irradiance_values:
        rate = background_photon_rate(float(h_irr), noise_params)
        n_bar = mean_background_photons(rate, noise_params.coincidence_window_s)
        points.append(IrradiancePoint(float(h_irr), n_bar, eta, fidelity_ideal(eta, n_bar)))
    return points
