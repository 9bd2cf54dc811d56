"""satqnet: satellite-constellation entanglement-distribution simulator.

Propagates Walker-star polar constellations over a rotating Earth, evaluates
optical downlink loss and background-noise-limited fidelity, runs the
satellite-to-station-pair assignment over a 24-hour window, sweeps
constellation configurations for rate/cost optima, and benchmarks against
ground-based repeater chains.
"""

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    ConfigurationError,
    ConstellationConfig,
    EarthModel,
    GeodeticCoordinate,
    great_circle_distance,
    satellite_position,
    slant_range,
)
from .link_budget import (  # noqa: F401
    LinkSample,
    OpticalLinkParams,
    link_transmittance,
    loss_db,
    pair_transmittance,
)
from .noise import (  # noqa: F401
    ArmCoefficients,
    BellMixture,
    NoiseParams,
    arm_coefficients,
    fidelity_ideal,
    fidelity_nonideal,
    postselected_mixture,
    required_snr,
)
from .merit import ConfigCatalog, SweepSettings, run_two_station_sweep  # noqa: F401
from .repeater import RepeaterChainConfig, repeater_rate, waiting_time  # noqa: F401
from .simulation import (  # noqa: F401
    SimulationClock,
    StationGraph,
    TimeSeriesResult,
    run_simulation,
)
