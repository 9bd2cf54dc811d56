"""Physical constants (CODATA 2018) and simulation-wide defaults."""

PLANCK_CONSTANT_J_S = 6.62607015e-34
SPEED_OF_LIGHT_M_S = 299792458.0

# Downlink budget defaults
DEFAULT_LOSS_CUTOFF_DB = 90.0
DEFAULT_SOURCE_RATE_HZ = 1.0e9

# Signal speed in optical fiber, used by the repeater-chain baseline (km/s).
FIBER_SPEED_KM_S = 2.0e5
VACUUM_SPEED_KM_S = SPEED_OF_LIGHT_M_S / 1000.0

CONSTANTS_RECORD = {
    "planck_constant_J_s": PLANCK_CONSTANT_J_S,
    "speed_of_light_m_s": SPEED_OF_LIGHT_M_S,
    "fiber_speed_km_s": FIBER_SPEED_KM_S,
}
