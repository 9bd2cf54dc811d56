"""Scenario configuration: YAML schema, validation, normalization.

A scenario file is a YAML mapping with nested sections. Unknown keys are
rejected and every problem is reported at once with its field path. All
quantities carry their unit in the field name (``*_km``, ``*_s``, ``*_m``,
``*_deg``, ``*_sr``, ``*_hz``); values are normalized to plain floats/ints
internally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import yaml

from .cities import EXPECTED_CITIES
from .constants import (
    DEFAULT_LOSS_CUTOFF_DB,
    DEFAULT_SOURCE_RATE_HZ,
    FIBER_SPEED_KM_S,
)
from .geometry import ConfigurationError, EarthModel
from .link_budget import OpticalLinkParams
from .merit import DEFAULT_ALTITUDES_KM, DEFAULT_CONFIG_PAIRS, DEFAULT_DISTANCES_KM
from .noise import NoiseParams
from .repeater import DEFAULT_ATTENUATION_PER_KM
from .simulation import SimulationClock

SCENARIO_KINDS = (
    "two_station_equator",
    "latitude_sweep",
    "grid_42",
    "city_pairs",
    "static_midpoint",
    "fidelity_vs_irradiance",
    "repeater_comparison",
)

SCENARIO_DESCRIPTIONS = {
    "two_station_equator": "sweep constellations for two equatorial stations; emits cells, optima and best-configuration tables",
    "latitude_sweep": "both stations at the same latitude, fixed longitude separation; loss/rate vs latitude",
    "grid_42": "grid of stations with nearest-neighbor pair edges served jointly by one constellation",
    "city_pairs": "24-hour average loss between city pairs, one independent run per pair and altitude",
    "static_midpoint": "no time stepping: satellite at the midpoint zenith; transmittance vs (d, h)",
    "fidelity_vs_irradiance": "coincidence fidelity vs sky spectral irradiance in the midpoint geometry",
    "repeater_comparison": "satellite rates vs ground repeater-chain rates over distance",
}

DEFAULT_CITY_PAIRS = (
    ("Toronto", "New York City"),
    ("Lijiang", "Delingha"),
    ("Houston", "Washington DC"),
    ("Sydney", "Auckland"),
    ("New York City", "London"),
    ("Singapore", "Sydney"),
    ("London", "Mumbai"),
)

DEFAULT_GRID_LATITUDES = (-54.0, -36.0, -18.0, 0.0, 18.0, 36.0, 54.0)
DEFAULT_GRID_LONGITUDES = (0.0, 18.0, 36.0, 54.0, 72.0, 90.0)

_CITY_ALTITUDES = (500.0, 1000.0, 2000.0, 3000.0, 4000.0, 5000.0)
_STATIC_DISTANCES = tuple(float(d) for d in range(100, 5001, 25))
_REPEATER_DISTANCES = tuple(float(d) for d in range(100, 2001, 100))
_IRRADIANCE_GRID = tuple(10.0 ** e for e in range(-9, 2))

# per-kind defaults where the global default would be wasteful
_KIND_PAIRS = {
    "latitude_sweep": ((15, 15),),
    "grid_42": ((15, 15),),
    "city_pairs": ((20, 20),),
    "repeater_comparison": ((20, 20),),
}
_KIND_ALTITUDES = {
    "latitude_sweep": (1000.0,),
    "grid_42": (1000.0,),
    "city_pairs": _CITY_ALTITUDES,
    "fidelity_vs_irradiance": (500.0, 1000.0, 2000.0),
    "repeater_comparison": (500.0,),
}
_KIND_DISTANCES = {
    "static_midpoint": _STATIC_DISTANCES,
    "fidelity_vs_irradiance": (500.0, 1000.0, 2000.0),
    "repeater_comparison": _REPEATER_DISTANCES,
}


class ConfigError(ValueError):
    """Raised with the aggregated list of validation problems."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


@dataclass
class ScenarioConfig:
    """Fully validated and normalized scenario."""

    kind: str
    mode: str
    seed: int
    clock: SimulationClock
    pairs: tuple[tuple[int, int], ...]
    altitudes_km: tuple[float, ...]
    ring_node_offset_deg: float
    inter_ring_phase_deg: float
    optical: OpticalLinkParams
    noise: NoiseParams
    irradiance_grid: tuple[float, ...]
    distances_km: tuple[float, ...]
    latitudes_deg: tuple[float, ...]
    longitude_separation_deg: float
    grid_latitudes_deg: tuple[float, ...]
    grid_longitudes_deg: tuple[float, ...]
    grid_edge_mode: str
    city_pairs: tuple[tuple[str, str], ...]
    cities_file: str | None
    repeater_memories: int
    repeater_links: tuple[int, ...]
    attenuation_per_km: float
    signal_speed_km_s: float
    loss_cutoff_db: float
    source_rate_hz: float
    time_series: bool
    earth: EarthModel
    output_dir: str
    resolved: dict = field(repr=False, default_factory=dict)


class _Validator:
    def __init__(self, raw: dict):
        self.raw = raw
        self.errors: list[str] = []
        self.seen: set[tuple[str, str]] = set()

    def fail(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def section(self, name: str) -> dict:
        sec = self.raw.get(name, {})
        if sec is None:
            sec = {}
        if not isinstance(sec, dict):
            self.fail(name, "must be a mapping")
            return {}
        return sec

    def get(self, section: str, key: str, default, check=None, kind=None):
        self.seen.add((section, key))
        sec = self.section(section)
        if key not in sec or sec[key] is None:
            if default is _REQUIRED:
                self.fail(f"{section}.{key}", "is required")
                return None
            return default
        value = sec[key]
        path = f"{section}.{key}"
        if kind == "number":
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                self.fail(path, "must be a number")
                return default if default is not _REQUIRED else None
            value = float(value)
        elif kind == "int":
            if not isinstance(value, int) or isinstance(value, bool):
                self.fail(path, "must be an integer")
                return default if default is not _REQUIRED else None
        elif kind == "bool":
            if not isinstance(value, bool):
                self.fail(path, "must be a boolean")
                return default if default is not _REQUIRED else None
        elif kind == "str":
            if not isinstance(value, str):
                self.fail(path, "must be a string")
                return default if default is not _REQUIRED else None
        if check is not None:
            problem = check(value)
            if problem:
                self.fail(path, problem)
                return default if default is not _REQUIRED else None
        return value

    def number_list(self, section: str, key: str, default, positive=False):
        self.seen.add((section, key))
        sec = self.section(section)
        if key not in sec or sec[key] is None:
            return default
        value = sec[key]
        path = f"{section}.{key}"
        if not isinstance(value, (list, tuple)) or not value:
            self.fail(path, "must be a non-empty list of numbers")
            return default
        out = []
        for i, v in enumerate(value):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                self.fail(f"{path}[{i}]", "must be a number")
                return default
            if positive and v <= 0:
                self.fail(f"{path}[{i}]", "must be > 0")
                return default
            out.append(float(v))
        return tuple(out)

    def check_unknown_keys(self) -> None:
        known_sections = {s for s, _ in self.seen}
        for section, sec in self.raw.items():
            if section not in known_sections:
                self.fail(section, "unknown section")
                continue
            if isinstance(sec, dict):
                for key in sec:
                    if (section, key) not in self.seen:
                        self.fail(f"{section}.{key}", "unknown field")


_REQUIRED = object()


def parse_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(["<root>: config must be a YAML mapping"])
    return raw


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """Apply ``section.key=value`` strings on top of the raw mapping."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError([f"override {item!r}: expected section.key=value"])
        path, _, text = item.partition("=")
        keys = path.strip().split(".")
        if len(keys) < 2:
            raise ConfigError([f"override {item!r}: path must be section.key"])
        value = yaml.safe_load(text)
        node = raw
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError([f"override {item!r}: {k} is not a section"])
        node[keys[-1]] = value
    return raw


def validate_config(raw: dict) -> ScenarioConfig:
    """Validate a raw mapping; raises ConfigError listing every problem."""
    v = _Validator(raw)

    kind = v.get("scenario", "kind", _REQUIRED, kind="str",
                 check=lambda s: None if s in SCENARIO_KINDS
                 else f"must be one of {', '.join(SCENARIO_KINDS)}")
    mode = v.get("scenario", "mode", "deterministic", kind="str",
                 check=lambda s: None if s in ("deterministic", "stochastic")
                 else "must be deterministic or stochastic")
    seed = v.get("scenario", "seed", 1, kind="int")

    duration = v.get("clock", "duration_s", 86400.0, kind="number",
                     check=lambda x: None if x > 0 else "must be > 0")
    timestep = v.get("clock", "timestep_s", 1.0, kind="number",
                     check=lambda x: None if x > 0 else "must be > 0")

    pairs_default = _KIND_PAIRS.get(kind, DEFAULT_CONFIG_PAIRS)
    raw_pairs = v.get("constellation", "pairs", None)
    pairs = pairs_default
    if raw_pairs is not None:
        ok = (isinstance(raw_pairs, (list, tuple)) and raw_pairs
              and all(isinstance(p, (list, tuple)) and len(p) == 2
                      and all(isinstance(x, int) and not isinstance(x, bool) and x >= 1
                              for x in p)
                      for p in raw_pairs))
        if ok:
            pairs = tuple((int(a), int(b)) for a, b in raw_pairs)
        else:
            v.fail("constellation.pairs",
                   "must be a non-empty list of [num_rings, sats_per_ring] with entries >= 1")
    altitudes = v.number_list("constellation", "altitudes_km",
                              _KIND_ALTITUDES.get(kind, DEFAULT_ALTITUDES_KM),
                              positive=True)
    node_offset = v.get("constellation", "ring_node_offset_deg", 0.0, kind="number")
    ring_phase = v.get("constellation", "inter_ring_phase_deg", 0.0, kind="number")

    positive = lambda x: None if x > 0 else "must be > 0"  # noqa: E731
    unit = lambda x: None if 0 < x <= 1 else "must be in (0, 1]"  # noqa: E731
    nonneg = lambda x: None if x >= 0 else "must be >= 0"  # noqa: E731

    optical_kwargs = dict(
        receiver_radius_m=v.get("optical", "receiver_radius_m", 0.75, kind="number", check=positive),
        beam_waist_m=v.get("optical", "beam_waist_m", 0.025, kind="number", check=positive),
        wavelength_m=v.get("optical", "wavelength_m", 810e-9, kind="number", check=positive),
        zenith_transmittance=v.get("optical", "zenith_transmittance", 0.5, kind="number", check=unit),
    )
    noise_kwargs = dict(
        coincidence_window_s=v.get("noise", "coincidence_window_s", 1e-9, kind="number", check=nonneg),
        filter_bandwidth_m=v.get("noise", "filter_bandwidth_m", 1e-9, kind="number", check=nonneg),
        field_of_view_sr=v.get("noise", "field_of_view_sr", 100e-6, kind="number", check=nonneg),
        receiver_radius_m=v.get("noise", "receiver_radius_m", 0.5, kind="number", check=nonneg),
        wavelength_m=v.get("noise", "wavelength_m", 810e-9, kind="number", check=positive),
    )
    irradiance = v.number_list("noise", "irradiance_grid", _IRRADIANCE_GRID)

    distances = v.number_list("stations", "distances_km",
                              _KIND_DISTANCES.get(kind, DEFAULT_DISTANCES_KM),
                              positive=True)
    latitudes = v.number_list("stations", "latitudes_deg",
                              tuple(float(x) for x in range(-80, 81, 10)))
    lon_sep = v.get("stations", "longitude_separation_deg", 18.0, kind="number", check=positive)
    grid_lats = v.number_list("stations", "grid_latitudes_deg", DEFAULT_GRID_LATITUDES)
    grid_lons = v.number_list("stations", "grid_longitudes_deg", DEFAULT_GRID_LONGITUDES)
    edge_mode = v.get("stations", "grid_edge_mode", "all", kind="str",
                      check=lambda s: None if s in ("all", "diagonal")
                      else "must be all or diagonal")
    raw_city_pairs = v.get("stations", "city_pairs", None)
    city_pairs = DEFAULT_CITY_PAIRS
    if raw_city_pairs is not None:
        ok = (isinstance(raw_city_pairs, (list, tuple)) and raw_city_pairs
              and all(isinstance(p, (list, tuple)) and len(p) == 2
                      and all(isinstance(x, str) for x in p) for p in raw_city_pairs))
        if ok:
            city_pairs = tuple((a, b) for a, b in raw_city_pairs)
        else:
            v.fail("stations.city_pairs", "must be a non-empty list of [city, city] name pairs")
    cities_file = v.get("stations", "cities_file", None, kind="str")

    memories = v.get("repeater", "memories_per_half_node", 50, kind="int",
                     check=lambda x: None if x >= 1 else "must be >= 1")
    raw_links = v.get("repeater", "elementary_links", None)
    links = (10, 20, 50)
    if raw_links is not None:
        ok = (isinstance(raw_links, (list, tuple)) and raw_links
              and all(isinstance(x, int) and not isinstance(x, bool) and x >= 1
                      for x in raw_links))
        if ok:
            links = tuple(int(x) for x in raw_links)
        else:
            v.fail("repeater.elementary_links", "must be a non-empty list of integers >= 1")
    attenuation = v.get("repeater", "attenuation_per_km", DEFAULT_ATTENUATION_PER_KM,
                        kind="number", check=positive)
    signal_speed = v.get("repeater", "signal_speed_km_s", FIBER_SPEED_KM_S,
                         kind="number", check=positive)

    cutoff = v.get("simulation", "loss_cutoff_db", DEFAULT_LOSS_CUTOFF_DB,
                   kind="number", check=positive)
    source_rate = v.get("simulation", "source_rate_hz", DEFAULT_SOURCE_RATE_HZ,
                        kind="number", check=positive)
    time_series = v.get("simulation", "time_series", False, kind="bool")

    earth_kwargs = dict(
        radius_km=v.get("earth", "radius_km", 6378.0, kind="number", check=positive),
        rotation_period_s=v.get("earth", "rotation_period_s", 86164.0905,
                                kind="number", check=positive),
        mu_km3_s2=v.get("earth", "mu_km3_s2", 398600.4418, kind="number", check=positive),
    )
    output_dir = v.get("output", "dir", "out", kind="str")

    if kind == "city_pairs" and cities_file is None:
        known = set(EXPECTED_CITIES)
        for i, (a, b) in enumerate(city_pairs):
            for name in (a, b):
                if name not in known:
                    v.fail(f"stations.city_pairs[{i}]", f"unknown city {name!r}")

    v.check_unknown_keys()

    clock = optical = noise = earth = None
    if not v.errors:
        try:
            clock = SimulationClock(duration, timestep)
        except ConfigurationError as exc:
            v.fail("clock", str(exc))
        try:
            optical = OpticalLinkParams(**optical_kwargs)
            noise = NoiseParams(**noise_kwargs)
            earth = EarthModel(**earth_kwargs)
        except ConfigurationError as exc:
            v.fail("<params>", str(exc))
    if v.errors:
        raise ConfigError(sorted(v.errors))

    resolved = {
        "scenario": {"kind": kind, "mode": mode, "seed": seed},
        "clock": {"duration_s": duration, "timestep_s": timestep},
        "constellation": {
            "pairs": [list(p) for p in pairs],
            "altitudes_km": list(altitudes),
            "ring_node_offset_deg": node_offset,
            "inter_ring_phase_deg": ring_phase,
        },
        "optical": optical_kwargs,
        "noise": {**noise_kwargs, "irradiance_grid": list(irradiance)},
        "stations": {
            "distances_km": list(distances),
            "latitudes_deg": list(latitudes),
            "longitude_separation_deg": lon_sep,
            "grid_latitudes_deg": list(grid_lats),
            "grid_longitudes_deg": list(grid_lons),
            "grid_edge_mode": edge_mode,
            "city_pairs": [list(p) for p in city_pairs],
            "cities_file": cities_file,
        },
        "repeater": {
            "memories_per_half_node": memories,
            "elementary_links": list(links),
            "attenuation_per_km": attenuation,
            "signal_speed_km_s": signal_speed,
        },
        "simulation": {"loss_cutoff_db": cutoff, "source_rate_hz": source_rate,
                       "time_series": time_series},
        "earth": earth_kwargs,
        "output": {"dir": output_dir},
    }
    return ScenarioConfig(
        kind=kind, mode=mode, seed=seed, clock=clock,
        pairs=pairs, altitudes_km=altitudes,
        ring_node_offset_deg=node_offset, inter_ring_phase_deg=ring_phase,
        optical=optical, noise=noise, irradiance_grid=irradiance,
        distances_km=distances, latitudes_deg=latitudes,
        longitude_separation_deg=lon_sep,
        grid_latitudes_deg=grid_lats, grid_longitudes_deg=grid_lons,
        grid_edge_mode=edge_mode, city_pairs=city_pairs, cities_file=cities_file,
        repeater_memories=memories, repeater_links=links,
        attenuation_per_km=attenuation, signal_speed_km_s=signal_speed,
        loss_cutoff_db=cutoff, source_rate_hz=source_rate,
        time_series=time_series, earth=earth, output_dir=output_dir,
        resolved=resolved,
    )


def load_config(path: str, overrides: list[str] | None = None) -> ScenarioConfig:
    raw = parse_config_file(path)
    if overrides:
        raw = apply_overrides(raw, overrides)
    return validate_config(raw)
