"""Discrete-time network simulation: visibility, assignment, loss/rate series.

Every timestep the simulator evaluates each (satellite, station-pair) link,
discards links where the satellite is below either horizon or the two-arm
loss reaches the dB cutoff, and then assigns satellites to pairs. A satellite
carries a single source and can serve at most one pair at a time, so the
assignment is a matching:

  1. lone-pair pre-pass: a pair whose in-range satellite set has exactly one
     member claims that satellite, even when the satellite has lower-loss
     alternatives; lone pairs competing for one satellite are ordered by
     loss, then by pair index;
  2. remaining candidates are matched greedily in ascending loss order,
     ties broken by (satellite id, pair index);
  3. anything left over is unassigned (id 0) and contributes zero
     transmittance to the averages.

Deterministic mode records the expected pair count per step
(source_rate * dt * eta_tot), which keeps the averaged rates exactly linear
in the source rate; stochastic mode draws Binomial(source_rate * dt, eta_tot)
counts from per-chunk substreams of the run seed so results are reproducible
regardless of chunking internals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import DEFAULT_LOSS_CUTOFF_DB, DEFAULT_SOURCE_RATE_HZ
from .geometry import (
    ConfigurationError,
    ConstellationConfig,
    EarthModel,
    GeodeticCoordinate,
    constellation_positions,
    great_circle_distance,
    station_positions,
)
from .link_budget import OpticalLinkParams, cos_zenith_angle, loss_db

# Fixed chunk-size budget (array elements); chunk boundaries depend only on
# the constellation and graph sizes, so seeded runs are bit-reproducible.
_CHUNK_ELEMENT_BUDGET = 6_000_000
_EDGE_DISTANCE_TOLERANCE = 0.01


@dataclass(frozen=True)
class GroundStation:
    id: str
    coordinate: GeodeticCoordinate
    name: str = ""


@dataclass(frozen=True)
class Edge:
    station_1: str
    station_2: str
    distance_km: float

    @property
    def key(self) -> tuple[str, str]:
        return (self.station_1, self.station_2)


@dataclass
class StationGraph:
    """Ground stations plus the weighted pair-edges requesting entanglement."""

    stations: dict[str, GroundStation]
    edges: list[Edge]

    def __post_init__(self):
        for e in self.edges:
            if e.station_1 not in self.stations or e.station_2 not in self.stations:
                raise ConfigurationError(f"edge {e.key} references unknown station")

    def validate_distances(self, earth: EarthModel) -> None:
        """Reject edges whose stored distance disagrees with the great-circle
        distance by more than 1%."""
        for e in self.edges:
            d = great_circle_distance(self.stations[e.station_1].coordinate,
                                      self.stations[e.station_2].coordinate, earth)
            if d > 0 and abs(e.distance_km - d) > _EDGE_DISTANCE_TOLERANCE * d:
                raise ConfigurationError(
                    f"edge {e.key}: stored distance {e.distance_km:.1f} km differs "
                    f"from great-circle {d:.1f} km by more than 1%")

    @staticmethod
    def from_pairs(stations: list[GroundStation],
                   pairs: list[tuple[str, str]],
                   earth: EarthModel) -> "StationGraph":
        """Build a graph with edge distances computed on the sphere."""
        by_id = {s.id: s for s in stations}
        edges = []
        for a, b in pairs:
            d = great_circle_distance(by_id[a].coordinate, by_id[b].coordinate, earth)
            edges.append(Edge(a, b, d))
        return StationGraph(by_id, edges)

    @staticmethod
    def two_station_equator(distance_km: float, earth: EarthModel) -> "StationGraph":
        """Two stations on the equator separated by distance_km."""
        lon = math.degrees(distance_km / earth.radius_km)
        s1 = GroundStation("g1", GeodeticCoordinate(0.0, 0.0))
        s2 = GroundStation("g2", GeodeticCoordinate(0.0, lon))
        return StationGraph({"g1": s1, "g2": s2}, [Edge("g1", "g2", distance_km)])


@dataclass(frozen=True)
class SimulationClock:
    """Sampling grid t = 0, dt, ..., duration - dt."""

    duration_s: float = 86400.0
    timestep_s: float = 1.0

    def __post_init__(self):
        if self.duration_s <= 0 or self.timestep_s <= 0:
            raise ConfigurationError("clock parameters must be > 0")
        steps = self.duration_s / self.timestep_s
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigurationError("duration_s must be a multiple of timestep_s")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration_s / self.timestep_s))

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps) * self.timestep_s


@dataclass(frozen=True)
class AssignmentRecord:
    """Satellite assignment at one timestep: edge key -> satellite id (0 = none)."""

    time_s: float
    assignments: dict[tuple[str, str], int]


@dataclass(frozen=True)
class Gap:
    start_s: float
    end_s: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass
class EdgeDetail:
    """Per-step geometry of the assigned satellite (NaN when unassigned)."""

    slant_range_1_km: np.ndarray
    slant_range_2_km: np.ndarray
    zenith_1_rad: np.ndarray
    zenith_2_rad: np.ndarray


@dataclass
class TimeSeriesResult:
    """Per-edge outcome of a simulation run."""

    edge: tuple[str, str]
    distance_km: float
    timestep_s: float
    satellite_ids: np.ndarray      # (n,) int32, 0 = unassigned
    eta_tot: np.ndarray            # (n,) transmittance of the assigned link
    pairs_received: np.ndarray     # (n,) counts (expected counts when deterministic)
    avg_loss_db: float = field(init=False)
    avg_rate_ebits_s: float = field(init=False)
    detail: EdgeDetail | None = None

    def __post_init__(self):
        self.avg_loss_db = average_loss_db_from_eta(self.eta_tot)
        self.avg_rate_ebits_s = float(self.pairs_received.sum()
                                      / (self.eta_tot.size * self.timestep_s))

    @property
    def times_s(self) -> np.ndarray:
        return np.arange(self.eta_tot.size) * self.timestep_s

    @property
    def loss_db(self) -> np.ndarray:
        return loss_db(self.eta_tot)

    def gaps(self) -> list[Gap]:
        """Maximal intervals with no assigned satellite."""
        unassigned = self.satellite_ids == 0
        if not unassigned.any():
            return []
        padded = np.diff(np.concatenate(([0], unassigned.view(np.int8), [0])))
        starts = np.where(padded == 1)[0]
        ends = np.where(padded == -1)[0]
        return [Gap(s * self.timestep_s, e * self.timestep_s)
                for s, e in zip(starts, ends)]

    def gap_seconds(self) -> float:
        return float((self.satellite_ids == 0).sum()) * self.timestep_s

    @property
    def coverage_ok(self) -> bool:
        return not (self.satellite_ids == 0).any()


def average_loss_db_from_eta(eta_tot: np.ndarray) -> float:
    """-10 log10 of the arithmetic mean transmittance (zeros included);
    +inf when every step is dark."""
    mean = float(np.mean(eta_tot))
    return math.inf if mean <= 0.0 else -10.0 * math.log10(mean)


def average_loss_db(series: TimeSeriesResult) -> float:
    return average_loss_db_from_eta(series.eta_tot)


def average_rate(series: TimeSeriesResult) -> float:
    """Time-averaged received-pair rate in ebits/s."""
    return float(series.pairs_received.sum() / (series.eta_tot.size * series.timestep_s))


def in_range_eta(eta_tot, loss_cutoff_db: float = DEFAULT_LOSS_CUTOFF_DB):
    """Range predicate on the two-arm transmittance: loss strictly below the
    cutoff. Below-horizon links have eta_tot = 0 and fail automatically."""
    return np.asarray(eta_tot) > 10.0 ** (-loss_cutoff_db / 10.0)


def in_range(
    sat_position: np.ndarray,
    station_1_position: np.ndarray,
    station_2_position: np.ndarray,
    altitude_km: float,
    params: OpticalLinkParams,
    earth: EarthModel,
    loss_cutoff_db: float = DEFAULT_LOSS_CUTOFF_DB,
) -> bool:
    """Whether a satellite can serve the station pair right now: above both
    horizons and two-arm loss below the cutoff."""
    from .link_budget import pair_transmittance

    l1 = float(np.linalg.norm(sat_position - station_1_position))
    l2 = float(np.linalg.norm(sat_position - station_2_position))
    if cos_zenith_angle(l1, altitude_km, earth) <= 0.0:
        return False
    if cos_zenith_angle(l2, altitude_km, earth) <= 0.0:
        return False
    eta = float(pair_transmittance(l1, l2, altitude_km, params, earth))
    return bool(in_range_eta(eta, loss_cutoff_db))


def sample_pair_count(
    eta_tot: float,
    source_rate_hz: float = DEFAULT_SOURCE_RATE_HZ,
    timestep_s: float = 1.0,
    rng: np.random.Generator | None = None,
) -> int:
    """Entangled pairs received in one step out of n = source_rate * dt sent.

    With an rng this is an exact Binomial(n, eta_tot) draw; without one it is
    the rounded expectation.
    """
    if not 0.0 <= eta_tot <= 1.0:
        raise ValueError("eta_tot must be in [0, 1]")
    n = int(round(source_rate_hz * timestep_s))
    if rng is None:
        return int(round(n * eta_tot))
    return int(rng.binomial(n, eta_tot))


def assign_satellites(
    loss_db_matrix: np.ndarray,
    time_s: float = 0.0,
    edge_keys: list[tuple[str, str]] | None = None,
) -> AssignmentRecord:
    """Assign satellites to pairs for one timestep.

    Args:
        loss_db_matrix: (n_sats, n_edges) two-arm losses in dB, with +inf for
            out-of-range candidates (below horizon or beyond the cutoff).
        edge_keys: labels for the record; defaults to ("e0", ""), ("e1", ""), ...

    Returns:
        AssignmentRecord mapping each edge key to a satellite id in
        1..n_sats, or 0 when the pair goes unserved.
    """
    ids = _assign_matrix(np.asarray(loss_db_matrix, dtype=float))
    n_edges = loss_db_matrix.shape[1]
    if edge_keys is None:
        edge_keys = [(f"e{i}", "") for i in range(n_edges)]
    return AssignmentRecord(time_s, {k: int(s) for k, s in zip(edge_keys, ids)})


def _assign_matrix(loss: np.ndarray) -> np.ndarray:
    """Matching for one snapshot; returns per-edge satellite ids (0 = none)."""
    n_sats, n_edges = loss.shape
    assigned = np.zeros(n_edges, dtype=np.int32)
    candidate = np.isfinite(loss)
    if not candidate.any():
        return assigned
    sat_taken = np.zeros(n_sats, dtype=bool)
    edge_done = np.zeros(n_edges, dtype=bool)

    counts = candidate.sum(axis=0)
    lone_edges = np.where(counts == 1)[0]
    if lone_edges.size:
        lone_sats = np.argmax(candidate[:, lone_edges], axis=0)
        lone_losses = loss[lone_sats, lone_edges]
        for i in np.lexsort((lone_edges, lone_losses)):
            e, s = lone_edges[i], lone_sats[i]
            if not sat_taken[s]:
                sat_taken[s] = True
                assigned[e] = s + 1
            edge_done[e] = True  # its only candidate is gone either way

    sats, edges = np.nonzero(candidate)
    keep = ~(sat_taken[sats] | edge_done[edges])
    sats, edges = sats[keep], edges[keep]
    for i in np.lexsort((edges, sats, loss[sats, edges])):
        s, e = sats[i], edges[i]
        if not sat_taken[s] and not edge_done[e]:
            sat_taken[s] = True
            edge_done[e] = True
            assigned[e] = s + 1
    return assigned


@dataclass
class SimulationResult:
    """Full run output: one TimeSeriesResult per edge, in graph edge order."""

    constellation: ConstellationConfig
    clock: SimulationClock
    mode: str
    seed: int | None
    edges: dict[tuple[str, str], TimeSeriesResult]

    def assignment_at(self, step: int) -> AssignmentRecord:
        t = step * self.clock.timestep_s
        return AssignmentRecord(
            t, {k: int(r.satellite_ids[step]) for k, r in self.edges.items()})


def _chunk_size(n_sats: int, n_stations: int, n_edges: int) -> int:
    per_step = max(n_sats * n_stations, n_sats * n_edges, 1)
    return max(16, min(8192, _CHUNK_ELEMENT_BUDGET // per_step))


def _eta_sg_chunk(sat_pos: np.ndarray, station_pos: np.ndarray,
                  altitude_km: float, params: OpticalLinkParams,
                  earth: EarthModel) -> tuple[np.ndarray, np.ndarray]:
    """Single-arm transmittance and slant range for a chunk.

    sat_pos: (C, N, 3); station_pos: (C, 3). Returns (eta (C, N), L (C, N)).
    The exponential-heavy factors are evaluated only above the horizon.
    """
    delta = sat_pos - station_pos[:, None, :]
    L = np.sqrt(np.einsum("cnk,cnk->cn", delta, delta))
    cz = altitude_km / L - (L**2 - altitude_km**2) / (2.0 * earth.radius_km * L)
    eta = np.zeros_like(L)
    vis = cz > 0.0
    if vis.any():
        lv = L[vis] * 1000.0
        lr = math.pi * params.beam_waist_m**2 / params.wavelength_m
        w2 = params.beam_waist_m**2 * (1.0 + (lv / lr) ** 2)
        fs = -np.expm1(-2.0 * params.receiver_radius_m**2 / w2)
        atm = np.exp(math.log(params.zenith_transmittance) / np.minimum(cz[vis], 1.0))
        eta[vis] = fs * atm
    return eta, L


def run_simulation(
    constellation: ConstellationConfig,
    graph: StationGraph,
    clock: SimulationClock,
    params: OpticalLinkParams | None = None,
    earth: EarthModel | None = None,
    *,
    mode: str = "deterministic",
    seed: int | None = None,
    loss_cutoff_db: float = DEFAULT_LOSS_CUTOFF_DB,
    source_rate_hz: float = DEFAULT_SOURCE_RATE_HZ,
    record_detail: bool = False,
) -> SimulationResult:
    """Run the full time-stepped simulation over every edge of the graph.

    Single-edge graphs take a fully vectorized path (the assignment reduces
    to picking the lowest-loss in-range satellite); multi-edge graphs run the
    matching once per timestep.
    """
    params = params or OpticalLinkParams()
    earth = earth or EarthModel()
    if mode not in ("deterministic", "stochastic"):
        raise ConfigurationError(f"unknown mode {mode!r}")
    if mode == "stochastic" and seed is None:
        raise ConfigurationError("stochastic mode requires a seed")

    station_ids = list(graph.stations)
    station_index = {sid: i for i, sid in enumerate(station_ids)}
    edge_j1 = np.array([station_index[e.station_1] for e in graph.edges])
    edge_j2 = np.array([station_index[e.station_2] for e in graph.edges])
    n_steps = clock.n_steps
    n_sats = constellation.total_satellites
    n_edges = len(graph.edges)
    single_edge = n_edges == 1
    eta_floor = 10.0 ** (-loss_cutoff_db / 10.0)
    ntrials = int(round(source_rate_hz * clock.timestep_s))

    sat_ids = np.zeros((n_edges, n_steps), dtype=np.int32)
    eta_assigned = np.zeros((n_edges, n_steps))
    pairs = np.zeros((n_edges, n_steps))
    detail = None
    if record_detail:
        detail = [EdgeDetail(*(np.full(n_steps, np.nan) for _ in range(4)))
                  for _ in range(n_edges)]

    chunk = _chunk_size(n_sats, len(station_ids), n_edges)
    for start in range(0, n_steps, chunk):
        stop = min(start + chunk, n_steps)
        t = np.arange(start, stop) * clock.timestep_s
        sat_pos = constellation_positions(constellation, earth, t)
        eta_sg = np.empty((stop - start, n_sats, len(station_ids)))
        ranges = np.empty_like(eta_sg)
        for j, sid in enumerate(station_ids):
            st_pos = station_positions(graph.stations[sid].coordinate, earth, t)
            eta_sg[:, :, j], ranges[:, :, j] = _eta_sg_chunk(
                sat_pos, st_pos, constellation.altitude_km, params, earth)

        eta_pair = eta_sg[:, :, edge_j1] * eta_sg[:, :, edge_j2]  # (C, N, E)
        eta_pair[eta_pair <= eta_floor] = 0.0

        if single_edge:
            ep = eta_pair[:, :, 0]
            best = np.argmax(ep, axis=1)
            best_eta = np.take_along_axis(ep, best[:, None], axis=1)[:, 0]
            got = best_eta > 0.0
            sat_ids[0, start:stop] = np.where(got, best + 1, 0)
            eta_assigned[0, start:stop] = np.where(got, best_eta, 0.0)
        else:
            with np.errstate(divide="ignore"):
                loss_chunk = np.where(eta_pair > 0.0,
                                      -10.0 * np.log10(np.where(eta_pair > 0.0, eta_pair, 1.0)),
                                      np.inf)
            for k in range(stop - start):
                ids = _assign_matrix(loss_chunk[k])
                sat_ids[:, start + k] = ids
                served = ids > 0
                eta_assigned[served, start + k] = eta_pair[k, ids[served] - 1, served]

        if record_detail:
            for e in range(n_edges):
                ids = sat_ids[e, start:stop]
                served = ids > 0
                if not served.any():
                    continue
                rows = np.nonzero(served)[0]
                cols = ids[served] - 1
                l1 = ranges[rows, cols, edge_j1[e]]
                l2 = ranges[rows, cols, edge_j2[e]]
                h = constellation.altitude_km
                detail[e].slant_range_1_km[start + rows] = l1
                detail[e].slant_range_2_km[start + rows] = l2
                detail[e].zenith_1_rad[start + rows] = np.arccos(
                    cos_zenith_angle(l1, h, earth))
                detail[e].zenith_2_rad[start + rows] = np.arccos(
                    cos_zenith_angle(l2, h, earth))

        if mode == "stochastic":
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(start,)))
            for e in range(n_edges):
                pairs[e, start:stop] = rng.binomial(ntrials, eta_assigned[e, start:stop])
        else:
            pairs[:, start:stop] = ntrials * eta_assigned[:, start:stop]

    results = {}
    for e, edge in enumerate(graph.edges):
        results[edge.key] = TimeSeriesResult(
            edge=edge.key,
            distance_km=edge.distance_km,
            timestep_s=clock.timestep_s,
            satellite_ids=sat_ids[e],
            eta_tot=eta_assigned[e],
            pairs_received=pairs[e],
            detail=detail[e] if record_detail else None,
        )
    return SimulationResult(constellation, clock, mode, seed, results)
