"""Configuration sweeps and the constrained figures of merit.

A sweep cell is one (num_rings, sats_per_ring, altitude, distance)
combination run for the full simulation window. A cell "covers" when the
constrained pair is within range of its assigned satellite at every step.
Derived per-(h, d) optima over the catalog of (N_R, N_S) pairs:

  n_opt     -- fewest total satellites among covering cells;
  c         -- avg_rate / total satellites (ebits per second per satellite);
  capital_c -- max of c among covering cells, ties toward fewer satellites;
  r_opt     -- max avg_rate among covering cells.

Sweeps are exhaustive over the finite catalog. Completed cells are cached on
disk keyed by a content hash of everything that determines the result, so an
interrupted sweep resumes where it stopped.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .constants import DEFAULT_LOSS_CUTOFF_DB, DEFAULT_SOURCE_RATE_HZ
from .geometry import ConstellationConfig, EarthModel
from .link_budget import OpticalLinkParams
from .simulation import (
    SimulationClock,
    StationGraph,
    TimeSeriesResult,
    average_loss_db_from_eta,
    run_simulation,
)

# The 42 (N_R, N_S) pairs swept in every optimization run.
DEFAULT_CONFIG_PAIRS: tuple[tuple[int, int], ...] = (
    (2, 10), (4, 8), (5, 8),
    (3, 10), (9, 7), (6, 8),
    (4, 5), (8, 7), (7, 8),
    (5, 5), (7, 7), (8, 8),
    (6, 5), (6, 7), (9, 8),
    (7, 5), (5, 7), (8, 9),
    (8, 5), (4, 7), (9, 9),
    (9, 5), (8, 10), (7, 14),
    (4, 6), (9, 10), (7, 15),
    (5, 6), (8, 11), (10, 14),
    (6, 6), (10, 10), (10, 15),
    (7, 6), (4, 13), (15, 15),
    (8, 6), (5, 13), (16, 16),
    (9, 6), (7, 13), (20, 20),
)

DEFAULT_ALTITUDES_KM: tuple[float, ...] = (
    500, 1000, 1500, 2000, 3000, 3500, 4000, 5000, 6000, 8000, 10000)

DEFAULT_DISTANCES_KM: tuple[float, ...] = (
    100, 500, 1000, 1500, 2000, 2500, 3000, 3500, 4000, 4500, 5000)


@dataclass(frozen=True)
class ConfigCatalog:
    pairs: tuple[tuple[int, int], ...] = DEFAULT_CONFIG_PAIRS
    altitudes_km: tuple[float, ...] = DEFAULT_ALTITUDES_KM
    distances_km: tuple[float, ...] = DEFAULT_DISTANCES_KM

    def __post_init__(self):
        if not self.pairs or not self.altitudes_km:
            raise ValueError("catalog must list at least one pair and one altitude")


@dataclass(frozen=True)
class CellResult:
    """Aggregates for one swept configuration."""

    num_rings: int
    sats_per_ring: int
    altitude_km: float
    distance_km: float
    coverage_ok: bool
    avg_loss_db: float
    avg_rate_ebits_s: float

    @property
    def total_satellites(self) -> int:
        return self.num_rings * self.sats_per_ring

    @property
    def merit_c(self) -> float:
        return figure_of_merit_c(self.avg_rate_ebits_s, self.total_satellites)


def figure_of_merit_c(avg_rate_ebits_s: float, total_satellites: int) -> float:
    """Average rate per satellite, ebits/s/satellite."""
    return avg_rate_ebits_s / total_satellites


def n_opt(cells: list[CellResult]) -> int | None:
    """Fewest total satellites among covering cells; None when nothing covers."""
    covering = [c.total_satellites for c in cells if c.coverage_ok]
    return min(covering) if covering else None


def r_opt(cells: list[CellResult]) -> tuple[float, tuple[int, int]] | None:
    """Best average rate among covering cells, with its (N_R, N_S)."""
    covering = [c for c in cells if c.coverage_ok]
    if not covering:
        return None
    best = max(covering, key=lambda c: (c.avg_rate_ebits_s,
                                        -c.total_satellites,
                                        (-c.num_rings, -c.sats_per_ring)))
    return best.avg_rate_ebits_s, (best.num_rings, best.sats_per_ring)


def capital_c(cells: list[CellResult]) -> tuple[float, tuple[int, int]] | None:
    """Max of the per-satellite merit among covering cells.

    Ties break toward fewer total satellites, then lexicographically on
    (N_R, N_S).
    """
    covering = [c for c in cells if c.coverage_ok]
    if not covering:
        return None
    best = min(covering, key=lambda c: (-c.merit_c, c.total_satellites,
                                        (c.num_rings, c.sats_per_ring)))
    return best.merit_c, (best.num_rings, best.sats_per_ring)


@dataclass(frozen=True)
class GraphMerits:
    avg_loss_db: float
    avg_rate_ebits_s: float
    coverage_ok: bool


def multi_station_merits(results: dict[tuple[str, str], TimeSeriesResult]) -> GraphMerits:
    """Graph-level loss/rate, averaging transmittance over edges and time.

    With a single edge this reduces exactly to the pairwise definitions.
    """
    if not results:
        raise ValueError("empty edge set")
    series = list(results.values())
    eta_sum = sum(float(r.eta_tot.sum()) for r in series)
    n_total = sum(r.eta_tot.size for r in series)
    pair_sum = sum(float(r.pairs_received.sum()) for r in series)
    duration = series[0].eta_tot.size * series[0].timestep_s
    mean_eta = eta_sum / n_total
    return GraphMerits(
        avg_loss_db=math.inf if mean_eta <= 0 else -10.0 * math.log10(mean_eta),
        avg_rate_ebits_s=pair_sum / (len(series) * duration),
        coverage_ok=all(r.coverage_ok for r in series),
    )


@dataclass(frozen=True)
class SweepSettings:
    """Everything besides the cell coordinates that determines a result."""

    clock: SimulationClock
    params: OpticalLinkParams
    earth: EarthModel
    loss_cutoff_db: float = DEFAULT_LOSS_CUTOFF_DB
    source_rate_hz: float = DEFAULT_SOURCE_RATE_HZ
    mode: str = "deterministic"
    seed: int | None = None
    ring_node_offset_deg: float = 0.0
    inter_ring_phase_deg: float = 0.0


def evaluate_cell(pair: tuple[int, int], altitude_km: float, distance_km: float,
                  settings: SweepSettings) -> CellResult:
    """Run one two-station-equator cell and reduce it to sweep aggregates."""
    graph = StationGraph.two_station_equator(distance_km, settings.earth)
    return _reduce_cell(pair, altitude_km, distance_km,
                        _run_cell(pair, altitude_km, graph, settings))


def evaluate_cell_graph(pair: tuple[int, int], altitude_km: float,
                        graph: StationGraph, settings: SweepSettings,
                        label_km: float = 0.0) -> CellResult:
    """Sweep cell over an arbitrary station graph (all edges constrained)."""
    return _reduce_cell(pair, altitude_km, label_km,
                        _run_cell(pair, altitude_km, graph, settings))


def _run_cell(pair, altitude_km, graph, settings):
    config = ConstellationConfig(
        pair[0], pair[1], altitude_km,
        ring_node_offset_deg=settings.ring_node_offset_deg,
        inter_ring_phase_deg=settings.inter_ring_phase_deg)
    result = run_simulation(
        config, graph, settings.clock, settings.params, settings.earth,
        mode=settings.mode, seed=settings.seed,
        loss_cutoff_db=settings.loss_cutoff_db,
        source_rate_hz=settings.source_rate_hz)
    return multi_station_merits(result.edges)


def _reduce_cell(pair, altitude_km, distance_km, merits: GraphMerits) -> CellResult:
    return CellResult(
        num_rings=pair[0], sats_per_ring=pair[1],
        altitude_km=float(altitude_km), distance_km=float(distance_km),
        coverage_ok=merits.coverage_ok,
        avg_loss_db=merits.avg_loss_db,
        avg_rate_ebits_s=merits.avg_rate_ebits_s)


def _cell_key(pair, altitude_km, distance_km, settings: SweepSettings) -> str:
    payload = {
        "pair": list(pair), "h": float(altitude_km), "d": float(distance_km),
        "clock": [settings.clock.duration_s, settings.clock.timestep_s],
        "optics": asdict(settings.params),
        "earth": asdict(settings.earth),
        "cutoff": settings.loss_cutoff_db,
        "source_rate": settings.source_rate_hz,
        "mode": settings.mode,
        "seed": settings.seed,
        "node_offset": settings.ring_node_offset_deg,
        "ring_phase": settings.inter_ring_phase_deg,
        "v": 1,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


class CellCache:
    """Append-only JSONL cache of finished sweep cells."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._entries: dict[str, CellResult] = {}
        if self.path.exists():
            for line in self.path.read_text().splitlines():
                try:
                    row = json.loads(line)
                    self._entries[row["key"]] = CellResult(**row["cell"])
                except (json.JSONDecodeError, KeyError, TypeError):
                    continue  # ignore partially written lines

    def get(self, key: str) -> CellResult | None:
        return self._entries.get(key)

    def put(self, key: str, cell: CellResult) -> None:
        self._entries[key] = cell
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a") as fh:
            fh.write(json.dumps({"key": key, "cell": asdict(cell)}) + "\n")


def _sweep_worker(job):
    pair, h, distances, settings = job
    return [(pair, h, d) for d in distances], _evaluate_shared_distance_cells(
        pair, h, distances, settings)


def _evaluate_shared_distance_cells(pair, altitude_km, distances,
                                    settings: SweepSettings) -> list[CellResult]:
    """Evaluate all distances of one (pair, altitude) in a single pass.

    The satellite track and the station-1 transmittance are computed once per
    chunk and shared across every distance; only station 2 moves.
    """
    from .geometry import (GeodeticCoordinate, constellation_positions,
                           equator_separation_deg, station_positions)
    from .simulation import _chunk_size, _eta_sg_chunk

    earth, clock, params = settings.earth, settings.clock, settings.params
    config = ConstellationConfig(
        pair[0], pair[1], altitude_km,
        ring_node_offset_deg=settings.ring_node_offset_deg,
        inter_ring_phase_deg=settings.inter_ring_phase_deg)
    n_steps = clock.n_steps
    n_sats = config.total_satellites
    eta_floor = 10.0 ** (-settings.loss_cutoff_db / 10.0)
    coords = [GeodeticCoordinate(0.0, equator_separation_deg(d, earth))
              for d in distances]

    eta_sum = np.zeros(len(distances))
    gap_steps = np.zeros(len(distances), dtype=np.int64)
    chunk = _chunk_size(n_sats, 1 + len(distances), 1)
    for start in range(0, n_steps, chunk):
        stop = min(start + chunk, n_steps)
        t = np.arange(start, stop) * clock.timestep_s
        sat_pos = constellation_positions(config, earth, t)
        st1 = station_positions(GeodeticCoordinate(0.0, 0.0), earth, t)
        eta1, _ = _eta_sg_chunk(sat_pos, st1, altitude_km, params, earth)
        for i, coord in enumerate(coords):
            st2 = station_positions(coord, earth, t)
            eta2, _ = _eta_sg_chunk(sat_pos, st2, altitude_km, params, earth)
            eta_pair = eta1 * eta2
            eta_pair[eta_pair <= eta_floor] = 0.0
            best = eta_pair.max(axis=1)
            eta_sum[i] += float(best.sum())
            gap_steps[i] += int((best == 0.0).sum())

    cells = []
    for i, d in enumerate(distances):
        mean_eta = eta_sum[i] / n_steps
        cells.append(CellResult(
            num_rings=pair[0], sats_per_ring=pair[1],
            altitude_km=float(altitude_km), distance_km=float(d),
            coverage_ok=bool(gap_steps[i] == 0),
            avg_loss_db=math.inf if mean_eta <= 0 else -10.0 * math.log10(mean_eta),
            avg_rate_ebits_s=settings.source_rate_hz * mean_eta))
    return cells


def run_two_station_sweep(
    catalog: ConfigCatalog,
    settings: SweepSettings,
    workers: int = 1,
    cache: CellCache | None = None,
) -> list[CellResult]:
    """Exhaustive sweep over catalog pairs x altitudes x distances.

    Deterministic-mode cells are independent and may run in a process pool.
    Results come back sorted by (altitude, distance, total satellites,
    N_R, N_S) regardless of scheduling.
    """
    jobs = []
    done: list[CellResult] = []
    for pair in catalog.pairs:
        for h in catalog.altitudes_km:
            missing = []
            for d in catalog.distances_km:
                key = _cell_key(pair, h, d, settings)
                hit = cache.get(key) if cache else None
                if hit is not None:
                    done.append(hit)
                else:
                    missing.append(d)
            if missing:
                jobs.append((pair, float(h), tuple(missing), settings))

    if jobs:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outputs = list(pool.map(_sweep_worker, jobs, chunksize=1))
        else:
            outputs = [_sweep_worker(job) for job in jobs]
        for (job, (_, cells)) in zip(jobs, outputs):
            pair, h, distances, _ = job
            for d, cell in zip(distances, cells):
                if cache:
                    cache.put(_cell_key(pair, h, d, settings), cell)
                done.append(cell)

    done.sort(key=lambda c: (c.altitude_km, c.distance_km, c.total_satellites,
                             c.num_rings, c.sats_per_ring))
    return done


@dataclass(frozen=True)
class OptimaRow:
    """Per-(h, d) reduction of a sweep."""

    altitude_km: float
    distance_km: float
    n_opt: int | None
    capital_c: float | None
    c_argmax: tuple[int, int] | None
    r_opt: float | None
    r_opt_argmax: tuple[int, int] | None


def reduce_optima(cells: list[CellResult]) -> list[OptimaRow]:
    groups: dict[tuple[float, float], list[CellResult]] = {}
    for c in cells:
        groups.setdefault((c.altitude_km, c.distance_km), []).append(c)
    rows = []
    for (h, d) in sorted(groups):
        group = groups[(h, d)]
        cc = capital_c(group)
        ro = r_opt(group)
        rows.append(OptimaRow(
            altitude_km=h, distance_km=d, n_opt=n_opt(group),
            capital_c=cc[0] if cc else None, c_argmax=cc[1] if cc else None,
            r_opt=ro[0] if ro else None, r_opt_argmax=ro[1] if ro else None))
    return rows


@dataclass(frozen=True)
class BestConfigRow:
    """Best configuration per distance: the altitude maximizing capital C."""

    distance_km: float
    altitude_km: float
    num_rings: int
    sats_per_ring: int
    avg_loss_db: float
    avg_rate_ebits_s: float


def best_configuration_by_distance(cells: list[CellResult]) -> list[BestConfigRow]:
    by_distance: dict[float, list[CellResult]] = {}
    for c in cells:
        if c.coverage_ok:
            by_distance.setdefault(c.distance_km, []).append(c)
    rows = []
    for d in sorted(by_distance):
        best = min(by_distance[d],
                   key=lambda c: (-c.merit_c, c.total_satellites,
                                  (c.num_rings, c.sats_per_ring), c.altitude_km))
        rows.append(BestConfigRow(d, best.altitude_km, best.num_rings,
                                  best.sats_per_ring, best.avg_loss_db,
                                  best.avg_rate_ebits_s))
    return rows
