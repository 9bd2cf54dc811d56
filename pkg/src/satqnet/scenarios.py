"""Scenario runners: turn a validated config into CSV/JSON artifacts.

Every run writes a ``run_manifest.json`` with the fully resolved config, the
seed, the package version and the physical constants; its content hash is
stamped as a ``# manifest=<hash>`` comment line at the top of every CSV so
outputs are traceable to the exact inputs. Deterministic-mode runs are
byte-reproducible.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .cities import load_city_database
from .config import ScenarioConfig
from .constants import CONSTANTS_RECORD
from .geometry import (
    ConstellationConfig,
    GeodeticCoordinate,
    great_circle_distance,
    max_dual_visibility_arc_km,
)
from .link_budget import (
    link_transmittance,
    loss_db,
    midpoint_slant_range_km,
    zenith_angle_rad,
)
from .merit import (
    CellCache,
    CellResult,
    ConfigCatalog,
    SweepSettings,
    best_configuration_by_distance,
    multi_station_merits,
    reduce_optima,
    run_two_station_sweep,
)
from .noise import fidelity_vs_irradiance_curve
from .repeater import RepeaterChainConfig, repeater_rate
from .simulation import (
    Edge,
    GroundStation,
    StationGraph,
    TimeSeriesResult,
    run_simulation,
)


class InfeasibleScenarioError(RuntimeError):
    """The scenario cannot produce coverage for any configured geometry."""


@dataclass
class RunArtifacts:
    output_dir: Path
    manifest_hash: str
    files: list[Path]


def _manifest_hash(manifest: dict) -> str:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            return ""
        return format(value, ".10g")
    return str(value)


class _Writer:
    def __init__(self, out_dir: Path, manifest_hash: str):
        self.out_dir = out_dir
        self.manifest_hash = manifest_hash
        self.files: list[Path] = []

    def csv(self, name: str, header: list[str], rows) -> Path:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            fh.write(f"# manifest={self.manifest_hash}\n")
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_format_value(v) for v in row])
        self.files.append(path)
        return path


def run_scenario(config: ScenarioConfig, out_dir: str | Path | None = None,
                 workers: int = 1) -> RunArtifacts:
    """Execute the configured scenario and write all artifacts."""
    out = Path(out_dir) if out_dir is not None else Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "package_version": __version__,
        "constants": CONSTANTS_RECORD,
        "seed": config.seed,
        "config": config.resolved,
    }
    mhash = _manifest_hash(manifest)
    manifest_path = out / "run_manifest.json"
    manifest_path.write_text(
        json.dumps({"manifest_hash": mhash, **manifest}, indent=2, sort_keys=True) + "\n")
    writer = _Writer(out, mhash)

    runner = {
        "static_midpoint": _run_static_midpoint,
        "two_station_equator": _run_two_station,
        "latitude_sweep": _run_latitude_sweep,
        "grid_42": _run_grid,
        "city_pairs": _run_city_pairs,
        "fidelity_vs_irradiance": _run_fidelity_vs_irradiance,
        "repeater_comparison": _run_repeater_comparison,
    }[config.kind]
    runner(config, writer, workers)
    return RunArtifacts(out, mhash, [manifest_path] + writer.files)


def _sweep_settings(config: ScenarioConfig) -> SweepSettings:
    return SweepSettings(
        clock=config.clock, params=config.optical, earth=config.earth,
        loss_cutoff_db=config.loss_cutoff_db, source_rate_hz=config.source_rate_hz,
        mode=config.mode, seed=config.seed,
        ring_node_offset_deg=config.ring_node_offset_deg,
        inter_ring_phase_deg=config.inter_ring_phase_deg)


def _constellation(config: ScenarioConfig, pair: tuple[int, int],
                   altitude_km: float) -> ConstellationConfig:
    return ConstellationConfig(
        pair[0], pair[1], altitude_km,
        ring_node_offset_deg=config.ring_node_offset_deg,
        inter_ring_phase_deg=config.inter_ring_phase_deg)


def _check_feasible(config: ScenarioConfig) -> None:
    max_arc = max(max_dual_visibility_arc_km(h, config.earth)
                  for h in config.altitudes_km)
    if min(config.distances_km) > max_arc:
        raise InfeasibleScenarioError(
            f"smallest station separation {min(config.distances_km):.0f} km exceeds "
            f"the dual-visibility limit {max_arc:.0f} km of every configured altitude")


def _run_static_midpoint(config: ScenarioConfig, writer: _Writer, workers: int) -> None:
    rows = []
    for h in config.altitudes_km:
        d = np.asarray(config.distances_km, dtype=float)
        L = midpoint_slant_range_km(d, h, config.earth)
        zen = zenith_angle_rad(L, h, config.earth)
        eta = link_transmittance(L, h, config.optical, config.earth)
        pair = eta**2
        for i in range(d.size):
            pl = float(loss_db(pair[i]))
            rows.append([d[i], h, float(L[i]), float(zen[i]), float(eta[i]),
                         float(pair[i]), pl, math.isfinite(pl)])
    writer.csv("static_midpoint.csv",
               ["d_km", "h_km", "slant_range_km", "zenith_rad", "eta_sg",
                "eta_tot_pair", "pair_loss_db", "loss_finite"],
               rows)


def _cell_rows(cells: list[CellResult]):
    for c in cells:
        yield [c.num_rings, c.sats_per_ring, c.altitude_km, c.distance_km,
               c.coverage_ok, c.avg_loss_db, math.isfinite(c.avg_loss_db),
               c.avg_rate_ebits_s, c.merit_c]


_CELL_HEADER = ["n_rings", "sats_per_ring", "h_km", "d_km", "coverage_ok",
                "avg_loss_db", "loss_finite", "avg_rate_ebits_s",
                "c_ebits_s_per_sat"]


def _run_two_station(config: ScenarioConfig, writer: _Writer, workers: int) -> None:
    _check_feasible(config)
    settings = _sweep_settings(config)
    catalog = ConfigCatalog(config.pairs, config.altitudes_km, config.distances_km)
    if config.time_series:
        cells = []
        for pair in catalog.pairs:
            for h in catalog.altitudes_km:
                for d in catalog.distances_km:
                    graph = StationGraph.two_station_equator(d, config.earth)
                    result = run_simulation(
                        _constellation(config, pair, h), graph, config.clock,
                        config.optical, config.earth, mode=config.mode,
                        seed=config.seed, loss_cutoff_db=config.loss_cutoff_db,
                        source_rate_hz=config.source_rate_hz, record_detail=True)
                    merits = multi_station_merits(result.edges)
                    cells.append(CellResult(pair[0], pair[1], h, d,
                                            merits.coverage_ok, merits.avg_loss_db,
                                            merits.avg_rate_ebits_s))
                    slug = f"nr{pair[0]}_ns{pair[1]}_h{h:g}_d{d:g}"
                    for key, series in result.edges.items():
                        _write_time_series(writer, slug, key, series)
    else:
        cache = CellCache(writer.out_dir / "sweep_cache.jsonl")
        cells = run_two_station_sweep(catalog, settings, workers=workers, cache=cache)

    writer.csv("sweep_cells.csv", _CELL_HEADER, _cell_rows(cells))
    writer.csv("optima.csv",
               ["h_km", "d_km", "n_opt", "capital_c", "c_n_rings", "c_sats_per_ring",
                "r_opt_ebits_s", "r_opt_n_rings", "r_opt_sats_per_ring"],
               ([r.altitude_km, r.distance_km, r.n_opt, r.capital_c,
                 r.c_argmax[0] if r.c_argmax else None,
                 r.c_argmax[1] if r.c_argmax else None,
                 r.r_opt,
                 r.r_opt_argmax[0] if r.r_opt_argmax else None,
                 r.r_opt_argmax[1] if r.r_opt_argmax else None]
                for r in reduce_optima(cells)))
    writer.csv("best_configurations.csv",
               ["d_km", "h_star_km", "n_rings_star", "sats_per_ring_star",
                "avg_loss_db", "avg_rate_ebits_s"],
               ([r.distance_km, r.altitude_km, r.num_rings, r.sats_per_ring,
                 r.avg_loss_db, r.avg_rate_ebits_s]
                for r in best_configuration_by_distance(cells)))


def _write_time_series(writer: _Writer, slug: str, key, series: TimeSeriesResult) -> None:
    d = series.detail
    rows = []
    losses = series.loss_db
    for i, t in enumerate(series.times_s):
        rows.append([
            t, int(series.satellite_ids[i]),
            None if d is None or math.isnan(d.slant_range_1_km[i]) else d.slant_range_1_km[i],
            None if d is None or math.isnan(d.slant_range_2_km[i]) else d.slant_range_2_km[i],
            None if d is None or math.isnan(d.zenith_1_rad[i]) else d.zenith_1_rad[i],
            None if d is None or math.isnan(d.zenith_2_rad[i]) else d.zenith_2_rad[i],
            float(series.eta_tot[i]), float(losses[i]),
            float(series.pairs_received[i]),
        ])
    name = f"timeseries/{slug}_{key[0]}-{key[1]}.csv"
    writer.csv(name,
               ["t_s", "sat_id", "L1_km", "L2_km", "zeta1_rad", "zeta2_rad",
                "eta_tot", "loss_db", "pairs_received"],
               rows)
    writer.csv(f"timeseries/{slug}_{key[0]}-{key[1]}_gaps.csv",
               ["start_s", "end_s", "duration_s"],
               ([g.start_s, g.end_s, g.duration_s] for g in series.gaps()))


def _run_latitude_sweep(config: ScenarioConfig, writer: _Writer, workers: int) -> None:
    rows = []
    for lat in config.latitudes_deg:
        s1 = GroundStation("g1", GeodeticCoordinate(lat, 0.0))
        s2 = GroundStation("g2", GeodeticCoordinate(lat, config.longitude_separation_deg))
        d = great_circle_distance(s1.coordinate, s2.coordinate, config.earth)
        graph = StationGraph({"g1": s1, "g2": s2}, [Edge("g1", "g2", d)])
        for pair in config.pairs:
            for h in config.altitudes_km:
                result = run_simulation(
                    _constellation(config, pair, h), graph, config.clock,
                    config.optical, config.earth, mode=config.mode, seed=config.seed,
                    loss_cutoff_db=config.loss_cutoff_db,
                    source_rate_hz=config.source_rate_hz)
                series = result.edges[("g1", "g2")]
                rows.append([lat, h, pair[0], pair[1], d,
                             series.avg_loss_db, math.isfinite(series.avg_loss_db),
                             series.avg_rate_ebits_s, series.gap_seconds()])
    writer.csv("latitude_rates.csv",
               ["latitude_deg", "h_km", "n_rings", "sats_per_ring", "d_km",
                "avg_loss_db", "loss_finite", "avg_rate_ebits_s", "gap_seconds"],
               rows)


def build_grid_graph(latitudes_deg, longitudes_deg, edge_mode: str,
                     earth) -> StationGraph:
    """Grid of stations with nearest-neighbor edges.

    edge_mode "all" connects horizontal, vertical and diagonal nearest
    neighbors; "diagonal" keeps only the diagonals.
    """
    stations = {}
    index = {}
    for i, lat in enumerate(latitudes_deg):
        for j, lon in enumerate(longitudes_deg):
            sid = f"s{i}_{j}"
            stations[sid] = GroundStation(sid, GeodeticCoordinate(lat, lon),
                                          name=f"lat{lat:g}_lon{lon:g}")
            index[(i, j)] = sid
    n_lat, n_lon = len(latitudes_deg), len(longitudes_deg)
    pairs = []
    if edge_mode == "all":
        pairs += [((i, j), (i, j + 1)) for i in range(n_lat) for j in range(n_lon - 1)]
        pairs += [((i, j), (i + 1, j)) for i in range(n_lat - 1) for j in range(n_lon)]
    pairs += [((i, j), (i + 1, j + 1)) for i in range(n_lat - 1) for j in range(n_lon - 1)]
    pairs += [((i, j + 1), (i + 1, j)) for i in range(n_lat - 1) for j in range(n_lon - 1)]
    edges = []
    for a, b in pairs:
        ida, idb = index[a], index[b]
        d = great_circle_distance(stations[ida].coordinate, stations[idb].coordinate, earth)
        edges.append(Edge(ida, idb, d))
    return StationGraph(stations, edges)


def _run_grid(config: ScenarioConfig, writer: _Writer, workers: int) -> None:
    graph = build_grid_graph(config.grid_latitudes_deg, config.grid_longitudes_deg,
                             config.grid_edge_mode, config.earth)
    edge_rows = []
    summary_rows = []
    for pair in config.pairs:
        for h in config.altitudes_km:
            result = run_simulation(
                _constellation(config, pair, h), graph, config.clock,
                config.optical, config.earth, mode=config.mode, seed=config.seed,
                loss_cutoff_db=config.loss_cutoff_db,
                source_rate_hz=config.source_rate_hz)
            for edge in graph.edges:
                series = result.edges[edge.key]
                c1 = graph.stations[edge.station_1].coordinate
                c2 = graph.stations[edge.station_2].coordinate
                edge_rows.append([
                    pair[0], pair[1], h, edge.station_1, edge.station_2,
                    c1.latitude_deg, c1.longitude_deg, c2.latitude_deg, c2.longitude_deg,
                    edge.distance_km, series.avg_loss_db,
                    math.isfinite(series.avg_loss_db),
                    series.avg_rate_ebits_s, series.gap_seconds()])
            merits = multi_station_merits(result.edges)
            summary_rows.append([pair[0], pair[1], h, len(graph.edges),
                                 merits.coverage_ok, merits.avg_loss_db,
                                 math.isfinite(merits.avg_loss_db),
                                 merits.avg_rate_ebits_s])
    writer.csv("grid_edges.csv",
               ["n_rings", "sats_per_ring", "h_km", "station_1", "station_2",
                "lat1_deg", "lon1_deg", "lat2_deg", "lon2_deg", "d_km",
                "avg_loss_db", "loss_finite", "avg_rate_ebits_s", "gap_seconds"],
               edge_rows)
    writer.csv("grid_summary.csv",
               ["n_rings", "sats_per_ring", "h_km", "n_edges", "coverage_ok",
                "avg_loss_db", "loss_finite", "avg_rate_ebits_s"],
               summary_rows)


def city_pair_graph(name_1: str, name_2: str, cities, earth) -> StationGraph:
    s1 = GroundStation(name_1, cities[name_1], name=name_1)
    s2 = GroundStation(name_2, cities[name_2], name=name_2)
    d = great_circle_distance(s1.coordinate, s2.coordinate, earth)
    return StationGraph({name_1: s1, name_2: s2}, [Edge(name_1, name_2, d)])


def _run_city_pairs(config: ScenarioConfig, writer: _Writer, workers: int) -> None:
    cities = load_city_database(config.cities_file)
    raw_rows = []
    table_rows = []
    for (a, b) in config.city_pairs:
        graph = city_pair_graph(a, b, cities, config.earth)
        d = graph.edges[0].distance_km
        losses = []
        for h in config.altitudes_km:
            result = run_simulation(
                _constellation(config, config.pairs[0], h), graph, config.clock,
                config.optical, config.earth, mode=config.mode, seed=config.seed,
                loss_cutoff_db=config.loss_cutoff_db,
                source_rate_hz=config.source_rate_hz)
            series = result.edges[graph.edges[0].key]
            raw_rows.append([a, b, d, h, series.avg_loss_db,
                             math.isfinite(series.avg_loss_db),
                             series.avg_rate_ebits_s, series.gap_seconds()])
            losses.append(series.avg_loss_db)
        table_rows.append([a, b, round(d)] + [
            f">{config.loss_cutoff_db:g}" if not math.isfinite(l) or l > config.loss_cutoff_db
            else format(l, ".1f")
            for l in losses])
    writer.csv("city_losses_raw.csv",
               ["city_1", "city_2", "d_km", "h_km", "avg_loss_db", "loss_finite",
                "avg_rate_ebits_s", "gap_seconds"],
               raw_rows)
    writer.csv("city_loss_table.csv",
               ["city_1", "city_2", "d_km"]
               + [f"loss_db_h{h:g}km" for h in config.altitudes_km],
               table_rows)


def _run_fidelity_vs_irradiance(config: ScenarioConfig, writer: _Writer,
                                workers: int) -> None:
    rows = []
    for h in config.altitudes_km:
        for d in config.distances_km:
            for pt in fidelity_vs_irradiance_curve(
                    d, h, config.irradiance_grid, config.optical, config.noise,
                    config.earth):
                rows.append([h, d, pt.spectral_irradiance, pt.n_bar,
                             pt.eta_sg, pt.fidelity])
    writer.csv("fidelity_vs_irradiance.csv",
               ["h_km", "d_km", "spectral_irradiance_w_m2_um_sr", "n_bar",
                "eta_sg", "fidelity"],
               rows)


def _run_repeater_comparison(config: ScenarioConfig, writer: _Writer,
                             workers: int) -> None:
    _check_feasible(config)
    settings = _sweep_settings(config)
    h = config.altitudes_km[0]
    catalog = ConfigCatalog(config.pairs, (h,), config.distances_km)
    cells = run_two_station_sweep(catalog, settings, workers=workers)
    sat_rate: dict[float, float] = {}
    for c in cells:
        if c.coverage_ok:
            sat_rate[c.distance_km] = max(sat_rate.get(c.distance_km, 0.0),
                                          c.avg_rate_ebits_s)
    rows = []
    for d in config.distances_km:
        for m in config.repeater_links:
            rep = repeater_rate(RepeaterChainConfig(
                d, m, config.repeater_memories,
                attenuation_per_km=config.attenuation_per_km,
                signal_speed_km_s=config.signal_speed_km_s))
            rows.append([d, m, config.repeater_memories, rep,
                         sat_rate.get(d), h, config.signal_speed_km_s])
    writer.csv("repeater_comparison.csv",
               ["d_km", "elementary_links", "memories_per_half_node",
                "repeater_rate_ebits_s", "satellite_rate_ebits_s", "h_km",
                "signal_speed_km_s"],
               rows)
