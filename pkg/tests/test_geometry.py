import math

import numpy as np
import pytest

from satqnet.geometry import (
    ConfigurationError,
    ConstellationConfig,
    EarthModel,
    GeodeticCoordinate,
    constellation_positions,
    equator_separation_deg,
    great_circle_distance,
    ground_station_position,
    max_dual_visibility_arc_km,
    orbital_period,
    satellite_position,
    slant_range,
    station_positions,
)

EARTH = EarthModel()


class TestSatellitePosition:
    def test_single_satellite_epoch(self):
        cfg = ConstellationConfig(1, 1, 500.0)
        pos = satellite_position(cfg, EARTH, 0, 0, 0.0)
        assert np.linalg.norm(pos) == pytest.approx(6878.0, abs=1e-9)
        # phase 0 at the ascending node of ring 0 (node longitude 0)
        np.testing.assert_allclose(pos, [6878.0, 0.0, 0.0], atol=1e-9)

    def test_periodicity(self):
        cfg = ConstellationConfig(1, 1, 500.0)
        period = 2.0 * math.pi * math.sqrt(6878.0**3 / EARTH.mu_km3_s2)
        p0 = satellite_position(cfg, EARTH, 0, 0, 0.0)
        p1 = satellite_position(cfg, EARTH, 0, 0, period)
        assert np.linalg.norm(p1 - p0) < 1e-6
        assert orbital_period(EARTH, 500.0) == pytest.approx(period)

    def test_ring_nodes_span_180_degrees(self):
        cfg = ConstellationConfig(2, 1, 500.0)
        p0 = satellite_position(cfg, EARTH, 0, 0, 0.0)
        p1 = satellite_position(cfg, EARTH, 1, 0, 0.0)
        angle = math.degrees(math.atan2(p1[1], p1[0]) - math.atan2(p0[1], p0[0]))
        assert angle == pytest.approx(90.0)

    def test_index_bounds(self):
        cfg = ConstellationConfig(2, 3, 500.0)
        with pytest.raises(ConfigurationError):
            satellite_position(cfg, EARTH, 2, 0, 0.0)
        with pytest.raises(ConfigurationError):
            satellite_position(cfg, EARTH, 0, 3, 0.0)

    def test_matches_vectorized_propagation(self):
        cfg = ConstellationConfig(3, 4, 800.0, ring_node_offset_deg=10.0,
                                  inter_ring_phase_deg=7.0)
        times = np.array([0.0, 123.4, 5000.0])
        grid = constellation_positions(cfg, EARTH, times)
        for ti, t in enumerate(times):
            for ring in range(3):
                for sat in range(4):
                    expected = satellite_position(cfg, EARTH, ring, sat, float(t))
                    np.testing.assert_allclose(grid[ti, ring * 4 + sat], expected,
                                               atol=1e-9)


class TestGroundStationPosition:
    def test_pole_is_rotation_invariant(self):
        st = GeodeticCoordinate(90.0, 123.0)
        for t in (0.0, 1000.0, 43210.0):
            np.testing.assert_allclose(ground_station_position(st, EARTH, t),
                                       [0.0, 0.0, EARTH.radius_km], atol=1e-9)

    def test_equator_frame_convention(self):
        st = GeodeticCoordinate(0.0, 0.0)
        np.testing.assert_allclose(ground_station_position(st, EARTH, 0.0),
                                   [EARTH.radius_km, 0.0, 0.0], atol=1e-9)

    def test_half_rotation(self):
        st = GeodeticCoordinate(0.0, 0.0)
        pos = ground_station_position(st, EARTH, EARTH.rotation_period_s / 2.0)
        np.testing.assert_allclose(pos, [-EARTH.radius_km, 0.0, 0.0], atol=1e-6)

    def test_rotation_periodicity(self):
        st = GeodeticCoordinate(37.0, -55.0)
        p0 = ground_station_position(st, EARTH, 0.0)
        p1 = ground_station_position(st, EARTH, EARTH.rotation_period_s)
        assert np.linalg.norm(p1 - p0) < 1e-6

    def test_longitude_normalization(self):
        st = GeodeticCoordinate(0.0, 270.0)
        assert st.longitude_deg == -90.0
        with pytest.raises(ConfigurationError):
            GeodeticCoordinate(91.0, 0.0)


class TestSlantRange:
    def test_zenith_geometry(self):
        gs = np.array([EARTH.radius_km, 0.0, 0.0])
        sat = np.array([EARTH.radius_km + 1000.0, 0.0, 0.0])
        assert slant_range(sat, gs) == pytest.approx(1000.0)

    def test_law_of_cosines_oracle(self):
        # independent oracle: direct law-of-cosines evaluation
        h, theta = 1000.0, math.radians(18.0)
        re = EARTH.radius_km
        expected = math.sqrt(re**2 + (re + h) ** 2 - 2 * re * (re + h) * math.cos(theta))
        gs = np.array([re, 0.0, 0.0])
        sat = np.array([(re + h) * math.cos(theta), (re + h) * math.sin(theta), 0.0])
        assert slant_range(sat, gs) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(2367.75329595583, rel=1e-10)

    def test_coincident_points(self):
        p = np.array([1.0, 2.0, 3.0])
        assert slant_range(p, p) == 0.0


class TestGreatCircle:
    def test_identical_points(self):
        a = GeodeticCoordinate(12.0, 34.0)
        assert great_circle_distance(a, a, EARTH) == 0.0

    def test_equator_arc(self):
        a = GeodeticCoordinate(0.0, 0.0)
        b = GeodeticCoordinate(0.0, 18.0)
        # oracle: arc length = 2 pi R * 18/360
        assert great_circle_distance(a, b, EARTH) == pytest.approx(
            2.0 * math.pi * 6378.0 * 18.0 / 360.0, rel=1e-12)

    def test_antipodes(self):
        a = GeodeticCoordinate(0.0, 0.0)
        b = GeodeticCoordinate(0.0, 180.0)
        assert great_circle_distance(a, b, EARTH) == pytest.approx(
            math.pi * EARTH.radius_km, rel=1e-12)

    def test_equator_separation_roundtrip(self):
        d = 1234.5
        lon = equator_separation_deg(d, EARTH)
        b = GeodeticCoordinate(0.0, lon)
        assert great_circle_distance(GeodeticCoordinate(0.0, 0.0), b, EARTH) == \
            pytest.approx(d, rel=1e-12)


class TestInvariants:
    """Property checks over randomized configurations."""

    def test_norms_and_rigid_rings(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            cfg = ConstellationConfig(
                int(rng.integers(1, 8)), int(rng.integers(1, 12)),
                float(rng.uniform(300, 10000)),
                ring_node_offset_deg=float(rng.uniform(0, 180)),
                inter_ring_phase_deg=float(rng.uniform(0, 90)))
            times = rng.uniform(0, 86400, size=4)
            pos = constellation_positions(cfg, EARTH, times)
            norms = np.linalg.norm(pos, axis=-1)
            np.testing.assert_allclose(norms, EARTH.radius_km + cfg.altitude_km,
                                       atol=1e-6)
            # in-ring angular spacing stays fixed over time
            ring0 = pos[:, : cfg.sats_per_ring, :]
            if cfg.sats_per_ring > 1:
                unit = ring0 / norms[:, : cfg.sats_per_ring, None]
                dots = np.einsum("tk,tk->t", unit[:, 0, :], unit[:, 1, :])
                assert np.ptp(dots) < 1e-9

    def test_station_norms(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            st = GeodeticCoordinate(float(rng.uniform(-90, 90)),
                                    float(rng.uniform(-180, 180)))
            pos = station_positions(st, EARTH, rng.uniform(0, 1e5, size=8))
            np.testing.assert_allclose(np.linalg.norm(pos, axis=-1),
                                       EARTH.radius_km, atol=1e-9)

    def test_slant_range_symmetry_and_triangle(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(30, 3)) * 7000.0
        for _ in range(100):
            i, j, k = rng.integers(0, 30, size=3)
            a, b, c = pts[i], pts[j], pts[k]
            assert slant_range(a, b) == pytest.approx(slant_range(b, a), rel=1e-14)
            assert slant_range(a, c) <= slant_range(a, b) + slant_range(b, c) + 1e-9


def test_dual_visibility_arc():
    # horizon cap: both stations within arccos(R/(R+h)) of the subsatellite point
    arc = max_dual_visibility_arc_km(500.0, EARTH)
    assert arc == pytest.approx(2 * 6378.0 * math.acos(6378.0 / 6878.0), rel=1e-12)
    assert arc < 5000.0  # 5000 km equator pairs can never be dual-visible at h=500
