import json

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from infgen import build_grid
from infgen.errors import DomainError, IngestionError
from infgen.velocity import (GriddedVelocity, VelocityField, load_gridded,
                             median_speed, switching_double_gyre,
                             time_average, write_gridded)
from conftest import constant_field


class TestSwitchingDoubleGyre:
    def test_separatrix_initial(self, gyre_field):
        # The switching profile is only asymptotically 0 at t = 0
        # (tanh(-5) != -1), so the vertical separatrix near x = 1 is
        # approximate; velocities there are tiny relative to the ~30 peak
        for y in (0.1, 0.7, 1.3, 1.9):
            v = gyre_field.eval(0.0, np.array([1.0, y]))
            assert abs(v[0]) < 0.01

    def test_separatrix_final(self, gyre_field):
        for y in (0.2, 1.0, 1.8):
            v = gyre_field.eval(1.0, np.array([2.0, y]))
            assert abs(v[0]) < 0.01

    def test_bottom_wall_tangency(self, gyre_field):
        for t in (0.0, 0.33, 1.0):
            for x in (0.2, 1.5, 2.9):
                v = gyre_field.eval(t, np.array([x, 0.0]))
                assert v[1] == 0.0

    def test_matches_closed_form(self, gyre_field):
        t, x, y = 0.3, 1.7, 0.9
        r = 0.5 * (1 + np.tanh(10 * (t - 0.5)))
        al = (1 - 2 * r) / (3 * (r - 2) * (r + 1))
        be = (2 - 9 * al) / 3
        f = al * x**2 + be * x
        expected = 20.0 * np.array([
            -(np.pi / 2) * np.sin(np.pi * f) * np.cos(np.pi * y / 2),
            (2 * x * al + be) * np.cos(np.pi * f) * np.sin(np.pi * y / 2)])
        assert np.allclose(gyre_field.eval(t, np.array([x, y])), expected)

    def test_time_domain_enforced(self, gyre_field):
        with pytest.raises(DomainError):
            gyre_field.eval(1.5, np.array([1.0, 1.0]))


class TestTimeAverage:
    def test_steady_idempotent(self):
        f = constant_field(2.0, -1.0)
        avg = time_average(f, [0, 0.5, 1.0])
        assert np.allclose(avg.eval(0.0, np.array([0.3, 0.4])), [2.0, -1.0])

    def test_linear_in_time(self):
        f = VelocityField(
            lambda t, p: np.column_stack([np.full(len(p), t), np.zeros(len(p))]),
            1.0)
        avg = time_average(f, [0, 0.5, 1.0])
        assert np.allclose(avg.eval(0.0, np.array([0.0, 0.0])), [0.5, 0.0])

    def test_too_few_nodes(self):
        with pytest.raises(DomainError):
            time_average(constant_field(1, 0), [0.0])

    def test_gyre_average_antisymmetry(self, gyre_field):
        # alpha(1-t) = -alpha(t), so x-velocities at the domain centre cancel
        # in pairs under the 21-node trapezoid sum
        avg = time_average(gyre_field, np.linspace(0, 1, 21))
        v = avg.eval(0.0, np.array([1.5, 1.0]))
        assert abs(v[0]) < 1e-12


class TestMedianSpeed:
    def test_constant(self):
        g = build_grid("planar", (0, 1), (0, 1), 3, 3)
        assert median_speed(constant_field(3, 4), g, [0.0, 1.0]) == pytest.approx(5.0)

    def test_three_speeds(self):
        g = build_grid("planar", (0, 3), (0, 1), 3, 1)
        f = VelocityField(
            lambda t, p: np.column_stack([np.floor(p[:, 0]) + 1.0,
                                          np.zeros(len(p))]), 1.0)
        assert median_speed(f, g, [0.0]) == pytest.approx(2.0)

    def test_double_gyre_benchmark(self, gyre_field):
        g = build_grid("planar", (0, 3), (0, 2), 75, 50)
        v = median_speed(gyre_field, g, np.linspace(0, 1, 21))
        assert v == pytest.approx(14.3698, rel=0.01)

    @settings(deadline=None, max_examples=20)
    @given(st.permutations(range(5)))
    def test_permutation_invariance(self, perm):
        g = build_grid("planar", (0, 5), (0, 1), 5, 1)
        f = VelocityField(
            lambda t, p: np.column_stack([p[:, 0], np.zeros(len(p))]), 1.0)
        times = [0.0]
        base = median_speed(f, g, times)
        shuffled = GridShuffle(g, perm)
        assert median_speed(f, shuffled, times) == pytest.approx(base)


class GridShuffle:
    """Grid stand-in exposing permuted centres, for sample-order invariance."""

    def __init__(self, grid, perm):
        self.centers = grid.centers[list(perm)]


class TestGridded:
    def _simple(self):
        lon = np.array([0.0, 1.0])
        lat = np.array([0.0, 1.0])
        time = np.array([0.0, 1.0])
        u = np.ones((2, 2, 2))
        v = np.zeros((2, 2, 2))
        return GriddedVelocity(lon, lat, time, u, v)

    def test_constant_everywhere(self):
        f = self._simple()
        for pt in ([0.2, 0.8], [0.0, 0.0], [1.0, 1.0]):
            assert np.allclose(f.eval(0.0, np.array(pt)), [1.0, 0.0])

    def test_node_exactness(self):
        rng = np.random.default_rng(7)
        u = rng.standard_normal((2, 3, 4))
        v = rng.standard_normal((2, 3, 4))
        f = GriddedVelocity(np.arange(4.0), np.arange(3.0), np.array([0.0, 1.0]), u, v)
        for k, t in enumerate((0.0, 1.0)):
            for ila, la in enumerate(np.arange(3.0)):
                for ilo, lo in enumerate(np.arange(4.0)):
                    got = f.eval(t, np.array([lo, la]))
                    assert got[0] == pytest.approx(u[k, ila, ilo])
                    assert got[1] == pytest.approx(v[k, ila, ilo])

    def test_bilinear_exact_on_linear_data(self):
        lon = np.array([0.0, 2.0])
        lat = np.array([0.0, 2.0])
        u = np.array([[[0.0, 2.0], [0.0, 2.0]]])  # u = lon
        v = np.array([[[0.0, 0.0], [3.0, 3.0]]])  # v = 1.5 * lat
        f = GriddedVelocity(lon, lat, np.array([0.0]), u, v)
        got = f.eval(0.0, np.array([1.0, 1.0]))
        assert np.allclose(got, [1.0, 1.5])

    def test_snap_to_nearest_time(self):
        lon = lat = np.array([0.0, 1.0])
        u = np.stack([np.zeros((2, 2)), np.ones((2, 2))])
        f = GriddedVelocity(lon, lat, np.array([0.0, 1.0]), u, np.zeros_like(u))
        assert f.eval(0.9, np.array([0.5, 0.5]))[0] == pytest.approx(1.0)
        assert f.eval(0.1, np.array([0.5, 0.5]))[0] == pytest.approx(0.0)


class TestVgridIO:
    def _field(self):
        rng = np.random.default_rng(3)
        return GriddedVelocity(np.arange(4.0), np.arange(3.0),
                               np.arange(2.0),
                               rng.standard_normal((2, 3, 4)),
                               rng.standard_normal((2, 3, 4)))

    def test_round_trip_bit_exact(self, tmp_path):
        f = self._field()
        path = write_gridded(f, tmp_path / "wind.json")
        g = load_gridded(path)
        assert np.array_equal(f.u, g.u) and np.array_equal(f.v, g.v)
        assert np.array_equal(f.lon, g.lon)
        assert np.array_equal(f.time, g.time)

    def test_missing_payload(self, tmp_path):
        f = self._field()
        path = write_gridded(f, tmp_path / "wind.json")
        (tmp_path / "wind.bin").unlink()
        with pytest.raises(IngestionError, match="payload"):
            load_gridded(path)

    def test_wrong_payload_size(self, tmp_path):
        f = self._field()
        path = write_gridded(f, tmp_path / "wind.json")
        np.zeros(5).tofile(tmp_path / "wind.bin")
        with pytest.raises(IngestionError, match="payload"):
            load_gridded(path)

    def test_bad_version(self, tmp_path):
        f = self._field()
        path = write_gridded(f, tmp_path / "wind.json")
        manifest = json.loads(path.read_text())
        manifest["version"] = 2
        path.write_text(json.dumps(manifest))
        with pytest.raises(IngestionError, match="version"):
            load_gridded(path)

    def test_non_monotone_axis(self, tmp_path):
        f = self._field()
        path = write_gridded(f, tmp_path / "wind.json")
        manifest = json.loads(path.read_text())
        manifest["lat"] = [0.0, 0.0, 1.0]
        path.write_text(json.dumps(manifest))
        with pytest.raises(IngestionError, match="lat"):
            load_gridded(path)

    def test_non_finite_rejected(self):
        u = np.ones((1, 2, 2))
        u[0, 0, 0] = np.nan
        with pytest.raises(IngestionError, match="u"):
            GriddedVelocity([0.0, 1.0], [0.0, 1.0], [0.0], u, np.ones((1, 2, 2)))

    def test_csv_fallback(self, tmp_path):
        path = tmp_path / "wind.csv"
        lines = ["time,lat,lon,u,v"]
        for t in (0.0, 1.0):
            for la in (0.0, 1.0):
                for lo in (0.0, 1.0):
                    lines.append(f"{t},{la},{lo},{lo + t},{la}")
        path.write_text("\n".join(lines))
        f = load_gridded(path)
        assert f.u.shape == (2, 2, 2)
        assert f.eval(1.0, np.array([1.0, 0.0]))[0] == pytest.approx(2.0)

    def test_csv_bad_header(self, tmp_path):
        path = tmp_path / "wind.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(IngestionError, match="header"):
            load_gridded(path)
