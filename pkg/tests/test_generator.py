import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
import hypothesis.strategies as st

from infgen import build_grid
from infgen.errors import DomainError, NumericalError
from infgen.generator import (GeneratorMatrix, QuadratureSettings,
                              averaged_generator, ulam_generator)
from infgen.velocity import VelocityField, switching_double_gyre
from conftest import constant_field


def neumann_laplacian(n):
    """1-D second-difference matrix with no-flux boundary rows."""
    L = np.diag(np.full(n, -2.0)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    L[0, 0] = L[-1, -1] = -1.0
    return L


class TestDiffusionOnly:
    def test_matches_kronecker_laplacian(self):
        nx, ny, eps = 5, 4, 0.3
        g = build_grid("planar", (0, 1), (0, 2), nx, ny)
        G = ulam_generator(g, constant_field(0, 0), 0.0, eps).matrix.toarray()
        Lx = neumann_laplacian(nx) * eps**2 / (2 * g.dx**2)
        Ly = neumann_laplacian(ny) * eps**2 / (2 * g.dy**2)
        expected = np.kron(np.eye(ny), Lx) + np.kron(Ly, np.eye(nx))
        assert np.allclose(G, expected, atol=1e-14)

    def test_quadratic_in_epsilon(self):
        g = build_grid("planar", (0, 1), (0, 1), 4, 4)
        f = constant_field(0, 0)
        G1 = ulam_generator(g, f, 0.0, 0.1).matrix.toarray()
        G3 = ulam_generator(g, f, 0.0, 0.3).matrix.toarray()
        assert np.allclose(G3, 9.0 * G1, atol=1e-14)

    def test_zero_epsilon_zero_field_is_zero(self):
        g = build_grid("planar", (0, 1), (0, 1), 3, 3)
        G = ulam_generator(g, constant_field(0, 0), 0.0, 0.0).matrix
        assert G.nnz == 0 or np.max(np.abs(G.toarray())) == 0.0


class TestConstantAdvection:
    def test_upwind_flux_one_sided(self):
        # rightward flow c puts c/dx on east-neighbour entries and
        # nothing (beyond diffusion, here zero) on the reverse direction
        c = 2.0
        g = build_grid("planar", (0, 1), (0, 1), 4, 3)
        G = ulam_generator(g, constant_field(c, 0), 0.0, 0.0).matrix.toarray()
        for iy in range(3):
            for ix in range(3):
                i = g.box_index(ix, iy)
                assert G[i, i + 1] == pytest.approx(c / g.dx, rel=1e-12)
                assert G[i + 1, i] == pytest.approx(0.0, abs=1e-14)

    def test_row_sums_vanish_on_uniform_grid(self, gyre_field, gyre_grid_small):
        G = ulam_generator(gyre_grid_small, gyre_field, 0.3, 0.2).matrix
        scale = np.abs(G.data).max()
        rowsum = np.asarray(G.sum(axis=1)).ravel()
        assert np.abs(rowsum).max() < 1e-12 * scale

    def test_off_diagonals_nonnegative(self, gyre_field, gyre_grid_small):
        G = ulam_generator(gyre_grid_small, gyre_field, 0.7, 0.2).matrix.tocoo()
        off = G.data[G.row != G.col]
        assert off.min() >= 0.0


class TestMassConservation:
    def test_area_vector_in_right_kernel(self, east_block_grid):
        # the diagonal is chosen so that area-weighted mass is conserved:
        # each row i satisfies sum_j m_j G_ij = 0
        f = constant_field(3.0, -1.5)
        G = ulam_generator(east_block_grid, f, 0.0, 1000.0).matrix
        scale = np.abs(G.data).max()
        resid = G @ east_block_grid.areas
        assert np.abs(resid).max() < 1e-10 * scale * east_block_grid.areas.max()

    def test_constant_right_eigenvector(self, gyre_field, gyre_grid_small):
        G = ulam_generator(gyre_grid_small, gyre_field, 0.5, 0.24).matrix
        ones = np.ones(G.shape[0])
        scale = np.abs(G.data).max()
        assert np.abs(G @ ones).max() < 1e-12 * scale


class TestQuadrature:
    def test_varying_flux_matches_exact_integral(self):
        # v_x = sin(pi y): exact one-sided flux through a unit-height face
        # spanning y in [0, 1] is (1/m_j) * integral = 2 / pi / dx... as below
        g = build_grid("planar", (0, 2), (0, 1), 2, 1)
        f = VelocityField(
            lambda t, p: np.column_stack([np.sin(np.pi * p[:, 1]),
                                          np.zeros(len(p))]), 1.0)
        G = ulam_generator(g, f, 0.0, 0.0,
                           QuadratureSettings(atol=1e-10, rtol=1e-10)).matrix.toarray()
        exact = (2.0 / np.pi) / g.areas[1]
        assert G[0, 1] == pytest.approx(exact, rel=1e-9)

    def test_refinement_failure_raises(self):
        g = build_grid("planar", (0, 2), (0, 1), 2, 1)
        f = VelocityField(
            lambda t, p: np.column_stack([np.sin(50 * np.pi * p[:, 1]) + 0.3,
                                          np.zeros(len(p))]), 1.0)
        with pytest.raises(NumericalError, match="quadrature"):
            ulam_generator(g, f, 0.0, 0.0,
                           QuadratureSettings(atol=1e-14, rtol=1e-14,
                                              max_refine=1))

    @settings(deadline=None, max_examples=15)
    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_constant_fields_exact_at_any_level(self, cx, cy):
        g = build_grid("planar", (0, 1), (0, 1), 3, 2)
        G = ulam_generator(g, constant_field(cx, cy), 0.0, 0.0).matrix
        ones = np.ones(6)
        assert np.abs(G @ ones).max() < 1e-10 * (1 + abs(cx) + abs(cy))


class TestAveraged:
    def test_matches_generator_of_averaged_field(self, gyre_field, gyre_grid_small):
        times = np.linspace(0, 1, 11)
        A = averaged_generator(gyre_grid_small, gyre_field, times, 0.24).matrix
        from infgen.velocity import time_average
        steady = time_average(gyre_field, times)
        B = ulam_generator(gyre_grid_small, steady, 0.0, 0.24).matrix
        assert abs(A - B).max() < 1e-12

    def test_rejects_single_node(self, gyre_field, gyre_grid_small):
        with pytest.raises(DomainError):
            averaged_generator(gyre_grid_small, gyre_field, [0.0], 0.24)


class TestApi:
    def test_negative_epsilon_rejected(self, gyre_grid_small):
        with pytest.raises(DomainError):
            ulam_generator(gyre_grid_small, constant_field(1, 0), 0.0, -0.1)

    def test_single_box_grid(self):
        g = build_grid("planar", (0, 1), (0, 1), 1, 1)
        G = ulam_generator(g, constant_field(5, 5), 0.0, 1.0).matrix
        assert G.shape == (1, 1)
        assert G.toarray()[0, 0] == 0.0

    def test_write_coo_round_trip(self, tmp_path, gyre_field, gyre_grid_small):
        gm = ulam_generator(gyre_grid_small, gyre_field, 0.2, 0.24)
        path = tmp_path / "gen.txt"
        gm.write_coo(path)
        lines = path.read_text().splitlines()
        n, nnz = map(int, lines[0].split())
        assert n == gyre_grid_small.n_boxes and nnz == gm.matrix.nnz
        rows, cols, vals = [], [], []
        for line in lines[1:]:
            r, c, v = line.split()
            rows.append(int(r)); cols.append(int(c)); vals.append(float(v))
        back = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        assert abs(back - gm.matrix).max() == 0.0

    def test_label_default(self, gyre_field, gyre_grid_small):
        gm = ulam_generator(gyre_grid_small, gyre_field, 0.25, 0.1)
        assert gm.label == "t=0.25"
        assert gm.epsilon == 0.1
