"""Spacetime inflated generator assembly and the parameter heuristics.

The inflated matrix couples per-slice generators block-diagonally and adds
(a^2/2) times a 1-D Neumann diffusion stencil acting across time fibres via
a Kronecker product with the spatial identity.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp

from .errors import DomainError


@dataclass(frozen=True)
class InflatedGenerator:
    matrix: sp.csr_matrix = dc_field(repr=False)
    n_t: int
    n_boxes: int
    h: float
    a: float
    epsilon: float
    grid: object = dc_field(repr=False)
    time_units: str = "model"

    def index(self, l, i):
        return l * self.n_boxes + i


def temporal_laplacian(n_t, h):
    """1-D central-difference Laplacian with Neumann endpoints, scaled by 1/h^2."""
    main = np.full(n_t, -2.0)
    main[0] = main[-1] = -1.0
    off = np.ones(n_t - 1)
    return sp.diags([off, main, off], [-1, 0, 1]) / h**2


def assemble(generators, a, h, time_units="model"):
    """Combine per-slice generator matrices into the inflated operator."""
    if len(generators) < 2:
        raise DomainError("need at least 2 time slices")
    if a < 0:
        raise DomainError("a must be nonnegative")
    if h <= 0:
        raise DomainError("h must be positive")
    n = generators[0].n
    if any(g.n != n for g in generators):
        raise DomainError("slice generators have mismatched sizes")
    n_t = len(generators)
    spacetime = sp.block_diag([g.matrix for g in generators], format="csr")
    lap = sp.kron(temporal_laplacian(n_t, h), sp.identity(n), format="csr")
    matrix = (spacetime + (a**2 / 2.0) * lap).tocsr()
    return InflatedGenerator(matrix, n_t, n, float(h), float(a),
                             generators[0].epsilon, generators[0].grid,
                             time_units)


def epsilon_heuristic(median_speed, median_side):
    """Spatial diffusion strength sqrt(0.1 * vbar * ell)."""
    if median_speed < 0 or median_side < 0:
        raise DomainError("heuristic inputs must be nonnegative")
    return float(np.sqrt(0.1 * median_speed * median_side))


def epsilon_total(median_speed, median_side):
    """Diagnostic sqrt(1.1 * vbar * ell): applied plus effective Ulam diffusion."""
    return float(np.sqrt(1.1 * median_speed * median_side))


def a_heuristic(tau, median_speed, median_side, longest_extent):
    """Temporal diffusion strength tau * sqrt(1.1 * vbar * ell) / L_max.

    For geophysical runs the convention is mixed-unit: tau in days, speeds
    in m/s, lengths in metres.
    """
    if min(tau, median_speed, median_side, longest_extent) <= 0:
        raise DomainError("heuristic inputs must be positive")
    return float(tau * np.sqrt(1.1 * median_speed * median_side) / longest_extent)


def temporal_eigenvalue(a, tau, k):
    """Continuous prediction -a^2 pi^2 k^2 / (2 tau^2) for the k-th temporal mode."""
    if k < 0:
        raise DomainError("mode index must be nonnegative")
    return float(-(a**2) * np.pi**2 * k**2 / (2.0 * tau**2))


def discrete_temporal_eigenvalue(a, h, n_t, k):
    """(a^2/2) times the k-th eigenvalue of the discrete Neumann stencil."""
    return float(-(2.0 * a**2 / h**2) * np.sin(np.pi * k / (2.0 * n_t)) ** 2)
