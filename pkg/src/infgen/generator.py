"""Finite-volume (Ulam) rate-matrix approximation of the generator.

Off-diagonal entries are upwind flux integrals over shared box faces plus a
central-difference diffusion increment; the diagonal enforces discrete mass
conservation.  As assembled, a density row-vector g evolves by g @ G; the
function side acts by right multiplication.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, NumericalError
from .velocity import time_average


@dataclass(frozen=True)
class QuadratureSettings:
    atol: float = 1e-2
    rtol: float = 1e-2
    order: int = 3
    max_refine: int = 12


@dataclass(frozen=True)
class GeneratorMatrix:
    matrix: sp.csr_matrix = dc_field(repr=False)
    label: str
    epsilon: float
    grid: object = dc_field(repr=False)

    @property
    def n(self):
        return self.matrix.shape[0]

    def write_coo(self, path):
        """Coordinate-format text dump: header "N nnz", lines "row col value"."""
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            fh.write(f"{self.n} {coo.nnz}\n")
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{r} {c} {float(v)!r}\n")


def _face_geometry(grid, axis):
    """Fixed coordinate, parameter range and metric of every face with this normal axis."""
    x0, _ = grid.x_range
    y0, _ = grid.y_range
    dx, dy, nx, ny = grid.dx, grid.dy, grid.nx, grid.ny
    spherical = grid.geometry == "spherical"
    deg = grid.earth_radius * np.pi / 180.0 if spherical else 1.0
    if axis == 0:
        if nx < 2:
            return None
        ix, iy = np.meshgrid(np.arange(nx - 1), np.arange(ny), indexing="ij")
        left = iy.ravel() * nx + ix.ravel()
        fixed = x0 + (ix.ravel() + 1) * dx
        p0 = y0 + iy.ravel() * dy
        metric = np.full(left.size, deg)
        return left, left + 1, fixed, p0, p0 + dy, metric
    if ny < 2:
        return None
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny - 1), indexing="ij")
    lower = iy.ravel() * nx + ix.ravel()
    fixed = y0 + (iy.ravel() + 1) * dy
    p0 = x0 + ix.ravel() * dx
    metric = (deg * np.cos(np.deg2rad(fixed)) if spherical
              else np.ones(lower.size))
    return lower, lower + nx, fixed, p0, p0 + dx, metric


def _estimate(field, t, axis, fixed, p0, p1, metric, level, gl_nodes, gl_weights):
    """Composite Gauss-Legendre estimates of both one-sided flux integrals."""
    panels = 1 << level
    width = (p1 - p0) / panels
    # parameter nodes: (nf, panels * order)
    mids = p0[:, None] + (np.arange(panels) + 0.5)[None, :] * width[:, None]
    param = (mids[:, :, None] + gl_nodes[None, None, :] * (width[:, None, None] / 2.0))
    nf = fixed.size
    param = param.reshape(nf, -1)
    pts = np.empty((param.size, 2))
    if axis == 0:
        pts[:, 0] = np.repeat(fixed, param.shape[1])
        pts[:, 1] = param.ravel()
    else:
        pts[:, 0] = param.ravel()
        pts[:, 1] = np.repeat(fixed, param.shape[1])
    comp = field.eval(t, pts)[:, axis].reshape(nf, param.shape[1])
    wts = np.tile(gl_weights, panels)[None, :] * (width[:, None] / 2.0)
    pos = (np.maximum(comp, 0.0) * wts).sum(axis=1) * metric
    neg = (np.maximum(-comp, 0.0) * wts).sum(axis=1) * metric
    return pos, neg


def _face_integrals(field, t, axis, geom, settings):
    """Adaptively refined flux integrals for all faces of one normal axis."""
    _, _, fixed, p0, p1, metric = geom
    gl_nodes, gl_weights = np.polynomial.legendre.leggauss(settings.order)
    pos, neg = _estimate(field, t, axis, fixed, p0, p1, metric, 0,
                         gl_nodes, gl_weights)
    active = np.arange(fixed.size)
    for level in range(1, settings.max_refine + 1):
        new_pos, new_neg = _estimate(field, t, axis, fixed[active], p0[active],
                                     p1[active], metric[active], level,
                                     gl_nodes, gl_weights)
        ok = ((np.abs(new_pos - pos[active])
               <= settings.atol + settings.rtol * np.abs(new_pos))
              & (np.abs(new_neg - neg[active])
                 <= settings.atol + settings.rtol * np.abs(new_neg)))
        pos[active] = new_pos
        neg[active] = new_neg
        active = active[~ok]
        if active.size == 0:
            return pos, neg
    raise NumericalError(
        f"face quadrature did not converge (axis {axis}, face ids {active[:5].tolist()}...)")


def ulam_generator(grid, field, t, epsilon, quadrature=QuadratureSettings(),
                   label=None):
    """Assemble the Ulam generator matrix for the frozen-time field v(t, .)."""
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative")
    n = grid.n_boxes
    rows, cols, vals = [], [], []
    side = (grid.side_x, grid.side_y)
    for axis in (0, 1):
        geom = _face_geometry(grid, axis)
        if geom is None:
            continue
        i, j, *_ = geom
        pos, neg = _face_integrals(field, t, axis, geom, quadrature)
        diff_i = epsilon**2 / (2.0 * side[axis][i] ** 2)
        diff_j = epsilon**2 / (2.0 * side[axis][j] ** 2)
        rows += [i, j]
        cols += [j, i]
        vals += [pos / grid.areas[j] + diff_i, neg / grid.areas[i] + diff_j]
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
    else:
        rows = cols = np.empty(0, int)
        vals = np.empty(0)
    # mass-conserving diagonal: m_i G_ii = -sum_j m_j G_ij
    diag = np.zeros(n)
    np.add.at(diag, rows, -grid.areas[cols] * vals)
    diag /= grid.areas
    rows = np.concatenate([rows, np.arange(n)])
    cols = np.concatenate([cols, np.arange(n)])
    vals = np.concatenate([vals, diag])
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return GeneratorMatrix(matrix, label if label is not None else f"t={t:g}",
                           float(epsilon), grid)


def averaged_generator(grid, field, times, epsilon,
                       quadrature=QuadratureSettings()):
    """Generator of the time-averaged velocity field (averaged before upwinding)."""
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise DomainError("averaged generator needs at least 2 time nodes")
    steady = time_average(field, times)
    return ulam_generator(grid, steady, float(times[0]), epsilon,
                          quadrature=quadrature, label="averaged")
