"""Box discretisation of the spatial domain, planar or spherical (lat/lon).

Boxes are ordered row-major with x (longitude) varying fastest, which fixes
the spacetime index map l*N + i used downstream.  Spherical mode interprets
the axes as degrees longitude/latitude and converts lengths to metres with a
constant per-degree arc length R*pi/180; the longitudinal side of a box is
scaled by the cosine of the box-centre latitude.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

EARTH_RADIUS = 6_371_000.0  # metres


@dataclass(frozen=True)
class FaceAdjacency:
    """Directed face list: every shared face appears once per direction.

    normal_axis is 0 for longitudinal (x) normals, 1 for latitudinal (y);
    normal_sign is +1 when the outward normal of box i points in the
    positive axis direction.  face_measure is the physical face length
    (metres in spherical mode, domain units in planar mode).
    """

    i: np.ndarray
    j: np.ndarray
    face_measure: np.ndarray
    normal_axis: np.ndarray
    normal_sign: np.ndarray

    def __len__(self):
        return len(self.i)


@dataclass(frozen=True)
class Grid:
    geometry: str  # "planar" | "spherical"
    x_range: tuple
    y_range: tuple
    nx: int
    ny: int
    earth_radius: float
    centers: np.ndarray       # (N, 2), domain coordinates
    side_x: np.ndarray        # (N,), physical length of the x/lon side
    side_y: np.ndarray        # (N,), physical length of the y/lat side
    areas: np.ndarray         # (N,)
    adjacency: FaceAdjacency = field(repr=False)

    @property
    def n_boxes(self):
        return self.nx * self.ny

    @property
    def dx(self):
        return (self.x_range[1] - self.x_range[0]) / self.nx

    @property
    def dy(self):
        return (self.y_range[1] - self.y_range[0]) / self.ny

    def box_index(self, ix, iy):
        return iy * self.nx + ix

    def index_of_point(self, x, y):
        """Index of the box containing (x, y); boundary points clamp inward."""
        ix = min(int((x - self.x_range[0]) / self.dx), self.nx - 1)
        iy = min(int((y - self.y_range[0]) / self.dy), self.ny - 1)
        if ix < 0 or iy < 0 or x > self.x_range[1] or y > self.y_range[1]:
            raise DomainError(f"point ({x}, {y}) outside the domain")
        return self.box_index(ix, iy)


def _per_degree(radius):
    return radius * np.pi / 180.0


def build_grid(geometry, x_range, y_range, nx, ny, earth_radius=EARTH_RADIUS):
    """Build an nx-by-ny box grid over x_range x y_range."""
    if geometry not in ("planar", "spherical"):
        raise DomainError(f"unknown geometry {geometry!r}")
    if nx < 1 or ny < 1:
        raise DomainError("nx and ny must be positive")
    x0, x1 = map(float, x_range)
    y0, y1 = map(float, y_range)
    if not (x1 > x0 and y1 > y0):
        raise DomainError("empty or inverted coordinate range")
    if geometry == "spherical" and not (-90.0 <= y0 and y1 <= 90.0):
        raise DomainError("latitude range must lie within [-90, 90]")

    dx = (x1 - x0) / nx
    dy = (y1 - y0) / ny
    xs = x0 + (np.arange(nx) + 0.5) * dx
    ys = y0 + (np.arange(ny) + 0.5) * dy
    cx, cy = np.meshgrid(xs, ys)          # row-major, x fastest
    centers = np.column_stack([cx.ravel(), cy.ravel()])

    if geometry == "planar":
        side_x = np.full(nx * ny, dx)
        side_y = np.full(nx * ny, dy)
    else:
        deg = _per_degree(earth_radius)
        side_x = deg * dx * np.cos(np.deg2rad(centers[:, 1]))
        side_y = np.full(nx * ny, deg * dy)
    areas = side_x * side_y

    adjacency = _build_adjacency(geometry, x0, y0, dx, dy, nx, ny, earth_radius)
    return Grid(geometry, (x0, x1), (y0, y1), nx, ny, float(earth_radius),
                centers, side_x, side_y, areas, adjacency)


def _build_adjacency(geometry, x0, y0, dx, dy, nx, ny, radius):
    ii, jj, meas, axis, sign = [], [], [], [], []
    deg = _per_degree(radius) if geometry == "spherical" else None

    # longitudinal faces (x-normal): boxes (ix, iy) and (ix+1, iy)
    if nx > 1:
        ix, iy = np.meshgrid(np.arange(nx - 1), np.arange(ny), indexing="ij")
        left = iy.ravel() * nx + ix.ravel()
        right = left + 1
        if geometry == "planar":
            m = np.full(left.size, dy)
        else:
            m = np.full(left.size, deg * dy)  # constant-longitude faces
        ii += [left, right]
        jj += [right, left]
        meas += [m, m]
        axis += [np.zeros(left.size, int)] * 2
        sign += [np.ones(left.size, int), -np.ones(left.size, int)]

    # latitudinal faces (y-normal): boxes (ix, iy) and (ix, iy+1)
    if ny > 1:
        ix, iy = np.meshgrid(np.arange(nx), np.arange(ny - 1), indexing="ij")
        lower = iy.ravel() * nx + ix.ravel()
        upper = lower + nx
        if geometry == "planar":
            m = np.full(lower.size, dx)
        else:
            lat_edge = y0 + (iy.ravel() + 1) * dy
            m = deg * dx * np.cos(np.deg2rad(lat_edge))
        ii += [lower, upper]
        jj += [upper, lower]
        meas += [m, m]
        axis += [np.ones(lower.size, int)] * 2
        sign += [np.ones(lower.size, int), -np.ones(lower.size, int)]

    if not ii:
        empty_f = np.empty(0)
        empty_i = np.empty(0, int)
        return FaceAdjacency(empty_i, empty_i, empty_f, empty_i, empty_i)
    return FaceAdjacency(np.concatenate(ii), np.concatenate(jj),
                         np.concatenate(meas), np.concatenate(axis),
                         np.concatenate(sign))


def median_side_length(grid):
    """Median of the multiset of both side lengths of every box."""
    return float(np.median(np.concatenate([grid.side_x, grid.side_y])))


def longest_domain_extent(grid):
    """Longest side length of the domain (metres in spherical mode)."""
    wx = grid.x_range[1] - grid.x_range[0]
    wy = grid.y_range[1] - grid.y_range[0]
    if grid.geometry == "planar":
        return float(max(wx, wy))
    deg = _per_degree(grid.earth_radius)
    y0, y1 = grid.y_range
    # longitudinal extent is largest at the latitude closest to the equator
    lat = 0.0 if y0 <= 0.0 <= y1 else min(abs(y0), abs(y1))
    return float(max(wy * deg, wx * deg * np.cos(np.deg2rad(lat))))
