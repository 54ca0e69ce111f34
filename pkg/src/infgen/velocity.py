"""Time-dependent velocity fields: analytic benchmarks, gridded data, averaging.

Gridded data follows the "VGRID v1" layout: a JSON manifest next to a raw
little-endian float64 payload holding the full u array followed by the full
v array, both in (time, lat, lon) order.  A CSV fallback with columns
time,lat,lon,u,v (header required) is accepted for small datasets.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DomainError, IngestionError

_TIME_SLACK = 1e-9


class VelocityField:
    """Evaluable field v(t, x) on [0, tau] x M.

    eval accepts an (n, 2) array of points and returns an (n, 2) array of
    velocities; single points are broadcast.
    """

    def __init__(self, fn, tau, units="nondimensional"):
        self._fn = fn
        self.tau = float(tau)
        self.units = units

    def eval(self, t, points):
        if not (-_TIME_SLACK * (1 + self.tau) <= t <= self.tau * (1 + _TIME_SLACK) + _TIME_SLACK):
            raise DomainError(f"time {t} outside [0, {self.tau}]")
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.asarray(self._fn(float(t), pts), dtype=float)
        if np.asarray(points).ndim == 1:
            return out[0]
        return out


def switching_double_gyre(amplitude=20.0):
    """Two unequal gyres on [0,3]x[0,2] whose sizes switch over t in [0,1].

    The default amplitude gives a median speed of about 14.37 over the
    domain, the normalisation against which the benchmark's published
    diffusion parameters (epsilon ~ 0.24, a ~ 0.27) were tuned.
    """

    def fn(t, pts):
        r = 0.5 * (1.0 + np.tanh(10.0 * (t - 0.5)))
        alpha = (1.0 - 2.0 * r) / (3.0 * (r - 2.0) * (r + 1.0))
        beta = (2.0 - 9.0 * alpha) / 3.0
        x, y = pts[:, 0], pts[:, 1]
        f = alpha * x**2 + beta * x
        vx = -(np.pi / 2.0) * np.sin(np.pi * f) * np.cos(np.pi * y / 2.0)
        vy = (2.0 * x * alpha + beta) * np.cos(np.pi * f) * np.sin(np.pi * y / 2.0)
        return amplitude * np.column_stack([vx, vy])

    return VelocityField(fn, tau=1.0)


def time_average(field, times):
    """Steady field equal to the trapezoidal average of v(t_l, x) over the nodes."""
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise DomainError("time averaging needs at least 2 nodes")
    span = times[-1] - times[0]

    def fn(_t, pts):
        samples = np.stack([field.eval(tl, pts) for tl in times])
        return np.trapezoid(samples, times, axis=0) / span

    return VelocityField(fn, tau=field.tau, units=field.units)


def median_speed(field, grid, times):
    """Median 2-norm of v over all (time node, box centre) samples."""
    speeds = []
    for t in np.asarray(times, dtype=float):
        v = field.eval(t, grid.centers)
        speeds.append(np.hypot(v[:, 0], v[:, 1]))
    return float(np.median(np.concatenate(speeds)))


class GriddedVelocity(VelocityField):
    """Gridded u/v samples with bilinear spatial interpolation.

    Time handling is snap-to-nearest-slice: the pipeline only evaluates at
    its configured nodes, which must be a subset of the data's time axis.
    """

    def __init__(self, lon, lat, time, u, v, units="m/s"):
        self.lon = np.asarray(lon, dtype=float)
        self.lat = np.asarray(lat, dtype=float)
        self.time = np.asarray(time, dtype=float)
        self.u = np.asarray(u, dtype=float)
        self.v = np.asarray(v, dtype=float)
        self._validate()
        super().__init__(self._interp, tau=float(self.time[-1]), units=units)

    def _validate(self):
        for name, axis in (("lon", self.lon), ("lat", self.lat), ("time", self.time)):
            if axis.ndim != 1 or axis.size < 1:
                raise IngestionError(name, "axis must be a nonempty 1-D array")
            if axis.size > 1 and not np.all(np.diff(axis) > 0):
                raise IngestionError(name, "axis must be strictly increasing")
        shape = (self.time.size, self.lat.size, self.lon.size)
        for name, arr in (("u", self.u), ("v", self.v)):
            if arr.shape != shape:
                raise IngestionError(name, f"shape {arr.shape} != {shape}")
            if not np.all(np.isfinite(arr)):
                raise IngestionError(name, "non-finite samples")

    def _interp(self, t, pts):
        k = int(np.argmin(np.abs(self.time - t)))  # snap to slice
        x = np.clip(pts[:, 0], self.lon[0], self.lon[-1])
        y = np.clip(pts[:, 1], self.lat[0], self.lat[-1])
        ix = np.clip(np.searchsorted(self.lon, x) - 1, 0, max(self.lon.size - 2, 0))
        iy = np.clip(np.searchsorted(self.lat, y) - 1, 0, max(self.lat.size - 2, 0))
        if self.lon.size > 1:
            fx = (x - self.lon[ix]) / (self.lon[ix + 1] - self.lon[ix])
            ix1 = ix + 1
        else:
            fx, ix1 = np.zeros_like(x), ix
        if self.lat.size > 1:
            fy = (y - self.lat[iy]) / (self.lat[iy + 1] - self.lat[iy])
            iy1 = iy + 1
        else:
            fy, iy1 = np.zeros_like(y), iy
        out = np.empty((pts.shape[0], 2))
        for c, arr in enumerate((self.u, self.v)):
            s = arr[k]
            out[:, c] = (s[iy, ix] * (1 - fx) * (1 - fy)
                         + s[iy, ix1] * fx * (1 - fy)
                         + s[iy1, ix] * (1 - fx) * fy
                         + s[iy1, ix1] * fx * fy)
        return out


ORDER = "time-major, then lat, then lon"


def load_gridded(manifest_path):
    """Load a VGRID v1 manifest+payload pair, or the CSV fallback."""
    path = Path(manifest_path)
    if not path.exists():
        raise IngestionError("payload", f"no such file {path}")
    if path.suffix.lower() == ".csv":
        return _load_csv(path)
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise IngestionError("manifest", f"invalid JSON: {exc}") from exc
    if manifest.get("version") != 1:
        raise IngestionError("version", f"unsupported version {manifest.get('version')!r}")
    for key in ("lon", "lat", "time", "payload"):
        if key not in manifest:
            raise IngestionError(key, "missing from manifest")
    if manifest.get("endianness", "little") != "little":
        raise IngestionError("endianness", "only little-endian payloads supported")
    if manifest.get("order", ORDER) != ORDER:
        raise IngestionError("order", f"payload order must be {ORDER!r}")
    units = manifest.get("units", "m/s")
    if not isinstance(units, str) or not units:
        raise IngestionError("units", "units must be a nonempty string")
    lon = np.asarray(manifest["lon"], dtype=float)
    lat = np.asarray(manifest["lat"], dtype=float)
    time = np.asarray(manifest["time"], dtype=float)
    payload = path.parent / manifest["payload"]
    if not payload.exists():
        raise IngestionError("payload", f"no such file {payload}")
    raw = np.fromfile(payload, dtype="<f8")
    n = time.size * lat.size * lon.size
    if raw.size != 2 * n:
        raise IngestionError("payload", f"expected {2 * n} float64 samples, got {raw.size}")
    shape = (time.size, lat.size, lon.size)
    u = raw[:n].reshape(shape)
    v = raw[n:].reshape(shape)
    return GriddedVelocity(lon, lat, time, u, v, units=units)


def write_gridded(field, manifest_path):
    """Write a GriddedVelocity as a VGRID v1 manifest + binary payload."""
    path = Path(manifest_path)
    payload = path.with_suffix(".bin")
    manifest = {
        "version": 1,
        "lon": field.lon.tolist(),
        "lat": field.lat.tolist(),
        "time": field.time.tolist(),
        "units": field.units,
        "payload": payload.name,
        "order": ORDER,
        "endianness": "little",
    }
    np.concatenate([field.u.ravel(), field.v.ravel()]).astype("<f8").tofile(payload)
    path.write_text(json.dumps(manifest))
    return path


def _load_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["time", "lat", "lon", "u", "v"]:
            raise IngestionError("header", "expected columns time,lat,lon,u,v")
        rows = [[float(cell) for cell in row] for row in reader if row]
    if not rows:
        raise IngestionError("payload", "no data rows")
    data = np.asarray(rows)
    time = np.unique(data[:, 0])
    lat = np.unique(data[:, 1])
    lon = np.unique(data[:, 2])
    shape = (time.size, lat.size, lon.size)
    if data.shape[0] != np.prod(shape):
        raise IngestionError("payload", "rows do not form a full time x lat x lon grid")
    it = np.searchsorted(time, data[:, 0])
    ila = np.searchsorted(lat, data[:, 1])
    ilo = np.searchsorted(lon, data[:, 2])
    u = np.full(shape, np.nan)
    v = np.full(shape, np.nan)
    u[it, ila, ilo] = data[:, 3]
    v[it, ila, ilo] = data[:, 4]
    if np.isnan(u).any() or np.isnan(v).any():
        raise IngestionError("payload", "duplicate or missing grid entries")
    return GriddedVelocity(lon, lat, time, u, v)
