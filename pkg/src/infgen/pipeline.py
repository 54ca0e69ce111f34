"""End-to-end run orchestration: grid -> slices -> inflated -> spectrum -> SEBA.

A run is driven by a JSON config and writes its artifacts (manifest,
spectrum CSV, field exports, family report) into an output directory.  The
manifest contains every resolved parameter so a run can be reproduced
bit-for-bit with the same binary and seed; wall-clock timings go to a
separate file so manifests stay comparable.
"""

import json
import os
import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from datetime import datetime
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError
from .generator import QuadratureSettings, averaged_generator, ulam_generator
from .grid import build_grid, longest_domain_extent, median_side_length, EARTH_RADIUS
from .inflated import (a_heuristic, assemble, discrete_temporal_eigenvalue,
                       epsilon_heuristic, epsilon_total, temporal_eigenvalue)
from .seba import extract_families, seba
from .spectrum import classify, export_spectrum_csv, leading_eigenpairs
from .velocity import load_gridded, switching_double_gyre

BUILTIN_FIELDS = {"switching-double-gyre": switching_double_gyre}

SECONDS_PER_DAY = 86400.0


@dataclass
class RunConfig:
    geometry: str
    x_range: tuple
    y_range: tuple
    nx: int
    ny: int
    t_start: float
    t_end: float
    steps: int
    velocity: dict
    epsilon: object = "auto"
    a: object = "auto"
    mode: str = "inflated"
    eigen_k: int = 10
    eigen_tol: float = 1e-8
    eigen_seed: int = 42
    seba_vectors: list = None
    seba_mu: float = None
    seba_cutoff: float = 0.1
    output_dir: str = "run"
    export_times: list = None
    earth_radius: float = EARTH_RADIUS
    quad_atol: float = 1e-2
    quad_rtol: float = 1e-2
    time_units: str = "model"
    calendar_start: str = None

    @property
    def times(self):
        return np.linspace(self.t_start, self.t_end, self.steps + 1)

    @property
    def tau(self):
        return self.t_end - self.t_start

    @classmethod
    def from_dict(cls, raw):
        try:
            if raw.get("version", 1) != 1:
                raise ConfigError(f"unsupported config version {raw.get('version')!r}")
            geometry = raw["geometry"]
            tspec = raw["time"]
            calendar_start = None
            start, end = tspec["start"], tspec["end"]
            units = "model"
            if isinstance(start, str):
                t0 = datetime.fromisoformat(start)
                t1 = datetime.fromisoformat(end)
                calendar_start = start
                start, end = 0.0, (t1 - t0).total_seconds() / SECONDS_PER_DAY
                units = "days"
            if "steps" in tspec:
                steps = int(tspec["steps"])
            elif "step" in tspec:
                span = float(end) - float(start)
                steps = round(span / float(tspec["step"]))
                if abs(steps * float(tspec["step"]) - span) > 1e-9 * max(1.0, span):
                    raise ConfigError("time step does not divide the interval")
            else:
                raise ConfigError("time spec needs 'steps' or 'step'")
            if steps < 1:
                raise ConfigError("need at least 2 time nodes")
            if geometry == "spherical":
                units = "days" if units == "model" else units
            eigen = raw.get("eigen", {})
            seba_cfg = raw.get("seba", {})
            cfg = cls(
                geometry=geometry,
                x_range=tuple(raw["x_range"]),
                y_range=tuple(raw["y_range"]),
                nx=int(raw["nx"]),
                ny=int(raw["ny"]),
                t_start=float(start),
                t_end=float(end),
                steps=steps,
                velocity=dict(raw["velocity"]),
                epsilon=raw.get("epsilon", "auto"),
                a=raw.get("a", "auto"),
                mode=raw.get("mode", "inflated"),
                eigen_k=int(eigen.get("k", 10)),
                eigen_tol=float(eigen.get("tol", 1e-8)),
                eigen_seed=int(eigen.get("seed", 42)),
                seba_vectors=seba_cfg.get("vectors"),
                seba_mu=seba_cfg.get("mu"),
                seba_cutoff=float(seba_cfg.get("cutoff", 0.1)),
                output_dir=raw.get("output", "run"),
                export_times=raw.get("export_times"),
                earth_radius=float(raw.get("earth_radius", EARTH_RADIUS)),
                quad_atol=float(raw.get("quadrature", {}).get("atol", 1e-2)),
                quad_rtol=float(raw.get("quadrature", {}).get("rtol", 1e-2)),
                time_units=units,
                calendar_start=calendar_start,
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad config: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        cfg = cls.from_dict(raw)
        if "vgrid" in cfg.velocity:
            cfg.velocity["vgrid"] = str((path.parent / cfg.velocity["vgrid"]).resolve())
        return cfg

    def validate(self):
        if self.mode not in ("inflated", "averaged"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if "builtin" in self.velocity:
            if self.velocity["builtin"] not in BUILTIN_FIELDS:
                raise ConfigError(f"unknown builtin field {self.velocity['builtin']!r}")
        elif "vgrid" not in self.velocity:
            raise ConfigError("velocity source needs 'builtin' or 'vgrid'")
        for name in ("epsilon", "a"):
            val = getattr(self, name)
            if val != "auto" and not isinstance(val, (int, float)):
                raise ConfigError(f"{name} must be 'auto' or a number")
        if self.eigen_k < 1:
            raise ConfigError("eigen.k must be at least 1")
        if not 0.0 <= self.seba_cutoff < 1.0:
            raise ConfigError("seba.cutoff must lie in [0, 1)")

    def build_field(self):
        if "builtin" in self.velocity:
            return BUILTIN_FIELDS[self.velocity["builtin"]]()
        field = load_gridded(self.velocity["vgrid"])
        times = self.times
        data_times = field.time
        for t in times:
            if np.min(np.abs(data_times - t)) > 1e-6 * max(1.0, abs(t)):
                raise ConfigError(
                    f"time node {t} is not on the gridded data's time axis")
        return field


@dataclass
class RunArtifacts:
    directory: Path
    manifest: dict
    solution: object = None
    seba_basis: np.ndarray = None
    families: list = None
    grid: object = dc_field(default=None, repr=False)


def _max_workers():
    env = os.environ.get("INFGEN_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def resolve_parameters(config, grid, field):
    """Resolve 'auto' epsilon and a; report the heuristic diagnostics."""
    from .velocity import median_speed as _median_speed
    times = config.times
    vbar = _median_speed(field, grid, times)
    side = median_side_length(grid)
    lmax = longest_domain_extent(grid)
    eps_auto = epsilon_heuristic(vbar, side)
    a_auto = a_heuristic(config.tau, vbar, side, lmax) if vbar > 0 else 0.0
    eps = eps_auto if config.epsilon == "auto" else float(config.epsilon)
    a = a_auto if config.a == "auto" else float(config.a)
    report = {
        "median_speed": vbar,
        "median_side_length": side,
        "longest_extent": lmax,
        "epsilon": eps,
        "epsilon_heuristic": eps_auto,
        "epsilon_total": epsilon_total(vbar, side),
        "a": a,
        "a_heuristic": a_auto,
    }
    if config.time_units == "days":
        # mixed-unit convention (tau in days, lengths in metres); also report
        # the dimensionally consistent SI alternative for comparison
        report["a_heuristic_si"] = (a_heuristic(config.tau * SECONDS_PER_DAY,
                                                vbar, side, lmax)
                                    if vbar > 0 else 0.0)
    return eps, a, report


def _stage(manifest, name):
    manifest["stages"].append(name)
    return name


def run_pipeline(config, stop_after=None):
    """Execute the full pipeline; returns RunArtifacts.

    stop_after="classify" stops before SEBA (the `infgen spectrum` command).
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"infgen_version": __version__, "status": "running",
                "stages": [], "config": _config_dict(config)}
    timings = {}
    try:
        t0 = _time.perf_counter()
        _stage(manifest, "grid")
        grid = build_grid(config.geometry, config.x_range, config.y_range,
                          config.nx, config.ny, config.earth_radius)
        _stage(manifest, "velocity")
        field = config.build_field()
        times = config.times
        _stage(manifest, "parameters")
        eps, a, report = resolve_parameters(config, grid, field)
        manifest["resolved"] = report
        timings["setup"] = _time.perf_counter() - t0

        t0 = _time.perf_counter()
        _stage(manifest, "generators")
        quad = QuadratureSettings(atol=config.quad_atol, rtol=config.quad_rtol)
        if config.mode == "averaged":
            gen = averaged_generator(grid, field, times, eps, quadrature=quad)
            matrix = gen.matrix
            n_t = 1
            h = float(times[1] - times[0])
        else:
            def _slice(t):
                return ulam_generator(grid, field, float(t), eps, quadrature=quad)
            with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
                gens = list(pool.map(_slice, times))
            h = float(times[1] - times[0])
            inflated = assemble(gens, a, h, time_units=config.time_units)
            matrix = inflated.matrix
            n_t = inflated.n_t
        timings["assembly"] = _time.perf_counter() - t0

        t0 = _time.perf_counter()
        _stage(manifest, "spectrum")
        solution = leading_eigenpairs(matrix, config.eigen_k,
                                      tol=config.eigen_tol,
                                      seed=config.eigen_seed)
        classify(solution, grid.n_boxes, n_t, grid.areas)
        timings["spectrum"] = _time.perf_counter() - t0

        manifest["eigenvalues"] = [[float(np.real(l)), float(np.imag(l))]
                                   for l in solution.eigenvalues]
        manifest["classifications"] = solution.classifications
        manifest["n_t"] = n_t
        manifest["n_boxes"] = grid.n_boxes
        manifest["h"] = h
        manifest["seba_candidates"] = [
            i + 1 for i, cls in enumerate(solution.classifications)
            if cls == "spatial-real"]
        manifest["temporal_spatial_gap"] = _gap_report(
            solution, a, config.tau, h, n_t)

        _stage(manifest, "export-spectrum")
        export_spectrum_csv(solution, out / "spectrum.csv")
        np.save(out / "eigenvalues.npy", solution.eigenvalues)
        np.save(out / "eigenvectors.npy", solution.eigenvectors)
        np.save(out / "times.npy", times if n_t > 1 else times[:1])

        artifacts = RunArtifacts(out, manifest, solution=solution, grid=grid)
        _stage(manifest, "export-fields")
        vec_values = np.empty_like(np.real(solution.eigenvectors))
        for i in range(solution.k):
            v = np.real(solution.eigenvectors[:, i])
            vec_values[:, i] = v / np.max(np.abs(v))
        sidecars = [{"eigenvalue": manifest["eigenvalues"][i],
                     "classification": solution.classifications[i]}
                    for i in range(solution.k)]
        export_fields(vec_values, grid, times if n_t > 1 else times[:1], out,
                      prefix="vec", sidecars=sidecars,
                      time_indices=config.export_times)

        if stop_after != "classify" and config.seba_vectors:
            _stage(manifest, "seba")
            basis, families = run_seba(artifacts, config.seba_vectors,
                                       mu=config.seba_mu,
                                       cutoff=config.seba_cutoff)
            artifacts.seba_basis = basis
            artifacts.families = families

        manifest["status"] = "ok"
        return artifacts
    except Exception:
        manifest["status"] = "failed"
        raise
    finally:
        failed_stage = manifest["stages"][-1] if manifest["stages"] else None
        if manifest["status"] == "failed":
            manifest["failed_stage"] = failed_stage
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
        (out / "timings.json").write_text(json.dumps(timings, indent=2))


def _gap_report(solution, a, tau, h, n_t):
    """Leading temporal vs spatial eigenvalue matching report."""
    temporal = [np.real(l) for l, c in
                zip(solution.eigenvalues, solution.classifications)
                if c == "temporal"]
    spatial = [np.real(l) for l, c in
               zip(solution.eigenvalues, solution.classifications)
               if c.startswith("spatial")]
    report = {
        "predicted_temporal_continuous": temporal_eigenvalue(a, tau, 1),
        "predicted_temporal_discrete": discrete_temporal_eigenvalue(a, h, n_t, 1),
        "leading_temporal": temporal[0] if temporal else None,
        "leading_spatial": spatial[0] if spatial else None,
    }
    if temporal and spatial:
        report["gap"] = float(temporal[0] - spatial[0])
    return report


def run_seba(artifacts, vector_indices, mu=None, cutoff=0.1, seed=42):
    """Apply SEBA to selected (1-based) eigenvectors and export families."""
    solution = artifacts.solution
    grid = artifacts.grid
    n_t = artifacts.manifest["n_t"]
    cls = solution.classifications
    cols = []
    for idx in vector_indices:
        if not 1 <= idx <= solution.k:
            raise ConfigError(f"eigenvector index {idx} out of range 1..{solution.k}")
        if cls and cls[idx - 1] == "spatial-complex":
            raise ConfigError(
                f"eigenvector {idx} is complex valued and cannot enter SEBA")
        cols.append(np.real(solution.eigenvectors[:, idx - 1]))
    V = np.column_stack(cols)
    basis = seba(V, mu=mu, seed=seed)
    families = extract_families(basis.vectors, grid, n_t, cutoff)
    out = artifacts.directory
    times = np.load(out / "times.npy")
    sidecars = [{"source_vectors": list(vector_indices), "cutoff": cutoff,
                 "column_min": float(basis.column_min[j]),
                 "iterations": basis.iterations}
                for j in range(basis.vectors.shape[1])]
    export_fields(basis.vectors, grid, times, out, prefix="seba",
                  sidecars=sidecars)
    report = [{"family": j + 1, "birth": fam["birth"], "death": fam["death"],
               "areas": fam["areas"]} for j, fam in enumerate(families)]
    (out / "families.json").write_text(json.dumps(report, indent=2))
    np.save(out / "seba.npy", basis.vectors)
    return basis, families


def export_fields(values, grid, times, out_dir, prefix, sidecars=None,
                  time_indices=None, cutoff=None):
    """Write one CSV per column: rows "t,x,y,value" at box centres.

    In spherical mode the coordinate columns are named lon/lat.  Returns the
    list of CSV paths; each gets a JSON sidecar with the grid spec plus any
    per-column metadata supplied.
    """
    out_dir = Path(out_dir)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[0] != len(times) * grid.n_boxes:
        raise DomainError("value length does not match n_t * N")
    sel = range(len(times)) if time_indices is None else list(time_indices)
    coord_names = ("lon", "lat") if grid.geometry == "spherical" else ("x", "y")
    grid_spec = {"geometry": grid.geometry, "x_range": list(grid.x_range),
                 "y_range": list(grid.y_range), "nx": grid.nx, "ny": grid.ny}
    paths = []
    for jcol in range(values.shape[1]):
        path = out_dir / f"{prefix}_{jcol + 1:03d}.csv"
        col = values[:, jcol].reshape(len(times), grid.n_boxes)
        with open(path, "w") as fh:
            fh.write(f"t,{coord_names[0]},{coord_names[1]},value\n")
            for l in sel:
                t = times[l]
                for i in range(grid.n_boxes):
                    fh.write(f"{float(t)!r},{float(grid.centers[i, 0])!r},"
                             f"{float(grid.centers[i, 1])!r},{float(col[l, i])!r}\n")
        sidecar = {"grid": grid_spec, "cutoff": cutoff}
        if sidecars is not None:
            sidecar.update(sidecars[jcol])
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
        paths.append(path)
    return paths


def _config_dict(config):
    d = dict(config.__dict__)
    d["x_range"] = list(config.x_range)
    d["y_range"] = list(config.y_range)
    return d
