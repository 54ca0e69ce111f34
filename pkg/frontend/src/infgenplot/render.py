"""Rendering of run-directory exports as figures.

Consumes only the files a run writes (spectrum CSV, per-field CSV + JSON
sidecars, manifest); nothing is recomputed here.
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class ArtifactError(RuntimeError):
    """A required export file is missing or malformed."""


@dataclass
class PlotRequest:
    run_dir: str
    select: str                 # "vec:K" or "seba:K"
    out: str
    times: list = None          # node indices; None means all exported
    cutoff: float = None
    vmin: float = None
    vmax: float = None


@dataclass
class RenderResult:
    path: Path
    n_points: int = 0
    n_temporal: int = 0
    n_panels: int = 0


def _read_spectrum(run_dir):
    path = Path(run_dir) / "spectrum.csv"
    if not path.exists():
        raise ArtifactError(f"missing {path}")
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            try:
                rows.append((float(row["re"]), float(row["im"]), row["class"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ArtifactError(f"malformed spectrum row {row!r}") from exc
    if not rows:
        raise ArtifactError(f"{path} has no eigenvalue rows")
    return rows


def plot_spectrum(run_dir, out_path):
    """Complex-plane scatter of the run's eigenvalues.

    Temporal eigenvalues get a distinct marker and colour; spatial and
    trivial ones share the default marker.
    """
    rows = _read_spectrum(run_dir)
    fig, ax = plt.subplots(figsize=(6, 4))
    temporal = [(re, im) for re, im, cls in rows if cls == "temporal"]
    rest = [(re, im) for re, im, cls in rows if cls != "temporal"]
    if rest:
        xs, ys = zip(*rest)
        ax.scatter(xs, ys, marker="o", color="tab:blue", zorder=3,
                   label="spatial / trivial")
    if temporal:
        xs, ys = zip(*temporal)
        ax.scatter(xs, ys, marker="s", color="tab:red", zorder=4,
                   label="temporal")
    ax.axhline(0.0, color="0.8", lw=0.8, zorder=1)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.legend(loc="best", frameon=False)
    ax.set_title("Leading eigenvalues")
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return RenderResult(out_path, n_points=len(rows),
                        n_temporal=len(temporal))


def _read_field(run_dir, select):
    kind, _, num = select.partition(":")
    if kind not in ("vec", "seba") or not num.isdigit():
        raise ArtifactError(f"bad selection {select!r}; use vec:K or seba:K")
    base = Path(run_dir) / f"{kind}_{int(num):03d}"
    csv_path = base.with_suffix(".csv")
    if not csv_path.exists():
        raise ArtifactError(f"missing {csv_path}")
    sidecar = {}
    if base.with_suffix(".json").exists():
        sidecar = json.loads(base.with_suffix(".json").read_text())
    data = np.genfromtxt(csv_path, delimiter=",", names=True)
    if data.size == 0 or data.dtype.names is None or len(data.dtype.names) != 4:
        raise ArtifactError(f"{csv_path} is not a t,x,y,value table")
    t_name, x_name, y_name, v_name = data.dtype.names
    return kind, data[t_name], data[x_name], data[y_name], data[v_name], sidecar


def plot_fibres(request):
    """One panel per requested time fibre, values masked below the cutoff.

    Eigenvector fields use a diverging palette centred at zero; SEBA
    fields a sequential one.  Returns the rendered panel count.
    """
    kind, t, x, y, val, sidecar = _read_field(request.run_dir, request.select)
    node_times = np.unique(t)
    if request.times is None:
        sel = list(range(len(node_times)))
    else:
        sel = [int(i) for i in request.times]
        bad = [i for i in sel if not 0 <= i < len(node_times)]
        if bad:
            raise ArtifactError(
                f"time nodes {bad} outside the exported range "
                f"0..{len(node_times) - 1}")
    ncols = min(4, max(1, len(sel)))
    nrows = math.ceil(len(sel) / ncols)
    fig, axes = plt.subplots(nrows, ncols,
                             figsize=(3.2 * ncols, 2.6 * nrows),
                             squeeze=False)
    if kind == "vec":
        cmap = plt.get_cmap("RdBu_r").copy()
        lim = max(abs(np.nanmin(val)), abs(np.nanmax(val))) or 1.0
        vmin = -lim if request.vmin is None else request.vmin
        vmax = lim if request.vmax is None else request.vmax
    else:
        cmap = plt.get_cmap("Reds").copy()
        vmin = 0.0 if request.vmin is None else request.vmin
        vmax = (np.nanmax(val) or 1.0) if request.vmax is None else request.vmax
    cmap.set_bad("white")
    xs = np.unique(x)
    ys = np.unique(y)
    for panel, node in enumerate(sel):
        ax = axes[panel // ncols][panel % ncols]
        mask = np.isclose(t, node_times[node])
        grid = np.full((len(ys), len(xs)), np.nan)
        ix = np.searchsorted(xs, x[mask])
        iy = np.searchsorted(ys, y[mask])
        v = val[mask].astype(float).copy()
        if request.cutoff is not None:
            v[np.abs(v) <= request.cutoff] = np.nan
        grid[iy, ix] = v
        ax.pcolormesh(xs, ys, np.ma.masked_invalid(grid), cmap=cmap,
                      vmin=vmin, vmax=vmax, shading="nearest")
        ax.set_title(f"t = {node_times[node]:g}", fontsize=9)
        ax.set_aspect("equal")
    for panel in range(len(sel), nrows * ncols):
        axes[panel // ncols][panel % ncols].set_axis_off()
    fig.suptitle(request.select)
    out_path = Path(request.out)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return RenderResult(out_path, n_panels=len(sel))
