"""Command-line interface.

Subcommands: run (full pipeline), spectrum (stop after classification),
seba (rotate saved eigenvectors from a finished run), export (re-export a
selected field at chosen times).  Exit codes: 0 ok, 2 config error,
3 numerical failure, 4 I/O error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, IngestionError, NumericalError
from .pipeline import RunArtifacts, RunConfig, export_fields, run_pipeline, run_seba
from .grid import build_grid
from .spectrum import EigenSolution


def _load_run(run_dir):
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise ConfigError(f"{run_dir} is not a run directory (no manifest.json)")
    manifest = json.loads(manifest_path.read_text())
    cfg = manifest["config"]
    grid = build_grid(cfg["geometry"], cfg["x_range"], cfg["y_range"],
                      cfg["nx"], cfg["ny"], cfg["earth_radius"])
    vals = np.load(run_dir / "eigenvalues.npy")
    vecs = np.load(run_dir / "eigenvectors.npy")
    solution = EigenSolution(vals, vecs, np.zeros(len(vals)),
                             classifications=manifest.get("classifications", []))
    return RunArtifacts(run_dir, manifest, solution=solution, grid=grid)


def _cmd_run(args):
    config = RunConfig.from_file(args.config)
    artifacts = run_pipeline(config)
    print(f"run complete: {artifacts.directory}")
    for i, (lam, cls) in enumerate(zip(artifacts.manifest["eigenvalues"],
                                       artifacts.manifest["classifications"]),
                                   start=1):
        print(f"  L{i} = {lam[0]:+.6f} {lam[1]:+.6f}i  [{cls}]")
    resolved = artifacts.manifest["resolved"]
    print(f"  epsilon = {resolved['epsilon']:.6g} "
          f"(heuristic {resolved['epsilon_heuristic']:.6g}, "
          f"epsilon_tot {resolved['epsilon_total']:.6g})")
    print(f"  a = {resolved['a']:.6g} (heuristic {resolved['a_heuristic']:.6g})")
    if "a_heuristic_si" in resolved:
        print(f"  a heuristic, SI time units = {resolved['a_heuristic_si']:.6g}")
    return 0


def _cmd_spectrum(args):
    config = RunConfig.from_file(args.config)
    artifacts = run_pipeline(config, stop_after="classify")
    print(f"spectrum written to {artifacts.directory / 'spectrum.csv'}")
    return 0


def _cmd_seba(args):
    artifacts = _load_run(args.run)
    indices = [int(tok) for tok in args.vectors.split(",") if tok]
    if not indices:
        raise ConfigError("--vectors needs at least one index")
    basis, families = run_seba(artifacts, indices, mu=args.mu,
                               cutoff=args.cutoff)
    for j, fam in enumerate(families, start=1):
        print(f"seba family {j}: birth fibre {fam['birth']}, "
              f"death fibre {fam['death']}, "
              f"min {basis.column_min[j - 1]:+.4f}")
    return 0


def _parse_times(tokens, times):
    indices = []
    for tok in tokens.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok.startswith("t"):
            idx = int(tok[1:])
        else:
            idx = int(np.argmin(np.abs(times - float(tok))))
        if not 0 <= idx < len(times):
            raise ConfigError(f"time node {tok} out of range")
        indices.append(idx)
    return indices


def _cmd_export(args):
    artifacts = _load_run(args.run)
    run_dir = artifacts.directory
    times = np.load(run_dir / "times.npy")
    kind, _, num = args.select.partition(":")
    try:
        num = int(num)
    except ValueError:
        raise ConfigError(f"bad --select {args.select!r}; use vec:K or seba:K")
    if kind == "vec":
        vecs = artifacts.solution.eigenvectors
        if not 1 <= num <= vecs.shape[1]:
            raise ConfigError(f"vector {num} out of range")
        col = np.real(vecs[:, num - 1])
        col = col / np.max(np.abs(col))
    elif kind == "seba":
        seba_path = run_dir / "seba.npy"
        if not seba_path.exists():
            raise ConfigError("run has no SEBA artifacts; run `infgen seba` first")
        basis = np.load(seba_path)
        if not 1 <= num <= basis.shape[1]:
            raise ConfigError(f"SEBA column {num} out of range")
        col = basis[:, num - 1]
    else:
        raise ConfigError(f"bad --select {args.select!r}; use vec:K or seba:K")
    indices = _parse_times(args.times, times) if args.times else None
    out_dir = Path(args.out) if args.out else run_dir / "export"
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = export_fields(col[:, None], artifacts.grid, times, out_dir,
                          prefix=f"{kind}_{num:03d}_sel",
                          time_indices=indices, cutoff=args.cutoff)
    print(f"exported {paths[0]}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="infgen",
        description="Quasi-stationary families of almost-invariant sets "
                    "via the inflated generator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the full pipeline")
    p_run.add_argument("--config", required=True)
    p_run.set_defaults(fn=_cmd_run)

    p_spec = sub.add_parser("spectrum", help="stop after eigen classification")
    p_spec.add_argument("--config", required=True)
    p_spec.set_defaults(fn=_cmd_spectrum)

    p_seba = sub.add_parser("seba", help="apply SEBA to a finished run")
    p_seba.add_argument("--run", required=True)
    p_seba.add_argument("--vectors", required=True,
                        help="comma-separated 1-based eigenvector indices")
    p_seba.add_argument("--mu", type=float, default=None)
    p_seba.add_argument("--cutoff", type=float, default=0.1)
    p_seba.set_defaults(fn=_cmd_seba)

    p_exp = sub.add_parser("export", help="re-export a field selection")
    p_exp.add_argument("--run", required=True)
    p_exp.add_argument("--select", required=True, help="vec:K or seba:K")
    p_exp.add_argument("--times", default=None,
                       help="comma-separated node ids (t0,t4,...) or times")
    p_exp.add_argument("--cutoff", type=float, default=None)
    p_exp.add_argument("--out", default=None)
    p_exp.set_defaults(fn=_cmd_export)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DomainError, IngestionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
