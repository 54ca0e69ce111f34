"""Command-line figure rendering for run directories.

`infgenplot --run DIR --select spectrum --out fig.png` draws the
eigenvalue scatter; `--select vec:K` or `seba:K` draws time-fibre panels.
"""

import argparse
import sys

from .render import ArtifactError, PlotRequest, plot_fibres, plot_spectrum


def _parse_times(spec):
    if spec is None:
        return None
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        out.append(int(tok[1:]) if tok.startswith("t") else int(tok))
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="infgenplot",
        description="Render figures from an infgen run directory")
    parser.add_argument("--run", required=True, help="run directory")
    parser.add_argument("--select", required=True,
                        help="spectrum | vec:K | seba:K")
    parser.add_argument("--times", default=None,
                        help="comma-separated exported time-node ids (t0,t4,...)")
    parser.add_argument("--cutoff", type=float, default=None,
                        help="mask values with magnitude at or below this")
    parser.add_argument("--vmin", type=float, default=None)
    parser.add_argument("--vmax", type=float, default=None)
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        if args.select == "spectrum":
            result = plot_spectrum(args.run, args.out)
            print(f"wrote {result.path} ({result.n_points} eigenvalues, "
                  f"{result.n_temporal} temporal)")
        else:
            request = PlotRequest(run_dir=args.run, select=args.select,
                                  out=args.out,
                                  times=_parse_times(args.times),
                                  cutoff=args.cutoff,
                                  vmin=args.vmin, vmax=args.vmax)
            result = plot_fibres(request)
            print(f"wrote {result.path} ({result.n_panels} panels)")
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
