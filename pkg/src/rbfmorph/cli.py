"""Command-line entry point: ``rbfmorph --gen-airfoil 64,32 --sin-airfoil --out def.su2``."""

from __future__ import annotations

import argparse
import logging
import os
import sys


from . import bench
from .mesh_io import MeshError, read_displacements, read_mesh, write_mesh
from .pipeline import DeformationConfig, deform
from .rbf_kernel import ConditioningError

logger = logging.getLogger("rbfmorph")


class UsageError(Exception):
    pass


def _pair(text):
    try:
        n, m = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N,M integers, got {text!r}") from None
    return n, m


def _ice(text):
    parts = [p for p in text.split(",") if p.strip()]
    if not 1 <= len(parts) <= 4:
        raise argparse.ArgumentTypeError("expected CENTER[,HEIGHT[,WIDTH[,HORNS]]]")
    try:
        vals = [float(p) for p in parts[:3]] + [int(p) for p in parts[3:]]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --ice-bump value {text!r}") from None
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rbfmorph",
        description="Deform a volume mesh from prescribed surface displacements using "
        "compact-support RBF interpolation with multi-level greedy point selection "
        "and wall-distance volume reduction.",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--mesh", metavar="PATH", help="input mesh (SU2 ASCII)")
    src.add_argument("--gen-airfoil", metavar="N,M", type=_pair,
                     help="generate a NACA0012 O-grid with N circumferential nodes and M radial layers")
    p.add_argument("--marker", default=bench.AIRFOIL_MARKER,
                   help="deforming boundary marker (default: %(default)s)")

    dfm = p.add_mutually_exclusive_group(required=True)
    dfm.add_argument("--deform", metavar="PATH",
                     help="displacement file with lines 'node_index dx dy [dz]'")
    dfm.add_argument("--sin-airfoil", action="store_true",
                     help="dy = A sin(W pi x/c), defaults A=0.01, W=15")
    dfm.add_argument("--sin-wing", action="store_true",
                     help="dy = A sin(W pi z/b), defaults A=0.03, W=4 (3D meshes)")
    dfm.add_argument("--ice-bump", metavar="C[,H[,W[,HORNS]]]", nargs="?", const=[], type=_ice,
                     help="horned ice shape: centre arc position C, height H, width W, horn "
                     "count (defaults 0, 0.02, 0.01, 2; lengths in chords)")
    p.add_argument("--amp", type=float, help="override the sinusoid amplitude")
    p.add_argument("--wave", type=float, help="override the sinusoid wavenumber")
    p.add_argument("--chord", type=float, default=1.0,
                   help="reference length c for --radius, --sin-airfoil and generated meshes")
    p.add_argument("--span", type=float, default=1.0, help="span b used by --sin-wing")

    p.add_argument("--basis", choices=["c0", "c2", "c4", "c6"], default="c2",
                   help="Wendland kernel (default: %(default)s)")
    p.add_argument("--radius", type=float, default=2.0, metavar="MULT",
                   help="support radius in multiples of --chord (default: %(default)s)")
    p.add_argument("--eps", type=float, default=0.1, help="greedy tolerance per level")
    p.add_argument("--levels", type=int, default=5, help="maximum number of levels")
    p.add_argument("--cap", type=int, default=5000, help="maximum control points per level")
    p.add_argument("--volume-k", type=float, default=5.0,
                   help="volume reduction factor k, D = k * max surface displacement")
    p.add_argument("--fixed", metavar="MARKER[,..]", default="",
                   help="markers pinned at zero displacement")

    p.add_argument("--out", required=True, metavar="PATH", help="deformed mesh output")
    p.add_argument("--format", choices=["su2", "vtk"],
                   help="output format (default: from --out extension, else su2)")
    p.add_argument("--report", metavar="PATH",
                   help="CSV convergence history: level,points,error,seconds")
    p.add_argument("--summary", metavar="PATH",
                   help="key: value deformation summary (default: next to --report)")
    p.add_argument("--quality", action="store_true",
                   help="compute orthogonality/validity before and after deformation")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load(args):
    if args.mesh is not None:
        if not os.path.isfile(args.mesh):
            raise UsageError(f"file not found: {args.mesh}")
        mesh = read_mesh(args.mesh)
    else:
        n, m = args.gen_airfoil
        mesh = bench.gen_airfoil_mesh(args.chord, radial_layers=m, circumferential=n)

    if args.deform is not None:
        if not os.path.isfile(args.deform):
            raise UsageError(f"file not found: {args.deform}")
        field = read_displacements(args.deform, mesh, args.marker)
    elif args.sin_airfoil:
        field = bench.gen_sinusoidal_displacement(
            mesh, args.marker, "airfoil", args.amp, args.wave, length=args.chord)
    elif args.sin_wing:
        field = bench.gen_sinusoidal_displacement(
            mesh, args.marker, "wing", args.amp, args.wave, length=args.span)
    else:
        defaults = [0.0, 0.02, 0.01, 2]
        vals = list(args.ice_bump) + defaults[len(args.ice_bump):]
        c, h, w, horns = vals
        field = bench.gen_ice_bump(mesh, args.marker, c * args.chord, h * args.chord,
                                   w * args.chord, int(horns))
    return mesh, field


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        print("rbfmorph: error: no arguments given (see --help)", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")

    fmt = args.format or ("vtk" if args.out.lower().endswith(".vtk") else "su2")
    fixed = tuple(m for m in args.fixed.split(",") if m)
    try:
        if (args.amp is not None or args.wave is not None) and not (args.sin_airfoil or args.sin_wing):
            raise UsageError("--amp/--wave only apply to --sin-airfoil/--sin-wing")
        config = DeformationConfig(
            kind=args.basis.upper(), radius=args.radius, reference_length=args.chord,
            tolerance=args.eps, max_levels=args.levels, max_points_per_level=args.cap,
            volume_k=args.volume_k, fixed_markers=fixed, quality=args.quality,
        )
        mesh, field = _load(args)
        deformed, report = deform(mesh, field, config)

        cell_data = None
        if args.quality and fmt == "vtk":
            q = report.quality_after
            cell_data = {"orthogonality": q.orthogonality, "signed_measure": q.measures}
        point_data = {"displacement": deformed.nodes - mesh.nodes} if fmt == "vtk" else None
        write_mesh(deformed, args.out, fmt, cell_data=cell_data, point_data=point_data)
        if args.report:
            report.write_convergence(args.report)
        summary = args.summary
        if summary is None and args.report:
            summary = os.path.splitext(args.report)[0] + ".summary.txt"
        if summary:
            report.write(summary)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rbfmorph: error: {exc}", file=sys.stderr)
        return 2
    except (MeshError, ConditioningError, ValueError, OSError) as exc:
        print(f"rbfmorph: error: {exc}", file=sys.stderr)
        return 1

    final = report.surface_max_error
    print(
        f"{len(report.levels)} levels, {report.total_control_points} control points, "
        f"surface error {final:.3e}, {report.seconds:.2f} s"
    )
    if report.quality_after is not None:
        qa = report.quality_after
        print(f"min orthogonality {qa.min_orthogonality:.2f} deg, "
              f"{qa.inverted_count} inverted elements")
    return 0


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
