"""Command line interface: ``tvgcg solve|geodesic|phi|tent-check|cut-oracle``.

Exit codes: 0 success, 1 I/O or usage error, 2 iteration cap reached,
3 stagnation, 4 verification mismatch.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .config import ConfigError, load_config
from .gcg import Status
from .io import fmt, write_csv

EXIT_OK, EXIT_IO, EXIT_MAXITER, EXIT_STAGNATED, EXIT_MISMATCH = 0, 1, 2, 3, 4
VERIFY_TOL = 1e-10
SCAN_DIRECTIONS = ((0, 1), (1, 1), (1, 2), (1, 3), (2, 3), (3, 4))

logger = logging.getLogger("tvgcg")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _threads() -> int:
    """Validated ``TVGCG_THREADS``; all kernels are sequential, so any value is honored."""
    raw = os.environ.get("TVGCG_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"TVGCG_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"TVGCG_THREADS must be a positive integer, got {raw!r}")
    return n


def _verdict(err: float) -> int:
    ok = err <= VERIFY_TOL
    print(f"max_abs_error {fmt(err)}")
    print("OK" if ok else f"MISMATCH (tolerance {fmt(VERIFY_TOL)})")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_solve(args) -> int:
    from .experiment import prepare, run, write_outputs

    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        exp = prepare(cfg)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    result = run(exp)
    try:
        paths = write_outputs(exp, result, args.output)
    except OSError as exc:
        print(f"error: writing outputs failed: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"status {result.status.value}")
    print(f"iterations {len(result.log)}")
    if result.log:
        print(f"J {fmt(result.log[-1]['J'])}")
        print(f"zeta {fmt(result.log[-1]['zeta'])}")
    print(f"atoms {len(result.atoms)}")
    if exp.reference_control is not None:
        print(f"J_reference {fmt(exp.energy(exp.reference_control))}")
    for p in paths:
        print(f"wrote {p}")
    if result.message:
        print(result.message, file=sys.stderr)
    return {Status.CONVERGED: EXIT_OK, Status.MAX_ITER: EXIT_MAXITER, Status.STAGNATED: EXIT_STAGNATED}[result.status]


def cmd_geodesic(args) -> int:
    prob = analysis.GeodesicProblem(args.sigma, args.tau, args.n)
    geo = analysis.discrete_geodesic(prob)
    expected = analysis.geodesic_length_formula(args.sigma, args.tau)
    canon = analysis.canonical_geodesic(prob)
    print(f"length {fmt(geo.length)}")
    print(f"expected {fmt(expected)}")
    print(f"canonical_length {fmt(canon.length)}")
    directions_ok = analysis.geodesic_direction_check(canon.points)
    print(f"canonical_directions {'ok' if directions_ok else 'violated'}")
    code = _verdict(max(abs(geo.length - expected), abs(canon.length - expected)))
    return code if directions_ok else EXIT_MISMATCH


def cmd_phi(args) -> int:
    if args.scan:
        rows = analysis.anisotropy_scan(args.n, SCAN_DIRECTIONS)
        if args.out:
            write_csv(args.out, analysis.SCAN_COLUMNS, rows)
        else:
            print(",".join(analysis.SCAN_COLUMNS))
            for r in rows:
                print(",".join(fmt(r[c]) for c in analysis.SCAN_COLUMNS))
        return _verdict(max(r["abs_error"] for r in rows))
    nu = np.array([math.cos(args.theta), math.sin(args.theta)])
    val = analysis.octagon_phi(nu)
    ref = analysis.octagon_gauge(nu)
    print(f"phi {fmt(val)}")
    print(f"expected {fmt(ref)}")
    return _verdict(abs(val - ref))


def cmd_tent_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    cs = np.vstack([[1.0, 0.0], [1.0, 1.0], rng.uniform(-1.0, 1.0, size=(args.samples, 2))])
    err = 0.0
    for c in cs:
        err = max(err, abs(analysis.tent_patch_tv(args.lam, c) - analysis.tent_ball_tv(args.lam, c)))
    c = cs[0]
    print(f"tv_p1 {fmt(analysis.tent_patch_tv(args.lam, c))} at c=(1, 0)")
    print(f"expected {fmt(analysis.tent_ball_tv(args.lam, c))}")
    print(f"hand_derived {fmt(analysis.tent_patch_tv_closed_form(args.lam, c))}")
    return _verdict(err)


def cmd_cut_oracle(args) -> int:
    from .insertion import solve_plambda
    from .mesh import MeshKind, MeshSpec, build_mesh
    from .oracles import brute_force_plambda, random_dual, subset_bits, subset_perimeters

    if not 1 <= args.n <= 2:
        print("error: --n must be 1 or 2 (exhaustive enumeration)", file=sys.stderr)
        return EXIT_IO
    mesh = build_mesh(MeshSpec(MeshKind.DOUBLE_DIAGONAL, n=args.n, domain=(0.0, 1.0, 0.0, 1.0)))
    p = random_dual(mesh, np.random.default_rng(args.seed))
    bits = subset_bits(mesh.n_triangles)
    per = subset_perimeters(mesh, bits)
    err = 0.0
    for lam in args.lambdas:
        _, g_cut = solve_plambda(mesh, p, lam)
        g_all, _ = brute_force_plambda(mesh, p, lam, per, bits)
        print(f"lambda {fmt(lam)} graph_cut {fmt(g_cut)} exhaustive {fmt(g_all)}")
        err = max(err, abs(g_cut - g_all))
    return _verdict(err)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tvgcg", description="TV-regularized optimal control by conditional gradients.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run a configured solve and write log.csv, atoms.csv and VTK fields")
    p.add_argument("-c", "--config", required=True, type=Path)
    p.add_argument("-o", "--output", type=Path, default=None, help="override output.dir")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("geodesic", help="discrete geodesic length on the double-diagonal mesh")
    p.add_argument("--sigma", type=int, required=True)
    p.add_argument("--tau", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("phi", help="octagon anisotropy at an angle, or a geodesic scan")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--theta", type=float, help="direction angle in radians")
    g.add_argument("--scan", action="store_true")
    p.add_argument("--n", type=int, default=12, help="grid size for --scan")
    p.add_argument("--out", type=Path, help="CSV path for --scan (default stdout)")
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("tent-check", help="P1 two-tent TV against the closed form")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="triangle area")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_tent_check)

    p = sub.add_parser("cut-oracle", help="graph cut against exhaustive enumeration")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambdas", type=float, nargs="+", default=[0.5, 1.0, 2.0, 5.0])
    p.set_defaults(func=cmd_cut_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        _threads()
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
