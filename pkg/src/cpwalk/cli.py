"""Command-line front end: ``cpwalk <subcommand> ...``.

Every run prints a plain-text report to stdout (or ``--report``): a header
echoing the effective configuration as ``# key = value`` lines, then
``key value`` lines.  Floats are written with 17 significant digits and
per-vertex rows are ordered by vertex index, so identical configurations
produce byte-identical reports.

Failures print a single line ``error kind=<Kind> exit=<code> message=<text>``
to stderr.  Exit codes: 2 usage, 3 invalid input, 4 numerical
non-convergence, 1 a requested check failed.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .complex import (ComplexFormatError, ValidationError, constant_degree_ball, hex_ball,
                      load_complex, save_complex)
from .conductance import (CoincidentCenters, CollinearCenters, NetworkFormatError, build_network,
                          load_network, save_network, simple_network)
from .packing import (LayoutInconsistency, NonConvergence, PackingFormatError, euclidean_packing,
                      load_packing, save_packing, solve_max_disc, tangency_residual,
                      univalence_violation)
from .rmap import (BasePointNotCovered, EmptyFill, discrete_map, harmonic_measure_compare,
                   hex_fill, load_domain, repack_disc)
from .svg import SvgStyle, emit_svg
from .walk import (SingularSystem, conductance_bounds, dirichlet_energy, effective_resistance,
                   escape_probabilities, harmonicity_residual, monte_carlo_escape, simulate,
                   solve_dirichlet)

__all__ = ["main", "build_parser", "fmt"]

EXIT_CHECK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 1, 2, 3, 4
HARMONIC_FACTOR = 1e-7


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


def fmt(x) -> str:
    """17 significant digits for floats, plain text for everything else."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, complex):
        return f"{fmt(x.real)} {fmt(x.imag)}"
    if isinstance(x, (list, tuple)):
        return ",".join(fmt(t) for t in x)
    return str(x)


class Report:
    def __init__(self, command: str, config: dict):
        self.lines = [f"# cpwalk {__version__} {command}"]
        self.lines += [f"# {k} = {fmt(v)}" for k, v in config.items()]

    def add(self, key: str, value) -> None:
        self.lines.append(f"{key} {fmt(value)}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_float(s: str) -> float:
    x = float(s)
    if not x > 0 or not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"{s} is not a positive number")
    return x


def _positive_int(s: str) -> int:
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError(f"{s} is not a positive integer")
    return n


def _int_list(s: str) -> list[int]:
    try:
        out = [int(t) for t in s.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{s} is not a comma-separated list of integers") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("generations must be positive")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cpwalk", description="Circle packings and their random walks.")
    p.add_argument("--version", action="version", version=f"cpwalk {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(q):
        q.add_argument("--tol", type=_positive_float, default=1e-10)
        q.add_argument("--max-iter", type=_positive_int, default=500)

    def report_flag(q):
        q.add_argument("--report", type=Path, help="write the report here instead of stdout")

    def packed(q, mode=True):
        q.add_argument("complex", type=Path)
        q.add_argument("packing", type=Path)
        if mode:
            q.add_argument("--mode", choices=("tangent", "general"), default="tangent")
            q.add_argument("--network", type=Path, help="read conductances from a network file")
        report_flag(q)

    q = sub.add_parser("gen", help="generate a complex")
    q.add_argument("family", choices=("hex", "degree"))
    q.add_argument("n", nargs="?", type=_positive_int, help="generations (same as --gens)")
    q.add_argument("--gens", type=_positive_int)
    q.add_argument("--degree", type=int, default=7)
    q.add_argument("--out", type=Path, required=True)
    report_flag(q)

    q = sub.add_parser("pack", help="solve a packing")
    q.add_argument("kind", choices=("euclidean", "maxdisc"))
    q.add_argument("complex", type=Path)
    q.add_argument("--boundary-radius", type=_positive_float, default=1.0)
    q.add_argument("--anchor", type=int, default=0)
    solver_flags(q)
    q.add_argument("--out", type=Path, required=True)
    report_flag(q)

    q = sub.add_parser("network", help="edge conductances of a packing")
    q.add_argument("mode", choices=("tangent", "general"))
    q.add_argument("complex", type=Path)
    q.add_argument("packing", type=Path)
    q.add_argument("--out", type=Path, required=True)
    report_flag(q)

    q = sub.add_parser("harmonic", help="harmonicity residuals and Dirichlet solves")
    packed(q)
    q.add_argument("--check-centers", action="store_true",
                   help="fail unless the center residual is within 1e-7 of the mean edge length")
    q.add_argument("--boundary-values", type=Path, help="CSV vertex,value for the boundary")
    q.add_argument("--field", choices=("re", "im"), help="use Re or Im of the centers as boundary data")
    q.add_argument("--out", type=Path, help="write the solved field as CSV vertex,value")

    q = sub.add_parser("walk", help="escape probabilities, exact and Monte Carlo")
    packed(q)
    q.add_argument("--start", type=int, default=0)
    q.add_argument("--classes", type=_positive_int, default=6,
                   help="split the boundary cycle into this many consecutive runs")
    q.add_argument("--walks", type=int, default=0)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--max-steps", type=_positive_int)
    q.add_argument("--trace", action="store_true", help="also report one simulated walk")

    q = sub.add_parser("resist", help="simple-walk effective resistance over generations")
    q.add_argument("family", choices=("hex", "degree"))
    q.add_argument("--gens", type=_int_list, required=True, help="e.g. 2,4,8")
    q.add_argument("--degree", type=int, default=7)
    q.add_argument("--out", type=Path, help="write CSV n,R")
    report_flag(q)

    q = sub.add_parser("energy", help="Dirichlet energy of the center coordinates")
    packed(q)

    q = sub.add_parser("rmap", help="discrete Riemann map of a domain")
    q.add_argument("domain", type=Path)
    q.add_argument("--mesh", type=_positive_float, required=True)
    q.add_argument("--out", type=Path, required=True, help="output directory")
    q.add_argument("--arc", type=float, nargs=2, metavar=("THETA1", "THETA2"))
    q.add_argument("--z0", type=float, nargs=2, metavar=("X", "Y"), default=(0.0, 0.0))
    q.add_argument("--compact", type=_positive_float, help="restrict the walk to K_A, |z| <= A")
    solver_flags(q)
    report_flag(q)

    q = sub.add_parser("svg", help="draw a packing")
    q.add_argument("complex", type=Path)
    q.add_argument("packing", type=Path)
    q.add_argument("--network", type=Path, help="color edges by conductance from this file")
    q.add_argument("--mode", choices=("tangent", "general"),
                   help="color edges by conductances computed from the packing")
    q.add_argument("--field", type=Path, help="CSV vertex,value to color circles by")
    q.add_argument("--ortho", type=int, nargs=3, metavar=("U", "V", "W"),
                   help="draw the orthogonal circle of this face")
    q.add_argument("--width", type=_positive_int, default=640)
    q.add_argument("--out", type=Path, required=True)
    return p


# ------------------------------------------------------------------ helpers


def _config(args) -> dict:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k == "report":
            continue
        if isinstance(v, Path):
            v = str(v)
        cfg[k] = v
    return cfg


def _read_csv_field(path: Path, n: int, partial: bool = False) -> np.ndarray:
    vals = np.full(n, np.nan)
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.replace(" ", "") == "vertex,value":
            continue
        try:
            a, b = line.split(",")
            v, x = int(a), float(b)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected 'vertex,value'") from None
        if not 0 <= v < n:
            raise ValueError(f"{path}:{lineno}: vertex {v} out of range")
        vals[v] = x
    if not partial and np.isnan(vals).any():
        raise ValueError(f"{path}: no value for vertex {int(np.flatnonzero(np.isnan(vals))[0])}")
    return vals


def _write_csv_field(path: Path, values: np.ndarray) -> None:
    rows = ["vertex,value"] + [f"{v},{fmt(float(x))}" for v, x in enumerate(values)]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def _load_pair(args):
    cx = load_complex(args.complex)
    return cx, load_packing(args.packing, cx)


def _network(args, cx, P):
    if getattr(args, "network", None) is not None:
        return load_network(args.network, cx)
    return build_network(cx, P, args.mode)


def _classes(cx, k: int) -> dict[int, list[int]]:
    cyc = cx.boundary_cycle()
    if k > len(cyc):
        raise ValueError(f"{k} classes but only {len(cyc)} boundary vertices")
    cuts = [round(i * len(cyc) / k) for i in range(k + 1)]
    return {i: cyc[cuts[i]:cuts[i + 1]] for i in range(k)}


def _generations(args) -> int:
    if args.n is not None and args.gens is not None and args.n != args.gens:
        raise UsageError("generation count given twice with different values")
    n = args.n if args.n is not None else args.gens
    if n is None:
        raise UsageError("gen needs a generation count")
    return n


def _family(family: str, degree: int, n: int):
    return hex_ball(n) if family == "hex" else constant_degree_ball(degree, n)


# ------------------------------------------------------------------ commands


def cmd_gen(args, rep: Report) -> None:
    cx = _family(args.family, args.degree, args.gens)
    save_complex(cx, args.out)
    rep.add("vertices", cx.vertex_count)
    rep.add("edges", len(cx.edges()))
    rep.add("faces", len(cx.faces()))
    rep.add("interior", len(cx.interior_vertices()))
    rep.add("max_degree", cx.max_degree)


def cmd_pack(args, rep: Report) -> None:
    cx = load_complex(args.complex)
    if args.kind == "euclidean":
        P = euclidean_packing(cx, args.boundary_radius, tol=args.tol, max_iter=args.max_iter,
                              anchor=args.anchor)
    else:
        P = solve_max_disc(cx, tol=args.tol, max_iter=args.max_iter, anchor=args.anchor)
    save_packing(P, args.out)
    rep.add("geometry", P.geometry)
    rep.add("vertices", cx.vertex_count)
    rep.add("angle_residual", float(P.residual))
    rep.add("iterations", P.iterations)
    rep.add("tangency_residual", tangency_residual(P))
    rep.add("univalence_violation", univalence_violation(P))
    rep.add("min_radius", float(P.radii.min()))
    rep.add("max_radius", float(P.radii.max()))
    if args.kind == "maxdisc":
        rep.add("center_radius", float(P.radii[args.anchor]))


def cmd_network(args, rep: Report) -> None:
    cx, P = _load_pair(args)
    net = build_network(cx, P, args.mode)
    save_network(net, args.out)
    lo, hi = conductance_bounds(net)
    rep.add("edges", len(net.edges))
    rep.add("min_c_interior", lo)
    rep.add("max_c_interior", hi)
    rep.add("kappa", max(hi, 1.0 / lo))
    rep.add("max_c", float(net.conductance.max()))


def cmd_harmonic(args, rep: Report) -> None:
    cx, P = _load_pair(args)
    net = _network(args, cx, P)
    re, im = harmonicity_residual(net, P)
    mean_edge = float(np.mean(P.edge_lengths()))
    rep.add("residual_re", re)
    rep.add("residual_im", im)
    rep.add("mean_edge_length", mean_edge)
    rep.add("relative_residual", max(re, im) / mean_edge)
    if args.boundary_values is not None and args.field is not None:
        raise UsageError("give --boundary-values or --field, not both")
    data = None
    if args.boundary_values is not None:
        data = _read_csv_field(args.boundary_values, cx.vertex_count, partial=True)
    elif args.field is not None:
        data = P.centers.real if args.field == "re" else P.centers.imag
    if data is not None:
        bdry = np.asarray(cx.boundary)
        if np.isnan(data[bdry]).any():
            raise ValueError("boundary values missing for some boundary vertex")
        f = solve_dirichlet(net, np.where(bdry, data, 0.0))
        lo, hi = float(data[bdry].min()), float(data[bdry].max())
        rep.add("boundary_min", lo)
        rep.add("boundary_max", hi)
        rep.add("maximum_principle", bool(np.all((f >= lo) & (f <= hi))))
        if args.field is not None:
            rep.add("max_deviation_from_centers", float(np.max(np.abs(f - data))))
        if args.out is not None:
            _write_csv_field(args.out, f)
    if args.check_centers and not max(re, im) <= HARMONIC_FACTOR * mean_edge:
        raise CheckFailed(f"center residual {fmt(max(re, im))} exceeds "
                          f"{HARMONIC_FACTOR:g} x mean edge length {fmt(mean_edge)}")


def cmd_walk(args, rep: Report) -> None:
    cx, P = _load_pair(args)
    net = _network(args, cx, P)
    if not 0 <= args.start < cx.vertex_count:
        raise ValueError(f"start vertex {args.start} out of range")
    if args.walks < 0:
        raise UsageError("--walks must be >= 0")
    classes = _classes(cx, args.classes)
    for k, vs in classes.items():
        rep.add(f"class_{k}", ",".join(str(v) for v in vs))
    if args.trace:
        out = simulate(net, args.start, args.seed, args.max_steps or 10**6)
        rep.add("trace_vertex", out.vertex)
        rep.add("trace_steps", out.steps)
        rep.add("trace_truncated", out.truncated)
    if cx.boundary[args.start]:
        rep.add("absorbed_at_start", True)
        return
    exact = escape_probabilities(net, args.start, classes)
    for k, p in exact.items():
        rep.add(f"exact_{k}", p)
    if args.walks:
        mc = monte_carlo_escape(net, args.start, classes, args.walks, args.seed, args.max_steps)
        rep.add("walks", mc.walks)
        rep.add("truncated", mc.truncated)
        for k in classes:
            p = mc.probabilities.get(k, math.nan)
            se = mc.std_errors.get(k, math.nan)
            rep.add(f"count_{k}", mc.counts[k])
            rep.add(f"mc_{k}", p)
            rep.add(f"stderr_{k}", se)
            rep.add(f"zscore_{k}", (p - exact[k]) / se if se > 0 else math.nan)


def cmd_resist(args, rep: Report) -> None:
    rows = []
    for n in args.gens:
        cx = _family(args.family, args.degree, n)
        R = effective_resistance(simple_network(cx), 0)
        rows.append((n, R))
        rep.add(f"R_{n}", R)
    for (n0, r0), (n1, r1) in zip(rows, rows[1:]):
        rep.add(f"increment_{n0}_{n1}", r1 - r0)
    if args.out is not None:
        args.out.write_text("n,R\n" + "".join(f"{n},{fmt(R)}\n" for n, R in rows), encoding="utf-8")


def cmd_energy(args, rep: Report) -> None:
    cx, P = _load_pair(args)
    net = _network(args, cx, P)
    e_re = dirichlet_energy(net, P.centers.real)
    e_im = dirichlet_energy(net, P.centers.imag)
    lo, hi = conductance_bounds(net)
    kappa = max(1.0, hi, 1.0 / lo)
    rep.add("energy_re", e_re)
    rep.add("energy_im", e_im)
    rep.add("kappa", kappa)
    rep.add("max_degree", cx.max_degree)
    rep.add("bound_2_kappa_M", 2 * kappa * cx.max_degree)
    rep.add("sum_r_squared", math.fsum(P.radii ** 2))


def cmd_rmap(args, rep: Report) -> None:
    domain = load_domain(args.domain, args.mesh)
    cx, P = hex_fill(domain)
    Q = repack_disc(cx, tol=args.tol, max_iter=args.max_iter)
    dm = discrete_map(P, Q)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    save_complex(cx, out / "complex.txt")
    save_packing(P, out / "P.txt")
    save_packing(Q, out / "Q.txt")
    rows = ["v,x_P,y_P,x_Q,y_Q,ratio"]
    for v in range(cx.vertex_count):
        zp, zq = P.centers[v], Q.centers[v]
        rows.append(",".join([str(v)] + [fmt(float(t)) for t in
                                         (zp.real, zp.imag, zq.real, zq.imag, dm.ratios[v])]))
    (out / "map.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    rep.add("vertices", cx.vertex_count)
    rep.add("boundary_vertices", len(cx.boundary_vertices()))
    rep.add("ratio_at_base", float(dm.ratios[0]))
    rep.add("angle_residual", float(Q.residual))
    if args.arc is not None:
        unit = domain.is_disc and domain.center == 0 and domain.radius == 1
        if not unit:
            raise UsageError("--arc needs the unit disc domain (analytic harmonic measure)")
        z0 = complex(*args.z0)
        res = harmonic_measure_compare(args.mesh, tuple(args.arc), z0, tol=args.tol,
                                       compact_radius=args.compact, fill=(cx, P, Q))
        rep.add("start_vertex", res.start)
        rep.add("start_point", res.start_point)
        rep.add("escape", res.escape)
        rep.add("analytic", res.analytic)
        rep.add("difference", res.difference)
        rep.add("analytic_at_z0", res.analytic_at_z0)
        rep.add("arc_vertices", res.arc_vertices)
    (out / "report.txt").write_text(rep.text(), encoding="utf-8")


def cmd_svg(args, rep: Report) -> None:
    cx, P = _load_pair(args)
    if args.network is not None and args.mode is not None:
        raise UsageError("give --network or --mode, not both")
    net = None
    if args.network is not None:
        net = load_network(args.network, cx)
    elif args.mode is not None:
        net = build_network(cx, P, args.mode)
    field = _read_csv_field(args.field, cx.vertex_count) if args.field is not None else None
    style = SvgStyle(width=args.width, ortho_face=tuple(args.ortho) if args.ortho else None)
    doc = emit_svg(cx, P, field=field, network=net, style=style)
    args.out.write_text(doc, encoding="utf-8")
    rep.add("circles", cx.vertex_count)
    rep.add("bytes", len(doc.encode("utf-8")))


COMMANDS = {
    "gen": cmd_gen,
    "pack": cmd_pack,
    "network": cmd_network,
    "harmonic": cmd_harmonic,
    "walk": cmd_walk,
    "resist": cmd_resist,
    "energy": cmd_energy,
    "rmap": cmd_rmap,
    "svg": cmd_svg,
}

_INPUT_ERRORS = (ValidationError, ComplexFormatError, PackingFormatError, NetworkFormatError,
                 EmptyFill, BasePointNotCovered, CollinearCenters, CoincidentCenters,
                 ValueError, OSError)
_NUMERIC_ERRORS = (NonConvergence, LayoutInconsistency, SingularSystem)


def _fail(kind: str, code: int, message: str) -> int:
    message = " ".join(str(message).split())
    print(f"error kind={kind} exit={code} message={message}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as err:
        return _fail("UsageError", EXIT_USAGE, err)
    except SystemExit as err:  # --help / --version
        return int(err.code or 0)
    try:
        if args.command == "gen":
            args.gens = _generations(args)
            del args.n
        rep = Report(args.command, _config(args))
        COMMANDS[args.command](args, rep)
    except UsageError as err:
        return _fail("UsageError", EXIT_USAGE, err)
    except CheckFailed as err:
        rep.add("check", "failed")
        _emit(args, rep)
        return _fail("CheckFailed", EXIT_CHECK, err)
    except _NUMERIC_ERRORS as err:
        return _fail(type(err).__name__, EXIT_NUMERIC, err)
    except _INPUT_ERRORS as err:
        return _fail(type(err).__name__, EXIT_INPUT, err)
    _emit(args, rep)
    return 0


def _emit(args, rep: Report) -> None:
    if getattr(args, "report", None) is not None:
        args.report.write_text(rep.text(), encoding="utf-8")
    else:
        sys.stdout.write(rep.text())


if __name__ == "__main__":
    sys.exit(main())
