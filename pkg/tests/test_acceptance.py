"""Acceptance suite: one test per criterion, each logging a PASS or FAIL line.

The lines are collected in ``conftest.ACCEPTANCE`` and shown in the
terminal summary under "acceptance criteria".
"""

import functools
import math

import numpy as np
import pytest

from cpwalk.cli import main as cli_main
from cpwalk.complex import constant_degree_ball, hex_ball, load_complex, save_complex
from cpwalk.conductance import (ConductanceNetwork, build_network, edge_conductance_tangent,
                                load_network, save_network)
from cpwalk.packing import load_packing, save_packing, univalence_violation
from cpwalk.rmap import DomainSpec, harmonic_measure_compare, hex_fill, repack_disc
from cpwalk.svg import SvgStyle, emit_svg
from cpwalk.walk import (dirichlet_energy, empirical_kappa, escape_probabilities,
                         harmonicity_residual, monte_carlo_escape, normal_sum, resistance_sweep,
                         solve_dirichlet)
from conftest import ACCEPTANCE, hex_regular, max_disc
from oracles import poisson_arc_measure

SQ3 = math.sqrt(3)
MC_SEED = 20240601
POLYGON_SEED = 7
FUZZ_SEED = 11


def criterion(k: int, title: str):
    """Record a PASS line with the returned detail, or a FAIL line with the error."""

    def deco(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as err:
                msg = " ".join(str(err).split())[:160]
                ACCEPTANCE.append(f"criterion {k} FAIL {title}: {type(err).__name__} {msg}")
                raise
            ACCEPTANCE.append(f"criterion {k} PASS {title}: {detail}")

        return run

    return deco


def max_disc_set():
    return {"hex_ball(6)": max_disc("hex", 6), "constant_degree_ball(7,5)": max_disc("deg7", 5)}


def hex_sectors(cx, k):
    cyc = cx.boundary_cycle()
    m = len(cyc) // k
    return {i: cyc[i * m:(i + 1) * m] for i in range(k)}


# ------------------------------------------------------------------ 1


@criterion(1, "harmonicity of centers")
def test_criterion_1_harmonicity():
    worst = 0.0
    for name, (cx, P) in max_disc_set().items():
        assert P.residual <= 1e-10, f"{name} angle residual {P.residual:.3g}"
        mean_edge = float(np.mean(P.edge_lengths()))
        for mode in ("tangent", "general"):
            res = max(harmonicity_residual(build_network(cx, P, mode), P))
            ratio = res / mean_edge
            assert ratio <= 1e-7, f"{name} {mode}: residual/mean edge = {ratio:.3g}"
            worst = max(worst, ratio)
    return f"max residual / mean edge = {worst:.3g} (limit 1e-7)"


# ------------------------------------------------------------------ 2


@criterion(2, "tangent and radical-center conductances agree")
def test_criterion_2_formula_consistency():
    worst = 0.0
    for name, (cx, P) in max_disc_set().items():
        t = build_network(cx, P, "tangent")
        g = build_network(cx, P, "general")
        m = t.interior_edge
        rel = float(np.max(np.abs(t.conductance[m] - g.conductance[m]) / t.conductance[m]))
        assert rel <= 1e-9, f"{name}: relative disagreement {rel:.3g}"
        worst = max(worst, rel)
    cx, P = hex_regular(4)
    hex_dev = 0.0
    for mode in ("tangent", "general"):
        net = build_network(cx, P, mode)
        dev = float(np.max(np.abs(net.conductance[net.interior_edge] * SQ3 - 1)))
        assert dev <= 1e-12, f"regular hex {mode}: relative deviation from 1/sqrt(3) {dev:.3g}"
        hex_dev = max(hex_dev, dev)
    return f"max relative disagreement {worst:.3g} (limit 1e-9); regular hex {hex_dev:.3g} (limit 1e-12)"


# ------------------------------------------------------------------ 3


def _univalent_ratio(net: ConductanceNetwork, r: np.ndarray):
    u, v = net.edges[:, 0], net.edges[:, 1]
    bound = 2 * np.sqrt(r[u] * r[v]) / (r[u] + r[v])
    return float(np.max(net.conductance - bound)), float(np.max(bound))


@criterion(3, "univalent bound c <= 2 sqrt(r_u r_v)/(r_u + r_v) <= 1")
def test_criterion_3_univalent_bound():
    packs = [hex_regular(3), max_disc("hex", 6)] + [max_disc("deg7", n) for n in range(3, 8)]
    cx, _ = hex_fill(DomainSpec.unit_disc(0.04))
    packs.append((cx, repack_disc(cx)))
    slack = -math.inf
    for cx, P in packs:
        scale = float(P.radii.max())
        assert univalence_violation(P) <= 1e-9 * scale, "solver output is not univalent"
        for mode in ("tangent", "general"):
            excess, top = _univalent_ratio(build_network(cx, P, mode), P.radii)
            assert excess <= 1e-15 and top <= 1 + 1e-15, f"{mode}: excess {excess:.3g}"
            slack = max(slack, excess)
    rng = np.random.default_rng(FUZZ_SEED)
    quads = 10.0 ** rng.uniform(-3, 3, size=(10_000, 4))
    fuzz = -math.inf
    for ru, rv, a, b in quads:
        c = edge_conductance_tangent(ru, rv, [a, b])
        bound = 2 * math.sqrt(ru * rv) / (ru + rv)
        assert c <= bound + 1e-15 and bound <= 1 + 1e-15, f"quadruple {(ru, rv, a, b)}"
        fuzz = max(fuzz, c - bound)
    return (f"{len(packs)} packings, max c - bound {slack:.3g}; 10^4 fuzzed quadruples "
            f"(seed {FUZZ_SEED}), max c - bound {fuzz:.3g}")


# ------------------------------------------------------------------ 4


@criterion(4, "kappa stable across generations")
def test_criterion_4_kappa_stability():
    kappas = {n: empirical_kappa(build_network(*max_disc("deg7", n))) for n in range(3, 8)}
    lo, hi = min(kappas.values()), max(kappas.values())
    variation = (hi - lo) / lo
    assert variation < 0.10, f"kappa {kappas}"
    shown = ", ".join(f"n={n}: {k:.4f}" for n, k in kappas.items())
    return f"{shown}; variation {100 * variation:.2f}% (limit 10%)"


# ------------------------------------------------------------------ 5


@criterion(5, "Dirichlet energy bound and area")
def test_criterion_5_energy_bound():
    worst = 0.0
    area = 0.0
    for n in range(3, 8):
        cx, P = max_disc("deg7", n)
        net = build_network(cx, P)
        bound = 2 * empirical_kappa(net) * cx.max_degree
        energy = dirichlet_energy(net, P.centers.real)
        assert energy <= bound, f"n={n}: energy {energy:.6g} > {bound:.6g}"
        s = math.fsum(P.radii ** 2)
        assert s <= 1.0, f"n={n}: sum r^2 = {s}"
        worst = max(worst, energy / bound)
        area = max(area, s)
    return f"max energy / (2 kappa M) = {worst:.4f}; max sum r^2 = {area:.4f}"


# ------------------------------------------------------------------ 6


@criterion(6, "type signatures")
def test_criterion_6_type_signatures():
    hex_R = [r for _, r in resistance_sweep(hex_ball, [2, 4, 8, 16, 32])]
    inc = np.diff(hex_R)
    # continuum value per doubling for unit conductors on the triangular lattice
    per_doubling = math.log(2) / (2 * math.pi * SQ3)
    assert np.all(inc >= 0.9 * per_doubling), f"hex increments {inc}"

    ns = list(range(2, 10))
    d7 = dict(zip(ns, (r for _, r in resistance_sweep(lambda n: constant_degree_ball(7, n), ns))))
    steps = {n: d7[n + 1] - d7[n] for n in ns[:-1]}
    assert all(s > 0 for s in steps.values())
    ratios = {n: steps[n] / steps[n - 1] for n in range(5, 9)}
    assert all(q <= 0.5 for q in ratios.values()), f"degree-7 increment ratios {ratios}"

    hex_r0 = {n: float(max_disc("hex", n)[1].radii[0]) for n in range(3, 9)}
    hex_q = {n: hex_r0[n] / hex_r0[n - 1] for n in range(4, 9)}
    assert all(q < 0.9 for q in hex_q.values()), f"hex center radius ratios {hex_q}"
    r8, r9 = (float(max_disc("deg7", n)[1].radii[0]) for n in (8, 9))
    change = abs(r9 - r8) / r8
    assert change < 0.01

    return (f"hex R increments min {inc.min():.5f} (bound {0.9 * per_doubling:.5f}); "
            f"deg7 increment ratios max {max(ratios.values()):.3f} (limit 0.5); "
            f"hex center ratio max {max(hex_q.values()):.3f} (limit 0.9); "
            f"deg7 center radius change 8->9 {100 * change:.3f}% (limit 1%)")


# ------------------------------------------------------------------ 7


@criterion(7, "normal sum of closed polygons vanishes")
def test_criterion_7_polygon_normal_sum():
    rng = np.random.default_rng(POLYGON_SEED)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(3, 25))
        scale = 10.0 ** rng.uniform(-3, 3)
        z = scale * (rng.normal(size=k) + 1j * rng.normal(size=k))
        perimeter = float(np.sum(np.abs(np.roll(z, -1) - z)))
        rel = abs(normal_sum(z)) / perimeter
        assert rel <= 1e-13
        worst = max(worst, rel)
    return f"100 polygons (seed {POLYGON_SEED}), max |sum| / perimeter = {worst:.3g} (limit 1e-13)"


# ------------------------------------------------------------------ 8


@criterion(8, "Dirichlet machinery")
def test_criterion_8_dirichlet():
    path = ConductanceNetwork.from_graph(3, [(0, 1), (1, 2)], [1.0, 1.0], absorbing=[0, 2])
    mid = solve_dirichlet(path, {0: 0.0, 2: 1.0})[1]
    assert mid == 0.5

    rng = np.random.default_rng(3)
    solves = 0
    worst = 0.0
    for cx, P in [hex_regular(4)] + [max_disc("deg7", n) for n in range(3, 6)]:
        net = build_network(cx, P)
        bdry = np.asarray(cx.boundary)
        fields = [P.centers.real, P.centers.imag, rng.normal(size=cx.vertex_count),
                  rng.uniform(-1e3, 1e3, size=cx.vertex_count)]
        for k, data in enumerate(fields):
            f = solve_dirichlet(net, np.where(bdry, data, 0.0))
            lo, hi = data[bdry].min(), data[bdry].max()
            assert np.all((f >= lo) & (f <= hi)), "maximum principle violated"
            solves += 1
            if k < 2:
                rel = float(np.max(np.abs(f - data)) / np.max(np.abs(data)))
                assert rel <= 1e-9, f"centers not reproduced: {rel:.3g}"
                worst = max(worst, rel)
    return (f"3-path midpoint {float(mid)!r}; maximum principle on {solves} solves; "
            f"center reproduction max relative error {worst:.3g} (limit 1e-9)")


# ------------------------------------------------------------------ 9


@criterion(9, "Monte Carlo escape matches 1/6")
def test_criterion_9_monte_carlo():
    cx, P = hex_regular(3)
    net = build_network(cx, P)
    classes = hex_sectors(cx, 6)
    walks = 10 ** 6
    mc = monte_carlo_escape(net, 0, classes, walks=walks, seed=MC_SEED)
    assert mc.truncated == 0
    se = math.sqrt((1 / 6) * (5 / 6) / walks)
    z = {k: (float(p) - 1 / 6) / se for k, p in mc.probabilities.items()}
    assert all(abs(t) <= 3 for t in z.values()), f"z scores {z}"
    exact = escape_probabilities(net, 0, classes)
    assert all(abs(p - 1 / 6) <= 1e-12 for p in exact.values())
    return f"10^6 walks, seed {MC_SEED}, max |z| = {max(abs(t) for t in z.values()):.3f} (limit 3)"


# ------------------------------------------------------------------ 10


@criterion(10, "harmonic measure of the right half circle from 0.5")
def test_criterion_10_harmonic_measure():
    arc = (-math.pi / 2, math.pi / 2)
    z0 = 0.5
    rows = {}
    for eps in (0.02, 0.01):
        res = harmonic_measure_compare(eps, arc, z0)
        # quadrature oracle at the walk's start point, and at z0 itself
        at_start = poisson_arc_measure(res.start_point, *arc)
        at_z0 = poisson_arc_measure(z0, *arc)
        assert res.analytic == pytest.approx(at_start, abs=1e-10)
        rows[eps] = (abs(res.escape - at_start), abs(res.escape - at_z0), res.vertex_count)
    assert rows[0.02][0] <= 0.05
    assert rows[0.01][0] <= rows[0.02][0], f"error grew when the mesh was halved: {rows}"
    return ("|escape - Poisson at start| "
            + ", ".join(f"eps={e}: {a:.5f} (V={v})" for e, (a, _, v) in rows.items())
            + "; raw difference at z0 "
            + ", ".join(f"eps={e}: {b:.5f}" for e, (_, b, _) in rows.items()))


# ------------------------------------------------------------------ 11


def _cli(*argv):
    code = cli_main([str(a) for a in argv])
    assert code == 0, f"cpwalk {' '.join(map(str, argv))} exited {code}"


@criterion(11, "byte-stable round trips and reproducible reports")
def test_criterion_11_determinism(tmp_path, capsys):
    files = 0
    for cx, P in (hex_regular(3), max_disc("deg7", 4)):
        for kind, obj, save, load in (
                ("complex", cx, save_complex, load_complex),
                ("packing", P, save_packing, lambda p: load_packing(p, cx)),
                ("network", build_network(cx, P, "general"), save_network,
                 lambda p: load_network(p, cx))):
            a, b = tmp_path / f"{kind}_a.txt", tmp_path / f"{kind}_b.txt"
            save(obj, a)
            save(load(a), b)
            assert a.read_bytes() == b.read_bytes(), f"{kind} round trip changed bytes"
            files += 1

    c, p = tmp_path / "c.txt", tmp_path / "p.txt"
    _cli("gen", "degree", 3, "--out", c)
    _cli("pack", "maxdisc", c, "--out", p)
    dom = tmp_path / "disc.txt"
    dom.write_text("disc\n")
    runs = [
        ("walk", c, p, "--walks", 20000, "--seed", MC_SEED, "--trace"),
        ("harmonic", c, p, "--field", "re", "--check-centers"),
        ("energy", c, p),
        ("resist", "hex", "--gens", "2,4,8"),
        ("rmap", dom, "--mesh", 0.1, "--out", tmp_path / "rm", "--arc", 0, math.pi, "--z0", 0.3, 0.1),
        ("svg", c, p, "--mode", "tangent", "--out", tmp_path / "f.svg"),
    ]
    capsys.readouterr()
    reports = 0
    for argv in runs:
        outs = []
        for _ in range(2):
            _cli(*argv)
            extra = b""
            if argv[0] == "rmap":
                extra = (tmp_path / "rm" / "map.csv").read_bytes()
            if argv[0] == "svg":
                extra = (tmp_path / "f.svg").read_bytes()
            outs.append(capsys.readouterr().out.encode() + extra)
        assert outs[0] == outs[1], f"{argv[0]} report differs between identical runs"
        reports += 1
    cx, P = max_disc("deg7", 3)
    style = SvgStyle(ortho_face=(0, *cx.flowers[0][:2]))
    assert emit_svg(cx, P, network=build_network(cx, P), style=style) == \
        emit_svg(cx, P, network=build_network(cx, P), style=style)
    return f"{files} file round trips byte-stable; {reports} commands reproduce byte-identical output"
