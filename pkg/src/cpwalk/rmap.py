"""Finite Riemann mapping with circle packings.

A Jordan domain is filled with the regular hexagonal packing ``P`` of mesh
``eps`` (circle radius ``eps``), the same complex is repacked maximally in
the unit disc as ``Q``, and the center map ``P -> Q`` plays the role of the
Riemann map.  For the unit disc the Riemann map fixing the base point 0 is
the identity, and harmonic measure has a closed form, so the escape
probabilities of the walk induced by ``Q`` can be compared against it.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .complex import Complex, flowers_from_lattice, validate, _HEX_DIRS
from .conductance import ConductanceNetwork, build_network
from .packing import Packing, solve_max_disc
from .walk import solve_dirichlet

__all__ = [
    "DomainSpec",
    "DiscreteMap",
    "EmptyFill",
    "BasePointNotCovered",
    "HarmonicMeasureResult",
    "hex_fill",
    "repack_disc",
    "discrete_map",
    "ratio_function",
    "arc_harmonic_measure",
    "harmonic_measure_compare",
    "load_domain",
    "trim_lattice",
]

OMEGA = complex(0.5, math.sqrt(3) / 2)
ARC_TIE = 1e-9


class EmptyFill(ValueError):
    pass


class BasePointNotCovered(ValueError):
    pass


@dataclass(frozen=True)
class DomainSpec:
    """A disc ``|z - center| < radius`` or a simple polygon, with mesh and base point."""

    mesh: float
    base: complex = 0j
    polygon: tuple[complex, ...] | None = None
    center: complex = 0j
    radius: float = 1.0

    def __post_init__(self):
        if not self.mesh > 0:
            raise ValueError("mesh must be positive")
        if self.polygon is not None:
            pts = tuple(complex(p) for p in self.polygon)
            if len(pts) < 3:
                raise ValueError("polygon needs at least three vertices")
            if not _is_simple(pts):
                raise ValueError("polygon boundary is not simple")
            object.__setattr__(self, "polygon", pts)
        elif not self.radius > 0:
            raise ValueError("disc radius must be positive")
        if not self._inside(np.array([self.base]))[0]:
            raise ValueError("base point is not inside the domain")

    @classmethod
    def unit_disc(cls, mesh: float, base: complex = 0j) -> "DomainSpec":
        return cls(mesh=mesh, base=base)

    @property
    def is_disc(self) -> bool:
        return self.polygon is None

    def _inside(self, z: np.ndarray) -> np.ndarray:
        if self.is_disc:
            return np.abs(z - self.center) < self.radius
        return _point_in_polygon(z, np.asarray(self.polygon))

    def circles_inside(self, z: np.ndarray, r: float) -> np.ndarray:
        """Which closed circles of radius ``r`` centered at ``z`` lie in the domain."""
        if self.is_disc:
            return np.abs(z - self.center) + r <= self.radius
        poly = np.asarray(self.polygon)
        return self._inside(z) & (_distance_to_polygon(z, poly) >= r)

    def extent(self) -> float:
        """Largest distance from the base point to the boundary."""
        if self.is_disc:
            return abs(self.base - self.center) + self.radius
        return float(np.max(np.abs(np.asarray(self.polygon) - self.base)))


def _point_in_polygon(z: np.ndarray, poly: np.ndarray) -> np.ndarray:
    inside = np.zeros(z.shape, dtype=bool)
    x, y = z.real, z.imag
    for a, b in zip(poly, np.roll(poly, -1)):
        crosses = (a.imag > y) != (b.imag > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
        inside ^= crosses & (x < xc)
    return inside


def _distance_to_polygon(z: np.ndarray, poly: np.ndarray) -> np.ndarray:
    best = np.full(z.shape, np.inf)
    for a, b in zip(poly, np.roll(poly, -1)):
        d = b - a
        t = np.clip(((z - a) * d.conjugate()).real / abs(d) ** 2, 0.0, 1.0)
        best = np.minimum(best, np.abs(z - (a + t * d)))
    return best


def _is_simple(pts: Sequence[complex]) -> bool:
    n = len(pts)

    def cross(o, p, q):
        return ((p - o) * (q - o).conjugate()).imag

    segs = [(pts[i], pts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            (p1, p2), (q1, q2) = segs[i], segs[j]
            d1, d2 = cross(q1, q2, p1), cross(q1, q2, p2)
            d3, d4 = cross(p1, p2, q1), cross(p1, p2, q2)
            if d1 * d2 <= 0 and d3 * d4 <= 0:
                return False
    return True


def _ring_key(p: tuple[int, int]) -> tuple[int, float]:
    i, j = p
    z = i + j * OMEGA
    return max(abs(i), abs(j), abs(i + j)), math.atan2(z.imag, z.real) % (2 * math.pi)


def _run_ok(p: tuple[int, int], pts: set) -> bool:
    """All six neighbours present, or one contiguous run of at least two."""
    present = [(p[0] + di, p[1] + dj) in pts for di, dj in _HEX_DIRS]
    if all(present):
        return True
    starts = sum(1 for d in range(6) if present[d] and not present[d - 1])
    return starts == 1 and sum(present) >= 2


def trim_lattice(points: set, base: tuple[int, int] = (0, 0)) -> list[tuple[int, int]]:
    """Prune axial lattice ``points`` to a disc triangulation around ``base``.

    Keeps the lattice component of ``base`` and repeatedly deletes the
    lowest-index vertex (ring order around ``base``) whose neighbours do not
    form one contiguous run of length >= 2.  Returns the survivors in ring
    order, ``base`` first.
    """
    pts = set(points)
    while True:
        if base not in pts:
            raise BasePointNotCovered("base point's circle is not in the fill")
        pts = _component(pts, base)
        order = {p: k for k, p in enumerate(sorted(pts, key=_ring_key))}
        heap = [(order[p], p) for p in pts if not _run_ok(p, pts)]
        heapq.heapify(heap)
        removed = False
        while heap:
            _, p = heapq.heappop(heap)
            if p not in pts or _run_ok(p, pts):
                continue
            pts.discard(p)
            removed = True
            for di, dj in _HEX_DIRS:
                q = (p[0] + di, p[1] + dj)
                if q in pts and not _run_ok(q, pts):
                    heapq.heappush(heap, (order[q], q))
        if not removed:
            break
    if base not in pts:
        raise BasePointNotCovered("base point was trimmed away")
    if len(pts) < 3:
        raise EmptyFill("fill has no triangle")
    return sorted(pts, key=_ring_key)


def _component(pts: set, base) -> set:
    seen = {base}
    stack = [base]
    while stack:
        p = stack.pop()
        for di, dj in _HEX_DIRS:
            q = (p[0] + di, p[1] + dj)
            if q in pts and q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def _fill_lattice(domain: DomainSpec) -> list[tuple[int, int]]:
    eps = domain.mesh
    N = int(math.ceil(domain.extent() / (eps * math.sqrt(3)))) + 2
    ii, jj = np.meshgrid(np.arange(-N, N + 1), np.arange(-N, N + 1), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    z = domain.base + 2 * eps * (ii + jj * OMEGA)
    keep = domain.circles_inside(z, eps)
    if not keep.any():
        raise EmptyFill("no circle of the hexagonal packing fits in the domain")
    pts = set(zip(ii[keep].tolist(), jj[keep].tolist()))
    return trim_lattice(pts)


def hex_fill(domain: DomainSpec) -> tuple[Complex, Packing]:
    """Regular hexagonal packing of mesh ``domain.mesh`` filling the domain.

    Circles have radius ``mesh``; the lattice is anchored at the base
    point, which becomes vertex 0.
    """
    lattice = _fill_lattice(domain)
    return _lattice_packing(lattice, domain.base, domain.mesh)


def _lattice_packing(lattice, base: complex, eps: float) -> tuple[Complex, Packing]:
    flowers, bdry = flowers_from_lattice(lattice)
    cx = validate(flowers, bdry)
    ij = np.asarray(lattice, dtype=float)
    centers = base + 2 * eps * (ij[:, 0] + ij[:, 1] * OMEGA)
    return cx, Packing(cx, "euclidean", np.full(len(lattice), eps), centers)


def repack_disc(cx: Complex, tol: float = 1e-10, max_iter: int = 500) -> Packing:
    """Maximal packing of ``cx`` in the unit disc with vertex 0 at the origin."""
    return solve_max_disc(cx, tol=tol, max_iter=max_iter, anchor=0)


@dataclass(frozen=True, eq=False)
class DiscreteMap:
    """Center map ``P -> Q`` between two packings of one complex."""

    source: Packing
    target: Packing
    ratios: np.ndarray

    @property
    def complex(self) -> Complex:
        return self.source.complex

    def __call__(self, v: int) -> complex:
        return complex(self.target.centers[v])


def discrete_map(P: Packing, Q: Packing) -> DiscreteMap:
    if P.complex != Q.complex:
        raise ValueError("packings realize different complexes")
    ratios = Q.radii / P.radii
    ratios.setflags(write=False)
    return DiscreteMap(P, Q, ratios)


def ratio_function(dm: DiscreteMap, v: int) -> float:
    """``r_Q(v) / r_P(v)``."""
    return float(dm.ratios[v])


# ------------------------------------------------------------------ harmonic measure


def arc_harmonic_measure(z0: complex, theta1: float, theta2: float) -> float:
    """Harmonic measure at ``z0`` of the ccw arc from ``theta1`` to ``theta2`` of the unit circle.

    Closed form of the Poisson integral: if the arc is seen from ``z0``
    under the angle ``phi`` then the measure is ``phi/pi - (theta2 - theta1)/(2 pi)``.
    """
    if abs(z0) >= 1:
        raise ValueError("z0 must lie in the open unit disc")
    span = theta2 - theta1
    if not 0 < span < 2 * math.pi:
        raise ValueError("arc must have length strictly between 0 and 2*pi")
    a = complex(math.cos(theta1), math.sin(theta1)) - z0
    b = complex(math.cos(theta2), math.sin(theta2)) - z0
    phi = math.atan2((b * a.conjugate()).imag, (b * a.conjugate()).real) % (2 * math.pi)
    return phi / math.pi - span / (2 * math.pi)


def _in_arc(angle: np.ndarray, theta1: float, theta2: float) -> np.ndarray:
    # half-open arc [theta1, theta2): an arc and its complement partition the circle.
    # Layout round-off moves tangency points by ~1e-12; ties are decided within ARC_TIE.
    rel = np.mod(angle - theta1, 2 * math.pi)
    rel = np.where(rel > 2 * math.pi - ARC_TIE, 0.0, rel)
    return rel < (theta2 - theta1) - ARC_TIE


@dataclass(frozen=True)
class HarmonicMeasureResult:
    """``analytic`` is taken at the start vertex's ``Q`` center, where the walk
    actually begins; ``analytic_at_z0`` at the requested point itself."""

    escape: float
    analytic: float
    difference: float
    start: int
    start_point: complex
    analytic_at_z0: float
    mesh: float
    vertex_count: int
    arc_vertices: int


def harmonic_measure_compare(mesh: float, arc: tuple[float, float], z0: complex,
                             tol: float = 1e-10, compact_radius: float | None = None,
                             fill: tuple[Complex, Packing, Packing] | None = None
                             ) -> HarmonicMeasureResult:
    """Escape probability of the ``Q`` walk versus harmonic measure, unit disc.

    The boundary vertices of the packing are split by whether their circle's
    point of tangency with the unit circle lies on the half-open ``arc``
    ``[theta1, theta2)``.  The walk starts at the vertex ``v`` whose ``Q`` center is
    nearest to ``z0`` and is compared with harmonic measure at ``S_Q(v)``;
    the lattice puts ``S_Q(v)`` up to a mesh width away from ``z0``, which
    would otherwise swamp the discretization error.

    With ``compact_radius = a`` the walk is instead restricted to the
    subcomplex ``K_A`` whose ``P`` circles lie in the closed disc of radius
    ``a``; its boundary is absorbing and classed by the argument of the
    ``Q`` centers; the reference is harmonic measure of the circle of
    radius ``a``.

    ``fill`` may pass a precomputed ``(complex, P, Q)``.
    """
    theta1, theta2 = arc
    if fill is None:
        domain = DomainSpec.unit_disc(mesh)
        cx, P = hex_fill(domain)
        Q = repack_disc(cx, tol=tol)
    else:
        cx, P, Q = fill
    net = build_network(cx, Q, "tangent")
    if compact_radius is None:
        bdry = np.array(cx.boundary)
        angles = np.angle(Q.centers)
        on_arc = bdry & _in_arc(angles, theta1, theta2)
        scale = 1.0
        sub_net, sub_q = net, Q.centers
    else:
        sub_net, keep = _restrict(net, P, compact_radius, mesh)
        sub_q = Q.centers[keep]
        bdry = sub_net.absorbing
        on_arc = bdry & _in_arc(np.angle(sub_q), theta1, theta2)
        scale = compact_radius
    if not on_arc.any() or on_arc.sum() == bdry.sum():
        raise ValueError("degenerate arc: it contains no boundary vertex or all of them")
    interior = np.flatnonzero(~bdry)
    start = int(interior[np.argmin(np.abs(sub_q[interior] - z0))])
    escape = float(solve_dirichlet(sub_net, on_arc.astype(float))[start])
    zs = complex(sub_q[start])
    analytic = arc_harmonic_measure(zs / scale, theta1, theta2)
    at_z0 = arc_harmonic_measure(z0 / scale, theta1, theta2)
    return HarmonicMeasureResult(escape, analytic, escape - analytic, start, zs, at_z0, mesh,
                                 sub_net.vertex_count, int(on_arc.sum()))


def _restrict(net: ConductanceNetwork, P: Packing, radius: float, mesh: float):
    eps = mesh
    z = P.centers
    base = z[0]
    ij = np.rint(_axial(z - base, eps)).astype(int)
    inside = np.abs(z - base) + eps <= radius
    pts = {(int(a), int(b)) for (a, b), k in zip(ij, inside) if k}
    lattice = trim_lattice(pts)
    index = {(int(a), int(b)): v for v, (a, b) in enumerate(ij)}
    keep = np.array([index[p] for p in lattice])
    sub_cx, _ = _lattice_packing(lattice, base, eps)
    old = {(int(u), int(v)): c for (u, v), c in zip(net.edges, net.conductance)}
    conds = []
    for a, b in sub_cx.edges():
        u, v = keep[a], keep[b]
        conds.append(old[(min(u, v), max(u, v))])
    return ConductanceNetwork(sub_cx, np.asarray(sub_cx.edges()), np.array(conds), net.mode), keep


def _axial(w: np.ndarray, eps: float) -> np.ndarray:
    w = w / (2 * eps)
    j = w.imag / OMEGA.imag
    i = w.real - j * OMEGA.real
    return np.column_stack([i, j])


def load_domain(path: str | Path, mesh: float) -> DomainSpec:
    """Domain file: ``disc [cx cy radius]`` or ``polygon`` followed by ``x y``
    lines; an optional ``base x y`` line sets the base point."""
    kind = None
    args: list[float] = []
    pts: list[complex] = []
    base = None
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if kind is None:
                if tok[0] not in ("disc", "polygon"):
                    raise ValueError(f"line {lineno}: expected 'disc' or 'polygon'")
                kind = tok[0]
                args = [float(t) for t in tok[1:]]
            elif tok[0] == "base":
                base = complex(float(tok[1]), float(tok[2]))
            else:
                pts.append(complex(float(tok[0]), float(tok[1])))
        except (IndexError, ValueError) as err:
            raise ValueError(f"line {lineno}: {err}") from None
    if kind is None:
        raise ValueError("empty domain file")
    if kind == "disc":
        if args and len(args) != 3:
            raise ValueError("disc takes 'cx cy radius' or nothing")
        center = complex(args[0], args[1]) if args else 0j
        radius = args[2] if args else 1.0
        return DomainSpec(mesh=mesh, base=center if base is None else base, center=center, radius=radius)
    if base is None:
        raise ValueError("polygon domains need a 'base x y' line")
    return DomainSpec(mesh=mesh, base=base, polygon=tuple(pts))
