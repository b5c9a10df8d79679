"""Edge conductances induced by a circle packing, and the resulting walk.

For a tangency packing the conductance of an interior edge ``uv`` is

    c(u, v) = (rho' + rho'') / (r_u + r_v)

where ``rho'``, ``rho''`` are the radii of the circles orthogonal to the two
triples ``u, v, w'`` and ``u, v, w''`` flanking the edge.  For arbitrary
packings (overlapping or branched) the general form is used instead:

    c(u, v) = |z' - z''| / |center(u) - center(v)|

with ``z'``, ``z''`` the radical centers of the flanking triples.  The two
agree on tangency packings, because the radical center of three mutually
tangent circles is the center of their orthogonal circle.

Boundary edges carry a single flanking face.  Their conductance is reported
with the one-face analogue (for the general mode, the distance from the
radical center to the point where the radical axis of ``u, v`` crosses the
line of centers) but never enters a transition row: boundary vertices are
absorbing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .complex import Complex
from .packing import Packing

__all__ = [
    "ConductanceNetwork",
    "CollinearCenters",
    "CoincidentCenters",
    "NetworkFormatError",
    "ortho_radius",
    "edge_conductance_tangent",
    "radical_center",
    "edge_conductance_general",
    "build_network",
    "simple_network",
    "path_length",
    "path_metric_dp",
    "load_network",
    "save_network",
]


class CollinearCenters(ValueError):
    pass


class CoincidentCenters(ValueError):
    pass


class NetworkFormatError(ValueError):
    pass


def ortho_radius(r_u: float, r_v: float, r_w: float) -> float:
    """Radius of the circle orthogonal to three mutually tangent circles."""
    if min(r_u, r_v, r_w) <= 0:
        raise ValueError("radii must be positive")
    return math.sqrt(r_u * r_v * r_w / (r_u + r_v + r_w))


def edge_conductance_tangent(r_u: float, r_v: float, opposite: Sequence[float]) -> float:
    """Conductance of edge ``uv`` from the radii of the one or two opposite vertices."""
    if len(opposite) not in (1, 2):
        raise ValueError("an edge of a triangulation has one or two flanking faces")
    return math.fsum(ortho_radius(r_u, r_v, w) for w in opposite) / (r_u + r_v)


def radical_center(c1, c2, c3) -> complex:
    """Point of equal power ``|z - z_i|^2 - r_i^2`` with respect to three circles.

    Each circle is ``(center, radius)`` with a complex (or 2-tuple) center.
    Subtracting the power equations pairwise gives two linear radical-axis
    equations, solved here by Cramer's rule.
    """
    (z1, r1), (z2, r2), (z3, r3) = [(_as_complex(z), float(r)) for z, r in (c1, c2, c3)]
    # translate to z1 for accuracy
    a, b = z2 - z1, z3 - z1
    # 2 Re(conj(a) z) = |a|^2 - r2^2 + r1^2, same for b
    ka = abs(a) ** 2 - r2 * r2 + r1 * r1
    kb = abs(b) ** 2 - r3 * r3 + r1 * r1
    det = 2 * (a.real * b.imag - a.imag * b.real)
    scale = max(abs(a), abs(b)) ** 2
    if abs(det) <= 1e-14 * scale:
        raise CollinearCenters("circle centers are collinear; radical axes are parallel")
    x = (ka * b.imag - kb * a.imag) / det
    y = (a.real * kb - b.real * ka) / det
    return z1 + complex(x, y)


def _as_complex(z) -> complex:
    if isinstance(z, (tuple, list, np.ndarray)):
        return complex(z[0], z[1])
    return complex(z)


def _radical_foot(z1: complex, r1: float, z2: complex, r2: float) -> complex:
    """Where the radical axis of two circles crosses their line of centers."""
    d = z2 - z1
    dist = abs(d)
    t = (dist * dist + r1 * r1 - r2 * r2) / (2 * dist)
    return z1 + t * d / dist


def edge_conductance_general(packing: Packing, u: int, v: int) -> float:
    """Radical-center conductance of edge ``uv`` for any packing of the complex."""
    cx = packing.complex
    z, r = packing.centers, packing.radii
    dist = abs(z[u] - z[v])
    scale = max(abs(z[u]), abs(z[v]), r[u], r[v], 1e-300)
    if dist <= 1e-12 * scale:
        raise CoincidentCenters(f"centers of {u} and {v} coincide")
    opp = cx.opposite_vertices(u, v)
    if not opp:
        raise ValueError(f"{u}-{v} is not an edge")
    pts = []
    for w in opp:
        try:
            pts.append(radical_center((z[u], r[u]), (z[v], r[v]), (z[w], r[w])))
        except CollinearCenters as err:
            raise CollinearCenters(f"edge {u}-{v}, face with {w}: {err}") from None
    if len(pts) == 1:
        pts.append(_radical_foot(z[u], r[u], z[v], r[v]))
    return abs(pts[0] - pts[1]) / dist


@dataclass(frozen=True, eq=False)
class ConductanceNetwork:
    """Edge conductances and the walk with absorbing boundary.

    ``edges`` is an ``(E, 2)`` array with ``u < v`` in the complex's edge
    order and ``conductance`` the matching values.  ``interior_edge`` marks
    edges with two flanking faces.  Networks on plain graphs (see
    :meth:`from_graph`) have ``complex = None`` and an explicit absorbing set.
    """

    complex: Complex | None
    edges: np.ndarray
    conductance: np.ndarray
    mode: str = "tangent"
    absorbing_mask: np.ndarray | None = None

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        c = np.asarray(self.conductance, dtype=float)
        if c.shape != (len(e),):
            raise ValueError("one conductance per edge")
        if np.any(~(c > 0)):
            raise ValueError("conductances must be positive")
        if self.complex is None and self.absorbing_mask is None:
            raise ValueError("a network without a complex needs an absorbing mask")
        mask = np.array(self.complex.boundary if self.absorbing_mask is None else self.absorbing_mask,
                        dtype=bool)
        if len(e) and (e.min() < 0 or e.max() >= len(mask)):
            raise ValueError("edge endpoint out of range")
        for a in (e, c, mask):
            a.setflags(write=False)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "conductance", c)
        object.__setattr__(self, "absorbing_mask", mask)

    @classmethod
    def from_graph(cls, vertex_count: int, edges, conductance, absorbing) -> "ConductanceNetwork":
        """Network on an arbitrary graph; ``absorbing`` lists the absorbing vertices."""
        mask = np.zeros(vertex_count, dtype=bool)
        mask[list(absorbing)] = True
        e = np.sort(np.asarray(edges, dtype=np.int64).reshape(-1, 2), axis=1)
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops are not allowed")
        return cls(None, e, conductance, "graph", mask)

    @property
    def vertex_count(self) -> int:
        return len(self.absorbing_mask)

    @property
    def absorbing(self) -> np.ndarray:
        return self.absorbing_mask

    @property
    def interior_edge(self) -> np.ndarray:
        cx = self.complex
        if cx is None:
            return np.ones(len(self.edges), dtype=bool)
        return np.array([len(cx.opposite_vertices(int(u), int(v))) == 2 for u, v in self.edges])

    def conductance_matrix(self) -> sp.csr_matrix:
        """Symmetric ``c(u, v)`` matrix; ``c(v, v) = 0``."""
        n = self.vertex_count
        u, v = self.edges.T
        c = self.conductance
        return sp.csr_matrix((np.concatenate([c, c]), (np.concatenate([u, v]), np.concatenate([v, u]))),
                             shape=(n, n))

    def weights(self) -> np.ndarray:
        """``pi(u) = sum_w c(u, w)``."""
        return np.asarray(self.conductance_matrix().sum(axis=1)).ravel()

    def transition_matrix(self) -> sp.csr_matrix:
        """``p(u, v)``: conductance-weighted at interior rows, identity at boundary rows."""
        C = self.conductance_matrix().tocsr()
        pi = np.asarray(C.sum(axis=1)).ravel()
        absorbing = self.absorbing
        scale = np.where(absorbing, 0.0, 1.0 / pi)
        P = sp.diags(scale) @ C
        P = P + sp.diags(absorbing.astype(float))
        P = sp.csr_matrix(P)
        P.sort_indices()
        return P

    def conductance_of(self, u: int, v: int) -> float:
        a, b = (u, v) if u < v else (v, u)
        idx = self._edge_index().get((a, b))
        if idx is None:
            raise KeyError(f"{u}-{v} is not an edge")
        return float(self.conductance[idx])

    def _edge_index(self) -> dict[tuple[int, int], int]:
        cache = self.__dict__.get("_eidx")
        if cache is None:
            cache = {(int(u), int(v)): k for k, (u, v) in enumerate(self.edges)}
            object.__setattr__(self, "_eidx", cache)
        return cache

    def scaled_copy(self, conductance: np.ndarray) -> "ConductanceNetwork":
        return ConductanceNetwork(self.complex, self.edges, conductance, self.mode, self.absorbing_mask)


def build_network(cx: Complex, packing: Packing, mode: str = "tangent") -> ConductanceNetwork:
    """Packing-induced conductances on every edge of ``cx``.

    ``tangent`` uses the orthogonal-circle formula (radii only) and needs a
    tangency packing; ``general`` uses radical centers (centers and radii)
    and accepts overlapping or branched packings.
    """
    if packing.complex != cx:
        raise ValueError("packing realizes a different complex")
    edges = cx.edges()
    r = packing.radii
    c = np.empty(len(edges))
    if mode == "tangent":
        for k, (u, v) in enumerate(edges):
            c[k] = edge_conductance_tangent(r[u], r[v], [r[w] for w in cx.opposite_vertices(u, v)])
    elif mode == "general":
        for k, (u, v) in enumerate(edges):
            try:
                c[k] = edge_conductance_general(packing, u, v)
            except (CollinearCenters, CoincidentCenters) as err:
                raise type(err)(f"edge {u}-{v}: {err}") from None
    else:
        raise ValueError(f"mode must be 'tangent' or 'general', got {mode!r}")
    return ConductanceNetwork(cx, np.asarray(edges), c, mode)


def simple_network(cx: Complex) -> ConductanceNetwork:
    """All conductances 1: the simple random walk on the 1-skeleton."""
    edges = np.asarray(cx.edges())
    return ConductanceNetwork(cx, edges, np.ones(len(edges)), "simple")


# ------------------------------------------------------------------ metric


def path_length(network: ConductanceNetwork, path: Sequence[int]) -> float:
    """``sum over consecutive pairs of 1 / c``."""
    return math.fsum(1.0 / network.conductance_of(a, b) for a, b in zip(path, path[1:]))


def path_metric_dp(network: ConductanceNetwork, x: int, y: int | None = None):
    """Shortest-path distance with edge lengths ``1 / c``.

    With ``y`` given, returns ``d_p(x, y)``; otherwise the array of distances
    from ``x`` to every vertex.  Raises ``ValueError`` if ``y`` is unreachable.
    """
    n = network.vertex_count
    u, v = network.edges.T
    w = 1.0 / network.conductance
    G = sp.csr_matrix((np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
                      shape=(n, n))
    dist = dijkstra(G, directed=False, indices=x)
    if y is None:
        return dist
    if not np.isfinite(dist[y]):
        raise ValueError(f"{y} is not reachable from {x}")
    return float(dist[y])


# ------------------------------------------------------------------ files


def save_network(network: ConductanceNetwork, path: str | Path) -> None:
    lines = [f"network {network.vertex_count} {len(network.edges)}"]
    for (u, v), c in zip(network.edges, network.conductance):
        lines.append(f"{u} {v} {c:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_network(path: str | Path, cx: Complex) -> ConductanceNetwork:
    rows: dict[tuple[int, int], float] = {}
    header = None
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if header is None:
                if len(tok) != 3 or tok[0] != "network":
                    raise NetworkFormatError(f"line {lineno}: expected 'network <V> <E>'")
                header = (int(tok[1]), int(tok[2]))
                continue
            if len(tok) != 3:
                raise NetworkFormatError(f"line {lineno}: expected '<u> <v> <c>'")
            u, v, c = int(tok[0]), int(tok[1]), float(tok[2])
        except ValueError as err:
            if isinstance(err, NetworkFormatError):
                raise
            raise NetworkFormatError(f"line {lineno}: {err}") from None
        key = (min(u, v), max(u, v))
        if key in rows:
            raise NetworkFormatError(f"line {lineno}: edge {u}-{v} repeated")
        rows[key] = c
    if header is None:
        raise NetworkFormatError("missing header")
    edges = cx.edges()
    if header != (cx.vertex_count, len(edges)) or set(rows) != set(edges):
        raise NetworkFormatError("network edges do not match the complex")
    return ConductanceNetwork(cx, np.asarray(edges), np.array([rows[e] for e in edges]), "file")

