"""Combinatorial triangulations of a closed disc.

A :class:`Complex` stores, for every vertex, its *flower*: the neighbours in
counterclockwise order.  Interior flowers are closed cycles (stored without
repeating the first petal); boundary flowers are open chains whose first and
last petals are the boundary neighbours.  Vertex ``v`` together with two
consecutive petals ``a, b`` spans the positively oriented face ``(v, a, b)``.

File format (UTF-8, LF, ``#`` starts a comment)::

    complex <V>
    <index> <B|I> <k> <n_1> ... <n_k>
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

__all__ = [
    "Complex",
    "ValidationError",
    "NonSymmetricAdjacency",
    "BadFlowerTopology",
    "OrientationMismatch",
    "WrongEuler",
    "Disconnected",
    "ComplexFormatError",
    "validate",
    "hex_ball",
    "constant_degree_ball",
    "flowers_from_lattice",
    "load_complex",
    "save_complex",
]


class ValidationError(ValueError):
    """A flower list that is not a disc triangulation.

    ``rule`` names the violated invariant; ``vertex`` / ``edge`` locate it.
    """

    rule = "invalid"

    def __init__(self, message: str, vertex: int | None = None, edge: tuple[int, int] | None = None):
        self.vertex = vertex
        self.edge = edge
        loc = []
        if vertex is not None:
            loc.append(f"vertex={vertex}")
        if edge is not None:
            loc.append(f"edge={edge[0]}-{edge[1]}")
        suffix = f" [{', '.join(loc)}]" if loc else ""
        super().__init__(f"{self.rule}: {message}{suffix}")


class NonSymmetricAdjacency(ValidationError):
    rule = "NonSymmetricAdjacency"


class BadFlowerTopology(ValidationError):
    rule = "BadFlowerTopology"


class OrientationMismatch(ValidationError):
    rule = "OrientationMismatch"


class WrongEuler(ValidationError):
    rule = "WrongEuler"


class Disconnected(ValidationError):
    rule = "Disconnected"


class ComplexFormatError(ValueError):
    """Malformed complex file; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True, eq=False)
class Complex:
    """Validated disc triangulation with dense vertex indices ``0..V-1``.

    Build instances through :func:`validate` (or a generator); the
    constructor itself performs no checks.
    """

    flowers: tuple[tuple[int, ...], ...]
    boundary: tuple[bool, ...]
    _faces: tuple[tuple[int, int, int], ...] = field(default=(), repr=False)
    _edges: tuple[tuple[int, int], ...] = field(default=(), repr=False)

    @property
    def vertex_count(self) -> int:
        return len(self.flowers)

    def degree(self, v: int) -> int:
        return len(self.flowers[v])

    @property
    def max_degree(self) -> int:
        return max(len(f) for f in self.flowers)

    def is_interior(self, v: int) -> bool:
        return not self.boundary[v]

    def interior_vertices(self) -> list[int]:
        return [v for v, b in enumerate(self.boundary) if not b]

    def boundary_vertices(self) -> list[int]:
        return [v for v, b in enumerate(self.boundary) if b]

    def faces(self) -> list[tuple[int, int, int]]:
        """Every face once, positively oriented, smallest index first."""
        return list(self._faces)

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges as ``(u, v)`` with ``u < v``, sorted."""
        return list(self._edges)

    def petal_pairs(self, v: int) -> list[tuple[int, int]]:
        """Consecutive petal pairs ``(a, b)``; each spans the face ``(v, a, b)``."""
        f = self.flowers[v]
        if self.boundary[v]:
            return [(f[j], f[j + 1]) for j in range(len(f) - 1)]
        return [(f[j], f[(j + 1) % len(f)]) for j in range(len(f))]

    def boundary_cycle(self) -> list[int]:
        """Boundary vertices in counterclockwise order, starting at the lowest index."""
        bdry = self.boundary_vertices()
        if not bdry:
            return []
        start = bdry[0]
        cycle = [start]
        # walking ccw along the boundary: the next boundary vertex is the first petal
        v = self.flowers[start][0]
        while v != start:
            cycle.append(v)
            v = self.flowers[v][0]
        return cycle

    def opposite_vertices(self, u: int, v: int) -> list[int]:
        """Third vertices of the (one or two) faces containing edge ``uv``."""
        out = []
        for a, b in self.petal_pairs(u):
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return out

    def euler_characteristic(self) -> int:
        return self.vertex_count - len(self._edges) + len(self._faces)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Complex):
            return NotImplemented
        return self.flowers == other.flowers and self.boundary == other.boundary

    def __hash__(self) -> int:
        return hash((self.flowers, self.boundary))


def _face_key(a: int, b: int, c: int) -> tuple[int, int, int]:
    # rotate so the smallest index leads; keeps orientation
    if a < b and a < c:
        return (a, b, c)
    if b < c:
        return (b, c, a)
    return (c, a, b)


def _successor(flower: Sequence[int], closed: bool, x: int) -> int | None:
    """Petal following ``x`` in counterclockwise order, or None."""
    j = flower.index(x)
    if j + 1 < len(flower):
        return flower[j + 1]
    return flower[0] if closed else None


def validate(raw_flowers: Sequence[Sequence[int]], boundary_flags: Sequence[bool]) -> Complex:
    """Check a flower list and return the :class:`Complex` it describes.

    Flowers must already be counterclockwise; if *every* flower is clockwise
    the whole complex is reversed instead of rejected.

    Raises the :class:`ValidationError` subclass naming the first broken rule.
    """
    try:
        return _validate(raw_flowers, boundary_flags)
    except OrientationMismatch:
        reversed_flowers = [list(reversed(f)) for f in raw_flowers]
        try:
            return _validate(reversed_flowers, boundary_flags)
        except ValidationError:
            pass
        raise


def _validate(raw_flowers: Sequence[Sequence[int]], boundary_flags: Sequence[bool]) -> Complex:
    n = len(raw_flowers)
    if n == 0:
        raise BadFlowerTopology("empty complex")
    if len(boundary_flags) != n:
        raise BadFlowerTopology(f"{len(boundary_flags)} boundary flags for {n} flowers")
    flowers = tuple(tuple(int(x) for x in f) for f in raw_flowers)
    bdry = tuple(bool(b) for b in boundary_flags)

    for v, f in enumerate(flowers):
        need = 2 if bdry[v] else 3
        if len(f) < need:
            kind = "boundary chain" if bdry[v] else "interior cycle"
            raise BadFlowerTopology(f"{kind} of length {len(f)} < {need}", vertex=v)
        if len(set(f)) != len(f):
            raise BadFlowerTopology("repeated petal", vertex=v)
        for u in f:
            if not 0 <= u < n:
                raise BadFlowerTopology(f"petal {u} out of range", vertex=v)
            if u == v:
                raise BadFlowerTopology("self-loop", vertex=v)

    nbr_sets = [set(f) for f in flowers]
    for v, f in enumerate(flowers):
        for u in f:
            if v not in nbr_sets[u]:
                raise NonSymmetricAdjacency(f"{u} in flower of {v} but not conversely", edge=(v, u))

    faces: set[tuple[int, int, int]] = set()
    edge_faces: dict[tuple[int, int], int] = {}
    for v, f in enumerate(flowers):
        closed = not bdry[v]
        m = len(f) if closed else len(f) - 1
        for j in range(m):
            a, b = f[j], f[(j + 1) % len(f)]
            if b not in nbr_sets[a]:
                raise BadFlowerTopology(f"petals {a},{b} are consecutive but not adjacent", vertex=v)
            # the face (v, a, b) must be seen identically from a and from b
            if _successor(flowers[a], not bdry[a], b) != v or _successor(flowers[b], not bdry[b], v) != a:
                for w, x, y in ((a, v, b), (b, a, v)):
                    if _successor(flowers[w], not bdry[w], x) == y:
                        raise OrientationMismatch(f"face ({v},{a},{b}) has opposite orientation at {w}",
                                                  vertex=w)
                raise BadFlowerTopology(f"face ({v},{a},{b}) missing from flower of {a} or {b}", vertex=v)
            faces.add(_face_key(v, a, b))

    for a, b, c in faces:
        for x, y in ((a, b), (b, c), (c, a)):
            e = (x, y) if x < y else (y, x)
            edge_faces[e] = edge_faces.get(e, 0) + 1
    for v, f in enumerate(flowers):
        for u in f:
            e = (v, u) if v < u else (u, v)
            count = edge_faces.get(e, 0)
            if count not in (1, 2):
                raise BadFlowerTopology(f"edge lies in {count} faces", edge=e)
            if count == 1 and not (bdry[u] and bdry[v]):
                raise BadFlowerTopology("single-face edge at an interior vertex", edge=e)
        if bdry[v]:
            for end in (f[0], f[-1]):
                e = (v, end) if v < end else (end, v)
                if edge_faces[e] != 1:
                    raise BadFlowerTopology("boundary chain does not end on boundary edges", vertex=v)

    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for u in flowers[v]:
            if not seen[u]:
                seen[u] = True
                queue.append(u)
    if not all(seen):
        raise Disconnected("not connected", vertex=seen.index(False))

    edges = tuple(sorted(edge_faces))
    chi = n - len(edges) + len(faces)
    if chi != 1:
        raise WrongEuler(f"V - E + F = {chi}, expected 1")

    return Complex(flowers, bdry, tuple(sorted(faces)), edges)


# ---------------------------------------------------------------- generators

_HEX_DIRS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def flowers_from_lattice(points: Sequence[tuple[int, int]]) -> tuple[list[list[int]], list[bool]]:
    """Flowers of the triangular-lattice subcomplex spanned by axial ``points``.

    Point ``(i, j)`` sits at ``i + j*exp(i*pi/3)``.  Every point must have its
    present lattice neighbours in a single contiguous counterclockwise run of
    length >= 2, or all six present; see :func:`cpwalk.rmap.trim_lattice`.
    """
    index = {p: k for k, p in enumerate(points)}
    flowers: list[list[int]] = []
    bdry: list[bool] = []
    for k, (i, j) in enumerate(points):
        present = [(i + di, j + dj) in index for di, dj in _HEX_DIRS]
        nbrs = [index.get((i + di, j + dj)) for di, dj in _HEX_DIRS]
        if all(present):
            flowers.append([x for x in nbrs if x is not None])
            bdry.append(False)
            continue
        # start right after a gap so the run is contiguous
        start = next(d for d in range(6) if present[d] and not present[d - 1])
        chain = []
        for s in range(6):
            d = (start + s) % 6
            if not present[d]:
                break
            chain.append(nbrs[d])
        flowers.append(chain)
        bdry.append(True)
    return flowers, bdry


def _hex_ring_points(n: int) -> list[tuple[int, int]]:
    def key(p: tuple[int, int]) -> tuple[int, float]:
        i, j = p
        dist = max(abs(i), abs(j), abs(i + j))
        ang = math.atan2(j * math.sqrt(3) / 2, i + j / 2) % (2 * math.pi)
        return dist, ang

    pts = [(i, j) for i in range(-n, n + 1) for j in range(-n, n + 1) if abs(i + j) <= n]
    return sorted(pts, key=key)


def hex_ball(n: int) -> Complex:
    """Regular hexagonal ball: a centre vertex and ``n`` rings, ``1 + 3n(n+1)`` vertices.

    Vertex 0 is the centre; rings follow in counterclockwise order starting
    on the positive real axis.
    """
    if n < 1:
        raise ValueError("hex_ball needs n >= 1")
    flowers, bdry = flowers_from_lattice(_hex_ring_points(n))
    return validate(flowers, bdry)


def constant_degree_ball(d: int, n: int) -> Complex:
    """Ball of ``n`` generations in which every interior vertex has degree ``d``.

    Layer recurrence: the current boundary cycle ``b_0 .. b_{m-1}`` (ccw) is
    closed off by a new cycle.  Vertex ``b_i`` of current degree ``deg_i``
    receives a fan of ``k_i = d - deg_i`` new petals; the first petal of the
    fan is shared with ``b_{i-1}`` and the last with ``b_{i+1}``, so the new
    layer has ``sum_i (k_i - 1)`` vertices.  A shared vertex starts with
    degree 4 and any other with degree 3, so for ``d >= 7`` each fan has at
    least 3 petals and the layers never degenerate.  Vertex 0 is the centre;
    each layer is numbered consecutively, ccw, starting at the petal shared
    by ``b_{m-1}`` and ``b_0``.
    """
    if d < 7:
        raise ValueError("constant_degree_ball needs d >= 7 (d = 6 is hex_ball)")
    if n < 1:
        raise ValueError("constant_degree_ball needs n >= 1")

    flowers: list[list[int]] = [list(range(1, d + 1))]
    for k in range(d):
        # open chain around a layer-1 vertex: ccw ring neighbour, centre, cw ring neighbour
        flowers.append([1 + (k + 1) % d, 0, 1 + (k - 1) % d])
    layer = list(range(1, d + 1))

    for _ in range(n - 1):
        m = len(layer)
        counts = [d - len(flowers[b]) for b in layer]
        starts = [0] * m
        for i in range(1, m):
            starts[i] = starts[i - 1] + counts[i - 1] - 1
        size = starts[-1] + counts[-1] - 1
        base = len(flowers)
        parents: list[list[int]] = [[] for _ in range(size)]
        for i, b in enumerate(layer):
            fan = [(starts[i] + s) % size for s in range(counts[i])]
            flowers[b] = flowers[b] + [base + q for q in fan]
            for q in fan:
                parents[q].append(i)
        for q in range(size):
            # ccw around a new vertex: next ring vertex, parents (ccw = higher b first), previous
            own = sorted(parents[q], key=lambda i: starts[i] != q)
            flowers.append([base + (q + 1) % size] + [layer[i] for i in own] + [base + (q - 1) % size])
        layer = [base + q for q in range(size)]

    bdry = [False] * len(flowers)
    for b in layer:
        bdry[b] = True
    return validate(flowers, bdry)


def save_complex(cx: Complex, path: str | Path) -> None:
    lines = [f"complex {cx.vertex_count}"]
    for v, f in enumerate(cx.flowers):
        tag = "B" if cx.boundary[v] else "I"
        lines.append(f"{v} {tag} {len(f)} " + " ".join(str(u) for u in f))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_complex(path: str | Path) -> Complex:
    """Read a complex file; format errors carry the offending line number."""
    text = Path(path).read_text(encoding="utf-8")
    header_seen = False
    count = 0
    flowers: dict[int, list[int]] = {}
    flags: dict[int, bool] = {}
    line_of: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if not header_seen:
            if len(tok) != 2 or tok[0] != "complex":
                raise ComplexFormatError("expected header 'complex <V>'", lineno)
            count = _parse_int(tok[1], lineno)
            header_seen = True
            continue
        if len(tok) < 3:
            raise ComplexFormatError("expected '<index> <B|I> <k> <neighbours...>'", lineno)
        v = _parse_int(tok[0], lineno)
        if tok[1] not in ("B", "I"):
            raise ComplexFormatError(f"boundary flag must be B or I, got {tok[1]!r}", lineno)
        k = _parse_int(tok[2], lineno)
        nbrs = [_parse_int(t, lineno) for t in tok[3:]]
        if len(nbrs) != k:
            raise ComplexFormatError(f"declared {k} neighbours, found {len(nbrs)}", lineno)
        if len(set(nbrs)) != len(nbrs):
            raise ComplexFormatError("duplicate neighbour entry", lineno)
        if not 0 <= v < count:
            raise ComplexFormatError(f"vertex index {v} outside 0..{count - 1}", lineno)
        if v in flowers:
            raise ComplexFormatError(f"vertex {v} listed twice", lineno)
        flowers[v] = nbrs
        flags[v] = tok[1] == "B"
        line_of[v] = lineno
    if not header_seen:
        raise ComplexFormatError("missing header")
    missing = [v for v in range(count) if v not in flowers]
    if missing:
        raise ComplexFormatError(f"no line for vertex {missing[0]}")
    try:
        return validate([flowers[v] for v in range(count)], [flags[v] for v in range(count)])
    except ValidationError as err:
        if err.vertex is not None:
            err.args = (f"line {line_of[err.vertex]}: {err.args[0]}",)
        elif err.edge is not None:
            err.args = (f"line {line_of[err.edge[0]]}: {err.args[0]}",)
        raise


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ComplexFormatError(f"not an integer: {tok!r}", lineno) from None
