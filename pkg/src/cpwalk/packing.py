"""Univalent circle packings: radii solvers and center layout.

Two geometries are supported:

``euclidean``
    Boundary radii are prescribed; interior radii are found so every
    interior angle sum equals ``2*pi``.
``disc``
    The maximal packing in the unit disc.  Radii are carried internally as
    hyperbolic labels ``s = exp(-h)`` (``h`` the hyperbolic radius), with
    ``s = 0`` marking a horocycle.  Boundary vertices are horocycles.

Both solvers start with a few uniform-neighbour sweeps (each vertex is
resized as if all its petals were equal) and then switch to damped Newton
steps on ``log`` of the label.  The stopping rule is the sup-norm of the
interior angle-sum error.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve
from scipy.spatial import cKDTree

from .complex import Complex

__all__ = [
    "Packing",
    "NonConvergence",
    "LayoutInconsistency",
    "PackingFormatError",
    "angle_at",
    "angle_sum",
    "angle_sums",
    "solve_euclidean",
    "solve_max_disc",
    "euclidean_packing",
    "layout",
    "tangency_residual",
    "univalence_violation",
    "load_packing",
    "save_packing",
]

TWO_PI = 2.0 * math.pi


class NonConvergence(RuntimeError):
    """Solver ran out of iterations; ``best`` holds the best iterate."""

    def __init__(self, message: str, best: np.ndarray, residual: float, iterations: int):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.best = best
        self.residual = residual
        self.iterations = iterations


class LayoutInconsistency(RuntimeError):
    pass


class PackingFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Packing:
    """Circles realizing a complex: ``radii[v]`` and ``centers[v]`` (complex numbers).

    For ``geometry == "disc"``, ``labels`` holds the hyperbolic labels
    ``exp(-h)`` the solver worked with.
    """

    complex: Complex
    geometry: str
    radii: np.ndarray
    centers: np.ndarray
    labels: np.ndarray | None = None
    residual: float = float("nan")
    iterations: int = 0

    def __post_init__(self):
        if self.geometry not in ("euclidean", "disc"):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        radii = np.array(self.radii, dtype=float)
        centers = np.array(self.centers, dtype=complex)
        n = self.complex.vertex_count
        if radii.shape != (n,) or centers.shape != (n,):
            raise ValueError(f"expected {n} radii and centers")
        radii.setflags(write=False)
        centers.setflags(write=False)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "centers", centers)

    def scaled(self, factor: float) -> "Packing":
        return Packing(self.complex, "euclidean", self.radii * factor, self.centers * factor)

    def rotated(self, angle: float) -> "Packing":
        rot = complex(math.cos(angle), math.sin(angle))
        return Packing(self.complex, self.geometry, self.radii, self.centers * rot, self.labels)

    def edge_lengths(self) -> np.ndarray:
        e = np.asarray(self.complex.edges(), dtype=int)
        return np.abs(self.centers[e[:, 0]] - self.centers[e[:, 1]])


# ------------------------------------------------------------------ angles


def angle_at(r_v: float, r_u: float, r_w: float) -> float:
    """Angle at the ``r_v`` circle's center in a triangle of three tangent circles.

    >>> round(angle_at(1, 2, 3) / math.pi, 12)
    0.5
    """
    if min(r_v, r_u, r_w) <= 0:
        raise ValueError("radii must be positive")
    a = r_v + r_u
    b = r_v + r_w
    c = r_u + r_w
    cos = (a * a + b * b - c * c) / (2 * a * b)
    return math.acos(min(1.0, max(-1.0, cos)))


def _euclid_face(ra, rb, rc):
    """Angles at ``a`` and d(angle)/d(log r) for the a, b, c corners."""
    fa = ra / (ra + rb)
    fc = ra / (ra + rc)
    F = (rb * rc) / ((ra + rb) * (ra + rc))
    ang = 2.0 * np.arcsin(np.sqrt(F))
    t = np.sqrt(F / (1.0 - F))
    return ang, -t * (fa + fc), t * fa, t * fc


def _hyper_face(ua, ub, uc):
    """Same as :func:`_euclid_face` for hyperbolic labels ``u = log s``."""
    qa = np.exp(2 * ua)
    qb = np.exp(2 * ub)
    qc = np.exp(2 * uc)
    one_b = -np.expm1(2 * ub)
    one_c = -np.expm1(2 * uc)
    one_ab = -np.expm1(2 * (ua + ub))
    one_ac = -np.expm1(2 * (ua + uc))
    F = qa * one_b * one_c / (one_ab * one_ac)
    ang = 2.0 * np.arcsin(np.sqrt(F))
    t = np.sqrt(F / (1.0 - F))
    gab = 2 * qa * qb / one_ab
    gac = 2 * qa * qc / one_ac
    da = t * (2 + gab + gac)
    db = t * (-2 * qb / one_b + gab)
    dc = t * (-2 * qc / one_c + gac)
    return ang, da, db, dc


class _FaceSystem:
    """Vectorized angle sums and their Jacobian for one complex."""

    def __init__(self, cx: Complex):
        self.cx = cx
        self.n = cx.vertex_count
        f = np.asarray(cx.faces(), dtype=np.int64).reshape(-1, 3)
        # each face contributes one corner per vertex: rotate it three ways
        self.corners = np.concatenate([f, f[:, [1, 2, 0]], f[:, [2, 0, 1]]])
        self.degree = np.array([cx.degree(v) for v in range(self.n)], dtype=float)
        self.interior = np.array([not b for b in cx.boundary])
        self.int_idx = np.flatnonzero(self.interior)
        self.pos = -np.ones(self.n, dtype=np.int64)
        self.pos[self.int_idx] = np.arange(len(self.int_idx))

    def evaluate(self, u: np.ndarray, hyperbolic: bool, jacobian: bool = False):
        a, b, c = self.corners.T
        kernel = _hyper_face if hyperbolic else _euclid_face
        if hyperbolic:
            ang, da, db, dc = kernel(u[a], u[b], u[c])
        else:
            r = np.exp(u)
            ang, da, db, dc = kernel(r[a], r[b], r[c])
        sums = np.bincount(a, weights=ang, minlength=self.n)
        if not jacobian:
            return sums, None
        rows, cols, vals = [], [], []
        pa = self.pos[a]
        for other, d in ((a, da), (b, db), (c, dc)):
            po = self.pos[other]
            keep = (pa >= 0) & (po >= 0)
            rows.append(pa[keep])
            cols.append(po[keep])
            vals.append(d[keep])
        m = len(self.int_idx)
        J = sp.csc_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m)
        )
        return sums, J


def angle_sums(cx: Complex, radii: Sequence[float]) -> np.ndarray:
    """Euclidean angle sum at every vertex (boundary vertices included)."""
    r = np.asarray(radii, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    return _FaceSystem(cx).evaluate(np.log(r), hyperbolic=False)[0]


def angle_sum(cx: Complex, radii: Sequence[float], v: int) -> float:
    r = list(radii)
    if min(r) <= 0:
        raise ValueError("radii must be positive")
    return math.fsum(angle_at(r[v], r[a], r[b]) for a, b in cx.petal_pairs(v))


# ------------------------------------------------------------------ solvers


def _uniform_sweep(u, sums, fs: _FaceSystem, hyperbolic: bool):
    """One simultaneous uniform-neighbour update of all interior labels."""
    i = fs.int_idx
    k = fs.degree[i]
    beta = np.sin(sums[i] / (2 * k))
    delta = np.sin(math.pi / k)
    new = u.copy()
    if not hyperbolic:
        r = np.exp(u[i])
        rhat = beta * r / (1 - beta)
        new[i] = np.log(rhat * (1 - delta) / delta)
        return new
    s = np.exp(u[i])
    beta = np.minimum(beta, s * (1 - 1e-15))
    shat2 = (s - beta) / (s * (1 - beta * s))
    b = 1 - shat2
    with np.errstate(divide="ignore", invalid="ignore"):
        s_new = np.where(
            shat2 > 1e-300,
            (-b + np.sqrt(b * b + 4 * delta * delta * shat2)) / (2 * delta * shat2),
            delta,
        )
    new[i] = np.log(np.clip(s_new, 1e-300, 1 - 1e-16))
    return new


def _solve(fs: _FaceSystem, u0: np.ndarray, hyperbolic: bool, tol: float, max_iter: int,
           sweeps: int = 30):
    u = u0.copy()
    i = fs.int_idx
    if len(i) == 0:
        return u, 0.0, 0
    sums, _ = fs.evaluate(u, hyperbolic)
    res = np.max(np.abs(sums[i] - TWO_PI))
    it = 0
    for _ in range(min(sweeps, max_iter)):
        if res <= tol:
            break
        u = _uniform_sweep(u, sums, fs, hyperbolic)
        sums, _ = fs.evaluate(u, hyperbolic)
        res = np.max(np.abs(sums[i] - TWO_PI))
        it += 1
    polish = 0
    # once below tol, a couple of extra Newton steps drive the residual to round-off
    while (res > tol or polish < 2) and it < max_iter:
        if res <= tol:
            polish += 1
        sums, J = fs.evaluate(u, hyperbolic, jacobian=True)
        err = sums[i] - TWO_PI
        step = spsolve(J, -err)
        if hyperbolic:
            # labels must stay below 1 (positive hyperbolic radius)
            room = np.where(step > 0, -u[i] / np.where(step > 0, step, 1.0), np.inf)
            cap = min(1.0, 0.9 * float(np.min(room)))
        else:
            cap = 1.0
        # cap huge steps so exp() stays sane on a poor start
        cap = min(cap, 2.0 / max(float(np.max(np.abs(step))), 1e-300))
        t = min(1.0, cap)
        norm0 = float(np.linalg.norm(err))
        accepted = False
        for _ in range(40):
            trial = u.copy()
            trial[i] = u[i] + t * step
            s_trial, _ = fs.evaluate(trial, hyperbolic)
            e_trial = s_trial[i] - TWO_PI
            if np.all(np.isfinite(e_trial)) and np.linalg.norm(e_trial) < (1 - 1e-4 * t) * norm0:
                accepted = True
                break
            t *= 0.5
        it += 1
        if not accepted and res <= tol:
            break
        if not accepted:
            # Newton stalled in a bad region: fall back to a sweep
            s_cur, _ = fs.evaluate(u, hyperbolic)
            trial = _uniform_sweep(u, s_cur, fs, hyperbolic)
            s_trial, _ = fs.evaluate(trial, hyperbolic)
            if np.max(np.abs(s_trial[i] - TWO_PI)) >= res:
                break
        u = trial
        sums = s_trial
        res = float(np.max(np.abs(sums[i] - TWO_PI)))
    return u, float(res), it


def _expand_boundary_radii(cx: Complex, boundary_radii) -> np.ndarray:
    bdry = cx.boundary_vertices()
    arr = np.atleast_1d(np.asarray(boundary_radii, dtype=float))
    r = np.ones(cx.vertex_count)
    if arr.size == 1:
        r[bdry] = arr[0]
    elif arr.size == len(bdry):
        r[bdry] = arr
    elif arr.size == cx.vertex_count:
        r[bdry] = arr[bdry]
    else:
        raise ValueError(f"need 1, {len(bdry)} or {cx.vertex_count} boundary radii, got {arr.size}")
    if np.any(r[bdry] <= 0) or not np.all(np.isfinite(r[bdry])):
        raise ValueError("boundary radii must be positive and finite")
    return r


def solve_euclidean(cx: Complex, boundary_radii=1.0, tol: float = 1e-10,
                    max_iter: int = 500) -> np.ndarray:
    """Interior radii making every interior angle sum ``2*pi``.

    ``boundary_radii`` is a scalar, one value per boundary vertex (in
    increasing vertex order), or a full length-``V`` array whose interior
    entries are ignored.  Boundary radii come back unchanged.

    Raises :class:`NonConvergence` if the residual is still above ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    r = _expand_boundary_radii(cx, boundary_radii)
    fs = _FaceSystem(cx)
    bdry = ~fs.interior
    r[fs.interior] = float(np.mean(r[bdry]))
    u, res, it = _solve(fs, np.log(r), False, tol, max_iter)
    out = np.exp(u)
    out[bdry] = r[bdry]
    if res > tol:
        raise NonConvergence("euclidean packing did not converge", out, res, it)
    return out


def euclidean_packing(cx: Complex, boundary_radii=1.0, tol: float = 1e-10, max_iter: int = 500,
                      anchor: int = 0) -> Packing:
    radii = solve_euclidean(cx, boundary_radii, tol, max_iter)
    fs = _FaceSystem(cx)
    sums, _ = fs.evaluate(np.log(radii), False)
    res = float(np.max(np.abs(sums[fs.int_idx] - TWO_PI))) if len(fs.int_idx) else 0.0
    centers = layout(cx, radii, anchor=anchor, tol=tol)
    return Packing(cx, "euclidean", radii, centers, residual=res)


def solve_max_disc(cx: Complex, tol: float = 1e-10, max_iter: int = 500, anchor: int = 0) -> Packing:
    """Maximal packing of ``cx`` in the unit disc.

    Boundary circles are horocycles (internally tangent to the unit circle).
    The packing is normalized so ``anchor`` is centered at the origin with
    its first petal on the positive real axis.  If ``anchor`` is a boundary
    vertex (it cannot sit at the origin) the circle orthogonal to its first
    face is centered at the origin instead and the anchor's center lies on
    the positive real axis.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    fs = _FaceSystem(cx)
    u = np.full(cx.vertex_count, -np.inf)
    u[fs.interior] = math.log(0.5)
    u, res, it = _solve(fs, u, True, tol, max_iter)
    labels = np.exp(u)
    if res > tol:
        raise NonConvergence("maximal packing did not converge", labels, res, it)
    centers, radii = _layout_disc(cx, labels, anchor, tol)
    return Packing(cx, "disc", radii, centers, labels=labels, residual=res, iterations=it)


# ------------------------------------------------------------------ layout


def _bfs_faces(cx: Complex, first: tuple[int, int, int]):
    """Yield faces in breadth-first order over the dual graph, rotated so the
    first two vertices are already placed when the face is reached."""
    edge_faces: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    for f in cx.faces():
        a, b, c = f
        for x, y in ((a, b), (b, c), (c, a)):
            edge_faces.setdefault((min(x, y), max(x, y)), []).append(f)
    seen = {_canon(first)}
    queue = deque([first])
    while queue:
        a, b, c = queue.popleft()
        yield a, b, c
        # neighbours across each edge, entered through that edge (oriented y, x in the new face)
        for x, y in ((a, b), (b, c), (c, a)):
            for g in edge_faces[(min(x, y), max(x, y))]:
                key = _canon(g)
                if key in seen:
                    continue
                seen.add(key)
                queue.append(_rotate_to(g, y, x))


def _canon(f):
    return tuple(sorted(f))


def _rotate_to(f, p, q):
    a, b, c = f
    for g in ((a, b, c), (b, c, a), (c, a, b)):
        if g[0] == p and g[1] == q:
            return g
    raise AssertionError("edge not in face")


def _first_face(cx: Complex, anchor: int) -> tuple[int, int, int]:
    a, b = cx.petal_pairs(anchor)[0]
    return anchor, a, b


def layout(cx: Complex, radii: Sequence[float], anchor: int = 0, anchor_petal: int | None = None,
           tol: float = 1e-10) -> np.ndarray:
    """Euclidean centers for ``radii``: anchor at the origin, ``anchor_petal``
    (default: first petal) on the positive real axis.

    Faces are placed breadth-first; each circle is placed once and every later
    face only checks it.  A check off by more than ``100 * tol * max(radii)``
    raises :class:`LayoutInconsistency`.
    """
    r = np.asarray(radii, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    first = _first_face(cx, anchor)
    v0, v1 = first[0], first[1]
    if anchor_petal is not None:
        pairs = [p for p in cx.petal_pairs(anchor) if anchor_petal in p]
        if not pairs:
            raise ValueError(f"{anchor_petal} is not a petal of {anchor}")
        a, b = pairs[0]
        # rotate the face (anchor, a, b) so both fixed vertices lead
        first = (anchor, a, b) if a == anchor_petal else (b, anchor, a)
        v0, v1 = anchor, anchor_petal
    z = np.full(cx.vertex_count, np.nan, dtype=complex)
    placed = np.zeros(cx.vertex_count, dtype=bool)
    z[v0] = 0.0
    z[v1] = r[v0] + r[v1]
    placed[[v0, v1]] = True
    limit = 100 * tol * float(np.max(r))

    for a, b, c in _bfs_faces(cx, first):
        if not (placed[a] and placed[b]):
            a, b, c = (b, c, a) if placed[b] and placed[c] else (c, a, b)
        d = z[b] - z[a]
        ang = angle_at(r[a], r[b], r[c])
        pos = z[a] + (r[a] + r[c]) * d / abs(d) * complex(math.cos(ang), math.sin(ang))
        if placed[c]:
            if abs(pos - z[c]) > limit:
                raise LayoutInconsistency(f"vertex {c} placed {abs(pos - z[c]):.3e} apart")
        else:
            z[c] = pos
            placed[c] = True
    return z


def _auto_circle(a: complex, rot: complex, center: complex, radius: float):
    """Image of a circle under the disc automorphism ``rot*(z - a)/(1 - conj(a) z)``."""

    def f(z):
        return rot * (z - a) / (1 - a.conjugate() * z)

    if abs(a) < 1e-300:
        return rot * center, radius
    pole = 1 / a.conjugate()
    d = center - pole
    d /= abs(d)
    p, q = f(center + radius * d), f(center - radius * d)
    return (p + q) / 2, abs(p - q) / 2


def _place_in_frame(Ta: float, Tb: float, Tc: float) -> tuple[complex, float]:
    """Third circle in the frame where circles a, b touch at 0 with a on the left.

    ``T = tanh(h)`` for each circle (1 for horocycles).  Circle a is centered
    at ``-Ta/2`` with radius ``Ta/2``; b at ``Tb/2``.  Returns center and
    radius of c in the upper half disc.
    """
    k = 1 / Ta + 1 / Tb
    rho = k * Tc / (2 * Tc + 2 * k)
    x = rho + (2 * rho / Tc - 1) / Ta
    Q = 1 + rho * rho - 2 * rho / Tc
    y = math.sqrt(max(Q - x * x, 0.0))
    return complex(x, y), rho


def _layout_disc(cx: Complex, labels: np.ndarray, anchor: int, tol: float):
    s = np.asarray(labels, dtype=float)
    n = cx.vertex_count
    T = (1 - s**2) / (1 + s**2)
    centers = np.full(n, np.nan, dtype=complex)
    radii = np.full(n, np.nan)
    placed = np.zeros(n, dtype=bool)

    def place_third(a, b, c):
        ca, cb = centers[a], centers[b]
        u = cb - ca
        t = ca + radii[a] * u / abs(u)
        direction = (ca - t) / abs(ca - t)
        rot = -direction.conjugate()
        w, rho = _place_in_frame(T[a], T[b], T[c])
        # inverse of rot*(z - t)/(1 - conj(t) z)
        return _auto_circle(-t * rot, rot.conjugate(), w, rho)

    first = _first_face(cx, anchor)
    v0, v1, v2 = first
    if not cx.boundary[anchor]:
        p1 = (1 - s[v0]) / (1 + s[v0])
        p2 = (1 - s[v0] * s[v1] ** 2) / (1 + s[v0] * s[v1] ** 2)
        centers[v0], radii[v0] = 0.0, p1
        centers[v1], radii[v1] = (p1 + p2) / 2, (p2 - p1) / 2
        placed[[v0, v1]] = True
    else:
        centers[v0], radii[v0] = -T[v0] / 2, T[v0] / 2
        centers[v1], radii[v1] = T[v1] / 2, T[v1] / 2
        centers[v2], radii[v2] = _place_in_frame(T[v0], T[v1], T[v2])
        from .conductance import radical_center

        zc = radical_center((centers[v0], radii[v0]), (centers[v1], radii[v1]), (centers[v2], radii[v2]))
        rc = math.sqrt(abs(zc - centers[v0]) ** 2 - radii[v0] ** 2)
        hc = _hyperbolic_center(zc, rc)
        tmp = {}
        for v in first:
            tmp[v] = _auto_circle(hc, 1.0, centers[v], radii[v])
        rot = abs(tmp[v0][0]) / tmp[v0][0]
        for v in first:
            centers[v], radii[v] = tmp[v][0] * rot, tmp[v][1]
        placed[list(first)] = True

    scale = 1.0
    limit = 100 * tol * scale
    for a, b, c in _bfs_faces(cx, first):
        if not (placed[a] and placed[b]):
            a, b, c = (b, c, a) if placed[b] and placed[c] else (c, a, b)
        zc, rc = place_third(a, b, c)
        if placed[c]:
            if abs(zc - centers[c]) > limit:
                raise LayoutInconsistency(f"vertex {c} placed {abs(zc - centers[c]):.3e} apart")
        else:
            centers[c], radii[c] = zc, rc
            placed[c] = True
    return centers, radii


def _hyperbolic_center(c: complex, r: float) -> complex:
    """Hyperbolic center of the Euclidean circle (c, r) inside the unit disc."""
    m = abs(c)
    if m < 1e-300:
        return 0j
    t = 0.5 * (math.atanh(m + r) + math.atanh(m - r))
    return math.tanh(t) * c / m


# ------------------------------------------------------------------ checks


def tangency_residual(packing: Packing) -> float:
    """``max over edges of | |z_u - z_v| - (r_u + r_v) |``."""
    e = np.asarray(packing.complex.edges(), dtype=int)
    r = packing.radii
    d = np.abs(packing.centers[e[:, 0]] - packing.centers[e[:, 1]])
    return float(np.max(np.abs(d - (r[e[:, 0]] + r[e[:, 1]]))))


def univalence_violation(packing: Packing) -> float:
    """Largest overlap ``r_i + r_j - |z_i - z_j|`` over pairs of circles (<= 0 if univalent).

    Only pairs within twice the larger radius are examined, via a k-d tree.
    """
    z = packing.centers
    r = packing.radii
    pts = np.column_stack([z.real, z.imag])
    tree = cKDTree(pts)
    hits = tree.query_ball_point(pts, 2 * r)
    worst = -np.inf
    for i, js in enumerate(hits):
        js = np.asarray(js, dtype=int)
        js = js[(js != i) & (r[js] <= r[i])]
        if js.size:
            worst = max(worst, float(np.max(r[i] + r[js] - np.abs(z[i] - z[js]))))
    return worst


# ------------------------------------------------------------------ files


def save_packing(packing: Packing, path: str | Path) -> None:
    lines = [f"packing {packing.complex.vertex_count} {packing.geometry}"]
    for v in range(packing.complex.vertex_count):
        c = packing.centers[v]
        lines.append(f"{v} {c.real:.17g} {c.imag:.17g} {packing.radii[v]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_packing(path: str | Path, cx: Complex) -> Packing:
    """Read a packing file for ``cx``; any realization is accepted
    (branched and overlapping packings included)."""
    rows: dict[int, tuple[float, float, float]] = {}
    header = None
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if header is None:
                if len(tok) != 3 or tok[0] != "packing" or tok[2] not in ("euclidean", "disc"):
                    raise PackingFormatError(f"line {lineno}: expected 'packing <V> <euclidean|disc>'")
                header = (int(tok[1]), tok[2])
                continue
            if len(tok) != 4:
                raise PackingFormatError(f"line {lineno}: expected '<index> <x> <y> <r>'")
            v = int(tok[0])
            x, y, r = (float(t) for t in tok[1:])
        except ValueError as err:
            if isinstance(err, PackingFormatError):
                raise
            raise PackingFormatError(f"line {lineno}: {err}") from None
        if v in rows or not 0 <= v < header[0]:
            raise PackingFormatError(f"line {lineno}: bad or repeated vertex index {v}")
        if not r > 0:
            raise PackingFormatError(f"line {lineno}: radius must be positive")
        rows[v] = (x, y, r)
    if header is None:
        raise PackingFormatError("missing header")
    if header[0] != cx.vertex_count or len(rows) != header[0]:
        raise PackingFormatError(f"packing has {len(rows)} rows, complex has {cx.vertex_count} vertices")
    data = np.array([rows[v] for v in range(header[0])])
    return Packing(cx, header[1], data[:, 2], data[:, 0] + 1j * data[:, 1])
