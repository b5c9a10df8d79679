"""Harmonic functions, Dirichlet problems and random walks on a conductance network.

Vertex fields are plain float arrays indexed by vertex.  The linear algebra
always works with the interior block of the weighted Laplacian

    (L f)(v) = sum_{u ~ v} c(v, u) (f(v) - f(u)),

which is symmetric positive definite once every interior component touches
the fixed set, and is solved with Jacobi-preconditioned conjugate gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import cg, spsolve

from .complex import Complex
from .conductance import ConductanceNetwork, simple_network
from .packing import Packing

__all__ = [
    "WalkOutcome",
    "MonteCarloEscape",
    "SingularSystem",
    "harmonicity_residual",
    "normal_sum",
    "solve_dirichlet",
    "harmonic_extension",
    "escape_probabilities",
    "simulate",
    "monte_carlo_escape",
    "dirichlet_energy",
    "effective_resistance",
    "resistance_sweep",
    "conductance_bounds",
    "empirical_kappa",
    "laplacian",
]

CG_RTOL = 1e-12


class SingularSystem(ValueError):
    """Some free vertices cannot reach the fixed set."""


@dataclass(frozen=True)
class WalkOutcome:
    vertex: int
    steps: int
    seed: int
    truncated: bool = False


@dataclass(frozen=True)
class MonteCarloEscape:
    counts: dict
    walks: int
    truncated: int
    seed: int
    probabilities: dict = field(default_factory=dict)
    std_errors: dict = field(default_factory=dict)


def laplacian(network: ConductanceNetwork) -> sp.csr_matrix:
    C = network.conductance_matrix()
    return sp.csr_matrix(sp.diags(np.asarray(C.sum(axis=1)).ravel()) - C)


def harmonicity_residual(network: ConductanceNetwork, packing: Packing) -> tuple[float, float]:
    """Max over interior ``v`` of ``|sum_u c(v,u) (S(u) - S(v))|``, real and imaginary parts.

    ``S`` is the center map of ``packing``; zero residual means the real and
    imaginary parts of the centers are both harmonic for the walk.
    """
    if packing.complex != network.complex:
        raise ValueError("network and packing are built on different complexes")
    interior = ~network.absorbing
    if not interior.any():
        return 0.0, 0.0
    flux = -(laplacian(network) @ packing.centers)[interior]
    return float(np.max(np.abs(flux.real))), float(np.max(np.abs(flux.imag)))


def normal_sum(points: Sequence[complex], closed: bool = True) -> complex:
    """``sum_j |z_{j+1} - z_j| * eta_j`` over the polygon's segments.

    ``eta_j`` is the unit normal (the segment direction turned by +90 degrees).
    For a closed polygon the last segment returns to ``points[0]``.
    """
    z = np.asarray(points, dtype=complex)
    if len(z) < 3 and closed:
        raise ValueError("a closed polygon needs at least three points")
    nxt = np.roll(z, -1) if closed else z[1:]
    cur = z if closed else z[:-1]
    seg = nxt - cur
    length = np.abs(seg)
    if np.any(length == 0):
        raise ValueError("repeated consecutive points")
    normals = 1j * seg / length
    return complex(np.sum(length * normals))


def _as_vertex_values(network: ConductanceNetwork, values, where: np.ndarray) -> np.ndarray:
    n = network.vertex_count
    out = np.zeros(n)
    if isinstance(values, Mapping):
        for v, x in values.items():
            out[int(v)] = x
        missing = [v for v in np.flatnonzero(where) if v not in values]
        if missing:
            raise ValueError(f"no value for vertex {missing[0]}")
        return out
    arr = np.asarray(values, dtype=float)
    if arr.shape == (n,):
        return arr.copy()
    if arr.shape == (int(where.sum()),):
        out[where] = arr
        return out
    raise ValueError(f"expected {n} values or one per fixed vertex ({int(where.sum())})")


def harmonic_extension(network: ConductanceNetwork, fixed: np.ndarray, values: np.ndarray,
                       clamp: bool = True) -> np.ndarray:
    """Harmonic function equal to ``values`` on the ``fixed`` mask.

    With ``clamp`` the free values are clipped to the range of the fixed data;
    by the maximum principle this only removes round-off.
    """
    fixed = np.asarray(fixed, dtype=bool)
    f = np.asarray(values, dtype=float).copy()
    free = np.flatnonzero(~fixed)
    if free.size == 0:
        return f
    if not fixed.any():
        raise SingularSystem("no fixed vertices")
    L = laplacian(network).tocsr()
    A = L[free][:, free].tocsr()
    b = -(L[free][:, np.flatnonzero(fixed)] @ f[fixed])
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise SingularSystem(f"vertex {free[np.argmin(diag)]} has no neighbours")
    _check_reaches_fixed(network, fixed)
    precond = sp.diags(1.0 / diag)
    x0 = np.full(free.size, float(np.mean(f[fixed])))
    x, info = cg(A, b, x0=x0, rtol=CG_RTOL, atol=0.0, M=precond, maxiter=20 * free.size + 100)
    if info != 0:
        x = spsolve(A.tocsc(), b)
    f[free] = x
    if clamp:
        lo, hi = float(np.min(f[fixed])), float(np.max(f[fixed]))
        f[free] = np.clip(f[free], lo, hi)
    return f


def _check_reaches_fixed(network: ConductanceNetwork, fixed: np.ndarray) -> None:
    ncomp, labels = connected_components(network.conductance_matrix(), directed=False)
    if ncomp == 1:
        return
    touched = set(labels[fixed])
    bad = [v for v in range(network.vertex_count) if labels[v] not in touched]
    if bad:
        raise SingularSystem(f"vertex {bad[0]} lies in a component with no boundary vertex")


def solve_dirichlet(network: ConductanceNetwork, boundary_values, clamp: bool = True) -> np.ndarray:
    """Field equal to ``boundary_values`` on the boundary and harmonic inside.

    ``boundary_values`` is a length-``V`` array (interior entries ignored),
    one value per boundary vertex in increasing vertex order, or a mapping
    ``{vertex: value}`` covering the boundary.
    """
    fixed = network.absorbing
    vals = _as_vertex_values(network, boundary_values, fixed)
    vals[~fixed] = 0.0
    return harmonic_extension(network, fixed, vals, clamp=clamp)


def _normalize_classes(network: ConductanceNetwork, classes) -> dict:
    """``{label: [boundary vertices]}`` from a mapping or a per-vertex label sequence."""
    bdry = set(np.flatnonzero(network.absorbing).tolist())
    if isinstance(classes, Mapping):
        out = {k: sorted(int(v) for v in vs) for k, vs in classes.items()}
    else:
        out: dict = {}
        for v, lab in enumerate(classes):
            if lab is not None and v in bdry:
                out.setdefault(lab, []).append(v)
    seen: set[int] = set()
    for lab, vs in out.items():
        if not vs:
            raise ValueError(f"class {lab!r} is empty")
        for v in vs:
            if v not in bdry:
                raise ValueError(f"vertex {v} in class {lab!r} is not a boundary vertex")
            if v in seen:
                raise ValueError(f"vertex {v} is in two classes")
            seen.add(v)
    if seen != bdry:
        raise ValueError(f"boundary vertex {min(bdry - seen)} is not classed")
    return out


def escape_probabilities(network: ConductanceNetwork, start: int, classes) -> dict:
    """Probability that the walk from ``start`` is absorbed in each boundary class.

    Each value is the harmonic extension of the class indicator, evaluated
    at ``start``; the results are renormalized so they sum to 1 up to a
    final rounding.
    """
    if network.absorbing[start]:
        raise ValueError("start must be an interior vertex")
    parts = _normalize_classes(network, classes)
    probs = {}
    for lab, vs in parts.items():
        ind = np.zeros(network.vertex_count)
        ind[vs] = 1.0
        probs[lab] = float(solve_dirichlet(network, ind)[start])
    total = math.fsum(probs.values())
    return {lab: p / total for lab, p in probs.items()}


class _Sampler:
    """Row-wise inverse-CDF sampling of the transition matrix."""

    def __init__(self, network: ConductanceNetwork):
        P = network.transition_matrix()
        self.indptr = P.indptr
        self.indices = P.indices
        cum = np.empty_like(P.data)
        for v in range(P.shape[0]):
            lo, hi = P.indptr[v], P.indptr[v + 1]
            cum[lo:hi] = np.cumsum(P.data[lo:hi])
            cum[hi - 1] = 1.0
        self.cum = cum
        self.width = int(np.max(np.diff(P.indptr)))
        self.absorbing = network.absorbing

    def step(self, pos: np.ndarray, u: np.ndarray) -> np.ndarray:
        lo = self.indptr[pos]
        hi = self.indptr[pos + 1]
        choice = hi - 1
        undecided = np.ones(pos.size, dtype=bool)
        for j in range(self.width):
            k = np.minimum(lo + j, hi - 1)
            hit = undecided & (u < self.cum[k])
            choice = np.where(hit, k, choice)
            undecided &= ~hit
            if not undecided.any():
                break
        return self.indices[choice]


def _rng(seed: int) -> np.random.Generator:
    # Philox: counter-based, so a seed fixes the stream on every platform
    return np.random.Generator(np.random.Philox(seed))


def simulate(network: ConductanceNetwork, start: int, seed: int, max_steps: int = 10**6) -> WalkOutcome:
    """One walk from ``start`` until absorption or ``max_steps`` steps."""
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    sampler = _Sampler(network)
    rng = _rng(seed)
    pos = np.array([start])
    steps = 0
    while not sampler.absorbing[pos[0]]:
        if steps >= max_steps:
            return WalkOutcome(int(pos[0]), steps, seed, truncated=True)
        pos = sampler.step(pos, rng.random(1))
        steps += 1
    return WalkOutcome(int(pos[0]), steps, seed)


def monte_carlo_escape(network: ConductanceNetwork, start: int, classes, walks: int, seed: int,
                       max_steps: int | None = None, batch: int = 200_000) -> MonteCarloEscape:
    """Estimate escape probabilities from ``walks`` independent walks.

    Walks are simulated in batches of ``batch``; batch ``k`` uses the Philox
    stream ``seed + k``, so results depend only on ``(seed, walks, batch)``.
    Walks hitting ``max_steps`` (default ``10**9 // walks``) are counted as
    truncated and left out of the estimates.
    """
    parts = _normalize_classes(network, classes)
    label_of = np.full(network.vertex_count, -1)
    labels = list(parts)
    for k, lab in enumerate(labels):
        label_of[parts[lab]] = k
    if max_steps is None:
        max_steps = max(1, 10**9 // max(walks, 1))
    sampler = _Sampler(network)
    counts = np.zeros(len(labels), dtype=np.int64)
    truncated = 0
    done = 0
    k = 0
    while done < walks:
        m = min(batch, walks - done)
        rng = _rng(seed + k)
        pos = np.full(m, start, dtype=np.int64)
        alive = ~sampler.absorbing[pos]
        steps = 0
        while alive.any() and steps < max_steps:
            idx = np.flatnonzero(alive)
            pos[idx] = sampler.step(pos[idx], rng.random(idx.size))
            alive[idx] = ~sampler.absorbing[pos[idx]]
            steps += 1
        truncated += int(alive.sum())
        counts += np.bincount(label_of[pos[~alive]], minlength=len(labels))
        done += m
        k += 1
    absorbed = int(counts.sum())
    probs = {lab: counts[i] / absorbed for i, lab in enumerate(labels)} if absorbed else {}
    errs = {lab: math.sqrt(p * (1 - p) / absorbed) for lab, p in probs.items()}
    return MonteCarloEscape({lab: int(counts[i]) for i, lab in enumerate(labels)}, walks, truncated,
                            seed, probs, errs)


def dirichlet_energy(network: ConductanceNetwork, field) -> float:
    """``sum over edges of c(u, v) (f(u) - f(v))^2``."""
    f = np.asarray(field, dtype=float)
    u, v = network.edges.T
    return float(math.fsum(network.conductance * (f[u] - f[v]) ** 2))


def effective_resistance(network: ConductanceNetwork, source: int,
                         boundary: Iterable[int] | None = None) -> float:
    """Resistance between ``source`` and the grounded ``boundary`` set.

    The potential is 1 at ``source``, 0 on the boundary and harmonic
    elsewhere; the resistance is the reciprocal of the current leaving
    ``source``.
    """
    n = network.vertex_count
    ground = network.absorbing.copy() if boundary is None else np.zeros(n, dtype=bool)
    if boundary is not None:
        ground[list(boundary)] = True
    if ground[source]:
        raise ValueError("source must not be grounded")
    fixed = ground.copy()
    fixed[source] = True
    vals = np.zeros(n)
    vals[source] = 1.0
    f = harmonic_extension(network, fixed, vals, clamp=False)
    row = network.conductance_matrix().getrow(source)
    current = math.fsum(row.data * (1.0 - f[row.indices]))
    return 1.0 / current


def resistance_sweep(builder: Callable[[int], Complex], ns: Sequence[int]) -> list[tuple[int, float]]:
    """Simple-walk resistance from vertex 0 to the boundary for each ``builder(n)``."""
    return [(n, effective_resistance(simple_network(builder(n)), 0)) for n in ns]


def conductance_bounds(network: ConductanceNetwork, interior_only: bool = True) -> tuple[float, float]:
    """``(min c, max c)``, by default over edges flanked by two faces."""
    c = network.conductance
    if interior_only:
        c = c[network.interior_edge]
    if c.size == 0:
        raise ValueError("no edges to bound")
    return float(c.min()), float(c.max())


def empirical_kappa(network: ConductanceNetwork, interior_only: bool = True) -> float:
    """``max(max c, 1 / min c)``: the smallest kappa with every c in [1/kappa, kappa]."""
    lo, hi = conductance_bounds(network, interior_only)
    return max(hi, 1.0 / lo)
