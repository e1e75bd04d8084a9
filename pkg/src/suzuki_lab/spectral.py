"""Cayley graphs, expansion of explicit vertex sets, and extremal eigenvalues.

The graph operator is the walk operator (adjacency divided by the degree),
applied matrix-free from a neighbour table: ``(A v)[i] = mean_s v[i s]``.
Eigenvalues come from ``scipy.sparse.linalg.eigsh`` on a ``LinearOperator``
with the constant vector (and any vectors already found) projected out.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from suzuki_lab.errors import CapacityError, FieldMismatchError
from suzuki_lab.seeding import rng_for
from suzuki_lab.suzuki import GroupIndex
from suzuki_lab.walks import GeneratorPair

logger = logging.getLogger(__name__)

DENSE_ORACLE_LIMIT = 64
DEFAULT_TOL = 1e-10
PENALTY = 10.0


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CayleyGraph:
    """Vertices 0..n-1; ``table[i, j]`` is the j-th neighbour of vertex i."""

    label: str
    table: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.table)

    @property
    def degree(self) -> int:
        return self.table.shape[1]

    def apply(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v)[self.table].mean(axis=1)

    def adjacency(self) -> csr_matrix:
        n, k = self.table.shape
        rows = np.repeat(np.arange(n), k)
        return csr_matrix((np.full(n * k, 1.0 / k), (rows, self.table.ravel())), shape=(n, n))

    def is_connected(self) -> bool:
        count, _ = connected_components(self.adjacency(), directed=True, connection="strong")
        return count == 1

    def neighbours(self, vertices: np.ndarray) -> np.ndarray:
        return np.unique(self.table[vertices].ravel())


def build_cayley(index: GroupIndex, pair: GeneratorPair) -> CayleyGraph:
    if pair.field != index.field:
        msg = f"pair from Sz({pair.field.q}) is not in the indexed Sz({index.q})"
        raise FieldMismatchError(msg)
    return CayleyGraph(f"Cay(Sz({index.q}), {pair.provenance})", index.generator_table(pair.a, pair.b))


def cyclic_cayley(n: int, steps: Sequence[int]) -> CayleyGraph:
    """Cayley graph of Z/n with step multiset ``steps`` (must be symmetric)."""
    residues = sorted(s % n for s in steps)
    if residues != sorted((-s) % n for s in steps):
        msg = f"step set {tuple(steps)} is not closed under negation mod {n}"
        raise ValueError(msg)
    table = (np.arange(n)[:, None] + np.asarray(steps)[None, :]) % n
    return CayleyGraph(f"Cay(Z/{n}, {tuple(steps)})", table.astype(np.int64))


def dense_spectrum(graph: CayleyGraph) -> np.ndarray:
    """All eigenvalues of the normalised adjacency, ascending (small graphs only)."""
    if graph.size > DENSE_ORACLE_LIMIT:
        msg = f"dense eigensolve limited to {DENSE_ORACLE_LIMIT} vertices, graph has {graph.size}"
        raise CapacityError(msg, limit=DENSE_ORACLE_LIMIT, hint="use second_eigenvalue")
    return np.linalg.eigvalsh(graph.adjacency().toarray())


# ---------------------------------------------------------------------------
# Expansion of explicit sets
# ---------------------------------------------------------------------------


def _as_vertex_array(graph: CayleyGraph, A: Sequence[int] | np.ndarray) -> np.ndarray:
    arr = np.asarray(A)
    if arr.dtype == bool:
        arr = np.flatnonzero(arr)
    arr = np.unique(arr.astype(np.int64))
    if len(arr) == 0:
        msg = "expansion of the empty set is undefined"
        raise ValueError(msg)
    if arr[0] < 0 or arr[-1] >= graph.size:
        msg = f"vertex out of range 0..{graph.size - 1}"
        raise IndexError(msg)
    return arr


@dataclass(frozen=True)
class VertexExpansion:
    size: int
    boundary: int
    oversized: bool

    @property
    def ratio(self) -> float:
        return self.boundary / self.size


def vertex_expansion(graph: CayleyGraph, A: Sequence[int] | np.ndarray) -> VertexExpansion:
    """|dA| / |A| with dA the vertices outside A adjacent to A."""
    arr = _as_vertex_array(graph, A)
    outside = np.setdiff1d(graph.neighbours(arr), arr, assume_unique=True)
    return VertexExpansion(len(arr), len(outside), len(arr) > graph.size // 2)


@dataclass(frozen=True)
class EdgeFormExpansion:
    size: int
    symmetric_difference: int
    grown_size: int
    oversized: bool

    @property
    def ratio(self) -> float:
        """|A sym-diff AS| / |A|."""
        return self.symmetric_difference / self.size

    @property
    def growth(self) -> float:
        """|A S'| / |A| with S' = S and the identity."""
        return self.grown_size / self.size


def edge_form_expansion(graph: CayleyGraph, A: Sequence[int] | np.ndarray) -> EdgeFormExpansion:
    arr = _as_vertex_array(graph, A)
    image = graph.neighbours(arr)
    sym = len(np.setxor1d(arr, image, assume_unique=True))
    grown = len(np.union1d(arr, image))
    return EdgeFormExpansion(len(arr), sym, grown, len(arr) > graph.size // 2)


@dataclass(frozen=True)
class SweepCut:
    vertices: np.ndarray = field(repr=False)
    expansion: float

    @property
    def size(self) -> int:
        return len(self.vertices)


def sweep_cut(graph: CayleyGraph, vector: np.ndarray) -> SweepCut:
    """Prefix (size <= n/2) of the vertices sorted by (value, index) with least |A sym-diff AS|/|A|.

    Equal ratios keep the shorter prefix.  A constant vector gives no
    ordering to sweep along, so it yields the single lowest-index vertex.
    """
    vector = np.asarray(vector, dtype=np.float64)
    if vector.shape != (graph.size,):
        msg = f"sweep vector has shape {vector.shape}, expected ({graph.size},)"
        raise ValueError(msg)
    order = np.lexsort((np.arange(graph.size), vector))
    limit = 1 if np.all(vector == vector[0]) else max(1, graph.size // 2)
    in_a = np.zeros(graph.size, dtype=bool)
    hits = np.zeros(graph.size, dtype=np.int64)
    image_size = 0
    overlap = 0
    best_ratio = math.inf
    best_k = 1
    for k, u in enumerate(order[:limit], start=1):
        in_a[u] = True
        if hits[u]:
            overlap += 1
        for v in graph.table[u]:
            hits[v] += 1
            if hits[v] == 1:
                image_size += 1
                if in_a[v]:
                    overlap += 1
        ratio = (k + image_size - 2 * overlap) / k
        if ratio < best_ratio:
            best_ratio, best_k = ratio, k
    return SweepCut(np.sort(order[:best_k]), best_ratio)


# ---------------------------------------------------------------------------
# Eigenvalues
# ---------------------------------------------------------------------------


class SolveStatus(StrEnum):
    CONVERGED = "converged"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EigenEstimate:
    value: float
    residual: float
    matvecs: int
    status: SolveStatus
    vector: np.ndarray | None = field(default=None, repr=False)


def _projector(n: int, found: Sequence[np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    basis = [np.full(n, 1.0 / math.sqrt(n)), *found]
    Q = np.stack(basis, axis=1)

    def project(x: np.ndarray) -> np.ndarray:
        return x - Q @ (Q.T @ x)

    return project


def _extreme(
    graph: CayleyGraph,
    which: str,
    found: Sequence[np.ndarray],
    *,
    tol: float,
    max_iter: int,
    seed: int,
    transform: Callable[[np.ndarray], np.ndarray] | None = None,
) -> EigenEstimate:
    """Extremal eigenpair of the (optionally transformed) operator on the complement of
    the constants and of ``found``.

    Excluded directions are moved to the far end of the spectrum (eigenvalue
    -PENALTY for "LA", +PENALTY for "SA"); every application re-orthogonalises.
    """
    n = graph.size
    project = _projector(n, found)
    apply = transform or graph.apply
    shift = -PENALTY if which == "LA" else PENALTY
    matvecs = 0

    def matvec(x: np.ndarray) -> np.ndarray:
        nonlocal matvecs
        matvecs += 1
        x = np.ravel(x)
        px = project(x)
        return project(apply(px)) + shift * (x - px)

    op = LinearOperator((n, n), matvec=matvec, dtype=np.float64)
    v0 = project(rng_for(seed, "eigsh", which, len(found)).standard_normal(n))
    status = SolveStatus.CONVERGED
    try:
        vals, vecs = eigsh(op, k=1, which=which, v0=v0, tol=tol, maxiter=max_iter)
    except ArpackNoConvergence as exc:
        status = SolveStatus.INCONCLUSIVE
        if len(exc.eigenvalues) == 0:
            return EigenEstimate(math.nan, math.inf, matvecs, status)
        vals, vecs = exc.eigenvalues[:1], exc.eigenvectors[:, :1]
    v = project(vecs[:, 0])
    v /= np.linalg.norm(v)
    lam = float(v @ apply(v))
    residual = float(np.linalg.norm(apply(v) - lam * v))
    if residual > max(1e3 * tol, 1e-8):
        status = SolveStatus.INCONCLUSIVE
    return EigenEstimate(lam, residual, matvecs, status, v)


def top_eigenpair(graph: CayleyGraph) -> EigenEstimate:
    """The trivial eigenpair: eigenvalue 1 on the constant vector."""
    v = np.full(graph.size, 1.0 / math.sqrt(graph.size))
    residual = float(np.linalg.norm(graph.apply(v) - v))
    return EigenEstimate(1.0, residual, 1, SolveStatus.CONVERGED, v)


@dataclass(frozen=True)
class SecondEigenvalue:
    lambda2: EigenEstimate
    lambda_min: EigenEstimate

    @property
    def max_modulus(self) -> float:
        return max(self.lambda2.value, abs(self.lambda_min.value))

    @property
    def converged(self) -> bool:
        return (
            self.lambda2.status is SolveStatus.CONVERGED
            and self.lambda_min.status is SolveStatus.CONVERGED
        )


def second_eigenvalue(
    graph: CayleyGraph, tol: float = DEFAULT_TOL, max_iter: int = 10_000, seed: int = 0
) -> SecondEigenvalue:
    """Largest and smallest eigenvalues orthogonal to the constants."""
    lam2 = _extreme(graph, "LA", [], tol=tol, max_iter=max_iter, seed=seed)
    lam_min = _extreme(graph, "SA", [], tol=tol, max_iter=max_iter, seed=seed + 1)
    logger.debug("%s: lambda2=%.12f lambda_min=%.12f", graph.label, lam2.value, lam_min.value)
    return SecondEigenvalue(lam2, lam_min)


@dataclass(frozen=True)
class MultiplicityProbe:
    target: float
    count: int
    eigenvalues: list[float]
    exhausted: bool

    @property
    def is_lower_bound(self) -> bool:
        return self.exhausted


def multiplicity_probe(
    graph: CayleyGraph,
    lam: float,
    tol: float = 1e-6,
    count_budget: int = 32,
    *,
    seed: int = 0,
    max_iter: int = 10_000,
) -> MultiplicityProbe:
    """Count eigenvalues within ``tol`` of ``lam`` by repeated deflated solves.

    Each round finds the eigenvalue of (A - lam)^2 closest to zero on the
    complement of the constants and of every vector found so far; the count
    stops at the first eigenvalue outside the window or at ``count_budget``;
    ``exhausted`` is set only when the budget, not the graph size, ended it.
    """
    found: list[np.ndarray] = []
    values: list[float] = []

    def squared(x: np.ndarray) -> np.ndarray:
        y = graph.apply(x) - lam * x
        return -(graph.apply(y) - lam * y)

    budget = min(count_budget, graph.size - 1)
    for r in range(budget):
        est = _extreme(graph, "LA", found, tol=tol * tol, max_iter=max_iter, seed=seed + r, transform=squared)
        if est.vector is None:
            break
        v = est.vector
        value = float(v @ graph.apply(v))
        if abs(value - lam) > tol:
            return MultiplicityProbe(lam, len(values), values, exhausted=False)
        found.append(v)
        values.append(value)
    return MultiplicityProbe(lam, len(values), values, exhausted=len(values) >= count_budget)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralReport:
    graph: str
    vertices: int
    degree: int
    connected: bool
    lambda2: float
    lambda_min: float
    residual_lambda2: float
    residual_lambda_min: float
    residual_top: float
    matvecs: int
    converged: bool
    multiplicity: int
    multiplicity_exhausted: bool
    sweep_expansion: float

    @property
    def spectral_gap(self) -> float:
        return 1.0 - max(self.lambda2, abs(self.lambda_min))

    def within_bounds(self, tol: float = 1e-8) -> bool:
        return all(-1 - tol <= x <= 1 + tol for x in (self.lambda2, self.lambda_min))


def spectral_report(
    graph: CayleyGraph,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = 10_000,
    seed: int = 0,
    probe_budget: int = 16,
    probe_tol: float = 1e-6,
    dump_to: Path | None = None,
) -> SpectralReport:
    second = second_eigenvalue(graph, tol, max_iter, seed)
    probe = multiplicity_probe(
        graph, second.lambda2.value, probe_tol, probe_budget, seed=seed + 100, max_iter=max_iter
    )
    vec = second.lambda2.vector
    sweep = sweep_cut(graph, vec if vec is not None else np.zeros(graph.size))
    if dump_to is not None and vec is not None:
        dump_vector(dump_to, vec)
    return SpectralReport(
        graph=graph.label,
        vertices=graph.size,
        degree=graph.degree,
        connected=graph.is_connected(),
        lambda2=second.lambda2.value,
        lambda_min=second.lambda_min.value,
        residual_lambda2=second.lambda2.residual,
        residual_lambda_min=second.lambda_min.residual,
        residual_top=top_eigenpair(graph).residual,
        matvecs=second.lambda2.matvecs + second.lambda_min.matvecs,
        converged=second.converged,
        multiplicity=probe.count,
        multiplicity_exhausted=probe.exhausted,
        sweep_expansion=sweep.expansion,
    )


def dump_vector(path: Path, vector: np.ndarray) -> Path:
    """Vertex-indexed little-endian float64 array."""
    path.parent.mkdir(parents=True, exist_ok=True)
    np.asarray(vector, dtype="<f8").tofile(path)
    return path
