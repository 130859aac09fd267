"""Interaction networks, interference features and dependency graphs.

Units are indexed ``0..N-1`` in the Python API. The on-disk edge-list format
is 1-based, matching the usual way networks are written down by hand.

The adjacency convention is ``I[i, j] = 1`` iff there is an edge ``i -> j``,
so the parents of unit ``i`` are the nonzero rows of column ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy import stats

from .errors import ConfigError, NoClosedFormError

# above this density the dependency graph is built with dense BLAS products
_DENSE_DENSITY = 0.02


class InteractionNetwork:
    """Directed interaction network over ``n_units`` units.

    Stored as a CSR adjacency matrix with 0/1 entries and no self-loops.
    """

    def __init__(self, adjacency):
        adj = sp.csr_matrix(adjacency, dtype=np.int8)
        if adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency matrix must be square")
        adj.sum_duplicates()
        adj.data[:] = 1
        adj.eliminate_zeros()
        if adj.diagonal().any():
            raise ValueError("interaction network has self-loops")
        self._adj = adj
        self._adj_t = adj.T.tocsr()
        self._second = None

    @classmethod
    def from_edges(cls, n_units: int, edges) -> "InteractionNetwork":
        edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                           dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n_units):
            raise IndexError(f"edge endpoint outside [0, {n_units})")
        data = np.ones(len(edges), dtype=np.int8)
        return cls(sp.coo_matrix((data, (edges[:, 0], edges[:, 1])), shape=(n_units, n_units)))

    @classmethod
    def empty(cls, n_units: int) -> "InteractionNetwork":
        return cls(sp.csr_matrix((n_units, n_units), dtype=np.int8))

    @property
    def n_units(self) -> int:
        return self._adj.shape[0]

    @property
    def adjacency(self) -> sp.csr_matrix:
        return self._adj

    @property
    def n_edges(self) -> int:
        return int(self._adj.nnz)

    def edges(self) -> np.ndarray:
        coo = self._adj.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return np.column_stack([coo.row[order], coo.col[order]]).astype(np.int64)

    def in_degree(self) -> np.ndarray:
        return np.diff(self._adj_t.indptr)

    def out_degree(self) -> np.ndarray:
        return np.diff(self._adj.indptr)

    def _check_unit(self, i):
        if not 0 <= i < self.n_units:
            raise IndexError(f"unit {i} outside [0, {self.n_units})")

    def parents(self, i: int) -> np.ndarray:
        self._check_unit(i)
        return self._adj_t.indices[self._adj_t.indptr[i]:self._adj_t.indptr[i + 1]]

    def parent_matrix(self) -> sp.csr_matrix:
        """``A[i, j] = 1`` iff ``j`` is a parent of ``i``."""
        return self._adj_t

    def second_order_matrix(self) -> sp.csr_matrix:
        """``A[i, j] = 1`` iff ``j != i`` and ``j -> l -> i`` for some ``l``."""
        if self._second is None:
            a = self._adj_t.astype(np.int32)
            two = (a @ a).tocsr()
            two.setdiag(0)
            two.eliminate_zeros()
            two.data[:] = 1
            self._second = two.astype(np.int8)
        return self._second

    def __eq__(self, other):
        if not isinstance(other, InteractionNetwork):
            return NotImplemented
        return self.n_units == other.n_units and (self._adj != other._adj).nnz == 0

    def __repr__(self):
        return f"InteractionNetwork(n_units={self.n_units}, n_edges={self.n_edges})"


def parents_set(net: InteractionNetwork, i: int) -> set[int]:
    return set(net.parents(i).tolist())


def second_order_set(net: InteractionNetwork, i: int) -> set[int]:
    net._check_unit(i)
    two = net.second_order_matrix()
    return set(two.indices[two.indptr[i]:two.indptr[i + 1]].tolist())


# --- features ------------------------------------------------------------

def _fraction(affect: sp.csr_matrix, w: np.ndarray, fill: float) -> np.ndarray:
    counts = affect @ w
    size = np.diff(affect.indptr).astype(float)
    if w.ndim == 2:
        size = size[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = counts / size
    return np.where(size > 0, out, fill)


def _binomial_mean(sizes: np.ndarray, theta: float, fill: float) -> np.ndarray:
    return np.where(sizes > 0, theta, fill)


@dataclass(frozen=True)
class FracTreatedParents:
    """Fraction of treated parents; ``fill`` for units without parents."""

    fill: float = 0.0
    name = "frac-parents"

    def affectors(self, net):
        return net.parent_matrix()

    def evaluate(self, net, w):
        return _fraction(net.parent_matrix(), w, self.fill)

    def expectation(self, net, theta):
        return _binomial_mean(np.diff(net.parent_matrix().indptr), theta, self.fill)


@dataclass(frozen=True)
class FracTreatedParentsOfParents:
    """Fraction of treated units two steps upstream (excluding the unit itself)."""

    fill: float = 0.0
    name = "frac-parents-of-parents"

    def affectors(self, net):
        return net.second_order_matrix()

    def evaluate(self, net, w):
        return _fraction(net.second_order_matrix(), w, self.fill)

    def expectation(self, net, theta):
        return _binomial_mean(np.diff(net.second_order_matrix().indptr), theta, self.fill)


@dataclass(frozen=True)
class ThresholdTreatedParents:
    """Indicator that at least ``threshold`` of the parents are treated."""

    threshold: float = 0.5
    fill: float = 0.0
    name = "threshold-parents"

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")

    def _needed(self, sizes):
        # smallest count k with k / size >= threshold, robust to float noise
        return np.ceil(self.threshold * sizes - 1e-9)

    def affectors(self, net):
        return net.parent_matrix()

    def evaluate(self, net, w):
        affect = net.parent_matrix()
        counts = affect @ w
        sizes = np.diff(affect.indptr).astype(float)
        need = self._needed(sizes)
        if w.ndim == 2:
            sizes, need = sizes[:, None], need[:, None]
        return np.where(sizes > 0, (counts >= need).astype(float), self.fill)

    def expectation(self, net, theta):
        sizes = np.diff(net.parent_matrix().indptr)
        tail = stats.binom.sf(self._needed(sizes) - 1, sizes, theta)
        return np.where(sizes > 0, tail, self.fill)


@dataclass(frozen=True)
class CustomFeature:
    """User-defined feature with an explicitly declared affector map.

    Parameters
    ----------
    affector_fn : net -> sparse (N, N) 0/1 matrix, ``A[i, j] = 1`` iff the
        treatment of ``j`` enters the feature of ``i``. The diagonal must be 0.
    evaluate_fn : (net, w) -> feature values. ``w`` is either a length-N
        vector or an (N, B) batch of treatment vectors.
    expectation_fn : optional (net, theta) -> per-unit expectation under iid
        Bernoulli(theta) treatments.
    """

    name: str
    affector_fn: Callable = field(compare=False)
    evaluate_fn: Callable = field(compare=False)
    expectation_fn: Callable | None = field(default=None, compare=False)

    def affectors(self, net):
        a = sp.csr_matrix(self.affector_fn(net), dtype=np.int8)
        if a.diagonal().any():
            raise ValueError(f"feature {self.name!r}: a unit cannot affect its own feature")
        return a

    def evaluate(self, net, w):
        if w.ndim == 2:
            return np.column_stack([np.asarray(self.evaluate_fn(net, w[:, b]), dtype=float)
                                    for b in range(w.shape[1])])
        return np.asarray(self.evaluate_fn(net, w), dtype=float)

    def expectation(self, net, theta):
        if self.expectation_fn is None:
            raise NoClosedFormError(f"feature {self.name!r} has no closed-form expectation")
        return np.asarray(self.expectation_fn(net, theta), dtype=float)


FEATURE_KINDS = {
    "frac-parents": FracTreatedParents,
    "frac-parents-of-parents": FracTreatedParentsOfParents,
    "threshold-parents": ThresholdTreatedParents,
}


@dataclass(frozen=True)
class FeatureSpec:
    """Ordered list of interference features ``h^1..h^P``."""

    kinds: tuple

    def __post_init__(self):
        if len(self.kinds) < 1:
            raise ValueError("a feature spec needs at least one feature")
        object.__setattr__(self, "kinds", tuple(self.kinds))

    @classmethod
    def parse(cls, names) -> "FeatureSpec":
        """Build from names such as ``"frac-parents"`` or ``"threshold-parents:0.5"``."""
        if isinstance(names, str):
            names = [n for n in names.split(",") if n]
        kinds = []
        for entry in names:
            kind, _, arg = entry.strip().partition(":")
            if kind not in FEATURE_KINDS:
                raise ConfigError(f"unknown feature kind {kind!r}; choose from {sorted(FEATURE_KINDS)}")
            kinds.append(FEATURE_KINDS[kind](float(arg)) if arg else FEATURE_KINDS[kind]())
        return cls(tuple(kinds))

    @property
    def n_features(self) -> int:
        return len(self.kinds)

    @property
    def names(self) -> list[str]:
        return [k.name for k in self.kinds]

    def affector_matrix(self, net: InteractionNetwork) -> sp.csr_matrix:
        """Union of the features' affector sets: ``A[i, j] = 1`` iff ``W_j`` enters ``X_i``."""
        total = sp.csr_matrix((net.n_units, net.n_units), dtype=np.int32)
        for k in self.kinds:
            total = total + k.affectors(net).astype(np.int32)
        total = total.tocsr()
        total.data[:] = 1
        return total.astype(np.int8)


def _check_treatment(net, w):
    w = np.asarray(w)
    if w.shape[0] != net.n_units:
        raise ValueError(f"treatment vector has {w.shape[0]} entries, network has {net.n_units} units")
    if not np.isin(w, (0, 1)).all():
        raise ValueError("treatments must be 0/1")
    return w.astype(float)


def compute_features(net: InteractionNetwork, w, spec: FeatureSpec) -> np.ndarray:
    """Feature matrix of shape (N, P); with an (N, B) batch, shape (N, P, B)."""
    w = _check_treatment(net, w)
    cols = [np.asarray(k.evaluate(net, w), dtype=float) for k in spec.kinds]
    return np.stack(cols, axis=1)


# --- dependency graph ----------------------------------------------------

class DependencyGraph:
    """Symmetric 0/1 adjacency with zero diagonal; dense or sparse storage."""

    def __init__(self, matrix):
        if sp.issparse(matrix):
            m = sp.csr_matrix(matrix, dtype=bool)
            m.setdiag(False)
            m.eliminate_zeros()
        else:
            m = np.asarray(matrix, dtype=bool).copy()
            np.fill_diagonal(m, False)
        self._m = m

    @property
    def n_units(self) -> int:
        return self._m.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self._m)

    def degrees(self) -> np.ndarray:
        if self.is_sparse:
            return np.diff(self._m.indptr)
        return self._m.sum(axis=1)

    def to_dense(self) -> np.ndarray:
        return self._m.toarray() if self.is_sparse else self._m.copy()

    def edges(self) -> list[tuple[int, int]]:
        coo = sp.coo_matrix(self._m)
        return sorted((int(i), int(j)) for i, j in zip(coo.row, coo.col) if i < j)

    def is_symmetric(self) -> bool:
        if self.is_sparse:
            return (self._m != self._m.T).nnz == 0
        return bool((self._m == self._m.T).all())


def dependency_graph(net: InteractionNetwork, spec: FeatureSpec) -> DependencyGraph:
    """Interference dependency graph from the features' affector sets.

    Units ``i != j`` are joined iff ``j`` affects ``X_i``, ``i`` affects
    ``X_j``, or a third unit affects both. Affector sets never contain the
    unit itself, so shared affectors are automatically outside ``{i, j}``.
    """
    a = spec.affector_matrix(net)
    n = net.n_units
    if n and a.nnz / (n * n) > _DENSE_DENSITY:
        ad = a.toarray().astype(np.float32)
        d = (ad @ ad.T) + ad + ad.T
        return DependencyGraph(d > 0)
    a32 = a.astype(np.int32)
    d = (a32 @ a32.T) + a32 + a32.T
    return DependencyGraph(d)


def max_degree(d: DependencyGraph) -> int:
    degrees = d.degrees()
    return int(degrees.max()) if degrees.size else 0


@dataclass
class SlopeResult:
    sizes: np.ndarray
    avg_max_degree: np.ndarray
    slope: float
    intercept: float
    max_degrees: np.ndarray  # (n_sizes, reps)


def loglog_slope(x, y) -> tuple[float, float]:
    """Least-squares slope and intercept of ``log y`` on ``log x``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.unique(x).size < 2:
        raise ValueError("need at least two distinct sizes to fit a slope")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def _dmax_cell(args):
    generator, spec, n, rep, seed = args
    rng = np.random.default_rng([seed, n, rep])
    return max_degree(dependency_graph(generator(n, rng), spec))


def degree_scaling_slope(generator: Callable, spec: FeatureSpec, sizes: Sequence[int],
                         reps: int, seed: int = 0, n_jobs: int = 1) -> SlopeResult:
    """Average maximal dependency-graph degree per size and its log-log slope.

    ``generator(n, rng)`` must return an :class:`InteractionNetwork`. Each
    (size, rep) cell uses its own stream seeded by ``(seed, n, rep)``.
    """
    sizes = [int(n) for n in sizes]
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if sorted(sizes) != sizes:
        raise ValueError("sizes must be ascending")
    cells = [(generator, spec, n, r, seed) for n in sizes for r in range(reps)]
    if n_jobs == 1:
        values = [_dmax_cell(c) for c in cells]
    else:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(n_jobs) as pool:
            values = list(pool.map(_dmax_cell, cells, chunksize=max(1, reps // 4)))
    dm = np.asarray(values, dtype=float).reshape(len(sizes), reps)
    avg = dm.mean(axis=1)
    slope, intercept = loglog_slope(sizes, avg)
    return SlopeResult(np.asarray(sizes), avg, slope, intercept, dm)


# --- file format ---------------------------------------------------------

def write_network(net: InteractionNetwork, path) -> None:
    """TSV edge list, 1-based, with a ``# n_units=N`` header."""
    lines = [f"# n_units={net.n_units}"]
    lines += [f"{i + 1}\t{j + 1}" for i, j in net.edges()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_network(path) -> InteractionNetwork:
    n_units = None
    edges = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line.lstrip("#").strip().partition("=")
            if key.strip() == "n_units":
                n_units = int(value)
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'i<TAB>j'")
        edges.append((int(parts[0]) - 1, int(parts[1]) - 1))
    if n_units is None:
        raise ValueError(f"{path}: missing '# n_units=N' header")
    return InteractionNetwork.from_edges(n_units, edges)


def degree_centrality_feature() -> CustomFeature:
    """Non-local feature ``T W`` with ``T_ij = |indeg(i) - indeg(j)|``.

    Every unit with a different in-degree affects every other unit, so the
    dependency graph is typically complete.
    """

    def affect(net):
        deg = net.in_degree()
        t = np.abs(deg[:, None] - deg[None, :])
        np.fill_diagonal(t, 0)
        return sp.csr_matrix(t > 0)

    def evaluate(net, w):
        deg = net.in_degree().astype(float)
        return np.abs(deg[:, None] - deg[None, :]) @ w

    def expectation(net, theta):
        deg = net.in_degree().astype(float)
        return np.abs(deg[:, None] - deg[None, :]).sum(axis=1) * theta

    return CustomFeature("degree-difference", affect, evaluate, expectation)


__all__ = [
    "InteractionNetwork", "FeatureSpec", "FracTreatedParents", "FracTreatedParentsOfParents",
    "ThresholdTreatedParents", "CustomFeature", "DependencyGraph", "SlopeResult",
    "parents_set", "second_order_set", "compute_features", "dependency_graph", "max_degree",
    "degree_scaling_slope", "loglog_slope", "read_network", "write_network",
    "degree_centrality_feature",
]
