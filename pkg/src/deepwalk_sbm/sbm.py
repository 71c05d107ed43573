"""Symmetric stochastic block model: parameters, sampling, population objects.

Nodes are always laid out block-contiguously: block ``k`` owns the index
range ``[k * n/K, (k + 1) * n/K)``.  Sampled graphs never contain self-loops,
while the expected adjacency keeps the block value on its diagonal so that it
is exactly ``B kron J``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IsolatedNodeError, ValidationError

def _expected_degree(n: int, K: int, p: float, q: float) -> float:
    return (n / K) * p + (n * (K - 1) / K) * q


@dataclass(frozen=True)
class SbmParams:
    """Parameters of a symmetric SBM with ``K`` equal blocks.

    ``rho`` is metadata for the sparsity regime ``q >= n**(rho - 1)``; it is
    never enforced, only checked with a warning.
    """

    n: int
    K: int
    p: float
    q: float
    rho: float | None = None

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n <= 0:
            raise ValidationError(f"n must be a positive integer, got {self.n!r}")
        if int(self.K) != self.K or self.K < 2:
            raise ValidationError(f"K must be an integer >= 2, got {self.K!r}")
        if self.n % self.K != 0:
            raise ValidationError(f"K={self.K} does not divide n={self.n}")
        for name in ("p", "q"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")
        if self.p <= self.q:
            raise ValidationError(f"p must exceed q, got p={self.p}, q={self.q}")
        if self.rho is not None:
            if not 0.0 < self.rho < 1.0:
                raise ValidationError(f"rho must lie in (0, 1), got {self.rho!r}")
            floor = self.n ** (self.rho - 1.0)
            if self.q < floor:
                warnings.warn(
                    f"q={self.q:.4g} is below n^(rho-1)={floor:.4g}; outside the sparse regime",
                    stacklevel=3,
                )

    @property
    def block_size(self) -> int:
        return self.n // self.K

    @property
    def expected_degree(self) -> float:
        return _expected_degree(self.n, self.K, self.p, self.q)

    def labels(self) -> np.ndarray:
        return np.repeat(np.arange(self.K), self.block_size)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with block-contiguous community labels."""

    adjacency: np.ndarray
    labels: np.ndarray
    K: int
    _csr: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        A = np.asarray(self.adjacency)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError("adjacency must be a square matrix")
        if not np.array_equal(A, A.T):
            raise ValidationError("adjacency must be symmetric")
        if np.any(np.diag(A) != 0):
            raise ValidationError("self-loops are not allowed")
        if np.any((A != 0) & (A != 1)):
            raise ValidationError("adjacency must be 0/1")
        labels = np.asarray(self.labels)
        if labels.shape != (A.shape[0],):
            raise ValidationError("need one label per node")
        if labels.size and (labels.min() < 0 or labels.max() >= self.K):
            raise ValidationError(f"labels must lie in [0, {self.K})")
        A = A.astype(np.int8)
        A.setflags(write=False)
        labels = labels.astype(np.int64)
        labels.setflags(write=False)
        object.__setattr__(self, "adjacency", A)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_edges(cls, n: int, edges, labels=None, K: int = 1) -> "Graph":
        A = np.zeros((n, n), dtype=np.int8)
        for u, v in edges:
            A[u, v] = A[v, u] = 1
        if labels is None:
            labels = np.zeros(n, dtype=np.int64)
        return cls(A, np.asarray(labels), K)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1, dtype=np.int64)

    @property
    def num_edges(self) -> int:
        return int(self.degrees.sum()) // 2

    def edges(self) -> np.ndarray:
        """Edge list ``(u, v)`` with ``u < v``, sorted lexicographically."""
        u, v = np.nonzero(np.triu(self.adjacency, k=1))
        return np.column_stack([u, v])

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Neighbour lists as ``(indptr, indices)``, neighbours sorted ascending."""
        if self._csr is None:
            rows, cols = np.nonzero(self.adjacency)
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(rows, minlength=self.n), out=indptr[1:])
            object.__setattr__(self, "_csr", (indptr, cols.astype(np.int64)))
        return self._csr

    def check_no_isolated(self) -> None:
        isolated = np.flatnonzero(self.degrees == 0)
        if isolated.size:
            raise IsolatedNodeError(f"graph has isolated nodes: {isolated[:10].tolist()}")


def generate_sbm(params: SbmParams, seed: int) -> Graph:
    """Sample a graph from the symmetric SBM.

    Every unordered pair ``{i, j}`` with ``i != j`` is an edge independently
    with probability ``p`` if the labels match and ``q`` otherwise.

    Raises
    ------
    IsolatedNodeError
        If the sample contains a degree-0 node.  Retry with another seed.
    """
    rng = np.random.default_rng(seed)
    labels = params.labels()
    probs = np.where(labels[:, None] == labels[None, :], params.p, params.q)
    upper = np.triu(rng.random((params.n, params.n)) < probs, k=1)
    A = (upper | upper.T).astype(np.int8)
    graph = Graph(A, labels, params.K)
    graph.check_no_isolated()
    return graph


def expected_adjacency(params: SbmParams) -> np.ndarray:
    """``B kron J`` with ``p`` blocks on the diagonal and ``q`` elsewhere (diagonal included)."""
    B = np.full((params.K, params.K), params.q)
    np.fill_diagonal(B, params.p)
    return np.kron(B, np.ones((params.block_size, params.block_size)))


def expected_degree(params: SbmParams) -> float:
    return params.expected_degree


def write_graph(graph: Graph, path: str | Path) -> None:
    """Write the ``n K`` header, the label line and one ``u v`` edge per line."""
    lines = [f"{graph.n} {graph.K}", " ".join(str(int(c)) for c in graph.labels)]
    lines.extend(f"{u} {v}" for u, v in graph.edges())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_graph(path: str | Path) -> Graph:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if len(text) < 2:
        raise ValidationError(f"{path}: truncated graph file")
    try:
        n, K = (int(tok) for tok in text[0].split())
        labels = np.array([int(tok) for tok in text[1].split()], dtype=np.int64)
        A = np.zeros((n, n), dtype=np.int8)
        for line in text[2:]:
            if not line.strip():
                continue
            u, v = (int(tok) for tok in line.split())
            A[u, v] = A[v, u] = 1
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed graph file ({exc})") from exc
    return Graph(A, labels, K)
