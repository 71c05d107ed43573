"""Random walks, sliding-window co-occurrence counts and their r -> infinity limit.

Counting convention: every window pair ``(w_k, w_{k+t})`` is added in both
orders, so one walk contributes exactly ``2 * sum_{t=1..T} (L - t)`` to the
total mass.  Counts accumulate as int64 and the matrix is divided by ``r``
only at the end.

Walk ``m`` draws its ``L`` uniforms from its own generator seeded with
``(seed, m)``; the walks themselves are then advanced in lockstep with
vectorised numpy.  Any split of the walks across workers therefore yields
the same integer counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .sbm import Graph

KINDS = ("empirical-normalized", "limiting", "expected")


@dataclass(frozen=True)
class WalkConfig:
    r: int
    L: int
    T: int

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValidationError(f"need at least one walk, got r={self.r}")
        if self.L < 2:
            raise ValidationError(f"walk length L must be >= 2, got {self.L}")
        if self.T < 1:
            raise ValidationError(f"window T must be >= 1, got {self.T}")
        if self.T >= self.L:
            raise ValidationError(f"window T={self.T} must be smaller than L={self.L}")

    @property
    def pairs_per_walk(self) -> int:
        """Ordered co-occurrence pairs contributed by one walk, ``2 sum (L - t)``."""
        return 2 * (self.T * self.L - self.T * (self.T + 1) // 2)


@dataclass(frozen=True)
class CoocMatrix:
    values: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValidationError(f"unknown co-occurrence kind {self.kind!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValidationError("co-occurrence matrix must be square")
        if not np.array_equal(v, v.T):
            raise ValidationError("co-occurrence matrix must be exactly symmetric")
        if np.any(v < 0):
            raise ValidationError("co-occurrence entries must be non-negative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def scaled(self, factor: float) -> "CoocMatrix":
        return CoocMatrix(self.values * factor, self.kind, dict(self.meta))


def as_array(C) -> np.ndarray:
    """Accept a :class:`CoocMatrix` or a raw array."""
    return C.values if isinstance(C, CoocMatrix) else np.asarray(C, dtype=np.float64)


def _walk_uniforms(seed: int, walk_ids: np.ndarray, L: int) -> np.ndarray:
    U = np.empty((walk_ids.size, L))
    for row, m in enumerate(walk_ids):
        U[row] = np.random.default_rng([seed, int(m)]).random(L)
    return U


def _walks_from_uniforms(graph: Graph, U: np.ndarray) -> np.ndarray:
    """Turn a ``(walks, L)`` block of uniforms into node sequences.

    Column 0 picks the start from ``d_i / 2|E|``; column ``k`` picks neighbour
    ``floor(u * deg)`` of the current node in sorted neighbour order.
    """
    graph.check_no_isolated()
    indptr, indices = graph.csr()
    deg = np.diff(indptr)
    cdf = np.cumsum(deg) / deg.sum()
    W = np.empty(U.shape, dtype=np.int64)
    W[:, 0] = np.minimum(np.searchsorted(cdf, U[:, 0], side="right"), graph.n - 1)
    for k in range(1, U.shape[1]):
        cur = W[:, k - 1]
        offset = np.minimum((U[:, k] * deg[cur]).astype(np.int64), deg[cur] - 1)
        W[:, k] = indices[indptr[cur] + offset]
    return W


def sample_walks(graph: Graph, L: int, seed: int, walk_ids) -> np.ndarray:
    """Walks for the given ids, one row each; row ``m`` depends only on ``(seed, m)``."""
    walk_ids = np.atleast_1d(np.asarray(walk_ids, dtype=np.int64))
    return _walks_from_uniforms(graph, _walk_uniforms(seed, walk_ids, L))


def sample_walk(graph: Graph, L: int, seed: int) -> np.ndarray:
    """A single stationary-start walk of ``L`` nodes."""
    if L < 1:
        raise ValidationError("walk length must be positive")
    return sample_walks(graph, L, seed, [0])[0]


def count_pairs(walks: np.ndarray, n: int, T: int) -> np.ndarray:
    """Integer window counts of a walk block, before symmetrisation."""
    counts = np.zeros(n * n, dtype=np.int64)
    for t in range(1, T + 1):
        flat = walks[:, :-t] * n + walks[:, t:]
        counts += np.bincount(flat.ravel(), minlength=n * n)
    return counts.reshape(n, n)


def build_cooccurrence(
    graph: Graph, cfg: WalkConfig, seed: int, *, chunk: int = 4096
) -> CoocMatrix:
    """Empirical co-occurrence matrix ``C / r`` from ``cfg.r`` stationary walks."""
    n = graph.n
    counts = np.zeros((n, n), dtype=np.int64)
    # keep the uniform block near 32 MB regardless of L
    chunk = max(1, min(chunk, 4_000_000 // cfg.L))
    for start in range(0, cfg.r, chunk):
        ids = np.arange(start, min(cfg.r, start + chunk))
        counts += count_pairs(sample_walks(graph, cfg.L, seed, ids), n, cfg.T)
    counts = counts + counts.T
    meta = {"r": cfg.r, "L": cfg.L, "T": cfg.T, "seed": seed}
    return CoocMatrix(counts / cfg.r, "empirical-normalized", meta)


def transition_matrix(adjacency: np.ndarray) -> np.ndarray:
    A = np.asarray(adjacency, dtype=np.float64)
    deg = A.sum(axis=1)
    if np.any(deg <= 0):
        raise ValidationError("transition matrix undefined for zero-degree rows")
    return A / deg[:, None]


def limiting_cooccurrence(graph: Graph, L: int, T: int) -> CoocMatrix:
    """Almost-sure limit of ``C / r``: ``2 sum_t (L - t) pi_i (P^t)_ij``."""
    WalkConfig(1, L, T)
    graph.check_no_isolated()
    A = graph.adjacency.astype(np.float64)
    deg = A.sum(axis=1)
    pi = deg / deg.sum()
    P = A / deg[:, None]
    out = np.zeros_like(A)
    Pt = np.eye(graph.n)
    for t in range(1, T + 1):
        Pt = Pt @ P
        out += 2.0 * (L - t) * pi[:, None] * Pt
    out = 0.5 * (out + out.T)
    return CoocMatrix(out, "limiting", {"r": "inf", "L": L, "T": T})


def write_cooccurrence(C: CoocMatrix, path: str | Path) -> Path:
    """Dense CSV plus a ``.meta`` sidecar holding ``kind,r,L,T,seed``."""
    path = Path(path)
    rows = (",".join(repr(float(v)) for v in row) for row in C.values)
    path.write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")
    meta = [f"kind={C.kind}"] + [f"{k}={C.meta.get(k, '')}" for k in ("r", "L", "T", "seed")]
    sidecar = path.with_name(path.name + ".meta")
    sidecar.write_text(",".join(meta) + "\n", encoding="utf-8", newline="\n")
    return sidecar


def read_cooccurrence(path: str | Path) -> CoocMatrix:
    path = Path(path)
    values = np.array(
        [[float(tok) for tok in line.split(",")] for line in path.read_text().splitlines() if line]
    )
    sidecar = path.with_name(path.name + ".meta")
    meta: dict = {}
    kind = "empirical-normalized"
    if sidecar.exists():
        for item in sidecar.read_text().strip().split(","):
            key, _, val = item.partition("=")
            if key == "kind":
                kind = val
            elif val:
                meta[key] = int(val) if val.lstrip("-").isdigit() else val
    return CoocMatrix(values, kind, meta)
