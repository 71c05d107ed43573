"""Cluster structure of trained embeddings: spread, separation, recovery."""

from __future__ import annotations

import csv
import itertools
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.cluster.vq import kmeans2

from .errors import ValidationError

MAX_MATCH_K = 8


def _as_2d(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x[:, None] if x.ndim == 1 else x


@dataclass(frozen=True)
class ClusterReport:
    means: np.ndarray
    spread: float
    min_gap: float
    recovery: float
    bound_spread: float
    bound_gap: float

    @property
    def spread_ok(self) -> bool:
        return self.spread <= self.bound_spread

    @property
    def gap_ok(self) -> bool:
        return self.min_gap >= self.bound_gap


def cluster_means(x, labels) -> np.ndarray:
    """``K x d`` centroids (length-``K`` vector for 1-D input)."""
    X = _as_2d(x)
    labels = np.asarray(labels)
    K = int(labels.max()) + 1
    means = []
    for k in range(K):
        members = labels == k
        if not members.any():
            raise ValidationError(f"cluster {k} is empty")
        means.append(X[members].mean(axis=0))
    means = np.array(means)
    return means[:, 0] if np.ndim(x) == 1 else means


def cluster_report(x, labels, epsilon: float, delta: float, *, recovery_seed: int = 0) -> ClusterReport:
    """Within-cluster spread ``||x - mu||`` and minimum gap between cluster means.

    The reference bounds are ``5 ||x|| / delta`` for the spread and
    ``epsilon * delta / (20 K^2 sqrt(n))`` for the gap.  They are reported
    as flags, never enforced.
    """
    X = _as_2d(x)
    labels = np.asarray(labels)
    n = X.shape[0]
    if labels.shape != (n,):
        raise ValidationError("need one label per row")
    means = cluster_means(x, labels)
    M2 = _as_2d(means)
    K = M2.shape[0]
    spread = float(np.linalg.norm(X - M2[labels]))
    if K > 1:
        gaps = [np.linalg.norm(M2[i] - M2[j]) for i, j in itertools.combinations(range(K), 2)]
        min_gap = float(min(gaps))
    else:
        min_gap = 0.0
    return ClusterReport(
        means=means,
        spread=spread,
        min_gap=min_gap,
        recovery=recovery_fraction(x, labels, K, seed=recovery_seed),
        bound_spread=5.0 * float(np.linalg.norm(X)) / delta,
        bound_gap=epsilon * delta / (20.0 * K**2 * np.sqrt(n)),
    )


def gap_cut(x: np.ndarray, K: int) -> np.ndarray:
    """Split sorted 1-D values at the ``K - 1`` largest strictly positive gaps.

    Ties among equal gaps go to the leftmost one.  Fewer than ``K - 1``
    positive gaps produce fewer groups.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    order = np.argsort(x, kind="stable")
    gaps = np.diff(x[order])
    cand = np.flatnonzero(gaps > 0)
    # stable sort on -gap keeps the leftmost of equal gaps first
    cand = cand[np.argsort(-gaps[cand], kind="stable")][: K - 1]
    cuts = np.sort(cand)
    groups = np.searchsorted(cuts, np.arange(x.size), side="left")
    pred = np.empty(x.size, dtype=np.int64)
    pred[order] = groups
    return pred


def kmeans_labels(X: np.ndarray, K: int, seed: int = 0, restarts: int = 10) -> np.ndarray:
    """Lowest-inertia k-means++ solution over ``restarts`` seeded runs."""
    best, best_inertia = None, np.inf
    for r in range(restarts):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cents, lab = kmeans2(X, K, minit="++", seed=np.random.default_rng([seed, r]))
        inertia = float(np.sum((X - cents[lab]) ** 2))
        if inertia < best_inertia:
            best, best_inertia = lab, inertia
    return best


def threshold_labels(x, labels) -> np.ndarray:
    """Assign every point to the nearest ground-truth cluster mean."""
    X = _as_2d(x)
    M = _as_2d(cluster_means(X, labels))
    d2 = ((X[:, None, :] - M[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def best_permutation_accuracy(pred, labels, K: int) -> float:
    """Largest fraction of agreeing nodes over all relabellings of ``pred``."""
    if K > MAX_MATCH_K:
        raise ValidationError(f"exhaustive matching supports K <= {MAX_MATCH_K}, got {K}")
    pred = np.asarray(pred)
    labels = np.asarray(labels)
    confusion = np.zeros((K, K), dtype=np.int64)
    np.add.at(confusion, (pred, labels), 1)
    rows = np.arange(K)
    best = max(confusion[rows, list(perm)].sum() for perm in itertools.permutations(range(K)))
    return best / labels.size


def recovery_fraction(x, labels, K: int, *, mode: str = "cluster", seed: int = 0) -> float:
    """Fraction of nodes recovered under the best label permutation.

    ``mode="cluster"`` clusters without ground truth: gap cut for 1-D input,
    k-means with 10 seeded restarts otherwise.  ``mode="threshold"`` assigns
    each node to the nearest true cluster mean.
    """
    if K > MAX_MATCH_K:
        raise ValidationError(f"exhaustive matching supports K <= {MAX_MATCH_K}, got {K}")
    X = _as_2d(x)
    if mode == "threshold":
        pred = threshold_labels(X, labels)
    elif mode != "cluster":
        raise ValidationError(f"unknown recovery mode {mode!r}")
    elif X.shape[1] == 1:
        pred = gap_cut(X[:, 0], K)
    else:
        pred = kmeans_labels(X, K, seed=seed)
    return best_permutation_accuracy(pred, labels, K)


def trajectory_distance(run_a, run_b) -> np.ndarray:
    """``||x_a^(t) - x_b^(t)||`` per iteration; both runs need recorded states."""
    sa, sb = run_a.states, run_b.states
    if not sa or not sb:
        raise ValidationError("both trajectories must be recorded with record_states=True")
    if len(sa) != len(sb):
        raise ValidationError(f"iteration counts differ: {len(sa)} vs {len(sb)}")
    out = np.empty(len(sa))
    for t, (a, b) in enumerate(zip(sa, sb)):
        if a.X.shape != b.X.shape:
            raise ValidationError(f"shape mismatch at iteration {t}")
        out[t] = np.linalg.norm(a.X - b.X)
    return out


REPORT_HEADER = (
    "seed", "n", "K", "p", "q", "d", "spread", "bound_spread",
    "min_gap", "bound_gap", "recovery", "t_f",
)


def write_report_rows(path: str | Path, rows) -> None:
    """Write ``ClusterReport`` rows; each row is a dict keyed by ``REPORT_HEADER``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for row in rows:
            writer.writerow([_cell(row[k]) for k in REPORT_HEADER])


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)
