"""Population co-occurrence, linearised update and concentration diagnostics.

Everything here is deterministic given its inputs.  The block values of the
expected co-occurrence matrix are written ``a`` (within block) and ``b``
(across blocks); ``gamma = n(a-b)/(2K)`` and ``theta = n(a-b)/K`` set the
growth scale of the cluster directions under the linear update.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError
from .linalg import projector_onto, spectral_norm, sym_eigh_desc
from .sbm import Graph, SbmParams, expected_adjacency
from .walks import CoocMatrix, WalkConfig, as_array, transition_matrix



def _window_mass(L: int, T: int) -> float:
    """``sum_{t=1..T} (L - t) = TL - T(T+1)/2``."""
    return T * L - T * (T + 1) / 2


def _ratio_sum(n: int, K: int, p: float, q: float, L: int, T: int) -> float:
    """``sum_t (L - t) ((p - q)/(p + (K-1) q))^t``."""
    ratio = (p - q) / (p + (K - 1) * q)
    return sum((L - t) * ratio**t for t in range(1, T + 1))


@dataclass(frozen=True)
class BlockValues:
    a: float
    b: float
    gamma: float
    theta: float


def _block_values(n: int, K: int, p: float, q: float, L: int, T: int) -> BlockValues:
    S1 = _window_mass(L, T)
    S = _ratio_sum(n, K, p, q, L, T)
    a = 2.0 / n**2 * (S1 + (K - 1) * S)
    b = 2.0 / n**2 * (S1 - S)
    diff = 2.0 * K / n**2 * S
    return BlockValues(a=a, b=b, gamma=n * diff / (2 * K), theta=n * diff / K)


def block_values(params: SbmParams, L: int, T: int) -> BlockValues:
    """Closed-form within/across block entries of the expected co-occurrence matrix."""
    WalkConfig(1, L, T)
    return _block_values(params.n, params.K, params.p, params.q, L, T)


def block_matrix(n: int, K: int, a: float, b: float) -> np.ndarray:
    B = np.full((K, K), b)
    np.fill_diagonal(B, a)
    return np.kron(B, np.ones((n // K, n // K)))


def expected_cooccurrence(params: SbmParams, L: int, T: int) -> CoocMatrix:
    """Population co-occurrence ``2 sum_t (L-t)/(n dbar) D_Abar Pbar^t``.

    The matrix-power result is checked entrywise against the ``a``/``b``
    block form before it is returned (symmetrised).
    """
    WalkConfig(1, L, T)
    Abar = expected_adjacency(params)
    dbar = params.expected_degree
    Pbar = transition_matrix(Abar)
    D = np.diag(Abar.sum(axis=1))
    acc = np.zeros_like(Abar)
    Pt = np.eye(params.n)
    for t in range(1, T + 1):
        Pt = Pt @ Pbar
        acc += 2.0 * (L - t) / (params.n * dbar) * (D @ Pt)
    bv = block_values(params, L, T)
    block = block_matrix(params.n, params.K, bv.a, bv.b)
    err = np.max(np.abs(acc - block))
    if err > 1e-10:
        raise NumericalError(f"expected co-occurrence deviates from block form by {err:.3e}")
    return CoocMatrix(0.5 * (acc + acc.T), "expected", {"r": "inf", "L": L, "T": T})


def cbar_spectrum(params: SbmParams, L: int, T: int) -> np.ndarray:
    """Eigenvalues of the expected co-occurrence matrix, descending."""
    WalkConfig(1, L, T)
    n, K = params.n, params.K
    lam = np.zeros(n)
    lam[0] = 2.0 / n * _window_mass(L, T)
    lam[1:K] = 2.0 / n * _ratio_sum(n, K, params.p, params.q, L, T)
    return lam


class LinearUpdate:
    """The linear part of one gradient step and its top eigenspace.

    ``M = D_C J/n - C`` and ``Lmat = [[I, -eta M], [-eta M^T, I]]``.  The
    projector onto the top ``K - 1`` eigenvectors of ``Lmat`` is computed on
    first access.  When those eigenvalues are not separated from the rest it
    falls back to the zero projector and warns.
    """

    def __init__(self, C, eta: float, K: int, *, gap_tol: float = 1e-12):
        C = as_array(C)
        if C.ndim != 2 or C.shape[0] != C.shape[1] or not np.allclose(C, C.T, atol=0, rtol=1e-12):
            raise ValidationError("C must be a symmetric square matrix")
        if eta <= 0:
            raise ValidationError(f"eta must be positive, got {eta}")
        if K < 2:
            raise ValidationError("need K >= 2 blocks")
        self.C = C
        self.eta = float(eta)
        self.K = int(K)
        self.gap_tol = gap_tol
        n = C.shape[0]
        self.n = n
        self.M = C.sum(axis=1)[:, None] / n - C
        I = np.eye(n)
        self.Lmat = np.block([[I, -eta * self.M], [-eta * self.M.T, I]])

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        return sym_eigh_desc(self.Lmat)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig[0]

    @cached_property
    def degenerate(self) -> bool:
        vals = self.eigenvalues
        k = self.K - 1
        return bool(vals[k - 1] - vals[k] <= self.gap_tol * max(1.0, abs(vals[0])))

    @cached_property
    def topProjector(self) -> np.ndarray:
        if self.degenerate:
            warnings.warn("top eigenspace of Lmat is degenerate; using the zero projector", stacklevel=2)
            return np.zeros_like(self.Lmat)
        V = self.eig[1][:, : self.K - 1]
        return V @ V.T

    def apply(self, W: np.ndarray) -> np.ndarray:
        return self.Lmat @ W


def build_linear_update(C, eta: float, K: int) -> LinearUpdate:
    return LinearUpdate(C, eta, K)


def cluster_contrast_projector(labels: np.ndarray, K: int) -> np.ndarray:
    """Projector onto ``span{[e_Vi - e_V1; e_Vi - e_V1] : i = 2..K}`` in R^{2n}."""
    labels = np.asarray(labels)
    e1 = (labels == 0).astype(float)
    cols = []
    for i in range(1, K):
        v = (labels == i).astype(float) - e1
        cols.append(np.concatenate([v, v]))
    return projector_onto(np.column_stack(cols))


def concentration_ratio(C_emp, C_bar, rho: float) -> float:
    """``||C - Cbar|| / (||Cbar|| sqrt(log n / n^rho))`` with spectral norms."""
    A, B = as_array(C_emp), as_array(C_bar)
    if A.shape != B.shape:
        raise ValidationError(f"shape mismatch {A.shape} vs {B.shape}")
    n = A.shape[0]
    scale = spectral_norm(B) * np.sqrt(np.log(n) / n**rho)
    return spectral_norm(A - B) / scale


def relative_deviation(C_emp, C_bar) -> float:
    """``||C - Cbar|| / ||Cbar||``."""
    A, B = as_array(C_emp), as_array(C_bar)
    if A.shape != B.shape:
        raise ValidationError(f"shape mismatch {A.shape} vs {B.shape}")
    return spectral_norm(A - B) / spectral_norm(B)


def transition_deviation_from_adjacency(A: np.ndarray, Abar: np.ndarray, t: int) -> float:
    if t < 1:
        raise ValidationError("t must be >= 1")
    P = transition_matrix(A)
    Pbar = transition_matrix(Abar)
    return spectral_norm(np.linalg.matrix_power(P, t) - np.linalg.matrix_power(Pbar, t))


def transition_deviation(graph: Graph, params: SbmParams, t: int) -> float:
    """``||P^t - Pbar^t||`` for a sampled graph against its expected graph."""
    graph.check_no_isolated()
    if graph.n != params.n:
        raise ValidationError("graph and params disagree on n")
    return transition_deviation_from_adjacency(graph.adjacency, expected_adjacency(params), t)


DIAGNOSTICS_HEADER = ("name", "n", "K", "p", "q", "value")


def append_diagnostics(path: str | Path, rows) -> None:
    """Append ``(name, n, K, p, q, value)`` rows, writing the header for a new file."""
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new:
            writer.writerow(DIAGNOSTICS_HEADER)
        for name, n, K, p, q, value in rows:
            writer.writerow([name, n, K, repr(float(p)), repr(float(q)), repr(float(value))])
