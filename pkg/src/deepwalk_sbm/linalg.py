"""Small dense linear-algebra helpers: power-iteration norms and eigenspace projectors."""

from __future__ import annotations

import numpy as np

from .errors import EigensolverError, NumericalError


def _start_vectors(n: int) -> list[np.ndarray]:
    ones = np.ones(n) / np.sqrt(n)
    # fixed, non-random second start in case the first is (nearly) orthogonal to the top vector
    alt = np.cos(np.arange(1, n + 1) * 0.7548776662466927) + 0.5 / np.sqrt(n)
    return [ones, alt / np.linalg.norm(alt)]


def _power_norm(apply, n: int, tol: float, max_iter: int) -> float:
    best = 0.0
    for v in _start_vectors(n):
        est = 0.0
        for _ in range(max_iter):
            u = apply(v)
            nu = np.linalg.norm(u)
            if not np.isfinite(nu):
                raise NumericalError("power iteration produced non-finite values")
            if nu == 0.0:
                break
            v = u / nu
            if abs(nu - est) <= tol * max(nu, 1e-300):
                est = nu
                break
            est = nu
        best = max(best, est)
    return best


def spectral_norm(A: np.ndarray, tol: float = 1e-8, max_iter: int | None = None) -> float:
    """Largest singular value by power iteration on ``A^T A``.

    Deterministic: starts from the normalised all-ones vector and from one
    fixed perturbed vector, and keeps the larger estimate.  ``max_iter``
    defaults to ``10 * n``.
    """
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[1]
    if max_iter is None:
        max_iter = 10 * max(A.shape)
    if np.array_equal(A, A.T):
        # |lambda_max|^2 of A^2 equals sigma_max^2; iterate A twice per step
        sq = _power_norm(lambda v: A @ (A @ v), n, tol, max_iter)
    else:
        sq = _power_norm(lambda v: A.T @ (A @ v), n, tol, max_iter)
    return float(np.sqrt(sq))


def sym_eigh_desc(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a symmetric matrix, eigenvalues descending, signs fixed.

    Each eigenvector is flipped so that its first entry with magnitude above
    ``1e-12`` is positive.
    """
    try:
        vals, vecs = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(vecs))):
        raise EigensolverError("eigensolver returned non-finite values")
    vals = vals[::-1]
    vecs = vecs[:, ::-1].copy()
    for j in range(vecs.shape[1]):
        nz = np.flatnonzero(np.abs(vecs[:, j]) > 1e-12)
        if nz.size and vecs[nz[0], j] < 0:
            vecs[:, j] *= -1
    return vals, vecs


def projector_onto(basis: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the column span of ``basis``."""
    if basis.shape[1] == 0:
        return np.zeros((basis.shape[0], basis.shape[0]))
    Qb, _ = np.linalg.qr(basis)
    return Qb @ Qb.T


def projector_distance(P1: np.ndarray, P2: np.ndarray) -> float:
    """Spectral norm of the difference of two projectors (sine of the largest principal angle)."""
    return float(np.linalg.norm(P1 - P2, 2))
