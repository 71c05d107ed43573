"""Full-batch gradient descent on the DeepWalk softmax objective.

The iterate is the stacked matrix ``W = [X; Y]`` (``2n x d``).  One step is
the simultaneous block update

    X <- X - eta G Y,    Y <- Y - eta G^T X,    G = D_C Q - C,

with both right-hand sides evaluated at the old iterate.  Writing
``G = M + D_C (Q - J/n)`` splits the step into the linear map ``Lmat`` and an
error term ``E``; :func:`linear_step` keeps only the former.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError
from .theory import LinearUpdate
from .walks import as_array

log = logging.getLogger(__name__)

INIT_MODES = ("norm", "inf")


@dataclass(frozen=True)
class EmbeddingState:
    X: np.ndarray
    Y: np.ndarray
    iter: int = 0

    def __post_init__(self) -> None:
        if self.X.shape != self.Y.shape or self.X.ndim != 2:
            raise ValidationError(f"X and Y must be n x d with equal shapes, got {self.X.shape}, {self.Y.shape}")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.Y))):
            raise NumericalError(f"non-finite embedding at iteration {self.iter}")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def W(self) -> np.ndarray:
        return np.vstack([self.X, self.Y])

    @property
    def norm(self) -> float:
        """``||w||`` for d = 1, ``||W||_F`` otherwise."""
        m = max(float(np.abs(self.X).max(initial=0.0)), float(np.abs(self.Y).max(initial=0.0)))
        if m == 0.0:
            return 0.0
        # rescale first so huge iterates do not overflow the sum of squares
        return m * float(np.sqrt(np.sum((self.X / m) ** 2) + np.sum((self.Y / m) ** 2)))

    @classmethod
    def from_W(cls, W: np.ndarray, iter: int = 0) -> "EmbeddingState":
        n = W.shape[0] // 2
        return cls(W[:n], W[n:], iter)


@dataclass(frozen=True)
class TrainConfig:
    """Training parameters.  ``None`` fields are resolved from ``n`` by :meth:`resolve`.

    ``epsilon`` defaults to ``n**(-2/3)``, ``delta`` to ``n**(1/6)`` and
    ``max_iters`` to ``10 * ceil(4 log(n / delta) / eta)``.  ``iterations``
    switches from the norm stopping rule to a fixed number of steps.
    ``init_bound`` is the max-abs entry for ``init_mode="inf"``.
    """

    eta: float = 0.01
    epsilon: float | None = None
    delta: float | None = None
    max_iters: int | None = None
    init_mode: str = "norm"
    init_bound: float | None = None
    d: int = 1
    seed: int = 0
    iterations: int | None = None
    track_objective: bool = False
    track_projection: bool = True
    record_states: bool = False

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ValidationError(f"eta must be positive, got {self.eta}")
        if self.init_mode not in INIT_MODES:
            raise ValidationError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")
        if self.d < 1:
            raise ValidationError(f"d must be >= 1, got {self.d}")
        if self.iterations is not None and self.iterations < 0:
            raise ValidationError("iterations must be non-negative")

    def resolve(self, n: int) -> "TrainConfig":
        eps = n ** (-2.0 / 3.0) if self.epsilon is None else self.epsilon
        delta = n ** (1.0 / 6.0) if self.delta is None else self.delta
        max_iters = self.max_iters
        if max_iters is None:
            max_iters = 10 * math.ceil(4 * math.log(n / delta) / self.eta)
        bound = eps if self.init_bound is None else self.init_bound
        if 4 * (eps * delta) ** 2 >= 1:
            warnings.warn(f"4 (eps*Delta)^2 = {4 * (eps * delta) ** 2:.3g} >= 1; growth control not guaranteed", stacklevel=2)
        return replace(self, epsilon=eps, delta=delta, max_iters=max_iters, init_bound=bound)


@dataclass
class Trajectory:
    """Per-iteration record of one training run; ``len(norm_w) == t_f + 1``."""

    norm_w: list = field(default_factory=list)
    norm_z: list = field(default_factory=list)
    resid: list = field(default_factory=list)
    err_frob: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    means: list = field(default_factory=list)
    states: list = field(default_factory=list)
    t_f: int = 0
    reason: str = ""
    config: TrainConfig | None = None

    def __len__(self) -> int:
        return len(self.norm_w)

    def to_csv(self, path: str | Path, K: int | None = None) -> None:
        if K is None:
            K = len(self.means[0]) if self.means and self.means[0] is not None else 0
        header = ["iter", "norm_w", "norm_z", "resid", "err_frob", "objective"]
        header += [f"mu_{k + 1}" for k in range(K)]
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for t in range(len(self)):
                row = [t] + [
                    _fmt(col[t]) for col in (self.norm_w, self.norm_z, self.resid, self.err_frob, self.objective)
                ]
                mus = self.means[t] if self.means and self.means[t] is not None else []
                row += [_fmt(m) for m in mus]
                writer.writerow(row)


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v))


def _check_finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericalError("non-finite input")


def _scores(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    if X.shape != Y.shape:
        raise ValidationError(f"shape mismatch {X.shape} vs {Y.shape}")
    _check_finite(X, Y)
    with np.errstate(over="ignore", invalid="ignore"):
        S = X @ Y.T
    if not np.all(np.isfinite(S)):
        raise NumericalError("inner products overflowed")
    return S - S.max(axis=1, keepdims=True)


def _as_2d(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return v[:, None] if v.ndim == 1 else v


def softmax_matrix(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Row-stochastic ``Q_ij = exp(<x_i, y_j>) / sum_k exp(<x_i, y_k>)``."""
    E = np.exp(_scores(_as_2d(X), _as_2d(Y)))
    return E / E.sum(axis=1, keepdims=True)


def objective(C, X: np.ndarray, Y: np.ndarray) -> float:
    """``-sum_ij C_ij log Q_ij`` via a stabilised log-softmax."""
    S = _scores(_as_2d(X), _as_2d(Y))
    logQ = S - np.log(np.exp(S).sum(axis=1, keepdims=True))
    return float(-np.sum(as_array(C) * logQ))


def _G(C: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return C.sum(axis=1)[:, None] * Q - C


def gradient(C, X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of the objective: ``(G Y, G^T X)`` with ``G = D_C Q - C``."""
    X, Y = _as_2d(X), _as_2d(Y)
    G = _G(as_array(C), softmax_matrix(X, Y))
    return G @ Y, G.T @ X


def _step(C: np.ndarray, state: EmbeddingState, eta: float, Q: np.ndarray) -> EmbeddingState:
    G = _G(C, Q)
    # overflow is reported below as NumericalError rather than as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        X = state.X - eta * (G @ state.Y)
        Y = state.Y - eta * (G.T @ state.X)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise NumericalError(f"gradient step produced non-finite values at iteration {state.iter + 1}")
    return EmbeddingState(X, Y, state.iter + 1)


def gd_step(state: EmbeddingState, C, eta: float) -> EmbeddingState:
    """One simultaneous gradient step from ``state``."""
    C = as_array(C)
    return _step(C, state, eta, softmax_matrix(state.X, state.Y))


def error_matrix(C, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """The ``2n x 2n`` matrix ``E = [[0, D_C (Q - J/n)], [(D_C (Q - J/n))^T, 0]]``."""
    C = as_array(C)
    n = C.shape[0]
    B = C.sum(axis=1)[:, None] * (softmax_matrix(X, Y) - 1.0 / n)
    Z = np.zeros((n, n))
    return np.block([[Z, B], [B.T, Z]])


def error_term_norm(C, X: np.ndarray, Y: np.ndarray) -> float:
    """``||E||_F = sqrt(2) ||D_C (Q - J/n)||_F``."""
    C = as_array(C)
    n = C.shape[0]
    B = C.sum(axis=1)[:, None] * (softmax_matrix(X, Y) - 1.0 / n)
    return float(np.sqrt(2.0) * np.linalg.norm(B))


def initial_state(n: int, cfg: TrainConfig) -> EmbeddingState:
    """Standard normal draws (X row-major, then Y), rescaled per ``init_mode``.

    ``"norm"`` scales the stacked ``W`` to Frobenius norm ``epsilon``;
    ``"inf"`` scales it so the largest absolute entry equals ``init_bound``.
    Both modes share the same underlying draw for a given seed.
    """
    cfg = cfg if cfg.epsilon is not None else cfg.resolve(n)
    rng = np.random.default_rng(cfg.seed)
    X = rng.standard_normal((n, cfg.d))
    Y = rng.standard_normal((n, cfg.d))
    if cfg.init_mode == "norm":
        scale = cfg.epsilon / np.sqrt(np.sum(X**2) + np.sum(Y**2))
    else:
        scale = cfg.init_bound / max(np.abs(X).max(), np.abs(Y).max())
    return EmbeddingState(X * scale, Y * scale, 0)


def linear_step(state: EmbeddingState, lin: LinearUpdate) -> EmbeddingState:
    """``W <- Lmat W`` (column-wise for d > 1)."""
    if 2 * state.n != lin.Lmat.shape[0]:
        raise ValidationError("state and linear update disagree on n")
    return EmbeddingState.from_W(lin.Lmat @ state.W, state.iter + 1)


class _Recorder:
    def __init__(self, traj: Trajectory, C: np.ndarray, labels, lin: LinearUpdate | None, cfg: TrainConfig):
        self.traj, self.C, self.cfg = traj, C, cfg
        self.labels = None if labels is None else np.asarray(labels)
        self.P = None if lin is None else lin.topProjector

    def __call__(self, state: EmbeddingState, Q: np.ndarray | None) -> None:
        tr = self.traj
        tr.norm_w.append(state.norm)
        if self.P is not None:
            W = state.W
            Z = self.P @ W
            tr.norm_z.append(float(np.linalg.norm(Z)))
            tr.resid.append(float(np.linalg.norm(W - Z)))
        else:
            tr.norm_z.append(float("nan"))
            tr.resid.append(float("nan"))
        if Q is not None:
            n = state.n
            B = self.C.sum(axis=1)[:, None] * (Q - 1.0 / n)
            tr.err_frob.append(float(np.sqrt(2.0) * np.linalg.norm(B)))
        else:
            tr.err_frob.append(float("nan"))
        if self.cfg.track_objective and Q is not None:
            tr.objective.append(objective(self.C, state.X, state.Y))
        else:
            tr.objective.append(float("nan"))
        tr.means.append(None if self.labels is None else cluster_summaries(state.X, self.labels))
        if self.cfg.record_states:
            tr.states.append(state)


def cluster_summaries(X: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-cluster mean for d = 1; Euclidean norm of each centroid for d > 1."""
    K = int(labels.max()) + 1
    cents = np.array([X[labels == k].mean(axis=0) for k in range(K)])
    return cents[:, 0] if X.shape[1] == 1 else np.linalg.norm(cents, axis=1)


def _setup(C, cfg: TrainConfig, labels, lin):
    C = as_array(C)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValidationError("C must be square")
    cfg = cfg.resolve(C.shape[0])
    if lin is None and labels is not None and cfg.track_projection:
        lin = LinearUpdate(C, cfg.eta, int(np.max(labels)) + 1)
    return C, cfg, lin


def run_deepwalk(
    C, cfg: TrainConfig, *, labels=None, lin: LinearUpdate | None = None
) -> tuple[Trajectory, EmbeddingState]:
    """Gradient descent from a random small start.

    Stops once ``||W||_F >= epsilon * delta`` (reason ``"norm"``), after
    ``max_iters`` steps (``"cap"``), or after exactly ``cfg.iterations``
    steps when that is set (``"fixed"``).  With ``labels`` the trajectory
    also records per-cluster means and, if ``track_projection``, the
    projection onto the top eigenspace of the linear update.
    """
    C, cfg, lin = _setup(C, cfg, labels, lin)
    traj = Trajectory(config=cfg)
    record = _Recorder(traj, C, labels, lin, cfg)
    state = initial_state(C.shape[0], cfg)
    target = cfg.epsilon * cfg.delta
    while True:
        Q = softmax_matrix(state.X, state.Y)
        record(state, Q)
        if cfg.iterations is not None:
            if state.iter >= cfg.iterations:
                traj.reason = "fixed"
                break
        elif state.iter > 0 and state.norm >= target:
            traj.reason = "norm"
            break
        elif state.iter >= cfg.max_iters:
            traj.reason = "cap"
            break
        state = _step(C, state, cfg.eta, Q)
    traj.t_f = state.iter
    log.debug("run_deepwalk stopped after %d iterations (%s)", traj.t_f, traj.reason)
    return traj, state


def run_linearized(
    C, cfg: TrainConfig, *, labels=None, lin: LinearUpdate | None = None
) -> tuple[Trajectory, EmbeddingState]:
    """Iterate ``Lmat`` from the same initial point as :func:`run_deepwalk`.

    Uses ``cfg.iterations`` steps when set, otherwise the same norm stopping
    rule and cap.
    """
    C = as_array(C)
    if lin is None:
        K = 2 if labels is None else int(np.max(labels)) + 1
        lin = LinearUpdate(C, cfg.eta, K)
    _, cfg, _ = _setup(C, cfg, None, lin)
    traj = Trajectory(config=cfg)
    record = _Recorder(traj, C, labels, lin if cfg.track_projection else None, cfg)
    state = initial_state(C.shape[0], cfg)
    target = cfg.epsilon * cfg.delta
    while True:
        record(state, None)
        if cfg.iterations is not None:
            if state.iter >= cfg.iterations:
                traj.reason = "fixed"
                break
        elif state.iter > 0 and state.norm >= target:
            traj.reason = "norm"
            break
        elif state.iter >= cfg.max_iters:
            traj.reason = "cap"
            break
        state = linear_step(state, lin)
    traj.t_f = state.iter
    return traj, state


def write_embedding_csv(state: EmbeddingState, labels, path: str | Path) -> None:
    d = state.d
    header = ["node", "label"] + [f"x_{k + 1}" for k in range(d)] + [f"y_{k + 1}" for k in range(d)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(state.n):
            writer.writerow(
                [i, int(labels[i])] + [repr(float(v)) for v in state.X[i]] + [repr(float(v)) for v in state.Y[i]]
            )
