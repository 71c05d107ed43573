"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py`` (or
``python3 tests/test_acceptance.py``); the verdicts are repeated in the
terminal summary at the end of the session.
"""

from __future__ import annotations

import csv
import itertools
import time
from pathlib import Path

import numpy as np
import pytest

from _oracles import connected_graphs, enumerate_walk_cooccurrence, numeric_gradient
from _sweeps import alg1_sweep
from deepwalk_sbm.cli import main
from deepwalk_sbm.sbm import Graph, SbmParams, generate_sbm
from deepwalk_sbm.theory import LinearUpdate, block_matrix, block_values, cbar_spectrum, expected_cooccurrence
from deepwalk_sbm.trainer import EmbeddingState, error_matrix, gd_step, gradient, objective, softmax_matrix
from deepwalk_sbm.walks import WalkConfig, build_cooccurrence, limiting_cooccurrence

RESULTS: dict[int, str] = {}


def report(k: int, ok: bool, detail: str) -> None:
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[k] = line
    print(line)


def _rows(path: Path) -> list[dict]:
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def test_c01_softmax_near_uniform_in_small_ball():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    n = 100
    violations = {}
    for eps in (0.5, 0.1, 0.01):
        bad = 0
        for trial in range(1000):
            w = rng.standard_normal(2 * n)
            # the first trial sits exactly on the sphere, the rest fill the ball
            radius = eps if trial == 0 else eps * rng.uniform()
            w *= radius / np.linalg.norm(w)
            Q = softmax_matrix(w[:n], w[n:])
            bad += np.linalg.norm(Q - 1.0 / n) > eps**2
        violations[eps] = int(bad)
    dt = time.perf_counter() - t0
    ok = all(v == 0 for v in violations.values()) and dt < 10
    report(1, ok, f"violations {violations}, {dt:.2f}s")
    assert ok


def test_c02_gradient_matches_finite_differences():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(50):
        n, d = int(rng.integers(2, 16)), int(rng.integers(1, 4))
        A = rng.uniform(0, 1, (n, n))
        C = A + A.T
        X, Y = 0.5 * rng.standard_normal((n, d)), 0.5 * rng.standard_normal((n, d))
        gX, gY = gradient(C, X, Y)
        for g, num in ((gX, numeric_gradient(lambda Z: objective(C, Z, Y), X)),
                       (gY, numeric_gradient(lambda Z: objective(C, X, Z), Y))):
            worst = max(worst, np.abs(g - num).max() / np.abs(num).max())
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 5
    report(2, ok, f"max relative error {worst:.2e}, {dt:.2f}s")
    assert ok


def test_c03_closed_form_spectrum():
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    spec_err = block_err = 0.0
    for _ in range(20):
        K = int(rng.integers(2, 5))
        n = K * int(rng.integers(1, 60 // K + 1))
        q = float(rng.uniform(0.01, 0.6))
        p = float(rng.uniform(q + 0.01, 0.99))
        L = int(rng.integers(2, 7))
        T = int(rng.integers(1, L))
        params = SbmParams(n, K, p, q)
        Cbar = expected_cooccurrence(params, L, T).values
        eig = np.linalg.eigvalsh(Cbar)[::-1]
        spec_err = max(spec_err, np.abs(eig - cbar_spectrum(params, L, T)).max())
        bv = block_values(params, L, T)
        block_err = max(block_err, np.abs(Cbar - block_matrix(n, K, bv.a, bv.b)).max())
    dt = time.perf_counter() - t0
    ok = spec_err <= 1e-10 and block_err <= 1e-10 and dt < 5
    report(3, ok, f"spectrum error {spec_err:.1e}, block error {block_err:.1e}, {dt:.2f}s")
    assert ok


def test_c04_walk_limit_oracle():
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for n in range(2, 6):
        for g in connected_graphs(n):
            for L in range(2, 5):
                for T in range(1, L):
                    E = enumerate_walk_cooccurrence(g.adjacency, L, T)
                    worst = max(worst, np.abs(E - limiting_cooccurrence(g, L, T).values).max())
                    count += 1
    six = Graph.from_edges(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (1, 4)])
    lim = limiting_cooccurrence(six, 4, 2).values
    emp = build_cooccurrence(six, WalkConfig(100_000, 4, 2), seed=404).values
    nz = lim > 0
    mc = float(np.max(np.abs(emp[nz] - lim[nz]) / lim[nz]))
    zeros_ok = bool(np.all(emp[~nz] == 0))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and mc < 0.05 and zeros_ok and dt < 60
    report(4, ok, f"{count} enumerations max error {worst:.1e}; Monte-Carlo max rel error {mc:.3f}; {dt:.1f}s")
    assert ok


def test_c05_update_decomposition():
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    n, eta = 50, 0.01
    g = generate_sbm(SbmParams(n, 2, 0.4, 0.1), 5)
    C = build_cooccurrence(g, WalkConfig(2000, 10, 5), seed=5)
    lin = LinearUpdate(C, eta, 2)
    worst = 0.0
    for _ in range(100):
        s = EmbeddingState(rng.standard_normal((n, 1)), rng.standard_normal((n, 1)))
        lhs = gd_step(s, C, eta).W
        rhs = lin.Lmat @ s.W - eta * error_matrix(C, s.X, s.Y) @ s.W
        worst = max(worst, np.abs(lhs - rhs).max())
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 5
    report(5, ok, f"max |step - (L w - eta E w)| = {worst:.1e}, {dt:.2f}s")
    assert ok


def test_c06_population_eigenvalue_layout():
    t0 = time.perf_counter()
    params, L, T, eta = SbmParams(60, 3, 0.5, 0.1), 10, 5, 0.01
    bv = block_values(params, L, T)
    vals = LinearUpdate(expected_cooccurrence(params, L, T), eta, 3).eigenvalues
    tol = 1e-10
    above = int(np.sum(vals > 1 + eta * bv.gamma))
    rest_ok = bool(np.all(vals[params.K - 1:] <= 1 + tol))
    band_ok = bool(np.all(vals > 1 - 4 * eta * bv.gamma - tol) and np.all(vals < 1 + 4 * eta * bv.gamma + tol))
    dt = time.perf_counter() - t0
    ok = above == params.K - 1 and rest_ok and band_ok and dt < 5
    report(6, ok, f"{above} eigenvalues above 1+eta*gamma, rest <= 1: {rest_ok}, band: {band_ok}, {dt:.2f}s")
    assert ok


@pytest.mark.slow
def test_c07_iteration_bounds():
    t0 = time.perf_counter()
    runs = alg1_sweep(600, 3)
    n, eta = 600, 0.01
    delta = n ** (1 / 6)
    lo, hi = 1 / eta, 4 * np.log(n / delta) / eta
    hits = [lo < r.t_f < hi for r in runs]
    dt = time.perf_counter() - t0
    ok = sum(hits) >= 9 and dt < 120
    report(7, ok, f"{sum(hits)}/10 seeds with {lo:.0f} < t_f < {hi:.0f}; t_f = {[r.t_f for r in runs]}; {dt:.1f}s")
    assert ok


@pytest.mark.slow
def test_c08_clustering_and_separation():
    runs = alg1_sweep(600, 3)
    for r in runs:
        rep = r.report
        print(f"  seed {r.seed}: spread {rep.spread:.4g} <= {rep.bound_spread:.4g} {rep.spread_ok}; "
              f"gap {rep.min_gap:.3g} >= {rep.bound_gap:.3g} {rep.gap_ok}")
    spread = sum(r.report.spread_ok for r in runs)
    gap = sum(r.report.gap_ok for r in runs)
    ok = spread >= 9 and gap >= 9
    report(8, ok, f"spread bound in {spread}/10 seeds, gap bound in {gap}/10 seeds")
    assert ok


@pytest.mark.slow
def test_c09_embedding_recovery(tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "emb"
    assert main(["exp-embeddings", "--seeds", ",".join(map(str, range(10))), "--out", str(out)]) == 0
    rows = _rows(out / "report.csv")
    per_d = {}
    for d, grp in itertools.groupby(sorted(rows, key=lambda r: int(r["d"])), key=lambda r: int(r["d"])):
        per_d[d] = [float(r["recovery"]) for r in grp]
    passing = {d: sum(v >= 0.95 for v in vals) for d, vals in per_d.items()}
    dt = time.perf_counter() - t0
    ok = set(passing) == {1, 2, 3} and all(c >= 9 for c in passing.values()) and dt < 300
    detail = "; ".join(f"d={d}: {passing[d]}/10 (min {min(per_d[d]):.3f})" for d in sorted(per_d))
    report(9, ok, f"seeds with recovery >= 0.95: {detail}; {dt:.1f}s")
    assert ok


@pytest.mark.slow
def test_c10_linear_comparison(tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "lin"
    assert main(["exp-linear", "--out", str(out)]) == 0
    dist, norms = _rows(out / "distance.csv"), _rows(out / "norm_x.csv")
    parts, ok = [], True
    for key in ("n_200", "n_500", "n_1000"):
        d0, d10, x10 = float(dist[0][key]), float(dist[10][key]), float(norms[10][key])
        ok &= d0 == 0.0 and d10 < 0.01 * x10
        parts.append(f"{key}: d0={d0}, d10/|x10|={d10 / x10:.1e}")
    dt = time.perf_counter() - t0
    ok &= dt < 180
    report(10, ok, "; ".join(parts) + f"; {dt:.1f}s")
    assert ok


@pytest.mark.slow
def test_c11_concentration_trend(tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "diag"
    assert main(["diagnostics", "--out", str(out)]) == 0
    rows = [r for r in _rows(out / "diagnostics.csv") if r["name"] == "relative_deviation"]
    ns = [int(r["n"]) for r in rows]
    vals = [float(r["value"]) for r in rows]
    dt = time.perf_counter() - t0
    ok = ns == [200, 400, 800] and all(b < a for a, b in zip(vals, vals[1:])) and dt < 300
    report(11, ok, f"median ||C - Cbar||/||Cbar|| = {dict(zip(ns, [round(v, 4) for v in vals]))}; {dt:.1f}s")
    assert ok


SMALL = ["--n", "60", "--k", "3", "--r", "300", "--L", "20", "--T", "4", "--eta", "0.05"]
COMMANDS = {
    "generate": ["generate", "--n", "90", "--k", "3", "--p", "0.4", "--q", "0.1", "--seed", "9"],
    "train": ["train", *SMALL, "--d", "2", "--seed", "4"],
    "exp-embeddings": ["exp-embeddings", "--n", "120", "--L", "300", "--seed", "2"],
    "exp-linear": ["exp-linear", "--ns", "100,200", "--seed", "1"],
    "diagnostics": ["diagnostics", "--ns", "40,80", "--seeds", "0,1", "--cooc", "empirical"],
}


def _snapshot(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_c12_determinism(tmp_path):
    same = {}
    for name, args in COMMANDS.items():
        runs = []
        for i in range(2):
            root = tmp_path / f"{name}_{i}"
            root.mkdir()
            target = root / "g.txt" if name == "generate" else root / "out"
            assert main([*args, "--out", str(target)]) == 0
            runs.append(_snapshot(root))
        csvs = [k for k in runs[0] if k.endswith(".csv") or k.endswith(".txt")]
        same[name] = bool(csvs) and runs[0] == runs[1]
    ok = all(same.values())
    report(12, ok, "byte-identical reruns: " + ", ".join(f"{k}={v}" for k, v in same.items()))
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
