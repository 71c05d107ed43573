"""Command-line entry point: ``deepwalk-sbm <command> [options]``.

Values are resolved as built-in defaults, then the ``--config`` file, then
explicit flags.  Every command writes the resolved values next to its
outputs, so feeding that file back through ``--config`` repeats the run.
Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import plots
from .config import coerce, dump_config, load_config
from .errors import NumericalError, ValidationError
from .metrics import cluster_report, trajectory_distance, write_report_rows
from .sbm import SbmParams, generate_sbm, read_graph, write_graph
from .theory import (
    LinearUpdate,
    append_diagnostics,
    block_values,
    cbar_spectrum,
    concentration_ratio,
    expected_cooccurrence,
    relative_deviation,
    transition_deviation,
)
from .trainer import TrainConfig, run_deepwalk, run_linearized, write_embedding_csv
from .walks import WalkConfig, build_cooccurrence, limiting_cooccurrence


CONFIG_NAME = "config.txt"

# (kind, default, help)
_SBM = {
    "n": ("int", 600, "number of nodes"),
    "k": ("int", 3, "number of blocks"),
    "p": ("float?", None, "within-block edge probability (default 4q)"),
    "q": ("float", 0.1, "across-block edge probability"),
}
_WALK = {
    "r": ("int", 2000, "number of walks"),
    "L": ("int", 10, "walk length"),
    "T": ("int", 5, "window size"),
}
_TRAIN = {
    "eta": ("float", 0.01, "learning rate"),
    "epsilon": ("float?", None, "initial radius (default n^(-2/3))"),
    "delta": ("float?", None, "stopping multiplier (default n^(1/6))"),
    "max_iters": ("int?", None, "iteration cap for the norm stopping rule"),
    "iterations": ("int?", None, "fixed iteration count (disables norm stopping)"),
    "init_mode": ("str", "norm", "norm or inf"),
    "init_bound": ("float?", None, "max-abs entry for inf-mode init"),
    "d": ("int", 1, "embedding dimension"),
    "track_objective": ("bool", False, "record the objective every iteration"),
    "track_projection": ("bool", True, "record the top-eigenspace projection"),
}

SCHEMAS: dict[str, dict] = {
    "generate": {
        "n": ("int?", None, "number of nodes"),
        "k": ("int?", None, "number of blocks"),
        "p": ("float?", None, "within-block edge probability"),
        "q": ("float?", None, "across-block edge probability"),
        "seed": ("int", 0, "graph seed"),
    },
    "train": {
        **_SBM, "p": ("float", 0.4, "within-block edge probability"),
        **_WALK, "L": ("int", 120, "walk length"), "T": ("int", 10, "window size"),
        **_TRAIN,
        "graph": ("str?", None, "read the graph from this file instead of sampling"),
        "use_expected": ("bool", False, "train on the expected co-occurrence matrix"),
        "seed": ("int", 0, "master seed"),
        "seeds": ("int[]", [], "run several master seeds"),
    },
    "exp-embeddings": {
        **_SBM,
        **_WALK, "L": ("int", 3000, "walk length"), "T": ("int", 12, "window size"),
        "eta": ("float", 0.01, "learning rate"),
        "iterations": ("int", 100, "gradient steps"),
        "init_bound": ("float", 0.01, "max-abs entry of the initial embedding"),
        "dims": ("int[]", [1, 2, 3], "embedding dimensions"),
        "use_expected": ("bool", False, "train on the expected co-occurrence matrix"),
        "seed": ("int", 0, "master seed"),
        "seeds": ("int[]", [], "run several master seeds"),
    },
    "exp-linear": {
        "ns": ("int[]", [200, 500, 1000], "graph sizes"),
        "k": ("int", 2, "number of blocks"),
        "p": ("float?", None, "within-block edge probability (default 4q)"),
        "q": ("float", 0.1, "across-block edge probability"),
        **_WALK,
        "eta": ("float?", None, "learning rate (default 1/n)"),
        "iterations": ("int", 75, "gradient steps"),
        "init_bound": ("float?", None, "max-abs entry of the initial embedding (default 1/sqrt(n))"),
        "use_expected": ("bool", False, "use the expected co-occurrence matrix"),
        "seed": ("int", 0, "master seed"),
    },
    "diagnostics": {
        "ns": ("int[]", [200, 400, 800], "graph sizes"),
        "k": ("int", 2, "number of blocks"),
        "rho": ("float", 0.8, "density exponent"),
        "p": ("float?", None, "within-block probability (default n^(rho-1))"),
        "q": ("float?", None, "across-block probability (default p/4)"),
        **_WALK,
        "cooc": ("str", "limiting", "limiting or empirical co-occurrence"),
        "eta": ("float", 0.01, "learning rate for the spectrum check"),
        "t": ("int", 1, "power for the transition deviation"),
        "inject_expected": ("bool", False, "use the expected matrix as the sample (sanity check)"),
        "seed": ("int", 0, "master seed"),
        "seeds": ("int[]", [0, 1, 2, 3, 4], "seeds for the medians"),
    },
}


def child_seeds(seed: int, count: int) -> list[int]:
    """Independent child seeds for the graph, walks and init of one run."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deepwalk-sbm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key = value file")
        sp.add_argument("--out", required=False, help="output path (file for generate, directory otherwise)")
        for key, (kind, _default, help_text) in schema.items():
            flag = "--" + key.replace("_", "-")
            if kind == "bool":
                sp.add_argument(flag, dest=key, action="store_const", const="true", default=None, help=help_text)
                sp.add_argument("--no-" + key.replace("_", "-"), dest=key, action="store_const", const="false")
            else:
                sp.add_argument(flag, dest=key, default=None, help=help_text)
    return parser


def resolve(command: str, args: argparse.Namespace) -> dict:
    schema = SCHEMAS[command]
    raw: dict = {}
    if args.config:
        file_vals = load_config(args.config)
        file_cmd = file_vals.pop("command", command)
        if file_cmd != command:
            raise ValidationError(f"config was written for {file_cmd!r}, not {command!r}")
        unknown = sorted(set(file_vals) - set(schema) - {"out"})
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
        raw.update(file_vals)
    for key in schema:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    out_dir = args.out if args.out is not None else raw.get("out")
    if out_dir is None:
        raise ValidationError("--out is required")
    values = {}
    for key, (kind, default, _h) in schema.items():
        values[key] = coerce(key, raw[key], kind) if key in raw else default
    return {"command": command, "out": out_dir, **values}


def _persist(cfg: dict, path: Path) -> None:
    dump_config({k: v for k, v in cfg.items() if k != "out"}, path)


def _seed_list(cfg: dict) -> list[int]:
    return list(cfg["seeds"]) if cfg.get("seeds") else [cfg["seed"]]


def _p_default(cfg: dict) -> float:
    return cfg["p"] if cfg.get("p") is not None else 4.0 * cfg["q"]


# --- commands -----------------------------------------------------------------


def cmd_generate(cfg: dict) -> int:
    missing = [k for k in ("n", "k", "p", "q") if cfg[k] is None]
    if missing:
        raise ValidationError("generate needs " + ", ".join("--" + m for m in missing))
    params = SbmParams(cfg["n"], cfg["k"], cfg["p"], cfg["q"])
    graph = generate_sbm(params, cfg["seed"])
    out = Path(cfg["out"])
    write_graph(graph, out)
    _persist(cfg, out.with_name(out.name + ".config"))
    return 0


def _cooccurrence(cfg: dict, params: SbmParams, graph, walk_seed: int):
    if cfg["use_expected"]:
        return expected_cooccurrence(params, cfg["L"], cfg["T"])
    return build_cooccurrence(graph, WalkConfig(cfg["r"], cfg["L"], cfg["T"]), walk_seed)


def _train_once(cfg: dict, seed: int, out: Path) -> dict:
    graph_seed, walk_seed, init_seed = child_seeds(seed, 3)
    if cfg["graph"]:
        graph = read_graph(cfg["graph"])
        params = SbmParams(graph.n, graph.K, cfg["p"], cfg["q"])
    else:
        params = SbmParams(cfg["n"], cfg["k"], cfg["p"], cfg["q"])
        graph = generate_sbm(params, graph_seed)
    C = _cooccurrence(cfg, params, graph, walk_seed)
    tcfg = TrainConfig(
        eta=cfg["eta"], epsilon=cfg["epsilon"], delta=cfg["delta"], max_iters=cfg["max_iters"],
        iterations=cfg["iterations"], init_mode=cfg["init_mode"], init_bound=cfg["init_bound"],
        d=cfg["d"], seed=init_seed, track_objective=cfg["track_objective"],
        track_projection=cfg["track_projection"],
    )
    labels = graph.labels
    traj, state = run_deepwalk(C, tcfg, labels=labels)
    out.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out / "trajectory.csv", K=params.K)
    write_embedding_csv(state, labels, out / "embedding.csv")
    res = traj.config
    rep = cluster_report(state.X, labels, res.epsilon, res.delta, recovery_seed=seed)
    row = _report_row(rep, seed, params, state.d, traj.t_f)
    write_report_rows(out / "report.csv", [row])
    return row


def _report_row(rep, seed: int, params: SbmParams, d: int, t_f: int) -> dict:
    return {
        "seed": seed, "n": params.n, "K": params.K, "p": params.p, "q": params.q, "d": d,
        "spread": rep.spread, "bound_spread": rep.bound_spread, "min_gap": rep.min_gap,
        "bound_gap": rep.bound_gap, "recovery": rep.recovery, "t_f": t_f,
    }


def cmd_train(cfg: dict) -> int:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    _persist(cfg, out / CONFIG_NAME)
    seeds = _seed_list(cfg)
    if len(seeds) == 1:
        _train_once(cfg, seeds[0], out)
        return 0
    rows = [_train_once(cfg, s, out / f"seed_{s}") for s in seeds]
    write_report_rows(out / "report.csv", rows)
    return 0


def _embeddings_once(cfg: dict, seed: int, out: Path) -> list[dict]:
    graph_seed, walk_seed, init_seed = child_seeds(seed, 3)
    params = SbmParams(cfg["n"], cfg["k"], _p_default(cfg), cfg["q"])
    graph = generate_sbm(params, graph_seed)
    C = _cooccurrence(cfg, params, graph, walk_seed)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for d in cfg["dims"]:
        tcfg = TrainConfig(
            eta=cfg["eta"], iterations=cfg["iterations"], init_mode="inf",
            init_bound=cfg["init_bound"], d=d, seed=init_seed, track_projection=False,
        )
        traj, state = run_deepwalk(C, tcfg, labels=graph.labels)
        write_embedding_csv(state, graph.labels, out / f"embedding_d{d}.csv")
        plots.embedding_plot(state.X, graph.labels, out / f"embedding_d{d}.svg",
                             title=f"{d}-D embedding, n={params.n}, K={params.K}, seed {seed}")
        res = traj.config
        rep = cluster_report(state.X, graph.labels, res.epsilon, res.delta, recovery_seed=seed)
        rows.append(_report_row(rep, seed, params, d, traj.t_f))
    return rows


def cmd_exp_embeddings(cfg: dict) -> int:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    _persist(cfg, out / CONFIG_NAME)
    seeds = _seed_list(cfg)
    if len(seeds) == 1:
        rows = _embeddings_once(cfg, seeds[0], out)
    else:
        rows = [r for s in seeds for r in _embeddings_once(cfg, s, out / f"seed_{s}")]
    write_report_rows(out / "report.csv", rows)
    return 0


def linear_comparison(cfg: dict, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Distance ``||x_t - l_t||`` and ``||x_t||`` for one graph size."""
    graph_seed, walk_seed, init_seed = child_seeds(seed, 3)
    params = SbmParams(n, cfg["k"], _p_default(cfg), cfg["q"])
    graph = generate_sbm(params, graph_seed)
    C = _cooccurrence(cfg, params, graph, walk_seed)
    eta = cfg["eta"] if cfg["eta"] is not None else 1.0 / n
    bound = cfg["init_bound"] if cfg["init_bound"] is not None else 1.0 / np.sqrt(n)
    tcfg = TrainConfig(eta=eta, iterations=cfg["iterations"], init_mode="inf", init_bound=bound,
                       seed=init_seed, track_projection=False, record_states=True)
    lin = LinearUpdate(C, eta, params.K)
    nonlin, _ = run_deepwalk(C, tcfg)
    linear, _ = run_linearized(C, tcfg, lin=lin)
    xnorm = np.array([np.linalg.norm(s.X) for s in nonlin.states])
    return trajectory_distance(nonlin, linear), xnorm


def cmd_exp_linear(cfg: dict) -> int:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    _persist(cfg, out / CONFIG_NAME)
    dist, norms = {}, {}
    for n in cfg["ns"]:
        dist[n], norms[n] = linear_comparison(cfg, n, cfg["seed"])
    steps = np.arange(cfg["iterations"] + 1)
    _wide_csv(out / "distance.csv", steps, {f"n_{n}": v for n, v in dist.items()})
    _wide_csv(out / "norm_x.csv", steps, {f"n_{n}": v for n, v in norms.items()})
    plots.line_plot(steps, {f"n={n}": v for n, v in dist.items()}, out / "distance.svg",
                    title="nonlinear vs linearised update", ylabel="||x_t - l_t||")
    return 0


def _wide_csv(path: Path, steps: np.ndarray, cols: dict) -> None:
    lines = [",".join(["t", *cols])]
    for i, t in enumerate(steps):
        lines.append(",".join([str(int(t))] + [repr(float(v[i])) for v in cols.values()]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def diagnostic_rows(cfg: dict) -> list[tuple]:
    """Median-over-seeds diagnostics for each graph size."""
    rows = []
    for n in cfg["ns"]:
        p = cfg["p"] if cfg["p"] is not None else n ** (cfg["rho"] - 1.0)
        q = cfg["q"] if cfg["q"] is not None else p / 4.0
        params = SbmParams(n, cfg["k"], p, q)
        Cbar = expected_cooccurrence(params, cfg["L"], cfg["T"])
        conc, rel, trans = [], [], []
        for s in cfg["seeds"]:
            graph_seed, walk_seed = child_seeds(int(np.random.SeedSequence([s, n]).generate_state(1)[0]), 2)
            graph = generate_sbm(params, graph_seed)
            if cfg["inject_expected"]:
                C = Cbar
            elif cfg["cooc"] == "limiting":
                C = limiting_cooccurrence(graph, cfg["L"], cfg["T"])
            elif cfg["cooc"] == "empirical":
                C = build_cooccurrence(graph, WalkConfig(cfg["r"], cfg["L"], cfg["T"]), walk_seed)
            else:
                raise ValidationError(f"cooc must be 'limiting' or 'empirical', got {cfg['cooc']!r}")
            conc.append(concentration_ratio(C, Cbar, cfg["rho"]))
            rel.append(relative_deviation(C, Cbar))
            trans.append(transition_deviation(graph, params, cfg["t"]))
        spec_err = float(np.max(np.abs(np.linalg.eigvalsh(Cbar.values)[::-1] - cbar_spectrum(params, cfg["L"], cfg["T"]))))
        gamma = block_values(params, cfg["L"], cfg["T"]).gamma
        lin = LinearUpdate(Cbar, cfg["eta"], params.K)
        n_top = int(np.sum(np.linalg.eigvalsh(lin.Lmat) > 1.0 + cfg["eta"] * gamma))
        for name, value in (
            ("concentration_ratio", np.median(conc)),
            ("relative_deviation", np.median(rel)),
            (f"transition_deviation_t{cfg['t']}", np.median(trans)),
            ("spectrum_abs_error", spec_err),
            ("top_eigenvalue_count", n_top),
        ):
            rows.append((name, n, params.K, p, q, value))
    return rows


def cmd_diagnostics(cfg: dict) -> int:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    _persist(cfg, out / CONFIG_NAME)
    path = out / "diagnostics.csv"
    if path.exists():
        path.unlink()
    # group rows by diagnostic name, ascending n within each group
    rows = sorted(diagnostic_rows(cfg), key=lambda r: r[0])
    append_diagnostics(path, rows)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "exp-embeddings": cmd_exp_embeddings,
    "exp-linear": cmd_exp_linear,
    "diagnostics": cmd_diagnostics,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args.command, args)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
