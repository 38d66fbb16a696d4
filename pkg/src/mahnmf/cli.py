"""Command-line interface.

Settings are resolved in three layers: built-in defaults, then the JSON
document given by ``--config``, then explicit flags. Exit status is 0 on
success, 2 for usage/configuration errors and 3 for numerical failures.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from .config import Box, Elastic, Group, Manifold, Plain, SolverConfig
from .core import random_init
from .errors import ConfigError, DimensionError, DomainError, NumericalFailure
from .harness import (GraphSpec, NoiseSpec, factor_sparseness, gen_low_rank_plus_sparse,
                      image_similarity, inject_noise, knn_laplacian, normalize_similarity,
                      relative_error)
from .io import read_matrix, write_matrix
from .ogm import solve
from .prox import GroupStructure
from .rri import rri_solve
from .symmetric import sym_solve

DEFAULTS = {
    "solver": "ogm",
    "variant": "plain",
    "rank": 2,
    "lambda0": 0.1,
    "tol": 0.1,
    "inner_tol": "adaptive",
    "max_outer": 200,
    "max_inner": 500,
    "seed": 0,
    "monotone_y": False,
    "beta": 1.0,
    "alpha": 1.0,
    "format": "csv",
}

# flag dest -> config key
_FLAG_KEYS = ("input", "out", "rank", "solver", "variant", "lambda0", "tol", "inner_tol",
              "max_outer", "max_inner", "seed", "monotone_y", "beta", "alpha", "laplacian",
              "image", "m", "n", "density", "noise", "noise_level", "sizes", "repeats",
              "format")


def _float_or_adaptive(s):
    return s if s == "adaptive" else float(s)


def _sizes(s):
    out = []
    for part in s.split(","):
        m, n = part.lower().split("x")
        out.append([int(m), int(n)])
    return out


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its keys")
    common.add_argument("--input", help="input matrix (.csv or .mtx)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--rank", type=int)
    common.add_argument("--solver", choices=("rri", "ogm"))
    common.add_argument("--variant", choices=("plain", "box", "manifold", "group", "elastic"))
    common.add_argument("--lambda0", type=float)
    common.add_argument("--tol", type=float, help="outer stopping precision")
    common.add_argument("--inner-tol", type=_float_or_adaptive, dest="inner_tol")
    common.add_argument("--max-outer", type=int, dest="max_outer")
    common.add_argument("--max-inner", type=int, dest="max_inner")
    common.add_argument("--seed", type=int)
    common.add_argument("--monotone-y", action="store_const", const=True, dest="monotone_y")
    common.add_argument("--beta", type=float, help="manifold weight")
    common.add_argument("--alpha", type=float, help="elastic-net weight")
    common.add_argument("--laplacian", help="graph Laplacian file for the manifold variant")
    common.add_argument("--format", choices=("csv", "mtx"), help="matrix output format")

    p = argparse.ArgumentParser(prog="mahnmf", description="Manhattan NMF toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("factorize", parents=[common], help="factorize X ~ W^T H")
    sub.add_parser("decompose", parents=[common], help="split X into low-rank and sparse parts")
    b = sub.add_parser("bench", parents=[common], help="compare RRI and OGM on random matrices")
    b.add_argument("--sizes", type=_sizes, help="comma-separated MxN list, e.g. 100x50,200x100")
    b.add_argument("--repeats", type=int)
    s = sub.add_parser("synth", parents=[common], help="generate low-rank plus sparse data")
    s.add_argument("--m", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--density", type=float, help="sparse spike density")
    s.add_argument("--noise", choices=("occlusion", "laplace", "salt_pepper", "gaussian", "poisson"))
    s.add_argument("--noise-level", type=float, dest="noise_level")
    y = sub.add_parser("sym", parents=[common], help="symmetric factorization X ~ H H^T")
    y.add_argument("--image", help="brightness image; its pixel similarity is factorized")
    return p


def resolve_config(args):
    cfg = dict(DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update(loaded)
    for key in _FLAG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _groups(spec):
    if spec is None:
        return None
    groups = [list(range(a, b)) for a, b in spec["ranges"]]
    return GroupStructure(groups, p=spec.get("p", 2), mode=spec.get("mode", "constrained"),
                          radius=spec.get("radius"), eta=spec.get("eta", 0.0),
                          radius_fraction=spec.get("radius_fraction", 0.01))


def make_variant(cfg, X):
    name = cfg["variant"]
    if cfg["solver"] == "rri" and name in ("group", "elastic"):
        raise ConfigError(f"the {name} variant requires --solver ogm")
    if name == "plain":
        return Plain()
    if name == "box":
        return Box()
    if name == "elastic":
        return Elastic(float(cfg["alpha"]))
    if name == "manifold":
        if cfg.get("laplacian"):
            L = read_matrix(cfg["laplacian"])
        else:
            L = knn_laplacian(X, GraphSpec(**cfg.get("graph", {})))[1]
        return Manifold(float(cfg["beta"]), L)
    if name == "group":
        g = cfg.get("groups") or {}
        return Group(_groups(g.get("h")), _groups(g.get("w")))
    raise ConfigError(f"unknown variant {name!r}")


def solver_config(cfg, variant):
    return SolverConfig(rank=cfg["rank"], lambda0=cfg["lambda0"], outer_tol=cfg["tol"],
                        inner_tol=cfg["inner_tol"], max_outer=cfg["max_outer"],
                        max_inner=cfg["max_inner"], variant=variant,
                        monotone_y=bool(cfg["monotone_y"]), seed=cfg["seed"])


def _require(cfg, *keys):
    for k in keys:
        if cfg.get(k) is None:
            raise ConfigError(f"missing required setting {k!r}")


def _ext(cfg):
    return ".mtx" if cfg.get("format") == "mtx" else ".csv"


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_solver(cfg, X):
    variant = make_variant(cfg, X)
    scfg = solver_config(cfg, variant)
    fn = rri_solve if cfg["solver"] == "rri" else solve
    t0 = time.perf_counter()
    F, trace = fn(X, scfg)
    return F, trace, time.perf_counter() - t0, scfg


def _summary(cfg, X, F, trace, wall):
    approx = F.reconstruct()
    return {
        "solver": cfg["solver"],
        "variant": cfg["variant"],
        "rank": cfg["rank"],
        "seed": cfg["seed"],
        "objective": trace.final_objective,
        "manhattan_loss": float(np.abs(X - approx).sum()),
        "manhattan_norm_x": float(np.abs(X).sum()),
        "relative_error": relative_error(X, approx) if X.any() else 0.0,
        "sparseness_w": factor_sparseness(F.W),
        "sparseness_h": factor_sparseness(F.H),
        "outer_iterations": len(trace),
        "converged": len(trace) < cfg["max_outer"],
        "wall_time": wall,
    }


def cmd_factorize(cfg, decompose=False):
    _require(cfg, "input", "out")
    X = read_matrix(cfg["input"])
    os.makedirs(cfg["out"], exist_ok=True)
    out = cfg["out"]
    F, trace, wall, _ = _run_solver(cfg, X)
    ext = _ext(cfg)
    write_matrix(os.path.join(out, "W" + ext), F.W)
    write_matrix(os.path.join(out, "H" + ext), F.H)
    trace.to_csv(os.path.join(out, "trace.csv"))
    if decompose:
        low = F.reconstruct()
        write_matrix(os.path.join(out, "lowrank" + ext), low)
        write_matrix(os.path.join(out, "sparse" + ext), X - low)
    _write_json(os.path.join(out, "summary.json"), _summary(cfg, X, F, trace, wall))
    return 0


def cmd_decompose(cfg):
    return cmd_factorize(cfg, decompose=True)


def _pad(values, length):
    return np.concatenate((values, np.full(length - len(values), values[-1])))


def cmd_bench(cfg):
    _require(cfg, "out")
    out = cfg["out"]
    runs_dir = os.path.join(out, "runs")
    os.makedirs(runs_dir, exist_ok=True)
    sizes = cfg.get("sizes") or [[100, 50]]
    repeats = int(cfg.get("repeats", 10))
    solvers = cfg.get("solvers", ["rri", "ogm"])
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    rows, finals = [], []
    for m, n in sizes:
        per_solver = {s: [] for s in solvers}
        for rep in range(repeats):
            seed = int(cfg["seed"]) + rep
            rng = np.random.default_rng(seed)
            X = rng.random((m, n))
            init = random_init(X, cfg["rank"], seed)
            for s in solvers:
                run_cfg = dict(cfg, solver=s, seed=seed)
                scfg = solver_config(run_cfg, make_variant(run_cfg, X))
                fn = rri_solve if s == "rri" else solve
                _, trace = fn(X, scfg, init)
                trace.to_csv(os.path.join(runs_dir, f"{s}_{m}x{n}_rep{rep}.csv"))
                per_solver[s].append(trace)
        for s, traces in per_solver.items():
            length = max(len(t) for t in traces) + 1
            obj = np.array([_pad(np.r_[t.initial_objective, t.objectives], length) for t in traces])
            secs = np.array([_pad(np.r_[0.0, np.cumsum([r.seconds for r in t.records])], length)
                             for t in traces])
            for it in range(length):
                rows.append((s, m, n, it, obj[:, it].mean(), obj[:, it].std(),
                             secs[:, it].mean(), secs[:, it].std(), len(traces)))
            fin = obj[:, -1]
            finals.append((s, m, n, fin.mean(), fin.std(), secs[:, -1].mean(), len(traces)))
    _write_rows(os.path.join(out, "aggregate.csv"),
                ("solver", "m", "n", "iteration", "mean_objective", "std_objective",
                 "mean_seconds", "std_seconds", "runs"), rows)
    _write_rows(os.path.join(out, "final.csv"),
                ("solver", "m", "n", "mean_final_objective", "std_final_objective",
                 "mean_seconds", "runs"), finals)
    return 0


def _write_rows(path, header, rows):
    def fmt(v):
        if isinstance(v, (float, np.floating)):
            return "%.17g" % v
        return str(v)

    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(fmt(v) for v in r) + "\n")


def cmd_synth(cfg):
    _require(cfg, "out", "m", "n")
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    density = float(cfg.get("density", 0.0))
    X, L, S = gen_low_rank_plus_sparse(int(cfg["m"]), int(cfg["n"]), int(cfg["rank"]),
                                       density, int(cfg["seed"]))
    noise = None
    if cfg.get("noise"):
        ncfg = cfg["noise"] if isinstance(cfg["noise"], dict) else {"kind": cfg["noise"]}
        ncfg = dict(ncfg)
        if cfg.get("noise_level") is not None:
            ncfg["level"] = cfg["noise_level"]
        ncfg.setdefault("seed", int(cfg["seed"]))
        noise = NoiseSpec(**ncfg)
        X = inject_noise(X, noise)
    ext = _ext(cfg)
    write_matrix(os.path.join(out, "X" + ext), X)
    write_matrix(os.path.join(out, "L" + ext), L)
    write_matrix(os.path.join(out, "S" + ext), S)
    _write_json(os.path.join(out, "provenance.json"), {
        "generator": "low_rank_plus_sparse",
        "m": int(cfg["m"]), "n": int(cfg["n"]), "rank": int(cfg["rank"]),
        "density": density, "seed": int(cfg["seed"]),
        "noise": noise.to_dict() if noise else None,
        "files": ["X" + ext, "L" + ext, "S" + ext],
    })
    return 0


def cmd_sym(cfg):
    _require(cfg, "out")
    if cfg.get("image"):
        B = read_matrix(cfg["image"])
        gspec = dict(cfg.get("graph", {}), mode="image")
        X = normalize_similarity(image_similarity(B, GraphSpec(**gspec)))
    else:
        _require(cfg, "input")
        X = read_matrix(cfg["input"])
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    scfg = SolverConfig(rank=cfg["rank"], outer_tol=cfg["tol"], max_outer=cfg["max_outer"],
                        seed=cfg["seed"])
    t0 = time.perf_counter()
    H, trace = sym_solve(X, cfg["rank"], scfg)
    wall = time.perf_counter() - t0
    ext = _ext(cfg)
    write_matrix(os.path.join(out, "H" + ext), H)
    trace.to_csv(os.path.join(out, "trace.csv"))
    if cfg.get("image"):
        write_matrix(os.path.join(out, "similarity" + ext), X)
    _write_json(os.path.join(out, "summary.json"), {
        "rank": cfg["rank"], "seed": cfg["seed"],
        "objective": trace.final_objective,
        "manhattan_norm_x": float(np.abs(X).sum()),
        "outer_iterations": len(trace),
        "wall_time": wall,
    })
    return 0


COMMANDS = {
    "factorize": cmd_factorize,
    "decompose": cmd_decompose,
    "bench": cmd_bench,
    "synth": cmd_synth,
    "sym": cmd_sym,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = {}
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except NumericalFailure as exc:
        out = cfg.get("out")
        if exc.trace is not None and out:
            os.makedirs(out, exist_ok=True)
            exc.trace.to_csv(os.path.join(out, "trace.csv"))
        print(f"mahnmf: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, DimensionError, DomainError, FileNotFoundError, KeyError,
            TypeError, ValueError, json.JSONDecodeError) as exc:
        print(f"mahnmf: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
