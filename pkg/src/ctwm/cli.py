"""Command-line entry point: simulate | cohesion | pinning | sweep | fit.

Every output artifact embeds the configuration, seed, and package version
needed to reproduce it.  Exit codes: 0 success, 1 error, 2 a simulation
hit t_max without converging.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cohesion import enumerate_minimal_cohesive
from .control import minimal_pinning_set, pinning_feasible
from .dynamics import PinningConfig, classify_equilibrium, ctwm_rhs, integrate, pinned_rhs
from .empirical import fit_report, load_dataset
from .errors import CtwmError
from .experiments import SweepConfig, run_sweep
from .net import GraphGenConfig, gen_network, load_matrix

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CONVERGENCE = 2


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _parse_nodes(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip() != ""]


def _resolve_matrix(args) -> tuple:
    """Matrix from --matrix or generated from --gen flags, plus its provenance."""
    if args.matrix is not None:
        path = str(Path(args.matrix).resolve())
        return load_matrix(args.matrix), {"matrix": path}
    if args.gen is None:
        raise CtwmError("either --matrix or --gen is required")
    cfg = GraphGenConfig(model=args.gen, n=args.n, p=args.p, seed=args.seed,
                         mean_out_degree=args.degree)
    return gen_network(cfg), {
        "gen": {"model": cfg.model.value, "n": cfg.n, "p": cfg.p,
                "seed": cfg.seed, "mean_out_degree": cfg.mean_out_degree},
    }


def _meta(args_config: dict, seed: int | None = None) -> dict:
    meta = {"version": __version__, "config": args_config}
    if seed is not None:
        meta["seed"] = seed
    return meta


def _emit_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=1)
    if out is None or out == "-":
        print(text)
    else:
        Path(out).write_text(text + "\n")


def cmd_simulate(args) -> int:
    W, provenance = _resolve_matrix(args)
    if args.x0 == "random":
        lo, hi = _parse_floats(args.x0_range)
        rng = np.random.default_rng(args.seed)
        x0 = lo + (hi - lo) * rng.random(W.n)
    else:
        x0 = np.asarray(_parse_floats(args.x0))

    if args.pin is not None:
        cfg = PinningConfig.uniform(_parse_nodes(args.pin), W.n,
                                    gamma=args.gamma, target=args.target)
        rhs = lambda x: pinned_rhs(x, W, cfg, form=args.pinned_form)
    else:
        rhs = lambda x: ctwm_rhs(x, W)

    traj = integrate(x0, rhs, step=args.step, t_max=args.t_max,
                     eq_tol=args.eq_tol, sample_stride=args.stride, method=args.method)
    report = classify_equilibrium(traj.final, W, cluster_tol=args.cluster_tol)

    config = dict(provenance)
    config.update({
        "x0": [float(v) for v in x0], "step": args.step, "t_max": args.t_max,
        "eq_tol": args.eq_tol, "cluster_tol": args.cluster_tol, "method": args.method,
    })
    if args.pin is not None:
        config["pinning"] = {"pinned": _parse_nodes(args.pin), "gamma": args.gamma,
                             "target": args.target, "form": args.pinned_form}
    meta = _meta(config, seed=args.seed)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out_dir / "trajectory.csv", meta={"meta": meta})
    doc = {"meta": meta, "converged": traj.converged, "t_end": float(traj.times[-1]),
           "residual": traj.residual, "final": [float(v) for v in traj.final]}
    doc.update(report.to_json_dict())
    _emit_json(doc, str(out_dir / "equilibrium.json"))
    print(f"converged={traj.converged} t_end={traj.times[-1]:g} "
          f"classification={report.classification.value}")
    return EXIT_OK if traj.converged else EXIT_NO_CONVERGENCE


def cmd_cohesion(args) -> int:
    W, provenance = _resolve_matrix(args)
    report = enumerate_minimal_cohesive(W, limit=args.limit)
    doc = {"meta": _meta({**provenance, "limit": args.limit}, seed=args.seed)}
    doc.update(report.to_json_dict())
    _emit_json(doc, args.out)
    return EXIT_OK


def cmd_pinning(args) -> int:
    W, provenance = _resolve_matrix(args)
    report = enumerate_minimal_cohesive(W, limit=args.limit)
    meta = _meta({**provenance, "limit": args.limit, "budget": args.budget},
                 seed=args.seed)
    if args.pinned is not None:
        pinned = _parse_nodes(args.pinned)
        feasible, witness = pinning_feasible(pinned, report)
        doc = {"meta": meta, "pinned": sorted(pinned), "feasible": feasible,
               "uncovered_witness": None if witness is None else sorted(witness)}
    else:
        solution = minimal_pinning_set(report, budget=args.budget)
        doc = {"meta": meta}
        doc.update(solution.to_json_dict())
    _emit_json(doc, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = SweepConfig(family=args.family, n=args.n, params=tuple(_parse_floats(args.params)),
                      replicates=args.replicates, seed=args.seed,
                      mean_out_degree=args.degree, enumeration_budget=args.budget)
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    result = run_sweep(cfg, jobs=jobs)
    result.to_csv(args.out, meta={"version": __version__})
    print(f"wrote {args.out}: {len(result.points)} sweep points, "
          f"{cfg.replicates} replicates each")
    return EXIT_OK


def cmd_fit(args) -> int:
    data = load_dataset(args.data)
    doc = {"meta": _meta({"data": str(Path(args.data).resolve()),
                          "aggregator": args.aggregator,
                          "train_count": args.train_count,
                          "include_self": not args.exclude_self})}
    doc.update(fit_report(data, aggregator=args.aggregator,
                          train_count=args.train_count,
                          include_self=not args.exclude_self))
    _emit_json(doc, args.out)
    return EXIT_OK


def _add_matrix_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--matrix", help="path to a matrix CSV or JSON wrapper")
    p.add_argument("--gen", choices=["er", "ws"], help="generate a random network instead")
    p.add_argument("--n", type=int, default=10, help="node count for --gen")
    p.add_argument("--p", type=float, default=0.3,
                   help="link probability (er) or rewiring probability (ws)")
    p.add_argument("--degree", type=int, default=None, help="mean out-degree (ws only)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctwm",
        description="Weighted-median opinion dynamics: simulation, cohesion "
                    "analysis, pinning control, sweeps, and inertia fitting.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate the dynamics and classify the final state")
    _add_matrix_source(p)
    p.add_argument("--x0", default="random",
                   help="comma-separated opinions, or 'random' (seeded by --seed)")
    p.add_argument("--x0-range", default="-1,1", help="lo,hi for random initial opinions")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--t-max", type=float, default=100.0)
    p.add_argument("--eq-tol", type=float, default=1e-9)
    p.add_argument("--stride", type=int, default=10, help="record every this many steps")
    p.add_argument("--cluster-tol", type=float, default=1e-5)
    p.add_argument("--method", choices=["rk4", "euler"], default="rk4")
    p.add_argument("--pin", help="comma-separated pinned nodes (enables pinned dynamics)")
    p.add_argument("--gamma", type=float, default=0.5, help="attraction strength on pinned nodes")
    p.add_argument("--target", type=float, default=0.0, help="external target opinion")
    p.add_argument("--pinned-form", choices=["blend", "injection"], default="blend")
    p.add_argument("--out-dir", default=".", help="directory for trajectory.csv / equilibrium.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cohesion", help="minimal cohesive sets of a network")
    _add_matrix_source(p)
    p.add_argument("--limit", type=int, default=None, help="subset exploration budget")
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p.set_defaults(func=cmd_cohesion)

    p = sub.add_parser("pinning", help="minimal pinning set, or feasibility of a given one")
    _add_matrix_source(p)
    p.add_argument("--pinned", help="check this comma-separated pinned set instead of solving")
    p.add_argument("--limit", type=int, default=None, help="enumeration budget")
    p.add_argument("--budget", type=int, default=None, help="branch-and-bound budget")
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p.set_defaults(func=cmd_pinning)

    p = sub.add_parser("sweep", help="minimal pinning number across a parameter sweep")
    p.add_argument("--family", choices=["er", "ws"], required=True)
    p.add_argument("--n", type=int, default=15)
    p.add_argument("--params", required=True, help="comma-separated sweep values")
    p.add_argument("--replicates", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--degree", type=int, default=None, help="mean out-degree (ws)")
    p.add_argument("--budget", type=int, default=2_000_000, help="enumeration budget per replicate")
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel workers (default: available cores)")
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit inertia coefficients on an estimation dataset")
    p.add_argument("--data", required=True, help="CSV: experiment,participant,question,round,estimate")
    p.add_argument("--aggregator", choices=["median", "average"], default="median")
    p.add_argument("--train-count", type=int, default=20)
    p.add_argument("--exclude-self", action="store_true",
                   help="exclude the predicting participant from the aggregate")
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CtwmError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
