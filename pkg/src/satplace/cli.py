"""Command line interface.

``satplace place`` solves a single placement instance and prints a JSON
document; ``satplace bench`` runs a repeated-trial experiment and writes a
CSV or JSON report.  Exit codes: 0 on success, 2 on invalid input, 3 when an
exact solve is refused because the instance is too large.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, objectives, solvers
from .objectives import ObjectiveConfig
from .paths import build_reliability_tables
from .solvers import InstanceTooLargeError
from .topology import FAILURE_CASES, TopologyError, bundled_names, load_topology, sample_failures

_PLACE_MODES = {
    "gateway": ("latency", "reliability"),
    "controller": ("overhead", "reliability"),
    "joint": ("reliability", "latency"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satplace",
        description="Gateway and controller placement on terrestrial topologies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    place = sub.add_parser("place", help="solve one placement instance and print JSON")
    place.add_argument("stage", choices=("gateway", "controller", "joint"))
    place.add_argument("--topo", required=True, help="bundled topology name or GraphML path")
    place.add_argument("--mode", default="reliability", help="objective; see stage help")
    place.add_argument("--method", default="approx", choices=("approx", "exact"))
    place.add_argument("--case", type=int, default=None, help="failure case 1-4; omit for a failure-free instance")
    place.add_argument("--seed", type=int, default=0)
    place.add_argument("--restarts", type=int, default=100)
    place.add_argument("--epsilon", type=float, default=0.1)
    place.add_argument("--alpha", type=float, default=1.0)
    place.add_argument("--beta", type=float, default=1.0)
    place.add_argument("--psi", type=float, default=1.0)
    place.add_argument("--lcon", type=float, default=0.1)
    place.add_argument("--gmax", type=int, default=5)
    place.add_argument("--kmax", type=int, default=5)
    place.add_argument("--kpaths", type=int, default=1)
    place.add_argument("--gateways", default=None, help="comma-separated gateway ids for the controller stage")
    place.add_argument("--out", default=None, help="write JSON here instead of stdout")

    run = sub.add_parser("bench", help="run a benchmark experiment")
    run.add_argument("--exp", required=True, choices=bench.EXPERIMENTS)
    run.add_argument("--topo", action="append", default=None, help="repeatable; defaults to Nsfnet, Sinet, Ans")
    run.add_argument("--trials", type=int, default=100)
    run.add_argument("--case", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--sweep", action="append", default=[], metavar="KEY=V1,V2,...", help="repeatable parameter sweep")
    run.add_argument("--epsilon", type=float, default=0.1)
    run.add_argument("--restarts", type=int, default=100)
    run.add_argument("--alpha", type=float, default=1.0)
    run.add_argument("--beta", type=float, default=1.0)
    run.add_argument("--psi", type=float, default=1.0)
    run.add_argument("--lcon", type=float, default=0.1)
    run.add_argument("--gmax", type=int, default=5)
    run.add_argument("--kmax", type=int, default=5)
    run.add_argument("--kpaths", type=int, default=1)
    run.add_argument("--format", default="csv", choices=("csv", "json"))
    run.add_argument("--out", default="results")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--verify", action="store_true", help="recompute per-row metrics from the policies")
    run.add_argument("--no-exact", action="store_true", help="skip exact enumeration baselines")
    run.add_argument("--dump-tables", action="store_true", help="also write latency/reliability matrices")

    topos = sub.add_parser("topologies", help="list bundled topologies")
    topos.set_defaults(stage=None)
    return parser


def _parse_sweep(items: list[str]) -> dict:
    sweep: dict = {}
    int_keys = {"g_max", "k_max", "k_paths", "case"}
    for item in items:
        if "=" not in item:
            raise ValueError(f"sweep '{item}' is not KEY=V1,V2,...")
        key, _, raw = item.partition("=")
        key = key.strip()
        values = []
        for token in raw.split(","):
            token = token.strip()
            if not token:
                continue
            values.append(int(token) if key in int_keys else float(token))
        if not values:
            raise ValueError(f"sweep '{item}' has no values")
        sweep[key] = values
    return sweep


def _case_seed_pair(seed: int) -> tuple[int, int]:
    state = np.random.SeedSequence(seed).generate_state(2)
    return int(state[0]), int(state[1])


def _policy_doc(policy, topo) -> dict:
    return {
        "open": list(policy.open),
        "open_names": [topo.nodes[i].name for i in policy.open],
        "assign": list(policy.assign),
    }


def _run_place(args) -> dict:
    if args.mode not in _PLACE_MODES[args.stage]:
        raise ValueError(
            f"mode '{args.mode}' is not valid for stage '{args.stage}'; choose from {_PLACE_MODES[args.stage]}"
        )
    topo = load_topology(args.topo)
    solver_seed = args.seed
    if args.case is not None:
        if args.case not in FAILURE_CASES:
            raise ValueError(f"case must be one of {sorted(FAILURE_CASES)}")
        sample_seed, solver_seed = _case_seed_pair(args.seed)
        topo = sample_failures(topo, args.case, sample_seed)
    cfg = ObjectiveConfig(
        alpha=args.alpha,
        beta=args.beta,
        psi=args.psi,
        l_con=args.lcon,
        g_max=args.gmax,
        k_max=args.kmax,
        k_paths=args.kpaths,
    )
    tables = build_reliability_tables(topo, cfg.k_paths)
    doc = {
        "stage": args.stage,
        "topology": args.topo,
        "n_nodes": topo.n,
        "mode": args.mode,
        "method": args.method,
        "seed": args.seed,
        "case": args.case,
    }

    if args.stage == "gateway":
        if args.mode == "latency":
            oracle = solvers.gateway_complement_oracle(tables, cfg)
            if args.method == "exact":
                result = solvers.exact_enumerate(oracle)
            else:
                result = solvers.double_greedy(oracle, solver_seed, args.restarts, ensure_nonempty=True)
            policy = objectives.build_gateway_policy(result.open, tables, "latency")
            doc["objective"] = objectives.gateway_cost(result.open, tables, cfg)
        else:
            oracle = solvers.gateway_utility_oracle(tables)
            if args.method == "exact":
                result = solvers.exact_enumerate(oracle, cfg.g_max)
            else:
                result = solvers.threshold_greedy(oracle, cfg.g_max, args.epsilon)
            policy = objectives.build_gateway_policy(result.open, tables, "reliability")
            doc["objective"] = objectives.gateway_utility(result.open, tables)
        doc["gateway"] = _policy_doc(policy, topo)
        doc["avg_latency_ms"] = objectives.assignment_latency_ms(policy.assign, tables)
        doc["avg_reliability"] = objectives.gateway_assignment_reliability(policy.assign, tables)
        doc["evaluations"] = result.evaluations

    elif args.stage == "controller":
        if args.mode == "overhead":
            if args.gateways is not None:
                ids = tuple(int(tok) for tok in args.gateways.split(",") if tok.strip())
                gw_policy = objectives.build_gateway_policy(ids, tables, "latency")
            else:
                gw_oracle = solvers.gateway_complement_oracle(tables, cfg)
                if args.method == "exact":
                    gw_result = solvers.exact_enumerate(gw_oracle)
                else:
                    gw_result = solvers.double_greedy(gw_oracle, solver_seed + 1, args.restarts, ensure_nonempty=True)
                gw_policy = objectives.build_gateway_policy(gw_result.open, tables, "latency")
            oracle = solvers.controller_complement_oracle(tables, gw_policy, cfg)
            if args.method == "exact":
                result = solvers.exact_enumerate(oracle)
            else:
                result = solvers.double_greedy(oracle, solver_seed, args.restarts, ensure_nonempty=True)
            policy = objectives.build_controller_policy(result.open, tables, "latency")
            doc["objective"] = objectives.controller_cost(result.open, gw_policy, tables, cfg)
            doc["gateway"] = _policy_doc(gw_policy, topo)
        else:
            oracle = solvers.controller_utility_oracle(tables)
            if args.method == "exact":
                result = solvers.exact_enumerate(oracle, cfg.k_max)
            else:
                result = solvers.threshold_greedy(oracle, cfg.k_max, args.epsilon)
            policy = objectives.build_controller_policy(result.open, tables, "reliability")
            doc["objective"] = objectives.controller_utility(result.open, tables)
        doc["controller"] = _policy_doc(policy, topo)
        doc["avg_latency_ms"] = objectives.assignment_latency_ms(policy.assign, tables)
        doc["avg_reliability"] = objectives.controller_assignment_reliability(policy.assign, tables)
        doc["evaluations"] = result.evaluations

    else:
        joint_mode = "reliability" if args.mode == "reliability" else "latency_overhead"
        solution = solvers.solve_joint(
            tables,
            cfg,
            mode=joint_mode,
            method=args.method,
            seed=solver_seed,
            restarts=args.restarts,
            epsilon=args.epsilon,
        )
        doc["gateway"] = _policy_doc(solution.gateway_policy, topo)
        doc["controller"] = _policy_doc(solution.controller_policy, topo)
        doc["metrics"] = {k: v for k, v in sorted(solution.metrics.items())}
        doc["evaluations"] = {
            "gateway": solution.gateway_result.evaluations,
            "controller": solution.controller_result.evaluations,
        }
    return doc


def _run_bench(args) -> int:
    names = tuple(args.topo) if args.topo else bench.DEFAULT_TOPOLOGIES
    spec = bench.ExperimentSpec(
        experiment=args.exp,
        topologies=names,
        failure_case=args.case,
        trials=args.trials,
        seed=args.seed,
        cfg=ObjectiveConfig(
            alpha=args.alpha,
            beta=args.beta,
            psi=args.psi,
            l_con=args.lcon,
            g_max=args.gmax,
            k_max=args.kmax,
            k_paths=args.kpaths,
        ),
        sweep=_parse_sweep(args.sweep),
        epsilon=args.epsilon,
        restarts=args.restarts,
        exact="off" if args.no_exact else "auto",
        jobs=args.jobs,
        verify=args.verify,
    )
    report = bench.run_experiment(spec)
    out = Path(args.out) / f"exp{args.exp}.{args.format}"
    bench.emit_report(report, args.format, out)
    print(f"wrote {out}")
    for agg in report.aggregates:
        if agg["metric"] == "objective":
            print(
                f"{agg['topology']} {agg['method']}: objective mean={agg['mean']:.6g} std={agg['std']:.6g}"
            )
    if args.dump_tables:
        for t_idx, name in enumerate(names):
            topo = load_topology(name)
            state = np.random.SeedSequence(args.seed, spawn_key=(0, t_idx, 0)).generate_state(2)
            sampled = sample_failures(topo, args.case, int(state[0]))
            tables = build_reliability_tables(sampled, args.kpaths)
            for written in bench.dump_tables(Path(str(name)).stem, sampled, tables, Path(args.out) / "tables"):
                print(f"wrote {written}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "place":
            doc = _run_place(args)
            text = json.dumps(doc, indent=2)
            if args.out:
                target = Path(args.out)
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_text(text + "\n", encoding="utf-8")
                print(f"wrote {target}")
            else:
                print(text)
            return 0
        if args.command == "bench":
            return _run_bench(args)
        for name in bundled_names():
            print(name)
        return 0
    except InstanceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (TopologyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
