"""Benchmark harness: repeated-trial experiments with CSV/JSON reports.

Four experiments cover the two placement stages under both objectives:

* ``A`` -- gateway deployment cost (count + weighted latency), unbudgeted
* ``B`` -- gateway satellite reliability under a gateway budget
* ``C`` -- controller latency + synchronization cost, unbudgeted
* ``D`` -- controller terrestrial reliability under a controller budget

Each trial draws fresh failure probabilities, solves with the approximation
algorithm and, when the instance is small enough, with exact enumeration for
the approximation ratio.  Every per-trial row carries a deterministic
``time_ms`` value modeled as oracle evaluations times a nominal 0.001 ms per
evaluation, so reports for a given seed are reproducible byte for byte;
measured wall-clock time is reported once per run as ``wall_ms_total``.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np
from joblib import Parallel, delayed

from . import objectives, solvers
from .objectives import ObjectiveConfig
from .paths import PathTables, build_reliability_tables
from .topology import DISPLAY_NAMES, Topology, load_topology, sample_failures

EXPERIMENTS = ("A", "B", "C", "D")
DEFAULT_TOPOLOGIES = ("Nsfnet", "Sinet", "Ans")
SWEEPABLE = ("alpha", "beta", "l_con", "g_max", "k_max", "k_paths", "case")

#: Nominal cost per oracle evaluation used for the deterministic ``time_ms``
#: column (1 evaluation = 1 microsecond).
MODEL_EVAL_MS = 0.001

#: Exact enumeration is added automatically only below these sizes; larger
#: instances report the approximation alone.
AUTO_EXACT_GROUND = 18
AUTO_EXACT_COMBINATIONS = 200_000

CSV_HEADER = "topology,trial,method,objective,avg_latency_ms,avg_reliability,facilities,time_ms,approx_ratio"
AGG_HEADER = "topology,method,metric,mean,std"
_AGG_METRICS = ("objective", "avg_latency_ms", "avg_reliability", "facilities", "time_ms", "approx_ratio")


def _round9(x: float) -> float:
    return float(format(x, ".9g"))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return format(x, ".9g")


@dataclass(frozen=True)
class Row:
    """One (trial, method) outcome; metric floats are pre-rounded to nine
    significant digits."""

    topology: str
    trial: int
    method: str
    objective: float
    avg_latency_ms: float
    avg_reliability: float
    facilities: int
    time_ms: float
    approx_ratio: float | None
    sweep: dict = field(default_factory=dict)
    base_topology: str = ""
    n_nodes: int = 0

    def to_dict(self) -> dict:
        return {
            "topology": self.topology,
            "trial": self.trial,
            "method": self.method,
            "objective": self.objective,
            "avg_latency_ms": self.avg_latency_ms,
            "avg_reliability": self.avg_reliability,
            "facilities": self.facilities,
            "time_ms": self.time_ms,
            "approx_ratio": self.approx_ratio,
            "sweep": dict(self.sweep),
        }

    def to_csv_line(self) -> str:
        return ",".join(
            [
                self.topology,
                str(self.trial),
                self.method,
                _fmt(self.objective),
                _fmt(self.avg_latency_ms),
                _fmt(self.avg_reliability),
                str(self.facilities),
                _fmt(self.time_ms),
                _fmt(self.approx_ratio),
            ]
        )


@dataclass
class ExperimentSpec:
    """What to run: experiment id, topologies, failure case, trial count,
    solver knobs and an optional parameter sweep grid."""

    experiment: str
    topologies: tuple[str, ...] = DEFAULT_TOPOLOGIES
    failure_case: int = 1
    trials: int = 100
    seed: int = 0
    cfg: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    sweep: dict = field(default_factory=dict)
    epsilon: float = 0.1
    restarts: int = 100
    exact: str = "auto"
    jobs: int = 1
    verify: bool = False

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment '{self.experiment}'; expected one of {EXPERIMENTS}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.exact not in ("auto", "off"):
            raise ValueError("exact must be 'auto' or 'off'")
        for key in self.sweep:
            if key not in SWEEPABLE:
                raise ValueError(f"cannot sweep '{key}'; sweepable keys: {SWEEPABLE}")


@dataclass
class ExperimentReport:
    """All rows of one experiment run plus per-(topology, method) mean/std
    aggregates and the total measured wall time."""

    experiment: str
    seed: int
    failure_case: int
    trials: int
    config: dict
    sweep: dict
    rows: list[Row]
    aggregates: list[dict]
    wall_ms_total: float


def aggregate_row_dicts(rows: list[dict]) -> list[dict]:
    """Mean and population standard deviation per (topology, method, metric),
    computed from serialized rows so re-aggregating a parsed report
    reproduces the stored aggregates exactly."""
    groups: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        groups.setdefault((row["topology"], row["method"]), []).append(row)
    out = []
    for (topo, method) in sorted(groups):
        bucket = groups[(topo, method)]
        for metric in _AGG_METRICS:
            values = [row[metric] for row in bucket if row[metric] is not None]
            if not values:
                continue
            arr = np.asarray(values, dtype=float)
            out.append(
                {
                    "topology": topo,
                    "method": method,
                    "metric": metric,
                    "mean": _round9(float(arr.mean())),
                    "std": _round9(float(arr.std())),
                }
            )
    return out


def _sweep_points(spec: ExperimentSpec) -> list[dict]:
    if not spec.sweep:
        return [{}]
    keys = sorted(spec.sweep)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(spec.sweep[k] for k in keys))]


def _point_label(name: str, point: dict) -> str:
    if not point:
        return name
    parts = [f"{k}={_fmt(v) if isinstance(v, float) else v}" for k, v in sorted(point.items())]
    return name + "|" + "|".join(parts)


def _apply_point(cfg: ObjectiveConfig, case: int, point: dict) -> tuple[ObjectiveConfig, int]:
    fields = {k: v for k, v in point.items() if k != "case"}
    if "g_max" in fields:
        fields["g_max"] = int(fields["g_max"])
    if "k_max" in fields:
        fields["k_max"] = int(fields["k_max"])
    if "k_paths" in fields:
        fields["k_paths"] = int(fields["k_paths"])
    if fields:
        cfg = dataclasses.replace(cfg, **fields)
    if "case" in point:
        case = int(point["case"])
    return cfg, case


def _exact_enabled(spec_exact: str, ground: int, budget: int | None) -> bool:
    if spec_exact == "off":
        return False
    if budget is None:
        return ground <= AUTO_EXACT_GROUND
    return math.comb(ground, budget) <= AUTO_EXACT_COMBINATIONS


def _gateway_metrics(policy, tables: PathTables) -> tuple[float, float]:
    return (
        objectives.assignment_latency_ms(policy.assign, tables),
        objectives.gateway_assignment_reliability(policy.assign, tables),
    )


def _controller_metrics(policy, tables: PathTables) -> tuple[float, float]:
    return (
        objectives.assignment_latency_ms(policy.assign, tables),
        objectives.controller_assignment_reliability(policy.assign, tables),
    )


def _verify_gateway(policy, tables, avg_lat, avg_rel) -> None:
    n = tables.d.shape[0]
    lat = sum(float(tables.d[policy.assign[v], v]) for v in range(n)) / n
    rel = sum(float(tables.r_sat[tables.gateway_ids.index(policy.assign[v]), v]) for v in range(n)) / n
    if abs(lat - avg_lat) > 1e-9 or abs(rel - avg_rel) > 1e-9:
        raise RuntimeError("verification failed: gateway metrics do not recompute from the policy")


def _verify_controller(policy, tables, avg_lat, avg_rel) -> None:
    n = tables.d.shape[0]
    lat = sum(float(tables.d[policy.assign[v], v]) for v in range(n)) / n
    rel = sum(float(tables.r_ctl[tables.controller_ids.index(policy.assign[v]), v]) for v in range(n)) / n
    if abs(lat - avg_lat) > 1e-9 or abs(rel - avg_rel) > 1e-9:
        raise RuntimeError("verification failed: controller metrics do not recompute from the policy")


def _make_row(label, base, n_nodes, trial, method, objective, avg_lat, avg_rel, result, ratio, sweep) -> Row:
    return Row(
        topology=label,
        trial=trial,
        method=method,
        objective=_round9(objective),
        avg_latency_ms=_round9(avg_lat),
        avg_reliability=_round9(avg_rel),
        facilities=len(result.open),
        time_ms=_round9(result.evaluations * MODEL_EVAL_MS),
        approx_ratio=None if ratio is None else _round9(ratio),
        sweep=sweep,
        base_topology=base,
        n_nodes=n_nodes,
    )


def _ratio(approx_value: float, exact_value: float) -> float:
    if exact_value == 0.0:
        return 1.0
    return approx_value / exact_value


def run_trial(
    experiment: str,
    base_topo: Topology,
    label: str,
    base_name: str,
    cfg: ObjectiveConfig,
    case: int,
    trial: int,
    sample_seed: int,
    solver_seed: int,
    epsilon: float,
    restarts: int,
    exact: str,
    verify: bool,
) -> list[Row]:
    """One sampled instance solved by the approximation and, when feasible,
    by exact enumeration.  Returns one row per method."""
    topo = sample_failures(base_topo, case, sample_seed)
    tables = build_reliability_tables(topo, cfg.k_paths)
    n = topo.n
    rows: list[Row] = []

    if experiment == "A":
        oracle = solvers.gateway_complement_oracle(tables, cfg)
        approx = solvers.double_greedy(oracle, solver_seed, restarts, ensure_nonempty=True)
        cost_a = objectives.gateway_cost(approx.open, tables, cfg)
        pol_a = objectives.build_gateway_policy(approx.open, tables, "latency")
        lat_a, rel_a = _gateway_metrics(pol_a, tables)
        if verify:
            _verify_gateway(pol_a, tables, lat_a, rel_a)
        ratio = None
        if _exact_enabled(exact, len(tables.gateway_ids), None):
            exact_res = solvers.exact_enumerate(solvers.gateway_complement_oracle(tables, cfg))
            cost_e = objectives.gateway_cost(exact_res.open, tables, cfg)
            pol_e = objectives.build_gateway_policy(exact_res.open, tables, "latency")
            lat_e, rel_e = _gateway_metrics(pol_e, tables)
            ratio = _ratio(approx.value, exact_res.value)
            rows.append(_make_row(label, base_name, n, trial, "exact", cost_e, lat_e, rel_e, exact_res, None, {}))
        rows.insert(0, _make_row(label, base_name, n, trial, "approx", cost_a, lat_a, rel_a, approx, ratio, {}))

    elif experiment == "B":
        oracle = solvers.gateway_utility_oracle(tables)
        approx = solvers.threshold_greedy(oracle, cfg.g_max, epsilon)
        pol_a = objectives.build_gateway_policy(approx.open, tables, "reliability")
        lat_a, rel_a = _gateway_metrics(pol_a, tables)
        if verify:
            _verify_gateway(pol_a, tables, lat_a, rel_a)
        ratio = None
        if _exact_enabled(exact, len(tables.gateway_ids), cfg.g_max):
            exact_res = solvers.exact_enumerate(solvers.gateway_utility_oracle(tables), cfg.g_max)
            pol_e = objectives.build_gateway_policy(exact_res.open, tables, "reliability")
            lat_e, rel_e = _gateway_metrics(pol_e, tables)
            ratio = _ratio(approx.value, exact_res.value)
            rows.append(_make_row(label, base_name, n, trial, "exact", exact_res.value, lat_e, rel_e, exact_res, None, {}))
        rows.insert(0, _make_row(label, base_name, n, trial, "approx", approx.value, lat_a, rel_a, approx, ratio, {}))

    elif experiment == "C":
        # Both methods share one latency-mode gateway input so the controller
        # comparison is not confounded by differing gateway stages.
        gw_oracle = solvers.gateway_complement_oracle(tables, cfg)
        if _exact_enabled(exact, len(tables.gateway_ids), None):
            gw_stage = solvers.exact_enumerate(gw_oracle)
        else:
            gw_stage = solvers.double_greedy(gw_oracle, solver_seed + 1, restarts, ensure_nonempty=True)
        gw_policy = objectives.build_gateway_policy(gw_stage.open, tables, "latency")

        oracle = solvers.controller_complement_oracle(tables, gw_policy, cfg)
        approx = solvers.double_greedy(oracle, solver_seed, restarts, ensure_nonempty=True)
        cost_a = objectives.controller_cost(approx.open, gw_policy, tables, cfg)
        pol_a = objectives.build_controller_policy(approx.open, tables, "latency")
        lat_a, rel_a = _controller_metrics(pol_a, tables)
        if verify:
            _verify_controller(pol_a, tables, lat_a, rel_a)
        ratio = None
        if _exact_enabled(exact, len(tables.controller_ids), None):
            exact_res = solvers.exact_enumerate(
                solvers.controller_complement_oracle(tables, gw_policy, cfg)
            )
            cost_e = objectives.controller_cost(exact_res.open, gw_policy, tables, cfg)
            pol_e = objectives.build_controller_policy(exact_res.open, tables, "latency")
            lat_e, rel_e = _controller_metrics(pol_e, tables)
            ratio = _ratio(approx.value, exact_res.value)
            rows.append(_make_row(label, base_name, n, trial, "exact", cost_e, lat_e, rel_e, exact_res, None, {}))
        rows.insert(0, _make_row(label, base_name, n, trial, "approx", cost_a, lat_a, rel_a, approx, ratio, {}))

    else:  # D
        oracle = solvers.controller_utility_oracle(tables)
        approx = solvers.threshold_greedy(oracle, cfg.k_max, epsilon)
        pol_a = objectives.build_controller_policy(approx.open, tables, "reliability")
        lat_a, rel_a = _controller_metrics(pol_a, tables)
        if verify:
            _verify_controller(pol_a, tables, lat_a, rel_a)
        ratio = None
        if _exact_enabled(exact, len(tables.controller_ids), cfg.k_max):
            exact_res = solvers.exact_enumerate(solvers.controller_utility_oracle(tables), cfg.k_max)
            pol_e = objectives.build_controller_policy(exact_res.open, tables, "reliability")
            lat_e, rel_e = _controller_metrics(pol_e, tables)
            ratio = _ratio(approx.value, exact_res.value)
            rows.append(_make_row(label, base_name, n, trial, "exact", exact_res.value, lat_e, rel_e, exact_res, None, {}))
        rows.insert(0, _make_row(label, base_name, n, trial, "approx", approx.value, lat_a, rel_a, approx, ratio, {}))

    return rows


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """Run every (sweep point, topology, trial) unit and aggregate.

    Each unit derives its sampling and solver seeds from the spec seed and
    its own indices, so results are identical for any ``jobs`` setting and
    any execution order.
    """
    started = time.perf_counter()
    points = _sweep_points(spec)
    base_topos = {name: load_topology(name) for name in spec.topologies}

    units = []
    for p_idx, point in enumerate(points):
        cfg, case = _apply_point(spec.cfg, spec.failure_case, point)
        for t_idx, name in enumerate(spec.topologies):
            base = DISPLAY_NAMES.get(str(name).lower(), str(name))
            label = _point_label(base, point)
            for trial in range(spec.trials):
                state = np.random.SeedSequence(
                    spec.seed, spawn_key=(p_idx, t_idx, trial)
                ).generate_state(2)
                units.append(
                    (
                        base_topos[name],
                        label,
                        base,
                        cfg,
                        case,
                        trial,
                        int(state[0]),
                        int(state[1]),
                        point,
                    )
                )

    def job(unit):
        topo, label, base, cfg, case, trial, sample_seed, solver_seed, point = unit
        rows = run_trial(
            spec.experiment,
            topo,
            label,
            base,
            cfg,
            case,
            trial,
            sample_seed,
            solver_seed,
            spec.epsilon,
            spec.restarts,
            spec.exact,
            spec.verify,
        )
        return [dataclasses.replace(r, sweep=dict(point)) for r in rows]

    if spec.jobs == 1:
        nested = [job(unit) for unit in units]
    else:
        nested = Parallel(n_jobs=spec.jobs)(delayed(job)(unit) for unit in units)
    rows = [row for chunk in nested for row in chunk]
    aggregates = aggregate_row_dicts([r.to_dict() for r in rows])
    config = {
        "alpha": spec.cfg.alpha,
        "beta": spec.cfg.beta,
        "psi": spec.cfg.psi,
        "l_con": spec.cfg.l_con,
        "g_max": spec.cfg.g_max,
        "k_max": spec.cfg.k_max,
        "k_paths": spec.cfg.k_paths,
        "epsilon": spec.epsilon,
        "restarts": spec.restarts,
    }
    wall = (time.perf_counter() - started) * 1000.0
    return ExperimentReport(
        experiment=spec.experiment,
        seed=spec.seed,
        failure_case=spec.failure_case,
        trials=spec.trials,
        config=config,
        sweep={k: list(v) for k, v in spec.sweep.items()},
        rows=rows,
        aggregates=aggregates,
        wall_ms_total=wall,
    )


def emit_report(report: ExperimentReport, format: str, path: str | FsPath) -> FsPath:
    """Write the report as CSV (per-trial section, blank line, aggregate
    section) or JSON (rows plus aggregates).  Returns the written path."""
    path = FsPath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if format == "csv":
        lines = [CSV_HEADER]
        lines.extend(row.to_csv_line() for row in report.rows)
        lines.append("")
        lines.append(AGG_HEADER)
        for agg in report.aggregates:
            lines.append(
                ",".join(
                    [agg["topology"], agg["method"], agg["metric"], _fmt(agg["mean"]), _fmt(agg["std"])]
                )
            )
        path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    elif format == "json":
        doc = {
            "experiment": report.experiment,
            "seed": report.seed,
            "failure_case": report.failure_case,
            "trials": report.trials,
            "config": report.config,
            "sweep": report.sweep,
            "rows": [row.to_dict() for row in report.rows],
            "aggregates": report.aggregates,
            "wall_ms_total": report.wall_ms_total,
        }
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8", newline="\n")
    else:
        raise ValueError(f"unknown report format '{format}'")
    return path


def _mean_by(rows: list[Row], key, metric) -> dict:
    groups: dict = {}
    for row in rows:
        groups.setdefault(key(row), []).append(getattr(row, metric))
    return {k: float(np.mean([v for v in vals if v is not None])) for k, vals in groups.items()}


def _require_sweep(report: ExperimentReport, key: str, figure: str) -> list:
    if key not in report.sweep:
        raise ValueError(f"figure '{figure}' needs a sweep over '{key}'")
    return report.sweep[key]


def plot_data(report: ExperimentReport, figure: str) -> dict:
    """Extract columnar x/y series for one of the supported figures.

    Figures: ``lat_gw`` (objective and latency per topology), ``gw_tradeoff``
    (gateway count and latency vs alpha), ``rel_cases`` (reliability vs
    failure case), ``rel_vs_budget`` (reliability vs gateway budget),
    ``sync_tradeoff`` (sync cost and latency vs beta), ``runtime`` (modeled
    solver time vs topology size).
    """
    rows = report.rows
    methods = sorted({r.method for r in rows})
    series = []

    if figure == "lat_gw":
        topos = sorted({r.topology for r in rows})
        for metric in ("objective", "avg_latency_ms"):
            for method in methods:
                means = _mean_by([r for r in rows if r.method == method], lambda r: r.topology, metric)
                series.append(
                    {"label": f"{metric}/{method}", "x": topos, "y": [means[t] for t in topos]}
                )
    elif figure == "gw_tradeoff":
        values = _require_sweep(report, "alpha", figure)
        for metric in ("facilities", "avg_latency_ms"):
            for method in methods:
                means = _mean_by(
                    [r for r in rows if r.method == method], lambda r: r.sweep["alpha"], metric
                )
                series.append(
                    {"label": f"{metric}/{method}", "x": list(values), "y": [means[v] for v in values]}
                )
    elif figure == "rel_cases":
        values = _require_sweep(report, "case", figure)
        for base in sorted({r.base_topology for r in rows}):
            for method in methods:
                sub = [r for r in rows if r.method == method and r.base_topology == base]
                means = _mean_by(sub, lambda r: r.sweep["case"], "avg_reliability")
                series.append(
                    {"label": f"{base}/{method}", "x": list(values), "y": [means[v] for v in values]}
                )
    elif figure == "rel_vs_budget":
        key = "g_max" if report.experiment in ("A", "B") else "k_max"
        values = _require_sweep(report, key, figure)
        for method in methods:
            means = _mean_by([r for r in rows if r.method == method], lambda r: r.sweep[key], "avg_reliability")
            series.append({"label": method, "x": list(values), "y": [means[v] for v in values]})
    elif figure == "sync_tradeoff":
        values = _require_sweep(report, "beta", figure)
        for method in methods:
            sync_means: dict = {}
            lat_means: dict = {}
            for beta in values:
                sub = [r for r in rows if r.method == method and r.sweep["beta"] == beta]
                # objective = c1 + beta * sync with c1 = avg latency * n
                syncs = [(r.objective - r.avg_latency_ms * r.n_nodes) / beta for r in sub]
                sync_means[beta] = float(np.mean(syncs))
                lat_means[beta] = float(np.mean([r.avg_latency_ms for r in sub]))
            series.append({"label": f"sync/{method}", "x": list(values), "y": [sync_means[v] for v in values]})
            series.append({"label": f"latency/{method}", "x": list(values), "y": [lat_means[v] for v in values]})
    elif figure == "runtime":
        sizes = sorted({r.n_nodes for r in rows})
        for method in methods:
            means = _mean_by([r for r in rows if r.method == method], lambda r: r.n_nodes, "time_ms")
            series.append({"label": method, "x": sizes, "y": [means[s] for s in sizes]})
    else:
        raise ValueError(f"unknown figure '{figure}'")
    return {"figure": figure, "series": series}


def dump_tables(name: str, topo: Topology, tables: PathTables, out_dir: str | FsPath) -> list[FsPath]:
    """Write the latency and reliability matrices as CSVs with node-name
    headers, for debugging."""
    out_dir = FsPath(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    node_names = [nd.name for nd in topo.nodes]
    written = []

    def write(filename, row_names, matrix):
        lines = ["," + ",".join(node_names)]
        for label, row in zip(row_names, matrix):
            lines.append(label + "," + ",".join(_fmt(float(x)) for x in row))
        target = out_dir / filename
        target.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        written.append(target)

    write(f"{name}_d.csv", node_names, tables.d)
    write(f"{name}_r_sat.csv", [node_names[i] for i in tables.gateway_ids], tables.r_sat)
    write(f"{name}_r_ctl.csv", [node_names[i] for i in tables.controller_ids], tables.r_ctl)
    return written
