"""Placement solvers: two submodular approximation algorithms and an exact
enumeration baseline.

``double_greedy`` maximizes an unconstrained non-negative submodular set
function (used on the bounded cost complements); a single pass gives a 1/2
approximation in expectation and runs in linear time, and the solver keeps
the best of a configurable number of restarts.  ``threshold_greedy``
maximizes a monotone submodular function under a cardinality budget with a
descending acceptance threshold, giving a (1 - 1/e - epsilon) guarantee.
``exact_enumerate`` scans every admissible subset and is the optimality
oracle both algorithms are benchmarked against.

All randomness flows from explicit integer seeds through
``numpy.random.SeedSequence``, so results are reproducible; tie-breaking
prefers smaller sets, then lexicographic order.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import objectives
from .objectives import ObjectiveConfig
from .paths import PathTables


class InstanceTooLargeError(ValueError):
    """Raised when exact enumeration is requested on an oversized instance."""


class SetFunctionOracle:
    """A set function over a fixed ground set with call counting.

    ``evaluate`` must be deterministic and defined on every subset of the
    ground set including the empty set (the placement oracles extend their
    objective with value 0 there).
    """

    def __init__(self, ground_set, evaluate, sense: str = "maximize", name: str = ""):
        self.ground_set = tuple(sorted(ground_set))
        self._evaluate = evaluate
        self.sense = sense
        self.name = name
        self.calls = 0

    def evaluate(self, subset) -> float:
        self.calls += 1
        return self._evaluate(frozenset(subset))


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one solver invocation.

    ``wall_time_ms`` is measured wall-clock time and is the only field not
    reproducible across runs; everything else is fully determined by the
    oracle and the seed.
    """

    open: tuple[int, ...]
    value: float
    evaluations: int
    wall_time_ms: float
    seed: int

    def stable_dict(self) -> dict:
        """The reproducible fields, for serialization and comparisons."""
        return {
            "open": list(self.open),
            "value": self.value,
            "evaluations": self.evaluations,
            "seed": self.seed,
        }


def _double_greedy_once(oracle: SetFunctionOracle, rng) -> tuple[set, float]:
    """One randomized double-greedy pass over the ground set.

    Keeps a growing lower set and a shrinking upper set; element ``i`` is
    included with probability a+/(a+ + b+) where ``a`` is the gain of adding
    ``i`` to the lower set and ``b`` the gain of removing it from the upper
    set (both clipped at zero; the 0/0 case includes).  The guarantee holds
    for any visit order, so each pass draws its own order; restarts then
    explore different inclusion sequences instead of replaying near-identical
    coin flips.  Uses 2n + 3 oracle calls: two running values, two marginals
    per element, one final check.
    """
    lower: set = set()
    upper = set(oracle.ground_set)
    f_lower = oracle.evaluate(lower)
    f_upper = oracle.evaluate(upper)
    order = list(oracle.ground_set)
    rng.shuffle(order)
    for i in order:
        f_add = oracle.evaluate(lower | {i})
        f_rem = oracle.evaluate(upper - {i})
        gain_add = max(f_add - f_lower, 0.0)
        gain_rem = max(f_rem - f_upper, 0.0)
        total = gain_add + gain_rem
        p = 1.0 if total == 0.0 else gain_add / total
        if rng.random() < p:
            lower.add(i)
            f_lower = f_add
        else:
            upper.discard(i)
            f_upper = f_rem
    value = oracle.evaluate(lower)
    return lower, value


def double_greedy(
    oracle: SetFunctionOracle,
    seed: int = 0,
    restarts: int = 100,
    ensure_nonempty: bool = False,
) -> SolveResult:
    """Best-of-``restarts`` randomized double greedy.

    Restart r draws its RNG from ``SeedSequence(seed).spawn()[r]``, so runs
    are independent, reproducible, and the best-value reduction does not
    depend on execution order (ties keep the earliest restart).  With
    ``ensure_nonempty`` an empty winner is replaced by the best singleton,
    for objectives whose downstream policies forbid empty sets.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    started = time.perf_counter()
    calls_before = oracle.calls
    children = np.random.SeedSequence(seed).spawn(restarts)
    best_set: set | None = None
    best_value = -math.inf
    for child in children:
        chosen, value = _double_greedy_once(oracle, np.random.default_rng(child))
        if value > best_value:
            best_value = value
            best_set = chosen
    assert best_set is not None
    if ensure_nonempty and not best_set:
        singleton_best = None
        singleton_value = -math.inf
        for i in oracle.ground_set:
            value = oracle.evaluate({i})
            if value > singleton_value:
                singleton_value = value
                singleton_best = i
        best_set = {singleton_best}
        best_value = singleton_value
    wall = (time.perf_counter() - started) * 1000.0
    return SolveResult(
        open=tuple(sorted(best_set)),
        value=best_value,
        evaluations=oracle.calls - calls_before,
        wall_time_ms=wall,
        seed=seed,
    )


def threshold_greedy(
    oracle: SetFunctionOracle, budget: int, epsilon: float = 0.1
) -> SolveResult:
    """Descending-threshold greedy under a cardinality budget.

    Starting from the best singleton value ``top``, the acceptance threshold
    decays by a factor (1 - epsilon) per round down to ``(epsilon/n) * top``;
    each round adds every element whose marginal gain clears the threshold,
    stopping the moment the budget is reached.  Marginals are cached per
    (state, element) so unchanged rounds cost no oracle calls, which keeps
    the total within n * ceil(log_{1/(1-eps)}(n/eps)) evaluations.
    """
    ground = oracle.ground_set
    n = len(ground)
    if not 1 <= budget <= n:
        raise ValueError(f"budget must be in 1..{n}, got {budget}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    started = time.perf_counter()
    calls_before = oracle.calls
    f_empty = oracle.evaluate(())
    cache = {(0, j): oracle.evaluate((j,)) for j in ground}
    top = max(cache.values())

    chosen: list[int] = []
    members: set[int] = set()
    f_current = f_empty
    version = 0
    if top > 0.0:
        threshold = top
        floor = (epsilon / n) * top
        while threshold >= floor and len(chosen) < budget:
            for j in ground:
                if j in members or len(chosen) >= budget:
                    continue
                key = (version, j)
                if key not in cache:
                    cache[key] = oracle.evaluate(chosen + [j])
                if cache[key] - f_current >= threshold:
                    f_current = cache[key]
                    chosen.append(j)
                    members.add(j)
                    version += 1
            threshold *= 1.0 - epsilon
    value = oracle.evaluate(chosen)
    wall = (time.perf_counter() - started) * 1000.0
    return SolveResult(
        open=tuple(sorted(chosen)),
        value=value,
        evaluations=oracle.calls - calls_before,
        wall_time_ms=wall,
        seed=0,
    )


MAX_UNBUDGETED_GROUND = 25
MAX_BUDGETED_COMBINATIONS = 5_000_000


def exact_enumerate(oracle: SetFunctionOracle, budget: int | None = None) -> SolveResult:
    """Global optimum by scanning every non-empty subset (up to ``budget``
    elements when given).

    Subsets are visited smallest-first in lexicographic order with strict
    improvement, so ties resolve toward the smaller, lexicographically first
    set.  Refuses oversized instances with a size estimate rather than
    running for hours.
    """
    ground = oracle.ground_set
    n = len(ground)
    if budget is None:
        if n > MAX_UNBUDGETED_GROUND:
            raise InstanceTooLargeError(
                f"2^{n} - 1 = {2 ** n - 1} subsets exceeds the unbudgeted "
                f"enumeration limit (ground set <= {MAX_UNBUDGETED_GROUND})"
            )
        sizes = range(1, n + 1)
    else:
        if not 1 <= budget <= n:
            raise ValueError(f"budget must be in 1..{n}, got {budget}")
        count = math.comb(n, budget)
        if count > MAX_BUDGETED_COMBINATIONS:
            raise InstanceTooLargeError(
                f"C({n}, {budget}) = {count} subsets exceeds the budgeted "
                f"enumeration limit ({MAX_BUDGETED_COMBINATIONS})"
            )
        sizes = range(1, budget + 1)
    started = time.perf_counter()
    calls_before = oracle.calls
    best: tuple[int, ...] | None = None
    best_value = -math.inf
    for size in sizes:
        for combo in itertools.combinations(ground, size):
            value = oracle.evaluate(combo)
            if value > best_value:
                best_value = value
                best = combo
    assert best is not None
    value = oracle.evaluate(best)
    wall = (time.perf_counter() - started) * 1000.0
    return SolveResult(
        open=tuple(best),
        value=value,
        evaluations=oracle.calls - calls_before,
        wall_time_ms=wall,
        seed=0,
    )


# ---------------------------------------------------------------------------
# Oracles over the placement objectives (empty set extended with value 0).


def gateway_utility_oracle(tables: PathTables) -> SetFunctionOracle:
    # Inlined copy of objectives.gateway_utility without the per-call input
    # validation; enumeration makes hundreds of thousands of calls.
    r_sat = tables.r_sat
    row_of = {j: idx for idx, j in enumerate(tables.gateway_ids)}

    def evaluate(subset):
        if not subset:
            return 0.0
        rows = [row_of[j] for j in sorted(subset)]
        return float(r_sat[rows, :].max(axis=0).sum())

    return SetFunctionOracle(tables.gateway_ids, evaluate, name="gateway_utility")


def gateway_complement_oracle(tables: PathTables, cfg: ObjectiveConfig) -> SetFunctionOracle:
    bound = objectives.gateway_cost_upper_bound(tables, cfg)
    d = tables.d
    alpha = cfg.alpha

    def evaluate(subset):
        if not subset:
            return 0.0
        mins = d[sorted(subset), :].min(axis=0)
        return bound - float(len(subset) + alpha * mins.sum())

    return SetFunctionOracle(tables.gateway_ids, evaluate, name="gateway_cost_complement")


def controller_utility_oracle(tables: PathTables) -> SetFunctionOracle:
    r_ctl = tables.r_ctl
    row_of = {k: idx for idx, k in enumerate(tables.controller_ids)}

    def evaluate(subset):
        if not subset:
            return 0.0
        rows = [row_of[k] for k in sorted(subset)]
        return float(r_ctl[rows, :].max(axis=0).sum())

    return SetFunctionOracle(tables.controller_ids, evaluate, name="controller_utility")


def controller_complement_oracle(
    tables: PathTables, gw_policy: objectives.GatewayPolicy, cfg: ObjectiveConfig
) -> SetFunctionOracle:
    bound = objectives.controller_cost_upper_bound(gw_policy, tables, cfg)
    d = tables.d
    n = d.shape[0]
    beta = cfg.beta
    l_con = cfg.l_con
    # Per-candidate distance to the gateway its own traffic is assigned to.
    to_gateway = {m: d[gw_policy.assign[m], m] for m in tables.controller_ids}

    def evaluate(subset):
        if not subset:
            return 0.0
        ids = sorted(subset)
        sub = d[ids, :]
        c1 = sub.min(axis=0).sum()
        c2 = sub[:, ids].sum()
        c3 = l_con * (len(ids) - 1) * n
        c4 = sum(to_gateway[m] for m in ids)
        return bound - float(c1 + beta * (c2 + c3 + c4))

    return SetFunctionOracle(tables.controller_ids, evaluate, name="controller_cost_complement")


# ---------------------------------------------------------------------------
# Two-stage pipeline: gateways first, then controllers.


@dataclass(frozen=True)
class JointSolution:
    """Gateway and controller policies with their solver results and derived
    placement metrics."""

    mode: str
    method: str
    gateway_policy: objectives.GatewayPolicy
    controller_policy: objectives.ControllerPolicy
    gateway_result: SolveResult
    controller_result: SolveResult
    metrics: dict


def _stage_seeds(seed: int) -> tuple[int, int]:
    state = np.random.SeedSequence(seed).generate_state(2)
    return int(state[0]), int(state[1])


def solve_joint(
    tables: PathTables,
    cfg: ObjectiveConfig,
    mode: str = "reliability",
    method: str = "approx",
    seed: int = 0,
    restarts: int = 100,
    epsilon: float = 0.1,
) -> JointSolution:
    """Solve gateway placement, then controller placement on top of it.

    ``mode="reliability"`` maximizes the reliability utilities under the
    ``g_max`` / ``k_max`` budgets; ``mode="latency_overhead"`` minimizes the
    unbudgeted deployment costs via their complements.  ``method`` picks the
    approximation algorithm or exact enumeration for both stages.
    """
    if mode not in ("reliability", "latency_overhead"):
        raise ValueError(f"unknown mode '{mode}'")
    if method not in ("approx", "exact"):
        raise ValueError(f"unknown method '{method}'")
    if cfg.g_max > len(tables.gateway_ids):
        raise ValueError(
            f"g_max={cfg.g_max} exceeds the {len(tables.gateway_ids)} gateway candidates"
        )
    if cfg.k_max > len(tables.controller_ids):
        raise ValueError(
            f"k_max={cfg.k_max} exceeds the {len(tables.controller_ids)} controller candidates"
        )
    seed_gw, seed_ctl = _stage_seeds(seed)

    if mode == "reliability":
        gw_oracle = gateway_utility_oracle(tables)
        if method == "approx":
            gw_result = threshold_greedy(gw_oracle, cfg.g_max, epsilon)
        else:
            gw_result = exact_enumerate(gw_oracle, cfg.g_max)
        gw_policy = objectives.build_gateway_policy(gw_result.open, tables, "reliability")

        ctl_oracle = controller_utility_oracle(tables)
        if method == "approx":
            ctl_result = threshold_greedy(ctl_oracle, cfg.k_max, epsilon)
        else:
            ctl_result = exact_enumerate(ctl_oracle, cfg.k_max)
        ctl_policy = objectives.build_controller_policy(ctl_result.open, tables, "reliability")

        metrics = {
            "gateway_objective": gw_result.value,
            "controller_objective": ctl_result.value,
            "joint_utility": objectives.joint_utility(gw_policy, ctl_policy, tables),
        }
    else:
        gw_oracle = gateway_complement_oracle(tables, cfg)
        if method == "approx":
            gw_result = double_greedy(gw_oracle, seed_gw, restarts, ensure_nonempty=True)
        else:
            gw_result = exact_enumerate(gw_oracle)
        gw_policy = objectives.build_gateway_policy(gw_result.open, tables, "latency")
        gw_cost = objectives.gateway_cost(gw_result.open, tables, cfg)

        ctl_oracle = controller_complement_oracle(tables, gw_policy, cfg)
        if method == "approx":
            ctl_result = double_greedy(ctl_oracle, seed_ctl, restarts, ensure_nonempty=True)
        else:
            ctl_result = exact_enumerate(ctl_oracle)
        ctl_policy = objectives.build_controller_policy(ctl_result.open, tables, "latency")
        ctl_cost = objectives.controller_cost(ctl_result.open, gw_policy, tables, cfg)

        metrics = {
            "gateway_objective": gw_cost,
            "controller_objective": ctl_cost,
            "total_cost": gw_cost + cfg.psi * ctl_cost,
        }

    metrics.update(
        {
            "avg_gateway_latency_ms": objectives.assignment_latency_ms(gw_policy.assign, tables),
            "avg_gateway_reliability": objectives.gateway_assignment_reliability(
                gw_policy.assign, tables
            ),
            "avg_controller_latency_ms": objectives.assignment_latency_ms(
                ctl_policy.assign, tables
            ),
            "avg_controller_reliability": objectives.controller_assignment_reliability(
                ctl_policy.assign, tables
            ),
        }
    )
    return JointSolution(mode, method, gw_policy, ctl_policy, gw_result, ctl_result, metrics)
