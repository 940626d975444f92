"""Estimator-style front end for the placement solvers.

The placers follow scikit-learn conventions: construction only stores
parameters, ``fit(topology)`` solves the placement and exposes the outcome
through trailing-underscore attributes (``facilities_``, ``labels_``,
``value_``), and ``get_params`` / ``set_params`` / ``clone`` work as usual,
which makes parameter sweeps and grid composition straightforward.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import objectives, solvers
from .objectives import ObjectiveConfig
from .paths import build_reliability_tables
from .topology import Topology, validate_topology


def check_topology(X) -> Topology:
    """Validate an estimator input: must be a :class:`Topology` (its own
    structural invariants are re-checked)."""
    if not isinstance(X, Topology):
        raise TypeError(f"expected a Topology, got {type(X).__name__}")
    validate_topology(X)
    return X


class GatewayPlacement(BaseEstimator):
    """Select satellite gateway sites on a topology.

    Parameters
    ----------
    mode : "reliability" maximizes satellite reachability under the ``budget``
        cardinality constraint; "latency" minimizes deployment cost
        (gateway count plus ``alpha`` times total assignment latency,
        unbudgeted).
    method : "approx" for the submodular solver, "exact" for enumeration.
    restarts, epsilon : approximation knobs for the two solvers.
    random_state : seed for the randomized solver.

    After ``fit``: ``facilities_`` (sorted open node ids), ``labels_``
    (assigned facility id per node), ``value_`` (objective value: utility or
    cost), ``result_`` (the raw :class:`SolveResult`), ``tables_``.
    """

    def __init__(
        self,
        mode: str = "reliability",
        budget: int = 5,
        alpha: float = 1.0,
        k_paths: int = 1,
        method: str = "approx",
        restarts: int = 100,
        epsilon: float = 0.1,
        random_state: int = 0,
    ):
        self.mode = mode
        self.budget = budget
        self.alpha = alpha
        self.k_paths = k_paths
        self.method = method
        self.restarts = restarts
        self.epsilon = epsilon
        self.random_state = random_state

    def fit(self, X, y=None):
        topo = check_topology(X)
        tables = build_reliability_tables(topo, self.k_paths)
        if self.mode == "reliability":
            oracle = solvers.gateway_utility_oracle(tables)
            if self.method == "approx":
                result = solvers.threshold_greedy(oracle, self.budget, self.epsilon)
            elif self.method == "exact":
                result = solvers.exact_enumerate(oracle, self.budget)
            else:
                raise ValueError(f"unknown method '{self.method}'")
            policy = objectives.build_gateway_policy(result.open, tables, "reliability")
            self.value_ = result.value
        elif self.mode == "latency":
            cfg = ObjectiveConfig(alpha=self.alpha, k_paths=self.k_paths)
            oracle = solvers.gateway_complement_oracle(tables, cfg)
            if self.method == "approx":
                result = solvers.double_greedy(
                    oracle, self.random_state, self.restarts, ensure_nonempty=True
                )
            elif self.method == "exact":
                result = solvers.exact_enumerate(oracle)
            else:
                raise ValueError(f"unknown method '{self.method}'")
            policy = objectives.build_gateway_policy(result.open, tables, "latency")
            self.value_ = objectives.gateway_cost(result.open, tables, cfg)
        else:
            raise ValueError(f"unknown mode '{self.mode}'")
        self.tables_ = tables
        self.result_ = result
        self.policy_ = policy
        self.facilities_ = policy.open
        self.labels_ = np.asarray(policy.assign)
        self.n_evaluations_ = result.evaluations
        return self

    def score(self, X=None, y=None) -> float:
        """Objective value of the fitted placement, sign-adjusted so that
        higher is better."""
        if self.mode == "reliability":
            return self.value_
        return -self.value_


class ControllerPlacement(BaseEstimator):
    """Select SDN controller sites on a topology.

    In "overhead" mode the cost includes the controller-to-gateway latency
    term, so ``fit`` accepts ``gateways`` (an iterable of open gateway node
    ids, or a fitted :class:`GatewayPlacement`); when omitted a latency-mode
    gateway stage is solved internally first.  "reliability" mode ignores
    gateways.  Attributes after ``fit`` mirror :class:`GatewayPlacement`.
    """

    def __init__(
        self,
        mode: str = "reliability",
        budget: int = 5,
        alpha: float = 1.0,
        beta: float = 1.0,
        l_con: float = 0.1,
        k_paths: int = 1,
        method: str = "approx",
        restarts: int = 100,
        epsilon: float = 0.1,
        random_state: int = 0,
    ):
        self.mode = mode
        self.budget = budget
        self.alpha = alpha
        self.beta = beta
        self.l_con = l_con
        self.k_paths = k_paths
        self.method = method
        self.restarts = restarts
        self.epsilon = epsilon
        self.random_state = random_state

    def fit(self, X, y=None, gateways=None):
        topo = check_topology(X)
        tables = build_reliability_tables(topo, self.k_paths)
        cfg = ObjectiveConfig(
            alpha=self.alpha, beta=self.beta, l_con=self.l_con, k_paths=self.k_paths
        )
        if self.mode == "reliability":
            oracle = solvers.controller_utility_oracle(tables)
            if self.method == "approx":
                result = solvers.threshold_greedy(oracle, self.budget, self.epsilon)
            elif self.method == "exact":
                result = solvers.exact_enumerate(oracle, self.budget)
            else:
                raise ValueError(f"unknown method '{self.method}'")
            policy = objectives.build_controller_policy(result.open, tables, "reliability")
            self.value_ = result.value
            self.gateway_policy_ = None
        elif self.mode == "overhead":
            gw_policy = self._gateway_policy(gateways, tables, cfg)
            oracle = solvers.controller_complement_oracle(tables, gw_policy, cfg)
            if self.method == "approx":
                result = solvers.double_greedy(
                    oracle, self.random_state, self.restarts, ensure_nonempty=True
                )
            elif self.method == "exact":
                result = solvers.exact_enumerate(oracle)
            else:
                raise ValueError(f"unknown method '{self.method}'")
            policy = objectives.build_controller_policy(result.open, tables, "latency")
            self.value_ = objectives.controller_cost(result.open, gw_policy, tables, cfg)
            self.gateway_policy_ = gw_policy
        else:
            raise ValueError(f"unknown mode '{self.mode}'")
        self.tables_ = tables
        self.result_ = result
        self.policy_ = policy
        self.facilities_ = policy.open
        self.labels_ = np.asarray(policy.assign)
        self.n_evaluations_ = result.evaluations
        return self

    def _gateway_policy(self, gateways, tables, cfg):
        if isinstance(gateways, GatewayPlacement):
            gateways = gateways.facilities_
        if gateways is not None:
            return objectives.build_gateway_policy(gateways, tables, "latency")
        oracle = solvers.gateway_complement_oracle(tables, cfg)
        stage = solvers.double_greedy(
            oracle, self.random_state, self.restarts, ensure_nonempty=True
        )
        return objectives.build_gateway_policy(stage.open, tables, "latency")

    def score(self, X=None, y=None) -> float:
        if self.mode == "reliability":
            return self.value_
        return -self.value_


class JointPlacement(BaseEstimator):
    """Solve both stages: gateways first, then controllers.

    ``mode="reliability"`` maximizes the budgeted reliability utilities and
    exposes ``joint_utility_``; ``mode="latency_overhead"`` minimizes the
    unbudgeted deployment costs and exposes ``total_cost_``.
    """

    def __init__(
        self,
        mode: str = "reliability",
        g_max: int = 5,
        k_max: int = 5,
        alpha: float = 1.0,
        beta: float = 1.0,
        psi: float = 1.0,
        l_con: float = 0.1,
        k_paths: int = 1,
        method: str = "approx",
        restarts: int = 100,
        epsilon: float = 0.1,
        random_state: int = 0,
    ):
        self.mode = mode
        self.g_max = g_max
        self.k_max = k_max
        self.alpha = alpha
        self.beta = beta
        self.psi = psi
        self.l_con = l_con
        self.k_paths = k_paths
        self.method = method
        self.restarts = restarts
        self.epsilon = epsilon
        self.random_state = random_state

    def fit(self, X, y=None):
        topo = check_topology(X)
        tables = build_reliability_tables(topo, self.k_paths)
        cfg = ObjectiveConfig(
            alpha=self.alpha,
            beta=self.beta,
            psi=self.psi,
            l_con=self.l_con,
            g_max=self.g_max,
            k_max=self.k_max,
            k_paths=self.k_paths,
        )
        solution = solvers.solve_joint(
            tables,
            cfg,
            mode=self.mode,
            method=self.method,
            seed=self.random_state,
            restarts=self.restarts,
            epsilon=self.epsilon,
        )
        self.tables_ = tables
        self.solution_ = solution
        self.gateway_facilities_ = solution.gateway_policy.open
        self.gateway_labels_ = np.asarray(solution.gateway_policy.assign)
        self.controller_facilities_ = solution.controller_policy.open
        self.controller_labels_ = np.asarray(solution.controller_policy.assign)
        self.metrics_ = dict(solution.metrics)
        if self.mode == "reliability":
            self.joint_utility_ = solution.metrics["joint_utility"]
        else:
            self.total_cost_ = solution.metrics["total_cost"]
        return self

    def score(self, X=None, y=None) -> float:
        if self.mode == "reliability":
            return self.joint_utility_
        return -self.total_cost_
