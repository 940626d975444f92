"""Placement of satellite gateways and SDN controllers on terrestrial
network topologies.

The pipeline: load or sample a :class:`~satplace.topology.Topology`, build
latency and reliability tables with
:func:`~satplace.paths.build_reliability_tables`, then either call the
solver layer directly or use the scikit-learn style estimators
:class:`GatewayPlacement`, :class:`ControllerPlacement` and
:class:`JointPlacement`.
"""

from .objectives import (
    ControllerPolicy,
    EmptyPolicyError,
    GatewayPolicy,
    ObjectiveConfig,
    controller_cost,
    controller_utility,
    gateway_cost,
    gateway_utility,
    joint_utility,
)
from .paths import Path, PathTables, build_reliability_tables, yen_k_shortest
from .placement import ControllerPlacement, GatewayPlacement, JointPlacement
from .solvers import (
    InstanceTooLargeError,
    JointSolution,
    SetFunctionOracle,
    SolveResult,
    double_greedy,
    exact_enumerate,
    solve_joint,
    threshold_greedy,
)
from .topology import (
    FAILURE_CASES,
    FailureCase,
    Link,
    Node,
    Topology,
    TopologyError,
    bundled_names,
    load_graphml,
    load_topology,
    sample_failures,
)

__version__ = "0.1.0"

__all__ = [
    "ControllerPlacement",
    "ControllerPolicy",
    "EmptyPolicyError",
    "FAILURE_CASES",
    "FailureCase",
    "GatewayPlacement",
    "GatewayPolicy",
    "InstanceTooLargeError",
    "JointPlacement",
    "JointSolution",
    "Link",
    "Node",
    "ObjectiveConfig",
    "Path",
    "PathTables",
    "SetFunctionOracle",
    "SolveResult",
    "Topology",
    "TopologyError",
    "bundled_names",
    "build_reliability_tables",
    "controller_cost",
    "controller_utility",
    "double_greedy",
    "exact_enumerate",
    "gateway_cost",
    "gateway_utility",
    "joint_utility",
    "load_graphml",
    "load_topology",
    "sample_failures",
    "solve_joint",
    "threshold_greedy",
    "yen_k_shortest",
]
