"""Set-function costs and utilities for gateway and controller placement.

Given the per-instance tables (latency matrix ``d``, reliability matrices
``r_sat`` / ``r_ctl``), a placement is just a set of open facility node ids.
Once the open set is fixed, each node's optimal assignment is forced: the
nearest open facility under the latency objectives or the most reliable one
under the reliability objectives, so all objectives below are functions of
the open set alone.

Deployment cost (latency view)
    gateway:    |X| + alpha * sum_v min_{j in X} d[j][v]
    controller: c1 + beta * (c2 + c3 + c4) where
                c1 = assignment latency sum,
                c2 = inter-controller latency over ordered pairs,
                c3 = state-sync load l_con per ordered pair weighted by the
                     sending controller's assigned-node count,
                c4 = controller-to-own-gateway latency.

Reliability utility
    gateway:    sum_v max_{j in X} r_sat[j][v]
    controller: sum_v max_{k in Y} r_ctl[k][v]

The costs are supermodular and the utilities monotone submodular, so the
solvers work on the utilities directly and on bounded complements
``upper_bound - cost`` of the costs (non-negative submodular).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paths import PathTables


class EmptyPolicyError(ValueError):
    """Raised when an objective is evaluated on an empty facility set."""


@dataclass(frozen=True)
class ObjectiveConfig:
    """Weights and budgets shared by the placement objectives.

    ``alpha`` weights gateway assignment latency against gateway count,
    ``beta`` weights the controller synchronization block against assignment
    latency, ``l_con`` is the per-ordered-pair state-sync load, and ``psi``
    weights the whole controller block when the two stages are combined into
    one cost (the decomposed pipeline solves the stages separately, where
    ``psi`` rescales the controller stage without changing its minimizer).
    """

    alpha: float = 1.0
    beta: float = 1.0
    psi: float = 1.0
    l_con: float = 0.1
    g_max: int = 5
    k_max: int = 5
    k_paths: int = 1

    def __post_init__(self) -> None:
        for field in ("alpha", "beta", "psi", "l_con"):
            value = getattr(self, field)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{field} must be finite and non-negative")
        for field in ("g_max", "k_max", "k_paths"):
            if getattr(self, field) < 1:
                raise ValueError(f"{field} must be at least 1")


@dataclass(frozen=True)
class GatewayPolicy:
    """Open gateway set plus the induced node-to-gateway assignment
    (``assign[v]`` is a node id from ``open``)."""

    open: tuple[int, ...]
    assign: tuple[int, ...]


@dataclass(frozen=True)
class ControllerPolicy:
    """Open controller set plus the induced node-to-controller assignment."""

    open: tuple[int, ...]
    assign: tuple[int, ...]


def _check_open(open_ids, candidates: tuple[int, ...], kind: str) -> tuple[int, ...]:
    opened = tuple(sorted(set(open_ids)))
    if not opened:
        raise EmptyPolicyError(f"{kind} set must not be empty")
    extra = [i for i in opened if i not in candidates]
    if extra:
        raise ValueError(f"{kind} ids {extra} are not candidates")
    return opened


def induce_assignment(
    open_ids,
    score: np.ndarray,
    mode: str,
    row_ids: tuple[int, ...] | None = None,
) -> np.ndarray:
    """Assign every node to its best open facility.

    ``score`` is a per (facility row, node) matrix; ``row_ids`` maps rows to
    facility node ids (identity when omitted).  ``mode`` is ``"minimize"``
    (latency) or ``"maximize"`` (reliability); ties go to the lowest facility
    id.  Returns an array of facility node ids, one per node.
    """
    opened = tuple(sorted(set(open_ids)))
    if not opened:
        raise EmptyPolicyError("cannot assign nodes to an empty facility set")
    if row_ids is None:
        rows = list(opened)
    else:
        rows = [row_ids.index(i) for i in opened]
    sub = score[rows, :]
    if mode == "minimize":
        pick = np.argmin(sub, axis=0)
    elif mode == "maximize":
        pick = np.argmax(sub, axis=0)
    else:
        raise ValueError(f"unknown assignment mode '{mode}'")
    # argmin/argmax return the first best row; rows are sorted by facility id,
    # so ties land on the lowest id.
    ids = np.asarray(opened)
    return ids[pick]


def gateway_cost(open_ids, tables: PathTables, cfg: ObjectiveConfig) -> float:
    """Deployment cost of an open gateway set under nearest-gateway
    assignment."""
    opened = _check_open(open_ids, tables.gateway_ids, "gateway")
    mins = tables.d[list(opened), :].min(axis=0)
    return float(len(opened) + cfg.alpha * mins.sum())


def gateway_utility(open_ids, tables: PathTables) -> float:
    """Total best-gateway satellite reliability over all nodes."""
    opened = _check_open(open_ids, tables.gateway_ids, "gateway")
    rows = [tables.gateway_row(j) for j in opened]
    return float(tables.r_sat[rows, :].max(axis=0).sum())


def gateway_cost_upper_bound(tables: PathTables, cfg: ObjectiveConfig) -> float:
    """Upper bound of :func:`gateway_cost` over all non-empty open sets:
    every candidate opened plus the worst possible assignment latency."""
    worst = tables.d[list(tables.gateway_ids), :].max(axis=0)
    return float(len(tables.gateway_ids) + cfg.alpha * worst.sum())


def gateway_cost_complement(
    open_ids, tables: PathTables, cfg: ObjectiveConfig, upper_bound: float | None = None
) -> float:
    """Non-negative submodular complement ``upper_bound - gateway_cost``;
    maximizing it minimizes the cost."""
    if upper_bound is None:
        upper_bound = gateway_cost_upper_bound(tables, cfg)
    return upper_bound - gateway_cost(open_ids, tables, cfg)


def controller_cost(
    open_ids, gw_policy: GatewayPolicy, tables: PathTables, cfg: ObjectiveConfig
) -> float:
    """Latency-plus-synchronization cost of an open controller set, given the
    gateway assignment for the controller-to-gateway term."""
    opened = _check_open(open_ids, tables.controller_ids, "controller")
    ids = list(opened)
    n = tables.d.shape[0]
    c1 = tables.d[ids, :].min(axis=0).sum()
    c2 = tables.d[np.ix_(ids, ids)].sum()
    # Ordered-pair sync load: each controller sends its per-node state to the
    # |Y|-1 others, and assignment loads always sum to |V|.
    c3 = cfg.l_con * (len(ids) - 1) * n
    c4 = sum(tables.d[gw_policy.assign[m], m] for m in ids)
    return float(c1 + cfg.beta * (c2 + c3 + c4))


def controller_utility(open_ids, tables: PathTables) -> float:
    """Total best-controller terrestrial reliability over all nodes."""
    opened = _check_open(open_ids, tables.controller_ids, "controller")
    rows = [tables.controller_row(k) for k in opened]
    return float(tables.r_ctl[rows, :].max(axis=0).sum())


def controller_cost_upper_bound(
    gw_policy: GatewayPolicy, tables: PathTables, cfg: ObjectiveConfig
) -> float:
    """Upper bound of :func:`controller_cost` over all non-empty open sets
    (worst assignment latency, full candidate set for the sync terms)."""
    ids = list(tables.controller_ids)
    n = tables.d.shape[0]
    c1 = tables.d[ids, :].max(axis=0).sum()
    c2 = tables.d[np.ix_(ids, ids)].sum()
    c3 = cfg.l_con * (len(ids) - 1) * n
    c4 = sum(tables.d[gw_policy.assign[m], m] for m in ids)
    return float(c1 + cfg.beta * (c2 + c3 + c4))


def controller_cost_complement(
    open_ids,
    gw_policy: GatewayPolicy,
    tables: PathTables,
    cfg: ObjectiveConfig,
    upper_bound: float | None = None,
) -> float:
    """Non-negative submodular complement of :func:`controller_cost`."""
    if upper_bound is None:
        upper_bound = controller_cost_upper_bound(gw_policy, tables, cfg)
    return upper_bound - controller_cost(open_ids, gw_policy, tables, cfg)


def joint_utility(gw: GatewayPolicy, ctl: ControllerPolicy, tables: PathTables) -> float:
    """Network-wide average reliability of the two assignments: mean satellite
    reliability through each node's gateway plus mean terrestrial reliability
    to each node's controller."""
    n = tables.d.shape[0]
    sat = sum(tables.r_sat[tables.gateway_row(gw.assign[v]), v] for v in range(n))
    ctl_rel = sum(tables.r_ctl[tables.controller_row(ctl.assign[v]), v] for v in range(n))
    return float((sat + ctl_rel) / n)


def build_gateway_policy(open_ids, tables: PathTables, mode: str) -> GatewayPolicy:
    """Open set plus induced assignment; ``mode`` is ``"latency"`` or
    ``"reliability"``."""
    opened = _check_open(open_ids, tables.gateway_ids, "gateway")
    if mode == "latency":
        assign = induce_assignment(opened, tables.d, "minimize")
    elif mode == "reliability":
        assign = induce_assignment(opened, tables.r_sat, "maximize", tables.gateway_ids)
    else:
        raise ValueError(f"unknown gateway mode '{mode}'")
    return GatewayPolicy(opened, tuple(int(x) for x in assign))


def assignment_latency_ms(assign, tables: PathTables) -> float:
    """Mean latency from each node to its assigned facility."""
    n = tables.d.shape[0]
    return float(sum(tables.d[assign[v], v] for v in range(n)) / n)


def gateway_assignment_reliability(assign, tables: PathTables) -> float:
    """Mean satellite reliability through each node's assigned gateway."""
    n = tables.d.shape[0]
    return float(sum(tables.r_sat[tables.gateway_row(assign[v]), v] for v in range(n)) / n)


def controller_assignment_reliability(assign, tables: PathTables) -> float:
    """Mean terrestrial reliability to each node's assigned controller."""
    n = tables.d.shape[0]
    return float(sum(tables.r_ctl[tables.controller_row(assign[v]), v] for v in range(n)) / n)


def build_controller_policy(open_ids, tables: PathTables, mode: str) -> ControllerPolicy:
    """Open set plus induced assignment; ``mode`` is ``"latency"`` (used by
    the overhead objective) or ``"reliability"``."""
    opened = _check_open(open_ids, tables.controller_ids, "controller")
    if mode == "latency":
        assign = induce_assignment(opened, tables.d, "minimize")
    elif mode == "reliability":
        assign = induce_assignment(opened, tables.r_ctl, "maximize", tables.controller_ids)
    else:
        raise ValueError(f"unknown controller mode '{mode}'")
    return ControllerPolicy(opened, tuple(int(x) for x in assign))
