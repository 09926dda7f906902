"""Ring-topology synthesis for the UAV exchange network.

Checks the necessary feasibility condition (every feasible set non-empty and
their union covering all UAVs), searches the feasibility digraph for a
directed Hamiltonian cycle by backtracking (ties broken by minimal total
transmit power, then lexicographic edge order), and verifies the result
against the optimality characterization (ring, feasible edges, every
per-node max shortest path equal to I - 1).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

from . import airlink
from .netgraph import NetGraph, is_ring, max_shortest_path


@dataclass(frozen=True)
class NecessaryCheck:
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class FormationResult:
    status: str                       # "formed" | "infeasible"
    reason: str = ""
    graph: Optional[NetGraph] = None
    powers: Optional[dict] = None     # edge (i, j) -> watts
    objective: Optional[int] = None   # l_max of the formed graph


def check_necessary(feasible_sets):
    """Necessary condition: no empty feasible set, union covers all UAVs."""
    all_ids = set(feasible_sets)
    for i in sorted(feasible_sets):
        if not feasible_sets[i]:
            return NecessaryCheck(False, f"empty feasible set for UAV {i}")
    covered = set()
    for js in feasible_sets.values():
        covered |= set(js)
    missing = sorted(all_ids - covered)
    if missing:
        return NecessaryCheck(False, f"UAV {missing[0]} in no feasible set")
    return NecessaryCheck(True)


def _hamiltonian_ring(nodes, adj):
    """Minimal-total-power directed Hamiltonian cycle, or None.

    adj[i] maps feasible successor j to its power cost. Exact backtracking,
    fine for desk-scale node counts; ties broken by lexicographic edge order.
    """
    nodes = sorted(nodes)
    start = nodes[0]
    n = len(nodes)
    best = None  # (total_power, edge tuple)

    def key(edges):
        return (sum(adj[i][j] for i, j in edges), tuple(sorted(edges)))

    def extend(current, visited, edges, power):
        nonlocal best
        if best is not None and power > best[0]:
            return
        if len(visited) == n:
            back = adj[current].get(start)
            if back is None:
                return
            cand = key(edges + [(current, start)])
            if best is None or cand < best:
                best = cand
            return
        for j in sorted(adj[current], key=lambda j: (adj[current][j], j)):
            if j in visited:
                continue
            visited.add(j)
            extend(j, visited, edges + [(current, j)], power + adj[current][j])
            visited.remove(j)

    extend(start, {start}, [], 0.0)
    if best is None:
        return None
    return best[1]


def form_network(positions, cfg, dataset_size):
    """Solve the topology problem: feasibility check, then ring search."""
    ids = sorted(positions)
    if len(ids) < 2:
        return FormationResult("infeasible", reason="need at least two UAVs")
    feas = {i: airlink.feasible_set(i, positions, cfg, dataset_size)
            for i in ids}
    check = check_necessary(feas)
    if not check.ok:
        return FormationResult("infeasible", reason=check.detail)
    ring_edges = _hamiltonian_ring(ids, feas)
    if ring_edges is None:
        return FormationResult(
            "infeasible",
            reason="feasibility digraph admits no Hamiltonian cycle")
    graph = NetGraph.from_edges(ids, ring_edges)
    powers = {(i, j): feas[i][j] for i, j in ring_edges}
    l_max, _ = max_shortest_path(graph)
    return FormationResult("formed", graph=graph, powers=powers,
                           objective=l_max)


def verify_optimal(result, positions, cfg, dataset_size):
    """Optimality characterization plus every per-edge constraint."""
    if result.status != "formed":
        return False
    g = result.graph
    n = len(g.nodes)
    if not is_ring(g) or len(g.edges) > n:
        return False
    _, per_node = max_shortest_path(g)
    if any(v != n - 1 for v in per_node.values()):
        return False
    rate_needed = airlink.required_rate_bps(cfg, dataset_size)
    for (i, j) in g.edges:
        p = result.powers.get((i, j))
        if p is None or not (0 < p <= cfg.max_power_w):
            return False
        h = airlink.a2a_pathloss(positions[i], positions[j],
                                 cfg.carrier_wavelength)
        if p * h / cfg.noise_w < cfg.snr_threshold * (1 - 1e-12):
            return False
        if airlink.link_rate(p, h, cfg) < rate_needed * (1 - 1e-12):
            return False
    return True


def export_formation(result, positions, cfg, dataset_size, path):
    """Edge list with per-edge power (dBm), rate and transmission time."""
    payload_bits = cfg.share_ratio * dataset_size * cfg.sample_bits
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if result.status != "formed":
            writer.writerow(["status", "reason"])
            writer.writerow([result.status, result.reason])
            return
        writer.writerow(["from", "to", "power_dbm", "rate_bps", "tx_time_s"])
        for (i, j) in result.graph.edges:
            p = result.powers[(i, j)]
            h = airlink.a2a_pathloss(positions[i], positions[j],
                                     cfg.carrier_wavelength)
            rate = airlink.link_rate(p, h, cfg)
            writer.writerow([i, j, repr(10.0 * math.log10(p * 1e3)),
                             repr(rate), repr(payload_bits / rate)])
