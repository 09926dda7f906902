"""Directed-graph analytics for the UAV exchange network.

BFS shortest paths, strong connectivity, and the ring predicate (every node
with in-degree 1 and out-degree 1 on a single directed cycle).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import DomainError


@dataclass(frozen=True)
class NetGraph:
    """Directed UAV communication graph: nodes and ordered edge pairs."""

    nodes: tuple
    edges: tuple  # of (i, j) ordered pairs
    _out: dict = field(init=False, repr=False, compare=False)
    _in: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise DomainError("duplicate node ids")
        seen = set()
        out = {n: [] for n in self.nodes}
        inc = {n: [] for n in self.nodes}
        for i, j in self.edges:
            if i == j:
                raise DomainError(f"self-loop at node {i}")
            if (i, j) in seen:
                raise DomainError(f"duplicate edge {(i, j)}")
            if i not in node_set or j not in node_set:
                raise DomainError(f"edge {(i, j)} references unknown node")
            seen.add((i, j))
            out[i].append(j)
            inc[j].append(i)
        object.__setattr__(self, "_out", {n: tuple(sorted(v)) for n, v in out.items()})
        object.__setattr__(self, "_in", {n: tuple(sorted(v)) for n, v in inc.items()})

    @classmethod
    def from_edges(cls, nodes, edges):
        return cls(nodes=tuple(sorted(nodes)),
                   edges=tuple(sorted((int(i), int(j)) for i, j in edges)))

    def out_neighbors(self, n):
        return self._out[n]

    def in_neighbors(self, n):
        return self._in[n]


def shortest_path_lengths(g, source):
    """BFS edge-count distances from `source`; unreachable nodes map to None."""
    if source not in g._out:
        raise DomainError(f"unknown source node {source}")
    dist = {n: None for n in g.nodes}
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.out_neighbors(u):
            if dist[v] is None:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def max_shortest_path(g):
    """(l_max, {node: l_i_max}); entries are None where some target is unreachable."""
    per_node = {}
    for n in g.nodes:
        dist = shortest_path_lengths(g, n)
        vals = [d for m, d in dist.items() if m != n]
        per_node[n] = None if any(v is None for v in vals) else (max(vals) if vals else 0)
    overall = (None if any(v is None for v in per_node.values())
               else max(per_node.values(), default=0))
    return overall, per_node


def is_strongly_connected(g):
    if len(g.nodes) <= 1:
        return True
    l_max, _ = max_shortest_path(g)
    return l_max is not None


def is_ring(g):
    """Single directed cycle covering every node: all degrees 1, strongly connected."""
    if len(g.nodes) < 2:
        return False
    for n in g.nodes:
        if len(g.out_neighbors(n)) != 1 or len(g.in_neighbors(n)) != 1:
            return False
    return is_strongly_connected(g)


# -- edge-list text format ----------------------------------------------------

def save_edge_list(g, path):
    """One `i j` pair per line; isolated nodes listed on a header line."""
    with open(path, "w") as fh:
        fh.write("# nodes: " + " ".join(str(n) for n in g.nodes) + "\n")
        for i, j in g.edges:
            fh.write(f"{i} {j}\n")


def load_edge_list(path):
    nodes = []
    edges = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# nodes:"):
                nodes = [int(tok) for tok in line.split(":", 1)[1].split()]
                continue
            i, j = line.split()
            edges.append((int(i), int(j)))
    if not nodes:
        nodes = sorted({n for e in edges for n in e})
    return NetGraph.from_edges(nodes, edges)


def adjacency_lines(g):
    """Human-readable adjacency rows for reports."""
    return [f"{n} -> {' '.join(str(m) for m in g.out_neighbors(n)) or '-'}"
            for n in g.nodes]
