"""Per-posture minimum-total-ETX trees rooted at the sink."""
from __future__ import annotations

import heapq
import io
from dataclasses import dataclass

from .channel import (
    DEFAULT_THRESHOLD,
    POSTURES,
    ChannelTable,
    ConnectivityGraph,
    RadioBudget,
    connectivity_graph,
)
from .errors import ConfigError

TREE_HEADER = "posture,node,parent,link_etx,total_etx"


@dataclass(frozen=True)
class PpvgTree:
    posture: int
    sink: int
    parent: dict[int, int]
    link_etx: dict[int, float]
    total_etx: dict[int, float]
    hops: dict[int, int]

    def path(self, node: int) -> list[int]:
        out = [node]
        while out[-1] != self.sink:
            out.append(self.parent[out[-1]])
        return out


def build_ppvg_tree(graph: ConnectivityGraph, sink: int) -> PpvgTree:
    """Shortest-path tree under ETX edge weights.

    Labels are compared as (total ETX, hop count, parent id) so equal-cost
    alternatives resolve to the shorter path, then to the lower-numbered parent.
    """
    if sink not in graph.nodes:
        raise ConfigError(f"sink {sink} is not in the posture {graph.posture} graph")
    adjacency = {n: [] for n in graph.nodes}
    for (a, b), e in graph.edges.items():
        adjacency[a].append((b, e.etx))
        adjacency[b].append((a, e.etx))

    label = {sink: (0.0, 0, -1)}
    done = set()
    heap = [(0.0, 0, -1, sink)]
    while heap:
        total, hops, par, u = heapq.heappop(heap)
        if u in done or label[u] != (total, hops, par):
            continue
        done.add(u)
        for v, w in adjacency[u]:
            if v in done:
                continue
            cand = (total + w, hops + 1, u)
            if v not in label or cand < label[v]:
                label[v] = cand
                heapq.heappush(heap, (*cand, v))

    missing = [n for n in graph.nodes if n not in done]
    if missing:
        raise ConfigError(
            f"posture {graph.posture}: node {missing[0]} has no path to sink {sink}"
        )
    parent, link, total, hop = {}, {}, {sink: 0.0}, {sink: 0}
    for v in graph.nodes:
        if v == sink:
            continue
        t, h, p = label[v]
        parent[v] = p
        link[v] = graph.etx(v, p)
        total[v] = t
        hop[v] = h
    return PpvgTree(graph.posture, sink, parent, link, total, hop)


def ppvg_trees_all_postures(
    table: ChannelTable,
    budget: RadioBudget = RadioBudget(),
    threshold: float = DEFAULT_THRESHOLD,
    sink: int = 0,
    nodes=None,
) -> dict[int, PpvgTree]:
    trees = {}
    for posture in POSTURES:
        graph = connectivity_graph(table, posture, budget, threshold, nodes)
        try:
            trees[posture] = build_ppvg_tree(graph, sink)
        except ConfigError as exc:
            if f"posture {posture}" in str(exc):
                raise
            raise ConfigError(f"posture {posture}: {exc}") from None
    return trees


def export_trees(trees: dict[int, PpvgTree]) -> str:
    buf = io.StringIO()
    buf.write(TREE_HEADER + "\n")
    for posture in sorted(trees):
        t = trees[posture]
        for node in sorted(t.parent):
            buf.write(
                f"{posture},{node},{t.parent[node]},{t.link_etx[node]:.6f},{t.total_etx[node]:.6f}\n"
            )
    return buf.getvalue()


def ppvg_forward(tree: PpvgTree, node: int, packet=None) -> int:
    """The single next hop of ``node``: its tree parent."""
    if node == tree.sink:
        raise ValueError("the sink does not forward")
    return tree.parent[node]
