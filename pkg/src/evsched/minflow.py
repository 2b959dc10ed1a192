"""Min-cost flow solved by successive shortest augmenting paths.

Arcs are stored as residual pairs: arc ``2k`` is the forward arc of the
k-th ``add_arc`` call and arc ``2k + 1`` is its reverse. All original
costs must be non-negative; node potentials keep reduced costs
non-negative after every augmentation, so Dijkstra stays valid
throughout. Output is deterministic: the heap breaks distance ties by
node id, adjacency lists are scanned in arc-insertion order, and only a
strict improvement rewrites a predecessor, so among equal-cost
augmenting paths the one reached through earlier-added arcs wins.
(Rewriting predecessors on distance ties would be unsafe here: after an
augmentation the path's arcs all have zero reduced cost, and a tie
rewrite can close a predecessor cycle.)
"""

from __future__ import annotations

import heapq

INF = float("inf")


class MinCostFlow:
    def __init__(self, n_nodes: int = 0):
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]
        self.head: list[int] = []
        self.cap: list[float] = []
        self.cost: list[float] = []

    @property
    def n_nodes(self) -> int:
        return len(self.adj)

    def add_node(self) -> int:
        self.adj.append([])
        return len(self.adj) - 1

    def add_arc(self, tail: int, head: int, capacity: float, cost: float) -> int:
        """Add a forward arc and its zero-capacity reverse; returns the forward arc id."""
        if cost < 0:
            raise ValueError("negative arc costs are not supported")
        arc = len(self.head)
        self.head.append(head)
        self.cap.append(capacity)
        self.cost.append(cost)
        self.adj[tail].append(arc)
        self.head.append(tail)
        self.cap.append(0.0)
        self.cost.append(-cost)
        self.adj[head].append(arc + 1)
        return arc

    def flow_on(self, arc: int) -> float:
        """Flow currently routed on a forward arc."""
        return self.cap[arc ^ 1]

    def solve(self, source: int, sink: int, amount: float = INF) -> tuple[float, float]:
        """Push up to ``amount`` units from source to sink at minimum cost.

        Returns ``(flow, cost)``; flow may be less than ``amount`` when the
        network saturates first.
        """
        n = self.n_nodes
        potential = [0.0] * n
        total_flow = 0.0
        total_cost = 0.0
        while total_flow < amount:
            dist = [INF] * n
            parent = [-1] * n
            dist[source] = 0.0
            heap = [(0.0, source)]
            while heap:
                d, v = heapq.heappop(heap)
                if d > dist[v]:
                    continue
                for arc in self.adj[v]:
                    if self.cap[arc] <= 0:
                        continue
                    w = self.head[arc]
                    # Clamp the reduced cost at zero: on irrational costs
                    # rounding can push it a few ulps negative, and negative
                    # edges let lazy Dijkstra re-relax settled nodes until
                    # the predecessor chain closes a cycle.
                    reduced = self.cost[arc] + potential[v] - potential[w]
                    if reduced < 0.0:
                        reduced = 0.0
                    nd = d + reduced
                    if nd < dist[w]:
                        dist[w] = nd
                        parent[w] = arc
                        heapq.heappush(heap, (nd, w))
            if dist[sink] == INF:
                break
            for v in range(n):
                if dist[v] < INF:
                    potential[v] += dist[v]
            # Bottleneck along the shortest path, then apply it.
            push = amount - total_flow
            v = sink
            steps = 0
            while v != source:
                arc = parent[v]
                push = min(push, self.cap[arc])
                v = self.head[arc ^ 1]
                steps += 1
                if steps > n:
                    raise RuntimeError("internal error: predecessor chain does not reach the source")
            v = sink
            while v != source:
                arc = parent[v]
                self.cap[arc] -= push
                self.cap[arc ^ 1] += push
                total_cost += push * self.cost[arc]
                v = self.head[arc ^ 1]
            total_flow += push
        return total_flow, total_cost
