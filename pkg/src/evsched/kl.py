"""Kernighan-Lin graph bisection and recursive instance partitioning.

The block-compatibility graph has one vertex per block and an undirected
edge wherever a day arc connects two blocks in either direction. Bisection
keeps part sizes within one vertex of each other while heuristically
minimizing the number of edges crossing the cut; recursive bisection
splits an instance into ``2**levels`` sub-instances whose connection sets
are rebuilt locally.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from functools import cached_property

from .bcp import BcpInstance, build_instance


@dataclass(frozen=True)
class BlockGraph:
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        vset = set(self.vertices)
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            if a not in vset or b not in vset:
                raise ValueError(f"edge ({a}, {b}) references a missing vertex")

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return {v: frozenset(nbrs) for v, nbrs in adj.items()}

    def subgraph(self, keep: list[int]) -> "BlockGraph":
        kset = set(keep)
        edges = tuple((a, b) for a, b in self.edges if a in kset and b in kset)
        return BlockGraph(tuple(sorted(kset)), edges)


def block_graph(instance: BcpInstance) -> BlockGraph:
    vertices = tuple(sorted(instance.block_by_id))
    edges = sorted({(min(i, j), max(i, j)) for i, j in instance.day_arcs})
    return BlockGraph(vertices, tuple(edges))


def kl_bisect(graph: BlockGraph, seed: int = 0, max_passes: int = 20) -> tuple[set[int], set[int], int]:
    """Bisect a graph by Kernighan-Lin pair swaps.

    Starts from a balanced split given by alternating a seed-keyed shuffle
    of the sorted vertices, then repeats improvement passes: tentatively
    swap the best-gain unlocked pair until all are locked, keep the best
    positive prefix, stop when none exists. Returns the two parts and the
    number of edges crossing between them. Deterministic for a fixed seed.
    """
    verts = sorted(graph.vertices)
    if len(verts) < 2:
        raise ValueError("bisection requires at least two vertices")
    adj = graph.adjacency
    rng = random.Random(seed)
    keys = {v: rng.random() for v in verts}
    ordering = sorted(verts, key=lambda v: (keys[v], v))
    side = {v: idx & 1 for idx, v in enumerate(ordering)}

    def swap_gain_pass() -> list[tuple[float, int, int]]:
        # D value: external minus internal degree under the current sides.
        D = {v: sum(1 if side[u] != side[v] else -1 for u in adj[v]) for v in verts}
        heaps: list[list[tuple[float, int]]] = [[], []]
        for v in verts:
            heapq.heappush(heaps[side[v]], (-D[v], v))
        locked: set[int] = set()
        moves: list[tuple[float, int, int]] = []

        def refill(buf: list[int], heap: list[tuple[float, int]], upto: int) -> None:
            while len(buf) < upto and heap:
                negd, v = heapq.heappop(heap)
                if v in locked or -negd != D[v]:
                    continue
                buf.append(v)

        n_pairs = min(sum(1 for v in verts if side[v] == 0), sum(1 for v in verts if side[v] == 1))
        for _ in range(n_pairs):
            buf_a: list[int] = []
            buf_b: list[int] = []
            best: tuple[float, int, int] | None = None
            ia = 0
            while True:
                refill(buf_a, heaps[0], ia + 1)
                if ia >= len(buf_a):
                    break
                a = buf_a[ia]
                refill(buf_b, heaps[1], 1)
                if not buf_b:
                    break
                if best is not None and D[a] + D[buf_b[0]] <= best[0]:
                    break
                ib = 0
                while True:
                    refill(buf_b, heaps[1], ib + 1)
                    if ib >= len(buf_b):
                        break
                    b = buf_b[ib]
                    bound = D[a] + D[b]
                    if best is not None and bound <= best[0]:
                        break
                    gain = bound - (2 if b in adj[a] else 0)
                    if best is None or gain > best[0]:
                        best = (gain, a, b)
                    ib += 1
                ia += 1
            if best is None:
                break
            gain, a, b = best
            # Update unlocked neighbors before flipping the pair's sides.
            for v in adj[a]:
                if v not in locked and v != b:
                    D[v] += 2 if side[v] == side[a] else -2
                    heapq.heappush(heaps[side[v]], (-D[v], v))
            for v in adj[b]:
                if v not in locked and v != a:
                    D[v] += 2 if side[v] == side[b] else -2
                    heapq.heappush(heaps[side[v]], (-D[v], v))
            side[a], side[b] = side[b], side[a]
            locked.add(a)
            locked.add(b)
            moves.append((gain, a, b))
            for v in buf_a + buf_b:
                if v not in locked:
                    heapq.heappush(heaps[side[v]], (-D[v], v))
        return moves

    for _ in range(max_passes):
        moves = swap_gain_pass()
        if not moves:
            break
        prefix = 0.0
        best_total = 0.0
        best_k = 0
        for idx, (gain, _, _) in enumerate(moves):
            prefix += gain
            if prefix > best_total:
                best_total = prefix
                best_k = idx + 1
        # Undo swaps beyond the best prefix (all of them when no gain).
        for _, a, b in reversed(moves[best_k:]):
            side[a], side[b] = side[b], side[a]
        if best_total <= 0:
            break

    part_a = {v for v in verts if side[v] == 0}
    part_b = {v for v in verts if side[v] == 1}
    cut = sum(1 for a, b in graph.edges if side[a] != side[b])
    return part_a, part_b, cut


def target_levels(n_blocks: int, subproblem_cap: int) -> int:
    """Number of bisection levels needed to bring parts under the cap."""
    if subproblem_cap < 2:
        raise ValueError("subproblem_cap must be at least 2")
    if n_blocks <= subproblem_cap:
        return 0
    target = -(-n_blocks // subproblem_cap)
    return (target - 1).bit_length()


def partition_vertices(graph: BlockGraph, levels: int, seed: int = 0) -> list[list[int]]:
    """Recursively bisect into up to ``2**levels`` parts, left-to-right order."""
    parts: list[list[int]] = [sorted(graph.vertices)]
    for level in range(levels):
        nxt: list[list[int]] = []
        for idx, part in enumerate(parts):
            if len(part) < 2:
                nxt.append(part)
                continue
            sub = graph.subgraph(part)
            a, b, _ = kl_bisect(sub, seed=seed * 1_000_003 + level * 101 + idx)
            nxt.append(sorted(a))
            nxt.append(sorted(b))
        parts = nxt
    return parts


def cross_cut(graph: BlockGraph, parts: list[list[int]]) -> int:
    """Edges of the graph whose endpoints sit in different parts."""
    part_of = {v: idx for idx, part in enumerate(parts) for v in part}
    return sum(1 for a, b in graph.edges if part_of[a] != part_of[b])


def partition_instance(instance: BcpInstance, subproblem_cap: int, seed: int = 0) -> list[BcpInstance]:
    """Split an instance along the compatibility graph into sub-instances.

    Returns the instance itself (singleton list) when it already fits the
    cap. Each sub-instance rebuilds its own connection sets and big-M
    constants from its block subset.
    """
    levels = target_levels(len(instance.blocks), subproblem_cap)
    if levels == 0:
        return [instance]
    graph = block_graph(instance)
    parts = partition_vertices(graph, levels, seed)
    return [
        build_instance([instance.block_by_id[v] for v in part], instance.params)
        for part in parts
        if part
    ]
