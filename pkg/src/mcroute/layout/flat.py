"""SWAP-only routing over the whole device graph, used to refine placements.

Links are treated as ordinary (expensive) edges, so a pass drags interacting
qubits together and the final positions make a good starting layout. Only
the final positions matter; no op stream is produced.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from ..arch import INF, Architecture
from ..circuit.dag import CircuitDag
from ..router.lookahead import bfs_layer_set


@dataclass
class FlatGraph:
    slots: list[int]
    index: dict[int, int]
    adj: list[list[int]]
    dist: list[list[float]]

    @classmethod
    def build(cls, arch: Architecture, usable: list[int]) -> FlatGraph:
        slots = sorted(usable)
        index = {s: i for i, s in enumerate(slots)}
        wadj: list[list[tuple[int, float]]] = [[] for _ in slots]
        for s in slots:
            for t in arch.adj[s]:
                if t in index:
                    wadj[index[s]].append((index[t], 1))
        for lk in arch.links:
            if lk.port_a in index and lk.port_b in index:
                a, b = index[lk.port_a], index[lk.port_b]
                wadj[a].append((b, arch.w_link))
                wadj[b].append((a, arch.w_link))
        dist = [_dijkstra(wadj, i) for i in range(len(slots))]
        if any(d == INF for row in dist for d in row):
            raise ValueError("usable slots do not form a connected graph")
        adj = [sorted(j for j, _ in nb) for nb in wadj]
        return cls(slots, index, adj, dist)


def _dijkstra(wadj: list[list[tuple[int, float]]], src: int) -> list[float]:
    dist = [INF] * len(wadj)
    dist[src] = 0
    heap = [(0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in wadj[u]:
            if d + w < dist[v]:
                dist[v] = d + w
                heapq.heappush(heap, (d + w, v))
    return dist


def flat_pass(dag: CircuitDag, graph: FlatGraph, to_phys: list[int], ext_size: int = 20,
              ext_weight: float = 0.5, decay_step: float = 0.001, decay_reset: int = 5) -> list[int]:
    """Route ``dag`` with SWAPs only; returns the final slot of each logical qubit."""
    n = len(graph.slots)
    pos = [graph.index[p] for p in to_phys]
    occ = [-1] * n
    for q, i in enumerate(pos):
        occ[i] = q
    adj, dist = graph.adj, graph.dist
    adj_sets = [set(a) for a in adj]
    gates = dag.gates
    ds = dag.fresh_state()
    decay = [1.0] * len(pos)
    since_reset = 0
    since_exec = 0
    stall_limit = 10 * n

    def swap(i: int, j: int) -> None:
        a, b = occ[i], occ[j]
        occ[i], occ[j] = b, a
        if a >= 0:
            pos[a] = j
        if b >= 0:
            pos[b] = i

    while True:
        heap = sorted(ds.front)
        ran = False
        while heap:
            g = heapq.heappop(heap)
            qs = gates[g].qubits
            if len(qs) == 2 and pos[qs[1]] not in adj_sets[pos[qs[0]]]:
                continue
            for s in ds.execute(g):
                heapq.heappush(heap, s)
            ran = True
        if ds.n_remaining == 0:
            break
        if ran:
            since_exec = 0
            decay = [1.0] * len(pos)
            since_reset = 0
        front = sorted(ds.front)
        if since_exec > stall_limit:
            a, b = gates[front[0]].qubits
            while pos[b] not in adj_sets[pos[a]]:
                step = min(adj[pos[a]], key=lambda j: (dist[j][pos[b]], j))
                swap(pos[a], step)
            since_exec = 0
            continue
        ext = [gates[e.gate].qubits for e in bfs_layer_set(dag, ds, ext_size, 1.0)]
        fr = [gates[g].qubits for g in front]
        touch: dict[int, list[tuple[int, int, int]]] = {}
        for k, (a, b) in enumerate(fr + ext):
            touch.setdefault(a, []).append((k, a, b))
            touch.setdefault(b, []).append((k, a, b))
        nf, ne = len(fr), max(1, len(ext))
        base_f = sum(dist[pos[a]][pos[b]] for a, b in fr) / nf
        base_e = sum(dist[pos[a]][pos[b]] for a, b in ext) / ne
        best = None
        cands = sorted({(min(pos[q], j), max(pos[q], j)) for a, b in fr for q in (a, b) for j in adj[pos[q]]})
        for i, j in cands:
            x, y = occ[i], occ[j]

            def at(q: int) -> int:
                return j if q == x else i if q == y else pos[q]

            df = de = 0.0
            seen = set()
            for q in (x, y):
                if q < 0:
                    continue
                for k, a, b in touch.get(q, ()):
                    if k in seen:
                        continue
                    seen.add(k)
                    delta = dist[at(a)][at(b)] - dist[pos[a]][pos[b]]
                    if k < nf:
                        df += delta
                    else:
                        de += delta
            h = (base_f + df / nf) + ext_weight * (base_e + de / ne)
            h *= max(decay[x] if x >= 0 else 1.0, decay[y] if y >= 0 else 1.0)
            if best is None or h < best[0]:
                best = (h, i, j)
        _, i, j = best
        swap(i, j)
        for q in (occ[i], occ[j]):
            if q >= 0:
                decay[q] += decay_step
        since_reset += 1
        if since_reset >= decay_reset:
            decay = [1.0] * len(pos)
            since_reset = 0
        since_exec += 1
    return [graph.slots[i] for i in pos]
