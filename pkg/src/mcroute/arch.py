"""Multi-core device model and the distance tables the router queries.

A device is a set of cores, each a small nearest-neighbour graph of physical
slots, joined by weighted inter-core links between designated port slots.
Slot ids are global and core-major; core ids of grid-of-grids devices are
row-major over the super-grid.
"""

from __future__ import annotations

import heapq
import re
from collections import deque
from dataclasses import dataclass, field

INF = float("inf")
DENSE_LIMIT = 1024


@dataclass(frozen=True)
class Link:
    index: int
    core_a: int
    port_a: int
    core_b: int
    port_b: int

    def port_in(self, core: int) -> int:
        if core == self.core_a:
            return self.port_a
        if core == self.core_b:
            return self.port_b
        raise ValueError(f"link {self.index} does not touch core {core}")

    def other_port(self, port: int) -> int:
        return self.port_b if port == self.port_a else self.port_a


@dataclass(frozen=True)
class Core:
    id: int
    slots: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]


@dataclass
class Architecture:
    """Partitioned physical-qubit graph.

    ``coords`` is optional ``(row, col)`` per slot, filled in for grid
    devices and only used for reporting.
    """

    cores: list[Core]
    links: list[Link]
    w_link: int = 10
    name: str = "custom"
    coords: dict[int, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.w_link <= 0:
            raise ValueError("w_link must be a positive integer")
        all_slots = [s for c in self.cores for s in c.slots]
        if len(set(all_slots)) != len(all_slots):
            raise ValueError("slot ids must be globally unique")
        if sorted(all_slots) != list(range(len(all_slots))):
            raise ValueError("slot ids must be 0..P-1")
        self.n_slots = len(all_slots)
        self.core_of = [0] * self.n_slots
        self.adj: list[list[int]] = [[] for _ in range(self.n_slots)]
        for core in self.cores:
            members = set(core.slots)
            for s in core.slots:
                self.core_of[s] = core.id
            for u, v in core.edges:
                if u not in members or v not in members or u == v:
                    raise ValueError(f"bad intra edge ({u}, {v}) in core {core.id}")
                if v not in self.adj[u]:
                    self.adj[u].append(v)
                    self.adj[v].append(u)
        for nb in self.adj:
            nb.sort()
        for core in self.cores:
            if not _connected(core.slots, self.adj):
                raise ValueError(f"core {core.id} is not connected")

        self.is_port = [False] * self.n_slots
        self.core_links: list[list[Link]] = [[] for _ in self.cores]
        for link in self.links:
            for c, p in ((link.core_a, link.port_a), (link.core_b, link.port_b)):
                if not 0 <= c < len(self.cores) or p not in self.cores[c].slots:
                    raise ValueError(f"link {link.index}: port {p} not in core {c}")
                if not self.adj[p] and len(self.cores[c].slots) > 1:
                    raise ValueError(f"link {link.index}: port {p} has no intra neighbour")
                self.is_port[p] = True
            if link.core_a == link.core_b:
                raise ValueError(f"link {link.index} joins core {link.core_a} to itself")
            self.core_links[link.core_a].append(link)
            self.core_links[link.core_b].append(link)
        self.core_neighbours = [
            sorted({lk.core_b if lk.core_a == c else lk.core_a for lk in self.core_links[c]})
            for c in range(len(self.cores))
        ]

    @property
    def n_cores(self) -> int:
        return len(self.cores)

    def core_size(self, c: int) -> int:
        return len(self.cores[c].slots)

    def links_between(self, c1: int, c2: int) -> list[Link]:
        return [lk for lk in self.core_links[c1] if {lk.core_a, lk.core_b} == {c1, c2}]

    def are_adjacent(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "w_link": self.w_link,
            "cores": [
                {"id": c.id, "slots": list(c.slots), "edges": [list(e) for e in c.edges]}
                for c in self.cores
            ],
            "links": [
                {"index": lk.index, "core_a": lk.core_a, "port_a": lk.port_a,
                 "core_b": lk.core_b, "port_b": lk.port_b}
                for lk in self.links
            ],
            "coords": {str(s): list(rc) for s, rc in sorted(self.coords.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> Architecture:
        cores = [Core(c["id"], tuple(c["slots"]), tuple(tuple(e) for e in c["edges"]))
                 for c in data["cores"]]
        links = [Link(**lk) for lk in data["links"]]
        coords = {int(s): tuple(rc) for s, rc in data.get("coords", {}).items()}
        return cls(cores, links, data.get("w_link", 10), data.get("name", "custom"), coords)


def _connected(slots: tuple[int, ...], adj: list[list[int]]) -> bool:
    if not slots:
        return False
    seen = {slots[0]}
    todo = [slots[0]]
    while todo:
        u = todo.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return len(seen) == len(slots)


def build_grid_arch(family: str, core_rows: int, core_cols: int, m: int,
                    w_link: int = 10) -> Architecture:
    """Grid-of-grids: ``core_rows x core_cols`` cores, each an ``m x m`` grid.

    Every pair of super-grid neighbours gets one link. Horizontal links sit on
    row ``(m-1)//2`` for even super-rows and ``m//2`` for odd ones. Vertical
    links sit on column ``(m-1)//2`` or ``m//2``: the B family alternates by
    super-column parity, the H family uses the low column on the left edge,
    the high column on the right edge, and steps high-to-low for interior
    columns. At 2x2/4x4 (B) and 2x3/4x4 (H) this reproduces the two
    standard 4-core and 6-core devices port for port.
    """
    fam = family.upper()
    if fam not in ("B", "H"):
        raise ValueError(f"unsupported grid family {family!r}")
    if min(core_rows, core_cols, m) < 1:
        raise ValueError("core_rows, core_cols and m must be >= 1")
    n_cores = core_rows * core_cols
    if n_cores > 1 and m < 2:
        raise ValueError("multi-core grids need m >= 2 so ports have neighbours")

    per = m * m
    lo, hi = (m - 1) // 2, m // 2

    def slot(core: int, r: int, c: int) -> int:
        return core * per + r * m + c

    cores = []
    coords = {}
    for k in range(n_cores):
        edges = []
        for r in range(m):
            for c in range(m):
                coords[slot(k, r, c)] = (r, c)
                if c + 1 < m:
                    edges.append((slot(k, r, c), slot(k, r, c + 1)))
                if r + 1 < m:
                    edges.append((slot(k, r, c), slot(k, r + 1, c)))
        cores.append(Core(k, tuple(range(k * per, (k + 1) * per)), tuple(edges)))

    raw = []
    for R in range(core_rows):
        for S in range(core_cols):
            a = R * core_cols + S
            if S + 1 < core_cols:
                row = lo if R % 2 == 0 else hi
                raw.append((a, slot(a, row, m - 1), a + 1, slot(a + 1, row, 0)))
            if R + 1 < core_rows:
                b = a + core_cols
                if fam == "B":
                    col_a = col_b = lo if S % 2 == 0 else hi
                else:
                    col_a = lo if S == 0 else hi
                    col_b = hi if S == core_cols - 1 else lo
                raw.append((a, slot(a, m - 1, col_a), b, slot(b, 0, col_b)))
    raw.sort(key=lambda t: (t[0], t[2]))
    links = [Link(i, *t) for i, t in enumerate(raw)]
    name = f"{fam.lower()}grid:{core_rows}x{core_cols}:{m}x{m}"
    return Architecture(cores, links, w_link, name, coords)


_SPEC_RE = re.compile(r"^([bh])grid:(\d+)x(\d+):(\d+)x(\d+)$", re.IGNORECASE)


def parse_arch_spec(spec: str, w_link: int = 10) -> Architecture:
    """Build an architecture from ``bgrid:RxS:mxm`` / ``hgrid:RxS:mxm``."""
    mt = _SPEC_RE.match(spec.strip())
    if not mt:
        raise ValueError(f"bad architecture spec {spec!r}; expected e.g. hgrid:2x3:4x4")
    fam, r, s, m1, m2 = mt.groups()
    if m1 != m2:
        raise ValueError("cores must be square (mxm)")
    return build_grid_arch(fam, int(r), int(s), int(m1), w_link)


class DistanceTables:
    """Intra-core, core-graph and physical distances for one architecture.

    ``phys`` is recovered from the two levels: intra-core BFS tables plus
    shortest paths over the port graph (ports joined by links of weight
    ``w_link`` and, inside each core, by their intra-core distance).
    """

    def __init__(self, arch: Architecture):
        self.arch = arch
        n = arch.n_slots
        self.local = [0] * n
        self._intra: list[list[list[int]]] = []
        for core in arch.cores:
            for i, s in enumerate(core.slots):
                self.local[s] = i
            self._intra.append([_bfs(arch.adj, s, self.local, len(core.slots))
                                for s in core.slots])

        K = arch.n_cores
        core_adj: list[list[int]] = [[] for _ in range(K)]
        for lk in arch.links:
            core_adj[lk.core_a].append(lk.core_b)
            core_adj[lk.core_b].append(lk.core_a)
        self.core_hops: list[list[int]] = []
        self._core_pred: list[list[int]] = []
        for src in range(K):
            dist, pred = _core_dijkstra(core_adj, src)
            for dst in range(K):
                if dist[dst] == INF:
                    raise ValueError(f"core graph is disconnected: no path from core {src} to core {dst}")
            self.core_hops.append(dist)
            self._core_pred.append(pred)
        self.d_core = [[h * arch.w_link for h in row] for row in self.core_hops]
        self.core_next_hop = [
            [self.core_path(a, b)[1] if a != b else a for b in range(K)] for a in range(K)
        ]

        self.ports = sorted({p for lk in arch.links for p in (lk.port_a, lk.port_b)})
        self._core_ports: list[list[int]] = [[] for _ in range(K)]
        for p in self.ports:
            self._core_ports[arch.core_of[p]].append(p)
        self._port_dist = self._port_graph_distances()

        self.dense = n <= DENSE_LIMIT
        self._phys: list[list[int]] | None = None
        if self.dense:
            self._phys = [[self._phys_recover(p, q) for q in range(n)] for p in range(n)]

    def intra(self, p: int, q: int) -> float:
        c = self.arch.core_of[p]
        if self.arch.core_of[q] != c:
            return INF
        return self._intra[c][self.local[p]][self.local[q]]

    def intra_table(self, c: int) -> list[list[int]]:
        """Core-local distance matrix, indexed by ``local[slot]``."""
        return self._intra[c]

    def phys(self, p: int, q: int) -> float:
        if self._phys is not None:
            return self._phys[p][q]
        return self._phys_recover(p, q)

    def phys_matrix(self) -> list[list[int]]:
        """Dense view; built on demand for large devices."""
        if self._phys is None:
            n = self.arch.n_slots
            return [[self._phys_recover(p, q) for q in range(n)] for p in range(n)]
        return self._phys

    def core_path(self, c1: int, c2: int) -> list[int]:
        """Canonical shortest core path (lowest-index predecessor on ties)."""
        K = self.arch.n_cores
        if not (0 <= c1 < K and 0 <= c2 < K):
            raise ValueError(f"invalid core id in ({c1}, {c2})")
        path = [c2]
        pred = self._core_pred[c1]
        while path[-1] != c1:
            path.append(pred[path[-1]])
        path.reverse()
        return path

    def _port_graph_distances(self) -> dict[int, dict[int, int]]:
        arch = self.arch
        nbrs: dict[int, list[tuple[int, int]]] = {p: [] for p in self.ports}
        for lk in arch.links:
            nbrs[lk.port_a].append((lk.port_b, arch.w_link))
            nbrs[lk.port_b].append((lk.port_a, arch.w_link))
        for ports in self._core_ports:
            for a in ports:
                for b in ports:
                    if a != b:
                        nbrs[a].append((b, self.intra(a, b)))
        out = {}
        for src in self.ports:
            dist = {src: 0}
            heap = [(0, src)]
            while heap:
                d, u = heapq.heappop(heap)
                if d > dist[u]:
                    continue
                for v, w in nbrs[u]:
                    nd = d + w
                    if nd < dist.get(v, INF):
                        dist[v] = nd
                        heapq.heappush(heap, (nd, v))
            out[src] = dist
        return out

    def _phys_recover(self, p: int, q: int) -> int:
        cp, cq = self.arch.core_of[p], self.arch.core_of[q]
        best = self.intra(p, q) if cp == cq else INF
        for a in self._core_ports[cp]:
            da = self.intra(p, a)
            row = self._port_dist[a]
            for b in self._core_ports[cq]:
                if a == b:
                    continue
                d = da + row.get(b, INF) + self.intra(b, q)
                if d < best:
                    best = d
        return best


def precompute_distances(arch: Architecture) -> DistanceTables:
    return DistanceTables(arch)


def _bfs(adj: list[list[int]], src: int, local: list[int], size: int) -> list[int]:
    dist = [-1] * size
    dist[local[src]] = 0
    q = deque([src])
    while q:
        u = q.popleft()
        du = dist[local[u]]
        for v in adj[u]:
            if dist[local[v]] < 0:
                dist[local[v]] = du + 1
                q.append(v)
    return dist


def _core_dijkstra(core_adj: list[list[int]], src: int) -> tuple[list[float], list[int]]:
    """Hop distances plus the lowest-index shortest-path predecessor."""
    K = len(core_adj)
    dist = [INF] * K
    dist[src] = 0
    heap = [(0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v in core_adj[u]:
            if d + 1 < dist[v]:
                dist[v] = d + 1
                heapq.heappush(heap, (d + 1, v))
    pred = [-1] * K
    for v in range(K):
        if v == src or dist[v] == INF:
            continue
        pred[v] = min(u for u in core_adj[v] if dist[u] + 1 == dist[v])
    return dist, pred
