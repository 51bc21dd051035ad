"""The routing loop.

Each iteration drains the front, then applies exactly one move: the best
intra-core SWAP if some front gate has both operands in one core, otherwise
the best teleport from a pool of gate-driven and congestion-relief
candidates. A checkpoint is saved whenever gates execute; a long stall rolls
back to it and forces progress on the gate that has waited longest.
"""

from __future__ import annotations

import enum
import heapq
import time
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from ..arch import INF, Architecture, DistanceTables, Link
from ..circuit.dag import CircuitDag
from ..layout.mapping import EMPTY, Layout
from ..program import Gate1Op, Gate2Op, RoutedProgram, SwapOp, TeleportOp
from ..verify import Metrics, compute_metrics
from .lookahead import ExtendedSetEntry, bfs_layer_set, tainted_core_set, topo_order_set
from .params import RouterParams


# A core with no empty slot can neither stage an outgoing teleport (the source
# port must be empty) nor accept one, so landings must leave this many spare.
MIN_SPARE = 1


class CandidateKind(enum.IntEnum):
    GATE_DRIVEN = 0
    RELIEF = 1


@dataclass
class TeleportCandidate:
    qubit: int
    src_core: int
    next_core: int
    link: Link
    port_src: int
    port_dst: int
    staging_slot: int
    d_prep: float
    c_cap: float
    g_hop: float
    delta_F: float
    delta_E_weighted: float
    score: float
    kind: CandidateKind = CandidateKind.GATE_DRIVEN
    relief_bonus: float = 0.0
    order: int = 0

    @property
    def feasible(self) -> bool:
        return self.score < INF

    def sort_key(self) -> tuple:
        return (self.score, int(self.kind), self.order)


@dataclass
class Checkpoint:
    layout: Layout
    n_ops: int
    n_remaining: int


class RoutingError(RuntimeError):
    """Internal failure: a move could not be carried out."""


class RoutingAborted(RuntimeError):
    """Rollback budget exhausted. ``result`` holds the partial run."""

    def __init__(self, result: RouteResult):
        super().__init__(f"routing aborted after {result.program.rollbacks} rollbacks "
                         f"({result.program.stats.get('remaining', '?')} gates left)")
        self.result = result


class RouteResult(NamedTuple):
    program: RoutedProgram
    layout: Layout
    metrics: Metrics


@dataclass
class _IntraContext:
    table: list[list[int]]
    fmap: dict[int, list[tuple[int, int]]]
    emap: dict[int, list[tuple[int, int, float]]]
    n_f: int
    n_e: int


@dataclass
class RunStats:
    iterations: int = 0
    max_scored: int = 0
    max_front: int = 0
    forced_moves: int = 0
    flag_iterations: int = 0
    scored_log: list[tuple[int, int]] = field(default_factory=list)


class RouterState:
    """Single-owner mutable state of one routing run."""

    def __init__(self, dag: CircuitDag, layout: Layout, arch: Architecture,
                 tables: DistanceTables, params: RouterParams):
        if layout.arch is not arch and layout.arch.n_slots != arch.n_slots:
            raise ValueError("layout belongs to a different architecture")
        if layout.n_logical < dag.n_logical:
            raise ValueError(f"layout places {layout.n_logical} qubits but the circuit uses {dag.n_logical}")
        self.dag = dag
        self.arch = arch
        self.tables = tables
        self.params = params
        self.layout = layout.copy()
        self.ds = dag.fresh_state()
        self.ops: list = []
        self.two_q_ids = [g.id for g in dag.gates if g.is_2q]
        self.iteration = 0
        self.front_since = dict.fromkeys(self.ds.front, 0)
        self.exec_version = 0
        self.core_version = 0
        self._inter_cache: tuple[int, list[ExtendedSetEntry]] = (-1, [])
        self._intra_cache: dict[int, tuple[tuple[int, int], list[ExtendedSetEntry]]] = {}
        self.rollbacks = 0
        self.stall = 0
        self.stats = RunStats()
        self._links: dict[tuple[int, int], list[Link]] = {}
        for lk in arch.links:
            self._links.setdefault((lk.core_a, lk.core_b), []).append(lk)
            self._links.setdefault((lk.core_b, lk.core_a), []).append(lk)
        K = arch.n_cores
        self._paths = [[tables.core_path(a, b) for b in range(K)] for a in range(K)]
        self.checkpoint = self._snapshot()

    # -- helpers --------------------------------------------------------

    def core_of_qubit(self, q: int) -> int:
        return self.arch.core_of[self.layout.to_phys[q]]

    def crosses(self, a: int, b: int) -> bool:
        core_of, to_phys = self.arch.core_of, self.layout.to_phys
        return core_of[to_phys[a]] != core_of[to_phys[b]]

    def d_intra(self, p: int, q: int) -> float:
        return self.tables.intra(p, q)

    def _swap(self, u: int, v: int) -> None:
        lay = self.layout
        if lay.to_logical[u] == EMPTY and lay.to_logical[v] == EMPTY:
            return
        lay.apply_swap(u, v)
        self.ops.append(SwapOp(u, v))

    def _bfs_path(self, src: int, dst: int, blocked: set[int]) -> list[int] | None:
        if src == dst:
            return [src]
        adj = self.arch.adj
        parent = {src: src}
        dq = deque([src])
        while dq:
            u = dq.popleft()
            for v in adj[u]:
                if v in parent or v in blocked:
                    continue
                parent[v] = u
                if v == dst:
                    path = [v]
                    while path[-1] != src:
                        path.append(parent[path[-1]])
                    return path[::-1]
                dq.append(v)
        return None

    # -- phase 1: drain ---------------------------------------------------

    def drain_front(self) -> list[int]:
        ds, gates, adj = self.ds, self.dag.gates, self.arch.adj
        to_phys = self.layout.to_phys
        heap = sorted(ds.front)
        executed = []
        while heap:
            g = heapq.heappop(heap)
            gate = gates[g]
            if gate.is_2q:
                pa, pb = to_phys[gate.qubits[0]], to_phys[gate.qubits[1]]
                if pb not in adj[pa]:
                    continue
                self.ops.append(Gate2Op(g, gate.label, pa, pb))
            else:
                self.ops.append(Gate1Op(g, gate.label, to_phys[gate.qubits[0]]))
            for s in ds.execute(g):
                heapq.heappush(heap, s)
                self.front_since[s] = self.iteration
            del self.front_since[g]
            executed.append(g)
        if executed:
            self.exec_version += 1
        return executed

    # -- phase 2: partition ---------------------------------------------

    def partition_front(self) -> tuple[list[int], list[int]]:
        gates = self.dag.gates
        f_intra, f_inter = [], []
        for g in sorted(self.ds.front):
            gate = gates[g]
            if not gate.is_2q:
                continue
            (f_inter if self.crosses(*gate.qubits) else f_intra).append(g)
        return f_intra, f_inter

    # -- phase 3a: intra-core SWAP ----------------------------------------

    def intra_extended_set(self, core: int, fc: list[int] | None = None) -> list[ExtendedSetEntry]:
        key = (self.exec_version, self.core_version)
        hit = self._intra_cache.get(core)
        if hit is not None and hit[0] == key:
            return hit[1]
        if fc is None:
            f_intra, _ = self.partition_front()
            fc = [g for g in f_intra if self.core_of_qubit(self.dag.gates[g].qubits[0]) == core]
        p = self.params
        ec = tainted_core_set(self.dag, self.ds, fc, p.L, p.gamma, self.two_q_ids, self.crosses)
        self._intra_cache[core] = (key, ec)
        return ec

    def _intra_context(self, core: int, fc: list[int], ec: list[ExtendedSetEntry]) -> _IntraContext:
        gates = self.dag.gates
        fmap: dict[int, list[tuple[int, int]]] = {}
        for g in fc:
            a, b = gates[g].qubits
            fmap.setdefault(a, []).append((a, b))
            fmap.setdefault(b, []).append((a, b))
        emap: dict[int, list[tuple[int, int, float]]] = {}
        for e in ec:
            a, b = gates[e.gate].qubits
            emap.setdefault(a, []).append((a, b, e.weight))
            emap.setdefault(b, []).append((a, b, e.weight))
        return _IntraContext(self.tables.intra_table(core), fmap, emap, len(fc), len(ec))

    def _swap_score(self, ctx: _IntraContext, u: int, v: int) -> float:
        to_phys, to_logical = self.layout.to_phys, self.layout.to_logical
        loc, T = self.tables.local, ctx.table
        x, y = to_logical[u], to_logical[v]

        def moved(q: int) -> int:
            return v if q == x else u if q == y else to_phys[q]

        def gain(a: int, b: int) -> int:
            old = T[loc[to_phys[a]]][loc[to_phys[b]]]
            new = T[loc[moved(a)]][loc[moved(b)]]
            return old - new

        dF = 0.0
        dE = 0.0
        for q in (x, y):
            if q == EMPTY:
                continue
            for a, b in ctx.fmap.get(q, ()):
                dF += gain(a, b)
            for a, b, w in ctx.emap.get(q, ()):
                dE += w * gain(a, b)
        score = dF / ctx.n_f if ctx.n_f else 0.0
        if ctx.n_e:
            score += self.params.eff_w_e * dE / ctx.n_e
        return score

    def score_intra_swap(self, core: int, u: int, v: int) -> float:
        f_intra, _ = self.partition_front()
        fc = [g for g in f_intra if self.core_of_qubit(self.dag.gates[g].qubits[0]) == core]
        ec = self.intra_extended_set(core, fc)
        return self._swap_score(self._intra_context(core, fc, ec), u, v)

    def best_intra_swap(self, f_intra: list[int]) -> tuple[float, int, int] | None:
        gates, adj = self.dag.gates, self.arch.adj
        to_phys = self.layout.to_phys
        by_core: dict[int, list[int]] = {}
        for g in f_intra:
            by_core.setdefault(self.core_of_qubit(gates[g].qubits[0]), []).append(g)
        best = None
        scored = 0
        for core in sorted(by_core):
            fc = by_core[core]
            ctx = self._intra_context(core, fc, self.intra_extended_set(core, fc))
            edges = set()
            for g in fc:
                for q in gates[g].qubits:
                    p = to_phys[q]
                    for n in adj[p]:
                        edges.add((p, n) if p < n else (n, p))
            for u, v in sorted(edges):
                s = self._swap_score(ctx, u, v)
                scored += 1
                if best is None or s > best[0]:
                    best = (s, u, v)
        self._note_scored(scored)
        return best

    # -- phase 3b: teleport -------------------------------------------------

    def inter_extended_set(self) -> list[ExtendedSetEntry]:
        if self._inter_cache[0] == self.exec_version:
            return self._inter_cache[1]
        p = self.params
        if p.topo_extended_set:
            ext = topo_order_set(self.dag, self.ds, p.L, p.gamma, self.two_q_ids)
        else:
            ext = bfs_layer_set(self.dag, self.ds, p.L, p.gamma)
        self._inter_cache = (self.exec_version, ext)
        return ext

    def _ext_by_qubit(self, ext: list[ExtendedSetEntry]) -> dict[int, list[tuple[int, float]]]:
        gates = self.dag.gates
        out: dict[int, list[tuple[int, float]]] = {}
        for e in ext:
            a, b = gates[e.gate].qubits
            out.setdefault(a, []).append((b, e.weight))
            out.setdefault(b, []).append((a, e.weight))
        return out

    def _free_target(self, pi: int, core: int, exclude: set[int]) -> int | None:
        """Nearest free slot for an occupant of ``pi``; non-ports first, then id."""
        to_logical, is_port = self.layout.to_logical, self.arch.is_port
        T, loc = self.tables.intra_table(core), self.tables.local
        row = T[loc[pi]]
        best = None
        for t in self.arch.cores[core].slots:
            if t == pi or t in exclude or to_logical[t] != EMPTY:
                continue
            key = (is_port[t], row[loc[t]], t)
            if best is None or key < best:
                best = key
        return None if best is None else best[2]

    def _evict_cost(self, pi: int, q: int, core: int, exclude: set[int]) -> float:
        occ = self.layout.to_logical[pi]
        if occ == EMPTY or occ == q:
            return 0
        t = self._free_target(pi, core, exclude)
        return INF if t is None else self.d_intra(pi, t)

    def make_candidate(self, q: int, next_core: int, link: Link, *, partner: int | None = None,
                       kind: CandidateKind = CandidateKind.GATE_DRIVEN,
                       ext_map: dict[int, list[tuple[int, float]]] | None = None,
                       relief_bonus: float = 0.0, order: int = 0) -> TeleportCandidate:
        arch, tables, p = self.arch, self.tables, self.params
        lay = self.layout
        p1 = lay.to_phys[q]
        src = arch.core_of[p1]
        pi_s = link.port_in(src)
        pi_d = link.other_port(pi_s)
        ns = min(arch.adj[pi_s], key=lambda n: (tables.intra(p1, n), n))
        d_stage = tables.intra(p1, ns)

        if p1 == pi_s and lay.to_logical[ns] != EMPTY:
            # the staging swap parks the neighbour on the port; it needs somewhere to go
            e_s = 0 if lay.free_count[src] > 0 else INF
        else:
            exclude = {ns}
            if lay.to_logical[ns] == EMPTY and p1 != ns:
                # after staging, q's old slot is the one that opens up
                e_s = self._evict_cost_after_staging(pi_s, q, src, ns, p1)
            else:
                e_s = self._evict_cost(pi_s, q, src, exclude)
        e_d = self._evict_cost(pi_d, q, next_core, set())
        d_prep = d_stage + e_s + e_d

        f_dst = lay.free_count[next_core]
        short = p.tau - f_dst
        c_cap = p.eff_c_pen * short if short > 0 else 0.0

        d_F = 0.0
        g_hop = 0.0
        if kind == CandidateKind.GATE_DRIVEN and partner is not None:
            p2 = lay.to_phys[partner]
            tgt = arch.core_of[p2]
            d_F = tables.phys(p1, p2) - tables.phys(pi_d, p2)
            hops = tables.core_hops
            g_hop = p.eff_w_h * (hops[src][tgt] - hops[next_core][tgt])
        d_E = 0.0
        if ext_map:
            for other, w in ext_map.get(q, ()):
                po = lay.to_phys[other]
                d_E += w * (tables.phys(p1, po) - tables.phys(pi_d, po))

        if d_prep == INF or f_dst < MIN_SPARE + 1:
            score = INF
        else:
            score = d_prep + c_cap - g_hop - d_F - p.eff_w_e * d_E - relief_bonus
        return TeleportCandidate(q, src, next_core, link, pi_s, pi_d, ns, d_prep, c_cap, g_hop,
                                 d_F, d_E, score, kind, relief_bonus, order)

    def _evict_cost_after_staging(self, pi: int, q: int, core: int, ns: int, p1: int) -> float:
        occ = self.layout.to_logical[pi]
        if occ == EMPTY or occ == q:
            return 0
        # n_s will hold q; the slot q leaves behind opens up instead
        is_port = self.arch.is_port
        keys = []
        t = self._free_target(pi, core, {ns})
        if t is not None:
            keys.append((is_port[t], self.d_intra(pi, t), t))
        if p1 != pi:
            keys.append((is_port[p1], self.d_intra(pi, p1), p1))
        return min(keys)[1] if keys else INF

    def enumerate_tele_candidates(self, f_inter: list[int] | None = None,
                                  ext: list[ExtendedSetEntry] | None = None) -> list[TeleportCandidate]:
        if f_inter is None:
            f_inter = self.partition_front()[1]
        if ext is None:
            ext = self.inter_extended_set()
        ext_map = self._ext_by_qubit(ext)
        gates = self.dag.gates
        out = []
        for g in f_inter:
            a, b = gates[g].qubits
            for q, partner in ((a, b), (b, a)):
                src = self.core_of_qubit(q)
                for nxt in self.arch.core_neighbours[src]:
                    for lk in self._links[(src, nxt)]:
                        out.append(self.make_candidate(q, nxt, lk, partner=partner,
                                                       ext_map=ext_map, order=len(out)))
        return out

    def demand_vector(self, f_inter: list[int] | None = None,
                      ext: list[ExtendedSetEntry] | None = None) -> list[int]:
        if f_inter is None:
            f_inter = self.partition_front()[1]
        if ext is None:
            ext = self.inter_extended_set()
        gates = self.dag.gates
        d = [0] * self.arch.n_cores
        for g in list(f_inter) + [e.gate for e in ext]:
            a, b = gates[g].qubits
            ca, cb = self.core_of_qubit(a), self.core_of_qubit(b)
            if ca == cb:
                continue
            for c in self._paths[ca][cb]:
                d[c] += 1
        return d

    def flagged_cores(self, demand: list[int]) -> list[int]:
        p, free = self.params, self.layout.free_count
        return [c for c, dc in enumerate(demand) if dc >= p.theta_d and free[c] <= p.theta_f]

    def _would_flag(self, core: int, demand: list[int]) -> bool:
        """True if receiving one more qubit would push ``core`` over the threshold."""
        p = self.params
        return demand[core] >= p.theta_d and self.layout.free_count[core] - 1 <= p.theta_f

    def _less_loaded(self, src: int, dst: int) -> bool:
        free = self.layout.free_count
        return free[dst] - 1 > free[src] + 1

    def relief_victims(self, core: int) -> list[int]:
        """Most idle residents of ``core`` that are not in the front."""
        dag, ds = self.dag, self.ds
        busy = {q for g in ds.front for q in dag.gates[g].qubits}
        residents = []
        for s in self.arch.cores[core].slots:
            q = self.layout.to_logical[s]
            if q == EMPTY or q in busy:
                continue
            ng = ds.next_gate(q)
            key = (0, 0, q) if ng is None else (1, -dag.level[ng], q)
            residents.append((key, q))
        residents.sort()
        return [q for _, q in residents[: self.params.relief_victims]]

    def relief_candidates(self, f_inter: list[int] | None = None,
                          ext: list[ExtendedSetEntry] | None = None,
                          start_order: int = 0, demand: list[int] | None = None) -> list[TeleportCandidate]:
        if ext is None:
            ext = self.inter_extended_set()
        if demand is None:
            demand = self.demand_vector(f_inter, ext)
        flagged = self.flagged_cores(demand)
        if not flagged:
            return []
        flag_set = set(flagged)
        ext_map = self._ext_by_qubit(ext)
        free = self.layout.free_count
        out = []
        for c in flagged:
            bonus = self.params.b_r * (demand[c] - free[c])
            for v in self.relief_victims(c):
                for nxt in self.arch.core_neighbours[c]:
                    if nxt in flag_set or self._would_flag(nxt, demand) or not self._less_loaded(c, nxt):
                        continue
                    for lk in self._links[(c, nxt)]:
                        out.append(self.make_candidate(
                            v, nxt, lk, kind=CandidateKind.RELIEF, ext_map=ext_map,
                            relief_bonus=bonus, order=start_order + len(out)))
        return out

    def score_candidate(self, cand: TeleportCandidate) -> float:
        p = self.params
        if cand.d_prep == INF or self.layout.free_count[cand.next_core] < MIN_SPARE + 1:
            return INF
        return (cand.d_prep + cand.c_cap - cand.g_hop - cand.delta_F
                - p.eff_w_e * cand.delta_E_weighted - cand.relief_bonus)

    def select_teleport(self, f_inter: list[int]) -> tuple[TeleportCandidate | None, list[TeleportCandidate]]:
        ext = self.inter_extended_set()
        pool = self.enumerate_tele_candidates(f_inter, ext)
        demand = self.demand_vector(f_inter, ext)
        if self.flagged_cores(demand):
            self.stats.flag_iterations += 1
        if not self.params.disable_relief:
            pool += self.relief_candidates(f_inter, ext, start_order=len(pool), demand=demand)
        self._note_scored(len(pool))
        feasible = [c for c in pool if c.feasible]
        best = min(feasible, key=TeleportCandidate.sort_key) if feasible else None
        return best, pool

    def _evict(self, pi: int, forbidden: set[int], blocked: set[int]) -> None:
        """Clear ``pi`` by shifting the hole from the nearest free slot back to it."""
        to_logical, is_port = self.layout.to_logical, self.arch.is_port
        core = self.arch.core_of[pi]
        parent = {pi: pi}
        dist = {pi: 0}
        dq = deque([pi])
        best = None
        while dq:
            u = dq.popleft()
            for v in self.arch.adj[u]:
                if v in parent or v in blocked:
                    continue
                parent[v] = u
                dist[v] = dist[u] + 1
                dq.append(v)
                if to_logical[v] == EMPTY and v not in forbidden:
                    key = (is_port[v], dist[v], v)
                    if best is None or key < best:
                        best = key
        if best is None:
            raise RoutingError(f"no free slot reachable from port {pi} in core {core}")
        path = [best[2]]
        while path[-1] != pi:
            path.append(parent[path[-1]])
        path.reverse()
        for i in range(len(path) - 2, -1, -1):
            self._swap(path[i], path[i + 1])

    def apply_teleport_move(self, cand: TeleportCandidate, forced: bool = False) -> None:
        lay = self.layout
        q, pi_s, pi_d, ns = cand.qubit, cand.port_src, cand.port_dst, cand.staging_slot
        p1 = lay.to_phys[q]
        if p1 != ns:
            path = self._bfs_path(p1, ns, set() if p1 == pi_s else {pi_s})
            if path is None:
                path = self._bfs_path(p1, ns, set())
            if path is None:
                raise RoutingError(f"no intra-core path from slot {p1} to staging slot {ns}")
            for a, b in zip(path, path[1:]):
                self._swap(a, b)
        if lay.to_logical[pi_s] != EMPTY:
            self._evict(pi_s, forbidden={ns}, blocked={ns})
        if lay.to_logical[pi_d] != EMPTY:
            self._evict(pi_d, forbidden=set(), blocked=set())
        lay.apply_teleport(q, pi_d)
        self.ops.append(TeleportOp(q, cand.link.index, ns, pi_d,
                                   relief=cand.kind == CandidateKind.RELIEF and not forced,
                                   forced=forced))
        self.core_version += 1

    # -- phase 4: checkpoint and rollback -------------------------------------

    def _snapshot(self) -> Checkpoint:
        return Checkpoint(self.layout.copy(), len(self.ops), self.ds.n_remaining)

    def save_checkpoint(self) -> None:
        self.checkpoint = self._snapshot()
        self.stall = 0

    def restore_checkpoint(self) -> None:
        cp = self.checkpoint
        # stalled iterations never execute gates, so the DAG state is unchanged
        assert self.ds.n_remaining == cp.n_remaining
        self.layout.restore(cp.layout)
        del self.ops[cp.n_ops:]
        self.core_version += 1
        self.stall = 0

    def checkpoint_cycle(self, progressed: bool) -> bool:
        """Book-keeping after one iteration; returns False when the run must abort."""
        if progressed:
            self.save_checkpoint()
            return True
        self.stall += 1
        if self.stall < self.params.L_deadlock:
            return True
        if self.rollbacks >= self.params.N_backup_max:
            return False
        self.restore_checkpoint()
        self.rollbacks += 1
        self.force_progress()
        return True

    def _reachable(self, cand: TeleportCandidate) -> bool:
        """Forced moves ignore the score and only need a legal, live landing."""
        return cand.d_prep < INF and self.layout.free_count[cand.next_core] >= MIN_SPARE + 1

    def _first_hop(self, x: int, y: int) -> TeleportCandidate | None:
        src, dst = self.core_of_qubit(x), self.core_of_qubit(y)
        nxt = self.tables.core_next_hop[src][dst]
        best = None
        for lk in self._links[(src, nxt)]:
            c = self.make_candidate(x, nxt, lk, partner=y)
            if self._reachable(c) and (best is None or c.d_prep < best.d_prep):
                best = c
        return best

    def make_room(self, core: int, protect: set[int]) -> bool:
        """Open one slot in ``core`` by shifting qubits toward the nearest roomy core."""
        K = self.arch.n_cores
        parent = {core: core}
        dq = deque([core])
        target = None
        while dq and target is None:
            c = dq.popleft()
            for nb in self.arch.core_neighbours[c]:
                if nb in parent:
                    continue
                parent[nb] = c
                if self.layout.free_count[nb] >= MIN_SPARE + 1:
                    target = nb
                    break
                dq.append(nb)
        if target is None:
            return False
        path = [target]
        while path[-1] != core:
            path.append(parent[path[-1]])
        path.reverse()
        assert len(path) <= K
        busy = {q for g in self.ds.front for q in self.dag.gates[g].qubits}
        for j in range(len(path) - 2, -1, -1):
            src, dst = path[j], path[j + 1]
            best = None
            for s in self.arch.cores[src].slots:
                v = self.layout.to_logical[s]
                if v == EMPTY or v in protect:
                    continue
                for lk in self._links[(src, dst)]:
                    c = self.make_candidate(v, dst, lk, kind=CandidateKind.RELIEF)
                    if not self._reachable(c):
                        continue
                    key = (v in busy, c.d_prep, v, lk.index)
                    if best is None or key < best[0]:
                        best = (key, c)
            if best is None:
                return False
            self.apply_teleport_move(best[1], forced=True)
        return True

    def force_progress(self) -> bool:
        """Walk one endpoint of the longest-waiting front gate to its partner."""
        if self.drain_front():
            return True
        gates = self.dag.gates
        pending = [g for g in self.ds.front if gates[g].is_2q]
        if not pending:
            return True
        g = min(pending, key=lambda g: (self.front_since[g], g))
        a, b = gates[g].qubits
        order = [(a, b), (b, a)]
        if self.crosses(a, b):
            costs = []
            for x, y in order:
                hop = self._first_hop(x, y)
                costs.append(INF if hop is None else hop.d_prep)
            if costs[1] < costs[0]:
                order.reverse()
        for x, y in order:
            if self._walk(x, y):
                self.stats.forced_moves += 1
                return True
        return False

    def _walk(self, x: int, y: int) -> bool:
        while self.crosses(x, y):
            hop = self._first_hop(x, y)
            if hop is None:
                nxt = self.tables.core_next_hop[self.core_of_qubit(x)][self.core_of_qubit(y)]
                if not self.make_room(nxt, {x, y}):
                    return False
                hop = self._first_hop(x, y)
                if hop is None:
                    return False
            self.apply_teleport_move(hop, forced=True)
        path = self._bfs_path(self.layout.to_phys[x], self.layout.to_phys[y], set())
        if path is None:
            return False
        for u, v in zip(path, path[1:-1]):
            self._swap(u, v)
        return True

    # -- main loop --------------------------------------------------------------

    def _note_scored(self, n: int) -> None:
        if n > self.stats.max_scored:
            self.stats.max_scored = n
        self.stats.scored_log.append((len(self.ds.front), n))

    def step(self) -> bool:
        """One iteration of drain, partition and move. Returns True when done."""
        self.iteration += 1
        self.stats.iterations = self.iteration
        before = self.checkpoint.n_remaining
        self.drain_front()
        if self.ds.n_remaining == 0:
            return True
        if len(self.ds.front) > self.stats.max_front:
            self.stats.max_front = len(self.ds.front)
        f_intra, f_inter = self.partition_front()
        if f_intra:
            best = self.best_intra_swap(f_intra)
            if best is not None:
                self._swap(best[1], best[2])
        elif f_inter:
            cand, _ = self.select_teleport(f_inter)
            if cand is not None:
                self.apply_teleport_move(cand)
        if not self.checkpoint_cycle(self.ds.n_remaining < before):
            raise _Abort
        return False

    def run(self) -> None:
        while not self.step():
            pass

    def program(self, complete: bool) -> RoutedProgram:
        prog = RoutedProgram(list(self.ops), complete=complete, rollbacks=self.rollbacks)
        prog.stats = {
            "iterations": self.stats.iterations,
            "max_scored": self.stats.max_scored,
            "max_front": self.stats.max_front,
            "forced_moves": self.stats.forced_moves,
            "flag_iterations": self.stats.flag_iterations,
            "remaining": self.ds.n_remaining,
        }
        return prog


class _Abort(Exception):
    pass


def route(dag: CircuitDag, layout: Layout, arch: Architecture, tables: DistanceTables,
          params: RouterParams | None = None) -> RouteResult:
    """Route ``dag`` from ``layout``. Raises :class:`RoutingAborted` on budget exhaustion."""
    params = params or RouterParams()
    t0 = time.perf_counter()
    state = RouterState(dag, layout, arch, tables, params)
    try:
        state.run()
        complete = True
    except _Abort:
        complete = False
    ms = (time.perf_counter() - t0) * 1000
    prog = state.program(complete)
    result = RouteResult(prog, state.layout, compute_metrics(prog, params, runtime_ms=ms))
    if not complete:
        raise RoutingAborted(result)
    return result


def drain_front(state: RouterState) -> list[int]:
    return state.drain_front()


def partition_front(state: RouterState) -> tuple[list[int], list[int]]:
    return state.partition_front()
