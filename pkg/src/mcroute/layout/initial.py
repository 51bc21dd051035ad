"""Initial placement: seeded random start refined by forward/backward routing."""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from ..arch import Architecture, DistanceTables
from ..circuit.dag import CircuitDag, reverse_dag
from .flat import FlatGraph, flat_pass
from .mapping import Layout


def corner_removed_slots(arch: Architecture) -> set[int]:
    """Degree-2 corners of each core that do not terminate a link."""
    out = set()
    for core in arch.cores:
        if len(core.slots) <= 4:
            continue
        for s in core.slots:
            if len(arch.adj[s]) == 2 and not arch.is_port[s]:
                out.add(s)
    return out


def usable_slots(arch: Architecture, corner_removal: bool = True) -> list[int]:
    removed = corner_removed_slots(arch) if corner_removal else set()
    return [s for s in range(arch.n_slots) if s not in removed]


def random_layout(arch: Architecture, n_logical: int, seed: int,
                  corner_removal: bool = True) -> Layout:
    slots = usable_slots(arch, corner_removal)
    if n_logical > len(slots):
        raise ValueError(f"circuit needs {n_logical} qubits but only {len(slots)} slots are usable")
    random.Random(seed).shuffle(slots)
    return Layout(arch, slots[:n_logical])


def affinity_layout(dag: CircuitDag, arch: Architecture, tables: DistanceTables,
                    corner_removal: bool = True) -> Layout:
    """Fill cores one after another with qubits in order of first interaction.

    Cores are visited along the core graph (lowest unvisited neighbour
    first); inside a core slots follow a nearest-neighbour walk so that
    consecutive qubits land close together.
    """
    n = dag.n_logical
    usable = set(usable_slots(arch, corner_removal))
    if n > len(usable):
        raise ValueError(f"circuit needs {n} qubits but only {len(usable)} slots are usable")
    order: list[int] = []
    seen: set[int] = set()
    for g in dag.gates:
        if g.is_2q:
            for q in g.qubits:
                if q not in seen:
                    seen.add(q)
                    order.append(q)
    order += [q for q in range(n) if q not in seen]

    slots: list[int] = []
    visited: set[int] = set()
    core, entry = 0, None
    while len(slots) < n:
        visited.add(core)
        free = [s for s in arch.cores[core].slots if s in usable]
        cur = min(free, key=lambda s: (tables.intra(entry, s) if entry is not None else 0, s))
        while free:
            slots.append(cur)
            free.remove(cur)
            if free:
                cur = min(free, key=lambda s: (tables.intra(slots[-1], s), s))
        left = [c for c in range(arch.n_cores) if c not in visited]
        if not left:
            break
        nxt = min(left, key=lambda c: (tables.core_hops[core][c], c))
        links = arch.links_between(core, nxt)
        entry = links[0].port_in(nxt) if links else None
        core = nxt
    to_phys = [0] * n
    for q, s in zip(order, slots):
        to_phys[q] = s
    return Layout(arch, to_phys)


def trial_seeds(seed: int, trials: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(trials)]


@dataclass
class LayoutSearch:
    """Outcome of the layout search: the chosen start and its forward routing."""

    layout: Layout
    result: object | None  # RouteResult of the winning forward pass, None if every pass aborted
    trial: int
    epr_per_trial: list[float]


def _forward(dag, start, arch, tables, params):
    from ..router import RoutingAborted, route
    try:
        return route(dag, start, arch, tables, params)
    except RoutingAborted:
        return None


def layout_trial(dag: CircuitDag, arch: Architecture, tables: DistanceTables, params,
                 seed: int, corner_removal: bool = True, graph: FlatGraph | None = None):
    """Score a random start, refine it forward and backward, score again.

    Returns ``(start_layout, forward_result)`` for the better of the two
    scored forward passes; the first wins ties. The refinement runs SWAP-only
    passes over the usable slots, so qubits never land on removed corners.
    """
    if graph is None:
        graph = FlatGraph.build(arch, usable_slots(arch, corner_removal))
    start = random_layout(arch, dag.n_logical, seed, corner_removal)
    first = _forward(dag, start, arch, tables, params)
    fwd = flat_pass(dag, graph, start.to_phys)
    refined = Layout(arch, flat_pass(reverse_dag(dag), graph, fwd))
    second = _forward(dag, refined, arch, tables, params)
    if second is not None and (first is None or second.metrics.epr < first.metrics.epr):
        return refined, second
    return start, first


def search_layout(dag: CircuitDag, arch: Architecture, tables: DistanceTables, params=None,
                  seed: int = 0, trials: int = 3, corner_removal: bool = True) -> LayoutSearch:
    from ..router import RouterParams
    params = params or RouterParams()
    usable = len(usable_slots(arch, corner_removal))
    if dag.n_logical > usable:
        raise ValueError(f"circuit needs {dag.n_logical} qubits but only {usable} slots are usable")
    graph = FlatGraph.build(arch, usable_slots(arch, corner_removal))
    dense = affinity_layout(dag, arch, tables, corner_removal)
    dense_res = _forward(dag, dense, arch, tables, params)
    best = None
    eprs = []
    for i, s in enumerate(trial_seeds(seed, max(1, trials))):
        start, res = layout_trial(dag, arch, tables, params, s, corner_removal, graph)
        if dense_res is not None and (res is None or dense_res.metrics.epr < res.metrics.epr):
            start, res = dense, dense_res
        epr = float("inf") if res is None else res.metrics.epr
        eprs.append(epr)
        if best is None or epr < best[0]:
            best = (epr, i, start, res)
    return LayoutSearch(best[2], best[3], best[1], eprs)


def initial_layout(dag: CircuitDag, arch: Architecture, tables: DistanceTables, params=None,
                   seed: int = 0, trials: int = 3, corner_removal: bool = True) -> Layout:
    return search_layout(dag, arch, tables, params, seed, trials, corner_removal).layout
