"""Lookahead windows over the unexecuted part of the circuit."""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Collection, Sequence

from ..circuit.dag import CircuitDag, DagState


@dataclass(frozen=True, slots=True)
class ExtendedSetEntry:
    gate: int
    dep: int
    weight: float


def _entries(gates: Sequence[int], deps: Sequence[int], gamma: float) -> list[ExtendedSetEntry]:
    return [ExtendedSetEntry(g, d, gamma ** d) for g, d in zip(gates, deps)]


def bfs_layer_set(dag: CircuitDag, ds: DagState, L: int, gamma: float) -> list[ExtendedSetEntry]:
    """Peel the two-qubit projection layer by layer beyond the front.

    Layer k gets dep k. Inside a layer, gates that share a qubit with the
    front come first, then by id. Whole layers are taken while they fit in
    ``L``; only an oversized first layer is cut inside the layer.
    """
    if L <= 0:
        return []
    gates = dag.gates
    layer = sorted(g for g in ds.front if gates[g].is_2q)
    front_qubits = {q for g in layer for q in gates[g].qubits}
    executed = ds.executed
    rem: dict[int, int] = {}
    out: list[ExtendedSetEntry] = []
    k = 0
    while layer:
        nxt = []
        for g in layer:
            for s in dag.succ2[g]:
                left = rem.get(s)
                if left is None:
                    left = sum(not executed[p] for p in dag.pred2[s])
                left -= 1
                rem[s] = left
                if left == 0:
                    nxt.append(s)
        k += 1
        if not nxt:
            break
        nxt.sort(key=lambda g: (front_qubits.isdisjoint(gates[g].qubits), g))
        if len(out) + len(nxt) > L:
            if k == 1:
                out += [ExtendedSetEntry(g, 1, gamma) for g in nxt[:L]]
            break
        out += [ExtendedSetEntry(g, k, gamma ** k) for g in nxt]
        layer = nxt
    return out


def topo_order_set(dag: CircuitDag, ds: DagState, L: int, gamma: float,
                   two_q_ids: Sequence[int]) -> list[ExtendedSetEntry]:
    """First ``L`` pending two-qubit gates in program order beyond the front.

    dep is the longest two-qubit path back to the front.
    """
    if L <= 0 or not ds.front:
        return []
    front = ds.front
    executed = ds.executed
    dep: dict[int, int] = {g: 0 for g in front}
    picked: list[int] = []
    start = bisect_left(two_q_ids, min(front))
    for g in two_q_ids[start:]:
        if len(picked) >= L:
            break
        if executed[g] or g in front:
            continue
        d = 1 + max((dep.get(p, 0) for p in dag.pred2[g] if not executed[p]), default=0)
        dep[g] = d
        picked.append(g)
    return _entries(picked, [dep[g] for g in picked], gamma)


def tainted_core_set(dag: CircuitDag, ds: DagState, fc: Sequence[int], L: int, gamma: float,
                     two_q_ids: Sequence[int], crosses: Callable[[int, int], bool]
                     ) -> list[ExtendedSetEntry]:
    """Intra-core lookahead for one core, with taint propagation.

    Starting from the wires of the core's front gates, pending two-qubit
    gates are scanned in program order. A gate whose operands sit in
    different cores taints both wires, and so does any gate that touches a
    tainted wire; such gates are left out. ``crosses(a, b)`` reports whether
    two logical qubits currently sit in different cores.
    """
    if L <= 0 or not fc:
        return []
    gates = dag.gates
    front = ds.front
    executed = ds.executed
    depw: dict[int, int] = {}
    for g in fc:
        for q in gates[g].qubits:
            depw[q] = 0
    tainted: set[int] = set()
    live = len(depw)
    picked: list[int] = []
    deps: list[int] = []
    start = bisect_left(two_q_ids, min(front))
    for g in two_q_ids[start:]:
        if executed[g] or g in front and not crosses(*gates[g].qubits):
            continue
        a, b = gates[g].qubits
        if crosses(a, b) or a in tainted or b in tainted:
            for q in (a, b):
                if q not in tainted:
                    tainted.add(q)
                    if q in depw:
                        live -= 1
            if live == 0:
                break
            continue
        if a not in depw and b not in depw:
            continue
        d = 1 + max(depw.get(a, 0), depw.get(b, 0))
        for q in (a, b):
            if q not in depw:
                live += 1
            depw[q] = d
        picked.append(g)
        deps.append(d)
        if len(picked) >= L:
            break
    return _entries(picked, deps, gamma)


def front_qubits(dag: CircuitDag, front: Collection[int]) -> set[int]:
    return {q for g in front for q in dag.gates[g].qubits}
