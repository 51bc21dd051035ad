"""Gate dependency DAG and its per-run execution state."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence


class GateKind(enum.Enum):
    ONE_Q = 1
    TWO_Q = 2


@dataclass(frozen=True)
class Gate:
    id: int
    label: str
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.qubits) not in (1, 2):
            raise ValueError(f"gate {self.label} must act on 1 or 2 qubits")
        if len(self.qubits) == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"two-qubit gate {self.label} needs distinct qubits")

    @property
    def kind(self) -> GateKind:
        return GateKind.TWO_Q if len(self.qubits) == 2 else GateKind.ONE_Q

    @property
    def is_2q(self) -> bool:
        return len(self.qubits) == 2


def make_gates(spec: Iterable[tuple[str, Sequence[int]]]) -> list[Gate]:
    """``[("h", [0]), ("cx", [0, 1])]`` -> numbered gates."""
    return [Gate(i, label, tuple(qs)) for i, (label, qs) in enumerate(spec)]


class CircuitDag:
    """Immutable dependency structure over a gate list.

    Each wire links a gate to the next gate on the same qubit, so a gate has
    one incoming edge per wire that has an earlier gate. ``succ``/``pred``
    hold one entry per wire edge (a repeated id means two shared wires).
    The ``*2`` variants skip one-qubit gates and are what the lookahead
    machinery walks.
    """

    def __init__(self, gates: Sequence[Gate], n_logical: int):
        self.gates = list(gates)
        self.n_logical = n_logical
        N = len(self.gates)
        for i, g in enumerate(self.gates):
            if g.id != i:
                raise ValueError(f"gate ids must be 0..N-1 in order; got {g.id} at {i}")
            for q in g.qubits:
                if not 0 <= q < n_logical:
                    raise ValueError(f"gate {i} ({g.label}) uses qubit {q} outside 0..{n_logical - 1}")

        self.succ: list[list[int]] = [[] for _ in range(N)]
        self.pred: list[list[int]] = [[] for _ in range(N)]
        self.succ2: list[list[int]] = [[] for _ in range(N)]
        self.pred2: list[list[int]] = [[] for _ in range(N)]
        self.wire: list[list[int]] = [[] for _ in range(n_logical)]
        self.wire2: list[list[int]] = [[] for _ in range(n_logical)]
        # position of each 2Q gate inside wire2 of each operand
        self.wire2_pos: list[tuple[int, ...]] = [()] * N
        last = [-1] * n_logical
        last2 = [-1] * n_logical
        for g in self.gates:
            for q in g.qubits:
                if last[q] >= 0:
                    self.succ[last[q]].append(g.id)
                    self.pred[g.id].append(last[q])
                last[q] = g.id
                self.wire[q].append(g.id)
            if g.is_2q:
                pos = []
                for q in g.qubits:
                    if last2[q] >= 0:
                        self.succ2[last2[q]].append(g.id)
                        self.pred2[g.id].append(last2[q])
                    last2[q] = g.id
                    pos.append(len(self.wire2[q]))
                    self.wire2[q].append(g.id)
                self.wire2_pos[g.id] = tuple(pos)

        self.level = [0] * N
        for g in self.gates:
            self.level[g.id] = 1 + max((self.level[p] for p in self.pred[g.id]), default=0)

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def depth(self) -> int:
        return max(self.level, default=0)

    def initial_front(self) -> list[int]:
        return [g.id for g in self.gates if not self.pred[g.id]]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(len(self.gates)) for v in self.succ[u]]

    def n_two_qubit(self) -> int:
        return sum(g.is_2q for g in self.gates)

    def fresh_state(self) -> DagState:
        return DagState(self)


class DagState:
    """Mutable execution state of one routing run."""

    def __init__(self, dag: CircuitDag):
        self.dag = dag
        self.remaining_in_degree = [len(p) for p in dag.pred]
        self.executed = [False] * len(dag)
        self.front = set(dag.initial_front())
        self.n_remaining = len(dag)
        self.wire_next = [0] * dag.n_logical

    def execute(self, gid: int) -> list[int]:
        """Mark ``gid`` done; returns gates that joined the front."""
        if gid not in self.front:
            raise ValueError(f"gate {gid} is not in the front layer")
        self.front.discard(gid)
        self.executed[gid] = True
        self.n_remaining -= 1
        for q in self.dag.gates[gid].qubits:
            self.wire_next[q] += 1
        joined = []
        for s in self.dag.succ[gid]:
            self.remaining_in_degree[s] -= 1
            if self.remaining_in_degree[s] == 0:
                self.front.add(s)
                joined.append(s)
        return joined

    def next_gate(self, q: int) -> int | None:
        w = self.dag.wire[q]
        i = self.wire_next[q]
        return w[i] if i < len(w) else None

    def copy(self) -> DagState:
        new = DagState.__new__(DagState)
        new.dag = self.dag
        new.remaining_in_degree = list(self.remaining_in_degree)
        new.executed = list(self.executed)
        new.front = set(self.front)
        new.n_remaining = self.n_remaining
        new.wire_next = list(self.wire_next)
        return new


def build_dag(gates: Sequence[Gate], n_logical: int) -> CircuitDag:
    return CircuitDag(gates, n_logical)


def reverse_dag(dag: CircuitDag) -> CircuitDag:
    """Reversed circuit; gate ``i`` becomes gate ``N-1-i``."""
    N = len(dag.gates)
    gates = [Gate(N - 1 - g.id, g.label, g.qubits) for g in reversed(dag.gates)]
    return CircuitDag(gates, dag.n_logical)
