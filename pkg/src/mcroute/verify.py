"""Replay validator and cost metrics for routed programs.

The validator works from the raw gate list, not from the router's DAG, so
it is an independent check of legality and wire-order equivalence.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Sequence

from .arch import Architecture
from .program import Gate1Op, Gate2Op, RoutedProgram, SwapOp, TeleportOp

if TYPE_CHECKING:
    from .circuit.dag import Gate
    from .layout.mapping import Layout


@dataclass(frozen=True)
class Violation:
    op_index: int
    kind: str
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> list[str]:
        return [v.kind for v in self.violations]

    def to_json(self) -> str:
        return json.dumps([asdict(v) for v in self.violations])

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"op {v.op_index}: {v.kind}: {v.detail}" for v in self.violations)


@dataclass
class Metrics:
    epr: int
    swaps: int
    cost: float
    rollbacks: int = 0
    relief_moves: int = 0
    runtime_ms: float = 0.0

    def cost_at(self, c_tele: float, c_swap: float = 3) -> float:
        return c_swap * self.swaps + c_tele * self.epr

    def to_dict(self) -> dict:
        return asdict(self)


def compute_metrics(program: RoutedProgram, params=None, runtime_ms: float = 0.0) -> Metrics:
    """Counts and cost. ``params`` needs ``c_swap`` and ``c_tele`` (defaults 3 and 10)."""
    c_swap = getattr(params, "c_swap", 3)
    c_tele = getattr(params, "c_tele", 10)
    epr, swaps = program.epr, program.swaps
    return Metrics(epr, swaps, c_swap * swaps + c_tele * epr, program.rollbacks,
                   program.relief_moves, runtime_ms)


def validate(program: RoutedProgram, arch: Architecture, circuit, initial_layout: Layout,
             final_layout: Layout | None = None, n_logical: int | None = None,
             require_complete: bool = True) -> ValidationReport:
    """Replay ``program`` from ``initial_layout`` and report every violation.

    ``circuit`` is a gate list or anything with a ``gates`` attribute.
    """
    gates: Sequence[Gate] = getattr(circuit, "gates", circuit)
    n = n_logical if n_logical is not None else getattr(circuit, "n_logical", initial_layout.n_logical)
    to_phys = list(initial_layout.to_phys)
    to_logical = [-1] * arch.n_slots
    for q, p in enumerate(to_phys):
        to_logical[p] = q

    wires: list[list[int]] = [[] for _ in range(max(n, len(to_phys)))]
    for g in gates:
        for q in g.qubits:
            wires[q].append(g.id)
    wire_pos = [0] * len(wires)
    by_id = {g.id: g for g in gates}
    done: set[int] = set()
    out: list[Violation] = []

    def bad(i: int, kind: str, detail: str) -> None:
        out.append(Violation(i, kind, detail))

    def edge(u: int, v: int) -> bool:
        return 0 <= u < arch.n_slots and 0 <= v < arch.n_slots and v in arch.adj[u]

    def run_gate(i: int, gid: int, label: str, slots: tuple[int, ...]) -> None:
        g = by_id.get(gid)
        if g is None:
            bad(i, "unknown_gate", f"gate {gid} is not in the circuit")
            return
        if gid in done:
            bad(i, "duplicate_gate", f"gate {gid} executed twice")
            return
        if g.label != label:
            bad(i, "label_mismatch", f"gate {gid} is {g.label}, op says {label}")
        if len(slots) != len(g.qubits):
            bad(i, "arity", f"gate {gid} acts on {len(g.qubits)} qubits, op gives {len(slots)} slots")
            return
        held = tuple(to_logical[s] if 0 <= s < arch.n_slots else -1 for s in slots)
        if held != g.qubits:
            bad(i, "operand_mismatch", f"gate {gid} needs {g.qubits}, slots {slots} hold {held}")
        if len(slots) == 2 and not edge(*slots):
            bad(i, "not_adjacent", f"slots {slots[0]} and {slots[1]} are not coupled")
        for q in g.qubits:
            w = wires[q]
            if wire_pos[q] >= len(w) or w[wire_pos[q]] != gid:
                expect = w[wire_pos[q]] if wire_pos[q] < len(w) else None
                bad(i, "wire_order", f"qubit {q} runs gate {gid} but gate {expect} comes first")
            else:
                wire_pos[q] += 1
        done.add(gid)

    def move(q: int, dst: int) -> None:
        to_logical[to_phys[q]] = -1
        to_logical[dst] = q
        to_phys[q] = dst

    for i, op in enumerate(program.ops):
        if isinstance(op, Gate1Op):
            run_gate(i, op.gate, op.label, (op.slot,))
        elif isinstance(op, Gate2Op):
            run_gate(i, op.gate, op.label, (op.slot_a, op.slot_b))
        elif isinstance(op, SwapOp):
            if not edge(op.u, op.v):
                bad(i, "bad_swap", f"slots {op.u} and {op.v} share no intra-core edge")
                continue
            a, b = to_logical[op.u], to_logical[op.v]
            to_logical[op.u], to_logical[op.v] = b, a
            if a >= 0:
                to_phys[a] = op.v
            if b >= 0:
                to_phys[b] = op.u
        elif isinstance(op, TeleportOp):
            if not 0 <= op.link < len(arch.links):
                bad(i, "bad_link", f"link {op.link} does not exist")
                continue
            lk = arch.links[op.link]
            if not 0 <= op.qubit < len(to_phys) or to_phys[op.qubit] != op.src:
                bad(i, "operand_mismatch", f"qubit {op.qubit} is not at slot {op.src}")
                continue
            if op.dst not in (lk.port_a, lk.port_b):
                bad(i, "bad_link", f"slot {op.dst} is not an endpoint of link {op.link}")
                continue
            pi_s = lk.other_port(op.dst)
            if arch.core_of[op.src] != arch.core_of[pi_s]:
                bad(i, "bad_link", f"slot {op.src} is not in the core of port {pi_s}")
                continue
            if to_logical[op.dst] != -1:
                bad(i, "occupied_destination", f"port {op.dst} holds qubit {to_logical[op.dst]}")
                continue
            if to_logical[pi_s] != -1:
                bad(i, "port_busy", f"source port {pi_s} holds qubit {to_logical[pi_s]}")
            if not edge(op.src, pi_s):
                bad(i, "not_staged", f"slot {op.src} is not next to port {pi_s}")
            move(op.qubit, op.dst)
        else:
            bad(i, "unknown_op", repr(op))

    if require_complete:
        missing = sorted(set(by_id) - done)
        if missing:
            bad(len(program.ops), "missing_gate",
                f"{len(missing)} gates never executed, first {missing[:5]}")
    if final_layout is not None and list(final_layout.to_phys) != to_phys:
        bad(len(program.ops), "final_layout", "replayed layout differs from the reported one")
    return ValidationReport(out)
