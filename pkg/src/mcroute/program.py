"""Routed op stream and its text dump."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True, slots=True)
class Gate1Op:
    gate: int
    label: str
    slot: int

    def __str__(self) -> str:
        return f"G1 {self.label} s{self.slot}"


@dataclass(frozen=True, slots=True)
class Gate2Op:
    gate: int
    label: str
    slot_a: int
    slot_b: int

    def __str__(self) -> str:
        return f"G2 {self.label} s{self.slot_a} s{self.slot_b}"


@dataclass(frozen=True, slots=True)
class SwapOp:
    u: int
    v: int

    def __str__(self) -> str:
        return f"SW s{self.u} s{self.v}"


@dataclass(frozen=True, slots=True)
class TeleportOp:
    qubit: int
    link: int
    src: int
    dst: int
    relief: bool = False
    forced: bool = False

    def __str__(self) -> str:
        return f"TP q{self.qubit} s{self.src}->s{self.dst} link{self.link}"


Op = Union[Gate1Op, Gate2Op, SwapOp, TeleportOp]


@dataclass
class RoutedProgram:
    ops: list[Op] = field(default_factory=list)
    complete: bool = True
    rollbacks: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def epr(self) -> int:
        return sum(isinstance(op, TeleportOp) for op in self.ops)

    @property
    def swaps(self) -> int:
        return sum(isinstance(op, SwapOp) for op in self.ops)

    @property
    def relief_moves(self) -> int:
        return sum(isinstance(op, TeleportOp) and op.relief for op in self.ops)

    @property
    def gate_ops(self) -> list[Op]:
        return [op for op in self.ops if isinstance(op, (Gate1Op, Gate2Op))]

    def dumps(self) -> str:
        return "".join(f"{op}\n" for op in self.ops)


_LINE_RE = {
    "G1": re.compile(r"^G1 (\S+) s(\d+)$"),
    "G2": re.compile(r"^G2 (\S+) s(\d+) s(\d+)$"),
    "SW": re.compile(r"^SW s(\d+) s(\d+)$"),
    "TP": re.compile(r"^TP q(\d+) s(\d+)->s(\d+) link(\d+)$"),
}


def parse_program(text: str, gate_ids: list[int] | None = None) -> RoutedProgram:
    """Inverse of :meth:`RoutedProgram.dumps`.

    The dump does not carry gate ids; pass ``gate_ids`` (in emission order)
    to restore them, otherwise gate ops are numbered by appearance.
    """
    ops: list[Op] = []
    k = 0
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        tag = line[:2]
        m = _LINE_RE.get(tag, re.compile("$^")).match(line)
        if not m:
            raise ValueError(f"line {no}: cannot parse {line!r}")
        if tag in ("G1", "G2"):
            gid = gate_ids[k] if gate_ids is not None else k
            k += 1
            if tag == "G1":
                ops.append(Gate1Op(gid, m.group(1), int(m.group(2))))
            else:
                ops.append(Gate2Op(gid, m.group(1), int(m.group(2)), int(m.group(3))))
        elif tag == "SW":
            ops.append(SwapOp(int(m.group(1)), int(m.group(2))))
        else:
            ops.append(TeleportOp(int(m.group(1)), int(m.group(4)), int(m.group(2)), int(m.group(3))))
    return RoutedProgram(ops)
