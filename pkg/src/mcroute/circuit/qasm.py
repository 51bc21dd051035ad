"""Minimal OpenQASM 2 reader/writer and the plain-text gate dump.

Accepted subset: a single ``qreg``; the gates in ``ONE_Q``/``TWO_Q``;
``measure``, ``barrier``, ``creg``, ``reset`` and the usual header lines are
ignored. ``swap`` is lowered to three ``cx``. Rotation arguments are kept
verbatim inside the label.
"""

from __future__ import annotations

import re
from typing import Sequence

from .dag import Gate

ONE_Q = {"h", "x", "y", "z", "s", "sdg", "t", "tdg", "sx", "sxdg", "id",
         "rx", "ry", "rz", "p", "u", "u1", "u2", "u3"}
TWO_Q = {"cx", "cz", "swap"}
_IGNORED = {"openqasm", "include", "creg", "measure", "barrier", "reset"}

_STMT_RE = re.compile(r"^([a-z][a-z0-9_]*)\s*(\([^)]*\))?\s*(.*)$", re.IGNORECASE)
_ARG_RE = re.compile(r"^([a-zA-Z_][a-zA-Z0-9_]*)\s*\[\s*(\d+)\s*\]$")


class QasmError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def _strip_comments(text: str) -> list[tuple[int, str]]:
    """Split into ``(line_no, statement)`` pairs."""
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip()
        for stmt in line.split(";"):
            stmt = stmt.strip()
            if stmt:
                out.append((no, stmt))
    return out


def parse_qasm(text: str) -> tuple[list[Gate], int]:
    gates: list[tuple[str, tuple[int, ...]]] = []
    qreg: tuple[str, int] | None = None
    for no, stmt in _strip_comments(text):
        m = _STMT_RE.match(stmt)
        if not m:
            raise QasmError(no, f"cannot parse statement {stmt!r}")
        name, params, rest = m.group(1).lower(), m.group(2) or "", m.group(3).strip()
        if name == "qreg":
            am = _ARG_RE.match(rest)
            if not am:
                raise QasmError(no, f"bad qreg declaration {stmt!r}")
            if qreg is not None:
                raise QasmError(no, "multiple qreg declarations are not supported")
            qreg = (am.group(1), int(am.group(2)))
            continue
        if name in _IGNORED:
            continue
        if name not in ONE_Q and name not in TWO_Q:
            raise QasmError(no, f"unsupported statement {name!r}")
        if qreg is None:
            raise QasmError(no, "gate before qreg declaration")
        qubits = []
        for arg in (a.strip() for a in rest.split(",")):
            am = _ARG_RE.match(arg)
            if not am:
                raise QasmError(no, f"bad operand {arg!r} (whole-register operands are unsupported)")
            if am.group(1) != qreg[0]:
                raise QasmError(no, f"unknown register {am.group(1)!r}")
            idx = int(am.group(2))
            if idx >= qreg[1]:
                raise QasmError(no, f"qubit index {idx} out of range for {qreg[0]}[{qreg[1]}]")
            qubits.append(idx)
        want = 2 if name in TWO_Q else 1
        if len(qubits) != want:
            raise QasmError(no, f"{name} takes {want} operand(s), got {len(qubits)}")
        if want == 2 and qubits[0] == qubits[1]:
            raise QasmError(no, f"{name} operands must differ")
        if name == "swap":
            a, b = qubits
            gates += [("cx", (a, b)), ("cx", (b, a)), ("cx", (a, b))]
        else:
            label = name + params.replace(" ", "")
            gates.append((label, tuple(qubits)))
    if qreg is None:
        raise QasmError(0, "no qreg declaration")
    return [Gate(i, lab, qs) for i, (lab, qs) in enumerate(gates)], qreg[1]


def to_qasm(gates: Sequence[Gate], n_logical: int) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{n_logical}];"]
    for g in gates:
        lines.append(f"{g.label} " + ",".join(f"q[{q}]" for q in g.qubits) + ";")
    return "\n".join(lines) + "\n"


def dump_gates(gates: Sequence[Gate]) -> str:
    """One ``GATE <label> q<i> [q<j>]`` line per gate."""
    return "".join(
        "GATE " + g.label + "".join(f" q{q}" for q in g.qubits) + "\n" for g in gates
    )


def load_gates(text: str) -> list[Gate]:
    gates = []
    for no, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] != "GATE" or len(parts) not in (3, 4):
            raise QasmError(no, f"bad gate dump line {line!r}")
        gates.append(Gate(len(gates), parts[1], tuple(int(p[1:]) for p in parts[2:])))
    return gates
