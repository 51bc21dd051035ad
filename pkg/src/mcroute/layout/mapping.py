from __future__ import annotations

import json
from typing import Sequence

from ..arch import Architecture

EMPTY = -1


class Layout:
    """Logical-to-physical assignment with per-core free-slot counts."""

    __slots__ = ("arch", "to_phys", "to_logical", "free_count")

    def __init__(self, arch: Architecture, to_phys: Sequence[int]):
        self.arch = arch
        self.to_phys = list(to_phys)
        self.to_logical = [EMPTY] * arch.n_slots
        self.free_count = [arch.core_size(c) for c in range(arch.n_cores)]
        for q, p in enumerate(self.to_phys):
            if not 0 <= p < arch.n_slots:
                raise ValueError(f"logical {q} mapped to unknown slot {p}")
            if self.to_logical[p] != EMPTY:
                raise ValueError(f"slot {p} assigned twice")
            self.to_logical[p] = q
            self.free_count[arch.core_of[p]] -= 1

    @property
    def n_logical(self) -> int:
        return len(self.to_phys)

    def core_of_qubit(self, q: int) -> int:
        return self.arch.core_of[self.to_phys[q]]

    def apply_swap(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError("swap needs two distinct slots")
        a, b = self.to_logical[u], self.to_logical[v]
        self.to_logical[u], self.to_logical[v] = b, a
        if a != EMPTY:
            self.to_phys[a] = v
        if b != EMPTY:
            self.to_phys[b] = u
        cu, cv = self.arch.core_of[u], self.arch.core_of[v]
        if cu != cv and (a == EMPTY) != (b == EMPTY):
            delta = 1 if a != EMPTY else -1
            self.free_count[cu] += delta
            self.free_count[cv] -= delta

    def apply_teleport(self, q: int, dst: int) -> None:
        src = self.to_phys[q]
        if self.to_logical[dst] != EMPTY:
            raise ValueError(f"teleport destination slot {dst} is occupied")
        cs, cd = self.arch.core_of[src], self.arch.core_of[dst]
        if cs == cd:
            raise ValueError("teleport must cross cores")
        self.to_logical[src] = EMPTY
        self.to_logical[dst] = q
        self.to_phys[q] = dst
        self.free_count[cs] += 1
        self.free_count[cd] -= 1

    def move(self, q: int, dst: int) -> None:
        """Relocate without the cross-core check (used to undo teleports)."""
        src = self.to_phys[q]
        self.to_logical[src] = EMPTY
        self.to_logical[dst] = q
        self.to_phys[q] = dst
        self.free_count[self.arch.core_of[src]] += 1
        self.free_count[self.arch.core_of[dst]] -= 1

    def copy(self) -> Layout:
        new = Layout.__new__(Layout)
        new.arch = self.arch
        new.to_phys = list(self.to_phys)
        new.to_logical = list(self.to_logical)
        new.free_count = list(self.free_count)
        return new

    def restore(self, other: Layout) -> None:
        self.to_phys[:] = other.to_phys
        self.to_logical[:] = other.to_logical
        self.free_count[:] = other.free_count

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Layout) and self.to_phys == other.to_phys

    def __repr__(self) -> str:
        return f"Layout({self.to_phys})"

    def to_records(self) -> list[dict]:
        return [{"logical": q, "core": self.arch.core_of[p], "slot": p}
                for q, p in enumerate(self.to_phys)]

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_records(cls, arch: Architecture, records: list[dict]) -> Layout:
        recs = sorted(records, key=lambda r: r["logical"])
        if [r["logical"] for r in recs] != list(range(len(recs))):
            raise ValueError("layout must list logical qubits 0..n-1 exactly once")
        for r in recs:
            if "core" in r and arch.core_of[r["slot"]] != r["core"]:
                raise ValueError(f"slot {r['slot']} is not in core {r['core']}")
        return cls(arch, [r["slot"] for r in recs])
