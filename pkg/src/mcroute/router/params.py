from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class RouterParams:
    """Cost model and heuristic knobs. Defaults are the standard settings."""

    c_swap: float = 3
    c_tele: float = 10
    tau: int = 3
    c_pen: float = 15
    w_link: int = 10
    w_h: float = 5
    w_e: float = 0.25
    L: int = 20
    gamma: float = 0.9
    L_deadlock: int = 50
    N_backup_max: int = 50
    theta_d: int = 3
    theta_f: int = 2
    b_r: float = 1
    relief_victims: int = 3
    disable_lookahead: bool = False
    disable_capacity: bool = False
    disable_hop: bool = False
    disable_relief: bool = False
    topo_extended_set: bool = False

    def __post_init__(self) -> None:
        for name in ("c_swap", "c_tele", "tau", "c_pen", "w_h", "w_e", "L", "b_r",
                     "theta_d", "theta_f", "relief_victims"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.w_link <= 0:
            raise ValueError("w_link must be > 0")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.L_deadlock < 1 or self.N_backup_max < 0:
            raise ValueError("L_deadlock must be >= 1 and N_backup_max >= 0")

    @property
    def eff_w_e(self) -> float:
        return 0.0 if self.disable_lookahead else self.w_e

    @property
    def eff_c_pen(self) -> float:
        return 0.0 if self.disable_capacity else self.c_pen

    @property
    def eff_w_h(self) -> float:
        return 0.0 if self.disable_hop else self.w_h

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> RouterParams:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown router params: {sorted(unknown)}")
        return cls(**data)

    def with_(self, **changes) -> RouterParams:
        return replace(self, **changes)
