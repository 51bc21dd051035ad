"""Batch harness: route circuit suites, run ablations and cost sweeps."""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .arch import Architecture, DistanceTables, parse_arch_spec
from .circuit import build_dag, circuit_from_spec, parse_qasm
from .layout import Layout, search_layout
from .router import RouterParams, RoutingAborted, route
from .verify import validate

COST_SWEEP = (10, 20, 50, 100)

ABLATIONS: dict[str, dict] = {
    "full": {},
    "no-lookahead": {"w_e": 0},
    "no-cap-penalty": {"c_pen": 0},
    "no-hop": {"w_h": 0},
    "no-relief": {"disable_relief": True},
    "topo-extset": {"topo_extended_set": True},
}


@dataclass
class RunRecord:
    circuit: str
    arch: str
    seed: int
    params: dict
    status: str
    metrics: dict
    timing: dict = field(default_factory=dict)
    corner_removal: bool = True
    initial_layout: list[int] = field(default_factory=list)
    valid: bool | None = None
    config: str = "full"
    stats: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    @property
    def epr(self) -> int:
        return self.metrics["epr"]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> RunRecord:
        return cls(**data)


@dataclass
class Circuit:
    name: str
    gates: list
    n: int

    @classmethod
    def load(cls, ref: str) -> Circuit:
        """A generator spec such as ``qft:64`` or ``qasm:<path>``."""
        if ref.startswith("qasm:"):
            gates, n = parse_qasm(Path(ref[5:]).read_text())
            return cls(ref, gates, n)
        name, gates, n = circuit_from_spec(ref)
        return cls(name, gates, n)


def make_arch(spec: str, params: RouterParams) -> tuple[Architecture, DistanceTables]:
    arch = parse_arch_spec(spec, w_link=params.w_link)
    return arch, DistanceTables(arch)


def run_one(circ: Circuit, arch_spec: str, arch: Architecture, tables: DistanceTables,
            seed: int, params: RouterParams, corner_removal: bool = True,
            layout: Layout | None = None, check: bool = True, config: str = "full"):
    """Route one (circuit, seed). Returns ``(record, route_result_or_None)``."""
    dag = build_dag(circ.gates, circ.n)
    t0 = time.perf_counter()
    if layout is None:
        found = search_layout(dag, arch, tables, params, seed=seed, trials=1,
                              corner_removal=corner_removal)
        start, result = found.layout, found.result
    else:
        start, result = layout, None
    aborted = None
    if result is None:
        try:
            result = route(dag, start, arch, tables, params)
        except RoutingAborted as exc:
            aborted = exc.result
    t1 = time.perf_counter()
    final = result if result is not None else aborted
    valid = None
    if check and result is not None:
        valid = validate(result.program, arch, dag, start, result.layout).ok
    rec = RunRecord(
        circuit=circ.name, arch=arch_spec, seed=seed, params=params.to_dict(),
        status="complete" if result is not None else "aborted",
        metrics={k: v for k, v in final.metrics.to_dict().items() if k != "runtime_ms"},
        timing={"route_ms": round(final.metrics.runtime_ms, 3),
                "total_ms": round((t1 - t0) * 1000, 3)},
        corner_removal=corner_removal, initial_layout=list(start.to_phys), valid=valid,
        config=config, stats=dict(final.program.stats),
    )
    return rec, final


def rerun(rec: RunRecord) -> RunRecord:
    """Repeat a recorded run from its params echo."""
    params = RouterParams.from_dict(rec.params)
    arch, tables = make_arch(rec.arch, params)
    return run_one(Circuit.load(rec.circuit), rec.arch, arch, tables, rec.seed, params,
                   rec.corner_removal, config=rec.config)[0]


def run_suite(circuits: Sequence[Circuit], arch_spec: str, seeds: Sequence[int],
              params: RouterParams, corner_removal: bool = True, layout: Layout | None = None,
              jobs: int = 1, config: str = "full", check: bool = True) -> list[RunRecord]:
    arch, tables = make_arch(arch_spec, params)
    tasks = [(ci, s) for ci in range(len(circuits)) for s in seeds]

    def work(task):
        ci, s = task
        return (ci, s), run_one(circuits[ci], arch_spec, arch, tables, s, params,
                                corner_removal, layout, check, config)[0]

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            done = list(pool.map(work, tasks))
    else:
        done = [work(t) for t in tasks]
    done.sort(key=lambda x: x[0])
    return [rec for _, rec in done]


def gmean(values: Sequence[float]) -> float:
    """Geometric mean; zeros count as 1."""
    vals = [max(1.0, float(v)) for v in values]
    return statistics.geometric_mean(vals) if vals else float("nan")


def best_per_circuit(records: Sequence[RunRecord]) -> dict[str, RunRecord | None]:
    """Lowest-EPR complete record per circuit; None when every seed aborted."""
    out: dict[str, RunRecord | None] = {}
    for r in records:
        out.setdefault(r.circuit, None)
        if not r.complete:
            continue
        cur = out[r.circuit]
        if cur is None or (r.epr, r.metrics["swaps"]) < (cur.epr, cur.metrics["swaps"]):
            out[r.circuit] = r
    return out


def summarize(records: Sequence[RunRecord]) -> dict:
    best = best_per_circuit(records)
    converged = {c: r for c, r in best.items() if r is not None}
    return {
        "circuits": {c: (None if r is None else {"seed": r.seed, **r.metrics}) for c, r in best.items()},
        "non_convergent": sorted(c for c, r in best.items() if r is None),
        "gmean_epr": gmean([r.epr for r in converged.values()]),
        "gmean_swaps": gmean([r.metrics["swaps"] for r in converged.values()]),
    }


def record_cost(rec: RunRecord, c_tele: float, c_swap: float | None = None) -> float:
    c_swap = rec.params["c_swap"] if c_swap is None else c_swap
    return c_swap * rec.metrics["swaps"] + c_tele * rec.metrics["epr"]


def cost_sweep(records: Sequence[RunRecord], c_tele_values: Sequence[float] = COST_SWEEP) -> dict:
    """Cost of each circuit's best run at every c_tele, recomputed from counts."""
    best = [r for r in best_per_circuit(records).values() if r is not None]
    rows = {r.circuit: [record_cost(r, ct) for ct in c_tele_values] for r in best}
    gm = [gmean([row[i] for row in rows.values()]) for i in range(len(c_tele_values))]
    return {"c_tele": list(c_tele_values), "rows": rows, "gmean": gm}


def cost_delta(base: Sequence[RunRecord], other: Sequence[RunRecord],
               c_tele_values: Sequence[float] = COST_SWEEP) -> list[float]:
    """Percent change of ``other``'s gmean cost relative to ``base`` per sweep point."""
    a = cost_sweep(base, c_tele_values)["gmean"]
    b = cost_sweep(other, c_tele_values)["gmean"]
    return [100.0 * (y / x - 1.0) for x, y in zip(a, b)]


def ablate(circuits: Sequence[Circuit], arch_spec: str, seeds: Sequence[int],
           params: RouterParams | None = None, configs: Sequence[str] | None = None,
           corner_removal: bool = True, jobs: int = 1) -> dict:
    params = params or RouterParams()
    configs = list(configs or ABLATIONS)
    out = {"rows": [], "records": []}
    base = None
    for name in configs:
        recs = run_suite(circuits, arch_spec, seeds, params.with_(**ABLATIONS[name]),
                         corner_removal, jobs=jobs, config=name)
        gm = summarize(recs)["gmean_epr"]
        if base is None:
            base = gm
        out["rows"].append({"config": name, "gmean_epr": gm, "delta_pct": 100.0 * (gm / base - 1.0)})
        out["records"] += recs
    return out


# -- command line -----------------------------------------------------------

_PARAM_FLAGS = [
    ("--c-tele", "c_tele", float), ("--c-swap", "c_swap", float), ("--tau", "tau", int),
    ("--c-pen", "c_pen", float), ("--w-link", "w_link", int), ("--w-h", "w_h", float),
    ("--w-e", "w_e", float), ("--ext-cap", "L", int), ("--gamma", "gamma", float),
    ("--deadlock", "L_deadlock", int), ("--max-rollbacks", "N_backup_max", int),
    ("--b-r", "b_r", float),
]
_SWITCHES = [
    ("--no-relief", "disable_relief"), ("--no-cap-penalty", "disable_capacity"),
    ("--no-hop", "disable_hop"), ("--no-lookahead", "disable_lookahead"),
    ("--topo-extset", "topo_extended_set"),
]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arch", default="hgrid:2x3:4x4", help="e.g. bgrid:2x2:4x4 or hgrid:2x3:4x4")
    p.add_argument("--circuit", action="append", default=[], help="ghz:N, qft:N, graphstate:N, random:N:CX[:SEED]")
    p.add_argument("--qasm", action="append", default=[], help="OpenQASM 2 file")
    p.add_argument("--seeds", type=int, default=3, help="layout seeds per circuit")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", help="write records and summary here")
    p.add_argument("--no-corner-removal", action="store_true")
    for flag, name, typ in _PARAM_FLAGS:
        p.add_argument(flag, dest=name, type=typ)
    for flag, name in _SWITCHES:
        p.add_argument(flag, dest=name, action="store_true")


def params_from_args(args: argparse.Namespace) -> RouterParams:
    kw = {name: getattr(args, name) for _, name, _ in _PARAM_FLAGS if getattr(args, name) is not None}
    kw.update({name: True for _, name in _SWITCHES if getattr(args, name)})
    return RouterParams(**kw)


def _circuits(args: argparse.Namespace) -> list[Circuit]:
    refs = list(args.circuit) + [f"qasm:{q}" for q in args.qasm]
    if not refs:
        raise SystemExit("error: give at least one --circuit or --qasm")
    return [Circuit.load(r) for r in refs]


def _table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [list(map(str, header))] + [[f"{c:.2f}" if isinstance(c, float) else str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _write_json(path: str | None, payload: dict) -> None:
    if path:
        Path(path).write_text(json.dumps(payload, indent=2))


def cmd_route(args: argparse.Namespace) -> int:
    params = params_from_args(args)
    circuits = _circuits(args)
    seeds = list(range(args.seed, args.seed + args.seeds))
    layout = None
    if args.layout_file:
        arch, _ = make_arch(args.arch, params)
        layout = Layout.from_records(arch, json.loads(Path(args.layout_file).read_text()))
        seeds = seeds[:1]
    recs = run_suite(circuits, args.arch, seeds, params, not args.no_corner_removal, layout, args.jobs)
    rows = [(r.circuit, r.seed, r.status, r.metrics["epr"], r.metrics["swaps"], r.metrics["cost"],
             r.metrics["rollbacks"], r.metrics["relief_moves"], r.timing["route_ms"]) for r in recs]
    print(_table(["circuit", "seed", "status", "EPR", "SWAP", "cost", "rollbk", "relief", "ms"], rows))
    summ = summarize(recs)
    print(f"\ngmean EPR {summ['gmean_epr']:.3f}   gmean SWAP {summ['gmean_swaps']:.3f}   (zero counts as 1)")
    for c in summ["non_convergent"]:
        print(f"{c}: every seed aborted")
    sweep = cost_sweep(recs)
    print("\n" + _table(["c_tele"] + [str(v) for v in sweep["c_tele"]],
                        [["gmean cost"] + sweep["gmean"]]))
    if args.dump_program:
        circ = circuits[0]
        best = best_per_circuit(recs)[circ.name]
        if best is not None:
            arch, tables = make_arch(args.arch, params)
            _, res = run_one(circ, args.arch, arch, tables, best.seed, params,
                             not args.no_corner_removal, layout, check=False)
            Path(args.dump_program).write_text(res.program.dumps())
    _write_json(args.json, {"records": [r.to_dict() for r in recs], "summary": summ, "cost_sweep": sweep})
    invalid = [r for r in recs if r.valid is False]
    return 1 if invalid else 0


def cmd_ablate(args: argparse.Namespace) -> int:
    params = params_from_args(args)
    seeds = list(range(args.seed, args.seed + args.seeds))
    res = ablate(_circuits(args), args.arch, seeds, params, corner_removal=not args.no_corner_removal,
                 jobs=args.jobs)
    print(_table(["config", "gmean EPR", "delta %"],
                 [(r["config"], r["gmean_epr"], r["delta_pct"]) for r in res["rows"]]))
    _write_json(args.json, {"rows": res["rows"], "records": [r.to_dict() for r in res["records"]]})
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    data = json.loads(Path(args.records).read_text())
    recs = [RunRecord.from_dict(r) for r in data["records"]]
    sweep = cost_sweep(recs, args.c_tele)
    rows = [[c] + vals for c, vals in sweep["rows"].items()] + [["gmean"] + sweep["gmean"]]
    print(_table(["circuit"] + [str(v) for v in sweep["c_tele"]], rows))
    if args.against:
        other = [RunRecord.from_dict(r) for r in json.loads(Path(args.against).read_text())["records"]]
        deltas = cost_delta(recs, other, args.c_tele)
        print("\n" + _table(["c_tele"] + [str(v) for v in args.c_tele], [["delta %"] + deltas]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mcroute", description="Multi-core qubit router.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("route", help="route circuits and report EPR/SWAP counts")
    _add_common(r)
    r.add_argument("--layout-file", help="JSON [{logical, core, slot}] start layout")
    r.add_argument("--dump-program", help="write the first circuit's best op stream here")
    r.set_defaults(func=cmd_route)
    a = sub.add_parser("ablate", help="disable one mechanism at a time")
    _add_common(a)
    a.set_defaults(func=cmd_ablate)
    s = sub.add_parser("sweep", help="recompute cost over c_tele from stored records")
    s.add_argument("records", help="JSON written by `route --json`")
    s.add_argument("--c-tele", type=float, nargs="+", default=list(COST_SWEEP))
    s.add_argument("--against", help="second record file; prints gmean cost deltas")
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
