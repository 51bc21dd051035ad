import json

import pytest

from mcroute.circuit import gen_ghz, to_qasm
from mcroute.cli import (
    ABLATIONS, Circuit, RunRecord, best_per_circuit, cost_delta, cost_sweep, gmean, main, make_arch,
    rerun, run_one, run_suite, summarize,
)
from mcroute.layout import random_layout
from mcroute.router import RouterParams

ARCH = "hgrid:2x3:4x4"


def record(circuit: str, epr: int, swaps: int, seed: int = 0, status: str = "complete") -> RunRecord:
    return RunRecord(circuit=circuit, arch=ARCH, seed=seed, params=RouterParams().to_dict(),
                     status=status, metrics={"epr": epr, "swaps": swaps, "cost": 3 * swaps + 10 * epr,
                                             "rollbacks": 0, "relief_moves": 0})


def test_gmean():
    assert gmean([8, 2]) == pytest.approx(4)
    assert gmean([0, 4]) == pytest.approx(2)


def test_best_per_circuit_and_summary():
    recs = [record("a", 5, 10, 0), record("a", 3, 20, 1), record("b", 1, 1, 0, "aborted")]
    best = best_per_circuit(recs)
    assert best["a"].seed == 1 and best["b"] is None
    summ = summarize(recs)
    assert summ["non_convergent"] == ["b"] and summ["gmean_epr"] == pytest.approx(3)


def test_cost_sweep_and_delta():
    base = [record("a", 2, 10), record("b", 8, 0)]
    other = [record("a", 4, 10), record("b", 8, 0)]
    sweep = cost_sweep(base, [10, 20])
    assert sweep["rows"] == {"a": [50, 70], "b": [80, 160]}
    assert sweep["gmean"][0] == pytest.approx((50 * 80) ** 0.5)
    deltas = cost_delta(base, other, [10, 20])
    assert deltas[0] == pytest.approx(100 * ((70 * 80) ** 0.5 / (50 * 80) ** 0.5 - 1))
    assert deltas[1] == pytest.approx(100 * ((110 * 160) ** 0.5 / (70 * 160) ** 0.5 - 1))


def test_ablation_rows():
    assert list(ABLATIONS) == ["full", "no-lookahead", "no-cap-penalty", "no-hop", "no-relief",
                               "topo-extset"]
    for changes in ABLATIONS.values():
        RouterParams().with_(**changes)


def test_record_json_round_trip_and_rerun():
    params = RouterParams()
    arch, tables = make_arch(ARCH, params)
    rec, _ = run_one(Circuit.load("random:20:80:3"), ARCH, arch, tables, 4, params)
    assert rec.complete and rec.valid
    again = RunRecord.from_dict(json.loads(json.dumps(rec.to_dict())))
    assert again == rec
    repeat = rerun(again)
    assert repeat.metrics == rec.metrics and repeat.initial_layout == rec.initial_layout


def test_suite_independent_of_thread_count():
    circuits = [Circuit.load("random:24:100:1"), Circuit.load("ghz:20")]
    one = run_suite(circuits, ARCH, [0, 1], RouterParams(), jobs=1)
    four = run_suite(circuits, ARCH, [0, 1], RouterParams(), jobs=4)
    strip = [{k: v for k, v in r.to_dict().items() if k != "timing"} for r in one]
    assert strip == [{k: v for k, v in r.to_dict().items() if k != "timing"} for r in four]


def test_route_command(tmp_path, capsys):
    out = tmp_path / "records.json"
    code = main(["route", "--arch", ARCH, "--circuit", "ghz:12", "--circuit", "random:16:60:2",
                 "--seeds", "2", "--json", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "gmean EPR" in text and "ghz:12" in text
    data = json.loads(out.read_text())
    assert len(data["records"]) == 4 and data["cost_sweep"]["c_tele"] == [10, 20, 50, 100]
    assert main(["sweep", str(out), "--c-tele", "10", "100", "--against", str(out)]) == 0
    assert "delta %" in capsys.readouterr().out


def test_route_with_layout_file_and_dump(tmp_path):
    qasm = tmp_path / "ghz.qasm"
    qasm.write_text(to_qasm(gen_ghz(10), 10))
    arch, _ = make_arch(ARCH, RouterParams())
    lay = tmp_path / "layout.json"
    lay.write_text(random_layout(arch, 10, 1).to_json())
    dump = tmp_path / "prog.txt"
    code = main(["route", "--qasm", str(qasm), "--layout-file", str(lay), "--dump-program", str(dump),
                 "--c-tele", "20", "--no-relief"])
    assert code == 0
    assert dump.read_text().count("G2 cx") == 9


def test_ablate_command(capsys):
    code = main(["ablate", "--arch", "bgrid:2x2:4x4", "--circuit", "random:12:40:1", "--seeds", "1"])
    assert code == 0
    out = capsys.readouterr().out
    assert all(name in out for name in ABLATIONS)


def test_bad_input_returns_error(capsys):
    assert main(["route", "--arch", "zgrid:1x1:2x2", "--circuit", "ghz:4"]) == 2
    assert main(["route", "--qasm", "/nonexistent.qasm"]) == 2
    assert "error" in capsys.readouterr().err
