import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcroute import DistanceTables, build_dag, parse_arch_spec
from mcroute.circuit import gen_ghz, gen_random
from mcroute.layout import (
    EMPTY, Layout, affinity_layout, corner_removed_slots, random_layout, search_layout,
    trial_seeds, usable_slots,
)
from mcroute.layout.flat import FlatGraph, flat_pass

BGRID = parse_arch_spec("bgrid:2x2:4x4")
HGRID = parse_arch_spec("hgrid:2x3:4x4")
TABLES = {a.name: DistanceTables(a) for a in (BGRID, HGRID)}


def check_inverse(lay: Layout) -> None:
    for q, p in enumerate(lay.to_phys):
        assert lay.to_logical[p] == q
    assert sum(s != EMPTY for s in lay.to_logical) == lay.n_logical
    for c, core in enumerate(lay.arch.cores):
        assert lay.free_count[c] == sum(lay.to_logical[s] == EMPTY for s in core.slots)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(0, 10**6), st.lists(st.tuples(st.integers(0, 10**6), st.booleans()),
                                                         max_size=60))
def test_moves_keep_maps_inverse(n, seed, moves):
    arch = HGRID
    lay = random_layout(arch, n, seed, corner_removal=False)
    for pick, teleport in moves:
        if teleport:
            lk = arch.links[pick % len(arch.links)]
            for src, dst in ((lk.port_a, lk.port_b), (lk.port_b, lk.port_a)):
                q = lay.to_logical[src]
                if q != EMPTY and lay.to_logical[dst] == EMPTY:
                    lay.apply_teleport(q, dst)
                    break
        else:
            u = pick % arch.n_slots
            v = arch.adj[u][pick % len(arch.adj[u])]
            lay.apply_swap(u, v)
        check_inverse(lay)


def test_teleport_into_occupied_slot_fails():
    lay = Layout(BGRID, [3, 16])
    with pytest.raises(ValueError):
        lay.apply_teleport(0, 16)
    with pytest.raises(ValueError):
        lay.apply_teleport(0, 2)


def test_duplicate_slot_rejected():
    with pytest.raises(ValueError):
        Layout(BGRID, [4, 4])


def test_corner_removal_on_standard_devices():
    for arch in (BGRID, HGRID):
        removed = corner_removed_slots(arch)
        assert len(removed) == 4 * arch.n_cores
        for s in removed:
            assert not arch.is_port[s]
            assert arch.coords[s] in {(0, 0), (0, 3), (3, 0), (3, 3)}


def test_corner_with_port_is_kept():
    arch = parse_arch_spec("bgrid:1x2:2x2")
    ports = {p for lk in arch.links for p in (lk.port_a, lk.port_b)}
    assert not corner_removed_slots(arch) & ports


def test_ghz25_layout_avoids_corners():
    dag = build_dag(gen_ghz(25), 25)
    found = search_layout(dag, BGRID, TABLES[BGRID.name], seed=0, trials=1)
    assert not set(found.layout.to_phys) & corner_removed_slots(BGRID)
    no_rm = random_layout(BGRID, 64, 0, corner_removal=False)
    assert sorted(no_rm.to_phys) == list(range(64))


def test_too_many_qubits():
    with pytest.raises(ValueError):
        random_layout(BGRID, len(usable_slots(BGRID)) + 1, 0)


def test_same_seed_same_layout():
    dag = build_dag(gen_random(30, 150, 4), 30)
    a = search_layout(dag, HGRID, TABLES[HGRID.name], seed=11, trials=2)
    b = search_layout(dag, HGRID, TABLES[HGRID.name], seed=11, trials=2)
    assert a.layout == b.layout and a.epr_per_trial == b.epr_per_trial
    assert random_layout(HGRID, 30, 5) == random_layout(HGRID, 30, 5)
    assert trial_seeds(3, 4) == trial_seeds(3, 4) and len(set(trial_seeds(3, 4))) == 4


def test_search_keeps_best_trial():
    dag = build_dag(gen_random(24, 120, 9), 24)
    found = search_layout(dag, HGRID, TABLES[HGRID.name], seed=2, trials=3)
    assert found.result.metrics.epr == min(found.epr_per_trial)
    assert found.epr_per_trial[found.trial] == found.result.metrics.epr


def test_affinity_layout_fills_first_core():
    dag = build_dag(gen_ghz(20), 20)
    lay = affinity_layout(dag, HGRID, TABLES[HGRID.name])
    usable = set(usable_slots(HGRID))
    assert set(lay.to_phys) <= usable
    first = [HGRID.core_of[lay.to_phys[q]] for q in range(12)]
    assert first == [0] * 12
    assert lay == affinity_layout(dag, HGRID, TABLES[HGRID.name])


def test_flat_pass_returns_usable_permutation():
    usable = usable_slots(HGRID)
    graph = FlatGraph.build(HGRID, usable)
    dag = build_dag(gen_random(40, 200, 1), 40)
    start = random_layout(HGRID, 40, 1).to_phys
    out = flat_pass(dag, graph, start)
    assert len(set(out)) == 40 and set(out) <= set(usable)


def test_records_round_trip():
    lay = random_layout(HGRID, 20, 3)
    assert Layout.from_records(HGRID, lay.to_records()) == lay
    bad = lay.to_records()
    bad[0]["core"] = (bad[0]["core"] + 1) % HGRID.n_cores
    with pytest.raises(ValueError):
        Layout.from_records(HGRID, bad)
