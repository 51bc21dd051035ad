import math

import networkx as nx
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from mcroute import DistanceTables, build_dag, build_grid_arch, parse_arch_spec, validate
from mcroute.circuit import gen_random, make_gates
from mcroute.layout import Layout, random_layout
from mcroute.program import Gate1Op, Gate2Op, RoutedProgram, SwapOp, TeleportOp
from mcroute.router import (
    CandidateKind, RouterParams, RouterState, RoutingAborted, bfs_layer_set, route, tainted_core_set,
    topo_order_set,
)

HGRID = parse_arch_spec("hgrid:2x3:4x4")
HT = DistanceTables(HGRID)


def slot(core: int, r: int, c: int, m: int = 4) -> int:
    return core * m * m + r * m + c


def fixture_state(params: RouterParams | None = None) -> RouterState:
    """q0 in C1 at (0,2), q1 in C5 at (1,1), C4 holding 14 idle qubits."""
    filled = [(0, 1), (0, 2), (0, 3), (1, 0), (1, 1), (1, 2), (1, 3),
              (2, 1), (2, 2), (2, 3), (3, 0), (3, 1), (3, 2), (3, 3)]
    to_phys = [slot(1, 0, 2), slot(5, 1, 1)] + [slot(4, r, c) for r, c in filled]
    dag = build_dag(make_gates([("cx", (0, 1))]), 16)
    return RouterState(dag, Layout(HGRID, to_phys), HGRID, HT, params or RouterParams())


# -- two-core fixture ---------------------------------------------------------

def test_fixture_candidates():
    st_ = fixture_state()
    assert st_.drain_front() == []
    f_intra, f_inter = st_.partition_front()
    assert (f_intra, f_inter) == ([], [0])
    cands = st_.enumerate_tele_candidates(f_inter)
    assert len(cands) == 5
    q0 = {c.next_core: c for c in cands if c.qubit == 0}
    assert sorted(q0) == [0, 2, 4]
    a, b, c = q0[2], q0[0], q0[4]
    assert (a.d_prep, a.c_cap, a.g_hop, a.delta_F, a.score) == (1, 0, 5, 12, -16)
    assert (b.d_prep, b.c_cap, b.g_hop, b.delta_F, b.score) == (2, 0, -5, -11, 18)
    assert (c.d_prep, c.c_cap, c.g_hop, c.delta_F, c.score) == (3, 15, 5, 12, 1)
    assert sorted(c.next_core for c in cands if c.qubit == 1) == [2, 4]
    best, pool = st_.select_teleport(f_inter)
    assert best == a and len(pool) == 5


def test_fixture_first_moves():
    st_ = fixture_state()
    st_.step()
    assert [str(op) for op in st_.ops] == ["SW s18 s19", "TP q0 s19->s36 link2"]


def test_fixture_route_is_valid():
    st_ = fixture_state()
    res = route(st_.dag, Layout(HGRID, st_.layout.to_phys), HGRID, HT)
    assert validate(res.program, HGRID, st_.dag, Layout(HGRID, st_.layout.to_phys), res.layout).ok
    assert res.metrics.epr == 2


def test_apply_candidate_a():
    st_ = fixture_state()
    st_.drain_front()
    a = min(st_.enumerate_tele_candidates(), key=lambda c: c.sort_key())
    st_.apply_teleport_move(a)
    assert sum(isinstance(o, SwapOp) for o in st_.ops) == 1
    assert sum(isinstance(o, TeleportOp) for o in st_.ops) == 1


def test_staged_qubit_teleports_without_swaps():
    st_ = fixture_state()
    st_.layout.apply_swap(slot(1, 0, 2), slot(1, 0, 3))  # q0 now next to the C1->C2 port
    st_.drain_front()
    cand = next(c for c in st_.enumerate_tele_candidates() if c.qubit == 0 and c.next_core == 2)
    assert cand.d_prep == 0
    st_.apply_teleport_move(cand)
    assert [type(o) for o in st_.ops] == [TeleportOp]


# -- drain and partition ----------------------------------------------------

SAMPLE_DAG = make_gates([("cx", (0, 1)), ("h", (2,)), ("cx", (1, 2))])
SINGLE = build_grid_arch("B", 1, 1, 4)
ST = DistanceTables(SINGLE)


@pytest.mark.parametrize("q2_slot,expect", [(2, [0, 1, 2]), (10, [0, 1])])
def test_drain_sample_dag(q2_slot, expect):
    dag = build_dag(SAMPLE_DAG, 3)
    st_ = RouterState(dag, Layout(SINGLE, [0, 1, q2_slot]), SINGLE, ST, RouterParams())
    assert sorted(st_.drain_front()) == expect
    assert st_.drain_front() == []


def test_all_single_qubit_circuit():
    gates = make_gates([("h", (q % 5,)) for q in range(20)])
    res = route(build_dag(gates, 5), random_layout(HGRID, 5, 0), HGRID, HT)
    assert all(isinstance(o, Gate1Op) for o in res.program.ops) and len(res.program.ops) == 20


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 60), st.integers(0, 10**6))
def test_partition_matches_core_membership(n, seed):
    dag = build_dag(gen_random(n, 3 * n, seed), n)
    st_ = RouterState(dag, random_layout(HGRID, n, seed), HGRID, HT, RouterParams())
    st_.drain_front()
    f_intra, f_inter = st_.partition_front()
    core = [HGRID.core_of[p] for p in st_.layout.to_phys]
    two = sorted(g for g in st_.ds.front if dag.gates[g].is_2q)
    assert f_intra == [g for g in two if len({core[q] for q in dag.gates[g].qubits}) == 1]
    assert f_inter == [g for g in two if len({core[q] for q in dag.gates[g].qubits}) == 2]


def test_partition_empty_front():
    dag = build_dag([], 2)
    st_ = RouterState(dag, Layout(HGRID, [0, 1]), HGRID, HT, RouterParams())
    assert st_.partition_front() == ([], [])
    assert st_.enumerate_tele_candidates([]) == []


# -- lookahead windows ----------------------------------------------------

def chain(n: int):
    return build_dag(make_gates([("cx", (i, i + 1)) for i in range(n)]), n + 1)


def test_chain_window():
    dag = chain(30)
    ds = dag.fresh_state()
    ext = bfs_layer_set(dag, ds, 20, 0.9)
    assert [e.gate for e in ext] == list(range(1, 21))
    assert [e.dep for e in ext] == list(range(1, 21))
    assert ext[0].weight == pytest.approx(0.9)
    assert all(e.weight == pytest.approx(0.9 ** e.dep) for e in ext)
    topo = topo_order_set(dag, ds, 20, 0.9, list(range(30)))
    assert [(e.gate, e.dep) for e in topo] == [(e.gate, e.dep) for e in ext]


def test_empty_windows():
    dag = chain(30)
    ds = dag.fresh_state()
    assert bfs_layer_set(dag, ds, 0, 0.9) == []
    one = chain(1)
    assert bfs_layer_set(one, one.fresh_state(), 20, 0.9) == []
    assert topo_order_set(one, one.fresh_state(), 20, 0.9, [0]) == []


def test_layer_cut_keeps_whole_layers():
    # front g0 (0,1); layer 1 holds two gates, layer 2 two more
    gates = make_gates([("cx", (0, 1)), ("cx", (0, 2)), ("cx", (1, 3)), ("cx", (2, 4)), ("cx", (3, 5))])
    dag = build_dag(gates, 6)
    ext = bfs_layer_set(dag, dag.fresh_state(), 3, 0.9)
    assert [(e.gate, e.dep) for e in ext] == [(1, 1), (2, 1)]


def test_taint_excludes_gates_behind_cross_core_wires():
    # qubits 0,1,2,4 share core 0; qubit 3 lives elsewhere
    gates = make_gates([("cx", (0, 1)), ("cx", (2, 3)), ("cx", (1, 2)), ("cx", (0, 4)), ("cx", (1, 0))])
    dag = build_dag(gates, 5)
    ds = dag.fresh_state()
    core = {0: 0, 1: 0, 2: 0, 3: 1, 4: 0}
    ec = tainted_core_set(dag, ds, [0], 20, 0.9, list(range(5)), lambda a, b: core[a] != core[b])
    assert [(e.gate, e.dep) for e in ec] == [(3, 1)]
    assert ec[0].weight == pytest.approx(0.9)


# -- intra-core SWAP scoring ------------------------------------------------

GRID3 = build_grid_arch("B", 1, 1, 3)
T3 = DistanceTables(GRID3)
G3 = nx.grid_2d_graph(3, 3)
D3 = {(a[0] * 3 + a[1], b[0] * 3 + b[1]): d
      for a, row in nx.all_pairs_shortest_path_length(G3) for b, d in row.items()}


def test_swap_score_simple_cases():
    dag = build_dag(make_gates([("cx", (0, 1))]), 3)
    st_ = RouterState(dag, Layout(GRID3, [0, 2, 6]), GRID3, T3, RouterParams())
    assert st_.score_intra_swap(0, 0, 1) == 1.0
    assert st_.score_intra_swap(0, 6, 7) == 0.0
    assert st_.best_intra_swap([0])[0] == 1.0


@settings(max_examples=60, deadline=None)
@given(st.permutations(range(9)))
def test_best_swap_matches_exhaustive_oracle(perm):
    # two front gates; both lookahead gates only touch front qubits
    gates = make_gates([("cx", (0, 1)), ("cx", (2, 3)), ("cx", (1, 2)), ("cx", (0, 3))])
    dag = build_dag(gates, 4)
    to_phys = list(perm[:4])
    # the router only scores SWAPs after draining, so some front gate is still blocked
    assume(D3[to_phys[0], to_phys[1]] > 1 or D3[to_phys[2], to_phys[3]] > 1)
    st_ = RouterState(dag, Layout(GRID3, to_phys), GRID3, T3, RouterParams())
    f_intra, _ = st_.partition_front()
    front, ext = [(0, 1), (2, 3)], [(1, 2, 0.9), (0, 3, 0.9)]

    def oracle(u: int, v: int) -> float:
        new = [v if p == u else u if p == v else p for p in to_phys]
        df = sum(D3[to_phys[a], to_phys[b]] - D3[new[a], new[b]] for a, b in front) / 2
        de = sum(w * (D3[to_phys[a], to_phys[b]] - D3[new[a], new[b]]) for a, b, w in ext) / 2
        return df + 0.25 * de

    best = max(oracle(u, v) for u, v in G3.edges for u, v in [(u[0] * 3 + u[1], v[0] * 3 + v[1])])
    score, u, v = st_.best_intra_swap(f_intra)
    assert score == pytest.approx(best)
    assert oracle(u, v) == pytest.approx(best)


# -- demand, flags and relief ------------------------------------------------

def test_demand_single_cross_gate():
    st_ = fixture_state()
    d = st_.demand_vector()
    path = HT.core_path(1, 5)
    assert d == [1 if c in path else 0 for c in range(6)]


def test_demand_zero_without_cross_gates():
    dag = build_dag(make_gates([("cx", (0, 1))]), 2)
    st_ = RouterState(dag, Layout(HGRID, [0, 1]), HGRID, HT, RouterParams())
    assert st_.demand_vector() == [0] * 6


def test_flag_thresholds():
    st_ = fixture_state()
    st_.layout.free_count[:] = [2, 2, 3, 1, 0, 16]
    assert st_.flagged_cores([3, 2, 3, 5, 9, 3]) == [0, 3, 4]


def saturated_state(b_r: float) -> RouterState:
    """C0 holds 15 qubits; four of them wait on partners in C2."""
    c0 = [s for s in HGRID.cores[0].slots if s != slot(0, 3, 3)]
    c2 = [slot(2, 0, c) for c in range(4)]
    gates = make_gates([("cx", (i, 15 + i)) for i in range(4)])
    dag = build_dag(gates, 19)
    return RouterState(dag, Layout(HGRID, c0 + c2), HGRID, HT, RouterParams(b_r=b_r))


def test_saturated_core_relief_bonus():
    st_ = saturated_state(2.0)
    demand = st_.demand_vector()
    assert demand[0] == 4 and st_.layout.free_count[0] == 1
    assert st_.flagged_cores(demand) == [0]
    relief = st_.relief_candidates()
    assert relief and all(c.kind == CandidateKind.RELIEF for c in relief)
    for c in relief:
        assert c.relief_bonus == 2.0 * 3
        assert c.src_core == 0 and c.qubit >= 4
        if c.feasible:
            assert c.score == c.d_prep + c.c_cap - 6


def test_relief_victims_skip_front_qubits():
    gates = make_gates([("cx", (0, 2))])
    dag = build_dag(gates, 3)
    st_ = RouterState(dag, Layout(HGRID, [0, 1, slot(2, 0, 0)]), HGRID, HT, RouterParams())
    assert st_.relief_victims(0) == [1]


def test_no_flag_no_relief():
    st_ = fixture_state()
    assert st_.relief_candidates() == []


def test_relief_disabled_still_counts_flags():
    res = route(saturated_state(1.0).dag, saturated_state(1.0).layout, HGRID, HT,
                RouterParams(disable_relief=True))
    assert res.program.relief_moves == 0
    assert res.program.stats["flag_iterations"] >= 1


# -- whole runs ---------------------------------------------------------------

@pytest.mark.parametrize("seed", range(3))
def test_every_prefix_is_legal(seed):
    dag = build_dag(gen_random(30, 150, seed), 30)
    start = random_layout(HGRID, 30, seed)
    st_ = RouterState(dag, start, HGRID, HT, RouterParams())
    done = False
    while not done:
        done = st_.step()
        prog = RoutedProgram(list(st_.ops))
        report = validate(prog, HGRID, dag, start, st_.layout, require_complete=False)
        assert report.ok, str(report)
    assert validate(RoutedProgram(list(st_.ops)), HGRID, dag, start, st_.layout).ok


def test_forced_progress_breaks_a_stall():
    arch = build_grid_arch("B", 1, 2, 3)
    tables = DistanceTables(arch)
    dag = build_dag(make_gates([("cx", (0, 1)), ("h", (0,))]), 2)
    start = Layout(arch, [0, 17])
    params = RouterParams(c_pen=math.inf, tau=100)
    assert params.L_deadlock == 50 and params.N_backup_max == 50
    res = route(dag, start, arch, tables, params)
    assert res.metrics.rollbacks == 1
    assert res.program.epr >= 1
    assert all(op.forced for op in res.program.ops if isinstance(op, TeleportOp))
    assert validate(res.program, arch, dag, start, res.layout).ok


def test_rollback_budget_exhaustion_aborts():
    arch = build_grid_arch("B", 1, 2, 3)
    tables = DistanceTables(arch)
    dag = build_dag(make_gates([("cx", (0, 1))]), 2)
    params = RouterParams(c_pen=math.inf, tau=100, N_backup_max=0, L_deadlock=5)
    with pytest.raises(RoutingAborted) as exc:
        route(dag, Layout(arch, [0, 17]), arch, tables, params)
    assert not exc.value.result.program.complete


def test_progress_every_iteration_means_no_rollbacks():
    dag = build_dag(make_gates([("cx", (0, 1)), ("cx", (1, 2))]), 3)
    res = route(dag, Layout(SINGLE, [0, 1, 2]), SINGLE, ST)
    assert res.metrics.rollbacks == 0 and res.program.swaps == 0
    assert [type(o) for o in res.program.ops] == [Gate2Op, Gate2Op]


def test_layout_size_checked():
    dag = build_dag(make_gates([("cx", (0, 3))]), 4)
    with pytest.raises(ValueError):
        RouterState(dag, Layout(HGRID, [0, 1]), HGRID, HT, RouterParams())


# -- params ------------------------------------------------------------------

def test_param_defaults():
    p = RouterParams()
    assert (p.c_swap, p.c_tele, p.tau, p.c_pen, p.w_link, p.w_h, p.w_e, p.L, p.gamma) == (
        3, 10, 3, 15, 10, 5, 0.25, 20, 0.9)
    assert (p.theta_d, p.theta_f) == (3, 2)


def test_param_round_trip_and_checks():
    p = RouterParams(c_pen=0, disable_relief=True)
    assert RouterParams.from_dict(p.to_dict()) == p
    with pytest.raises(ValueError):
        RouterParams.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        RouterParams(gamma=0)
    with pytest.raises(ValueError):
        RouterParams(c_tele=-1)
    assert RouterParams(disable_capacity=True).eff_c_pen == 0
    assert RouterParams(disable_lookahead=True).eff_w_e == 0
    assert RouterParams(disable_hop=True).eff_w_h == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(4, 30), st.integers(0, 10**6))
def test_relief_is_neutral_when_nothing_flags(n, seed):
    dag = build_dag(gen_random(n, 4 * n, seed), n)
    start = random_layout(HGRID, n, seed)
    with_relief = route(dag, start, HGRID, HT, RouterParams(b_r=0))
    if with_relief.program.stats["flag_iterations"] == 0:
        without = route(dag, start, HGRID, HT, RouterParams(b_r=0, disable_relief=True))
        assert without.program.dumps() == with_relief.program.dumps()
