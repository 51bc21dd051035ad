from .dag import CircuitDag, DagState, Gate, GateKind, build_dag, make_gates, reverse_dag
from .generators import circuit_from_spec, gen_ghz, gen_graphstate, gen_qft, gen_random
from .qasm import QasmError, dump_gates, load_gates, parse_qasm, to_qasm

__all__ = [
    "CircuitDag", "DagState", "Gate", "GateKind", "QasmError",
    "build_dag", "make_gates", "reverse_dag",
    "circuit_from_spec", "gen_ghz", "gen_graphstate", "gen_qft", "gen_random",
    "dump_gates", "load_gates", "parse_qasm", "to_qasm",
]
