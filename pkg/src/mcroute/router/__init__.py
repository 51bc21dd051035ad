from .engine import (
    CandidateKind,
    Checkpoint,
    RouteResult,
    RouterState,
    RoutingAborted,
    RoutingError,
    TeleportCandidate,
    drain_front,
    partition_front,
    route,
)
from .lookahead import ExtendedSetEntry, bfs_layer_set, tainted_core_set, topo_order_set
from .params import RouterParams

__all__ = [
    "CandidateKind", "Checkpoint", "ExtendedSetEntry", "RouteResult", "RouterParams",
    "RouterState", "RoutingAborted", "RoutingError", "TeleportCandidate",
    "bfs_layer_set", "drain_front", "partition_front", "route", "tainted_core_set",
    "topo_order_set",
]
