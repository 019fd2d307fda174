"""Evaluation-network construction: perturbed grid placement, disk-model
adjacency, uniform sink placement, and shortest-hop routing to the nearest
sink.

Construction is deterministic for a fixed seed. A finished topology and its
route table are treated as immutable and may be shared freely across
concurrent simulation runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

import numpy as np


class RoutingError(RuntimeError):
    """Some nodes cannot reach any sink; carries the unreachable ids."""

    def __init__(self, unreachable):
        self.unreachable = sorted(unreachable)
        super().__init__(
            f"{len(self.unreachable)} node(s) cannot reach a sink: "
            f"{self.unreachable[:20]}{'...' if len(self.unreachable) > 20 else ''}")


@dataclass
class Node:
    id: int
    x: float
    y: float
    is_sink: bool = False


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    spacing: float
    jitter: float
    seed: int


@dataclass
class Topology:
    nodes: list
    grid: Optional[GridSpec] = None
    radio_range: Optional[float] = None
    adjacency: Optional[dict] = None

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def sink_ids(self) -> list:
        return [n.id for n in self.nodes if n.is_sink]

    def positions(self) -> np.ndarray:
        return np.array([(n.x, n.y) for n in self.nodes], dtype=float)


@dataclass
class RouteTable:
    """Next hop, hop count to the assigned sink, and that sink, per node.

    Sinks themselves appear in hop_count (0) and assigned_sink (self) but
    have no next_hop entry.
    """
    next_hop: dict
    hop_count: dict
    assigned_sink: dict
    sinks: list = field(default_factory=list)

    def route(self, node: int) -> list:
        """Full node sequence from `node` to its sink, inclusive."""
        path = [node]
        while path[-1] in self.next_hop:
            path.append(self.next_hop[path[-1]])
        return path


class TopologyStats(NamedTuple):
    neighborhood_bound: int   # largest contention set (node + radio peers)
    max_hops: int             # largest hop distance to a sink
    nodes_per_disk: int       # mean contention-set size, rounded


def generate_perturbed_grid(rows: int, cols: int, spacing: float,
                            jitter: float, seed: int = 0) -> Topology:
    """Lay out rows*cols nodes on a grid, each displaced uniformly by up to
    jitter*spacing in x and y.

    jitter must stay below 0.5 so neighboring cells cannot swap order.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    if not (spacing > 0):
        raise ValueError("spacing must be > 0")
    if not (0 <= jitter < 0.5):
        raise ValueError(f"jitter must lie in [0, 0.5), got {jitter}")

    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-jitter * spacing, jitter * spacing, size=(rows * cols, 2))
    nodes = []
    for r in range(rows):
        for c in range(cols):
            k = r * cols + c
            nodes.append(Node(id=k,
                              x=float(c * spacing + offsets[k, 0]),
                              y=float(r * spacing + offsets[k, 1])))
    return Topology(nodes=nodes, grid=GridSpec(rows, cols, spacing, jitter, seed))


def compute_adjacency(topology: Topology, radio_range: float) -> dict:
    """Disk-model adjacency: nodes are neighbors iff their Euclidean distance
    is <= radio_range (boundary inclusive). Symmetric by construction; a node
    is not its own neighbor. Stores the result on the topology and returns it.
    """
    if not (radio_range > 0):
        raise ValueError("radio_range must be > 0")
    pos = topology.positions()
    n = len(pos)
    adjacency = {}
    if n:
        d2 = np.sum((pos[:, None, :] - pos[None, :, :]) ** 2, axis=-1)
        within = d2 <= radio_range * radio_range
        np.fill_diagonal(within, False)
        for i, node in enumerate(topology.nodes):
            adjacency[node.id] = frozenset(
                topology.nodes[j].id for j in np.flatnonzero(within[i]))
    topology.adjacency = adjacency
    topology.radio_range = float(radio_range)
    return adjacency


def contention_sets(topology: Topology) -> dict:
    """Each node's contention set: its radio neighborhood plus itself (a
    node's own queued traffic competes for the same channel)."""
    if topology.adjacency is None:
        raise ValueError("adjacency not computed yet")
    return {x: frozenset(nbrs | {x}) for x, nbrs in topology.adjacency.items()}


def _subgrid_factors(sink_count: int, rows: int, cols: int):
    """Factor pair (a, b), a*b == sink_count, with aspect closest to the grid's."""
    target = math.log(rows / cols)
    best = None
    for a in range(1, sink_count + 1):
        if sink_count % a:
            continue
        b = sink_count // a
        if a > rows or b > cols:
            continue
        score = abs(math.log(a / b) - target)
        if best is None or score < best[0] - 1e-12:
            best = (score, a, b)
    return (best[1], best[2]) if best else None


def place_sinks(topology: Topology, sink_count: int, seed: int = 0,
                mode: str = "subgrid") -> list:
    """Mark sink_count nodes as sinks and return their ids, ascending.

    subgrid mode (the default) selects an evenly spaced sub-grid of the node
    grid: one sink on an odd square grid lands on the center node, four on a
    square grid land on the quadrant centers. random mode draws uniformly
    without replacement using the seed.
    """
    n = topology.node_count
    if not (1 <= sink_count <= n):
        raise ValueError(f"sink_count must lie in [1, {n}], got {sink_count}")
    for node in topology.nodes:
        node.is_sink = False

    if mode == "random":
        rng = np.random.default_rng(seed)
        chosen = sorted(rng.choice(n, size=sink_count, replace=False).tolist())
    elif mode == "subgrid":
        if topology.grid is None:
            raise ValueError("subgrid placement needs grid metadata; use random mode")
        rows, cols = topology.grid.rows, topology.grid.cols
        pair = _subgrid_factors(sink_count, rows, cols)
        if pair is not None:
            a, b = pair
            sel_rows = [int((i + 0.5) * rows / a) for i in range(a)]
            sel_cols = [int((j + 0.5) * cols / b) for j in range(b)]
            chosen = sorted(r * cols + c for r in sel_rows for c in sel_cols)
        else:
            # no factor pair fits the grid (e.g. a large prime): space the
            # sinks evenly along the row-major node order instead
            chosen = sorted(int((i + 0.5) * n / sink_count) for i in range(sink_count))
    else:
        raise ValueError(f"unknown sink placement mode {mode!r}")

    by_id = {node.id: node for node in topology.nodes}
    for node_id in chosen:
        by_id[node_id].is_sink = True
    return chosen


def build_routes(topology: Topology, sinks: Optional[Iterable] = None) -> RouteTable:
    """Shortest-hop routes from every node to its nearest sink.

    Hop counts come from a breadth-first search seeded with all sinks at
    distance 0. The next hop is the neighbor one hop closer, ties broken by
    smallest node id so routes stay fixed across replications. Raises
    RoutingError when any node has no path to a sink.
    """
    if topology.adjacency is None:
        raise ValueError("adjacency not computed yet")
    sink_list = sorted(sinks) if sinks is not None else sorted(topology.sink_ids)
    if not sink_list:
        raise ValueError("no sinks given or marked on the topology")

    adjacency = topology.adjacency
    hop_count = {s: 0 for s in sink_list}
    frontier = list(sink_list)
    while frontier:
        nxt = []
        for v in frontier:
            for w in adjacency[v]:
                if w not in hop_count:
                    hop_count[w] = hop_count[v] + 1
                    nxt.append(w)
        frontier = sorted(nxt)

    unreachable = [n.id for n in topology.nodes if n.id not in hop_count]
    if unreachable:
        raise RoutingError(unreachable)

    next_hop = {}
    for node in topology.nodes:
        v = node.id
        if hop_count[v] == 0:
            continue
        next_hop[v] = min(w for w in adjacency[v] if hop_count[w] == hop_count[v] - 1)

    assigned_sink = {s: s for s in sink_list}
    for v in sorted(hop_count, key=hop_count.get):
        if v not in assigned_sink:
            assigned_sink[v] = assigned_sink[next_hop[v]]

    return RouteTable(next_hop=next_hop, hop_count=hop_count,
                      assigned_sink=assigned_sink, sinks=sink_list)


def topology_stats(topology: Topology, routes: RouteTable) -> TopologyStats:
    """Extract the analytic parameters a concrete instance exhibits.

    neighborhood_bound is the largest contention set, nodes_per_disk the mean
    contention set rounded to the nearest integer, max_hops the longest route.
    """
    if topology.adjacency is None:
        raise ValueError("adjacency not computed yet")
    sizes = [len(topology.adjacency[n.id]) + 1 for n in topology.nodes]
    u = max(sizes)
    m = int(math.floor(sum(sizes) / len(sizes) + 0.5))
    max_hops = max(routes.hop_count.values())
    return TopologyStats(neighborhood_bound=u, max_hops=max_hops, nodes_per_disk=m)


def save_topology(topology: Topology, path) -> None:
    """Write the node list as plain text: one `id x y is_sink` line per node,
    preceded by a header recording the grid parameters and radio range.
    Floats are written with repr so a round trip is bit-exact."""
    lines = ["# rtcap topology v1"]
    if topology.grid is not None:
        g = topology.grid
        lines.append(f"# grid rows={g.rows} cols={g.cols} spacing={g.spacing!r} "
                     f"jitter={g.jitter!r} seed={g.seed}")
    if topology.radio_range is not None:
        lines.append(f"# radio_range={topology.radio_range!r}")
    lines.append("# columns: id x y is_sink")
    for node in topology.nodes:
        lines.append(f"{node.id} {node.x!r} {node.y!r} {int(node.is_sink)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_topology(path) -> Topology:
    """Read a topology written by save_topology; recomputes adjacency when the
    header records a radio range."""
    grid = None
    radio_range = None
    nodes = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("# ").strip()
                if body.startswith("grid "):
                    kv = dict(part.split("=", 1) for part in body[5:].split())
                    grid = GridSpec(rows=int(kv["rows"]), cols=int(kv["cols"]),
                                    spacing=float(kv["spacing"]),
                                    jitter=float(kv["jitter"]), seed=int(kv["seed"]))
                elif body.startswith("radio_range="):
                    radio_range = float(body.split("=", 1)[1])
                continue
            ident, x, y, sink = line.split()
            nodes.append(Node(id=int(ident), x=float(x), y=float(y),
                              is_sink=bool(int(sink))))
    topo = Topology(nodes=nodes, grid=grid)
    if radio_range is not None:
        compute_adjacency(topo, radio_range)
    return topo


def make_network(rows: int, cols: int, spacing: float = 10.0, jitter: float = 0.25,
                 seed: int = 0, radio_range: float = 20.0, sink_count: int = 1,
                 sink_mode: str = "subgrid"):
    """One-call pipeline: perturbed grid, adjacency, sinks, routes.

    Returns (topology, routes).
    """
    topo = generate_perturbed_grid(rows, cols, spacing, jitter, seed)
    compute_adjacency(topo, radio_range)
    place_sinks(topo, sink_count, seed=seed, mode=sink_mode)
    routes = build_routes(topo)
    return topo, routes
