"""Shared test fixtures and independent oracles used by the unit and
acceptance suites."""

from collections import defaultdict

from rtcap import analytics as an
from rtcap import simcore as sc
from rtcap import topology as tp


def chain_network(n, radio_range=10.0, sink_at_end=True):
    """1 x n grid with spacing 10 and the sink at the right end."""
    topo = tp.generate_perturbed_grid(1, n, 10.0, 0.0, seed=0)
    tp.compute_adjacency(topo, radio_range)
    sink = n - 1 if sink_at_end else 0
    for node in topo.nodes:
        node.is_sink = node.id == sink
    routes = tp.build_routes(topo)
    return topo, routes


def mk_packet(pid, origin, dest, at, deadline, tx=0.4, hops=1, tie=0.0, size=1000.0):
    return sc.Packet(id=pid, origin=origin, destination=dest, arrival_time=at,
                     relative_deadline=deadline, size=size, tx_time=tx,
                     route_hops=hops, tie_key=tie, current_node=origin)


def mk_workload(packets):
    return sc.Workload(packets=tuple(packets), overloaded=False, seed=0)


def contended_run(seed=3, rate=6.0, drop_on_miss=True, event_log=None):
    """3x3 grid under enough load (50 ms hops) to produce real contention."""
    topo, routes = tp.make_network(3, 3, spacing=10.0, jitter=0.2, seed=seed,
                                   radio_range=15.0, sink_count=1)
    cfg = sc.SimConfig(packet_size=12_500.0, arrival_rate=rate, duration=8.0,
                       seed=seed, drop_on_miss=drop_on_miss)
    wl = sc.generate_workload(topo, routes, cfg)
    metrics = sc.run_simulation(topo, routes, wl, cfg, event_log=event_log)
    return topo, routes, cfg, metrics


def replay_active_sets(log, adjacency):
    """Re-verify the exclusion rule over the whole log, independently of the
    simulator's own per-grant check."""
    active = {}
    for line in log:
        parts = line.split()
        kind = parts[1]
        if kind == "grant":
            s, r = (int(x) for x in parts[2].split("->"))
            pid = int(parts[3])
            for (s0, r0) in active.values():
                assert not ({s, r} & {s0, r0}), line
                assert s not in adjacency[r0], line
                assert r not in adjacency[s0], line
            active[pid] = (s, r)
        elif kind == "complete":
            active.pop(int(parts[3]))
    assert not active


def audit_priority_order(log, adjacency, next_hop):
    """No grant may leapfrog a strictly-smaller-deadline packet that was
    queued and unblocked in the same contention set at that instant."""

    def conflicts(a, b):
        (sa, ra), (sb, rb) = a, b
        return bool({sa, ra} & {sb, rb}) or sa in adjacency[rb] or sb in adjacency[ra]

    queued = defaultdict(dict)   # node -> pid -> relative deadline
    deadlines = {}
    active = {}
    violations = []
    for line in log:
        parts = line.split()
        kind = parts[1]
        if kind == "arrival":
            node, pid, dl = int(parts[2]), int(parts[3]), float(parts[4])
            deadlines[pid] = dl
            queued[node][pid] = dl
        elif kind == "enqueue":
            node, pid = int(parts[2]), int(parts[3])
            queued[node][pid] = deadlines[pid]
        elif kind == "grant":
            s, r = (int(x) for x in parts[2].split("->"))
            pid = int(parts[3])
            dl = deadlines[pid]
            # within the node, the head must carry the minimal deadline
            assert dl <= min(queued[s].values()), line
            blockers = list(active.values())
            for v, pending in queued.items():
                if v == s or not pending:
                    continue
                head_dl = min(pending.values())
                cand = (v, next_hop[v])
                if head_dl < dl and conflicts(cand, (s, r)):
                    blocked = any(conflicts(cand, b) for b in blockers)
                    if not blocked:
                        violations.append((line, v, head_dl))
            del queued[s][pid]
            active[pid] = (s, r)
        elif kind == "complete":
            active.pop(int(parts[3]))
        elif kind == "miss":
            loc, pid, disposition = parts[2], int(parts[3]), parts[4]
            if loc != "air" and disposition == "dropped":
                queued[int(loc)].pop(pid, None)
    return violations


def max_node_utilizations(topology, routes, workload):
    """Worst instantaneous utilization each node sees if every packet stays
    in the network for its whole deadline window (a conservative upper
    bound: early deliveries only lower the true value)."""
    deltas = defaultdict(list)
    for p in workload.packets:
        u = p.tx_time / p.relative_deadline
        for v in routes.route(p.origin):
            deltas[v].append((p.arrival_time, u))
            deltas[v].append((p.absolute_deadline, -u))
    peaks = {}
    for node in topology.nodes:
        level = peak = 0.0
        for _, d in sorted(deltas.get(node.id, [])):
            level += d
            peak = max(peak, level)
        peaks[node.id] = peak
    return peaks


def instance_is_dm_feasible(topology, routes, workload):
    """Path-by-path fixed-priority feasibility check on measured (worst-case)
    neighborhood utilizations."""
    peaks = max_node_utilizations(topology, routes, workload)
    cont = tp.contention_sets(topology)
    vq = {x: sum(peaks[y] for y in members) for x, members in cont.items()}
    for node in topology.nodes:
        if node.is_sink:
            continue
        senders = routes.route(node.id)[:-1]
        if not an.dm_path_feasible([vq[v] for v in senders]).feasible:
            return False
    return True
