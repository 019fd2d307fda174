"""Deterministic packet-level discrete-event simulation.

Models the evaluation setup end to end: Poisson traffic at every non-sink
node with deadlines drawn from a preselected set, an idealized
deadline-monotonic MAC that grants transmissions in global priority order
subject to disk-model spatial exclusion, hop-by-hop forwarding along the
shortest-hop route table, eager deadline-miss detection, and measurement of
the capacity consumed by deadline-live traffic at the instant of the first
miss (a packet claims capacity from its arrival until its deadline passes;
a missed packet's claim drops to zero).

A single run is strictly sequential and reproducible: identical
(topology, routes, workload) inputs give bit-identical metrics. Replications
differ only in the workload seed.

The optional event log is plain text, one event per line:

    <time> arrival <node> <pid> <deadline>
    <time> enqueue <node> <pid>
    <time> grant <sender>-><receiver> <pid>
    <time> complete <sender>-><receiver> <pid>
    <time> deliver <node> <pid>
    <time> miss <node|air> <pid> <dropped|kept>
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np

from .topology import RouteTable, Topology

QUEUED = "queued"
IN_FLIGHT = "in_flight"
DELIVERED = "delivered"
MISSED = "missed"

# event ranks: completions free the channel before same-instant arrivals are
# queued, and a completion landing exactly at the deadline still counts as
# on time because it is processed before the expiry check
_COMPLETE, _ARRIVAL, _EXPIRE = 0, 1, 2


class InvariantError(RuntimeError):
    """The simulator reached a state that violates one of its invariants."""


@dataclass
class Packet:
    id: int
    origin: int
    destination: int
    arrival_time: float
    relative_deadline: float
    size: float
    tx_time: float
    route_hops: int
    tie_key: float
    current_node: int = -1
    hops_traversed: int = 0
    status: str = QUEUED
    delivery_time: Optional[float] = None
    dropped: bool = False

    @property
    def absolute_deadline(self) -> float:
        return self.arrival_time + self.relative_deadline


@dataclass(frozen=True)
class ActiveTransmission:
    sender: int
    receiver: int
    packet_id: int
    completion_time: float


@dataclass(frozen=True)
class SimConfig:
    """Workload and run parameters. Rates are per non-sink node."""

    bandwidth: float = 250_000.0
    packet_size: float = 1_000.0
    deadline_set: tuple = (0.5, 1.0, 2.0)
    arrival_rate: float = 1.0
    duration: float = 30.0
    drop_on_miss: bool = True
    seed: int = 0
    replication_count: int = 1
    stop_at_first_miss: bool = False

    def __post_init__(self):
        if not (self.bandwidth > 0):
            raise ValueError("bandwidth must be > 0")
        if not (self.packet_size > 0):
            raise ValueError("packet_size must be > 0")
        if not self.deadline_set or any(d <= 0 for d in self.deadline_set):
            raise ValueError("deadline_set must be non-empty and positive")
        if self.arrival_rate < 0:
            raise ValueError("arrival_rate must be >= 0")
        if not (self.duration > 0):
            raise ValueError("duration must be > 0")
        if self.replication_count < 1:
            raise ValueError("replication_count must be >= 1")

    @property
    def tx_time(self) -> float:
        return self.packet_size / self.bandwidth


@dataclass(frozen=True)
class Workload:
    """Time-ordered packet arrivals plus an overload warning.

    `overloaded` is set when one node's own traffic alone would claim the
    whole channel (rate * tx_time >= 1); such runs are legitimate for
    overload experiments, so this is a flag, not an error.
    """

    packets: tuple
    overloaded: bool
    seed: int


@dataclass(frozen=True)
class RunMetrics:
    packets_generated: int
    delivered: int
    missed: int
    miss_ratio: float
    capacity_consumption_at_first_miss: Optional[float]
    first_miss_time: Optional[float]
    offered_demand: float
    in_flight_at_end: int
    delays: tuple
    seed: int


@dataclass(frozen=True)
class CriticalCapacity:
    """Minimum capacity consumption at which any replication first missed.

    value is None when no replication observed a miss up to its offered
    demand; miss_observed distinguishes that case from a true zero.
    """

    value: Optional[float]
    miss_observed: bool
    replications: int


def priority_key(packet: Packet):
    """Global deadline-monotonic transmission order: smallest relative
    deadline first, ties broken by the packet's seeded random tie key."""
    return (packet.relative_deadline, packet.tie_key, packet.id)


def generate_workload(topology: Topology, routes: RouteTable, config: SimConfig,
                      seed: Optional[int] = None) -> Workload:
    """Seeded Poisson arrivals at every non-sink node over the run duration.

    Each packet gets a deadline drawn uniformly from the configured set, a
    random priority tie key, and the route of its origin. Packet ids are
    assigned in arrival-time order.
    """
    use_seed = config.seed if seed is None else seed
    rng = np.random.default_rng(use_seed)
    deadlines = list(config.deadline_set)
    tx = config.tx_time
    raw = []
    for node in topology.nodes:
        if node.is_sink or config.arrival_rate == 0:
            continue
        t = 0.0
        while True:
            t += rng.exponential(1.0 / config.arrival_rate)
            if t > config.duration:
                break
            deadline = deadlines[rng.integers(len(deadlines))]
            raw.append((t, node.id, deadline, rng.random()))
    raw.sort()
    packets = []
    for pid, (t, origin, deadline, tie) in enumerate(raw):
        packets.append(Packet(
            id=pid, origin=origin, destination=routes.assigned_sink[origin],
            arrival_time=t, relative_deadline=deadline, size=config.packet_size,
            tx_time=tx, route_hops=routes.hop_count[origin], tie_key=tie,
            current_node=origin))
    overloaded = config.arrival_rate * tx >= 1.0
    return Workload(packets=tuple(packets), overloaded=overloaded, seed=use_seed)


def admissible_transmissions(candidates: Iterable, active: Iterable,
                             adjacency: dict) -> list:
    """Grant head-of-queue transmissions in global priority order under the
    spatial exclusion rule.

    candidates are (packet, sender, receiver) triples. A candidate is granted
    iff its sender is outside radio range of every receiving node, its
    receiver is outside radio range of every sending node (counting both the
    already-active set and grants made earlier in this pass), and neither
    endpoint is already engaged. Returns the granted triples.
    """
    busy = set()
    near_sender = set()    # nodes inside some active sender's range
    near_receiver = set()  # nodes inside some active receiver's range
    for tx in active:
        busy.add(tx.sender)
        busy.add(tx.receiver)
        near_sender.update(adjacency[tx.sender])
        near_receiver.update(adjacency[tx.receiver])

    granted = []
    for packet, sender, receiver in sorted(candidates, key=lambda c: priority_key(c[0])):
        if sender in busy or receiver in busy:
            continue
        if sender in near_receiver or receiver in near_sender:
            continue
        granted.append((packet, sender, receiver))
        busy.add(sender)
        busy.add(receiver)
        near_sender.update(adjacency[sender])
        near_receiver.update(adjacency[receiver])
    return granted


def measured_capacity_consumption(packets: Iterable) -> float:
    """Capacity consumed by the given packets, in bits/s: each packet's
    traversed hop count times its size, normalized by its end-to-end
    deadline."""
    return sum(p.hops_traversed * p.size / p.relative_deadline for p in packets)


def _verify_exclusion(sender: int, receiver: int, active: dict,
                      adjacency: dict) -> None:
    # independent re-check of every grant against the live transmission set
    for tx in active.values():
        if sender in (tx.sender, tx.receiver) or receiver in (tx.sender, tx.receiver):
            raise InvariantError(
                f"node reuse: grant {sender}->{receiver} overlaps "
                f"{tx.sender}->{tx.receiver}")
        if sender in adjacency[tx.receiver]:
            raise InvariantError(
                f"sender {sender} inside range of receiving node {tx.receiver}")
        if receiver in adjacency[tx.sender]:
            raise InvariantError(
                f"receiver {receiver} inside range of sending node {tx.sender}")


class _NodeQueue:
    """Per-node priority queue with lazy removal of dropped packets."""

    __slots__ = ("heap",)

    def __init__(self):
        self.heap = []

    def push(self, packet: Packet):
        heapq.heappush(self.heap, (packet.relative_deadline, packet.tie_key,
                                   packet.id, packet))

    def head(self) -> Optional[Packet]:
        while self.heap:
            packet = self.heap[0][3]
            if packet.dropped:
                heapq.heappop(self.heap)
                continue
            return packet
        return None

    def pop_head(self) -> Packet:
        return heapq.heappop(self.heap)[3]


def run_simulation(topology: Topology, routes: RouteTable, workload: Workload,
                   config: SimConfig, event_log: Optional[list] = None) -> RunMetrics:
    """Event-driven run over the workload; returns the per-run metrics.

    Events are arrivals, transmission completions, and deadline expiries.
    After the events of each instant are applied, the medium is re-arbitrated:
    over every backlogged node when a completion freed the channel, otherwise
    only over the nodes the instant touched (new transmissions can never be
    unblocked elsewhere while the active set only grew). The spatial exclusion
    invariant is re-verified on every grant. Deadline misses are detected
    eagerly by expiry timers so the capacity consumption at the first miss is
    sampled at the right instant.
    """
    if topology.adjacency is None:
        raise ValueError("adjacency not computed yet")
    adjacency = topology.adjacency
    next_hop = routes.next_hop

    packets = [replace(p) for p in workload.packets]
    # time-averaged demand: each packet claims size/deadline at every route
    # node for its deadline window, so the deadline cancels and the demand is
    # bit-hops injected per second
    offered = sum(p.route_hops * p.size for p in packets) / config.duration

    events = []
    seq = 0
    for p in packets:
        events.append((p.arrival_time, _ARRIVAL, seq, p))
        seq += 1
    heapq.heapify(events)

    queues = {node.id: _NodeQueue() for node in topology.nodes}
    backlog = set()
    busy = set()
    active = {}            # packet id -> ActiveTransmission
    # capacity accounting follows the demand model: a packet claims capacity
    # from arrival until its deadline expires, even once delivered; only
    # expiry (miss or deadline passing after delivery) releases the claim
    live = {}              # packet id -> Packet
    log = event_log.append if event_log is not None else None

    delivered = 0
    missed = 0
    delays = []
    first_miss_capacity = None
    first_miss_time = None
    stop = False

    def grant_pass(nodes):
        nonlocal seq
        if not nodes:
            return
        candidates = []
        for v in sorted(nodes):
            if v in busy:
                continue
            head = queues[v].head()
            if head is None:
                backlog.discard(v)
                continue
            candidates.append((head, v, next_hop[v]))
        for packet, s, r in admissible_transmissions(candidates, active.values(),
                                                     adjacency):
            _verify_exclusion(s, r, active, adjacency)
            popped = queues[s].pop_head()
            if popped is not packet:
                raise InvariantError(f"queue head changed under grant at node {s}")
            if queues[s].head() is None:
                backlog.discard(s)
            if packet.status != MISSED:  # the miss label is sticky on kept packets
                packet.status = IN_FLIGHT
            done = now + packet.tx_time
            active[packet.id] = ActiveTransmission(s, r, packet.id, done)
            busy.add(s)
            busy.add(r)
            heapq.heappush(events, (done, _COMPLETE, seq, packet))
            seq += 1
            if log:
                log(f"{now!r} grant {s}->{r} {packet.id}")

    while events and not stop:
        now = events[0][0]
        channel_freed = False
        touched = set()

        while events and events[0][0] == now:
            _, rank, _, packet = heapq.heappop(events)

            if rank == _ARRIVAL:
                packet.status = QUEUED
                packet.current_node = packet.origin
                queues[packet.origin].push(packet)
                backlog.add(packet.origin)
                live[packet.id] = packet
                touched.add(packet.origin)
                heapq.heappush(events, (packet.absolute_deadline, _EXPIRE, seq, packet))
                seq += 1
                if log:
                    log(f"{now!r} arrival {packet.origin} {packet.id} "
                        f"{packet.relative_deadline!r}")

            elif rank == _COMPLETE:
                tx = active.pop(packet.id)
                busy.discard(tx.sender)
                busy.discard(tx.receiver)
                channel_freed = True
                packet.hops_traversed += 1
                packet.current_node = tx.receiver
                if log:
                    log(f"{now!r} complete {tx.sender}->{tx.receiver} {packet.id}")
                if packet.dropped:
                    pass  # missed mid-flight and dropped at hop boundary
                elif tx.receiver == packet.destination:
                    if packet.status == MISSED:
                        pass  # late arrival of a kept packet: contributes nothing
                    else:
                        packet.status = DELIVERED
                        packet.delivery_time = now
                        delivered += 1
                        delays.append(now - packet.arrival_time)
                        if log:
                            log(f"{now!r} deliver {tx.receiver} {packet.id}")
                else:
                    if packet.status != MISSED:
                        packet.status = QUEUED
                    queues[tx.receiver].push(packet)
                    backlog.add(tx.receiver)
                    if log:
                        log(f"{now!r} enqueue {tx.receiver} {packet.id}")

            else:  # _EXPIRE
                if packet.status in (DELIVERED, MISSED):
                    live.pop(packet.id, None)
                    continue
                was_queued = packet.status == QUEUED
                packet.status = MISSED
                missed += 1
                if first_miss_capacity is None:
                    # snapshot includes the packet that just expired
                    first_miss_capacity = measured_capacity_consumption(
                        live.values())
                    first_miss_time = now
                    if config.stop_at_first_miss:
                        stop = True
                live.pop(packet.id, None)
                if config.drop_on_miss:
                    packet.dropped = True
                    if was_queued:
                        touched.add(packet.current_node)
                if log:
                    loc = packet.current_node if was_queued else "air"
                    log(f"{now!r} miss {loc} {packet.id} "
                        f"{'dropped' if config.drop_on_miss else 'kept'}")

        if stop:
            break
        grant_pass(backlog if channel_freed else touched & backlog)

    generated = len(packets)
    in_flight = generated - delivered - missed
    return RunMetrics(
        packets_generated=generated,
        delivered=delivered,
        missed=missed,
        miss_ratio=missed / generated if generated else 0.0,
        capacity_consumption_at_first_miss=first_miss_capacity,
        first_miss_time=first_miss_time,
        offered_demand=offered,
        in_flight_at_end=in_flight,
        delays=tuple(delays),
        seed=workload.seed)


def run_replications(topology: Topology, routes: RouteTable,
                     config: SimConfig) -> list:
    """Independent seeded replications: workload seeds are seed, seed+1, ...
    Results come back in seed order."""
    results = []
    for i in range(config.replication_count):
        workload = generate_workload(topology, routes, config, seed=config.seed + i)
        results.append(run_simulation(topology, routes, workload, config))
    return results


def critical_capacity(metrics: Iterable) -> CriticalCapacity:
    """Minimum over replications of the capacity consumption at first miss."""
    metrics = list(metrics)
    if not metrics:
        raise ValueError("need at least one replication")
    values = [m.capacity_consumption_at_first_miss for m in metrics
              if m.capacity_consumption_at_first_miss is not None]
    if not values:
        return CriticalCapacity(value=None, miss_observed=False,
                                replications=len(metrics))
    return CriticalCapacity(value=min(values), miss_observed=True,
                            replications=len(metrics))


def write_event_log(lines: Iterable, path) -> None:
    with open(path, "w") as fh:
        for line in lines:
            fh.write(line + "\n")
