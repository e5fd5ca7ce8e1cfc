"""Wiring of engine, world, ledger and per-node protocol instances.

One Simulation owns one run. Nothing is shared between instances, so
several runs (e.g. a protocol comparison) can be built side by side.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import scenario as scenario_mod
from .aodv import AodvConfig, AodvNode
from .dsdv import DsdvConfig, DsdvNode
from .engine import Engine
from .metrics import (EventKind, LedgerEvent, MetricsLedger, control_overhead,
                      delay_series, delivery_ratio, mean_value,
                      throughput_series, transmission_efficiency)
from .packets import DataPacket, MessageKind
from .scenario import ScenarioSpec, TrafficFlow
from .world import World

PROTOCOLS = ("aodv", "dsdv")


class NodeInterface:
    """What a protocol state machine is allowed to do to the outside world."""

    def __init__(self, sim: "Simulation", node_id: int):
        self._sim = sim
        self.node_id = node_id

    def now(self) -> float:
        return self._sim.engine.now

    def next_uid(self) -> int:
        return self._sim.world.next_uid()

    def broadcast(self, msg) -> list[int]:
        return self._sim.world.broadcast(self.node_id, msg)

    def unicast(self, next_hop: int, msg) -> bool:
        return self._sim.send_unicast(self.node_id, next_hop, msg)

    def schedule(self, delay: float, action):
        return self._sim.engine.schedule_in(delay, action)

    def cancel(self, handle) -> bool:
        return self._sim.engine.cancel(handle)

    def has_active_flow(self, dst: int) -> bool:
        now = self._sim.engine.now
        return any(f.src == self.node_id and f.dst == dst and now < f.stop
                   for f in self._sim.flows)

    def data_received(self, pkt: DataPacket) -> None:
        self._sim.ledger.record(LedgerEvent(self.now(), EventKind.RECEIVED,
                                            self.node_id, "DATA", pkt.size,
                                            pkt.uid, pkt.src, pkt.dst))

    def data_dropped(self, pkt: DataPacket) -> None:
        self._sim.ledger.record(LedgerEvent(self.now(), EventKind.DROPPED,
                                            self.node_id, "DATA", pkt.size,
                                            pkt.uid, pkt.src, pkt.dst))

    def control_dropped(self, msg) -> None:
        self._sim.ledger.record(LedgerEvent(self.now(), EventKind.DROPPED,
                                            self.node_id, msg.kind.value,
                                            getattr(msg, "size", 0), msg.uid,
                                            getattr(msg, "src", -1),
                                            getattr(msg, "dst", -1)))


@dataclass
class RunReport:
    """Summary of one run; every number is recomputable from the trace."""

    scenario: str
    protocol: str
    seed: int
    sent: int
    received: int
    dropped: int
    unresolved: int
    lost: int
    delivery_ratio: float
    transmission_efficiency: float | None
    mean_throughput_bps: float
    mean_delay_s: float
    mean_route_stretch: float
    control_tx: dict[str, int]
    route_changes: int

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "protocol": self.protocol,
            "seed": self.seed,
            "sent": self.sent,
            "received": self.received,
            "dropped": self.dropped,
            "unresolved": self.unresolved,
            "lost": self.lost,
            "delivery_ratio": self.delivery_ratio,
            "transmission_efficiency": self.transmission_efficiency,
            "mean_throughput_bps": self.mean_throughput_bps,
            "mean_delay_s": self.mean_delay_s,
            "mean_route_stretch": self.mean_route_stretch,
            "control_tx": self.control_tx,
            "route_changes": self.route_changes,
        }


@dataclass
class RunResult:
    spec: ScenarioSpec
    protocol: str
    seed: int
    ledger: MetricsLedger
    route_history: dict[tuple[int, int], list[tuple[float, list[int]]]]
    unresolved_census: int
    route_stretch_samples: list[float] = field(default_factory=list)
    throughput_window: float = 0.5
    throughput_step: float = 0.1

    def route_paths(self, flow: TrafficFlow | None = None) -> list[list[int]]:
        """Distinct complete routes a flow used, in order of appearance."""
        key = (flow.src, flow.dst) if flow else next(iter(self.route_history))
        return [path for _, path in self.route_history.get(key, [])]

    def report(self) -> RunReport:
        led = self.ledger
        try:
            eff = transmission_efficiency(led)
        except Exception:
            eff = None
        tput = throughput_series(led, self.throughput_window,
                                 self.throughput_step, self.spec.end_time)
        delays = delay_series(led)
        changes = sum(max(0, len(h) - 1) for h in self.route_history.values())
        stretch = (sum(self.route_stretch_samples) / len(self.route_stretch_samples)
                   if self.route_stretch_samples else 0.0)
        return RunReport(
            scenario=self.spec.name, protocol=self.protocol, seed=self.seed,
            sent=led.sent, received=led.received, dropped=led.dropped_data,
            unresolved=led.unresolved, lost=led.lost,
            delivery_ratio=delivery_ratio(led),
            transmission_efficiency=eff,
            mean_throughput_bps=mean_value(tput),
            mean_delay_s=mean_value(delays),
            mean_route_stretch=stretch,
            control_tx=control_overhead(led),
            route_changes=changes,
        )


class Simulation:
    """One deterministic run of a scenario under one protocol."""

    def __init__(self, spec: ScenarioSpec, protocol: str = "aodv", seed: int = 0,
                 aodv_config: AodvConfig | None = None,
                 dsdv_config: DsdvConfig | None = None,
                 jitter: float | None = None):
        if protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol '{protocol}'")
        self.spec = spec
        self.protocol = protocol
        self.seed = seed
        self.engine = Engine(seed=seed)
        self.ledger = MetricsLedger()
        self.world = World(self.engine, list(spec.nodes), spec.radio,
                           ledger=self.ledger, jitter=jitter)
        self.world.deliver = self._deliver
        self.flows = list(spec.flows)
        self.aodv_config = aodv_config or AodvConfig()
        self.dsdv_config = dsdv_config or DsdvConfig()
        if protocol == "aodv":
            self.nodes = [AodvNode(i, NodeInterface(self, i), self.aodv_config)
                          for i in range(spec.node_count)]
        else:
            self.nodes = [DsdvNode(i, NodeInterface(self, i), self.dsdv_config)
                          for i in range(spec.node_count)]
        self.in_flight_data = 0
        self.route_history: dict[tuple[int, int], list[tuple[float, list[int]]]] = {
            (f.src, f.dst): [] for f in self.flows}
        self.route_stretch_samples: list[float] = []
        self.event_hooks = []   # callables run after every processed event
        self.engine.after_event = self._after_event
        self._compiled = scenario_mod.compile(spec, self)
        self._schedule_protocol_ticks()

    # -- construction helpers ----------------------------------------------

    def _schedule_protocol_ticks(self) -> None:
        if self.protocol == "aodv":
            interval = self.aodv_config.hello_interval
            if interval > 0:
                for node in self.nodes:
                    self._tick_chain(interval, node.hello_tick, interval)
        else:
            interval = self.dsdv_config.update_interval
            for node in self.nodes:
                self._tick_chain(0.0, node.periodic_dump, interval)

    def _tick_chain(self, first_at: float, action, interval: float) -> None:
        def tick():
            action()
            if self.engine.now + interval <= self.spec.end_time:
                self.engine.schedule_in(interval, tick)
        self.engine.schedule(first_at, tick)

    # -- engine plumbing -----------------------------------------------------

    def send_unicast(self, sender: int, next_hop: int, msg) -> bool:
        from .world import UnicastOutcome
        outcome = self.world.unicast(sender, next_hop, msg)
        sent = outcome is UnicastOutcome.SENT
        if sent and msg.kind is MessageKind.DATA:
            self.in_flight_data += 1
        return sent

    def _deliver(self, receiver: int, sender: int, msg) -> None:
        if msg.kind is MessageKind.DATA:
            self.in_flight_data -= 1
        self.nodes[receiver].on_receive(sender, msg)

    def emit_data(self, flow: TrafficFlow) -> DataPacket:
        pkt = DataPacket(uid=self.world.next_uid(), src=flow.src, dst=flow.dst,
                         size=flow.packet_size, sent_at=self.engine.now)
        self.ledger.record(LedgerEvent(self.engine.now, EventKind.SENT, flow.src,
                                       "DATA", pkt.size, pkt.uid, pkt.src, pkt.dst))
        self.nodes[flow.src].originate_data(pkt)
        return pkt

    def _after_event(self) -> None:
        t = self.engine.now
        for key, history in self.route_history.items():
            path = self.walk_route(*key)
            if path is not None and (not history or history[-1][1] != path):
                history.append((t, path))
                shortest = self._bfs_hops(*key)
                if shortest is not None:
                    self.route_stretch_samples.append(len(path) - 1 - shortest)
        for hook in self.event_hooks:
            hook()

    # -- inspection ----------------------------------------------------------

    def _bfs_hops(self, src: int, dst: int) -> int | None:
        """Minimum hop count in the connectivity graph frozen at the clock."""
        t = self.engine.now
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in self.world.node_ids():
                    if v not in dist and self.world.in_range(u, v, t):
                        dist[v] = dist[u] + 1
                        if v == dst:
                            return dist[v]
                        nxt.append(v)
            frontier = nxt
        return dist.get(dst)

    def walk_route(self, src: int, dst: int) -> list[int] | None:
        """Follow next hops from src; None unless a complete path exists."""
        path = [src]
        current = src
        seen = {src}
        while current != dst:
            nxt = self.nodes[current].next_hop_for(dst)
            if nxt is None or nxt in seen:
                return None
            path.append(nxt)
            seen.add(nxt)
            current = nxt
        return path

    def next_hop_graph(self, dst: int) -> dict[int, int]:
        """node -> active next hop toward dst, for loop-freedom checks."""
        graph = {}
        for node in self.nodes:
            if node.node_id == dst:
                continue
            nxt = node.next_hop_for(dst)
            if nxt is not None:
                graph[node.node_id] = nxt
        return graph

    def unresolved_census(self) -> int:
        """Packets still buffered at nodes or in flight when the run ended."""
        return self.in_flight_data + sum(n.queued_count() for n in self.nodes)

    # -- running -------------------------------------------------------------

    def run(self) -> RunResult:
        self.engine.run_until(self.spec.end_time)
        return RunResult(spec=self.spec, protocol=self.protocol, seed=self.seed,
                         ledger=self.ledger, route_history=self.route_history,
                         unresolved_census=self.unresolved_census(),
                         route_stretch_samples=self.route_stretch_samples)


def run_scenario(spec: ScenarioSpec, protocol: str = "aodv", seed: int = 0,
                 **kwargs) -> RunResult:
    return Simulation(spec, protocol=protocol, seed=seed, **kwargs).run()
