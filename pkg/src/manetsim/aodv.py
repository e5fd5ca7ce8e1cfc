"""Per-node AODV state machine.

Routes are built only when traffic needs them: a source floods a route
request, the destination (or a node with a fresh-enough cached route)
unicasts a reply back along the stored reverse path, and data then
follows the installed next hops. Link breaks poison the affected
entries and push route errors upstream to the precursors.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .packets import DataPacket, MessageKind

RREQ_SIZE = 24
RREP_SIZE = 20
HELLO_SIZE = 20
RERR_BASE_SIZE = 4
RERR_PER_DEST_SIZE = 8


@dataclass
class Rreq:
    """Flooded route request; (src, bcast_id) identifies one discovery."""

    src: int
    src_seq: int
    bcast_id: int
    dst: int
    dst_last_seq: int
    hop_count: int
    uid: int

    kind = MessageKind.RREQ
    size = RREQ_SIZE


@dataclass
class Rrep:
    """Route reply, unicast hop by hop back toward the discovery source."""

    src: int            # discovery originator the reply travels toward
    dst: int            # destination the new route leads to
    dst_seq: int
    hop_count: int
    lifetime: float
    uid: int

    kind = MessageKind.RREP
    size = RREP_SIZE


@dataclass
class Rerr:
    """Route error listing destinations that became unreachable."""

    unreachable: list[tuple[int, int]]  # (dst, dst_seq) pairs
    uid: int
    src: int = -1
    dst: int = -1

    kind = MessageKind.RERR

    @property
    def size(self) -> int:
        return RERR_BASE_SIZE + RERR_PER_DEST_SIZE * len(self.unreachable)


@dataclass
class Hello:
    """Periodic beacon; receipt only refreshes neighbor liveness."""

    src: int
    uid: int
    dst: int = -1

    kind = MessageKind.HELLO
    size = HELLO_SIZE


@dataclass
class RouteEntry:
    dst: int
    next_hop: int
    hop_count: int
    dst_seq: int
    expires_at: float
    active: bool = True
    precursors: set[int] = field(default_factory=set)


@dataclass
class ReversePathEntry:
    toward: int         # the RREQ source this path leads back to
    via: int            # neighbor the request arrived from
    expires_at: float


@dataclass
class PendingDiscovery:
    dst: int
    retries_left: int
    timer: object


class ForwardAction(Enum):
    FORWARDED = "forwarded"
    BUFFERED = "buffered"
    DROPPED = "dropped"


class RreqAction(Enum):
    DUPLICATE = "duplicate"
    REPLIED = "replied"
    FORWARDED = "forwarded"


@dataclass(frozen=True)
class AodvConfig:
    active_route_timeout: float = 3.0
    reverse_path_lifetime: float = 1.0
    rrep_wait: float = 0.2
    discovery_retries: int = 2      # retries after the first attempt
    buffer_capacity: int = 64       # per destination, drop-oldest
    hello_interval: float = 1.0     # <= 0 disables the hello subsystem
    allowed_hello_loss: int = 2
    hello_always: bool = False      # beacon even with no active route
    flush_gap: float = 0.0001       # frame serialization while draining a buffer


class AodvNode:
    """One node's routing state, driven entirely by the engine loop."""

    def __init__(self, node_id: int, iface, config: AodvConfig = AodvConfig()):
        self.node_id = node_id
        self.iface = iface
        self.config = config
        self.own_seq = 0
        self.bcast_id = 0
        self.routes: dict[int, RouteEntry] = {}
        self.reverse_paths: dict[int, ReversePathEntry] = {}
        self.seen_rreqs: set[tuple[int, int]] = set()
        self.pending: dict[int, PendingDiscovery] = {}
        self.queues: dict[int, deque[DataPacket]] = {}
        self.hello_last_heard: dict[int, float] = {}

    # -- route table -------------------------------------------------------

    def route_is_active(self, dst: int) -> bool:
        e = self.routes.get(dst)
        return e is not None and e.active and e.expires_at > self.iface.now()

    def next_hop_for(self, dst: int) -> int | None:
        if self.route_is_active(dst):
            return self.routes[dst].next_hop
        return None

    def update_route(self, candidate: RouteEntry) -> bool:
        """Install candidate iff it is fresher, or equally fresh and shorter."""
        existing = self.routes.get(candidate.dst)
        if existing is not None:
            fresher = candidate.dst_seq > existing.dst_seq
            shorter = (candidate.dst_seq == existing.dst_seq
                       and candidate.hop_count < existing.hop_count)
            if not (fresher or shorter):
                return False
            candidate.precursors |= existing.precursors
        self.routes[candidate.dst] = candidate
        return True

    def expire_routes(self) -> list[int]:
        """Mark timed-out entries inactive; returns the newly expired dsts."""
        now = self.iface.now()
        expired = []
        for e in self.routes.values():
            if e.active and e.expires_at <= now:
                e.active = False
                expired.append(e.dst)
        return expired

    def route_snapshot(self) -> dict[int, tuple[int, int, int, bool]]:
        """dst -> (next_hop, hop_count, dst_seq, active) for checkers and traces."""
        now = self.iface.now()
        return {dst: (e.next_hop, e.hop_count, e.dst_seq,
                      e.active and e.expires_at > now)
                for dst, e in sorted(self.routes.items())}

    def queued_count(self) -> int:
        return sum(len(q) for q in self.queues.values())

    # -- data path ---------------------------------------------------------

    def originate_data(self, packet: DataPacket) -> ForwardAction:
        """Send along an active route, or buffer and start discovery."""
        if self.route_is_active(packet.dst):
            return (ForwardAction.FORWARDED if self._transmit(packet)
                    else ForwardAction.DROPPED)
        self._enqueue(packet)
        if packet.dst not in self.pending:
            self.start_discovery(packet.dst)
        return ForwardAction.BUFFERED

    def _enqueue(self, packet: DataPacket) -> None:
        q = self.queues.setdefault(packet.dst, deque())
        if len(q) >= self.config.buffer_capacity:
            oldest = q.popleft()
            self.iface.data_dropped(oldest)
        q.append(packet)

    def _transmit(self, packet: DataPacket) -> bool:
        entry = self.routes[packet.dst]
        if self.iface.unicast(entry.next_hop, packet):
            entry.expires_at = self.iface.now() + self.config.active_route_timeout
            return True
        self.iface.data_dropped(packet)
        self.on_link_break(entry.next_hop)
        return False

    def _handle_data(self, packet: DataPacket) -> None:
        if packet.dst == self.node_id:
            self.iface.data_received(packet)
            return
        if self.route_is_active(packet.dst):
            self._transmit(packet)
        else:
            # no repair at relays; only the source rediscovers
            self.iface.data_dropped(packet)

    def _drain_one(self, dst: int) -> None:
        q = self.queues.get(dst)
        if not q:
            return
        if self.route_is_active(dst):
            self._transmit(q.popleft())
        elif dst not in self.pending:
            self.start_discovery(dst)

    # -- discovery ---------------------------------------------------------

    def start_discovery(self, dst: int) -> Rreq:
        """Flood a fresh RREQ and arm the reply-wait timer."""
        assert dst not in self.pending, "discovery already pending"
        rreq = self._broadcast_rreq(dst)
        timer = self.iface.schedule(self.config.rrep_wait,
                                    lambda: self._discovery_timeout(dst))
        self.pending[dst] = PendingDiscovery(dst, self.config.discovery_retries, timer)
        return rreq

    def _broadcast_rreq(self, dst: int) -> Rreq:
        self.own_seq += 1
        self.bcast_id += 1
        last_seq = self.routes[dst].dst_seq if dst in self.routes else 0
        rreq = Rreq(src=self.node_id, src_seq=self.own_seq, bcast_id=self.bcast_id,
                    dst=dst, dst_last_seq=last_seq, hop_count=0,
                    uid=self.iface.next_uid())
        self.seen_rreqs.add((self.node_id, self.bcast_id))
        self.iface.broadcast(rreq)
        return rreq

    def _discovery_timeout(self, dst: int) -> None:
        pd = self.pending.get(dst)
        if pd is None:
            return
        if pd.retries_left > 0:
            pd.retries_left -= 1
            self._broadcast_rreq(dst)
            pd.timer = self.iface.schedule(self.config.rrep_wait,
                                           lambda: self._discovery_timeout(dst))
            return
        # retries exhausted: everything waiting for this route is lost
        del self.pending[dst]
        q = self.queues.get(dst)
        while q:
            self.iface.data_dropped(q.popleft())

    def handle_rreq(self, sender: int, rreq: Rreq) -> RreqAction:
        key = (rreq.src, rreq.bcast_id)
        if key in self.seen_rreqs:
            return RreqAction.DUPLICATE
        self.seen_rreqs.add(key)
        now = self.iface.now()
        self.reverse_paths[rreq.src] = ReversePathEntry(
            toward=rreq.src, via=sender,
            expires_at=now + self.config.reverse_path_lifetime)

        if rreq.dst == self.node_id:
            # answering destination: never reply with anything staler than
            # the poisoned sequence number the source is asking about
            self.own_seq = max(self.own_seq, rreq.dst_last_seq) + 1
            rrep = Rrep(src=rreq.src, dst=self.node_id, dst_seq=self.own_seq,
                        hop_count=0, lifetime=self.config.active_route_timeout,
                        uid=self.iface.next_uid())
            self.iface.unicast(sender, rrep)
            return RreqAction.REPLIED

        cached = self.routes.get(rreq.dst)
        if (self.route_is_active(rreq.dst)
                and cached.dst_seq >= rreq.dst_last_seq):
            rrep = Rrep(src=rreq.src, dst=rreq.dst, dst_seq=cached.dst_seq,
                        hop_count=cached.hop_count,
                        lifetime=cached.expires_at - now,
                        uid=self.iface.next_uid())
            if self.iface.unicast(sender, rrep):
                cached.precursors.add(sender)
            return RreqAction.REPLIED

        fwd = Rreq(src=rreq.src, src_seq=rreq.src_seq, bcast_id=rreq.bcast_id,
                   dst=rreq.dst, dst_last_seq=rreq.dst_last_seq,
                   hop_count=rreq.hop_count + 1, uid=self.iface.next_uid())
        self.iface.broadcast(fwd)
        return RreqAction.FORWARDED

    def handle_rrep(self, sender: int, rrep: Rrep) -> None:
        now = self.iface.now()
        installed = self.update_route(RouteEntry(dst=rrep.dst, next_hop=sender,
                                                 hop_count=rrep.hop_count + 1,
                                                 dst_seq=rrep.dst_seq,
                                                 expires_at=now + rrep.lifetime))
        if rrep.src == self.node_id:
            if self.route_is_active(rrep.dst):
                pd = self.pending.pop(rrep.dst, None)
                if pd is not None:
                    self.iface.cancel(pd.timer)
                self._flush_queue(rrep.dst)
            return

        if not installed:
            return  # a better reply already went upstream; first-wins
        rp = self.reverse_paths.get(rrep.src)
        if rp is None or rp.expires_at <= now:
            # reverse path gone: the reply cannot travel further
            self.iface.control_dropped(rrep)
            return
        fwd = Rrep(src=rrep.src, dst=rrep.dst, dst_seq=rrep.dst_seq,
                   hop_count=rrep.hop_count + 1, lifetime=rrep.lifetime,
                   uid=self.iface.next_uid())
        if self.iface.unicast(rp.via, fwd):
            entry = self.routes.get(rrep.dst)
            if entry is not None:
                entry.precursors.add(rp.via)

    def _flush_queue(self, dst: int) -> None:
        q = self.queues.get(dst)
        if not q:
            return
        # one frame per serialization slot keeps FIFO order on the air
        for k in range(len(q)):
            self.iface.schedule(k * self.config.flush_gap,
                                lambda: self._drain_one(dst))

    # -- maintenance -------------------------------------------------------

    def on_link_break(self, dead_neighbor: int) -> Rerr | None:
        """Invalidate routes through a lost neighbor and warn the precursors."""
        affected = [e for e in self.routes.values()
                    if e.active and e.expires_at > self.iface.now()
                    and e.next_hop == dead_neighbor]
        # either detection path (failed unicast, hello silence) may fire first;
        # dropping the supervision entry keeps the second one from re-firing
        self.hello_last_heard.pop(dead_neighbor, None)
        if not affected:
            return None
        unreachable = []
        precursors: set[int] = set()
        for e in affected:
            e.active = False
            e.dst_seq += 1          # poison stale copies downstream of us
            unreachable.append((e.dst, e.dst_seq))
            precursors |= e.precursors
        for dst, _ in unreachable:
            q = self.queues.get(dst)
            while q:
                self.iface.data_dropped(q.popleft())
        rerr = Rerr(unreachable=unreachable, uid=self.iface.next_uid(),
                    src=self.node_id)
        for p in sorted(precursors):
            self.iface.unicast(p, Rerr(unreachable=list(unreachable),
                                       uid=self.iface.next_uid(),
                                       src=self.node_id, dst=p))
        self._reinitiate_needed(unreachable)
        return rerr

    def handle_rerr(self, sender: int, rerr: Rerr) -> None:
        invalidated = []
        precursors: set[int] = set()
        for dst, seq in rerr.unreachable:
            e = self.routes.get(dst)
            if (e is not None and e.active and e.next_hop == sender
                    and e.dst_seq <= seq):
                e.active = False
                e.dst_seq = seq
                invalidated.append((dst, seq))
                precursors |= e.precursors
        if not invalidated:
            return
        for p in sorted(precursors):
            self.iface.unicast(p, Rerr(unreachable=list(invalidated),
                                       uid=self.iface.next_uid(),
                                       src=self.node_id, dst=p))
        self._reinitiate_needed(invalidated)

    def _reinitiate_needed(self, unreachable: list[tuple[int, int]]) -> None:
        # a source with traffic still scheduled rediscovers right away
        for dst, _ in unreachable:
            if dst not in self.pending and self.iface.has_active_flow(dst):
                self.start_discovery(dst)

    # -- hello beaconing ---------------------------------------------------

    def hello_tick(self) -> None:
        """Check supervised neighbors for silence, then maybe beacon."""
        if self.config.hello_interval <= 0:
            return
        now = self.iface.now()
        threshold = self.config.allowed_hello_loss * self.config.hello_interval
        for n, last in sorted(self.hello_last_heard.items()):
            if now - last > threshold:
                self.on_link_break(n)
        if self.config.hello_always or self._has_any_active_route():
            self.iface.broadcast(Hello(src=self.node_id, uid=self.iface.next_uid()))

    def _has_any_active_route(self) -> bool:
        now = self.iface.now()
        return any(e.active and e.expires_at > now for e in self.routes.values())

    # -- dispatch ----------------------------------------------------------

    def on_receive(self, sender: int, msg) -> None:
        # any frame from a supervised neighbor proves it is still there
        if msg.kind is MessageKind.HELLO or sender in self.hello_last_heard:
            self.hello_last_heard[sender] = self.iface.now()
        if msg.kind is MessageKind.DATA:
            self._handle_data(msg)
        elif msg.kind is MessageKind.RREQ:
            self.handle_rreq(sender, msg)
        elif msg.kind is MessageKind.RREP:
            self.handle_rrep(sender, msg)
        elif msg.kind is MessageKind.RERR:
            self.handle_rerr(sender, msg)
