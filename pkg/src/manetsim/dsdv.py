"""Per-node DSDV state machine.

Proactive table-driven baseline: every node keeps a route to every
known destination, re-broadcasts its full table periodically, and
floods incremental updates the moment anything changes. Freshness is
carried by per-destination sequence numbers; even numbers mean
reachable, odd numbers mark a break.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .packets import DataPacket, MessageKind

UPDATE_BASE_SIZE = 8
UPDATE_PER_ENTRY_SIZE = 12


@dataclass
class UpdatePacket:
    """Route advertisement; hops is None for an unreachable marker."""

    origin: int
    entries: list[tuple[int, int, int | None]]  # (dst, dst_seq, hops)
    full_dump: bool
    uid: int
    dst: int = -1

    kind = MessageKind.DSDV_UPDATE

    @property
    def src(self) -> int:
        return self.origin

    @property
    def size(self) -> int:
        return UPDATE_BASE_SIZE + UPDATE_PER_ENTRY_SIZE * len(self.entries)


@dataclass
class DsdvEntry:
    dst: int
    next_hop: int
    hop_count: int | None   # None once the route is marked broken
    dst_seq: int
    install_time: float

    @property
    def broken(self) -> bool:
        return self.dst_seq % 2 == 1


class ForwardAction(Enum):
    FORWARDED = "forwarded"
    DROPPED = "dropped"


@dataclass(frozen=True)
class DsdvConfig:
    update_interval: float = 1.0


class DsdvNode:
    """One node's table plus the periodic/triggered advertisement logic."""

    def __init__(self, node_id: int, iface, config: DsdvConfig = DsdvConfig()):
        self.node_id = node_id
        self.iface = iface
        self.config = config
        self.table: dict[int, DsdvEntry] = {
            node_id: DsdvEntry(node_id, node_id, 0, 0, 0.0)}

    @property
    def own_entry(self) -> DsdvEntry:
        return self.table[self.node_id]

    def next_hop_for(self, dst: int) -> int | None:
        e = self.table.get(dst)
        if dst == self.node_id or e is None or e.broken:
            return None
        return e.next_hop

    def route_snapshot(self) -> dict[int, tuple[int, int | None, int, bool]]:
        return {dst: (e.next_hop, e.hop_count, e.dst_seq, not e.broken)
                for dst, e in sorted(self.table.items()) if dst != self.node_id}

    def queued_count(self) -> int:
        return 0    # table-driven: nothing is ever buffered

    # -- advertisements ----------------------------------------------------

    def periodic_dump(self) -> UpdatePacket:
        """Advertise the full table with a fresh (still even) own sequence."""
        self.own_entry.dst_seq += 2
        pkt = UpdatePacket(origin=self.node_id,
                           entries=self._advertised_entries(),
                           full_dump=True, uid=self.iface.next_uid())
        self.iface.broadcast(pkt)
        return pkt

    def triggered_update(self, changes: list[DsdvEntry]) -> UpdatePacket:
        """Flood changed entries immediately; breaks carry odd sequences."""
        pkt = UpdatePacket(origin=self.node_id,
                           entries=[(e.dst, e.dst_seq, e.hop_count) for e in changes],
                           full_dump=False, uid=self.iface.next_uid())
        self.iface.broadcast(pkt)
        return pkt

    def _advertised_entries(self) -> list[tuple[int, int, int | None]]:
        return [(e.dst, e.dst_seq, e.hop_count) for _, e in sorted(self.table.items())]

    def handle_update(self, sender: int, pkt: UpdatePacket) -> int:
        """Adopt fresher or shorter advertisements; re-flood what changed."""
        now = self.iface.now()
        changed: list[DsdvEntry] = []
        for dst, seq, hops in pkt.entries:
            if dst == self.node_id:
                continue
            broken = seq % 2 == 1 or hops is None
            metric = None if broken else hops + 1
            existing = self.table.get(dst)
            if existing is None:
                if broken:
                    continue    # nothing to tear down for an unknown destination
                adopt = True
            elif seq > existing.dst_seq:
                adopt = True
            elif (seq == existing.dst_seq and not broken and not existing.broken
                  and metric < existing.hop_count):
                adopt = True
            else:
                adopt = False
            if adopt:
                entry = DsdvEntry(dst, sender, metric, seq, now)
                self.table[dst] = entry
                changed.append(entry)
        if changed:
            self.triggered_update(changed)
        return len(changed)

    # -- data path ---------------------------------------------------------

    def forward_data(self, packet: DataPacket) -> ForwardAction:
        """Unicast via the current table; no discovery, no buffering."""
        if packet.dst == self.node_id:
            self.iface.data_received(packet)
            return ForwardAction.FORWARDED
        e = self.table.get(packet.dst)
        if e is None or e.broken:
            self.iface.data_dropped(packet)
            return ForwardAction.DROPPED
        if self.iface.unicast(e.next_hop, packet):
            return ForwardAction.FORWARDED
        self.iface.data_dropped(packet)
        self.mark_broken(e.next_hop)
        return ForwardAction.DROPPED

    # the engine drives both protocols through the same entry points
    originate_data = forward_data

    def mark_broken(self, dead_neighbor: int) -> list[DsdvEntry]:
        """Poison every route through a lost neighbor and flood the news."""
        changed = []
        for e in self.table.values():
            if e.dst != self.node_id and not e.broken and e.next_hop == dead_neighbor:
                e.dst_seq += 1
                e.hop_count = None
                changed.append(e)
        if changed:
            self.triggered_update(changed)
        return changed

    def on_receive(self, sender: int, msg) -> None:
        if msg.kind is MessageKind.DATA:
            self.forward_data(msg)
        elif msg.kind is MessageKind.DSDV_UPDATE:
            self.handle_update(sender, msg)
