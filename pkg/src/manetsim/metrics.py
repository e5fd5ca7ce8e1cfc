"""Append-only measurement ledger and every series derived from it.

All reported numbers are pure functions of the ledger, so a persisted
trace can be parsed back and must reproduce them bit-identically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, TextIO

from .errors import (
    BadDurationError,
    DegenerateTrajectoryError,
    LedgerConsistencyError,
    LedgerOrderError,
    NoTransmissionsError,
    ZeroLengthError,
)


class EventKind(Enum):
    SENT = "s"          # application-level origination, once per packet
    RECEIVED = "r"      # consumed at its destination
    DROPPED = "d"       # lost, with the subkind saying what was lost
    CONTROL_TX = "c"    # one protocol-message transmission
    DATA_TX = "f"       # one per-hop data-frame transmission


@dataclass(frozen=True)
class LedgerEvent:
    t: float
    kind: EventKind
    node: int
    subkind: str        # DATA or a control-message name
    size: int
    uid: int
    src: int
    dst: int


@dataclass(frozen=True)
class SeriesPoint:
    t: float
    value: float


class MetricsLedger:
    """Single-writer event log with running counters."""

    def __init__(self):
        self.events: list[LedgerEvent] = []
        self._sent_uids: set[int] = set()
        self._control_uids: set[int] = set()
        self.sent = 0
        self.received = 0
        self.dropped_data = 0
        self.dropped_control = 0
        self.data_tx = 0
        self.control_tx: dict[str, int] = {}

    def record(self, ev: LedgerEvent) -> None:
        if self.events and ev.t < self.events[-1].t:
            raise LedgerOrderError(f"event at {ev.t} after {self.events[-1].t}")
        if ev.kind is EventKind.SENT:
            if ev.uid in self._sent_uids:
                raise LedgerConsistencyError(f"duplicate sent uid {ev.uid}")
            self._sent_uids.add(ev.uid)
            self.sent += 1
        elif ev.kind is EventKind.RECEIVED:
            if ev.uid not in self._sent_uids:
                raise LedgerConsistencyError(f"received unknown uid {ev.uid}")
            self.received += 1
        elif ev.kind is EventKind.DROPPED:
            if ev.subkind == "DATA":
                if ev.uid not in self._sent_uids:
                    raise LedgerConsistencyError(f"dropped unknown uid {ev.uid}")
                self.dropped_data += 1
            else:
                if ev.uid not in self._control_uids:
                    raise LedgerConsistencyError(f"dropped unknown control uid {ev.uid}")
                self.dropped_control += 1
        elif ev.kind is EventKind.CONTROL_TX:
            self._control_uids.add(ev.uid)
            self.control_tx[ev.subkind] = self.control_tx.get(ev.subkind, 0) + 1
        elif ev.kind is EventKind.DATA_TX:
            self.data_tx += 1
        self.events.append(ev)

    @property
    def unresolved(self) -> int:
        """Packets neither delivered nor dropped by the end of the log."""
        return self.sent - self.received - self.dropped_data

    @property
    def lost(self) -> int:
        """Paper-style packet loss: explicit drops plus unresolved leftovers."""
        return self.dropped_data + self.unresolved


def delivery_ratio(ledger: MetricsLedger) -> float:
    """Messages received over messages sent; vacuously 1.0 with no traffic."""
    if ledger.sent == 0:
        return 1.0
    return ledger.received / ledger.sent


def transmission_efficiency(ledger: MetricsLedger) -> float:
    """Delivered packets over per-hop data transmissions used."""
    if ledger.data_tx == 0:
        raise NoTransmissionsError("no data transmissions in ledger")
    return ledger.received / ledger.data_tx


def throughput_series(ledger: MetricsLedger, window: float = 0.5,
                      step: float = 0.1, t_end: float | None = None) -> list[SeriesPoint]:
    """Delivered payload bits per second over a sliding window.

    One point per window position, at the window's trailing edge.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    receives = [(e.t, e.size) for e in ledger.events if e.kind is EventKind.RECEIVED]
    if t_end is None:
        t_end = ledger.events[-1].t if ledger.events else 0.0
    points = []
    k = 0
    while window + k * step <= t_end + 1e-9:
        t = window + k * step
        bits = sum(size * 8 for (rt, size) in receives if t - window < rt <= t)
        points.append(SeriesPoint(t, bits / window))
        k += 1
    return points


def delay_series(ledger: MetricsLedger) -> list[SeriesPoint]:
    """One point per delivered packet: (receive time, end-to-end delay)."""
    sent_at = {e.uid: e.t for e in ledger.events if e.kind is EventKind.SENT}
    points = [SeriesPoint(e.t, e.t - sent_at[e.uid])
              for e in ledger.events if e.kind is EventKind.RECEIVED]
    points.sort(key=lambda p: (p.t, p.value))
    return points


def control_overhead(ledger: MetricsLedger) -> dict[str, int]:
    """Transmission counts per control subkind plus a 'total' entry."""
    counts = dict(sorted(ledger.control_tx.items()))
    counts["total"] = sum(ledger.control_tx.values())
    return counts


def density(node_count: int, length_km: float) -> float:
    """Vehicles occupying a given length of highway, per km."""
    if length_km <= 0:
        raise ZeroLengthError("segment length must be positive")
    return node_count / length_km


def flow_rate(crossings: int, duration_s: float) -> float:
    """Hourly rate of vehicles passing a point, observed for under an hour."""
    if not 0 < duration_s <= 3600:
        raise BadDurationError(f"duration {duration_s}s outside (0, 3600]")
    return crossings * 3600.0 / duration_s


def mean_speed(trajectory: list[tuple[float, tuple[float, float]]]) -> float:
    """Path length over elapsed time for a sampled trajectory."""
    if len(trajectory) < 2:
        raise DegenerateTrajectoryError("need at least two samples")
    times = [t for t, _ in trajectory]
    if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
        raise DegenerateTrajectoryError("sample times must strictly increase")
    path = 0.0
    for (_, a), (_, b) in zip(trajectory, trajectory[1:]):
        path += math.hypot(b[0] - a[0], b[1] - a[1])
    return path / (times[-1] - times[0])


def mean_value(series: list[SeriesPoint]) -> float:
    if not series:
        return 0.0
    return sum(p.value for p in series) / len(series)


# ---------------------------------------------------------------------------
# persistence: line-oriented trace, xgraph-style plot data

_TRACE_FMT = "{kind} {t:.6f} {node} {subkind} {size} {uid} {src} {dst}\n"


def format_trace_line(ev: LedgerEvent) -> str:
    return _TRACE_FMT.format(kind=ev.kind.value, t=ev.t, node=ev.node,
                             subkind=ev.subkind, size=ev.size, uid=ev.uid,
                             src=ev.src, dst=ev.dst)


def write_trace(ledger: MetricsLedger, out: TextIO) -> None:
    for ev in ledger.events:
        out.write(format_trace_line(ev))


def parse_trace(lines: Iterable[str]) -> MetricsLedger:
    """Rebuild a ledger from its persisted trace."""
    kinds = {k.value: k for k in EventKind}
    ledger = MetricsLedger()
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        kind, t, node, subkind, size, uid, src, dst = raw.split(" ")
        ledger.record(LedgerEvent(float(t), kinds[kind], int(node), subkind,
                                  int(size), int(uid), int(src), int(dst)))
    return ledger


def emit_plot(series: list[SeriesPoint], title: str, out: TextIO) -> None:
    """Write one series as xgraph-style time/value pairs."""
    if title:
        out.write(f"TitleText: {title}\n")
    for p in series:
        out.write(f"{p.t:.6f} {p.value:.6f}\n")


def emit_plot_datasets(datasets: list[list[SeriesPoint]], title: str, out: TextIO) -> None:
    """Several series in one file, blank-line separated, shared title."""
    if title:
        out.write(f"TitleText: {title}\n")
    for i, series in enumerate(datasets):
        if i:
            out.write("\n")
        for p in series:
            out.write(f"{p.t:.6f} {p.value:.6f}\n")
