"""Scenario model, text format, validation, and the two built-in layouts.

File format (one directive per line, '#' starts a comment):

    area <width> <height>
    range <meters>
    node <id> <x> <y>
    move <t> <id> <dest_x> <dest_y> <speed>
    flow <src> <dst> <rate_pps> <size_bytes> <start> <stop>
    end <t>
"""
from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass, field

from .errors import ScenarioSemanticError, ScenarioSyntaxError, UnknownScenarioError
from .world import Position, RadioModel

DEFAULT_RANGE = 250.0
DEFAULT_HOP_LATENCY = 0.001
BUILTIN_NAMES = ("scenario1", "scenario2")


@dataclass(frozen=True)
class Movement:
    start_time: float
    node: int
    dest: Position
    speed: float


@dataclass(frozen=True)
class TrafficFlow:
    src: int
    dst: int
    rate: float         # packets per second
    packet_size: int    # bytes
    start: float
    stop: float


@dataclass(frozen=True)
class ScenarioSpec:
    area: tuple[float, float]
    radio: RadioModel
    nodes: list[Position]               # index is the node id
    movements: list[Movement]
    flows: list[TrafficFlow]
    end_time: float
    name: str = field(default="custom", compare=False)

    @property
    def node_count(self) -> int:
        return len(self.nodes)


def parse(text: str, name: str = "custom") -> ScenarioSpec:
    """Parse and validate a scenario file."""
    area = None
    radio_range = None
    nodes: dict[int, Position] = {}
    movements: list[Movement] = []
    flows: list[TrafficFlow] = []
    end_time = None
    saw_directive = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        saw_directive = True
        fields = line.split()
        directive, args = fields[0], fields[1:]

        def nums(n):
            if len(args) != n:
                raise ScenarioSyntaxError(
                    f"'{directive}' expects {n} values, got {len(args)}", lineno)
            try:
                return [float(a) for a in args]
            except ValueError:
                raise ScenarioSyntaxError(f"non-numeric value in '{line}'", lineno)

        if directive == "area":
            w, h = nums(2)
            area = (w, h)
        elif directive == "range":
            (radio_range,) = nums(1)
        elif directive == "node":
            nid, x, y = nums(3)
            if int(nid) != nid:
                raise ScenarioSyntaxError("node id must be an integer", lineno)
            if int(nid) in nodes:
                raise ScenarioSemanticError(f"duplicate node id {int(nid)}")
            nodes[int(nid)] = Position(x, y)
        elif directive == "move":
            t, nid, x, y, speed = nums(5)
            movements.append(Movement(t, int(nid), Position(x, y), speed))
        elif directive == "flow":
            src, dst, rate, size, start, stop = nums(6)
            flows.append(TrafficFlow(int(src), int(dst), rate, int(size), start, stop))
        elif directive == "end":
            (end_time,) = nums(1)
        else:
            raise ScenarioSyntaxError(f"unknown directive '{directive}'", lineno)

    if not saw_directive:
        raise ScenarioSyntaxError("empty scenario file", 1)
    if area is None:
        raise ScenarioSemanticError("missing 'area' directive")
    if end_time is None:
        raise ScenarioSemanticError("missing 'end' directive")

    spec = ScenarioSpec(
        area=area,
        radio=RadioModel(range=DEFAULT_RANGE if radio_range is None else radio_range,
                         hop_latency=DEFAULT_HOP_LATENCY),
        nodes=[nodes[i] for i in sorted(nodes)] if nodes else [],
        movements=sorted(movements, key=lambda m: (m.start_time, m.node)),
        flows=flows,
        end_time=end_time,
        name=name,
    )
    _validate(spec, nodes)
    return spec


def _validate(spec: ScenarioSpec, raw_nodes: dict[int, Position]) -> None:
    w, h = spec.area
    if w <= 0 or h <= 0:
        raise ScenarioSemanticError("area dimensions must be positive")
    if spec.radio.range <= 0:
        raise ScenarioSemanticError("radio range must be positive")
    if spec.end_time <= 0:
        raise ScenarioSemanticError("end time must be positive")
    if not raw_nodes:
        raise ScenarioSemanticError("scenario declares no nodes")
    n = len(raw_nodes)
    if sorted(raw_nodes) != list(range(n)):
        raise ScenarioSemanticError(f"node ids must be dense 0..{n - 1}")
    for i, p in enumerate(spec.nodes):
        if not (0 <= p.x <= w and 0 <= p.y <= h):
            raise ScenarioSemanticError(f"node {i} at ({p.x}, {p.y}) outside area")

    # movement legs: known node, inside area, in time, chronologically disjoint
    cursor: dict[int, tuple[float, Position]] = {}
    for m in spec.movements:
        if not 0 <= m.node < n:
            raise ScenarioSemanticError(f"move references unknown node {m.node}")
        if m.speed <= 0:
            raise ScenarioSemanticError(f"move for node {m.node} has speed {m.speed}")
        if not (0 <= m.dest.x <= w and 0 <= m.dest.y <= h):
            raise ScenarioSemanticError(f"move for node {m.node} leaves the area")
        if not 0 <= m.start_time < spec.end_time:
            raise ScenarioSemanticError(
                f"move at t={m.start_time} outside run (end {spec.end_time})")
        free_at, pos = cursor.get(m.node, (0.0, spec.nodes[m.node]))
        if m.start_time < free_at:
            raise ScenarioSemanticError(
                f"node {m.node}: leg at t={m.start_time} overlaps one ending at {free_at:.3f}")
        arrival = m.start_time + math.hypot(m.dest.x - pos.x, m.dest.y - pos.y) / m.speed
        cursor[m.node] = (arrival, m.dest)

    for f in spec.flows:
        if not (0 <= f.src < n and 0 <= f.dst < n):
            raise ScenarioSemanticError(f"flow references unknown node {f.src}->{f.dst}")
        if f.src == f.dst:
            raise ScenarioSemanticError("flow source equals destination")
        if f.rate <= 0 or f.packet_size <= 0:
            raise ScenarioSemanticError("flow rate and packet size must be positive")
        if not (0 <= f.start < f.stop <= spec.end_time):
            raise ScenarioSemanticError(
                f"flow window [{f.start}, {f.stop}] invalid for end {spec.end_time}")


def serialize(spec: ScenarioSpec) -> str:
    """Inverse of parse: parse(serialize(s)) == s for every valid spec."""
    lines = [f"area {spec.area[0]!r} {spec.area[1]!r}",
             f"range {spec.radio.range!r}"]
    for i, p in enumerate(spec.nodes):
        lines.append(f"node {i} {p.x!r} {p.y!r}")
    for m in spec.movements:
        lines.append(f"move {m.start_time!r} {m.node} {m.dest.x!r} {m.dest.y!r} {m.speed!r}")
    for f in spec.flows:
        lines.append(f"flow {f.src} {f.dst} {f.rate!r} {f.packet_size} {f.start!r} {f.stop!r}")
    lines.append(f"end {spec.end_time!r}")
    return "\n".join(lines) + "\n"


def builtin(name: str) -> ScenarioSpec:
    """Load one of the two bundled scenarios by name."""
    if name not in BUILTIN_NAMES:
        raise UnknownScenarioError(f"no builtin scenario '{name}'")
    text = importlib.resources.files("manetsim.data").joinpath(f"{name}.scn").read_text()
    return parse(text, name=name)


def load(path_or_name: str) -> ScenarioSpec:
    """Resolve a builtin name or read a scenario file from disk."""
    if path_or_name in BUILTIN_NAMES:
        return builtin(path_or_name)
    try:
        with open(path_or_name) as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioSyntaxError(f"cannot read scenario: {exc}") from exc
    return parse(text, name=path_or_name)


@dataclass(frozen=True)
class CompiledScenario:
    mobility_legs: int
    emissions: int
    flows: int


def compile(spec: ScenarioSpec, sim) -> CompiledScenario:
    """Register mobility with the world and schedule all traffic emissions."""
    from .world import WaypointLeg  # local import keeps module load order simple

    for m in spec.movements:
        sim.world.apply_movement(WaypointLeg(node=m.node, start_time=m.start_time,
                                             dest=m.dest, speed=m.speed))
    emissions = 0
    for flow in spec.flows:
        k = 0
        while True:
            t = flow.start + k / flow.rate
            if t >= flow.stop - 1e-9:
                break
            sim.engine.schedule(t, lambda flow=flow, t=t: sim.emit_data(flow))
            emissions += 1
            k += 1
    return CompiledScenario(mobility_legs=len(spec.movements),
                            emissions=emissions, flows=len(spec.flows))
