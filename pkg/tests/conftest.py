"""Shared builders: programmatic scenarios and pre-wired simulations."""
import random

from manetsim.aodv import AodvConfig
from manetsim.dsdv import DsdvConfig
from manetsim.scenario import Movement, ScenarioSpec, TrafficFlow
from manetsim.simulation import Simulation
from manetsim.world import Position, RadioModel


def build_spec(positions, movements=(), flows=(), end=10.0, radio_range=250.0,
               name="test", area=(800.0, 800.0)):
    return ScenarioSpec(area=area,
                        radio=RadioModel(range=radio_range, hop_latency=0.001),
                        nodes=[Position(float(x), float(y)) for x, y in positions],
                        movements=list(movements), flows=list(flows),
                        end_time=end, name=name)


def build_sim(positions, protocol="aodv", seed=0, flows=(), movements=(),
              end=10.0, hello_interval=0.0, jitter=0.0, radio_range=250.0,
              update_interval=1.0, **aodv_kwargs):
    """Simulation with jitter off and hellos off unless asked for."""
    spec = build_spec(positions, movements, flows, end, radio_range)
    return Simulation(spec, protocol=protocol, seed=seed,
                      aodv_config=AodvConfig(hello_interval=hello_interval,
                                             **aodv_kwargs),
                      dsdv_config=DsdvConfig(update_interval=update_interval),
                      jitter=jitter)


def random_connected_positions(rnd: random.Random, n: int, radio_range=250.0):
    """Random layout rejected until its unit-disk graph is connected."""
    while True:
        pts = [(rnd.uniform(0, 800), rnd.uniform(0, 800)) for _ in range(n)]
        seen = {0}
        frontier = [0]
        while frontier:
            a = frontier.pop()
            for b in range(n):
                if b not in seen:
                    dx = pts[a][0] - pts[b][0]
                    dy = pts[a][1] - pts[b][1]
                    if (dx * dx + dy * dy) ** 0.5 <= radio_range:
                        seen.add(b)
                        frontier.append(b)
        if len(seen) == n:
            return pts


def random_scenario(rnd: random.Random, max_nodes=10, end=3.0):
    """Arbitrary (possibly disconnected) mobile scenario for property tests."""
    n = rnd.randint(2, max_nodes)
    positions = [(rnd.uniform(0, 800), rnd.uniform(0, 800)) for _ in range(n)]
    movements = []
    for node in range(n):
        here = positions[node]
        t = rnd.uniform(0.0, end / 2)
        for _ in range(rnd.randint(0, 2)):
            if t >= end:
                break
            dest = Position(rnd.uniform(0, 800), rnd.uniform(0, 800))
            speed = rnd.uniform(20, 400)
            movements.append(Movement(t, node, dest, speed))
            travel = ((dest.x - here[0]) ** 2 + (dest.y - here[1]) ** 2) ** 0.5 / speed
            t += travel + rnd.uniform(0.05, 0.5)
            here = (dest.x, dest.y)
    flows = []
    for _ in range(rnd.randint(1, 3)):
        src = rnd.randrange(n)
        dst = rnd.randrange(n)
        if src == dst:
            continue
        start = rnd.uniform(0.0, end / 2)
        stop = rnd.uniform(start + 0.2, end)
        flows.append(TrafficFlow(src, dst, rate=rnd.choice([5.0, 10.0, 20.0]),
                                 packet_size=512, start=start, stop=stop))
    if not flows:
        flows = [TrafficFlow(0, n - 1, 10.0, 512, 0.5, end)]
    return build_spec(positions, movements, flows, end)
