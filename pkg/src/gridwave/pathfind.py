"""Per-line wave velocities and fastest-propagation routing.

A disturbance front crosses a line at velocity v = sqrt(V^2 * b / (j_h * w0))
miles per second, where b is susceptance per mile, j_h the distributed
inertia density per mile and V the mean pre-disturbance voltage magnitude at
the line's ends. The crossing time is length / v; the route a front takes
between two buses is the minimum-total-crossing-time path, found here with
Dijkstra over the in-service lines.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass

from .cases import Line, PowerCase, UnknownTargetError
from .inertia import InertiaMap
from .powerflow import PowerFlowSolution


class UnreachableBusError(ValueError):
    def __init__(self, src: int, dst: int):
        super().__init__(f"no in-service route from bus {src} to bus {dst}")
        self.src = src
        self.dst = dst


@dataclass(frozen=True)
class EmwPath:
    """A bus route with its lines, per-line velocities and total time."""

    buses: tuple[int, ...]
    lines: tuple[Line, ...]
    velocities: tuple[float, ...]   # miles/second, aligned with lines
    travel_time_s: float

    @property
    def length_miles(self) -> float:
        return sum(ln.length_miles for ln in self.lines)


def line_emw_velocity(line: Line, j_h: float, v_pu: float,
                      omega0: float) -> float:
    """Front velocity on one line, miles per second."""
    if j_h <= 0.0:
        raise ValueError(f"line {line.id}: inertia density must be positive, got {j_h}")
    if v_pu <= 0.0:
        raise ValueError(f"line {line.id}: voltage must be positive, got {v_pu}")
    return math.sqrt(v_pu * v_pu * line.b_per_mile() / (j_h * omega0))


def _crossing_time(line: Line, imap: InertiaMap, sol: PowerFlowSolution,
                   omega0: float) -> tuple[float, float]:
    v_pu = 0.5 * (sol.v_at(line.from_bus) + sol.v_at(line.to_bus))
    vel = line_emw_velocity(line, imap.density_for(line), v_pu, omega0)
    return line.length_miles / vel, vel


def shortest_emw_path(c: PowerCase, imap: InertiaMap, sol: PowerFlowSolution,
                      src: int, dst: int) -> EmwPath:
    """Minimum-travel-time route from src to dst.

    Ties in arrival time break toward the smaller bus id, so the result does
    not depend on input ordering.
    """
    ids = {b.id for b in c.buses}
    for bus in (src, dst):
        if bus not in ids:
            raise UnknownTargetError(f"no bus {bus} in case")

    adjacency: dict[int, list[tuple[int, Line]]] = {b.id: [] for b in c.buses}
    for ln in c.lines:
        if ln.in_service:
            adjacency[ln.from_bus].append((ln.to_bus, ln))
            adjacency[ln.to_bus].append((ln.from_bus, ln))
    for pairs in adjacency.values():
        pairs.sort(key=lambda pair: (pair[0], pair[1].id))

    best: dict[int, float] = {src: 0.0}
    prev: dict[int, tuple[int, Line, float]] = {}
    heap: list[tuple[float, int]] = [(0.0, src)]
    done: set[int] = set()
    while heap:
        t, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == dst:
            break
        for w, ln in adjacency[u]:
            if w in done:
                continue
            dt, vel = _crossing_time(ln, imap, sol, c.omega0)
            cand = t + dt
            if cand < best.get(w, math.inf):
                best[w] = cand
                prev[w] = (u, ln, vel)
                heapq.heappush(heap, (cand, w))

    if dst not in done:
        raise UnreachableBusError(src, dst)

    buses, lines, vels = [dst], [], []
    while buses[-1] != src:
        u, ln, vel = prev[buses[-1]]
        lines.append(ln)
        vels.append(vel)
        buses.append(u)
    buses.reverse()
    lines.reverse()
    vels.reverse()
    return EmwPath(tuple(buses), tuple(lines), tuple(vels), best[dst])


def path_travel_time(p: EmwPath) -> float:
    """Recompute total crossing time from the path's own segments."""
    return sum(ln.length_miles / v for ln, v in zip(p.lines, p.velocities))


def path_json(p: EmwPath) -> str:
    doc = {
        "buses": list(p.buses),
        "lines": [ln.id for ln in p.lines],
        "velocities": list(p.velocities),
        "travel_time_s": p.travel_time_s,
    }
    return json.dumps(doc, indent=2) + "\n"
