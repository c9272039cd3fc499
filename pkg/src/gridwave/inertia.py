"""Admittance-based distribution of generator inertia over lines.

Each generator's rotational inertia is first seeded onto its incident lines
in proportion to series admittance magnitude Y = |1/(r+jx)|. Parcels of
inertia then travel outward bus by bus: a parcel of size m arriving at a
non-generator bus over a line with admittance Y_i, facing n onward lines
with admittances Y_j, settles n*Y_i/(n*Y_i + sum Y_j) * m on its own line
and forwards the remainder split proportionally to the Y_j. Parcels stop at
generator buses and at dead ends. Meshed networks circulate a geometrically
shrinking residue, so the wavefront stops once the circulating mass falls
below tol * (total inertia) (or after max_rounds) and the leftover is folded
back proportionally to what each line already holds, which keeps the total
conserved exactly.

Wavefronts are processed per generator in ascending bus-id order with
sorted line orderings throughout, so the result is independent of input
ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

from .cases import Line, PowerCase, UnknownTargetError


class GeneratorlessComponentError(ValueError):
    """A connected component of the network contains no generator."""

    def __init__(self, bus_ids):
        ids = ", ".join(str(b) for b in bus_ids)
        super().__init__(f"component with buses {{{ids}}} contains no generator")
        self.bus_ids = tuple(bus_ids)


@dataclass(frozen=True)
class InertiaMap:
    """Per-line distributed inertia j_i (pu*s^2) and density j_h (per mile)."""

    j_line: MappingProxyType      # line id -> j_i
    j_density: MappingProxyType   # line id -> j_i / length_miles

    def j_for(self, line: Line) -> float:
        try:
            return self.j_line[line.id]
        except KeyError:
            raise UnknownTargetError(f"no line {line.id} in inertia map") from None

    def density_for(self, line: Line) -> float:
        try:
            return self.j_density[line.id]
        except KeyError:
            raise UnknownTargetError(f"no line {line.id} in inertia map") from None

    @property
    def total(self) -> float:
        return sum(self.j_line.values())


def _components(c: PowerCase, adjacency):
    seen = set()
    comps = []
    for b in c.buses:
        if b.id in seen:
            continue
        stack, comp = [b.id], set()
        while stack:
            u = stack.pop()
            if u in comp:
                continue
            comp.add(u)
            for ln in adjacency.get(u, ()):
                stack.append(ln.to_bus if ln.from_bus == u else ln.from_bus)
        seen |= comp
        comps.append(comp)
    return comps


def distribute_inertia(c: PowerCase, tol: float = 1e-6,
                       max_rounds: int = 100) -> InertiaMap:
    """Spread every generator's inertia_j over the in-service lines."""
    adjacency: dict[int, list[Line]] = {b.id: [] for b in c.buses}
    for ln in c.lines:
        if ln.in_service:
            adjacency[ln.from_bus].append(ln)
            adjacency[ln.to_bus].append(ln)
    for lines in adjacency.values():
        lines.sort(key=lambda ln: ln.id)

    gen_buses = c.generator_buses
    for comp in _components(c, adjacency):
        if not (comp & gen_buses):
            raise GeneratorlessComponentError(sorted(comp))

    # generators at the same bus are indistinguishable network-side
    j_by_bus: dict[int, float] = {}
    for g in c.generators:
        j_by_bus[g.bus] = j_by_bus.get(g.bus, 0.0) + g.inertia_j
    total_j = sum(j_by_bus.values())

    settled_all = {ln.id: 0.0 for ln in c.lines}
    for gbus in sorted(j_by_bus):
        j_gen = j_by_bus[gbus]
        if j_gen == 0.0:
            continue
        incident = adjacency[gbus]
        if not incident:
            # islanded generator bus: no line can hold its inertia
            continue
        y_sum = sum(ln.series_admittance_mag() for ln in incident)
        parcels = [(ln, (ln.to_bus if ln.from_bus == gbus else ln.from_bus),
                    j_gen * ln.series_admittance_mag() / y_sum)
                   for ln in incident]

        settled = {ln.id: 0.0 for ln in c.lines}
        for _ in range(max_rounds):
            nxt = []
            for ln, bus, mass in parcels:
                if bus in gen_buses:
                    settled[ln.id] += mass
                    continue
                onward = [o for o in adjacency[bus] if o.id != ln.id]
                if not onward:
                    settled[ln.id] += mass
                    continue
                n = len(onward)
                y_i = ln.series_admittance_mag()
                y_on = [o.series_admittance_mag() for o in onward]
                y_tot = sum(y_on)
                keep = n * y_i / (n * y_i + y_tot) * mass
                settled[ln.id] += keep
                spill = mass - keep
                for o, y_o in zip(onward, y_on):
                    nxt.append((o, o.to_bus if o.from_bus == bus else o.from_bus,
                                spill * y_o / y_tot))
            parcels = nxt
            if sum(m for _, _, m in parcels) < tol * total_j:
                break

        residue = sum(m for _, _, m in parcels)
        if residue > 0.0:
            got = sum(settled.values())
            for lid in settled:
                if settled[lid] > 0.0:
                    settled[lid] += residue * settled[lid] / got
        for lid, val in settled.items():
            settled_all[lid] += val

    lengths = {ln.id: ln.length_miles for ln in c.lines}
    density = {lid: j / lengths[lid] for lid, j in settled_all.items()}
    return InertiaMap(MappingProxyType(settled_all), MappingProxyType(density))


def line_density(imap: InertiaMap, line: Line) -> float:
    """Inertia per mile of line: j_i / length_miles."""
    return imap.j_for(line) / line.length_miles


def inertia_csv(imap: InertiaMap) -> str:
    rows = ["line_id,j_total,j_per_mile"]
    for lid in imap.j_line:
        rows.append(f"{lid},{imap.j_line[lid]!r},{imap.j_density[lid]!r}")
    return "\n".join(rows) + "\n"
