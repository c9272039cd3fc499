"""Power-system case model: buses, lines, generators, disturbances.

This module is the single source of truth for units and symbols. Electrical
impedances and admittances are per unit on ``base_mva``; loads and generation
are carried in MW/MVAr exactly as read from the source file and normalized by
``base_mva`` at the point of use; lengths are miles; time is seconds; angles
are radians. ``omega0`` is the synchronous speed ``2*pi*frequency_hz`` in
rad/s.

All types are immutable values. Operations that "modify" a case return a new
one.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields, replace


BUS_KINDS = ("slack", "pv", "pq")
LINE_STATUS = ("in_service", "out")
DISTURBANCE_KINDS = ("load_step", "line_outage")


class CaseError(ValueError):
    """Base class for case-model errors."""


class CaseFormatError(CaseError):
    """Source text is not syntactically parseable."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(CaseError):
    """A field is missing, has the wrong type, or is out of its legal set."""

    def __init__(self, field_name, message):
        super().__init__(f"field '{field_name}': {message}")
        self.field_name = field_name


class DanglingReferenceError(CaseError):
    """A line endpoint or generator refers to a bus id that does not exist."""

    def __init__(self, ref_id, context):
        super().__init__(f"{context} refers to nonexistent bus {ref_id}")
        self.ref_id = ref_id


class UnknownTargetError(CaseError):
    """A disturbance target names no bus or line in the case."""


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str = "pq"
    v_set: float = 1.0       # pu, meaningful for slack/pv
    p_load: float = 0.0      # MW
    q_load: float = 0.0      # MVAr

    def __post_init__(self):
        if self.kind not in BUS_KINDS:
            raise SchemaError("kind", f"{self.kind!r} not one of {BUS_KINDS}")


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    x: float                 # pu series reactance
    length_miles: float
    r: float = 0.0           # pu series resistance
    b_shunt: float = 0.0     # pu total shunt susceptance (split half per end)
    status: str = "in_service"
    id: str = ""             # filled by PowerCase; "from-to" plus "#k" for parallels

    def __post_init__(self):
        if self.status not in LINE_STATUS:
            raise SchemaError("status", f"{self.status!r} not one of {LINE_STATUS}")

    @property
    def in_service(self):
        return self.status == "in_service"

    def series_admittance_mag(self):
        """|1/(r+jx)|, the Y used for inertia distribution."""
        return 1.0 / math.hypot(self.r, self.x)

    def b_per_mile(self):
        """Per-unit-length susceptance b = (1/x)*length, per mile of line."""
        return self.length_miles / self.x

    def g_per_mile(self):
        """Per-unit-length conductance g = length*r/(r^2+x^2)."""
        return self.length_miles * self.r / (self.r**2 + self.x**2)


@dataclass(frozen=True)
class Generator:
    bus: int
    h_const: float           # MJ/MVA on the machine's own rating
    mva_rating: float
    p_gen: float = 0.0       # MW
    inertia_j: float = 0.0   # pu*s^2 on system base; filled by PowerCase

    def __post_init__(self):
        if not (self.h_const > 0):
            raise SchemaError("h_const", "must be > 0")
        if not (self.mva_rating > 0):
            raise SchemaError("mva_rating", "must be > 0")


@dataclass(frozen=True)
class Disturbance:
    kind: str
    target: int | str        # bus id (load_step) or line id (line_outage)
    t_start: float
    magnitude_fraction: float = 0.0
    duration: float | None = None   # s; None means the change persists

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise SchemaError("kind", f"{self.kind!r} not one of {DISTURBANCE_KINDS}")
        if self.t_start < 0:
            raise SchemaError("t_start", "must be >= 0")
        if self.duration is not None and not (self.duration > 0):
            raise SchemaError("duration", "must be > 0 when finite")
        if self.magnitude_fraction <= -1:
            raise SchemaError("magnitude_fraction", "must be > -1")


@dataclass(frozen=True)
class PowerCase:
    base_mva: float
    frequency_hz: float
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]

    def __post_init__(self):
        if not (self.base_mva > 0):
            raise SchemaError("base_mva", "must be > 0")
        if not (self.frequency_hz > 0):
            raise SchemaError("frequency_hz", "must be > 0")
        object.__setattr__(self, "buses", tuple(self.buses))

        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise SchemaError("buses", f"duplicate bus ids {dup}")
        known = set(ids)

        # Referential integrity is structural: nothing downstream can cope
        # with a dangling endpoint, so it is rejected at construction rather
        # than reported by validate_case.
        lines = []
        seen_pairs: dict[tuple[int, int], int] = {}
        for ln in self.lines:
            for end in (ln.from_bus, ln.to_bus):
                if end not in known:
                    raise DanglingReferenceError(end, f"line {ln.from_bus}-{ln.to_bus}")
            if not ln.id:
                pair = (ln.from_bus, ln.to_bus)
                n = seen_pairs.get(pair, 0) + 1
                seen_pairs[pair] = n
                lid = f"{ln.from_bus}-{ln.to_bus}" + (f"#{n}" if n > 1 else "")
                ln = replace(ln, id=lid)
            lines.append(ln)
        object.__setattr__(self, "lines", tuple(lines))

        gens = []
        for g in self.generators:
            if g.bus not in known:
                raise DanglingReferenceError(g.bus, "generator")
            j = 2.0 * g.h_const * g.mva_rating / (self.base_mva * self.omega0)
            gens.append(replace(g, inertia_j=j))
        object.__setattr__(self, "generators", tuple(gens))

    @property
    def omega0(self):
        """Synchronous speed in rad/s, exactly 2*pi*frequency_hz."""
        return 2.0 * math.pi * self.frequency_hz

    def bus(self, bus_id):
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise UnknownTargetError(f"no bus {bus_id}")

    def line(self, target):
        """Look up a line by id; 'a-b' matches either orientation."""
        for ln in self.lines:
            if ln.id == target:
                return ln
        if isinstance(target, str) and "#" not in target:
            a, sep, b = target.partition("-")
            if sep:
                flipped = f"{b}-{a}"
                for ln in self.lines:
                    if ln.id == flipped:
                        return ln
        raise UnknownTargetError(f"no line {target}")

    def generators_at(self, bus_id):
        return tuple(g for g in self.generators if g.bus == bus_id)

    @property
    def generator_buses(self):
        return frozenset(g.bus for g in self.generators)

    @property
    def slack_buses(self):
        return tuple(b for b in self.buses if b.kind == "slack")


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        if self.ok:
            return "ok: case satisfies all invariants"
        return "\n".join(str(v) for v in self.violations)


def validate_case(c: PowerCase) -> ValidationReport:
    """Check every semantic invariant; empty report iff the case is simulable.

    Structural problems (duplicate ids, dangling references) cannot occur in
    a constructed PowerCase, so this reports only value-level violations.
    """
    out = []
    slacks = c.slack_buses
    if len(slacks) == 0:
        out.append(Violation("no_slack", "no slack bus"))
    elif len(slacks) > 1:
        ids = ", ".join(str(b.id) for b in slacks)
        out.append(Violation("multiple_slack", f"multiple slack buses: {ids}"))
    for b in c.buses:
        if b.kind in ("slack", "pv") and not (b.v_set > 0):
            out.append(Violation("v_set", f"bus {b.id}: v_set must be > 0"))
    for ln in c.lines:
        if not (ln.x > 0):
            out.append(Violation("line_x", f"line {ln.id}: x must be > 0"))
        if not (ln.length_miles > 0):
            out.append(Violation("line_length", f"line {ln.id}: length_miles must be > 0"))
        if ln.r < 0:
            out.append(Violation("line_r", f"line {ln.id}: r must be >= 0"))
        if ln.b_shunt < 0:
            out.append(Violation("line_b_shunt", f"line {ln.id}: b_shunt must be >= 0"))
    return ValidationReport(tuple(out))


def apply_disturbance(c: PowerCase, d: Disturbance, phase: str,
                      p_only: bool = False) -> PowerCase:
    """Return the case as seen in one phase of the disturbance.

    phase 'pre' is the identity. A load step scales the target bus's p_load
    (and q_load proportionally unless p_only) in 'during' and 'post'; a line
    outage removes the line only in 'during'.
    """
    if phase not in ("pre", "during", "post"):
        raise ValueError(f"unknown phase {phase!r}")
    if phase == "pre":
        return c
    if d.kind == "load_step":
        target = c.bus(d.target)  # raises UnknownTargetError
        scale = 1.0 + d.magnitude_fraction
        new = replace(target, p_load=target.p_load * scale,
                      q_load=target.q_load * (1.0 if p_only else scale))
        buses = tuple(new if b.id == target.id else b for b in c.buses)
        return replace(c, buses=buses)
    # line_outage
    target = c.line(d.target)
    status = "out" if phase == "during" else "in_service"
    lines = tuple(replace(ln, status=status) if ln.id == target.id else ln
                  for ln in c.lines)
    return replace(c, lines=lines)


# ---------------------------------------------------------------------------
# native JSON schema

_BUS_FIELDS = {f.name for f in fields(Bus)}
_LINE_FIELDS = {f.name for f in fields(Line)} - {"id"}
_GEN_FIELDS = {f.name for f in fields(Generator)} - {"inertia_j"}


def _number(obj, name, required=True, default=0.0):
    if name not in obj:
        if required:
            raise SchemaError(name, "missing")
        return default
    v = obj[name]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(name, f"expected a number, got {v!r}")
    return float(v)


def _check_unknown(obj, allowed, where):
    for k in obj:
        if k not in allowed:
            raise SchemaError(k, f"unknown field in {where}")


def parse_case_json(text: str) -> PowerCase:
    """Parse the native JSON case schema into a PowerCase."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CaseFormatError(e.msg, e.lineno, e.colno) from None
    if not isinstance(doc, dict):
        raise SchemaError("<root>", "expected a JSON object")
    _check_unknown(doc, {"base_mva", "frequency_hz", "buses", "lines", "generators"},
                   "case")
    for key in ("base_mva", "frequency_hz", "buses", "lines", "generators"):
        if key not in doc:
            raise SchemaError(key, "missing")

    buses = []
    for i, obj in enumerate(doc["buses"]):
        _check_unknown(obj, _BUS_FIELDS, f"buses[{i}]")
        if "id" not in obj:
            raise SchemaError("id", f"missing in buses[{i}]")
        kind = obj.get("kind", "pq")
        if kind not in BUS_KINDS:
            raise SchemaError("kind", f"{kind!r} not one of {BUS_KINDS}")
        buses.append(Bus(
            id=int(obj["id"]), kind=kind,
            v_set=_number(obj, "v_set", required=False, default=1.0),
            p_load=_number(obj, "p_load", required=False),
            q_load=_number(obj, "q_load", required=False)))

    lines = []
    for i, obj in enumerate(doc["lines"]):
        _check_unknown(obj, _LINE_FIELDS, f"lines[{i}]")
        for key in ("from_bus", "to_bus", "x", "length_miles"):
            if key not in obj:
                raise SchemaError(key, f"missing in lines[{i}]")
        status = obj.get("status", "in_service")
        if status not in LINE_STATUS:
            raise SchemaError("status", f"{status!r} not one of {LINE_STATUS}")
        lines.append(Line(
            from_bus=int(obj["from_bus"]), to_bus=int(obj["to_bus"]),
            x=_number(obj, "x"),
            length_miles=_number(obj, "length_miles"),
            r=_number(obj, "r", required=False),
            b_shunt=_number(obj, "b_shunt", required=False),
            status=status))

    gens = []
    for i, obj in enumerate(doc["generators"]):
        _check_unknown(obj, _GEN_FIELDS, f"generators[{i}]")
        for key in ("bus", "h_const", "mva_rating"):
            if key not in obj:
                raise SchemaError(key, f"missing in generators[{i}]")
        gens.append(Generator(
            bus=int(obj["bus"]),
            h_const=_number(obj, "h_const"),
            mva_rating=_number(obj, "mva_rating"),
            p_gen=_number(obj, "p_gen", required=False)))

    return PowerCase(
        base_mva=_number(doc, "base_mva"),
        frequency_hz=_number(doc, "frequency_hz"),
        buses=tuple(buses), lines=tuple(lines), generators=tuple(gens))


def serialize_case(c: PowerCase) -> str:
    """Render a PowerCase back to the native JSON schema (round-trips)."""
    doc = {
        "base_mva": c.base_mva,
        "frequency_hz": c.frequency_hz,
        "buses": [
            {"id": b.id, "kind": b.kind, "v_set": b.v_set,
             "p_load": b.p_load, "q_load": b.q_load}
            for b in c.buses
        ],
        "lines": [
            {"from_bus": ln.from_bus, "to_bus": ln.to_bus, "r": ln.r,
             "x": ln.x, "b_shunt": ln.b_shunt,
             "length_miles": ln.length_miles, "status": ln.status}
            for ln in c.lines
        ],
        "generators": [
            {"bus": g.bus, "h_const": g.h_const, "mva_rating": g.mva_rating,
             "p_gen": g.p_gen}
            for g in c.generators
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_scenario_json(text: str) -> Disturbance:
    """Parse a scenario file: {"disturbance": {kind, target, ...}}."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CaseFormatError(e.msg, e.lineno, e.colno) from None
    if not isinstance(doc, dict) or "disturbance" not in doc:
        raise SchemaError("disturbance", "missing")
    obj = doc["disturbance"]
    _check_unknown(obj, {"kind", "target", "magnitude_fraction", "t_start",
                         "duration"}, "disturbance")
    kind = obj.get("kind")
    if kind not in DISTURBANCE_KINDS:
        raise SchemaError("kind", f"{kind!r} not one of {DISTURBANCE_KINDS}")
    if "target" not in obj:
        raise SchemaError("target", "missing")
    target = obj["target"]
    if not isinstance(target, (int, str)):
        raise SchemaError("target", "expected bus id (int) or line id (string)")
    duration = obj.get("duration")
    if duration is not None:
        duration = float(duration)
    return Disturbance(
        kind=kind, target=target,
        t_start=_number(obj, "t_start", required=False),
        magnitude_fraction=_number(obj, "magnitude_fraction", required=False),
        duration=duration)


# ---------------------------------------------------------------------------
# MATPOWER ingestion (read-only)

_MAT_BUS_KIND = {1: "pq", 2: "pv", 3: "slack"}


def _extract_matrix(text: str, name: str):
    m = re.search(rf"mpc\.{name}\s*=\s*\[(.*?)\];", text, re.DOTALL)
    if m is None:
        raise SchemaError(name, f"matrix mpc.{name} not found")
    rows = []
    for lineno, raw in enumerate(m.group(1).splitlines()):
        row = raw.split("%", 1)[0].strip().rstrip(";").strip()
        if not row:
            continue
        try:
            rows.append([float(tok) for tok in row.split()])
        except ValueError:
            raise CaseFormatError(
                f"malformed row in mpc.{name}: {row!r}") from None
    return rows


def parse_matpower(text: str, lengths: dict | None = None,
                   h_consts: dict | None = None,
                   default_h: float = 5.0) -> PowerCase:
    """Parse a MATPOWER .m case into a PowerCase.

    MATPOWER carries neither line lengths nor machine inertia. ``lengths``
    maps line id ("from-to") to miles; absent entries default to x*100 miles
    (a reactance-proportional proxy that preserves relative ordering).
    ``h_consts`` maps bus id to H in MJ/MVA on the machine's mBase; absent
    machines get ``default_h``. Branch tap ratios and phase shifts are not
    modeled and are ignored.
    """
    m = re.search(r"mpc\.baseMVA\s*=\s*([0-9.eE+-]+)\s*;", text)
    if m is None:
        raise SchemaError("baseMVA", "mpc.baseMVA not found")
    base = float(m.group(1))
    lengths = dict(lengths or {})
    h_consts = dict(h_consts or {})

    buses = []
    for i, row in enumerate(_extract_matrix(text, "bus")):
        if len(row) < 13:
            raise CaseFormatError(f"mpc.bus row {i}: expected 13 columns, got {len(row)}")
        bus_i, bus_type, pd, qd = int(row[0]), int(row[1]), row[2], row[3]
        if bus_type == 4:
            continue  # isolated bus
        if bus_type not in _MAT_BUS_KIND:
            raise CaseFormatError(f"mpc.bus row {i}: unknown bus type {bus_type}")
        buses.append(Bus(id=bus_i, kind=_MAT_BUS_KIND[bus_type],
                         p_load=pd, q_load=qd))

    gens = []
    gen_vset: dict[int, float] = {}
    for i, row in enumerate(_extract_matrix(text, "gen")):
        if len(row) < 10:
            raise CaseFormatError(f"mpc.gen row {i}: expected >=10 columns, got {len(row)}")
        bus_i, pg, vg, mbase, status = int(row[0]), row[1], row[5], row[6], int(row[7])
        if status <= 0:
            continue
        mbase = mbase if mbase > 0 else base
        gens.append(Generator(bus=bus_i, p_gen=pg, mva_rating=mbase,
                              h_const=h_consts.get(bus_i, default_h)))
        gen_vset[bus_i] = vg

    # PV/slack setpoints come from the gen table, not the bus Vm column.
    buses = [replace(b, v_set=gen_vset[b.id]) if b.id in gen_vset and
             b.kind in ("pv", "slack") else b for b in buses]

    mat_lines = []
    for i, row in enumerate(_extract_matrix(text, "branch")):
        if len(row) < 11:
            raise CaseFormatError(f"mpc.branch row {i}: expected >=11 columns, got {len(row)}")
        f_bus, t_bus, r, x, b_sh, status = (
            int(row[0]), int(row[1]), row[2], row[3], row[4], int(row[10]))
        lid = f"{f_bus}-{t_bus}"
        length = lengths.get(lid, lengths.get(f"{t_bus}-{f_bus}", x * 100.0))
        mat_lines.append(Line(
            from_bus=f_bus, to_bus=t_bus, r=r, x=x, b_shunt=b_sh,
            length_miles=length,
            status="in_service" if status > 0 else "out"))

    return PowerCase(base_mva=base, frequency_hz=60.0, buses=tuple(buses),
                     lines=tuple(mat_lines), generators=tuple(gens))
