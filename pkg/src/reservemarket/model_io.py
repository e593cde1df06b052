"""Domain data model and market case file I/O.

Every input quantity of the market lives here: generator technical data and
costs, bus demands, line parameters, zonal reserve requirements, and the
four-way variant switch.  Cases are stored as a single JSON document (see
``load_case`` / ``write_case``); unknown keys are rejected.
"""
from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ParseError, ValidationError

log = logging.getLogger(__name__)

FUEL_CLASSES = ("NG", "BIT", "NUC", "SOL", "WND", "HYD", "OTH")


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    entity: str
    message: str


@dataclass(frozen=True)
class CostSegment:
    capacity: float      # MW width of the segment
    marginal_cost: float  # $/MWh on the segment


@dataclass(frozen=True)
class GeneratorSpec:
    id: str
    bus: str
    fuel_class: str
    p_min: float
    p_max: float
    rsu: float            # start-up ramp capability, MW
    rsd: float            # shut-down ramp capability, MW
    ru_5min: float        # MW headroom reachable in 5 minutes
    ru_10min: float       # MW headroom reachable in 10 minutes
    ru_60min: float       # MW/h ramp up
    rd_60min: float       # MW/h ramp down
    cost_startup: float   # $ per start
    cost_noload: float    # $ per online hour
    fuel_cost_segments: tuple[CostSegment, ...]
    min_up: int           # hours
    min_down: int         # hours
    offer_reg: tuple[float, ...]   # $/MWh per interval
    offer_spin: tuple[float, ...]
    offer_nsp: tuple[float, ...]
    initial_status: int   # signed hours online(+) / offline(-)
    initial_power: float  # MW at interval 0

    def fuel_cost(self, p: float) -> float:
        """Piecewise-linear convex fuel cost of producing ``p`` MW for 1 h."""
        cost = 0.0
        remaining = p
        for seg in self.fuel_cost_segments:
            take = min(remaining, seg.capacity)
            if take <= 0.0:
                break
            cost += take * seg.marginal_cost
            remaining -= take
        return cost

    @property
    def initially_on(self) -> bool:
        return self.initial_status > 0


@dataclass(frozen=True)
class BusSpec:
    id: str
    demand: tuple[float, ...]  # MW per interval


@dataclass(frozen=True)
class LineSpec:
    id: str
    from_bus: str
    to_bus: str
    reactance: float             # per unit
    rating: tuple[float, ...]    # MW per interval
    monitored: bool = True


@dataclass(frozen=True)
class ReserveRequirements:
    """Per-zone, per-interval MW requirements for the three products."""
    reg: dict[str, tuple[float, ...]]
    spin: dict[str, tuple[float, ...]]
    nsp: dict[str, tuple[float, ...]]

    def zones(self) -> list[str]:
        return sorted(self.reg)

    @staticmethod
    def zeros(zone_ids, horizon: int) -> "ReserveRequirements":
        z = {zid: (0.0,) * horizon for zid in zone_ids}
        return ReserveRequirements(reg=dict(z), spin=dict(z), nsp=dict(z))


class CapacityOption(enum.Enum):
    NON_SHARING = "NS"
    SHARING = "S"


class RequirementOption(enum.Enum):
    NON_CASCADING = "NC"
    CASCADING = "C"


@dataclass(frozen=True)
class VariantConfig:
    capacity: CapacityOption
    requirements: RequirementOption

    @property
    def name(self) -> str:
        return f"{self.capacity.value}-{self.requirements.value}"

    @staticmethod
    def from_name(name: str) -> "VariantConfig":
        try:
            cap, req = name.split("-")
            return VariantConfig(CapacityOption(cap), RequirementOption(req))
        except ValueError:
            raise ValueError(f"unknown variant name {name!r}; expected one of "
                             f"{', '.join(v.name for v in all_variants())}") from None


def all_variants() -> tuple[VariantConfig, ...]:
    return tuple(VariantConfig(c, r) for c in CapacityOption for r in RequirementOption)


@dataclass(frozen=True)
class MarketCase:
    horizon: int
    reference_bus: str
    buses: tuple[BusSpec, ...]
    lines: tuple[LineSpec, ...]
    generators: tuple[GeneratorSpec, ...]
    zone_partition: dict[str, str] = field(default_factory=dict)  # bus -> zone
    requirements: ReserveRequirements | None = None

    def bus(self, bus_id: str) -> BusSpec:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(bus_id)

    def generator(self, gen_id: str) -> GeneratorSpec:
        for g in self.generators:
            if g.id == gen_id:
                return g
        raise KeyError(gen_id)

    def zone_of(self, bus_id: str) -> str:
        return self.zone_partition[bus_id]

    def zones(self) -> list[str]:
        return sorted(set(self.zone_partition.values()))

    def generators_in_zone(self, zone: str) -> list[GeneratorSpec]:
        return [g for g in self.generators if self.zone_partition[g.bus] == zone]

    def zonal_demand(self, zone: str) -> tuple[float, ...]:
        total = [0.0] * self.horizon
        for b in self.buses:
            if self.zone_partition[b.id] == zone:
                for t in range(self.horizon):
                    total[t] += b.demand[t]
        return tuple(total)


# ---------------------------------------------------------------------------
# parsing helpers

def _series(value, horizon: int, where: str) -> tuple[float, ...]:
    """Broadcast a scalar to the horizon or check a list's length."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value),) * horizon
    if isinstance(value, list):
        if len(value) != horizon:
            raise ParseError(f"{where}: series length {len(value)} != horizon {horizon}")
        return tuple(float(v) for v in value)
    raise ParseError(f"{where}: expected number or list, got {type(value).__name__}")


def _take(obj: dict, where: str, required: dict, optional: dict | None = None) -> dict:
    """Pull keys out of a JSON object, rejecting unknown ones."""
    optional = optional or {}
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ParseError(f"{where}: unknown keys {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ParseError(f"{where}: missing keys {missing}")
    out = {}
    for k in required:
        out[k] = obj[k]
    for k, default in optional.items():
        out[k] = obj.get(k, default)
    return out


_GEN_REQUIRED = {k: None for k in (
    "id", "bus", "fuel_class", "p_min", "p_max", "rsu", "rsd",
    "ru_5min", "ru_10min", "ru_60min", "rd_60min",
    "cost_startup", "cost_noload", "fuel_cost_segments",
    "min_up", "min_down", "initial_status", "initial_power")}


def _parse_generator(obj: dict, horizon: int) -> GeneratorSpec:
    where = f"generator {obj.get('id', '?')}"
    d = _take(obj, where, _GEN_REQUIRED,
              {"offer_reg": 0.0, "offer_spin": 0.0, "offer_nsp": 0.0})
    segs = tuple(CostSegment(float(c), float(m)) for c, m in d["fuel_cost_segments"])
    return GeneratorSpec(
        id=str(d["id"]), bus=str(d["bus"]), fuel_class=str(d["fuel_class"]),
        p_min=float(d["p_min"]), p_max=float(d["p_max"]),
        rsu=float(d["rsu"]), rsd=float(d["rsd"]),
        ru_5min=float(d["ru_5min"]), ru_10min=float(d["ru_10min"]),
        ru_60min=float(d["ru_60min"]), rd_60min=float(d["rd_60min"]),
        cost_startup=float(d["cost_startup"]), cost_noload=float(d["cost_noload"]),
        fuel_cost_segments=segs,
        min_up=int(d["min_up"]), min_down=int(d["min_down"]),
        offer_reg=_series(d["offer_reg"], horizon, where),
        offer_spin=_series(d["offer_spin"], horizon, where),
        offer_nsp=_series(d["offer_nsp"], horizon, where),
        initial_status=int(d["initial_status"]),
        initial_power=float(d["initial_power"]),
    )


def load_case(path) -> MarketCase:
    """Read, parse, and validate a market case file.

    Raises ParseError on malformed input and ValidationError listing every
    violated invariant.  Start-up ramp rates below the technical minimum are
    clamped up to p_min with a logged warning.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"case file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    return case_from_dict(raw)


def case_from_dict(raw: dict) -> MarketCase:
    if not isinstance(raw, dict):
        raise ParseError("case document must be a JSON object")
    d = _take(raw, "case", {"horizon": None, "reference_bus": None, "buses": None,
                            "lines": None, "generators": None},
              {"zones": None, "requirements": None, "offers": None})
    horizon = int(d["horizon"])
    if horizon < 1:
        raise ParseError("horizon must be at least 1 interval")

    buses = tuple(
        BusSpec(id=str(b["id"]), demand=_series(b["demand"], horizon, f"bus {b.get('id')}"))
        for b in (_take(o, f"bus {o.get('id', '?')}", {"id": None, "demand": None}) for o in d["buses"])
    )
    lines = tuple(
        LineSpec(id=str(l["id"]), from_bus=str(l["from_bus"]), to_bus=str(l["to_bus"]),
                 reactance=float(l["reactance"]),
                 rating=_series(l["rating"], horizon, f"line {l.get('id')}"),
                 monitored=bool(l["monitored"]))
        for l in (_take(o, f"line {o.get('id', '?')}",
                        {"id": None, "from_bus": None, "to_bus": None,
                         "reactance": None, "rating": None},
                        {"monitored": True}) for o in d["lines"])
    )
    generators = tuple(_parse_generator(o, horizon) for o in d["generators"])

    if d["offers"] is not None:
        patched = []
        for g in generators:
            o = d["offers"].get(g.id)
            if o is None:
                patched.append(g)
                continue
            o = _take(o, f"offers for {g.id}", {}, {"reg": 0.0, "spin": 0.0, "nsp": 0.0})
            patched.append(replace(
                g,
                offer_reg=_series(o["reg"], horizon, g.id),
                offer_spin=_series(o["spin"], horizon, g.id),
                offer_nsp=_series(o["nsp"], horizon, g.id)))
        generators = tuple(patched)

    if d["zones"] is not None:
        zone_partition = {str(k): str(v) for k, v in d["zones"].items()}
    else:
        zone_partition = {b.id: "Z1" for b in buses}

    zone_ids = sorted(set(zone_partition.values()))
    if d["requirements"] is not None:
        reg, spin, nsp = {}, {}, {}
        for zid, r in d["requirements"].items():
            r = _take(r, f"requirements {zid}", {"reg": None, "spin": None, "nsp": None})
            reg[zid] = _series(r["reg"], horizon, f"requirements {zid}")
            spin[zid] = _series(r["spin"], horizon, f"requirements {zid}")
            nsp[zid] = _series(r["nsp"], horizon, f"requirements {zid}")
        requirements = ReserveRequirements(reg=reg, spin=spin, nsp=nsp)
    else:
        requirements = ReserveRequirements.zeros(zone_ids, horizon)

    case = MarketCase(horizon=horizon, reference_bus=str(d["reference_bus"]),
                      buses=buses, lines=lines, generators=generators,
                      zone_partition=zone_partition, requirements=requirements)

    # clamp RSU up to p_min before validation; nuclear-style units would
    # otherwise never be able to start
    clamped = []
    for g in case.generators:
        if g.rsu < g.p_min:
            log.warning("generator %s: rsu %.3f below p_min %.3f, clamped up", g.id, g.rsu, g.p_min)
            clamped.append(replace(g, rsu=g.p_min))
        else:
            clamped.append(g)
    case = replace(case, generators=tuple(clamped))

    errors = [diag for diag in validate_case(case) if diag.severity == "error"]
    if errors:
        raise ValidationError(errors)
    return case


def validate_case(case: MarketCase) -> list[Diagnostic]:
    """Check every structural invariant; diagnostics are the output."""
    out: list[Diagnostic] = []
    err = lambda ent, msg: out.append(Diagnostic("error", ent, msg))
    warn = lambda ent, msg: out.append(Diagnostic("warning", ent, msg))

    bus_ids = {b.id for b in case.buses}
    if len(bus_ids) != len(case.buses):
        err("buses", "duplicate bus ids")
    if case.reference_bus not in bus_ids:
        err(case.reference_bus, "reference bus not in bus list")
    if case.horizon < 1:
        err("case", "horizon must be at least 1")

    for b in case.buses:
        if any(dv < 0 for dv in b.demand):
            err(b.id, "negative demand")
        if b.id not in case.zone_partition:
            err(b.id, "bus has no zone assignment")
    for extra in set(case.zone_partition) - bus_ids:
        err(extra, "zone assignment references unknown bus")

    for l in case.lines:
        if l.from_bus not in bus_ids:
            err(l.id, f"from_bus {l.from_bus!r} unknown")
        if l.to_bus not in bus_ids:
            err(l.id, f"to_bus {l.to_bus!r} unknown")
        if l.from_bus == l.to_bus:
            err(l.id, "line connects a bus to itself")
        if l.reactance <= 0:
            err(l.id, "reactance must be positive")
        if any(r <= 0 for r in l.rating):
            err(l.id, "rating must be positive")

    gen_ids = set()
    for g in case.generators:
        if g.id in gen_ids:
            err(g.id, "duplicate generator id")
        gen_ids.add(g.id)
        if g.bus not in bus_ids:
            err(g.id, f"bus {g.bus!r} unknown")
        if not (0 <= g.p_min <= g.p_max):
            err(g.id, f"need 0 <= p_min <= p_max, got [{g.p_min}, {g.p_max}]")
        for name in ("rsu", "rsd", "ru_5min", "ru_10min", "ru_60min", "rd_60min"):
            if getattr(g, name) < 0:
                err(g.id, f"{name} must be non-negative")
        if g.rsu < g.p_min:
            warn(g.id, f"rsu {g.rsu} below p_min {g.p_min} (clamped at load)")
        if g.fuel_class not in FUEL_CLASSES:
            err(g.id, f"unknown fuel_class {g.fuel_class!r}")
        if g.min_up < 1 or g.min_down < 1:
            err(g.id, "min_up and min_down must be at least 1 hour")
        mcs = [s.marginal_cost for s in g.fuel_cost_segments]
        if any(b < a for a, b in zip(mcs, mcs[1:])):
            err(g.id, "fuel cost segments must have non-decreasing marginal cost")
        if any(s.capacity < 0 for s in g.fuel_cost_segments):
            err(g.id, "segment capacity must be non-negative")
        total = sum(s.capacity for s in g.fuel_cost_segments)
        if abs(total - g.p_max) > 1e-6:
            err(g.id, f"segment capacities sum to {total}, expected p_max {g.p_max}")
        if any(o < 0 for o in g.offer_reg + g.offer_spin + g.offer_nsp):
            err(g.id, "reserve offers must be non-negative")

    req = case.requirements
    if req is not None:
        zone_ids = set(case.zone_partition.values())
        for table in (req.reg, req.spin, req.nsp):
            for zid, series in table.items():
                if zid not in zone_ids:
                    err(zid, "requirement for unknown zone")
                if any(v < 0 for v in series):
                    err(zid, "requirements must be non-negative")

    if case.buses and not _connected(case):
        err("network", "grid graph is disconnected")
    return out


def _connected(case: MarketCase) -> bool:
    adj: dict[str, set[str]] = {b.id: set() for b in case.buses}
    for l in case.lines:
        if l.from_bus in adj and l.to_bus in adj:
            adj[l.from_bus].add(l.to_bus)
            adj[l.to_bus].add(l.from_bus)
    seen = {case.buses[0].id}
    stack = [case.buses[0].id]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(case.buses)


# ---------------------------------------------------------------------------
# serialization

def case_to_dict(case: MarketCase) -> dict:
    return {
        "horizon": case.horizon,
        "reference_bus": case.reference_bus,
        "buses": [{"id": b.id, "demand": list(b.demand)} for b in case.buses],
        "lines": [{"id": l.id, "from_bus": l.from_bus, "to_bus": l.to_bus,
                   "reactance": l.reactance, "rating": list(l.rating),
                   "monitored": l.monitored} for l in case.lines],
        "generators": [{
            "id": g.id, "bus": g.bus, "fuel_class": g.fuel_class,
            "p_min": g.p_min, "p_max": g.p_max, "rsu": g.rsu, "rsd": g.rsd,
            "ru_5min": g.ru_5min, "ru_10min": g.ru_10min,
            "ru_60min": g.ru_60min, "rd_60min": g.rd_60min,
            "cost_startup": g.cost_startup, "cost_noload": g.cost_noload,
            "fuel_cost_segments": [[s.capacity, s.marginal_cost] for s in g.fuel_cost_segments],
            "min_up": g.min_up, "min_down": g.min_down,
            "offer_reg": list(g.offer_reg), "offer_spin": list(g.offer_spin),
            "offer_nsp": list(g.offer_nsp),
            "initial_status": g.initial_status, "initial_power": g.initial_power,
        } for g in case.generators],
        "zones": dict(case.zone_partition),
        "requirements": {
            zid: {"reg": list(case.requirements.reg[zid]),
                  "spin": list(case.requirements.spin[zid]),
                  "nsp": list(case.requirements.nsp[zid])}
            for zid in case.requirements.zones()
        } if case.requirements is not None else None,
    }


def write_case(case: MarketCase, path) -> None:
    doc = case_to_dict(case)
    if doc["requirements"] is None:
        del doc["requirements"]
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
