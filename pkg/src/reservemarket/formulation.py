"""MILP construction for the co-optimized energy/reserve market.

Every constraint row carries a structured tag (kind, entity, interval) so
that duals can be addressed after the pricing run and rows can be named
deterministically in MPS exports.  Intervals are 0-based everywhere.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageError
from .model_io import CapacityOption, MarketCase, RequirementOption, VariantConfig
from .network import PtdfMatrix, build_ptdf


class ConstraintKind(enum.Enum):
    CAPACITY_LOWER = "CapacityLower"
    CAPACITY_UPPER = "CapacityUpper"
    CAPACITY_LOWER_REG = "CapacityLowerReg"
    CAPACITY_UPPER_REG = "CapacityUpperReg"
    CAPACITY_LOWER_SPIN = "CapacityLowerSpin"
    CAPACITY_UPPER_SPIN = "CapacityUpperSpin"
    STARTUP_CAP = "StartupCap"
    STARTUP_CAP_REG = "StartupCapReg"
    STARTUP_CAP_SPIN = "StartupCapSpin"
    REQ_REG = "ReqReg"
    REQ_SPIN = "ReqSpin"
    REQ_NSP = "ReqNsp"
    REQ_CASCADE_R = "ReqCascadeR"
    REQ_CASCADE_RS = "ReqCascadeRS"
    REQ_CASCADE_RSN = "ReqCascadeRSN"
    RAMP_UP = "RampUp"
    RAMP_DOWN = "RampDown"
    REG_RAMP = "RegRamp"
    SPIN_RAMP = "SpinRamp"
    NSP_OFFLINE = "NspOffline"
    MIN_UP = "MinUp"
    MIN_DOWN = "MinDown"
    LOGIC = "Logic"
    NODAL_BALANCE = "NodalBalance"
    FLOW_DEF = "FlowDef"
    FLOW_LIMIT = "FlowLimit"
    SEGMENT_LINK = "SegmentLink"


REQUIREMENT_KINDS = {
    ConstraintKind.REQ_REG, ConstraintKind.REQ_SPIN, ConstraintKind.REQ_NSP,
    ConstraintKind.REQ_CASCADE_R, ConstraintKind.REQ_CASCADE_RS,
    ConstraintKind.REQ_CASCADE_RSN,
}


@dataclass(frozen=True)
class Tag:
    kind: ConstraintKind
    entity: str
    t: int

    @property
    def name(self) -> str:
        return f"{self.kind.value}_{self.entity}_{self.t}"


@dataclass
class Variable:
    key: tuple
    lb: float
    ub: float
    integer: bool
    cost: float

    @property
    def name(self) -> str:
        return "_".join(str(part) for part in self.key)


@dataclass
class Row:
    tag: Tag
    coefs: dict[int, float]  # variable index -> coefficient
    sense: str               # "<=", ">=", "=="
    rhs: float


@dataclass
class MilpModel:
    case: MarketCase
    variant: VariantConfig
    ptdf: PtdfMatrix
    variables: list[Variable] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    _index: dict[tuple, int] = field(default_factory=dict)
    _tags: set[Tag] = field(default_factory=set)

    # -- construction helpers -------------------------------------------------
    def add_var(self, key: tuple, lb: float, ub: float,
                integer: bool = False, cost: float = 0.0) -> int:
        if key in self._index:
            raise ValueError(f"duplicate variable {key}")
        self._index[key] = len(self.variables)
        self.variables.append(Variable(key, lb, ub, integer, cost))
        return self._index[key]

    def add_row(self, tag: Tag, coefs: dict[int, float], sense: str, rhs: float) -> None:
        if tag in self._tags:
            raise ValueError(f"duplicate constraint tag {tag.name}")
        self._tags.add(tag)
        self.rows.append(Row(tag, coefs, sense, rhs))

    def var(self, *key) -> int:
        return self._index[key]

    def has_var(self, *key) -> bool:
        return key in self._index

    # -- inspection -----------------------------------------------------------
    def rows_of_kind(self, kind: ConstraintKind) -> list[Row]:
        return [r for r in self.rows if r.tag.kind == kind]

    def objective_value(self, values: np.ndarray) -> float:
        return float(sum(v.cost * values[i] for i, v in enumerate(self.variables) if v.cost))

    def values_from_mapping(self, assignment: dict) -> np.ndarray:
        missing = [v.key for v in self.variables if v.key not in assignment]
        if missing:
            raise CoverageError(f"assignment misses {len(missing)} variables, "
                                f"e.g. {missing[0]}")
        return np.array([assignment[v.key] for v in self.variables], dtype=float)


def build_model(case: MarketCase, variant: VariantConfig,
                ptdf: PtdfMatrix | None = None) -> MilpModel:
    """Assemble objective, unit-commitment, network, and variant-selected
    capacity/start-up/requirement constraint blocks."""
    if ptdf is None:
        ptdf = build_ptdf(case)
    m = MilpModel(case=case, variant=variant, ptdf=ptdf)
    T = case.horizon
    inf = math.inf

    # ---- variables ----
    for g in case.generators:
        forced_on = max(0, g.min_up - g.initial_status) if g.initially_on else 0
        forced_off = max(0, g.min_down + g.initial_status) if not g.initially_on else 0
        for t in range(T):
            m.add_var(("p", g.id, t), 0.0, g.p_max)
            for s, seg in enumerate(g.fuel_cost_segments):
                m.add_var(("pseg", g.id, t, s), 0.0, seg.capacity, cost=seg.marginal_cost)
            m.add_var(("rreg", g.id, t), 0.0, g.p_max, cost=g.offer_reg[t])
            m.add_var(("rspin", g.id, t), 0.0, g.p_max, cost=g.offer_spin[t])
            m.add_var(("rnsp", g.id, t), 0.0, max(g.p_max, g.rsu), cost=g.offer_nsp[t])
            u_lb, u_ub = 0.0, 1.0
            if t < forced_on:
                u_lb = 1.0
            if t < forced_off:
                u_ub = 0.0
            m.add_var(("u", g.id, t), u_lb, u_ub, integer=True, cost=g.cost_noload)
            m.add_var(("su", g.id, t), 0.0, 1.0, integer=True, cost=g.cost_startup)
            m.add_var(("sd", g.id, t), 0.0, 1.0, integer=True)
    for l in case.lines:
        for t in range(T):
            m.add_var(("f", l.id, t), -inf, inf)

    sharing = variant.capacity is CapacityOption.SHARING
    cascading = variant.requirements is RequirementOption.CASCADING

    # ---- per-generator rows ----
    for g in case.generators:
        u0 = 1.0 if g.initially_on else 0.0
        p0 = g.initial_power if g.initially_on else 0.0
        for t in range(T):
            p = m.var("p", g.id, t)
            rr = m.var("rreg", g.id, t)
            rs = m.var("rspin", g.id, t)
            rn = m.var("rnsp", g.id, t)
            u = m.var("u", g.id, t)
            su = m.var("su", g.id, t)
            sd = m.var("sd", g.id, t)

            segs = {m.var("pseg", g.id, t, s): 1.0
                    for s in range(len(g.fuel_cost_segments))}
            m.add_row(Tag(ConstraintKind.SEGMENT_LINK, g.id, t),
                      {**segs, p: -1.0}, "==", 0.0)

            if not sharing:
                m.add_row(Tag(ConstraintKind.CAPACITY_LOWER, g.id, t),
                          {p: 1.0, rr: -1.0, rs: -1.0, u: -g.p_min}, ">=", 0.0)
                m.add_row(Tag(ConstraintKind.CAPACITY_UPPER, g.id, t),
                          {p: 1.0, rr: 1.0, rs: 1.0, u: -g.p_max}, "<=", 0.0)
                m.add_row(Tag(ConstraintKind.STARTUP_CAP, g.id, t),
                          {p: 1.0, rr: 1.0, rs: 1.0, su: g.p_max - g.rsu},
                          "<=", g.p_max)
            else:
                m.add_row(Tag(ConstraintKind.CAPACITY_LOWER_REG, g.id, t),
                          {p: 1.0, rr: -1.0, u: -g.p_min}, ">=", 0.0)
                m.add_row(Tag(ConstraintKind.CAPACITY_UPPER_REG, g.id, t),
                          {p: 1.0, rr: 1.0, u: -g.p_max}, "<=", 0.0)
                m.add_row(Tag(ConstraintKind.CAPACITY_LOWER_SPIN, g.id, t),
                          {p: 1.0, rs: -1.0, u: -g.p_min}, ">=", 0.0)
                m.add_row(Tag(ConstraintKind.CAPACITY_UPPER_SPIN, g.id, t),
                          {p: 1.0, rs: 1.0, u: -g.p_max}, "<=", 0.0)
                m.add_row(Tag(ConstraintKind.STARTUP_CAP_REG, g.id, t),
                          {p: 1.0, rr: 1.0, su: g.p_max - g.rsu}, "<=", g.p_max)
                m.add_row(Tag(ConstraintKind.STARTUP_CAP_SPIN, g.id, t),
                          {p: 1.0, rs: 1.0, su: g.p_max - g.rsu}, "<=", g.p_max)

            m.add_row(Tag(ConstraintKind.REG_RAMP, g.id, t), {rr: 1.0}, "<=", g.ru_5min)
            m.add_row(Tag(ConstraintKind.SPIN_RAMP, g.id, t), {rs: 1.0}, "<=", g.ru_10min)
            m.add_row(Tag(ConstraintKind.NSP_OFFLINE, g.id, t),
                      {rn: 1.0, u: g.rsu}, "<=", g.rsu)

            # hourly energy ramps; the start-up/shut-down term relaxes them
            # on transition intervals
            up = {p: 1.0, su: g.ru_60min - g.rsu}
            rhs_up = g.ru_60min
            if t > 0:
                up[m.var("p", g.id, t - 1)] = -1.0
            else:
                rhs_up += p0
            m.add_row(Tag(ConstraintKind.RAMP_UP, g.id, t), up, "<=", rhs_up)

            down = {p: -1.0, sd: g.rd_60min - g.rsd}
            rhs_down = g.rd_60min
            if t > 0:
                down[m.var("p", g.id, t - 1)] = 1.0
            else:
                rhs_down -= p0
            m.add_row(Tag(ConstraintKind.RAMP_DOWN, g.id, t), down, "<=", rhs_down)

            window = range(max(0, t - g.min_up + 1), t + 1)
            coefs = {m.var("su", g.id, q): 1.0 for q in window}
            coefs[u] = coefs.get(u, 0.0) - 1.0
            m.add_row(Tag(ConstraintKind.MIN_UP, g.id, t), coefs, "<=", 0.0)

            window = range(max(0, t - g.min_down + 1), t + 1)
            coefs = {m.var("sd", g.id, q): 1.0 for q in window}
            coefs[u] = coefs.get(u, 0.0) + 1.0
            m.add_row(Tag(ConstraintKind.MIN_DOWN, g.id, t), coefs, "<=", 1.0)

            logic = {u: 1.0, su: -1.0, sd: 1.0}
            rhs = 0.0
            if t > 0:
                logic[m.var("u", g.id, t - 1)] = -1.0
            else:
                rhs = u0
            m.add_row(Tag(ConstraintKind.LOGIC, g.id, t), logic, "==", rhs)

    # ---- network rows ----
    gens_at: dict[str, list[str]] = {b.id: [] for b in case.buses}
    for g in case.generators:
        gens_at[g.bus].append(g.id)

    for t in range(T):
        for b in case.buses:
            coefs: dict[int, float] = {}
            for l in case.lines:
                if l.to_bus == b.id:
                    coefs[m.var("f", l.id, t)] = coefs.get(m.var("f", l.id, t), 0.0) + 1.0
                if l.from_bus == b.id:
                    coefs[m.var("f", l.id, t)] = coefs.get(m.var("f", l.id, t), 0.0) - 1.0
            for gid in gens_at[b.id]:
                coefs[m.var("p", gid, t)] = 1.0
            m.add_row(Tag(ConstraintKind.NODAL_BALANCE, b.id, t), coefs, "==",
                      b.demand[t])

        for li, l in enumerate(case.lines):
            coefs = {m.var("f", l.id, t): 1.0}
            rhs = 0.0
            for bi, b in enumerate(case.buses):
                sens = ptdf.entries[li, bi]
                if sens == 0.0:
                    continue
                for gid in gens_at[b.id]:
                    pv = m.var("p", gid, t)
                    coefs[pv] = coefs.get(pv, 0.0) - sens
                rhs -= sens * b.demand[t]
            m.add_row(Tag(ConstraintKind.FLOW_DEF, l.id, t), coefs, "==", rhs)

            if l.monitored:
                fv = m.var("f", l.id, t)
                m.add_row(Tag(ConstraintKind.FLOW_LIMIT, f"{l.id}+", t),
                          {fv: 1.0}, "<=", l.rating[t])
                m.add_row(Tag(ConstraintKind.FLOW_LIMIT, f"{l.id}-", t),
                          {fv: -1.0}, "<=", l.rating[t])

    # ---- zonal requirement rows ----
    req = case.requirements
    for z in sorted(set(case.zone_partition.values())):
        zone_gens = [g.id for g in case.generators if case.zone_partition[g.bus] == z]
        for t in range(T):
            rr = req.reg.get(z, (0.0,) * T)[t]
            rs = req.spin.get(z, (0.0,) * T)[t]
            rn = req.nsp.get(z, (0.0,) * T)[t]
            regs = {m.var("rreg", gid, t): 1.0 for gid in zone_gens}
            spins = {m.var("rspin", gid, t): 1.0 for gid in zone_gens}
            nsps = {m.var("rnsp", gid, t): 1.0 for gid in zone_gens}
            if not cascading:
                m.add_row(Tag(ConstraintKind.REQ_REG, z, t), dict(regs), ">=", rr)
                m.add_row(Tag(ConstraintKind.REQ_SPIN, z, t), dict(spins), ">=", rs)
                m.add_row(Tag(ConstraintKind.REQ_NSP, z, t), dict(nsps), ">=", rn)
            else:
                m.add_row(Tag(ConstraintKind.REQ_CASCADE_R, z, t), dict(regs), ">=", rr)
                m.add_row(Tag(ConstraintKind.REQ_CASCADE_RS, z, t),
                          {**regs, **spins}, ">=", rr + rs)
                m.add_row(Tag(ConstraintKind.REQ_CASCADE_RSN, z, t),
                          {**regs, **spins, **nsps}, ">=", rr + rs + rn)
    return m


def feasible_check(model: MilpModel, assignment, tol: float = 1e-6) -> list[Tag]:
    """Return the tags of every constraint the assignment violates by more
    than ``tol`` (absolute), including variable bound violations reported
    under the row that would catch them.  Empty list certifies feasibility."""
    if isinstance(assignment, dict):
        values = model.values_from_mapping(assignment)
    else:
        values = np.asarray(assignment, dtype=float)
        if values.shape != (len(model.variables),):
            raise CoverageError(
                f"expected {len(model.variables)} values, got shape {values.shape}")
    violated = []
    for row in model.rows:
        lhs = sum(c * values[i] for i, c in row.coefs.items())
        if row.sense == "<=" and lhs > row.rhs + tol:
            violated.append(row.tag)
        elif row.sense == ">=" and lhs < row.rhs - tol:
            violated.append(row.tag)
        elif row.sense == "==" and abs(lhs - row.rhs) > tol:
            violated.append(row.tag)
    return violated
