"""Per-generator cost/revenue/profit ledger and fuel-class aggregates.

Energy is settled at the bus LMP, reserves at the zonal MCP of the
generator's own zone.  The online-reserve cost is a lost-opportunity cost:
its per-MW rate is the positive part of (LMP - average production cost),
charged against reg+spin in non-sharing variants and against
max(reg, spin) in sharing variants, where the headroom overlaps.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import CommitmentSolution, PriceSet
from .errors import EmptyClass, VariantMismatch
from .model_io import CapacityOption, MarketCase, VariantConfig


@dataclass
class GeneratorLedger:
    gen: str
    fuel_class: str
    ecos: float
    erev: float
    epro: float
    rcos_online: float
    rcos_nsp: float
    rrev_reg: float
    rrev_spin: float
    rrev_nsp: float
    rpro_online: float
    rpro_nsp: float
    lo: np.ndarray                 # $/MWh per interval (nan when offline)
    unit_cost_online: np.ndarray   # $/MWh per interval (0 when offline)

    @property
    def ancillary_revenue(self) -> float:
        return self.rrev_reg + self.rrev_spin + self.rrev_nsp

    @property
    def total_revenue(self) -> float:
        return self.erev + self.ancillary_revenue


@dataclass
class SettlementReport:
    variant: VariantConfig
    generators: dict[str, GeneratorLedger]
    fuel_totals: dict[str, dict[str, float]]
    system_totals: dict[str, float]


_LEDGER_COLUMNS = ("ecos", "erev", "epro", "rcos_online", "rcos_nsp",
                   "rrev_reg", "rrev_spin", "rrev_nsp", "rpro_online", "rpro_nsp")


def settle(case: MarketCase, variant: VariantConfig,
           solution: CommitmentSolution, prices: PriceSet) -> SettlementReport:
    if prices.variant != variant:
        raise VariantMismatch(
            f"prices composed under {prices.variant.name}, settling {variant.name}")
    sharing = variant.capacity is CapacityOption.SHARING
    T = case.horizon
    ledgers: dict[str, GeneratorLedger] = {}
    for g in case.generators:
        zone = case.zone_partition[g.bus]
        lmp = prices.lmp[g.bus]
        p = solution.p[g.id]
        u = solution.u[g.id]
        r_reg = solution.r_reg[g.id]
        r_spin = solution.r_spin[g.id]
        r_nsp = solution.r_nsp[g.id]

        ecos = float(sum(g.fuel_cost(p[t]) for t in range(T)))
        erev = float(np.dot(lmp, p))
        epro = erev - ecos

        lo = np.full(T, np.nan)
        unit_cost = np.zeros(T)
        for t in range(T):
            if u[t] < 0.5:
                continue
            if p[t] > 0.0:
                lo[t] = lmp[t] - g.fuel_cost(p[t]) / p[t]
            else:
                # committed at zero output (p_min = 0): marginal cost of the
                # first MW stands in for the undefined average
                lo[t] = lmp[t] - g.fuel_cost_segments[0].marginal_cost
            unit_cost[t] = max(lo[t], 0.0)

        if sharing:
            occupied = np.maximum(r_reg, r_spin)
        else:
            occupied = r_reg + r_spin
        rcos_online = float(np.dot(unit_cost, occupied))
        rcos_nsp = float(sum(g.offer_nsp[t] * r_nsp[t] for t in range(T)))

        rrev_reg = float(np.dot(prices.mcp_reg[zone], r_reg))
        rrev_spin = float(np.dot(prices.mcp_spin[zone], r_spin))
        rrev_nsp = float(np.dot(prices.mcp_nsp[zone], r_nsp))

        ledgers[g.id] = GeneratorLedger(
            gen=g.id, fuel_class=g.fuel_class,
            ecos=ecos, erev=erev, epro=epro,
            rcos_online=rcos_online, rcos_nsp=rcos_nsp,
            rrev_reg=rrev_reg, rrev_spin=rrev_spin, rrev_nsp=rrev_nsp,
            rpro_online=(rrev_reg + rrev_spin) - rcos_online,
            rpro_nsp=rrev_nsp - rcos_nsp,
            lo=lo, unit_cost_online=unit_cost)

    fuel_totals: dict[str, dict[str, float]] = {}
    for g in case.generators:
        cls = fuel_totals.setdefault(g.fuel_class, {c: 0.0 for c in _LEDGER_COLUMNS})
        for c in _LEDGER_COLUMNS:
            cls[c] += getattr(ledgers[g.id], c)
    system = {c: sum(cls[c] for cls in fuel_totals.values()) for c in _LEDGER_COLUMNS}
    return SettlementReport(variant=variant, generators=ledgers,
                            fuel_totals=fuel_totals, system_totals=system)


def aggregate_by_fuel(report: SettlementReport, case: MarketCase) -> dict[str, dict[str, float]]:
    """Percentage shares per fuel class: generation capacity, energy revenue,
    ancillary revenue, and total revenue."""
    capacity: dict[str, float] = {}
    energy: dict[str, float] = {}
    ancillary: dict[str, float] = {}
    total: dict[str, float] = {}
    for g in case.generators:
        led = report.generators[g.id]
        capacity[g.fuel_class] = capacity.get(g.fuel_class, 0.0) + g.p_max
        energy[g.fuel_class] = energy.get(g.fuel_class, 0.0) + led.erev
        ancillary[g.fuel_class] = ancillary.get(g.fuel_class, 0.0) + led.ancillary_revenue
        total[g.fuel_class] = total.get(g.fuel_class, 0.0) + led.total_revenue

    def shares(table: dict[str, float]) -> dict[str, float]:
        denom = sum(table.values())
        if denom == 0.0:
            return {cls: 0.0 for cls in table}
        return {cls: 100.0 * v / denom for cls, v in table.items()}

    cap_s, en_s, anc_s, tot_s = (shares(t) for t in (capacity, energy, ancillary, total))
    return {cls: {"capacity_share": cap_s[cls], "energy_revenue_share": en_s[cls],
                  "ancillary_revenue_share": anc_s[cls],
                  "total_revenue_share": tot_s[cls]}
            for cls in sorted(capacity)}


def revenue_distribution(report: SettlementReport, fuel_class: str,
                         column: str = "erev") -> tuple[float, float, list[float]]:
    """Mean, population standard deviation, and raw values of a revenue
    column across one fuel class.  ``column`` may be 'erev', 'ancillary',
    or any ledger column name."""
    values = []
    for led in report.generators.values():
        if led.fuel_class != fuel_class:
            continue
        values.append(led.ancillary_revenue if column == "ancillary"
                      else float(getattr(led, column)))
    if not values:
        raise EmptyClass(f"no generators in fuel class {fuel_class!r}")
    arr = np.array(values)
    return float(arr.mean()), float(arr.std()), values


# ---------------------------------------------------------------------------
# CSV emission

def write_settlement_csv(report: SettlementReport, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gen", "fuel_class", *_LEDGER_COLUMNS])
        for gid in sorted(report.generators):
            led = report.generators[gid]
            w.writerow([gid, led.fuel_class,
                        *[repr(getattr(led, c)) for c in _LEDGER_COLUMNS]])


def write_fuel_shares_csv(shares: dict[str, dict[str, float]], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["fuel_class", "capacity_share", "energy_revenue_share",
                    "ancillary_revenue_share", "total_revenue_share"])
        for cls, row in shares.items():
            w.writerow([cls, *(repr(row[k]) for k in
                               ("capacity_share", "energy_revenue_share",
                                "ancillary_revenue_share", "total_revenue_share"))])


def write_distribution_csv(report: SettlementReport, fuel_class: str, path) -> None:
    mean_e, std_e, energy = revenue_distribution(report, fuel_class, "erev")
    mean_a, std_a, anc = revenue_distribution(report, fuel_class, "ancillary")
    gens = [gid for gid in sorted(report.generators)
            if report.generators[gid].fuel_class == fuel_class]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gen", "energy_revenue", "ancillary_revenue"])
        for gid in gens:
            led = report.generators[gid]
            w.writerow([gid, repr(led.erev), repr(led.ancillary_revenue)])
        w.writerow(["mean", repr(mean_e), repr(mean_a)])
        w.writerow(["stddev", repr(std_e), repr(std_a)])
