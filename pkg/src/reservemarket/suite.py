"""Four-variant suite runner and report emission.

For each requested variant this writes the solution/price/settlement CSVs
under ``<out_dir>/<variant>/``, then a cross-variant ``summary.csv``,
tidy long-format plot-data CSVs, and (optionally) rendered figures.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import CommitmentSolution, PriceSet, run_variant
from .model_io import MarketCase, VariantConfig
from .network import build_ptdf
from .settlement import (SettlementReport, aggregate_by_fuel, settle,
                         write_distribution_csv, write_fuel_shares_csv,
                         write_settlement_csv)

log = logging.getLogger(__name__)

PRODUCTS = ("reg", "spin", "nsp")


@dataclass
class VariantResult:
    variant: VariantConfig
    solution: CommitmentSolution
    prices: PriceSet
    settlement: SettlementReport

    @property
    def objective(self) -> float:
        return self.solution.objective_value

    def startup_cost_total(self, case: MarketCase) -> float:
        return self.solution.startup_cost_total(case)

    def mcp_table(self, product: str) -> dict[str, np.ndarray]:
        return {"reg": self.prices.mcp_reg, "spin": self.prices.mcp_spin,
                "nsp": self.prices.mcp_nsp}[product]

    def average_mcp(self, product: str, zone: str | None = None) -> float:
        table = self.mcp_table(product)
        if zone is not None:
            return float(np.mean(table[zone]))
        return float(np.mean([series for series in table.values()]))


@dataclass
class SuiteResult:
    case: MarketCase
    results: dict[str, VariantResult]  # keyed by variant name
    deltas: dict[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        names = list(self.results)
        self.deltas = {(a, b): self.results[a].objective - self.results[b].objective
                       for a in names for b in names if a != b}


def run_suite(case: MarketCase, variants, out_dir, gap: float = 1e-4,
              time_limit: float | None = None, backend: str = "linked",
              solver_cmd: str | None = None, serial: bool = False,
              figures: bool = True) -> SuiteResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ptdf = build_ptdf(case)

    def one(variant: VariantConfig) -> VariantResult:
        solution, prices = run_variant(case, variant, gap=gap,
                                       time_limit=time_limit, backend=backend,
                                       solver_cmd=solver_cmd, ptdf=ptdf)
        report = settle(case, variant, solution, prices)
        return VariantResult(variant, solution, prices, report)

    try:
        if serial or len(variants) == 1:
            results = [one(v) for v in variants]
        else:
            with ThreadPoolExecutor(max_workers=len(variants)) as pool:
                results = list(pool.map(one, variants))
    except Exception:
        (out_dir / "FAILED").write_text("suite run failed; partial outputs only\n")
        raise

    suite = SuiteResult(case=case, results={r.variant.name: r for r in results})
    for r in results:
        write_variant_outputs(case, r, out_dir / r.variant.name)
    write_summary_csv(suite, out_dir / "summary.csv")
    emit_plot_data(suite, out_dir)
    if figures:
        from .figures import render_figures
        render_figures(suite, out_dir)
    return suite


# ---------------------------------------------------------------------------
# per-variant files

def write_variant_outputs(case: MarketCase, result: VariantResult, vdir: Path) -> None:
    vdir.mkdir(parents=True, exist_ok=True)
    sol = result.solution
    prices = result.prices

    with (vdir / "commitment.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gen", "t", "u", "su", "sd", "p", "r_reg", "r_spin", "r_nsp"])
        for g in case.generators:
            for t in range(case.horizon):
                w.writerow([g.id, t, int(sol.u[g.id][t]), int(sol.su[g.id][t]),
                            int(sol.sd[g.id][t]), repr(float(sol.p[g.id][t])),
                            repr(float(sol.r_reg[g.id][t])),
                            repr(float(sol.r_spin[g.id][t])),
                            repr(float(sol.r_nsp[g.id][t]))])

    with (vdir / "flows.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["line", "t", "flow", "rating", "monitored"])
        for l in case.lines:
            for t in range(case.horizon):
                w.writerow([l.id, t, repr(float(sol.f[l.id][t])),
                            repr(l.rating[t]), int(l.monitored)])

    with (vdir / "prices_lmp.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bus", "t", "lmp"])
        for b in case.buses:
            for t in range(case.horizon):
                w.writerow([b.id, t, repr(float(prices.lmp[b.id][t]))])

    components = sorted({comp for comp, _ in prices.duals})
    with (vdir / "prices_mcp.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["zone", "t", "product", *[f"sp_{c}" for c in components], "mcp"])
        for z in prices.zones():
            for t in range(case.horizon):
                for product in PRODUCTS:
                    mcp = result.mcp_table(product)[z][t]
                    w.writerow([z, t, product,
                                *[repr(float(prices.duals[(c, z)][t])) for c in components],
                                repr(float(mcp))])

    write_settlement_csv(result.settlement, vdir / "settlement.csv")
    write_fuel_shares_csv(aggregate_by_fuel(result.settlement, case),
                          vdir / "fuel_shares.csv")
    for cls in sorted({g.fuel_class for g in case.generators}):
        write_distribution_csv(result.settlement, cls, vdir / f"distribution_{cls}.csv")


def write_summary_csv(suite: SuiteResult, path) -> None:
    case = suite.case
    zones = sorted(set(case.zone_partition.values()))
    header = ["variant", "objective", "startup_cost_total"]
    for product in PRODUCTS:
        for z in zones:
            header.append(f"avg_mcp_{product}_{z}")
    header += ["revenue_energy", "cost_energy", "profit_energy",
               "revenue_reg", "revenue_spin", "cost_online", "profit_online",
               "revenue_nsp", "cost_nsp", "profit_nsp"]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for name in sorted(suite.results):
            r = suite.results[name]
            tot = r.settlement.system_totals
            row = [name, repr(r.objective), repr(r.startup_cost_total(case))]
            for product in PRODUCTS:
                for z in zones:
                    row.append(repr(r.average_mcp(product, z)))
            row += [repr(tot["erev"]), repr(tot["ecos"]), repr(tot["epro"]),
                    repr(tot["rrev_reg"]), repr(tot["rrev_spin"]),
                    repr(tot["rcos_online"]), repr(tot["rpro_online"]),
                    repr(tot["rrev_nsp"]), repr(tot["rcos_nsp"]),
                    repr(tot["rpro_nsp"])]
            w.writerow(row)


# ---------------------------------------------------------------------------
# tidy plot data mirroring the report figures

def emit_plot_data(suite: SuiteResult, out_dir) -> list[Path]:
    """Long-format CSVs keyed (figure, series, x, y), enough to regenerate
    every comparison figure with any plotting tool."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    case = suite.case
    written = []

    def tidy(name: str, rows) -> None:
        path = out_dir / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["figure", "series", "x", "y"])
            for row in rows:
                w.writerow([row[0], row[1], row[2], repr(float(row[3]))])
        written.append(path)

    tidy("fig2_objective.csv",
         [("objective", name, name, r.objective)
          for name, r in sorted(suite.results.items())])
    tidy("fig2_startup.csv",
         [("startup_cost", name, name, r.startup_cost_total(case))
          for name, r in sorted(suite.results.items())])

    rows = []
    for name, r in sorted(suite.results.items()):
        for product in PRODUCTS:
            for z in r.prices.zones():
                for t in range(case.horizon):
                    rows.append((f"mcp_{product}", f"{name}/{z}", t,
                                 r.mcp_table(product)[z][t]))
    tidy("fig3_mcp.csv", rows)

    rows = []
    for name, r in sorted(suite.results.items()):
        tot = r.settlement.system_totals
        for col, val in tot.items():
            rows.append(("settlement_totals", name, col, val))
    tidy("fig4_settlement.csv", rows)

    rows = []
    for name, r in sorted(suite.results.items()):
        for cls, share in aggregate_by_fuel(r.settlement, case).items():
            for key, val in share.items():
                rows.append((key, name, cls, val))
    tidy("fig5_shares.csv", rows)

    rows = []
    for name, r in sorted(suite.results.items()):
        for gid in sorted(r.settlement.generators):
            led = r.settlement.generators[gid]
            rows.append(("energy_revenue", f"{name}/{led.fuel_class}", gid, led.erev))
            rows.append(("ancillary_revenue", f"{name}/{led.fuel_class}", gid,
                         led.ancillary_revenue))
    tidy("fig6_distribution.csv", rows)
    return written
