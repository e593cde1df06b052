"""Matplotlib rendering of the suite comparison figures.

Each figure is written as a PNG next to the delimited plot-data files, so
reports can be assembled without re-running the solver.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .settlement import aggregate_by_fuel
from .suite import PRODUCTS, SuiteResult

_PRODUCT_LABEL = {"reg": "Regulation", "spin": "Spinning", "nsp": "Non-spinning"}


def render_figures(suite: SuiteResult, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        _objective_and_startup(suite, out_dir / "fig2_objective_startup.png"),
        _mcp_series(suite, out_dir / "fig3_mcp.png"),
        _settlement_bars(suite, out_dir / "fig4_settlement.png"),
        _fuel_shares(suite, out_dir / "fig5_fuel_shares.png"),
        _revenue_distributions(suite, out_dir / "fig6_distribution.png"),
    ]
    return [p for p in written if p is not None]


def _objective_and_startup(suite: SuiteResult, path: Path) -> Path:
    names = sorted(suite.results)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.bar(names, [suite.results[n].objective for n in names], color="tab:blue")
    ax1.set_ylabel("Objective ($)")
    ax1.set_title("Total cost by variant")
    ax2.bar(names, [suite.results[n].startup_cost_total(suite.case) for n in names],
            color="tab:orange")
    ax2.set_ylabel("Startup cost ($)")
    ax2.set_title("Startup cost by variant")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _mcp_series(suite: SuiteResult, path: Path) -> Path:
    zones = sorted(set(suite.case.zone_partition.values()))
    fig, axes = plt.subplots(len(PRODUCTS), 1, figsize=(8, 8), sharex=True)
    for ax, product in zip(np.atleast_1d(axes), PRODUCTS):
        for name in sorted(suite.results):
            r = suite.results[name]
            for z in zones:
                ax.plot(r.mcp_table(product)[z], label=f"{name} {z}", alpha=0.8)
        ax.set_ylabel(f"{_PRODUCT_LABEL[product]} MCP ($/MWh)")
    np.atleast_1d(axes)[-1].set_xlabel("Hour")
    np.atleast_1d(axes)[0].legend(fontsize=6, ncol=4)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _settlement_bars(suite: SuiteResult, path: Path) -> Path:
    names = sorted(suite.results)
    cols = ["erev", "ecos", "epro", "rrev_reg", "rrev_spin", "rcos_online",
            "rpro_online", "rrev_nsp", "rcos_nsp", "rpro_nsp"]
    fig, ax = plt.subplots(figsize=(10, 4))
    width = 0.8 / len(names)
    x = np.arange(len(cols))
    for i, name in enumerate(names):
        tot = suite.results[name].settlement.system_totals
        ax.bar(x + i * width, [tot[c] for c in cols], width, label=name)
    ax.set_xticks(x + 0.4 - width / 2)
    ax.set_xticklabels(cols, rotation=30, ha="right")
    ax.set_ylabel("$")
    ax.set_title("System revenue, cost, and profit")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _fuel_shares(suite: SuiteResult, path: Path) -> Path:
    names = sorted(suite.results)
    metrics = ["energy_revenue_share", "ancillary_revenue_share", "total_revenue_share"]
    fig, axes = plt.subplots(1, len(metrics), figsize=(12, 3.5), sharey=True)
    for ax, metric in zip(np.atleast_1d(axes), metrics):
        classes = None
        width = 0.8 / len(names)
        for i, name in enumerate(names):
            shares = aggregate_by_fuel(suite.results[name].settlement, suite.case)
            classes = sorted(shares)
            x = np.arange(len(classes))
            ax.bar(x + i * width, [shares[c][metric] for c in classes], width,
                   label=name)
        ax.set_xticks(np.arange(len(classes)) + 0.4 - width / 2)
        ax.set_xticklabels(classes)
        ax.set_title(metric.replace("_", " "))
    np.atleast_1d(axes)[0].set_ylabel("%")
    np.atleast_1d(axes)[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _revenue_distributions(suite: SuiteResult, path: Path) -> Path:
    names = sorted(suite.results)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    for ax, column, title in ((ax1, "erev", "Energy revenue"),
                              (ax2, "ancillary", "Ancillary revenue")):
        for name in names:
            report = suite.results[name].settlement
            values = ([led.erev for led in report.generators.values()]
                      if column == "erev" else
                      [led.ancillary_revenue for led in report.generators.values()])
            arr = np.array(values)
            mu, sigma = arr.mean(), arr.std()
            if sigma > 0:
                xs = np.linspace(mu - 3 * sigma, mu + 3 * sigma, 200)
                ax.plot(xs, np.exp(-0.5 * ((xs - mu) / sigma) ** 2)
                        / (sigma * np.sqrt(2 * np.pi)), label=name)
        ax.set_title(f"{title} distribution")
        ax.set_xlabel("$")
    ax1.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
