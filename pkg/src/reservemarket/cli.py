"""Command line front end.

Subcommands: ``simulate`` (variant suite), ``zone`` (K-means zoning and
requirement sizing), ``offers`` (lost-opportunity offer construction),
``export-mps`` (tagged model export), ``validate`` (case diagnostics).

Exit codes: 0 ok, 1 runtime failure, 2 usage error, 3 infeasible market.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import InfeasibleError, ReserveMarketError
from .formulation import build_model
from .model_io import VariantConfig, all_variants, load_case, validate_case
from .mps import write_mps
from .network import build_ptdf, export_ptdf_csv
from .offers import HistorySnapshot, compute_offers
from .suite import run_suite
from .zoning import (cluster_buses, export_partition_csv,
                     export_requirements_csv, size_requirements)

VARIANT_NAMES = tuple(v.name for v in all_variants())


def _add_case(p: argparse.ArgumentParser) -> None:
    p.add_argument("--case", required=True, help="market case JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reservemarket",
        description="Day-ahead market clearing and settlement under "
                    "alternative reserve modeling variants")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one or all market variants")
    _add_case(sim)
    group = sim.add_mutually_exclusive_group(required=True)
    group.add_argument("--variant", choices=VARIANT_NAMES)
    group.add_argument("--all-variants", action="store_true")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--gap", type=float, default=1e-4, help="MIP relative gap")
    sim.add_argument("--time-limit", type=float, default=None, help="seconds")
    sim.add_argument("--backend", choices=("linked", "subprocess"), default="linked")
    sim.add_argument("--solver-cmd", default=os.environ.get("RESERVEMARKET_SOLVER"),
                     help="external solver executable for the subprocess backend")
    sim.add_argument("--serial", action="store_true",
                     help="run variants sequentially instead of concurrently")
    sim.add_argument("--no-figures", action="store_true",
                     help="skip PNG rendering, emit CSV artifacts only")

    zone = sub.add_parser("zone", help="cluster buses into reserve zones")
    _add_case(zone)
    zone.add_argument("--zones", type=int, required=True, metavar="K")
    zone.add_argument("--seed", type=int, default=0)
    zone.add_argument("--reg-fraction", type=float, default=0.03)
    zone.add_argument("--out", required=True, help="output directory")
    zone.add_argument("--ptdf-csv", action="store_true",
                      help="also export the PTDF matrix")

    off = sub.add_parser("offers", help="compute reserve offers from history")
    _add_case(off)
    off.add_argument("--lmp", action="append", required=True,
                     help="historical LMP CSV (bus,t,lmp); repeatable")
    off.add_argument("--dispatch", action="append", required=True,
                     help="historical dispatch CSV (gen,t,p); paired with --lmp")
    off.add_argument("--reg-mult", type=float, default=3.28)
    off.add_argument("--nsp-mult", type=float, default=0.0864)
    off.add_argument("--out", required=True, help="offers CSV path")

    exp = sub.add_parser("export-mps", help="write the tagged MILP in MPS format")
    _add_case(exp)
    exp.add_argument("--variant", choices=VARIANT_NAMES, required=True)
    exp.add_argument("--out", required=True, help="MPS file path")

    val = sub.add_parser("validate", help="print case diagnostics")
    _add_case(val)
    return parser


def _read_series_csv(path, key_col, t_col, val_col):
    table: dict[str, dict[int, float]] = {}
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            table.setdefault(row[key_col], {})[int(row[t_col])] = float(row[val_col])
    return {k: [v[t] for t in sorted(v)] for k, v in table.items()}


def _cmd_simulate(args) -> int:
    case = load_case(args.case)
    variants = (list(all_variants()) if args.all_variants
                else [VariantConfig.from_name(args.variant)])
    if args.backend == "subprocess" and not args.solver_cmd:
        print("error: --backend subprocess requires --solver-cmd or "
              "RESERVEMARKET_SOLVER", file=sys.stderr)
        return 2
    run_suite(case, variants, args.out, gap=args.gap, time_limit=args.time_limit,
              backend=args.backend, solver_cmd=args.solver_cmd,
              serial=args.serial, figures=not args.no_figures)
    print(f"wrote {len(variants)} variant run(s) under {args.out}")
    return 0


def _cmd_zone(args) -> int:
    case = load_case(args.case)
    ptdf = build_ptdf(case)
    partition = cluster_buses(ptdf, args.zones, args.seed, case=case)
    req = size_requirements(case, partition, reg_fraction=args.reg_fraction)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    export_partition_csv(partition, out / "zones.csv")
    export_requirements_csv(req, out / "requirements.csv")
    if args.ptdf_csv:
        export_ptdf_csv(ptdf, out / "ptdf.csv")
    print(f"wrote zones.csv and requirements.csv under {out}")
    return 0


def _cmd_offers(args) -> int:
    case = load_case(args.case)
    if len(args.lmp) != len(args.dispatch):
        print("error: --lmp and --dispatch must be paired", file=sys.stderr)
        return 2
    history = []
    for lmp_path, disp_path in zip(args.lmp, args.dispatch):
        history.append(HistorySnapshot(
            lmp=_read_series_csv(lmp_path, "bus", "t", "lmp"),
            dispatch=_read_series_csv(disp_path, "gen", "t", "p")))
    offers = compute_offers(history, case, reg_mult=args.reg_mult,
                            nsp_mult=args.nsp_mult)
    with Path(args.out).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gen", "offer_reg", "offer_spin", "offer_nsp"])
        for g in case.generators:
            w.writerow([g.id, repr(offers.reg[g.id][0]),
                        repr(offers.spin[g.id][0]), repr(offers.nsp[g.id][0])])
    print(f"wrote offers for {len(case.generators)} generators to {args.out}")
    return 0


def _cmd_export_mps(args) -> int:
    case = load_case(args.case)
    model = build_model(case, VariantConfig.from_name(args.variant))
    write_mps(model, args.out)
    print(f"wrote {len(model.rows)} rows / {len(model.variables)} columns to {args.out}")
    return 0


def _cmd_validate(args) -> int:
    case = load_case(args.case)
    diagnostics = validate_case(case)
    for d in diagnostics:
        print(f"[{d.severity}] {d.entity}: {d.message}")
    if not diagnostics:
        print(f"case ok: {len(case.buses)} buses, {len(case.lines)} lines, "
              f"{len(case.generators)} generators, horizon {case.horizon}")
    return 1 if any(d.severity == "error" for d in diagnostics) else 0


_COMMANDS = {"simulate": _cmd_simulate, "zone": _cmd_zone, "offers": _cmd_offers,
             "export-mps": _cmd_export_mps, "validate": _cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except ReserveMarketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
