"""Solving and pricing: MILP commitment, restricted pricing LP, MCP
composition from requirement duals.

Pricing follows standard RTO practice: binaries are fixed at the MILP
incumbent, the continuous relaxation is re-solved, and duals are read off
the tagged rows.  The LMP is the dual of each bus's nodal balance row; the
zonal MCPs are composed from the requirement-row shadow prices, additively
in the cascading variant.
"""
from __future__ import annotations

import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .errors import (DualUnavailable, InfeasibleError, ReserveMarketError,
                     TimeLimitNoIncumbent)
from .formulation import (ConstraintKind, MilpModel, build_model,
                          feasible_check)
from .model_io import MarketCase, RequirementOption, VariantConfig
from .mps import parse_highs_solution, write_mps

DEFAULT_GAP = 1e-4

_NONCASCADE_COMPONENTS = {ConstraintKind.REQ_REG: "REG",
                          ConstraintKind.REQ_SPIN: "SPIN",
                          ConstraintKind.REQ_NSP: "NSP"}
_CASCADE_COMPONENTS = {ConstraintKind.REQ_CASCADE_R: "R",
                       ConstraintKind.REQ_CASCADE_RS: "RS",
                       ConstraintKind.REQ_CASCADE_RSN: "RSN"}


@dataclass
class CommitmentSolution:
    u: dict[str, np.ndarray]
    su: dict[str, np.ndarray]
    sd: dict[str, np.ndarray]
    p: dict[str, np.ndarray]
    p_seg: dict[tuple[str, int], np.ndarray]
    r_reg: dict[str, np.ndarray]
    r_spin: dict[str, np.ndarray]
    r_nsp: dict[str, np.ndarray]
    f: dict[str, np.ndarray]
    objective_value: float
    mip_gap: float
    solve_seconds: float

    def as_mapping(self) -> dict:
        out = {}
        for name, table in (("u", self.u), ("su", self.su), ("sd", self.sd),
                            ("p", self.p), ("rreg", self.r_reg),
                            ("rspin", self.r_spin), ("rnsp", self.r_nsp)):
            for gid, series in table.items():
                for t, v in enumerate(series):
                    out[(name, gid, t)] = float(v)
        for (gid, s), series in self.p_seg.items():
            for t, v in enumerate(series):
                out[("pseg", gid, t, s)] = float(v)
        for lid, series in self.f.items():
            for t, v in enumerate(series):
                out[("f", lid, t)] = float(v)
        return out

    def startup_cost_total(self, case: MarketCase) -> float:
        return float(sum(g.cost_startup * self.su[g.id].sum() for g in case.generators))


@dataclass
class PriceSet:
    variant: VariantConfig
    lmp: dict[str, np.ndarray]                  # bus -> $/MWh per interval
    duals: dict[tuple[str, str], np.ndarray]    # (component, zone) -> per interval
    mcp_reg: dict[str, np.ndarray]
    mcp_spin: dict[str, np.ndarray]
    mcp_nsp: dict[str, np.ndarray]
    pricing_objective: float

    def zones(self) -> list[str]:
        return sorted(self.mcp_reg)


# ---------------------------------------------------------------------------
# model compilation

def _compile(model: MilpModel, fixed: dict[int, float] | None = None):
    """Split tagged rows into <= / == blocks for scipy and remember the
    mapping back so duals can be reoriented to d(obj)/d(rhs)."""
    n = len(model.variables)
    c = np.array([v.cost for v in model.variables])
    lb = np.array([v.lb for v in model.variables])
    ub = np.array([v.ub for v in model.variables])
    if fixed:
        for i, val in fixed.items():
            lb[i] = ub[i] = val
    integrality = np.array([1 if v.integer else 0 for v in model.variables])

    ub_rows, ub_rhs, ub_map = [], [], []   # (row index, sign) sign: +1 "<=", -1 ">="
    eq_rows, eq_rhs, eq_map = [], [], []
    for ri, row in enumerate(model.rows):
        idx = list(row.coefs)
        coef = np.array([row.coefs[i] for i in idx])
        vec = (idx, coef)
        if row.sense == "==":
            eq_rows.append(vec)
            eq_rhs.append(row.rhs)
            eq_map.append(ri)
        elif row.sense == "<=":
            ub_rows.append(vec)
            ub_rhs.append(row.rhs)
            ub_map.append((ri, 1.0))
        else:
            ub_rows.append(((idx), -coef))
            ub_rhs.append(-row.rhs)
            ub_map.append((ri, -1.0))

    def to_csr(rows):
        data, indices, indptr = [], [], [0]
        for idx, coef in rows:
            indices.extend(idx)
            data.extend(coef)
            indptr.append(len(indices))
        return sparse.csr_matrix((data, indices, indptr), shape=(len(rows), n))

    return {
        "c": c, "lb": lb, "ub": ub, "integrality": integrality,
        "A_ub": to_csr(ub_rows), "b_ub": np.array(ub_rhs), "ub_map": ub_map,
        "A_eq": to_csr(eq_rows), "b_eq": np.array(eq_rhs), "eq_map": eq_map,
    }


def _extract(model: MilpModel, values: np.ndarray, objective: float,
             mip_gap: float, seconds: float) -> CommitmentSolution:
    case = model.case
    T = case.horizon
    def series(name, ent):
        return np.array([values[model.var(name, ent, t)] for t in range(T)])
    sol = CommitmentSolution(
        u={g.id: series("u", g.id) for g in case.generators},
        su={g.id: series("su", g.id) for g in case.generators},
        sd={g.id: series("sd", g.id) for g in case.generators},
        p={g.id: series("p", g.id) for g in case.generators},
        p_seg={(g.id, s): np.array([values[model.var("pseg", g.id, t, s)]
                                    for t in range(T)])
               for g in case.generators for s in range(len(g.fuel_cost_segments))},
        r_reg={g.id: series("rreg", g.id) for g in case.generators},
        r_spin={g.id: series("rspin", g.id) for g in case.generators},
        r_nsp={g.id: series("rnsp", g.id) for g in case.generators},
        f={l.id: series("f", l.id) for l in case.lines},
        objective_value=objective, mip_gap=mip_gap, solve_seconds=seconds)
    for g in case.generators:
        for name, table in (("u", sol.u), ("su", sol.su), ("sd", sol.sd)):
            frac = np.abs(table[g.id] - np.round(table[g.id]))
            if frac.max(initial=0.0) > 1e-6:
                raise ReserveMarketError(
                    f"{name} for {g.id} not integral within 1e-6")
            table[g.id] = np.round(table[g.id])
    recomputed = model.objective_value(values)
    denom = max(1.0, abs(recomputed))
    if abs(recomputed - objective) / denom > 1e-4:
        raise ReserveMarketError(
            f"objective {objective} inconsistent with recomputation {recomputed}")
    return sol


# ---------------------------------------------------------------------------
# backends

def solve_commitment(model: MilpModel, gap: float = DEFAULT_GAP,
                     time_limit: float | None = None, backend: str = "linked",
                     solver_cmd: str | None = None) -> CommitmentSolution:
    """Solve the MILP to the requested relative gap (or best incumbent at
    the time limit).  Raises InfeasibleError when the hard reserve
    requirements cannot be met."""
    start = time.perf_counter()
    if backend == "linked":
        arr = _compile(model)
        options = {"mip_rel_gap": gap}
        if time_limit is not None:
            options["time_limit"] = float(time_limit)
        constraints = []
        if arr["A_ub"].shape[0]:
            constraints.append(LinearConstraint(arr["A_ub"], -np.inf, arr["b_ub"]))
        if arr["A_eq"].shape[0]:
            constraints.append(LinearConstraint(arr["A_eq"], arr["b_eq"], arr["b_eq"]))
        res = milp(c=arr["c"], constraints=constraints,
                   integrality=arr["integrality"],
                   bounds=Bounds(arr["lb"], arr["ub"]), options=options)
        if res.status == 2:
            raise InfeasibleError("market infeasible: hard requirements unmeetable")
        if res.x is None:
            raise TimeLimitNoIncumbent(res.message)
        seconds = time.perf_counter() - start
        mgap = float(res.mip_gap) if res.mip_gap is not None and np.isfinite(res.mip_gap) else 0.0
        return _extract(model, np.asarray(res.x), float(res.fun), mgap, seconds)
    if backend == "subprocess":
        parsed = _run_external(model, fixed=None, solver_cmd=solver_cmd,
                               gap=gap, time_limit=time_limit)
        values = _values_from_columns(model, parsed["columns"])
        seconds = time.perf_counter() - start
        return _extract(model, values, float(parsed["objective"]), 0.0, seconds)
    raise ValueError(f"unknown backend {backend!r}")


def pricing_run(model: MilpModel, commitment: CommitmentSolution,
                backend: str = "linked", solver_cmd: str | None = None) -> PriceSet:
    """Fix binaries at the incumbent, solve the LP, and compose prices."""
    fixed = {}
    for i, v in enumerate(model.variables):
        if v.integer:
            name, gid, t = v.key
            table = {"u": commitment.u, "su": commitment.su, "sd": commitment.sd}[name]
            fixed[i] = float(round(table[gid][t]))

    if backend == "linked":
        arr = _compile(model, fixed=fixed)
        duals_by_row = None
        for options in ({}, {"presolve": False}):
            res = linprog(c=arr["c"], A_ub=arr["A_ub"], b_ub=arr["b_ub"],
                          A_eq=arr["A_eq"], b_eq=arr["b_eq"],
                          bounds=np.stack([arr["lb"], arr["ub"]], axis=1),
                          method="highs", options=options)
            if res.status == 0 and res.ineqlin is not None and res.eqlin is not None:
                duals_by_row = np.zeros(len(model.rows))
                for (ri, sign), marg in zip(arr["ub_map"], res.ineqlin.marginals):
                    duals_by_row[ri] = sign * marg
                for ri, marg in zip(arr["eq_map"], res.eqlin.marginals):
                    duals_by_row[ri] = marg
                lp_objective = float(res.fun)
                break
        if duals_by_row is None:
            raise DualUnavailable(f"pricing LP failed: {res.message}")
    elif backend == "subprocess":
        parsed = _run_external(model, fixed=fixed, solver_cmd=solver_cmd)
        name_to_row = {r.tag.name: ri for ri, r in enumerate(model.rows)}
        duals_by_row = np.zeros(len(model.rows))
        for name, dual in parsed["row_duals"].items():
            if name in name_to_row:
                duals_by_row[name_to_row[name]] = dual
        if not parsed["row_duals"]:
            raise DualUnavailable("external solver produced no row duals")
        lp_objective = float(parsed["objective"])
    else:
        raise ValueError(f"unknown backend {backend!r}")

    return _compose_prices(model, duals_by_row, lp_objective)


def _compose_prices(model: MilpModel, duals_by_row: np.ndarray,
                    lp_objective: float) -> PriceSet:
    case = model.case
    T = case.horizon
    zones = sorted(set(case.zone_partition.values()))
    cascading = model.variant.requirements is RequirementOption.CASCADING
    components = _CASCADE_COMPONENTS if cascading else _NONCASCADE_COMPONENTS

    lmp = {b.id: np.zeros(T) for b in case.buses}
    duals = {(comp, z): np.zeros(T) for comp in components.values() for z in zones}
    for ri, row in enumerate(model.rows):
        kind = row.tag.kind
        if kind is ConstraintKind.NODAL_BALANCE:
            lmp[row.tag.entity][row.tag.t] = duals_by_row[ri]
        elif kind in components:
            duals[(components[kind], row.tag.entity)][row.tag.t] = duals_by_row[ri]

    # negative sub-1e-9 dual noise would break exact monotonicity; clip
    nn = {k: np.maximum(v, 0.0) for k, v in duals.items()}
    if cascading:
        mcp_reg = {z: nn[("R", z)] + nn[("RS", z)] + nn[("RSN", z)] for z in zones}
        mcp_spin = {z: nn[("RS", z)] + nn[("RSN", z)] for z in zones}
        mcp_nsp = {z: nn[("RSN", z)].copy() for z in zones}
    else:
        mcp_reg = {z: nn[("REG", z)].copy() for z in zones}
        mcp_spin = {z: nn[("SPIN", z)].copy() for z in zones}
        mcp_nsp = {z: nn[("NSP", z)].copy() for z in zones}
    return PriceSet(variant=model.variant, lmp=lmp, duals=duals,
                    mcp_reg=mcp_reg, mcp_spin=mcp_spin, mcp_nsp=mcp_nsp,
                    pricing_objective=lp_objective)


def run_variant(case: MarketCase, variant: VariantConfig,
                gap: float = DEFAULT_GAP, time_limit: float | None = None,
                backend: str = "linked", solver_cmd: str | None = None,
                ptdf=None) -> tuple[CommitmentSolution, PriceSet]:
    """build_model + solve_commitment + pricing_run for one variant."""
    model = build_model(case, variant, ptdf=ptdf)
    commitment = solve_commitment(model, gap=gap, time_limit=time_limit,
                                  backend=backend, solver_cmd=solver_cmd)
    prices = pricing_run(model, commitment, backend=backend,
                         solver_cmd=solver_cmd)
    violated = feasible_check(model, commitment.as_mapping(), tol=1e-5)
    if violated:
        raise ReserveMarketError(
            f"solver returned infeasible point; first violation {violated[0].name}")
    return commitment, prices


# ---------------------------------------------------------------------------
# external solver plumbing

def _run_external(model: MilpModel, fixed: dict[int, float] | None,
                  solver_cmd: str | None, gap: float | None = None,
                  time_limit: float | None = None) -> dict:
    """Emit the tagged MPS model and call an external HiGHS-style solver:
    ``<solver_cmd> model.mps --solution_file out.sol``."""
    if not solver_cmd:
        raise ReserveMarketError("subprocess backend needs --solver-cmd "
                                 "(or RESERVEMARKET_SOLVER)")
    with tempfile.TemporaryDirectory(prefix="reservemarket-") as tmp:
        mps_path = Path(tmp) / "model.mps"
        sol_path = Path(tmp) / "model.sol"
        export = model
        if fixed is not None:
            # relax integrality and pin the binaries so the LP carries duals
            import copy
            export = copy.copy(model)
            export.variables = [copy.copy(v) for v in model.variables]
            for i, val in fixed.items():
                export.variables[i].integer = False
                export.variables[i].lb = export.variables[i].ub = val
        write_mps(export, mps_path)
        cmd = shlex.split(solver_cmd) + [str(mps_path), "--solution_file", str(sol_path)]
        if gap is not None:
            cmd += ["--mip_rel_gap", str(gap)]
        if time_limit is not None:
            cmd += ["--time_limit", str(time_limit)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0 or not sol_path.exists():
            raise ReserveMarketError(
                f"external solver failed (rc={proc.returncode}): {proc.stderr[-500:]}")
        parsed = parse_highs_solution(sol_path.read_text())
    if parsed["status"] and "nfeasible" in parsed["status"]:
        raise InfeasibleError("external solver reports infeasible")
    if parsed["objective"] is None:
        raise ReserveMarketError("external solver output missing objective")
    return parsed


def _values_from_columns(model: MilpModel, columns: dict[str, float]) -> np.ndarray:
    values = np.zeros(len(model.variables))
    for i, v in enumerate(model.variables):
        if v.name not in columns:
            raise ReserveMarketError(f"solver output missing column {v.name}")
        values[i] = columns[v.name]
    return values
