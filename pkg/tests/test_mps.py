"""MPS export round-trip, solution-file parsing, and the subprocess
backend driven by a hermetic stand-in solver."""
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import Bounds, LinearConstraint, milp

from reservemarket import build_model, run_variant, solve_commitment
from reservemarket.model_io import (CapacityOption, RequirementOption,
                                    VariantConfig)
from reservemarket.mps import parse_highs_solution, write_mps

from mps_reader import read_mps, to_arrays

TESTS = Path(__file__).resolve().parent
FAKE_SOLVER = f"{sys.executable} {TESTS / 'fake_solver.py'}"

NS_NC = VariantConfig(CapacityOption.NON_SHARING, RequirementOption.NON_CASCADING)
S_C = VariantConfig(CapacityOption.SHARING, RequirementOption.CASCADING)


def test_row_names_carry_tags(tmp_path, t1_case):
    model = build_model(t1_case, NS_NC)
    path = tmp_path / "t1.mps"
    write_mps(model, path)
    prob = read_mps(path)
    assert prob.objective_row == "COST"
    assert set(prob.row_names) == {r.tag.name for r in model.rows}
    assert "CapacityLower_G1_0" in prob.row_names
    assert "NodalBalance_B1_0" in prob.row_names
    assert prob.row_sense["ReqSpin_Z1_0"] == ">="


def test_round_trip_preserves_problem(tmp_path, t1x2_case):
    """Re-reading the exported file with an independent reader and solving
    it reproduces the linked backend's optimum."""
    for variant in (NS_NC, S_C):
        model = build_model(t1x2_case, variant)
        reference = solve_commitment(model, gap=1e-9)
        path = tmp_path / f"{variant.name}.mps"
        write_mps(model, path)
        (c, integrality, lb, ub, A_ub, b_ub, _, A_eq, b_eq, _) = \
            to_arrays(read_mps(path))
        cons = []
        if A_ub.shape[0]:
            cons.append(LinearConstraint(A_ub, -np.inf, b_ub))
        if A_eq.shape[0]:
            cons.append(LinearConstraint(A_eq, b_eq, b_eq))
        res = milp(c=c, constraints=cons, integrality=integrality,
                   bounds=Bounds(lb, ub), options={"mip_rel_gap": 1e-9})
        assert res.status == 0
        assert res.fun == pytest.approx(reference.objective_value, rel=1e-9)


def test_round_trip_dimensions(tmp_path, t1_case):
    model = build_model(t1_case, NS_NC)
    path = tmp_path / "t1.mps"
    write_mps(model, path)
    prob = read_mps(path)
    assert len(prob.col_names) == len(model.variables)
    assert len(prob.row_names) == len(model.rows)
    by_name = {v.name: v for v in model.variables}
    for col in prob.col_names:
        v = by_name[col]
        assert prob.integer[col] == v.integer
        assert prob.lb[col] == v.lb
        assert prob.ub[col] == v.ub


CANNED = """\
Model status
Optimal

Objective 42.5
# Primal solution values
Feasible
# Columns 2
x_one 1.5
x_two 0.0
# Rows 1
SomeRow_A_0 3.0
# Dual solution values
Feasible
# Columns 2
x_one 0.0
x_two -1.0
# Rows 2
NodalBalance_B1_0 35.0
ReqSpin_Z1_0 6.0
# Basis
HiGHS v1
"""


def test_parse_canned_solution():
    parsed = parse_highs_solution(CANNED)
    assert parsed["status"] == "Optimal"
    assert parsed["objective"] == 42.5
    assert parsed["columns"] == {"x_one": 1.5, "x_two": 0.0}
    # primal row activities and dual column values must not leak in
    assert parsed["row_duals"] == {"NodalBalance_B1_0": 35.0,
                                   "ReqSpin_Z1_0": 6.0}


def test_subprocess_backend_matches_linked(t1_case):
    linked_sol, linked_prices = run_variant(t1_case, NS_NC, gap=1e-9)
    sub_sol, sub_prices = run_variant(t1_case, NS_NC, gap=1e-9,
                                      backend="subprocess",
                                      solver_cmd=FAKE_SOLVER)
    assert sub_sol.objective_value == pytest.approx(
        linked_sol.objective_value, rel=1e-9)
    assert sub_prices.lmp["B1"] == pytest.approx(linked_prices.lmp["B1"],
                                                 abs=1e-6)
    for table in ("mcp_reg", "mcp_spin", "mcp_nsp"):
        assert getattr(sub_prices, table)["Z1"] == pytest.approx(
            getattr(linked_prices, table)["Z1"], abs=1e-6)


def test_subprocess_backend_cascading(t1x2_case):
    linked_sol, _ = run_variant(t1x2_case, S_C, gap=1e-9)
    sub_sol, sub_prices = run_variant(t1x2_case, S_C, gap=1e-9,
                                      backend="subprocess",
                                      solver_cmd=FAKE_SOLVER)
    assert sub_sol.objective_value == pytest.approx(
        linked_sol.objective_value, rel=1e-9)
    # composed cascading prices stay monotone regardless of backend
    for z in sub_prices.zones():
        assert np.all(sub_prices.mcp_reg[z] >= sub_prices.mcp_spin[z])
        assert np.all(sub_prices.mcp_spin[z] >= sub_prices.mcp_nsp[z])
        assert np.all(sub_prices.mcp_nsp[z] >= 0.0)


def test_subprocess_solver_failure_reported(t1_case):
    from reservemarket.errors import ReserveMarketError
    with pytest.raises(ReserveMarketError, match="external solver"):
        run_variant(t1_case, NS_NC, backend="subprocess",
                    solver_cmd=f"{sys.executable} -c 'raise SystemExit(7)'")
