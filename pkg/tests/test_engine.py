"""Solver round-trips against a brute-force commitment-enumeration oracle,
plus price composition and infeasibility reporting."""
import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from reservemarket import (ConstraintKind, build_model, feasible_check,
                           pricing_run, run_variant, solve_commitment)
from reservemarket.engine import _compile, _compose_prices
from reservemarket.errors import InfeasibleError
from reservemarket.model_io import (CapacityOption, RequirementOption,
                                    VariantConfig, all_variants,
                                    case_from_dict)

NS_NC = VariantConfig(CapacityOption.NON_SHARING, RequirementOption.NON_CASCADING)
S_C = VariantConfig(CapacityOption.SHARING, RequirementOption.CASCADING)


# ---------------------------------------------------------------------------
# brute-force oracle: enumerate every on/off pattern, derive start/stop
# indicators from the on/off transitions, fix all binaries, and solve the
# continuous subproblem with a bare LP call.  No branch-and-bound involved.

def brute_force_objective(case, variant):
    model = build_model(case, variant)
    T = case.horizon
    gens = case.generators
    best = None
    for bits in itertools.product((0.0, 1.0), repeat=len(gens) * T):
        fixed = {}
        ok = True
        for gi, g in enumerate(gens):
            u_prev = 1.0 if g.initially_on else 0.0
            for t in range(T):
                u = bits[gi * T + t]
                su = max(u - u_prev, 0.0)
                sd = max(u_prev - u, 0.0)
                u_prev = u
                for name, val in (("u", u), ("su", su), ("sd", sd)):
                    vi = model.var(name, g.id, t)
                    var = model.variables[vi]
                    if not (var.lb - 1e-12 <= val <= var.ub + 1e-12):
                        ok = False
                    fixed[vi] = val
        if not ok:
            continue  # pattern violates a forced initial-condition window
        arr = _compile(model, fixed=fixed)
        res = linprog(c=arr["c"], A_ub=arr["A_ub"], b_ub=arr["b_ub"],
                      A_eq=arr["A_eq"], b_eq=arr["b_eq"],
                      bounds=np.stack([arr["lb"], arr["ub"]], axis=1),
                      method="highs")
        if res.status == 0 and (best is None or res.fun < best):
            best = res.fun
    assert best is not None, "oracle found no feasible commitment"
    return best


@pytest.mark.parametrize("variant", all_variants(), ids=lambda v: v.name)
def test_t1_matches_brute_force(t1_case, variant):
    sol, _ = run_variant(t1_case, variant, gap=1e-9)
    oracle = brute_force_objective(t1_case, variant)
    assert sol.objective_value == pytest.approx(oracle, rel=1e-6)


@pytest.mark.parametrize("variant", all_variants(), ids=lambda v: v.name)
def test_t1x2_matches_brute_force(t1x2_case, variant):
    sol, _ = run_variant(t1x2_case, variant, gap=1e-9)
    oracle = brute_force_objective(t1x2_case, variant)
    assert sol.objective_value == pytest.approx(oracle, rel=1e-6)


# ---------------------------------------------------------------------------
# trivial market behaviors

def empty_market_case():
    return case_from_dict({
        "horizon": 2, "reference_bus": "B1",
        "buses": [{"id": "B1", "demand": 0.0}], "lines": [],
        "generators": [{
            "id": "G1", "bus": "B1", "fuel_class": "NG",
            "p_min": 10.0, "p_max": 100.0, "rsu": 100.0, "rsd": 100.0,
            "ru_5min": 20.0, "ru_10min": 40.0, "ru_60min": 100.0,
            "rd_60min": 100.0, "cost_startup": 100.0, "cost_noload": 10.0,
            "fuel_cost_segments": [[100.0, 20.0]],
            "min_up": 1, "min_down": 1,
            "initial_status": -1, "initial_power": 0.0}],
    })


def test_empty_market_all_off():
    sol = solve_commitment(build_model(empty_market_case(), NS_NC))
    assert sol.objective_value == pytest.approx(0.0, abs=1e-9)
    assert np.all(sol.u["G1"] == 0.0)
    assert np.all(sol.p["G1"] == 0.0)


def test_impossible_requirements_reported_infeasible():
    d = {
        "horizon": 1, "reference_bus": "B1",
        "buses": [{"id": "B1", "demand": 0.0}], "lines": [],
        "generators": [{
            "id": "G1", "bus": "B1", "fuel_class": "NG",
            "p_min": 0.0, "p_max": 100.0, "rsu": 100.0, "rsd": 100.0,
            "ru_5min": 20.0, "ru_10min": 40.0, "ru_60min": 100.0,
            "rd_60min": 100.0, "cost_startup": 0.0, "cost_noload": 0.0,
            "fuel_cost_segments": [[100.0, 20.0]],
            "min_up": 1, "min_down": 1,
            "initial_status": 1, "initial_power": 0.0}],
        "zones": {"B1": "Z1"},
        "requirements": {"Z1": {"reg": 0.0, "spin": 500.0, "nsp": 0.0}},
    }
    with pytest.raises(InfeasibleError):
        solve_commitment(build_model(case_from_dict(d), NS_NC))


def test_unknown_backend_rejected(t1_case):
    model = build_model(t1_case, NS_NC)
    with pytest.raises(ValueError, match="backend"):
        solve_commitment(model, backend="quantum")


# ---------------------------------------------------------------------------
# pricing

def test_t1_uniform_lmp_at_marginal_cost(t1_case):
    # single bus, marginal unit is the 35 $/MWh segment
    _, prices = run_variant(t1_case, NS_NC, gap=1e-9)
    assert prices.lmp["B1"] == pytest.approx([35.0], abs=1e-6)


def test_zero_requirements_zero_mcps(t1_case):
    import dataclasses
    from reservemarket.model_io import ReserveRequirements
    case = dataclasses.replace(
        t1_case, requirements=ReserveRequirements.zeros(["Z1"], t1_case.horizon))
    for variant in all_variants():
        _, prices = run_variant(case, variant, gap=1e-9)
        for table in (prices.mcp_reg, prices.mcp_spin, prices.mcp_nsp):
            assert np.all(np.abs(table["Z1"]) <= 1e-9)


def test_cascading_composition_arithmetic(t1_case):
    model = build_model(t1_case, S_C)
    duals = np.zeros(len(model.rows))
    for ri, row in enumerate(model.rows):
        if row.tag.kind is ConstraintKind.REQ_CASCADE_R:
            duals[ri] = 3.0
        elif row.tag.kind is ConstraintKind.REQ_CASCADE_RS:
            duals[ri] = 2.0
        elif row.tag.kind is ConstraintKind.REQ_CASCADE_RSN:
            duals[ri] = 1.0
    prices = _compose_prices(model, duals, 0.0)
    assert prices.mcp_reg["Z1"] == pytest.approx([6.0])
    assert prices.mcp_spin["Z1"] == pytest.approx([3.0])
    assert prices.mcp_nsp["Z1"] == pytest.approx([1.0])


def test_noncascading_composition_identity(t1_case):
    model = build_model(t1_case, NS_NC)
    duals = np.zeros(len(model.rows))
    for ri, row in enumerate(model.rows):
        if row.tag.kind is ConstraintKind.REQ_REG:
            duals[ri] = 5.0
        elif row.tag.kind is ConstraintKind.REQ_SPIN:
            duals[ri] = 2.0
        elif row.tag.kind is ConstraintKind.REQ_NSP:
            duals[ri] = 0.5
    prices = _compose_prices(model, duals, 0.0)
    assert prices.mcp_reg["Z1"] == pytest.approx([5.0])
    assert prices.mcp_spin["Z1"] == pytest.approx([2.0])
    assert prices.mcp_nsp["Z1"] == pytest.approx([0.5])


def test_pricing_objective_matches_incumbent(t1x2_case):
    for variant in all_variants():
        model = build_model(t1x2_case, variant)
        sol = solve_commitment(model, gap=1e-9)
        prices = pricing_run(model, sol)
        denom = max(1.0, abs(sol.objective_value))
        assert abs(prices.pricing_objective - sol.objective_value) / denom < 1e-6


def test_solution_round_trip_feasible(t1x2_case):
    for variant in all_variants():
        model = build_model(t1x2_case, variant)
        sol = solve_commitment(model, gap=1e-9)
        assert feasible_check(model, sol.as_mapping(), tol=1e-6) == []
        for g in t1x2_case.generators:
            assert set(np.unique(sol.u[g.id])) <= {0.0, 1.0}


def test_solver_metadata(t1_case):
    sol = solve_commitment(build_model(t1_case, NS_NC), gap=1e-9)
    assert sol.solve_seconds >= 0.0
    assert sol.mip_gap <= 1e-6
