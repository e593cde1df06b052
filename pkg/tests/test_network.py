"""PTDF correctness against an independent direct DC power-flow solve."""
import numpy as np
import pytest

from reservemarket import build_ptdf, line_flows
from reservemarket.errors import DimensionMismatch, SingularNetworkError
from reservemarket.model_io import case_from_dict
from reservemarket.network import export_ptdf_csv


def network_case(bus_ids, lines, ref):
    """Bare case with zero demand, no generators, unit ratings."""
    return case_from_dict({
        "horizon": 1,
        "reference_bus": ref,
        "buses": [{"id": b, "demand": [0.0]} for b in bus_ids],
        "lines": [{"id": lid, "from_bus": a, "to_bus": b, "reactance": x,
                   "rating": [999.0]} for lid, a, b, x in lines],
        "generators": [],
    })


def dc_flow_oracle(case, injections):
    """Direct DC solve: B theta = P with the reference angle pinned at 0,
    flows from branch susceptance times the angle difference.  Shares no
    code with build_ptdf."""
    bus_ids = [b.id for b in case.buses]
    idx = {b: i for i, b in enumerate(bus_ids)}
    n = len(bus_ids)
    bbus = np.zeros((n, n))
    for l in case.lines:
        i, j = idx[l.from_bus], idx[l.to_bus]
        y = 1.0 / l.reactance
        bbus[i, i] += y
        bbus[j, j] += y
        bbus[i, j] -= y
        bbus[j, i] -= y
    ref = idx[case.reference_bus]
    keep = [i for i in range(n) if i != ref]
    theta = np.zeros(n)
    theta[keep] = np.linalg.solve(bbus[np.ix_(keep, keep)],
                                  np.asarray(injections)[keep])
    return np.array([(theta[idx[l.from_bus]] - theta[idx[l.to_bus]]) / l.reactance
                     for l in case.lines])


TRIANGLE = network_case(
    ["B1", "B2", "B3"],
    [("L12", "B1", "B2", 0.1), ("L23", "B2", "B3", 0.1), ("L13", "B1", "B3", 0.1)],
    "B3")


def test_two_bus_single_path():
    case = network_case(["A", "B"], [("L", "A", "B", 0.1)], "B")
    ptdf = build_ptdf(case)
    assert ptdf.entries[0, ptdf.bus_index("A")] == pytest.approx(1.0)
    assert ptdf.entries[0, ptdf.bus_index("B")] == 0.0
    assert line_flows(ptdf, {"A": 50.0, "B": -50.0}) == pytest.approx([50.0])


def test_three_bus_ring_split():
    ptdf = build_ptdf(TRIANGLE)
    col = ptdf.column("B1")
    lines = dict(zip(ptdf.line_ids, col))
    # injection at B1, withdrawal at the reference B3: direct path carries
    # two thirds, the two-hop path one third
    assert lines["L13"] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert lines["L12"] == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert lines["L23"] == pytest.approx(1.0 / 3.0, abs=1e-12)
    flows = line_flows(ptdf, {"B1": 90.0, "B2": 0.0, "B3": -90.0})
    assert dict(zip(ptdf.line_ids, flows))["L13"] == pytest.approx(60.0)
    assert dict(zip(ptdf.line_ids, flows))["L12"] == pytest.approx(30.0)


def test_reference_column_zero():
    for case in (TRIANGLE,):
        ptdf = build_ptdf(case)
        assert np.all(ptdf.column(case.reference_bus) == 0.0)


def test_ring_matches_dc_oracle():
    ptdf = build_ptdf(TRIANGLE)
    inj = np.array([90.0, -30.0, -60.0])
    assert np.allclose(line_flows(ptdf, inj), dc_flow_oracle(TRIANGLE, inj),
                       atol=1e-8)


def random_connected_case(rng, n=10):
    bus_ids = [f"B{i}" for i in range(n)]
    lines = []
    # spanning tree first, then random chords
    for i in range(1, n):
        j = int(rng.integers(0, i))
        lines.append((f"T{i}", bus_ids[j], bus_ids[i], float(rng.uniform(0.05, 0.3))))
    for k in range(6):
        a, b = rng.choice(n, size=2, replace=False)
        lines.append((f"C{k}", bus_ids[int(a)], bus_ids[int(b)],
                      float(rng.uniform(0.05, 0.3))))
    return network_case(bus_ids, lines, bus_ids[0])


def test_random_network_matches_dc_oracle():
    rng = np.random.default_rng(7)
    for trial in range(5):
        case = random_connected_case(rng)
        ptdf = build_ptdf(case)
        inj = rng.normal(scale=40.0, size=10)
        inj -= inj.mean()  # balanced
        assert np.allclose(line_flows(ptdf, inj), dc_flow_oracle(case, inj),
                           atol=1e-8), f"trial {trial}"
        assert np.all(ptdf.column(case.reference_bus) == 0.0)
        assert np.max(np.abs(ptdf.entries)) <= 1.0 + 1e-6


def test_superposition():
    rng = np.random.default_rng(11)
    case = random_connected_case(rng)
    ptdf = build_ptdf(case)
    a = rng.normal(size=10)
    b = rng.normal(size=10)
    lhs = line_flows(ptdf, a + b)
    rhs = line_flows(ptdf, a) + line_flows(ptdf, b)
    assert np.allclose(lhs, rhs, atol=1e-9)


def test_zero_injection_zero_flow():
    ptdf = build_ptdf(TRIANGLE)
    assert np.all(line_flows(ptdf, np.zeros(3)) == 0.0)


def test_disconnected_network_rejected():
    # bypass load-time validation to exercise the solver-side guard
    from reservemarket.model_io import BusSpec, LineSpec, MarketCase
    case = MarketCase(
        horizon=1, reference_bus="A",
        buses=(BusSpec("A", (0.0,)), BusSpec("B", (0.0,)), BusSpec("C", (0.0,))),
        lines=(LineSpec("L", "A", "B", 0.1, (10.0,)),),
        generators=(), zone_partition={"A": "Z1", "B": "Z1", "C": "Z1"})
    with pytest.raises(SingularNetworkError):
        build_ptdf(case)


def test_injection_dimension_checks():
    ptdf = build_ptdf(TRIANGLE)
    with pytest.raises(DimensionMismatch):
        line_flows(ptdf, np.zeros(4))
    with pytest.raises(DimensionMismatch):
        line_flows(ptdf, {"B1": 1.0})


def test_ptdf_csv_export(tmp_path):
    ptdf = build_ptdf(TRIANGLE)
    path = tmp_path / "ptdf.csv"
    export_ptdf_csv(ptdf, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "line,B1,B2,B3"
    assert len(lines) == 1 + len(ptdf.line_ids)
