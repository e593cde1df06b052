#!/usr/bin/env python3
"""Regenerate cases/desk14.json (14 buses, 20 lines, 12 generators, 24 h,
3 zones).  Tuned so that reserve constraints bind in the evening peak."""
import json
from pathlib import Path

T = 24
PEAK = 680.0

PROFILE = [0.55, 0.52, 0.50, 0.50, 0.52, 0.56, 0.62, 0.70, 0.76, 0.80,
           0.83, 0.85, 0.86, 0.87, 0.89, 0.93, 0.97, 1.00, 0.98, 0.94,
           0.88, 0.78, 0.68, 0.60]

BUS_WEIGHTS = {
    "B1": 0.04, "B2": 0.10, "B3": 0.08, "B4": 0.06, "B5": 0.07,
    "B6": 0.06, "B7": 0.09, "B8": 0.08, "B9": 0.05, "B10": 0.05,
    "B11": 0.09, "B12": 0.08, "B13": 0.08, "B14": 0.07,
}

ZONES = {**{b: "Z1" for b in ("B1", "B2", "B3", "B4", "B5")},
         **{b: "Z2" for b in ("B6", "B7", "B8", "B9", "B10")},
         **{b: "Z3" for b in ("B11", "B12", "B13", "B14")}}

LINES = [
    ("L1", "B1", "B2", 0.08), ("L2", "B2", "B3", 0.10), ("L3", "B3", "B4", 0.07),
    ("L4", "B4", "B5", 0.09), ("L5", "B5", "B6", 0.12), ("L6", "B6", "B7", 0.08),
    ("L7", "B7", "B8", 0.06), ("L8", "B8", "B9", 0.10), ("L9", "B9", "B10", 0.09),
    ("L10", "B10", "B11", 0.13), ("L11", "B11", "B12", 0.07),
    ("L12", "B12", "B13", 0.08), ("L13", "B13", "B14", 0.09),
    ("L14", "B14", "B1", 0.11), ("L15", "B1", "B8", 0.18),
    ("L16", "B2", "B6", 0.15), ("L17", "B4", "B9", 0.16),
    ("L18", "B5", "B11", 0.17), ("L19", "B7", "B12", 0.14),
    ("L20", "B3", "B13", 0.19),
]


def gen(id, bus, fuel, pmin, pmax, rsu, rsd, ru5, ru10, ru60, rd60,
        csu, cnl, mc, min_up, min_down, o_reg, o_spin, o_nsp, status, power):
    return {
        "id": id, "bus": bus, "fuel_class": fuel,
        "p_min": pmin, "p_max": pmax, "rsu": rsu, "rsd": rsd,
        "ru_5min": ru5, "ru_10min": ru10, "ru_60min": ru60, "rd_60min": rd60,
        "cost_startup": csu, "cost_noload": cnl,
        "fuel_cost_segments": [[pmax, mc]],
        "min_up": min_up, "min_down": min_down,
        "offer_reg": o_reg, "offer_spin": o_spin, "offer_nsp": o_nsp,
        "initial_status": status, "initial_power": power,
    }


GENERATORS = [
    # Z1: nuclear base, mid NG, fast-start NG, wind
    gen("G1", "B1", "NUC", 80, 150, 80, 150, 5, 10, 30, 30,
        20000, 100, 10, 8, 8, 30, 10, 1.0, 24, 120),
    gen("G2", "B2", "NG", 20, 120, 60, 80, 25, 50, 120, 120,
        800, 60, 35, 2, 2, 16, 5, 0.5, 5, 60),
    gen("G3", "B4", "NG", 10, 80, 80, 80, 20, 40, 80, 80,
        400, 40, 45, 1, 1, 20, 6, 0.6, -3, 0),
    gen("G4", "B5", "WND", 0, 60, 60, 60, 30, 60, 150, 150,
        0, 0, 0, 1, 1, 60, 18, 1.6, 10, 40),
    # Z2: coal base, mid NG, fast-start NG, solar
    gen("G5", "B6", "BIT", 50, 130, 50, 130, 5, 10, 40, 40,
        15000, 80, 22, 6, 6, 25, 8, 0.8, 24, 100),
    gen("G6", "B7", "NG", 15, 100, 50, 70, 22, 45, 100, 100,
        700, 50, 38, 2, 2, 15, 4.5, 0.4, 4, 40),
    gen("G7", "B9", "NG", 8, 70, 70, 70, 18, 36, 70, 70,
        350, 35, 48, 1, 1, 22, 7, 0.7, -5, 0),
    gen("G8", "B10", "SOL", 0, 50, 50, 50, 25, 50, 120, 120,
        0, 0, 0, 1, 1, 65, 20, 1.7, 8, 30),
    # Z3: mid NG, fast-start NG, expensive slow peaker, hydro
    gen("G9", "B11", "NG", 25, 110, 55, 80, 24, 48, 110, 110,
        900, 55, 33, 2, 2, 14, 4, 0.35, 6, 70),
    gen("G10", "B12", "NG", 10, 75, 75, 75, 19, 38, 75, 75,
        380, 38, 46, 1, 1, 21, 6.5, 0.65, -4, 0),
    gen("G11", "B13", "OTH", 12, 60, 60, 60, 15, 30, 60, 60,
        1500, 45, 70, 1, 1, 28, 9, 0.9, -10, 0),
    gen("G12", "B14", "HYD", 0, 55, 55, 55, 28, 55, 140, 140,
        0, 0, 0, 1, 1, 58, 17, 1.5, 12, 30),
]

SPIN_REQ = {"Z1": 40.0, "Z2": 35.0, "Z3": 35.0}
REG_FRACTION = 0.03


def main():
    buses = [{"id": b, "demand": [round(w * PEAK * f, 3) for f in PROFILE]}
             for b, w in BUS_WEIGHTS.items()]
    zone_demand = {z: [0.0] * T for z in ("Z1", "Z2", "Z3")}
    for b in buses:
        for t in range(T):
            zone_demand[ZONES[b["id"]]][t] += b["demand"][t]

    requirements = {
        z: {"reg": [round(REG_FRACTION * zone_demand[z][t], 3) for t in range(T)],
            "spin": SPIN_REQ[z],
            "nsp": SPIN_REQ[z] / 2.0}
        for z in ("Z1", "Z2", "Z3")
    }

    case = {
        "horizon": T,
        "reference_bus": "B1",
        "buses": buses,
        "lines": [{"id": lid, "from_bus": a, "to_bus": b, "reactance": x,
                   "rating": 300.0, "monitored": True} for lid, a, b, x in LINES],
        "generators": GENERATORS,
        "zones": ZONES,
        "requirements": requirements,
    }
    out = Path(__file__).resolve().parent.parent / "cases" / "desk14.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(case, indent=1) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
