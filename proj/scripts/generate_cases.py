#!/usr/bin/env python3
"""Regenerate the bundled case and scenario files under data/.

Every value is produced deterministically (fixed RNG seed, stable ordering),
so rerunning this script must leave the committed files byte-identical.
"""

import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

# 24-hour load multipliers, peak at hours 18-19 (1-based)
PROFILE = [0.67, 0.63, 0.60, 0.59, 0.59, 0.60, 0.74, 0.86, 0.95, 0.96, 0.96, 0.95,
           0.95, 0.95, 0.93, 0.94, 0.99, 1.00, 1.00, 0.96, 0.91, 0.83, 0.73, 0.63]


def write_case(name, case):
    path = DATA / f"{name}.case"
    path.write_text(json.dumps(case, indent=2) + "\n")
    print(f"wrote {path}")


def write_scenarios(name, farm_ids, probabilities, outcomes):
    lines = ["scenario,probability," + ",".join(farm_ids)]
    for w, p in enumerate(probabilities):
        row = [f"s{w + 1}", repr(p)] + [repr(outcomes[k][w]) for k in range(len(farm_ids))]
        lines.append(",".join(row))
    path = DATA / f"{name}.csv"
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path}")


def sample_outcomes(rng, caps, means, common_w, idio_w, count):
    """Clipped-gaussian capacity factors with a common system component."""
    outcomes = [[] for _ in caps]
    for _ in range(count):
        common = rng.gauss(0.0, 1.0)
        for k, cap in enumerate(caps):
            factor = means[k] + common_w * common + idio_w * rng.gauss(0.0, 1.0)
            factor = min(max(factor, 0.01), 0.99)
            outcomes[k].append(round(cap * factor, 2))
    return outcomes


def micro():
    case = {
        "name": "micro",
        "zones": ["z1"],
        "nodes": [{"id": "n1", "zone": "z1"}, {"id": "n2", "zone": "z1"}],
        "lines": [{"id": "l1", "from": "n1", "to": "n2", "reactance": 0.1, "capacity": 80}],
        "generators": [
            {"id": "g1", "node": "n1", "energy_price": 10, "up_reserve_price": 3,
             "down_reserve_price": 1, "capacity": 100, "up_reserve_cap": 40,
             "down_reserve_cap": 40},
            {"id": "g2", "node": "n2", "energy_price": 30, "up_reserve_price": 9,
             "down_reserve_price": 3, "capacity": 100, "up_reserve_cap": 40,
             "down_reserve_cap": 40},
        ],
        "wind": [{"id": "w1", "node": "n2", "expected_output": 50, "installed_capacity": 100}],
        "loads": [{"id": "d1", "node": "n2", "demand": 120}],
        "options": {"voll": 500},
    }
    write_case("micro", case)
    write_scenarios("micro_scenarios", ["w1"], [0.5, 0.5], [[80.0, 20.0]])


# IEEE RTS-style 24-bus grid: (from, to, reactance, capacity). A handful of
# corridors are tightened so the network congests around the peak hour.
RTS24_LINES = [
    (1, 2, 0.0146, 175), (1, 3, 0.2253, 175), (1, 5, 0.0907, 350),
    (2, 4, 0.1356, 175), (2, 6, 0.2050, 175), (3, 9, 0.1271, 175),
    (3, 24, 0.0840, 300), (4, 9, 0.1110, 175), (5, 10, 0.0940, 350),
    (6, 10, 0.0642, 175), (7, 8, 0.0652, 350), (8, 9, 0.1762, 175),
    (8, 10, 0.1762, 175), (9, 11, 0.0840, 400), (9, 12, 0.0840, 400),
    (10, 11, 0.0840, 400), (10, 12, 0.0840, 400), (11, 13, 0.0488, 350),
    (11, 14, 0.0426, 500), (12, 13, 0.0488, 500), (12, 23, 0.0985, 350),
    (13, 23, 0.0884, 500), (14, 16, 0.0594, 350), (15, 16, 0.0172, 500),
    (15, 21, 0.0249, 1000), (15, 24, 0.0529, 350), (16, 17, 0.0263, 400),
    (16, 19, 0.0234, 500), (17, 18, 0.0143, 500), (17, 22, 0.1069, 500),
    (18, 21, 0.0132, 1000), (19, 20, 0.0203, 1000), (20, 23, 0.0112, 1000),
    (21, 22, 0.0692, 500),
]

# (bus, capacity, energy price, up/down reserve cap); reserve prices are 30%
# of the energy price. Total capacity 3375 MW, 550 MW per reserve direction.
RTS24_GENERATORS = [
    (1, 152, 13.32, 40), (2, 152, 13.32, 40), (7, 350, 20.70, 70),
    (13, 591, 20.93, 180), (15, 60, 26.11, 60), (15, 155, 10.52, 30),
    (16, 155, 10.52, 30), (18, 400, 6.02, 0), (21, 400, 5.47, 0),
    (22, 300, 0.00, 0), (23, 310, 10.52, 60), (23, 350, 10.89, 40),
]

# commitment data per unit: (min_output, startup, ramp_up, ramp_down,
# initial_output, initial_commitment)
RTS24_UC = [
    (38, 1000, 76, 76, 76, 1), (38, 1000, 76, 76, 76, 1),
    (70, 500, 350, 350, 0, 0), (118, 800, 300, 300, 118, 1),
    (12, 200, 60, 60, 0, 0), (39, 1200, 78, 78, 78, 1),
    (39, 1200, 78, 78, 78, 1), (280, 4000, 80, 80, 400, 1),
    (280, 4000, 80, 80, 400, 1), (0, 0, 300, 300, 200, 1),
    (78, 1500, 155, 155, 155, 1), (88, 1500, 175, 175, 175, 1),
]

# bus: share of the 2850 MW reference load; rescaled so the peak is 2650 MW
RTS24_LOADS = {1: 108, 2: 97, 3: 180, 4: 74, 5: 71, 6: 136, 7: 125, 8: 171, 9: 175,
               10: 195, 13: 265, 14: 194, 15: 317, 16: 100, 18: 333, 19: 181, 20: 128}

RTS24_WIND_BUSES = [3, 5, 7, 16, 21, 23]
RTS24_WIND_MEANS = [0.42, 0.48, 0.45, 0.50, 0.40, 0.52]

RTS24_ZONES = {
    "z1": range(1, 11),          # north
    "z2": [11, 12, 13, 14, 23, 24],
    "z3": range(15, 23),         # south
}


def rts24_loads():
    scale = 2650.0 / sum(RTS24_LOADS.values())
    demands = {bus: round(mw * scale, 1) for bus, mw in RTS24_LOADS.items()}
    # nudge the largest load so the rounded total is exactly the peak value
    total = round(sum(demands.values()), 6)
    demands[18] = round(demands[18] + 2650.0 - total, 6)
    return demands


def rts24(zones, name, with_uc=False):
    zone_of = {}
    for zone, buses in zones.items():
        for bus in buses:
            zone_of[bus] = zone
    rng = random.Random(20240)
    outcomes = sample_outcomes(rng, [100.0] * 6, RTS24_WIND_MEANS, 0.13, 0.09, 60)
    expected = [round(sum(col) / len(col), 4) for col in outcomes]

    case = {
        "name": name,
        "zones": list(zones.keys()),
        "nodes": [{"id": f"n{b}", "zone": zone_of[b]} for b in range(1, 25)],
        "lines": [{"id": f"l{i + 1}", "from": f"n{a}", "to": f"n{b}",
                   "reactance": x, "capacity": cap}
                  for i, (a, b, x, cap) in enumerate(RTS24_LINES)],
        "generators": [],
        "wind": [{"id": f"w{k + 1}", "node": f"n{bus}", "expected_output": expected[k],
                  "installed_capacity": 100}
                 for k, bus in enumerate(RTS24_WIND_BUSES)],
        "loads": [{"id": f"d{j + 1}", "node": f"n{bus}", "demand": demand}
                  for j, (bus, demand) in enumerate(sorted(rts24_loads().items()))],
        "options": {"voll": 500, "load_profile": PROFILE},
    }
    for i, (bus, cap, price, rcap) in enumerate(RTS24_GENERATORS):
        gen = {"id": f"g{i + 1}", "node": f"n{bus}", "energy_price": price,
               "up_reserve_price": round(0.3 * price, 4),
               "down_reserve_price": round(0.3 * price, 4),
               "capacity": cap, "up_reserve_cap": rcap, "down_reserve_cap": rcap}
        if with_uc:
            mo, su, ru, rd, p0, u0 = RTS24_UC[i]
            gen["uc"] = {"min_output": mo, "startup_cost": su, "ramp_up": ru,
                         "ramp_down": rd, "initial_output": p0, "initial_commitment": u0}
        case["generators"].append(gen)
    write_case(name, case)
    return outcomes


def rts96():
    area_buses = 32
    zones = ["z1", "z2", "z3"]
    nodes = []
    for a in range(3):
        for b in range(1, area_buses + 1):
            nodes.append({"id": f"n{a * area_buses + b}", "zone": zones[a]})

    lines = []

    def add_line(a, b, x, cap):
        lines.append({"id": f"l{len(lines) + 1}", "from": f"n{a}", "to": f"n{b}",
                      "reactance": x, "capacity": cap})

    for a in range(3):
        base = a * area_buses
        for b in range(1, area_buses):
            add_line(base + b, base + b + 1, 0.02, 600)
        add_line(base + 1, base + area_buses, 0.02, 600)       # close the ring
        add_line(base + 1, base + 17, 0.04, 500)               # two chords
        add_line(base + 9, base + 25, 0.04, 500)
    for a, b in [(16, 40), (32, 56), (48, 72), (64, 88), (80, 8), (96, 24)]:
        add_line(a, b, 0.03, 800)                              # six tie-lines

    # eight units per area; base plants carry no reserves, mid units offer 40%
    # of capacity, fast units their full capacity (25% reserve price markup)
    unit_shapes = [(700, 5.0, 0.0), (600, 7.0, 0.0), (450, 11.0, 0.4), (450, 12.0, 0.4),
                   (400, 14.0, 0.4), (300, 18.0, 1.0), (250, 22.0, 1.0), (200, 26.0, 1.0)]
    gen_buses = [2, 6, 10, 14, 19, 23, 27, 30]
    generators = []
    for a in range(3):
        for u, (cap, price, flex) in enumerate(unit_shapes):
            bus = a * area_buses + gen_buses[u]
            price = round(price + 0.2 * a, 2)
            rcap = round(cap * flex, 1)
            generators.append({"id": f"g{len(generators) + 1}", "node": f"n{bus}",
                               "energy_price": price,
                               "up_reserve_price": round(0.25 * price, 4),
                               "down_reserve_price": round(0.25 * price, 4),
                               "capacity": cap, "up_reserve_cap": rcap,
                               "down_reserve_cap": rcap})

    # 19 wind farms totalling 2760 MW, split 7/6/6 across the areas
    farm_buses = [3, 7, 12, 18, 22, 27, 31,
                  35, 41, 47, 53, 59, 63,
                  67, 73, 79, 85, 91, 95]
    farm_caps = [150.0] * 13 + [135.0] * 6
    rng = random.Random(20960)
    means = [round(0.38 + 0.18 * rng.random(), 3) for _ in farm_buses]
    outcomes = sample_outcomes(rng, farm_caps, means, 0.12, 0.08, 100)
    expected = [round(sum(col) / len(col), 4) for col in outcomes]
    wind = [{"id": f"w{k + 1}", "node": f"n{bus}", "expected_output": expected[k],
             "installed_capacity": farm_caps[k]}
            for k, bus in enumerate(farm_buses)]

    # ten loads per area, 2500 MW peak each
    load_buses = [2, 5, 9, 13, 16, 20, 23, 26, 29, 32]
    load_shares = [0.08, 0.09, 0.10, 0.11, 0.12, 0.11, 0.10, 0.10, 0.10, 0.09]
    loads = []
    for a in range(3):
        for j, share in enumerate(load_shares):
            bus = a * area_buses + load_buses[j]
            loads.append({"id": f"d{len(loads) + 1}", "node": f"n{bus}",
                          "demand": round(2500.0 * share, 1)})

    case = {"name": "rts96", "zones": zones, "nodes": nodes, "lines": lines,
            "generators": generators, "wind": wind, "loads": loads,
            "options": {"voll": 500, "load_profile": PROFILE}}
    write_case("rts96", case)
    write_scenarios("rts96_scenarios", [w["id"] for w in wind],
                    [0.01] * 100, outcomes)


def main():
    DATA.mkdir(exist_ok=True)
    micro()
    outcomes = rts24(RTS24_ZONES, "rts24_3zone")
    rts24({"z1": range(1, 25)}, "rts24")
    rts24({"z1": range(1, 25)}, "rts24_uc", with_uc=True)
    write_scenarios("rts24_scenarios", [f"w{k + 1}" for k in range(6)],
                    [round(1.0 / 60.0, 12)] * 60, outcomes)
    rts96()


if __name__ == "__main__":
    main()
