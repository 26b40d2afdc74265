#!/usr/bin/env python3
"""Writes the synthetic-munich scenario: grid network, one 6 km route, gravity OD split."""
import argparse
import csv
import json
from pathlib import Path

COLS, ROWS = 31, 7
SPACING_M = 200.0
SPEED_KMH = 40.0
ROUTE_ROW = 3
STOP_EVERY = 2          # grid columns between stops (400 m)
TERMINUS_WEIGHT = 8.0
MIN_TRIP_KM = 1.0
OFFPEAK_PAX_H = 138.0


def node_id(c, r):
    return r * COLS + c


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=Path, nargs="?", default=Path(__file__).resolve().parent.parent / "data" / "synthetic-munich")
    args = ap.parse_args()
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    edge_time = SPACING_M / (SPEED_KMH / 3.6)
    with open(out / "nodes.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["node_id", "x_m", "y_m"])
        for r in range(ROWS):
            for c in range(COLS):
                w.writerow([node_id(c, r), int(c * SPACING_M), int(r * SPACING_M)])
    with open(out / "edges.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["from_id", "to_id", "length_m", "travel_time_s"])
        for r in range(ROWS):
            for c in range(COLS):
                for dc, dr in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    cc, rr = c + dc, r + dr
                    if 0 <= cc < COLS and 0 <= rr < ROWS:
                        w.writerow([node_id(c, r), node_id(cc, rr), int(SPACING_M), f"{edge_time:g}"])

    stop_cols = list(range(0, COLS, STOP_EVERY))
    with open(out / "stops.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["seq", "node_id", "chainage_km"])
        for i, c in enumerate(stop_cols):
            w.writerow([i, node_id(c, ROUTE_ROW), f"{c * SPACING_M / 1000:g}"])

    weights = [TERMINUS_WEIGHT if i == 0 else 1.0 for i in range(len(stop_cols))]
    pairs = []
    for i, ci in enumerate(stop_cols):
        for j, cj in enumerate(stop_cols):
            d_km = abs(ci - cj) * SPACING_M / 1000
            if i != j and d_km >= MIN_TRIP_KM - 1e-9:
                pairs.append((i, j, weights[i] * weights[j] / d_km))
    total = sum(p[2] for p in pairs)
    with open(out / "od.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["origin_stop", "destination_stop", "rate_pax_per_h"])
        for i, j, g in pairs:
            w.writerow([i, j, f"{OFFPEAK_PAX_H * g / total:.4f}"])

    length_km = (COLS - 1) * SPACING_M / 1000
    with open(out / "route.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["route_id", "length_km", "cycle_time_min", "peak_demand_pax_h", "offpeak_demand_pax_h",
                    "existing_headway_min", "vehicle_size", "fleet_size"])
        w.writerow(["S7", f"{length_km:g}", 40, 351, f"{OFFPEAK_PAX_H:g}", 10, 70, 4])

    scenario = {
        "network": {"edges": "edges.csv", "nodes": "nodes.csv"},
        "route": "route.csv",
        "stops": "stops.csv",
        "od": "od.csv",
        "alphas": [0, 0.75, 1],
        "offpeak_headway_min": {"0": 5, "0.75": 8, "1": 10},
        "xf_step_km": 1,
        "replications": 100,
        "seed": 20240521,
        "horizon_h": 3,
        "warmup_h": 1,
        "confidence": 0.95,
        "catchment_m": 500,
        "access": {"model": "linear", "max_walk_m": 500, "min_probability": 0.5},
        "output": "out",
    }
    (out / "scenario.json").write_text(json.dumps(scenario, indent=2) + "\n")


if __name__ == "__main__":
    main()
