#!/usr/bin/env python3
"""Run the four-line convergence experiment: accessory parameter per epsilon,
internal-edge length recovery, and the seven-region sup/bound table."""

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from disktree.cli import load_scenario_file, scenario_from_file, write_plot_script, write_report
from disktree.converge import GridSpec, canonical_shift, run_report
from disktree.geometry import classify
from disktree.gradtree import internal_edge_length
from disktree.param import solve_z4

DEFAULT_SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "k4_demo.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", default=str(DEFAULT_SCENARIO))
    ap.add_argument("--grid", type=int, default=64)
    ap.add_argument("--out", default=None, help="also write CSV + plot script here")
    args = ap.parse_args()

    data = load_scenario_file(args.scenario)
    s = scenario_from_file(data).rotated(0)
    s = s.rotated(canonical_shift(s))
    length = internal_edge_length(s, classify(s))
    print(f"internal edge length l = {length:.12g}")
    print(f"{'eps':>7} {'z4':>14} {'-eps log z4 / pi':>18}")
    for eps in data["epsilon_schedule"]:
        sol = solve_z4(s.with_epsilon(eps))
        print(f"{eps:>7.4g} {sol.z4:>14.6e} {-eps * sol.log_z4 / math.pi:>18.9f}")

    report = run_report(s, eps_schedule=data["epsilon_schedule"],
                        grid=GridSpec.square(args.grid))
    print(f"\nclassification: {report.classification}")
    print(f"{'region':<22} {'eps':>7} {'sup error':>13} {'bound':>13}")
    for r in report.rows:
        print(f"{r.region:<22} {r.epsilon:>7.4g} {r.sup_error:>13.6e} {r.bound:>13.6e}")
    if args.out:
        write_report(report, args.out, seed=data["seed"])
        print("wrote", args.out, "and", write_plot_script(report, args.out))


if __name__ == "__main__":
    main()
