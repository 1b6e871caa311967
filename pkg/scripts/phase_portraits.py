#!/usr/bin/env python3
"""Overlay the standard flow with nested-exponential flows through one start.

Every member traces the same phase curve at its own pace; the SVG overlays
the curves and the console reports the measured vs predicted period ratios.
"""

import argparse
import math
from pathlib import Path

from hamzoo import (HamiltonianSpec, PhasePoint, SystemParams, compare_flows,
                    integrate, parse_potential, write_trajectory_csv)
from hamzoo.render import phase_portrait_svg

MEMBERS = [
    HamiltonianSpec(family="standard"),
    HamiltonianSpec(family="cabbatonian", j=1, lambdas=(2.0,), sign=-1),
    HamiltonianSpec(family="cabbatonian", j=2, lambdas=(2.0, 2.5), sign=-1),
    HamiltonianSpec(family="sigma", j=1, lambdas=(2.0,), sigma=3.0, sign=-1),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--potential", default="0.5*x^2")
    parser.add_argument("--m", type=float, default=1.0)
    parser.add_argument("--x0", type=float, default=1.0)
    parser.add_argument("--p0", type=float, default=0.0)
    parser.add_argument("--t-end", type=float, default=4.0 * math.pi)
    parser.add_argument("--out-dir", default="out")
    args = parser.parse_args()

    pot = parse_potential(args.potential)
    params = SystemParams(args.m)
    start = PhasePoint(args.x0, args.p0)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    curves = []
    for i, spec in enumerate(MEMBERS):
        traj = integrate(spec, params, pot, start, args.t_end, method="rk45", tol=1e-10)
        write_trajectory_csv(traj, out_dir / f"flow_{i}_{spec.family}.csv")
        curves.append((spec.describe(), list(traj.x), list(traj.p)))
        if spec.family != "standard":
            report = compare_flows(MEMBERS[0], spec, params, pot, start, args.t_end)
            print(f"{spec.describe():<44} period ratio "
                  f"{report.measured_period_ratio:.6f} "
                  f"(predicted {report.predicted_period_ratio:.6f}), "
                  f"phase-curve deviation {report.max_deviation:.2e}")

    svg_path = out_dir / "phase_portrait.svg"
    svg_path.write_text(phase_portrait_svg(curves), encoding="ascii")
    print(f"overlay written to {svg_path}")


if __name__ == "__main__":
    main()
