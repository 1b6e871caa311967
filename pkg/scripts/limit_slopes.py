#!/usr/bin/env python3
"""Fit the large-lambda convergence rates of the Hamiltonian and Lagrangian ladders.

Each rung subtracts the sign*m*lambda^2 offset and compares against the level
below over a lambda grid; the Taylor remainder predicts a log-log slope of -2.
"""

import argparse

from hamzoo import (HamiltonianSpec, LagrangianSpec, PhasePoint, SystemParams,
                    VelocityPoint, fit_loglog_slope, lagrangian, limit_ladder,
                    parse_potential)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--potential", default="0.5*x^2")
    parser.add_argument("--m", type=float, default=1.0)
    parser.add_argument("--x", type=float, default=1.0)
    parser.add_argument("--p", type=float, default=1.0)
    parser.add_argument("--grid", default="10,20,40,80")
    args = parser.parse_args()

    pot = parse_potential(args.potential)
    params = SystemParams(args.m)
    pt = PhasePoint(args.x, args.p)
    grid = tuple(float(v) for v in args.grid.split(","))

    inner = (2.0, 2.5, 3.0)
    print(f"{'rung':<10} {'slope':>9}   per-lambda errors")
    for j in (1, 2, 3):
        spec = HamiltonianSpec(family="cabbatonian", j=j, lambdas=inner[:j], sign=-1)
        report = limit_ladder(spec, params, pot, pt, grid)
        errors = [r.residual for r in report.records if "lambda=" in r.key]
        slope = report.slopes[f"H{j}->H{j - 1}"]
        formatted = " ".join(f"{e:.3e}" for e in errors)
        print(f"H{j}->H{j - 1:<6} {slope:>9.4f}   {formatted}")

    vpt = VelocityPoint(args.x, args.p)
    base = lagrangian(LagrangianSpec(j=0, lambdas=(), params=params, pot=pot), vpt)
    errors = []
    for lam in grid:
        lspec = LagrangianSpec(j=1, lambdas=(lam,), params=params, pot=pot)
        errors.append(abs(lagrangian(lspec, vpt) - params.m * lam * lam - base))
    slope = fit_loglog_slope(grid, errors)
    formatted = " ".join(f"{e:.3e}" for e in errors)
    print(f"L1->L0{'':<4} {slope:>9.4f}   {formatted}")


if __name__ == "__main__":
    main()
