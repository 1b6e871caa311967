"""Command-line entry point: eval | integrate | verify | legendre | pascal | sweep.

Exit codes: 0 success, 1 failed verification checks, 2 parse/spec/config
errors, 3 overflow-guard or integrator failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .checks import RunConfig, fit_loglog_slope, run_suite
from .dynamics import StepFailure, compare_flows, integrate, write_trajectory_csv
from .expressions import DomainError, ParseError, parse_potential
from .families import (HamiltonianSpec, InvalidSpec, OverflowRisk, PhasePoint,
                       SystemParams, base_energy, chain_factor, eval_derivs,
                       eval_h, pascal_row, sierpinski_mask)
from .lagrangians import LagrangianSpec, VelocityPoint, lagrangian, legendre_residual, momentum
from .quadrature import QuadratureFailure
from .render import parity_pgm, phase_portrait_svg

_SPEC_HELP = 'family description as JSON, e.g. \'{"family":"cabbatonian","j":1,"lambdas":[2.0],"sign":-1}\''


def _load_spec(text: str) -> tuple[HamiltonianSpec, float | None]:
    return HamiltonianSpec.from_dict(json.loads(text))


def _resolve_mass(flag_m: float | None, spec_m: float | None) -> SystemParams:
    if flag_m is not None:
        return SystemParams(flag_m)
    return SystemParams(spec_m if spec_m is not None else 1.0)


def cmd_eval(args) -> int:
    spec, spec_m = _load_spec(args.spec)
    params = _resolve_mass(args.m, spec_m)
    pot = parse_potential(args.potential)
    pt = PhasePoint(args.x, args.p)
    d = eval_derivs(spec, params, pot, pt)
    c = chain_factor(spec, params, pot, base_energy(params, pot, pt))
    rows = [("H", d.h), ("dH/dx", d.hx), ("dH/dp", d.hp),
            ("d2H/dp2", d.hpp), ("d2H/dpdx", d.hpx), ("chain_factor", c)]
    for name, value in rows:
        print(f"{name:<14}{value:.17g}")
    return 0


def cmd_integrate(args) -> int:
    spec, spec_m = _load_spec(args.spec)
    params = _resolve_mass(args.m, spec_m)
    pot = parse_potential(args.potential)
    start = PhasePoint(args.x0, args.p0)
    traj = integrate(spec, params, pot, start, args.t_end,
                     method=args.method, step=args.step, tol=args.tol)
    write_trajectory_csv(traj, args.out)
    print(f"wrote {len(traj)} samples to {args.out} "
          f"(method {args.method}, relative H drift {traj.energy_drift():.3e})")

    curves = [(spec.describe(), list(traj.x), list(traj.p))]
    if args.compare is not None:
        other, other_m = _load_spec(args.compare)
        other_params = _resolve_mass(args.m, other_m)
        other_traj = integrate(other, other_params, pot, start, args.t_end,
                               method=args.method, step=args.step, tol=args.tol)
        curves.append((other.describe(), list(other_traj.x), list(other_traj.p)))
        result = compare_flows(spec, other, params, pot, start, args.t_end,
                               method="rk45", tol=args.tol if args.tol else 1e-10)
        print(f"rescale factor {result.factor:.9g}; "
              f"period ratio measured {result.measured_period_ratio:.9g} "
              f"vs predicted {result.predicted_period_ratio:.9g}; "
              f"max phase-curve deviation {result.max_deviation:.3e}")
    if args.svg is not None:
        Path(args.svg).write_text(phase_portrait_svg(curves), encoding="ascii")
        print(f"wrote phase portrait to {args.svg}")
    return 0


def cmd_verify(args) -> int:
    if args.config is not None:
        try:
            raw = json.loads(Path(args.config).read_text())
            config = RunConfig.from_dict(raw)
        except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
    else:
        config = RunConfig()
    if args.seed is not None:
        config.seed = args.seed
    try:
        report = run_suite(config)
    except ValueError as exc:  # bad spec or potential in the config
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else Path(config.output_dir) / "report.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_json(), encoding="ascii")
    print(report.table())
    print(f"report written to {out}")
    return 0 if report.all_pass else 1


def cmd_legendre(args) -> int:
    pot = parse_potential(args.potential)
    params = SystemParams(args.m)
    lambdas = _parse_floats(args.lambdas) if args.lambdas else []
    lspec = LagrangianSpec(j=args.j, lambdas=tuple(lambdas[:args.j]), params=params, pot=pot)
    xs = np.linspace(args.x_min, args.x_max, args.n)
    vs = np.linspace(args.v_min, args.v_max, args.n)
    lines = ["x,v,Lj,pj,legendre_residual"]
    worst = 0.0
    for x in xs:
        for v in vs:
            pt = VelocityPoint(float(x), float(v))
            lj = lagrangian(lspec, pt)
            pj = momentum(lspec, pt)
            res = legendre_residual(lspec, pt)
            worst = max(worst, abs(res) / (1.0 + abs(lj)))
            lines.append(f"{x:.17g},{v:.17g},{lj:.17g},{pj:.17g},{res:.17g}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="ascii")
    print(f"wrote {len(lines) - 1} grid rows to {args.out}; "
          f"max relative residual {worst:.3e}")
    return 0


def cmd_pascal(args) -> int:
    if args.mask:
        mask = sierpinski_mask(args.rows)
        out = args.out if args.out else "pascal_mask.pgm"
        Path(out).write_bytes(parity_pgm(mask))
        print(f"wrote {args.rows}x{args.rows} parity mask to {out}")
        return 0
    if args.rows > 60:
        # exact integer rows stop at 60; the parity mask has no such limit
        print(f"error: exact integer rows are limited to 60, got {args.rows} "
              "(use --mask for larger triangles)", file=sys.stderr)
        return 2
    for k in range(args.rows):
        print(" ".join(str(v) for v in pascal_row(k)))
    return 0


def cmd_sweep(args) -> int:
    spec, spec_m = _load_spec(args.spec)
    if spec.family != "cabbatonian":
        raise InvalidSpec("sweep varies the outermost lambda of a cabbatonian member")
    params = _resolve_mass(args.m, spec_m)
    pot = parse_potential(args.potential)
    pt = PhasePoint(args.x, args.p)
    grid = _parse_floats(args.grid)
    inner = spec.lambdas[:-1]
    lower = (HamiltonianSpec(family="standard") if spec.j == 1 else
             HamiltonianSpec(family="cabbatonian", j=spec.j - 1, lambdas=inner,
                             sign=spec.sign))
    target = eval_h(lower, params, pot, pt)
    e0 = base_energy(params, pot, pt)
    lines = ["lambda,H,chain_factor,limit_error"]
    errors = []
    for lam in grid:
        outer = HamiltonianSpec(family="cabbatonian", j=spec.j,
                                lambdas=inner + (lam,), sign=spec.sign)
        h = eval_h(outer, params, pot, pt)
        c = chain_factor(outer, params, pot, e0)
        err = abs(h - spec.sign * params.m * lam * lam - target)
        errors.append(err)
        lines.append(f"{lam:.17g},{h:.17g},{c:.17g},{err:.17g}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="ascii")
    msg = f"wrote {len(grid)} sweep rows to {args.out}"
    if len(grid) >= 2 and all(e > 0 for e in errors):
        msg += f"; limit-error log-log slope {fit_loglog_slope(grid, errors):.4f}"
    print(msg)
    return 0


def _parse_floats(text: str) -> list[float]:
    return [float(piece) for piece in text.split(",") if piece.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamzoo",
        description="Newton-equivalent Hamiltonian/Lagrangian families: "
                    "evaluation, phase-flow integration and equivalence checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate H and its partials at a phase point")
    p.add_argument("--spec", required=True, help=_SPEC_HELP)
    p.add_argument("--potential", required=True, help="V(x) expression, e.g. '0.5*x^2'")
    p.add_argument("--m", type=float, default=None, help="mass (default: spec m or 1.0)")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("integrate", help="integrate the flow and export CSV/SVG")
    p.add_argument("--spec", required=True, help=_SPEC_HELP)
    p.add_argument("--potential", required=True)
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--method", choices=("rk4", "rk45", "implicit_midpoint"), default="rk4")
    p.add_argument("--step", type=float, default=None, help="fixed step (rk4/implicit_midpoint)")
    p.add_argument("--tol", type=float, default=None, help="local error tolerance (rk45)")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.add_argument("--svg", default=None, help="optional phase-portrait SVG path")
    p.add_argument("--compare", default=None, help="overlay a second member (JSON spec)")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("verify", help="run the equivalence suite and write a JSON report")
    p.add_argument("--config", default=None, help="RunConfig JSON file (default: built-in)")
    p.add_argument("--out", default=None, help="report path (default: <output_dir>/report.json)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("legendre", help="Lagrangian grid report (x,v,Lj,pj,residual CSV)")
    p.add_argument("--j", type=int, required=True, help="hierarchy level >= 0")
    p.add_argument("--lambdas", default="", help="comma-separated lambdas, e.g. '2,3'")
    p.add_argument("--potential", required=True)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--x-min", type=float, default=-1.0)
    p.add_argument("--x-max", type=float, default=1.0)
    p.add_argument("--v-min", type=float, default=-1.0)
    p.add_argument("--v-max", type=float, default=1.0)
    p.add_argument("--n", type=int, default=10, help="grid points per axis")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_legendre)

    p = sub.add_parser("pascal", help="print Pascal rows or write the parity-mask PGM")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--mask", action="store_true", help="write the odd-parity mask as PGM")
    p.add_argument("--out", default=None, help="PGM path (mask mode)")
    p.set_defaults(func=cmd_pascal)

    p = sub.add_parser("sweep", help="sweep the outermost lambda over a grid, CSV out")
    p.add_argument("--spec", required=True, help=_SPEC_HELP + " (cabbatonian)")
    p.add_argument("--potential", required=True)
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--grid", default="10,20,40,80", help="comma-separated lambda values")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    for sp in sub.choices.values():
        sp.add_argument("--seed", type=int, default=None, help="seed for random grids")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OverflowRisk, QuadratureFailure, StepFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, ValueError, OSError) as exc:
        # ParseError, InvalidSpec and JSONDecodeError are ValueError subclasses
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
