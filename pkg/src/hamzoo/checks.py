"""Numeric test suites for the defining flow identities, with JSON-able reports.

The central identity: for H = f(H0) with any smooth f,

    0 = (1/m) dH/dx + pdot d2H/dp2 + (p/m) d2H/dpdx      (pdot = -V'(x))
    0 = pdot dH/dp + (p/m) dH/dx

both hold along with energy conservation.  Residuals are normalized by the
largest constituent term; raw residuals of nested exponentials scale with the
exponentials themselves and are meaningless otherwise.
"""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .dynamics import compare_flows, integrate
from .expressions import Potential, parse_potential
from .families import (HamiltonianSpec, OverflowRisk, PhasePoint, SystemParams,
                       base_energy, chain_factor, eval_derivs, eval_h)
from .lagrangians import LagrangianSpec, VelocityPoint, lagrangian, legendre_residual
from .quadrature import QuadratureFailure


def pde_residual(spec: HamiltonianSpec, params: SystemParams, pot: Potential,
                 pt: PhasePoint) -> float:
    """Normalized residual of (1/m) hx + pdot hpp + (p/m) hpx."""
    d = eval_derivs(spec, params, pot, pt)
    pdot = -pot.gradient(pt.x)
    t1 = d.hx / params.m
    t2 = pdot * d.hpp
    t3 = (pt.p / params.m) * d.hpx
    return (t1 + t2 + t3) / max(1.0, abs(t1), abs(t2), abs(t3))


def nh2_residual(spec: HamiltonianSpec, params: SystemParams, pot: Potential,
                 pt: PhasePoint) -> float:
    """Normalized residual of pdot hp + (p/m) hx (energy conservation form)."""
    d = eval_derivs(spec, params, pot, pt)
    pdot = -pot.gradient(pt.x)
    t1 = pdot * d.hp
    t2 = (pt.p / params.m) * d.hx
    return (t1 + t2) / max(1.0, abs(t1), abs(t2))


def nh3_from_nh2_check(spec: HamiltonianSpec, params: SystemParams, pot: Potential,
                       pt: PhasePoint, fd_step: float = 1e-5) -> float:
    """|d/dp of the first-order identity - the second-order identity|, normalized.

    The p-derivative of pdot hp + (p/m) hx is exactly (1/m) hx + pdot hpp +
    (p/m) hpx, so the central difference of the raw first-order residual must
    reproduce the raw second-order residual to truncation error.
    """
    pdot = -pot.gradient(pt.x)

    def raw_nh2(p: float) -> float:
        d = eval_derivs(spec, params, pot, PhasePoint(pt.x, p))
        return pdot * d.hp + (p / params.m) * d.hx

    fd = (raw_nh2(pt.p + fd_step) - raw_nh2(pt.p - fd_step)) / (2.0 * fd_step)
    d = eval_derivs(spec, params, pot, pt)
    t1 = d.hx / params.m
    t2 = pdot * d.hpp
    t3 = (pt.p / params.m) * d.hpx
    return abs(fd - (t1 + t2 + t3)) / max(1.0, abs(t1), abs(t2), abs(t3))


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)


@dataclass
class CheckRecord:
    key: str
    detail: str
    residual: float | None
    tolerance: float
    passed: bool
    skipped: bool = False
    error: str | None = None


@dataclass
class Report:
    """Structured residual/limit/equivalence results, serializable to JSON."""

    suite: str
    seed: int | None = None
    records: list[CheckRecord] = field(default_factory=list)
    slopes: dict[str, float] = field(default_factory=dict)

    def add(self, key: str, detail: str, residual: float, tolerance: float,
            skipped: bool = False) -> CheckRecord:
        passed = (not skipped) and math.isfinite(residual) and abs(residual) <= tolerance
        rec = CheckRecord(key=key, detail=detail, residual=residual,
                          tolerance=tolerance, passed=passed, skipped=skipped)
        self.records.append(rec)
        return rec

    def add_error(self, key: str, detail: str, tolerance: float, error: Exception) -> CheckRecord:
        rec = CheckRecord(key=key, detail=detail, residual=None, tolerance=tolerance,
                          passed=False, error=f"{type(error).__name__}: {error}")
        self.records.append(rec)
        return rec

    def extend(self, other: "Report") -> None:
        self.records.extend(other.records)
        self.slopes.update(other.slopes)

    @property
    def all_pass(self) -> bool:
        return all(r.passed or r.skipped for r in self.records)

    def max_residual(self) -> float:
        vals = [abs(r.residual) for r in self.records
                if r.residual is not None and math.isfinite(r.residual)]
        return max(vals) if vals else 0.0

    def counts(self) -> tuple[int, int, int]:
        n_pass = sum(1 for r in self.records if r.passed)
        n_skip = sum(1 for r in self.records if r.skipped)
        n_fail = len(self.records) - n_pass - n_skip
        return n_pass, n_fail, n_skip

    def to_dict(self) -> dict:
        def finite(v):
            return v if v is None or math.isfinite(v) else None

        n_pass, n_fail, n_skip = self.counts()
        records = []
        for r in self.records:
            d = asdict(r)
            d["residual"] = finite(d["residual"])
            d["tolerance"] = finite(d["tolerance"])
            records.append(d)
        return {
            "suite": self.suite,
            "seed": self.seed,
            "all_pass": self.all_pass,
            "summary": {"pass": n_pass, "fail": n_fail, "skip": n_skip,
                        "max_residual": self.max_residual(), "slopes": self.slopes},
            "records": records,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, allow_nan=False)

    def table(self) -> str:
        lines = [f"{'check':<58} {'residual':>12} {'tol':>9} {'status':>7}",
                 "-" * 89]
        for r in self.records:
            res = "-" if r.residual is None else f"{r.residual:12.3e}"
            status = "SKIP" if r.skipped else ("PASS" if r.passed else "FAIL")
            lines.append(f"{r.key:<58} {res:>12} {r.tolerance:>9.1e} {status:>7}")
        n_pass, n_fail, n_skip = self.counts()
        lines.append("-" * 89)
        lines.append(f"{n_pass} passed, {n_fail} failed, {n_skip} skipped; "
                     f"max residual {self.max_residual():.3e}")
        return "\n".join(lines)


def limit_ladder(spec: HamiltonianSpec, params: SystemParams, pot: Potential,
                 pt: PhasePoint, lambda_grid, slope_tol: float = 0.05) -> Report:
    """Error of the outermost-parameter limit over a lambda grid, with slope fit.

    For the level-j member, |(H_j - sign*m*lambda^2) - H_{j-1}| is evaluated
    with the outermost lambda swept over the grid (inner lambdas fixed), and
    the log-log slope is fitted; the Taylor remainder predicts slope -2.
    Rung-by-rung application walks the full ladder down to the base energy.
    """
    if spec.family != "cabbatonian" or spec.j < 1:
        raise ValueError("limit_ladder applies to cabbatonian members of level >= 1")
    grid = [float(v) for v in lambda_grid]
    if len(grid) < 4 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda_grid must be increasing with at least 4 values")
    inner = spec.lambdas[:-1]
    if spec.j == 1:
        lower = HamiltonianSpec(family="standard")
    else:
        lower = HamiltonianSpec(family="cabbatonian", j=spec.j - 1, lambdas=inner,
                                sign=spec.sign)
    target = eval_h(lower, params, pot, pt)
    report = Report(suite=f"limit_ladder {spec.describe()}")
    errors = []
    for lam in grid:
        outer = HamiltonianSpec(family="cabbatonian", j=spec.j,
                                lambdas=inner + (lam,), sign=spec.sign)
        level = eval_h(outer, params, pot, pt)
        err = abs((level - spec.sign * params.m * lam * lam) - target)
        errors.append(err)
        report.add(key=f"ladder j={spec.j} lambda={lam:g}",
                   detail=f"|H_j - sign*m*lam^2 - H_(j-1)| at {pt}",
                   residual=err, tolerance=math.inf)
    if all(e > 0 for e in errors):
        slope = fit_loglog_slope(grid, errors)
    else:
        slope = -2.0  # exact corrections (H0 = 0); treat as converged
    report.slopes[f"H{spec.j}->H{spec.j - 1}"] = slope
    report.add(key=f"ladder j={spec.j} slope",
               detail=f"log-log slope over lambda in {grid}",
               residual=abs(slope + 2.0), tolerance=slope_tol)
    return report


_DEFAULT_SPECS = (
    {"family": "standard"},
    {"family": "cabbatonian", "j": 1, "lambdas": [2.0], "sign": -1},
    {"family": "cabbatonian", "j": 2, "lambdas": [2.0, 2.5], "sign": -1},
    {"family": "cabbatonian", "j": 3, "lambdas": [2.0, 2.5, 3.0], "sign": -1},
    {"family": "sigma", "j": 0, "lambdas": [], "sigma": 2.0, "sign": -1},
    {"family": "sigma", "j": 1, "lambdas": [2.0], "sigma": 3.0, "sign": -1},
    {"family": "truncated_series", "lambdas": [2.0], "order": 8, "sign": -1},
    {"family": "power_base", "exponent": 2},
)


@dataclass
class RunConfig:
    """Suite configuration: potential, members, grids, tolerances, output."""

    potential: str = "0.5*x^2"
    m: float = 1.0
    specs: list = field(default_factory=lambda: [dict(d) for d in _DEFAULT_SPECS])
    integrator: str = "rk45"
    integrator_tol: float = 1e-10
    integrator_step: float = 1e-3
    seed: int = 42
    points: int = 100
    x_bound: float = 2.0
    p_bound: float = 2.0
    lambda_grid: tuple = (10.0, 20.0, 40.0, 80.0)
    pde_tol: float = 1e-8
    nh2_tol: float = 1e-8
    nh3_tol: float = 1e-6
    slope_tol: float = 0.05
    conservation_tol: float = 1e-8
    flow_deviation_tol: float = 1e-5
    period_ratio_tol: float = 1e-4
    legendre_tol: float = 1e-8
    legendre_levels: tuple = (0, 1, 2)
    legendre_lambdas: tuple = (2.0, 2.5, 3.0)
    legendre_grid: int = 5
    output_dir: str = "."

    @staticmethod
    def from_dict(d: dict) -> "RunConfig":
        cfg = RunConfig()
        known = set(cfg.__dataclass_fields__)
        for key, value in d.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            if isinstance(getattr(cfg, key), tuple):
                value = tuple(value)
            setattr(cfg, key, value)
        return cfg


def _sigma_excluded(spec, params, pot, pt) -> bool:
    # the multiplicative map degenerates where 1 - H_j/(m sigma^2) vanishes
    if spec.family != "sigma":
        return False
    cab = (HamiltonianSpec(family="standard") if spec.j == 0 else
           HamiltonianSpec(family="cabbatonian", j=spec.j, lambdas=spec.lambdas,
                           sign=spec.sign))
    h_j = eval_h(cab, params, pot, pt)
    return abs(1.0 - h_j / (params.m * spec.sigma ** 2)) < 1e-6


def _point_checks(name, func, spec, params, pot, points, tol, report):
    worst = 0.0
    skipped = 0
    try:
        for pt in points:
            if _sigma_excluded(spec, params, pot, pt):
                skipped += 1
                continue
            worst = max(worst, abs(func(spec, params, pot, pt)))
    except (OverflowRisk, QuadratureFailure) as exc:
        report.add_error(key=f"{name}:{spec.describe()}",
                         detail=f"{len(points)} seeded points", tolerance=tol, error=exc)
        return
    detail = f"max over {len(points) - skipped} seeded points"
    if skipped:
        detail += f" ({skipped} excluded near the sigma degeneracy)"
    report.add(key=f"{name}:{spec.describe()}", detail=detail, residual=worst, tolerance=tol)


def run_suite(config: RunConfig) -> Report:
    """Run every residual, limit, conservation, flow and Legendre check.

    Per-check failures are recorded and the suite continues; only config
    errors raise.  Checks run in a thread pool and the records are merged in
    a deterministic order.
    """
    pot = parse_potential(config.potential)
    parsed = [HamiltonianSpec.from_dict(d) for d in config.specs]
    rng = random.Random(config.seed)
    points = [PhasePoint(rng.uniform(-config.x_bound, config.x_bound),
                         rng.uniform(-config.p_bound, config.p_bound))
              for _ in range(config.points)]
    ladder_pt = PhasePoint(1.0, 1.0)
    start = PhasePoint(1.0, 0.0)

    jobs = []

    def job(order_key, fn):
        jobs.append((order_key, fn))

    for spec, m_override in parsed:
        params = SystemParams(m_override if m_override is not None else config.m)
        desc = spec.describe()

        def residual_jobs(spec=spec, params=params, desc=desc):
            rep = Report(suite=desc)
            _point_checks("pde", pde_residual, spec, params, pot, points,
                          config.pde_tol, rep)
            _point_checks("nh2", nh2_residual, spec, params, pot, points,
                          config.nh2_tol, rep)
            _point_checks("nh3", nh3_from_nh2_check, spec, params, pot, points,
                          config.nh3_tol, rep)
            return rep

        job(f"1:{desc}", residual_jobs)

        if spec.family == "cabbatonian":
            def ladder_job(spec=spec, params=params, desc=desc):
                try:
                    return limit_ladder(spec, params, pot, ladder_pt,
                                        config.lambda_grid, config.slope_tol)
                except (OverflowRisk, ValueError) as exc:
                    rep = Report(suite=desc)
                    rep.add_error(key=f"ladder j={spec.j}:{desc}", detail="limit ladder",
                                  tolerance=config.slope_tol, error=exc)
                    return rep
            job(f"2:{desc}", ladder_job)

        def conservation_job(spec=spec, params=params, desc=desc):
            rep = Report(suite=desc)
            try:
                e0 = base_energy(params, pot, start)
                c = abs(chain_factor(spec, params, pot, e0))
                t_end = 10.0 * 2.0 * math.pi / max(c, 1e-6)
                traj = integrate(spec, params, pot, start, t_end,
                                 method=config.integrator,
                                 step=config.integrator_step,
                                 tol=config.integrator_tol)
                rep.add(key=f"conservation:{desc}",
                        detail=f"relative H drift over t={t_end:.3g} ({config.integrator})",
                        residual=traj.energy_drift(), tolerance=config.conservation_tol)
                e_series = traj.p ** 2 / (2.0 * params.m) + \
                    np.array([pot.value(float(xi)) for xi in traj.x])
                drift0 = float(np.max(np.abs(e_series - e_series[0])) / max(1.0, abs(e_series[0])))
                rep.add(key=f"h0_drift:{desc}",
                        detail="relative base-energy drift along the same flow",
                        residual=drift0, tolerance=config.conservation_tol)
            except Exception as exc:
                rep.add_error(key=f"conservation:{desc}", detail="flow integration",
                              tolerance=config.conservation_tol, error=exc)
            return rep

        job(f"3:{desc}", conservation_job)

        if spec.family != "standard":
            def flow_job(spec=spec, params=params, desc=desc):
                rep = Report(suite=desc)
                try:
                    e0 = base_energy(params, pot, start)
                    c = abs(chain_factor(spec, params, pot, e0))
                    t_end = 2.5 * 2.0 * math.pi / min(max(c, 1e-6), 1.0)
                    result = compare_flows(HamiltonianSpec(family="standard"), spec,
                                           params, pot, start, t_end,
                                           method="rk45", tol=config.integrator_tol)
                    rep.add(key=f"flow:{desc}",
                            detail=f"max (x,p) deviation after t*{result.factor:.6g} rescale",
                            residual=result.max_deviation,
                            tolerance=config.flow_deviation_tol)
                    rep.add(key=f"period:{desc}",
                            detail=f"measured {result.measured_period_ratio:.9g} vs "
                                   f"predicted {result.predicted_period_ratio:.9g}",
                            residual=abs(result.measured_period_ratio
                                         - result.predicted_period_ratio),
                            tolerance=config.period_ratio_tol)
                except Exception as exc:
                    rep.add_error(key=f"flow:{desc}", detail="flow comparison",
                                  tolerance=config.flow_deviation_tol, error=exc)
                return rep

            job(f"4:{desc}", flow_job)

    def legendre_job():
        rep = Report(suite="legendre")
        grid = np.linspace(-1.0, 1.0, config.legendre_grid)
        params = SystemParams(config.m)
        for level in config.legendre_levels:
            lspec = LagrangianSpec(j=level, lambdas=config.legendre_lambdas[:level],
                                   params=params, pot=pot)
            try:
                worst = 0.0
                for x in grid:
                    for v in grid:
                        pt = VelocityPoint(float(x), float(v))
                        rel = abs(legendre_residual(lspec, pt)) / \
                            (1.0 + abs(lagrangian(lspec, pt)))
                        worst = max(worst, rel)
                rep.add(key=f"legendre:j={level}",
                        detail=f"relative residual on a {config.legendre_grid}x"
                               f"{config.legendre_grid} (x,v) grid",
                        residual=worst, tolerance=config.legendre_tol)
            except (OverflowRisk, QuadratureFailure) as exc:
                rep.add_error(key=f"legendre:j={level}", detail="grid evaluation",
                              tolerance=config.legendre_tol, error=exc)
        return rep

    job("5:legendre", legendre_job)

    def lagrangian_ladder_job():
        rep = Report(suite="lagrangian ladder")
        params = SystemParams(config.m)
        pt = VelocityPoint(1.0, 1.0)
        base = LagrangianSpec(j=0, lambdas=(), params=params, pot=pot)
        target = lagrangian(base, pt)
        errors = []
        try:
            for lam in config.lambda_grid:
                lspec = LagrangianSpec(j=1, lambdas=(float(lam),), params=params, pot=pot)
                errors.append(abs(lagrangian(lspec, pt) - params.m * lam * lam - target))
            slope = fit_loglog_slope(config.lambda_grid, errors)
            rep.slopes["L1->L0"] = slope
            rep.add(key="ladder L1->L0 slope",
                    detail=f"log-log slope over lambda in {list(config.lambda_grid)}",
                    residual=abs(slope + 2.0), tolerance=config.slope_tol)
        except (OverflowRisk, QuadratureFailure) as exc:
            rep.add_error(key="ladder L1->L0 slope", detail="lagrangian ladder",
                          tolerance=config.slope_tol, error=exc)
        return rep

    job("6:lagrangian_ladder", lagrangian_ladder_job)

    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda item: (item[0], item[1]()), jobs))

    merged = Report(suite=f"equivalence suite [{config.potential}]", seed=config.seed)
    for _, rep in sorted(results, key=lambda item: item[0]):
        merged.extend(rep)
    return merged
