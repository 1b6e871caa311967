"""Phase-flow integration and time-rescaling comparisons between flows.

All family members share the conserved base energy H0 along their own flow,
so each flow is the standard flow traversed at the constant rate given by the
chain factor at the conserved level.  integrate() samples the exact Hamilton
equations xdot = dH/dp, pdot = -dH/dx; compare_flows() verifies the rate
relation by rescaling timestamps and interpolating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .expressions import Potential
from .families import (HamiltonianSpec, OverflowRisk, PhasePoint, SystemParams,
                       base_energy, chain_factor, eval_derivs, eval_h)

METHODS = ("rk4", "rk45", "implicit_midpoint")


class StepFailure(RuntimeError):
    """Adaptive step control collapsed or an implicit solve failed to converge."""


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped samples of one flow, with integrator metadata."""

    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    h: np.ndarray
    spec: HamiltonianSpec
    params: SystemParams
    method: str
    step: float | None = None
    tol: float | None = None

    def __len__(self) -> int:
        return len(self.t)

    def energy_drift(self) -> float:
        """max |H - H(0)| / max(1, |H(0)|) along the samples."""
        return float(np.max(np.abs(self.h - self.h[0])) / max(1.0, abs(self.h[0])))

    def uniform_step(self) -> float | None:
        """The common step when sampling is uniform, else None."""
        if len(self.t) < 2:
            return None
        dt = np.diff(self.t)
        h = dt[0]
        if np.allclose(dt, h, rtol=1e-9, atol=0.0):
            return float(h)
        return None


@dataclass(frozen=True)
class RescaleReport:
    """Outcome of comparing two flows through the same start point."""

    factor: float                  # predicted chain-factor ratio c_B / c_A
    predicted_period_ratio: float  # c_A / c_B
    measured_period_ratio: float   # T_B / T_A from zero crossings of p(t)
    max_deviation: float           # max pointwise (x, p) gap after rescaling


def integrate(spec: HamiltonianSpec, params: SystemParams, pot: Potential,
              start: PhasePoint, t_end: float, method: str = "rk4",
              step: float | None = None, tol: float | None = None) -> Trajectory:
    """Sample the flow xdot = dH/dp, pdot = -dH/dx from start to t_end.

    rk4 and implicit_midpoint use a fixed step (the step is rounded so the
    final sample lands exactly on t_end); rk45 adapts the step to keep the
    local error estimate below tol.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if t_end < 0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")

    def rhs(t: float, x: float, p: float) -> tuple[float, float]:
        try:
            d = eval_derivs(spec, params, pot, PhasePoint(x, p))
        except OverflowRisk as exc:
            raise OverflowRisk(f"{exc} (at t={t:.9g})", level=exc.level,
                               argument=exc.argument, time=t) from None
        return d.hp, -d.hx

    if t_end == 0.0:
        ts, xs, ps = [0.0], [start.x], [start.p]
    elif method == "rk4":
        ts, xs, ps = _rk4(rhs, start, t_end, step if step is not None else 1e-3)
    elif method == "implicit_midpoint":
        ts, xs, ps = _implicit_midpoint(rhs, start, t_end,
                                        step if step is not None else 1e-3)
    else:
        ts, xs, ps = _rk45(rhs, start, t_end, tol if tol is not None else 1e-10)

    hs = [eval_h(spec, params, pot, PhasePoint(x, p)) for x, p in zip(xs, ps)]
    return Trajectory(t=np.asarray(ts), x=np.asarray(xs), p=np.asarray(ps),
                      h=np.asarray(hs), spec=spec, params=params,
                      method=method, step=step, tol=tol)


def _rk4(rhs, start, t_end, step):
    n = max(1, round(t_end / step))
    h = t_end / n
    x, p = start.x, start.p
    ts, xs, ps = [0.0], [x], [p]
    for i in range(n):
        t = i * h
        k1 = rhs(t, x, p)
        k2 = rhs(t + h / 2, x + h / 2 * k1[0], p + h / 2 * k1[1])
        k3 = rhs(t + h / 2, x + h / 2 * k2[0], p + h / 2 * k2[1])
        k4 = rhs(t + h, x + h * k3[0], p + h * k3[1])
        x += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        ts.append((i + 1) * h)
        xs.append(x)
        ps.append(p)
    return ts, xs, ps


def _implicit_midpoint(rhs, start, t_end, step, fp_tol=1e-12, max_iter=50):
    n = max(1, round(t_end / step))
    h = t_end / n
    x, p = start.x, start.p
    ts, xs, ps = [0.0], [x], [p]
    for i in range(n):
        t = i * h
        fx, fp = rhs(t, x, p)
        zx, zp = x + h * fx, p + h * fp  # explicit Euler predictor
        for _ in range(max_iter):
            fx, fp = rhs(t + h / 2, 0.5 * (x + zx), 0.5 * (p + zp))
            nx, np_ = x + h * fx, p + h * fp
            if max(abs(nx - zx), abs(np_ - zp)) <= fp_tol:
                zx, zp = nx, np_
                break
            zx, zp = nx, np_
        else:
            raise StepFailure(f"implicit midpoint fixed point did not converge at t={t:.9g}")
        x, p = zx, zp
        ts.append((i + 1) * h)
        xs.append(x)
        ps.append(p)
    return ts, xs, ps


# Dormand-Prince 5(4) pair with FSAL; the 5th-order solution is propagated.
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _rk45(rhs, start, t_end, tol, max_rejects=40):
    # the estimate bounds the embedded 4th-order error while the 5th-order
    # solution is propagated; running the controller a factor 5 below the
    # requested tolerance keeps the accumulated drift under tol over long runs
    atol = rtol = 0.2 * tol
    t, x, p = 0.0, start.x, start.p
    ts, xs, ps = [t], [x], [p]
    k = [None] * 7
    k[0] = rhs(t, x, p)
    h = min(1e-2, t_end)
    rejects = 0
    while t < t_end:
        h = min(h, t_end - t)
        if h < 1e-13 * max(1.0, abs(t)):
            raise StepFailure(f"rk45 step underflow at t={t:.9g}")
        for stage in range(1, 7):
            ax = sum(a * k[m][0] for m, a in enumerate(_DP_A[stage]))
            ap = sum(a * k[m][1] for m, a in enumerate(_DP_A[stage]))
            k[stage] = rhs(t + _DP_C[stage] * h, x + h * ax, p + h * ap)
        x_new = x + h * sum(a * k[m][0] for m, a in enumerate(_DP_A[6]))
        p_new = p + h * sum(a * k[m][1] for m, a in enumerate(_DP_A[6]))
        err_x = h * sum(e * k[m][0] for m, e in enumerate(_DP_E))
        err_p = h * sum(e * k[m][1] for m, e in enumerate(_DP_E))
        sc_x = atol + rtol * max(abs(x), abs(x_new))
        sc_p = atol + rtol * max(abs(p), abs(p_new))
        err = math.sqrt(0.5 * ((err_x / sc_x) ** 2 + (err_p / sc_p) ** 2))
        if err <= 1.0:
            t += h
            if t_end - t <= 1e-12 * max(1.0, t_end):
                t = t_end  # snap the last step; a 1-ulp sliver would underflow
            x, p = x_new, p_new
            ts.append(t)
            xs.append(x)
            ps.append(p)
            k[0] = k[6]  # FSAL
            rejects = 0
        else:
            rejects += 1
            if rejects > max_rejects:
                raise StepFailure(f"rk45 rejected {max_rejects} steps in a row at t={t:.9g}")
        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h *= factor
    return ts, xs, ps


def newton_residual(traj: Trajectory, params: SystemParams, pot: Potential) -> float:
    """max |xdd - c^2 (-V'(x)/m)| over interior samples, xdd by central differences.

    c is the chain factor at the conserved base energy, so the bound covers the
    rescaled-time equation of motion of every family member (c = 1 standard).
    """
    if len(traj) < 5:
        raise ValueError(f"need at least 5 samples, got {len(traj)}")
    h = traj.uniform_step()
    if h is None:
        raise ValueError("newton_residual requires uniform steps")
    e0 = base_energy(params, pot, PhasePoint(float(traj.x[0]), float(traj.p[0])))
    c = chain_factor(traj.spec, params, pot, e0)
    xdd = (traj.x[2:] - 2.0 * traj.x[1:-1] + traj.x[:-2]) / (h * h)
    target = np.array([-c * c * pot.gradient(float(xi)) / params.m
                       for xi in traj.x[1:-1]])
    return float(np.max(np.abs(xdd - target)))


def dt_k_factor(k: int, energy: float, m: float, lam: float) -> float:
    """Per-term time-rescaling factor E^{k-1} / ((k-1)! (m lam^2)^{k-1}), k >= 1."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n = k - 1
    return energy ** n / (math.factorial(n) * (m * lam * lam) ** n)


def flow_derivatives(traj: Trajectory, pot: Potential) -> tuple[np.ndarray, np.ndarray]:
    """(dx/dt, dp/dt) at every sample, from the analytic vector field."""
    dx = np.empty(len(traj))
    dp = np.empty(len(traj))
    for i, (x, p) in enumerate(zip(traj.x, traj.p)):
        d = eval_derivs(traj.spec, traj.params, pot, PhasePoint(float(x), float(p)))
        dx[i] = d.hp
        dp[i] = -d.hx
    return dx, dp


def measure_period(traj: Trajectory, pot: Potential) -> float:
    """Orbit period from cubic-interpolated zero crossings of p(t).

    Consecutive crossings are half cycles, so the period is the mean gap
    between next-nearest crossings; needs at least three of them.
    """
    _, dp = flow_derivatives(traj, pot)
    spline = CubicHermiteSpline(traj.t, traj.p, dp)
    crossings = [float(traj.t[i]) for i in range(len(traj)) if traj.p[i] == 0.0]
    for i in range(len(traj) - 1):
        if traj.p[i] * traj.p[i + 1] < 0.0:
            crossings.append(float(brentq(spline, traj.t[i], traj.t[i + 1], xtol=1e-14)))
    crossings = sorted(set(crossings))
    if len(crossings) < 3:
        raise ValueError(f"need >= 3 zero crossings of p(t), found {len(crossings)}")
    gaps = [crossings[i + 2] - crossings[i] for i in range(len(crossings) - 2)]
    return float(np.mean(gaps))


def compare_flows(spec_a: HamiltonianSpec, spec_b: HamiltonianSpec,
                  params: SystemParams, pot: Potential, start: PhasePoint,
                  t_end: float, method: str = "rk45", tol: float = 1e-10,
                  step: float | None = None) -> RescaleReport:
    """Integrate both flows, rescale B's timestamps by c_B/c_A, compare to A.

    The deviation is measured at A's sample times against a cubic Hermite
    interpolant of the rescaled B trajectory (built from B's own vector
    field, so the interpolation error stays at fourth order without
    coupling the two step grids).
    """
    traj_a = integrate(spec_a, params, pot, start, t_end, method=method, step=step, tol=tol)
    traj_b = integrate(spec_b, params, pot, start, t_end, method=method, step=step, tol=tol)
    e0 = base_energy(params, pot, start)
    c_a = chain_factor(spec_a, params, pot, e0)
    c_b = chain_factor(spec_b, params, pot, e0)
    factor = c_b / c_a
    if not factor > 0:
        raise ValueError(f"flows are not comparable: rescale factor {factor:.6g} <= 0")

    t_b = traj_b.t * factor
    dxb, dpb = flow_derivatives(traj_b, pot)
    x_b = CubicHermiteSpline(t_b, traj_b.x, dxb / factor)
    p_b = CubicHermiteSpline(t_b, traj_b.p, dpb / factor)
    inside = traj_a.t <= t_b[-1]
    dev_x = np.max(np.abs(traj_a.x[inside] - x_b(traj_a.t[inside])))
    dev_p = np.max(np.abs(traj_a.p[inside] - p_b(traj_a.t[inside])))

    period_a = measure_period(traj_a, pot)
    period_b = measure_period(traj_b, pot)
    return RescaleReport(factor=factor,
                         predicted_period_ratio=c_a / c_b,
                         measured_period_ratio=period_b / period_a,
                         max_deviation=float(max(dev_x, dev_p)))


def trajectory_to_csv(traj: Trajectory) -> str:
    """CSV with header t,x,p,H at 17 significant digits (round-trips exactly)."""
    lines = ["t,x,p,H"]
    for t, x, p, h in zip(traj.t, traj.x, traj.p, traj.h):
        lines.append(f"{t:.17g},{x:.17g},{p:.17g},{h:.17g}")
    return "\n".join(lines) + "\n"


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(trajectory_to_csv(traj))


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Read a t,x,p,H file back into arrays."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "t,x,p,H":
            raise ValueError(f"unexpected trajectory CSV header {header!r}")
        rows = [tuple(float(cell) for cell in line.strip().split(","))
                for line in fh if line.strip()]
    cols = list(zip(*rows)) if rows else [(), (), (), ()]
    return tuple(np.asarray(col) for col in cols)
