"""Velocity-side hierarchy: nested kernels, momentum quadrature, Lagrangians.

The level-j Lagrangian is

    L_j(v, x) = m lam_j^2 [ K_j(v, x) + (v / lam_j^2) * integral_0^v prod_i K_i(q, x) dq ]

with kernels K_1 = exp(-E/(m lam_1^2)), K_i = exp((lam_{i-1}^2/lam_i^2) K_{i-1})
and E(q, x) = m q^2/2 + V(x).  The kernels here are built by their own nested
recursion, independent of the Hamiltonian-side chain in families.py, so the
Legendre-consistency check genuinely crosses two implementations.

Only the decaying kernel branch is implemented; the growing branch has no
bounded momentum integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expressions import Potential
from .families import (MAX_EXP_ARG, HamiltonianSpec, OverflowRisk, PhasePoint,
                       SystemParams, eval_derivs, eval_h)
from .quadrature import adaptive_simpson


@dataclass(frozen=True, slots=True)
class VelocityPoint:
    x: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.v)):
            raise ValueError(f"velocity point must be finite, got ({self.x!r}, {self.v!r})")


@dataclass(frozen=True)
class LagrangianSpec:
    """Level, parameters and quadrature tolerances of one hierarchy member."""

    j: int
    lambdas: tuple[float, ...]
    params: SystemParams
    pot: Potential
    quad_abs_tol: float = 1e-12
    quad_rel_tol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if self.j < 0 or len(self.lambdas) != self.j:
            raise ValueError(f"level {self.j} needs exactly {self.j} lambdas")
        for lam in self.lambdas:
            if not (math.isfinite(lam) and lam > 0):
                raise ValueError(f"lambdas must be positive, got {self.lambdas}")

    def hamiltonian_spec(self) -> HamiltonianSpec:
        """The Hamiltonian-side member this Lagrangian is dual to."""
        if self.j == 0:
            return HamiltonianSpec(family="standard")
        return HamiltonianSpec(family="cabbatonian", j=self.j, lambdas=self.lambdas, sign=-1)

    def energy(self, q: float, x: float) -> float:
        return self.params.m * q * q / 2.0 + self.pot.value(x)


def _kernels(lspec: LagrangianSpec, x: float, q: float) -> list[float]:
    """Kernel values K_1..K_j at (q, x)."""
    m = lspec.params.m
    lams = lspec.lambdas
    z = -lspec.energy(q, x) / (m * lams[0] * lams[0])
    if not abs(z) <= MAX_EXP_ARG:
        raise OverflowRisk(f"kernel argument {z:.6g} exceeds the guard at level 1",
                           level=1, argument=z)
    out = [math.exp(z)]
    for i in range(1, lspec.j):
        z = (lams[i - 1] / lams[i]) ** 2 * out[-1]
        if not abs(z) <= MAX_EXP_ARG:
            raise OverflowRisk(f"kernel argument {z:.6g} exceeds the guard at level {i + 1}",
                               level=i + 1, argument=z)
        out.append(math.exp(z))
    return out


def energy_kernel(lspec: LagrangianSpec, x: float, q: float) -> float:
    """Level-j nested kernel K_j(q, x); defined for j >= 1."""
    if lspec.j < 1:
        raise ValueError("the kernel is defined for levels j >= 1")
    return _kernels(lspec, x, q)[-1]


def momentum(lspec: LagrangianSpec, pt: VelocityPoint) -> float:
    """Canonical momentum p_j = m * integral_0^v prod_i K_i(q, x) dq."""
    if lspec.j == 0:
        return lspec.params.m * pt.v
    integrand = lambda q: math.prod(_kernels(lspec, pt.x, q))
    return lspec.params.m * adaptive_simpson(integrand, 0.0, pt.v,
                                             lspec.quad_abs_tol, lspec.quad_rel_tol)


def lagrangian(lspec: LagrangianSpec, pt: VelocityPoint) -> float:
    """L_j at one velocity point (L_0 = m v^2/2 - V)."""
    m = lspec.params.m
    if lspec.j == 0:
        return m * pt.v * pt.v / 2.0 - lspec.pot.value(pt.x)
    lam_j = lspec.lambdas[-1]
    kernel = energy_kernel(lspec, pt.x, pt.v)
    integrand = lambda q: math.prod(_kernels(lspec, pt.x, q))
    integral = adaptive_simpson(integrand, 0.0, pt.v,
                                lspec.quad_abs_tol, lspec.quad_rel_tol)
    return m * lam_j * lam_j * (kernel + pt.v / (lam_j * lam_j) * integral)


def legendre_residual(lspec: LagrangianSpec, pt: VelocityPoint) -> float:
    """L_j - (p_j v - H_j), the Legendre-transform consistency gap.

    The Hamiltonian side is evaluated at the phase point (x, m v): the
    transform closes at the base-energy level of the velocity point, which is
    the level the standard momentum realizes.  Zero up to round-off when both
    sides are consistent.
    """
    p_j = momentum(lspec, pt)
    l_j = lagrangian(lspec, pt)
    h_j = eval_h(lspec.hamiltonian_spec(), lspec.params, lspec.pot,
                 PhasePoint(pt.x, lspec.params.m * pt.v))
    return l_j - (p_j * pt.v - h_j)


def dlagrangian_dv(lspec: LagrangianSpec, pt: VelocityPoint, fd_step: float = 1e-5) -> float:
    """Central-difference velocity derivative of L_j (should equal momentum)."""
    up = lagrangian(lspec, VelocityPoint(pt.x, pt.v + fd_step))
    dn = lagrangian(lspec, VelocityPoint(pt.x, pt.v - fd_step))
    return (up - dn) / (2.0 * fd_step)


def euler_lagrange_residual(lspec: LagrangianSpec, traj, fd_step: float = 1e-5) -> float:
    """max Euler-Lagrange residual |dL/dx - d/dt(dL/dv)| along a trajectory.

    dL/dx and dL/dv come from central differences with the given step; the
    time derivative from central differences on the uniform sample grid.  The
    velocity at each sample is the trajectory's own dH/dp, so a flow whose
    time parameterization does not satisfy the straight equation of motion
    shows up as a genuine nonzero residual.
    """
    if len(traj) < 5:
        raise ValueError(f"need at least 5 samples, got {len(traj)}")
    dt = traj.uniform_step()
    if dt is None:
        raise ValueError("euler_lagrange_residual requires uniform steps")
    n = len(traj)
    vs = np.empty(n)
    for i in range(n):
        d = eval_derivs(traj.spec, traj.params, lspec.pot,
                        PhasePoint(float(traj.x[i]), float(traj.p[i])))
        vs[i] = d.hp

    def dldv(i: int) -> float:
        up = lagrangian(lspec, VelocityPoint(float(traj.x[i]), vs[i] + fd_step))
        dn = lagrangian(lspec, VelocityPoint(float(traj.x[i]), vs[i] - fd_step))
        return (up - dn) / (2.0 * fd_step)

    def dldx(i: int) -> float:
        up = lagrangian(lspec, VelocityPoint(float(traj.x[i]) + fd_step, vs[i]))
        dn = lagrangian(lspec, VelocityPoint(float(traj.x[i]) - fd_step, vs[i]))
        return (up - dn) / (2.0 * fd_step)

    momenta = np.array([dldv(i) for i in range(n)])
    worst = 0.0
    for i in range(1, n - 1):
        residual = dldx(i) - (momenta[i + 1] - momenta[i - 1]) / (2.0 * dt)
        worst = max(worst, abs(residual))
    return worst


def sho_series_lagrangian(k: int, m: float, spring_k: float, pt: VelocityPoint) -> float:
    """Closed-form k-th series Lagrangian of the harmonic oscillator.

    sum_{i=0}^{k} k! T^{k-i} V^i / ((k-i)! i! (2k - (2i+1))) with T = m v^2/2
    and V = spring_k x^2/2.  k=1 gives T - V.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    t_kin = m * pt.v * pt.v / 2.0
    v_pot = spring_k * pt.x * pt.x / 2.0
    total = 0.0
    for i in range(k + 1):
        total += (math.factorial(k) * t_kin ** (k - i) * v_pot ** i
                  / (math.factorial(k - i) * math.factorial(i) * (2 * k - (2 * i + 1))))
    return total
