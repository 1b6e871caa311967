import math
import random

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from hamzoo.dynamics import integrate
from hamzoo.expressions import parse_potential
from hamzoo.families import (HamiltonianSpec, OverflowRisk, PhasePoint,
                             SystemParams)
from hamzoo.lagrangians import (LagrangianSpec, VelocityPoint, dlagrangian_dv,
                                energy_kernel, euler_lagrange_residual,
                                lagrangian, legendre_residual, momentum,
                                sho_series_lagrangian)

SHO = parse_potential("0.5*x^2")
FREE = parse_potential("0")
M1 = SystemParams(1.0)


def lspec(j, lambdas, pot=SHO):
    return LagrangianSpec(j=j, lambdas=tuple(lambdas), params=M1, pot=pot)


# ----------------------------------------------------------------- kernels

def test_kernel_level_one_flat_potential():
    spec = LagrangianSpec(j=1, lambdas=(2.0,), params=M1, pot=FREE)
    assert energy_kernel(spec, 0.0, 0.0) == 1.0


def test_kernel_level_one_oscillator():
    assert energy_kernel(lspec(1, [2.0]), 1.0, 1.0) == pytest.approx(math.exp(-0.25), rel=1e-15)


def test_kernel_level_two_nested():
    # e^{(4/9) e^{-E/4}} at E = 1
    expected = math.exp((4.0 / 9.0) * math.exp(-0.25))
    assert energy_kernel(lspec(2, [2.0, 3.0]), 1.0, 1.0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(1.4135915740385665, rel=1e-15)


def test_kernel_requires_level_one():
    with pytest.raises(ValueError):
        energy_kernel(lspec(0, []), 1.0, 1.0)


def test_kernel_overflow_guard():
    spec = lspec(2, [2.0, 0.1])
    with pytest.raises(OverflowRisk) as info:
        energy_kernel(spec, 0.0, 0.0)
    assert info.value.level == 2


# ----------------------------------------------------------------- momentum

def test_momentum_level_zero():
    assert momentum(lspec(0, []), VelocityPoint(0.3, 1.7)) == pytest.approx(1.7, rel=1e-15)


def test_momentum_vanishes_at_rest():
    assert momentum(lspec(1, [2.0]), VelocityPoint(0.8, 0.0)) == 0.0


def test_momentum_against_quadrature_oracle():
    got = momentum(lspec(1, [2.0]), VelocityPoint(1.0, 1.0))
    oracle, _ = quad(lambda q: math.exp(-(q * q / 2 + 0.5) / 4.0), 0.0, 1.0,
                     epsabs=1e-14, epsrel=1e-14)
    assert got == pytest.approx(oracle, rel=1e-9)
    assert got == pytest.approx(0.847, abs=2e-3)  # quoted at 3 s.f.


def test_momentum_level_two_against_oracle():
    spec = lspec(2, [2.0, 3.0])

    def integrand(q):
        k1 = math.exp(-(q * q / 2 + 0.5) / 4.0)
        return k1 * math.exp((4.0 / 9.0) * k1)

    oracle, _ = quad(integrand, 0.0, 0.9, epsabs=1e-13, epsrel=1e-13)
    assert momentum(spec, VelocityPoint(1.0, 0.9)) == pytest.approx(oracle, rel=1e-9)


# ----------------------------------------------------------------- lagrangian

def test_lagrangian_level_zero_balances_at_unit_point():
    assert lagrangian(lspec(0, []), VelocityPoint(1.0, 1.0)) == pytest.approx(0.0, abs=1e-15)


def test_lagrangian_at_rest_is_scaled_kernel():
    got = lagrangian(lspec(1, [2.0]), VelocityPoint(1.0, 0.0))
    assert got == pytest.approx(4.0 * math.exp(-0.5 / 4.0), rel=1e-14)


def test_lagrangian_level_one_against_oracle():
    integral, _ = quad(lambda q: math.exp(-(q * q / 2 + 0.5) / 4.0), 0.0, 1.0,
                       epsabs=1e-14, epsrel=1e-14)
    expected = 4.0 * math.exp(-0.25) + integral
    got = lagrangian(lspec(1, [2.0]), VelocityPoint(1.0, 1.0))
    assert got == pytest.approx(expected, rel=1e-10)
    assert got == pytest.approx(3.962, abs=2e-3)  # quoted at 3 s.f.


# ----------------------------------------------------------------- legendre

def test_legendre_residual_level_zero_exact():
    rng = random.Random(5)
    spec = lspec(0, [])
    for _ in range(20):
        pt = VelocityPoint(rng.uniform(-2, 2), rng.uniform(-2, 2))
        assert abs(legendre_residual(spec, pt)) <= 1e-12


def test_legendre_residual_level_one_random_points():
    rng = random.Random(6)
    spec = lspec(1, [2.0])
    for _ in range(20):
        pt = VelocityPoint(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        res = legendre_residual(spec, pt)
        assert abs(res) <= 1e-8 * (1.0 + abs(lagrangian(spec, pt)))


def test_legendre_residual_level_two_spot():
    spec = lspec(2, [2.0, 3.0])
    pt = VelocityPoint(0.5, 0.8)
    assert abs(legendre_residual(spec, pt)) <= 1e-8 * (1.0 + abs(lagrangian(spec, pt)))


def test_velocity_derivative_matches_momentum():
    for j, lams in [(0, []), (1, [2.0]), (2, [2.0, 2.5])]:
        spec = lspec(j, lams)
        for pt in (VelocityPoint(0.4, 0.9), VelocityPoint(-0.8, -0.6)):
            fd = dlagrangian_dv(spec, pt)
            assert abs(fd - momentum(spec, pt)) <= 1e-6 * (1.0 + abs(momentum(spec, pt)))


def test_lagrangian_ladder_slope():
    pt = VelocityPoint(1.0, 1.0)
    base = lagrangian(lspec(0, []), pt)
    grid = [10.0, 20.0, 40.0, 80.0]
    errors = [abs(lagrangian(lspec(1, [lam]), pt) - lam * lam - base) for lam in grid]
    slope, _ = np.polyfit(np.log(grid), np.log(errors), 1)
    assert abs(slope + 2.0) < 0.05


# ----------------------------------------------------------------- euler-lagrange

def test_euler_lagrange_standard_flow_level_zero():
    traj = integrate(HamiltonianSpec(family="standard"), M1, SHO,
                     PhasePoint(1.0, 0.0), 0.5, method="rk4", step=1e-3)
    assert euler_lagrange_residual(lspec(0, []), traj) <= 1e-4


def test_euler_lagrange_standard_flow_level_one():
    traj = integrate(HamiltonianSpec(family="standard"), M1, SHO,
                     PhasePoint(1.0, 0.0), 0.5, method="rk4", step=1e-3)
    assert euler_lagrange_residual(lspec(1, [2.0]), traj) <= 1e-3


def test_euler_lagrange_free_particle_any_level():
    traj = integrate(HamiltonianSpec(family="standard"), M1, FREE,
                     PhasePoint(0.0, 0.7), 0.3, method="rk4", step=1e-3)
    assert euler_lagrange_residual(lspec(2, [2.0, 2.5], pot=FREE), traj) <= 1e-6


def test_euler_lagrange_detects_rescaled_time():
    # a flow in rescaled time does not satisfy the velocity-side equations
    cab = HamiltonianSpec(family="cabbatonian", j=1, lambdas=(2.0,), sign=-1)
    traj = integrate(cab, M1, SHO, PhasePoint(1.0, 0.0), 0.5, method="rk4", step=1e-3)
    assert euler_lagrange_residual(lspec(1, [2.0]), traj) > 1e-3


# ----------------------------------------------------------------- series lagrangians

def test_sho_series_first_three():
    pt = VelocityPoint(0.7, 0.9)
    t_kin = 0.9 ** 2 / 2.0
    v_pot = 0.7 ** 2 / 2.0
    assert sho_series_lagrangian(1, 1.0, 1.0, pt) == pytest.approx(t_kin - v_pot, rel=1e-12)
    assert sho_series_lagrangian(2, 1.0, 1.0, pt) == pytest.approx(
        t_kin ** 2 / 3.0 + 2.0 * t_kin * v_pot - v_pot ** 2, rel=1e-12)
    assert sho_series_lagrangian(3, 1.0, 1.0, pt) == pytest.approx(
        t_kin ** 3 / 5.0 + t_kin ** 2 * v_pot + 3.0 * t_kin * v_pot ** 2 - v_pot ** 3,
        rel=1e-12)
    with pytest.raises(ValueError):
        sho_series_lagrangian(0, 1.0, 1.0, pt)


def taylor_coeff_of_l1(x, v, n, m=1.0, spring=1.0):
    """Coefficient of u^n (u = 1/(m lam^2)) in L_1 minus its 1/u constant,
    by high-precision numerical differentiation of the exact integral form."""
    mp.mp.dps = 30

    def energy(q):
        return m * q * q / 2 + spring * x * x / 2

    def g(u):
        u = mp.mpf(u)
        integral = mp.quad(lambda q: mp.e ** (-u * energy(q)), [0, v])
        if u == 0:
            return -energy(v) + m * v * integral
        return mp.expm1(-u * energy(v)) / u + m * v * integral

    return float(mp.diff(g, 0, n, direction=0) / mp.factorial(n))


def test_series_lagrangians_match_taylor_expansion():
    # coefficient of u^{k-1} in the decaying-branch L_1 is (1/k!)(-1)^{k-1} L_k
    x, v = 0.7, 0.9
    pt = VelocityPoint(x, v)
    for k in (1, 2, 3):
        coeff = taylor_coeff_of_l1(x, v, k - 1)
        predicted = (-1.0) ** (k - 1) / math.factorial(k) * sho_series_lagrangian(k, 1.0, 1.0, pt)
        assert coeff == pytest.approx(predicted, abs=1e-6)
