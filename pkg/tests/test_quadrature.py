import math

import pytest
from scipy.integrate import quad

from hamzoo.quadrature import QuadratureFailure, adaptive_simpson


def test_polynomial():
    assert adaptive_simpson(lambda q: q * q, 0.0, 1.0) == pytest.approx(1 / 3, abs=1e-12)


def test_sine_over_half_period():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-11)


def test_reversed_interval_flips_sign():
    fwd = adaptive_simpson(math.exp, 0.0, 1.0)
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(-fwd, abs=1e-14)


def test_empty_interval():
    assert adaptive_simpson(math.exp, 0.7, 0.7) == 0.0


def test_matches_scipy_on_nested_kernel():
    f = lambda q: math.exp(-(q * q / 2 + 0.5) / 4.0)
    mine = adaptive_simpson(f, 0.0, 1.0, abs_tol=1e-12, rel_tol=1e-10)
    ref, _ = quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-14)
    assert mine == pytest.approx(ref, abs=1e-11)


def test_depth_exhaustion_reports_estimate():
    with pytest.raises(QuadratureFailure) as info:
        adaptive_simpson(lambda q: math.sin(80.0 * q), 0.0, 3.0,
                         abs_tol=1e-15, rel_tol=0.0, max_depth=2)
    assert info.value.achieved > 0.0
