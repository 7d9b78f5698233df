import math

import numpy as np
import pytest

from periodic_nls.elliptic import (
    EllipticDomainError,
    EllipticModulus,
    amplitude,
    complete_E,
    complete_K,
    epsilon_E,
    jacobi,
)

import frozen


def test_limits_exact():
    assert complete_K(0.0) == pytest.approx(math.pi / 2, abs=1e-14)
    assert complete_E(0.0) == pytest.approx(math.pi / 2, abs=1e-14)
    assert complete_E(1.0) == pytest.approx(1.0, abs=1e-14)


def test_against_quadrature():
    assert complete_K(0.9) == pytest.approx(frozen.K_09, abs=1e-12)
    assert complete_E(0.9) == pytest.approx(frozen.E_09, abs=1e-12)


def test_legendre_relation():
    # E K' + E' K - K K' = pi/2
    for k in (0.1, 0.5, 0.9, 0.999):
        kp = math.sqrt(1 - k * k)
        lhs = complete_E(k) * complete_K(kp) + complete_E(kp) * complete_K(k) - complete_K(k) * complete_K(kp)
        assert lhs == pytest.approx(math.pi / 2, rel=1e-13)


def test_K_diverges_at_one():
    with pytest.raises(EllipticDomainError):
        complete_K(1.0)
    assert math.isinf(EllipticModulus(1.0).K)


@pytest.mark.parametrize("k", [-0.1, 1.5, float("nan")])
def test_domain_errors(k):
    with pytest.raises(EllipticDomainError):
        jacobi(0.3, k)


def test_jacobi_against_ode():
    np.testing.assert_allclose(jacobi(1.3, 0.9), frozen.JACOBI_13_09, atol=1e-12)


def test_jacobi_limits():
    x = np.linspace(-5, 5, 41)
    s, c, d = jacobi(x, 0.0)
    np.testing.assert_allclose(s, np.sin(x), atol=1e-15)
    s, c, d = jacobi(x, 1.0)
    np.testing.assert_allclose(s, np.tanh(x), atol=1e-15)
    np.testing.assert_allclose(d, 1 / np.cosh(x), atol=1e-15)
    assert jacobi(0.0, 0.9) == (0.0, 1.0, 1.0)


def test_identities_random():
    rng = np.random.default_rng(0)
    x = rng.uniform(-50, 50, 1000)
    ks = rng.uniform(0, 1, 1000)
    for xi, k in zip(x, ks):
        s, c, d = jacobi(xi, k)
        assert abs(s * s + c * c - 1) < 1e-12
        assert abs(k * k * s * s + d * d - 1) < 1e-12


def test_periodicity_and_quarter_values():
    k = 0.7
    K = complete_K(k)
    x = np.linspace(0, 3, 17)
    for f0, f1 in zip(jacobi(x, k), jacobi(x + 4 * K, k)):
        np.testing.assert_allclose(f0, f1, atol=1e-13)
    s, c, d = jacobi(K, k)
    assert s == pytest.approx(1.0, abs=1e-14)
    assert c == pytest.approx(0.0, abs=1e-14)
    assert d == pytest.approx(math.sqrt(1 - k * k), abs=1e-14)


def test_amplitude_monotone_and_consistent():
    k = 0.95
    x = np.linspace(-10, 10, 401)
    phi = amplitude(x, k)
    assert np.all(np.diff(phi) > 0)
    s, c, _ = jacobi(x, k)
    np.testing.assert_allclose(np.sin(phi), s, atol=1e-13)
    np.testing.assert_allclose(np.cos(phi), c, atol=1e-13)


def test_epsilon_E_is_integral_of_dn_squared():
    from scipy.integrate import quad

    k = 0.9
    for x in (0.4, 2.0, 7.5, -3.1):
        ref, _ = quad(lambda z: jacobi(z, k)[2] ** 2, 0, x, epsabs=1e-14, epsrel=1e-13, limit=200)
        assert epsilon_E(x, k) == pytest.approx(ref, abs=1e-12)
    assert epsilon_E(2 * complete_K(k), k) == pytest.approx(2 * complete_E(k), abs=1e-13)
