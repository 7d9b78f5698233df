"""The live oracles still reproduce the frozen reference values."""

import numpy as np
import pytest

import frozen
import oracles


def test_quadrature_oracle_reproduces_frozen():
    assert oracles.K_quadrature(0.9) == pytest.approx(frozen.K_09, rel=1e-14)
    assert oracles.E_quadrature(0.9) == pytest.approx(frozen.E_09, rel=1e-14)


def test_ode_oracle_reproduces_frozen():
    np.testing.assert_allclose(oracles.jacobi_ode(1.3, 0.9), frozen.JACOBI_13_09, atol=1e-13)


def test_charpoly_oracle_reproduces_frozen():
    got = np.sort_complex(oracles.eigenvalues_oracle(oracles.random_matrix()))
    np.testing.assert_allclose(got, np.sort_complex(np.array(frozen.EIG_RANDOM6)), atol=1e-13)


def test_oracles_against_each_other_at_k0():
    # quadrature and ODE in the trigonometric limit
    assert oracles.K_quadrature(0.0) == pytest.approx(np.pi / 2, rel=1e-15)
    s, c, d = oracles.jacobi_ode(1.0, 0.0)
    assert s == pytest.approx(np.sin(1.0), abs=1e-13)
    assert c == pytest.approx(np.cos(1.0), abs=1e-13)
    assert d == pytest.approx(1.0, abs=1e-13)
