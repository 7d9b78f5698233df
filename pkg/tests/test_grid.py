import math

import numpy as np
import pytest

from periodic_nls.grid import (
    Field,
    Grid,
    derivative_matrix,
    dft,
    half_shift,
    idft,
    mode_indices,
    project_antiperiodic,
    project_symmetry,
)
from periodic_nls.waves import canonical_params, profile_samples

import oracles


def rand_field(g, seed=0):
    rng = np.random.default_rng(seed)
    return Field(rng.standard_normal(g.L) + 1j * rng.standard_normal(g.L), g)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(7, 1.0)
    with pytest.raises(ValueError):
        Grid(8, -1.0)
    g = Grid(8, 2.0)
    assert g.x[0] == -1.0 and g.dx == 0.25


def test_field_is_read_only():
    f = Field(np.ones(8), Grid(8, 1.0))
    with pytest.raises(ValueError):
        f.values[0] = 2.0


@pytest.mark.parametrize("order", [2, 4])
def test_plane_wave_eigenvalue(order):
    T = 2.0
    errs = []
    for L in (64, 128):
        g = Grid(L, T)
        j = 3
        f = np.exp(2j * math.pi * j * g.x / T)
        D = derivative_matrix(g, 2, order)
        lam = (D.apply(f) / f).mean()
        errs.append(abs(lam + (2 * math.pi * j / T) ** 2))
    # O(dx^order): halving dx divides the error by about 2^order
    assert errs[0] / errs[1] == pytest.approx(2**order, rel=0.1)


def test_constant_in_kernel():
    g = Grid(32, 1.0)
    for order in (2, 4):
        assert np.max(np.abs(derivative_matrix(g, 2, order).apply(np.full(32, 3.0)))) < 1e-10


@pytest.mark.parametrize("order", [2, 4])
def test_twisted_matches_conjugation(order):
    g = Grid(64, 3.0)
    theta = 0.37
    ph = np.exp(1j * theta * g.x)
    plain = derivative_matrix(g, 2, order).dense()
    # the conjugated stencil on a genuinely periodic vector
    rng = np.random.default_rng(1)
    v = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    ref = ph.conj() * (plain @ (ph * v))
    # away from the seam e^{i theta x} is continuous; compare interior rows
    got = derivative_matrix(g, 2, order, theta).apply(v)
    interior = slice(order, 64 - order)
    np.testing.assert_allclose(got[interior], ref[interior], atol=1e-10)


def test_twisted_matches_tiled_grid():
    # theta = 2 pi j/(nT): the Bloch matrix equals the plain stencil on n copies
    L, T, n, j = 32, 2.5, 4, 1
    ref = oracles.tiled_bloch_laplacian(L, T, n, j, 4)
    got = derivative_matrix(Grid(L, T), 2, 4, 2 * math.pi * j / (n * T)).dense()
    np.testing.assert_allclose(got, ref, atol=1e-10 * np.max(np.abs(ref)))


def test_bloch_hermitian_and_expanded_consistent():
    g = Grid(128, 4.0)
    D = derivative_matrix(g, 2, 4, 0.5).dense()
    np.testing.assert_allclose(D, D.conj().T, atol=1e-12)
    De = derivative_matrix(g, 2, 4, 0.5, bloch="expanded").dense()
    f = np.exp(2j * math.pi * g.x / g.T)
    # both approximate (d/dx + i theta)^2 on smooth data
    exact = -((2 * math.pi / g.T + 0.5) ** 2) * f
    assert np.max(np.abs(D @ f - exact)) < 1e-3
    assert np.max(np.abs(De @ f - exact)) < 1e-3


def test_derivatives_commute_with_half_shift():
    g = Grid(64, 1.0)
    S = np.roll(np.eye(64), 32, axis=1)
    for deg in (1, 2):
        D = derivative_matrix(g, deg, 4, 0.3).dense()
        assert np.max(np.abs(D @ S - S @ D)) == 0.0


def test_dft_basics():
    g = Grid(64, 2.0)
    c = dft(Field(np.full(64, 2.5 + 0j), g))
    assert abs(c[mode_indices(64) == 0][0] - 2.5) < 1e-14
    assert np.max(np.abs(c[mode_indices(64) != 0])) < 1e-14
    c = dft(Field(np.exp(2j * math.pi * g.x / g.T), g))
    assert abs(c[mode_indices(64) == 1][0] - 1.0) < 1e-13
    assert np.max(np.abs(c[mode_indices(64) != 1])) < 1e-13
    f = rand_field(g)
    c = dft(f)
    assert np.sum(np.abs(f.values) ** 2) / 64 == pytest.approx(np.sum(np.abs(c) ** 2), rel=1e-12)
    np.testing.assert_allclose(idft(c, g).values, f.values, atol=1e-13)


def test_antiperiodic_projection():
    k = 0.9
    cn = canonical_params("cn", k)
    g = Grid(256, cn.T)
    u = profile_samples(cn, g)
    np.testing.assert_allclose(project_antiperiodic(u).values, u.values, atol=1e-12)
    dn = profile_samples(canonical_params("dn", k), Grid(256, canonical_params("dn", k).T))
    # dn on 4K
    from periodic_nls.spectral import wave_on_multiple

    _, _, d4 = wave_on_multiple("dn", k, 2, 256)
    assert np.max(np.abs(project_antiperiodic(d4).values)) < 1e-12
    f = rand_field(g)
    p = project_antiperiodic(f)
    np.testing.assert_allclose(project_antiperiodic(p).values, p.values, atol=1e-13)
    np.testing.assert_allclose(half_shift(p.values), -p.values, atol=1e-13)
    assert dn.grid.L == 256


def test_symmetry_projections():
    k = 0.9
    sn = canonical_params("sn", k)
    g = Grid(256, sn.T)
    assert np.max(np.abs(project_symmetry(profile_samples(sn, g), "even").values)) < 1e-13
    cn = canonical_params("cn", k)
    assert np.max(np.abs(project_symmetry(profile_samples(cn, g), "odd").values)) < 1e-13
    f = rand_field(g, 3)
    total = sum(project_symmetry(f, s).values for s in ("P_half+", "P_half-", "A_half+", "A_half-"))
    np.testing.assert_allclose(total, f.values, atol=1e-13)
    for s in ("P_half", "A_half", "even", "odd", "A_half-"):
        p = project_symmetry(f, s)
        np.testing.assert_allclose(project_symmetry(p, s).values, p.values, atol=1e-13)
    with pytest.raises(ValueError):
        project_symmetry(f, "bogus")
