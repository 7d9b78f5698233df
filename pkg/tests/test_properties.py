"""Property suites: constraint preservation, spectral symmetry, projections, gradient.

Runnable on their own with ``pytest tests/test_properties.py``.
"""

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from periodic_nls import functionals as fn
from periodic_nls.flow import FlowConfig, flow_iteration
from periodic_nls.grid import Field, Grid, project_symmetry
from periodic_nls.spectral import LinearizationSpec, build_JL, eigenvalues, quadrantal_defect

seeds = st.integers(0, 2**32 - 1)
sizes = st.sampled_from([16, 32, 64, 128])
periods = st.floats(0.5, 20.0)


def smooth_field(seed, L, T, real=False, modes=6):
    rng = np.random.default_rng(seed)
    g = Grid(L, T)
    x = g.x
    v = np.full(L, 0.5 + rng.uniform(0, 1), dtype=complex)
    for j in range(1, modes + 1):
        amp = rng.standard_normal(2) / j**2
        ph = rng.uniform(0, 2 * math.pi, 2)
        v += amp[0] * np.cos(2 * math.pi * j * x / T + ph[0])
        if not real:
            v += 1j * amp[1] * np.sin(2 * math.pi * j * x / T + ph[1])
    return Field(v, g)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, L=sizes, T=periods, b=st.floats(-3, 3).filter(lambda b: abs(b) > 1e-3),
       m=st.floats(0.1, 5.0), anti=st.booleans(), mom=st.booleans())
def test_mass_preserved_every_iteration(seed, L, T, b, m, anti, mom):
    # keep 1/dt - b|u|^2 away from zero: at resonance the linear system is singular
    assume(b * 2 * m / T <= 0.25)
    u = smooth_field(seed, L, T)
    if anti:
        u = u.with_values(u.values + np.exp(2j * math.pi * u.grid.x / T))
    cfg = FlowConfig(m=m, b=b, dt=1.0, enforce_antiperiodic=anti, enforce_momentum=mom)
    for _ in range(4):
        u = flow_iteration(u, cfg)
        assert abs(fn.mass(u) - m) <= 1e-12 * m


@settings(max_examples=40, deadline=None)
@given(seed=seeds, L=sizes, T=periods, b=st.floats(-3, 3).filter(lambda b: abs(b) > 1e-3), m=st.floats(0.1, 5.0))
def test_real_data_zero_momentum(seed, L, T, b, m):
    assume(b * 2 * m / T <= 0.25)
    u = smooth_field(seed, L, T, real=True)
    assert abs(fn.momentum(u)) <= 1e-12
    cfg = FlowConfig(m=m, b=b, enforce_momentum=True)
    for _ in range(4):
        u = flow_iteration(u, cfg)
        assert abs(fn.momentum(u)) <= 1e-12


@settings(max_examples=15, deadline=None)
@given(seed=seeds, L=st.sampled_from([16, 32, 64]), T=periods, a=st.floats(-2, 2), b=st.floats(-3, 3),
       theta=st.floats(0, 1))
def test_quadrantal_symmetry(seed, L, T, a, b, theta):
    u = smooth_field(seed, L, T, real=True)
    u = u.with_values(u.values.real)
    w = eigenvalues(build_JL(LinearizationSpec(u, a, b, theta)), hermitian=False)
    # lambda -> -lambda holds for every theta; conjugation needs a real JL
    if theta == 0:
        assert quadrantal_defect(w) <= 1e-8 * max(1.0, np.max(np.abs(w)))
    neg = np.min(np.abs(w[:, None] + w[None, :]), axis=1)
    assert np.max(neg) <= 1e-8 * max(1.0, np.max(np.abs(w)))


@settings(max_examples=50, deadline=None)
@given(seed=seeds, L=st.sampled_from([8, 16, 64, 256]), T=periods,
       sub=st.sampled_from(["P_half", "A_half", "even", "odd", "P_half+", "P_half-", "A_half+", "A_half-"]))
def test_projection_idempotent(seed, L, T, sub):
    rng = np.random.default_rng(seed)
    f = Field(rng.standard_normal(L) + 1j * rng.standard_normal(L), Grid(L, T))
    p = project_symmetry(f, sub)
    np.testing.assert_allclose(project_symmetry(p, sub).values, p.values, atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, L=st.sampled_from([8, 16, 64, 256]), T=periods)
def test_projection_complete(seed, L, T):
    rng = np.random.default_rng(seed)
    f = Field(rng.standard_normal(L) + 1j * rng.standard_normal(L), Grid(L, T))
    parts = [project_symmetry(f, s).values for s in ("P_half+", "P_half-", "A_half+", "A_half-")]
    np.testing.assert_allclose(sum(parts), f.values, atol=1e-13)
    # the pieces are mutually orthogonal
    for i in range(4):
        for j in range(i + 1, 4):
            assert abs(np.vdot(parts[i], parts[j])) <= 1e-12 * np.vdot(f.values, f.values).real


@settings(max_examples=40, deadline=None)
@given(seed=seeds, L=sizes, T=periods, b=st.floats(-3, 3), method=st.sampled_from(["fourier", "fd"]))
def test_gradient_matches_finite_difference(seed, L, T, b, method):
    u = smooth_field(seed, L, T)
    rng = np.random.default_rng(seed + 1)
    v = rng.standard_normal(L) + 1j * rng.standard_normal(L)
    eps = 1e-5
    Ep = fn.energy(u.with_values(u.values + eps * v), b, method)
    Em = fn.energy(u.with_values(u.values - eps * v), b, method)
    fd = (Ep - Em) / (2 * eps)
    an = u.grid.dx * float(np.real(np.vdot(fn.energy_gradient(u, b, method).values, v)))
    # guard the relative test against a vanishing directional derivative
    scale = max(abs(an), 1e-3 * u.grid.dx * np.linalg.norm(fn.energy_gradient(u, b, method).values) * np.linalg.norm(v))
    assert abs(fd - an) <= 1e-6 * scale
