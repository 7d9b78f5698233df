"""Independent reference computations used only by the test suite.

None of these call into ``periodic_nls``.  Running this module prints the
values frozen in ``frozen.py``::

    python tests/oracles.py
"""

from __future__ import annotations

import math
import warnings

import mpmath as mp
import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp


def _quad(f):
    # the requested accuracy sits at roundoff level; quad warns but the value is settled
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(f, 0.0, math.pi / 2, epsabs=1e-16, epsrel=1e-14, limit=200)
    return val


def K_quadrature(k: float) -> float:
    """Adaptive Gauss-Kronrod quadrature of ``int_0^{pi/2} dt / sqrt(1 - k^2 sin^2 t)``."""
    return _quad(lambda t: 1.0 / math.sqrt(1.0 - (k * math.sin(t)) ** 2))


def E_quadrature(k: float) -> float:
    return _quad(lambda t: math.sqrt(1.0 - (k * math.sin(t)) ** 2))


def jacobi_ode(x: float, k: float) -> tuple[float, float, float]:
    """Integrate ``sn' = cn dn, cn' = -sn dn, dn' = -k^2 sn cn`` from 0 with DOP853."""
    def rhs(_, y):
        s, c, d = y
        return [c * d, -s * d, -k * k * s * c]

    sol = solve_ivp(rhs, [0.0, x], [0.0, 1.0, 1.0], method="DOP853", rtol=2.3e-14, atol=1e-16)
    return tuple(float(v) for v in sol.y[:, -1])


def charpoly_faddeev_leverrier(A, dps: int = 50) -> list:
    """Coefficients ``[1, c_{n-1}, ..., c_0]`` of ``det(lambda I - A)`` in extended precision."""
    mp.mp.dps = dps
    n = len(A)
    M = mp.matrix([[mp.mpc(complex(A[i][j])) for j in range(n)] for i in range(n)])
    I = mp.eye(n)
    coeffs = [mp.mpf(1)]
    Mk = mp.zeros(n, n)
    c = mp.mpf(1)
    for k in range(1, n + 1):
        Mk = M * Mk + c * I
        c = -sum(((M * Mk)[i, i] for i in range(n)), mp.mpf(0)) / k
        coeffs.append(c)
    return coeffs


def eigenvalues_oracle(A) -> np.ndarray:
    coeffs = charpoly_faddeev_leverrier(A)
    roots = mp.polyroots(coeffs, maxsteps=500, extraprec=200)
    return np.array([complex(r) for r in roots])


def random_matrix(n: int = 6, seed: int = 12345) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((n, n))


def tiled_bloch_laplacian(L: int, T: float, ncopies: int, j: int, order: int = 4) -> np.ndarray:
    """``M^{-theta} D2 M^{theta}`` for ``theta = 2 pi j/(n T)``, built from a plain periodic
    stencil on the ``n``-fold tiled grid and restricted to ``T``-periodic data.

    Returns the L x L matrix acting on samples of a T-periodic function.
    """
    N = L * ncopies
    h = T / L
    w = {2: {-1: 1.0, 0: -2.0, 1: 1.0},
         4: {-2: -1 / 12, -1: 16 / 12, 0: -30 / 12, 1: 16 / 12, 2: -1 / 12}}[order]
    big = np.zeros((N, N))
    for r in range(N):
        for s, c in w.items():
            big[r, (r + s) % N] += c / h**2
    x = -T / 2 + h * np.arange(N)
    theta = 2 * math.pi * j / (ncopies * T)
    ph = np.exp(1j * theta * x)
    conj = (ph.conj()[:, None] * big) * ph[None, :]
    # a T-periodic vector on the big grid is the tiling of its first L entries
    tile = np.vstack([np.eye(L)] * ncopies)
    return (conj @ tile)[:L]


if __name__ == "__main__":
    print("K(0.9) =", repr(K_quadrature(0.9)))
    print("E(0.9) =", repr(E_quadrature(0.9)))
    print("jacobi(1.3, 0.9) =", jacobi_ode(1.3, 0.9))
    ev = eigenvalues_oracle(random_matrix())
    print("eig(random 6x6) =", sorted(ev.tolist(), key=lambda z: (round(z.real, 12), z.imag)))
