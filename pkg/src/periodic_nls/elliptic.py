"""Complete elliptic integrals and Jacobi elliptic functions.

Everything here is built on the arithmetic-geometric mean (AGM) of
``1`` and ``k' = sqrt(1 - k^2)``.  The same AGM sequence yields K(k), E(k),
the amplitude am(x, k) by descending Landen transformation, and the Jacobi
zeta function, from which the incomplete integral of the second kind
``E(am(x), k) = int_0^x dn^2`` follows.

Conventions: the modulus ``k`` is used throughout (not the parameter
``m = k^2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "EllipticDomainError",
    "EllipticModulus",
    "agm_sequence",
    "complete_K",
    "complete_E",
    "jacobi",
    "amplitude",
    "epsilon_E",
]

# iteration stops once c_n < AGM_TOL * a_n; quadratic convergence makes the cap unreachable
AGM_TOL = 1e-16
MAX_LANDEN_DEPTH = 32


class EllipticDomainError(ValueError):
    """Raised when the modulus lies outside the supported range."""


def _check_modulus(k, *, allow_one: bool) -> float:
    k = float(k)
    if not math.isfinite(k) or k < 0.0 or k > 1.0 or (k == 1.0 and not allow_one):
        upper = "1]" if allow_one else "1)"
        raise EllipticDomainError(f"modulus k={k!r} outside [0, {upper}")
    return k


@lru_cache(maxsize=256)
def agm_sequence(k: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """AGM sequences ``(a_n, c_n)`` started from ``a_0 = 1, b_0 = k', c_0 = k``.

    ``c_{n+1}`` is formed as ``c_n^2 / (4 a_{n+1})`` rather than
    ``(a_n - b_n) / 2`` so that it decays to zero without cancellation.
    """
    k = _check_modulus(k, allow_one=False)
    a, b, c = 1.0, math.sqrt((1.0 - k) * (1.0 + k)), k
    As, Cs = [a], [c]
    for _ in range(MAX_LANDEN_DEPTH):
        if c <= AGM_TOL * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), c * c / (2.0 * (a + b))
        As.append(a)
        Cs.append(c)
    else:
        raise RuntimeError(f"AGM failed to converge for k={k!r}")
    return tuple(As), tuple(Cs)


def complete_K(k: float) -> float:
    """Complete elliptic integral of the first kind, ``K(k) = F(pi/2, k)``."""
    k = _check_modulus(k, allow_one=False)
    As, _ = agm_sequence(k)
    return math.pi / (2.0 * As[-1])


def complete_E(k: float) -> float:
    """Complete elliptic integral of the second kind ``E(k)``; ``E(1) = 1``."""
    k = _check_modulus(k, allow_one=True)
    if k == 1.0:
        return 1.0
    As, Cs = agm_sequence(k)
    s = sum(2.0 ** (n - 1) * c * c for n, c in enumerate(Cs))
    return complete_K(k) * (1.0 - s)


@dataclass(frozen=True)
class EllipticModulus:
    """A modulus ``k`` together with its cached complete integrals."""

    k: float
    K: float = field(init=False)
    E: float = field(init=False)

    def __post_init__(self):
        k = _check_modulus(self.k, allow_one=True)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "K", math.inf if k == 1.0 else complete_K(k))
        object.__setattr__(self, "E", complete_E(k))

    @property
    def kprime(self) -> float:
        return math.sqrt((1.0 - self.k) * (1.0 + self.k))


def _descend(r: np.ndarray, k: float) -> tuple[np.ndarray, np.ndarray]:
    """Descending Landen recursion for reduced arguments ``|r| <= K``.

    Returns ``(am(r), Z(r))`` with the Jacobi zeta function
    ``Z(r) = sum_{n>=1} c_n sin(phi_n)``.
    """
    As, Cs = agm_sequence(k)
    N = len(As) - 1
    phi = (2.0**N) * As[N] * r
    zeta = np.zeros_like(r)
    for n in range(N, 0, -1):
        zeta += Cs[n] * np.sin(phi)
        phi = 0.5 * (phi + np.arcsin(Cs[n] / As[n] * np.sin(phi)))
    return phi, zeta


def _reduce_quarter(x: np.ndarray, K: float) -> tuple[np.ndarray, np.ndarray]:
    """Map ``x`` to ``r`` with ``|r| <= K`` using 4K-periodicity and
    ``sn(2K - x) = sn(x)``; returns ``(r, cn_sign)``."""
    r = np.remainder(x + 2.0 * K, 4.0 * K) - 2.0 * K
    sign = np.ones_like(r)
    hi = r > K
    lo = r < -K
    r = np.where(hi, 2.0 * K - r, r)
    r = np.where(lo, -2.0 * K - r, r)
    sign[hi | lo] = -1.0
    return r, sign


def jacobi(x, k: float):
    """Jacobi elliptic functions ``(sn, cn, dn)`` of real ``x`` and modulus ``k``.

    Accepts scalars or arrays for ``x``; ``k`` may be 0 or 1 (the
    trigonometric and hyperbolic limits).
    """
    k = _check_modulus(k, allow_one=True)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if k == 1.0:
        sn, cn = np.tanh(x), 1.0 / np.cosh(x)
        out = (sn, cn, cn.copy())
    elif k == 0.0:
        out = (np.sin(x), np.cos(x), np.ones_like(x))
    else:
        K = complete_K(k)
        r, sign = _reduce_quarter(x, K)
        phi0, _ = _descend(r, k)
        sn = np.sin(phi0)
        cn = np.cos(phi0)
        # dn^2 = k'^2 + k^2 cn^2: both terms non-negative, no cancellation near k -> 1
        dn = np.sqrt((1.0 - k) * (1.0 + k) + (k * cn) ** 2)
        out = (sn, sign * cn, dn)
    if scalar:
        return tuple(float(v) for v in out)
    return out


def amplitude(x, k: float):
    """Jacobi amplitude ``am(x, k)``, continuous and increasing in ``x``."""
    k = _check_modulus(k, allow_one=False)
    x = np.asarray(x, dtype=float)
    K = complete_K(k)
    n = np.floor((x + K) / (2.0 * K))
    r = x - 2.0 * K * n
    phi0, _ = _descend(r, k)
    out = phi0 + n * math.pi
    return float(out) if out.ndim == 0 else out


def epsilon_E(x, k: float):
    """``E(am(x, k), k) = int_0^x dn(z, k)^2 dz``.

    Uses ``E(am(r)) = Z(r) + (E/K) r`` on ``|r| <= K`` and the
    quasi-periodicity ``Ehat(x + 2K) = Ehat(x) + 2E``.
    """
    k = _check_modulus(k, allow_one=False)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if k == 0.0:
        out = x.copy()
    else:
        K, E = complete_K(k), complete_E(k)
        n = np.floor((x + K) / (2.0 * K))
        r = x - 2.0 * K * n
        _, zeta = _descend(r, k)
        out = zeta + (E / K) * r + 2.0 * E * n
    return float(out) if scalar else out
