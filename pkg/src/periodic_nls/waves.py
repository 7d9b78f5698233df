"""Elliptic-function standing waves of ``u_xx + a u + b |u|^2 u = 0``.

A real periodic wave is ``u(x) = (1/alpha) f(x/beta, k)`` with ``f`` one of
``dn, cn, sn``.  The scalings are tied by

=======  ==========================  ===============
family   scaling invariant           period
=======  ==========================  ===============
dn       ``b beta^2 = 2 alpha^2``      ``2K(k) beta``
cn       ``b beta^2 = 2 k^2 alpha^2``  ``4K(k) beta``
sn       ``b beta^2 = -2 k^2 alpha^2`` ``4K(k) beta``
=======  ==========================  ===============

and ``a beta^2`` equals the canonical coefficient of the family.  Constants
and plane waves ``sqrt(2m/T) exp(2 pi i q x/T)`` complete the picture.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .elliptic import EllipticDomainError, complete_E, complete_K, jacobi
from .grid import Field, Grid

__all__ = [
    "WaveFamily",
    "WaveParams",
    "BelowThresholdError",
    "ModulusRangeError",
    "PeriodMismatchError",
    "canonical_params",
    "constant_wave",
    "plane_wave",
    "mass_of",
    "modulus_from_mass",
    "critical_modulus_kc",
    "profile_samples",
    "profile_derivative",
]

K_BRACKET = (1e-9, 1.0 - 1e-9)


class WaveFamily(str, enum.Enum):
    DN = "dn"
    CN = "cn"
    SN = "sn"
    CONSTANT = "constant"
    PLANE_WAVE = "plane"


class BelowThresholdError(ValueError):
    """The requested dn mass is at or below ``pi^2/(bT)``; the minimizer is the constant."""


class ModulusRangeError(ValueError):
    """The requested mass needs a modulus outside the search bracket."""


class PeriodMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class WaveParams:
    """Parameters of a standing wave.

    ``m`` and ``q`` are only meaningful for the constant / plane-wave
    families (mass and integer wavenumber).
    """

    family: WaveFamily
    k: float
    alpha: float
    beta: float
    a: float
    b: float
    T: float
    m: float | None = None
    q: int = 0

    def __post_init__(self):
        fam = WaveFamily(self.family)
        object.__setattr__(self, "family", fam)
        if self.b == 0:
            raise ValueError("b must be nonzero")
        if fam in (WaveFamily.DN, WaveFamily.CN) and self.b < 0:
            raise ValueError(f"{fam.value} waves need b > 0")
        if fam is WaveFamily.SN and self.b > 0:
            raise ValueError("sn waves need b < 0")
        if not self.T > 0:
            raise ValueError("period must be positive")


def _canonical_ab(family: WaveFamily, k: float) -> tuple[float, float]:
    k2 = k * k
    if family is WaveFamily.SN:
        return 1.0 + k2, -2.0 * k2
    if family is WaveFamily.CN:
        return 1.0 - 2.0 * k2, 2.0 * k2
    if family is WaveFamily.DN:
        return -(2.0 - k2), 2.0
    raise ValueError(f"no canonical table for {family}")


def _quarter_periods(family: WaveFamily) -> int:
    # fundamental period in units of K
    return 2 if family is WaveFamily.DN else 4


def _check_elliptic_k(k: float) -> float:
    k = float(k)
    if not 0.0 < k < 1.0:
        raise EllipticDomainError(f"modulus k={k!r} outside (0, 1)")
    return k


def canonical_params(family, k: float) -> WaveParams:
    """``alpha = beta = 1`` and the table values of ``(a, b)`` at the fundamental period."""
    family = WaveFamily(family)
    k = _check_elliptic_k(k)
    a, b = _canonical_ab(family, k)
    T = _quarter_periods(family) * complete_K(k)
    return WaveParams(family, k, 1.0, 1.0, a, b, T)


def constant_wave(b: float, T: float, m: float) -> WaveParams:
    """Constant solution ``sqrt(2m/T)``, for which ``a = -2bm/T``."""
    return plane_wave(b, T, m, 0)


def plane_wave(b: float, T: float, m: float, q: int) -> WaveParams:
    """Plane wave ``sqrt(2m/T) exp(2 pi i q x / T)`` with ``a = (2 pi q/T)^2 - 2bm/T``."""
    if not m > 0:
        raise ValueError("mass must be positive")
    q = int(q)
    amp = math.sqrt(2.0 * m / T)
    a = (2.0 * math.pi * q / T) ** 2 - b * amp**2
    fam = WaveFamily.CONSTANT if q == 0 else WaveFamily.PLANE_WAVE
    return WaveParams(fam, 0.0, 1.0 / amp, 1.0, a, b, T, m=m, q=q)


def _mass_kernel(family: WaveFamily, k: float) -> float:
    """``K * (mass numerator)`` so that ``m = c * kernel / (|b| T)``."""
    K, E = complete_K(k), complete_E(k)
    if family is WaveFamily.DN:
        return 4.0 * E * K
    if family is WaveFamily.CN:
        return 16.0 * K * (E - (1.0 - k) * (1.0 + k) * K)
    return 16.0 * K * (K - E)


def mass_of(params: WaveParams) -> float:
    """Mass ``(1/2) int_0^T |u|^2`` of the wave described by ``params``.

    For the elliptic families this uses the closed forms in ``K`` and ``E``
    and therefore depends on ``(k, b, T)`` only.
    """
    fam = params.family
    if fam in (WaveFamily.CONSTANT, WaveFamily.PLANE_WAVE):
        return 0.5 * params.T / params.alpha**2
    return _mass_kernel(fam, params.k) / (abs(params.b) * params.T)


def _params_from_k(family: WaveFamily, k: float, b: float, T: float) -> WaveParams:
    K = complete_K(k)
    beta = T / (_quarter_periods(family) * K)
    if family is WaveFamily.DN:
        alpha = math.sqrt(b * beta**2 / 2.0)
    else:
        alpha = math.sqrt(abs(b) * beta**2 / (2.0 * k * k))
    a0, _ = _canonical_ab(family, k)
    return WaveParams(family, k, alpha, beta, a0 / beta**2, b, T)


def _bisect(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Root of an increasing function on ``[lo, hi]``; runs until the bracket stops shrinking."""
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def modulus_from_mass(family, b: float, T: float, m: float) -> WaveParams:
    """Invert the (strictly increasing) mass map ``k -> m`` at fixed ``b, T``.

    Raises
    ------
    BelowThresholdError
        dn with ``m <= pi^2/(bT)``.
    ModulusRangeError
        the root lies outside ``[1e-9, 1 - 1e-9]``.
    """
    family = WaveFamily(family)
    if family not in (WaveFamily.DN, WaveFamily.CN, WaveFamily.SN):
        raise ValueError(f"{family} has no modulus")
    if not (m > 0 and T > 0):
        raise ValueError("mass and period must be positive")
    if family in (WaveFamily.DN, WaveFamily.CN) and not b > 0:
        raise ValueError(f"{family.value} needs b > 0")
    if family is WaveFamily.SN and not b < 0:
        raise ValueError("sn needs b < 0")
    if family is WaveFamily.DN and m <= math.pi**2 / (b * T):
        raise BelowThresholdError(
            f"m={m!r} <= pi^2/(bT)={math.pi**2 / (b * T)!r}: no dn wave, the constant is the minimizer"
        )

    target = m * abs(b) * T

    def f(k):
        return _mass_kernel(family, k) - target

    lo, hi = K_BRACKET
    if f(lo) > 0 or f(hi) < 0:
        raise ModulusRangeError(f"mass {m!r} requires k outside [{lo}, {hi}]")
    k = _bisect(f, lo, hi)
    return _params_from_k(family, k, b, T)


def critical_modulus_kc() -> float:
    """Root of ``K(k) = 2 E(k)`` (about 0.908)."""
    return _bisect(lambda k: complete_K(k) - 2.0 * complete_E(k), *K_BRACKET)


def _check_period(params: WaveParams, grid: Grid):
    if abs(grid.T - params.T) > 1e-12 * params.T:
        raise PeriodMismatchError(f"grid period {grid.T!r} != wave period {params.T!r}")


def _elliptic_values(params: WaveParams, s: np.ndarray, deriv: int, sn_offset: bool):
    fam, k = params.family, params.k
    if fam is WaveFamily.SN and sn_offset:
        s = s + complete_K(k)
    sn, cn, dn = jacobi(s, k)
    k2 = k * k
    if fam is WaveFamily.SN:
        return (sn, cn * dn, -sn * dn**2 - k2 * sn * cn**2)[deriv]
    if fam is WaveFamily.CN:
        return (cn, -sn * dn, -cn * dn**2 + k2 * sn**2 * cn)[deriv]
    return (dn, -k2 * sn * cn, k2 * dn * (sn**2 - cn**2))[deriv]


def profile_derivative(
    params: WaveParams,
    grid: Grid,
    order: int = 1,
    shift: float = 0.0,
    phase: float = 0.0,
    sn_offset: bool = False,
) -> Field:
    """Analytic ``order``-th derivative (0, 1 or 2) of the sampled profile."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    _check_period(params, grid)
    x = grid.x - shift
    rot = np.exp(1j * phase)
    fam = params.family
    if fam in (WaveFamily.CONSTANT, WaveFamily.PLANE_WAVE):
        kq = 2.0 * math.pi * params.q / params.T
        vals = (1j * kq) ** order * np.exp(1j * kq * x) / params.alpha
        return Field(rot * vals, grid)
    vals = _elliptic_values(params, x / params.beta, order, sn_offset)
    return Field(rot * vals / (params.alpha * params.beta**order), grid)


def profile_samples(
    params: WaveParams,
    grid: Grid,
    shift: float = 0.0,
    phase: float = 0.0,
    sn_offset: bool = False,
) -> Field:
    """Samples of ``e^{i phase} (1/alpha) f((x - shift)/beta, k)``.

    ``sn_offset=True`` uses ``sn(K + x/beta)`` (even about 0) instead of the
    odd ``sn(x/beta)``.
    """
    return profile_derivative(params, grid, 0, shift, phase, sn_offset)
