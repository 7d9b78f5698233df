"""First-order instability branch of cnoidal waves near ``theta = pi/T``.

For ``u = cn(., k)`` on ``T = 2K`` (a period of ``u^2``) the Bloch operator
``JL^{pi/T - eps}`` has an eigenvalue ``eps * lambda1 + O(eps^2)`` with
``lambda1`` in the open first quadrant.  ``lambda1^2`` solves

    A1 A2 mu^2 + (A1 C2 + A2 C1 - B^2) mu + C1 C2 = 0,

whose coefficients are inner products of kernel and generalized-kernel
vectors.  :func:`coeffs` evaluates their closed forms, :func:`numeric_coeffs`
assembles them on a grid.
"""

from __future__ import annotations

import cmath
import csv
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .elliptic import complete_E, complete_K
from .grid import Field, derivative_matrix
from .spectral import LinearizationSpec, build_JL, build_L, eigenvalues, sample_on_period
from .waves import WaveFamily, canonical_params

__all__ = [
    "BranchError",
    "KernelDimensionError",
    "BranchCoeffs",
    "coeffs",
    "closed_form_discriminant",
    "numeric_coeffs",
    "tangency_check",
    "TangencyReport",
]

PINV_RTOL = 1e-8


class BranchError(ArithmeticError):
    pass


class KernelDimensionError(BranchError):
    """The Bloch operator at ``theta = pi/T`` does not have a one-dimensional numerical kernel."""


@dataclass(frozen=True)
class BranchCoeffs:
    k: float
    A1: float
    A2: float
    B: complex
    C1: float
    C2: float
    lambda1: complex
    b0: complex
    discriminant: float

    def quartic_roots(self) -> np.ndarray:
        """All four roots of ``A1 A2 l^4 + (A1 C2 + A2 C1 - B^2) l^2 + C1 C2``."""
        mid = self.A1 * self.C2 + self.A2 * self.C1 - (self.B * self.B).real
        return np.roots([self.A1 * self.A2, 0.0, mid, 0.0, self.C1 * self.C2])

    def residuals(self) -> tuple[complex, complex]:
        """Residuals of the two scalar equations for ``(lambda1, b0)``."""
        l, b0 = self.lambda1, self.b0
        r1 = self.A1 * l * l + b0 * self.B * l + self.C1
        r2 = b0 * self.A2 * l * l + self.B * l + b0 * self.C2
        return r1, r2

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "A1": self.A1,
            "A2": self.A2,
            "B_im": self.B.imag,
            "C1": self.C1,
            "C2": self.C2,
            "lambda1_re": self.lambda1.real,
            "lambda1_im": self.lambda1.imag,
            "b0_re": self.b0.real,
            "b0_im": self.b0.imag,
            "discriminant": self.discriminant,
        }


def _solve_branch(k, A1, A2, B, C1, C2, cls=None, **extra) -> BranchCoeffs:
    B2 = (B * B).real  # B is imaginary, so B^2 = -Im(B)^2
    mid = A1 * C2 + A2 * C1 - B2
    disc = mid * mid - 4.0 * A1 * A2 * C1 * C2
    if A1 * A2 == 0.0 or B == 0:
        raise BranchError(f"degenerate branch coefficients at k={k!r}")
    sq = cmath.sqrt(disc)
    lam = None
    for mu in ((-mid + sq) / (2 * A1 * A2), (-mid - sq) / (2 * A1 * A2)):
        for r in (cmath.sqrt(mu), -cmath.sqrt(mu)):
            if r.real > 0 and r.imag > 0:
                lam = r
    if lam is None:
        raise BranchError(f"no root strictly inside the first quadrant at k={k!r} (discriminant {disc!r})")
    b0 = -(A1 * lam * lam + C1) / (B * lam)
    return (cls or BranchCoeffs)(k, A1, A2, complex(B), C1, C2, lam, b0, disc, **extra)


def coeffs(k: float) -> BranchCoeffs:
    """Closed-form branch data for canonical ``cn(., k)``."""
    k = float(k)
    if not 0.0 < k < 1.0:
        raise BranchError(f"k={k!r} outside (0, 1)")
    K, E = complete_K(k), complete_E(k)
    k2 = k * k
    km = (k - 1.0) * (k + 1.0)
    d1 = E * (1.0 - 2.0 * k2) - K * (1.0 - k2)
    d2 = E - (1.0 - k2) * K
    if d1 == 0.0 or d2 == 0.0:
        raise BranchError(f"vanishing denominator at k={k!r}")
    num = k2 * K * (2.0 * E - K) + (E - K) ** 2
    A1 = num / (2.0 * k2 * d1)
    A2 = num / (2.0 * k2 * d2)
    B = -1j * 2.0 * E * K * km * (K - E) / (d1 * d2)
    C1 = 2.0 * K * K * km / d2
    C2 = 2.0 * K * K * km / d1
    return _solve_branch(k, A1, A2, B, C1, C2)


def closed_form_discriminant(k: float) -> float:
    """The factored expression of ``(A1 C2 + A2 C1 - B^2)^2 - 4 A1 A2 C1 C2``."""
    K, E = complete_K(k), complete_E(k)
    k2 = k * k
    num = -16.0 * K**4 * E**2 * (1.0 - k) ** 3 * (1.0 + k) ** 3 * (K - E) ** 2
    den = k2 * (E - (1.0 - k2) * K) ** 2 * (E * (1.0 - 2.0 * k2) - (1.0 - k2) * K) ** 2
    return num / den


def _deflated_solve(M: np.ndarray, rhs: np.ndarray, name: str) -> np.ndarray:
    """Minimum-norm solution of ``M x = rhs`` for Hermitian ``M`` with a one-dimensional near-kernel."""
    w, V = eigenvalues(M, hermitian=True, vectors=True)
    cut = PINV_RTOL * float(np.max(np.abs(w)))
    small = np.abs(w) < cut
    if int(small.sum()) != 1:
        raise KernelDimensionError(
            f"{name}: {int(small.sum())} eigenvalues below {cut:.3e} (expected exactly 1); "
            f"smallest |eigenvalues| {np.sort(np.abs(w))[:3]}"
        )
    inv = np.where(small, 0.0, 1.0 / np.where(small, 1.0, w))
    return V @ (inv * (V.conj().T @ rhs))


def numeric_coeffs(u: Field, a: float, b: float, fd_order: int = 4) -> BranchCoeffs:
    """Branch coefficients assembled from grid inner products at ``theta = pi/T``.

    ``u`` must be real samples of a solution whose square is ``T``-periodic,
    ``T`` being the grid period.  ``lambda1`` and ``b0`` are then obtained from
    the computed coefficients exactly as in :func:`coeffs`; ``k`` is set to nan.
    """
    g = u.grid
    theta = math.pi / g.T
    spec = LinearizationSpec(u, a, b, theta, fd_order)
    Lp, Lm = build_L(spec, "plus"), build_L(spec, "minus")
    D = derivative_matrix(g, 1, fd_order, theta)
    phi = np.exp(-1j * theta * g.x) * u.values.real
    psi = D.apply(phi)
    Dpsi = D.apply(psi)

    def ip(f, h):
        return g.dx * complex(np.vdot(h, f))  # <f, h> = dx sum f conj(h)

    phi1 = _deflated_solve(Lp, phi, "L+")
    psi1 = _deflated_solve(Lm, psi, "L-")
    chi = _deflated_solve(Lp, Dpsi, "L+")
    A1 = ip(phi1, phi)
    A2 = ip(psi1, psi)
    B = 2j * (ip(Dpsi, phi1) - A2)
    C1 = ip(phi, phi) - 4.0 * A2
    C2 = ip(psi, psi) - 4.0 * ip(chi, Dpsi)
    return _solve_branch(
        math.nan, A1.real, A2.real, 1j * B.imag, C1.real, C2.real,
        cls=NumericBranchCoeffs, raw_A1=A1, raw_A2=A2, raw_B=B, raw_C1=C1, raw_C2=C2,
    )


@dataclass(frozen=True)
class NumericBranchCoeffs(BranchCoeffs):
    """Grid coefficients; the ``raw_*`` fields keep the complex inner products before projection."""

    raw_A1: complex = 0j
    raw_A2: complex = 0j
    raw_B: complex = 0j
    raw_C1: complex = 0j
    raw_C2: complex = 0j


@dataclass
class TangencyReport:
    k: float
    L: int
    lambda1: complex
    epsilons: list
    eigenvalues: list
    ratios: list
    mismatches: list

    @property
    def deviations(self) -> list:
        return [abs(r - 1.0) for r in self.ratios]

    def orders(self) -> list:
        """Observed convergence orders ``log2(dev(eps) / dev(eps'))`` between consecutive epsilons."""
        out = []
        for (e1, d1), (e2, d2) in zip(
            zip(self.epsilons, self.deviations), zip(self.epsilons[1:], self.deviations[1:])
        ):
            out.append(math.log(d1 / d2) / math.log(e1 / e2))
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epsilon", "lambda_re", "lambda_im", "ratio_re", "ratio_im"])
            for e, lam, r in zip(self.epsilons, self.eigenvalues, self.ratios):
                w.writerow([f"{e:.15g}", f"{lam.real:.15g}", f"{lam.imag:.15g}", f"{r.real:.15g}", f"{r.imag:.15g}"])


def tangency_check(k: float, epsilons: Sequence[float], L: int = 256, fd_order: int = 4) -> TangencyReport:
    """Compare Bloch eigenvalues at ``theta = pi/(2K) - eps`` with ``eps * lambda1``."""
    bc = coeffs(k)
    p = canonical_params(WaveFamily.CN, k)
    u2 = sample_on_period(p, L, 2.0 * complete_K(k))
    theta0 = math.pi / u2.grid.T
    eigs, ratios, bad = [], [], []
    for eps in epsilons:
        if not eps > 0:
            raise ValueError("epsilons must be positive")
        JL = build_JL(LinearizationSpec(u2, p.a, p.b, theta0 - eps, fd_order))
        w = eigenvalues(JL, hermitian=False)
        target = eps * bc.lambda1
        lam = complex(w[int(np.argmin(np.abs(w - target)))])
        eigs.append(lam)
        ratios.append(lam / target)
        bad.append(abs(lam - target) > 0.5 * abs(target))
    return TangencyReport(k, L, bc.lambda1, list(epsilons), eigs, ratios, bad)


def write_branch_json(items: Sequence[BranchCoeffs], path) -> None:
    with open(path, "w") as fh:
        json.dump([c.to_dict() for c in items], fh, indent=2)
