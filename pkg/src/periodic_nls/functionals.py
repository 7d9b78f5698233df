"""Mass, momentum and energy of a grid field.

All integrals use the periodic rectangle rule.  Momentum and the default
kinetic energy are evaluated from the Fourier coefficients of :func:`grid.dft`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from .grid import Field, derivative_matrix, dft, mode_indices, signed_modes

__all__ = [
    "FunctionalReport",
    "mass",
    "momentum",
    "kinetic",
    "energy",
    "energy_gradient",
    "report",
]

Kinetic = Literal["fourier", "fd"]


def mass(field: Field) -> float:
    """``(1/2) int |u|^2``."""
    return 0.5 * field.grid.dx * float(np.sum(np.abs(field.values) ** 2))


def momentum(field: Field) -> float:
    """``-pi sum_j j |c_j|^2``; the Nyquist mode gets no weight."""
    c = dft(field)
    j = signed_modes(field.grid.L)
    return -math.pi * float(np.sum(j * np.abs(c) ** 2))


def kinetic(field: Field, method: Kinetic = "fourier", fd_order: int = 2) -> float:
    """``int |u_x|^2``, spectrally (``(4 pi^2/T) sum j^2 |c_j|^2``) or with the FD Laplacian."""
    g = field.grid
    if method == "fourier":
        c = dft(field)
        j = mode_indices(g.L)
        return 4.0 * math.pi**2 / g.T * float(np.sum(j**2 * np.abs(c) ** 2))
    if method == "fd":
        D2 = derivative_matrix(g, 2, fd_order)
        u = field.values
        return -g.dx * float(np.real(np.vdot(u, D2.apply(u))))
    raise ValueError(f"unknown kinetic method {method!r}")


def energy(field: Field, b: float, method: Kinetic = "fourier", fd_order: int = 2) -> float:
    """``(1/2) int |u_x|^2 - (b/4) int |u|^4``."""
    quartic = field.grid.dx * float(np.sum(np.abs(field.values) ** 4))
    return 0.5 * kinetic(field, method, fd_order) - 0.25 * b * quartic


def _laplacian(field: Field, method: Kinetic, fd_order: int) -> np.ndarray:
    g = field.grid
    if method == "fd":
        return derivative_matrix(g, 2, fd_order).apply(field.values)
    L = g.L
    xi = 2.0 * math.pi / g.T * np.fft.fftfreq(L, 1.0 / L)
    # fftfreq puts -L/2 at the Nyquist slot, matching mode_indices
    return np.fft.ifft(-(xi**2) * np.fft.fft(field.values))


def energy_gradient(field: Field, b: float, method: Kinetic = "fourier", fd_order: int = 2) -> Field:
    """``E'(u) = -u_xx - b |u|^2 u`` with the Laplacian matching ``method``.

    The directional derivative is ``Re <E'(u), v> dx``.
    """
    u = field.values
    return field.with_values(-_laplacian(field, method, fd_order) - b * np.abs(u) ** 2 * u)


@dataclass(frozen=True)
class FunctionalReport:
    mass: float
    momentum: float
    energy: float

    def action(self, a: float) -> float:
        return self.energy - a * self.mass

    def to_dict(self) -> dict:
        return asdict(self)


def report(field: Field, b: float, method: Kinetic = "fourier") -> FunctionalReport:
    return FunctionalReport(mass(field), momentum(field), energy(field, b, method))
