"""Uniform periodic grids, finite-difference operators and symmetry projections.

Nodes are ``x_l = -T/2 + l*dx`` for ``l = 0..L-1`` with ``dx = T/L``.
Bloch-shifted operators act on periodic samples ``f`` as the conjugated
operator ``e^{-i theta x} D (e^{i theta x} f)``; see :func:`derivative_matrix`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "DerivativeMatrix",
    "derivative_matrix",
    "mode_indices",
    "signed_modes",
    "dft",
    "idft",
    "half_shift",
    "reflect",
    "project_antiperiodic",
    "project_symmetry",
    "SUBSPACES",
]

DEFAULT_L = 2**10
BLOCH_L = 2**8

# centered periodic stencils, keyed by (degree, order): offsets -> weights (before 1/dx**degree)
_STENCILS = {
    (2, 2): ((-1, 0, 1), (1.0, -2.0, 1.0)),
    (2, 4): ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
    (1, 2): ((-1, 1), (-0.5, 0.5)),
    (1, 4): ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
}


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid of ``L`` nodes (``L`` even) on a period ``T``."""

    L: int
    T: float

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2 or self.L % 2:
            raise ValueError(f"L must be an even integer >= 2, got {self.L!r}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"period must be positive, got {self.T!r}")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "T", float(self.T))

    @property
    def dx(self) -> float:
        return self.T / self.L

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.T + np.arange(self.L) * self.dx

    def field(self, values) -> "Field":
        return Field(np.asarray(values, dtype=complex), self)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function at the nodes of ``grid``."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.L,):
            raise ValueError(f"field has shape {v.shape}, grid expects ({self.grid.L},)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    def with_values(self, values) -> "Field":
        return Field(values, self.grid)

    def __len__(self):
        return self.grid.L


@dataclass(frozen=True, eq=False)
class DerivativeMatrix:
    """A circulant finite-difference operator, optionally Bloch-shifted.

    ``offsets``/``weights`` hold one stencil row (phases included); the
    operator is ``(D f)_l = sum_s weights[s] f_{(l + offsets[s]) mod L}``.
    """

    grid: Grid
    degree: int
    order: int
    theta: float
    offsets: tuple[int, ...]
    weights: np.ndarray

    def apply(self, values) -> np.ndarray:
        v = np.asarray(values)
        out = np.zeros(v.shape, dtype=np.result_type(v.dtype, self.weights.dtype))
        for s, w in zip(self.offsets, self.weights):
            out += w * np.roll(v, -s)
        return out

    def __matmul__(self, other):
        if isinstance(other, Field):
            return other.with_values(self.apply(other.values))
        return self.apply(other)

    def dense(self) -> np.ndarray:
        L = self.grid.L
        M = np.zeros((L, L), dtype=self.weights.dtype)
        rows = np.arange(L)
        for s, w in zip(self.offsets, self.weights):
            M[rows, (rows + s) % L] += w
        return M


def derivative_matrix(
    grid: Grid,
    degree: int = 2,
    order: int = 4,
    theta: float = 0.0,
    bloch: Literal["twisted", "expanded"] = "twisted",
) -> DerivativeMatrix:
    """Centered periodic finite-difference matrix for ``(d/dx + i theta)**degree``.

    With ``bloch="twisted"`` (default) the stencil weight at offset ``s`` is
    multiplied by ``exp(i theta s dx)``, which makes the matrix exactly
    ``M^{-theta} D M^{theta}`` for the plain periodic stencil ``D`` and keeps
    it Hermitian (degree 2) or skew-Hermitian (degree 1).  ``bloch="expanded"``
    assembles ``D_2 + 2 i theta D_1 - theta^2`` (degree 2) or ``D_1 + i theta``
    (degree 1) from the plain stencils instead.
    """
    if (degree, order) not in _STENCILS:
        raise ValueError(f"unsupported (degree, order) = {(degree, order)}")
    if bloch not in ("twisted", "expanded"):
        raise ValueError(f"unknown bloch discretization {bloch!r}")
    offsets, weights = _STENCILS[(degree, order)]
    width = max(offsets) - min(offsets) + 1
    if grid.L < width:
        raise ValueError(f"grid with L={grid.L} is smaller than the stencil width {width}")
    h = grid.dx
    w = np.asarray(weights, dtype=float) / h**degree
    if theta == 0.0:
        return DerivativeMatrix(grid, degree, order, 0.0, tuple(offsets), w)
    if bloch == "twisted":
        w = w * np.exp(1j * theta * h * np.asarray(offsets))
        return DerivativeMatrix(grid, degree, order, float(theta), tuple(offsets), w)
    # expanded form: merge lower-degree stencils into one row
    merged: dict[int, complex] = {s: complex(c) for s, c in zip(offsets, w)}
    if degree == 2:
        o1, w1 = _STENCILS[(1, order)]
        for s, c in zip(o1, w1):
            merged[s] = merged.get(s, 0) + 2j * theta * c / h
        merged[0] = merged.get(0, 0) - theta**2
    else:
        merged[0] = merged.get(0, 0) + 1j * theta
    offs = tuple(sorted(merged))
    return DerivativeMatrix(
        grid, degree, order, float(theta), offs, np.array([merged[s] for s in offs])
    )


def mode_indices(L: int) -> np.ndarray:
    """Fourier mode numbers ``j = -L/2, ..., L/2 - 1`` in the order used by :func:`dft`."""
    return np.arange(-(L // 2), L // 2)


def signed_modes(L: int) -> np.ndarray:
    """:func:`mode_indices` with the unpaired Nyquist mode ``-L/2`` set to 0.

    Used wherever a mode enters with its sign (momentum, transport), so that
    real samples carry exactly zero momentum.
    """
    j = mode_indices(L)
    j[0] = 0
    return j


def dft(field: Field) -> np.ndarray:
    """Fourier coefficients ``c_j = (1/L) sum_l u_l exp(-2 pi i j x_l / T)``.

    The phase is referred to the physical nodes ``x_l`` (not to ``l``), so a
    sampled ``exp(2 pi i x / T)`` has ``c_1 = 1`` exactly.  Coefficients are
    ordered by :func:`mode_indices`.
    """
    L = field.grid.L
    j = mode_indices(L)
    c = np.fft.fft(field.values)[j % L] / L
    return c * np.where(j % 2, -1.0, 1.0)


def idft(coeffs: np.ndarray, grid: Grid) -> Field:
    """Inverse of :func:`dft`."""
    L = grid.L
    j = mode_indices(L)
    c = np.asarray(coeffs, dtype=complex) * np.where(j % 2, -1.0, 1.0)
    full = np.empty(L, dtype=complex)
    full[j % L] = c
    return Field(np.fft.ifft(full) * L, grid)


def half_shift(values: np.ndarray) -> np.ndarray:
    """Samples of ``f(x + T/2)``."""
    v = np.asarray(values)
    return np.roll(v, -(len(v) // 2))


def reflect(values: np.ndarray) -> np.ndarray:
    """Samples of ``f(-x)``; node ``l`` maps to node ``(L - l) mod L``."""
    v = np.asarray(values)
    return np.roll(v[::-1], 1)


def project_antiperiodic(field: Field) -> Field:
    """Half-anti-periodic part ``(f - f(. + T/2)) / 2``.

    Equivalent to zeroing every even-index Fourier coefficient.
    """
    v = field.values
    return field.with_values(0.5 * (v - half_shift(v)))


SUBSPACES = ("P_half", "A_half", "even", "odd")


def project_symmetry(field: Field, subspace: str) -> Field:
    """Project onto ``P_half``, ``A_half``, ``even`` or ``odd``.

    Compound names such as ``"A_half+"`` or ``"P_half-"`` compose the
    translation projection with the even (+) / odd (-) projection.
    """
    v = field.values
    if subspace.endswith(("+", "-")) and subspace[:-1] in ("P_half", "A_half"):
        inner = project_symmetry(field, subspace[:-1])
        return project_symmetry(inner, "even" if subspace[-1] == "+" else "odd")
    if subspace == "P_half":
        out = 0.5 * (v + half_shift(v))
    elif subspace == "A_half":
        out = 0.5 * (v - half_shift(v))
    elif subspace == "even":
        out = 0.5 * (v + reflect(v))
    elif subspace == "odd":
        out = 0.5 * (v - reflect(v))
    else:
        raise ValueError(f"unknown subspace {subspace!r}; expected one of {SUBSPACES}")
    return field.with_values(out)
