"""Normalized gradient flow for constrained energy minimization.

One iteration maps ``u_n`` to ``u_{n+1}`` by

1. (optional) keeping the half-anti-periodic part,
2. a backward-Euler step ``(1/dt - D2 - b|u_n|^2) u~ = u_n/dt`` with the
   periodic second-order Laplacian,
3. (optional) a first-order momentum correction in Fourier space,
4. rescaling to the prescribed mass.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numba
import numpy as np

from . import functionals as fn
from .grid import Field, Grid, dft, idft, project_antiperiodic, signed_modes

__all__ = [
    "SolverFailure",
    "MomentumUnreachable",
    "StopReason",
    "FlowConfig",
    "FlowResult",
    "solve_cyclic_tridiagonal",
    "semi_implicit_step",
    "momentum_renormalize",
    "mass_renormalize",
    "run_flow",
    "align",
    "modulus_distance",
    "initial_datum",
    "plateaus",
    "flow_iteration",
]

PIVOT_RTOL = 1e-14


class SolverFailure(RuntimeError):
    """Near-singular pivot in the cyclic tridiagonal solve."""

    def __init__(self, message, pivot=None, index=None, iteration=None):
        super().__init__(message)
        self.pivot = pivot
        self.index = index
        self.iteration = iteration


class MomentumUnreachable(ValueError):
    """Momentum target differs from ``P(u_n)`` but ``u_n`` has no kinetic energy."""


class StopReason(str, enum.Enum):
    SUCCESSIVE_TOL = "SuccessiveTol"
    REFERENCE_TOL = "ReferenceTol"
    MAX_ITERS = "MaxIters"
    SOLVER_FAILURE = "SolverFailure"


# --- cyclic tridiagonal solve -------------------------------------------------


@numba.njit(cache=True)
def _thomas(sub, diag, sup, rhs, tiny):
    """Thomas elimination for a non-cyclic tridiagonal system, several right-hand sides.

    ``rhs`` has shape (n, nrhs).  Returns (x, bad_index, bad_pivot); bad_index
    is -1 on success.
    """
    n = diag.shape[0]
    cp = np.empty(n, dtype=diag.dtype)
    x = rhs.copy()
    piv = diag[0]
    if abs(piv) < tiny:
        return x, 0, piv
    cp[0] = sup[0] / piv
    x[0] = x[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i] * cp[i - 1]
        if abs(piv) < tiny:
            return x, i, piv
        cp[i] = sup[i] / piv
        x[i] = (x[i] - sub[i] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - cp[i] * x[i + 1]
    return x, -1, piv


def solve_cyclic_tridiagonal(sub, diag, sup, rhs):
    """Solve the periodic tridiagonal system ``sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]``.

    Indices wrap around, so ``sub[0]`` multiplies ``x[-1]`` and ``sup[-1]``
    multiplies ``x[0]``.  The corner entries are handled by a Sherman-Morrison
    rank-one correction on top of a single Thomas factorization.

    Raises:
        SolverFailure: a pivot is smaller than ``1e-14`` times the matrix scale.
    """
    sub = np.asarray(sub, dtype=complex)
    diag = np.asarray(diag, dtype=complex)
    sup = np.asarray(sup, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    n = diag.shape[0]
    if n < 3:
        raise ValueError("cyclic solve needs at least 3 unknowns")
    scale = float(np.max(np.abs(diag)) + np.max(np.abs(sub)) + np.max(np.abs(sup)))
    beta, alpha = sub[0], sup[-1]  # top-right and bottom-left corners
    gamma = -diag[0] if diag[0] != 0 else -scale
    d = diag.copy()
    d[0] -= gamma
    d[-1] -= alpha * beta / gamma
    corr = np.zeros(n, dtype=complex)
    corr[0], corr[-1] = gamma, alpha
    both = np.stack([rhs, corr], axis=1)
    xz, bad, piv = _thomas(sub, d, sup, both, PIVOT_RTOL * scale)
    if bad >= 0:
        raise SolverFailure(
            f"pivot {piv!r} at row {bad} below {PIVOT_RTOL:g} * scale ({scale:.3e})",
            pivot=complex(piv),
            index=int(bad),
        )
    x, z = xz[:, 0], xz[:, 1]
    denom = 1.0 + z[0] + beta * z[-1] / gamma
    if abs(denom) < PIVOT_RTOL:
        raise SolverFailure(f"Sherman-Morrison denominator {denom!r} vanishes", pivot=complex(denom))
    return x - z * ((x[0] + beta * x[-1] / gamma) / denom)


# --- configuration and steps -----------------------------------------------------


@dataclass(frozen=True)
class FlowConfig:
    """Parameters of a gradient-flow run.

    ``stop_rule="auto"`` stops on the reference distance when a reference
    is supplied and on successive differences otherwise.
    ``momentum_from`` selects whether the momentum multiplier is computed
    from ``u_n`` (the printed scheme) or from the post-solve ``u~``.
    ``project_stage`` places the anti-periodic projection before or after the
    linear solve.  "after" lets the nonlinear coefficient mix the imaginary
    constant of a datum into odd modes before projecting; "before" removes
    it first, and real data then stays real for the whole run.
    """

    m: float
    b: float
    dt: float = 1.0
    p: float = 0.0
    max_iters: int = 1000
    tol: float = 1e-3
    enforce_momentum: bool = False
    enforce_antiperiodic: bool = False
    reference: Field | None = None
    stop_rule: Literal["auto", "successive", "reference", "both"] = "auto"
    momentum_from: Literal["u_n", "u_tilde"] = "u_n"
    project_stage: Literal["before", "after"] = "after"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.m > 0:
            raise ValueError("target mass must be positive")
        if self.b == 0:
            raise ValueError("b must be nonzero")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.stop_rule in ("reference", "both") and self.reference is None:
            raise ValueError(f"stop_rule={self.stop_rule!r} needs a reference field")


def semi_implicit_step(u_n: Field, cfg: FlowConfig) -> Field:
    """Backward-Euler step with the cubic coefficient frozen at ``u_n``."""
    g = u_n.grid
    u = u_n.values
    h2 = 1.0 / g.dx**2
    off = np.full(g.L, -h2)
    diag = 1.0 / cfg.dt + 2.0 * h2 - cfg.b * np.abs(u) ** 2
    return u_n.with_values(solve_cyclic_tridiagonal(off, diag, off, u / cfg.dt))


def momentum_renormalize(u_tilde: Field, u_n: Field, cfg: FlowConfig) -> Field:
    """Multiply the Fourier coefficients of ``u_tilde`` by ``1 - (2 pi/T) dt w j``.

    ``w = (p - P(v)) / (dt ||v_x||^2)`` with ``v = u_n`` (default) or
    ``v = u_tilde`` when ``cfg.momentum_from == "u_tilde"``.
    """
    v = u_n if cfg.momentum_from == "u_n" else u_tilde
    gap = cfg.p - fn.momentum(v)
    kin = fn.kinetic(v)
    if kin <= 0.0:
        if abs(gap) <= 1e-14 * max(1.0, abs(cfg.p)):
            return u_tilde
        raise MomentumUnreachable(
            f"field has zero kinetic energy; cannot move momentum to {cfg.p!r}"
        )
    w = gap / (cfg.dt * kin)
    if w == 0.0:
        return u_tilde
    g = u_tilde.grid
    j = signed_modes(g.L)
    c = dft(u_tilde) * (1.0 - 2.0 * math.pi / g.T * cfg.dt * w * j)
    return idft(c, g)


def mass_renormalize(u_hat: Field, m: float) -> Field:
    M = fn.mass(u_hat)
    if not M > 0:
        raise ValueError("cannot renormalize a zero field")
    return u_hat.with_values(u_hat.values * math.sqrt(m / M))


# --- alignment ---------------------------------------------------------------------


def align(field: Field, reference: Field) -> tuple[Field, int, float]:
    """Best grid shift ``s`` and phase ``phi`` minimizing ``||e^{i phi} roll(f, s) - ref||``.

    Returns ``(aligned, s, phi)`` where ``aligned = e^{i phi} np.roll(f, s)``
    and ``s`` lies in ``(-L/2, L/2]``.
    """
    if field.grid != reference.grid:
        raise ValueError("fields live on different grids")
    f, r = field.values, reference.values
    L = len(f)
    # h[t] = sum_l f[l+t] conj(r[l]) = <roll(f, -t), r>
    h = np.fft.ifft(np.fft.fft(f) * np.conj(np.fft.fft(r)))
    t = int(np.argmax(np.abs(h)))
    s = (-t) % L
    if s > L // 2:
        s -= L
    phi = -float(np.angle(h[t])) if abs(h[t]) > 0 else 0.0
    return field.with_values(np.exp(1j * phi) * np.roll(f, s)), s, phi


def modulus_distance(field: Field, reference: Field) -> float:
    """``max_l ||u_l| - |ref_l||`` after the best grid shift of the moduli."""
    a = field.with_values(np.abs(field.values))
    r = reference.with_values(np.abs(reference.values))
    aligned, _, _ = align(a, r)
    return float(np.max(np.abs(np.abs(aligned.values) - r.values.real)))


# --- driver ------------------------------------------------------------------------------


@dataclass
class FlowResult:
    final: Field
    iterations: int
    history: list = field(default_factory=list)
    deltas: list = field(default_factory=list)
    ref_distances: list = field(default_factory=list)
    converged: bool = False
    stop_reason: StopReason = StopReason.MAX_ITERS


def _stops(cfg: FlowConfig) -> tuple[bool, bool]:
    rule = cfg.stop_rule
    if rule == "auto":
        rule = "reference" if cfg.reference is not None else "successive"
    return rule in ("successive", "both"), rule in ("reference", "both")


def flow_iteration(u: Field, cfg: FlowConfig) -> Field:
    v = project_antiperiodic(u) if cfg.enforce_antiperiodic and cfg.project_stage == "before" else u
    w = semi_implicit_step(v, cfg)
    if cfg.enforce_antiperiodic and cfg.project_stage == "after":
        w = project_antiperiodic(w)
    if cfg.enforce_momentum:
        w = momentum_renormalize(w, v, cfg)
    return mass_renormalize(w, cfg.m)


def run_flow(u0: Field, cfg: FlowConfig) -> FlowResult:
    """Iterate the normalized flow from ``u0`` until a stopping rule fires.

    ``history[n]`` holds mass, momentum and energy of ``u_n``; ``deltas[n-1]``
    is ``max ||u_n| - |u_{n-1}||`` and ``ref_distances[n]`` the aligned modulus
    distance to ``cfg.reference`` (when given).
    """
    use_succ, use_ref = _stops(cfg)
    if cfg.reference is not None and cfg.reference.grid != u0.grid:
        raise ValueError("reference lives on a different grid")
    u = u0
    res = FlowResult(final=u0, iterations=0, history=[fn.report(u0, cfg.b)])
    if cfg.reference is not None:
        res.ref_distances.append(modulus_distance(u0, cfg.reference))
    for n in range(1, cfg.max_iters + 1):
        try:
            nxt = flow_iteration(u, cfg)
        except SolverFailure as exc:
            exc.iteration = n
            res.final, res.iterations = u, n - 1
            res.stop_reason = StopReason.SOLVER_FAILURE
            exc.partial = res
            raise
        delta = float(np.max(np.abs(np.abs(nxt.values) - np.abs(u.values))))
        u = nxt
        res.history.append(fn.report(u, cfg.b))
        res.deltas.append(delta)
        res.final, res.iterations = u, n
        if cfg.reference is not None:
            res.ref_distances.append(modulus_distance(u, cfg.reference))
        if use_ref and res.ref_distances[-1] < cfg.tol:
            res.converged, res.stop_reason = True, StopReason.REFERENCE_TOL
            break
        if use_succ and delta < cfg.tol:
            res.converged, res.stop_reason = True, StopReason.SUCCESSIVE_TOL
            break
    return res


def plateaus(result: FlowResult, rtol: float = 1e-9, min_length: int = 5) -> list[tuple[int, int]]:
    """Maximal iteration ranges ``(start, end)`` over which the energy is stationary.

    An iteration ``n`` is stationary when ``|E_n - E_{n-1}| <= rtol * |E_n|``.
    Ranges shorter than ``min_length`` are dropped.
    """
    E = np.array([h.energy for h in result.history])
    if len(E) < 2:
        return []
    flat = np.abs(np.diff(E)) <= rtol * np.maximum(np.abs(E[1:]), 1e-300)
    out, start = [], None
    for n, f in enumerate(flat, start=1):
        if f and start is None:
            start = n
        if not f and start is not None:
            if n - start >= min_length:
                out.append((start, n - 1))
            start = None
    if start is not None and len(flat) + 1 - start >= min_length:
        out.append((start, len(flat)))
    return out


def initial_datum(kind: str, grid: Grid) -> Field:
    """Starting data: ``a`` = 5, ``b`` = exp(2 pi i x/T), ``c`` = 1 + cos(2 pi x/T) + i."""
    x, T = grid.x, grid.T
    if kind == "a":
        v = np.full(grid.L, 5.0 + 0j)
    elif kind == "b":
        v = np.exp(2j * np.pi * x / T)
    elif kind == "c":
        v = 1.0 + np.cos(2.0 * np.pi * x / T) + 1j
    else:
        raise ValueError(f"unknown initial datum {kind!r}")
    return Field(v, grid)


def with_reference(cfg: FlowConfig, reference: Field | None) -> FlowConfig:
    return replace(cfg, reference=reference)
