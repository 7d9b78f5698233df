"""Linearized operators around real standing waves and their spectra.

For a real profile ``u`` solving ``u_xx + a u + b u^3 = 0``::

    L_+ = -D2(theta) - a - 3 b u^2
    L_- = -D2(theta) - a -   b u^2
    JL  = [[0, L_-], [-L_+, 0]]

``D2(theta)`` is the Bloch-shifted finite-difference Laplacian from
:mod:`periodic_nls.grid`.  Dense eigenvalue problems are delegated to LAPACK
through :mod:`scipy.linalg`.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.spatial import cKDTree

from .elliptic import complete_E, complete_K, epsilon_E, jacobi
from .grid import Field, Grid, derivative_matrix
from .waves import WaveFamily, WaveParams, canonical_params, profile_derivative, profile_samples

__all__ = [
    "EigenSolverError",
    "LinearizationSpec",
    "SpectrumReport",
    "build_L",
    "build_JL",
    "eigenvalues",
    "stability_tol",
    "analyze_spectrum",
    "quadrantal_defect",
    "lpm_table",
    "lpm_table_check",
    "cn_preimages",
    "cn_preimage_check",
    "wave_on_multiple",
    "stability_report",
    "bloch_sweep",
    "bloch_period",
    "sample_on_period",
    "spectra_to_csv",
]

CLUSTER_RTOL = 1e-4
SYMMETRY_LABELS = ("P_half+", "P_half-", "A_half+", "A_half-")


class EigenSolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class LinearizationSpec:
    """Data needed to assemble ``L_+``, ``L_-`` and ``JL`` on a grid."""

    profile: Field
    a: float
    b: float
    theta: float = 0.0
    fd_order: int = 4
    bloch: str = "twisted"

    def __post_init__(self):
        u = self.profile.values
        scale = max(1.0, float(np.max(np.abs(u))))
        if np.max(np.abs(u.imag)) > 1e-12 * scale:
            raise ValueError("linearization needs a real-valued profile")
        if self.fd_order not in (2, 4):
            raise ValueError("fd_order must be 2 or 4")

    @property
    def grid(self) -> Grid:
        return self.profile.grid

    @property
    def u(self) -> np.ndarray:
        return self.profile.values.real


def build_L(spec: LinearizationSpec, which: str) -> np.ndarray:
    """Dense ``L_+`` (``which="plus"``) or ``L_-`` (``which="minus"``)."""
    coef = {"plus": 3.0, "minus": 1.0}.get(which)
    if coef is None:
        raise ValueError(f"which must be 'plus' or 'minus', got {which!r}")
    D2 = derivative_matrix(spec.grid, 2, spec.fd_order, spec.theta, spec.bloch).dense()
    M = -D2.astype(complex)
    idx = np.arange(spec.grid.L)
    M[idx, idx] += -spec.a - coef * spec.b * spec.u**2
    return M


def build_JL(spec: LinearizationSpec) -> np.ndarray:
    Lp, Lm = build_L(spec, "plus"), build_L(spec, "minus")
    Z = np.zeros_like(Lp)
    return np.block([[Z, Lm], [-Lp, Z]])


def eigenvalues(matrix, hermitian: bool | None = None, vectors: bool = False):
    """All eigenvalues of a dense matrix (LAPACK ``geev`` / ``heevd``).

    ``hermitian=None`` routes to the Hermitian solver when the matrix is
    Hermitian to 1e-14 relative.  With ``vectors=True`` returns ``(w, V)``.
    """
    A = np.asarray(matrix)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("eigenvalues needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if hermitian is None:
        nrm = np.max(np.abs(A)) if A.size else 0.0
        hermitian = bool(np.max(np.abs(A - A.conj().T), initial=0.0) <= 1e-14 * nrm)
    try:
        if hermitian:
            out = sla.eigh(A, eigvals_only=not vectors, check_finite=False)
        else:
            out = sla.eig(A, right=vectors, check_finite=False)
    except sla.LinAlgError as exc:
        raise EigenSolverError(f"dense eigensolver failed on a {A.shape[0]}x{A.shape[0]} matrix: {exc}") from exc
    return out


def stability_tol(JL: np.ndarray, dx: float) -> float:
    """``max(1e-6, 10 dx^4) * ||JL||_inf``."""
    return max(1e-6, 10.0 * dx**4) * float(np.max(np.sum(np.abs(JL), axis=1)))


def quadrantal_defect(eigs: np.ndarray) -> float:
    """Largest distance from some ``-lambda`` or ``conj(lambda)`` to the nearest eigenvalue."""
    ev = np.asarray(eigs, dtype=complex)
    tree = cKDTree(np.column_stack([ev.real, ev.imag]))
    worst = 0.0
    for img in (-ev, ev.conj()):
        d, _ = tree.query(np.column_stack([img.real, img.imag]))
        worst = max(worst, float(np.max(d)))
    return worst


def _clusters(values: np.ndarray, rtol: float = CLUSTER_RTOL) -> list[np.ndarray]:
    """Group indices of values lying within ``rtol * max(1, |lambda|)`` of each other (single linkage)."""
    n = len(values)
    order = np.argsort(values.real, kind="stable")
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for ii, i in enumerate(order):
        for j in order[ii + 1 :]:
            r = rtol * max(1.0, abs(values[i]), abs(values[j]))
            if values[j].real - values[i].real > r:
                break
            if abs(values[j] - values[i]) <= r:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(sorted(g)) for g in groups.values()]


def _symmetry_fractions(V: np.ndarray, L: int) -> np.ndarray:
    """Fractions of ``||V||_F^2`` in each of the four symmetry subspaces, columns of V spanning a cluster."""
    Q, _ = np.linalg.qr(V)
    halves = (Q[:L], Q[L:])
    out = np.zeros(4)
    for comp in halves:
        sh = np.roll(comp, -(L // 2), axis=0)
        rf = np.roll(comp[::-1], 1, axis=0)
        rsh = np.roll(sh[::-1], 1, axis=0)
        for n, (s_t, s_r) in enumerate(((1, 1), (1, -1), (-1, 1), (-1, -1))):
            P = 0.25 * (comp + s_t * sh + s_r * rf + s_t * s_r * rsh)
            out[n] += float(np.sum(np.abs(P) ** 2))
    return out / Q.shape[1]


@dataclass
class SpectrumReport:
    """Spectrum of ``JL`` with a stability verdict.

    ``real_pairs`` counts eigenvalues with ``Re > tol`` and ``|Im| <= tol``;
    ``unstable_clusters`` lists ``(center, multiplicity)`` of the eigenvalues
    with ``Re > tol``.
    """

    eigenvalues: np.ndarray
    tol: float
    theta: float = 0.0
    max_real_part: float = field(init=False)
    unstable_count: int = field(init=False)
    real_pairs: int = field(init=False)
    unstable_clusters: list = field(init=False)
    subspace_labels: list | None = None

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=complex)
        self.eigenvalues = ev
        self.max_real_part = float(np.max(np.abs(ev.real))) if ev.size else 0.0
        pos = ev[ev.real > self.tol]
        self.unstable_count = int(pos.size)
        self.real_pairs = int(np.sum(np.abs(pos.imag) <= self.tol))
        self.unstable_clusters = [
            (complex(np.mean(pos[g])), len(g)) for g in _clusters(pos)
        ] if pos.size else []

    @property
    def stable(self) -> bool:
        return self.max_real_part <= self.tol


def analyze_spectrum(
    JL: np.ndarray, dx: float, tol: float | None = None, theta: float = 0.0, label_subspaces: bool = False
) -> SpectrumReport:
    if tol is None:
        tol = stability_tol(JL, dx)
    if not label_subspaces:
        return SpectrumReport(eigenvalues(JL, hermitian=False), tol, theta)
    w, V = eigenvalues(JL, hermitian=False, vectors=True)
    L = JL.shape[0] // 2
    labels = [None] * len(w)
    # a cluster gets one label: the subspaces holding at least 1% of its span
    for g in _clusters(w):
        frac = _symmetry_fractions(V[:, g], L)
        lab = {SYMMETRY_LABELS[n]: float(f) for n, f in enumerate(frac) if f >= 0.01}
        for i in g:
            labels[i] = lab
    return SpectrumReport(w, tol, theta, subspace_labels=labels)


# --- closed-form eigenvalue tables for L- and L+ -------------------------------


def lpm_table(family, k: float) -> tuple[np.ndarray, np.ndarray]:
    """Lowest eigenvalues of ``(L_-, L_+)`` on ``P_{4K}``: 3 for ``L_-`` and 5 for ``L_+``."""
    family = WaveFamily(family)
    k2 = k * k
    root = math.sqrt(k2 * k2 - k2 + 1.0)
    e_minus, e_plus = k2 + 1.0 - 2.0 * root, k2 + 1.0 + 2.0 * root
    lm = np.array([-1.0, -k2, 0.0])
    lp = np.array([e_minus, 0.0, 3.0 * k2, 3.0, e_plus])
    shift_m, shift_p = {
        WaveFamily.SN: (0.0, 0.0),
        WaveFamily.CN: (k2, -3.0 * k2),
        WaveFamily.DN: (1.0, -3.0),
    }[family]
    return lm + shift_m, lp + shift_p


def wave_on_multiple(family, k: float, n: int = 1, L: int = 1024) -> tuple[WaveParams, Grid, Field]:
    """Canonical wave of ``family`` sampled on ``n`` times its fundamental period."""
    if n < 1:
        raise ValueError("period multiple must be >= 1")
    p0 = canonical_params(family, k)
    p = WaveParams(p0.family, k, 1.0, 1.0, p0.a, p0.b, n * p0.T)
    g = Grid(L, p.T)
    return p, g, profile_samples(p, g)


@dataclass
class TableReport:
    family: str
    k: float
    L: int
    computed_minus: np.ndarray
    computed_plus: np.ndarray
    expected_minus: np.ndarray
    expected_plus: np.ndarray

    @property
    def error_minus(self) -> float:
        return float(np.max(np.abs(self.computed_minus - self.expected_minus)))

    @property
    def error_plus(self) -> float:
        return float(np.max(np.abs(self.computed_plus - self.expected_plus)))


def lpm_table_check(family, k: float, L: int = 1024, fd_order: int = 4) -> TableReport:
    """Compare the lowest eigenvalues of ``L_-`` / ``L_+`` on ``T = 4K`` with the closed-form table."""
    family = WaveFamily(family)
    n = 2 if family is WaveFamily.DN else 1
    p, g, u = wave_on_multiple(family, k, n, L)
    spec = LinearizationSpec(u, p.a, p.b, 0.0, fd_order)
    lm = np.sort(eigenvalues(build_L(spec, "minus"), hermitian=True))[:3]
    lp = np.sort(eigenvalues(build_L(spec, "plus"), hermitian=True))[:5]
    em, ep = lpm_table(family, k)
    return TableReport(family.value, k, L, lm, lp, em, ep)


# --- explicit preimages for cn ----------------------------------------------------


def cn_preimages(k: float, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``(phi_1, xi_1)`` with ``L_+ phi_1 = cn`` and ``L_- xi_1 = cn_x`` (canonical cn)."""
    K, E = complete_K(k), complete_E(k)
    k2 = k * k
    x = grid.x
    sn, cn, dn = jacobi(x, k)
    cn_x = -sn * dn
    drift = epsilon_E(x, k) - E / K * x
    den_phi = 2.0 * (2.0 * k2 - 1.0) * E / K + 2.0 * (1.0 - k2)
    den_xi = -2.0 * (1.0 - k2) + 2.0 * E / K
    phi1 = (drift * cn_x - k2 * cn**3 + (K * k2 - E) / K * cn) / den_phi
    xi1 = (drift * cn + cn_x) / den_xi
    return phi1, xi1


@dataclass
class PreimageReport:
    k: float
    L: int
    residual_plus: float
    residual_minus: float
    orth_phi1_cnx: float
    orth_xi1_cn: float
    den_phi: float
    den_xi: float

    def to_dict(self):
        return dict(self.__dict__)


def cn_preimage_check(k: float, L: int = 1024, fd_order: int = 4) -> PreimageReport:
    p, g, u = wave_on_multiple(WaveFamily.CN, k, 1, L)
    spec = LinearizationSpec(u, p.a, p.b, 0.0, fd_order)
    phi1, xi1 = cn_preimages(k, g)
    cn = u.values.real
    cn_x = profile_derivative(p, g, 1).values.real
    rp = build_L(spec, "plus") @ phi1 - cn
    rm = build_L(spec, "minus") @ xi1 - cn_x
    K, E = complete_K(k), complete_E(k)
    k2 = k * k
    return PreimageReport(
        k,
        L,
        float(np.max(np.abs(rp))),
        float(np.max(np.abs(rm))),
        float(g.dx * np.dot(phi1, cn_x)),
        float(g.dx * np.dot(xi1, cn)),
        2.0 * (2.0 * k2 - 1.0) * E / K + 2.0 * (1.0 - k2),
        -2.0 * (1.0 - k2) + 2.0 * E / K,
    )


# --- stability and Bloch sweeps --------------------------------------------------------


def stability_report(
    family,
    k: float,
    n: int = 1,
    L: int = 1024,
    fd_order: int = 4,
    tol: float | None = None,
    label_subspaces: bool = False,
) -> SpectrumReport:
    """Spectrum of ``JL`` on ``n`` fundamental periods, ``theta = 0``.

    The default ``tol`` is :func:`stability_tol`.
    """
    p, g, u = wave_on_multiple(family, k, n, L)
    JL = build_JL(LinearizationSpec(u, p.a, p.b, 0.0, fd_order))
    return analyze_spectrum(JL, g.dx, tol, 0.0, label_subspaces)


def bloch_period(family, k: float) -> float:
    """Fundamental period of ``u^2``: ``2K`` for all three families."""
    WaveFamily(family)
    return 2.0 * complete_K(k)


def bloch_sweep(
    family,
    k: float,
    thetas: Iterable[float],
    L: int = 256,
    fd_order: int = 4,
    tol: float | None = None,
    workers: int | None = None,
) -> list[SpectrumReport]:
    """Spectra of ``JL^theta`` on the period ``2K`` of ``u^2``, one report per theta.

    Threads share the read-only profile; LAPACK releases the GIL.
    """
    family = WaveFamily(family)
    p0 = canonical_params(family, k)
    T = bloch_period(family, k)
    p = WaveParams(family, k, 1.0, 1.0, p0.a, p0.b, p0.T)
    # on 2K, cn and sn are anti-periodic samples; only u^2 enters the operators
    u = sample_on_period(p, L, T)
    g = u.grid
    thetas = [float(t) for t in thetas]
    tmax = 2.0 * math.pi / T
    for t in thetas:
        if not -1e-12 <= t < tmax + 1e-12:
            raise ValueError(f"theta={t!r} outside [0, 2 pi / T)")
    ref_tol = tol
    if ref_tol is None:
        ref_tol = stability_tol(build_JL(LinearizationSpec(u, p.a, p.b, 0.0, fd_order)), g.dx)

    def one(theta):
        JL = build_JL(LinearizationSpec(u, p.a, p.b, theta, fd_order))
        return analyze_spectrum(JL, g.dx, ref_tol, theta)

    workers = workers or os.cpu_count() or 1
    if workers == 1 or len(thetas) == 1:
        return [one(t) for t in thetas]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, thetas))


def sample_on_period(p: WaveParams, L: int, T: float) -> Field:
    """Samples of the elliptic wave ``p`` on ``Grid(L, T)``, ``T`` need not be its period."""
    g = Grid(L, T)
    x = g.x
    sn, cn, dn = jacobi(x / p.beta, p.k)
    vals = {WaveFamily.SN: sn, WaveFamily.CN: cn, WaveFamily.DN: dn}[p.family] / p.alpha
    return Field(vals, g)


def spectra_to_csv(reports: Sequence[SpectrumReport], path) -> None:
    """Write ``theta, re, im`` rows for every eigenvalue of every report."""
    rows = [
        np.column_stack([np.full(r.eigenvalues.size, r.theta), r.eigenvalues.real, r.eigenvalues.imag])
        for r in reports
    ]
    data = np.vstack(rows) if rows else np.empty((0, 3))
    np.savetxt(path, data, delimiter=",", header="theta,re,im", comments="", fmt="%.15g")
