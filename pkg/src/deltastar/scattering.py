"""Scattering matrices of the regularized potential and of its zero-range limit.

Outside the unit star the potential vanishes, so in stretched coordinates a
wave coming in along edge ``n`` reads ``delta_jn * exp(-i*kappa*s) +
T[n, j] * exp(i*kappa*s)`` on edge ``j`` for ``s >= 1``, with ``kappa = eps*k``.
Matching value and slope at the three tips against combinations of the
Kirchhoff basis solutions gives a 6x6 linear system per incoming edge.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .determinants import PINNED, Convention, DeterminantSet, determinant_set, determinants_batch
from .edges import boundary_data_batch
from .errors import InvariantViolation, SingularSystem
from .graph import PotentialProfile
from .resonance import (
    CouplingDirection,
    SpectralPoint,
    characteristic_determinant,
    local_h1_scale,
    spectral_point,
)

__all__ = [
    "ScatteringMatrix",
    "InterfaceMatrices",
    "DeterminantSet",
    "determinant_set",
    "limit_smatrix",
    "interface_matrices",
    "eps_smatrix",
    "matching_matrix",
    "expansion_residual",
    "transmission_sweep",
    "convergence_table",
    "reference_smatrix",
    "loglog_slope",
    "KIRCHHOFF",
]

UNITARY_TOL = 1e-9
LIMIT_TOL = 1e-10
COND_MAX = 1e14
RESONANT_TOL = 1e-12

KIRCHHOFF = np.array([[-1.0, 2.0, 2.0], [2.0, -1.0, 2.0], [2.0, 2.0, -1.0]]) / 3.0


@dataclass(frozen=True)
class ScatteringMatrix:
    """``entries[n, m]``: amplitude on edge m for a unit wave coming in on edge n."""

    entries: np.ndarray
    kind: str  # "limit" or "epsilon"
    kappa: float | None = None

    def unitarity_defect(self) -> float:
        t = self.entries
        return float(np.abs(t.conj().T @ t - np.eye(3)).max())

    def symmetry_defect(self) -> float:
        return float(np.abs(self.entries - self.entries.T).max())

    def involution_defect(self) -> float:
        return float(np.abs(self.entries @ self.entries - np.eye(3)).max())

    def check(self) -> "ScatteringMatrix":
        if self.kind == "epsilon":
            bad = {"unitarity": self.unitarity_defect(), "symmetry": self.symmetry_defect()}
            tol = UNITARY_TOL
        else:
            bad = {
                "reality": float(np.abs(np.imag(self.entries)).max()),
                "symmetry": self.symmetry_defect(),
                "involution": self.involution_defect(),
            }
            tol = LIMIT_TOL
        failed = {k: v for k, v in bad.items() if v > tol}
        if failed:
            raise InvariantViolation(
                f"{self.kind} S-matrix violates "
                + ", ".join(f"{k} ({v:.3e} > {tol:g})" for k, v in failed.items())
            )
        return self


def _theta_array(theta) -> np.ndarray:
    if isinstance(theta, CouplingDirection):
        return theta.as_array()
    t = np.asarray(theta, dtype=float)
    return t / np.linalg.norm(t)


def limit_smatrix(theta, branch: int = 1) -> ScatteringMatrix:
    """Zero-range limit ``(-1)**(branch-1) * (2*theta*theta^T - I)``.

    ``branch`` is the multiplicity of the resonance.  The result is the same
    for ``theta`` and ``-theta``.
    """
    if branch not in (1, 2):
        raise ValueError(f"branch must be 1 or 2, got {branch}")
    t = _theta_array(theta)
    s = (-1) ** (branch - 1) * (2.0 * np.outer(t, t) - np.eye(3))
    return ScatteringMatrix(s, "limit").check()


@dataclass(frozen=True)
class InterfaceMatrices:
    """Vertex condition ``A @ psi + B @ dpsi = 0`` (outgoing derivatives)."""

    A: np.ndarray
    B: np.ndarray

    def check(self) -> "InterfaceMatrices":
        ab = self.A @ self.B.conj().T
        if np.abs(ab - ab.conj().T).max() > 1e-12:
            raise InvariantViolation("A B* is not self-adjoint")
        if np.linalg.matrix_rank(np.hstack([self.A, self.B])) != 3:
            raise InvariantViolation("rank(A|B) != 3")
        return self

    def residual(self, psi, dpsi) -> float:
        return float(np.abs(self.A @ psi + self.B @ dpsi).max())


def interface_matrices(theta, branch: int = 1) -> InterfaceMatrices:
    """Vertex matrices realizing the limit coupling.

    For a simple resonance the boundary values are parallel to theta and the
    theta-weighted sum of derivatives vanishes; a double resonance swaps the
    roles of values and derivatives.  The proportionality rows are pivoted on
    the third component, as usual, unless it vanishes, in which case the
    largest component is used instead so that rank(A|B) = 3 still holds.
    """
    t = _theta_array(theta)
    p = 2 if abs(t[2]) > 1e-12 else int(np.argmax(np.abs(t)))
    a = np.zeros((3, 3))
    row = 0
    for j in range(3):
        if j == p:
            continue
        a[row, j] = t[p]
        a[row, p] = -t[j]
        row += 1
    b = np.zeros((3, 3))
    b[2] = t
    if branch == 2:
        a, b = b, a
    elif branch != 1:
        raise ValueError(f"branch must be 1 or 2, got {branch}")
    return InterfaceMatrices(a, b).check()


def matching_matrix(val: np.ndarray, der: np.ndarray, kappa: float) -> np.ndarray:
    """Stacked 6x6 matching matrices; unknowns (T_1, T_2, T_3, c_u, c_v, c_w).

    Rows alternate value and slope matching at tips a1, a2, a3.  With the
    outward slope convention this is exactly the classical form whose
    determinant has the h0/h1/H0/H1 expansion.
    """
    val = np.asarray(val)
    der = np.asarray(der)
    batch = val.shape[:-2]
    e = np.exp(1j * kappa)
    m = np.zeros(batch + (6, 6), dtype=complex)
    for j in range(3):
        m[..., 2 * j, j] = -e
        m[..., 2 * j + 1, j] = -1j * kappa * e
        m[..., 2 * j, 3:] = val[..., j, :]
        m[..., 2 * j + 1, 3:] = der[..., j, :]
    return m


def _rhs(kappa: float) -> np.ndarray:
    r = np.zeros((6, 3), dtype=complex)
    em = np.exp(-1j * kappa)
    for n in range(3):
        r[2 * n, n] = em
        r[2 * n + 1, n] = -1j * kappa * em
    return r


def _solve_batch(profile, alphas, kappa, convention):
    val, der = boundary_data_batch(profile, alphas, kappa)
    m = matching_matrix(val, int(convention) * der, kappa)
    cond = np.linalg.cond(m)
    ok = np.isfinite(cond) & (cond <= COND_MAX)
    t = np.full(m.shape[:-2] + (3, 3), np.nan + 0j)
    if ok.any():
        x = np.linalg.solve(m[ok], np.broadcast_to(_rhs(kappa), (int(ok.sum()), 6, 3)))
        t[ok] = np.swapaxes(x[:, :3, :], -1, -2)
    return t, cond, m


def eps_smatrix(
    profile: PotentialProfile,
    alpha: float,
    kappa: float,
    convention: Convention = PINNED,
    *,
    check: bool = True,
) -> ScatteringMatrix:
    """Scattering matrix of the potential ``alpha*Q`` at reduced momentum ``kappa``."""
    if not kappa > 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    t, cond, m = _solve_batch(profile, np.array([alpha]), kappa, convention)
    if not cond[0] <= COND_MAX:
        raise SingularSystem(
            f"matching system singular at alpha={alpha}, kappa={kappa} (cond {cond[0]:.3e})",
            condition=float(cond[0]),
            delta=complex(np.linalg.det(m[0])),
        )
    s = ScatteringMatrix(t[0], "epsilon", float(kappa))
    return s.check() if check else s


def expansion_residual(
    profile: PotentialProfile,
    alpha: float,
    kappas,
    convention: Convention = PINNED,
    *,
    frozen: bool = False,
) -> list[tuple[float, float]]:
    """Distance between det(M) and its second-order small-kappa expansion.

    The determinants entering the expansion are evaluated at the same kappa
    as M; the remainder is then third order.  ``frozen=True`` evaluates them
    at kappa = 0 instead, which leaves an O(kappa**2) remainder from the
    energy dependence of the basis solutions.
    """
    out = []
    for kappa in kappas:
        val, der = boundary_data_batch(profile, alpha, kappa)
        der = int(convention) * der
        delta = np.linalg.det(matching_matrix(val, der, kappa))[0]
        if frozen:
            val, der = boundary_data_batch(profile, alpha, 0.0)
            der = int(convention) * der
        d = determinants_batch(val, der)
        h1, H0, H1 = d["h1"][0], d["H0"][0], d["H1"][0]
        approx = h1 + 1j * kappa * (3 * h1 - H0) + kappa**2 * (-4.5 * h1 + 3 * H0 - H1)
        out.append((float(kappa), float(abs(delta - approx))))
    return out


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    probability: float
    phase: float
    status: str = "ok"

    @property
    def log10_probability(self) -> float:
        if not self.probability > 0:
            return -math.inf if self.probability == 0 else math.nan
        return math.log10(self.probability)


def transmission_sweep(
    profile: PotentialProfile,
    alphas,
    kappa: float,
    from_edge: int,
    to_edge: int,
    convention: Convention = PINNED,
    *,
    threads: int = 1,
    chunk: int = 512,
) -> list[SweepRow]:
    """|T[n, m]|^2 and arg T[n, m] over a grid of intensities (edges numbered 1..3).

    Grid points where the matching system is numerically singular, or where
    the solution fails unitarity, are reported with a status instead of
    aborting the sweep.
    """
    if not kappa > 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    if from_edge not in (1, 2, 3) or to_edge not in (1, 2, 3):
        raise ValueError("edges are numbered 1, 2, 3")
    grid = np.asarray(alphas, dtype=float).ravel()
    if grid.size == 0:
        return []
    pieces = [grid[i:i + chunk] for i in range(0, grid.size, chunk)]

    def work(piece):
        return _solve_batch(profile, piece, kappa, convention)[:2]

    if threads > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, pieces))
    else:
        results = [work(p) for p in pieces]
    t = np.concatenate([r[0] for r in results])
    cond = np.concatenate([r[1] for r in results])

    n, m = from_edge - 1, to_edge - 1
    unit = np.abs(np.einsum("kji,kjl->kil", t.conj(), t) - np.eye(3)).max(axis=(-2, -1))
    rows = []
    for a, tk, c, u in zip(grid, t, cond, unit):
        if not c <= COND_MAX:
            rows.append(SweepRow(float(a), math.nan, math.nan, "singular"))
        elif not u <= UNITARY_TOL:
            rows.append(SweepRow(float(a), math.nan, math.nan, "nonunitary"))
        else:
            amp = tk[n, m]
            rows.append(SweepRow(float(a), float(abs(amp) ** 2), float(np.angle(amp))))
    return rows


def reference_smatrix(profile: PotentialProfile, alpha: float):
    """Zero-range limit at ``alpha``: the resonant coupling if h1 vanishes there
    (relative to its local scale), otherwise total reflection ``-I``.

    Returns ``(ScatteringMatrix, SpectralPoint or None)``.
    """
    h1 = characteristic_determinant(profile, alpha)
    if abs(h1) <= RESONANT_TOL * local_h1_scale(profile, alpha):
        point: SpectralPoint = spectral_point(profile, alpha)
        return limit_smatrix(point.theta, point.multiplicity), point
    return ScatteringMatrix(-np.eye(3), "limit").check(), None


def convergence_table(
    profile: PotentialProfile,
    alpha: float,
    k: float,
    epsilons,
    convention: Convention = PINNED,
) -> list[tuple[float, float]]:
    """Entrywise max distance between S at kappa = eps*k and its zero-range limit.

    Rows are ordered by decreasing eps.
    """
    limit, _ = reference_smatrix(profile, alpha)
    rows = []
    for eps in sorted((float(e) for e in epsilons), reverse=True):
        if not eps > 0:
            raise ValueError(f"epsilon must be > 0, got {eps}")
        s = eps_smatrix(profile, alpha, eps * k, convention)
        rows.append((eps, float(np.abs(s.entries - limit.entries).max())))
    return rows


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
