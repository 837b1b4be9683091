"""Propagation of solutions of ``-g'' + alpha*Q*g = kappa**2 * g`` along edges.

A solution is carried as the pair ``(g, dg/ds)``; a segment acts on it by a
2x2 transfer matrix of unit determinant.  All routines accept either scalar
``alpha`` or a 1-D array of intensities and then return stacked matrices,
which keeps parameter sweeps vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import N_EDGES, Constant, EdgePotential, PotentialProfile, Sampled, Segment

SERIES_THRESHOLD = 1e-6
RK4_STEP_FRACTION = 1e-3

# Kirchhoff-compatible initial data at the center, per basis solution and
# edge: (g(b), dg/ds(b)).  Columns of the boundary data follow (u, v, w).
BASIS_INITIAL = np.array(
    [
        [[0.0, 0.0], [0.0, 1.0], [0.0, -1.0]],  # u
        [[0.0, 1.0], [0.0, 0.0], [0.0, -1.0]],  # v
        [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]],  # w
    ]
)
BASIS_NAMES = ("u", "v", "w")


def _constant_transfer(mu: np.ndarray, length: float) -> np.ndarray:
    """Transfer matrices for ``g'' = mu*g`` over ``length``; mu has shape (N,)."""
    mu = np.asarray(mu, dtype=float)
    z = mu * length * length
    c = np.empty_like(mu)
    s = np.empty_like(mu)
    ms = np.empty_like(mu)

    small = np.abs(z) < SERIES_THRESHOLD
    pos = (z >= SERIES_THRESHOLD)
    neg = (z <= -SERIES_THRESHOLD)

    zs = z[small]
    c[small] = 1 + zs / 2 + zs**2 / 24 + zs**3 / 720
    s_small = length * (1 + zs / 6 + zs**2 / 120 + zs**3 / 5040)
    s[small] = s_small
    ms[small] = mu[small] * s_small

    r = np.sqrt(mu[pos])
    c[pos] = np.cosh(r * length)
    sh = np.sinh(r * length)
    s[pos] = sh / r
    ms[pos] = r * sh

    r = np.sqrt(-mu[neg])
    c[neg] = np.cos(r * length)
    sn = np.sin(r * length)
    s[neg] = sn / r
    ms[neg] = -r * sn

    out = np.empty(mu.shape + (2, 2))
    out[..., 0, 0] = c
    out[..., 0, 1] = s
    out[..., 1, 0] = ms
    out[..., 1, 1] = c
    return out


def _sampled_transfer(seg: Segment, alpha: np.ndarray, kappa: float) -> np.ndarray:
    """Classical RK4 on each node interval so that kinks of Q fall on step edges."""
    nodes = np.asarray(seg.value.s, dtype=float)
    vals = np.asarray(seg.value.v, dtype=float)
    h_max = RK4_STEP_FRACTION * seg.length
    k2 = kappa * kappa

    y = np.broadcast_to(np.eye(2), alpha.shape + (2, 2)).copy()

    def rhs(q, y):
        p = (alpha * q - k2)[:, None]
        out = np.empty_like(y)
        out[:, 0, :] = y[:, 1, :]
        out[:, 1, :] = p * y[:, 0, :]
        return out

    for s0, s1, q0, q1 in zip(nodes[:-1], nodes[1:], vals[:-1], vals[1:]):
        n = max(1, math.ceil((s1 - s0) / h_max - 1e-9))
        h = (s1 - s0) / n
        dq = (q1 - q0) / n
        for i in range(n):
            qa = q0 + i * dq
            qm = qa + 0.5 * dq
            qb = qa + dq
            k1 = rhs(qa, y)
            k2_ = rhs(qm, y + 0.5 * h * k1)
            k3 = rhs(qm, y + 0.5 * h * k2_)
            k4 = rhs(qb, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2_ + 2 * k3 + k4)
    return y


def _as_batch(alpha):
    arr = np.atleast_1d(np.asarray(alpha, dtype=float))
    return arr, np.ndim(alpha) == 0


def segment_transfer(segment: Segment, alpha, kappa: float, *, method: str = "auto") -> np.ndarray:
    """Transfer matrix of one segment.

    ``method="rk4"`` forces the numerical integrator even for a constant
    segment, which is how the closed form is cross-checked.
    """
    a, scalar = _as_batch(alpha)
    val = segment.value
    if isinstance(val, Constant) and method != "rk4":
        out = _constant_transfer(a * val.c - kappa * kappa, segment.length)
    else:
        if isinstance(val, Constant):
            segment = Segment(segment.length, Sampled((0.0, segment.length), (val.c, val.c)))
        out = _sampled_transfer(segment, a, kappa)
    return out[0] if scalar else out


def edge_transfer(edge: EdgePotential, alpha, kappa: float) -> np.ndarray:
    """Ordered product of segment transfers from the center to the tip."""
    a, scalar = _as_batch(alpha)
    total = np.broadcast_to(np.eye(2), a.shape + (2, 2))
    for seg in edge.segments:
        total = segment_transfer(seg, a, kappa) @ total
    return total[0] if scalar else total


@dataclass(frozen=True)
class BasisBoundaryData:
    """Tip values and tip slopes of the basis solutions u, v, w.

    ``val[j, i]`` is the value at tip ``a_{j+1}`` of basis solution ``i`` and
    ``der[j, i]`` its d/ds there, with ``s`` increasing from center to tip.
    """

    alpha: float
    kappa: float
    val: np.ndarray
    der: np.ndarray

    def lagrange_defects(self) -> np.ndarray:
        """Antisymmetric matrix of sum_j (g_f' g_g - g_f g_g') over basis pairs."""
        return self.der.T @ self.val - self.val.T @ self.der

    def scale(self) -> float:
        return float(np.abs(self.val).max() * np.abs(self.der).max())


def boundary_data_batch(profile: PotentialProfile, alphas, kappa: float):
    """Stacked ``(val, der)`` arrays of shape (N, 3, 3) for an array of intensities."""
    a = np.atleast_1d(np.asarray(alphas, dtype=float))
    val = np.empty(a.shape + (N_EDGES, 3))
    der = np.empty(a.shape + (N_EDGES, 3))
    for j, edge in enumerate(profile.edges):
        t = edge_transfer(edge, a, kappa)  # (N, 2, 2)
        init = BASIS_INITIAL[:, j, :].T  # (2, 3): columns are basis solutions
        tips = t @ init  # (N, 2, 3)
        val[:, j, :] = tips[:, 0, :]
        der[:, j, :] = tips[:, 1, :]
    return val, der


def basis_boundary_data(profile: PotentialProfile, alpha: float, kappa: float) -> BasisBoundaryData:
    val, der = boundary_data_batch(profile, alpha, kappa)
    return BasisBoundaryData(float(alpha), float(kappa), val[0], der[0])
