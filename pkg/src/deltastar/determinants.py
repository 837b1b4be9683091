"""The determinant family h0, h1, h0m, h1m, H0, H1 built from basis boundary data."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .edges import boundary_data_batch
from .graph import PotentialProfile


class Convention(enum.IntEnum):
    """Sign applied to the stored tip slopes before forming determinants.

    ``OUTWARD`` uses d/ds toward the tip (center-to-tip direction) and is the
    convention under which the matching system reproduces free Kirchhoff
    scattering at zero intensity.  ``INWARD`` is the reversed slope.
    """

    OUTWARD = 1
    INWARD = -1


PINNED = Convention.OUTWARD


@dataclass(frozen=True)
class DeterminantSet:
    alpha: float
    h0: float
    h1: float
    h0m: np.ndarray
    h1m: np.ndarray
    H0: float
    H1: float
    convention: Convention
    h0_scale: float
    h1_scale: float
    H0_scale: float
    H1_scale: float


def hadamard(m: np.ndarray) -> np.ndarray:
    """Product of row norms, an upper bound for |det| over the last two axes."""
    return np.prod(np.linalg.norm(m, axis=-1), axis=-1)


def row_replaced(base: np.ndarray, donor: np.ndarray) -> np.ndarray:
    """Stack of ``base`` with row m taken from ``donor``, for m = 0, 1, 2.

    Works on (..., 3, 3) inputs and returns (..., 3, 3, 3) with the new
    axis placed before the matrix axes.
    """
    out = np.repeat(base[..., None, :, :], 3, axis=-3)
    for m in range(3):
        out[..., m, m, :] = donor[..., m, :]
    return out


def determinants_batch(val: np.ndarray, der: np.ndarray):
    """Vectorized determinant family for stacked (N, 3, 3) boundary data.

    Besides the determinants themselves this returns reference magnitudes.
    h0 and h1 are compared with Hadamard bounds.  H0 and H1 change only by
    det(C) under a change of basis C, so their magnitudes are measured in the
    orthonormal basis of right singular vectors of Der, where
    |H0| = sigma1*sigma2*|U.n| with U the tip values of the (near) null
    combination, and |H1| = sigma1*|U x V . n'| with U, V the tip values of
    the two weakest combinations.  The scales below drop the cosine factors.
    """
    h0 = np.linalg.det(val)
    h1 = np.linalg.det(der)
    # h_{nm}: h_{1-n} with row m replaced by row m of h_n
    h0m = np.linalg.det(row_replaced(der, val))
    h1m = np.linalg.det(row_replaced(val, der))
    _, sv, vt = np.linalg.svd(der)
    tips = val @ np.swapaxes(vt, -1, -2)  # tip values of the singular combinations
    tip_norms = np.linalg.norm(tips, axis=-2)
    return {
        "h0": h0,
        "h1": h1,
        "h0m": h0m,
        "h1m": h1m,
        "H0": h0m.sum(axis=-1),
        "H1": h1m.sum(axis=-1),
        "h0_scale": hadamard(val),
        "h1_scale": hadamard(der),
        "H0_scale": sv[..., 0] ** 2 * tip_norms[..., 2],
        "H1_scale": sv[..., 0] * tip_norms[..., 1] * tip_norms[..., 2],
    }


def determinant_set(
    profile: PotentialProfile,
    alpha: float,
    convention: Convention = PINNED,
    kappa: float = 0.0,
) -> DeterminantSet:
    val, der = boundary_data_batch(profile, alpha, kappa)
    d = determinants_batch(val, int(convention) * der)
    return DeterminantSet(
        alpha=float(alpha),
        h0=float(d["h0"][0]),
        h1=float(d["h1"][0]),
        h0m=d["h0m"][0],
        h1m=d["h1m"][0],
        H0=float(d["H0"][0]),
        H1=float(d["H1"][0]),
        convention=Convention(convention),
        h0_scale=float(d["h0_scale"][0]),
        h1_scale=float(d["h1_scale"][0]),
        H0_scale=float(d["H0_scale"][0]),
        H1_scale=float(d["H1_scale"][0]),
    )
