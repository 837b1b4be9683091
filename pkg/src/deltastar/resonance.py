"""Resonant intensities and the coupling direction attached to each of them.

The resonant set is the set of intensities ``alpha`` for which the problem

    -g'' + alpha*Q*g = 0 on the star,  Kirchhoff at the center,
    dg/ds = 0 at every tip,

has a nontrivial solution.  Its elements are the roots of the characteristic
determinant ``h1(alpha) = det(Der)``, where ``Der`` holds the tip slopes of
the three Kirchhoff basis solutions.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .determinants import PINNED, Convention, determinant_set
from .edges import BASIS_INITIAL, basis_boundary_data, boundary_data_batch
from .errors import (
    DegenerateCoupling,
    InconsistentClassification,
    InvalidRange,
    NotResonant,
)
from .graph import PotentialProfile, builtin_name

log = logging.getLogger(__name__)

RANK_TOL = 1e-8
H0_TOL = 1e-6
TOUCH_TOL = 1e-6
RESIDUAL_TOL = 1e-10
MERGE_SIMPLE = 1e-9
MERGE_DOUBLE = 1e-7
COUPLING_TOL = 1e-10
SIGN_TOL = 1e-12

DEFAULT_WINDOW = (-100.0, 100.0)
DEFAULT_STEP = 0.01

# Closely spaced resonance pairs of the builtin profiles as (|alpha|, gap).
# symmetric-rect carries a simple and a double resonance that approach each
# other exponentially fast; the spectrum is symmetric under alpha -> -alpha.
DOCUMENTED_GAPS = {
    "paper-rect": ((0.0, 8.81),),
    "symmetric-rect": ((8.81, 3.48e-3), (28.55, 1.17e-5), (59.57, 3.16e-8), (101.87, 7.7e-11)),
}


class ResonanceSearchWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CouplingDirection:
    """Unit real 3-vector, normalized so the last nonzero component is positive."""

    theta: tuple[float, float, float]

    def __post_init__(self):
        norm = math.sqrt(sum(t * t for t in self.theta))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"coupling direction must be a unit vector, norm={norm}")

    @classmethod
    def from_vector(cls, vec) -> "CouplingDirection":
        v = np.asarray(vec, dtype=float)
        v = v / np.linalg.norm(v)
        nz = np.flatnonzero(np.abs(v) > SIGN_TOL)
        if nz.size and v[nz[-1]] < 0:
            v = -v
        return cls(tuple(float(x) for x in v))

    def as_array(self) -> np.ndarray:
        return np.array(self.theta)


@dataclass(frozen=True)
class SpectralPoint:
    alpha: float
    multiplicity: int
    theta: CouplingDirection
    h1_residual: float
    h1_scale: float
    window: tuple[float, float]


def characteristic_determinant(
    profile: PotentialProfile, alpha: float, convention: Convention = PINNED
) -> float:
    """h1(alpha): determinant of the tip slopes of u, v, w at zero energy."""
    _, der = boundary_data_batch(profile, alpha, 0.0)
    return float(np.linalg.det(int(convention) * der[0]))


def _h1_and_scale(profile, alphas):
    _, der = boundary_data_batch(profile, alphas, 0.0)
    h = np.linalg.det(der)
    scale = np.prod(np.linalg.norm(der, axis=-1), axis=-1)
    return h, scale, der


def _sigma_ratio(der):
    sv = np.linalg.svd(der, compute_uv=False)
    return sv[..., 1] / sv[..., 0]


def local_h1_scale(profile: PotentialProfile, alpha: float) -> float:
    """Size of h1 near ``alpha``: the Hadamard bound of Der or the variation
    of h1 under a relative change of alpha, whichever is larger."""
    _, hadamard, _ = _h1_and_scale(profile, alpha)
    d = 1e-6 * max(1.0, abs(alpha))
    hp, hm = _h1_and_scale(profile, np.array([alpha + d, alpha - d]))[0]
    slope = abs(hp - hm) / (2 * d)
    return float(max(hadamard[0], slope * max(1.0, abs(alpha))))


def classify_multiplicity(profile: PotentialProfile, alpha: float, *, check_h0: bool = True):
    """Multiplicity of a refined root and the coefficient vectors of its eigenfunctions.

    Returns ``(multiplicity, null_basis)`` where the columns of ``null_basis``
    are combinations of (u, v, w) whose tip slopes all vanish.  The decision
    comes from the singular values of ``Der``; the H0 determinant must agree.
    """
    data = basis_boundary_data(profile, alpha, 0.0)
    _, sv, vt = np.linalg.svd(data.der)
    sigma_ratio = sv[1] / sv[0]
    dets = determinant_set(profile, alpha)
    h0_ratio = abs(dets.H0) / dets.H0_scale

    by_rank = 2 if sigma_ratio < RANK_TOL else 1
    by_h0 = 2 if h0_ratio < H0_TOL else 1
    if check_h0 and by_rank != by_h0:
        raise InconsistentClassification(
            f"alpha={alpha!r}: rank test says {by_rank} (sigma2/sigma1={sigma_ratio:.3e}) "
            f"but H0 test says {by_h0} (|H0|/scale={h0_ratio:.3e})",
            sigma_ratio=sigma_ratio,
            h0_ratio=h0_ratio,
        )
    null_basis = vt[3 - by_rank:].T
    return by_rank, null_basis


def _center_data_norm(coeffs: np.ndarray) -> np.ndarray:
    """Norm of (g(b), dg/ds(b) per edge) for combinations of u, v, w."""
    # (value at b, slope on each edge) of u, v, w as a 4x3 matrix
    center = np.vstack([BASIS_INITIAL[:, 0, 0], BASIS_INITIAL[:, :, 1].T])
    return np.linalg.norm(center @ coeffs, axis=0)


def coupling_direction(
    profile: PotentialProfile, alpha: float, multiplicity: int, null_basis: np.ndarray
) -> CouplingDirection:
    """Tip values of the eigenfunction (simple root) or the cross product of
    the tip-value vectors of two eigenfunctions (double root), normalized.

    Degeneracy is judged against the size of the eigenfunctions' Cauchy data
    at the center, not against the tip values themselves, since eigenfunctions
    that decay towards the tips are legitimate.
    """
    null_basis = np.asarray(null_basis, dtype=float).reshape(3, -1)
    val = basis_boundary_data(profile, alpha, 0.0).val
    tips = val @ null_basis
    tip_norms = np.linalg.norm(tips, axis=0)
    if multiplicity not in (1, 2) or tips.shape[1] != multiplicity:
        raise ValueError(f"need {multiplicity} null vectors for multiplicity {multiplicity}")
    small = tip_norms < COUPLING_TOL * _center_data_norm(null_basis)
    if multiplicity == 1:
        vec = tips[:, 0]
    else:
        vec = np.cross(tips[:, 0], tips[:, 1])
        # the two tip-value vectors must also be independent
        small = np.append(small, np.linalg.norm(vec) < COUPLING_TOL * np.prod(tip_norms))
    if small.any():
        raise DegenerateCoupling(
            f"alpha={alpha!r}: eigenfunction tip values vanish or coincide "
            f"(tip norms {np.array2string(tip_norms, precision=3)})"
        )
    return CouplingDirection.from_vector(vec)


def _xtol(a, b):
    # brentq also applies rtol = 4*eps, so roots are refined to machine precision
    return 1e-300


def _polish_double(profile, alpha, half_width):
    """Refine a double root as a sign change of H0, which vanishes simply there."""
    H0 = lambda a: determinant_set(profile, a).H0  # noqa: E731
    f0 = H0(alpha)
    if f0 == 0.0:
        return alpha
    delta = 1e-9 * max(1.0, abs(alpha))
    while delta <= half_width:
        lo, hi = alpha - delta, alpha + delta
        flo, fhi = H0(lo), H0(hi)
        if flo * f0 <= 0:
            return brentq(H0, lo, alpha, xtol=_xtol(lo, alpha), rtol=4 * np.finfo(float).eps)
        if fhi * f0 <= 0:
            return brentq(H0, alpha, hi, xtol=_xtol(alpha, hi), rtol=4 * np.finfo(float).eps)
        delta *= 4
    return alpha


def _refine_minimum(fun, lo, hi):
    res = minimize_scalar(fun, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-14 * max(1.0, abs(lo), abs(hi)), "maxiter": 500})
    return float(res.x)


def _warn_coarse(profile, lo, hi, step):
    name = builtin_name(profile)
    if name is None:
        return
    gaps = [gap for where, gap in DOCUMENTED_GAPS[name] if lo <= where <= hi or lo <= -where <= hi]
    if gaps and step > min(gaps):
        warnings.warn(
            f"grid step {step} exceeds the documented minimum resonance gap {min(gaps):g} of "
            f"builtin profile {name!r} in this window; nearby roots may merge",
            ResonanceSearchWarning,
            stacklevel=3,
        )


def find_resonances(
    profile: PotentialProfile,
    alpha_lo: float = DEFAULT_WINDOW[0],
    alpha_hi: float = DEFAULT_WINDOW[1],
    grid_step: float = DEFAULT_STEP,
) -> list[SpectralPoint]:
    """Locate, classify and equip with coupling directions all resonances in a window.

    The characteristic determinant is scanned on a uniform grid.  Sign changes
    are refined by Brent's method.  Double roots do not change sign, so grid
    minima of ``|h1|/scale`` and of ``sigma2/sigma1`` are refined separately
    and polished as roots of H0.
    """
    if not all(math.isfinite(x) for x in (alpha_lo, alpha_hi, grid_step)):
        raise InvalidRange("range and step must be finite")
    if not alpha_lo < alpha_hi:
        raise InvalidRange(f"need alpha_lo < alpha_hi, got {alpha_lo} >= {alpha_hi}")
    if not grid_step > 0:
        raise InvalidRange(f"grid step must be > 0, got {grid_step}")
    _warn_coarse(profile, alpha_lo, alpha_hi, grid_step)

    n = max(1, math.ceil((alpha_hi - alpha_lo) / grid_step - 1e-9))
    grid = alpha_lo + grid_step * np.arange(n + 1)
    grid[-1] = alpha_hi
    h, scale, der = _h1_and_scale(profile, grid)
    rel = np.abs(h) / scale
    ratio = _sigma_ratio(der)

    def h1(a):
        return characteristic_determinant(profile, a)

    def rel1(a):
        hh, sc, _ = _h1_and_scale(profile, a)
        return float(abs(hh[0]) / sc[0])

    def ratio1(a):
        return float(_sigma_ratio(_h1_and_scale(profile, a)[2])[0])

    eps4 = 4 * np.finfo(float).eps
    found: list[tuple[float, tuple[float, float], bool]] = []  # (alpha, window, double hint)

    for i in range(n + 1):
        if h[i] == 0.0:
            found.append((float(grid[i]), (float(grid[max(i - 1, 0)]), float(grid[min(i + 1, n)])), False))
    for i in range(n):
        if h[i] * h[i + 1] < 0:
            a, b = grid[i], grid[i + 1]
            found.append((brentq(h1, a, b, xtol=_xtol(a, b), rtol=eps4), (float(a), float(b)), False))

    for i in range(1, n):
        a, b = float(grid[i - 1]), float(grid[i + 1])
        same_sign = h[i - 1] * h[i] > 0 and h[i] * h[i + 1] > 0
        if same_sign and rel[i] <= rel[i - 1] and rel[i] <= rel[i + 1]:
            x = _refine_minimum(rel1, a, b)
            hx = h1(x)
            if hx * h[i] < 0:
                # two simple roots inside one grid cell
                found.append((brentq(h1, a, x, xtol=_xtol(a, x), rtol=eps4), (a, x), False))
                found.append((brentq(h1, x, b, xtol=_xtol(x, b), rtol=eps4), (x, b), False))
            elif hx == 0.0 or rel1(x) < TOUCH_TOL:
                found.append((x, (a, b), True))
        if ratio[i] <= ratio[i - 1] and ratio[i] <= ratio[i + 1] and ratio[i] < 0.5:
            x = _refine_minimum(ratio1, a, b)
            if ratio1(x) < 1e-4:
                found.append((x, (a, b), True))

    points: list[SpectralPoint] = []
    for alpha, window, touch in sorted(found, key=lambda t: t[0]):
        if touch:
            # only double roots touch zero; anything else is a near miss
            alpha = _polish_double(profile, alpha, 0.5 * (window[1] - window[0]))
            if ratio1(alpha) >= RANK_TOL:
                continue
            if abs(h1(alpha)) > RESIDUAL_TOL * local_h1_scale(profile, alpha):
                continue
        if not alpha_lo <= alpha <= alpha_hi:
            continue
        points.append(_make_point(profile, alpha, window))
    points.sort(key=lambda p: p.alpha)
    unique: list[SpectralPoint] = []
    for p in points:
        if unique:
            prev = unique[-1]
            gap = abs(p.alpha - prev.alpha) / max(1.0, abs(p.alpha))
            # double roots are only located to ~sqrt(noise) when their
            # eigenfunctions decay strongly towards the tips
            same = gap <= (MERGE_DOUBLE if p.multiplicity == prev.multiplicity == 2 else MERGE_SIMPLE)
            if same:
                if p.multiplicity > prev.multiplicity or (
                    p.multiplicity == prev.multiplicity and p.h1_residual < prev.h1_residual
                ):
                    unique[-1] = p
                continue
        unique.append(p)
    return unique


def _make_point(profile, alpha, window) -> SpectralPoint:
    try:
        mult, null = classify_multiplicity(profile, alpha)
    except InconsistentClassification as exc:
        # near-coincident simple and double roots; the rank test decides
        warnings.warn(str(exc), ResonanceSearchWarning, stacklevel=3)
        mult, null = classify_multiplicity(profile, alpha, check_h0=False)
    theta = coupling_direction(profile, alpha, mult, null)
    return SpectralPoint(
        alpha=float(alpha),
        multiplicity=mult,
        theta=theta,
        h1_residual=abs(characteristic_determinant(profile, alpha)),
        h1_scale=local_h1_scale(profile, alpha),
        window=(float(window[0]), float(window[1])),
    )


def nearest_resonance(
    profile: PotentialProfile,
    alpha: float,
    tol: float = 5e-3,
    search_radius: float = 0.5,
    grid_step: float = 1e-3,
) -> SpectralPoint:
    """Refine a user-typed intensity to the closest resonance.

    Raises NotResonant (carrying the nearest root, if any) when no resonance
    lies within ``tol``.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResonanceSearchWarning)
        pts = find_resonances(profile, alpha - search_radius, alpha + search_radius, grid_step)
    if not pts:
        # widen once so that the error message can still name a neighbour
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ResonanceSearchWarning)
            pts = find_resonances(profile, alpha - 20 * search_radius, alpha + 20 * search_radius,
                                  10 * grid_step)
        nearest = min(pts, key=lambda p: abs(p.alpha - alpha)) if pts else None
        raise NotResonant(
            f"alpha={alpha} is not resonant"
            + (f"; nearest resonance at {nearest.alpha:.10g}" if nearest else ""),
            nearest=nearest,
        )
    best = min(pts, key=lambda p: abs(p.alpha - alpha))
    if abs(best.alpha - alpha) > tol:
        raise NotResonant(
            f"alpha={alpha} is not resonant; nearest resonance at {best.alpha:.10g}",
            nearest=best,
        )
    return best


def spectral_point(profile: PotentialProfile, alpha: float) -> SpectralPoint:
    """Classify an already located root and attach its coupling direction."""
    return _make_point(profile, alpha, (alpha, alpha))
