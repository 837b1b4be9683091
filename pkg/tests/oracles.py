"""Independent high-precision references for the builtin rectangle profiles.

On the +7/-7 rectangle (+7 next to the center) an eigenfunction of the
zero-energy Neumann problem with alpha > 0 reads cosh(r*s) on the first half
and continues as a cosine/sine on the second, with r = sqrt(7*alpha) and
x = r/2.  The tip slope vanishes iff tan x = tanh x.  With a Dirichlet
condition at the center (the antisymmetric pairs of the symmetric profile)
the tip condition becomes tan x * tanh x = 1.  For alpha < 0 the roles of the
halves swap, and the Dirichlet-center condition reads tan x * tanh x = -1.
All roots are computed with mpmath at 30 digits, independently of scipy.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np

mp.mp.dps = 30


def _roots(f, x_max, n_grid=20000):
    xs = np.linspace(1e-6, x_max, n_grid)
    vals = [float(f(mp.mpf(x))) for x in xs]
    out = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if fa == 0 or fa * fb < 0:
            out.append(mp.findroot(f, (mp.mpf(a), mp.mpf(b)), solver="anderson"))
    return out


def _alpha(x):
    return float((2 * x) ** 2 / 7)


def _x_max(alpha_max):
    return float(mp.sqrt(7 * alpha_max) / 2)


def neumann_roots(alpha_max: float) -> list[float]:
    """Positive alpha with tan x = tanh x (Neumann at both ends of one edge)."""
    f = lambda x: mp.sin(x) * mp.cosh(x) - mp.cos(x) * mp.sinh(x)
    return [_alpha(x) for x in _roots(f, _x_max(alpha_max))]


def dirichlet_center_roots(alpha_max: float, sign: int = 1) -> list[float]:
    """alpha with tan x * tanh x = sign; negative alpha for sign = -1."""
    f = lambda x: mp.sin(x) * mp.sinh(x) - sign * mp.cos(x) * mp.cosh(x)
    return [sign * _alpha(x) for x in _roots(f, _x_max(alpha_max))]


def single_rect_theta(alpha: float) -> np.ndarray:
    """Unit tip-value vector (g(a1), g(a2), g(a3)) for a positive paper-rect root."""
    x = mp.sqrt(7 * mp.mpf(alpha)) / 2
    tip = mp.cosh(x) * mp.cos(x) + mp.sinh(x) * mp.sin(x)
    v = np.array([float(tip), 1.0, 1.0])
    return v / np.linalg.norm(v)


# Frozen at 15 significant digits from the functions above; the test suite
# recomputes them to guard against drift in the oracle itself.
NEUMANN_ROOTS = (8.81040326684575, 28.5513497324573, 59.5701122622065)
DIRICHLET_CENTER_POS = (0.502287895500022, 8.81388777336416, 28.5513614452576, 59.5701122938008)
DIRICHLET_CENTER_NEG = (-3.14778450923811, -17.2717022931865, -42.6507901382472, -79.3093210793947)

# Published 4-decimal values: coupling directions at the first three positive
# roots, and the limit scattering matrices there.
PUBLISHED_COUPLING = (
    (8.8104, (-0.9992, 0.0279, 0.0279)),
    (28.5513, (0.9999, 0.0012, 0.0012)),
    (59.5701, (-0.9999, 0.997e-4, 0.997e-4)),
)
PUBLISHED_S = (
    ((0.9968, -0.0558, -0.0558), (-0.0558, -0.9984, 0.0016), (-0.0558, 0.0016, -0.9984)),
    ((0.9996, 0.0024, 0.0024), (0.0024, -0.9999, 0.288e-5), (0.0024, 0.288e-5, -0.9999)),
    ((0.9996, -0.0002, -0.0002), (-0.0002, -0.9999, 0.199e-7), (-0.0002, 0.199e-7, -0.9999)),
)
KIRCHHOFF = np.array([[-1.0, 2.0, 2.0], [2.0, -1.0, 2.0], [2.0, 2.0, -1.0]]) / 3.0
