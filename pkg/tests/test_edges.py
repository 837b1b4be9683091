import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltastar.edges import (
    SERIES_THRESHOLD,
    basis_boundary_data,
    boundary_data_batch,
    edge_transfer,
    segment_transfer,
)
from deltastar.graph import Constant, EdgePotential, PotentialProfile, Sampled, Segment, builtin_profile

RECT = builtin_profile("paper-rect")
SYMMETRIC = builtin_profile("symmetric-rect")

alphas = st.floats(-80, 80, allow_nan=False)
kappas = st.floats(0, 3, allow_nan=False)


def test_linear_solutions_at_zero_intensity():
    data = basis_boundary_data(RECT, 0.0, 0.0)
    np.testing.assert_array_equal(data.val, [[0, 1, 1], [1, 0, 1], [-1, -1, 1]])
    np.testing.assert_array_equal(data.der, [[0, 1, 0], [1, 0, 0], [-1, -1, 0]])


def test_free_edge_is_plane_wave_propagator():
    edge = EdgePotential((Segment(1.0, Constant(0.0)),))
    k = 0.8
    expected = [[np.cos(k), np.sin(k) / k], [-k * np.sin(k), np.cos(k)]]
    np.testing.assert_allclose(edge_transfer(edge, 3.0, k), expected, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(alphas, kappas)
def test_transfer_has_unit_determinant(alpha, kappa):
    for edge in SYMMETRIC.edges + RECT.edges:
        t = edge_transfer(edge, alpha, kappa)
        assert abs(np.linalg.det(t) - 1) <= 1e-10 * max(1.0, np.abs(t).max() ** 2)


@settings(max_examples=30, deadline=None)
@given(st.floats(-30, 30, allow_nan=False), st.floats(0, 2))
def test_closed_form_agrees_with_rk4(alpha, kappa):
    seg = Segment(0.5, Constant(7.0))
    exact = segment_transfer(seg, alpha, kappa)
    rk = segment_transfer(seg, alpha, kappa, method="rk4")
    assert np.abs(exact - rk).max() <= 1e-8 * max(1.0, np.abs(exact).max())


@pytest.mark.parametrize("factor", [0.5, 0.999, 1.001, 2.0, -0.999, -1.001])
def test_series_branch_is_continuous(factor):
    # mu * L**2 straddling the series threshold
    seg = Segment(1.0, Constant(1.0))
    mu = factor * SERIES_THRESHOLD
    series_side = segment_transfer(seg, mu, 0.0)
    exact = np.array([[np.cosh(np.sqrt(mu + 0j)), np.sinh(np.sqrt(mu + 0j)) / np.sqrt(mu + 0j)],
                      [np.sqrt(mu + 0j) * np.sinh(np.sqrt(mu + 0j)), np.cosh(np.sqrt(mu + 0j))]]).real
    np.testing.assert_allclose(series_side, exact, rtol=1e-15, atol=1e-15)


def test_sampled_constant_matches_closed_form():
    flat = EdgePotential((Segment(0.5, Sampled((0.0, 0.25, 0.5), (7.0, 7.0, 7.0))),
                          Segment(0.5, Constant(-7.0))))
    profile = PotentialProfile((flat,) + RECT.edges[1:])
    for alpha in (-20.0, 3.0, 8.8):
        a = basis_boundary_data(profile, alpha, 0.4)
        b = basis_boundary_data(RECT, alpha, 0.4)
        np.testing.assert_allclose(a.val, b.val, rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(a.der, b.der, rtol=1e-9, atol=1e-9)


def test_batch_matches_scalar():
    grid = np.array([-5.0, 0.0, 2.5, 40.0])
    val, der = boundary_data_batch(SYMMETRIC, grid, 0.3)
    for i, a in enumerate(grid):
        data = basis_boundary_data(SYMMETRIC, a, 0.3)
        np.testing.assert_array_equal(val[i], data.val)
        np.testing.assert_array_equal(der[i], data.der)


@settings(max_examples=60, deadline=None)
@given(alphas, kappas, st.sampled_from([RECT, SYMMETRIC]))
def test_lagrange_identities(alpha, kappa, profile):
    data = basis_boundary_data(profile, alpha, kappa)
    assert np.abs(data.lagrange_defects()).max() <= 1e-9 * data.scale()
