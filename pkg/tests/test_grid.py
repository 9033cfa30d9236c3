import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermodiff import Grid1D, divergence, face_values, gradient


def test_grid_geometry():
    g = Grid1D(11)
    assert g.h == pytest.approx(0.1)
    assert g.nodes[0] == 0.0
    assert g.nodes[-1] == 1.0
    assert np.all(np.diff(g.nodes) > 0)
    assert g.h * (g.n - 1) == pytest.approx(1.0, abs=1e-15)
    assert g.faces.shape == (12,)
    assert g.weights.sum() == pytest.approx(1.0, abs=1e-15)


def test_grid_too_small():
    with pytest.raises(ValueError):
        Grid1D(4)


def test_gradient_of_constant_is_zero(grid):
    assert np.all(gradient(np.full(grid.n, 3.7), grid) == 0.0)


def test_gradient_of_linear_is_exact(grid):
    g = gradient(grid.nodes, grid)
    np.testing.assert_allclose(g, 1.0, rtol=0, atol=5e-13)


def test_gradient_exact_for_cubics(grid):
    x = grid.nodes
    u = 2.0 + x - 3.0 * x**2 + 0.5 * x**3
    xf = grid.faces
    np.testing.assert_allclose(gradient(u, grid), 1.0 - 6.0 * xf + 1.5 * xf**2,
                               atol=2e-12)
    np.testing.assert_allclose(face_values(u, grid),
                               2.0 + xf - 3.0 * xf**2 + 0.5 * xf**3, atol=2e-13)


def test_gradient_order_on_smooth_field():
    errs = []
    for n in (101, 201, 401):
        g = Grid1D(n)
        u = np.exp(np.sin(2 * np.pi * g.nodes))
        exact = 2 * np.pi * np.cos(2 * np.pi * g.faces) * np.exp(
            np.sin(2 * np.pi * g.faces))
        errs.append(np.max(np.abs(gradient(u, g) - exact)))
    # one-sided faces dominate at third order
    assert np.log2(errs[0] / errs[1]) > 2.5
    assert np.log2(errs[1] / errs[2]) > 2.5


def test_divergence_of_constant_flux_is_zero(grid):
    assert np.all(divergence(np.full(grid.n + 1, -2.3), grid) == 0.0)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_divergence_telescopes_exactly(seed):
    grid = Grid1D(33)
    flux = np.random.default_rng(seed).standard_normal(grid.n + 1)
    total = grid.weights @ divergence(flux, grid)
    assert total == pytest.approx(flux[-1] - flux[0], abs=1e-13)


def test_integrate_trapezoid(grid):
    assert grid.integrate(np.ones(grid.n)) == pytest.approx(1.0, abs=1e-15)
    assert grid.integrate(grid.nodes) == pytest.approx(0.5, abs=1e-14)
    # faces version integrates the non-uniform end panels correctly
    assert grid.integrate_faces(np.ones(grid.n + 1)) == pytest.approx(1.0,
                                                                      abs=1e-15)
    assert grid.integrate_faces(grid.faces) == pytest.approx(0.5, abs=1e-14)


def test_length_validation(grid):
    with pytest.raises(ValueError):
        gradient(np.ones(grid.n + 1), grid)
    with pytest.raises(ValueError):
        divergence(np.ones(grid.n), grid)
