import numpy as np
import pytest

from thermodiff import BoundarySpec, FieldState, Grid1D, ModelParams, PotentialSpec


@pytest.fixture
def grid():
    return Grid1D(101)


@pytest.fixture
def grid_small():
    return Grid1D(33)


def smooth_state(grid, seed=0, rho_base=1.0, theta_base=1.0, amp=0.2, t=0.0):
    """Random smooth positive fields from a few low Fourier modes."""
    rng = np.random.default_rng(seed)
    x = grid.nodes
    a = rng.uniform(-1, 1, 3)
    b = rng.uniform(-1, 1, 3)
    rho = rho_base * (1.0 + amp * (a[0] * np.cos(np.pi * x)
                                   + a[1] * np.sin(2 * np.pi * x)
                                   + a[2] * np.cos(3 * np.pi * x)))
    theta = theta_base * (1.0 + amp * (b[0] * np.cos(np.pi * x)
                                       + b[1] * np.sin(np.pi * x)
                                       + b[2] * np.cos(2 * np.pi * x)))
    return FieldState(grid=grid, rho=rho, theta=theta, t=t)


def rare_gas(lam=1.0, potential=None, **bc):
    return ModelParams(lam=lam, potential=potential or PotentialSpec.zero(),
                       bc=BoundarySpec(**bc) if bc else BoundarySpec())
