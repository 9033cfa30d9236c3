import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermodiff import (BoundarySpec, DomainError, FieldState, Grid1D,
                        ModelParams, NonVanishingFlowWarning, PotentialSpec,
                        boundary_entropy_rates, divergence, driven_example,
                        energy_current, energy_density, entropy,
                        entropy_production_rate, gradient, material_current)
from conftest import rare_gas, smooth_state


def uniform_state(grid, rho=1.0, theta=2.0):
    return FieldState(grid=grid, rho=np.full(grid.n, rho),
                      theta=np.full(grid.n, theta))


class TestEnergyDensity:
    def test_constant_fields(self, grid):
        E = energy_density(uniform_state(grid), rare_gas())
        np.testing.assert_array_equal(E, 2.0)

    def test_linear_potential(self, grid):
        params = rare_gas(potential=PotentialSpec.linear(1.5))
        state = uniform_state(grid, rho=1.0, theta=0.7)
        np.testing.assert_allclose(energy_density(state, params),
                                   0.7 + 1.5 * grid.nodes, atol=1e-15)

    def test_boltzmann_value_at_origin(self, grid):
        # rho = exp(-x), theta = 1, V = x: E(0) = 1*(1+0) = 1
        state = FieldState(grid=grid, rho=np.exp(-grid.nodes),
                           theta=np.ones(grid.n))
        params = rare_gas(potential=PotentialSpec.linear(1.0))
        E = energy_density(state, params)
        assert E[0] == pytest.approx(1.0, abs=1e-15)


class TestMaterialCurrent:
    def test_uniform_equilibrium_flux_free(self, grid):
        jc = material_current(uniform_state(grid), rare_gas())
        np.testing.assert_array_equal(jc, 0.0)

    def test_boundary_faces_always_zero(self, grid):
        state = smooth_state(grid, seed=3)
        jc = material_current(state, rare_gas(lam=2.0))
        assert jc[0] == 0.0 and jc[-1] == 0.0

    def test_boltzmann_profile_is_flux_free(self):
        g, th0 = 1.0, 1.0
        errs = []
        for n in (101, 201):
            grid = Grid1D(n)
            state = FieldState(grid=grid, rho=np.exp(-g * grid.nodes / th0),
                               theta=np.full(grid.n, th0))
            params = rare_gas(potential=PotentialSpec.linear(g))
            errs.append(np.max(np.abs(material_current(state, params))))
        assert errs[0] < 1e-6
        assert np.log2(errs[0] / errs[1]) > 1.8  # at least second order

    def test_full_model_approaches_rare_gas(self, grid):
        state = smooth_state(grid, seed=7)
        jc_rare = material_current(state, rare_gas(lam=1.3))
        prev = None
        for rho_max in (1e2, 1e4, 1e6):
            params = ModelParams(lam=1.3, rho_max=rho_max,
                                 potential=PotentialSpec.zero(),
                                 bc=BoundarySpec())
            err = np.max(np.abs(material_current(state, params) - jc_rare))
            assert err < 5.0 / rho_max
            if prev is not None:
                assert err < prev / 50.0  # rate 1/rho_max
            prev = err


class TestEnergyCurrent:
    def test_uniform_equilibrium(self, grid):
        state = uniform_state(grid)
        params = rare_gas()
        je = energy_current(state, params, material_current(state, params))
        np.testing.assert_array_equal(je, 0.0)

    def test_driven_example_constant_flux(self):
        lam = 1.3
        errs = []
        for n in (201, 401):
            sol = driven_example(lam, Grid1D(n))
            params = rare_gas(lam=lam, potential=None)
            params = ModelParams(lam=lam, potential=sol.potential,
                                 bc=BoundarySpec(theta_left=1.0, theta_right=4.0))
            jc = material_current(sol.state, params)
            je = energy_current(sol.state, params, jc)
            errs.append(np.max(np.abs(je + 4 * lam)) / (4 * lam))
        assert errs[-1] < 1e-5
        assert np.log2(errs[0] / errs[1]) > 1.8

    def test_gradient_identity_rare_gas_no_potential(self, grid):
        # with V = 0, je = -2*lam*grad(theta*E) pointwise
        lam = 0.7
        errs = []
        for n in (101, 201):
            g = Grid1D(n)
            state = smooth_state(g, seed=11)
            params = rare_gas(lam=lam)
            je = energy_current(state, params, material_current(state, params))
            ident = -2 * lam * gradient(state.theta**2 * state.rho, g)
            # skip the wall faces: j_c is pinned to zero there by the walls
            errs.append(np.max(np.abs(je - ident)[1:-1]))
        assert np.log2(errs[0] / errs[1]) > 1.8


class TestEntropy:
    def test_zero_at_unit_fields(self, grid):
        assert entropy(uniform_state(grid, 1.0, 1.0), rare_gas()) == \
            pytest.approx(0.0, abs=1e-15)

    def test_unit_density_theta_e(self, grid):
        state = uniform_state(grid, 1.0, math.e)
        assert entropy(state, rare_gas()) == pytest.approx(1.0, abs=1e-12)

    def test_full_model_taylor_gap(self, grid):
        rho0, rho_max = 1.0, 1000.0
        state = uniform_state(grid, rho0, 1.0)
        s_rare = entropy(state, rare_gas())
        s_full = entropy(state, ModelParams(lam=1.0, rho_max=rho_max,
                                            potential=PotentialSpec.zero(),
                                            bc=BoundarySpec()))
        # S_full = S_rare + mass + O((rho0/rho_max)^2 * rho_max)
        gap = abs(s_full - s_rare - rho0)
        assert gap <= (rho0 / rho_max) ** 2 * rho_max

    def test_ceiling_violation_raises(self, grid):
        state = uniform_state(grid, rho=2.0)
        params = ModelParams(lam=1.0, rho_max=1.5,
                             potential=PotentialSpec.zero(), bc=BoundarySpec())
        with pytest.raises(DomainError):
            entropy(state, params)

    def test_vacuum_nodes_use_the_limit(self, grid):
        rho = np.zeros(grid.n)
        rho[grid.n // 2:] = 1.0
        state = FieldState(grid=grid, rho=rho, theta=np.ones(grid.n))
        assert np.isfinite(entropy(state, rare_gas()))

    def test_quadrature_second_order(self):
        vals = {}
        for n in (101, 201, 401):
            g = Grid1D(n)
            state = smooth_state(g, seed=5)
            vals[n] = entropy(state, rare_gas())
        # Richardson: the (h -> h/2) differences shrink by 4
        d1 = abs(vals[101] - vals[201])
        d2 = abs(vals[201] - vals[401])
        assert d1 / d2 == pytest.approx(4.0, rel=0.3)


class TestEntropyProduction:
    def test_equilibrium_is_zero(self, grid):
        state = uniform_state(grid, rho=0.8, theta=1.7)
        assert entropy_production_rate(state, rare_gas()) == pytest.approx(
            0.0, abs=1e-14)

    def test_driven_example_three_lambda(self):
        lam = 2.5
        for n, tol in ((201, 2e-4), (401, 5e-5)):
            sol = driven_example(lam, Grid1D(n))
            params = ModelParams(lam=lam, potential=sol.potential,
                                 bc=BoundarySpec(theta_left=1.0, theta_right=4.0))
            prod = entropy_production_rate(sol.state, params)
            assert prod == pytest.approx(3 * lam, rel=tol)

    def test_flow_warning_fires_away_from_stationarity(self, grid):
        state = smooth_state(grid, seed=1)
        with pytest.warns(NonVanishingFlowWarning):
            entropy_production_rate(state, rare_gas())

    def test_boundary_rates_driven_example(self):
        lam = 1.0
        sol = driven_example(lam, Grid1D(401))
        params = ModelParams(lam=lam, potential=sol.potential,
                             bc=BoundarySpec(theta_left=1.0, theta_right=4.0))
        rates = boundary_entropy_rates(sol.state, params)
        # heat enters at the hot wall (x=1, theta=4) at rate lambda and
        # leaves at the cold wall (x=0) at rate 4*lambda
        assert abs(rates.right) == pytest.approx(lam, rel=1e-4)
        assert abs(rates.left) == pytest.approx(4 * lam, rel=1e-4)
        production = entropy_production_rate(sol.state, params)
        assert production == pytest.approx(abs(rates.left) - abs(rates.right),
                                           rel=1e-3)


class TestValidation:
    def test_negative_density_rejected(self, grid):
        with pytest.raises(ValueError):
            FieldState(grid=grid, rho=-np.ones(grid.n), theta=np.ones(grid.n))

    def test_nonpositive_temperature_rejected(self, grid):
        with pytest.raises(ValueError):
            FieldState(grid=grid, rho=np.ones(grid.n), theta=np.zeros(grid.n))

    def test_bad_lambda_rejected(self):
        with pytest.raises(ValueError):
            ModelParams(lam=0.0)

    def test_fields_are_frozen(self, grid):
        state = uniform_state(grid)
        with pytest.raises(ValueError):
            state.rho[0] = 2.0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), lam=st.floats(0.1, 10.0))
def test_no_flux_walls_property(seed, lam):
    grid = Grid1D(33)
    state = smooth_state(grid, seed=seed)
    jc = material_current(state, rare_gas(lam=lam))
    assert jc[0] == 0.0 and jc[-1] == 0.0
    # flux-form mass balance telescopes to zero exactly
    assert grid.weights @ divergence(jc, grid) == pytest.approx(0.0, abs=1e-12)
