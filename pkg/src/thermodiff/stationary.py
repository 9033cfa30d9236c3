"""No-flow stationary solutions and their certification.

A stationary state with vanishing material current satisfies

    (theta*rho)' + rho*V' = 0
    (theta*theta'*rho)' = 0

so rho = k/(theta*theta') for an integration constant k, and theta obeys
theta*theta'' - theta'*V' = 0. The module builds the closed-form families
(isothermal exponential atmosphere; the quadratic-temperature driven
example), inverts the relations in both directions, solves the two-point
problem for theta given V by shooting, and certifies every solution by
recomputing the currents and their divergences.

For these solutions theta*theta'*rho = k/... is constant, and the energy
current reduces to j_e = -2*lam*k uniformly: the driven example with k = 2
carries j_e = -4*lam while j_c = 0, a stationary state held away from
equilibrium by the baths.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import NoBracketError, SingularProfileError, SingularShotError
from .grid import Grid1D, divergence
from .model import (BoundarySpec, FieldState, ModelParams, PotentialSpec,
                    energy_current, material_current)

# shooting configuration
SHOOT_SLOPE_RANGE = (-50.0, 50.0)
SHOOT_SCAN_PANELS = 200
SHOOT_SUBSTEPS = 10           # integrator substeps per grid cell
SHOOT_MISMATCH_TOL = 1e-10


@dataclass(frozen=True)
class StationarityResidual:
    max_div_jc: float
    max_div_je: float
    max_jc: float


@dataclass(frozen=True)
class StationarySolution:
    """A certified no-flow solution: fields, potential, flux constant k,
    provenance tag, and the recorded residuals with their tolerances."""

    state: FieldState
    potential: PotentialSpec
    k: float
    provenance: str
    residuals: StationarityResidual
    tol_jc: float
    tol_div: float

    def __post_init__(self):
        r = self.residuals
        if r.max_jc > self.tol_jc or r.max_div_je > self.tol_div:
            raise ValueError(
                f"candidate {self.provenance!r} fails its stationarity "
                f"tolerances: {r}")


def _node_derivative(u, grid):
    """First derivative at the nodes: centred inside, one-sided 2nd order
    at the endpoints."""
    h = grid.h
    d = np.empty_like(u)
    d[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    d[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h)
    d[-1] = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h)
    return d


def _node_second_derivative(u, grid):
    h = grid.h
    d = np.empty_like(u)
    d[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
    d[0] = (2 * u[0] - 5 * u[1] + 4 * u[2] - u[3]) / h**2
    d[-1] = (2 * u[-1] - 5 * u[-2] + 4 * u[-3] - u[-4]) / h**2
    return d


def _certify(state, potential, k, provenance, lam):
    params = ModelParams(lam=lam, potential=potential,
                         bc=BoundarySpec(theta_left=state.theta[0],
                                         theta_right=state.theta[-1]))
    res = stationarity_residual_state(state, params)
    h = state.grid.h
    scale = (lam * float(np.max(state.theta)) ** 2 * float(np.max(state.rho))
             * (1.0 + float(np.max(np.abs(_node_derivative(
                 potential.values_at(state.grid), state.grid))))))
    return StationarySolution(
        state=state, potential=potential, k=k, provenance=provenance,
        residuals=res, tol_jc=10.0 * scale * h**2, tol_div=100.0 * scale * h**2)


def boltzmann_profile(g, theta0, total_mass, grid: Grid1D, lam=1.0):
    """Isothermal atmosphere in a linear potential V = g*x.

    theta = theta0 everywhere and rho = C*exp(-g*x/theta0), with C fixed
    so the trapezoid mass equals total_mass.
    """
    if theta0 <= 0 or total_mass <= 0:
        raise ValueError("theta0 and total_mass must be positive")
    x = grid.nodes
    if g == 0.0:
        rho = np.full(grid.n, total_mass)
    else:
        a = g / theta0
        # closed-form normalization against the continuum integral
        C = total_mass * a / (1.0 - math.exp(-a))
        rho = C * np.exp(-a * x)
        # rescale so the *discrete* mass matches exactly
        rho *= total_mass / grid.integrate(rho)
    theta = np.full(grid.n, float(theta0))
    state = FieldState(grid=grid, rho=rho, theta=theta)
    potential = PotentialSpec.linear(g)
    # theta' = 0 here, so the flux constant k = theta*theta'*rho vanishes
    return _certify(state, potential, 0.0, "boltzmann", lam)


def rho_from_theta(theta, k, grid: Grid1D):
    """Density rho = k/(theta*theta') of the no-flow relation.

    Requires theta > 0 with a single-signed, nonvanishing discrete
    derivative, and sign(k) = sign(theta') so the density is positive.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise ValueError("temperature must be positive")
    dtheta = _node_derivative(theta, grid)
    if np.any(dtheta == 0.0) or np.max(np.sign(dtheta)) != np.min(np.sign(dtheta)):
        raise SingularProfileError(
            "theta' vanishes or changes sign on the grid; the no-flow "
            "density is singular (equal bath temperatures force this)")
    if k == 0.0 or np.sign(k) != np.sign(dtheta[0]):
        raise ValueError("k must be nonzero with the sign of theta'")
    return k / (theta * dtheta)


def potential_from_theta(theta, grid: Grid1D):
    """Potential with V(0) = 0 making the given temperature stationary.

    Integrates V' = theta*theta''/theta' by trapezoid. Fails on profiles
    with vanishing or sign-changing theta'.
    """
    theta = np.asarray(theta, dtype=float)
    dtheta = _node_derivative(theta, grid)
    if np.any(dtheta == 0.0) or np.max(np.sign(dtheta)) != np.min(np.sign(dtheta)):
        raise SingularProfileError("theta' vanishes or changes sign on the grid")
    Vp = theta * _node_second_derivative(theta, grid) / dtheta
    V = np.concatenate(([0.0], np.cumsum(0.5 * grid.h * (Vp[:-1] + Vp[1:]))))
    return PotentialSpec.tabulated(V)


def _potential_slope_function(potential: PotentialSpec, grid: Grid1D):
    if potential.kind == "zero":
        return lambda x: 0.0
    if potential.kind == "linear":
        g = potential.g
        return lambda x: g
    if potential.kind == "tabulated":
        Vp = _node_derivative(potential.values_at(grid), grid)
        nodes = grid.nodes
        return lambda x: float(np.interp(x, nodes, Vp))
    raise ValueError("theta_from_potential needs a static potential")


def _shoot(theta0, slope, vp, grid):
    """RK4 integration of theta'' = theta'*V'/theta from x=0.

    Returns (theta at the grid nodes, success flag). Fails as soon as the
    trajectory hits a non-positive temperature.
    """
    m = SHOOT_SUBSTEPS
    hs = grid.h / m
    th = theta0
    dth = slope
    samples = np.empty(grid.n)
    samples[0] = th
    x = 0.0

    def f(x_, y0, y1):
        return y1, y1 * vp(x_) / y0

    for cell in range(grid.n - 1):
        for _ in range(m):
            if th <= 0.0:
                return samples, False
            a0, a1 = f(x, th, dth)
            b0, b1 = f(x + hs / 2, th + hs / 2 * a0, dth + hs / 2 * a1)
            c0, c1 = f(x + hs / 2, th + hs / 2 * b0, dth + hs / 2 * b1)
            d0, d1 = f(x + hs, th + hs * c0, dth + hs * c1)
            th += hs / 6 * (a0 + 2 * b0 + 2 * c0 + d0)
            dth += hs / 6 * (a1 + 2 * b1 + 2 * c1 + d1)
            x += hs
        if th <= 0.0:
            return samples, False
        samples[cell + 1] = th
    return samples, True


def theta_from_potential(potential: PotentialSpec, theta0, theta1, grid: Grid1D):
    """Temperature profile solving theta*theta'' = theta'*V' with
    theta(0) = theta0 and theta(1) = theta1, by shooting on theta'(0).

    Equal bath temperatures admit only the constant profile (any potential
    solves the equation identically there), which is returned directly.
    """
    if theta0 <= 0 or theta1 <= 0:
        raise ValueError("bath temperatures must be positive")
    if theta0 == theta1:
        return np.full(grid.n, float(theta0))
    vp = _potential_slope_function(potential, grid)

    def mismatch(slope):
        samples, okay = _shoot(theta0, slope, vp, grid)
        if not okay:
            return None, samples
        return samples[-1] - theta1, samples

    lo, hi = SHOOT_SLOPE_RANGE
    scan = np.linspace(lo, hi, SHOOT_SCAN_PANELS + 1)
    prev_s = prev_m = None
    bracket = None
    for s in scan:
        mval, _ = mismatch(s)
        if mval is not None and prev_m is not None:
            if mval == 0.0 or prev_m * mval < 0:
                bracket = (prev_s, s)
                break
        if mval is not None:
            prev_s, prev_m = s, mval
    if bracket is None:
        raise NoBracketError(
            f"no sign change of the terminal mismatch for theta'(0) in "
            f"[{lo}, {hi}]")

    a, b = bracket
    fa, _ = mismatch(a)
    best = None
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm, samples = mismatch(mid)
        if fm is None:
            raise SingularShotError(
                f"shooting trajectory hit theta <= 0 at slope {mid:.6g}")
        best = samples
        if abs(fm) < SHOOT_MISMATCH_TOL:
            break
        if fa * fm <= 0:
            b = mid
        else:
            a, fa = mid, fm
        if abs(b - a) < 1e-15 * max(1.0, abs(b)):
            break
    return best


def driven_example(lam, grid: Grid1D):
    """The quadratic-temperature stationary state held between unequal baths.

    theta = (x+1)^2, rho = (x+1)^(-3), V = x + x^2/2, flux constant k = 2.
    The material current vanishes while the energy current is uniformly
    -4*lam, entering at the hot wall and leaving at the cold one.
    """
    x = grid.nodes
    theta = (x + 1.0) ** 2
    rho = (x + 1.0) ** -3
    V = x + 0.5 * x**2
    state = FieldState(grid=grid, rho=rho, theta=theta)
    return _certify(state, PotentialSpec.tabulated(V), 2.0, "driven-example", lam)


def from_theta(theta, k, grid: Grid1D, lam=1.0):
    """Build and certify the no-flow solution generated by a temperature
    profile: rho from the flux relation, V from the stationarity ODE."""
    rho = rho_from_theta(theta, k, grid)
    potential = potential_from_theta(theta, grid)
    state = FieldState(grid=grid, rho=rho, theta=theta)
    return _certify(state, potential, float(k), "theta-prescribed", lam)


def stationarity_residual_state(state: FieldState, params: ModelParams):
    """Sup norms (max|div j_c|, max|div j_e|, max|j_c|) of a candidate state."""
    grid = state.grid
    jc = material_current(state, params)
    je = energy_current(state, params, jc)
    return StationarityResidual(
        max_div_jc=float(np.max(np.abs(divergence(jc, grid)))),
        max_div_je=float(np.max(np.abs(divergence(je, grid)))),
        max_jc=float(np.max(np.abs(jc))))


def stationarity_residual(sol: StationarySolution, params: ModelParams):
    """Recompute the certification residuals of a solution under params."""
    res = stationarity_residual_state(sol.state, params)
    return res.max_div_jc, res.max_div_je, res.max_jc
