"""Physical fields, transport currents, and thermodynamic diagnostics.

The fluid is described by a particle density rho and a temperature theta
on [0, 1] (heat capacity per particle is one), moving in an external
potential V. The energy density is E = rho*(theta + V). Two model
variants share the code path: the full model carries a crowding factor
(1 - rho/rho_max) on the drift terms, and the rare-gas variant is the
rho_max -> infinity limit.

Cross effects are built into the currents: a temperature gradient drives
a material flow even at uniform density (the rho*grad(theta) term in the
material current), and a material current carries heat even at uniform
temperature (the 2*theta*j_c term in the energy current).
"""

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import DomainError, NonVanishingFlowWarning
from .grid import Grid1D

# below this density the integrand rho*log(rho) is extended by its limit 0
RHO_LOG_FLOOR = 1e-30

# entropy production assumes a no-flow state; warn above this fraction
FLOW_WARN_FRACTION = 1e-6


@dataclass(frozen=True)
class PotentialSpec:
    """External potential. One of four kinds:

    - "zero"
    - "linear": V = g*x
    - "tabulated": nodal values on the grid
    - "time-dependent": callable (x_array, t) -> (V_array, dVdt_array)
    """

    kind: str
    g: float = 0.0
    values: Optional[np.ndarray] = None
    func: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "tabulated", "time-dependent"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "tabulated":
            if self.values is None:
                raise ValueError("tabulated potential needs values")
            v = np.ascontiguousarray(self.values, dtype=float)
            v.setflags(write=False)
            object.__setattr__(self, "values", v)
        if self.kind == "time-dependent" and self.func is None:
            raise ValueError("time-dependent potential needs a callable")

    @classmethod
    def zero(cls):
        return cls(kind="zero")

    @classmethod
    def linear(cls, g):
        return cls(kind="linear", g=float(g))

    @classmethod
    def tabulated(cls, values):
        return cls(kind="tabulated", values=values)

    @classmethod
    def time_dependent(cls, func):
        return cls(kind="time-dependent", func=func)

    @property
    def is_static(self):
        return self.kind != "time-dependent"

    def values_at(self, grid: Grid1D, t=0.0):
        """Nodal potential values at time t."""
        if self.kind == "zero":
            return np.zeros(grid.n)
        if self.kind == "linear":
            return self.g * grid.nodes
        if self.kind == "tabulated":
            if self.values.shape != (grid.n,):
                raise ValueError("tabulated potential length does not match grid")
            return np.array(self.values)
        V, _ = self.func(grid.nodes, t)
        return np.ascontiguousarray(V, dtype=float)

    def rate_at(self, grid: Grid1D, t=0.0):
        """Nodal dV/dt at time t (zero for static kinds)."""
        if self.kind != "time-dependent":
            return np.zeros(grid.n)
        _, dVdt = self.func(grid.nodes, t)
        return np.ascontiguousarray(dVdt, dtype=float)


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary conditions. The material current vanishes at both walls in
    every mode. thermal_mode selects the energy treatment:

    - "dirichlet": endpoint temperatures pinned to theta_left/theta_right
      (heat bath); the boundary energy flux is whatever the interior
      scheme produces.
    - "isolated": no energy crosses the walls either; theta_left/right
      are ignored.
    """

    theta_left: float = 1.0
    theta_right: float = 1.0
    thermal_mode: str = "dirichlet"

    def __post_init__(self):
        if self.thermal_mode not in ("dirichlet", "isolated"):
            raise ValueError(f"unknown thermal mode {self.thermal_mode!r}")
        if self.thermal_mode == "dirichlet":
            if self.theta_left <= 0 or self.theta_right <= 0:
                raise ValueError("bath temperatures must be positive")

    @property
    def isolated(self):
        return self.thermal_mode == "isolated"


@dataclass(frozen=True)
class ModelParams:
    """Transport coefficient, optional ceiling density, potential, BCs."""

    lam: float
    rho_max: Optional[float] = None
    potential: PotentialSpec = field(default_factory=PotentialSpec.zero)
    bc: BoundarySpec = field(default_factory=BoundarySpec)

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("transport coefficient must be positive")
        if self.rho_max is not None and self.rho_max <= 0:
            raise ValueError("ceiling density must be positive")

    @property
    def is_full_model(self):
        return self.rho_max is not None

    @property
    def inv_rho_max(self):
        return 0.0 if self.rho_max is None else 1.0 / self.rho_max


@dataclass(frozen=True)
class FieldState:
    """Grid-sampled (rho, theta) pair at time t."""

    grid: Grid1D
    rho: np.ndarray
    theta: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        rho = np.ascontiguousarray(self.rho, dtype=float)
        theta = np.ascontiguousarray(self.theta, dtype=float)
        if rho.shape != (self.grid.n,) or theta.shape != (self.grid.n,):
            raise ValueError("field arrays must match the grid")
        if np.any(rho < 0):
            raise ValueError("density must be nonnegative")
        if np.any(theta <= 0):
            raise ValueError("temperature must be positive")
        rho.setflags(write=False)
        theta.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "theta", theta)


def energy_density(state: FieldState, params: ModelParams):
    """Pointwise energy density rho*(theta + V)."""
    V = params.potential.values_at(state.grid, state.t)
    return state.rho * (state.theta + V)


def _face_currents(state, params):
    """Both currents on the faces, before any boundary zeroing."""
    n = state.grid.n
    V = params.potential.values_at(state.grid, state.t)
    jc = np.empty(n + 1)
    je = np.empty(n + 1)
    _kernels.currents(state.rho, state.theta, np.ascontiguousarray(V),
                      params.lam, params.inv_rho_max, state.grid.h, jc, je)
    return jc, je


def material_current(state: FieldState, params: ModelParams):
    """Material current on the faces, with the wall faces set to zero.

    The full model includes the crowding factor (1 - rho/rho_max) on the
    drift term; without rho_max the rare-gas form is used.
    """
    jc, _ = _face_currents(state, params)
    jc[0] = 0.0
    jc[-1] = 0.0
    return jc


def energy_current(state: FieldState, params: ModelParams, j_c):
    """Energy current on the faces, consistent with the given material flux.

    je = 2*(theta*j_c - lam*rho*(1 - rho/rho_max)*theta*grad theta) + V*j_c,
    evaluated with face-interpolated fields. Whether the wall faces carry
    flux is inherited from the j_c argument (they contribute through the
    theta*j_c and V*j_c terms only).
    """
    grid = state.grid
    j_c = np.asarray(j_c, dtype=float)
    if j_c.shape != (grid.n + 1,):
        raise ValueError("material flux must be a face array")
    V = params.potential.values_at(grid, state.t)
    n = grid.n
    rv = np.empty(n + 1); rg = np.empty(n + 1)
    tv = np.empty(n + 1); tg = np.empty(n + 1)
    Vv = np.empty(n + 1); Vg = np.empty(n + 1)
    _kernels.face_fields(state.rho, grid.h, rv, rg)
    _kernels.face_fields(state.theta, grid.h, tv, tg)
    _kernels.face_fields(np.ascontiguousarray(V), grid.h, Vv, Vg)
    crowd = rv * (1.0 - rv * params.inv_rho_max)
    return 2.0 * (tv * j_c - params.lam * crowd * tv * tg) + Vv * j_c


def entropy(state: FieldState, params: ModelParams):
    """Entropy functional (trapezoid quadrature).

    Rare gas: S = int(-rho*log rho + rho*log theta).
    Full model adds -(rho_max - rho)*log(1 - rho/rho_max); requires
    rho < rho_max everywhere.
    """
    full = params.is_full_model
    if full and np.any(state.rho >= params.rho_max):
        raise DomainError("density reaches the ceiling; entropy undefined")
    rho_max = params.rho_max if full else 0.0
    return float(_kernels.entropy_value(
        state.rho, state.theta, state.grid.weights,
        params.inv_rho_max, rho_max, full))


def entropy_production_rate(state: FieldState, params: ModelParams):
    """Bulk entropy production int j_e * grad(1/theta) dx.

    Only the energy-force term is evaluated, which is the complete Onsager
    form in a no-flow state (j_c = 0). A NonVanishingFlowWarning is issued
    when max|j_c| exceeds 1e-6 * lam * max|theta|, since the omitted
    material term may then contribute.
    """
    grid = state.grid
    jc, je = _face_currents(state, params)
    jc[0] = 0.0
    jc[-1] = 0.0
    flow = np.max(np.abs(jc))
    if flow > FLOW_WARN_FRACTION * params.lam * np.max(np.abs(state.theta)):
        warnings.warn(
            f"material current max|j_c|={flow:.3e} is not negligible; the "
            "production integral omits the material-force term",
            NonVanishingFlowWarning, stacklevel=2)
    inv_theta_grad = np.empty(grid.n + 1)
    vals = np.empty(grid.n + 1)
    _kernels.face_fields(np.ascontiguousarray(1.0 / state.theta), grid.h,
                         vals, inv_theta_grad)
    return grid.integrate_faces(je * inv_theta_grad)


@dataclass(frozen=True)
class BoundaryEntropyRates:
    """Signed entropy flux j_e/theta through each wall (positive = rightward)."""

    left: float
    right: float


def boundary_entropy_rates(state: FieldState, params: ModelParams):
    """Entropy carried by the energy current at the walls, j_e/theta there."""
    _, je = _face_currents(state, params)
    return BoundaryEntropyRates(
        left=float(je[0] / state.theta[0]),
        right=float(je[-1] / state.theta[-1]),
    )
