"""Time integration of the coupled conservation laws.

The evolved pair is (rho, E) in flux form, so the discrete totals of both
are conserved exactly whenever the corresponding boundary fluxes vanish;
theta = E/rho - V is recovered each stage. Stepping uses an embedded
Bogacki-Shampine 3(2) pair with error control. Steps are sized by the
error estimate, which at these parabolic scales hovers at the explicit
stability limit dt ~ h^2 / (2*lam*max(theta)*(1+sqrt(1/2))).

Dirichlet mode re-imposes the bath temperatures by overwriting the
endpoint energy after every stage. Positivity is never clipped: a state
that cannot be kept positive by shrinking the step raises PositivityError.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import NonVanishingFlowWarning, PositivityError, StiffnessError
from .model import FieldState, ModelParams, entropy, entropy_production_rate

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class StepControl:
    """Step-size policy and output schedule for evolve."""

    t_end: float
    dt_initial: Optional[float] = None  # None: derived from the diffusion scale
    dt_max: float = np.inf
    dt_min: float = 1e-12
    safety: float = 0.9
    output_times: Optional[Sequence[float]] = None  # None: [t_end] only
    max_steps: int = 1_000_000_000
    rtol: float = 1e-8
    atol: float = 1e-10

    def __post_init__(self):
        if self.t_end <= 0 or self.safety <= 0 or self.dt_min <= 0:
            raise ValueError("step control parameters must be positive")
        if self.dt_initial is not None and self.dt_initial <= 0:
            raise ValueError("dt_initial must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")

    def schedule(self, t0):
        times = self.output_times
        if times is None:
            times = [self.t_end]
        times = np.asarray(sorted(float(t) for t in times))
        if times.size == 0:
            raise ValueError("output schedule is empty")
        if times[0] < t0 - 1e-14 or times[-1] > self.t_end + 1e-14:
            raise ValueError("output times must lie within [t0, t_end]")
        return times


@dataclass(frozen=True)
class SnapshotDiagnostics:
    t: float
    mass: float
    energy: float
    entropy: float
    entropy_production: float
    max_boundary_jc: float


@dataclass
class Trajectory:
    """Snapshots at the requested output times plus per-run statistics."""

    snapshots: List[FieldState]
    diagnostics: List[SnapshotDiagnostics]
    n_accepted: int
    n_rejected: int
    min_entropy_step: float  # smallest per-step entropy increment seen
    t_min_entropy_step: float
    max_mass_drift: float    # largest per-step change of the weighted mass
    max_energy_drift: float  # same for energy (tracked in isolated mode)

    @property
    def times(self):
        return np.array([s.t for s in self.snapshots])


def rhs(state: FieldState, params: ModelParams, t: Optional[float] = None):
    """Right-hand side (drho/dt, dE/dt) of the conservation laws.

    drho/dt = -div j_c with the wall material flux pinned to zero;
    dE/dt = -div j_e + rho*dV/dt, with the wall energy flux zeroed only in
    isolated mode. The source term is present only for time-dependent
    potentials.
    """
    if t is None:
        t = state.t
    grid = state.grid
    n = grid.n
    V = np.ascontiguousarray(params.potential.values_at(grid, t))
    dVdt = np.ascontiguousarray(params.potential.rate_at(grid, t))
    drho = np.empty(n)
    dE = np.empty(n)
    jc = np.empty(n + 1)
    je = np.empty(n + 1)
    _kernels.rhs_fields(state.rho, state.theta, V, dVdt, params.lam,
                        params.inv_rho_max, grid.h, params.bc.isolated,
                        drho, dE, jc, je)
    return drho, dE


def conserved_totals(state: FieldState, params: ModelParams):
    """Trapezoid integrals of the density and the energy density."""
    grid = state.grid
    V = params.potential.values_at(grid, state.t)
    mass = grid.integrate(state.rho)
    energy = grid.integrate(state.rho * (state.theta + V))
    return mass, energy


def _default_dt(grid, params, theta):
    # conservative start below the explicit stability limit of the
    # stiffest linearized channel
    scale = 2.0 * params.lam * float(np.max(theta)) * (1.0 + _SQRT_HALF)
    return 0.1 * grid.h**2 / scale


def _check_dirichlet_endpoints(state, params):
    bc = params.bc
    tol = 1e-12 * max(bc.theta_left, bc.theta_right)
    if (abs(state.theta[0] - bc.theta_left) > tol
            or abs(state.theta[-1] - bc.theta_right) > tol):
        raise ValueError(
            "Dirichlet mode requires the initial endpoint temperatures to "
            f"match the bath values ({bc.theta_left}, {bc.theta_right})")


def evolve(state: FieldState, params: ModelParams, ctl: StepControl):
    """Integrate the conservation laws and return a Trajectory.

    Raises StiffnessError when the step collapses below ctl.dt_min, and
    PositivityError when rho or theta cannot be kept positive (reporting
    the first offending node and the time).
    """
    grid = state.grid
    if np.any(state.rho <= 0):
        node = int(np.argmin(state.rho))
        raise PositivityError("initial density is not strictly positive",
                              node=node, time=state.t)
    if not params.bc.isolated:
        _check_dirichlet_endpoints(state, params)

    out_times = ctl.schedule(state.t)
    V0 = params.potential.values_at(grid, state.t)
    E0 = np.ascontiguousarray(state.rho * (state.theta + V0))
    dt0 = ctl.dt_initial
    if dt0 is None:
        dt0 = _default_dt(grid, params, state.theta)
    dt0 = min(dt0, ctl.dt_max)

    if params.potential.is_static:
        result = _kernels.integrate_static(
            np.ascontiguousarray(state.rho), E0, np.ascontiguousarray(V0),
            params.lam, params.inv_rho_max, grid.h, params.bc.isolated,
            params.is_full_model, params.rho_max or 0.0,
            params.bc.theta_left, params.bc.theta_right,
            state.t, out_times, dt0, ctl.dt_max, ctl.dt_min, ctl.safety,
            ctl.rtol, ctl.atol, ctl.max_steps, True)
    else:
        result = _integrate_time_dependent(state, params, ctl, E0, out_times, dt0)

    (rho_snaps, E_snaps, status, bad_node, bad_time, n_acc, n_rej,
     min_dS, t_min_dS, max_dmass, max_denergy, _) = result

    if status == _kernels.POSITIVITY:
        raise PositivityError(
            f"density/temperature left the positive cone near node {bad_node} "
            f"at t={bad_time:.6g}", node=int(bad_node), time=float(bad_time))
    if status == _kernels.STIFF:
        raise StiffnessError(
            f"step size underflowed dt_min={ctl.dt_min:g} at t={bad_time:.6g}",
            time=float(bad_time))
    if status == _kernels.MAXSTEPS:
        raise StiffnessError(
            f"max_steps={ctl.max_steps} exhausted at t={bad_time:.6g}",
            time=float(bad_time))

    snapshots = []
    diagnostics = []
    for k, t_out in enumerate(out_times):
        Vk = params.potential.values_at(grid, t_out)
        rho_k = rho_snaps[k]
        theta_k = E_snaps[k] / rho_k - Vk
        if not params.bc.isolated:
            # the endpoint E was pinned to rho*(theta_bc + V); make the
            # recovered temperature carry the bath values exactly
            theta_k[0] = params.bc.theta_left
            theta_k[-1] = params.bc.theta_right
        snap = FieldState(grid=grid, rho=rho_k, theta=theta_k, t=float(t_out))
        snapshots.append(snap)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonVanishingFlowWarning)
            prod = entropy_production_rate(snap, params)
        jc_raw = _boundary_jc(snap, params)
        mass, energy = conserved_totals(snap, params)
        diagnostics.append(SnapshotDiagnostics(
            t=float(t_out), mass=mass, energy=energy,
            entropy=entropy(snap, params),
            entropy_production=prod,
            max_boundary_jc=jc_raw))
    return Trajectory(
        snapshots=snapshots, diagnostics=diagnostics,
        n_accepted=int(n_acc), n_rejected=int(n_rej),
        min_entropy_step=float(min_dS), t_min_entropy_step=float(t_min_dS),
        max_mass_drift=float(max_dmass), max_energy_drift=float(max_denergy))


def _boundary_jc(state, params):
    """|j_c| the flux formula would give at the walls before zeroing."""
    from .model import _face_currents

    jc, _ = _face_currents(state, params)
    return float(max(abs(jc[0]), abs(jc[-1])))


def _integrate_time_dependent(state, params, ctl, E0, out_times, dt0):
    """Python mirror of the compiled loop for time-dependent potentials."""
    grid = state.grid
    n = grid.n
    h = grid.h
    isolated = params.bc.isolated
    w = grid.weights
    full = params.is_full_model
    rho_max = params.rho_max or 0.0

    def stage_rhs(rho_a, E_a, t_a):
        V = np.ascontiguousarray(params.potential.values_at(grid, t_a))
        dVdt = np.ascontiguousarray(params.potential.rate_at(grid, t_a))
        if not isolated:
            E_a[0] = rho_a[0] * (params.bc.theta_left + V[0])
            E_a[-1] = rho_a[-1] * (params.bc.theta_right + V[-1])
        theta = E_a / rho_a - V
        if np.any(rho_a <= 0) or np.any(theta <= 0):
            return None, None, int(np.argmin(np.minimum(rho_a, theta)))
        drho = np.empty(n)
        dE = np.empty(n)
        jc = np.empty(n + 1)
        je = np.empty(n + 1)
        _kernels.rhs_fields(rho_a, theta, V, dVdt, params.lam,
                            params.inv_rho_max, h, isolated, drho, dE, jc, je)
        return drho, dE, -1

    t = state.t
    y_r = np.array(state.rho)
    y_E = E0.copy()
    dt = dt0
    n_acc = n_rej = 0
    status = _kernels.OK
    bad_node, bad_time = -1, t
    min_dS, t_min_dS = np.inf, t
    max_dmass = max_denergy = 0.0

    V = params.potential.values_at(grid, t)
    mass_prev = float(w @ y_r)
    energy_prev = float(w @ y_E)
    S_prev = float(_kernels.entropy_value(y_r, y_E / y_r - V, w,
                                          params.inv_rho_max, rho_max, full))

    rho_snaps = np.empty((out_times.size, n))
    E_snaps = np.empty((out_times.size, n))
    i_out = 0
    while i_out < out_times.size and out_times[i_out] <= t:
        rho_snaps[i_out], E_snaps[i_out] = y_r, y_E
        i_out += 1

    k1r, k1E, bad = stage_rhs(y_r.copy(), y_E.copy(), t)
    t_final = out_times[-1]
    while i_out < out_times.size:
        if n_acc + n_rej >= ctl.max_steps:
            status = _kernels.MAXSTEPS
            bad_time = t
            break
        dt = min(dt, out_times[i_out] - t)
        ok = True
        stages = []
        for coeff, tfrac in (((0.5,), 0.5), ((0.0, 0.75), 0.75)):
            rr = y_r.copy()
            EE = y_E.copy()
            ks = [(k1r, k1E)] + stages
            for c, (kr, kE) in zip(coeff, ks):
                rr += dt * c * kr
                EE += dt * c * kE
            kr, kE, bad = stage_rhs(rr, EE, t + tfrac * dt)
            if kr is None:
                ok = False
                break
            stages.append((kr, kE))
        if ok:
            k2, k3 = stages
            rr = y_r + dt * (2 / 9 * k1r + 1 / 3 * k2[0] + 4 / 9 * k3[0])
            EE = y_E + dt * (2 / 9 * k1E + 1 / 3 * k2[1] + 4 / 9 * k3[1])
            k4r, k4E, bad = stage_rhs(rr, EE, t + dt)
            ok = k4r is not None
        if not ok:
            n_rej += 1
            dt *= 0.25
            if dt < ctl.dt_min:
                status = _kernels.POSITIVITY
                bad_node, bad_time = bad, t
                break
            continue

        err_r = dt * (-5 / 72 * k1r + 1 / 12 * k2[0] + 1 / 9 * k3[0] - 1 / 8 * k4r)
        err_E = dt * (-5 / 72 * k1E + 1 / 12 * k2[1] + 1 / 9 * k3[1] - 1 / 8 * k4E)
        errmax = max(
            float(np.max(np.abs(err_r) / (ctl.atol + ctl.rtol * np.abs(y_r)))),
            float(np.max(np.abs(err_E) / (ctl.atol + ctl.rtol * np.abs(y_E)))))

        if errmax <= 1.0:
            t += dt
            # the accepted state is the (BC-imposed) third-order candidate
            Vt = params.potential.values_at(grid, t)
            if not isolated:
                EE[0] = rr[0] * (params.bc.theta_left + Vt[0])
                EE[-1] = rr[-1] * (params.bc.theta_right + Vt[-1])
            y_r, y_E = rr, EE
            k1r, k1E = k4r, k4E
            n_acc += 1
            mass = float(w @ y_r)
            max_dmass = max(max_dmass, abs(mass - mass_prev))
            mass_prev = mass
            if isolated:
                energy = float(w @ y_E)
                max_denergy = max(max_denergy, abs(energy - energy_prev))
                energy_prev = energy
            S = float(_kernels.entropy_value(y_r, y_E / y_r - Vt, w,
                                             params.inv_rho_max, rho_max, full))
            if S - S_prev < min_dS:
                min_dS, t_min_dS = S - S_prev, t
            S_prev = S
            while (i_out < out_times.size
                   and t >= out_times[i_out] - 1e-14 * max(1.0, abs(t))):
                rho_snaps[i_out], E_snaps[i_out] = y_r.copy(), y_E.copy()
                i_out += 1
        else:
            n_rej += 1

        fac = ctl.safety * errmax ** (-1 / 3) if errmax > 0 else 5.0
        dt *= min(5.0, max(0.2, fac))
        dt = min(dt, ctl.dt_max)
        if dt < ctl.dt_min and t < t_final:
            status = _kernels.STIFF
            bad_time = t
            break

    return (rho_snaps, E_snaps, status, bad_node, bad_time, n_acc, n_rej,
            min_dS, t_min_dS, max_dmass, max_denergy, dt)
