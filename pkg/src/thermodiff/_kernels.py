"""Numba-compiled numerical core.

Face layout: for n nodes at x_i = i*h there are n+1 flux faces at

    0, h/2, 3h/2, ..., 1 - h/2, 1

i.e. the two domain endpoints plus the n-1 staggered half-nodes. Field
values and gradients at faces come from cubic (4-point) stencils so that
flux errors are O(h^3) at the near-boundary faces and O(h^4) at centred
ones; the half-cell balances at the boundary nodes then stay second-order
accurate on stationary profiles. Divergence of a face array telescopes
exactly against trapezoid weights, which is what makes the discrete
conservation laws exact.
"""

import numpy as np
from numba import njit

# integrator status codes
OK = 0
STIFF = 1
POSITIVITY = 2
MAXSTEPS = 3


@njit(cache=True)
def face_fields(u, h, vals, grads):
    """Cubic-stencil values and first derivatives of nodal data at the faces."""
    n = u.shape[0]
    vals[0] = u[0]
    grads[0] = (-11.0 * u[0] + 18.0 * u[1] - 9.0 * u[2] + 2.0 * u[3]) / (6.0 * h)
    vals[n] = u[n - 1]
    grads[n] = (11.0 * u[n - 1] - 18.0 * u[n - 2] + 9.0 * u[n - 3] - 2.0 * u[n - 4]) / (6.0 * h)
    vals[1] = (5.0 * u[0] + 15.0 * u[1] - 5.0 * u[2] + u[3]) / 16.0
    grads[1] = (-23.0 * u[0] + 21.0 * u[1] + 3.0 * u[2] - u[3]) / (24.0 * h)
    vals[n - 1] = (5.0 * u[n - 1] + 15.0 * u[n - 2] - 5.0 * u[n - 3] + u[n - 4]) / 16.0
    grads[n - 1] = (23.0 * u[n - 1] - 21.0 * u[n - 2] - 3.0 * u[n - 3] + u[n - 4]) / (24.0 * h)
    for k in range(2, n - 1):
        i = k - 1
        vals[k] = (-u[i - 1] + 9.0 * u[i] + 9.0 * u[i + 1] - u[i + 2]) / 16.0
        grads[k] = (u[i - 1] - 27.0 * u[i] + 27.0 * u[i + 1] - u[i + 2]) / (24.0 * h)


@njit(cache=True)
def currents(rho, theta, V, lam, inv_rho_max, h, jc, je):
    """Material and energy currents on the faces, without boundary zeroing.

    jc = -lam*(theta*grad rho + rho*(1 - rho/rho_max)*grad(theta + V))
    je = 2*(theta*jc - lam*rho*(1 - rho/rho_max)*theta*grad theta) + V*jc
    """
    n = rho.shape[0]
    rv = np.empty(n + 1)
    rg = np.empty(n + 1)
    tv = np.empty(n + 1)
    tg = np.empty(n + 1)
    Vv = np.empty(n + 1)
    Vg = np.empty(n + 1)
    face_fields(rho, h, rv, rg)
    face_fields(theta, h, tv, tg)
    face_fields(V, h, Vv, Vg)
    for k in range(n + 1):
        crowd = rv[k] * (1.0 - rv[k] * inv_rho_max)
        j = -lam * (tv[k] * rg[k] + crowd * (tg[k] + Vg[k]))
        jc[k] = j
        je[k] = 2.0 * (tv[k] * j - lam * crowd * tv[k] * tg[k]) + Vv[k] * j


@njit(cache=True)
def divergence(flux, h, out):
    """Flux-form divergence: half cells at the boundary, full cells inside."""
    n = out.shape[0]
    out[0] = (flux[1] - flux[0]) / (0.5 * h)
    out[n - 1] = (flux[n] - flux[n - 1]) / (0.5 * h)
    for i in range(1, n - 1):
        out[i] = (flux[i + 1] - flux[i]) / h


@njit(cache=True)
def rhs_fields(rho, theta, V, dVdt, lam, inv_rho_max, h, isolated,
               drho, dE, jc, je):
    """Conservation-law right-hand side from primitive fields.

    Material flux is zeroed at the two boundary faces always (no-escape
    walls); the energy flux only in isolated mode. Returns the pre-zeroing
    boundary material fluxes so callers can report how far the state is
    from satisfying the wall condition naturally.
    """
    n = rho.shape[0]
    currents(rho, theta, V, lam, inv_rho_max, h, jc, je)
    jc_left = jc[0]
    jc_right = jc[n]
    jc[0] = 0.0
    jc[n] = 0.0
    if isolated:
        je[0] = 0.0
        je[n] = 0.0
    divergence(jc, h, drho)
    divergence(je, h, dE)
    for i in range(n):
        drho[i] = -drho[i]
        dE[i] = -dE[i] + rho[i] * dVdt[i]
    return jc_left, jc_right


@njit(cache=True)
def entropy_value(rho, theta, w, inv_rho_max, rho_max, full_model):
    """Entropy functional by trapezoid weights w.

    Rare gas: integrand -rho*log(rho) + rho*log(theta).
    Full model adds -(rho_max - rho)*log(1 - rho/rho_max).
    rho*log(rho) is extended by 0 below 1e-30.
    """
    s = 0.0
    for i in range(rho.shape[0]):
        r = rho[i]
        term = 0.0
        if r > 1e-30:
            term = -r * np.log(r) + r * np.log(theta[i])
        if full_model:
            term -= (rho_max - r) * np.log1p(-r * inv_rho_max)
        s += w[i] * term
    return s


@njit(cache=True)
def _weighted_sum(w, u):
    s = 0.0
    for i in range(u.shape[0]):
        s += w[i] * u[i]
    return s


@njit(cache=True)
def integrate_static(rho0, E0, V, lam, inv_rho_max, h, isolated, full_model,
                     rho_max, theta_left, theta_right,
                     t0, out_times, dt_init, dt_max, dt_min, safety,
                     rtol, atol, max_steps, track_entropy):
    """Adaptive Bogacki-Shampine 3(2) loop for a time-independent potential.

    Evolved variables are (rho, E) in flux form; theta = E/rho - V is
    derived per stage. In Dirichlet mode the endpoint temperatures are
    re-imposed on every stage state by overwriting the endpoint E.

    Returns snapshot arrays at out_times plus step statistics:
    (rho_snaps, E_snaps, status, bad_node, bad_time, n_accepted, n_rejected,
     min_entropy_step, t_min_entropy_step, max_mass_drift, max_energy_drift,
     final_dt)
    where the drift figures are the largest per-step changes of the
    weighted totals (exact conservation check) and min_entropy_step is the
    smallest per-step entropy increment seen (isolated-mode monitor).
    """
    n = rho0.shape[0]
    nout = out_times.shape[0]
    rho_snaps = np.empty((nout, n))
    E_snaps = np.empty((nout, n))

    w = np.full(n, h)
    w[0] = 0.5 * h
    w[n - 1] = 0.5 * h

    y_r = rho0.copy()
    y_E = E0.copy()
    theta = np.empty(n)
    dVdt = np.zeros(n)

    k1r = np.empty(n); k1E = np.empty(n)
    k2r = np.empty(n); k2E = np.empty(n)
    k3r = np.empty(n); k3E = np.empty(n)
    k4r = np.empty(n); k4E = np.empty(n)
    tr = np.empty(n); tE = np.empty(n)
    jc = np.empty(n + 1); je = np.empty(n + 1)

    dirichlet = not isolated

    t = t0
    dt = dt_init
    n_acc = 0
    n_rej = 0
    i_out = 0
    status = OK
    bad_node = -1
    bad_time = t0
    min_dS = np.inf
    t_min_dS = t0
    max_dmass = 0.0
    max_denergy = 0.0
    last_reject_positivity = False

    mass_prev = _weighted_sum(w, y_r)
    energy_prev = _weighted_sum(w, y_E)
    S_prev = 0.0
    if track_entropy:
        for i in range(n):
            theta[i] = y_E[i] / y_r[i] - V[i]
        S_prev = entropy_value(y_r, theta, w, inv_rho_max, rho_max, full_model)

    # emit any snapshot at/before the start time
    while i_out < nout and out_times[i_out] <= t:
        rho_snaps[i_out] = y_r
        E_snaps[i_out] = y_E
        i_out += 1

    for i in range(n):
        theta[i] = y_E[i] / y_r[i] - V[i]
    rhs_fields(y_r, theta, V, dVdt, lam, inv_rho_max, h, isolated,
               k1r, k1E, jc, je)

    t_final = out_times[nout - 1]
    while i_out < nout:
        if n_acc + n_rej >= max_steps:
            status = MAXSTEPS
            break
        target = out_times[i_out]
        if t + dt > target:
            dt = target - t

        # stage 2
        for i in range(n):
            tr[i] = y_r[i] + 0.5 * dt * k1r[i]
            tE[i] = y_E[i] + 0.5 * dt * k1E[i]
        if dirichlet:
            tE[0] = tr[0] * (theta_left + V[0])
            tE[n - 1] = tr[n - 1] * (theta_right + V[n - 1])
        ok = True
        for i in range(n):
            if tr[i] <= 0.0 or tE[i] / tr[i] - V[i] <= 0.0:
                ok = False
                bad_node = i
                break
        if ok:
            for i in range(n):
                theta[i] = tE[i] / tr[i] - V[i]
            rhs_fields(tr, theta, V, dVdt, lam, inv_rho_max, h, isolated,
                       k2r, k2E, jc, je)
            # stage 3
            for i in range(n):
                tr[i] = y_r[i] + 0.75 * dt * k2r[i]
                tE[i] = y_E[i] + 0.75 * dt * k2E[i]
            if dirichlet:
                tE[0] = tr[0] * (theta_left + V[0])
                tE[n - 1] = tr[n - 1] * (theta_right + V[n - 1])
            for i in range(n):
                if tr[i] <= 0.0 or tE[i] / tr[i] - V[i] <= 0.0:
                    ok = False
                    bad_node = i
                    break
        if ok:
            for i in range(n):
                theta[i] = tE[i] / tr[i] - V[i]
            rhs_fields(tr, theta, V, dVdt, lam, inv_rho_max, h, isolated,
                       k3r, k3E, jc, je)
            # third-order candidate
            for i in range(n):
                tr[i] = y_r[i] + dt * ((2.0 / 9.0) * k1r[i] + (1.0 / 3.0) * k2r[i]
                                       + (4.0 / 9.0) * k3r[i])
                tE[i] = y_E[i] + dt * ((2.0 / 9.0) * k1E[i] + (1.0 / 3.0) * k2E[i]
                                       + (4.0 / 9.0) * k3E[i])
            if dirichlet:
                tE[0] = tr[0] * (theta_left + V[0])
                tE[n - 1] = tr[n - 1] * (theta_right + V[n - 1])
            for i in range(n):
                if tr[i] <= 0.0 or tE[i] / tr[i] - V[i] <= 0.0:
                    ok = False
                    bad_node = i
                    break

        if not ok:
            n_rej += 1
            last_reject_positivity = True
            dt *= 0.25
            if dt < dt_min:
                status = POSITIVITY
                bad_time = t
                break
            continue

        for i in range(n):
            theta[i] = tE[i] / tr[i] - V[i]
        rhs_fields(tr, theta, V, dVdt, lam, inv_rho_max, h, isolated,
                   k4r, k4E, jc, je)

        errmax = 0.0
        for i in range(n):
            er = dt * ((-5.0 / 72.0) * k1r[i] + (1.0 / 12.0) * k2r[i]
                       + (1.0 / 9.0) * k3r[i] - (1.0 / 8.0) * k4r[i])
            eE = dt * ((-5.0 / 72.0) * k1E[i] + (1.0 / 12.0) * k2E[i]
                       + (1.0 / 9.0) * k3E[i] - (1.0 / 8.0) * k4E[i])
            a = abs(er) / (atol + rtol * abs(y_r[i]))
            if a > errmax:
                errmax = a
            a = abs(eE) / (atol + rtol * abs(y_E[i]))
            if a > errmax:
                errmax = a

        if errmax <= 1.0:
            t += dt
            for i in range(n):
                y_r[i] = tr[i]
                y_E[i] = tE[i]
                k1r[i] = k4r[i]
                k1E[i] = k4E[i]
            n_acc += 1
            last_reject_positivity = False

            mass = _weighted_sum(w, y_r)
            dm = abs(mass - mass_prev)
            if dm > max_dmass:
                max_dmass = dm
            mass_prev = mass
            if isolated:
                energy = _weighted_sum(w, y_E)
                de = abs(energy - energy_prev)
                if de > max_denergy:
                    max_denergy = de
                energy_prev = energy
            if track_entropy:
                S = entropy_value(y_r, theta, w, inv_rho_max, rho_max, full_model)
                dS = S - S_prev
                if dS < min_dS:
                    min_dS = dS
                    t_min_dS = t
                S_prev = S

            while i_out < nout and t >= out_times[i_out] - 1e-14 * max(1.0, abs(t)):
                rho_snaps[i_out] = y_r
                E_snaps[i_out] = y_E
                i_out += 1
        else:
            n_rej += 1
            # k1 is still the rhs at (t, y)

        if errmax > 0.0:
            fac = safety * errmax ** (-1.0 / 3.0)
        else:
            fac = 5.0
        if fac > 5.0:
            fac = 5.0
        if fac < 0.2:
            fac = 0.2
        dt *= fac
        if dt > dt_max:
            dt = dt_max
        if dt < dt_min and t < t_final:
            status = STIFF if not last_reject_positivity else POSITIVITY
            bad_time = t
            break

    return (rho_snaps, E_snaps, status, bad_node, bad_time, n_acc, n_rej,
            min_dS, t_min_dS, max_dmass, max_denergy, dt)
