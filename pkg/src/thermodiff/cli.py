"""Configuration-driven command line harness.

One JSON document describes a run; the command dispatches to the solver
modules and writes CSV (arrays, trajectories) and JSON (scalar summaries)
into the output directory. Floats are serialized with 17 significant
digits so files round-trip losslessly and identical configs produce
byte-identical output. Exit codes: 0 success, 2 config validation
failure, 3 numerical failure (with the error serialized into
failure.json).
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import evolution, model, spectral, stationary
from .errors import ConfigError, ThermodiffError
from .grid import Grid1D

COMMANDS = ("evolve", "stationary", "spectrum", "diagnose", "sweep")

_F = "%.17g"


def _fmt(x):
    return _F % float(x)


def _require_keys(section, allowed, where):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in {where}")


def _get(section, key, default=None, required=False, where=""):
    if required and key not in section:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return section.get(key, default)


def _positive(value, name):
    if not isinstance(value, (int, float)) or value <= 0:
        raise ConfigError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def load_config(path):
    path = Path(path)
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    cfg["_base_dir"] = path.parent
    return cfg


def _read_columns(path, names):
    """Columns by name from a headered CSV written by this tool (or
    compatible)."""
    with open(path) as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    out = []
    for name in names:
        if rows and name not in rows[0]:
            raise ConfigError(f"column {name!r} missing from {path}")
        out.append(np.array([float(r[name]) for r in rows]))
    return out


def build_potential(section, grid, base_dir):
    if section is None:
        return model.PotentialSpec.zero()
    _require_keys(section, {"kind", "g", "values", "path"}, "model.potential")
    kind = _get(section, "kind", required=True, where="model.potential")
    if kind == "zero":
        return model.PotentialSpec.zero()
    if kind == "linear":
        return model.PotentialSpec.linear(
            _get(section, "g", required=True, where="model.potential"))
    if kind == "tabulated":
        if "path" in section:
            (values,) = _read_columns(base_dir / section["path"], ["V"])
        else:
            values = np.asarray(
                _get(section, "values", required=True, where="model.potential"),
                dtype=float)
        if values.shape != (grid.n,):
            raise ConfigError("tabulated potential length must equal grid.n")
        return model.PotentialSpec.tabulated(values)
    raise ConfigError(f"unsupported potential kind {kind!r} in a config "
                      "(time-dependent potentials are API-only)")


def build_model(cfg, grid, base_dir):
    section = _get(cfg, "model", {}) or {}
    _require_keys(section, {"lambda", "rho_max", "potential", "bc"}, "model")
    lam = _positive(_get(section, "lambda", 1.0), "model.lambda")
    rho_max = section.get("rho_max")
    if rho_max is not None:
        rho_max = _positive(rho_max, "model.rho_max")
    bc_sec = _get(section, "bc", {}) or {}
    _require_keys(bc_sec, {"thermal_mode", "theta_left", "theta_right"},
                  "model.bc")
    bc = model.BoundarySpec(
        theta_left=float(bc_sec.get("theta_left", 1.0)),
        theta_right=float(bc_sec.get("theta_right", 1.0)),
        thermal_mode=bc_sec.get("thermal_mode", "dirichlet"))
    potential = build_potential(section.get("potential"), grid, base_dir)
    try:
        return model.ModelParams(lam=lam, rho_max=rho_max,
                                 potential=potential, bc=bc)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_grid(cfg):
    section = _get(cfg, "grid", {}) or {}
    _require_keys(section, {"n"}, "grid")
    n = section.get("n", 101)
    if not isinstance(n, int) or n < 8:
        raise ConfigError("grid.n must be an integer >= 8")
    return Grid1D(n)


def build_initial(cfg, grid, params, base_dir):
    section = _get(cfg, "initial", None)
    if section is None:
        raise ConfigError("evolve needs an 'initial' section")
    allowed = {"family", "rho0", "theta0", "amplitude", "mode", "g",
               "total_mass", "path"}
    _require_keys(section, allowed, "initial")
    family = _get(section, "family", required=True, where="initial")
    x = grid.nodes
    if family == "uniform":
        rho0 = _positive(section.get("rho0", 1.0), "initial.rho0")
        th0 = _positive(section.get("theta0", 1.0), "initial.theta0")
        return model.FieldState(grid=grid, rho=np.full(grid.n, rho0),
                                theta=np.full(grid.n, th0))
    if family == "boltzmann":
        sol = stationary.boltzmann_profile(
            g=float(section.get("g", 1.0)),
            theta0=_positive(section.get("theta0", 1.0), "initial.theta0"),
            total_mass=_positive(section.get("total_mass", 1.0),
                                 "initial.total_mass"),
            grid=grid, lam=params.lam)
        return sol.state
    if family == "cosine-perturbation":
        rho0 = _positive(section.get("rho0", 1.0), "initial.rho0")
        th0 = _positive(section.get("theta0", 1.0), "initial.theta0")
        amp = float(section.get("amplitude", 0.01))
        mode = int(section.get("mode", 1))
        rho = rho0 * (1.0 + amp * np.cos(mode * np.pi * x))
        if np.any(rho <= 0):
            raise ConfigError("cosine perturbation makes the density negative")
        return model.FieldState(grid=grid, rho=rho,
                                theta=np.full(grid.n, th0))
    if family == "driven-example":
        return stationary.driven_example(params.lam, grid).state
    if family == "tabulated":
        path = base_dir / _get(section, "path", required=True, where="initial")
        rho, theta = _read_columns(path, ["rho", "theta"])
        if rho.size != grid.n:
            raise ConfigError("tabulated initial state length must equal grid.n")
        return model.FieldState(grid=grid, rho=rho, theta=theta)
    raise ConfigError(f"unknown initial family {family!r}")


def build_step_control(cfg):
    section = _get(cfg, "step", {}) or {}
    allowed = {"t_end", "dt_initial", "dt_max", "safety", "output_times",
               "max_steps", "rtol", "atol"}
    _require_keys(section, allowed, "step")
    t_end = _positive(_get(section, "t_end", required=True, where="step"),
                      "step.t_end")
    kwargs = dict(t_end=t_end)
    for key in ("dt_initial", "dt_max", "safety", "rtol", "atol"):
        if key in section:
            kwargs[key] = _positive(section[key], f"step.{key}")
    if "max_steps" in section:
        kwargs["max_steps"] = int(section["max_steps"])
    if "output_times" in section:
        kwargs["output_times"] = [float(t) for t in section["output_times"]]
    try:
        return evolution.StepControl(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _state_rows(state, params):
    jc = model.material_current(state, params)
    je = model.energy_current(state, params, jc)
    E = model.energy_density(state, params)
    V = params.potential.values_at(state.grid, state.t)
    x = state.grid.nodes
    # fluxes are face quantities; report the mean of the adjacent faces
    jc_node = 0.5 * (jc[:-1] + jc[1:])
    je_node = 0.5 * (je[:-1] + je[1:])
    for i in range(state.grid.n):
        yield [_fmt(state.t), _fmt(x[i]), _fmt(state.rho[i]),
               _fmt(state.theta[i]), _fmt(E[i]), _fmt(V[i]),
               _fmt(jc_node[i]), _fmt(je_node[i])]


def cmd_evolve(cfg, out_dir, base_dir):
    grid = build_grid(cfg)
    params = build_model(cfg, grid, base_dir)
    state = build_initial(cfg, grid, params, base_dir)
    ctl = build_step_control(cfg)
    traj = evolution.evolve(state, params, ctl)

    rows = []
    for snap in traj.snapshots:
        rows.extend(_state_rows(snap, params))
    write_csv(out_dir / "trajectory.csv",
              ["t", "x", "rho", "theta", "E", "V", "j_c", "j_e"], rows)
    write_csv(out_dir / "diagnostics.csv",
              ["t", "mass", "energy", "entropy", "entropy_production",
               "max_boundary_jc"],
              [[_fmt(d.t), _fmt(d.mass), _fmt(d.energy), _fmt(d.entropy),
                _fmt(d.entropy_production), _fmt(d.max_boundary_jc)]
               for d in traj.diagnostics])
    last = traj.diagnostics[-1]
    summary = {
        "command": "evolve",
        "final_time": last.t,
        "final_mass": last.mass,
        "final_energy": last.energy,
        "final_entropy": last.entropy,
        "steps_accepted": traj.n_accepted,
        "steps_rejected": traj.n_rejected,
        "min_entropy_step": traj.min_entropy_step,
        "max_mass_drift": traj.max_mass_drift,
        "max_energy_drift": traj.max_energy_drift,
    }
    write_json(out_dir / "summary.json", summary)
    print(f"evolve: t={last.t:g} mass={last.mass:.12g} "
          f"entropy={last.entropy:.12g} steps={traj.n_accepted}")
    return 0


def _build_stationary(cfg, grid, params):
    section = _get(cfg, "stationary", {}) or {}
    allowed = {"kind", "g", "theta0", "theta1", "total_mass", "k"}
    _require_keys(section, allowed, "stationary")
    kind = section.get("kind", "driven-example")
    if kind == "boltzmann":
        return stationary.boltzmann_profile(
            g=float(section.get("g", 1.0)),
            theta0=_positive(section.get("theta0", 1.0), "stationary.theta0"),
            total_mass=_positive(section.get("total_mass", 1.0),
                                 "stationary.total_mass"),
            grid=grid, lam=params.lam)
    if kind == "driven-example":
        return stationary.driven_example(params.lam, grid)
    if kind == "bvp":
        theta0 = _positive(section.get("theta0", 1.0), "stationary.theta0")
        theta1 = _positive(section.get("theta1", 4.0), "stationary.theta1")
        theta = stationary.theta_from_potential(params.potential, theta0,
                                                theta1, grid)
        return stationary.from_theta(theta, float(section.get("k", 1.0)),
                                     grid, lam=params.lam)
    raise ConfigError(f"unknown stationary kind {kind!r}")


def cmd_stationary(cfg, out_dir, base_dir):
    grid = build_grid(cfg)
    params = build_model(cfg, grid, base_dir)
    sol = _build_stationary(cfg, grid, params)
    V = sol.potential.values_at(grid)
    write_csv(out_dir / "solution.csv", ["x", "rho", "theta", "V"],
              [[_fmt(x), _fmt(r), _fmt(th), _fmt(v)]
               for x, r, th, v in zip(grid.nodes, sol.state.rho,
                                      sol.state.theta, V)])
    res = sol.residuals
    summary = {
        "command": "stationary",
        "provenance": sol.provenance,
        "k": sol.k,
        "max_div_jc": res.max_div_jc,
        "max_div_je": res.max_div_je,
        "max_jc": res.max_jc,
        "tol_jc": sol.tol_jc,
        "tol_div": sol.tol_div,
    }
    write_json(out_dir / "summary.json", summary)
    print(f"stationary[{sol.provenance}]: max residual "
          f"{max(res.max_div_jc, res.max_div_je, res.max_jc):.3e}")
    return 0


def cmd_spectrum(cfg, out_dir, base_dir):
    grid_sec = cfg.get("grid")
    section = _get(cfg, "spectrum", {}) or {}
    allowed = {"count", "omega_max", "gamma", "alpha", "oracle_n", "seed",
               "semigroup_times"}
    _require_keys(section, allowed, "spectrum")
    msec = _get(cfg, "model", {}) or {}
    lam = _positive(msec.get("lambda", 1.0), "model.lambda")
    bc = (msec.get("bc") or {})
    theta0 = float(bc.get("theta_left", 1.0))
    theta1 = float(bc.get("theta_right", theta0))
    if theta0 != theta1:
        raise ConfigError("spectrum analysis needs equal bath temperatures")
    m = spectral.coupling_matrix(
        gamma=float(section.get("gamma", 1.0)),
        alpha=float(section.get("alpha", 0.5)),
        lam=lam, theta0=theta0)
    count = int(section.get("count", 8))
    omega_max = section.get("omega_max")
    oracle_ns = section.get("oracle_n", [200, 400, 800])
    if grid_sec is not None:
        _require_keys(grid_sec, {"n"}, "grid")

    trans = spectral.eigenvalues_transcendental(m, count, omega_max)
    oracle = spectral.richardson_eigenvalues(m, oracle_ns, count)
    trans = spectral.attach_agreement(trans, oracle)

    rows = []
    for i, w in enumerate(trans.eigenvalues):
        rows.append([str(i), _fmt(w), "transcendental",
                     str(trans.multiplicities[i]),
                     _fmt(trans.agreement[i]) if i < trans.agreement.size
                     else ""])
    for i, w in enumerate(oracle.eigenvalues):
        rows.append([str(i), _fmt(w), oracle.method, "1", ""])
    write_csv(out_dir / "eigenvalues.csv",
              ["index", "omega", "method", "multiplicity", "agreement"], rows)
    summary = {
        "command": "spectrum",
        "gamma": m.gamma,
        "alpha": m.alpha,
        "scale": m.scale,
        "count": count,
        "smallest_nonzero": trans.smallest_nonzero,
        "max_agreement_gap": float(np.max(trans.agreement)),
        "oracle_max_imag": oracle.max_imag,
    }
    write_json(out_dir / "summary.json", summary)
    print(f"spectrum: omega_0={trans.eigenvalues[0]:g} "
          f"omega_1={trans.smallest_nonzero:.9g} "
          f"max gap to oracle={summary['max_agreement_gap']:.3e}")
    return 0


def cmd_diagnose(cfg, out_dir, base_dir):
    grid = build_grid(cfg)
    params = build_model(cfg, grid, base_dir)
    sol = _build_stationary(cfg, grid, params)
    state = sol.state
    sol_params = model.ModelParams(
        lam=params.lam, rho_max=params.rho_max, potential=sol.potential,
        bc=model.BoundarySpec(theta_left=state.theta[0],
                              theta_right=state.theta[-1]))
    jc = model.material_current(state, sol_params)
    je = model.energy_current(state, sol_params, jc)
    production = model.entropy_production_rate(state, sol_params)
    rates = model.boundary_entropy_rates(state, sol_params)
    lam = params.lam
    report = {
        "command": "diagnose",
        "provenance": sol.provenance,
        "lambda": lam,
        "energy_flux_mean": float(np.mean(je)),
        "energy_flux_spread": float(np.max(je) - np.min(je)),
        "max_material_flux": float(np.max(np.abs(jc))),
        "entropy_production": production,
        "entropy_flux_left": rates.left,
        "entropy_flux_right": rates.right,
        "residual_div_jc": sol.residuals.max_div_jc,
        "residual_div_je": sol.residuals.max_div_je,
    }
    write_json(out_dir / "report.json", report)
    lines = [
        f"provenance: {sol.provenance}",
        f"j_e = {report['energy_flux_mean']:.12g} "
        f"(spread {report['energy_flux_spread']:.3e}, -4*lambda = {-4 * lam:g})",
        f"entropy production = {production:.12g} (3*lambda = {3 * lam:g})",
        f"entropy intake |j_e|/theta(1) = {abs(rates.right):.12g}",
        f"entropy output |j_e|/theta(0) = {abs(rates.left):.12g}",
        f"max |j_c| = {report['max_material_flux']:.3e}",
    ]
    (out_dir / "report.txt").write_text("\n".join(lines) + "\n")
    print(f"diagnose[{sol.provenance}]: j_e={report['energy_flux_mean']:.6g} "
          f"production={production:.6g}")
    return 0


def cmd_sweep(cfg, out_dir, base_dir):
    runs = _get(cfg, "runs", required=True, where="sweep config")
    if not isinstance(runs, list) or not runs:
        raise ConfigError("sweep needs a nonempty 'runs' list")
    names = set()
    prepared = []
    for i, entry in enumerate(runs):
        _require_keys(entry, {"name", "config"}, f"runs[{i}]")
        name = _get(entry, "name", required=True, where=f"runs[{i}]")
        if name in names:
            raise ConfigError(f"duplicate sweep run name {name!r}")
        names.add(name)
        sub = dict(_get(entry, "config", required=True, where=f"runs[{i}]"))
        sub["_base_dir"] = base_dir
        validate_config(sub)
        prepared.append((name, sub))

    workers = _thread_cap() or os.cpu_count() or 1
    codes = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            pool.submit(_dispatch, sub, out_dir / name): name
            for name, sub in prepared}
        for fut, name in futures.items():
            codes[name] = fut.result()
    bad = {k: v for k, v in codes.items() if v != 0}
    print(f"sweep: {len(codes) - len(bad)}/{len(codes)} runs succeeded")
    return 3 if bad else 0


def validate_config(cfg):
    allowed = {"command", "model", "grid", "initial", "step", "spectrum",
               "stationary", "output", "runs", "_base_dir"}
    _require_keys(cfg, allowed, "config")
    command = _get(cfg, "command", required=True, where="config")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of "
                          f"{COMMANDS}")
    return command


def _dispatch(cfg, out_dir):
    command = validate_config(cfg)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base_dir = cfg.get("_base_dir", Path.cwd())
    handler = {
        "evolve": cmd_evolve,
        "stationary": cmd_stationary,
        "spectrum": cmd_spectrum,
        "diagnose": cmd_diagnose,
        "sweep": cmd_sweep,
    }[command]
    try:
        return handler(cfg, out_dir, base_dir)
    except ThermodiffError as exc:
        if isinstance(exc, ConfigError):
            raise
        payload = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("node", "time", "dt", "found"):
            if getattr(exc, attr, None) is not None:
                payload[attr] = getattr(exc, attr)
        write_json(out_dir / "failure.json", payload)
        print(f"numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3


def _thread_cap():
    raw = os.environ.get("THERMODIFF_NUM_THREADS")
    if not raw:
        return None
    try:
        return max(1, int(raw))
    except ValueError:
        return None


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="thermodiff",
        description="cross-diffusion fluid lab: evolution, stationary "
                    "solutions, spectra")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a JSON run "
                        "configuration")
    parser.add_argument("--out", default=None,
                        help="output directory (default: from config or cwd)")
    args = parser.parse_args(argv)

    cap = _thread_cap()
    if cap is not None:
        try:
            import numba
            numba.set_num_threads(cap)
        except (ImportError, ValueError):
            pass

    try:
        cfg = load_config(args.config)
        if cfg.get("command") is None:
            cfg["command"] = args.command
        elif cfg["command"] != args.command:
            raise ConfigError(
                f"config command {cfg['command']!r} does not match the "
                f"command line {args.command!r}")
        out_sec = cfg.get("output", {}) or {}
        _require_keys(out_sec, {"dir", "formats"}, "output")
        out_dir = args.out or out_sec.get("dir", ".")
        out_dir = Path(out_dir)
        if not out_dir.is_absolute():
            out_dir = Path.cwd() / out_dir
        validate_config(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _dispatch(cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
