"""Command-line front end: config parsing, subcommands, CSV/JSON-lines output.

Configs are flat key=value text files with dotted section keys
(``bath.gamma=2.0``). Every run writes its tables as CSV with floats at 17
significant digits (so reruns diff cleanly) plus a ``manifest.json`` of
JSON-lines records written atomically at the end. Exit codes: 0 success,
1 failed check or stability abort, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    RunConfig,
    as_choice,
    as_float,
    as_float_list,
    as_int,
    load_config,
)
from .decoherence import (
    decoherence_params,
    gaussian_pure_state,
    interference_amplitude,
    master_step,
    superposition_state,
    wigner_transform,
)
from .determinants import (
    FirstOrderOp,
    Scheme,
    SecondOrderOp,
    first_order_det_ratio,
    regularized_log_integral,
    second_order_det_ratio,
    trace_log_rate,
)
from .fokker_planck import (
    Ordering,
    PhaseGrid,
    StabilityError,
    compare_langevin_fp,
    gaussian_field_1d,
    gaussian_field_2d,
    kramers_dt_max,
    kramers_step,
    smoluchowski_dt_max,
    smoluchowski_step,
)
from .kernels import (
    BathParams,
    Drude,
    Ohmic,
    friction_kernel_time,
    noise_kernel_freq,
    noise_kernel_time,
    spectral_density,
)
from .langevin import SimConfig, run_ensemble
from .noise import derive_rng
from .potentials import DoubleWell, Harmonic, Polynomial


# ---------------------------------------------------------------------------
# output helpers


def _fmt_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, header, rows) -> None:
    """CSV table with a header row; floats at 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_cell(v) for v in row])


def _json_safe(value):
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    return value


def write_jsonl(path, records) -> None:
    """One JSON object per line, keys sorted for stable diffs."""
    with open(path, "w", newline="") as fh:
        for rec in records:
            fh.write(json.dumps(_json_safe(rec), sort_keys=True))
            fh.write("\n")


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class Manifest:
    """Run metadata accumulator; written atomically as JSON-lines."""

    def __init__(self, command: str, out_dir: str):
        self.command = command
        self.out_dir = out_dir
        self.started = _utc_now()
        self.outputs: list[str] = []
        self.checks: list[dict] = []

    def add_output(self, name: str) -> None:
        self.outputs.append(name)

    def add_check(self, name: str, passed: bool, **extra) -> None:
        rec = {"record": "check", "name": name, "pass": bool(passed)}
        rec.update(extra)
        self.checks.append(rec)

    @property
    def all_passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def write(self, resolved: dict) -> None:
        records = [
            {
                "record": "run",
                "command": self.command,
                "version": __version__,
                "started": self.started,
                "finished": _utc_now(),
            },
            {"record": "config", "values": dict(sorted(resolved.items()))},
        ]
        records += [{"record": "output", "path": name} for name in self.outputs]
        records += self.checks
        final = os.path.join(self.out_dir, "manifest.json")
        tmp = final + ".tmp"
        with open(tmp, "w", newline="") as fh:
            for rec in records:
                fh.write(json.dumps(_json_safe(rec), sort_keys=True))
                fh.write("\n")
        os.replace(tmp, final)


def _emit_csv(manifest: Manifest, name: str, header, rows) -> None:
    write_csv(os.path.join(manifest.out_dir, name), header, rows)
    manifest.add_output(name)


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text)


def _load(args) -> RunConfig:
    raw = load_config(args.config) if args.config else {}
    return RunConfig(raw)


def _ensure_out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _seed(args, cfg: RunConfig, default: int = 1234) -> int:
    value = cfg.get("run.seed", as_int, default)
    if args.seed is not None:
        value = args.seed
        cfg.resolved["run.seed"] = value
    return value


def _bath_from(cfg: RunConfig) -> BathParams:
    return BathParams(
        mass=cfg.get("bath.mass", as_float, 1.0),
        gamma=cfg.get("bath.gamma", as_float, 1.0),
        k_bt=cfg.get("bath.k_bt", as_float, 1.0),
        hbar=cfg.get("bath.hbar", as_float, 0.0),
    )


def _potential_from(cfg: RunConfig, mass: float, allow_none: bool = False):
    choices = ["harmonic", "double_well", "polynomial"]
    default = "harmonic"
    if allow_none:
        choices.append("none")
        default = "none"
    kind = cfg.get("potential.kind", as_choice(*choices), default)
    if kind == "harmonic":
        return Harmonic(mass=mass, omega0=cfg.get("potential.omega0", as_float, 1.0))
    if kind == "double_well":
        return DoubleWell(
            a=cfg.get("potential.a", as_float, -1.0),
            b=cfg.get("potential.b", as_float, 0.25),
        )
    if kind == "polynomial":
        return Polynomial(coeffs=cfg.require("potential.coeffs", as_float_list))
    return None


# ---------------------------------------------------------------------------
# kernels


def cmd_kernels(args) -> int:
    cfg = _load(args)
    model_name = cfg.get("bath.model", as_choice("ohmic", "drude"), "ohmic")
    mass = cfg.get("bath.mass", as_float, 1.0)
    gamma = cfg.get("bath.gamma", as_float, 1.0)
    k_bt = cfg.get("bath.k_bt", as_float, 1.0)
    hbar = cfg.get("bath.hbar", as_float, 0.0)
    if model_name == "drude":
        omega_d = cfg.require("bath.omega_d", as_float)
        model = Drude(gamma=gamma, omega_d=omega_d)
        params = BathParams(mass=mass, gamma=gamma, k_bt=k_bt, hbar=hbar, omega_d=omega_d)
        w_max = cfg.get("grid.w_max", as_float, 5.0 * omega_d)
        t_max = cfg.get("grid.t_max", as_float, 16.0 / omega_d)
    else:
        model = Ohmic(gamma=gamma)
        params = BathParams(mass=mass, gamma=gamma, k_bt=k_bt, hbar=hbar)
        w_max = cfg.get("grid.w_max", as_float, 10.0 * gamma)
        t_max = cfg.get("grid.t_max", as_float, 16.0 / gamma)
    nw = cfg.get("grid.nw", as_int, 2001)
    nt = cfg.get("grid.nt", as_int, 16385)
    cfg.finish()
    if nw < 2 or nt < 2:
        raise ConfigError("grid.nw and grid.nt must be >= 2")
    if not (w_max > 0 and t_max > 0):
        raise ConfigError("grid.w_max and grid.t_max must be > 0")

    out = _ensure_out(args)
    man = Manifest("kernels", out)

    omega = np.linspace(-w_max, w_max, nw)
    _emit_csv(man, "noise_freq.csv", ("omega", "K"),
              zip(omega, noise_kernel_freq(params, model, omega)))

    k0 = float(noise_kernel_freq(params, model, 0.0))
    ok0 = k0 == 1.0
    _say(args, f"check K(0) == 1 exactly: {'pass' if ok0 else 'FAIL'} (K0 = {k0:.17g})")
    man.add_check("k0_exact_unit", ok0, computed=k0, target=1.0)

    if model_name == "drude":
        _emit_csv(man, "spectral_density.csv", ("omega", "sigma"),
                  zip(omega, spectral_density(model, mass, omega)))
        tg = np.linspace(0.0, t_max, (nt + 1) // 2)
        _emit_csv(man, "friction_time.csv", ("t", "gamma_t"),
                  zip(tg, friction_kernel_time(model, mass, tg)))
        if hbar > 0:
            # the quantum kernel log-diverges at t = 0; an even count of
            # half-offset samples straddles it symmetrically
            n_even = nt if nt % 2 == 0 else nt + 1
            dt = 2.0 * t_max / n_even
            t_grid = -t_max + (np.arange(n_even) + 0.5) * dt
        else:
            n_odd = nt if nt % 2 == 1 else nt + 1
            t_grid = np.linspace(-t_max, t_max, n_odd)
        samples = noise_kernel_time(params, model, t_grid)
        _emit_csv(man, "noise_time.csv", ("t", "K_t"),
                  zip(samples.t_grid, samples.values))
        if hbar == 0.0:
            ok_area = abs(samples.area - 1.0) <= 1e-6
            _say(args, "check |area(K) - 1| <= 1e-6: "
                 f"{'pass' if ok_area else 'FAIL'} (area = {samples.area:.17g})")
            man.add_check("k_area_unit", ok_area, computed=samples.area,
                          target=1.0, tol=1e-6)
        else:
            _say(args, f"K trapezoid area = {samples.area:.17g} "
                 "(quantum kernel: no unit-area contract)")

    man.write(cfg.resolved)
    return 0 if man.all_passed else 1


# ---------------------------------------------------------------------------
# det-check


def cmd_det_check(args) -> int:
    cfg = _load(args)
    g = cfg.get("det.gamma", as_float, 2.0)
    t_total = cfg.get("det.t", as_float, 1.0)
    n = cfg.get("det.n", as_int, 10000)
    seed = _seed(args, cfg)
    cfg.finish()
    if not (g > 0 and t_total > 0):
        raise ConfigError("det.gamma and det.t must be > 0")
    if n < 4:
        raise ConfigError("det.n must be >= 4")

    dt = t_total / n
    const = np.full(n + 1, g)
    rand_c = derive_rng(seed).uniform(-3.0, 3.0, n + 1)
    osq = np.full(n + 1, (0.2 * g) ** 2)
    omega_d = 100.0 * g

    cases: list[dict] = []

    def run_case(name, computed, target, ok):
        cases.append({
            "case": name,
            "computed": float(computed),
            "target": float(target),
            "pass": bool(ok),
        })

    r = first_order_det_ratio(FirstOrderOp(const, dt), Scheme.RETARDED)
    run_case("first_order_retarded_const", r, 1.0, r == 1.0)
    r = first_order_det_ratio(FirstOrderOp(rand_c, dt), Scheme.RETARDED)
    run_case("first_order_retarded_random", r, 1.0, r == 1.0)
    target = math.exp(g * t_total)
    r = first_order_det_ratio(FirstOrderOp(const, dt), Scheme.ADVANCED)
    run_case("first_order_advanced", r, target, abs(r / target - 1.0) <= 0.01)
    target = math.exp(g * t_total / 2.0)
    r = first_order_det_ratio(FirstOrderOp(const, dt), Scheme.MIDPOINT)
    run_case("first_order_midpoint", r, target, abs(r / target - 1.0) <= 0.01)

    op2 = SecondOrderOp(const, osq, dt)
    r = second_order_det_ratio(op2, Scheme.RETARDED)
    run_case("second_order_retarded", r, 1.0, r == 1.0)
    target = math.exp(g * t_total)
    r = second_order_det_ratio(op2, Scheme.ADVANCED)
    run_case("second_order_advanced", r, target, abs(r / target - 1.0) <= 0.01)
    target = math.exp(g * t_total / 2.0)
    r = second_order_det_ratio(op2, Scheme.MIDPOINT)
    run_case("second_order_midpoint", r, target, abs(r / target - 1.0) <= 0.01)

    rate = trace_log_rate([1.0, 1j * omega_d, -g * omega_d], [1.0, 1j * omega_d])
    run_case("trace_log_drude_rate", rate, 0.0, abs(rate) < 1e-3 * g)
    for ga, mu in ((3.0, 1.0), (5.0, 1.0)):
        val = regularized_log_integral(ga, mu)
        target = (ga - mu) / 2.0
        run_case(f"regularized_log_quadrature_{int(ga)}_{int(mu)}", val, target,
                 abs(val - target) <= 1e-6)

    out = _ensure_out(args)
    man = Manifest("det-check", out)
    write_jsonl(os.path.join(out, "det_checks.jsonl"), cases)
    man.add_output("det_checks.jsonl")
    for case in cases:
        tag = "pass" if case["pass"] else "FAIL"
        _say(args, f"{case['case']}: {tag} (computed = {case['computed']:.12g}, "
             f"target = {case['target']:.12g})")
        man.add_check(case["case"], case["pass"], computed=case["computed"],
                      target=case["target"])
    man.write(cfg.resolved)
    return 0 if man.all_passed else 1


# ---------------------------------------------------------------------------
# simulate


def _grid_1d(cfg: RunConfig) -> PhaseGrid:
    return PhaseGrid(
        x_min=cfg.get("grid.x_min", as_float, -4.0),
        x_max=cfg.get("grid.x_max", as_float, 4.0),
        nx=cfg.get("grid.nx", as_int, 256),
    )


def _run_ensemble_cmd(args, cfg, params, potential, man) -> None:
    mode = cfg.get("run.mode",
                   as_choice("inertial", "overdamped", "overdamped_postpoint"),
                   "overdamped")
    config = SimConfig(
        potential=potential,
        params=params,
        dt=cfg.get("run.dt", as_float, 0.01),
        steps=cfg.get("run.steps", as_int, 1000),
        n_traj=cfg.get("run.n_traj", as_int, 1000),
        master_seed=_seed(args, cfg),
        x0=cfg.get("run.x0", as_float, 0.0),
        v0=cfg.get("run.v0", as_float, 0.0),
        sigma_x=cfg.get("run.sigma_x", as_float, 0.0),
        sigma_v=cfg.get("run.sigma_v", as_float, 0.0),
    )
    bins = cfg.get("output.bins", as_int, 64)
    lags = cfg.get("output.autocorr_lags", as_int, 0)
    cfg.finish()
    stats = run_ensemble(config, mode, histogram_bins=bins, autocorr_lags=lags)
    _emit_csv(man, "moments.csv", ("key", "value"), stats.moment_rows())
    _emit_csv(man, "histogram.csv", ("bin_left", "bin_right", "density"),
              stats.histogram_rows())
    if lags > 0 and stats.autocorr is not None:
        _emit_csv(man, "autocorr.csv", ("lag", "t_lag", "value"),
                  ((k, k * config.dt, val) for k, val in enumerate(stats.autocorr)))
    _say(args, f"ensemble ({mode}): {stats.n_traj} trajectories, "
         f"{stats.n_diverged} diverged, mean_x = {stats.mean_x:.6g}, "
         f"var_x = {stats.var_x:.6g}")


def _run_fp_cmd(args, cfg, kind, params, potential, man) -> None:
    ordering = Ordering(cfg.get("fp.ordering",
                                as_choice("momenta_left", "symmetric"),
                                "momenta_left"))
    x0 = cfg.get("fp.x0", as_float, 0.0)
    sigma_x = cfg.get("fp.sigma_x", as_float, 0.5)
    steps = cfg.get("fp.steps", as_int, 1000)
    record_every = cfg.get("fp.record_every", as_int, 100)
    dt = cfg.get("fp.dt", as_float, 0.0)
    if kind == "kramers":
        grid = PhaseGrid(
            x_min=cfg.get("grid.x_min", as_float, -4.0),
            x_max=cfg.get("grid.x_max", as_float, 4.0),
            nx=cfg.get("grid.nx", as_int, 128),
            v_min=cfg.get("grid.v_min", as_float, -4.0),
            v_max=cfg.get("grid.v_max", as_float, 4.0),
            nv=cfg.get("grid.nv", as_int, 128),
        )
        v0 = cfg.get("fp.v0", as_float, 0.0)
        sigma_v = cfg.get("fp.sigma_v", as_float, 0.5)
        cfg.finish()
        field = gaussian_field_2d(grid, x0, sigma_x, v0, sigma_v)
        dt_bound = kramers_dt_max(grid, potential, params)
        step = kramers_step
    else:
        grid = _grid_1d(cfg)
        cfg.finish()
        field = gaussian_field_1d(grid, x0, sigma_x)
        dt_bound = smoluchowski_dt_max(grid, potential, params)
        step = smoluchowski_step
    if steps < 1 or record_every < 1:
        raise ConfigError("fp.steps and fp.record_every must be >= 1")
    if dt <= 0.0:
        dt = 0.5 * dt_bound  # fp.dt <= 0 requests an automatic stable step

    mass0 = field.mass
    mass_rows = [(0, 0.0, mass0)]
    for k in range(1, steps + 1):
        field = step(field, potential, params, ordering, dt)
        if k % record_every == 0 or k == steps:
            mass_rows.append((k, k * dt, field.mass))
    _emit_csv(man, "mass.csv", ("step", "t", "mass"), mass_rows)
    header = ("x", "v", "P") if grid.is_2d else ("x", "P")
    _emit_csv(man, "field.csv", header, field.rows())

    mean, var = field.moments()
    _say(args, f"{kind} ({ordering.value}): {steps} steps of dt = {dt:.6g}, "
         f"final mass = {field.mass:.12g}, mean = {mean:.6g}, var = {var:.6g}")
    if ordering is Ordering.MOMENTA_LEFT:
        drift = abs(field.mass - mass0)
        man.add_check("mass_conserved", drift <= 1e-8, drift=drift, tol=1e-8)


def _run_compare_cmd(args, cfg, params, potential, man) -> None:
    grid = PhaseGrid(
        x_min=cfg.get("grid.x_min", as_float, -4.0),
        x_max=cfg.get("grid.x_max", as_float, 4.0),
        nx=cfg.get("grid.nx", as_int, 512),
    )
    times = cfg.require("compare.times", as_float_list)
    bins = cfg.get("compare.bins", as_int, 64)
    dt = cfg.get("run.dt", as_float, 0.005)
    steps = max(1, int(round(max(times) / dt)))
    config = SimConfig(
        potential=potential,
        params=params,
        dt=dt,
        steps=steps,
        n_traj=cfg.get("run.n_traj", as_int, 20000),
        master_seed=_seed(args, cfg),
        x0=cfg.get("run.x0", as_float, 0.0),
        sigma_x=cfg.get("run.sigma_x", as_float, 0.0),
    )
    cfg.finish()
    records, stats = compare_langevin_fp(config, grid, times, n_bins=bins)
    write_jsonl(os.path.join(man.out_dir, "compare.jsonl"),
                [r.as_dict() for r in records])
    man.add_output("compare.jsonl")
    _emit_csv(man, "moments.csv", ("key", "value"), stats.moment_rows())
    for rec in records:
        budget = 3.0 * (rec.stat_err + rec.disc_err)
        ok = rec.l1 <= budget
        _say(args, f"t = {rec.t:g}: L1 = {rec.l1:.4g} (budget {budget:.4g}), "
             f"mean {rec.ens_mean:.4g} vs {rec.fp_mean:.4g}")
        man.add_check(f"l1_within_budget_t_{rec.t:g}", ok, l1=rec.l1, budget=budget)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    kind = cfg.require("sim.kind",
                       as_choice("ensemble", "smoluchowski", "kramers", "compare"))
    params = _bath_from(cfg)
    potential = _potential_from(cfg, params.mass)
    out = _ensure_out(args)
    man = Manifest("simulate", out)
    if kind == "ensemble":
        _run_ensemble_cmd(args, cfg, params, potential, man)
    elif kind == "compare":
        _run_compare_cmd(args, cfg, params, potential, man)
    else:
        _run_fp_cmd(args, cfg, kind, params, potential, man)
    man.write(cfg.resolved)
    return 0 if man.all_passed else 1


# ---------------------------------------------------------------------------
# decohere


def cmd_decohere(args) -> int:
    cfg = _load(args)
    hbar = cfg.get("bath.hbar", as_float, 1.0)
    if hbar <= 0:
        raise ConfigError("bath.hbar must be > 0 to evolve a density matrix")
    params = BathParams(
        mass=cfg.get("bath.mass", as_float, 20.0),
        gamma=cfg.get("bath.gamma", as_float, 6.25e-3),
        k_bt=cfg.get("bath.k_bt", as_float, 1.0),
        hbar=hbar,
    )
    potential = _potential_from(cfg, params.mass, allow_none=True)
    state_kind = cfg.get("state.kind", as_choice("gaussian", "superposition"),
                         "superposition")
    sigma = cfg.get("state.sigma", as_float, 0.3)
    separation = cfg.get("state.separation", as_float, 4.0)
    nx = cfg.get("grid.nx", as_int, 101)
    dx = cfg.get("grid.dx", as_float, 0.08)
    ny = cfg.get("grid.ny", as_int, 81)
    dy = cfg.get("grid.dy", as_float, 0.2)
    dt = cfg.get("run.dt", as_float, 0.002)
    steps = cfg.get("run.steps", as_int, 50)
    record_every = cfg.get("run.record_every", as_int, 5)
    ordering = Ordering(cfg.get("decohere.ordering",
                                as_choice("momenta_left", "symmetric"),
                                "momenta_left"))
    cfg.finish()
    if steps < 1 or record_every < 1:
        raise ConfigError("run.steps and run.record_every must be >= 1")

    if state_kind == "superposition":
        rho = superposition_state(nx, dx, ny, dy, separation=separation, sigma=sigma)
    else:
        rho = gaussian_pure_state(nx, dx, ny, dy, sigma=sigma)
    dec = decoherence_params(params)

    out = _ensure_out(args)
    man = Manifest("decohere", out)

    def decay_row(step: int, field) -> tuple:
        tr = field.trace()
        amp = interference_amplitude(field, hbar)
        return (step, field.t, amp, tr.real, tr.imag, field.herm_deviation())

    decay_rows = [decay_row(0, rho)]
    for k in range(1, steps + 1):
        rho = master_step(rho, potential, params, dt, ordering=ordering)
        if k % record_every == 0 or k == steps:
            decay_rows.append(decay_row(k, rho))
    _emit_csv(man, "decay.csv",
              ("step", "t", "amplitude", "trace_re", "trace_im", "herm_dev"),
              decay_rows)

    xg, yg = rho.x_grid, rho.y_grid
    _emit_csv(man, "rho_final.csv", ("x", "y", "re", "im"),
              ((float(xg[i]), float(yg[j]), rho.values[i, j].real,
                rho.values[i, j].imag)
               for i in range(rho.nx) for j in range(rho.ny)))
    wig, p_grid = wigner_transform(rho, hbar)
    _emit_csv(man, "wigner_final.csv", ("x", "p", "w"),
              ((float(xg[i]), float(p_grid[j]), float(wig[i, j]))
               for i in range(rho.nx) for j in range(p_grid.size)))

    herm_max = max(row[5] for row in decay_rows)
    ok_herm = herm_max <= 1e-8
    _say(args, f"check hermiticity <= 1e-8: {'pass' if ok_herm else 'FAIL'} "
         f"(max deviation {herm_max:.3g})")
    man.add_check("hermitian", ok_herm, max_deviation=herm_max, tol=1e-8)

    tr0, tr_end = decay_rows[0][3], decay_rows[-1][3]
    t_end = decay_rows[-1][1]
    if ordering is Ordering.MOMENTA_LEFT:
        drift = abs(tr_end - tr0)
        ok_tr = drift <= 1e-8 * abs(tr0)
        _say(args, f"check trace constant within 1e-8: "
             f"{'pass' if ok_tr else 'FAIL'} (drift {drift:.3g})")
        man.add_check("trace_constant", ok_tr, drift=drift, tol=1e-8)
    else:
        rate = -math.log(tr_end / tr0) / t_end
        target = params.gamma / 2.0
        ok_tr = abs(rate / target - 1.0) <= 0.02
        _say(args, f"check trace decay rate vs gamma/2: "
             f"{'pass' if ok_tr else 'FAIL'} (rate {rate:.6g}, target {target:.6g})")
        man.add_check("trace_decay_rate", ok_tr, computed=rate, target=target)

    if state_kind == "superposition":
        ts = np.array([row[1] for row in decay_rows])
        amps = np.array([row[2] for row in decay_rows])
        slope = float(np.polyfit(ts, np.log(amps), 1)[0])
        lam_d2 = dec.lam * separation**2
        ratio = -slope / lam_d2
        ok_slope = abs(ratio - 1.0) <= 0.05
        _say(args, f"check decay slope vs Lambda d^2 = {lam_d2:.6g}: "
             f"{'pass' if ok_slope else 'FAIL'} (slope {slope:.6g}, ratio {ratio:.4f})")
        man.add_check("decay_slope", ok_slope, slope=slope, target=-lam_d2,
                      ratio=ratio, tol=0.05)

    man.write(cfg.resolved)
    return 0 if man.all_passed else 1


# ---------------------------------------------------------------------------
# paper-checks


def cmd_paper_checks(args) -> int:
    cfg = _load(args)
    cfg.finish()
    out = _ensure_out(args)
    man = Manifest("paper-checks", out)
    from .checks import run_all

    results = run_all()
    records = []
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        _say(args, f"[{tag}] {res.index}. {res.name}: {res.detail}")
        records.append({
            "index": res.index,
            "name": res.name,
            "pass": res.passed,
            "detail": res.detail,
        })
        man.add_check(f"criterion_{res.index}", res.passed, detail=res.detail)
    write_jsonl(os.path.join(out, "checks.jsonl"), records)
    man.add_output("checks.jsonl")
    man.write(cfg.resolved)
    return 0 if man.all_passed else 1


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bathdyn",
        description="Dissipative-dynamics toolkit: kernel tables, determinant "
                    "identity checks, stochastic and grid solvers, decoherence.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = (
        ("kernels", cmd_kernels, "tabulate bath kernels and run their unit checks"),
        ("det-check", cmd_det_check, "run the sliced-determinant identity suite"),
        ("simulate", cmd_simulate,
         "Langevin ensembles, grid solvers, or their comparison"),
        ("decohere", cmd_decohere,
         "evolve a density matrix and track interference decay"),
        ("paper-checks", cmd_paper_checks, "run the full acceptance suite"),
    )
    for name, func, help_text in commands:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config's run.seed")
        p.add_argument("--quiet", action="store_true", help="suppress progress lines")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
