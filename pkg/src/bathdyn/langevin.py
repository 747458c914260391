"""Langevin integrators with inertia and overdamped, plus ensemble statistics.

All steppers use the pre-point (retarded) convention: friction and force are
evaluated at the earlier time point, which is what makes the trajectory-to-noise
Jacobian trivial and needs no drift correction for additive noise. A post-point
stepper is exposed as a diagnostic; at finite dt its stationary-moment bias has
the opposite sign.

The driving noise is white with per-step variance w/dt, w = 2 M gamma k_B T.
Trajectory i draws from derive_rng(master_seed, i): first the initial-condition
normals (one for overdamped, two for inertial), then the step noise, so any
routine that replays the same order reproduces the ensemble bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import BathParams
from .noise import derive_rng
from .potentials import Harmonic, Potential

__all__ = [
    "InertialState",
    "SimConfig",
    "EnsembleStats",
    "ExpectationResult",
    "step_inertial",
    "step_overdamped",
    "step_overdamped_postpoint",
    "run_ensemble",
    "noise_expectation",
]

# cap on trajectories*steps kept in memory per vectorized chunk
_CHUNK_BUDGET = 1 << 22
_MODES = ("inertial", "overdamped", "overdamped_postpoint")


@dataclass(frozen=True)
class InertialState:
    """Phase-space point (position, velocity)."""

    x: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.v)):
            raise ValueError("state must be finite")


@dataclass(frozen=True)
class SimConfig:
    """Ensemble run description.

    Initial conditions are a Gaussian cloud centered at (x0, v0) with widths
    (sigma_x, sigma_v); zero width means a point start.
    """

    potential: Potential
    params: BathParams
    dt: float
    steps: int
    n_traj: int
    master_seed: int
    x0: float = 0.0
    v0: float = 0.0
    sigma_x: float = 0.0
    sigma_v: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if self.sigma_x < 0 or self.sigma_v < 0:
            raise ValueError("initial widths must be >= 0")
        if not (math.isfinite(self.x0) and math.isfinite(self.v0)):
            raise ValueError("initial point must be finite")
        _check_dt(self.params, self.dt)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt


def _check_dt(params: BathParams, dt: float):
    if not dt * params.gamma < 0.1:
        raise ValueError(
            "dt too large for the friction scale: need dt*gamma < 0.1, got "
            f"{dt * params.gamma:.3g}"
        )


def _check_dt_overdamped(potential: Potential, params: BathParams, dt: float):
    # the overdamped relaxation rate for a harmonic well is omega0^2/gamma
    if isinstance(potential, Harmonic):
        rate = potential.omega0 ** 2 / params.gamma
        if not dt * rate < 0.1:
            raise ValueError(
                "dt too large for the relaxation scale: need "
                f"dt*omega0^2/gamma < 0.1, got {dt * rate:.3g}"
            )


def step_inertial(
    state: InertialState,
    potential: Potential,
    params: BathParams,
    eta: float,
    dt: float,
) -> InertialState:
    """One pre-point step of M dv = (-M gamma v - V'(x) + eta) dt, dx = v dt."""
    _check_dt(params, dt)
    m = params.mass
    force = float(potential.grad(state.x))
    v_new = state.v + dt * (-params.gamma * state.v - force / m + eta / m)
    x_new = state.x + dt * state.v
    if not (math.isfinite(x_new) and math.isfinite(v_new)):
        raise RuntimeError("trajectory diverged")
    return InertialState(x_new, v_new)


def step_overdamped(
    x: float, potential: Potential, params: BathParams, eta: float, dt: float
) -> float:
    """One pre-point step of M gamma dx = (-V'(x) + eta) dt."""
    _check_dt(params, dt)
    _check_dt_overdamped(potential, params, dt)
    x_new = x + (dt / (params.mass * params.gamma)) * (-float(potential.grad(x)) + eta)
    if not math.isfinite(x_new):
        raise RuntimeError("trajectory diverged")
    return float(x_new)


def step_overdamped_postpoint(
    x: float, potential: Potential, params: BathParams, eta: float, dt: float
) -> float:
    """Post-point (advanced) overdamped step, solved by fixed-point iteration.

    Diagnostic counterpart of step_overdamped: the force is evaluated at the
    LATER point, x+ = x + (dt/M gamma)(-V'(x+) + eta). Its stationary-variance
    bias on a harmonic well has the opposite sign to the pre-point stepper.
    """
    _check_dt(params, dt)
    _check_dt_overdamped(potential, params, dt)
    c = dt / (params.mass * params.gamma)
    y = x
    for _ in range(200):
        y_next = x + c * (-float(potential.grad(y)) + eta)
        if not math.isfinite(y_next):
            raise RuntimeError("trajectory diverged")
        if abs(y_next - y) <= 1e-14 * max(1.0, abs(y_next)):
            return float(y_next)
        y = y_next
    raise RuntimeError("post-point iteration did not converge")


@dataclass
class EnsembleStats:
    """Moments, final-state samples, histogram, and optional autocorrelation.

    final_x/final_v hold one entry per trajectory, NaN where the trajectory
    diverged; moments and histograms use the surviving entries only.
    snapshots maps a step index to the per-trajectory positions at that step.
    """

    mode: str
    n_traj: int
    n_diverged: int
    steps: int
    dt: float
    final_x: np.ndarray
    final_v: np.ndarray | None
    mean_x: float
    var_x: float
    se_x: float
    mean_v: float
    var_v: float
    se_v: float
    cov_xv: float
    se_cov_xv: float
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    hist_density: np.ndarray
    autocorr: np.ndarray | None = None
    autocorr_count: int = 0
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)

    def moment_rows(self) -> list[tuple[str, float]]:
        rows = [
            ("n_traj", float(self.n_traj)),
            ("n_diverged", float(self.n_diverged)),
            ("steps", float(self.steps)),
            ("dt", self.dt),
            ("mean_x", self.mean_x),
            ("var_x", self.var_x),
            ("se_x", self.se_x),
        ]
        if self.final_v is not None:
            rows += [
                ("mean_v", self.mean_v),
                ("var_v", self.var_v),
                ("se_v", self.se_v),
                ("cov_xv", self.cov_xv),
                ("se_cov_xv", self.se_cov_xv),
            ]
        return rows

    def histogram_rows(self) -> list[tuple[float, float, float]]:
        return [
            (float(le), float(ri), float(de))
            for le, ri, de in zip(
                self.hist_edges[:-1], self.hist_edges[1:], self.hist_density
            )
        ]


def _draw_chunk(config: SimConfig, g0: int, g1: int, mode: str, noise_scale: float):
    """Initial conditions and step noise for trajectories g0..g1-1."""
    c = g1 - g0
    eta = np.empty((c, config.steps))
    x0s = np.empty(c)
    v0s = np.empty(c)
    inertial = mode == "inertial"
    for j, i in enumerate(range(g0, g1)):
        rng = derive_rng(config.master_seed, i)
        if inertial:
            z = rng.standard_normal(2)
            x0s[j] = config.x0 + config.sigma_x * z[0]
            v0s[j] = config.v0 + config.sigma_v * z[1]
        else:
            x0s[j] = config.x0 + config.sigma_x * rng.standard_normal()
            v0s[j] = config.v0
        eta[j] = rng.standard_normal(config.steps)
    eta *= noise_scale * math.sqrt(config.params.w / config.dt)
    return x0s, v0s, eta


def _evolve_chunk(
    config: SimConfig,
    mode: str,
    x: np.ndarray,
    v: np.ndarray,
    eta: np.ndarray,
    snapshot_steps: tuple[int, ...],
    n_series: int,
):
    """Vectorized stepping of one chunk; frozen-on-divergence accounting.

    Returns (x, v, alive, series, snaps) where series has shape
    (n_series, steps+1) and snaps maps step -> positions (NaN when dead).
    """
    pot, params, dt = config.potential, config.params, config.dt
    m, gamma = params.mass, params.gamma
    alive = np.isfinite(x) & np.isfinite(v)
    series = np.empty((n_series, config.steps + 1)) if n_series else None
    v_series = (
        np.empty((n_series, config.steps + 1))
        if n_series and mode == "inertial"
        else None
    )
    if series is not None:
        series[:, 0] = x[:n_series]
    if v_series is not None:
        v_series[:, 0] = v[:n_series]
    snaps: dict[int, np.ndarray] = {}

    def record(step: int):
        if step in snapshot_steps:
            vals = x.copy()
            vals[~alive] = np.nan
            snaps[step] = vals

    record(0)
    c = dt / (m * gamma)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(config.steps):
            ek = eta[:, k]
            if mode == "inertial":
                force = pot.grad(x)
                v_new = v + dt * (-gamma * v - force / m + ek / m)
                x_new = x + dt * v
            elif mode == "overdamped":
                x_new = x + c * (-pot.grad(x) + ek)
                v_new = v
            else:  # overdamped_postpoint
                y = x.copy()
                for _ in range(200):
                    y_next = x + c * (-pot.grad(y) + ek)
                    bad = ~np.isfinite(y_next)
                    if bad.any():
                        y_next[bad] = y[bad]  # freeze, caught by alive check below
                        y = y_next
                        break
                    if np.max(np.abs(y_next - y)) <= 1e-14 * max(
                        1.0, float(np.max(np.abs(y_next)))
                    ):
                        y = y_next
                        break
                    y = y_next
                x_new = x + c * (-pot.grad(y) + ek)
                v_new = v
            ok = np.isfinite(x_new) & np.isfinite(v_new)
            upd = alive & ok
            x[upd] = x_new[upd]
            v[upd] = v_new[upd]
            alive &= ok
            if series is not None:
                series[:, k + 1] = np.where(alive[:n_series], x[:n_series], np.nan)
            if v_series is not None:
                v_series[:, k + 1] = np.where(alive[:n_series], v[:n_series], np.nan)
            record(k + 1)
    return x, v, alive, series, v_series, snaps


def _validate_run(config: SimConfig, mode: str, snapshot_steps):
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    if mode != "inertial":
        _check_dt_overdamped(config.potential, config.params, config.dt)
    for s in snapshot_steps:
        if not 0 <= int(s) <= config.steps:
            raise ValueError("snapshot step out of range")


def run_ensemble(
    config: SimConfig,
    mode: str = "overdamped",
    *,
    snapshot_steps: tuple[int, ...] = (),
    histogram_bins: int = 64,
    histogram_range: tuple[float, float] | None = None,
    autocorr_lags: int = 0,
    noise_scale: float = 1.0,
) -> EnsembleStats:
    """Evolve n_traj independent trajectories and accumulate statistics.

    Deterministic given config.master_seed. Diverged trajectories are frozen,
    counted, and excluded from every statistic. autocorr_lags > 0 adds a
    time-averaged position autocorrelation estimated from the first
    min(256, n_traj) trajectories.
    """
    snapshot_steps = tuple(int(s) for s in snapshot_steps)
    _validate_run(config, mode, snapshot_steps)
    if not 0 <= autocorr_lags <= config.steps:
        raise ValueError("autocorr_lags must be in [0, steps]")
    n, steps = config.n_traj, config.steps
    n_sub = min(256, n) if autocorr_lags > 0 else 0
    chunk = max(1, min(n, _CHUNK_BUDGET // steps))

    final_x = np.empty(n)
    final_v = np.empty(n) if mode == "inertial" else None
    alive_all = np.empty(n, dtype=bool)
    snaps_all = {s: np.empty(n) for s in snapshot_steps}
    sub_series = np.empty((n_sub, steps + 1)) if n_sub else None

    for g0 in range(0, n, chunk):
        g1 = min(n, g0 + chunk)
        x0s, v0s, eta = _draw_chunk(config, g0, g1, mode, noise_scale)
        n_series = max(0, min(g1, n_sub) - g0)
        x, v, alive, series, _, snaps = _evolve_chunk(
            config, mode, x0s, v0s, eta, snapshot_steps, n_series
        )
        final_x[g0:g1] = x
        if final_v is not None:
            final_v[g0:g1] = v
        alive_all[g0:g1] = alive
        for s in snapshot_steps:
            snaps_all[s][g0:g1] = snaps[s]
        if n_series:
            sub_series[g0 : g0 + n_series] = series

    final_x[~alive_all] = np.nan
    if final_v is not None:
        final_v[~alive_all] = np.nan
    n_alive = int(alive_all.sum())

    xs = final_x[alive_all]
    mean_x, var_x, se_x = _moments(xs)
    if final_v is not None:
        vs = final_v[alive_all]
        mean_v, var_v, se_v = _moments(vs)
        cov_xv, se_cov = _cross(xs, vs)
    else:
        mean_v = var_v = se_v = cov_xv = se_cov = float("nan")

    counts, edges = np.histogram(xs, bins=histogram_bins, range=histogram_range)
    widths = np.diff(edges)
    total = counts.sum()
    density = counts / (total * widths) if total > 0 else np.zeros_like(widths)

    autocorr = None
    if n_sub:
        keep = alive_all[:n_sub]
        autocorr = _series_autocorr(sub_series[keep], autocorr_lags)

    return EnsembleStats(
        mode=mode,
        n_traj=n,
        n_diverged=n - n_alive,
        steps=steps,
        dt=config.dt,
        final_x=final_x,
        final_v=final_v,
        mean_x=mean_x,
        var_x=var_x,
        se_x=se_x,
        mean_v=mean_v,
        var_v=var_v,
        se_v=se_v,
        cov_xv=cov_xv,
        se_cov_xv=se_cov,
        hist_edges=edges,
        hist_counts=counts,
        hist_density=density,
        autocorr=autocorr,
        autocorr_count=int(alive_all[:n_sub].sum()) if n_sub else 0,
        snapshots=snaps_all,
    )


def _moments(vals: np.ndarray) -> tuple[float, float, float]:
    if vals.size == 0:
        return float("nan"), float("nan"), float("nan")
    mean = float(vals.mean())
    var = float(vals.var(ddof=1)) if vals.size > 1 else 0.0
    se = math.sqrt(var / vals.size)
    return mean, var, se


def _cross(xs: np.ndarray, vs: np.ndarray) -> tuple[float, float]:
    if xs.size < 2:
        return float("nan"), float("nan")
    prod = (xs - xs.mean()) * (vs - vs.mean())
    cov = float(prod.sum() / (xs.size - 1))
    se = float(prod.std(ddof=1) / math.sqrt(xs.size))
    return cov, se


def _series_autocorr(series: np.ndarray, lags: int) -> np.ndarray:
    """Time- and ensemble-averaged lagged products <x(t) x(t+k dt)>."""
    if series.shape[0] == 0:
        return np.full(lags + 1, np.nan)
    out = np.empty(lags + 1)
    for k in range(lags + 1):
        a = series[:, : series.shape[1] - k]
        b = series[:, k:]
        out[k] = float(np.mean(a * b))
    return out


@dataclass(frozen=True)
class ExpectationResult:
    """Monte-Carlo estimate of a noise-averaged functional."""

    value: float
    stderr: float
    n_used: int
    n_diverged: int


def noise_expectation(
    functional,
    config: SimConfig,
    mode: str = "overdamped",
    *,
    noise_scale: float = 1.0,
) -> ExpectationResult:
    """Ensemble average of a trajectory functional with jackknife stderr.

    functional(times, xs, vs) -> float receives the full trajectory; vs is
    None outside inertial mode. No reweighting is applied: with pre-point
    stepping the trajectory measure already matches the noise measure (the
    discrete Jacobian is unity). Uses the same per-trajectory streams as
    run_ensemble, so functionals of the final state reproduce its moments
    exactly.
    """
    _validate_run(config, mode, ())
    n, steps = config.n_traj, config.steps
    times = config.times
    chunk = max(1, min(n, _CHUNK_BUDGET // (steps + 1)))
    vals = np.empty(n)
    alive_all = np.empty(n, dtype=bool)

    for g0 in range(0, n, chunk):
        g1 = min(n, g0 + chunk)
        x0s, v0s, eta = _draw_chunk(config, g0, g1, mode, noise_scale)
        c = g1 - g0
        x, v, alive, series, v_series, _ = _evolve_chunk(
            config, mode, x0s, v0s, eta, (), c
        )
        for j in range(c):
            if not alive[j]:
                vals[g0 + j] = np.nan
                continue
            vrow = v_series[j] if v_series is not None else None
            vals[g0 + j] = functional(times, series[j], vrow)
        alive_all[g0:g1] = alive

    good = alive_all & np.isfinite(vals)
    used = vals[good]
    n_used = int(used.size)
    if n_used == 0:
        return ExpectationResult(float("nan"), float("nan"), 0, n)
    total = float(used.sum())
    mean = total / n_used
    if n_used == 1:
        return ExpectationResult(mean, float("nan"), 1, n - 1)
    # delete-one jackknife of the sample mean
    loo = (total - used) / (n_used - 1)
    se = math.sqrt((n_used - 1) / n_used * float(((loo - loo.mean()) ** 2).sum()))
    return ExpectationResult(mean, se, n_used, n - n_used)
