"""Grid solver tests: exact fixed points, stability guards, convergence."""

import math

import numpy as np
import pytest

from bathdyn import (
    BathParams,
    ComparisonRecord,
    DoubleWell,
    Harmonic,
    Ordering,
    PhaseGrid,
    ProbField,
    SimConfig,
    StabilityError,
    compare_langevin_fp,
    gaussian_field_1d,
    gaussian_field_2d,
    kramers_step,
    smoluchowski_step,
)
from bathdyn.fokker_planck import kramers_dt_max, smoluchowski_dt_max

PARAMS = BathParams(mass=1.0, gamma=1.0, k_bt=0.5, hbar=0.0)
HARMONIC = Harmonic(1.0, 1.0)


def test_phase_grid_validation():
    with pytest.raises(ValueError, match="x_max must exceed"):
        PhaseGrid(2.0, -2.0, 64)
    with pytest.raises(ValueError, match="nx must be >= 16"):
        PhaseGrid(-2.0, 2.0, 8)
    with pytest.raises(ValueError, match="given together"):
        PhaseGrid(-2.0, 2.0, 64, v_min=-1.0)
    with pytest.raises(ValueError, match="nv must be >= 16"):
        PhaseGrid(-2.0, 2.0, 64, v_min=-1.0, v_max=1.0, nv=4)
    with pytest.raises(ValueError, match="finite"):
        PhaseGrid(-np.inf, 2.0, 64)

    g = PhaseGrid(-2.0, 2.0, 64)
    assert not g.is_2d
    assert g.dx == 4.0 / 64
    assert g.x_centers[0] == -2.0 + 0.5 * g.dx
    assert g.x_faces.shape == (63,)
    with pytest.raises(ValueError, match="no v"):
        g.dv
    with pytest.raises(ValueError, match="no v"):
        g.v_centers

    g2 = PhaseGrid(-2.0, 2.0, 32, v_min=-3.0, v_max=3.0, nv=48)
    assert g2.is_2d
    assert g2.dv == 6.0 / 48
    assert g2.v_faces.shape == (47,)


def test_prob_field_validation_and_moments():
    grid = PhaseGrid(-5.0, 5.0, 512)
    with pytest.raises(ValueError, match="shape"):
        ProbField(np.ones(100), grid)
    bad = np.ones(512)
    bad[3] = -1e-3
    with pytest.raises(ValueError, match="negative"):
        ProbField(bad, grid)
    with pytest.raises(ValueError, match="finite"):
        ProbField(np.full(512, np.nan), grid)

    f = gaussian_field_1d(grid, 0.3, 0.7)
    assert abs(f.mass - 1.0) < 1e-12
    mean, var = f.moments()
    assert abs(mean - 0.3) < 1e-8
    assert abs(var - 0.49) < 1e-8
    rows = list(f.rows())
    assert len(rows) == 512
    assert rows[0][0] == grid.x_centers[0]

    g2 = PhaseGrid(-4.0, 4.0, 32, v_min=-4.0, v_max=4.0, nv=24)
    f2 = gaussian_field_2d(g2, 0.5, 0.6, -0.2, 0.8)
    assert abs(f2.mass - 1.0) < 1e-12
    mean2, _ = f2.moments()
    assert abs(mean2 - 0.5) < 1e-6
    assert len(list(f2.rows())) == 32 * 24


def test_gaussian_field_guards():
    grid = PhaseGrid(-2.0, 2.0, 64)
    with pytest.raises(ValueError, match="sigma"):
        gaussian_field_1d(grid, 0.0, 0.0)
    g2 = PhaseGrid(-2.0, 2.0, 32, v_min=-1.0, v_max=1.0, nv=16)
    with pytest.raises(ValueError, match="1D"):
        gaussian_field_1d(g2, 0.0, 0.5)
    with pytest.raises(ValueError, match="2D"):
        gaussian_field_2d(grid, 0.0, 0.5, 0.0, 0.5)


def test_harmonic_boltzmann_is_exact_fixed_point():
    # midpoint face gradients make exp(-V/kT) at cell centers an exact
    # stationary state of the exponential-fitting flux for quadratic V
    grid = PhaseGrid(-4.0, 4.0, 64)
    q = np.exp(-HARMONIC.value(grid.x_centers) / PARAMS.k_bt)
    q /= q.sum() * grid.dx
    f0 = ProbField(q, grid)
    dt = 0.9 * smoluchowski_dt_max(grid, HARMONIC, PARAMS)
    f = f0
    for _ in range(50):
        f = smoluchowski_step(f, HARMONIC, PARAMS, Ordering.MOMENTA_LEFT, dt)
    rel = np.max(np.abs(f.values - f0.values)) / np.max(f0.values)
    assert rel < 1e-13
    assert f.t == pytest.approx(50 * dt, rel=1e-12)


def test_smoluchowski_mass_conservation():
    grid = PhaseGrid(-3.0, 3.0, 128)
    f = gaussian_field_1d(grid, 0.4, 0.5)
    dt = 0.9 * smoluchowski_dt_max(grid, HARMONIC, PARAMS)
    for _ in range(80):
        f = smoluchowski_step(f, HARMONIC, PARAMS, Ordering.MOMENTA_LEFT, dt)
    assert abs(f.mass - 1.0) < 1e-12
    assert f.values.min() >= -1e-10 * f.values.max()


def test_double_well_stationary_state_refines_quadratically():
    pot = DoubleWell(-1.0, 0.25)

    def l1_error(nx):
        g = PhaseGrid(-3.2, 3.2, nx)
        fld = gaussian_field_1d(g, 0.0, 0.8)
        dt = 0.9 * smoluchowski_dt_max(g, pot, PARAMS)
        n = int(math.ceil(6.0 / dt))
        dt = 6.0 / n
        for _ in range(n):
            fld = smoluchowski_step(fld, pot, PARAMS, Ordering.MOMENTA_LEFT, dt)
        ref = np.exp(-pot.value(g.x_centers) / PARAMS.k_bt)
        ref /= ref.sum() * g.dx
        return float(np.sum(np.abs(fld.values - ref)) * g.dx)

    coarse = l1_error(128)
    fine = l1_error(256)
    assert coarse < 2e-3
    assert coarse / fine > 3.0


def test_smoluchowski_stability_guard_and_recovery():
    grid = PhaseGrid(-4.0, 4.0, 64)
    f = gaussian_field_1d(grid, 0.0, 0.7)
    with pytest.raises(StabilityError, match="suggested dt") as exc:
        smoluchowski_step(f, HARMONIC, PARAMS, Ordering.MOMENTA_LEFT, 1.0)
    good = 0.999 * exc.value.suggested_dt
    out = smoluchowski_step(f, HARMONIC, PARAMS, Ordering.MOMENTA_LEFT, good)
    assert abs(out.mass - 1.0) < 1e-12
    with pytest.raises(ValueError, match="dt must be > 0"):
        smoluchowski_step(f, HARMONIC, PARAMS, Ordering.MOMENTA_LEFT, -0.1)
    g2 = PhaseGrid(-2.0, 2.0, 32, v_min=-2.0, v_max=2.0, nv=32)
    f2 = gaussian_field_2d(g2, 0.0, 0.5, 0.0, 0.5)
    with pytest.raises(ValueError, match="1D"):
        smoluchowski_step(f2, HARMONIC, PARAMS, Ordering.MOMENTA_LEFT, 1e-4)


def test_kramers_stability_guard_and_recovery():
    grid = PhaseGrid(-3.0, 3.0, 32, v_min=-3.0, v_max=3.0, nv=32)
    f = gaussian_field_2d(grid, 0.0, 0.6, 0.0, 0.6)
    with pytest.raises(StabilityError, match="phase-space") as exc:
        kramers_step(f, HARMONIC, PARAMS, Ordering.MOMENTA_LEFT, 0.5)
    good = 0.999 * exc.value.suggested_dt
    out = kramers_step(f, HARMONIC, PARAMS, Ordering.MOMENTA_LEFT, good)
    assert abs(out.mass - 1.0) < 1e-12
    grid1 = PhaseGrid(-3.0, 3.0, 32)
    f1 = gaussian_field_1d(grid1, 0.0, 0.6)
    with pytest.raises(ValueError, match="2D"):
        kramers_step(f1, HARMONIC, PARAMS, Ordering.MOMENTA_LEFT, 1e-4)
    with pytest.raises(ValueError, match="2D"):
        kramers_dt_max(grid1, HARMONIC, PARAMS)


def test_kramers_momenta_left_conserves_mass():
    grid = PhaseGrid(-4.0, 4.0, 48, v_min=-4.0, v_max=4.0, nv=48)
    f = gaussian_field_2d(grid, 0.5, 0.6, 0.0, 0.7)
    dt = 0.9 * kramers_dt_max(grid, HARMONIC, PARAMS)
    for _ in range(60):
        f = kramers_step(f, HARMONIC, PARAMS, Ordering.MOMENTA_LEFT, dt)
    assert abs(f.mass - 1.0) < 1e-10
    assert f.values.min() >= -1e-10 * f.values.max()


def test_kramers_symmetric_single_step_mass_factor():
    # transport is conservative, so one symmetric step scales the total
    # mass by exactly exp(-gamma dt / 2)
    grid = PhaseGrid(-3.0, 3.0, 32, v_min=-3.0, v_max=3.0, nv=32)
    f0 = gaussian_field_2d(grid, 0.0, 0.6, 0.0, 0.6)
    dt = 0.5 * kramers_dt_max(grid, HARMONIC, PARAMS)
    f1 = kramers_step(f0, HARMONIC, PARAMS, Ordering.SYMMETRIC, dt)
    expected = f0.mass * math.exp(-PARAMS.gamma * dt / 2.0)
    assert abs(f1.mass - expected) < 1e-13 * expected


def test_smoluchowski_symmetric_harmonic_decay_rate():
    # sink factor exp(-dt V''/2 M gamma) is constant for harmonic V, so
    # the mass decays at exactly omega0^2 / (2 gamma) per unit time
    grid = PhaseGrid(-4.0, 4.0, 64)
    f = gaussian_field_1d(grid, 0.0, 0.7)
    dt = 0.5 * smoluchowski_dt_max(grid, HARMONIC, PARAMS)
    n = 40
    for _ in range(n):
        f = smoluchowski_step(f, HARMONIC, PARAMS, Ordering.SYMMETRIC, dt)
    rate = -math.log(f.mass) / (n * dt)
    assert rate == pytest.approx(0.5, rel=1e-12)


def _compare_config(**over):
    base = dict(
        potential=HARMONIC,
        params=PARAMS,
        dt=0.01,
        steps=40,
        n_traj=4000,
        master_seed=909,
        x0=0.5,
        sigma_x=0.0,
    )
    base.update(over)
    return SimConfig(**base)


def test_compare_langevin_fp_budget_and_records():
    cfg = _compare_config()
    grid = PhaseGrid(-3.0, 3.0, 128)
    times = (0.0, 0.2, 0.4)
    records, stats = compare_langevin_fp(cfg, grid, times, n_bins=32)
    assert [r.t for r in records] == list(times)
    assert stats.n_traj == 4000
    for rec in records:
        assert rec.l1 < 3.0 * (rec.stat_err + rec.disc_err)
        assert rec.sup >= 0.0
        assert rec.n_samples == 4000
        d = rec.as_dict()
        assert set(d) == {
            "t", "l1", "sup", "stat_err", "disc_err",
            "ens_mean", "ens_var", "fp_mean", "fp_var", "n_samples",
        }
    # both descriptions start centered on x0
    assert records[0].ens_mean == pytest.approx(0.5, abs=0.02)
    assert records[0].fp_mean == pytest.approx(0.5, abs=1e-6)
    # later means relax toward the origin together
    assert records[-1].fp_mean < records[0].fp_mean
    assert abs(records[-1].ens_mean - records[-1].fp_mean) < 0.05


def test_compare_langevin_fp_input_guards():
    cfg = _compare_config()
    grid = PhaseGrid(-3.0, 3.0, 128)
    g2 = PhaseGrid(-3.0, 3.0, 32, v_min=-1.0, v_max=1.0, nv=16)
    with pytest.raises(ValueError, match="1D grid"):
        compare_langevin_fp(cfg, g2, (0.1,))
    with pytest.raises(ValueError, match="n_bins must divide nx"):
        compare_langevin_fp(cfg, grid, (0.1,), n_bins=48)
    with pytest.raises(ValueError, match="multiples of dt"):
        compare_langevin_fp(cfg, grid, (0.013,))
    with pytest.raises(ValueError, match="multiples of dt"):
        compare_langevin_fp(cfg, grid, (1.5,))  # beyond steps * dt
    bad = _compare_config(x0=10.0)
    with pytest.raises(ValueError, match="mismatched domains"):
        compare_langevin_fp(bad, grid, (0.1,))
