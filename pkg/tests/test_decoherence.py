"""Density-matrix evolution tests: exact substeps, scales, Wigner transform."""

import math

import numpy as np
import pytest

from bathdyn import (
    BathParams,
    DensityField,
    Harmonic,
    Ordering,
    StabilityError,
    decoherence_params,
    gaussian_pure_state,
    interference_amplitude,
    master_step,
    superposition_state,
    wigner_transform,
)

PARAMS = BathParams(mass=1.0, gamma=2.0, k_bt=0.5, hbar=1.0)


def test_decoherence_params_identities():
    d = decoherence_params(PARAMS)
    # w = 2 M gamma kT = 2, Lambda = w / 2 hbar^2
    assert d.w == 2.0
    assert d.lam == 1.0
    assert d.l_e_sq == 4.0 * math.pi
    assert d.l_e == math.sqrt(d.l_e_sq)
    # Lambda * l_e^2 == 2 pi gamma holds to the last bit at these values
    assert d.lam * d.l_e_sq == 2.0 * math.pi * PARAMS.gamma

    doubled = decoherence_params(BathParams(1.0, 2.0, 0.5, hbar=2.0))
    assert doubled.lam == d.lam / 4.0
    assert doubled.l_e_sq == 4.0 * d.l_e_sq

    with pytest.raises(ValueError, match="hbar = 0"):
        decoherence_params(BathParams(1.0, 2.0, 0.5, hbar=0.0))


def test_density_field_validation():
    with pytest.raises(ValueError, match="ny must be odd"):
        DensityField(np.ones((8, 6), dtype=complex), 0.0, 0.1, 0.1)
    with pytest.raises(ValueError, match="2D"):
        DensityField(np.ones(8, dtype=complex), 0.0, 0.1, 0.1)
    with pytest.raises(ValueError, match="spacings"):
        DensityField(np.ones((8, 7), dtype=complex), 0.0, -0.1, 0.1)
    bad = np.ones((8, 7), dtype=complex)
    bad[0, 0] = np.nan
    with pytest.raises(ValueError, match="finite"):
        DensityField(bad, 0.0, 0.1, 0.1)

    f = DensityField(np.ones((8, 7), dtype=complex), -0.35, 0.1, 0.2)
    assert f.nx == 8 and f.ny == 7
    assert f.x_grid[0] == -0.35
    assert f.y_grid[3] == 0.0
    assert f.y_grid[-1] == 3 * 0.2


def test_pure_states_are_normalized_and_hermitian():
    rho = gaussian_pure_state(81, 0.1, 61, 0.12, center=0.2, sigma=0.5)
    assert abs(rho.trace() - 1.0) < 1e-12
    assert rho.herm_deviation() == 0.0
    # diagonal is |psi|^2 with the same discrete normalization
    x = rho.x_grid
    q = np.exp(-((x - 0.2) ** 2) / (2 * 0.5 ** 2))
    q /= q.sum() * rho.dx
    j0 = (rho.ny - 1) // 2
    np.testing.assert_allclose(rho.values[:, j0].real, q, rtol=1e-12)
    assert np.max(np.abs(rho.values[:, j0].imag)) == 0.0

    sup = superposition_state(101, 0.08, 81, 0.2, separation=4.0, sigma=0.3)
    assert abs(sup.trace() - 1.0) < 1e-12
    assert sup.herm_deviation() == 0.0

    with pytest.raises(ValueError, match="sigma"):
        gaussian_pure_state(64, 0.1, 61, 0.1, sigma=0.0)
    with pytest.raises(ValueError, match="separation"):
        superposition_state(64, 0.1, 61, 0.1, separation=0.0, sigma=0.3)


def test_decoherence_substep_is_exact():
    rho = gaussian_pure_state(41, 0.1, 31, 0.12, sigma=0.5)
    d = decoherence_params(PARAMS)
    dt = 0.01
    out = master_step(rho, None, PARAMS, dt, terms=("decoherence",))
    expected = rho.values * np.exp(-d.lam * rho.y_grid ** 2 * dt)[None, :]
    assert np.array_equal(out.values, expected)
    # the y = 0 row carries factor exp(0) = 1, so the trace cannot move
    assert out.trace() == rho.trace()
    assert out.t == dt


def test_friction_substep_leaves_diagonal_untouched():
    rho = gaussian_pure_state(41, 0.1, 31, 0.12, sigma=0.5)
    j0 = (rho.ny - 1) // 2
    out = master_step(rho, None, PARAMS, 0.01, terms=("friction",))
    assert np.array_equal(out.values[:, j0], rho.values[:, j0])
    assert out.trace() == rho.trace()


def test_kinetic_substep_conserves_trace_and_hermiticity():
    rho = gaussian_pure_state(81, 0.1, 61, 0.12, sigma=0.5)
    tr0 = rho.trace()
    r = rho
    for _ in range(20):
        r = master_step(r, None, PARAMS, 0.002, terms=("kinetic",))
    assert abs(r.trace() - tr0) < 1e-12
    assert r.herm_deviation() < 1e-12


def test_friction_cfl_guard():
    rho = gaussian_pure_state(41, 0.1, 31, 0.12, sigma=0.5)
    y_max = float(np.max(np.abs(rho.y_grid)))
    with pytest.raises(StabilityError, match="CFL") as exc:
        master_step(rho, None, PARAMS, 1.0, terms=("friction",))
    suggested = exc.value.suggested_dt
    assert suggested == pytest.approx(rho.dy / (PARAMS.gamma * y_max), rel=1e-14)
    out = master_step(rho, None, PARAMS, 0.999 * suggested, terms=("friction",))
    assert out.herm_deviation() < 1e-12


def test_thermal_length_resolution_guard():
    heavy = BathParams(mass=20.0, gamma=6.25e-3, k_bt=1.0, hbar=1.0)
    d = decoherence_params(heavy)
    rho = gaussian_pure_state(41, 0.1, 31, 0.5, sigma=0.5)
    assert rho.dy > d.l_e / 2.0
    with pytest.raises(ValueError, match="thermal length"):
        master_step(rho, None, heavy, 0.001)


def test_master_step_input_guards():
    rho = gaussian_pure_state(41, 0.1, 31, 0.12, sigma=0.5)
    with pytest.raises(ValueError, match="dt must be > 0"):
        master_step(rho, None, PARAMS, 0.0)
    with pytest.raises(ValueError, match="unknown term"):
        master_step(rho, None, PARAMS, 0.01, terms=("kinetic", "noise"))
    classical = BathParams(1.0, 2.0, 0.5, hbar=0.0)
    with pytest.raises(ValueError, match="hbar must be > 0"):
        master_step(rho, None, classical, 0.01)


def test_symmetric_ordering_scales_trace():
    rho = gaussian_pure_state(41, 0.1, 31, 0.12, sigma=0.5)
    dt = 0.01
    factor = math.exp(-PARAMS.gamma * dt / 2.0)
    r = rho
    for k in range(1, 6):
        r = master_step(r, None, PARAMS, dt, ordering=Ordering.SYMMETRIC,
                        terms=("decoherence",))
        assert r.trace().real == pytest.approx(factor ** k, rel=1e-12)


def test_potential_substep_is_pure_phase():
    pot = Harmonic(1.0, 1.0)
    rho = gaussian_pure_state(41, 0.1, 31, 0.12, sigma=0.5)
    out = master_step(rho, pot, PARAMS, 0.01, terms=("potential",))
    # phase factor has unit modulus, so |rho| is unchanged everywhere
    np.testing.assert_allclose(np.abs(out.values), np.abs(rho.values),
                               rtol=1e-13)
    assert abs(out.trace() - rho.trace()) < 1e-13
    assert out.herm_deviation() < 1e-12


def test_hermiticity_violation_is_fatal():
    rng = np.random.default_rng(11)
    vals = rng.normal(size=(21, 15)) + 1j * rng.normal(size=(21, 15))
    vals /= np.abs(vals).max()
    rho = DensityField(vals, -1.0, 0.1, 0.12)
    assert rho.herm_deviation() > 1e-8
    with pytest.raises(RuntimeError, match="hermiticity violated"):
        master_step(rho, None, PARAMS, 0.001, terms=("decoherence",))


def test_wigner_of_gaussian_matches_closed_form():
    sigma = 0.5
    rho = gaussian_pure_state(81, 0.1, 201, 0.15, sigma=sigma)
    w, p = wigner_transform(rho, 1.0)
    x = rho.x_grid
    analytic = (1.0 / math.pi) * np.exp(
        -x[:, None] ** 2 / (2 * sigma ** 2) - 2 * sigma ** 2 * p[None, :] ** 2
    )
    assert np.max(np.abs(w - analytic)) < 1e-12
    # on the conjugate momentum grid the double Riemann sum is the trace
    dp = p[1] - p[0]
    assert abs(w.sum() * rho.dx * dp - rho.trace().real) < 1e-12


def test_wigner_shift_theorem():
    # multiplying rho by exp(i p0 y / hbar) shifts the transform argument
    rho = gaussian_pure_state(81, 0.1, 201, 0.15, sigma=0.5)
    p0 = 1.3
    phase = np.exp(1j * p0 * rho.y_grid / 1.0)
    rho2 = DensityField(rho.values * phase[None, :], rho.x0, rho.dx, rho.dy)
    assert rho2.herm_deviation() == 0.0
    pg = np.linspace(-3.0, 3.0, 41)
    w2, _ = wigner_transform(rho2, 1.0, p_grid=pg)
    w1, _ = wigner_transform(rho, 1.0, p_grid=pg + p0)
    assert np.max(np.abs(w2 - w1)) < 1e-12


def test_wigner_input_guards():
    rho = gaussian_pure_state(41, 0.1, 31, 0.12, sigma=0.5)
    with pytest.raises(ValueError, match="hbar"):
        wigner_transform(rho, 0.0)
    rng = np.random.default_rng(5)
    vals = (rng.normal(size=(21, 15)) + 1j * rng.normal(size=(21, 15)))
    lopsided = DensityField(vals, 0.0, 0.1, 0.12)
    with pytest.raises(ValueError, match="Hermitian"):
        wigner_transform(lopsided, 1.0)


def test_interference_amplitude_decays_monotonically():
    heavy = BathParams(mass=20.0, gamma=6.25e-3, k_bt=1.0, hbar=1.0)
    rho = superposition_state(101, 0.08, 81, 0.2, separation=4.0, sigma=0.3)
    amps = [interference_amplitude(rho, heavy.hbar)]
    r = rho
    for _ in range(10):
        r = master_step(r, None, heavy, 0.002, terms=("decoherence",))
        amps.append(interference_amplitude(r, heavy.hbar))
    assert all(a > b > 0.0 for a, b in zip(amps, amps[1:]))
