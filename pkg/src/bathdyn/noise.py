"""Gaussian noise generation with prescribed correlation <eta eta> = w K.

White noise is an iid normal sequence of variance w/dt (the delta function
discretized as delta_nm / dt). Colored noise with the classical Drude kernel
is synthesized by circulant spectral factorization: mode amplitudes
proportional to sqrt(w K(omega_k)) on a grid padded to twice the requested
length so wrap-around correlation is suppressed; alias images
K(omega + 2 pi m / dt), |m| <= 3, are folded into the mode powers so the
lag-0 covariance reproduces w K(0) without a Nyquist deficit.

Seeding: streams derive from numpy SeedSequence with the master seed as
entropy and the trajectory index as spawn key, so ensembles are
order-independent and parallelizable, and every draw is reproducible for a
fixed numpy generation (PCG64).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import DiscreteBath, Drude, Ohmic, SpectralDensity, noise_kernel_freq, BathParams

__all__ = [
    "NoiseSpec",
    "NoiseTrajectory",
    "derive_rng",
    "white_noise",
    "colored_noise",
    "estimate_autocorr",
]


def derive_rng(master_seed: int, index: int | None = None) -> np.random.Generator:
    """Generator for the master stream, or for derived trajectory stream `index`."""
    if index is None:
        ss = np.random.SeedSequence(entropy=master_seed)
    else:
        ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class NoiseSpec:
    """Recipe for one noise trajectory.

    kernel None means white noise; a Drude model with hbar = 0 selects the
    classical colored kernel. w >= 0 scales the correlation <eta eta> = w K.
    """

    kernel: SpectralDensity | None
    w: float
    dt: float
    n: int
    seed: int
    hbar: float = 0.0
    k_bt: float = 1.0

    def __post_init__(self):
        if self.w < 0:
            raise ValueError("w must be >= 0")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.n >= 2:
            raise ValueError("n must be >= 2")


@dataclass(frozen=True)
class NoiseTrajectory:
    """Sampled noise sequence together with the spec that produced it."""

    samples: np.ndarray
    spec: NoiseSpec

    @property
    def times(self) -> np.ndarray:
        return self.spec.dt * np.arange(self.spec.n)

    def to_csv(self, path) -> None:
        from .cli import write_csv

        rows = ((i, t, s) for i, (t, s) in enumerate(zip(self.times, self.samples)))
        write_csv(path, ("index", "t", "eta"), rows)


def white_noise(spec: NoiseSpec) -> NoiseTrajectory:
    """iid N(0, w/dt) sequence of length n from the seeded stream."""
    if spec.kernel is not None:
        raise ValueError("white_noise requires spec.kernel = None")
    rng = derive_rng(spec.seed)
    samples = rng.standard_normal(spec.n) * np.sqrt(spec.w / spec.dt)
    return NoiseTrajectory(samples=samples, spec=spec)


def colored_noise(spec: NoiseSpec) -> NoiseTrajectory:
    """Stationary Gaussian sequence with spectrum w K(omega), classical Drude only."""
    model = spec.kernel
    if model is None:
        raise ValueError("colored_noise requires a kernel model; use white_noise for None")
    if isinstance(model, Ohmic):
        raise ValueError(
            "needs a Drude cutoff: the Ohmic kernel synthesizes white noise; "
            "use white_noise"
        )
    if isinstance(model, DiscreteBath):
        raise ValueError("distributional density: discrete baths have no smooth spectrum")
    if not isinstance(model, Drude):
        raise TypeError(f"unknown kernel model: {model!r}")
    if spec.hbar != 0.0:
        raise ValueError(
            "non-integrable spectrum: the quantum Drude kernel has a 1/omega tail "
            "whose sampled variance diverges with bandwidth; use hbar = 0"
        )
    m = 2 * spec.n  # padding suppresses wrap-around correlation
    omega = 2.0 * np.pi * np.fft.fftfreq(m, spec.dt)
    params = BathParams(mass=1.0, gamma=1.0, k_bt=spec.k_bt, hbar=0.0)
    power = np.zeros(m)
    for fold in range(-3, 4):
        power += noise_kernel_freq(params, model, omega + fold * 2.0 * np.pi / spec.dt)
    power *= spec.w / spec.dt
    if np.any(power < 0):
        raise ValueError("kernel spectrum must be nonnegative")
    rng = derive_rng(spec.seed)
    half = m // 2
    re = rng.standard_normal(half + 1)
    im = rng.standard_normal(half + 1)
    amp = np.sqrt(power[: half + 1] / m)
    coef = amp * (re + 1j * im) / np.sqrt(2.0)
    coef[0] = amp[0] * re[0]  # DC and Nyquist modes are real
    coef[half] = amp[half] * re[half]
    samples = m * np.fft.irfft(coef, n=m)
    return NoiseTrajectory(samples=samples[: spec.n].copy(), spec=spec)


def estimate_autocorr(traj: NoiseTrajectory, max_lag: int) -> np.ndarray:
    """Autocovariance estimate c(k) = mean(eta_n eta_{n+k}), k = 0..max_lag.

    Unbiased lagged products without mean removal; max_lag must stay below
    a tenth of the record so every lag keeps ample averaging.
    """
    x = np.asarray(traj.samples, dtype=float)
    n = x.size
    if not 0 <= max_lag < n / 10:
        raise ValueError("max_lag must satisfy 0 <= max_lag < n/10")
    out = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        if k == 0:
            out[k] = float(np.mean(x * x))
        else:
            out[k] = float(np.mean(x[:-k] * x[k:]))
    return out
