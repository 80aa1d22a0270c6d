"""Shaking kinematics, stochastic signal synthesis, and spectral estimation.

The drive displaces the trap as z(t) = a*sin(Omega*t + phase); the frame
acceleration is A(t) = -Omega^2 * a * sin(Omega*t + phase) and couples to the
atoms through the linear potential V(z, t) = m*A(t)*z.

Spectral conventions, fixed once here and relied on downstream:
  - windowed transform over [0, t] with the e^{+i*omega*t'} kernel,
  - two-sided spectral density S_t(omega) = <|A~_t(omega)|^2>/t,
  - mean square of the signal recovered as (1/2pi) * integral of S over omega,
  - pure tones carried as symbolic delta lines (location, weight), never as
    tall narrow grid bumps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, SpectralValueUnavailable, UnderResolved

NOISE_KINDS = ("white", "band_limited")

# Minimum sampling: five points per half period of the deterministic sine.
MAX_DT_FACTOR = math.pi / 5.0

# Delta-line lookup tolerance, relative to the line location.
LINE_MATCH_RTOL = 1e-9


@dataclass(frozen=True)
class NoiseSpec:
    """Stochastic acceleration component added on top of the sine.

    accel_psd_level is the two-sided acceleration PSD in (m/s^2)^2/(rad/s);
    band bounds (rad/s) apply to band_limited noise only.
    """

    kind: str
    accel_psd_level: float
    seed: int = 0
    band: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if self.accel_psd_level < 0.0:
            raise ValueError("accel_psd_level must be non-negative")
        if self.kind == "band_limited":
            if self.band is None:
                raise ValueError("band_limited noise requires a band")
            lo, hi = self.band
            if not lo < hi:
                raise ValueError("noise band must satisfy lo < hi")


@dataclass(frozen=True)
class DriveSpec:
    """Sinusoidal trap-shaking signal, optionally with stochastic noise."""

    amplitude: float          # m
    angular_frequency: float  # rad/s
    phase: float = 0.0        # rad
    noise: NoiseSpec | None = None

    def __post_init__(self) -> None:
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be non-negative")
        if self.angular_frequency <= 0.0:
            raise ValueError("angular_frequency must be positive")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.angular_frequency

    @property
    def peak_acceleration(self) -> float:
        """A0 = a*Omega^2, the acceleration amplitude of the shaker."""
        return self.amplitude * self.angular_frequency**2


@dataclass(frozen=True)
class SampledSignal:
    """Real-valued signal on a uniform time grid t_k = k*dt."""

    dt: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if len(self.samples) < 2:
            raise ValueError("a sampled signal needs at least two samples")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))

    @property
    def duration(self) -> float:
        return self.dt * (len(self.samples) - 1)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.samples))


@dataclass(frozen=True)
class SpectralDensity:
    """Two-sided spectral density: sampled grid plus exact delta lines.

    delta_lines are (omega0, weight) pairs standing for weight*delta(omega-omega0);
    the sampled part must be non-negative and sorted by omega.
    """

    omega: np.ndarray
    values: np.ndarray
    delta_lines: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        omega = np.asarray(self.omega, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if omega.shape != values.shape:
            raise ValueError("omega and values must have matching shapes")
        if omega.size and np.any(np.diff(omega) <= 0):
            raise ValueError("omega grid must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("spectral density values must be non-negative")
        for _, weight in self.delta_lines:
            if weight < 0:
                raise ValueError("delta-line weights must be non-negative")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "delta_lines", tuple(self.delta_lines))

    def line_at(self, omega: float) -> float | None:
        """Weight of a delta line at omega, or None if no line sits there."""
        for omega0, weight in self.delta_lines:
            if abs(omega - omega0) <= LINE_MATCH_RTOL * max(abs(omega0), abs(omega)):
                return weight
        return None

    def value_at(self, omega: float) -> tuple[float, bool]:
        """Evaluate at omega; returns (value, is_distributional).

        A delta line hit returns its weight with the distributional flag set.
        Otherwise the sampled grid is interpolated linearly. A purely discrete
        spectrum (lines only) is exactly zero between its lines.
        """
        weight = self.line_at(omega)
        if weight is not None:
            return weight, True
        if self.omega.size:
            if self.omega[0] <= omega <= self.omega[-1]:
                return float(np.interp(omega, self.omega, self.values)), False
            raise SpectralValueUnavailable(
                f"omega={omega:g} outside sampled grid "
                f"[{self.omega[0]:g}, {self.omega[-1]:g}] and not on a delta line"
            )
        if self.delta_lines:
            return 0.0, False
        raise SpectralValueUnavailable("empty spectral density")


def displacement(drive: DriveSpec, t):
    """Deterministic trap displacement a*sin(Omega*t + phase); noise excluded."""
    return drive.amplitude * np.sin(drive.angular_frequency * t + drive.phase)


def acceleration(drive: DriveSpec, t):
    """Deterministic frame acceleration A(t) = -Omega^2 * a * sin(Omega*t + phase).

    The stochastic component has no pointwise value (white noise has infinite
    pointwise variance); noise realizations live on sampling grids, see
    synth_signal.
    """
    omega = drive.angular_frequency
    return -(omega**2) * drive.amplitude * np.sin(omega * t + drive.phase)


def perturbation_potential(mass: float, drive: DriveSpec, z, t):
    """Linear shaking potential m*A(t)*z; mass resolved by the caller's convention."""
    return mass * acceleration(drive, t) * z


def _noise_realization(noise: NoiseSpec, dt: float, n: int) -> np.ndarray:
    """Gaussian noise with the requested two-sided PSD, synthesized in frequency
    space from a seeded generator. Identical seed => identical samples."""
    omega = 2.0 * math.pi * np.fft.rfftfreq(n, d=dt)
    target = np.full(omega.size, noise.accel_psd_level)
    if noise.kind == "band_limited":
        lo, hi = noise.band
        target = np.where((omega >= lo) & (omega <= hi), noise.accel_psd_level, 0.0)

    # E|X_j|^2 = S(omega_j) * n / dt reproduces S under the |A~|^2/t estimator.
    scale = np.sqrt(target * n / dt)
    rng = np.random.default_rng(noise.seed)
    re = rng.standard_normal(omega.size)
    im = rng.standard_normal(omega.size)
    coeff = (re + 1j * im) * (scale / math.sqrt(2.0))
    coeff[0] = re[0] * scale[0]
    if n % 2 == 0:
        coeff[-1] = re[-1] * scale[-1]
    return np.fft.irfft(coeff, n=n)


def synth_signal(drive: DriveSpec, dt: float, n: int) -> SampledSignal:
    """Sample the acceleration signal at t_k = k*dt, k = 0..n-1.

    The deterministic sine is evaluated exactly; noise, when configured, is a
    seeded realization from its spectral synthesizer.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if dt > MAX_DT_FACTOR / drive.angular_frequency:
        raise UnderResolved(
            f"dt={dt:g} too coarse for Omega={drive.angular_frequency:g} rad/s "
            f"(need dt <= {MAX_DT_FACTOR / drive.angular_frequency:g})"
        )
    times = dt * np.arange(n)
    samples = acceleration(drive, times)
    if drive.noise is not None and drive.noise.accel_psd_level > 0.0:
        samples = samples + _noise_realization(drive.noise, dt, n)
    return SampledSignal(dt=dt, samples=samples)


def _trapezoid_weights(m: int, dt: float) -> np.ndarray:
    w = np.full(m, dt)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _cutoff_index(signal: SampledSignal, t: float | None) -> int:
    if t is None:
        return len(signal.samples) - 1
    k = int(round(t / signal.dt))
    return min(max(k, 1), len(signal.samples) - 1)


def windowed_fourier(signal: SampledSignal, omega, t: float | None = None):
    """Windowed transform integral of e^{+i*omega*t'} A(t') over [0, t].

    Trapezoidal quadrature on the sample grid; t defaults to the full signal
    duration and is otherwise rounded to the nearest sample time. omega may be
    a scalar or an array (one transform value per frequency).
    """
    k = _cutoff_index(signal, t)
    samples = signal.samples[: k + 1]
    times = signal.dt * np.arange(k + 1)
    weighted = _trapezoid_weights(k + 1, signal.dt) * samples

    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty(omega_arr.shape, dtype=complex)
    # chunked so the phase matrix stays small for long signals
    chunk = max(1, int(4_000_000 / max(len(times), 1)))
    for start in range(0, omega_arr.size, chunk):
        block = omega_arr[start : start + chunk]
        phases = np.exp(1j * np.outer(block, times))
        out[start : start + chunk] = phases @ weighted
    if np.isscalar(omega) or np.asarray(omega).ndim == 0:
        return complex(out[0])
    return out


def psd_estimate(realizations: list[SampledSignal], omega_grid) -> SpectralDensity:
    """Mean power spectral density S_t(omega) = <|A~_t(omega)|^2>/t.

    All realizations must share dt and length; output is grid-only (no delta
    lines). The average over realizations is a deterministic reduction.
    """
    if not realizations:
        raise ValueError("at least one realization required")
    first = realizations[0]
    for sig in realizations[1:]:
        if len(sig.samples) != len(first.samples) or sig.dt != first.dt:
            raise LengthMismatch("realizations must share length and dt")

    omega_arr = np.sort(np.asarray(omega_grid, dtype=float))
    duration = first.duration
    power = np.zeros((len(realizations), omega_arr.size))
    for r, sig in enumerate(realizations):
        transform = windowed_fourier(sig, omega_arr)
        power[r] = np.abs(transform) ** 2
    mean_power = np.mean(power, axis=0)
    return SpectralDensity(omega=omega_arr, values=mean_power / duration)


def analytic_psd_sine(accel_amplitude: float, angular_frequency: float) -> SpectralDensity:
    """Exact spectral density of a pure tone A0*sin(Omega*t).

    Two delta lines (pi*A0^2/2) * [delta(omega - Omega) + delta(omega + Omega)];
    under the (1/2pi) d(omega) measure these integrate to the mean square A0^2/2.
    """
    if accel_amplitude < 0.0:
        raise ValueError("accel_amplitude must be non-negative")
    if angular_frequency <= 0.0:
        raise ValueError("angular_frequency must be positive")
    weight = math.pi * accel_amplitude**2 / 2.0
    return SpectralDensity(
        omega=np.array([]),
        values=np.array([]),
        delta_lines=((-angular_frequency, weight), (angular_frequency, weight)),
    )


def spectral_mean_square(density: SpectralDensity) -> float:
    """(1/2pi) * integral of S over its grid plus the summed line weights.

    For the acceleration signal this recovers the time-averaged <A^2>.
    """
    total = 0.0
    if density.omega.size >= 2:
        total += float(np.trapezoid(density.values, density.omega))
    total += sum(weight for _, weight in density.delta_lines)
    return total / (2.0 * math.pi)


__all__ = [
    "DriveSpec",
    "NoiseSpec",
    "SampledSignal",
    "SpectralDensity",
    "acceleration",
    "analytic_psd_sine",
    "displacement",
    "perturbation_potential",
    "psd_estimate",
    "spectral_mean_square",
    "synth_signal",
    "windowed_fourier",
]
