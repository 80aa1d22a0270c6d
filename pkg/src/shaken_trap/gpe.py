"""1D Gross-Pitaevskii solver for the shaken trap.

Strang split-step on a periodic spectral grid: half potential kick, full
kinetic step in Fourier space, half potential kick, with the time-dependent
potential sampled at the step midpoint. The same kernel run with dt -> -i*dtau
and per-step renormalization prepares the ground state by imaginary time.

The 3D cloud is reduced to the axial direction with the quasi-1D coupling
g1 = g / (2*pi*l_perp^2), l_perp = sqrt(hbar/(m*omega_perp)), so the
wavefunction is normalized to the atom number with units m^(-1/2).

The center of mass of a harmonically trapped cloud under a linear drive obeys
the classical forced-oscillator equation independent of the interaction; the
ODE solution (and its closed form for a sine) is the solver's oracle.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .config import ExperimentConfig, TrapConfig
from .constants import CONSTANTS
from .drive import DriveSpec, acceleration
from .errors import DomainEscape, GridTooCoarse, NoConvergence, NormDrift
from .thomas_fermi import MuModel, chemical_potential, coupling_constant, tf_radius

NORM_DRIFT_TOL = 1e-6
BOUNDARY_DENSITY_TOL = 1e-6
_HBAR = CONSTANTS.hbar


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-halfwidth, halfwidth)."""

    n_points: int
    halfwidth: float

    def __post_init__(self) -> None:
        if self.n_points < 64 or self.n_points & (self.n_points - 1):
            raise ValueError("n_points must be a power of two >= 64")
        if self.halfwidth <= 0.0:
            raise ValueError("halfwidth must be positive")

    @property
    def dz(self) -> float:
        return 2.0 * self.halfwidth / self.n_points

    @property
    def z(self) -> np.ndarray:
        return -self.halfwidth + self.dz * np.arange(self.n_points)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n_points, d=self.dz)


@dataclass(frozen=True)
class WaveFunction:
    """Complex field on a Grid1D; sum(|psi|^2) dz equals the atom number."""

    grid: Grid1D
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise ValueError("values must match the grid")
        object.__setattr__(self, "values", values)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dz)


@dataclass(frozen=True)
class Observables:
    time: float
    norm: float
    energy: float        # J, total
    com: float           # m
    peak_density: float  # 1/m
    width: float         # m


@dataclass(frozen=True)
class EvolutionResult:
    observables: list[Observables]
    snapshots: list[WaveFunction]
    final: WaveFunction


def quasi1d_coupling(cfg: ExperimentConfig) -> float:
    """g1 = g / (2*pi*l_perp^2) with omega_perp = sqrt(omega_x*omega_y)."""
    mass = cfg.species.atomic_mass
    g3d = coupling_constant(cfg.species, mass)
    omega_perp = math.sqrt(cfg.trap.omega_x * cfg.trap.omega_y)
    l_perp_sq = _HBAR / (mass * omega_perp)
    return g3d / (2.0 * math.pi * l_perp_sq)


def mu_tf_1d(n_atoms: int, g1: float, mass: float, omega_z: float) -> float:
    """TF chemical potential of the 1D reduced equation.

    From the normalization of (mu - V)/g1 over the parabola:
    mu^(3/2) = 3*N*g1*sqrt(m)*omega_z / (4*sqrt(2)).
    """
    if g1 <= 0.0:
        return 0.0
    return (3.0 * n_atoms * g1 * math.sqrt(mass) * omega_z / (4.0 * math.sqrt(2.0))) ** (2.0 / 3.0)


def oscillator_length(mass: float, omega: float) -> float:
    return math.sqrt(_HBAR / (mass * omega))


def _mass_ratio(cfg: ExperimentConfig) -> float:
    """Forcing scale of the drive term relative to the inertial mass."""
    return cfg.perturbation_mass / cfg.species.atomic_mass


def slosh_bound(cfg: ExperimentConfig, t_end: float | None = None) -> float:
    """Upper bound on the classical center-of-mass excursion under the drive.

    Off resonance this is the closed-form amplitude of both response terms;
    near resonance the envelope grows linearly, bounded over t_end.
    """
    omega_z = cfg.trap.omega_z
    omega_d = cfg.drive.angular_frequency
    a = cfg.drive.amplitude
    ratio = _mass_ratio(cfg)
    if a == 0.0:
        return 0.0
    if abs(omega_d - omega_z) > 0.05 * omega_z:
        forced = omega_d**2 * a / abs(omega_z**2 - omega_d**2)
        return ratio * forced * (1.0 + omega_d / omega_z)
    horizon = t_end if t_end is not None else cfg.solver.t_end
    return ratio * (a / 2.0) * (2.0 + omega_z * horizon)


def default_halfwidth(cfg: ExperimentConfig) -> float:
    """Automatic box size: 4x the cloud radius plus the slosh excursion.

    The cloud radius is the 1D TF radius, floored at four oscillator lengths
    so the non-interacting Gaussian keeps negligible weight at the boundary.
    """
    mass = cfg.species.atomic_mass
    omega_z = cfg.trap.omega_z
    l_ho = oscillator_length(mass, omega_z)
    mu1 = mu_tf_1d(cfg.n_atoms_condensate, quasi1d_coupling(cfg), mass, omega_z)
    cloud = max(tf_radius(mu1, mass, omega_z), 4.0 * l_ho)
    return 4.0 * (cloud + slosh_bound(cfg))


def make_grid(cfg: ExperimentConfig) -> Grid1D:
    halfwidth = cfg.solver.domain_halfwidth
    if halfwidth is None:
        halfwidth = default_halfwidth(cfg)
    return Grid1D(n_points=cfg.solver.grid_points, halfwidth=halfwidth)


def static_potential(cfg: ExperimentConfig, z: np.ndarray) -> np.ndarray:
    """Axial trap term; the transverse directions are frozen out in 1D."""
    mass = cfg.species.atomic_mass
    return 0.5 * mass * cfg.trap.omega_z**2 * z**2


def drive_potential(cfg: ExperimentConfig, z: np.ndarray, t: float) -> np.ndarray:
    """Shaking tilt m*A(t)*z with the configured mass convention.

    Deterministic drive only: the stochastic component has no pointwise value
    and enters the spectral machinery, not the field evolution.
    """
    return cfg.perturbation_mass * acceleration(cfg.drive, t) * z


def _energy(
    values: np.ndarray,
    grid: Grid1D,
    v: np.ndarray,
    g1: float,
    mass: float,
) -> float:
    density = np.abs(values) ** 2
    psi_k = np.fft.fft(values)
    kinetic = (
        grid.dz / grid.n_points
        * float(np.sum(_HBAR**2 * grid.wavenumbers**2 / (2.0 * mass) * np.abs(psi_k) ** 2))
    )
    potential = float(np.sum(v * density)) * grid.dz
    interaction = 0.5 * g1 * float(np.sum(density**2)) * grid.dz
    return kinetic + potential + interaction


def observables(psi: WaveFunction, cfg: ExperimentConfig) -> Observables:
    """Norm, total energy, center of mass, peak density and rms width."""
    grid = psi.grid
    z = grid.z
    density = np.abs(psi.values) ** 2
    norm = float(np.sum(density)) * grid.dz
    v = static_potential(cfg, z) + drive_potential(cfg, z, psi.time)
    energy = _energy(psi.values, grid, v, quasi1d_coupling(cfg), cfg.species.atomic_mass)
    com = float(np.sum(z * density)) * grid.dz / norm
    var = float(np.sum((z - com) ** 2 * density)) * grid.dz / norm
    return Observables(
        time=psi.time,
        norm=norm,
        energy=energy,
        com=com,
        peak_density=float(density.max()),
        width=math.sqrt(max(var, 0.0)),
    )


def _healing_length_check(cfg: ExperimentConfig, grid: Grid1D) -> None:
    """The grid must resolve the healing length of the TF peak density."""
    a_s = cfg.species.scattering_length
    if a_s <= 0.0:
        return
    mass = cfg.species.atomic_mass
    mu3d = chemical_potential(
        MuModel(kind="standard_tf"), cfg.n_atoms_condensate, cfg.trap, cfg.species
    )
    peak_density = mu3d / coupling_constant(cfg.species, mass)
    xi = 1.0 / math.sqrt(8.0 * math.pi * peak_density * a_s)
    if grid.dz > xi / 4.0:
        raise GridTooCoarse(
            f"dz={grid.dz:g} m exceeds healing length/4 = {xi / 4.0:g} m"
        )


def _initial_guess(cfg: ExperimentConfig, grid: Grid1D, g1: float) -> np.ndarray:
    mass = cfg.species.atomic_mass
    omega_z = cfg.trap.omega_z
    z = grid.z
    n0 = cfg.n_atoms_condensate
    gaussian = np.exp(-mass * omega_z * z**2 / (2.0 * _HBAR)).astype(complex)
    if g1 > 0.0:
        mu1 = mu_tf_1d(n0, g1, mass, omega_z)
        profile = np.clip((mu1 - 0.5 * mass * omega_z**2 * z**2) / g1, 0.0, None)
        guess = np.sqrt(profile).astype(complex) + 1e-3 * math.sqrt(max(profile.max(), 1.0)) * gaussian
    else:
        guess = gaussian
    guess *= math.sqrt(n0 / (np.sum(np.abs(guess) ** 2) * grid.dz))
    return guess


def ground_state(
    cfg: ExperimentConfig,
    grid: Grid1D | None = None,
    dtau: float | None = None,
) -> WaveFunction:
    """Prepare the trap ground state by imaginary-time split stepping.

    The drive is ignored (static trap); the state is renormalized to the atom
    number after every step and declared converged when the relative energy
    change per step falls below solver.imag_time_tol.
    """
    if grid is None:
        grid = make_grid(cfg)
    _healing_length_check(cfg, grid)
    if dtau is None:
        dtau = cfg.solver.dt
    mass = cfg.species.atomic_mass
    n0 = cfg.n_atoms_condensate
    g1 = quasi1d_coupling(cfg)
    z = grid.z
    v = static_potential(cfg, z)
    kinetic_decay = np.exp(-_HBAR * grid.wavenumbers**2 * dtau / (2.0 * mass))

    values = _initial_guess(cfg, grid, g1)
    energy_prev = _energy(values, grid, v, g1, mass)
    tol = cfg.solver.imag_time_tol
    for step in range(1, cfg.solver.max_imag_steps + 1):
        half = np.exp(-(v + g1 * np.abs(values) ** 2) * dtau / (2.0 * _HBAR))
        values = values * half
        values = np.fft.ifft(kinetic_decay * np.fft.fft(values))
        half = np.exp(-(v + g1 * np.abs(values) ** 2) * dtau / (2.0 * _HBAR))
        values = values * half
        values *= math.sqrt(n0 / (np.sum(np.abs(values) ** 2) * grid.dz))

        energy = _energy(values, grid, v, g1, mass)
        if step >= 10 and abs(energy - energy_prev) < tol * abs(energy):
            return WaveFunction(grid=grid, values=values, time=0.0)
        energy_prev = energy
    raise NoConvergence(cfg.solver.max_imag_steps, "imaginary-time iteration did not converge")


def max_stable_dt(cfg: ExperimentConfig) -> float:
    """Step-size bound 0.1*min(trap period, drive period, hbar/mu)."""
    mass = cfg.species.atomic_mass
    omega_z = cfg.trap.omega_z
    g1 = quasi1d_coupling(cfg)
    mu = max(mu_tf_1d(cfg.n_atoms_condensate, g1, mass, omega_z), 0.5 * _HBAR * omega_z)
    return 0.1 * min(
        2.0 * math.pi / omega_z,
        2.0 * math.pi / cfg.drive.angular_frequency,
        _HBAR / mu,
    )


def evolve(
    psi0: WaveFunction,
    cfg: ExperimentConfig,
    include_drive: bool = True,
    observables_stride: int = 50,
    snapshot_stride: int | None = None,
) -> EvolutionResult:
    """Real-time Strang split-step evolution over solver.t_end.

    The potential (including the drive when enabled) is evaluated at each step
    midpoint. Observables are recorded every observables_stride steps plus the
    endpoints; snapshots optionally likewise. Raises NormDrift or DomainEscape
    when the run stops being trustworthy.
    """
    grid = psi0.grid
    dt = cfg.solver.dt
    if dt > max_stable_dt(cfg):
        raise ValueError(
            f"dt={dt:g} exceeds the stability bound {max_stable_dt(cfg):g}; "
            "reduce solver.dt_s"
        )
    n_steps = max(1, int(round(cfg.solver.t_end / dt)))
    mass = cfg.species.atomic_mass
    g1 = quasi1d_coupling(cfg)
    n0 = float(cfg.n_atoms_condensate)
    z = grid.z
    v_static = static_potential(cfg, z)
    kinetic_phase = np.exp(-1j * _HBAR * grid.wavenumbers**2 * dt / (2.0 * mass))
    t0 = psi0.time

    values = psi0.values.copy()
    results: list[Observables] = [observables(psi0, cfg)]
    snapshots: list[WaveFunction] = []
    if snapshot_stride is not None:
        snapshots.append(WaveFunction(grid=grid, values=values.copy(), time=t0))

    def checkpoint(step: int) -> None:
        t = t0 + step * dt
        psi = WaveFunction(grid=grid, values=values.copy(), time=t)
        obs = observables(psi, cfg)
        if abs(obs.norm - n0) > NORM_DRIFT_TOL * n0:
            raise NormDrift(
                f"norm drifted to {obs.norm:.12g} (target {n0:g}) at t={t:g} s"
            )
        density = np.abs(values) ** 2
        edge = max(density[0], density[-1])
        if edge > BOUNDARY_DENSITY_TOL * density.max():
            raise DomainEscape(f"boundary density {edge:g} at t={t:g} s; enlarge the box")
        results.append(obs)
        if snapshot_stride is not None and step % snapshot_stride == 0:
            snapshots.append(psi)

    for step in range(1, n_steps + 1):
        t_mid = t0 + (step - 0.5) * dt
        v = v_static
        if include_drive:
            v = v_static + drive_potential(cfg, z, t_mid)
        values *= np.exp(-1j * (v + g1 * np.abs(values) ** 2) * dt / (2.0 * _HBAR))
        values = np.fft.ifft(kinetic_phase * np.fft.fft(values))
        values *= np.exp(-1j * (v + g1 * np.abs(values) ** 2) * dt / (2.0 * _HBAR))
        if step % observables_stride == 0 or step == n_steps:
            checkpoint(step)

    final = WaveFunction(grid=grid, values=values, time=t0 + n_steps * dt)
    return EvolutionResult(observables=results, snapshots=snapshots, final=final)


def com_reference(
    trap: TrapConfig,
    drive: DriveSpec,
    t_grid,
    mass_ratio: float = 1.0,
) -> np.ndarray:
    """Classical center-of-mass oracle: z'' = -omega_z^2 z - r*A(t), z(0)=z'(0)=0.

    Solved to tight tolerance with an adaptive high-order integrator;
    mass_ratio r is perturbation mass over atomic mass (1 under per_atom).
    """
    t_arr = np.asarray(t_grid, dtype=float)
    if t_arr.size == 0:
        return np.array([])
    omega_z = trap.omega_z

    def rhs(t, y):
        return [y[1], -omega_z**2 * y[0] - mass_ratio * acceleration(drive, t)]

    scale = max(drive.amplitude * mass_ratio, 1e-18)
    sol = solve_ivp(
        rhs,
        (0.0, float(t_arr[-1])) if t_arr[-1] > 0 else (0.0, 1e-12),
        [0.0, 0.0],
        method="DOP853",
        t_eval=t_arr,
        rtol=1e-12,
        atol=1e-14 * scale,
        max_step=drive.period / 10.0,
    )
    if not sol.success:
        raise RuntimeError(f"reference ODE solve failed: {sol.message}")
    return sol.y[0]


def sine_com_closed_form(
    omega_z: float,
    drive: DriveSpec,
    t,
    mass_ratio: float = 1.0,
) -> np.ndarray:
    """Closed-form forced-oscillator response for a zero-phase sine drive.

    Off resonance: [Omega^2 a/(omega_z^2 - Omega^2)] (sin(Omega t) -
    (Omega/omega_z) sin(omega_z t)); at resonance the limit
    (a/2)(sin(omega_z t) - omega_z t cos(omega_z t)).
    """
    if drive.phase != 0.0:
        raise ValueError("closed form assumes zero drive phase")
    t_arr = np.asarray(t, dtype=float)
    a = drive.amplitude * mass_ratio
    omega_d = drive.angular_frequency
    if abs(omega_d - omega_z) <= 1e-9 * omega_z:
        return a / 2.0 * (np.sin(omega_z * t_arr) - omega_z * t_arr * np.cos(omega_z * t_arr))
    c = omega_d**2 * a / (omega_z**2 - omega_d**2)
    return c * (np.sin(omega_d * t_arr) - omega_d / omega_z * np.sin(omega_z * t_arr))


_SNAPSHOT_HEADER = struct.Struct("<qdd")  # n_points, dz, time (little-endian)


def write_snapshot(path: str, psi: WaveFunction) -> None:
    """Binary snapshot: header {n_points, dz, time}, then interleaved
    real/imag float64 pairs, little-endian throughout."""
    with open(path, "wb") as fh:
        fh.write(_SNAPSHOT_HEADER.pack(psi.grid.n_points, psi.grid.dz, psi.time))
        fh.write(np.ascontiguousarray(psi.values, dtype="<c16").tobytes())


def read_snapshot(path: str) -> WaveFunction:
    with open(path, "rb") as fh:
        n_points, dz, time = _SNAPSHOT_HEADER.unpack(fh.read(_SNAPSHOT_HEADER.size))
        values = np.frombuffer(fh.read(), dtype="<c16")
    if values.size != n_points:
        raise ValueError(f"snapshot holds {values.size} points, header says {n_points}")
    grid = Grid1D(n_points=n_points, halfwidth=n_points * dz / 2.0)
    return WaveFunction(grid=grid, values=values.astype(complex), time=time)


__all__ = [
    "EvolutionResult",
    "Grid1D",
    "Observables",
    "WaveFunction",
    "com_reference",
    "default_halfwidth",
    "drive_potential",
    "evolve",
    "ground_state",
    "make_grid",
    "max_stable_dt",
    "mu_tf_1d",
    "observables",
    "oscillator_length",
    "quasi1d_coupling",
    "read_snapshot",
    "sine_com_closed_form",
    "slosh_bound",
    "static_potential",
    "write_snapshot",
]
