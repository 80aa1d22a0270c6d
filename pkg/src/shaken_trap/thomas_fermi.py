"""Thomas-Fermi density response of the shaken condensate.

In the TF limit the density follows the instantaneous potential,
n(z, t) = (mu - V(z, t))/g wherever mu > V, zero outside. The shaking term
m*A(t)*z tilts the trap, so the density at a fixed probe point breathes with
the drive; where the tilt pushes mu - V negative the TF description has
broken down, which is reported via a flag rather than an error.

The chemical potential is not reconstructible from first principles at the
drive strengths of interest, so three closures are exposed:
  tc_fraction  -- mu = 0.3 * k_B * T_c (condensate-scale closure)
  standard_tf  -- mu = (hbar*wbar/2) * (15 N a_s / abar)^(2/5)
  explicit     -- caller-supplied value in joules
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, TrapConfig
from .constants import CONSTANTS, AtomSpecies
from .drive import DriveSpec, acceleration
from .errors import ProbeOutsideCloud, UnderResolved

MU_MODELS = ("tc_fraction", "standard_tf", "explicit")

# mu(0)/(k_B T_c) for the tc_fraction closure.
MU_TC_RATIO = 0.3

# sampling floor shared with the drive synthesizer: >= 10 samples per period
MAX_DT_FACTOR = math.pi / 5.0


class MissingTc(ValueError):
    """tc_fraction closure requested without a critical temperature."""


@dataclass(frozen=True)
class MuModel:
    """Chemical-potential closure selector."""

    kind: str
    value_j: float | None = None  # explicit only
    t_c: float | None = None      # tc_fraction only, kelvin

    def __post_init__(self) -> None:
        if self.kind not in MU_MODELS:
            raise ValueError(f"mu model must be one of {MU_MODELS}, got {self.kind!r}")
        if self.kind == "explicit" and (self.value_j is None or self.value_j <= 0.0):
            raise ValueError("explicit mu model needs a positive value_j")


@dataclass(frozen=True)
class TotalPotentialParams:
    """Masses and geometry for the total potential.

    The three harmonic terms always carry the atomic mass; the shaking term
    carries perturbation_mass, which is the collective mass N0*m_a under the
    total_condensate convention.
    """

    trap: TrapConfig
    drive: DriveSpec
    atomic_mass: float
    perturbation_mass: float

    def __post_init__(self) -> None:
        if self.atomic_mass <= 0.0 or self.perturbation_mass <= 0.0:
            raise ValueError("masses must be positive")


@dataclass(frozen=True)
class DensityTrace:
    """Probe-point density ratio R(t) = n(z0, t)/n(z0, 0) with breakdown flags."""

    times: np.ndarray
    ratio: np.ndarray
    beyond_tf: np.ndarray

    def __post_init__(self) -> None:
        if not (len(self.times) == len(self.ratio) == len(self.beyond_tf)):
            raise ValueError("trace arrays must have equal length")

    @property
    def peak_deviation(self) -> float:
        """max |R - 1| over entries still inside the TF regime."""
        valid = ~self.beyond_tf
        if not np.any(valid):
            return math.nan
        return float(np.max(np.abs(self.ratio[valid] - 1.0)))


@dataclass(frozen=True)
class TFDensityResult:
    density: np.ndarray | float
    beyond_tf: np.ndarray | bool


def potential_params_from_config(cfg: ExperimentConfig) -> TotalPotentialParams:
    return TotalPotentialParams(
        trap=cfg.trap,
        drive=cfg.drive,
        atomic_mass=cfg.species.atomic_mass,
        perturbation_mass=cfg.perturbation_mass,
    )


def total_potential(p: TotalPotentialParams, x, y, z, t):
    """Harmonic trap plus shaking tilt, evaluated pointwise (broadcasts)."""
    harmonic = 0.5 * p.atomic_mass * (
        p.trap.omega_x**2 * np.square(x)
        + p.trap.omega_y**2 * np.square(y)
        + p.trap.omega_z**2 * np.square(z)
    )
    return harmonic + p.perturbation_mass * acceleration(p.drive, t) * z


def coupling_constant(species: AtomSpecies, mass: float) -> float:
    """Interaction coupling g = 4*pi*hbar^2*a_s/mass (J m^3)."""
    if mass <= 0.0:
        raise ValueError("mass must be positive")
    return 4.0 * math.pi * CONSTANTS.hbar**2 * species.scattering_length / mass


def chemical_potential(
    model: MuModel,
    n_atoms: int,
    trap: TrapConfig,
    species: AtomSpecies,
) -> float:
    """Resolve mu under the chosen closure (joules)."""
    if model.kind == "explicit":
        return float(model.value_j)
    if model.kind == "tc_fraction":
        if model.t_c is None:
            raise MissingTc("tc_fraction mu model needs t_c (kelvin)")
        return MU_TC_RATIO * CONSTANTS.k_boltzmann * model.t_c
    # standard_tf
    if species.scattering_length <= 0.0:
        raise ValueError("standard_tf mu requires a repulsive scattering length")
    omega_bar = trap.omega_bar
    a_bar = math.sqrt(CONSTANTS.hbar / (species.atomic_mass * omega_bar))
    return (
        CONSTANTS.hbar * omega_bar / 2.0
        * (15.0 * n_atoms * species.scattering_length / a_bar) ** 0.4
    )


def tf_density(mu: float, v, g: float) -> TFDensityResult:
    """TF density (mu - V)/g where mu > V; clamped to zero and flagged beyond.

    The flag marks where the bare formula would go negative, i.e. where the
    approximation has broken down; it is never folded silently into the value.
    """
    if g <= 0.0:
        raise ValueError("coupling g must be positive")
    v_arr = np.asarray(v, dtype=float)
    density = (mu - v_arr) / g
    beyond = density < 0.0
    density = np.where(beyond, 0.0, density)
    if v_arr.ndim == 0:
        return TFDensityResult(density=float(density), beyond_tf=bool(beyond))
    return TFDensityResult(density=density, beyond_tf=beyond)


def tf_radius(mu: float, atomic_mass: float, omega_z: float) -> float:
    """Cloud radius along z: V(R) = mu for the static harmonic trap."""
    if mu <= 0.0:
        return 0.0
    return math.sqrt(2.0 * mu / (atomic_mass * omega_z**2))


def density_ratio_trace(
    cfg: ExperimentConfig,
    probe_z: float,
    mu_model: MuModel,
    t_end: float,
    dt: float,
) -> DensityTrace:
    """Density ratio R(t_k) at probe (0, 0, z0), normalized by the t=0 value.

    Entries where the TF formula breaks down carry ratio 0 and the beyond_tf
    flag; the g in numerator and denominator cancels, so R depends only on mu
    and the potential.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if dt > MAX_DT_FACTOR / cfg.drive.angular_frequency:
        raise UnderResolved(
            f"dt={dt:g} does not resolve the drive period {cfg.drive.period:g}"
        )
    params = potential_params_from_config(cfg)
    mu = chemical_potential(mu_model, cfg.n_atoms_condensate, cfg.trap, cfg.species)
    v0 = float(total_potential(params, 0.0, 0.0, probe_z, 0.0))
    n0 = mu - v0
    if n0 <= 0.0:
        raise ProbeOutsideCloud(
            f"probe z={probe_z:g} m lies outside the unperturbed cloud (mu <= V)"
        )
    n_steps = int(round(t_end / dt))
    times = dt * np.arange(n_steps + 1)
    v_t = total_potential(params, 0.0, 0.0, probe_z, times)
    n_t = mu - v_t
    beyond = n_t < 0.0
    ratio = np.where(beyond, 0.0, n_t / n0)
    return DensityTrace(times=times, ratio=ratio, beyond_tf=beyond)


def tf_profile(
    cfg: ExperimentConfig,
    mu_model: MuModel,
    t: float,
    z_grid,
) -> np.ndarray:
    """TF density along the z axis (x = y = 0) at time t.

    Uses the per-atom coupling; beyond-TF points are zero by the clamp.
    """
    params = potential_params_from_config(cfg)
    mu = chemical_potential(mu_model, cfg.n_atoms_condensate, cfg.trap, cfg.species)
    g = coupling_constant(cfg.species, cfg.species.atomic_mass)
    z = np.asarray(z_grid, dtype=float)
    v = total_potential(params, 0.0, 0.0, z, t)
    result = tf_density(mu, v, g)
    return np.asarray(result.density)


__all__ = [
    "MU_MODELS",
    "MU_TC_RATIO",
    "DensityTrace",
    "MissingTc",
    "MuModel",
    "TFDensityResult",
    "TotalPotentialParams",
    "chemical_potential",
    "coupling_constant",
    "density_ratio_trace",
    "potential_params_from_config",
    "tf_density",
    "tf_profile",
    "tf_radius",
    "total_potential",
]
