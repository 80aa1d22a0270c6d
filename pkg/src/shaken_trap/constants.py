"""Physical constants and the built-in atomic species table.

All values are SI. Constants come from scipy.constants (CODATA); hbar is
stored as planck_h / 2pi so the pair stays consistent to the last ulp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import scipy.constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants used throughout; immutable and shareable."""

    hbar: float = _sc.h / (2.0 * math.pi)  # J*s
    k_boltzmann: float = _sc.k             # J/K (exact)
    planck_h: float = _sc.h                # J*s (exact)
    planck_mass: float = _sc.physical_constants["Planck mass"][0]  # kg

    def __post_init__(self) -> None:
        for name in ("hbar", "k_boltzmann", "planck_h", "planck_mass"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if abs(self.planck_h - 2.0 * math.pi * self.hbar) > math.ulp(self.planck_h):
            raise ValueError("planck_h and hbar are inconsistent (h != 2*pi*hbar)")


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class AtomSpecies:
    """Atomic constants for one species.

    scattering_length may be negative (attractive interaction); the default
    Rb-87 entry is repulsive.
    """

    name: str
    atomic_mass: float        # kg
    scattering_length: float  # m

    def __post_init__(self) -> None:
        if self.atomic_mass <= 0.0:
            raise ValueError("atomic_mass must be positive")


def species_rb87() -> AtomSpecies:
    """Default Rb-87 entry: 86.909 u, s-wave scattering length 5.28 nm."""
    return AtomSpecies(name="Rb-87", atomic_mass=1.44316e-25, scattering_length=5.28e-9)


def species_na23() -> AtomSpecies:
    """Na-23: 22.98977 u, scattering length 2.75 nm."""
    return AtomSpecies(name="Na-23", atomic_mass=3.81754e-26, scattering_length=2.75e-9)


def species_li7() -> AtomSpecies:
    """Li-7: 7.016 u, attractive scattering length -1.46 nm."""
    return AtomSpecies(name="Li-7", atomic_mass=1.16504e-26, scattering_length=-1.46e-9)


BUILTIN_SPECIES = {
    "Rb-87": species_rb87,
    "Na-23": species_na23,
    "Li-7": species_li7,
}


def species_by_name(name: str) -> AtomSpecies:
    try:
        return BUILTIN_SPECIES[name]()
    except KeyError:
        raise KeyError(
            f"unknown species {name!r}; built-in: {sorted(BUILTIN_SPECIES)}"
        ) from None
