"""Experiment configuration: parsing, validation, canonical serialization.

Config documents carry ordinary frequencies in Hz; every internal quantity is
angular (rad/s). Validation happens in a single pass and reports every problem
at once, each naming the offending dotted key.

Validation first produces a fully-populated normalized document (defaults
applied, numbers coerced to float, counts to int) and then builds the typed
config from that document. Serialization returns the normalized document
itself, so serialize -> validate round-trips are bitwise exact and the
canonical JSON gives the run manifest a stable hash.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any

from .constants import BUILTIN_SPECIES, AtomSpecies, species_by_name, species_rb87
from .drive import DriveSpec, NoiseSpec
from .errors import ConfigIssue, ConfigValidationError, IssueKind

MASS_CONVENTIONS = ("per_atom", "total_condensate")
OUTPUT_FORMATS = ("csv", "json")
NOISE_KIND_NAMES = ("white", "band_limited")

_MISSING = object()


@dataclass(frozen=True)
class TrapConfig:
    """Anisotropic harmonic trap; angular frequencies in rad/s."""

    omega_x: float
    omega_y: float
    omega_z: float

    def __post_init__(self) -> None:
        for name in ("omega_x", "omega_y", "omega_z"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")

    @property
    def omega_bar(self) -> float:
        """Geometric mean (omega_x * omega_y * omega_z)^(1/3)."""
        return (self.omega_x * self.omega_y * self.omega_z) ** (1.0 / 3.0)


@dataclass(frozen=True)
class SolverParams:
    """Time stepping and grid settings for the field solver.

    domain_halfwidth None means "size the box automatically from the cloud
    radius and the classical slosh amplitude" at solve time.
    """

    dt: float
    t_end: float
    imag_time_tol: float
    max_imag_steps: int
    grid_points: int
    domain_halfwidth: float | None

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")
        if self.imag_time_tol <= 0.0:
            raise ValueError("imag_time_tol must be positive")


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    path: str = "out"


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated bundle of species, trap, drive, solver and output settings."""

    species: AtomSpecies
    trap: TrapConfig
    drive: DriveSpec
    n_atoms_condensate: int
    mass_convention: str
    solver: SolverParams
    output: OutputSpec
    canonical_json: str

    @property
    def perturbation_mass(self) -> float:
        """Mass entering the shaking potential m*A(t)*z, per mass_convention."""
        if self.mass_convention == "total_condensate":
            return self.n_atoms_condensate * self.species.atomic_mass
        return self.species.atomic_mass


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class _Collector:
    """Accumulates validation issues and reads keys out of the raw document."""

    def __init__(self, raw: dict):
        self.raw = raw
        self.issues: list[ConfigIssue] = []

    def add(self, kind: IssueKind, key: str, message: str) -> None:
        self.issues.append(ConfigIssue(kind=kind, key=key, message=message))

    def get(self, *path: str) -> Any:
        node: Any = self.raw
        for part in path:
            if not isinstance(node, dict) or part not in node:
                return _MISSING
            node = node[part]
        return node

    def require_number(self, *path: str) -> float | None:
        key = ".".join(path)
        value = self.get(*path)
        if value is _MISSING:
            self.add(IssueKind.MISSING_FIELD, key, "required key is missing")
            return None
        if not _is_number(value):
            self.add(IssueKind.INVALID_VALUE, key, f"expected a number, got {value!r}")
            return None
        return float(value)

    def optional_number(self, default: float | None, *path: str) -> float | None:
        value = self.get(*path)
        if value is _MISSING:
            return default
        if not _is_number(value):
            self.add(IssueKind.INVALID_VALUE, ".".join(path), f"expected a number, got {value!r}")
            return default
        return float(value)

    def optional_int(self, default: int, *path: str) -> int:
        value = self.get(*path)
        if value is _MISSING:
            return default
        key = ".".join(path)
        if not _is_number(value) or float(value) != int(value):
            self.add(IssueKind.INVALID_VALUE, key, f"expected an integer, got {value!r}")
            return default
        return int(value)


_KNOWN_KEYS = {
    "species": {"name", "atomic_mass_kg", "scattering_length_m"},
    "trap": {"omega_x_hz", "omega_y_hz", "omega_z_hz"},
    "drive": {"amplitude_m", "frequency_hz", "phase_rad", "noise"},
    "drive.noise": {"kind", "level", "seed", "band_lo_rad_s", "band_hi_rad_s"},
    "solver": {
        "grid_points",
        "domain_halfwidth_m",
        "dt_s",
        "t_end_s",
        "imag_time_tol",
        "max_imag_steps",
    },
    "output": {"format", "path"},
    "": {"species", "trap", "drive", "n_atoms", "mass_convention", "solver", "output"},
}


def _check_unknown_keys(col: _Collector) -> None:
    def walk(node: Any, prefix: str) -> None:
        if not isinstance(node, dict):
            return
        allowed = _KNOWN_KEYS.get(prefix)
        if allowed is None:
            return
        for key in node:
            dotted = f"{prefix}.{key}" if prefix else key
            if key not in allowed:
                col.add(IssueKind.INVALID_VALUE, dotted, "unknown key")
            elif dotted in _KNOWN_KEYS:
                walk(node[key], dotted)

    walk(col.raw, "")


def _species_doc(col: _Collector) -> dict | None:
    node = col.get("species")
    if node is _MISSING:
        sp = species_rb87()
        return {
            "name": sp.name,
            "atomic_mass_kg": sp.atomic_mass,
            "scattering_length_m": sp.scattering_length,
        }
    name = col.get("species", "name")
    numbers_given = (
        col.get("species", "atomic_mass_kg") is not _MISSING
        or col.get("species", "scattering_length_m") is not _MISSING
    )
    if not numbers_given:
        if name is _MISSING:
            col.add(IssueKind.MISSING_FIELD, "species.name", "name or explicit constants required")
            return None
        if name in BUILTIN_SPECIES:
            sp = species_by_name(str(name))
            return {
                "name": sp.name,
                "atomic_mass_kg": sp.atomic_mass,
                "scattering_length_m": sp.scattering_length,
            }
        col.add(
            IssueKind.INVALID_VALUE,
            "species.name",
            f"unknown species {name!r} and no explicit constants given",
        )
        return None
    mass = col.require_number("species", "atomic_mass_kg")
    scatter = col.require_number("species", "scattering_length_m")
    if mass is not None and mass <= 0.0:
        col.add(IssueKind.NON_POSITIVE_MASS, "species.atomic_mass_kg", f"must be positive, got {mass!r}")
        mass = None
    if mass is None or scatter is None:
        return None
    label = str(name) if name is not _MISSING else "custom"
    return {"name": label, "atomic_mass_kg": mass, "scattering_length_m": scatter}


def _trap_doc(col: _Collector) -> dict | None:
    doc = {}
    for axis in ("x", "y", "z"):
        key = f"omega_{axis}_hz"
        freq = col.require_number("trap", key)
        if freq is None:
            continue
        if freq <= 0.0:
            col.add(IssueKind.NON_POSITIVE_FREQUENCY, f"trap.{key}", f"must be positive, got {freq!r}")
            continue
        doc[key] = freq
    return doc if len(doc) == 3 else None


def _noise_doc(col: _Collector) -> dict | None | object:
    """Returns the normalized noise dict, None when absent, _MISSING on error."""
    node = col.get("drive", "noise")
    if node is _MISSING or node is None:
        return None
    kind = col.get("drive", "noise", "kind")
    if kind is _MISSING:
        col.add(IssueKind.MISSING_FIELD, "drive.noise.kind", "required when noise present")
        return _MISSING
    if kind not in NOISE_KIND_NAMES:
        col.add(IssueKind.INVALID_VALUE, "drive.noise.kind", f"must be white or band_limited, got {kind!r}")
        return _MISSING
    level = col.require_number("drive", "noise", "level")
    if level is None:
        return _MISSING
    if level < 0.0:
        col.add(IssueKind.INVALID_VALUE, "drive.noise.level", "must be non-negative")
        return _MISSING
    doc: dict[str, Any] = {
        "kind": str(kind),
        "level": level,
        "seed": col.optional_int(0, "drive", "noise", "seed"),
    }
    if kind == "band_limited":
        lo = col.require_number("drive", "noise", "band_lo_rad_s")
        hi = col.require_number("drive", "noise", "band_hi_rad_s")
        if lo is None or hi is None:
            return _MISSING
        if not lo < hi:
            col.add(IssueKind.INVALID_VALUE, "drive.noise.band_lo_rad_s", "band requires lo < hi")
            return _MISSING
        doc["band_lo_rad_s"] = lo
        doc["band_hi_rad_s"] = hi
    return doc


def _drive_doc(col: _Collector) -> dict | None:
    amplitude = col.require_number("drive", "amplitude_m")
    frequency = col.require_number("drive", "frequency_hz")
    phase = col.optional_number(0.0, "drive", "phase_rad")
    noise = _noise_doc(col)
    ok = True
    if amplitude is not None and amplitude < 0.0:
        col.add(IssueKind.INVALID_VALUE, "drive.amplitude_m", "must be non-negative")
        ok = False
    if frequency is not None and frequency <= 0.0:
        col.add(IssueKind.NON_POSITIVE_FREQUENCY, "drive.frequency_hz", f"must be positive, got {frequency!r}")
        ok = False
    if amplitude is None or frequency is None or phase is None or noise is _MISSING or not ok:
        return None
    doc: dict[str, Any] = {"amplitude_m": amplitude, "frequency_hz": frequency, "phase_rad": phase}
    if noise is not None:
        doc["noise"] = noise
    return doc


def _n_atoms_value(col: _Collector) -> int | None:
    value = col.require_number("n_atoms")
    if value is None:
        return None
    if value != round(value):
        col.add(IssueKind.INVALID_VALUE, "n_atoms", f"must be an integer count, got {value!r}")
        return None
    count = int(round(value))
    if count < 1:
        col.add(IssueKind.INVALID_VALUE, "n_atoms", f"must be >= 1, got {count}")
        return None
    return count


def _mass_convention_value(col: _Collector) -> str:
    value = col.get("mass_convention")
    if value is _MISSING:
        return "per_atom"
    if value not in MASS_CONVENTIONS:
        col.add(
            IssueKind.UNKNOWN_MASS_CONVENTION,
            "mass_convention",
            f"must be one of {MASS_CONVENTIONS}, got {value!r}",
        )
        return "per_atom"
    return str(value)


def _solver_doc(col: _Collector, drive: dict | None) -> dict | None:
    period = 1.0 / drive["frequency_hz"] if drive is not None else None
    dt = col.optional_number(None, "solver", "dt_s")
    if dt is None and period is not None:
        dt = period / 100.0
    t_end = col.optional_number(None, "solver", "t_end_s")
    if t_end is None and period is not None:
        t_end = 20.0 * period
    tol = col.optional_number(1e-12, "solver", "imag_time_tol")
    max_steps = col.optional_int(200_000, "solver", "max_imag_steps")
    grid_points = col.optional_int(1024, "solver", "grid_points")
    # explicit null means "auto-size the box", same as leaving the key out
    raw_halfwidth = col.get("solver", "domain_halfwidth_m")
    if raw_halfwidth is None:
        halfwidth = None
    else:
        halfwidth = col.optional_number(None, "solver", "domain_halfwidth_m")

    ok = True
    if dt is not None and dt <= 0.0:
        col.add(IssueKind.INVALID_VALUE, "solver.dt_s", "must be positive")
        ok = False
    if t_end is not None and t_end <= 0.0:
        col.add(IssueKind.INVALID_VALUE, "solver.t_end_s", "must be positive")
        ok = False
    if tol is not None and tol <= 0.0:
        col.add(IssueKind.INVALID_VALUE, "solver.imag_time_tol", "must be positive")
        ok = False
    if max_steps < 1:
        col.add(IssueKind.INVALID_VALUE, "solver.max_imag_steps", "must be >= 1")
        ok = False
    if grid_points < 64 or grid_points & (grid_points - 1):
        col.add(IssueKind.INVALID_VALUE, "solver.grid_points", "must be a power of two >= 64")
        ok = False
    if halfwidth is not None and halfwidth <= 0.0:
        col.add(IssueKind.INVALID_VALUE, "solver.domain_halfwidth_m", "must be positive")
        ok = False
    if dt is None or t_end is None or tol is None or not ok:
        return None
    return {
        "grid_points": grid_points,
        "domain_halfwidth_m": halfwidth,
        "dt_s": dt,
        "t_end_s": t_end,
        "imag_time_tol": tol,
        "max_imag_steps": max_steps,
    }


def _output_doc(col: _Collector) -> dict:
    fmt = col.get("output", "format")
    if fmt is _MISSING:
        fmt = "csv"
    elif fmt not in OUTPUT_FORMATS:
        col.add(IssueKind.INVALID_VALUE, "output.format", f"must be one of {OUTPUT_FORMATS}")
        fmt = "csv"
    path = col.get("output", "path")
    if path is _MISSING:
        path = "out"
    elif not isinstance(path, str):
        col.add(IssueKind.INVALID_VALUE, "output.path", "must be a string")
        path = "out"
    return {"format": str(fmt), "path": str(path)}


def canonical_json(doc: dict) -> str:
    """Stable rendering: sorted keys, shortest round-trip float repr."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _config_from_doc(doc: dict) -> ExperimentConfig:
    sp = doc["species"]
    species = AtomSpecies(
        name=sp["name"],
        atomic_mass=sp["atomic_mass_kg"],
        scattering_length=sp["scattering_length_m"],
    )
    tr = doc["trap"]
    trap = TrapConfig(
        omega_x=2.0 * math.pi * tr["omega_x_hz"],
        omega_y=2.0 * math.pi * tr["omega_y_hz"],
        omega_z=2.0 * math.pi * tr["omega_z_hz"],
    )
    dr = doc["drive"]
    noise = None
    if "noise" in dr:
        nd = dr["noise"]
        band = None
        if nd["kind"] == "band_limited":
            band = (nd["band_lo_rad_s"], nd["band_hi_rad_s"])
        noise = NoiseSpec(kind=nd["kind"], accel_psd_level=nd["level"], seed=nd["seed"], band=band)
    drive = DriveSpec(
        amplitude=dr["amplitude_m"],
        angular_frequency=2.0 * math.pi * dr["frequency_hz"],
        phase=dr["phase_rad"],
        noise=noise,
    )
    sv = doc["solver"]
    solver = SolverParams(
        dt=sv["dt_s"],
        t_end=sv["t_end_s"],
        imag_time_tol=sv["imag_time_tol"],
        max_imag_steps=sv["max_imag_steps"],
        grid_points=sv["grid_points"],
        domain_halfwidth=sv["domain_halfwidth_m"],
    )
    out = OutputSpec(format=doc["output"]["format"], path=doc["output"]["path"])
    return ExperimentConfig(
        species=species,
        trap=trap,
        drive=drive,
        n_atoms_condensate=doc["n_atoms"],
        mass_convention=doc["mass_convention"],
        solver=solver,
        output=out,
        canonical_json=canonical_json(doc),
    )


def validate_config(raw: dict) -> ExperimentConfig:
    """Validate a raw config document; collects every issue before raising.

    Frequencies are given in Hz in the document and converted to angular
    frequencies on the typed config. Missing optional sections get defaults;
    any violation raises ConfigValidationError naming each offending key.
    """
    if not isinstance(raw, dict):
        raise ConfigValidationError(
            [ConfigIssue(IssueKind.INVALID_VALUE, "", "config document must be a mapping")]
        )
    col = _Collector(raw)
    _check_unknown_keys(col)
    species = _species_doc(col)
    trap = _trap_doc(col)
    drive = _drive_doc(col)
    n_atoms = _n_atoms_value(col)
    mass_convention = _mass_convention_value(col)
    solver = _solver_doc(col, drive)
    output = _output_doc(col)
    if col.issues:
        raise ConfigValidationError(col.issues)
    doc = {
        "species": species,
        "trap": trap,
        "drive": drive,
        "n_atoms": n_atoms,
        "mass_convention": mass_convention,
        "solver": solver,
        "output": output,
    }
    return _config_from_doc(doc)


def serialize_config(cfg: ExperimentConfig) -> dict:
    """Normalized document; validate_config(serialize_config(cfg)) == cfg."""
    return json.loads(cfg.canonical_json)


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON rendering."""
    return hashlib.sha256(cfg.canonical_json.encode("utf-8")).hexdigest()


def load_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


__all__ = [
    "ExperimentConfig",
    "OutputSpec",
    "SolverParams",
    "TrapConfig",
    "canonical_json",
    "config_hash",
    "load_config_file",
    "serialize_config",
    "validate_config",
]
