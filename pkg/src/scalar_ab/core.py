"""Shared data model: physical constants and the immutable value types used
by every simulation module.

All quantities are stored in SI units (seconds, volts, joules, kilograms,
farads, henries, rad/s).  Unit conversion from experimenter-friendly inputs
(GHz, uV, ns, ...) happens at the CLI boundary, never inside the physics.

Every type here is a frozen dataclass: construction validates the type's
invariants (raising ``ValueError`` naming the violated invariant) and the
instance is immutable afterwards, so values can be shared freely between
concurrent parameter sweeps without synchronization.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "PhysicalConstants",
    "CODATA2018",
    "CircuitParams",
    "DriveWaveform",
    "Trajectory",
    "SidebandSpectrum",
    "MassShell",
    "TwoLevelAtom",
]


def _require(condition: bool, invariant: str) -> None:
    """Raise ValueError naming the violated invariant."""
    if not condition:
        raise ValueError(f"invariant violated: {invariant}")


def _readonly(values: Iterable[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants (CODATA 2018 defaults), SI units.

    ``flux_quantum`` is always recomputed as h/2e from the stored values so
    it can never be inconsistent.  ``flux_to_phase`` (2*pi/flux_quantum,
    rad/Wb) is the conversion between branch flux and superconducting phase.
    A caution on units: the conversion constant is ~3.04e15 rad/Wb while one
    flux quantum is ~2.07e-15 Wb; quoted "flux-to-phase" numbers of order
    1e-15 Wb are the flux quantum itself, not the conversion.
    """

    hbar: float = 1.054571817e-34    # J*s
    h: float = 6.62607015e-34        # J*s
    e_charge: float = 1.602176634e-19  # C
    c_light: float = 299792458.0     # m/s
    g_newton: float = 6.67430e-11    # m^3/(kg*s^2)

    def __post_init__(self) -> None:
        for name in ("hbar", "h", "e_charge", "c_light", "g_newton"):
            _require(getattr(self, name) > 0.0,
                     f"PhysicalConstants.{name} must be strictly positive")

    @property
    def flux_quantum(self) -> float:
        """Magnetic flux quantum h/2e in Wb."""
        return self.h / (2.0 * self.e_charge)

    @property
    def flux_to_phase(self) -> float:
        """Flux-to-phase conversion 2*pi/flux_quantum in rad/Wb."""
        return 2.0 * math.pi / self.flux_quantum

    def to_dict(self) -> dict[str, float]:
        return {
            "hbar": self.hbar,
            "h": self.h,
            "e_charge": self.e_charge,
            "c_light": self.c_light,
            "g_newton": self.g_newton,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "PhysicalConstants":
        return cls(**{k: float(v) for k, v in data.items()})


CODATA2018 = PhysicalConstants()

# Module-level shorthands; the physics modules read these.
HBAR = CODATA2018.hbar
PLANCK_H = CODATA2018.h
E_CHARGE = CODATA2018.e_charge
C_LIGHT = CODATA2018.c_light
G_NEWTON = CODATA2018.g_newton


@dataclass(frozen=True)
class CircuitParams:
    """Lumped-element values of the shielded Josephson circuit.

    ``inductance`` and ``e_inductive`` describe the same element, as do
    ``e_josephson`` and ``l_josephson`` (related through (hbar/2e)^2); pass
    either member of a pair and the other is derived, or pass both and they
    are checked for consistency.  ``e_charging`` ((2e)^2 / 2*C_sigma) is
    always derived, never stored.
    """

    c_sphere: float          # F, self-capacitance of the shielding sphere
    c_sigma: float           # F, total capacitance
    c_gate: float            # F, effective gate capacitance
    c_prime: float           # F, effective island capacitance
    inductance: float = 0.0  # H, island inductance (0 -> derive from e_inductive)
    e_josephson: float = 0.0  # J, junction coupling energy (0 -> derive from l_josephson)
    l_josephson: float = 0.0  # H, junction inductance (0 -> derive from e_josephson)
    c_josephson: float = 0.0  # F, junction capacitance
    e_inductive: float = 0.0  # J, inductive energy scale (0 -> derive from inductance)

    def __post_init__(self) -> None:
        phi_sq = (HBAR / (2.0 * E_CHARGE)) ** 2  # (hbar/2e)^2, J*H

        def _pair(energy: float, reactance: float, e_name: str, x_name: str) -> tuple[float, float]:
            if energy <= 0.0 and reactance <= 0.0:
                return 0.0, 0.0
            if reactance <= 0.0:
                return energy, phi_sq / energy
            if energy <= 0.0:
                return phi_sq / reactance, reactance
            _require(abs(energy * reactance - phi_sq) <= 1e-9 * phi_sq,
                     f"CircuitParams.{e_name} inconsistent with {x_name} "
                     f"(must satisfy {e_name} = (hbar/2e)^2 / {x_name})")
            return energy, reactance

        e_l, ind = _pair(self.e_inductive, self.inductance, "e_inductive", "inductance")
        e_j, l_j = _pair(self.e_josephson, self.l_josephson, "e_josephson", "l_josephson")
        object.__setattr__(self, "e_inductive", e_l)
        object.__setattr__(self, "inductance", ind)
        object.__setattr__(self, "e_josephson", e_j)
        object.__setattr__(self, "l_josephson", l_j)

        _require(self.inductance > 0.0,
                 "CircuitParams.inductance (or e_inductive) must be strictly positive")
        for name in ("c_sphere", "c_sigma", "c_gate", "c_prime"):
            _require(getattr(self, name) > 0.0,
                     f"CircuitParams.{name} must be strictly positive")
        _require(self.e_josephson >= 0.0, "CircuitParams.e_josephson must be non-negative")
        _require(self.c_josephson >= 0.0, "CircuitParams.c_josephson must be non-negative")
        _require(self.c_sigma >= self.c_josephson,
                 "CircuitParams.c_sigma must be >= c_josephson "
                 "(total capacitance includes the junction)")

    @property
    def e_charging(self) -> float:
        """Charging energy (2e)^2 / (2*C_sigma) in J, recomputed on access."""
        return (2.0 * E_CHARGE) ** 2 / (2.0 * self.c_sigma)

    def to_dict(self) -> dict[str, float]:
        return {
            "c_sphere": self.c_sphere,
            "c_sigma": self.c_sigma,
            "c_gate": self.c_gate,
            "c_prime": self.c_prime,
            "inductance": self.inductance,
            "e_josephson": self.e_josephson,
            "l_josephson": self.l_josephson,
            "c_josephson": self.c_josephson,
            "e_inductive": self.e_inductive,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "CircuitParams":
        return cls(**{k: float(v) for k, v in data.items()})


_SINUSOID = "sinusoid"
_SAMPLED = "sampled"


@dataclass(frozen=True)
class DriveWaveform:
    """A periodic scalar drive: voltage (V) or potential energy (J).

    ``sinusoid`` waveforms are amplitude*cos(omega*t + phase0).  ``sampled``
    waveforms are the piecewise-linear interpolant of the supplied samples,
    which must span exactly one period with equal first and last values;
    evaluation extends them periodically.
    """

    kind: str
    amplitude: float = 0.0
    omega: float = 0.0        # rad/s
    phase0: float = 0.0       # rad
    samples: tuple[tuple[float, float], ...] | None = None
    period: float = 0.0       # s

    def __post_init__(self) -> None:
        _require(self.kind in (_SINUSOID, _SAMPLED),
                 f"DriveWaveform.kind must be '{_SINUSOID}' or '{_SAMPLED}'")
        _require(self.omega > 0.0, "DriveWaveform.omega must be strictly positive")
        if self.kind == _SINUSOID:
            expected = 2.0 * math.pi / self.omega
            if self.period == 0.0:
                object.__setattr__(self, "period", expected)
            _require(abs(self.period - expected) <= 1e-9 * expected,
                     "DriveWaveform.period must equal 2*pi/omega for a sinusoid")
            _require(self.samples is None, "DriveWaveform: sinusoid takes no samples")
        else:
            _require(self.samples is not None and len(self.samples) >= 2,
                     "DriveWaveform: sampled waveform needs >= 2 samples")
            ts = np.array([t for t, _ in self.samples], dtype=float)
            vs = np.array([v for _, v in self.samples], dtype=float)
            _require(bool(np.all(np.diff(ts) > 0.0)),
                     "DriveWaveform.samples timestamps must be strictly increasing")
            span = float(ts[-1] - ts[0])
            _require(abs(self.period - span) <= 1e-9 * span,
                     "DriveWaveform.samples must span exactly one period")
            _require(vs[0] == vs[-1],
                     "DriveWaveform.samples first and last values must be equal "
                     "(periodicity)")
            _require(abs(self.omega * self.period - 2.0 * math.pi)
                     <= 1e-9 * 2.0 * math.pi,
                     "DriveWaveform.period must equal 2*pi/omega")

    @classmethod
    def sinusoid(cls, amplitude: float, omega: float, phase0: float = 0.0) -> "DriveWaveform":
        return cls(kind=_SINUSOID, amplitude=amplitude, omega=omega, phase0=phase0)

    @classmethod
    def sampled(cls, times: Sequence[float], values: Sequence[float],
                period: float | None = None) -> "DriveWaveform":
        samples = tuple((float(t), float(v)) for t, v in zip(times, values))
        if period is None:
            period = samples[-1][0] - samples[0][0]
        return cls(kind=_SAMPLED, samples=samples, period=float(period),
                   omega=2.0 * math.pi / float(period))

    @property
    def is_sinusoid(self) -> bool:
        return self.kind == _SINUSOID

    def value(self, t: "float | np.ndarray") -> "float | np.ndarray":
        """Waveform value at time(s) t; sampled kinds wrap periodically."""
        if self.kind == _SINUSOID:
            return self.amplitude * np.cos(self.omega * np.asarray(t, dtype=float)
                                           + self.phase0)
        ts = np.array([s[0] for s in self.samples], dtype=float)
        vs = np.array([s[1] for s in self.samples], dtype=float)
        tt = (np.asarray(t, dtype=float) - ts[0]) % self.period + ts[0]
        out = np.interp(tt, ts, vs)
        return out if np.ndim(t) else float(out)

    def mean(self) -> float:
        """Exact one-period average of the waveform."""
        if self.kind == _SINUSOID:
            return 0.0
        ts = np.array([s[0] for s in self.samples], dtype=float)
        vs = np.array([s[1] for s in self.samples], dtype=float)
        # trapezoid is exact for the piecewise-linear interpolant
        return float(np.sum(0.5 * (vs[1:] + vs[:-1]) * np.diff(ts)) / self.period)

    def antiderivative(self, t: "float | np.ndarray") -> "float | np.ndarray":
        """Exact integral of the waveform from its time origin to t.

        For sinusoids this is analytic; for sampled waveforms it is the exact
        integral of the piecewise-linear interpolant (periodic extension).
        """
        if self.kind == _SINUSOID:
            tt = np.asarray(t, dtype=float)
            return (self.amplitude / self.omega) * (np.sin(self.omega * tt + self.phase0)
                                                    - math.sin(self.phase0))
        ts = np.array([s[0] for s in self.samples], dtype=float)
        vs = np.array([s[1] for s in self.samples], dtype=float)
        seg = np.concatenate(([0.0], np.cumsum(0.5 * (vs[1:] + vs[:-1]) * np.diff(ts))))
        per_period = seg[-1]
        tt = np.asarray(t, dtype=float) - ts[0]
        wraps = np.floor(tt / self.period)
        frac_t = tt - wraps * self.period + ts[0]
        idx = np.clip(np.searchsorted(ts, frac_t, side="right") - 1, 0, len(ts) - 2)
        dt = frac_t - ts[idx]
        slope = (vs[idx + 1] - vs[idx]) / (ts[idx + 1] - ts[idx])
        partial = seg[idx] + vs[idx] * dt + 0.5 * slope * dt * dt
        out = wraps * per_period + partial
        return out if np.ndim(t) else float(out)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "omega": self.omega,
            "phase0": self.phase0,
            "samples": None if self.samples is None else [list(s) for s in self.samples],
            "period": self.period,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DriveWaveform":
        samples = data.get("samples")
        return cls(
            kind=str(data["kind"]),
            amplitude=float(data.get("amplitude", 0.0)),
            omega=float(data["omega"]),
            phase0=float(data.get("phase0", 0.0)),
            samples=None if samples is None else tuple((float(t), float(v))
                                                       for t, v in samples),
            period=float(data.get("period", 0.0)),
        )


@dataclass(frozen=True)
class Trajectory:
    """Time series of the junction phase difference and its rate."""

    times: np.ndarray           # s
    delta_phi: np.ndarray       # rad
    delta_phi_dot: np.ndarray   # rad/s
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", _readonly(self.times))
        object.__setattr__(self, "delta_phi", _readonly(self.delta_phi))
        object.__setattr__(self, "delta_phi_dot", _readonly(self.delta_phi_dot))
        n = len(self.times)
        _require(len(self.delta_phi) == n and len(self.delta_phi_dot) == n,
                 "Trajectory lists must have equal length")
        _require(bool(np.all(np.diff(self.times) > 0.0)),
                 "Trajectory.times must be strictly increasing")

    def to_csv(self, path: str) -> None:
        """Write the mandated CSV schema: header row, 17 significant digits."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t_seconds", "delta_phi_rad", "delta_phi_dot_rad_per_s"])
            for t, p, pd in zip(self.times, self.delta_phi, self.delta_phi_dot):
                writer.writerow([f"{t:.17g}", f"{p:.17g}", f"{pd:.17g}"])

    def to_dict(self) -> dict[str, Any]:
        return {
            "times": self.times.tolist(),
            "delta_phi": self.delta_phi.tolist(),
            "delta_phi_dot": self.delta_phi_dot.tolist(),
            "meta": dict(self.meta),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Trajectory":
        return cls(times=np.asarray(data["times"], dtype=float),
                   delta_phi=np.asarray(data["delta_phi"], dtype=float),
                   delta_phi_dot=np.asarray(data["delta_phi_dot"], dtype=float),
                   meta=dict(data.get("meta", {})))


@dataclass(frozen=True)
class SidebandSpectrum:
    """Quasi-energy ladder with a complex amplitude per harmonic index n.

    The energy of entry n is ``base_energy + n*hbar*omega`` and is always
    recomputed (see :meth:`energy_of`), never stored.  Construction enforces
    the wavefunction normalization sum |c_n|^2 = 1 within ``norm_tol``.
    """

    base_energy: float                     # J
    omega: float                           # rad/s
    coefficients: Mapping[int, complex]    # n -> c_n
    truncation_n: int
    norm_tol: float = 1e-9

    def __post_init__(self) -> None:
        coeffs = {int(n): complex(c) for n, c in self.coefficients.items()}
        object.__setattr__(self, "coefficients", coeffs)
        _require(self.omega > 0.0, "SidebandSpectrum.omega must be strictly positive")
        _require(self.truncation_n >= 0, "SidebandSpectrum.truncation_n must be >= 0")
        _require(all(abs(n) <= self.truncation_n for n in coeffs),
                 "SidebandSpectrum coefficients must lie within |n| <= truncation_n")
        total = sum(abs(c) ** 2 for c in coeffs.values())
        _require(abs(total - 1.0) <= self.norm_tol,
                 f"SidebandSpectrum normalization sum |c_n|^2 = {total!r} "
                 f"differs from 1 by more than norm_tol={self.norm_tol:g}")

    def energy_of(self, n: int) -> float:
        """Quasi-energy base_energy + n*hbar*omega of harmonic n, in J."""
        return self.base_energy + n * (HBAR * self.omega)

    def amplitude(self, n: int) -> complex:
        return self.coefficients.get(n, 0.0 + 0.0j)

    def to_dict(self) -> dict[str, Any]:
        return {
            "base_energy_J": self.base_energy,
            "omega_rad_per_s": self.omega,
            "truncation_n": self.truncation_n,
            "coefficients": [
                {"n": n, "re": self.coefficients[n].real, "im": self.coefficients[n].imag}
                for n in sorted(self.coefficients)
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SidebandSpectrum":
        coeffs = {int(entry["n"]): complex(float(entry["re"]), float(entry["im"]))
                  for entry in data["coefficients"]}
        return cls(base_energy=float(data["base_energy_J"]),
                   omega=float(data["omega_rad_per_s"]),
                   coefficients=coeffs,
                   truncation_n=int(data["truncation_n"]))


@dataclass(frozen=True)
class MassShell:
    """Spherical mass shell with sinusoidally modulated mass."""

    m0: float      # kg, DC mass
    m1: float      # kg, AC amplitude
    radius: float  # m
    omega: float   # rad/s, modulation frequency

    def __post_init__(self) -> None:
        _require(self.radius > 0.0, "MassShell.radius must be strictly positive")
        _require(self.m0 >= 0.0, "MassShell.m0 must be non-negative")
        _require(abs(self.m1) <= self.m0,
                 "MassShell requires |m1| <= m0 (total mass never negative)")

    def to_dict(self) -> dict[str, float]:
        return {"m0": self.m0, "m1": self.m1, "radius": self.radius, "omega": self.omega}

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "MassShell":
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class TwoLevelAtom:
    """Two-level system with explicit level energies and rest masses.

    Energies and masses are stored redundantly so the mass-energy relation
    delta_m = delta_E / c^2 can itself be probed; construction checks it
    within ``mass_consistency_tol`` (relative to delta_E/c^2, with a floor at
    the double-precision representation granularity of the masses).
    """

    energy_i: float       # J
    energy_f: float       # J
    rest_mass_i: float    # kg
    rest_mass_f: float    # kg
    charge: float = 0.0   # C, zero for a neutral atom
    mass_consistency_tol: float = 1e-6

    def __post_init__(self) -> None:
        _require(self.energy_f > self.energy_i,
                 "TwoLevelAtom.energy_f must exceed energy_i")
        _require(self.rest_mass_i > 0.0 and self.rest_mass_f > 0.0,
                 "TwoLevelAtom rest masses must be strictly positive")
        expected = (self.energy_f - self.energy_i) / C_LIGHT ** 2
        floor = 8.0 * np.finfo(float).eps * max(self.rest_mass_i, self.rest_mass_f)
        _require(abs((self.rest_mass_f - self.rest_mass_i) - expected)
                 <= max(self.mass_consistency_tol * expected, floor),
                 "TwoLevelAtom rest_mass_f - rest_mass_i must equal "
                 "(energy_f - energy_i)/c^2 within tolerance")

    @classmethod
    def from_transition(cls, rest_mass_i: float, transition_energy: float,
                        charge: float = 0.0) -> "TwoLevelAtom":
        """Build a consistent atom from the lower-state mass and transition energy."""
        energy_i = rest_mass_i * C_LIGHT ** 2
        return cls(energy_i=energy_i,
                   energy_f=energy_i + transition_energy,
                   rest_mass_i=rest_mass_i,
                   rest_mass_f=rest_mass_i + transition_energy / C_LIGHT ** 2,
                   charge=charge)

    @property
    def transition_energy(self) -> float:
        return self.energy_f - self.energy_i

    def to_dict(self) -> dict[str, float]:
        return {
            "energy_i": self.energy_i,
            "energy_f": self.energy_f,
            "rest_mass_i": self.rest_mass_i,
            "rest_mass_f": self.rest_mass_f,
            "charge": self.charge,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "TwoLevelAtom":
        return cls(**{k: float(v) for k, v in data.items()})
