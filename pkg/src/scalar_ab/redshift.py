"""Two-level atom inside a time-varying mass shell: shell potential,
mass-energy bookkeeping, gravitational redshift, FM modulation indices and
transition sideband spectra, plus the charge-superselection cancellation
check for the electric case.

The carrier line is redshifted by the DC shell potential -G*M0/r0 only; the
AC component shows up exclusively as FM sidebands at multiples of the
modulation frequency, with line amplitudes |J_n(delta_alpha)| where
delta_alpha = G*M1*(m_f - m_i)/(hbar*omega*r0).  For a charged system the
common electric phase factor cancels in the transition rate, so its
spectrum never splits: that contrast is the point of this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .ab_phase import PhaseHistory
from .core import (C_LIGHT, G_NEWTON, HBAR, PLANCK_H, MassShell, TwoLevelAtom,
                   _require)
from .spectral import _bessel_row, required_truncation

__all__ = [
    "TransitionSpectrum",
    "ModulationIndices",
    "shell_potential",
    "exploding_shell_potential",
    "rest_mass_in_potential",
    "redshifted_frequency",
    "modulation_indices",
    "transition_sideband_spectrum",
    "ion_cancellation_check",
]


def shell_potential(shell: MassShell, t: "float | np.ndarray") -> "float | np.ndarray":
    """Interior potential -G*(M0 + M1*cos(omega*t))/r0 in J/kg.

    Uniform throughout the interior (no field point dependence), so the
    enclosed system feels no force, only the potential.
    """
    mass = shell.m0 + shell.m1 * np.cos(shell.omega * np.asarray(t, dtype=float))
    out = -G_NEWTON * mass / shell.radius
    return out if np.ndim(t) else float(out)


def exploding_shell_potential(mass: float, radius_of_t, t_grid: Sequence[float],
                              ) -> list[tuple[float, float]]:
    """Sampled interior potential -G*mass/r(t) for a shell with fixed mass
    and time-dependent radius (expanding-shell scenario).

    Returns (t, potential) pairs suitable for
    :func:`scalar_ab.ab_phase.accumulate_grav_phase`.
    """
    _require(mass >= 0.0, "exploding_shell_potential mass must be non-negative")
    grid = np.asarray(t_grid, dtype=float)
    radii = np.asarray([float(radius_of_t(t)) for t in grid])
    _require(bool(np.all(radii > 0.0)),
             "exploding_shell_potential radius must stay strictly positive")
    return [(float(t), float(-G_NEWTON * mass / r)) for t, r in zip(grid, radii)]


def _check_weak_potential(potential: float, op: str) -> None:
    if not abs(potential) < C_LIGHT ** 2:
        raise ValueError(
            f"{op}: |potential| = {abs(potential):.3g} J/kg is not below c^2 "
            f"= {C_LIGHT ** 2:.3g}; outside the weak-potential regime")


def rest_mass_in_potential(rest_energy: float, potential: float) -> float:
    """Rest mass m = E / (c^2 * (1 - potential/c^2)) of a system with
    unperturbed energy E sitting in gravitational potential ``potential``
    (J/kg).

    Reduces to E/c^2 at zero potential.  The potential rescales the mass
    exactly the way it rescales frequencies in
    :func:`redshifted_frequency`: a negative potential divides by
    1 + |potential|/c^2.
    """
    _check_weak_potential(potential, "rest_mass_in_potential")
    return rest_energy / (C_LIGHT ** 2 * (1.0 - potential / C_LIGHT ** 2))


def redshifted_frequency(local_frequency: float, potential: float) -> float:
    """Frequency seen far away: f_local / (1 - potential/c^2).

    For a negative potential the distant observer sees a lower frequency
    (gravitational redshift).
    """
    _check_weak_potential(potential, "redshifted_frequency")
    return local_frequency / (1.0 - potential / C_LIGHT ** 2)


class ModulationIndices(NamedTuple):
    alpha_i: float
    alpha_f: float
    delta_alpha: float


def modulation_indices(atom: TwoLevelAtom, shell: MassShell) -> ModulationIndices:
    """FM modulation depths G*M1*m/(hbar*omega*r0) for both levels.

    ``delta_alpha = alpha_f - alpha_i`` is the observable splitting index; it
    is linear in the shell's AC mass and in the level rest-mass difference,
    and inversely linear in the modulation frequency and shell radius.
    """
    _require(shell.omega > 0.0, "modulation_indices requires shell.omega > 0")
    scale = G_NEWTON * shell.m1 / (HBAR * shell.omega * shell.radius)
    alpha_i = scale * atom.rest_mass_i
    alpha_f = scale * atom.rest_mass_f
    return ModulationIndices(alpha_i=alpha_i, alpha_f=alpha_f,
                             delta_alpha=scale * (atom.rest_mass_f - atom.rest_mass_i))


@dataclass(frozen=True)
class TransitionSpectrum:
    """Observable emission/absorption line pattern of the enclosed atom.

    ``sideband_lines`` holds (n, frequency in Hz, relative amplitude); line n
    sits at carrier + n*omega/(2*pi) with amplitude |J_n(delta_alpha)|, so
    the squared amplitudes sum to one.
    """

    carrier_frequency: float   # Hz, DC-redshifted unsplit line
    omega: float               # rad/s, shell modulation frequency
    delta_alpha: float
    sideband_lines: tuple[tuple[int, float, float], ...]

    def __post_init__(self) -> None:
        lines = tuple((int(n), float(f), float(a)) for n, f, a in self.sideband_lines)
        object.__setattr__(self, "sideband_lines", lines)
        _require(self.omega > 0.0, "TransitionSpectrum.omega must be positive")
        spacing = self.omega / (2.0 * math.pi)
        for n, f, amp in lines:
            _require(amp >= 0.0, "TransitionSpectrum amplitudes must be non-negative")
            expected = self.carrier_frequency + n * spacing
            _require(abs(f - expected) <= 1e-9 * max(abs(expected), spacing),
                     "TransitionSpectrum line frequencies must follow "
                     "carrier + n*omega/2pi")
        total = sum(a * a for _, _, a in lines)
        _require(abs(total - 1.0) <= 1e-9,
                 f"TransitionSpectrum normalization sum amp^2 = {total!r} "
                 "differs from 1 by more than 1e-9")

    def amplitude(self, n: int) -> float:
        for m, _, a in self.sideband_lines:
            if m == n:
                return a
        return 0.0

    def lines_above(self, threshold: float) -> list[tuple[int, float, float]]:
        return [line for line in self.sideband_lines if line[2] > threshold]

    def to_dict(self) -> dict:
        return {
            "carrier_frequency_Hz": self.carrier_frequency,
            "omega_rad_per_s": self.omega,
            "delta_alpha": self.delta_alpha,
            "sideband_lines": [
                {"n": n, "frequency_Hz": f, "relative_amplitude": a}
                for n, f, a in sorted(self.sideband_lines)
            ],
        }


def transition_sideband_spectrum(atom: TwoLevelAtom, shell: MassShell,
                                 truncation_n: int) -> TransitionSpectrum:
    """Line spectrum of the atom's transition inside the modulated shell.

    The carrier is the transition frequency redshifted by the DC potential
    -G*M0/r0; sidebands at carrier + n*omega/2pi carry relative amplitudes
    |J_n(delta_alpha)|.  For large delta_alpha the dominant sidebands sit
    near n = +-delta_alpha.
    """
    indices = modulation_indices(atom, shell)
    needed = required_truncation(indices.delta_alpha)
    if truncation_n < needed:
        raise ValueError(
            f"transition_sideband_spectrum: truncation_n={truncation_n} too small "
            f"for delta_alpha={indices.delta_alpha:g}; need >= {needed}")
    local_frequency = atom.transition_energy / PLANCK_H
    dc_potential = -G_NEWTON * shell.m0 / shell.radius
    carrier = redshifted_frequency(local_frequency, dc_potential)
    spacing = shell.omega / (2.0 * math.pi)
    row = _bessel_row(abs(indices.delta_alpha), truncation_n)
    lines = tuple((n, carrier + n * spacing, float(abs(row[abs(n)])))
                  for n in range(-truncation_n, truncation_n + 1))
    return TransitionSpectrum(carrier_frequency=carrier, omega=shell.omega,
                              delta_alpha=indices.delta_alpha,
                              sideband_lines=lines)


def ion_cancellation_check(common_phase: PhaseHistory, base_rate: float) -> float:
    """Transition rate |exp(+i*phi) * A * exp(-i*phi)|^2 with A = sqrt(base_rate).

    Charge superselection forces bra and ket of any transition to carry the
    same charge, hence the same accumulated electric phase; the two phase
    factors combine to exp(i*(phi - phi)), whose exponent cancels exactly in
    floating point for every sample, so the returned rate equals
    ``base_rate`` to within one ulp no matter how large or wild phi(t) is.
    """
    _require(base_rate >= 0.0, "ion_cancellation_check base_rate must be non-negative")
    bra_phase = common_phase.phase
    ket_phase = -common_phase.phase
    unimodular = np.exp(1j * (bra_phase + ket_phase))
    rates = base_rate * (unimodular.real ** 2 + unimodular.imag ** 2)
    # All samples are equal by construction; return the one farthest from
    # base_rate so any numerical surprise is the value callers see.
    worst = int(np.argmax(np.abs(rates - base_rate)))
    return float(rates[worst])
