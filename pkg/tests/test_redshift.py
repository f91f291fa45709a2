"""Shell potential, mass-energy bookkeeping, redshift, FM sideband spectra,
and the charged-system cancellation check."""

import math

import numpy as np
import pytest

from scalar_ab.ab_phase import PhaseHistory, accumulate_grav_phase
from scalar_ab.core import CODATA2018, MassShell, TwoLevelAtom
from scalar_ab.redshift import (exploding_shell_potential,
                                ion_cancellation_check, modulation_indices,
                                redshifted_frequency, rest_mass_in_potential,
                                shell_potential, transition_sideband_spectrum)
from scalar_ab.spectral import fm_spectrum_via_fft

HBAR = CODATA2018.hbar
H = CODATA2018.h
E = CODATA2018.e_charge
C = CODATA2018.c_light
G = CODATA2018.g_newton

# Earth-like shell: Phi = -G*M/r evaluates to -6.2563e7 J/kg and a
# fractional redshift |Phi|/c^2 / (1 + |Phi|/c^2) of 6.9611e-10.
EARTH_MASS = 5.972e24
EARTH_RADIUS = 6.371e6
EARTH_POTENTIAL = -62563050.69847748
EARTH_FRACTIONAL_SHIFT = 6.961078181808973e-10


def earth_shell(m1=0.0, omega=2 * math.pi * 1e-3):
    return MassShell(m0=EARTH_MASS, m1=m1, radius=EARTH_RADIUS, omega=omega)


class TestShellPotential:
    def test_empty_shell_is_zero(self):
        shell = MassShell(m0=0.0, m1=0.0, radius=1.0, omega=1.0)
        assert shell_potential(shell, 0.3) == 0.0

    def test_earth_preset_value(self):
        assert shell_potential(earth_shell(), 0.0) == pytest.approx(
            EARTH_POTENTIAL, rel=1e-12)
        assert shell_potential(earth_shell(), 0.0) == pytest.approx(-6.26e7, rel=1e-3)

    def test_half_period_flips_ac_sign(self):
        shell = earth_shell(m1=1e20)
        t_half = math.pi / shell.omega
        expected = -G * (shell.m0 - shell.m1) / shell.radius
        assert shell_potential(shell, t_half) == pytest.approx(expected, rel=1e-9)

    def test_vectorized_over_time(self):
        shell = earth_shell(m1=1e20)
        t = np.linspace(0.0, 1e3, 64)
        values = shell_potential(shell, t)
        assert values.shape == t.shape
        assert np.all(values < 0.0)

    def test_exploding_shell_samples(self):
        grid = np.linspace(0.0, 10.0, 11)
        samples = exploding_shell_potential(2.8e30, lambda t: 7e8 + 1e7 * t, grid)
        assert samples[0][1] == pytest.approx(-G * 2.8e30 / 7e8, rel=1e-12)
        assert samples[-1][1] > samples[0][1]  # shallower as the shell expands
        history = accumulate_grav_phase([(0.0, 1e-25), (10.0, 1e-25)],
                                        samples, grid, rel_tol=None)
        assert history.phase[-1] < 0.0


class TestRestMassInPotential:
    def test_zero_potential_is_einstein_relation(self):
        assert rest_mass_in_potential(9e16, 0.0) == 9e16 / C ** 2

    def test_negative_potential_rescales_like_redshift(self):
        # Same 1/(1 - Phi/c^2) factor as the frequency map: a negative
        # potential divides the zero-potential mass by 1 + |Phi|/c^2.
        base = rest_mass_in_potential(9e16, 0.0)
        inside = rest_mass_in_potential(9e16, EARTH_POTENTIAL)
        assert inside == pytest.approx(base / (1.0 - EARTH_POTENTIAL / C ** 2),
                                       rel=1e-15)
        assert inside != base

    def test_zero_energy_zero_mass(self):
        assert rest_mass_in_potential(0.0, EARTH_POTENTIAL) == 0.0

    def test_rejects_relativistic_potential(self):
        with pytest.raises(ValueError, match="weak-potential"):
            rest_mass_in_potential(1.0, -C ** 2)


class TestRedshiftedFrequency:
    def test_zero_potential_is_identity(self):
        assert redshifted_frequency(1e15, 0.0) == 1e15

    def test_earth_fractional_shift(self):
        f_local = 1e15
        f_far = redshifted_frequency(f_local, EARTH_POTENTIAL)
        assert f_far < f_local  # redshift for a negative potential
        shift = (f_local - f_far) / f_local
        assert shift == pytest.approx(EARTH_FRACTIONAL_SHIFT, rel=1e-6)

    def test_small_potential_shift_is_linear(self):
        f_local = 1e15

        def shift(potential):
            return (f_local - redshifted_frequency(f_local, potential)) / f_local

        ratio = shift(2 * EARTH_POTENTIAL) / shift(EARTH_POTENTIAL)
        assert ratio == pytest.approx(2.0, rel=1e-3)


class TestModulationIndices:
    def test_static_shell_gives_zero(self):
        atom = TwoLevelAtom.from_transition(1e-26, 1.0 * E)
        indices = modulation_indices(atom, earth_shell(m1=0.0))
        assert indices == (0.0, 0.0, 0.0)

    def test_degenerate_masses_unsplit(self):
        # A transition small enough that both levels share a double-precision
        # rest mass: the individual indices survive but the splitting is zero.
        atom = TwoLevelAtom(energy_i=1e-10, energy_f=1e-10 + 1e-24,
                            rest_mass_i=1e-25, rest_mass_f=1e-25)
        shell = earth_shell(m1=1e20)
        indices = modulation_indices(atom, shell)
        assert indices.alpha_i == indices.alpha_f != 0.0
        assert indices.delta_alpha == 0.0

    def test_two_path_evaluation_agrees(self):
        # 1 eV transition, M1 = 1 kg, r0 = 1 m, omega = 2*pi*1 Hz.
        atom = TwoLevelAtom.from_transition(1e-26, 1.0 * E)
        shell = MassShell(m0=2.0, m1=1.0, radius=1.0, omega=2 * math.pi)
        indices = modulation_indices(atom, shell)
        delta_m = atom.transition_energy / C ** 2
        independent = G * shell.m1 * delta_m / (HBAR * shell.omega * shell.radius)
        assert indices.delta_alpha == pytest.approx(independent, rel=1e-9)
        assert indices.delta_alpha == pytest.approx(
            indices.alpha_f - indices.alpha_i, rel=1e-9)

    def test_scaling_laws(self):
        atom = TwoLevelAtom.from_transition(1e-26, 2.0 * E)
        base = MassShell(m0=10.0, m1=1.0, radius=2.0, omega=4 * math.pi)
        d0 = modulation_indices(atom, base).delta_alpha
        for factor in (2.0, 5.0, 10.0):
            up_m1 = MassShell(m0=10.0, m1=factor * 1.0, radius=2.0, omega=4 * math.pi)
            assert modulation_indices(atom, up_m1).delta_alpha == pytest.approx(
                factor * d0, rel=1e-9)
            up_omega = MassShell(m0=10.0, m1=1.0, radius=2.0,
                                 omega=factor * 4 * math.pi)
            assert modulation_indices(atom, up_omega).delta_alpha == pytest.approx(
                d0 / factor, rel=1e-9)
            up_radius = MassShell(m0=10.0, m1=1.0, radius=factor * 2.0,
                                  omega=4 * math.pi)
            assert modulation_indices(atom, up_radius).delta_alpha == pytest.approx(
                d0 / factor, rel=1e-9)


def synthetic_atom_and_shell(delta_alpha, m0=1e6):
    """Pick shell parameters that realize the requested splitting index."""
    atom = TwoLevelAtom(energy_i=1e-10, energy_f=1e-10 + 1e-12 * C ** 2,
                        rest_mass_i=1e-11, rest_mass_f=1e-11 + 1e-12)
    omega = 2 * math.pi
    m1 = delta_alpha * HBAR * omega * 1.0 / (G * 1e-12)
    shell = MassShell(m0=max(m0, abs(m1)), m1=m1, radius=1.0, omega=omega)
    return atom, shell


class TestTransitionSidebandSpectrum:
    def test_unmodulated_shell_single_line(self):
        atom = TwoLevelAtom.from_transition(1.44316060e-25, 1.589 * E)
        spectrum = transition_sideband_spectrum(atom, earth_shell(m1=0.0), 12)
        assert spectrum.amplitude(0) == 1.0
        assert len(spectrum.lines_above(0.0)) == 1
        local = atom.transition_energy / H
        assert (local - spectrum.carrier_frequency) / local == pytest.approx(
            EARTH_FRACTIONAL_SHIFT, rel=1e-6)

    def test_depth_five_splitting(self):
        atom, shell = synthetic_atom_and_shell(5.0)
        spectrum = transition_sideband_spectrum(atom, shell, 25)
        assert spectrum.delta_alpha == pytest.approx(5.0, rel=1e-9)
        strong = spectrum.lines_above(0.01)
        assert len(strong) >= 9
        positive = {n: a for n, _, a in spectrum.sideband_lines if n > 0}
        assert max(positive, key=positive.get) in (4, 5)

    def test_amplitudes_match_fft_oracle(self):
        atom, shell = synthetic_atom_and_shell(5.0)
        spectrum = transition_sideband_spectrum(atom, shell, 25)
        omega = shell.omega
        m = 4096
        t = np.linspace(0.0, 2 * math.pi / omega, m + 1)
        history = PhaseHistory(times=t, phase=5.0 * np.sin(omega * t))
        oracle = fm_spectrum_via_fft(history, omega, 25)
        for n in range(-25, 26):
            assert spectrum.amplitude(n) == pytest.approx(abs(oracle.amplitude(n)),
                                                          abs=1e-8)

    def test_line_frequencies_follow_ladder(self):
        atom, shell = synthetic_atom_and_shell(1.0)
        spectrum = transition_sideband_spectrum(atom, shell, 15)
        spacing = shell.omega / (2 * math.pi)
        for n, freq, _ in spectrum.sideband_lines:
            assert freq == pytest.approx(spectrum.carrier_frequency + n * spacing,
                                         rel=1e-12)

    def test_rejects_small_truncation(self):
        atom, shell = synthetic_atom_and_shell(8.0)
        with pytest.raises(ValueError, match="need >="):
            transition_sideband_spectrum(atom, shell, 5)

    def test_normalization(self):
        for depth in (0.2, 1.7, 6.3):
            atom, shell = synthetic_atom_and_shell(depth)
            spectrum = transition_sideband_spectrum(atom, shell, 40)
            total = sum(a ** 2 for _, _, a in spectrum.sideband_lines)
            assert total == pytest.approx(1.0, abs=1e-9)


class TestIonCancellation:
    def test_arbitrary_phase_returns_base_rate(self):
        t = np.linspace(0.0, 1.0, 257)
        history = PhaseHistory(times=t, phase=3.7 * np.sin(2 * math.pi * t))
        assert ion_cancellation_check(history, 0.42) == 0.42

    def test_zero_phase(self):
        history = PhaseHistory(times=[0.0, 1.0], phase=[0.0, 0.0])
        assert ion_cancellation_check(history, 0.9) == 0.9

    def test_megaradian_phase_within_one_ulp(self):
        t = np.linspace(0.0, 1.0, 4097)
        history = PhaseHistory(times=t, phase=1e6 * np.sin(2 * math.pi * 5 * t))
        rate = ion_cancellation_check(history, 0.42)
        assert abs(rate - 0.42) <= np.spacing(0.42)

    def test_separate_factor_route_agrees(self):
        # The naive product exp(+i phi) * A * exp(-i phi) carries a few ulps
        # of rounding; it must agree with the exact-cancellation route.
        t = np.linspace(0.0, 1.0, 513)
        phi = 1e5 * np.sin(2 * math.pi * 3 * t)
        history = PhaseHistory(times=t, phase=phi)
        rate = ion_cancellation_check(history, 0.73)
        amplitude = math.sqrt(0.73)
        naive = np.abs(np.exp(1j * phi) * amplitude * np.exp(-1j * phi)) ** 2
        assert np.max(np.abs(naive - rate)) < 1e-14

    def test_rate_never_varies_with_phase(self):
        rng = np.random.default_rng(11)
        t = np.linspace(0.0, 1.0, 129)
        for _ in range(25):
            phase = rng.normal(scale=10.0 ** rng.integers(0, 7), size=t.size)
            phase[0] = 0.0
            history = PhaseHistory(times=t, phase=phase)
            assert ion_cancellation_check(history, 0.31) == 0.31


class TestMassEnergyConsistencyChain:
    def test_delta_alpha_via_masses_equals_via_energy(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            m_i = 10.0 ** rng.uniform(-27, -20)
            delta_m = m_i * 10.0 ** rng.uniform(-2, -0.3)
            e_i = m_i * C ** 2
            atom = TwoLevelAtom(energy_i=e_i, energy_f=e_i + delta_m * C ** 2,
                                rest_mass_i=m_i, rest_mass_f=m_i + delta_m)
            shell = MassShell(m0=10.0 ** rng.uniform(5, 25),
                              m1=0.0, radius=10.0 ** rng.uniform(0, 8),
                              omega=10.0 ** rng.uniform(-3, 6))
            shell = MassShell(m0=shell.m0, m1=0.37 * shell.m0,
                              radius=shell.radius, omega=shell.omega)
            via_masses = modulation_indices(atom, shell).delta_alpha
            via_energy = (G * shell.m1 * (atom.transition_energy / C ** 2)
                          / (HBAR * shell.omega * shell.radius))
            assert via_masses == pytest.approx(via_energy, rel=1e-12)
