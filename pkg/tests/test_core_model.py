"""Value-type invariants and serialization round trips."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scalar_ab.core import (CODATA2018, C_LIGHT, CircuitParams, DriveWaveform,
                            MassShell, PhysicalConstants, SidebandSpectrum,
                            Trajectory, TwoLevelAtom)

H = CODATA2018.h
E = CODATA2018.e_charge


def make_circuit_params(**overrides):
    base = dict(c_sphere=5.6e-12, c_sigma=5.576481251856608e-14, c_gate=1e-15,
                c_prime=5.576481251856608e-14, inductance=1.6346151260646912e-7,
                e_josephson=25e9 * H, c_josephson=1e-14)
    base.update(overrides)
    return CircuitParams(**base)


class TestPhysicalConstants:
    def test_flux_quantum_recomputed_exactly(self):
        c = PhysicalConstants()
        assert c.flux_quantum == c.h / (2.0 * c.e_charge)

    def test_flux_to_phase(self):
        c = CODATA2018
        assert c.flux_to_phase == pytest.approx(2 * math.pi / 2.0678338484619295e-15)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError, match="invariant violated.*hbar"):
            PhysicalConstants(hbar=0.0)
        with pytest.raises(ValueError, match="e_charge"):
            PhysicalConstants(e_charge=-1e-19)

    def test_round_trip(self):
        c = PhysicalConstants()
        again = PhysicalConstants.from_dict(json.loads(json.dumps(c.to_dict())))
        assert again == c


class TestCircuitParams:
    def test_e_charging_derived(self):
        p = make_circuit_params()
        assert p.e_charging == (2 * E) ** 2 / (2 * p.c_sigma)

    def test_derives_energy_from_inductance_and_back(self):
        p = make_circuit_params()
        phi_sq = (CODATA2018.hbar / (2 * E)) ** 2
        assert p.e_inductive == pytest.approx(phi_sq / p.inductance, rel=1e-15)
        assert p.l_josephson == pytest.approx(phi_sq / p.e_josephson, rel=1e-15)
        via_energy = make_circuit_params(inductance=0.0, e_inductive=p.e_inductive)
        assert via_energy.inductance == pytest.approx(p.inductance, rel=1e-12)

    def test_rejects_inconsistent_pair(self):
        with pytest.raises(ValueError, match="e_inductive inconsistent"):
            make_circuit_params(e_inductive=2e9 * H)  # does not match inductance

    def test_rejects_nonpositive_capacitance(self):
        with pytest.raises(ValueError, match="c_sigma"):
            make_circuit_params(c_sigma=-1e-15)

    def test_rejects_c_sigma_below_junction(self):
        with pytest.raises(ValueError, match="c_sigma must be >= c_josephson"):
            make_circuit_params(c_josephson=1e-12)

    def test_round_trip(self):
        p = make_circuit_params()
        again = CircuitParams.from_dict(json.loads(json.dumps(p.to_dict())))
        assert again == p


class TestDriveWaveform:
    def test_sinusoid_period(self):
        w = DriveWaveform.sinusoid(1e-6, 2 * math.pi * 150e6)
        assert w.period == pytest.approx(1 / 150e6, rel=1e-12)
        assert w.value(0.0) == pytest.approx(1e-6)

    def test_sampled_periodic_extension(self):
        t = np.linspace(0.0, 1.0, 9)
        v = np.sin(2 * math.pi * t) ** 2
        v[-1] = v[0]
        w = DriveWaveform.sampled(t, v)
        assert w.value(0.25) == pytest.approx(w.value(3.25), rel=1e-12)

    def test_antiderivative_matches_dense_trapezoid(self):
        t = np.linspace(0.0, 2.0, 33)
        v = 1.0 + np.cos(math.pi * t)
        v[-1] = v[0]
        w = DriveWaveform.sampled(t, v)
        dense = np.linspace(0.0, 5.0, 20001)
        numeric = np.concatenate(
            [[0.0], np.cumsum(0.5 * (w.value(dense)[1:] + w.value(dense)[:-1])
                              * np.diff(dense))])
        assert np.max(np.abs(w.antiderivative(dense) - numeric)) < 1e-6

    def test_rejects_nonmonotonic_samples(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            DriveWaveform.sampled([0.0, 0.5, 0.4, 1.0], [0.0, 1.0, 1.0, 0.0])

    def test_rejects_open_period(self):
        with pytest.raises(ValueError, match="first and last values"):
            DriveWaveform.sampled([0.0, 0.5, 1.0], [0.0, 1.0, 0.5])

    def test_rejects_zero_omega(self):
        with pytest.raises(ValueError, match="omega"):
            DriveWaveform.sinusoid(1.0, 0.0)

    def test_round_trip(self):
        w = DriveWaveform.sampled([0.0, 0.3, 1.0], [0.2, 1.0, 0.2])
        again = DriveWaveform.from_dict(json.loads(json.dumps(w.to_dict())))
        assert again == w


class TestTrajectory:
    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError, match="equal length"):
            Trajectory(times=[0.0, 1.0], delta_phi=[0.0], delta_phi_dot=[0.0, 0.0])

    def test_rejects_nonmonotonic_times(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            Trajectory(times=[0.0, 1.0, 0.5], delta_phi=[0.0] * 3,
                       delta_phi_dot=[0.0] * 3)

    def test_arrays_immutable(self):
        traj = Trajectory(times=[0.0, 1.0], delta_phi=[0.0, 0.1],
                          delta_phi_dot=[0.0, 0.0])
        with pytest.raises(ValueError):
            traj.delta_phi[0] = 5.0

    def test_round_trip(self):
        traj = Trajectory(times=[0.0, 1e-9, 2e-9], delta_phi=[0.0, 0.1, -0.3],
                          delta_phi_dot=[0.0, 1e9, -2e9], meta={"run": 1})
        again = Trajectory.from_dict(json.loads(json.dumps(traj.to_dict())))
        assert np.array_equal(again.times, traj.times)
        assert np.array_equal(again.delta_phi, traj.delta_phi)
        assert np.array_equal(again.delta_phi_dot, traj.delta_phi_dot)


class TestSidebandSpectrum:
    def test_energy_recomputed(self):
        s = SidebandSpectrum(base_energy=1e-24, omega=2 * math.pi * 1e9,
                             coefficients={0: 1.0 + 0j}, truncation_n=0)
        assert s.energy_of(3) == 1e-24 + 3 * (CODATA2018.hbar * s.omega)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="normalization"):
            SidebandSpectrum(base_energy=0.0, omega=1.0,
                             coefficients={0: 0.5 + 0j}, truncation_n=0)

    def test_rejects_out_of_truncation(self):
        with pytest.raises(ValueError, match="truncation"):
            SidebandSpectrum(base_energy=0.0, omega=1.0,
                             coefficients={5: 1.0 + 0j}, truncation_n=2)

    def test_round_trip(self):
        r = 1 / math.sqrt(2.0)
        s = SidebandSpectrum(base_energy=1e-25, omega=2 * math.pi * 1e6,
                             coefficients={-1: complex(r, 0), 1: complex(0, -r)},
                             truncation_n=1)
        again = SidebandSpectrum.from_dict(json.loads(json.dumps(s.to_dict())))
        assert again.coefficients == s.coefficients
        assert again.base_energy == s.base_energy


class TestMassShell:
    def test_rejects_ac_exceeding_dc(self):
        with pytest.raises(ValueError, match=r"\|m1\| <= m0"):
            MassShell(m0=1.0, m1=2.0, radius=1.0, omega=1.0)

    def test_rejects_zero_radius(self):
        with pytest.raises(ValueError, match="radius"):
            MassShell(m0=1.0, m1=0.0, radius=0.0, omega=1.0)

    def test_round_trip(self):
        s = MassShell(m0=5.972e24, m1=1e10, radius=6.371e6, omega=2 * math.pi * 1e-3)
        assert MassShell.from_dict(json.loads(json.dumps(s.to_dict()))) == s


class TestTwoLevelAtom:
    def test_from_transition_consistent(self):
        atom = TwoLevelAtom.from_transition(1.44316060e-25, 1.589 * E)
        assert atom.energy_f > atom.energy_i
        assert atom.rest_mass_f - atom.rest_mass_i == pytest.approx(
            atom.transition_energy / C_LIGHT ** 2, rel=1e-6)

    def test_rejects_inverted_levels(self):
        with pytest.raises(ValueError, match="energy_f must exceed"):
            TwoLevelAtom(energy_i=2.0, energy_f=1.0, rest_mass_i=1.0, rest_mass_f=1.0)

    def test_rejects_mass_energy_mismatch(self):
        with pytest.raises(ValueError, match="rest_mass_f - rest_mass_i"):
            TwoLevelAtom(energy_i=1e-10, energy_f=2e-10,
                         rest_mass_i=1e-26, rest_mass_f=2e-26)

    def test_round_trip(self):
        atom = TwoLevelAtom.from_transition(9.4526e-26, 14.4e3 * E)
        again = TwoLevelAtom.from_dict(json.loads(json.dumps(atom.to_dict())))
        assert again == atom


@settings(max_examples=50, deadline=None)
@given(m0=st.floats(1e3, 1e30), frac=st.floats(0.0, 1.0),
       radius=st.floats(1e-3, 1e12), omega=st.floats(1e-6, 1e12))
def test_mass_shell_round_trip_is_identity(m0, frac, radius, omega):
    shell = MassShell(m0=m0, m1=frac * m0, radius=radius, omega=omega)
    again = MassShell.from_dict(json.loads(json.dumps(shell.to_dict())))
    assert again == shell  # bit-exact: json floats round-trip via repr


@settings(max_examples=50, deadline=None)
@given(amplitude=st.floats(-1e3, 1e3), omega=st.floats(1e-3, 1e12),
       phase0=st.floats(-math.pi, math.pi))
def test_sinusoid_round_trip_is_identity(amplitude, omega, phase0):
    w = DriveWaveform.sinusoid(amplitude, omega, phase0)
    again = DriveWaveform.from_dict(json.loads(json.dumps(w.to_dict())))
    assert again == w
