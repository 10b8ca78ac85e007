"""Modulation-profile synthesis: element formulas, positivity, reductions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from tvcap.errors import ParameterError, PositivityError, VoltageError
from tvcap.kernels import AdmittanceKernel, VolterraKernel2, convolve_first_order
from tvcap.modsynth import (select_constant_for_positivity, synth_capacitance,
                            synth_general, synth_inductance, synth_nonlinear,
                            synth_resistance)
from tvcap.signals import HarmonicSignal, Waveform, derivative, sample

F0 = 1e6
T0 = 1.0 / F0
OMEGA0 = 2 * math.pi * F0


def tone(v_dc=6.0, v_ac=1.0, phi=0.0, periods=4, spp=2000, f=F0, unit="V"):
    h = HarmonicSignal(v_dc, v_ac, 2 * math.pi * f, phi)
    return sample(h, 0.0, 1.0 / (f * spp), int(periods * spp) + 1, unit=unit)


class TestSelectConstant:
    def test_two_extreme_closed_form(self):
        v = tone()
        raw = Waveform(v.t0, v.dt, np.full(len(v), -1e-9), "F")
        k = select_constant_for_positivity(raw, v, 0.1e-9)
        # max of v*(margin - raw) sits at the voltage peak 7 V
        assert k == pytest.approx(7.0 * 1.1e-9, rel=1e-12)

    def test_already_positive_gives_nonpositive_constant(self):
        v = tone()
        margin = 0.2e-9
        raw = Waveform(v.t0, v.dt, np.full(len(v), 1e-9), "F")
        k = select_constant_for_positivity(raw, v, margin)
        assert k <= 0.0
        profile = k / v.samples + raw.samples
        assert np.min(profile) == pytest.approx(margin, rel=1e-12)

    def test_mixed_sign_voltage_rejected(self):
        v = tone(0.0, 1.0)
        raw = Waveform(v.t0, v.dt, np.zeros(len(v)), "F")
        with pytest.raises(VoltageError):
            select_constant_for_positivity(raw, v, 1e-12)

    def test_negative_voltage_branch(self):
        v = tone(-6.0, 1.0)
        raw = Waveform(v.t0, v.dt, np.full(len(v), -1e-9), "F")
        margin = 1e-10
        k = select_constant_for_positivity(raw, v, margin)
        profile = k / v.samples + raw.samples
        assert np.min(profile) == pytest.approx(margin, rel=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(margin=st.floats(1e-12, 1e-9), c_eq=st.floats(-5e-9, 5e-9),
           v_dc=st.floats(2.0, 10.0), v_ac=st.floats(0.0, 1.9))
    def test_min_equals_margin_exactly(self, margin, c_eq, v_dc, v_ac):
        v = tone(v_dc, v_ac, 0.3, periods=2, spp=200)
        raw = Waveform(v.t0, v.dt, np.full(len(v), c_eq), "F")
        k = select_constant_for_positivity(raw, v, margin)
        profile = k / v.samples + raw.samples
        assert abs(np.min(profile) - margin) <= 1e-12 * margin + 1e-30


class TestSynthCapacitance:
    def test_profile_extremes(self):
        v = tone()
        prof = synth_capacitance(v, -1e-9, c1=10e-9)
        # c1/v + c_eq at the voltage extremes 7 V and 5 V
        assert prof.c_min == pytest.approx(10e-9 / 7.0 - 1e-9, rel=1e-12)
        assert prof.c_max == pytest.approx(10e-9 / 5.0 - 1e-9, rel=1e-12)
        assert prof.constants == {"c1": 10e-9}

    def test_zero_constant_degenerates(self):
        v = tone()
        prof = synth_capacitance(v, 2e-9, c1=0.0)
        assert_allclose(prof.capacitance.samples, 2e-9, rtol=0)

    def test_auto_constant_beats_inequality(self):
        # realizability needs c1 > -(v_dc + v_ac) * c_eq for negative c_eq
        v = tone(6.0, 1.0)
        c_eq = -1e-9
        prof = synth_capacitance(v, c_eq)
        assert prof.constants["c1"] > -(6.0 + 1.0) * c_eq
        assert prof.c_min == pytest.approx(0.1 * abs(c_eq), rel=1e-9)

    def test_pinned_constant_may_violate(self):
        v = tone()
        with pytest.raises(PositivityError):
            synth_capacitance(v, -1e-9, c1=1e-9)

    def test_voltage_through_zero_rejected(self):
        v = tone(0.5, 1.0)
        with pytest.raises(VoltageError):
            synth_capacitance(v, -1e-9)

    def test_constant_shift_covariance(self):
        v = tone()
        base = synth_capacitance(v, -1e-9, c1=10e-9).capacitance.samples
        shifted = synth_capacitance(v, -1e-9, c1=12e-9).capacitance.samples
        assert_allclose(shifted - base, 2e-9 / v.samples, rtol=1e-12)


class TestSynthResistance:
    def test_constant_voltage_linear_ramp(self):
        dt = 1e-8
        v = Waveform(0.0, dt, np.full(1001, 5.0), "V")
        prof = synth_resistance(v, 10.0, c2=0.0)
        # integral(v) = 5t, so C = 5t/(10*5) = t/10
        assert_allclose(prof.capacitance.samples, v.times / 10.0, atol=1e-22)

    def test_sign_flip_reflects(self):
        v = tone()
        c2 = 3e-9
        plus = synth_resistance(v, 10.0, c2=c2).capacitance.samples
        minus = synth_resistance(v, -10.0, c2=c2).capacitance.samples
        assert_allclose(plus + minus, 2 * c2 / v.samples, rtol=1e-12)

    def test_negative_resistance_envelope_decays_and_crosses(self):
        # field-driven emulation of -R0: envelope decays linearly, the
        # profile eventually crosses zero
        c0 = 1e-14
        c1 = 7.0 * c0
        c2 = 14.0 * c1
        f = 100e9
        e_in = tone(4.0, 1.0, -math.pi / 2, periods=30, f=f, unit="V/m")
        prof = synth_resistance(e_in, -1000.0, c2=c2)
        c = prof.capacitance
        assert np.min(c.samples) < 0.0
        # period-start samples lie on an exactly linear decay
        spp = 2000
        heads = c.samples[::spp]
        second_diff = np.diff(heads, 2)
        assert np.max(np.abs(second_diff)) <= 1e-6 * abs(heads[1] - heads[0])
        assert heads[1] < heads[0]


class TestSynthInductance:
    @staticmethod
    def _steady(v_dc=6.0, v_ac=1.0, r_s=10.0, l_eq=-1e-6, r_l=1.0):
        # phasor oracle for the element voltage/current behind r_s
        z = r_l + 1j * OMEGA0 * l_eq
        i_ac = v_ac / (r_s + z)
        i_dc = v_dc / (r_s + r_l)
        v_ac_el = i_ac * z
        v_dc_el = v_dc - i_dc * r_s
        return (v_dc_el, v_ac_el, i_dc, i_ac)

    def _waves(self, periods=4):
        v_dc_el, v_ac_el, i_dc, i_ac = self._steady()
        n = periods * 2000 + 1
        dt = T0 / 2000
        t = dt * np.arange(n)
        v = Waveform(0.0, dt, v_dc_el + np.abs(v_ac_el)
                     * np.cos(OMEGA0 * t + np.angle(v_ac_el)), "V")
        i = Waveform(0.0, dt, i_dc + np.abs(i_ac)
                     * np.cos(OMEGA0 * t + np.angle(i_ac)), "A")
        return v, i

    def test_matched_loss_profile_is_periodic(self):
        v, i = self._waves()
        prof = synth_inductance(v, i, -1e-6, 1.0, 1.0)
        c = prof.capacitance.samples
        assert_allclose(c[2000:4001], c[:2001], rtol=1e-9)

    def test_zero_inductance_matches_resistance_form(self):
        # with l_eq = 0 the profile equals the resistance synthesis with
        # effective 1/r = 1/r_l - 1/r_c and the folded constant lump
        v, i = self._waves()
        r_l, r_c, c1, c2 = 1.0, 3.0, 2e-9, 1e-9
        prof = synth_inductance(v, i, 0.0, r_l, r_c, c1=c1, c2=c2)
        r_eq = 1.0 / (1.0 / r_l - 1.0 / r_c)
        ref = synth_resistance(v, r_eq, c2=c1 / r_l + c2)
        assert_allclose(prof.capacitance.samples, ref.capacitance.samples,
                        rtol=1e-12)

    def test_design_point_profile_positive(self):
        v, i = self._waves()
        prof = synth_inductance(v, i, -1e-6, 1.0, 1.0)
        assert prof.c_min > 0.0
        assert prof.c_min == pytest.approx(prof.positivity_margin, rel=1e-9)

    def test_zero_loss_rejected(self):
        v, i = self._waves(periods=1)
        with pytest.raises(ParameterError):
            synth_inductance(v, i, -1e-6, 0.0, 1.0)
        with pytest.raises(ParameterError):
            synth_inductance(v, i, -1e-6, 1.0, 0.0)

    def test_branch_current_emulates_element(self):
        # d/dt[C v] + v/r_c must equal the element current
        v, i = self._waves()
        prof = synth_inductance(v, i, -1e-6, 1.0, 1.0)
        q = Waveform(v.t0, v.dt, prof.capacitance.samples * v.samples, "C")
        branch = derivative(q).samples + v.samples / 1.0
        rms = np.sqrt(np.mean(i.samples ** 2))
        err = np.sqrt(np.mean((branch - i.samples) ** 2)) / rms
        assert err < 0.005


class TestSynthGeneral:
    def test_derivative_kernel_equals_capacitance_synthesis(self):
        v = tone()
        beta = 8e-9
        k = AdmittanceKernel(c0=-1e-9)
        a = synth_general(v, k, beta=beta).capacitance.samples
        b = synth_capacitance(v, -1e-9, c1=beta).capacitance.samples
        assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(b))

    def test_conductance_kernel_equals_resistance_synthesis(self):
        v = tone()
        beta = 5e-9
        k = AdmittanceKernel(g0=0.1)
        a = synth_general(v, k, beta=beta).capacitance.samples
        b = synth_resistance(v, 10.0, c2=beta).capacitance.samples
        assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(b))

    def test_zero_kernel_open_circuit(self):
        v = tone()
        beta = 4e-9
        prof = synth_general(v, AdmittanceKernel(), beta=beta)
        assert_allclose(prof.capacitance.samples, beta / v.samples, rtol=1e-12)

    def test_smooth_kernel_roundtrip(self):
        # profile built from a smooth kernel must reproduce the kernel's
        # own current through d/dt[C v]
        rc = 0.1 * T0
        r = 50.0
        dt = T0 / 2000
        m = int(round(5 * rc / dt)) + 1
        gamma = dt * np.arange(m)
        k = AdmittanceKernel(g0=1 / r,
                             smooth=Waveform(0.0, dt, -np.exp(-gamma / rc) / (r * rc), "S/s"))
        v = tone(periods=6)
        prof = synth_general(v, k)
        v_sub = v.sliced(int(round((prof.capacitance.t0 - v.t0) / v.dt)))
        q = Waveform(v_sub.t0, v_sub.dt,
                     prof.capacitance.samples * v_sub.samples, "C")
        i_cap = derivative(q).samples
        i_ref = convolve_first_order(k, v).samples
        rms = np.sqrt(np.mean(i_ref ** 2))
        assert np.sqrt(np.mean((i_cap - i_ref) ** 2)) / rms < 0.005


class TestSynthNonlinear:
    def test_zero_second_order_matches_general(self):
        v = tone()
        k1 = AdmittanceKernel(g0=0.05, c0=5e-10)
        k2 = VolterraKernel2(v.dt, np.zeros((3, 3)))
        beta = 2e-9
        a = synth_nonlinear(v, k1, k2, beta=beta).capacitance
        b = synth_general(v, k1, beta=beta).capacitance
        start = int(round((a.t0 - b.t0) / v.dt))
        assert np.max(np.abs(a.samples - b.samples[start:])) \
            <= 1e-12 * np.max(np.abs(a.samples))

    def test_memoryless_quadratic_ramp(self):
        # constant drive turns the quadratic current into a linear charge ramp
        dt = T0 / 2000
        v_dc = 3.0
        v = Waveform(0.0, dt, np.full(2001, v_dc), "V")
        w_gain = 1e-4
        values = np.zeros((2, 2))
        values[0, 0] = 4.0 * w_gain / dt ** 2
        k2 = VolterraKernel2(dt, values)
        beta = 1e-9
        prof = synth_nonlinear(v, AdmittanceKernel(), k2, beta=beta)
        t = prof.capacitance.times
        expect = (beta + w_gain * v_dc ** 2 * (t - t[0])) / v_dc
        assert_allclose(prof.capacitance.samples, expect, rtol=1e-9)

    def test_second_harmonic_scales_quadratically(self):
        # the 2-omega output current component must scale as v_ac^2; the
        # projection runs over whole fundamental periods so the (linear)
        # omega component cannot leak into the reading
        dt = T0 / 2000
        m = 41
        gam = np.arange(m) * dt
        g1, g2 = np.meshgrid(gam, gam, indexing="ij")
        k2 = VolterraKernel2(dt, 1e10 * np.exp(-(g1 + g2) / (10 * dt)))
        k1 = AdmittanceKernel(g0=0.01)

        def second_harmonic(i: Waveform) -> float:
            i0 = int(round((i.t0 + T0 - i.t0) / dt))
            n_win = 4 * 2000
            t = i.times[i0:i0 + n_win]
            seg = i.samples[i0:i0 + n_win]
            z = np.mean(seg * np.exp(-2j * OMEGA0 * t))
            return 2.0 * abs(z)

        amps = {}
        for frac in (0.05, 0.1, 0.2):
            v = tone(6.0, 6.0 * frac, periods=6)
            prof = synth_nonlinear(v, k1, k2)
            start = int(round((prof.capacitance.t0 - v.t0) / v.dt))
            v_sub = v.sliced(start)
            q = Waveform(v_sub.t0, dt, prof.capacitance.samples * v_sub.samples, "C")
            i_cap = Waveform(q.t0, dt, derivative(q).samples, "A")
            amps[frac] = second_harmonic(i_cap)
        assert amps[0.1] / amps[0.05] == pytest.approx(4.0, rel=0.05)
        assert amps[0.2] / amps[0.1] == pytest.approx(4.0, rel=0.05)


class TestRoundTripEmulation:
    def test_capacitance(self):
        v = tone()
        c_eq = -1e-9
        prof = synth_capacitance(v, c_eq)
        q = Waveform(v.t0, v.dt, prof.capacitance.samples * v.samples, "C")
        i_cap = derivative(q).samples
        i_ref = c_eq * -OMEGA0 * np.sin(OMEGA0 * v.times)
        rms = np.sqrt(np.mean(i_ref ** 2))
        assert np.sqrt(np.mean((i_cap - i_ref) ** 2)) / rms < 0.005

    def test_resistance(self):
        v = tone()
        r_eq = 10.0
        prof = synth_resistance(v, r_eq)
        q = Waveform(v.t0, v.dt, prof.capacitance.samples * v.samples, "C")
        i_cap = derivative(q).samples
        i_ref = v.samples / r_eq
        rms = np.sqrt(np.mean(i_ref ** 2))
        assert np.sqrt(np.mean((i_cap - i_ref) ** 2)) / rms < 0.005
