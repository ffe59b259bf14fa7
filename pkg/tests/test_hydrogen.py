"""Coulomb states: exact bound-state algebra and continuum calibration."""

import math
from fractions import Fraction as F

import pytest
from scipy.integrate import simpson

from dipolesum import exactalg as xa
from dipolesum.errors import (
    ChannelMismatch,
    DivergentAtOrigin,
    GridTooShort,
    InvalidQuantumNumbers,
    NonPositiveQ,
)
from dipolesum.hydrogen import (
    WaveSpec,
    bound_bound_z2,
    bound_bound_z2_overlap,
    bound_free_z2,
    bound_free_z2_reduced,
    bound_state,
    channel,
    continuum_wave,
    continuum_z2_1s,
    envelope_amplitude,
    expectation_rho_power,
    reference_expectation,
    z2_1s_to_np,
)
from dipolesum.potentials import COULOMB

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class TestChannel:
    def test_weights(self):
        assert channel("plus", 0).weight == F(1, 3)
        assert channel("plus", 1).weight == F(4, 15)
        assert channel("minus", 1).weight == F(1, 3)

    def test_minus_forbidden_at_l0(self):
        with pytest.raises(InvalidQuantumNumbers):
            channel("minus", 0)


class TestBoundState:
    def test_ground(self):
        s = bound_state(1, 0)
        assert xa.normed_equal(s.radial, s.norm2, xa.polyexp({1: 2}, 1), F(1))

    def test_first_excited_s(self):
        s = bound_state(2, 0)
        assert xa.normed_equal(s.radial, s.norm2,
                               xa.polyexp({2: 1, 1: -2}, F(1, 2)), F(1, 8))

    def test_first_excited_p(self):
        s = bound_state(2, 1)
        assert xa.normed_equal(s.radial, s.norm2,
                               xa.polyexp({2: 1}, F(1, 2)), F(1, 24))

    def test_invalid_quantum_numbers(self):
        with pytest.raises(InvalidQuantumNumbers):
            bound_state(2, 2)

    @pytest.mark.parametrize("n", [1, 5, 12, 21, 30])
    def test_eigen_and_norm_to_n30(self, n):
        for l in range(n):
            s = bound_state(n, l)
            assert xa.apply_h(s.radial, l, s.ksq, COULOMB).is_zero()
            assert xa.overlap(s.radial, s.radial) * s.norm2 == 1
            assert s.radial.min_exponent() == l + 1


class TestBoundBound:
    def test_resonance_line(self):
        assert bound_bound_z2(bound_state(1, 0), 2, channel("plus", 0)) == F(2**15, 3**10)

    def test_degenerate_pair(self):
        # beta^2 <R20|rho R21>^2 = (1/3) * 27
        assert bound_bound_z2(bound_state(2, 1), 2, channel("minus", 1)) == 9
        s20, s21 = bound_state(2, 0), bound_state(2, 1)
        ov2 = (xa.overlap(s20.radial, xa.shift(s21.radial, 1)) ** 2
               * s20.norm2 * s21.norm2)
        assert ov2 == 27

    def test_closed_form_agrees_with_overlap_route_to_n200(self):
        s1 = bound_state(1, 0)
        ch = channel("plus", 0)
        for n in range(2, 201):
            assert bound_bound_z2(s1, n, ch) == z2_1s_to_np(n)

    @pytest.mark.parametrize("n,l,direction", [(2, 0, "plus"), (2, 1, "plus"), (2, 1, "minus")])
    def test_fast_equals_direct_overlap(self, n, l, direction):
        st = bound_state(n, l)
        ch = channel(direction, l)
        for to_n in list(range(ch.target_l + 1, 12)) + [25, 40]:
            assert bound_bound_z2(st, to_n, ch) == bound_bound_z2_overlap(st, to_n, ch)

    def test_missing_target(self):
        with pytest.raises(InvalidQuantumNumbers):
            bound_bound_z2(bound_state(2, 1), 2, channel("plus", 1))


class TestContinuumClosedForm:
    def test_small_q_linear(self):
        q = 1e-4
        assert continuum_z2_1s(q) == pytest.approx((256.0 / 3.0) * q * math.exp(-4.0), rel=1e-3)

    def test_q_one(self):
        want = (8.0 / 3.0) * math.exp(-math.pi) / (1.0 - math.exp(-2 * math.pi))
        assert continuum_z2_1s(1.0) == pytest.approx(want, rel=1e-12)
        assert continuum_z2_1s(1.0) == pytest.approx(0.1154527, abs=1e-6)

    def test_large_q_tail(self):
        assert continuum_z2_1s(1e6) < 1e-25

    def test_nonpositive_q(self):
        with pytest.raises(NonPositiveQ):
            continuum_z2_1s(0.0)


class TestContinuumWaves:
    @pytest.mark.parametrize("q", [0.1, 0.5, 1.0, 2.0, 5.0, 10.0])
    def test_calibration_against_closed_form(self, q):
        wave = continuum_wave(1, q)
        got = bound_free_z2(bound_state(1, 0), wave)
        assert got == pytest.approx(continuum_z2_1s(q), rel=1e-6)

    def test_orthogonal_to_bound_state(self):
        wave = continuum_wave(1, 0.7, WaveSpec(rho_max=60.0))
        ip = simpson(bound_state(2, 1).values(wave.grid) * wave.values, dx=wave.h)
        assert abs(ip) < 1e-8

    def test_envelope_amplitude(self):
        amp = envelope_amplitude(continuum_wave(0, 2.0))
        assert amp == pytest.approx(SQRT_2_OVER_PI, rel=1e-3)

    def test_envelope_needs_asymptotic_window(self):
        with pytest.raises(GridTooShort):
            envelope_amplitude(continuum_wave(0, 0.05, WaveSpec(rho_max=50.0)))

    def test_channel_mismatch(self):
        with pytest.raises(ChannelMismatch):
            bound_free_z2(bound_state(1, 0), continuum_wave(0, 1.0, WaveSpec(rho_max=40.0)))

    def test_reduced_route_matches_direct(self):
        spec = WaveSpec(rho_max=90.0)
        for st, lp, q in [(bound_state(2, 0), 1, 2.0), (bound_state(2, 1), 0, 3.0),
                          (bound_state(2, 1), 2, 1.5)]:
            wave = continuum_wave(lp, q, spec)
            a = bound_free_z2(st, wave)
            b = bound_free_z2_reduced(st, wave)
            assert b == pytest.approx(a, rel=2e-5)


class TestExpectations:
    def test_listed_values(self):
        assert expectation_rho_power(bound_state(2, 1), -3) == F(1, 24)
        assert expectation_rho_power(bound_state(3, 2), -4) == F(2, 3645)
        assert expectation_rho_power(bound_state(5, 3), 0) == 1

    def test_against_reference_forms(self):
        for n in range(1, 7):
            for l in range(n):
                st = bound_state(n, l)
                for p in (2, 1, -1, -2):
                    assert expectation_rho_power(st, p) == reference_expectation(n, l, p)
                if l >= 1:
                    for p in (-3, -4):
                        assert expectation_rho_power(st, p) == reference_expectation(n, l, p)

    def test_divergent(self):
        with pytest.raises(DivergentAtOrigin):
            expectation_rho_power(bound_state(1, 0), -3)
