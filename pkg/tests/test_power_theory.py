"""Closed-form power and efficiency formulas against oracles and limits."""

import math

import numpy as np
import pytest

from hdwn import (
    CovarianceSpec,
    H1Spec,
    MixtureNormal,
    Normal,
    PowerInput,
    StudentT,
    UndefinedMomentError,
    are_ss_flm,
    chi_radial_c1,
    derive_rng,
    gen_h1_model,
    power_flm,
    power_ss,
    radial_moments,
    ss_test,
)

from oracles import erfc_upper_quantile, erfc_upper_tail


class TestPowerFunctions:
    def test_no_signal_gives_alpha(self):
        pin = PowerInput(n=100, tr_s0s1=0.0, tr_s0sq=10.0, alpha=0.05)
        assert abs(power_ss(pin) - 0.05) <= 1e-12
        assert abs(power_flm(pin) - 0.05) <= 1e-12

    def test_quantile_identity_case(self):
        # shift equal to 2 z_alpha pushes the power to 1 - alpha exactly
        z = erfc_upper_quantile(0.05)
        pin = PowerInput(n=1, tr_s0s1=math.sqrt(2.0) * 2.0 * z, tr_s0sq=1.0, alpha=0.05)
        assert abs(power_ss(pin) - 0.95) <= 1e-9

    def test_shift_two_case(self):
        # c1^2 n tr_s0s1 / tr_s0sq = 2, so beta = Phi(-z + 2/sqrt(2))
        pin = PowerInput(n=1, tr_s0s1=2.0, tr_s0sq=1.0, alpha=0.05)
        expected = 1.0 - erfc_upper_tail(-erfc_upper_quantile(0.05) + math.sqrt(2.0))
        assert abs(power_ss(pin) - expected) <= 1e-9
        assert abs(power_ss(pin) - 0.4087972197938703) <= 1e-9

    def test_flm_equals_ss_in_gaussian_case(self):
        pin = PowerInput(n=50, tr_s0s1=3.0, tr_s0sq=40.0, c1=1.0, moment_ratio=1.0)
        assert power_flm(pin) == power_ss(pin)

    def test_monotone_in_signal(self):
        values = [
            power_ss(PowerInput(n=100, tr_s0s1=s, tr_s0sq=50.0))
            for s in np.linspace(0.0, 2.0, 15)
        ]
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert all(0.0 < v < 1.0 for v in values)


class TestAre:
    def test_normal_is_one(self):
        assert are_ss_flm(Normal()) == 1.0

    def test_t3_closed_form(self):
        value = are_ss_flm(StudentT(3.0))
        assert abs(value - 8.0 / math.pi) <= 1e-12
        assert abs(value - 2.54) <= 0.01

    def test_t4_closed_form(self):
        value = are_ss_flm(StudentT(4.0))
        assert abs(value - 0.5625 * math.pi) <= 1e-12
        assert abs(value - 1.76) <= 0.01

    def test_t_limit_to_one(self):
        assert abs(are_ss_flm(StudentT(1000.0)) - 1.0) < 0.01

    def test_undefined_below_two_dof(self):
        with pytest.raises(UndefinedMomentError):
            StudentT(2.0)
        with pytest.raises(UndefinedMomentError):
            StudentT(1.5)

    def test_at_least_one_on_grid(self):
        for v in np.linspace(2.1, 50.0, 40):
            assert are_ss_flm(StudentT(float(v))) >= 1.0
        for w in np.linspace(0.05, 0.95, 10):
            for s in (0.2, 0.5, 2.0, 3.0, 9.0):
                assert are_ss_flm(MixtureNormal(float(w), s)) >= 1.0

    def test_mixture_printed_form(self):
        v, s = 0.2, 3.0
        spread = v * (1 - v)
        expected = (1 + spread * (s - 1 / s) ** 2) / (1 + spread * (1 - 1 / s) ** 2)
        assert are_ss_flm(MixtureNormal(v, s)) == pytest.approx(expected, rel=1e-15)

    def test_consistency_with_radial_moments_student_t(self):
        # the closed form is the p -> infinity limit of E^2(1/r) E(r^2)
        for v in (3.0, 4.0, 7.5):
            m = radial_moments(StudentT(v), 10_000)
            finite_p = m.e_r_inv**2 * m.e_r2
            assert abs(finite_p - are_ss_flm(StudentT(v))) / are_ss_flm(StudentT(v)) < 1e-3


class TestRadialMoments:
    def test_normal_c1_tends_to_one(self):
        assert abs(radial_moments(Normal(), 1_000_000).c1 - 1.0) < 1e-5

    def test_normal_second_moment(self):
        assert radial_moments(Normal(), 64).e_r2 == 64.0

    def test_student_t_second_moment(self):
        assert radial_moments(StudentT(3.0), 100).e_r2 == pytest.approx(300.0, rel=1e-12)

    def test_mixture_second_moment(self):
        m = radial_moments(MixtureNormal(0.2, 3.0), 100)
        assert m.e_r2 == pytest.approx(260.0, rel=1e-12)

    def test_mixture_c1_from_scale_moments(self):
        v, s, p = 0.25, 2.0, 50
        m = radial_moments(MixtureNormal(v, s), p)
        exact = ((1 - v) + v * s) * ((1 - v) + v / s) * chi_radial_c1(p)
        assert m.c1 == pytest.approx(exact, rel=1e-14)

    def test_chi_radial_c1_monte_carlo(self):
        rng = np.random.default_rng(3)
        r = np.linalg.norm(rng.standard_normal((200_000, 8)), axis=1)
        mc = r.mean() * (1.0 / r).mean()
        assert abs(chi_radial_c1(8) - mc) < 0.002


class TestMonteCarloCrossCheck:
    def test_simulated_power_matches_formula(self):
        # constant radial, identity mixing: closed form at the n = p regime
        n = p = 200
        spec = H1Spec(sigma0=CovarianceSpec("identity", p), radial="constant")
        reps = 300
        rej = 0
        meta = None
        for r in range(reps):
            series, meta = gen_h1_model(spec, n, p, derive_rng(0, "pow", r))
            rej += ss_test(series, 1, 0.05).reject
        rate = rej / reps
        predicted = power_ss(
            PowerInput(n=n, tr_s0s1=meta.tr_s0s1, tr_s0sq=meta.tr_s0sq, c1=meta.c1)
        )
        se = math.sqrt(predicted * (1.0 - predicted) / reps)
        assert abs(rate - predicted) <= 3.0 * se
