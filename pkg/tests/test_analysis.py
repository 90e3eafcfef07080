import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar
from scipy.special import erf

from superband.analysis import (AsymptoticRegimeWarning, asymptotic_shape_check,
                                central_lobe_slope, continuity_residual, critical_alpha,
                                cumulative_probability, doubling_time, find_special_momenta,
                                flux_difference, gaussian_spread, gaussian_spread_from_momentum,
                                interference_time, interference_time_from_width,
                                interval_probability, local_momentum, moments,
                                probability_current, probability_flux, state_interference_time,
                                transport_parameter, weight_ratio)
from superband.errors import NoExtremumError, NumericalHealthError
from superband.grid import make_grid, propagate
from superband.synthesis import (SynthesisParams, analytic_superband_field_with_derivative,
                                 state_spectrum)


def analytic_kl(params, x, t):
    psi, d = analytic_superband_field_with_derivative(params, np.atleast_1d(x), t)
    return np.imag(np.conj(psi) * d) / np.abs(psi) ** 2 / params.kappa0


def optimise_extremum(params, t, guess, sign):
    """Independent oracle: bounded scalar optimisation of the closed-form k_l."""
    res = minimize_scalar(lambda x: -sign * analytic_kl(params, x, t)[0],
                          bounds=(guess - 0.3, guess + 0.3), method="bounded",
                          options={"xatol": 1e-10})
    return res.x, sign * -res.fun


def gaussian_sigma(t):
    return gaussian_spread(2.0, t)


class TestLocalMomentum:
    def test_gaussian_is_affine(self, spectra):
        t = 2.0
        field = propagate(spectra[0.0], t)
        lm = local_momentum(field)
        # k_l = k0 + xi * beta / (2 |a|^2), a = 1/dk^2 + i beta, beta = t/2
        beta = 0.5 * t
        a2 = 16.0 + beta**2
        xi = field.x - 2 * math.pi * t
        exact = 2 * math.pi + xi * beta / (2 * a2)
        m = lm.valid_mask
        assert m.sum() > 1000
        assert np.max(np.abs(lm.values[m] - exact[m])) < 1e-7

    def test_floor_masks_tails(self, spectra):
        lm = local_momentum(propagate(spectra[1.0], 1.0), floor=1e-3)
        assert np.all(np.isnan(lm.values[~lm.valid_mask]))
        assert lm.valid_mask.sum() < lm.valid_mask.size // 10

    def test_gaussian_has_no_extrema(self, spectra):
        with pytest.raises(NoExtremumError):
            find_special_momenta(propagate(spectra[0.0], 1.0), SynthesisParams())


class TestSpecialMomenta:
    @pytest.mark.parametrize("alpha", [1.0, 1.8])
    @pytest.mark.parametrize("t", [1.0, 2.0, 3.0, 4.0])
    def test_against_optimiser(self, spectra, alpha, t):
        p = SynthesisParams(alpha=alpha)
        sup, sub = find_special_momenta(propagate(spectra[alpha], t), p)
        xs, ks = optimise_extremum(p, t, sup.x_at, +1)
        xb, kb = optimise_extremum(p, t, sub.x_at, -1)
        assert sup.kappa_over_kappa0 == pytest.approx(ks, abs=1e-6)
        assert sub.kappa_over_kappa0 == pytest.approx(kb, abs=1e-6)
        assert sup.x_at == pytest.approx(xs, abs=2e-3)
        assert sub.x_at == pytest.approx(xb, abs=2e-3)

    @pytest.mark.parametrize("alpha", [1.0, 1.8])
    def test_mirror_symmetry(self, spectra, alpha):
        # |phi0| symmetric about k0 => k_min = 2 k0 - k_max, x's mirrored about v t
        t = 2.0
        sup, sub = find_special_momenta(propagate(spectra[alpha], t), SynthesisParams(alpha=alpha))
        assert sup.kappa_over_kappa0 + sub.kappa_over_kappa0 == pytest.approx(2.0, abs=1e-6)
        assert sup.x_at + sub.x_at == pytest.approx(2 * 2 * math.pi * t, abs=1e-3)
        assert sup.spectrum_weight == pytest.approx(sub.spectrum_weight, rel=1e-4)

    def test_record_contents(self, spectra):
        p = SynthesisParams(alpha=1.0)
        sup, _ = find_special_momenta(propagate(spectra[1.0], 4.0), p)
        assert sup.kind == "super" and sup.t == 4.0
        assert sup.log10_spectrum_weight == pytest.approx(math.log10(sup.spectrum_weight))
        assert weight_ratio(sup) == pytest.approx(
            math.sqrt(sup.spectrum_weight / sup.density_at), rel=1e-12)
        psi, _ = analytic_superband_field_with_derivative(p, [sup.x_at], 4.0)
        assert sup.density_at == pytest.approx(abs(psi[0]) ** 2, rel=1e-9)

    def test_ordering_reverses_with_alpha(self, spectra):
        for t in (1.0, 2.0, 3.0, 4.0):
            s1, b1 = find_special_momenta(propagate(spectra[1.0], t), SynthesisParams(alpha=1.0))
            s2, b2 = find_special_momenta(propagate(spectra[1.8], t), SynthesisParams(alpha=1.8))
            assert b1.x_at < s1.x_at
            assert s2.x_at < b2.x_at


class TestCurrentAndFlux:
    def test_current_equals_density_times_velocity(self, spectra):
        field = propagate(spectra[1.0], 2.0)
        lm = local_momentum(field)
        j = probability_current(field)
        m = lm.valid_mask
        assert np.allclose(j[m], field.density[m] * lm.values[m], rtol=1e-9, atol=1e-14)

    def test_continuity_residual_and_order(self, spectra):
        s0 = spectra[1.0]
        assert continuity_residual(s0, 3.0) < 1e-5
        r1 = continuity_residual(s0, 3.0, 1e-2)
        r2 = continuity_residual(s0, 3.0, 5e-3)
        assert r1 / r2 == pytest.approx(4.0, rel=0.05)

    def test_cumulative_gaussian_oracle(self, spectra):
        t, xp = 2.0, 14.0
        field = propagate(spectra[0.0], t)
        exact = 0.5 * (1 + erf((xp - 2 * math.pi * t) / (math.sqrt(2) * gaussian_sigma(t))))
        assert cumulative_probability(field, xp) == pytest.approx(exact, abs=1e-11)

    def test_gaussian_flux_oracle(self, spectra):
        xp, ti, tf = 20.0, 2.8, 3.2

        def left(t):
            return 0.5 * (1 + erf((xp - 2 * math.pi * t) / (math.sqrt(2) * gaussian_sigma(t))))

        rep = probability_flux(spectra[0.0], xp, ti, tf)
        assert rep.flux_by_current == pytest.approx(left(ti) - left(tf), abs=1e-9)
        assert rep.discrepancy < 1e-9

    @pytest.mark.parametrize("alpha", [1.0, 1.8])
    def test_flux_difference_identity(self, spectra, alpha):
        fd = flux_difference(spectra[alpha], 15.0, 22.0, 2.8, 3.2)
        assert fd.delta == pytest.approx(fd.p_final - fd.p_initial, abs=1e-8)
        assert fd.verdict == ("localizing" if fd.delta > 0 else "delocalizing")

    def test_flux_edge_cases(self, spectra):
        assert probability_flux(spectra[1.0], 10.0, 2.0, 2.0).flux_by_current == 0.0
        with pytest.raises(ValueError):
            probability_flux(spectra[1.0], 10.0, 3.0, 2.0)
        with pytest.raises(ValueError):
            probability_flux(spectra[1.0], 10.0, 2.0, 3.0, n_quad=63)
        with pytest.raises(ValueError):
            flux_difference(spectra[1.0], 5.0, 4.0, 2.0, 3.0)

    def test_health_check_detects_aliasing(self):
        # a grid too short for the packet: wrap-around breaks the cumulative route
        g = make_grid(-16, 16, 2**10)
        s0 = state_spectrum(SynthesisParams(alpha=1.0), g)
        with pytest.raises(NumericalHealthError):
            probability_flux(s0, 10.0, 1.0, 4.0)

    def test_interval_probability(self, spectra):
        field = propagate(spectra[0.0], 0.0)
        assert interval_probability(field, -100, 100) == pytest.approx(1.0, abs=1e-12)
        assert interval_probability(field, 1.0, 1.0) == 0.0


class TestMomentsAndTimes:
    def test_moments(self, spectra):
        mean, std = moments(spectra[0.0])
        assert mean == pytest.approx(2 * math.pi, abs=1e-12)
        assert std == pytest.approx(0.25, abs=1e-12)
        mean_x, std_x = moments(propagate(spectra[0.0], 1.0))
        assert mean_x == pytest.approx(2 * math.pi, abs=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.1, 10), st.floats(0, 100), st.floats(0.1, 10))
    def test_spread_forms_agree(self, dx0, t, m):
        dp = 0.5 / dx0
        assert gaussian_spread_from_momentum(dx0, dp, t, m) == pytest.approx(
            gaussian_spread(dx0, t, m), rel=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.1, 10), st.floats(0.1, 10))
    def test_doubling_time(self, dx0, m):
        assert gaussian_spread(dx0, doubling_time(dx0, m), m) ** 2 == pytest.approx(
            2 * dx0**2, rel=1e-12)

    def test_interference_times(self):
        assert interference_time(1.0, 2.0, 3.0) == 1.5
        assert interference_time_from_width(2.0, 1.0, 1.0) == 4.0
        assert transport_parameter(2.0, interference_time_from_width(2.0)) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            interference_time(0.0, 1.0)
        with pytest.raises(ValueError):
            gaussian_spread(0.0, 1.0)

    def test_state_interference_time(self, spectra):
        assert state_interference_time(spectra[0.0]) == pytest.approx(4.0, rel=1e-9)
        assert state_interference_time(spectra[1.0]) < state_interference_time(spectra[0.0])


class TestShapeAndCriticalAlpha:
    def test_gaussian_reaches_spectrum_shape(self, spectra):
        res = asymptotic_shape_check(spectra[0.0], 50.0)
        assert res.correlation > 0.999
        assert res.asymptotic

    def test_early_time_warns(self, spectra):
        with pytest.warns(AsymptoticRegimeWarning):
            res = asymptotic_shape_check(spectra[1.0], 1.0)
        assert not res.asymptotic
        assert res.correlation < 0.9

    def test_correlation_improves_with_time(self, spectra):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AsymptoticRegimeWarning)
            c = [asymptotic_shape_check(spectra[1.0], t).correlation for t in (5.0, 20.0, 50.0)]
        assert c[0] < c[1] < c[2]

    def test_slope_sign(self, spectra):
        s1 = central_lobe_slope(propagate(spectra[1.0], 1.0), SynthesisParams(alpha=1.0))
        s2 = central_lobe_slope(propagate(spectra[1.8], 1.0), SynthesisParams(alpha=1.8))
        assert s1 > 0 > s2

    def test_critical_alpha(self, grid):
        res = critical_alpha(SynthesisParams(), grid)
        assert 1.0 < res.alpha_c < 1.8
        assert res.slopes[0] * res.slopes[1] < 0
        assert res.bracket == (1.0, 2.0)

    def test_critical_alpha_needs_sign_change(self, grid):
        with pytest.raises(NoExtremumError):
            critical_alpha(SynthesisParams(), grid, bracket=(1.0, 1.2))
