import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from superband.analysis import gaussian_spread, moments
from superband.errors import ParameterError
from superband.grid import propagate
from superband.synthesis import (SynthesisParams, analytic_gaussian_density,
                                 analytic_superband_field,
                                 analytic_superband_field_with_derivative,
                                 chirped_gaussian_spectrum, gaussian_terms, gaussian_width,
                                 initial_wavefunction, log_spectrum_density,
                                 momentum_distribution, normalization_constant,
                                 normalization_radicand, state_spectrum)


def quad_norm(params):
    """Independent oracle: adaptive quadrature of |phi0|^2 over wavenumber."""
    k0, dk, a = params.kappa0, params.delta_kappa, params.alpha
    n = normalization_constant(params)

    def integrand(k):
        u = (k - k0) / dk
        return ((math.exp(-u * u) - a * math.exp(-4 * u * u)) / n) ** 2

    return quad(integrand, k0 - 12 * dk, k0 + 12 * dk, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


class TestParams:
    def test_defaults(self):
        p = SynthesisParams()
        assert p.kappa0 == 2 * math.pi and p.delta_kappa == 0.5
        assert p.mass == p.hbar == 1.0
        assert not p.chirped and p.time_shift == 0.0
        assert p.group_velocity == 2 * math.pi

    @pytest.mark.parametrize("kwargs", [
        {"delta_kappa": 0.0}, {"delta_kappa": -1.0}, {"alpha": -0.1}, {"mass": 0.0},
        {"hbar": -1.0}, {"gamma": -1.0}, {"normalization": "other"},
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ParameterError):
            SynthesisParams(**kwargs)

    def test_gaussian_terms(self):
        amps, widths = gaussian_terms(SynthesisParams(alpha=1.0))
        assert amps[1] == pytest.approx(-amps[0])
        assert widths.tolist() == [0.5, 0.25]
        assert len(gaussian_terms(SynthesisParams(alpha=0.0))[0]) == 1
        assert len(gaussian_terms(SynthesisParams(alpha=1.0, gamma=2.0))[0]) == 1


class TestNormalization:
    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.8])
    def test_quadrature_oracle(self, alpha):
        assert quad_norm(SynthesisParams(alpha=alpha)) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.8])
    def test_grid_norm(self, spectra, alpha):
        assert abs(spectra[alpha].norm() - 1.0) < 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.0, 3.0), st.floats(0.1, 2.0))
    def test_quadrature_oracle_random(self, alpha, dk):
        assert quad_norm(SynthesisParams(alpha=alpha, delta_kappa=dk)) == pytest.approx(1.0, abs=1e-10)

    def test_exact_radicand_always_positive(self):
        alphas = np.linspace(0, 5, 501)
        assert min(normalization_radicand(a) for a in alphas) > 0.28

    def test_published_radicand_goes_negative(self):
        # the closed form with alpha^2/2 turns negative between ~1.2 and ~2.3
        assert normalization_radicand(1.8, "published") < 0
        assert normalization_radicand(1.0, "published") > 0

    def test_published_mode_uses_magnitude(self):
        p = SynthesisParams(alpha=1.8, normalization="published")
        rad = abs(normalization_radicand(1.8, "published"))
        assert normalization_constant(p) == pytest.approx(
            (math.pi / 4) ** 0.25 * math.sqrt(0.5 * rad))
        # not unit norm
        assert abs(quad_norm(p) - 1.0) > 0.1

    def test_published_mode_equal_for_gaussian(self):
        assert normalization_constant(SynthesisParams(normalization="published")) == \
            normalization_constant(SynthesisParams())


class TestSpectra:
    def test_momentum_distribution_values(self, grid):
        p = SynthesisParams(alpha=1.0)
        phi = momentum_distribution(p, grid)
        i = np.argmin(np.abs(grid.kappa - p.kappa0))
        u = (grid.kappa[i] - p.kappa0) / p.delta_kappa
        n = normalization_constant(p)
        assert phi.amplitudes[i].real == pytest.approx((math.exp(-u * u) - math.exp(-4 * u * u)) / n)
        assert np.all(phi.amplitudes.imag == 0)

    def test_chirp_phase(self, grid):
        p = SynthesisParams(gamma=2.0)
        spec = chirped_gaussian_spectrum(p, grid)
        plain = momentum_distribution(SynthesisParams(), grid)
        assert np.allclose(np.abs(spec.amplitudes), np.abs(plain.amplitudes))
        i = np.argmax(np.abs(plain.amplitudes))
        k = grid.kappa[i]
        assert np.angle(spec.amplitudes[i] / plain.amplitudes[i]) == pytest.approx(
            math.remainder(k * k, 2 * math.pi), abs=1e-9)

    def test_state_spectrum_dispatch(self, grid):
        assert state_spectrum(SynthesisParams(gamma=1.0), grid).amplitudes.dtype.kind == "c"

    def test_log_spectrum_density(self):
        p = SynthesisParams(alpha=1.0)
        k = np.array([p.kappa0 + 0.3, p.kappa0 - 0.7, p.kappa0 + 1.1])
        u = (k - p.kappa0) / p.delta_kappa
        direct = ((np.exp(-u**2) - np.exp(-4 * u**2)) / normalization_constant(p)) ** 2
        assert np.allclose(log_spectrum_density(p, k), np.log(direct), rtol=1e-13)

    def test_log_spectrum_density_deep_tail(self):
        p = SynthesisParams(alpha=1.0)
        # |phi0|^2 ~ 1e-123 near 1.95 k0: finite in log space
        val = log_spectrum_density(p, 1.95 * p.kappa0) / math.log(10)
        assert -130 < val < -110
        assert log_spectrum_density(p, p.kappa0) == -np.inf


class TestAnalyticField:
    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.8])
    @pytest.mark.parametrize("t", [0.0, 1.0, 3.0, 50.0, -50.0])
    def test_matches_propagate(self, spectra, alpha, t):
        field = propagate(spectra[alpha], t)
        psi = analytic_superband_field(SynthesisParams(alpha=alpha), field.x, t)
        assert np.max(np.abs(psi - field.amplitudes)) < 1e-9

    def test_chirped_matches_propagate(self, grid):
        p = SynthesisParams(gamma=3.0)
        field = propagate(state_spectrum(p, grid), 1.0)
        assert np.max(np.abs(analytic_superband_field(p, grid.x, 1.0) - field.amplitudes)) < 1e-9

    def test_derivative_by_finite_difference(self):
        p = SynthesisParams(alpha=1.0)
        x = np.linspace(0, 12, 7)
        h = 1e-5
        _, d = analytic_superband_field_with_derivative(p, x, 1.5)
        fd = (analytic_superband_field(p, x + h, 1.5) - analytic_superband_field(p, x - h, 1.5)) / (2 * h)
        assert np.allclose(d, fd, rtol=1e-7, atol=1e-10)

    def test_initial_wavefunction_is_real_difference(self, grid):
        psi0 = initial_wavefunction(SynthesisParams(alpha=1.0), grid)
        env = psi0.amplitudes * np.exp(-1j * 2 * math.pi * grid.x)
        assert np.max(np.abs(env.imag)) < 1e-14


class TestGaussianOracles:
    @pytest.mark.parametrize("t", [0.0, 1.0, 3.0])
    def test_density_formula(self, spectra, t):
        p = SynthesisParams()
        field = propagate(spectra[0.0], t)
        assert np.max(np.abs(field.density - analytic_gaussian_density(p, field.x, t))) < 1e-8

    @pytest.mark.parametrize("t", [0.0, 1.0, 3.0, 10.0])
    def test_spread_law(self, spectra, t):
        _, dx = moments(propagate(spectra[0.0], t))
        assert dx == pytest.approx(gaussian_spread(gaussian_width(SynthesisParams()), t), abs=1e-8)

    @pytest.mark.parametrize("gamma", [1.0, 3.0])
    def test_chirped_minimum_uncertainty_at_gamma(self, grid, gamma):
        p = SynthesisParams(gamma=gamma)
        spec = state_spectrum(p, grid)
        _, dx = moments(propagate(spec, gamma))
        _, dk = moments(spec)
        assert abs(dx * dk * p.hbar - 0.5) < 1e-6
        _, dx0 = moments(propagate(spec, 0.0))
        assert dx0 * dk > 0.5 + 1e-3
