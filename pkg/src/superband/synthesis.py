"""Superbandwidth, Gaussian and chirped-Gaussian state families.

The superbandwidth state is the difference of two Gaussians centred at the
same wavenumber ``k0``, the second one half as wide::

    phi0(k) = (exp(-u**2) - alpha * exp(-4 u**2)) / N,   u = (k - k0) / dk

Every member of these families is a finite sum of Gaussians in ``k``, so its
free evolution has a closed form (see :func:`analytic_superband_field`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ParameterError
from .grid import MomentumSpectrum, SimGrid, WaveField

NORMALIZATIONS = ("exact", "published")


@dataclass(frozen=True)
class SynthesisParams:
    """Parameters of one state.

    ``gamma`` switches to the chirped Gaussian family (``alpha`` is then
    ignored). ``normalization="published"`` reproduces the published closed form
    for ``N``, whose quadratic term is ``alpha**2 / 2``; it is not unit-norm
    for ``alpha > 0`` and exists only to compare absolute densities with
    published tables.
    """

    kappa0: float = 2.0 * math.pi
    delta_kappa: float = 0.5
    alpha: float = 0.0
    mass: float = 1.0
    hbar: float = 1.0
    gamma: float | None = None
    normalization: str = "exact"

    def __post_init__(self):
        if not self.delta_kappa > 0:
            raise ParameterError(f"delta_kappa must be positive, got {self.delta_kappa}")
        if not self.alpha >= 0:
            raise ParameterError(f"alpha must be non-negative, got {self.alpha}")
        if not (self.mass > 0 and self.hbar > 0):
            raise ParameterError("mass and hbar must be positive")
        if self.gamma is not None and not self.gamma >= 0:
            raise ParameterError(f"gamma must be non-negative, got {self.gamma}")
        if self.normalization not in NORMALIZATIONS:
            raise ParameterError(f"normalization must be one of {NORMALIZATIONS}")

    @property
    def chirped(self) -> bool:
        return self.gamma is not None

    @property
    def group_velocity(self) -> float:
        return self.hbar * self.kappa0 / self.mass

    @property
    def time_shift(self) -> float:
        return self.gamma if self.gamma is not None else 0.0


def normalization_radicand(alpha: float, normalization: str = "exact") -> float:
    """Bracketed factor of ``N**2 / (sqrt(pi)/2 * dk)``."""
    quad = alpha * alpha / (math.sqrt(2.0) if normalization == "exact" else 2.0)
    return math.sqrt(2.0) - 4.0 * alpha / math.sqrt(5.0) + quad


def normalization_constant(params: SynthesisParams) -> float:
    alpha = 0.0 if params.chirped else params.alpha
    rad = normalization_radicand(alpha, params.normalization)
    if params.normalization == "exact":
        if rad <= 0.0:
            raise ParameterError(f"normalization radicand {rad:.3g} <= 0")
    else:
        # published form: negative radicands were used through their magnitude
        if rad == 0.0 or abs(rad) < 1e-14:
            raise ParameterError(f"normalization radicand vanishes at alpha={alpha}")
        rad = abs(rad)
    return (math.pi / 4.0) ** 0.25 * math.sqrt(params.delta_kappa * rad)


def gaussian_terms(params: SynthesisParams) -> tuple[np.ndarray, np.ndarray]:
    """Amplitudes and widths of the Gaussians making up ``phi0``."""
    inv_n = 1.0 / normalization_constant(params)
    dk = params.delta_kappa
    if params.chirped or params.alpha == 0.0:
        return np.array([inv_n]), np.array([dk])
    return np.array([inv_n, -params.alpha * inv_n]), np.array([dk, 0.5 * dk])


def _spectrum_values(params: SynthesisParams, kappa: np.ndarray) -> np.ndarray:
    amps, widths = gaussian_terms(params)
    out = np.zeros_like(kappa, dtype=np.float64)
    for a, w in zip(amps, widths):
        out += a * np.exp(-(((kappa - params.kappa0) / w) ** 2))
    return out


def momentum_distribution(params: SynthesisParams, grid: SimGrid) -> MomentumSpectrum:
    """Real spectrum ``phi0`` sampled on ``grid.kappa`` (chirp ignored)."""
    if params.chirped:
        params = SynthesisParams(params.kappa0, params.delta_kappa, params.alpha,
                                 params.mass, params.hbar, None, params.normalization)
    phi = _spectrum_values(params, grid.kappa).astype(np.complex128)
    return MomentumSpectrum(grid, phi, 0.0, params.mass, params.hbar)


def chirped_gaussian_spectrum(params: SynthesisParams, grid: SimGrid) -> MomentumSpectrum:
    """Gaussian spectrum carrying the quadratic phase ``exp(i hbar k^2 gamma / 2m)``."""
    gamma = params.time_shift
    if not params.chirped:
        params = SynthesisParams(params.kappa0, params.delta_kappa, 0.0, params.mass,
                                 params.hbar, 0.0, params.normalization)
    k = grid.kappa
    phi = _spectrum_values(params, k) * np.exp(1j * params.hbar * k * k * gamma / (2.0 * params.mass))
    return MomentumSpectrum(grid, phi, 0.0, params.mass, params.hbar)


def state_spectrum(params: SynthesisParams, grid: SimGrid) -> MomentumSpectrum:
    """``t = 0`` spectrum of whichever family ``params`` selects."""
    if params.chirped:
        return chirped_gaussian_spectrum(params, grid)
    return momentum_distribution(params, grid)


def log_spectrum_density(params: SynthesisParams, kappa) -> np.ndarray:
    """Natural log of ``|phi0(kappa)|**2`` without forming ``phi0`` itself.

    Stays finite far into the tails where ``|phi0|**2`` is ~1e-120.
    """
    kappa = np.asarray(kappa, dtype=np.float64)
    u = (kappa - params.kappa0) / params.delta_kappa
    alpha = 0.0 if params.chirped else params.alpha
    with np.errstate(divide="ignore"):
        inner = np.log(np.abs(1.0 - alpha * np.exp(-3.0 * u * u)))
    return -2.0 * u * u + 2.0 * inner - 2.0 * math.log(normalization_constant(params))


def _field(params: SynthesisParams, x, t):
    amps, widths = gaussian_terms(params)
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))
    return kernels.superband_field(x, float(t) - params.time_shift, params.kappa0,
                                   params.hbar, params.mass, amps, widths)


def analytic_superband_field(params: SynthesisParams, x, t: float) -> np.ndarray:
    """Closed-form ``psi(x, t)`` at arbitrary points (no grid involved)."""
    return _field(params, x, t)[0]


def analytic_superband_field_with_derivative(params: SynthesisParams, x, t: float):
    """``(psi, dpsi/dx)`` from the closed form."""
    return _field(params, x, t)


def initial_wavefunction(params: SynthesisParams, grid: SimGrid) -> WaveField:
    """Closed-form position representation at ``t = 0`` on the grid."""
    psi = analytic_superband_field(params, grid.x, 0.0)
    return WaveField(grid, psi, 0.0, params.mass, params.hbar)


def gaussian_width(params: SynthesisParams) -> float:
    """Position standard deviation of the unchirped Gaussian, ``1/dk``."""
    return 1.0 / params.delta_kappa


def analytic_gaussian_density(params: SynthesisParams, x, t: float) -> np.ndarray:
    """Textbook spreading-Gaussian density for the ``alpha = 0`` member.

    Written with the 1/e half-width ``w = sqrt(2) * dx`` where ``dx = 1/dk``
    is the standard deviation, which is what makes it coincide with the
    propagated spectrum ``exp(-((k - k0)/dk)**2)``::

        rho = exp(-(x - v t)**2 / W**2) / (sqrt(pi) W),  W**2 = w**2 + (hbar t / (m w))**2
    """
    x = np.asarray(x, dtype=np.float64)
    t_eff = t - params.time_shift
    w2 = 2.0 * gaussian_width(params) ** 2
    width2 = w2 + (params.hbar * t_eff / params.mass) ** 2 / w2
    centre = params.group_velocity * t_eff
    return np.exp(-((x - centre) ** 2) / width2) / math.sqrt(math.pi * width2)
