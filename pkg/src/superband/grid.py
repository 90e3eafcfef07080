"""Spatial/wavenumber grids, the Fourier convention and the free propagator.

Convention (unitary, angular wavenumber)::

    psi(x)   = (2 pi)^(-1/2) * integral phi(k) exp(+i k x) dk
    phi(k)   = (2 pi)^(-1/2) * integral psi(x) exp(-i k x) dx

With this choice the Gaussian ``exp(-((k - k0)/dk)**2)`` maps onto
``(dk / sqrt(2)) exp(i k0 x) exp(-(dk x / 2)**2)``.

Spectra are stored on ascending wavenumbers (``SimGrid.kappa``); the FFT
ordering is an internal detail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import GridError

SQRT_2PI = math.sqrt(2.0 * math.pi)
#: required ratio between the grid Nyquist wavenumber and k0 + 4 dk
HEADROOM = 8.0
#: relative amplitude below which spectral components are dropped from direct sums
SUPPORT_CUTOFF = 1e-14


@dataclass(frozen=True)
class SimGrid:
    """Uniform periodic grid on ``[x_min, x_max)`` with ``n_points`` samples."""

    x_min: float
    x_max: float
    n_points: int

    @cached_property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @cached_property
    def dkappa(self) -> float:
        return 2.0 * math.pi / (self.n_points * self.dx)

    @cached_property
    def kappa(self) -> np.ndarray:
        """Ascending conjugate wavenumbers."""
        return 2.0 * math.pi * np.fft.fftshift(np.fft.fftfreq(self.n_points, self.dx))

    @cached_property
    def kappa_fft(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n_points, self.dx)

    @cached_property
    def _shift_phase(self) -> np.ndarray:
        return np.exp(1j * self.kappa * self.x_min)

    @property
    def kappa_max(self) -> float:
        return math.pi / self.dx

    def index_below(self, x: float) -> int:
        """Index of the last grid point ``<= x`` (clipped to the grid)."""
        i = int(math.floor((x - self.x_min) / self.dx))
        return min(max(i, 0), self.n_points - 1)


@dataclass(frozen=True)
class WaveField:
    """Position-space amplitudes at a fixed time."""

    grid: SimGrid
    amplitudes: np.ndarray
    time: float = 0.0
    mass: float = 1.0
    hbar: float = 1.0

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density) * self.grid.dx)


@dataclass(frozen=True)
class MomentumSpectrum:
    """Momentum-space amplitudes on ``grid.kappa`` at a fixed time."""

    grid: SimGrid
    amplitudes: np.ndarray
    time: float = 0.0
    mass: float = 1.0
    hbar: float = 1.0

    @property
    def kappa(self) -> np.ndarray:
        return self.grid.kappa

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density) * self.grid.dkappa)

    @cached_property
    def _support(self) -> tuple[np.ndarray, np.ndarray]:
        # components above SUPPORT_CUTOFF * max, pre-scaled for direct summation
        amp = self.amplitudes
        keep = np.abs(amp) > SUPPORT_CUTOFF * np.max(np.abs(amp))
        return self.grid.kappa[keep], amp[keep] * (self.grid.dkappa / SQRT_2PI)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def make_grid(x_min: float = -512.0, x_max: float = 512.0, n_points: int = 2**18,
              states: Iterable = ()) -> SimGrid:
    """Build a grid and check bandwidth headroom for every state in ``states``.

    ``states`` holds objects with ``kappa0`` and ``delta_kappa`` attributes
    (normally :class:`~superband.synthesis.SynthesisParams`).
    """
    if not x_max > x_min:
        raise GridError(f"x_max ({x_max}) must exceed x_min ({x_min})")
    if int(n_points) != n_points or not _is_power_of_two(int(n_points)):
        raise GridError(f"n_points must be a power of two, got {n_points}")
    grid = SimGrid(float(x_min), float(x_max), int(n_points))
    for st in states:
        need = HEADROOM * (abs(st.kappa0) + 4.0 * st.delta_kappa)
        if grid.kappa_max < need:
            raise GridError(
                f"insufficient wavenumber headroom: pi/dx = {grid.kappa_max:.4g} "
                f"< {HEADROOM:g}*(k0 + 4 dk) = {need:.4g}"
            )
    return grid


def to_position(spectrum: MomentumSpectrum) -> WaveField:
    g = spectrum.grid
    shifted = np.fft.ifftshift(spectrum.amplitudes * g._shift_phase)
    psi = np.fft.ifft(shifted) * (g.n_points * g.dkappa / SQRT_2PI)
    return WaveField(g, psi, spectrum.time, spectrum.mass, spectrum.hbar)


def to_momentum(field: WaveField) -> MomentumSpectrum:
    g = field.grid
    phi = np.fft.fftshift(np.fft.fft(field.amplitudes)) * (g.dx / SQRT_2PI)
    phi = phi * np.conj(g._shift_phase)
    return MomentumSpectrum(g, phi, field.time, field.mass, field.hbar)


def free_phase(spectrum: MomentumSpectrum, t: float) -> np.ndarray:
    """Phase factor advancing ``spectrum`` from its own time stamp to ``t``."""
    k = spectrum.kappa
    return np.exp(-1j * spectrum.hbar * k * k * (t - spectrum.time) / (2.0 * spectrum.mass))


def advance(spectrum: MomentumSpectrum, t: float) -> MomentumSpectrum:
    """Momentum representation at time ``t`` (exact, no time stepping)."""
    return replace(spectrum, amplitudes=spectrum.amplitudes * free_phase(spectrum, t), time=float(t))


def propagate(spectrum0: MomentumSpectrum, t: float) -> WaveField:
    """Free evolution to time ``t``; negative ``t`` runs backwards."""
    return to_position(advance(spectrum0, t))


def spectral_derivative(field: WaveField) -> np.ndarray:
    g = field.grid
    return np.fft.ifft(1j * g.kappa_fft * np.fft.fft(field.amplitudes))


def evaluate_at(spectrum: MomentumSpectrum, x, t: float | None = None
                ) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``psi`` and ``dpsi/dx`` at arbitrary points by direct summation.

    Exact for the band-limited grid spectrum up to the dropped components
    below ``SUPPORT_CUTOFF``; ``t`` advances the spectrum first.
    """
    k, w = spectrum._support
    if t is not None:
        w = w * np.exp(-1j * spectrum.hbar * k * k * (t - spectrum.time) / (2.0 * spectrum.mass))
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    basis = np.exp(1j * np.outer(x, k))
    return basis @ w, basis @ (1j * k * w)
