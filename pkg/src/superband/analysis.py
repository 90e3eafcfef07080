"""Local momentum, super/sub-oscillation extrema, currents, fluxes and moments."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import simpson

from .errors import NoExtremumError, NumericalHealthError
from .grid import (MomentumSpectrum, SimGrid, WaveField, advance, evaluate_at,
                   propagate, spectral_derivative, to_momentum)
from .synthesis import SynthesisParams, log_spectrum_density, momentum_distribution

DEFAULT_FLOOR = 1e-7
FLUX_TOLERANCE = 1e-6


class AsymptoticRegimeWarning(UserWarning):
    """Raised when an asymptotic statistic is requested at too early a time."""


@dataclass(frozen=True)
class LocalMomentumField:
    grid: SimGrid
    time: float
    values: np.ndarray
    valid_mask: np.ndarray


@dataclass(frozen=True)
class ExtremumRecord:
    """One super- or sub-oscillation event (a row half of the summary table)."""

    kind: str
    kappa_over_kappa0: float
    x_at: float
    t: float
    density_at: float
    spectrum_weight: float
    log10_spectrum_weight: float
    weight_ratio: float


@dataclass(frozen=True)
class FluxReport:
    x_plane: float
    t_i: float
    t_f: float
    flux_by_current: float
    flux_by_probability: float
    samples: int

    @property
    def discrepancy(self) -> float:
        return abs(self.flux_by_current - self.flux_by_probability)


@dataclass(frozen=True)
class FluxDifference:
    left: FluxReport
    right: FluxReport
    delta: float
    p_initial: float
    p_final: float

    @property
    def verdict(self) -> str:
        if self.delta > 0:
            return "localizing"
        if self.delta < 0:
            return "delocalizing"
        return "stationary"


@dataclass(frozen=True)
class ShapeCheck:
    correlation: float
    t: float
    interference_time: float

    @property
    def asymptotic(self) -> bool:
        return self.t >= 10.0 * self.interference_time


@dataclass(frozen=True)
class CriticalAlpha:
    alpha_c: float
    bracket: tuple[float, float]
    slopes: tuple[float, float]
    iterations: int


# -- local momentum ---------------------------------------------------------

def local_momentum(field: WaveField, floor: float = DEFAULT_FLOOR) -> LocalMomentumField:
    """Local wavenumber ``Im(psi* psi') / |psi|**2``; NaN below the floor.

    Algebraically the x-derivative of ``arg psi`` but needs no phase unwrapping.
    """
    psi = field.amplitudes
    rho = np.abs(psi) ** 2
    valid = rho >= floor * rho.max()
    num = np.imag(np.conj(psi) * spectral_derivative(field))
    values = np.full(psi.shape, np.nan)
    values[valid] = num[valid] / rho[valid]
    return LocalMomentumField(field.grid, field.time, values, valid)


def _refine_extremum(x: np.ndarray, y: np.ndarray, i: int, valid: np.ndarray):
    # vertex of a least-squares parabola through 5 samples centred on i
    lo, hi = i - 2, i + 3
    if lo < 0 or hi > len(y) or not valid[lo:hi].all():
        return x[i], y[i]
    xs = x[lo:hi] - x[i]
    c2, c1, c0 = np.polyfit(xs, y[lo:hi], 2)
    if c2 == 0.0:
        return x[i], y[i]
    xv = -c1 / (2.0 * c2)
    if abs(xv) > 2.0 * (x[1] - x[0]):
        return x[i], y[i]
    return x[i] + xv, c0 + c1 * xv + c2 * xv * xv


def _interior_extrema(values: np.ndarray, valid: np.ndarray, sign: int) -> np.ndarray:
    v = sign * values
    inner = valid[1:-1] & valid[:-2] & valid[2:]
    mid = v[1:-1]
    with np.errstate(invalid="ignore"):
        peak = inner & (mid >= v[:-2]) & (mid > v[2:])
    return np.flatnonzero(peak) + 1


def _record(kind, kappa_ratio, x_at, field, spectrum, params):
    psi, _ = evaluate_at(spectrum, [x_at])
    density = float(abs(psi[0]) ** 2)
    logw = float(log_spectrum_density(params, kappa_ratio * params.kappa0))
    ratio = math.exp(0.5 * (logw - math.log(density)))
    return ExtremumRecord(kind, float(kappa_ratio), float(x_at), float(field.time), density,
                          math.exp(logw), logw / math.log(10.0), ratio)


def find_special_momenta(field: WaveField, params: SynthesisParams,
                         floor: float = DEFAULT_FLOOR, threshold: float = 1e-6
                         ) -> tuple[ExtremumRecord, ExtremumRecord]:
    """Locate the super- (max) and sub-oscillation (min) local momenta.

    Only interior local extrema of ``k_l`` count, so the monotone local
    momentum of a plain Gaussian yields :class:`NoExtremumError`.
    Spectrum weights come from the closed-form ``phi0`` in log space.
    """
    lm = local_momentum(field, floor)
    k0 = params.kappa0
    ratio = lm.values / k0
    x = field.grid.x
    maxima = _interior_extrema(ratio, lm.valid_mask, +1)
    minima = _interior_extrema(ratio, lm.valid_mask, -1)
    if maxima.size == 0 or minima.size == 0:
        raise NoExtremumError("local momentum has no interior extrema")
    i_sup = maxima[np.argmax(ratio[maxima])]
    i_sub = minima[np.argmin(ratio[minima])]
    if ratio[i_sup] <= 1.0 + threshold or ratio[i_sub] >= 1.0 - threshold:
        raise NoExtremumError("no local momentum beyond k0 on both sides")
    spectrum = to_momentum(field)
    xs, ks = _refine_extremum(x, ratio, i_sup, lm.valid_mask)
    xb, kb = _refine_extremum(x, ratio, i_sub, lm.valid_mask)
    sup = _record("super", ks, xs, field, spectrum, params)
    sub = _record("sub", kb, xb, field, spectrum, params)
    return sup, sub


def weight_ratio(record: ExtremumRecord) -> float:
    """``sqrt(|phi0(k_ext)|^2 / |psi(x_ext, t)|^2)``, formed in log space."""
    log_w = record.log10_spectrum_weight * math.log(10.0)
    return math.exp(0.5 * (log_w - math.log(record.density_at)))


# -- current and flux ---------------------------------------------------------

def probability_current(field: WaveField) -> np.ndarray:
    psi = field.amplitudes
    return field.hbar / field.mass * np.imag(np.conj(psi) * spectral_derivative(field))


def _real_derivative(values: np.ndarray, grid: SimGrid, order: int = 1) -> np.ndarray:
    return np.real(np.fft.ifft((1j * grid.kappa_fft) ** order * np.fft.fft(values)))


def continuity_residual(spectrum0: MomentumSpectrum, t: float, dt_fd: float = 1e-4) -> float:
    """Sup-norm of ``d_t |psi|^2 + d_x J`` (centred difference in time)."""
    rho_p = propagate(spectrum0, t + dt_fd).density
    rho_m = propagate(spectrum0, t - dt_fd).density
    field = propagate(spectrum0, t)
    drho_dt = (rho_p - rho_m) / (2.0 * dt_fd)
    div_j = _real_derivative(probability_current(field), field.grid)
    return float(np.max(np.abs(drho_dt + div_j)))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _cumulative(field: WaveField, spectrum: MomentumSpectrum, x_plane: float) -> float:
    """``integral_{-inf}^{x_plane} |psi|^2 dx`` on the grid.

    Trapezoid up to the last grid node below the plane with Euler-Maclaurin
    end corrections, then Gauss-Legendre on the remaining sub-cell using the
    exact band-limited interpolant.
    """
    g = field.grid
    rho = field.density
    if x_plane <= g.x_min:
        return 0.0
    if x_plane >= g.x_max - g.dx:
        return float(np.sum(rho) * g.dx)
    k = g.index_below(x_plane)
    d1 = _real_derivative(rho, g, 1)[k]
    d3 = _real_derivative(rho, g, 3)[k]
    trap = g.dx * (np.sum(rho[:k]) + 0.5 * rho[k]) - g.dx ** 2 / 12.0 * d1 + g.dx ** 4 / 720.0 * d3
    a, b = g.x[k], x_plane
    if b > a:
        nodes = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
        psi, _ = evaluate_at(spectrum, nodes)
        trap += 0.5 * (b - a) * float(np.dot(_GL_WEIGHTS, np.abs(psi) ** 2))
    return float(trap)


def cumulative_probability(field: WaveField, x_plane: float) -> float:
    return _cumulative(field, to_momentum(field), x_plane)


def interval_probability(field: WaveField, x_left: float, x_right: float) -> float:
    """Probability of finding the particle in ``[x_left, x_right]``."""
    if x_right <= x_left:
        return 0.0
    spectrum = to_momentum(field)
    return _cumulative(field, spectrum, x_right) - _cumulative(field, spectrum, x_left)


def current_at(spectrum0: MomentumSpectrum, x_plane: float, times) -> np.ndarray:
    """``J(x_plane, t)`` for each ``t`` from direct spectral summation."""
    out = np.empty(len(times))
    for n, t in enumerate(times):
        psi, dpsi = evaluate_at(spectrum0, [x_plane], t)
        out[n] = spectrum0.hbar / spectrum0.mass * np.imag(np.conj(psi[0]) * dpsi[0])
    return out


def probability_flux(spectrum0: MomentumSpectrum, x_plane: float, t_i: float, t_f: float,
                     n_quad: int = 64, check: bool = True) -> FluxReport:
    """Probability crossing ``x_plane`` during ``[t_i, t_f]``, computed twice.

    Once as the Simpson integral of the current at the plane, once as the
    drop of the cumulative probability left of the plane.
    """
    if t_f < t_i:
        raise ValueError("t_f must not precede t_i")
    if n_quad < 64 or n_quad % 2:
        raise ValueError("n_quad must be an even integer >= 64")
    if t_f == t_i:
        return FluxReport(float(x_plane), t_i, t_f, 0.0, 0.0, n_quad)
    times = np.linspace(t_i, t_f, n_quad + 1)
    by_current = float(simpson(current_at(spectrum0, x_plane, times), x=times))
    cum = []
    for t in (t_i, t_f):
        spec_t = advance(spectrum0, t)
        cum.append(_cumulative(propagate(spectrum0, t), spec_t, x_plane))
    report = FluxReport(float(x_plane), float(t_i), float(t_f), by_current,
                        cum[0] - cum[1], n_quad)
    if check and report.discrepancy > FLUX_TOLERANCE:
        raise NumericalHealthError(
            f"flux routes disagree by {report.discrepancy:.3g} at x={x_plane}")
    return report


def flux_difference(spectrum0: MomentumSpectrum, x_left: float, x_right: float,
                    t_i: float, t_f: float, n_quad: int = 64) -> FluxDifference:
    """``F(x_left) - F(x_right)``, which equals ``P(t_f) - P(t_i)`` between the planes."""
    if x_right < x_left:
        raise ValueError("x_left must not exceed x_right")
    left = probability_flux(spectrum0, x_left, t_i, t_f, n_quad)
    right = probability_flux(spectrum0, x_right, t_i, t_f, n_quad)
    p_i = interval_probability(propagate(spectrum0, t_i), x_left, x_right)
    p_f = interval_probability(propagate(spectrum0, t_f), x_left, x_right)
    return FluxDifference(left, right, left.flux_by_current - right.flux_by_current, p_i, p_f)


# -- moments, spreading, interference time -----------------------------------

def moments(obj: WaveField | MomentumSpectrum) -> tuple[float, float]:
    """Mean and standard deviation of position (field) or wavenumber (spectrum)."""
    if isinstance(obj, WaveField):
        coord, step = obj.grid.x, obj.grid.dx
    else:
        coord, step = obj.grid.kappa, obj.grid.dkappa
    rho = obj.density
    total = np.sum(rho) * step
    mean = np.sum(coord * rho) * step / total
    var = np.sum((coord - mean) ** 2 * rho) * step / total
    return float(mean), float(math.sqrt(var))


def gaussian_spread(dx0: float, t: float, mass: float = 1.0, hbar: float = 1.0) -> float:
    """Width of a free Gaussian: ``dx0 * sqrt(1 + (hbar t / (2 m dx0^2))^2)``."""
    if not dx0 > 0:
        raise ValueError("dx0 must be positive")
    return dx0 * math.sqrt(1.0 + (hbar * t / (2.0 * mass * dx0 * dx0)) ** 2)


def gaussian_spread_from_momentum(dx0: float, dp: float, t: float, mass: float = 1.0,
                                  hbar: float = 1.0) -> float:
    """Same law written with the momentum width of a minimum-uncertainty state."""
    return dx0 * math.sqrt(1.0 + (2.0 * dp * dp * t / (mass * hbar)) ** 2)


def doubling_time(dx0: float, mass: float = 1.0, hbar: float = 1.0) -> float:
    """Time at which the squared width has doubled, ``2 m dx0^2 / hbar``."""
    return 2.0 * mass * dx0 * dx0 / hbar


def interference_time(dx: float, dp: float, mass: float = 1.0) -> float:
    """Crossing time ``m dx / dp`` of the extreme particles of a spread ensemble."""
    if not (dx > 0 and dp > 0):
        raise ValueError("dx and dp must be positive")
    return mass * dx / dp


def interference_time_from_width(dx: float, mass: float = 1.0, hbar: float = 1.0) -> float:
    """``m dx^2 / hbar``: :func:`interference_time` after substituting ``dx dp = hbar``."""
    return interference_time(dx, hbar / dx, mass)


def transport_parameter(dx: float, t: float, mass: float = 1.0, hbar: float = 1.0) -> float:
    """``m dx^2 / (hbar t)``; equals 1 at the interference time."""
    return mass * dx * dx / (hbar * t)


def state_interference_time(spectrum0: MomentumSpectrum) -> float:
    """Interference time of a state from its momentum spread.

    Uses the minimum-uncertainty width ``hbar / (2 dp)`` so that a Gaussian with
    position deviation ``dx`` gets ``m dx^2 / hbar``.
    """
    _, dk_eff = moments(spectrum0)
    return interference_time_from_width(1.0 / (2.0 * dk_eff), spectrum0.mass, spectrum0.hbar)


def asymptotic_shape_check(spectrum0: MomentumSpectrum, t_large: float,
                           t_interference: float | None = None, rel_support: float = 1e-6
                           ) -> ShapeCheck:
    """Pearson correlation of ``|psi(x, t)|^2`` with ``|phi0(m x / (hbar t))|^2``.

    Sampled on the position grid wherever either density exceeds
    ``rel_support`` of its maximum.
    """
    t_i = state_interference_time(spectrum0) if t_interference is None else t_interference
    if t_large < 10.0 * t_i:
        warnings.warn(f"t={t_large:g} is below 10 t_I ({10 * t_i:.3g}); not asymptotic",
                      AsymptoticRegimeWarning, stacklevel=2)
    field = propagate(spectrum0, t_large)
    rho = field.density
    kappa_of_x = spectrum0.mass * field.grid.x / (spectrum0.hbar * t_large)
    target = np.interp(kappa_of_x, spectrum0.kappa, spectrum0.density, left=0.0, right=0.0)
    # the Jacobian m / (hbar t) maps one density onto the other
    target = target * spectrum0.mass / (spectrum0.hbar * t_large)
    keep = (rho >= rel_support * rho.max()) | (target >= rel_support * target.max())
    corr = float(np.corrcoef(rho[keep], target[keep])[0, 1])
    return ShapeCheck(corr, float(t_large), float(t_i))


# -- critical alpha -------------------------------------------------------------

def central_lobe(field: WaveField, centre: float) -> tuple[int, int]:
    """Indices of the density minima bracketing ``centre`` (nearest on each side)."""
    rho = field.density
    c = field.grid.index_below(centre)
    left = None
    for i in range(c, 0, -1):
        if rho[i] <= rho[i - 1] and rho[i] <= rho[i + 1]:
            left = i
            break
    right = None
    for i in range(c + 1, len(rho) - 1):
        if rho[i] <= rho[i - 1] and rho[i] <= rho[i + 1]:
            right = i
            break
    if left is None or right is None:
        raise NoExtremumError("no density minima bracket the packet centre")
    return left, right


def central_lobe_slope(field: WaveField, params: SynthesisParams, trim: float = 0.2) -> float:
    """Least-squares slope of ``k_l / k0`` across the middle of the central lobe."""
    left, right = central_lobe(field, params.group_velocity * field.time)
    n = right - left
    lo, hi = left + int(trim * n), right - int(trim * n)
    psi = field.amplitudes[lo:hi]
    dpsi = spectral_derivative(field)[lo:hi]
    kl = np.imag(np.conj(psi) * dpsi) / np.abs(psi) ** 2 / params.kappa0
    return float(np.polyfit(field.grid.x[lo:hi], kl, 1)[0])


def critical_alpha(params: SynthesisParams, grid: SimGrid, t_probe: float = 1.0,
                   bracket: tuple[float, float] = (1.0, 2.0), tol: float = 1e-4) -> CriticalAlpha:
    """Bisect ``alpha`` for the sign change of the central-lobe local-momentum slope."""
    if not t_probe > 0:
        raise ValueError("t_probe must be positive")

    def slope(alpha):
        p = replace(params, alpha=alpha, gamma=None)
        return central_lobe_slope(propagate(momentum_distribution(p, grid), t_probe), p)

    lo, hi = bracket
    s_lo, s_hi = slope(lo), slope(hi)
    if s_lo == 0.0 or s_hi == 0.0 or (s_lo > 0) == (s_hi > 0):
        raise NoExtremumError(f"slope does not change sign on [{lo}, {hi}]")
    it = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        s_mid = slope(mid)
        if (s_mid > 0) == (s_lo > 0):
            lo, s_lo = mid, s_mid
        else:
            hi, s_hi = mid, s_mid
        it += 1
    return CriticalAlpha(0.5 * (lo + hi), bracket, (s_lo, s_hi), it)
