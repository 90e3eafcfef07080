"""Bohmian trajectories guided by the closed-form superposition field.

Velocities come from :func:`superband.synthesis.analytic_superband_field`
rather than from a gridded field, so trajectories can leave any fixed grid.
Integration runs in :mod:`superband.kernels` (compiled when available).
"""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .analysis import (AsymptoticRegimeWarning, NoExtremumError, find_special_momenta,
                       state_interference_time)
from .errors import NodeUnderflowError
from .grid import SimGrid, WaveField, make_grid
from .synthesis import (SynthesisParams, analytic_superband_field, gaussian_terms,
                        state_spectrum)

MODES = ("uniform_interval", "born_sampled")
MAX_DT = 1e-2
MAX_T_END = 50.0
MIN_DT = 1e-6


@dataclass(frozen=True)
class TrajectorySet:
    times: np.ndarray
    positions: np.ndarray
    params: SynthesisParams
    initial_mode: str = "uniform_interval"
    seed: int | None = None
    dt: float = MAX_DT
    failed: np.ndarray = field(default=None)
    super_index: int | None = None
    sub_index: int | None = None

    @property
    def n_trajectories(self) -> int:
        return self.positions.shape[0]

    @property
    def special_flags(self) -> np.ndarray:
        flags = np.zeros(self.n_trajectories, dtype=bool)
        for idx in (self.super_index, self.sub_index):
            if idx is not None:
                flags[idx] = True
        return flags

    def is_non_crossing(self) -> bool:
        """Initial ordering preserved at every output time."""
        order = np.argsort(self.positions[:, 0], kind="stable")
        return bool(np.all(np.diff(self.positions[order], axis=0) > 0))


@dataclass(frozen=True)
class VelocityHistogram:
    edges: np.ndarray
    density: np.ndarray
    reference: np.ndarray
    correlation: float
    mean: float
    max_drift: float


def velocity(params: SynthesisParams, x, t: float):
    """Guiding velocity ``(hbar/m) Im(psi* psi') / |psi|^2`` at ``(x, t)``."""
    scalar = np.isscalar(x)
    amps, widths = gaussian_terms(params)
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))
    v, bad = kernels.guiding_velocity(xs, float(t) - params.time_shift, params.kappa0,
                                      params.hbar, params.mass, amps, widths)
    if np.any(bad):
        raise NodeUnderflowError(f"field underflows at {np.count_nonzero(bad)} point(s)")
    return float(v[0]) if scalar else v


def sample_initial_positions(params: SynthesisParams, n: int, mode: str = "uniform_interval",
                             seed: int = 0, interval: tuple[float, float] = (-10.0, 10.0),
                             grid: SimGrid | None = None) -> np.ndarray:
    """Initial positions, reproducible per ``seed``.

    ``born_sampled`` inverts the cumulative of ``|psi0|^2`` on ``grid``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    if mode == "uniform_interval":
        lo, hi = interval
        return lo + (hi - lo) * u
    grid = grid if grid is not None else make_grid()
    rho = np.abs(analytic_superband_field(params, grid.x, 0.0)) ** 2
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]))])
    cdf /= cdf[-1]
    # flat stretches of the tabulated CDF would make interp ambiguous
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return np.interp(u, cdf[keep], grid.x[keep])


def integrate_trajectories(params: SynthesisParams, x0s, t_end: float, dt: float = MAX_DT,
                           output_dt: float = 0.05, times=None, num_threads: int = 1,
                           initial_mode: str = "uniform_interval", seed: int | None = None
                           ) -> TrajectorySet:
    """Classical RK4 for ``dx/dt = velocity(x, t)`` from ``t = 0`` to ``t_end``.

    Steps straddling a near-node underflow are retried with halved steps down
    to ``1e-6``; trajectories that still fail are reported in ``failed`` and
    carry NaN afterwards (a warning is emitted). Steps whose RK4 stages
    disagree by more than ``1e-4`` in displacement are refined the same way,
    down to ``1e-10``.
    """
    if not 0 < dt <= MAX_DT:
        raise ValueError(f"dt must lie in (0, {MAX_DT}]")
    if not 0 < t_end <= MAX_T_END:
        raise ValueError(f"t_end must lie in (0, {MAX_T_END}]")
    if times is None:
        n_out = max(1, int(round(t_end / output_dt)))
        times = np.linspace(0.0, t_end, n_out + 1)
    times = np.ascontiguousarray(times, dtype=np.float64)
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ValueError("output times must start at 0 and increase strictly")
    amps, widths = gaussian_terms(params)
    x0 = np.ascontiguousarray(np.atleast_1d(np.asarray(x0s, dtype=np.float64)))
    pos, failed = kernels.rk4_trajectories(
        x0, times, float(dt), params.time_shift, params.kappa0, params.hbar, params.mass,
        amps, widths, MIN_DT, int(num_threads))
    failed = np.asarray(failed, dtype=bool)
    if failed.any():
        warnings.warn(f"{failed.sum()} trajectories exhausted step halving", RuntimeWarning,
                      stacklevel=2)
    return TrajectorySet(times, pos, params, initial_mode, seed, float(dt), failed)


def gaussian_trajectory(params: SynthesisParams, x0, t) -> np.ndarray:
    """Closed-form Bohmian path of the single-Gaussian member.

    Trajectories ride the spreading envelope: the offset from the packet
    centre scales with the position width, ``x = c(t) + (x0 - c(0)) s(t)/s(0)``.
    """
    w0 = 1.0 / params.delta_kappa
    rate = params.hbar / (2.0 * params.mass * w0 * w0)
    v = params.group_velocity
    t_eff = np.asarray(t, dtype=np.float64) - params.time_shift
    t_start = -params.time_shift
    scale = np.sqrt(1.0 + (rate * t_eff) ** 2) / math.sqrt(1.0 + (rate * t_start) ** 2)
    return v * t_eff + (np.asarray(x0, dtype=np.float64) - v * t_start) * scale


def _window_field(params: SynthesisParams, t: float, half_width: float = 128.0,
                  n_points: int = 2**16) -> WaveField:
    centre = params.group_velocity * (t - params.time_shift)
    grid = SimGrid(centre - half_width, centre + half_width, n_points)
    psi = analytic_superband_field(params, grid.x, t)
    return WaveField(grid, psi, float(t), params.mass, params.hbar)


def extremum_path(params: SynthesisParams, times, floor: float = 1e-7):
    """Positions of the super/sub extrema at each time (NaN where absent)."""
    sup = np.full(len(times), np.nan)
    sub = np.full(len(times), np.nan)
    for k, t in enumerate(times):
        if t <= 0:
            continue
        try:
            rs, rb = find_special_momenta(_window_field(params, t), params, floor)
        except NoExtremumError:
            continue
        sup[k], sub[k] = rs.x_at, rb.x_at
    return sup, sub


def tag_special_trajectories(tset: TrajectorySet, max_samples: int = 40,
                             t_window: tuple[float, float] | None = None) -> TrajectorySet:
    """Flag the trajectories that follow the super- and sub-extremum paths.

    At each sampled output time the trajectory nearest to each extremum gets a
    vote; the majority wins. No flags when the state has no extrema. Votes are
    taken over ``(0, t_I]`` by default, the interference regime where the
    extrema carry the dynamics; later they drift through empty regions.
    """
    if t_window is None:
        t_window = (0.0, state_interference_time(state_spectrum(tset.params, make_grid())))
    lo, hi = t_window
    idx = np.flatnonzero((tset.times > lo) & (tset.times <= hi))
    if idx.size > max_samples:
        idx = idx[np.linspace(0, idx.size - 1, max_samples).round().astype(int)]
    sup_path, sub_path = extremum_path(tset.params, tset.times[idx])
    votes_sup, votes_sub = Counter(), Counter()
    for col, xs, xb in zip(idx, sup_path, sub_path):
        column = tset.positions[:, col]
        if np.isfinite(xs):
            votes_sup[int(np.nanargmin(np.abs(column - xs)))] += 1
        if np.isfinite(xb):
            votes_sub[int(np.nanargmin(np.abs(column - xb)))] += 1
    sup_i = min(votes_sup.items(), key=lambda kv: (-kv[1], kv[0]))[0] if votes_sup else None
    sub_i = min(votes_sub.items(), key=lambda kv: (-kv[1], kv[0]))[0] if votes_sub else None
    return replace(tset, super_index=sup_i, sub_index=sub_i)


def asymptotic_velocities(tset: TrajectorySet, bins: int = 40, span: float = 3.0
                          ) -> VelocityHistogram:
    """Histogram of end-segment velocities against ``|phi0(m v / hbar)|^2``.

    Velocities are ``(x(T) - x(0.9 T)) / (0.1 T)``. Bins cover
    ``k0 +/- span*dk`` in velocity units.
    """
    p = tset.params
    t_end = tset.times[-1]
    grid = make_grid()
    spectrum0 = state_spectrum(p, grid)
    t_i = state_interference_time(spectrum0)
    if t_end < 10.0 * t_i:
        warnings.warn(f"t_end={t_end:g} is below 10 t_I ({10 * t_i:.3g})",
                      AsymptoticRegimeWarning, stacklevel=2)
    k = int(np.argmin(np.abs(tset.times - 0.9 * t_end)))
    t_a = tset.times[k]
    ok = ~tset.failed if tset.failed is not None else np.ones(tset.n_trajectories, bool)
    x_a, x_b = tset.positions[ok, k], tset.positions[ok, -1]
    v = (x_b - x_a) / (t_end - t_a)
    vscale = p.hbar / p.mass
    edges = np.linspace((p.kappa0 - span * p.delta_kappa) * vscale,
                        (p.kappa0 + span * p.delta_kappa) * vscale, bins + 1)
    hist, _ = np.histogram(v, bins=edges, density=False)
    width = edges[1] - edges[0]
    hist = hist / (v.size * width)
    centres = 0.5 * (edges[1:] + edges[:-1])
    ref = np.interp(centres / vscale, spectrum0.kappa, spectrum0.density) / vscale
    corr = float(np.corrcoef(hist, ref)[0, 1])
    drift = np.abs(velocity(p, x_b, t_end) - velocity(p, x_a, t_a))
    return VelocityHistogram(edges, hist, ref, corr, float(np.mean(v)), float(drift.max()))


def trajectory_velocities(tset: TrajectorySet, index: int) -> np.ndarray:
    """Instantaneous guiding velocity of one trajectory at every output time."""
    x = tset.positions[index]
    return np.array([velocity(tset.params, xi, t) for xi, t in zip(x, tset.times)])


def equivariance_distance(tset: TrajectorySet, t: float, grid: SimGrid | None = None) -> float:
    """Kolmogorov distance between trajectory positions at ``t`` and ``|psi(., t)|^2``.

    Meaningful for Born-sampled starts; ``t`` must be one of the output times.
    """
    k = int(np.argmin(np.abs(tset.times - t)))
    if not math.isclose(tset.times[k], t, rel_tol=0.0, abs_tol=1e-9):
        raise ValueError(f"t={t} is not an output time")
    p = tset.params
    grid = grid if grid is not None else make_grid()
    rho = np.abs(analytic_superband_field(p, grid.x, t)) ** 2
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]))])
    cdf /= cdf[-1]
    xs = np.sort(tset.positions[:, k][np.isfinite(tset.positions[:, k])])
    model = np.interp(xs, grid.x, cdf)
    n = xs.size
    upper = np.arange(1, n + 1) / n - model
    lower = model - np.arange(n) / n
    return float(max(upper.max(), lower.max()))
