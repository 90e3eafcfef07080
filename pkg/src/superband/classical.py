"""Free classical particle ensembles and their ordering dynamics.

An analogy harness for the interference time: particles launched from a
finite interval with a spread of momenta eventually sort themselves by
momentum, and the time at which that happens is ``m dx / dp`` for the
extremal pair.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONSTRAINT_MODES = ("none", "extremal_swapped")
FIG6_VELOCITIES = (1.0, 1.3, 1.5, 1.7, 1.9, 2.1, 2.3)


@dataclass(frozen=True)
class ClassicalEnsemble:
    """Initial positions and momenta of ``n`` free particles.

    Attributes
    ----------
    x0, p : ndarray
        Initial positions and (constant) momenta.
    m : float
        Common particle mass.
    seed : int or None
        Seed of the draws, ``None`` for hand-built ensembles.
    constraint_mode : str
        ``"extremal_swapped"`` puts the fastest particle at the lowest
        position and the slowest at the highest.
    """

    x0: np.ndarray
    p: np.ndarray
    m: float = 1.0
    seed: int | None = None
    constraint_mode: str = "none"

    def __post_init__(self):
        if self.x0.shape != self.p.shape or self.x0.ndim != 1:
            raise ValueError("x0 and p must be 1-D arrays of equal length")
        if not self.m > 0:
            raise ValueError("mass must be positive")
        if self.constraint_mode not in CONSTRAINT_MODES:
            raise ValueError(f"constraint_mode must be one of {CONSTRAINT_MODES}")

    @property
    def n(self) -> int:
        return self.x0.size

    @property
    def velocities(self) -> np.ndarray:
        return self.p / self.m


def _swap_extremal(x0: np.ndarray, p: np.ndarray) -> np.ndarray:
    x0 = x0.copy()
    fast, slow = int(np.argmax(p)), int(np.argmin(p))
    lo, hi = int(np.argmin(x0)), int(np.argmax(x0))
    # move min position onto the fastest particle, then max onto the slowest
    x0[[fast, lo]] = x0[[lo, fast]]
    hi = int(np.argmax(x0))
    x0[[slow, hi]] = x0[[hi, slow]]
    return x0


def init_ensemble(n: int, x_range: tuple[float, float], p_range: tuple[float, float],
                  m: float = 1.0, seed: int = 0, constraint_mode: str = "none"
                  ) -> ClassicalEnsemble:
    """Uniform random positions in ``x_range`` and momenta in ``p_range``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    (xl, xh), (pl, ph) = x_range, p_range
    if not (xh > xl and ph > pl):
        raise ValueError("ranges must be nonempty")
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(xl, xh, n)
    p = rng.uniform(pl, ph, n)
    if constraint_mode == "extremal_swapped":
        x0 = _swap_extremal(x0, p)
    return ClassicalEnsemble(x0, p, float(m), seed, constraint_mode)


def fig6_preset(seed: int = 0, x_range: tuple[float, float] = (0.0, 1.0),
                m: float = 1.0) -> ClassicalEnsemble:
    """Seven particles, ``v`` from 1 to 2.3, slowest at ``x_h`` and fastest at ``x_l``.

    The five middle particles get uniform draws on ``x_range``.
    """
    xl, xh = x_range
    v = np.array(FIG6_VELOCITIES)
    rng = np.random.default_rng(seed)
    x0 = np.empty_like(v)
    x0[0], x0[-1] = xh, xl
    x0[1:-1] = rng.uniform(xl, xh, v.size - 2)
    return ClassicalEnsemble(x0, m * v, float(m), seed, "extremal_swapped")


def evolve_ensemble(ens: ClassicalEnsemble, t: float) -> np.ndarray:
    """Ballistic positions ``x0 + p t / m``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return ens.x0 + ens.p * t / ens.m


def is_momentum_ordered(ens: ClassicalEnsemble, t: float) -> bool:
    """True when positions at ``t`` increase strictly with momentum."""
    order = np.argsort(ens.p, kind="stable")
    return bool(np.all(np.diff(evolve_ensemble(ens, t)[order]) > 0))


def ordering_time(ens: ClassicalEnsemble) -> float:
    """Latest pairwise crossing time; after it positions stay sorted by momentum.

    Raises
    ------
    ValueError
        If two particles share a momentum.
    """
    p, x = ens.p, ens.x0
    if np.unique(p).size != p.size:
        raise ValueError("ordering_time needs distinct momenta")
    dp = p[None, :] - p[:, None]
    dx = x[:, None] - x[None, :]
    # pair (i, j) with p_i < p_j starting with x_i > x_j crosses at m dx / dp
    inverted = (dp > 0) & (dx > 0)
    if not inverted.any():
        return 0.0
    return float(np.max(ens.m * dx[inverted] / dp[inverted]))


def extremal_crossing_time(ens: ClassicalEnsemble) -> float:
    """``m dx / dp`` between the fastest and the slowest particle."""
    fast, slow = int(np.argmax(ens.p)), int(np.argmin(ens.p))
    return float(ens.m * (ens.x0[slow] - ens.x0[fast]) / (ens.p[fast] - ens.p[slow]))


def pairwise_separation_growth(ens: ClassicalEnsemble, t: float) -> np.ndarray:
    """Separations of momentum-consecutive particles at time ``t``.

    ``dx_i(t) = dp_i t / m + dx_i(0)`` for neighbours in momentum order.
    """
    order = np.argsort(ens.p, kind="stable")
    return np.diff(evolve_ensemble(ens, t)[order])
