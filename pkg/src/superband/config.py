"""INI configuration for the command-line front end.

Four sections, every key optional::

    [grid]    x_min, x_max, n_points
    [state]   kappa0, delta_kappa, alpha, mass, hbar, gamma, normalization
    [run]     times, alphas, floor, dt, seed, n_trajectories, t_end,
              initial_mode, flux_window, flux_planes, flux_time, alpha_sweep
    [output]  directory, formats, x_window, stride

Lists are comma separated. Empty values mean "unset" for optional keys.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .bohmian import MAX_DT, MAX_T_END, MODES
from .errors import ConfigError, GridError, ParameterError
from .grid import make_grid, SimGrid
from .synthesis import NORMALIZATIONS, SynthesisParams

FORMATS = ("csv", "json", "both")


@dataclass(frozen=True)
class GridConfig:
    x_min: float = -512.0
    x_max: float = 512.0
    n_points: int = 2**18


@dataclass(frozen=True)
class StateConfig:
    kappa0: float = 2.0 * math.pi
    delta_kappa: float = 0.5
    alpha: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0
    gamma: float | None = None
    normalization: str = "exact"


@dataclass(frozen=True)
class RunConfig:
    times: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0)
    alphas: tuple[float, ...] = (1.0, 1.8)
    floor: float = 1e-7
    dt: float = 1e-2
    seed: int = 0
    n_trajectories: int = 40
    t_end: float = 5.0
    output_dt: float = 0.05
    initial_mode: str = "uniform_interval"
    flux_window: tuple[float, float] = (2.8, 3.2)
    flux_planes: tuple[float, float] | None = None
    flux_time: float = 3.0
    alpha_sweep: tuple[float, ...] = (1.0, 1.2, 1.4, 1.5, 1.6, 1.8, 2.0)
    classical_n: int = 16
    classical_times: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: str = "both"
    # density threshold (relative to the peak) bounding rows of field dumps; 0 keeps all
    x_window: float = 1e-14
    stride: int = 1


@dataclass(frozen=True)
class SimConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    state: StateConfig = field(default_factory=StateConfig)
    run: RunConfig = field(default_factory=RunConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def params(self, alpha: float | None = None) -> SynthesisParams:
        s = self.state
        return SynthesisParams(s.kappa0, s.delta_kappa, s.alpha if alpha is None else alpha,
                               s.mass, s.hbar, s.gamma, s.normalization)

    def make_grid(self, states=()) -> SimGrid:
        g = self.grid
        return make_grid(g.x_min, g.x_max, g.n_points, states=states)

    def echo(self) -> dict:
        """Everything that influences numerical results (output block excluded)."""
        return {"grid": asdict(self.grid), "state": asdict(self.state), "run": asdict(self.run)}

    def hash(self) -> str:
        canon = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _float_list(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.split(","))


def _convert(name: str, default, raw: str):
    raw = raw.strip()
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        return _float_list(raw)
    if default is None:
        # optional fields: gamma (float) and flux_planes (pair)
        if not raw:
            return None
        vals = _float_list(raw)
        return vals[0] if name == "gamma" else vals
    return raw


def _section(cls, parser: configparser.ConfigParser, name: str):
    if not parser.has_section(name):
        return cls()
    known = {f.name: f for f in fields(cls)}
    values = {}
    for key, raw in parser.items(name):
        if key not in known:
            raise ConfigError(f"unknown key [{name}] {key}")
        default = getattr(cls(), key)
        try:
            values[key] = _convert(key, default, raw)
        except ValueError as exc:
            raise ConfigError(f"[{name}] {key}: {exc}") from None
    return cls(**values)


def validate(cfg: SimConfig) -> SimConfig:
    """Re-check every module precondition; raise :class:`ConfigError`."""
    try:
        cfg.params()
        for a in cfg.run.alphas + cfg.run.alpha_sweep:
            cfg.params(a)
        cfg.make_grid(states=[cfg.params()])
    except (ParameterError, GridError) as exc:
        raise ConfigError(str(exc)) from None
    r, o = cfg.run, cfg.output
    if cfg.state.normalization not in NORMALIZATIONS:
        raise ConfigError(f"normalization must be one of {NORMALIZATIONS}")
    if not 0 < r.dt <= MAX_DT:
        raise ConfigError(f"dt must lie in (0, {MAX_DT}]")
    if not 0 < r.t_end <= MAX_T_END:
        raise ConfigError(f"t_end must lie in (0, {MAX_T_END}]")
    if r.initial_mode not in MODES:
        raise ConfigError(f"initial_mode must be one of {MODES}")
    if r.n_trajectories < 1 or r.classical_n < 2:
        raise ConfigError("n_trajectories >= 1 and classical_n >= 2 required")
    if not r.floor > 0:
        raise ConfigError("floor must be positive")
    if len(r.flux_window) != 2 or not r.flux_window[1] >= r.flux_window[0]:
        raise ConfigError("flux_window needs two increasing times")
    if r.flux_planes is not None and len(r.flux_planes) != 2:
        raise ConfigError("flux_planes needs two positions")
    if any(t < 0 for t in r.classical_times):
        raise ConfigError("classical_times must be non-negative")
    if o.formats not in FORMATS:
        raise ConfigError(f"formats must be one of {FORMATS}")
    if o.stride < 1 or o.x_window < 0:
        raise ConfigError("stride >= 1 and x_window >= 0 required")
    return cfg


def load_config(path: str | Path | None = None) -> SimConfig:
    """Read ``path`` (defaults only when ``None``) and validate."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            parser.read(p, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from None
        extra = set(parser.sections()) - {"grid", "state", "run", "output"}
        if extra:
            raise ConfigError(f"unknown section(s): {sorted(extra)}")
    cfg = SimConfig(_section(GridConfig, parser, "grid"), _section(StateConfig, parser, "state"),
                    _section(RunConfig, parser, "run"), _section(OutputConfig, parser, "output"))
    return validate(cfg)


def with_overrides(cfg: SimConfig, *, out=None, seed=None, alpha=None, times=None,
                   formats=None) -> SimConfig:
    """Apply command-line overrides and validate again."""
    if out is not None:
        cfg = replace(cfg, output=replace(cfg.output, directory=str(out)))
    if formats is not None:
        cfg = replace(cfg, output=replace(cfg.output, formats=formats))
    if seed is not None:
        cfg = replace(cfg, run=replace(cfg.run, seed=int(seed)))
    if alpha is not None:
        cfg = replace(cfg, state=replace(cfg.state, alpha=float(alpha)),
                      run=replace(cfg.run, alphas=(float(alpha),)))
    if times is not None:
        try:
            cfg = replace(cfg, run=replace(cfg.run, times=_float_list(times)))
        except ValueError as exc:
            raise ConfigError(f"--times: {exc}") from None
    return validate(cfg)
