"""Free evolution of superbandwidth quantum wavepackets.

Exact spectral propagation on periodic grids, local-momentum extrema,
probability currents and fluxes, Bohmian trajectories and classical
ensemble analogues.
"""
from .errors import (ConfigError, GridError, NoExtremumError, NodeUnderflowError,
                     NumericalHealthError, ParameterError, SuperbandError)
from .grid import (MomentumSpectrum, SimGrid, WaveField, advance, evaluate_at, make_grid,
                   propagate, to_momentum, to_position)
from .synthesis import (SynthesisParams, analytic_superband_field, momentum_distribution,
                        state_spectrum)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "GridError", "MomentumSpectrum", "NoExtremumError", "NodeUnderflowError",
    "NumericalHealthError", "ParameterError", "SimGrid", "SuperbandError", "SynthesisParams",
    "WaveField", "__version__", "advance", "analytic_superband_field", "evaluate_at",
    "make_grid", "momentum_distribution", "propagate", "state_spectrum", "to_momentum",
    "to_position",
]
