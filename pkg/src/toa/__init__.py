"""Time-of-arrival distributions for free quantum particles.

Submodules: :mod:`numerics` (grids, quadrature, oscillatory sums),
:mod:`states` (momentum and energy representations), :mod:`arrival`
(arrival-time density and its checks), :mod:`halfline` (half-line momentum
reference case), :mod:`extensions` (self-adjoint time operators),
:mod:`cli` (command-line front end).
"""
from .errors import (DegenerateStateError, IllConditionedError, InvalidGridError,
                     NotInDomainError, PreconditionError, ResolutionError, TailError,
                     ToaError, UnsupportedError)
from .numerics import ComplexSamples, Grid
from .results import CheckReport, Distribution
from .states import (EnergyChannels, GaussianSpec, MomentumState, PhysicalConstants,
                     build_state, from_energy_channels, to_energy_channels)

__version__ = "0.1.0"
