"""Free-particle states in the momentum representation.

A :class:`MomentumState` is a wavefunction ``psi(p)`` sampled on a symmetric
grid with an even number of nodes, so ``p = 0`` always falls between two
nodes. :class:`EnergyChannels` holds the same state split into right- and
left-movers, each a function of energy ``E = p**2 / 2m``. The channels are
stored on the uniform grid of ``|p|`` values inherited from the momentum
grid; all energy integrals are done after changing variables back to ``|p|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicSpline, make_interp_spline

from .errors import DegenerateStateError, InvalidGridError, PreconditionError
from .numerics import (ComplexSamples, Grid, check_phase_advance, derivative,
                       integrate_values)

#: half-width of a packet in units of sigma_p where |psi|^2 < 1e-12 of its peak
ENVELOPE_SIGMAS = np.sqrt(2 * np.log(1e12))


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise PreconditionError(
                f"hbar and mass must be positive, got {self.hbar}, {self.mass}")


@dataclass(frozen=True)
class GaussianSpec:
    """One Gaussian packet: mean momentum, momentum width, position offset."""

    p0: float
    sigma_p: float
    x0: float = 0.0
    weight: complex = 1.0

    def __post_init__(self):
        if not self.sigma_p > 0:
            raise PreconditionError(f"sigma_p must be positive, got {self.sigma_p}")

    def amplitude(self, p: np.ndarray, hbar: float = 1.0) -> np.ndarray:
        s = self.sigma_p
        return (self.weight * (2 * np.pi * s * s) ** -0.25
                * np.exp(-(p - self.p0) ** 2 / (4 * s * s))
                * np.exp(-1j * p * self.x0 / hbar))


def _check_momentum_grid(grid: Grid):
    if grid.n % 2:
        raise InvalidGridError(
            f"momentum grids need an even node count so p=0 is not a node; got n={grid.n}")
    if abs(grid.start + grid.stop) > 1e-12 * grid.stop:
        raise InvalidGridError("momentum grid must be symmetric about p=0")


@dataclass(frozen=True)
class MomentumState:
    constants: PhysicalConstants
    samples: ComplexSamples
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        _check_momentum_grid(self.samples.grid)

    @property
    def grid(self) -> Grid:
        return self.samples.grid

    @property
    def p(self) -> np.ndarray:
        return self.samples.grid.nodes

    @property
    def values(self) -> np.ndarray:
        return self.samples.values

    @property
    def pmax(self) -> float:
        return self.grid.stop

    def norm2(self) -> float:
        return float(integrate_values(np.abs(self.values) ** 2, self.grid))

    def expect(self, weights: np.ndarray) -> complex:
        """``<psi| f(p) |psi>`` for a multiplicative ``f`` sampled on the grid."""
        return complex(integrate_values(np.conj(self.values) * weights * self.values,
                                        self.grid))

    def mean_position(self) -> float:
        # x = i hbar d/dp in the momentum representation
        dpsi = derivative(self.samples).values
        val = integrate_values(np.conj(self.values) * 1j * self.constants.hbar * dpsi,
                               self.grid)
        return float(np.real(val))

    def position_spread(self) -> float:
        hbar = self.constants.hbar
        dpsi = derivative(self.samples).values
        x2 = float(integrate_values(np.abs(hbar * dpsi) ** 2, self.grid))
        return float(np.sqrt(max(x2 - self.mean_position() ** 2, 0.0)))

    def with_values(self, values, **meta) -> "MomentumState":
        return MomentumState(self.constants, self.samples.with_values(values),
                             {**self.meta, **meta})


def packet_extent(specs: Sequence[GaussianSpec]) -> float:
    """Smallest ``pmax`` covering every packet to the 1e-12 density envelope."""
    return max(abs(s.p0) + ENVELOPE_SIGMAS * s.sigma_p for s in specs)


def build_state(specs: Sequence[GaussianSpec],
                constants: PhysicalConstants | None = None,
                pmax: float | None = None, n: int = 4096) -> MomentumState:
    """Normalized superposition of Gaussian packets on ``[-pmax, pmax]``.

    Each packet contributes
    ``w (2 pi s^2)^(-1/4) exp(-(p-p0)^2 / 4s^2) exp(-i p x0 / hbar)``.
    """
    constants = constants or PhysicalConstants()
    specs = list(specs)
    if not specs:
        raise DegenerateStateError("at least one packet is required")
    need = packet_extent(specs)
    if pmax is None:
        pmax = float(np.ceil(need + 1.0))
    elif pmax < need:
        raise PreconditionError(
            f"pmax={pmax} does not cover the packets (needs >= {need:.3f})")
    grid = Grid.symmetric(pmax, n)
    _check_momentum_grid(grid)
    for s in specs:
        check_phase_advance(grid.spacing, s.x0 / constants.hbar,
                            what="momentum grid vs packet offset x0")
    p = grid.nodes
    psi = np.zeros(n, dtype=complex)
    for s in specs:
        psi += s.amplitude(p, constants.hbar)
    norm2 = float(integrate_values(np.abs(psi) ** 2, grid))
    if not norm2 > 0:
        raise DegenerateStateError("packet weights sum to a zero state")
    psi /= np.sqrt(norm2)
    return MomentumState(constants, ComplexSamples(grid, psi),
                         {"packets": len(specs)})


@dataclass(frozen=True)
class EnergyChannels:
    """Right-mover (``plus``) and left-mover (``minus``) energy amplitudes.

    Both are sampled at energies ``k**2 / 2m`` for the uniform grid ``k``
    of momentum magnitudes held by the samples.
    """

    constants: PhysicalConstants
    plus: ComplexSamples
    minus: ComplexSamples

    def __post_init__(self):
        if self.plus.grid != self.minus.grid:
            raise InvalidGridError("channels must share one grid")
        if self.plus.grid.start <= 0:
            raise InvalidGridError("channel momentum grid must start above 0")

    @property
    def kgrid(self) -> Grid:
        return self.plus.grid

    @property
    def k(self) -> np.ndarray:
        return self.kgrid.nodes

    @property
    def energies(self) -> np.ndarray:
        return self.k ** 2 / (2 * self.constants.mass)

    def _jacobian(self) -> np.ndarray:
        return self.k / self.constants.mass  # dE = (k/m) dk

    def channel_norm2(self) -> tuple[float, float]:
        jac = self._jacobian()
        return (float(integrate_values(np.abs(self.plus.values) ** 2 * jac, self.kgrid)),
                float(integrate_values(np.abs(self.minus.values) ** 2 * jac, self.kgrid)))

    def norm2(self) -> float:
        return sum(self.channel_norm2())

    def momentum_amplitudes(self) -> tuple[np.ndarray, np.ndarray]:
        """``psi(+k)`` and ``psi(-k)``, i.e. the channels times ``sqrt(k/m)``."""
        w = np.sqrt(self._jacobian())
        return w * self.plus.values, w * self.minus.values

    def evolved(self, tau: float) -> "EnergyChannels":
        ph = np.exp(-1j * self.energies * tau / self.constants.hbar)
        return EnergyChannels(self.constants, self.plus.with_values(ph * self.plus.values),
                              self.minus.with_values(ph * self.minus.values))

    def at_energies(self, energies: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Channel values at arbitrary energies >= 0 by spline interpolation.

        A quintic spline runs over ``psi(+-k)``, which is smooth through
        k = 0; the ``(m/2E)^(1/4)`` factor is applied exactly afterwards.
        Values at E = 0 and beyond the grid are set to zero.
        """
        m = self.constants.mass
        energies = np.asarray(energies, dtype=float)
        k = np.sqrt(2 * m * np.clip(energies, 0, None))
        gp, gm = self.momentum_amplitudes()
        inside = (k > 0) & (k <= self.kgrid.stop)
        out = []
        for g in (gp, gm):
            vals = np.zeros(energies.shape, dtype=complex)
            spline = _spline(self.k, g, degree=5)
            vals[inside] = spline(k[inside]) * np.sqrt(m / k[inside])
            out.append(vals)
        return out[0], out[1]


def _spline(x: np.ndarray, y: np.ndarray, degree: int = 3):
    if degree == 3:
        return CubicSpline(x, y, bc_type="not-a-knot", extrapolate=True)
    return make_interp_spline(x, y, k=degree)


def to_energy_channels(state: MomentumState) -> EnergyChannels:
    """Split ``psi(p)`` into ``psi_pm(E) = (m/2E)^(1/4) psi(+-sqrt(2mE))``."""
    grid = state.grid
    half = grid.n // 2
    kgrid = Grid(grid.spacing / 2, grid.stop, half)
    k = kgrid.nodes
    factor = np.sqrt(state.constants.mass / k)
    psi = state.values
    plus = factor * psi[half:]
    minus = factor * psi[:half][::-1]
    return EnergyChannels(state.constants, ComplexSamples(kgrid, plus),
                          ComplexSamples(kgrid, minus))


def channel_momentum_grid(channels: EnergyChannels) -> Grid:
    """The symmetric momentum grid whose positive half is ``channels.kgrid``."""
    kg = channels.kgrid
    return Grid.symmetric(kg.stop, 2 * kg.n)


def from_energy_channels(channels: EnergyChannels,
                         grid: Grid | None = None) -> MomentumState:
    """Inverse map ``psi(p) = sqrt(|p|/m) psi_pm(p**2 / 2m)``.

    On the channels' own momentum grid the map is exact; on any other grid
    ``psi(+-k)`` is interpolated with a cubic spline in ``|p|``.
    """
    native = channel_momentum_grid(channels)
    grid = grid or native
    _check_momentum_grid(grid)
    gp, gm = channels.momentum_amplitudes()
    if grid == native:
        values = np.concatenate([gm[::-1], gp])
        method = "exact"
    else:
        p = grid.nodes
        k = np.abs(p)
        values = np.zeros(grid.n, dtype=complex)
        inside = k <= channels.kgrid.stop
        pos = inside & (p > 0)
        neg = inside & (p < 0)
        values[pos] = _spline(channels.k, gp)(k[pos])
        values[neg] = _spline(channels.k, gm)(k[neg])
        method = "cubic spline in |p|"
    return MomentumState(channels.constants, ComplexSamples(grid, values),
                         {"interpolation": method})


def evolve_free(state: MomentumState, tau: float) -> MomentumState:
    """Free evolution: multiply by ``exp(-i p^2 tau / 2 m hbar)``."""
    c = state.constants
    phase = np.exp(-1j * state.p ** 2 * tau / (2 * c.mass * c.hbar))
    return state.with_values(phase * state.values)


def boost(samples: ComplexSamples, q: float, hbar: float = 1.0) -> ComplexSamples:
    """Momentum shift of position-space samples: ``psi(x) exp(-i q x / hbar)``."""
    return samples.with_values(samples.values * np.exp(-1j * q * samples.nodes / hbar))
