"""Self-adjoint time operators that are not arrival times.

Two cases are covered. The first is the family ``T'_alpha`` of self-adjoint
extensions of ``T_+ (+) (-T_-)``: gluing the left-mover channel onto negative
energies, ``chi(E) = psi_+(E)`` for ``E > 0`` and
``chi(E) = exp(-i alpha) psi_-(-E)`` for ``E < 0``, turns ``T'_alpha`` into
``-i hbar d/dE`` on the whole energy line, whose spectral density is a plain
Fourier transform. The second is ``T_g = p / m g`` for a particle in a
constant field ``g``, whose density is a rescaled momentum density.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .numerics import (ComplexSamples, Grid, check_phase_advance, cumulative, differentiate,
                       exp_sum, integrate_values, piecewise_weights, quadrature_weights)
from .results import CheckReport, Distribution
from .states import EnergyChannels, MomentumState

TWO_PI = 2 * np.pi
#: each channel must carry this share of the norm for the violation test
MIN_CHANNEL_MASS = 0.1


@dataclass(frozen=True)
class AlphaExtensionSpec:
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(np.mod(self.alpha, TWO_PI)))


def default_energy_grid(channels: EnergyChannels, n: int | None = None) -> Grid:
    emax = channels.kgrid.stop ** 2 / (2 * channels.constants.mass)
    if n is None:
        n = 4 * channels.kgrid.n + 1
    if n % 2 == 0:
        n += 1  # keep E = 0 on a node
    return Grid.symmetric(emax, n)


def unfold(channels: EnergyChannels, alpha: float,
           egrid: Grid | None = None) -> ComplexSamples:
    """Glue the two channels into one function ``chi(E)`` on ``[-Emax, Emax]``.

    The channels are interpolated onto the uniform energy grid (see
    :meth:`EnergyChannels.at_energies`). ``E = 0`` is always a node.
    """
    alpha = AlphaExtensionSpec(alpha).alpha
    egrid = egrid or default_energy_grid(channels)
    e = egrid.nodes
    plus, _ = channels.at_energies(np.where(e > 0, e, 0.0))
    _, minus = channels.at_energies(np.where(e < 0, -e, 0.0))
    chi = np.where(e > 0, plus, 0) + np.where(e < 0, np.exp(-1j * alpha) * minus, 0)
    return ComplexSamples(egrid, chi)


def unfolded_norm2(chi: ComplexSamples) -> float:
    w = piecewise_weights(chi.grid, (0.0,) if chi.grid.start < 0 < chi.grid.stop else ())
    return float(np.dot(w, np.abs(chi.values) ** 2))


def _check_tau_grid(channels: EnergyChannels, tgrid: Grid):
    c = channels.constants
    kmax = channels.kgrid.stop
    check_phase_advance(tgrid.spacing, kmax ** 2 / (2 * c.mass * c.hbar),
                        limit=np.pi / 4, what="time grid")
    tabs = max(abs(tgrid.start), abs(tgrid.stop))
    check_phase_advance(channels.kgrid.spacing, kmax * tabs / (c.mass * c.hbar),
                        what="momentum grid at the largest |t|")


def alpha_amplitude(channels: EnergyChannels, alpha: float, tau) -> np.ndarray:
    """``int dE exp(-iE tau/hbar) chi(E) / sqrt(2 pi hbar)`` in momentum variables.

    With ``E = +-k^2/2m`` the two halves of the energy line become
    Kijowski-type amplitudes of the two channels, the left-mover one taken
    at ``-tau``.
    """
    c = channels.constants
    alpha = AlphaExtensionSpec(alpha).alpha
    k = channels.k
    w = quadrature_weights(channels.kgrid.n) * channels.kgrid.spacing
    root = np.sqrt(k / (TWO_PI * c.mass * c.hbar))
    phase = k ** 2 / (2 * c.mass * c.hbar)
    gp, gm = channels.momentum_amplitudes()
    tau = np.asarray(tau, dtype=float)
    right = exp_sum(w * root * gp, phase, tau, sign=-1)
    left = exp_sum(w * root * gm, phase, tau, sign=+1)
    return right + np.exp(-1j * alpha) * left


def alpha_distribution(channels: EnergyChannels, alpha: float, tgrid: Grid) -> Distribution:
    """Spectral density of ``T'_alpha`` for the state held in ``channels``."""
    _check_tau_grid(channels, tgrid)
    amp = alpha_amplitude(channels, alpha, tgrid.nodes)
    return Distribution(tgrid, np.abs(amp) ** 2, metadata={
        "alpha": AlphaExtensionSpec(alpha).alpha, "channel_norms": channels.channel_norm2(),
        "time_grid": tgrid.as_dict()})


def operator_moments(chi: ComplexSamples, hbar: float = 1.0, orders=(1, 2, 3)) -> dict:
    """``<chi| (-i hbar d/dE)^n chi>`` by repeated finite differences on the energy line."""
    h = chi.grid.spacing
    w = chi.grid.weights()
    out = {}
    vals = np.asarray(chi.values)
    applied = vals
    for n in range(1, max(orders) + 1):
        applied = -1j * hbar * differentiate(applied, h, 6)
        if n in orders:
            out[n] = complex(np.dot(w, np.conj(vals) * applied))
    return out


def alpha_moments_check(channels: EnergyChannels, alpha: float, tgrid: Grid,
                        egrid: Grid | None = None, orders=(1, 2, 3),
                        rel_tol: float = 1e-3) -> CheckReport:
    """Moments of the ``T'_alpha`` density against operator expectations.

    Differences are measured relative to ``max(|<T'^n>|, <T'^2>^(n/2))`` so
    odd moments that vanish by symmetry are still compared on a sensible
    scale.
    """
    dist = alpha_distribution(channels, alpha, tgrid)
    chi = unfold(channels, alpha, egrid)
    ops = operator_moments(chi, channels.constants.hbar, orders)
    second = dist.moment(2)
    errs, values = [], {}
    for n in orders:
        m_dist = dist.moment(n)
        m_op = ops[n].real
        scale = max(abs(m_op), second ** (n / 2))
        errs.append(abs(m_dist - m_op) / scale)
        values[f"moment{n}_dist"] = m_dist
        values[f"moment{n}_operator"] = m_op
        values[f"moment{n}_operator_imag"] = ops[n].imag
    return CheckReport("alpha-moments", max(errs), rel_tol,
                       details="moments of Pi' vs <(T'_alpha)^n>", values=values)


def _shift_discrepancy(channels: EnergyChannels, alpha: float, tau_shift: float,
                       tgrid: Grid) -> tuple[float, float]:
    ref = alpha_distribution(channels, alpha, tgrid)
    peak = float(ref.density.max())
    if tau_shift == 0:
        return 0.0, peak
    moved = alpha_distribution(channels.evolved(tau_shift), alpha, tgrid.shifted(-tau_shift))
    return float(np.max(np.abs(moved.density - ref.density))), peak


def alpha_covariance_check(channels: EnergyChannels, alpha: float, tau_shift: float,
                           tgrid: Grid, rel_tol: float = 1e-6) -> CheckReport:
    """Time-shift covariance of the ``T'_alpha`` density (holds for one channel only)."""
    diff, peak = _shift_discrepancy(channels, alpha, tau_shift, tgrid)
    return CheckReport("alpha-covariance", diff / peak, rel_tol,
                       details=f"sup |Pi'_U(tau)psi(t - tau) - Pi'_psi(t)| / max Pi', tau={tau_shift}",
                       values={"tau": tau_shift, "alpha": alpha, "sup_abs": diff})


def alpha_covariance_violation(channels: EnergyChannels, alpha: float, tau_shift: float,
                               tgrid: Grid, threshold: float = 1e-2) -> CheckReport:
    """Passes when covariance visibly FAILS for a state populating both channels."""
    norms = channels.channel_norm2()
    total = sum(norms)
    if min(norms) < MIN_CHANNEL_MASS * total:
        raise PreconditionError(
            f"violation test needs >= {MIN_CHANNEL_MASS:.0%} of the norm in each "
            f"channel, got {norms[0] / total:.3f} / {norms[1] / total:.3f}")
    diff, peak = _shift_discrepancy(channels, alpha, tau_shift, tgrid)
    return CheckReport("alpha-violation", diff / peak, threshold, kind="min",
                       details="covariance must fail for two-channel states",
                       values={"tau": tau_shift, "alpha": alpha, "sup_abs": diff,
                               "channel_norms": list(norms)})


def constant_field_distribution(state: MomentumState, g: float) -> Distribution:
    """Density of ``T_g = p / m g``: ``m |g| |psi(m g t)|^2`` on ``t = p / m g``."""
    if g == 0 or not np.isfinite(g):
        raise PreconditionError("field strength g must be finite and non-zero")
    m = state.constants.mass
    mg = m * g
    dens = np.abs(state.values) ** 2 * abs(mg)
    grid = state.grid
    if g > 0:
        tgrid = Grid(grid.start / mg, grid.stop / mg, grid.n)
    else:
        tgrid = Grid(grid.stop / mg, grid.start / mg, grid.n)
        dens = dens[::-1]
    return Distribution(tgrid, dens, metadata={"g": g, "mass": m,
                                               "momentum_grid": grid.as_dict()})


def constant_field_kolmogorov(state: MomentumState, g: float) -> float:
    """Largest CDF gap between the field density and ``P(p <= m g t)`` (or ``>=`` for g < 0)."""
    dist = constant_field_distribution(state, g)
    cdf_t = cumulative(dist.density, dist.grid)
    dens_p = np.abs(state.values) ** 2
    cdf_p = cumulative(dens_p, state.grid)
    mg = state.constants.mass * g
    # CDF of |psi|^2 evaluated at p = m g t, from the momentum side
    if g > 0:
        oracle = cdf_p
    else:
        oracle = (cdf_p[-1] - cdf_p)[::-1]
    p_at_t = mg * dist.nodes
    expected_nodes = state.p if g > 0 else state.p[::-1]
    if not np.allclose(p_at_t, expected_nodes, rtol=0, atol=1e-9 * state.pmax):
        raise AssertionError("time grid does not map onto the momentum grid")
    return float(np.max(np.abs(cdf_t - oracle)))


def constant_field_mean(state: MomentumState, g: float) -> float:
    """``<p> / m g``, the expectation of ``T_g``."""
    pbar = state.expect(state.p).real
    return pbar / (state.constants.mass * g)
