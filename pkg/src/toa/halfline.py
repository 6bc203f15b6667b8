"""Momentum operator on the half-line ``x > 0``.

The operator ``-i hbar d/dx`` on states with ``psi(0) = 0`` is maximally
symmetric. Its momentum density is the overlap with the non-orthogonal plane
waves ``exp(ipx/hbar) / sqrt(2 pi hbar)`` restricted to ``x > 0``, which is the
same thing as the ordinary momentum density of the zero-extended state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidGridError, PreconditionError, TailError, UnsupportedError
from .numerics import (ComplexSamples, Grid, check_phase_advance, differentiate,
                       exp_sum, integrate_values, piecewise_weights, principal_value)
from .results import CheckReport, Distribution
from .states import PhysicalConstants

#: relative size of |psi(0)| below which a state counts as vanishing at x = 0
DOMAIN_TOL = 1e-8


@dataclass(frozen=True)
class HalfLineState:
    constants: PhysicalConstants
    samples: ComplexSamples
    in_domain: bool = field(default=None)

    def __post_init__(self):
        if self.samples.grid.start != 0.0:
            raise InvalidGridError("half-line grids start at x = 0")
        if self.in_domain is None:
            vals = np.abs(self.samples.values)
            object.__setattr__(self, "in_domain",
                               bool(vals[0] <= DOMAIN_TOL * vals.max()))

    @property
    def x(self) -> np.ndarray:
        return self.samples.nodes

    @property
    def values(self) -> np.ndarray:
        return self.samples.values

    @property
    def xmax(self) -> float:
        return self.samples.grid.stop

    def norm2(self) -> float:
        return float(integrate_values(np.abs(self.values) ** 2, self.samples.grid))

    @classmethod
    def from_function(cls, func: Callable, xmax: float, n: int,
                      constants: PhysicalConstants | None = None,
                      normalize: bool = True) -> "HalfLineState":
        grid = Grid(0.0, xmax, n)
        vals = np.asarray(func(grid.nodes), dtype=complex)
        if normalize:
            vals = vals / np.sqrt(integrate_values(np.abs(vals) ** 2, grid))
        return cls(constants or PhysicalConstants(), ComplexSamples(grid, vals))


def linear_exponential_state(lam: float = 1.0, n: int = 8001, xmax: float | None = None,
                             constants: PhysicalConstants | None = None) -> HalfLineState:
    """``2 lam^(3/2) x exp(-lam x)``, unit norm, vanishing at 0 with slope ``2 lam^(3/2)``.

    The default cutoff is where the amplitude has fallen to 1e-16 of its peak.
    """
    if xmax is None:
        xmax = 45.0 / lam
    return HalfLineState.from_function(
        lambda x: 2 * lam ** 1.5 * x * np.exp(-lam * x), xmax, n, constants,
        normalize=False)


def _momentum_amplitude(samples: ComplexSamples, weights: np.ndarray,
                        p: np.ndarray, hbar: float) -> np.ndarray:
    amps = weights * samples.values / np.sqrt(2 * np.pi * hbar)
    return exp_sum(amps, samples.nodes / hbar, p)


def _check_resolution(xgrid: Grid, pgrid: Grid, hbar: float, support: float):
    pabs = max(abs(pgrid.start), abs(pgrid.stop))
    check_phase_advance(xgrid.spacing, pabs / hbar, what="position grid at the largest |p|")
    check_phase_advance(pgrid.spacing, support / hbar, what="momentum grid for this xmax")


def momentum_density(state: HalfLineState, pgrid: Grid) -> Distribution:
    """``Pi(p) = |int_0^xmax dx exp(-ipx/hbar) psi(x) / sqrt(2 pi hbar)|^2``."""
    hbar = state.constants.hbar
    _check_resolution(state.samples.grid, pgrid, hbar, state.xmax)
    amp = _momentum_amplitude(state.samples, state.samples.grid.weights(), pgrid.nodes, hbar)
    return Distribution(pgrid, np.abs(amp) ** 2, metadata={
        "position_grid": state.samples.grid.as_dict(), "momentum_grid": pgrid.as_dict(),
        "xmax": state.xmax})


def extend_to_line(state: HalfLineState) -> ComplexSamples:
    """``Theta(x) psi(x)`` on the symmetric grid ``[-xmax, xmax]``."""
    g = state.samples.grid
    full = Grid.symmetric(g.stop, 2 * g.n - 1)
    vals = np.concatenate([np.zeros(g.n - 1, dtype=complex), state.values])
    return ComplexSamples(full, vals)


def fullline_density(samples: ComplexSamples, pgrid: Grid, hbar: float = 1.0,
                     breakpoints=()) -> Distribution:
    """Ordinary momentum density ``|F psi|^2`` of a state on the full line.

    ``breakpoints`` restart the quadrature rule at nodes where the state has
    a jump or kink, such as ``x = 0`` after a projection onto ``x > 0``.
    """
    g = samples.grid
    _check_resolution(g, pgrid, hbar, max(abs(g.start), abs(g.stop)))
    w = piecewise_weights(g, breakpoints)
    amp = _momentum_amplitude(samples, w, pgrid.nodes, hbar)
    return Distribution(pgrid, np.abs(amp) ** 2)


def naimark_density(state: HalfLineState, pgrid: Grid) -> Distribution:
    """Full-line density of the projected state ``Theta psi``."""
    return fullline_density(extend_to_line(state), pgrid, state.constants.hbar,
                            breakpoints=(0.0,))


def _tail_integral(p: np.ndarray, f: np.ndarray) -> float:
    """Integral of the fitted tail of ``f`` from the outermost node to infinity.

    Fourier densities of piecewise-smooth states fall off in integer powers
    of ``1/p``; when the fitted log-log slope is within 0.1 of an integer
    ``k`` the tail is modelled as ``c0 |p|^-k + c1 |p|^-(k+1) + c2 |p|^-(k+2)``,
    otherwise as a single power law. Returns inf for non-integrable tails.
    """
    q = np.abs(p)
    pe = q.max()
    sel = q >= 0.8 * pe
    slope, icpt = np.polyfit(np.log(q[sel]), np.log(np.abs(f[sel])), 1)
    k = -slope
    if k <= 1.05:
        return np.inf
    if abs(k - round(k)) < 0.1:
        k = round(k)
        basis = np.stack([q[sel] ** -(k + j) for j in range(3)], axis=1)
        coef, *_ = np.linalg.lstsq(basis * pe ** k, f[sel], rcond=None)
        coef = coef * pe ** k
        return float(sum(c * pe ** (1 - k - j) / (k + j - 1) for j, c in enumerate(coef)))
    sign = np.sign(f[sel][np.argmax(q[sel])])
    return float(sign * np.exp(icpt) * pe ** (1 - k) / (k - 1))


def moment(dist: Distribution, n: int, tail: str = "error",
           decay: float = 1e-12) -> float:
    """``int p^n Pi(p) dp`` over the grid.

    With ``tail="error"`` the integrand must have fallen below ``decay`` of
    its peak at both edges, otherwise :class:`TailError` reports the
    estimated missing mass. With ``tail="powerlaw"`` the tails are fitted
    (see :func:`_tail_integral`) and integrated analytically to infinity;
    densities of states with a kink at x = 0 decay only like ``p^-4`` and
    need this.
    """
    p = dist.nodes
    f = p ** n * dist.density
    body = float(integrate_values(f, dist.grid))
    peak = np.abs(f).max()
    edges = max(abs(f[0]), abs(f[-1]))
    if edges <= decay * peak:
        return body
    corrections = [_tail_integral(p[side], f[side]) for side in (p < 0, p > 0)]
    tail_mass = float(np.sum(np.abs(corrections)))
    if tail != "powerlaw" or not np.isfinite(tail_mass):
        raise TailError(
            f"p^{n} Pi(p) is still {edges / peak:.3g} of its peak at the grid edge; "
            f"estimated tail mass {tail_mass:.3g}", tail_mass=tail_mass)
    return body + float(np.sum(corrections))


def apply_momentum(state: HalfLineState, power: int = 1) -> np.ndarray:
    """``(-i hbar d/dx)^power psi`` on the grid (one-sided stencils at the ends)."""
    if power > 4:
        raise UnsupportedError("momentum powers above 4 are not supported")
    vals = np.asarray(state.values)
    h = state.samples.grid.spacing
    for _ in range(power):
        vals = -1j * state.constants.hbar * differentiate(vals, h, 6)
    return vals


def operator_moment(state: HalfLineState, n: int) -> complex:
    """``<psi| p^n psi>`` with ``p = -i hbar d/dx`` on ``[0, xmax]``.

    For ``n = 3`` and ``psi'(0) != 0`` the result has imaginary part
    ``hbar^3 |psi'(0)|^2 / 2`` even though ``psi(0) = 0``.
    """
    if n < 0:
        raise PreconditionError("moment order must be non-negative")
    pn = apply_momentum(state, n)
    return complex(integrate_values(np.conj(state.values) * pn, state.samples.grid))


def overlap_kernel_check(f: Callable, g: Callable, pgrid: Grid,
                         xmax: float, nx: int | None = None,
                         constants: PhysicalConstants | None = None,
                         rel_tol: float = 1e-4) -> CheckReport:
    """Smeared non-orthogonality of half-line plane waves.

    Left side: ``<u, v>`` on ``x > 0`` with ``u = int f(p) psi_p dp`` and
    ``v = int g(p) psi_p dp``. Right side:
    ``1/2 int conj(f) g dp + (i / 2 pi) PV int int conj(f(p')) g(p) / (p - p')``,
    with the inner principal value taken by symmetric pairing about each
    outer node. ``f`` and ``g`` must be negligible outside ``pgrid``.
    """
    c = constants or PhysicalConstants()
    hbar = c.hbar
    p = pgrid.nodes
    h = pgrid.spacing
    pabs = max(abs(pgrid.start), abs(pgrid.stop))
    if nx is None:
        nx = int(np.ceil(16 * xmax * pabs / (np.pi * hbar))) + 1
    xgrid = Grid(0.0, xmax, nx)
    check_phase_advance(xgrid.spacing, pabs / hbar, what="position grid for the windows")

    fv, gv = np.asarray(f(p), dtype=complex), np.asarray(g(p), dtype=complex)
    w = pgrid.weights() / np.sqrt(2 * np.pi * hbar)
    u = exp_sum(w * fv, p / hbar, xgrid.nodes, sign=+1)
    v = exp_sum(w * gv, p / hbar, xgrid.nodes, sign=+1)
    lhs = complex(integrate_values(np.conj(u) * v, xgrid))

    delta_term = 0.5 * complex(integrate_values(np.conj(fv) * gv, pgrid))
    inner = np.empty(pgrid.n, dtype=complex)
    for j, s in enumerate(p):
        k = int(np.ceil(max(s - pgrid.start, pgrid.stop - s) / h)) + 8
        sym = Grid(s - k * h, s + k * h, 2 * k + 1)
        fs = ComplexSamples(sym, np.conj(f(sym.nodes)))
        inner[j] = -principal_value(fs, s)  # PV int conj f(p') / (p - p') dp'
    pv_term = 1j / (2 * np.pi) * complex(integrate_values(gv * inner, pgrid))
    rhs = delta_term + pv_term
    diff = abs(lhs - rhs)
    return CheckReport("kernel", diff / abs(lhs), rel_tol,
                       details="smeared half-line overlap vs delta + principal-part kernel",
                       values={"lhs": lhs, "rhs": rhs, "delta_term": delta_term,
                               "pv_term": pv_term})


def gaussian_window(center: float, width: float, phase: float = 0.0) -> Callable:
    """Smooth test window ``exp(-(p - center)^2 / 4 width^2 + i phase p)``."""
    def window(p):
        p = np.asarray(p, dtype=float)
        return np.exp(-(p - center) ** 2 / (4 * width ** 2) + 1j * phase * p)
    return window
