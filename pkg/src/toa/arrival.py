"""Time of arrival at x = 0 for a free particle.

The arrival-time operator is ``T = -(m/2)(x p^-1 + p^-1 x)``. In the momentum
representation it is the differential expression
``(i hbar m / 2)(1/p^2 - (2/p) d/dp)``; in each energy channel it is
``-i hbar d/dE``. Its probability density is

    Pi(t) = sum_pm | int_{pm p > 0} dp sqrt(|p| / 2 pi m hbar)
                     exp(-i p^2 t / 2 m hbar) psi(p) |^2

and is evaluated here by direct quadrature over the momentum grid.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedError, NotInDomainError, PreconditionError
from .numerics import (ComplexSamples, Grid, check_phase_advance, differentiate,
                       envelope_cutoff, exp_sum, half_fourier, integrate_values,
                       quadrature_weights)
from .results import CheckReport, Distribution
from .states import (EnergyChannels, MomentumState, PhysicalConstants,
                     evolve_free, to_energy_channels)

__all__ = [
    "Distribution", "CheckReport", "TimeWindow", "domain_ratio", "in_domain",
    "tab_expression", "apply_tab_momentum", "tab_expectation", "deficiency_vector",
    "deficiency_check", "time_grid", "arrival_window", "channel_amplitudes",
    "kijowski_distribution", "kijowski_energy_distribution", "covariance_check", "position_amplitude",
    "flux", "arrival_mean_flux", "presence_mean", "second_moment_check",
]

log = logging.getLogger(__name__)

#: |psi(p)| / |p|^(3/2) near p = 0 must fall below this or decrease towards 0
DOMAIN_THRESHOLD = 1e-3
#: phase advance per time step allowed by the time-grid guard
TIME_PHASE_LIMIT = np.pi / 4


def domain_ratio(state: MomentumState, count: int = 5):
    """``|psi(p)| / |p|^(3/2)`` at the ``count`` nodes on each side nearest 0.

    Returned with the node nearest 0 first.
    """
    half = state.grid.n // 2
    p = state.p
    psi = np.abs(state.values)
    right = slice(half, half + count)
    left = slice(half - 1, half - 1 - count, -1)
    return (psi[right] / np.abs(p[right]) ** 1.5,
            psi[left] / np.abs(p[left]) ** 1.5)


def in_domain(state: MomentumState, threshold: float = DOMAIN_THRESHOLD) -> bool:
    """Numerical test of ``psi(p) / p^(3/2) -> 0`` as ``p -> 0``.

    Passes when the ratio is below ``threshold`` near 0 or strictly
    decreasing towards 0 on both sides.
    """
    for ratio in domain_ratio(state):
        if ratio.max() < threshold:
            continue
        if not np.all(np.diff(ratio) > 0):
            return False
    return True


def _require_domain(state: MomentumState):
    if not in_domain(state):
        r_plus, r_minus = domain_ratio(state)
        raise NotInDomainError(
            "state violates psi(p)/|p|^(3/2) -> 0 near p = 0 "
            f"(ratios at nearest nodes {r_plus[0]:.3g}, {r_minus[0]:.3g})")


def _side_derivative(values: np.ndarray, h: float, p: np.ndarray) -> np.ndarray:
    # differentiate p<0 and p>0 separately, never across p = 0
    out = np.empty_like(values)
    for mask in (p < 0, p > 0):
        if mask.sum() >= 5:
            out[mask] = differentiate(values[mask], h, 6)
        elif mask.any():
            out[mask] = np.gradient(values[mask], h) if mask.sum() > 1 else 0
    return out


def tab_expression(samples: ComplexSamples,
                   constants: PhysicalConstants = PhysicalConstants(),
                   form: str = "direct") -> ComplexSamples:
    """Apply the arrival-time differential expression to momentum samples.

    ``form="direct"`` evaluates ``(i hbar m / 2)(psi/p^2 - (2/p) psi')``.
    ``form="symmetric"`` evaluates the equivalent
    ``-i hbar m sgn(p) |p|^(-1/2) d/dp (|p|^(-1/2) psi)``, which is far more
    accurate when ``psi`` behaves like ``sqrt|p|`` near 0. A node at p = 0,
    if present, gets the value 0 and is logged.
    """
    hbar, m = constants.hbar, constants.mass
    p = samples.nodes
    h = samples.grid.spacing
    psi = samples.values
    zero = p == 0
    pz = np.where(zero, 1.0, p)
    if form == "direct":
        dpsi = _side_derivative(psi, h, p)
        out = 0.5j * hbar * m * (psi / pz ** 2 - 2 * dpsi / pz)
    elif form == "symmetric":
        root = np.sqrt(np.abs(pz))
        du = _side_derivative(psi / root, h, p)
        out = -1j * hbar * m * np.sign(pz) * du / root
    else:
        raise ValueError(f"unknown form {form!r}")
    if zero.any():
        log.warning("p = 0 node excluded from the arrival-time expression")
        out = np.where(zero, 0.0, out)
    return samples.with_values(out)


def apply_tab_momentum(state: MomentumState, form: str = "direct",
                       check_domain: bool = True) -> ComplexSamples:
    """``T psi`` in the momentum representation, after the domain test."""
    if check_domain:
        _require_domain(state)
    return tab_expression(state.samples, state.constants, form)


def tab_expectation(state: MomentumState, form: str = "direct") -> complex:
    """``<psi|T psi>``; the imaginary part is a symmetry diagnostic."""
    tpsi = apply_tab_momentum(state, form).values
    return complex(integrate_values(np.conj(state.values) * tpsi, state.grid))


def deficiency_vector(p: np.ndarray, sign: int = +1,
                      constants: PhysicalConstants = PhysicalConstants(),
                      growing: bool = False) -> np.ndarray:
    """``Theta(sign p) sqrt(sign p) exp(-p^2 / 2 m hbar)``.

    With ``growing=True`` the exponent flips sign, giving the formal
    solution for eigenvalue ``-i``.
    """
    s = -1.0 if growing else 1.0
    mh = constants.mass * constants.hbar
    q = sign * np.asarray(p, dtype=float)
    with np.errstate(over="ignore"):
        return np.where(q > 0, np.sqrt(np.abs(q)) * np.exp(-s * q * q / (2 * mh)), 0.0)


def _residual(samples: ComplexSamples, constants, eigenvalue) -> float:
    tpsi = tab_expression(samples, constants, "symmetric").values
    res = tpsi - eigenvalue * samples.values
    num = integrate_values(np.abs(res) ** 2, samples.grid)
    den = integrate_values(np.abs(samples.values) ** 2, samples.grid)
    return float(np.sqrt(num / den))


def deficiency_check(constants: PhysicalConstants = PhysicalConstants(),
                     pmin: float = 1e-3, pmax: float = 8.0, n: int = 4096,
                     cutoffs=(1.0, 2.0, 3.0, 4.0, 5.0, 6.0),
                     tolerance: float = 1e-6, bound: float = 1e6) -> CheckReport:
    """Eigenvectors of the adjoint: two for ``+i``, none square-integrable for ``-i``.

    Residuals ``||T psi - i psi|| / ||psi||`` are measured for both channel
    vectors on ``[pmin, pmax]`` and its mirror. For the ``-i`` candidate the
    partial norms over ``[0, P]`` must grow with ``P`` and exceed ``bound``
    at the last cutoff.
    """
    plus = Grid(pmin, pmax, n)
    minus = Grid(-pmax, -pmin, n)
    res_plus = _residual(ComplexSamples(plus, deficiency_vector(plus.nodes, +1, constants)),
                         constants, 1j)
    res_minus = _residual(ComplexSamples(minus, deficiency_vector(minus.nodes, -1, constants)),
                          constants, 1j)
    # the growing candidate does solve T f = -i f, it just is not in L^2
    cand = Grid(pmin, 4.0, n)
    res_cand = _residual(
        ComplexSamples(cand, deficiency_vector(cand.nodes, +1, constants, growing=True)),
        constants, -1j)
    norms = []
    for cut in cutoffs:
        g = Grid(0.0, cut, n)
        f = deficiency_vector(g.nodes, +1, constants, growing=True)
        norms.append(float(integrate_values(np.abs(f) ** 2, g)))
    grows = bool(np.all(np.diff(norms) > 0) and norms[-1] > bound)
    measured = max(res_plus, res_minus) if grows else float("inf")
    return CheckReport(
        "deficiency", measured, tolerance,
        details=("psi_+ and psi_- are +i eigenvectors; the -i candidate has "
                 f"partial norms {', '.join(f'{v:.3g}' for v in norms)}"),
        values={"residual_plus": res_plus, "residual_minus": res_minus,
                "residual_minus_i_candidate": res_cand,
                "candidate_norms": norms, "cutoffs": list(cutoffs),
                "candidate_diverges": grows})


@dataclass(frozen=True)
class TimeWindow:
    tmin: float
    tmax: float

    def grid(self, state: MomentumState, nt: int | None = None) -> Grid:
        return time_grid(state, self.tmin, self.tmax, nt)


def _time_step_limit(state: MomentumState) -> float:
    c = state.constants
    return TIME_PHASE_LIMIT * 2 * c.mass * c.hbar / state.pmax ** 2


def time_grid(state: MomentumState, tmin: float, tmax: float,
              nt: int | None = None) -> Grid:
    """Time grid on ``[tmin, tmax]``; the default ``nt`` meets the phase guard with margin 2."""
    if nt is None:
        nt = int(np.ceil(2 * (tmax - tmin) / _time_step_limit(state))) + 1
        nt = max(nt, 201)
    return Grid(tmin, tmax, nt)


def arrival_window(state: MomentumState, nsigma: float = 8.0,
                   cap: float = 1e3) -> tuple[float, float]:
    """Time window holding essentially all arrivals at x = 0.

    Each momentum channel is treated on its own: the classical estimate
    ``-m x / p`` is taken over ``x`` within ``nsigma`` position spreads of
    that channel's mean and ``p`` over its 1e-12 density support. The
    result is clipped to ``[-cap, cap]``.
    """
    m = state.constants.mass
    p = state.p
    dens = np.abs(state.values) ** 2
    peak = dens.max()
    ts = []
    for side in (p > 0, p < 0):
        sel = side & (dens > 1e-12 * peak)
        if not sel.any():
            continue
        part = state.with_values(np.where(side, state.values, 0))
        scale = np.sqrt(part.norm2())
        part = part.with_values(part.values / scale)
        xbar = part.mean_position()
        dx = max(part.position_spread(), state.constants.hbar / state.pmax)
        xs = np.array([xbar - nsigma * dx, xbar + nsigma * dx])
        ps = p[sel]
        for pe in (ps.min(), ps.max()):
            ts.extend(-m * xs / pe)
    ts = np.clip(ts, -cap, cap)
    lo, hi = float(min(ts)), float(max(ts))
    pad = 0.05 * (hi - lo) + 1e-3
    return lo - pad, hi + pad


def _check_time_grid(state: MomentumState, tgrid: Grid):
    c = state.constants
    check_phase_advance(tgrid.spacing, state.pmax ** 2 / (2 * c.mass * c.hbar),
                        limit=TIME_PHASE_LIMIT, what="time grid")
    tabs = max(abs(tgrid.start), abs(tgrid.stop))
    check_phase_advance(state.grid.spacing, state.pmax * tabs / (c.mass * c.hbar),
                        what="momentum grid at the largest |t|")


def channel_amplitudes(state: MomentumState, t) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel amplitudes whose squared moduli add up to ``Pi(t)``."""
    c = state.constants
    half = state.grid.n // 2
    k = state.p[half:]
    w = quadrature_weights(half) * state.grid.spacing
    root = np.sqrt(k / (2 * np.pi * c.mass * c.hbar))
    phase = k ** 2 / (2 * c.mass * c.hbar)
    t = np.asarray(t, dtype=float)
    a_plus = exp_sum(w * root * state.values[half:], phase, t)
    a_minus = exp_sum(w * root * state.values[:half][::-1], phase, t)
    return a_plus, a_minus


def kijowski_distribution(state: MomentumState, tgrid: Grid | None = None,
                          check: bool = True) -> Distribution:
    """Arrival-time density of ``state`` at x = 0 on ``tgrid``."""
    if tgrid is None:
        tgrid = time_grid(state, *arrival_window(state))
    if check:
        _check_time_grid(state, tgrid)
    a_plus, a_minus = channel_amplitudes(state, tgrid.nodes)
    d_plus = np.abs(a_plus) ** 2
    d_minus = np.abs(a_minus) ** 2
    lo, hi = envelope_cutoff(state.values, state.p)
    meta = {
        "representation": "momentum",
        "plus": d_plus, "minus": d_minus,
        "total_plus": float(integrate_values(d_plus, tgrid)),
        "total_minus": float(integrate_values(d_minus, tgrid)),
        "momentum_grid": state.grid.as_dict(),
        "momentum_envelope": [lo, hi],
        "time_grid": tgrid.as_dict(),
    }
    return Distribution(tgrid, d_plus + d_minus, metadata=meta)


def kijowski_energy_distribution(channels: EnergyChannels, tgrid: Grid,
                                 n_energy: int = 8193) -> Distribution:
    """Same density from the energy channels via ``half_fourier``.

    The channels are resampled on a uniform energy grid on
    ``[0, kmax^2 / 2m]``; this route is independent of the momentum-space
    quadrature and serves as a cross-check.
    """
    m, hbar = channels.constants.mass, channels.constants.hbar
    egrid = Grid(0.0, channels.kgrid.stop ** 2 / (2 * m), n_energy)
    plus, minus = channels.at_energies(egrid.nodes)
    t = tgrid.nodes
    a_plus = half_fourier(ComplexSamples(egrid, plus), t, hbar)
    a_minus = half_fourier(ComplexSamples(egrid, minus), t, hbar)
    d_plus, d_minus = np.abs(a_plus) ** 2, np.abs(a_minus) ** 2
    return Distribution(tgrid, d_plus + d_minus, metadata={
        "representation": "energy", "plus": d_plus, "minus": d_minus,
        "energy_grid": egrid.as_dict()})


def covariance_check(state: MomentumState, tau: float, tgrid: Grid | None = None,
                     rel_tol: float = 1e-4) -> CheckReport:
    """``Pi_{U(tau) psi}(t - tau)`` against ``Pi_psi(t)`` on ``tgrid``."""
    if tgrid is None:
        tgrid = time_grid(state, *arrival_window(state))
    ref = kijowski_distribution(state, tgrid)
    if tau == 0:
        diff = 0.0
    else:
        moved = kijowski_distribution(evolve_free(state, tau), tgrid.shifted(-tau))
        diff = float(np.max(np.abs(moved.density - ref.density)))
    peak = float(ref.density.max())
    return CheckReport("covariance", diff / peak, rel_tol,
                       details=f"sup |Pi_U(tau)psi(t - tau) - Pi_psi(t)| / max Pi, tau={tau}",
                       values={"tau": tau, "sup_abs": diff, "max_density": peak})


def position_amplitude(state: MomentumState, t, x: float = 0.0):
    """``psi(x, t)`` and ``d psi / dx (x, t)`` of the freely evolving state."""
    c = state.constants
    p = state.p
    w = state.grid.weights() / np.sqrt(2 * np.pi * c.hbar)
    base = w * state.values * np.exp(1j * p * x / c.hbar)
    phase = p ** 2 / (2 * c.mass * c.hbar)
    t = np.asarray(t, dtype=float)
    psi = exp_sum(base, phase, t)
    dpsi = exp_sum(base * 1j * p / c.hbar, phase, t)
    return psi, dpsi


def flux(state: MomentumState, tgrid: Grid) -> np.ndarray:
    """Probability current ``J(0, t) = (hbar/m) Im(conj(psi) d psi/dx)``."""
    _check_time_grid(state, tgrid)
    psi, dpsi = position_amplitude(state, tgrid.nodes)
    c = state.constants
    return c.hbar / c.mass * np.imag(np.conj(psi) * dpsi)


def arrival_mean_flux(state: MomentumState, tgrid: Grid | None = None,
                      rel_tol: float = 1e-3) -> tuple[float, CheckReport]:
    """Flux-weighted mean arrival time, checked against ``<psi|T psi>``.

    Returns the flux value and a report comparing it with the operator
    expectation. The comparison is relative to ``max(|t|, hbar/<E>)``.
    """
    expect = tab_expectation(state)  # also enforces the domain condition
    if tgrid is None:
        tgrid = time_grid(state, *arrival_window(state))
    j = flux(state, tgrid)
    den = float(integrate_values(j, tgrid))
    if abs(den) < 1e-6:
        raise IllConditionedError(f"net flux through x=0 is {den:.3g}")
    t_flux = float(integrate_values(j * tgrid.nodes, tgrid)) / den
    energy = float(np.real(state.expect(state.p ** 2 / (2 * state.constants.mass))))
    scale = max(abs(t_flux), abs(expect.real), state.constants.hbar / energy)
    diff = abs(t_flux - expect.real)
    report = CheckReport("flux-equality", diff / scale, rel_tol,
                         details="flux mean vs <psi|T psi>",
                         values={"t_flux": t_flux, "t_operator": expect.real,
                                 "operator_imag": expect.imag, "net_flux": den})
    return t_flux, report


def _require_positive_momenta(state: MomentumState, skip: int = 5):
    mag = np.abs(state.values)
    peak = mag.max()
    half = state.grid.n // 2
    bad = mag[:half + skip]
    if bad.max() >= 1e-12 * peak:
        raise PreconditionError(
            "presence time needs |psi(p)| < 1e-12 of its peak for p <= "
            f"{state.p[half + skip - 1]:.3g}")


def presence_mean(state: MomentumState, tgrid: Grid | None = None,
                  rel_tol: float = 1e-3) -> tuple[float, CheckReport]:
    """Average presence time at x = 0 for a state with only positive momenta.

    Evaluates ``-(m/2) <p^-2 x + x p^-2> / <p^-1>`` with ``x = i hbar d/dp``
    and cross-checks it against the time average of ``|psi(0, t)|^2``.
    """
    _require_positive_momenta(state)
    c = state.constants
    half = state.grid.n // 2
    p = state.p[half:]
    psi = state.values[half:]
    kgrid = Grid(state.grid.spacing / 2, state.pmax, half)
    dpsi = differentiate(psi, kgrid.spacing, 6)
    sym = 1j * c.hbar * (2 * dpsi / p ** 2 - 2 * psi / p ** 3)
    num = complex(integrate_values(np.conj(psi) * sym, kgrid))
    den = float(integrate_values(np.abs(psi) ** 2 / p, kgrid))
    if den < 1e-12:
        raise IllConditionedError(f"<p^-1> = {den:.3g} is too small")
    t_op = -0.5 * c.mass * num.real / den

    if tgrid is None:
        tgrid = time_grid(state, *arrival_window(state))
    _check_time_grid(state, tgrid)
    amp, _ = position_amplitude(state, tgrid.nodes)
    dens = np.abs(amp) ** 2
    t_int = float(integrate_values(dens * tgrid.nodes, tgrid)
                  / integrate_values(dens, tgrid))
    scale = max(abs(t_op), abs(t_int), c.hbar / float(np.real(
        state.expect(state.p ** 2 / (2 * c.mass)))))
    report = CheckReport("presence-time", abs(t_op - t_int) / scale, rel_tol,
                         details="operator quotient vs time average of |psi(0,t)|^2",
                         values={"t_operator": t_op, "t_integral": t_int,
                                 "numerator_imag": num.imag})
    return t_op, report


def second_moment_check(state: MomentumState, tgrid: Grid | None = None,
                        rel_tol: float = 1e-3, tail_limit: float = 1e-6) -> CheckReport:
    """``int t^2 Pi dt`` against ``||T psi||^2`` for a state in the domain."""
    tpsi = apply_tab_momentum(state)
    op = float(integrate_values(np.abs(tpsi.values) ** 2, state.grid))
    if tgrid is None:
        tgrid = time_grid(state, *arrival_window(state))
    dist = kijowski_distribution(state, tgrid)
    dist.require_decay(2, tail_limit)
    mom = dist.moment(2)
    return CheckReport("second-moment", abs(mom - op) / op, rel_tol,
                       details="int t^2 Pi(t) dt vs ||T psi||^2",
                       values={"second_moment_dist": mom, "second_moment_operator": op,
                               "normalization": dist.total})
