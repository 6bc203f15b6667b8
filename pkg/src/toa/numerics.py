"""Grids, quadrature and oscillatory sums shared by the physics modules.

Everything here works on uniform grids. Quadrature is the trapezoidal rule
with Gregory end corrections (exact for polynomials up to degree five at each
end), so smooth integrands converge like ``h**6`` and periodic or rapidly
decaying ones spectrally.
"""
from __future__ import annotations

import functools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli

from .errors import InvalidGridError, PreconditionError, ResolutionError

#: number of corrected end weights; gives an O(h^6) composite rule
GREGORY_ORDER = 6
#: rows of an oscillatory matrix evaluated per block
CHUNK = 256


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n`` nodes on ``[start, stop]``."""

    start: float
    stop: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidGridError(f"grid needs n >= 2 nodes, got {self.n}")
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise InvalidGridError("grid bounds must be finite")
        if not self.stop > self.start:
            raise InvalidGridError(
                f"grid stop ({self.stop}) must exceed start ({self.start})")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "stop", float(self.stop))

    @property
    def spacing(self) -> float:
        return (self.stop - self.start) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n)

    @classmethod
    def symmetric(cls, half_width: float, n: int) -> "Grid":
        return cls(-half_width, half_width, n)

    @classmethod
    def from_spacing(cls, start: float, spacing: float, n: int) -> "Grid":
        return cls(start, start + spacing * (n - 1), n)

    def shifted(self, delta: float) -> "Grid":
        return Grid(self.start + delta, self.stop + delta, self.n)

    def weights(self) -> np.ndarray:
        return quadrature_weights(self.n) * self.spacing

    def as_dict(self) -> dict:
        return {"start": self.start, "stop": self.stop, "n": self.n,
                "spacing": self.spacing}


@dataclass(frozen=True)
class ComplexSamples:
    """Complex values of a function sampled on the nodes of ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n,):
            raise InvalidGridError(
                f"expected {self.grid.n} samples, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @classmethod
    def from_function(cls, grid: Grid, func) -> "ComplexSamples":
        return cls(grid, func(grid.nodes))

    def with_values(self, values) -> "ComplexSamples":
        return ComplexSamples(self.grid, values)


@functools.lru_cache(maxsize=None)
def _gregory_corrections(k: int) -> tuple:
    # Euler-Maclaurin: sum_j c_j j^m must reproduce B_{m+1}/(m+1) for odd m
    if k <= 1:
        return (0.0,)
    bern = bernoulli(k + 1)
    mat = np.array([[float(j) ** m for j in range(k)] for m in range(k)])
    rhs = np.array([bern[m + 1] / (m + 1) if m % 2 else 0.0
                    for m in range(k)])
    return tuple(np.linalg.solve(mat, rhs))


def quadrature_weights(n: int, order: int = GREGORY_ORDER) -> np.ndarray:
    """Unit-spacing weights of the end-corrected trapezoidal rule.

    The number of corrected weights per end is reduced automatically on
    short grids; with ``n < 4`` this is the plain trapezoidal rule.
    """
    if n < 2:
        raise InvalidGridError(f"quadrature needs n >= 2 nodes, got {n}")
    k = max(1, min(order, n // 2))
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    corr = np.asarray(_gregory_corrections(k))
    w[:k] += corr
    w[n - k:] += corr[::-1]
    return w


def piecewise_weights(grid: Grid, breakpoints=()) -> np.ndarray:
    """Quadrature weights with the composite rule restarted at each breakpoint.

    Breakpoints must coincide with grid nodes; use them where the integrand
    has a known jump or kink.
    """
    x = grid.nodes
    cuts = [0]
    for b in sorted(breakpoints):
        i = int(round((b - grid.start) / grid.spacing))
        if not 0 < i < grid.n - 1 or abs(x[i] - b) > 1e-9 * max(1.0, abs(b)):
            raise InvalidGridError(f"breakpoint {b} is not an interior node")
        cuts.append(i)
    cuts.append(grid.n - 1)
    w = np.zeros(grid.n)
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a:
            w[a:b + 1] += quadrature_weights(b - a + 1)
    return w * grid.spacing


def integrate(samples: ComplexSamples) -> complex:
    """Composite quadrature of sampled values over their grid."""
    return complex(np.dot(samples.grid.weights(), samples.values))


def integrate_values(values: np.ndarray, grid: Grid, axis: int = -1):
    """Quadrature of ``values`` along ``axis`` (may hold several rows)."""
    values = np.asarray(values)
    if values.shape[axis] != grid.n:
        raise InvalidGridError("values do not match the grid length")
    return np.tensordot(values, grid.weights(), axes=([axis], [0]))


def cumulative(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Running trapezoidal integral starting at 0 on the first node."""
    values = np.asarray(values)
    out = np.zeros(values.shape, dtype=np.result_type(values, float))
    out[1:] = np.cumsum(0.5 * (values[1:] + values[:-1])) * grid.spacing
    return out


def max_workers() -> int:
    """Thread cap from ``TOA_THREADS`` (unset or 0 means one per CPU)."""
    try:
        requested = int(os.environ.get("TOA_THREADS", "0"))
    except ValueError:
        requested = 0
    if requested <= 0:
        requested = os.cpu_count() or 1
    return requested


def exp_sum(amplitudes: np.ndarray, phases: np.ndarray,
            freqs: np.ndarray, sign: int = -1) -> np.ndarray:
    """Dense sums ``sum_j a_j exp(sign * 1j * f_k * phi_j)`` for every k.

    Rows are processed in fixed blocks so that results do not depend on the
    number of threads.
    """
    amplitudes = np.asarray(amplitudes, dtype=complex)
    phases = np.asarray(phases, dtype=float)
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    out = np.empty(freqs.shape, dtype=complex)
    flat = freqs.ravel()
    res = out.reshape(-1)

    def block(i):
        f = flat[i:i + CHUNK]
        res[i:i + CHUNK] = np.exp((sign * 1j) * np.outer(f, phases)) @ amplitudes

    starts = range(0, flat.size, CHUNK)
    workers = min(max_workers(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(block, starts))
    else:
        for i in starts:
            block(i)
    return out


def check_phase_advance(spacing: float, rate: float, limit: float = np.pi,
                        what: str = "grid"):
    """Raise ResolutionError when ``spacing * rate`` exceeds ``limit``."""
    advance = abs(spacing * rate)
    if advance > limit:
        raise ResolutionError(
            f"{what}: phase advance per step {advance:.3g} rad exceeds "
            f"{limit:.3g} rad; refine the grid")
    return advance


def half_fourier(samples: ComplexSamples, t, hbar: float = 1.0):
    """Truncated transform ``int_0^Emax dE exp(-iEt/hbar) psi(E) / sqrt(2 pi hbar)``.

    ``t`` may be a scalar or an array. A resolution error is raised when the
    phase advances by more than pi per grid step at the largest ``|t|``;
    keep it below pi/4 for ~1e-6 relative accuracy.
    """
    grid = samples.grid
    t_arr = np.asarray(t, dtype=float)
    if t_arr.size:
        check_phase_advance(grid.spacing, np.max(np.abs(t_arr)) / hbar,
                            what="half_fourier energy grid")
    amps = grid.weights() * samples.values / np.sqrt(2 * np.pi * hbar)
    out = exp_sum(amps, grid.nodes / hbar, t_arr.ravel())
    if t_arr.ndim == 0:
        return complex(out[0])
    return out.reshape(t_arr.shape)


def fd_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Fornberg finite-difference weights for derivatives 0..m at ``z``."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def differentiate(values: np.ndarray, h: float, order: int = 6) -> np.ndarray:
    """Finite-difference derivative of raw values with node spacing ``h``."""
    n = values.size
    width = min(order + 1, n)
    if width % 2 == 0:
        width -= 1
    half = width // 2
    offsets = np.arange(-half, half + 1, dtype=float)
    central = fd_weights(0.0, offsets, 1)
    values = np.asarray(values)
    out = np.zeros(n, dtype=np.result_type(values, float))
    if n > 2 * half:
        out[half:n - half] = sum(
            w * values[half + int(o):n - half + int(o)]
            for w, o in zip(central, offsets))
    # one-sided stencils of the same width near the ends
    edge = np.arange(width, dtype=float)
    for i in range(min(half, n)):
        w = fd_weights(float(i), edge, 1)
        out[i] = w @ values[:width]
        w_r = fd_weights(float(width - 1 - i), edge, 1)
        out[n - 1 - i] = w_r @ values[n - width:]
    return out / h


def derivative(samples: ComplexSamples, order: int = 6) -> ComplexSamples:
    """First derivative by finite differences.

    Central stencils of accuracy ``order`` in the interior, one-sided
    stencils with the same number of points at the ends. Requires n >= 5.
    """
    if samples.grid.n < 5:
        raise InvalidGridError("derivative needs at least 5 nodes")
    vals = differentiate(samples.values, samples.grid.spacing, order)
    return samples.with_values(vals)


def principal_value(samples: ComplexSamples, s: float):
    """Cauchy principal value of ``int f(x) / (x - s) dx`` over the grid.

    The grid must be symmetric about ``s`` with ``s`` itself a node. Nodes
    ``s + u`` and ``s - u`` are paired so the singular parts cancel; the
    paired integrand ``(f(s+u) - f(s-u)) / u`` is finite at ``u = 0`` where
    it equals ``2 f'(s)``.
    """
    grid = samples.grid
    h = grid.spacing
    tol = 1e-9 * max(1.0, abs(s), abs(grid.start), abs(grid.stop))
    if grid.n % 2 == 0 or abs(0.5 * (grid.start + grid.stop) - s) > tol:
        raise PreconditionError(
            f"grid [{grid.start}, {grid.stop}] with n={grid.n} is not "
            f"symmetric about s={s} with a node at s")
    f = samples.values
    mid = grid.n // 2
    half = grid.n - mid  # nodes on [0, half-width]
    right = f[mid:]
    left = f[mid::-1]
    u = h * np.arange(half)
    paired = np.empty(half, dtype=complex)
    paired[1:] = (right[1:] - left[1:]) / u[1:]
    # f'(s) from the same paired differences, so an even f gives exactly 0
    k = min(3, half - 1)
    w = fd_weights(0.0, np.arange(-k, k + 1, dtype=float), 1)[k + 1:]
    paired[0] = 2 * np.dot(w, right[1:k + 1] - left[1:k + 1]) / h
    val = complex(np.dot(quadrature_weights(half) * h, paired))
    return val.real if val.imag == 0.0 else val


def envelope_cutoff(values: np.ndarray, nodes: np.ndarray,
                    rel: float = 1e-12):
    """Outermost nodes where ``|values|`` still exceeds ``rel`` of its peak."""
    mag = np.abs(values)
    peak = mag.max()
    if peak == 0:
        return float(nodes[0]), float(nodes[-1])
    idx = np.nonzero(mag >= rel * peak)[0]
    return float(nodes[idx[0]]), float(nodes[idx[-1]])
