"""Result containers: sampled probability densities and check reports."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import PreconditionError, TailError
from .numerics import Grid, integrate_values

#: densities may dip below zero by this much from cancellation
NEG_TOL = 1e-14


@dataclass(frozen=True)
class Distribution:
    """A probability density sampled on ``grid`` (time or momentum)."""

    grid: Grid
    density: np.ndarray
    total: float = float("nan")
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        dens = np.asarray(self.density, dtype=float)
        if dens.shape != (self.grid.n,):
            raise PreconditionError("density does not match grid length")
        if dens.size and dens.min() < -NEG_TOL * max(dens.max(), 1.0):
            raise PreconditionError("density has negative entries")
        dens = np.clip(dens, 0.0, None)
        dens.setflags(write=False)
        object.__setattr__(self, "density", dens)
        if np.isnan(self.total):
            object.__setattr__(self, "total", float(integrate_values(dens, self.grid)))

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def peak(self) -> float:
        """Location of the maximum, refined by a parabola through 3 nodes."""
        i = int(np.argmax(self.density))
        x = self.nodes
        if 0 < i < self.grid.n - 1:
            y0, y1, y2 = self.density[i - 1:i + 2]
            den = y0 - 2 * y1 + y2
            if den != 0:
                return float(x[i] + 0.5 * self.grid.spacing * (y0 - y2) / den)
        return float(x[i])

    def moment(self, n: int, normalized: bool = False) -> float:
        val = float(integrate_values(self.nodes ** n * self.density, self.grid))
        return val / self.total if normalized else val

    def mean(self) -> float:
        return self.moment(1, normalized=True)

    def edge_fraction(self, n: int = 0, fraction: float = 0.02) -> float:
        """Share of ``int x^n rho`` carried by the outermost ``fraction`` of the grid."""
        x = self.nodes
        integrand = np.abs(x ** n * self.density)
        total = float(integrate_values(integrand, self.grid))
        if total == 0:
            return 0.0
        k = max(2, int(fraction * self.grid.n))
        h = self.grid.spacing
        edge = (integrand[:k].sum() + integrand[-k:].sum()) * h
        return float(edge / total)

    def require_decay(self, n: int = 0, limit: float = 1e-6):
        frac = self.edge_fraction(n)
        if frac > limit:
            raise TailError(
                f"x^{n}-weighted density keeps a fraction {frac:.3g} > {limit:g} "
                "of its integral at the grid edges; widen the grid", tail_mass=frac)
        return frac


@dataclass(frozen=True)
class CheckReport:
    """Outcome of an invariant check.

    ``passed`` is ``measured <= tolerance`` for ``kind="max"`` (a discrepancy
    bound) and ``measured >= tolerance`` for ``kind="min"`` (an effect that
    must be present).
    """

    name: str
    measured: float
    tolerance: float
    details: str = ""
    kind: str = "max"
    values: dict = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        m = self.measured
        if not np.isfinite(m):
            return False
        return m <= self.tolerance if self.kind == "max" else m >= self.tolerance

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": _jsonable(self.measured),
            "tolerance": self.tolerance,
            "kind": self.kind,
            "details": self.details,
            "values": {k: _jsonable(v) for k, v in self.values.items()},
        }

    def __str__(self):
        op = "<=" if self.kind == "max" else ">="
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: measured {self.measured:.3e} "
                f"{op} {self.tolerance:.1e}")


def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": float(v.real), "im": float(v.imag)}
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v
