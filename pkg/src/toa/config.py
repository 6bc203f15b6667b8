"""Run configuration loaded from JSON.

Example::

    {"hbar": 1, "mass": 1,
     "packets": [{"p0": 5, "sigma_p": 0.2, "x0": -10, "weight": {"re": 1, "im": 0}}],
     "grid": {"pmax": 10, "n": 4096}}
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import PreconditionError
from .states import GaussianSpec, MomentumState, PhysicalConstants, build_state

MIN_NODES = 64
#: pmax must exceed |p0| + PMAX_SIGMAS * sigma_p for every packet
PMAX_SIGMAS = 8.0

DEFAULT_CONFIG = {
    "hbar": 1.0,
    "mass": 1.0,
    "packets": [{"p0": 5.0, "sigma_p": 0.2, "x0": -10.0, "weight": {"re": 1.0, "im": 0.0}}],
    "grid": {"pmax": 10.0, "n": 4096},
}


class ConfigError(PreconditionError):
    pass


@dataclass(frozen=True)
class RunConfig:
    constants: PhysicalConstants
    packets: tuple
    pmax: float
    n: int
    raw: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < MIN_NODES:
            raise ConfigError(f"grid.n must be >= {MIN_NODES}, got {self.n}")
        if not self.packets:
            raise ConfigError("config needs at least one packet")
        need = max(abs(s.p0) + PMAX_SIGMAS * s.sigma_p for s in self.packets)
        if not self.pmax > need:
            raise ConfigError(f"grid.pmax={self.pmax} must exceed {need:g} "
                              f"(|p0| + {PMAX_SIGMAS:g} sigma_p)")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            constants = PhysicalConstants(float(data.get("hbar", 1.0)),
                                          float(data.get("mass", 1.0)))
            packets = tuple(_packet(p) for p in data["packets"])
            grid = data.get("grid", {})
            pmax = float(grid.get("pmax", 10.0))
            n = int(grid.get("n", 4096))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        return cls(constants, packets, pmax, n, raw=data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def state(self) -> MomentumState:
        return build_state(self.packets, self.constants, self.pmax, self.n)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form of the parsed configuration."""
        canon = {
            "hbar": self.constants.hbar, "mass": self.constants.mass,
            "packets": [{"p0": s.p0, "sigma_p": s.sigma_p, "x0": s.x0,
                         "weight": {"re": complex(s.weight).real,
                                    "im": complex(s.weight).imag}}
                        for s in self.packets],
            "grid": {"pmax": self.pmax, "n": self.n},
        }
        text = json.dumps(canon, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _packet(d: dict) -> GaussianSpec:
    w = d.get("weight", 1.0)
    if isinstance(w, dict):
        w = complex(float(w.get("re", 0.0)), float(w.get("im", 0.0)))
    return GaussianSpec(float(d["p0"]), float(d["sigma_p"]), float(d.get("x0", 0.0)),
                        complex(w))
