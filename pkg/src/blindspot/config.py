from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class ScenarioConfig:
    """Model parameters. Intensities are per square metre, lengths in metres.

    ``L = inf`` selects infinitely long (line) obstacles.
    """

    lam: float
    lam0: float
    R: float = 20.0
    L: float = math.inf
    delta: float = 1e-4
    epsilon: float = 0.1
    k_min: int = 3

    def __post_init__(self):
        for name in ("lam", "lam0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if not (math.isfinite(self.R) and self.R > 0):
            raise ValueError(f"R must be > 0, got {self.R}")
        if not self.L > 0:
            raise ValueError(f"L must be > 0, got {self.L}")
        for name in ("delta", "epsilon"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if int(self.k_min) != self.k_min or self.k_min < 1:
            raise ValueError(f"k_min must be an integer >= 1, got {self.k_min}")

    @property
    def infinite(self) -> bool:
        return math.isinf(self.L)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["L"] = "inf" if self.infinite else self.L
        return d
