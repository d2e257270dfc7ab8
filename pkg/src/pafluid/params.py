"""Model parameters shared by every module."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .weights import WeightFunction

MODELS = ("graph", "urn")


@dataclass(frozen=True)
class ModelParams:
    """Model kind, attachment probability ``p`` and weight function.

    ``p0`` is the rate at which new vertices (urns) appear and ``q0`` the rate
    of weighted selections: graph ``(p, 2 - p)``, urn ``(p, 1 - p)``.
    """

    model: str
    p: float
    w: WeightFunction

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}", key="model")
        p = float(self.p)
        object.__setattr__(self, "p", p)
        if self.model == "graph":
            if not 0.0 < p <= 1.0:
                raise ConfigError(f"graph model needs 0 < p <= 1 (got {p})", key="p")
        else:
            if p == 1.0 or p == 0.0:
                raise ConfigError(
                    f"urn model with p={p:g} is a degenerate evolution; need 0 < p < 1", key="p"
                )
            if not 0.0 < p < 1.0:
                raise ConfigError(f"urn model needs 0 < p < 1 (got {p})", key="p")

    @property
    def p0(self) -> float:
        return self.p

    @property
    def q0(self) -> float:
        return 2.0 - self.p if self.model == "graph" else 1.0 - self.p

    @classmethod
    def power(cls, model: str, p: float, kappa: float) -> "ModelParams":
        return cls(model, p, WeightFunction.power(kappa))

    def to_dict(self) -> dict:
        return {"model": self.model, "p": self.p, "p0": self.p0, "q0": self.q0,
                "weight": self.w.to_dict()}
