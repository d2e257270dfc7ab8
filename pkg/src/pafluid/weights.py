"""Attachment weight functions ``k -> w(k)`` and their sublinearity certificate."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import ConfigError

DEFAULT_PROBE = 10_000


class SublinearCertificate(NamedTuple):
    """Finite-probe evidence that ``w(k)/k -> 0``.

    ``W`` is ``max w(k)/k`` over the probe, ``ratio_tail`` the same maximum
    restricted to the last decade of the probe, and ``ok`` is true when
    ``w(k)/k`` is strictly decreasing along that decade.
    """

    W: float
    ratio_tail: float
    ok: bool


@dataclass(frozen=True)
class WeightFunction:
    """Positive weight ``w(k)`` for ``k >= 1``.

    Build with :meth:`power`, :meth:`from_table` or :meth:`custom`.  Instances
    are immutable and carry a cached :class:`SublinearCertificate`.
    """

    kind: str
    kappa: Optional[float] = None
    table: tuple = ()
    func: Optional[Callable] = field(default=None, compare=False)
    probe: int = DEFAULT_PROBE
    certificate: SublinearCertificate = field(default=None, compare=False, repr=False)

    # -- constructors ---------------------------------------------------
    @classmethod
    def power(cls, kappa: float, probe: int = DEFAULT_PROBE) -> "WeightFunction":
        kappa = float(kappa)
        if not math.isfinite(kappa) or kappa >= 1.0:
            raise ConfigError(f"power weight needs kappa < 1 (got {kappa})", key="weight.kappa")
        return cls._finish(cls(kind="power", kappa=kappa, probe=probe))

    @classmethod
    def from_table(cls, values: Sequence[float], probe: int = DEFAULT_PROBE) -> "WeightFunction":
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ConfigError("empty weight table", key="weight.table")
        if any(not (v > 0.0 and math.isfinite(v)) for v in vals):
            raise ConfigError("weight table entries must be finite and positive", key="weight.table")
        if len(vals) == 1:
            ext = 0.0
        else:
            m = len(vals)
            ext = math.log(vals[-1] / vals[-2]) / math.log(m / (m - 1))
        if ext >= 1.0:
            raise ConfigError(
                f"table extension exponent {ext:.4g} is not sublinear", key="weight.table"
            )
        return cls._finish(cls(kind="table", kappa=ext, table=vals, probe=probe))

    @classmethod
    def custom(cls, func: Callable[[int], float], probe: int = DEFAULT_PROBE) -> "WeightFunction":
        return cls._finish(cls(kind="custom", func=func, probe=probe))

    @classmethod
    def _finish(cls, w: "WeightFunction") -> "WeightFunction":
        if w.probe < 100:
            raise ConfigError("probe must be >= 100", key="weight.probe")
        cert = certify_sublinear(w, w.probe)
        object.__setattr__(w, "certificate", cert)
        if not cert.ok:
            warnings.warn(
                f"weight {w.describe()} failed the sublinearity certificate; "
                "it may only be used for simulation",
                stacklevel=3,
            )
        return w

    # -- evaluation -----------------------------------------------------
    def __call__(self, k):
        """Evaluate at an integer or an integer array (all entries >= 1)."""
        scalar = np.ndim(k) == 0
        karr = np.asarray(k, dtype=np.int64)
        if np.any(karr < 1):
            raise ConfigError("weights are defined for k >= 1 only")
        if self.kind == "power":
            out = np.power(karr.astype(np.float64), self.kappa)
        elif self.kind == "table":
            tab = np.asarray(self.table)
            m = len(tab)
            inside = karr <= m
            out = np.empty(karr.shape, dtype=np.float64)
            out[inside] = tab[karr[inside] - 1]
            kk = karr[~inside].astype(np.float64)
            out[~inside] = tab[-1] * np.power(kk / m, self.kappa)
        else:
            flat = [float(self.func(int(x))) for x in karr.ravel()]
            out = np.asarray(flat, dtype=np.float64).reshape(karr.shape)
            if not np.all((out > 0.0) & np.isfinite(out)):
                raise ConfigError("custom weight returned a non-positive value", key="weight")
        return float(out) if scalar else out

    def array(self, kmax: int) -> np.ndarray:
        """``w(1), ..., w(kmax)`` as a float array."""
        return self(np.arange(1, kmax + 1))

    @property
    def W(self) -> float:
        return self.certificate.W

    @property
    def certified(self) -> bool:
        return self.certificate.ok

    def require_certified(self) -> None:
        if not self.certified:
            raise ConfigError(
                f"weight {self.describe()} is not certified sublinear; "
                "fixed-point and ODE computations are refused",
                key="weight",
            )

    def is_nonincreasing(self) -> bool:
        if self.kind == "power":
            return self.kappa <= 0.0
        return False

    def describe(self) -> str:
        if self.kind == "power":
            return f"power(kappa={self.kappa:g})"
        if self.kind == "table":
            return f"table(len={len(self.table)}, tail_kappa={self.kappa:.4g})"
        return f"custom({getattr(self.func, '__name__', 'closure')})"

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "probe": self.probe}
        if self.kind == "power":
            d["kappa"] = self.kappa
        elif self.kind == "table":
            d["table"] = list(self.table)
        return d


def eval_weight(w: WeightFunction, k: int) -> float:
    if k < 1:
        raise ConfigError(f"k must be >= 1 (got {k})")
    return w(k)


def certify_sublinear(w: WeightFunction, k_probe: int) -> SublinearCertificate:
    """Probe ``w(k)/k`` for ``1 <= k <= k_probe``.

    The last decade is ``0.9 k_probe < k <= k_probe``; on it the ratio must be
    strictly decreasing.
    """
    if k_probe < 100:
        raise ConfigError("k_probe must be >= 100", key="weight.probe")
    k = np.arange(1, k_probe + 1)
    ratio = w(k) / k
    W = float(ratio.max())
    start = int(0.9 * k_probe)
    tail = ratio[start:]
    ok = bool(np.all(np.diff(tail) < 0.0))
    return SublinearCertificate(W, float(tail.max()), ok)


def weight_from_config(kind: str = "power", kappa: float = 0.0, table=None,
                       probe: int = DEFAULT_PROBE) -> WeightFunction:
    if kind == "power":
        return WeightFunction.power(kappa, probe=probe)
    if kind == "table":
        if table is None:
            raise ConfigError("table weights need weight.table", key="weight.table")
        return WeightFunction.from_table(table, probe=probe)
    raise ConfigError(f"unknown weight kind {kind!r}", key="weight.kind")
