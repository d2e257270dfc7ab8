"""Sums of running products ``P_k = prod_{j=first}^{k} q0 w(j) / (s + q0 w(j))``.

Every infinite series in the package (``F``, the eigenvalue equation, the
adjoint eigenvector, tails of ``a_k``) is of this shape.  Truncation is
controlled by a majorant of the remainder ``sum_{k>J} P_k / P_J``:

* if ``w(j)/j`` is nonincreasing for ``j >= J`` then each later factor is at
  most ``j / (j + alpha)`` with ``alpha = s J / (q0 w(J))``, and the remainder
  is at most ``(J + 1) / (alpha - 1)`` once ``alpha > 1``;
* if ``w`` itself is nonincreasing the factors are at most ``r = h_{J+1}``
  and the geometric bound ``r / (1 - r)`` applies.

The smaller of the applicable bounds is used.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, ToleranceError

HARD_CAP = 10_000_000
_CHUNK = 4096


class SeriesResult(NamedTuple):
    value: float
    n_terms: int
    tail_bound: float


def monotone_start(w) -> float:
    """Smallest ``J`` from which ``w(j)/j`` is known to be nonincreasing."""
    if w.kind == "power":
        return 1
    if w.kind == "table":
        return len(w.table)
    return int(0.9 * w.probe) if w.certified else math.inf


def _remainder_factors(w, q0, s, J, wJ, wJ1):
    """Vectorised ``(b0, b1)`` with ``sum_{k>J} P_k <= P_J b0`` and
    ``sum_{k>J} k P_k <= P_J b1``.  Infinite where no bound applies."""
    J = np.asarray(J, dtype=np.float64)
    b0 = np.full(J.shape, np.inf)
    b1 = np.full(J.shape, np.inf)
    alpha = s * J / (q0 * np.asarray(wJ))
    mono = J >= monotone_start(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        g0 = np.where(mono & (alpha > 1.0), (J + 1.0) / (alpha - 1.0), np.inf)
        g1 = np.where(
            mono & (alpha > 2.0),
            (J + alpha) * ((J + 1.0) / (alpha - 2.0) - 1.0 / (alpha - 1.0)) - J,
            np.inf,
        )
    b0 = np.minimum(b0, g0)
    b1 = np.minimum(b1, g1)
    if w.is_nonincreasing():
        r = q0 * np.asarray(wJ1) / (s + q0 * np.asarray(wJ1))
        b0 = np.minimum(b0, r / (1.0 - r))
        b1 = np.minimum(b1, J * r / (1.0 - r) + r / (1.0 - r) ** 2)
    return b0, b1


def remainder_bounds(w, q0, s, J, P_J):
    """Bounds on ``sum_{k>J} P_k`` and ``sum_{k>J} k P_k`` given ``P_J``."""
    if P_J == 0.0:
        return 0.0, 0.0
    b0, b1 = _remainder_factors(w, q0, s, np.array([J]), w(np.array([J])), w(np.array([J + 1])))
    return float(P_J * b0[0]), float(P_J * b1[0])


def product_series(w, q0: float, s: float, tol: float, first: int = 1,
                   scale: float = 1.0, stop_above: float = math.inf,
                   cap: int = HARD_CAP) -> SeriesResult:
    """``scale * sum_{k >= first} prod_{j=first}^{k} q0 w(j)/(s + q0 w(j))``.

    Summation stops at the first ``J`` whose certified remainder (times
    ``scale``) is at most ``tol``, or as soon as the partial sum exceeds
    ``stop_above`` (useful for one-sided comparisons).
    """
    if not s > 0.0:
        raise ConfigError(f"series parameter must be positive (got {s})")
    if not tol > 0.0:
        raise ConfigError("tol must be positive", key="tol")
    total = 0.0
    carry = 1.0
    lo = first
    while lo - first < cap:
        j = np.arange(lo, lo + _CHUNK + 1)
        wj = w(j)
        h = q0 * wj[:-1] / (s + q0 * wj[:-1])
        P = carry * np.cumprod(h)
        b0, _ = _remainder_factors(w, q0, s, j[:-1], wj[:-1], wj[1:])
        done = np.flatnonzero((scale * P * b0 <= tol) | (P == 0.0))
        if done.size:
            m = done[0] + 1
            total += scale * math.fsum(P[:m])
            return SeriesResult(total, lo - first + m, float(scale * P[m - 1] * b0[m - 1]))
        total += scale * math.fsum(P)
        if total > stop_above:
            return SeriesResult(total, lo - first + _CHUNK, math.inf)
        carry = P[-1]
        lo += _CHUNK
    raise ToleranceError(
        f"product series at s={s:g} did not reach tol={tol:g} within {cap} terms"
    )
