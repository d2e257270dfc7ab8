"""Truncated generator ``A = B + K`` of the linear (time-changed) system,
its dominant eigenpair and the positive adjoint eigenvector."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, ModelError, SpectralError
from .params import ModelParams
from .series import product_series

_FLOOR = 1e-250


@dataclass(frozen=True)
class TruncatedOperator:
    """``A`` restricted to classes ``1..K``.

    ``B`` is lower bidiagonal (``-q0 w(k)`` on the diagonal, ``q0 w(k)`` feeding
    ``k+1``), ``K`` is the rank-one first row ``p0 w(k)``.  With ``tail="open"``
    mass leaving class ``K`` is lost; with ``tail="absorbing"`` class ``K`` has
    no outflow and stands for the whole tail ``k >= K``.
    """

    K: int
    diag: np.ndarray
    sub: np.ndarray
    first_row: np.ndarray
    norm_weights: np.ndarray
    tail: str = "open"

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[1:] += self.sub * x[:-1]
        y[0] += self.first_row @ x
        return y

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        """``A^T y``."""
        x = self.diag * y
        x[:-1] += self.sub * y[1:]
        x += self.first_row * y[0]
        return x

    def dense(self) -> np.ndarray:
        A = np.diag(self.diag)
        A[np.arange(1, self.K), np.arange(self.K - 1)] = self.sub
        A[0, :] += self.first_row
        return A

    def norm(self, x: np.ndarray) -> float:
        """Lattice norm ``sum_k k |x_k|``."""
        return float(self.norm_weights @ np.abs(x))


def build_operator(params: ModelParams, K: int, tail: str = "open") -> TruncatedOperator:
    if K < 2:
        raise ConfigError("operator truncation needs K >= 2", key="kmax")
    if tail not in ("open", "absorbing"):
        raise ConfigError(f"unknown tail mode {tail!r}", key="tail")
    w = params.w.array(K)
    diag = -params.q0 * w
    if tail == "absorbing":
        diag[-1] = 0.0
    return TruncatedOperator(
        K=K,
        diag=diag,
        sub=params.q0 * w[:-1],
        first_row=params.p0 * w,
        norm_weights=np.arange(1, K + 1, dtype=np.float64),
        tail=tail,
    )


def lambda_from_scalar_equation(params: ModelParams, tol: float = 1e-10) -> float:
    """Positive root of
    ``lam = (p0 - q0) w(1) + p0 w(1) sum_{k>=2} prod_{r=2}^{k} q0 w(r)/(lam + q0 w(r))``.

    The left side increases and the right side decreases in ``lam``.
    """
    if not tol > 0.0:
        raise ConfigError("tol must be positive", key="tol")
    params.w.require_certified()
    p0, q0, w1 = params.p0, params.q0, params.w(1)
    stol = tol * 1e-2

    def gap(lam):
        rhs = (p0 - q0) * w1 + product_series(params.w, q0, lam, stol, first=2, scale=p0 * w1,
                                              stop_above=lam + abs(p0 - q0) * w1 + 1.0).value
        return lam - rhs

    lo = hi = max(p0 * w1, 1e-3)
    n = 0
    while gap(hi) <= 0.0:
        lo, hi = hi, 2.0 * hi
        n += 1
        if n > 200:
            raise ModelError("eigenvalue equation: right side never falls below lambda")
    n = 0
    while gap(lo) >= 0.0:
        hi, lo = lo, 0.5 * lo
        n += 1
        if n > 200:
            raise ModelError("eigenvalue equation: no positive root bracketed")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= stol * max(1.0, hi):
            break
        if gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class EigenPair(NamedTuple):
    lam: float
    x: np.ndarray
    iterations: int
    residual: float
    boundary_residual: float
    closed_form_error: float


def closed_form_eigenvector(params: ModelParams, lam: float, K: int, x1: float = 1.0) -> np.ndarray:
    """``x_k = x_1 prod_{r=2}^{k} q0 w(r-1) / (lam + q0 w(r))``."""
    w = params.w.array(K)
    x = np.empty(K)
    x[0] = x1
    q0 = params.q0
    for k in range(1, K):
        x[k] = x[k - 1] * q0 * w[k - 1] / (lam + q0 * w[k])
    return x


def dominant_eigenpair(op: TruncatedOperator, params: ModelParams | None = None,
                       tol: float = 1e-12, max_iter: int = 1_000_000) -> EigenPair:
    """Shifted power iteration in the lattice norm.

    The shift ``sigma = max_k q0 w(k)`` makes ``A + sigma I`` entrywise
    nonnegative with a positive first row, so the Perron root of the shifted
    matrix is ``lambda + sigma``.  Iteration stops once every entry above
    underflow has stopped moving in relative terms.  Returns ``x`` with
    ``||x|| = 1``.  With ``params`` the closed-form eigenvector for the
    returned ``lambda`` is compared entrywise (boundary row excluded).
    """
    sigma = float(np.max(-op.diag))
    x = 1.0 / op.norm_weights
    x /= op.norm(x)
    lam = math.nan
    for it in range(1, max_iter + 1):
        y = op.matvec(x) + sigma * x
        ny = op.norm(y)
        y /= ny
        lam_new = ny - sigma
        live = y > _FLOOR
        delta = float(np.max(np.abs(y[live] - x[live]) / y[live]))
        x = y
        if delta <= tol and abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            lam = lam_new
            break
        lam = lam_new
    else:
        raise SpectralError(f"power iteration did not converge in {max_iter} iterations")
    if np.any(x < 0.0):
        raise SpectralError("dominant eigenvector has negative entries; increase K")
    r = op.matvec(x) - lam * x
    residual = float(op.norm_weights[:-1] @ np.abs(r[:-1]))
    boundary = float(op.norm_weights[-1] * abs(r[-1]))
    cf_err = math.nan
    if params is not None:
        ref = closed_form_eigenvector(params, lam, op.K, x[0])[:-1]
        mask = ref > _FLOOR
        cf_err = float(np.max(np.abs(x[:-1][mask] - ref[mask]) / ref[mask]))
    return EigenPair(lam, x, it, residual, boundary, cf_err)


class AdjointResult(NamedTuple):
    x_star: np.ndarray
    recursion_residuals: np.ndarray
    growth_constant: float
    growth_ok: bool


def adjoint_eigenvector(params: ModelParams, s_star: float, K: int,
                        tol: float = 1e-14) -> AdjointResult:
    """Positive eigenvector of ``A^T`` for eigenvalue ``s*`` with ``x*_1 = 1``.

    ``x*_j = x*_1 w(j)/(s + q0 w(j)) [ q0 sum_{k>=j} p0 w(k+1)/(s + q0 w(k+1))
    prod_{r=j+1}^{k} q0 w(r)/(s + q0 w(r)) + p0 ]``.  The series inside the
    bracket equals ``(p0/q0) S_{j+1}`` with ``S_m = sum_{k>=m} prod_{r=m}^{k} h_r``,
    ``h_r = q0 w(r)/(s + q0 w(r))``; ``S`` comes from one tail sum past ``K + 1``
    and the stable backward recursion ``S_m = h_m (1 + S_{m+1})``.
    """
    p0, q0, lam = params.p0, params.q0, s_star
    w = params.w.array(K + 1)
    h = q0 * w / (lam + q0 * w)
    S = np.empty(K + 3)
    S[K + 2] = product_series(params.w, q0, lam, tol, first=K + 2).value
    for m in range(K + 1, 0, -1):
        S[m] = h[m - 1] * (1.0 + S[m + 1])
    x = np.empty(K + 1)
    x[0] = 1.0
    for j in range(2, K + 2):
        x[j - 1] = w[j - 1] / (lam + q0 * w[j - 1]) * (q0 * (p0 / q0) * S[j + 1] + p0)
    res = adjoint_recursion_residuals(params, lam, x)
    ratio = x / np.arange(1, K + 2)
    half = max(1, (K + 1) // 2)
    C = float(ratio[:half].max())
    ok = bool(ratio[half:].max() <= C * (1.0 + 1e-12)) if half < K + 1 else True
    if np.max(res) > 1e-8:
        raise SpectralError(f"adjoint recursion residual {np.max(res):.3g} > 1e-8; tail truncated")
    return AdjointResult(x[:K], res, C, ok)


def adjoint_recursion_residuals(params: ModelParams, lam: float, x: np.ndarray) -> np.ndarray:
    """``|x*_k - (q0 w(k) x*_{k+1} + p0 w(k) x*_1)/(lam + q0 w(k))| / x*_k`` for
    ``k = 1..len(x)-1``."""
    n = len(x) - 1
    w = params.w.array(n)
    rhs = (params.q0 * w * x[1:] + params.p0 * w * x[0]) / (lam + params.q0 * w)
    return np.abs(x[:-1] - rhs) / np.abs(x[:-1])


def pairing_defect(op: TruncatedOperator, x_star: np.ndarray, x: np.ndarray, s_star: float) -> float:
    """Relative ``|<x*, A x> - s* <x*, x>| / (|x*| |x|)`` (Euclidean norms)."""
    lhs = float(x_star @ op.matvec(x))
    rhs = s_star * float(x_star @ x)
    return abs(lhs - rhs) / (np.linalg.norm(x_star) * np.linalg.norm(x))
