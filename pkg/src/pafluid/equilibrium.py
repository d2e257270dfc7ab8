"""Fixed point ``F(s*) = 1`` and the limiting degree proportions ``a_k``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ModelError, ToleranceError
from .params import ModelParams
from .series import product_series, remainder_bounds

DEFAULT_TOL = 1e-10
DEFAULT_K = 512
AUTO_K_CAP = 1 << 15
_TINY = 1e-300


@dataclass
class EquilibriumSolution:
    """``s`` (normally ``s*``) with ``a_1..a_K`` and truncation bounds.

    ``tail_bound`` bounds ``sum_{k>K} a_k`` and ``size_tail_bound`` bounds
    ``sum_{k>K} k a_k``.
    """

    s_star: float
    a: np.ndarray
    K: int
    tail_bound: float
    size_tail_bound: float
    residuals: tuple = field(default=(math.nan, math.nan))

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, self.K + 1)

    def to_dict(self) -> dict:
        return {
            "s_star": self.s_star,
            "K": self.K,
            "a": self.a.tolist(),
            "tail_bound": self.tail_bound,
            "size_tail_bound": self.size_tail_bound,
            "residuals": {"mass": self.residuals[0], "size": self.residuals[1]},
        }


def eval_F(params: ModelParams, s: float, tol: float = DEFAULT_TOL,
           stop_above: float = math.inf) -> float:
    """``(p0/q0) sum_{k>=1} prod_{j<=k} q0 w(j) / (s + q0 w(j))`` to within ``tol``."""
    if not s > 0.0:
        raise ConfigError(f"F is evaluated for s > 0 only (got {s})", key="s")
    params.w.require_certified()
    p0, q0 = params.p0, params.q0
    res = product_series(params.w, q0, s, tol, scale=p0 / q0, stop_above=stop_above)
    return res.value


def solve_s_star(params: ModelParams, tol: float = DEFAULT_TOL) -> float:
    """Unique root of ``F(s) = 1``: bracket by doubling/halving, then bisect."""
    if not tol > 0.0:
        raise ConfigError("tol must be positive", key="tol")
    params.w.require_certified()
    ftol = tol * 1e-2

    def F(s):
        return eval_F(params, s, ftol, stop_above=2.0)

    lo = hi = params.q0 * params.w(1)
    f_hi = F(hi)
    n = 0
    while f_hi >= 1.0:
        lo = hi
        hi *= 2.0
        f_hi = F(hi)
        n += 1
        if n > 200:
            raise ModelError("F(s) never drops below 1; parameters admit no fixed point")
    n = 0
    while F(lo) <= 1.0:
        hi = lo
        lo *= 0.5
        n += 1
        if n > 200:
            raise ModelError("F(s) never exceeds 1; parameters admit no fixed point")

    # bisect to a bracket far tighter than tol so that downstream a_k inherit it
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if F(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= ftol * max(1.0, hi):
            break
    s = 0.5 * (lo + hi)
    resid = abs(eval_F(params, s, ftol) - 1.0)
    if resid > tol:
        raise ToleranceError(f"|F(s*) - 1| = {resid:.3g} exceeds tol = {tol:.3g}")
    return s


def a_sequence(params: ModelParams, s: float, K: int = DEFAULT_K) -> EquilibriumSolution:
    """``a_1 = s p0 / (s + q0 w(1))``, ``a_k = q0 w(k-1) a_{k-1} / (s + q0 w(k))``.

    Stops early (and records the effective ``K``) once ``a_k`` would fall
    below ``1e-300``.
    """
    if not s > 0.0:
        raise ConfigError(f"s must be positive (got {s})", key="s")
    if K < 1:
        raise ConfigError("K must be >= 1", key="kmax")
    p0, q0 = params.p0, params.q0
    w = params.w.array(K + 1)
    a1 = s * p0 / (s + q0 * w[0])
    ratio = q0 * w[:K - 1] / (s + q0 * w[1:K])
    a = np.empty(K)
    a[0] = a1
    if K > 1:
        a[1:] = a1 * np.cumprod(ratio)
    # rewrite as a recursion so the stored values satisfy it to one rounding
    for i in range(1, K):
        a[i] = q0 * w[i - 1] * a[i - 1] / (s + q0 * w[i])
        if a[i] < _TINY:
            a = a[:i]
            break
    K_eff = len(a)
    # sum_{k>K} a_k <= p0 sum_{k>=K} P_k ;  sum_{k>K} k a_k <= p0 sum_{k>=K} (k+1) P_k
    P_K = a[-1] * q0 * w[K_eff - 1] / (p0 * s)
    r0, r1 = remainder_bounds(params.w, q0, s, K_eff, P_K)
    tail = p0 * (P_K + r0)
    size_tail = p0 * ((K_eff + 1) * P_K + r1 + r0)
    return EquilibriumSolution(s, a, K_eff, float(tail), float(size_tail))


def check_mass_identities(sol: EquilibriumSolution, params: ModelParams):
    """Residuals of ``sum a_k = p0`` and ``sum k a_k = p0 + q0`` over the
    stored terms; compare them with the solution's tail bounds."""
    k = sol.k
    mass = abs(math.fsum(sol.a) - params.p0)
    size = abs(math.fsum(k * sol.a) - (params.p0 + params.q0))
    sol.residuals = (mass, size)
    return mass, size


def mass_identities_pass(sol: EquilibriumSolution, params: ModelParams) -> bool:
    mass, size = check_mass_identities(sol, params)
    allowed = max(sol.tail_bound * (sol.K + 1), 1e-8)
    return mass <= allowed and size <= max(sol.size_tail_bound * (sol.K + 1), 1e-8)


def solve(params: ModelParams, tol: float = DEFAULT_TOL, K: int | None = None) -> EquilibriumSolution:
    """``s*`` and ``a_k`` in one call; by default ``K`` is the first multiple
    of 16 where the tail bound on ``sum k a_k`` falls below ``tol``."""
    s = solve_s_star(params, tol)
    if K is None:
        K = default_K(params, s, tol, cap=AUTO_K_CAP)
    sol = a_sequence(params, s, K)
    check_mass_identities(sol, params)
    return sol


def default_K(params: ModelParams, s: float, tol: float = DEFAULT_TOL, cap: int = DEFAULT_K) -> int:
    sol = a_sequence(params, s, cap)
    Ks = np.arange(16, sol.K + 1, 16)
    P = sol.a[Ks - 1] * params.q0 * params.w(Ks) / (params.p0 * s)
    for K, PK in zip(Ks, P):
        r0, r1 = remainder_bounds(params.w, params.q0, s, int(K), float(PK))
        if params.p0 * ((K + 1) * PK + r0 + r1) <= tol:
            return int(K)
    return sol.K


def product_formula(params: ModelParams, s: float, K: int) -> np.ndarray:
    """``(p0 s / q0) w(k)^{-1} prod_{j<=k} q0 w(j) / (s + q0 w(j))`` evaluated
    directly, product by product (reference for :func:`a_sequence`)."""
    p0, q0 = params.p0, params.q0
    out = np.empty(K)
    for k in range(1, K + 1):
        prod = 1.0
        for j in range(1, k + 1):
            wj = params.w(j)
            prod *= q0 * wj / (s + q0 * wj)
        out[k - 1] = p0 * s / q0 * prod / params.w(k)
    return out
