"""Truncated fluid-limit ODE, the time-changed linear system and the
``V``/``T``/``D`` bounds they must respect."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .equilibrium import a_sequence, solve_s_star
from .errors import ConfigError, IntegrationDriftError, SingularityError
from .integrator import StepStats, dopri45
from .params import ModelParams

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-15
SMALL_T0 = 0.01
TAIL_MODES = ("open", "absorbing")


@dataclass(frozen=True)
class InitialConfiguration:
    """Macroscopic initial proportions ``c_k`` (``k = 1..len(c)``).

    All-zero ``c`` is a *small* configuration.  ``c_tilde`` defaults to
    ``sum k c_k``; a positive ``c_tilde`` with all ``c_k = 0`` is refused.
    """

    c: np.ndarray
    c_tilde: float = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64).ravel()
        if c.size == 0:
            c = np.zeros(1)
        if np.any(~np.isfinite(c)) or np.any(c < 0.0):
            raise ConfigError("initial proportions must be finite and nonnegative", key="init")
        object.__setattr__(self, "c", c)
        ct = float(np.arange(1, c.size + 1) @ c)
        if self.c_tilde is None:
            object.__setattr__(self, "c_tilde", ct)
        else:
            if self.c_tilde < ct - 1e-12 * max(1.0, ct):
                raise ConfigError("c_tilde must be >= sum k c_k", key="init")
            if self.c_tilde > 0.0 and not c.any():
                raise ConfigError(
                    "c_tilde > 0 with all c_k = 0 (degree escaping to infinity) is not supported",
                    key="init",
                )

    @classmethod
    def small(cls) -> "InitialConfiguration":
        return cls(np.zeros(1))

    @property
    def kind(self) -> str:
        return "large" if self.c.any() else "small"

    @property
    def c_total(self) -> float:
        return float(self.c.sum())

    def padded(self, K: int) -> np.ndarray:
        if self.c.size > K and self.c[K:].any():
            raise ConfigError(f"initial configuration has mass beyond K={K}", key="kmax")
        out = np.zeros(K)
        n = min(K, self.c.size)
        out[:n] = self.c[:n]
        return out


@dataclass
class TruncatedProfile:
    values: np.ndarray
    t: float
    w: np.ndarray = field(repr=False)
    tail: float = 0.0

    @property
    def K(self) -> int:
        return self.values.size

    @property
    def V(self) -> float:
        return float(self.values.sum())

    @property
    def T(self) -> float:
        return float(self.w @ self.values)

    @property
    def D(self) -> float:
        return float(np.arange(1, self.K + 1) @ self.values)


@dataclass
class Trajectory:
    """Profiles ``x(t_i)`` stacked row-wise, with the tail register."""

    t: np.ndarray
    X: np.ndarray
    tail: np.ndarray
    w: np.ndarray = field(repr=False)
    stats: StepStats = field(default_factory=StepStats)
    clock: Optional[np.ndarray] = None  # t(s) for time-changed trajectories

    @property
    def K(self) -> int:
        return self.X.shape[1]

    @property
    def V(self) -> np.ndarray:
        return self.X.sum(axis=1)

    @property
    def T(self) -> np.ndarray:
        return self.X @ self.w

    @property
    def D(self) -> np.ndarray:
        return self.X @ np.arange(1, self.K + 1)

    @property
    def max_tail(self) -> float:
        return float(self.tail.max()) if self.tail.size else 0.0

    def profile(self, i: int) -> TruncatedProfile:
        return TruncatedProfile(self.X[i].copy(), float(self.t[i]), self.w, float(self.tail[i]))

    def __len__(self) -> int:
        return self.t.size


def default_K(params: ModelParams, s_star: Optional[float] = None, ratio: float = 1e-14,
              cap: int = 20000) -> int:
    """Smallest ``K`` with ``a_K < ratio * a_1`` (at most ``cap``)."""
    if s_star is None:
        s_star = solve_s_star(params)
    a = a_sequence(params, s_star, cap).a
    below = np.flatnonzero(a < ratio * a[0])
    return int(below[0]) + 1 if below.size else cap


def _lattice(x: np.ndarray) -> float:
    return float(np.arange(1, x.size + 1) @ np.abs(x))


def rhs_phi(phi: np.ndarray, params: ModelParams, tail: str = "open",
            w: Optional[np.ndarray] = None) -> np.ndarray:
    """Right side of the truncated nonlinear system.

    ``phi_1' = p0 - q0 w(1) phi_1 / T``,
    ``phi_k' = (q0 / T) (w(k-1) phi_{k-1} - w(k) phi_k)``, ``T = sum w(k) phi_k``.
    In ``absorbing`` mode class ``K`` has no outflow.
    """
    phi = np.asarray(phi, dtype=np.float64)
    if w is None:
        w = params.w.array(phi.size)
    T = float(w @ phi)
    if not T > 0.0:
        raise SingularityError("total weight T <= 0; the system is singular here")
    flux = (params.q0 / T) * w * phi
    d = -flux
    d[0] += params.p0
    d[1:] += flux[:-1]
    if tail == "absorbing":
        d[-1] += flux[-1]
    return d


def _phi_system(params, w, tail):
    p0, q0 = params.p0, params.q0
    K = w.size

    def f(t, y):
        phi = y[:K]
        T = float(w @ phi)
        if not T > 0.0:
            raise SingularityError(f"total weight T <= 0 at t={t:.6g}")
        flux = (q0 / T) * w * phi
        dy = np.empty(K + 1)
        dy[:K] = -flux
        dy[0] += p0
        dy[1:K] += flux[:-1]
        if tail == "absorbing":
            dy[K - 1] += flux[-1]
            dy[K] = 0.0
        else:
            dy[K] = flux[-1]
        return dy

    return f


def integrate_phi(init: InitialConfiguration, params: ModelParams, t_end: float,
                  K: Optional[int] = None, t0: Optional[float] = None, t_eval: Optional[Sequence[float]] = None,
                  rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, tail: str = "open",
                  s_star: Optional[float] = None) -> Trajectory:
    """Integrate the truncated nonlinear system up to ``t_end``.

    Large configurations start at ``t0 = 0`` from ``c``.  Small
    configurations start at ``t0 > 0`` (default 0.01) on the exact ray
    ``phi(t0) = a t0``; the singular point ``t = 0`` is never integrated
    through.
    """
    if tail not in TAIL_MODES:
        raise ConfigError(f"unknown tail mode {tail!r}", key="tail")
    params.w.require_certified()
    if s_star is None:
        s_star = solve_s_star(params)
    if K is None:
        K = max(default_K(params, s_star), init.c.size)
    if init.kind == "large":
        if t0 not in (None, 0.0):
            raise ConfigError("large configurations start at t0 = 0", key="t0")
        t0 = 0.0
        y0 = init.padded(K)
    else:
        t0 = SMALL_T0 if t0 is None else float(t0)
        if not t0 > 0.0:
            raise SingularityError("small configurations must be seeded at t0 > 0")
        a = np.zeros(K)
        sol = a_sequence(params, s_star, K)
        a[:sol.K] = sol.a
        y0 = a * t0
    if t_end < t0:
        raise ConfigError("t_end must be >= t0", key="t_end")
    if t_eval is None:
        t_eval = [t0, t_end]
    t_eval = np.asarray(t_eval, dtype=np.float64)
    w = params.w.array(K)
    y0 = np.concatenate([y0, [0.0]])
    sol = dopri45(_phi_system(params, w, tail), y0, t0, t_eval, rtol=rtol, atol=atol,
                  guard=lambda y: _lattice(y[:K]), guard_slice=slice(0, K))
    return Trajectory(sol.t, sol.y[:, :K], sol.y[:, K], w, sol.stats)


def _psi_system(params, w, tail):
    p0, q0 = params.p0, params.q0
    K = w.size
    first = p0 * w
    first[0] = (p0 - q0) * w[0]

    def f(s, y):
        psi = y[:K]
        wpsi = w * psi
        dy = np.empty(K + 2)
        dy[:K] = -q0 * wpsi
        dy[0] = first @ psi
        dy[1:K] += q0 * wpsi[:-1]
        if tail == "absorbing":
            dy[K - 1] += q0 * wpsi[-1]
            dy[K + 1] = 0.0
        else:
            dy[K + 1] = q0 * wpsi[-1]
        dy[K] = float(wpsi.sum())
        return dy

    return f


def comparison_bounds(params: ModelParams, init: InitialConfiguration, s: np.ndarray,
                      t_start: float) -> tuple:
    """Lower/upper envelopes for ``t(s)`` from ``C0^{-1}(c + p0 t) <= T <= C0(c~ + (p0+q0) t)``."""
    C0 = constant_C0(params, init)
    p0, pq = params.p0, params.p0 + params.q0
    c, ct = init.c_total, init.c_tilde
    s = np.asarray(s, dtype=np.float64)
    el = np.exp(p0 * s / C0)
    eu = np.exp(C0 * pq * s)
    lower = t_start * el + (c / p0) * (el - 1.0)
    upper = t_start * eu + (ct / pq) * (eu - 1.0)
    return lower, upper


def integrate_psi_with_time_change(init: InitialConfiguration, params: ModelParams,
                                   s_end: float, K: Optional[int] = None,
                                   s_eval: Optional[Sequence[float]] = None,
                                   psi0: Optional[np.ndarray] = None,
                                   rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                                   tail: str = "open", s_star: Optional[float] = None) -> Trajectory:
    """Jointly integrate ``psi' = A psi`` and ``t' = sum w(k) psi_k`` over ``[0, s_end]``.

    Small configurations start from ``t(0) = 1`` with ``psi(0) = psi0`` (default
    ``a``, the ray at ``t = 1``); large ones from ``t(0) = 0`` with ``psi(0) = c``.
    The returned ``clock`` holds ``t(s)``; ``t`` holds the ``s`` grid.
    """
    if tail not in TAIL_MODES:
        raise ConfigError(f"unknown tail mode {tail!r}", key="tail")
    params.w.require_certified()
    if s_star is None:
        s_star = solve_s_star(params)
    if K is None:
        K = max(default_K(params, s_star), init.c.size)
    if init.kind == "large":
        y0 = init.padded(K)
        t_start = 0.0
    else:
        t_start = 1.0
        if psi0 is None:
            y0 = np.zeros(K)
            sol = a_sequence(params, s_star, K)
            y0[:sol.K] = sol.a
        else:
            y0 = np.asarray(psi0, dtype=np.float64)[:K]
    if s_eval is None:
        s_eval = [0.0, s_end]
    s_eval = np.asarray(s_eval, dtype=np.float64)
    w = params.w.array(K)
    y = np.concatenate([y0, [t_start, 0.0]])
    sol = dopri45(_psi_system(params, w, tail), y, 0.0, s_eval, rtol=rtol, atol=atol,
                  guard=lambda v: _lattice(v[:K]), guard_slice=slice(0, K))
    clock = sol.y[:, K]
    lower, upper = comparison_bounds(params, init, sol.t, t_start)
    bad = (clock < lower / 10.0) | (clock > 10.0 * upper)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise IntegrationDriftError(
            f"t(s) = {clock[i]:.6g} at s = {sol.t[i]:.6g} is outside 10x the comparison "
            f"envelope [{lower[i]:.6g}, {upper[i]:.6g}]"
        )
    return Trajectory(sol.t, sol.y[:, :K], sol.y[:, K + 1], w, sol.stats, clock=clock)


def time_change_error(traj: Trajectory, s_star: float) -> float:
    """``max_s |t(s) - exp(s* s)| / exp(s* s)`` for a small-configuration run."""
    ref = np.exp(s_star * traj.t)
    return float(np.max(np.abs(traj.clock - ref) / ref))


def constant_C0(params: ModelParams, init: InitialConfiguration) -> float:
    """``max{ [inf_{k<=L} w(k) / 2]^{-1}, W }`` with ``L`` the least integer
    satisfying ``c~/(L+1) <= c/2`` and ``2/(L+1) <= p0/2``."""
    c, ct, p0 = init.c_total, init.c_tilde, params.p0
    L = max(1, math.ceil(4.0 / p0 - 1.0))
    if ct > 0.0:
        L = max(L, math.ceil(2.0 * ct / c - 1.0))
    while not (ct / (L + 1) <= c / 2 and 2.0 / (L + 1) <= p0 / 2):
        L += 1
    inf_w = float(params.w.array(L).min())
    return max(2.0 / inf_w, params.w.W)


@dataclass
class BoundsReport:
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v["pass"] for v in self.checks.values())

    def __bool__(self) -> bool:
        return bool(self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed if self.checks else None, "checks": self.checks}


def bounds_check(traj: Trajectory, params: ModelParams, init: InitialConfiguration,
                 tol: float = 1e-7, s_star: Optional[float] = None) -> BoundsReport:
    """Check ``V = c + p0 t`` (with tail register), ``D <= c~ + (p0+q0) t`` and
    ``C0^{-1}(c + p0 t) <= T <= C0 (c~ + (p0+q0) t)`` along a phi-trajectory.

    For small configurations ``T(t) = s* t`` is also checked.
    """
    report = BoundsReport()
    if len(traj) == 0:
        return report
    t = traj.t
    c, ct = init.c_total, init.c_tilde
    p0, pq = params.p0, params.p0 + params.q0
    scale = np.maximum(1.0, c + p0 * t)
    V, T, D = traj.V, traj.T, traj.D
    if init.kind == "small":
        # the trajectory starts on the ray at t0 > 0, not at t = 0
        mass = np.abs(V + traj.tail - p0 * t)
    else:
        mass = np.abs(V + traj.tail - (c + p0 * t))
    report.checks["V"] = {"max_violation": float(np.max(mass / scale)), "tail": traj.max_tail,
                          "pass": bool(np.all(mass <= tol * scale))}
    d_excess = D - (ct + pq * t)
    report.checks["D"] = {"max_excess": float(np.max(d_excess)),
                          "pass": bool(np.all(d_excess <= tol * np.maximum(1.0, ct + pq * t)))}
    C0 = constant_C0(params, init)
    lower = (c + p0 * t) / C0
    upper = C0 * (ct + pq * t)
    report.checks["T"] = {"C0": C0, "min_lower_margin": float(np.min(T - lower)),
                          "min_upper_margin": float(np.min(upper - T)),
                          "pass": bool(np.all(T >= lower * (1 - tol)) and np.all(T <= upper * (1 + tol)))}
    if init.kind == "small":
        if s_star is None:
            s_star = solve_s_star(params)
        dev = np.abs(T - s_star * t) / np.maximum(1.0, s_star * t)
        report.checks["T_ray"] = {"s_star": s_star, "max_rel_dev": float(np.max(dev)),
                                  "pass": bool(np.all(dev <= max(tol, 1e-6)))}
    return report
