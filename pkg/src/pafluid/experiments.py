"""Simulated paths against deterministic limits: deviation reports,
convergence studies and long-time slopes of large configurations."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .dynamics import InitialConfiguration, Trajectory
from .equilibrium import EquilibriumSolution, solve
from .errors import ConfigError
from .params import ModelParams
from .stochastic import RecordedPath, simulate_replicas

DEFAULT_K_CUT = 10
SLOPE_BAND = (-0.7, -0.3)


@dataclass
class DeviationReport:
    """``sup_t |X^n_k(t) - phi_k(t)|`` per replica and class, with aggregates.

    ``per_k`` has shape ``(replicas, k_cut)``; ``weight`` holds
    ``sup_t |S^n(t) - T(t)|`` per replica (NaN when no ``T`` was given).
    """

    n: int
    t: np.ndarray
    per_k: np.ndarray
    weight: np.ndarray

    @property
    def k_cut(self) -> int:
        return self.per_k.shape[1]

    @property
    def replicas(self) -> int:
        return self.per_k.shape[0]

    @property
    def per_replica_max(self) -> np.ndarray:
        return self.per_k.max(axis=1)

    @property
    def mean(self) -> float:
        """Mean over replicas of ``max_{k <= k_cut} sup_t`` deviation."""
        return float(self.per_replica_max.mean())

    @property
    def median(self) -> float:
        return float(np.median(self.per_replica_max))

    @property
    def max(self) -> float:
        return float(self.per_replica_max.max())

    @property
    def std(self) -> float:
        return float(self.per_replica_max.std(ddof=1)) if self.replicas > 1 else 0.0

    def per_k_mean(self) -> np.ndarray:
        return self.per_k.mean(axis=0)

    def summary(self) -> dict:
        return {
            "n": self.n,
            "replicas": self.replicas,
            "k_cut": self.k_cut,
            "mean": self.mean,
            "median": self.median,
            "max": self.max,
            "std": self.std,
            "per_k_mean": self.per_k_mean().tolist(),
            "weight_mean": float(np.nanmean(self.weight)) if np.isfinite(self.weight).any() else None,
        }


PhiEval = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def ray_limit(params: ModelParams, k_cut: int = DEFAULT_K_CUT, sol: Optional[EquilibriumSolution] = None):
    """``(phi, T)`` callables of the small-configuration limit ``phi_k = a_k t``."""
    if sol is None:
        sol = solve(params)
    a = np.zeros(k_cut)
    m = min(k_cut, sol.K)
    a[:m] = sol.a[:m]
    s = sol.s_star
    return (lambda t: np.outer(t, a)), (lambda t: s * np.asarray(t))


def lln_deviation(paths: Sequence[RecordedPath], phi_eval: PhiEval, k_cut: int = DEFAULT_K_CUT,
                  T: Optional[float] = None, T_eval: Optional[PhiEval] = None) -> DeviationReport:
    """Sup-deviation over ``t <= T`` of each path from ``phi``.

    ``phi_eval`` is either an array on the paths' grid (rows = times) or a
    callable of the grid.  All paths must share one grid.
    """
    if not paths:
        raise ConfigError("no paths to compare", key="paths")
    grid = paths[0].t
    for p in paths[1:]:
        if p.t.shape != grid.shape or np.any(p.t != grid):
            raise ConfigError("paths do not share a time grid", key="grid")
    if T is None:
        T = float(grid[-1])
    sel = grid <= T + 1e-12
    phi = phi_eval(grid) if callable(phi_eval) else np.asarray(phi_eval, dtype=np.float64)
    if phi.ndim != 2 or phi.shape[0] != grid.size:
        raise ConfigError(f"limit evaluated on {phi.shape[0]} times, paths have {grid.size}", key="grid")
    if phi.shape[1] < k_cut or paths[0].k_record < k_cut:
        raise ConfigError(f"k_cut={k_cut} exceeds the recorded classes", key="k_cut")
    Tw = None
    if T_eval is not None:
        Tw = T_eval(grid) if callable(T_eval) else np.asarray(T_eval, dtype=np.float64)
    per_k = np.empty((len(paths), k_cut))
    weight = np.full(len(paths), math.nan)
    for r, p in enumerate(paths):
        per_k[r] = np.max(np.abs(p.X[sel, :k_cut] - phi[sel, :k_cut]), axis=0)
        if Tw is not None:
            weight[r] = float(np.max(np.abs(p.S[sel] - Tw[sel])))
    return DeviationReport(paths[0].n, grid, per_k, weight)


def weight_tail_check(path: RecordedPath, params: ModelParams, L: int, T: Optional[float] = None) -> dict:
    """Compare ``sup_t |S^n(t) - sum_{k<=L} w(k) X^n_k(t)|`` with
    ``(c~ + 2T) sup_{k>L} w(k)/k``, where ``c~`` is the seed's scaled degree."""
    if L > path.k_record:
        raise ConfigError(f"L={L} exceeds the recorded classes", key="L")
    if T is None:
        T = float(path.t[-1])
    sel = path.t <= T + 1e-12
    w = params.w.array(L)
    partial = path.X[sel, :L] @ w
    lhs = float(np.max(np.abs(path.S[sel] - partial)))
    k = np.arange(L + 1, max(10 * (L + 1), params.w.probe) + 1)
    ratio = float(np.max(params.w(k) / k))
    c_n = path.c_n if path.c_n is not None else np.zeros(1)
    ct = float(np.arange(1, c_n.size + 1) @ c_n)
    rhs = (ct + 2.0 * T) * ratio
    return {"lhs": lhs, "rhs": rhs, "pass": bool(lhs <= rhs * (1 + 1e-12) + 1e-15)}


def loglog_slope(ns: Sequence[float], values: Sequence[float]) -> float:
    ns, values = np.asarray(ns, float), np.asarray(values, float)
    if ns.size < 2:
        return math.nan
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


@dataclass
class StudyTable:
    ns: list
    reports: list
    slope: float
    in_band: Optional[bool]
    band: tuple = SLOPE_BAND

    def rows(self):
        """``(n, k, deviation)`` rows: per-class replica means, with
        ``k = 0`` standing for the max over classes."""
        out = []
        for n, rep in zip(self.ns, self.reports):
            out.append((n, 0, rep.mean))
            for k, v in enumerate(rep.per_k_mean(), start=1):
                out.append((n, k, float(v)))
        return out

    def to_dict(self) -> dict:
        return {
            "ns": list(self.ns),
            "summaries": [r.summary() for r in self.reports],
            "slope": None if math.isnan(self.slope) else self.slope,
            "slope_band": list(self.band),
            "slope_in_band": self.in_band,
            "slope_is_soft": True,
        }


def convergence_study(params: ModelParams, ns: Sequence[int], replicas: int = 20, T: float = 1.0,
                      k_cut: int = DEFAULT_K_CUT, seed: int = 0, grid_points: int = 101,
                      init: Optional[InitialConfiguration] = None,
                      limit: Optional[tuple] = None, workers: Optional[int] = None) -> StudyTable:
    """Deviation from the limit for each ``n`` and the fitted log-log slope.

    The slope is reported against a soft band, never asserted.  Replica
    seeds for ``n`` are spawned from ``(seed, n)``.
    """
    ns = [int(n) for n in ns]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("ns must be strictly increasing", key="ns")
    if init is None:
        init = InitialConfiguration.small()
    if limit is None:
        if init.kind != "small":
            raise ConfigError("large configurations need an explicit limit", key="init")
        limit = ray_limit(params, k_cut)
    phi, Tw = limit
    grid = np.linspace(0.0, T, grid_points)
    reports = []
    for n in ns:
        paths = simulate_replicas(init, params, n, grid, replicas, seed=_study_seed(seed, n),
                                  k_record=k_cut, workers=workers)
        reports.append(lln_deviation(paths, phi, k_cut, T, Tw))
    slope = loglog_slope(ns, [r.mean for r in reports])
    in_band = None if math.isnan(slope) else bool(SLOPE_BAND[0] <= slope <= SLOPE_BAND[1])
    return StudyTable(ns, reports, slope, in_band)


def _study_seed(seed: int, n: int) -> int:
    return int(np.random.SeedSequence([seed, n]).generate_state(1)[0])


@dataclass
class SlopeReport:
    t_end: float
    k: np.ndarray
    ratio: np.ndarray
    target: np.ndarray
    rel_error: np.ndarray
    passed: bool
    warning: Optional[str] = None
    tolerance: float = 0.01

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("k", "ratio", "target", "rel_error"):
            d[key] = np.asarray(d[key]).tolist()
        d["empirical_band"] = True
        return d


def large_init_slope(traj: Trajectory, equilibrium: EquilibriumSolution, k_cut: int = 8,
                     init: Optional[InitialConfiguration] = None, p0: Optional[float] = None,
                     tolerance: float = 0.01) -> SlopeReport:
    """Relative error of ``phi_k(t_end)/t_end`` against ``a_k`` for ``k <= k_cut``.

    The 1% band is empirical.  A warning is attached when ``t_end`` is below
    ``10 c~ / p0`` (needs ``init`` and ``p0``).
    """
    if k_cut > traj.K or k_cut > equilibrium.K:
        raise ConfigError(f"k_cut={k_cut} exceeds the truncation", key="k_cut")
    t_end = float(traj.t[-1])
    if not t_end > 0.0:
        raise ConfigError("trajectory must end at t > 0", key="t_end")
    ratio = traj.X[-1, :k_cut] / t_end
    target = equilibrium.a[:k_cut]
    rel = np.abs(ratio - target) / target
    warning = None
    if init is not None and p0 is not None and t_end < 10.0 * init.c_tilde / p0:
        warning = f"t_end={t_end:g} < 10 c~/p0 = {10 * init.c_tilde / p0:g}; slope may not have settled"
    return SlopeReport(t_end, np.arange(1, k_cut + 1), ratio, target, rel,
                       bool(np.all(rel <= tolerance)), warning, tolerance)
