"""Dormand-Prince 5(4) with step-size control and a nonnegativity guard."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import StiffnessError

# Butcher tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    guard_rejections: int = 0
    clamped: int = 0


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray
    stats: StepStats = field(default_factory=StepStats)


def dopri45(f: Callable[[float, np.ndarray], np.ndarray], y0: np.ndarray, t0: float,
            t_eval: Sequence[float], rtol: float = 1e-9, atol: float = 1e-14,
            guard: Optional[Callable[[np.ndarray], float]] = None,
            guard_slice: slice = slice(None), h0: Optional[float] = None,
            max_consecutive_rejects: int = 60, max_steps: int = 10_000_000) -> Solution:
    """Integrate ``y' = f(t, y)`` and return ``y`` at each time in ``t_eval``.

    ``t_eval`` must be sorted and ``>= t0``; steps are shortened to land on
    every output time.  When ``guard`` is given it maps a state to a scale
    ``g`` and entries of ``y[guard_slice]`` below ``-1e-12 g`` reject the step;
    entries in ``[-1e-12 g, 0)`` are set to zero.
    """
    t_eval = np.asarray(t_eval, dtype=np.float64)
    if t_eval.size and (np.any(np.diff(t_eval) < 0) or t_eval[0] < t0):
        raise ValueError("t_eval must be sorted and start at or after t0")
    y = np.array(y0, dtype=np.float64)
    out = np.empty((t_eval.size, y.size))
    stats = StepStats()
    t = float(t0)
    t_final = float(t_eval[-1]) if t_eval.size else t
    k1 = f(t, y)
    if h0 is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean((y / scale) ** 2))
        d1 = np.sqrt(np.mean((k1 / scale) ** 2))
        h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
        h = min(h, max(t_final - t, 1e-12))
    else:
        h = h0
    i = 0
    while i < t_eval.size and t_eval[i] <= t:
        out[i] = y
        i += 1
    rejects = 0
    steps = 0
    while i < t_eval.size:
        target = t_eval[i]
        last = False
        if t + h >= target:
            h_try = target - t
            last = True
        else:
            h_try = h
        ks = [k1]
        for s in range(1, 7):
            ys = y + h_try * sum(a * k for a, k in zip(_A[s], ks))
            ks.append(f(t + _C[s] * h_try, ys))
        y_new = ys  # FSAL: stage 7 argument is the 5th-order solution
        err_vec = h_try * sum(e * k for e, k in zip(_E, ks))
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / sc) ** 2)))
        ok = err <= 1.0
        clamped_now = False
        if ok and guard is not None:
            g = guard(y_new)
            seg = y_new[guard_slice]
            if np.any(seg < -1e-12 * g):
                ok = False
                stats.guard_rejections += 1
                err = max(err, 4.0)
            else:
                neg = seg < 0.0
                if neg.any():
                    stats.clamped += int(neg.sum())
                    seg[neg] = 0.0
                    clamped_now = True
        if ok:
            t = target if last else t + h_try
            y = y_new
            k1 = f(t, y) if clamped_now else ks[6]
            stats.accepted += 1
            rejects = 0
            while i < t_eval.size and t_eval[i] <= t:
                out[i] = y
                i += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if not (last and h_try < h):
                h = h_try * fac
        else:
            stats.rejected += 1
            rejects += 1
            if rejects > max_consecutive_rejects:
                raise StiffnessError(
                    f"{rejects} consecutive step rejections at t={t:.6g}; "
                    "lower the tolerance or raise the truncation K"
                )
            h = h_try * max(0.1, 0.9 * err ** -0.25)
        steps += 1
        if steps > max_steps:
            raise StiffnessError(f"step budget {max_steps} exhausted at t={t:.6g}")
    return Solution(t_eval.copy(), out, stats)
