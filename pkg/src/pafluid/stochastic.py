"""Class-level Monte-Carlo simulation of the graph and urn degree-count chains.

Vertices (urns) are never stored: the chain lives on the counts ``Z_k``.
Weighted class selection uses a Fenwick tree keyed by ``w(k) Z_k``.  In the
graph model a same-class double pick is a self-loop with probability
``1/Z_k``, which is exactly the chance that two independent weighted picks
hit the same vertex.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba as nb
import numpy as np

from .errors import ConfigError, SeedingError, TableEvaluationError
from .params import ModelParams

GRAPH, URN = 0, 1
RESYNC_EVERY = 1 << 16
UNIFORMS_PER_STEP = {GRAPH: 4, URN: 2}
_MAX_TOUCH = 6

# counters layout
_N, _UNITS, _TOTAL, _ADDS, _KMAX, _AUDIT_FAIL, _MAX_D = range(7)


# --------------------------------------------------------------------------- kernels

@nb.njit(cache=True, nogil=True)
def _fen_add(tree, i, delta):
    n = tree.size - 1
    while i <= n:
        tree[i] += delta
        i += i & (-i)


@nb.njit(cache=True, nogil=True)
def _fen_build(tree, Z, w):
    n = tree.size - 1
    tree[:] = 0.0
    for i in range(1, n + 1):
        tree[i] += w[i] * Z[i]
        j = i + (i & (-i))
        if j <= n:
            tree[j] += tree[i]


@nb.njit(cache=True, nogil=True)
def _fen_pick(tree, Z, u):
    """Class ``k`` with probability ``w(k) Z_k / S`` for ``u`` uniform on [0,1)."""
    n = tree.size - 1  # power of two, tree[n] = S
    target = u * tree[n]
    pos = 0
    step = n
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] <= target:
            pos = nxt
            target -= tree[nxt]
        step >>= 1
    k = pos + 1
    if k > n:
        k = n
    # rounding can land on an empty class; move to the nearest occupied one
    if Z[k] == 0:
        j = k - 1
        while j >= 1 and Z[j] == 0:
            j -= 1
        if j >= 1:
            return j
        j = k + 1
        while j <= n and Z[j] == 0:
            j += 1
        return j
    return k


@nb.njit(cache=True, nogil=True)
def _move(Z, tree, w, k, delta, tidx, tdel, nt):
    Z[k] += delta
    _fen_add(tree, k, delta * w[k])
    tidx[nt] = k
    tdel[nt] = delta
    return nt + 1


@nb.njit(cache=True, nogil=True)
def _step(model, Z, tree, w, p, u0, u1, u2, u3, tidx, tdel):
    """One transition; returns ``(n_touched, added)``.  Touched ``(k, delta)``
    pairs are written to ``tidx``/``tdel`` so the move can be undone."""
    nt = 0
    if model == URN:
        if u0 < p:
            nt = _move(Z, tree, w, 1, 1, tidx, tdel, nt)
            return nt, 1
        k = _fen_pick(tree, Z, u1)
        nt = _move(Z, tree, w, k, -1, tidx, tdel, nt)
        nt = _move(Z, tree, w, k + 1, 1, tidx, tdel, nt)
        return nt, 0
    if u0 < p:
        k = _fen_pick(tree, Z, u1)
        nt = _move(Z, tree, w, k, -1, tidx, tdel, nt)
        nt = _move(Z, tree, w, k + 1, 1, tidx, tdel, nt)
        nt = _move(Z, tree, w, 1, 1, tidx, tdel, nt)
        return nt, 1
    # both picks are made against the pre-step configuration
    k1 = _fen_pick(tree, Z, u1)
    k2 = _fen_pick(tree, Z, u2)
    if k1 == k2 and u3 * Z[k1] < 1.0:
        nt = _move(Z, tree, w, k1, -1, tidx, tdel, nt)
        nt = _move(Z, tree, w, k1 + 2, 1, tidx, tdel, nt)
        return nt, 0
    nt = _move(Z, tree, w, k1, -1, tidx, tdel, nt)
    nt = _move(Z, tree, w, k1 + 1, 1, tidx, tdel, nt)
    nt = _move(Z, tree, w, k2, -1, tidx, tdel, nt)
    nt = _move(Z, tree, w, k2 + 1, 1, tidx, tdel, nt)
    return nt, 0


@nb.njit(cache=True, nogil=True)
def _undo(Z, tree, w, tidx, tdel, nt):
    for i in range(nt - 1, -1, -1):
        k = tidx[i]
        Z[k] -= tdel[i]
        _fen_add(tree, k, -tdel[i] * w[k])


@nb.njit(cache=True, nogil=True)
def _advance(model, Z, tree, w, p, U, n_steps, counters, snap_steps, snap_pos,
             snapZ, snapS, snapTot, audit):
    """Run up to ``n_steps`` steps consuming ``U`` row by row.

    Returns ``(steps_done, status, snap_pos)``; status 1 means the class
    capacity must grow before the next step.  Snapshot ``i`` is taken when
    the step counter equals ``snap_steps[i]``.
    """
    cap = Z.size - 1
    kr = snapZ.shape[1]
    tidx = np.empty(_MAX_TOUCH, np.int64)
    tdel = np.empty(_MAX_TOUCH, np.int64)
    dk = np.zeros(_MAX_TOUCH, np.int64)
    grow = 2 if model == GRAPH else 1
    unit = 2 if model == GRAPH else 1
    done = 0
    while True:
        while snap_pos < snap_steps.size and snap_steps[snap_pos] == counters[_N]:
            for k in range(1, min(kr, cap) + 1):
                snapZ[snap_pos, k - 1] = Z[k]
            snapS[snap_pos] = tree[cap]
            snapTot[snap_pos, 0] = counters[_UNITS]
            snapTot[snap_pos, 1] = counters[_TOTAL]
            snap_pos += 1
        if done >= n_steps:
            return done, 0, snap_pos
        if counters[_KMAX] + grow >= cap:
            return done, 1, snap_pos
        nt, added = _step(model, Z, tree, w, p, U[done, 0], U[done, 1],
                          U[done, 2 % U.shape[1]], U[done, 3 % U.shape[1]], tidx, tdel)
        counters[_N] += 1
        counters[_UNITS] += added
        counters[_TOTAL] += unit
        counters[_ADDS] += added
        for i in range(nt):
            if tdel[i] > 0 and tidx[i] > counters[_KMAX]:
                counters[_KMAX] = tidx[i]
        if audit:
            s_units = 0
            s_total = 0
            for i in range(nt):
                s_units += tdel[i]
                s_total += tidx[i] * tdel[i]
                if Z[tidx[i]] < 0:
                    counters[_AUDIT_FAIL] += 1
            if s_units != added or s_total != unit:
                counters[_AUDIT_FAIL] += 1
            # net change per touched class
            for i in range(nt):
                acc = 0
                for j in range(nt):
                    if tidx[j] == tidx[i]:
                        acc += tdel[j]
                dk[i] = acc if acc >= 0 else -acc
                if dk[i] > counters[_MAX_D]:
                    counters[_MAX_D] = dk[i]
        done += 1


@nb.njit(cache=True, nogil=True)
def _frequency_trials(model, Z, tree, w, p, U, classes):
    """Apply one step from a frozen state per row of ``U`` and tally ``d_k``
    (offset by 2) for each requested class; the state is restored each time."""
    counts = np.zeros((classes.size, 5), np.int64)
    tidx = np.empty(_MAX_TOUCH, np.int64)
    tdel = np.empty(_MAX_TOUCH, np.int64)
    for r in range(U.shape[0]):
        nt, added = _step(model, Z, tree, w, p, U[r, 0], U[r, 1],
                          U[r, 2 % U.shape[1]], U[r, 3 % U.shape[1]], tidx, tdel)
        for c in range(classes.size):
            d = 0
            for i in range(nt):
                if tidx[i] == classes[c]:
                    d += tdel[i]
            counts[c, d + 2] += 1
        _undo(Z, tree, w, tidx, tdel, nt)
    return counts


@nb.njit(cache=True, nogil=True)
def _vertex_level(model, deg, n_units, w_tab, p, U, n_steps):
    """Reference simulator on individual vertex degrees (linear-scan sampling).

    ``deg[:n_units]`` holds the current degrees; returns the new unit count.
    """
    for j in range(n_steps):
        S = 0.0
        for v in range(n_units):
            S += w_tab[deg[v]]
        if model == URN:
            if U[j, 0] < p:
                deg[n_units] = 1
                n_units += 1
            else:
                v = _scan(deg, n_units, w_tab, U[j, 1] * S)
                deg[v] += 1
            continue
        if U[j, 0] < p:
            v = _scan(deg, n_units, w_tab, U[j, 1] * S)
            deg[v] += 1
            deg[n_units] = 1
            n_units += 1
        else:
            v1 = _scan(deg, n_units, w_tab, U[j, 1] * S)
            v2 = _scan(deg, n_units, w_tab, U[j, 2] * S)
            deg[v1] += 1
            deg[v2] += 1
    return n_units


@nb.njit(cache=True, nogil=True)
def _scan(deg, n_units, w_tab, target):
    acc = 0.0
    for v in range(n_units):
        acc += w_tab[deg[v]]
        if acc > target:
            return v
    v = n_units - 1
    while w_tab[deg[v]] == 0.0:
        v -= 1
    return v


# --------------------------------------------------------------------------- state

def _model_code(params: ModelParams) -> int:
    return GRAPH if params.model == "graph" else URN


def _pow2_at_least(n: int) -> int:
    return 1 << max(4, int(n - 1).bit_length())


@dataclass
class DegreeCountState:
    """Counts ``Z[k]`` (index 0 unused) with a Fenwick tree over ``w(k) Z_k``.

    ``units`` is the number of vertices (urns), ``total`` the total degree
    (number of balls).  ``initial`` holds ``(units, total)`` at seeding and
    ``c_n`` the seeding proportions ``Z_k(0)/n``.
    """

    params: ModelParams
    Z: np.ndarray
    tree: np.ndarray = field(repr=False)
    wtab: np.ndarray = field(repr=False)
    counters: np.ndarray
    initial: tuple
    rng: np.random.Generator = field(repr=False)
    c_n: np.ndarray = field(default=None, repr=False)
    resync_drift: float = 0.0

    @classmethod
    def from_counts(cls, params: ModelParams, counts: Sequence[int], rng=None,
                    seed: Optional[int] = None) -> "DegreeCountState":
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 1 or np.any(counts < 0):
            raise ConfigError("counts must be a nonnegative vector", key="init")
        if not counts.any():
            raise SeedingError("initial counts are all zero", key="init")
        kmax = int(np.flatnonzero(counts)[-1]) + 1
        cap = _pow2_at_least(2 * kmax + 8)
        Z = np.zeros(cap + 1, np.int64)
        Z[1:counts.size + 1] = counts
        wtab = _weight_table(params, cap)
        tree = np.zeros(cap + 1)
        _fen_build(tree, Z, wtab)
        k = np.arange(cap + 1)
        units, total = int(Z.sum()), int(k @ Z)
        counters = np.zeros(7, np.int64)
        counters[[_UNITS, _TOTAL, _KMAX]] = units, total, kmax
        if rng is None:
            rng = np.random.default_rng(seed)
        return cls(params, Z, tree, wtab, counters, (units, total), rng)

    @property
    def cap(self) -> int:
        return self.Z.size - 1

    @property
    def n(self) -> int:
        return int(self.counters[_N])

    @property
    def S(self) -> float:
        return float(self.tree[self.cap])

    @property
    def units(self) -> int:
        return int(self.counters[_UNITS])

    @property
    def total(self) -> int:
        return int(self.counters[_TOTAL])

    @property
    def additions(self) -> int:
        return int(self.counters[_ADDS])

    @property
    def kmax(self) -> int:
        return int(self.counters[_KMAX])

    def counts(self) -> np.ndarray:
        """``Z_1..Z_kmax``."""
        return self.Z[1:self.kmax + 1].copy()

    def S_exact(self) -> float:
        return math.fsum(self.wtab[1:] * self.Z[1:])

    def grow(self) -> None:
        cap = 2 * self.cap
        Z = np.zeros(cap + 1, np.int64)
        Z[:self.Z.size] = self.Z
        self.Z = Z
        self.wtab = _weight_table(self.params, cap)
        self.tree = np.zeros(cap + 1)
        _fen_build(self.tree, self.Z, self.wtab)

    def resync(self) -> float:
        """Rebuild the tree from ``Z``; returns the relative drift removed."""
        old = self.S
        _fen_build(self.tree, self.Z, self.wtab)
        new = self.S
        drift = abs(old - new) / new if new > 0 else 0.0
        self.resync_drift = max(self.resync_drift, drift)
        return drift

    def audit(self) -> dict:
        """Exact count identities recomputed from ``Z``."""
        k = np.arange(self.cap + 1)
        units, total = int(self.Z.sum()), int(k @ self.Z)
        u0, t0 = self.initial
        unit = 2 if self.params.model == "graph" else 1
        S = self.S_exact()
        return {
            "units": units == self.units == u0 + self.additions,
            "total": total == self.total == t0 + unit * self.n,
            "nonnegative": bool(np.all(self.Z >= 0)),
            "step_checks_failed": int(self.counters[_AUDIT_FAIL]),
            "max_abs_d": int(self.counters[_MAX_D]),
            "S_rel_error": abs(S - self.S) / S if S > 0 else 0.0,
        }

    def audit_ok(self) -> bool:
        a = self.audit()
        return (a["units"] and a["total"] and a["nonnegative"] and a["step_checks_failed"] == 0
                and a["max_abs_d"] <= 2 and a["S_rel_error"] <= 1e-9)


def _weight_table(params: ModelParams, cap: int) -> np.ndarray:
    w = np.zeros(cap + 1)
    w[1:] = params.w.array(cap)
    return w


def seed_initial(init, n: int, params: ModelParams, rng=None, seed: Optional[int] = None) -> DegreeCountState:
    """Initial state for scale ``n``: the one-edge graph or one-ball urn for
    small configurations, ``Z_k(0) = round(n c_k)`` for large ones."""
    if n < 1:
        raise ConfigError("n must be >= 1", key="n")
    if init.kind == "small":
        counts = [2] if params.model == "graph" else [1]
    else:
        counts = np.rint(n * init.c).astype(np.int64)
        if not counts.any():
            raise SeedingError(f"large configuration rounds to zero counts at n={n}", key="init")
    state = DegreeCountState.from_counts(params, counts, rng=rng, seed=seed)
    c_n = np.zeros(max(1, len(counts)))
    c_n[:len(counts)] = np.asarray(counts) / n
    state.c_n = c_n
    return state


def _uniforms(state: DegreeCountState, n_steps: int) -> np.ndarray:
    m = UNIFORMS_PER_STEP[_model_code(state.params)]
    return state.rng.random((n_steps, m))


def advance(state: DegreeCountState, n_steps: int, audit: bool = False,
            snap_steps: Optional[np.ndarray] = None, k_record: int = 0):
    """Advance ``n_steps`` steps; optional snapshots at absolute step counts.

    Uniforms are drawn in blocks of ``2^16`` steps, after each of which the
    tree is rebuilt from ``Z``.  The number of uniforms drawn per step is
    fixed, so results do not depend on block boundaries.
    """
    if n_steps < 0:
        raise ConfigError("steps must be >= 0", key="steps")
    model = _model_code(state.params)
    if snap_steps is None:
        snap_steps = np.empty(0, np.int64)
    snap_steps = np.asarray(snap_steps, np.int64)
    nsnap = snap_steps.size
    snapZ = np.zeros((nsnap, max(k_record, 1)), np.int64)
    snapS = np.zeros(nsnap)
    snapTot = np.zeros((nsnap, 2), np.int64)
    pos = 0
    remaining = n_steps
    p = state.params.p
    while True:
        block = min(remaining, RESYNC_EVERY)
        U = _uniforms(state, block)
        off = 0
        while True:
            done, status, pos = _advance(model, state.Z, state.tree, state.wtab, p, U[off:], block - off,
                                         state.counters, snap_steps, pos, snapZ, snapS, snapTot, audit)
            off += done
            if status == 1:
                state.grow()
                continue
            break
        remaining -= block
        if block == RESYNC_EVERY or remaining == 0:
            state.resync()
        if remaining == 0:
            break
    # classes recorded beyond the capacity at snapshot time are zero by construction
    return snapZ[:, :k_record] if k_record else None, snapS, snapTot


def step_urn(state: DegreeCountState) -> DegreeCountState:
    if state.params.model != "urn":
        raise ConfigError("step_urn on a graph state", key="model")
    advance(state, 1)
    return state


def step_graph(state: DegreeCountState) -> DegreeCountState:
    if state.params.model != "graph":
        raise ConfigError("step_graph on an urn state", key="model")
    advance(state, 1)
    return state


def frequency_trials(state: DegreeCountState, classes: Sequence[int], trials: int) -> np.ndarray:
    """Counts of ``d_k = -2..2`` (columns) over ``trials`` independent single
    steps from the frozen ``state``, one row per class."""
    classes = np.asarray(classes, np.int64)
    while int(classes.max()) + 2 >= state.cap or state.kmax + 2 >= state.cap:
        state.grow()
    U = _uniforms(state, trials)
    Z0 = state.Z.copy()
    counts = _frequency_trials(_model_code(state.params), state.Z, state.tree, state.wtab,
                               state.params.p, U, classes)
    if not np.array_equal(Z0, state.Z):
        raise AssertionError("frequency trials failed to restore the frozen state")
    state.resync()
    return counts


# --------------------------------------------------------------------------- exact tables

D_VALUES = np.array([-2, -1, 0, 1, 2])


def increment_pmf(Z: Sequence[int], k: int, params: ModelParams) -> np.ndarray:
    """Exact law of ``d_k`` (entries for ``-2..2``) from counts ``Z_1, Z_2, ...``.

    With ``u_j = w(j) Z_j / S`` and ``l_j = w(j)^2 Z_j / S^2`` the graph model
    has separate tables for ``k = 1``, ``k = 2`` and ``k >= 3``.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if k < 1:
        raise ConfigError("class index must be >= 1", key="k")
    p = params.p
    n = max(Z.size, k) + 1
    z = np.zeros(n + 1)
    z[1:Z.size + 1] = Z
    w = np.zeros(n + 1)
    w[1:] = params.w.array(n)
    S = float(w @ z)
    if not S > 0.0:
        raise TableEvaluationError("S = 0: no class can be selected")
    u = w * z / S
    l = w * w * z / S ** 2
    pmf = np.zeros(5)  # -2, -1, 0, +1, +2
    if params.model == "urn":
        if k == 1:
            pmf[3] = p
            pmf[1] = (1 - p) * u[1]
        else:
            pmf[3] = (1 - p) * u[k - 1]
            pmf[1] = (1 - p) * u[k]
        pmf[2] = 1.0 - pmf[1] - pmf[3]
    elif k == 1:
        q = 1 - p
        pmf[3] = p * (1 - u[1])
        pmf[2] = p * u[1] + q * (1 - u[1]) ** 2
        pmf[1] = 2 * q * u[1] * (1 - u[1]) + q * l[1]
        pmf[0] = q * (u[1] ** 2 - l[1])
    else:
        q = 1 - p
        um, uk = u[k - 1], u[k]
        r = 1 - um - uk
        l2 = l[k - 2] if k >= 3 else 0.0
        pmf[4] = q * (um ** 2 - l[k - 1])
        pmf[3] = p * um + q * l2 + 2 * q * um * r
        pmf[2] = p * r + q * l[k - 1] + 2 * q * um * uk + q * r ** 2 - q * l2
        pmf[1] = p * uk + q * l[k] + 2 * q * uk * r
        pmf[0] = q * (uk ** 2 - l[k])
    tol = 1e-12
    if np.any(pmf < -tol) or np.any(pmf > 1 + tol) or abs(math.fsum(pmf) - 1.0) > tol:
        raise TableEvaluationError(f"increment law for k={k} is not a probability vector: {pmf}")
    # cancellation in u^2 - l can leave -1e-17 where the exact value is 0
    return np.clip(pmf, 0.0, 1.0)


def drift(X: Sequence[float], S: float, n: int, k: int, params: ModelParams) -> float:
    """Conditional mean of ``d_k`` written in the scaled variables
    ``X_j = Z_j / n`` and ``S/n``; loop corrections carry a ``1/n``."""
    X = np.asarray(X, dtype=np.float64)
    p = params.p
    Sn = S / n

    def x(j):
        return X[j - 1] if 1 <= j <= X.size else 0.0

    def wx(j):
        return params.w(j) * x(j) / Sn

    def w2x(j):
        return params.w(j) ** 2 * x(j) / Sn ** 2

    if params.model == "urn":
        if k == 1:
            return p - (1 - p) * wx(1)
        return (1 - p) * wx(k - 1) - (1 - p) * wx(k)
    if k == 1:
        return p - (2 - p) * wx(1) + (1 - p) / n * w2x(1)
    if k == 2:
        return (2 - p) * (wx(1) - wx(2)) + (1 - p) / n * (-2 * w2x(1) + w2x(2))
    return (2 - p) * (wx(k - 1) - wx(k)) + (1 - p) / n * (w2x(k - 2) - 2 * w2x(k - 1) + w2x(k))


# --------------------------------------------------------------------------- paths

@dataclass
class RecordedPath:
    """Interpolated path ``X^n_k(t)`` (columns ``k = 1..k_record``) and the
    weight path on a time grid, plus the raw floor snapshots."""

    n: int
    t: np.ndarray
    X: np.ndarray
    S: np.ndarray
    units: np.ndarray
    totals: np.ndarray
    audit: dict
    c_n: np.ndarray = None

    @property
    def k_record(self) -> int:
        return self.X.shape[1]

    def lipschitz_ratio(self) -> float:
        """``max |X_k(t) - X_k(t')| / |t - t'|`` over recorded pairs.

        Piecewise-linear paths attain the maximum on adjacent grid points
        only if the grid resolves every step, so all pairs are scanned.
        """
        if self.t.size < 2:
            return 0.0
        dt = np.abs(self.t[:, None] - self.t[None, :])
        np.fill_diagonal(dt, np.inf)
        best = 0.0
        for k in range(self.k_record):
            dx = np.abs(self.X[:, None, k] - self.X[None, :, k])
            best = max(best, float(np.max(dx / dt)))
        return best


def grid_snap_steps(n: int, grid: np.ndarray) -> tuple:
    nt = n * np.asarray(grid, dtype=np.float64)
    lo = np.floor(nt).astype(np.int64)
    hi = np.ceil(nt).astype(np.int64)
    frac = nt - lo
    return lo, hi, frac


def run_chain(state: DegreeCountState, n: int, grid: Sequence[float], k_record: int = 10,
              audit: bool = False) -> RecordedPath:
    """Advance the chain over ``t`` in ``grid`` (step ``j`` is time ``j/n``)
    and return ``X^n_k(t)`` for ``k <= k_record`` and the weight path."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size and (np.any(grid < 0) or np.any(np.diff(grid) < 0)):
        raise ConfigError("grid must be sorted and nonnegative", key="grid")
    lo, hi, frac = grid_snap_steps(n, grid)
    start = state.n
    wanted = np.unique(np.concatenate([lo, hi])) + start
    steps = int(wanted[-1] - start) if wanted.size else 0
    snapZ, snapS, snapTot = advance(state, steps, audit=audit, snap_steps=wanted, k_record=k_record)
    idx_lo = np.searchsorted(wanted, lo + start)
    idx_hi = np.searchsorted(wanted, hi + start)
    f = frac[:, None]
    Zlo, Zhi = snapZ[idx_lo].astype(np.float64), snapZ[idx_hi].astype(np.float64)
    X = (Zlo + f * (Zhi - Zlo)) / n
    S = (snapS[idx_lo] + frac * (snapS[idx_hi] - snapS[idx_lo])) / n
    return RecordedPath(n, grid, X, S, snapTot[idx_lo, 0], snapTot[idx_lo, 1], state.audit(), state.c_n)


def replica_seeds(seed: int, replicas: int) -> list:
    return np.random.SeedSequence(seed).spawn(replicas)


def simulate_replicas(init, params: ModelParams, n: int, grid: Sequence[float], replicas: int,
                      seed: int, k_record: int = 10, audit: bool = False,
                      workers: Optional[int] = None) -> list:
    """Independent replicas on spawned seed streams, run on a thread pool
    (the kernels release the GIL).  Output order follows replica index."""

    def one(ss):
        state = seed_initial(init, n, params, rng=np.random.default_rng(ss))
        return run_chain(state, n, grid, k_record=k_record, audit=audit)

    seeds = replica_seeds(seed, replicas)
    if workers == 1 or replicas == 1:
        return [one(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(one, seeds))


def final_counts_class_level(params: ModelParams, n_steps: int, replicas: int, seed: int,
                             k_out: int = 40) -> np.ndarray:
    """``Z_1..Z_k_out`` and the unit count after ``n_steps`` from the small seed,
    one row per replica (last column = units)."""
    from .dynamics import InitialConfiguration

    out = np.zeros((replicas, k_out + 1), np.int64)
    for r, ss in enumerate(replica_seeds(seed, replicas)):
        st = seed_initial(InitialConfiguration.small(), 1, params, rng=np.random.default_rng(ss))
        advance(st, n_steps)
        m = min(k_out, st.cap)
        out[r, :m] = st.Z[1:m + 1]
        out[r, -1] = st.units
    return out


def final_counts_vertex_level(params: ModelParams, n_steps: int, replicas: int, seed: int,
                              k_out: int = 40) -> np.ndarray:
    """Same output as :func:`final_counts_class_level` from the vertex-level
    reference simulator."""
    model = _model_code(params)
    size = 2 + n_steps + 1
    max_deg = 2 * n_steps + 4
    w_tab = np.zeros(max_deg + 1)
    w_tab[1:] = params.w.array(max_deg)
    out = np.zeros((replicas, k_out + 1), np.int64)
    m = UNIFORMS_PER_STEP[model]
    for r, ss in enumerate(replica_seeds(seed, replicas)):
        rng = np.random.default_rng(ss)
        deg = np.zeros(size, np.int64)
        if model == GRAPH:
            deg[:2] = 1
            units = 2
        else:
            deg[0] = 1
            units = 1
        units = _vertex_level(model, deg, units, w_tab, params.p, rng.random((n_steps, m)), n_steps)
        hist = np.bincount(deg[:units], minlength=k_out + 1)
        out[r, :k_out] = hist[1:k_out + 1]
        out[r, -1] = units
    return out
