"""Trajectory sampling for the elephant random walk with stops.

The walk is sampled from its marginal one-step law given the step counts,

    P(+1 | F_n) = (p N+ + q N-) / n,
    P(-1 | F_n) = (q N+ + p N-) / n,
    P( 0 | F_n) = 1 - b (N+ + N-) / n,

which is what the copy/flip/stop rule yields after averaging over the
uniformly chosen past step.  One uniform variate is consumed per step and
memory is O(1) in the horizon.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import CapError, StateError
from .model import ModelParams
from .rng import SplitMix64, stream_key, stream_keys, uniform_at

PATH_CAP = 10_000_000


class Checkpoint(NamedTuple):
    k: int
    s: int
    sigma: int
    range: int
    returns_to_zero: int


@dataclass
class WalkState:
    rng: SplitMix64
    n: int = 0
    n_plus: int = 0
    n_minus: int = 0
    min_pos: int = 0
    max_pos: int = 0
    returns_to_zero: int = 0

    @property
    def position(self) -> int:
        return self.n_plus - self.n_minus

    @property
    def moves(self) -> int:
        return self.n_plus + self.n_minus

    @property
    def range(self) -> int:
        return self.max_pos - self.min_pos + 1

    def _apply(self, x: int) -> None:
        self.n += 1
        if x > 0:
            self.n_plus += 1
        elif x < 0:
            self.n_minus += 1
        pos = self.n_plus - self.n_minus
        if pos > self.max_pos:
            self.max_pos = pos
        elif pos < self.min_pos:
            self.min_pos = pos
        if pos == 0:
            self.returns_to_zero += 1


@dataclass(frozen=True)
class TrajectorySummary:
    n: int
    seed: int
    s_n: int
    sigma_n: int
    range_n: int
    returns_to_zero: int
    checkpoints: tuple[Checkpoint, ...] | None = field(default=None, compare=False)

    CSV_HEADER = ("n", "seed", "s_n", "sigma_n", "range_n", "returns_to_zero")

    def csv_row(self) -> tuple[int, ...]:
        return (self.n, self.seed, self.s_n, self.sigma_n, self.range_n,
                self.returns_to_zero)


def first_step(params: ModelParams, state: WalkState) -> int:
    if state.n != 0:
        raise StateError("first_step requires a fresh state")
    x = 1 if state.rng.uniform() < params.s else -1
    state._apply(x)
    return x


def step_probabilities(params: ModelParams, n: int, n_plus: int,
                       n_minus: int) -> tuple[float, float, float]:
    """``(P(+1), P(-1), P(0))`` of the next step given the counts at time n."""
    if n < 1:
        raise StateError("transition law needs n >= 1")
    up = (params.p * n_plus + params.q * n_minus) / n
    down = (params.q * n_plus + params.p * n_minus) / n
    return up, down, 1.0 - params.b * (n_plus + n_minus) / n


def step(state: WalkState, params: ModelParams) -> int:
    if state.n == 0:
        raise StateError("step called before first_step")
    x = state.rng.uniform() * state.n
    t_up = params.p * state.n_plus + params.q * state.n_minus
    if x < t_up:
        inc = 1
    elif x < params.b * (state.n_plus + state.n_minus):
        inc = -1
    else:
        inc = 0
    state._apply(inc)
    return inc


def checkpoint_times(n: int) -> np.ndarray:
    """``ceil(2**(j/2))`` for j = 0, 1, ... up to n, plus n itself."""
    ks = {n}
    j = 0
    while True:
        k = math.ceil(2.0 ** (j / 2.0))
        if k > n:
            break
        ks.add(k)
        j += 1
    return np.array(sorted(ks), dtype=np.int64)


@njit(nogil=True, cache=True)
def _walk(key, n, p, q, b, s, cps, out):
    """Sample one walk; fills ``out[i] = (S, Sigma, min, max, returns)`` at
    times ``cps[i]`` and returns (S_n, Sigma_n, min, max, returns, last_zero)."""
    npl = 0
    nmi = 0
    if uniform_at(key, 1) < s:
        npl = 1
    else:
        nmi = 1
    pos = npl - nmi
    lo = min(0, pos)
    hi = max(0, pos)
    returns = 0
    last_zero = 0
    ci = 0
    ncp = cps.shape[0]
    if ncp > 0 and cps[0] == 1:
        out[0, 0] = pos
        out[0, 1] = 1
        out[0, 2] = lo
        out[0, 3] = hi
        out[0, 4] = 0
        ci = 1
    for k in range(1, n):
        x = uniform_at(key, k + 1) * k
        if x < p * npl + q * nmi:
            npl += 1
            pos += 1
            if pos > hi:
                hi = pos
        elif x < b * (npl + nmi):
            nmi += 1
            pos -= 1
            if pos < lo:
                lo = pos
        if pos == 0:
            returns += 1
            last_zero = k + 1
        if ci < ncp and cps[ci] == k + 1:
            out[ci, 0] = pos
            out[ci, 1] = npl + nmi
            out[ci, 2] = lo
            out[ci, 3] = hi
            out[ci, 4] = returns
            ci += 1
    return pos, npl + nmi, lo, hi, returns, last_zero


@njit(nogil=True, cache=True)
def _walk_path(key, n, p, q, b, s, path):
    npl = 0
    nmi = 0
    if uniform_at(key, 1) < s:
        npl = 1
        path[0] = 1
    else:
        nmi = 1
        path[0] = -1
    for k in range(1, n):
        x = uniform_at(key, k + 1) * k
        if x < p * npl + q * nmi:
            npl += 1
            path[k] = 1
        elif x < b * (npl + nmi):
            nmi += 1
            path[k] = -1
        else:
            path[k] = 0


@njit(nogil=True, cache=True)
def _walk_batch(keys, n, p, q, b, s, cps, finals, cp_out):
    scratch = np.empty((cps.shape[0], 5), dtype=np.int64)
    for i in range(keys.shape[0]):
        res = _walk(keys[i], n, p, q, b, s, cps, scratch)
        for j in range(6):
            finals[i, j] = res[j]
        if cp_out.shape[0] > 0:
            cp_out[i] = scratch


FINAL_FIELDS = ("s_n", "sigma_n", "min_pos", "max_pos", "returns_to_zero",
                "last_zero")


def _summary(n: int, seed: int, final, cps, cp_rows) -> TrajectorySummary:
    checkpoints = None
    if cp_rows is not None:
        checkpoints = tuple(
            Checkpoint(int(k), int(r[0]), int(r[1]), int(r[3] - r[2] + 1), int(r[4]))
            for k, r in zip(cps, cp_rows))
    return TrajectorySummary(n=n, seed=seed, s_n=int(final[0]),
                             sigma_n=int(final[1]),
                             range_n=int(final[3] - final[2] + 1),
                             returns_to_zero=int(final[4]),
                             checkpoints=checkpoints)


def run(params: ModelParams, n: int, seed: int, *, checkpoints: bool = False,
        replica: int = 0) -> TrajectorySummary:
    """Simulate ``n`` steps on stream ``replica`` of ``seed``."""
    if n < 1:
        raise ValueError("horizon must be >= 1")
    cps = checkpoint_times(n) if checkpoints else np.empty(0, dtype=np.int64)
    out = np.zeros((cps.shape[0], 5), dtype=np.int64)
    final = _walk(np.uint64(stream_key(seed, replica)), n, params.p, params.q,
                  params.b, params.s, cps, out)
    return _summary(n, seed, final, cps, out if checkpoints else None)


def run_path(params: ModelParams, n: int, seed: int, *, replica: int = 0,
             cap: int = PATH_CAP) -> np.ndarray:
    """Full increment sequence (int8 values in {-1, 0, 1})."""
    if n < 1:
        raise ValueError("horizon must be >= 1")
    if n > cap:
        raise CapError(f"n={n} exceeds path cap {cap}")
    path = np.empty(n, dtype=np.int8)
    _walk_path(np.uint64(stream_key(seed, replica)), n, params.p, params.q,
               params.b, params.s, path)
    return path


def summarize_path(path: np.ndarray, seed: int = 0) -> TrajectorySummary:
    pos = np.cumsum(path, dtype=np.int64)
    lo = min(0, int(pos.min()))
    hi = max(0, int(pos.max()))
    return TrajectorySummary(n=len(path), seed=seed, s_n=int(pos[-1]),
                             sigma_n=int(np.count_nonzero(path)),
                             range_n=hi - lo + 1,
                             returns_to_zero=int(np.count_nonzero(pos == 0)))


def run_python(params: ModelParams, n: int, seed: int, *,
               replica: int = 0) -> tuple[WalkState, list[int]]:
    """Reference walk through :class:`WalkState`; slow, for cross-checks."""
    state = WalkState(rng=SplitMix64.from_seed(seed, replica))
    incs = [first_step(params, state)]
    for _ in range(n - 1):
        incs.append(step(state, params))
    return state, incs


def run_batch(params: ModelParams, n: int, seed: int, replicas: int, *,
              start: int = 0, parallelism: int = 1,
              checkpoints: np.ndarray | None = None):
    """Simulate replicas ``start .. start+replicas-1``.

    Returns ``(finals, cp_out)`` where ``finals[i]`` follows
    :data:`FINAL_FIELDS` and ``cp_out[i, j]`` holds (S, Sigma, min, max,
    returns) at ``checkpoints[j]``.  Output depends only on the replica
    indices, never on ``parallelism``.
    """
    cps = (np.empty(0, dtype=np.int64) if checkpoints is None
           else np.asarray(checkpoints, dtype=np.int64))
    keys = stream_keys(seed, start, replicas)
    finals = np.zeros((replicas, 6), dtype=np.int64)
    cp_out = np.zeros((replicas if cps.size else 0, cps.shape[0], 5),
                      dtype=np.int64)
    args = (n, params.p, params.q, params.b, params.s, cps)
    workers = max(1, min(int(parallelism), replicas))
    if workers == 1:
        _walk_batch(keys, *args, finals, cp_out)
    else:
        bounds = np.linspace(0, replicas, workers + 1).astype(int)

        def work(i):
            lo, hi = bounds[i], bounds[i + 1]
            _walk_batch(keys[lo:hi], *args, finals[lo:hi],
                        cp_out[lo:hi] if cps.size else cp_out)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(workers)))
    return finals, (cp_out if cps.size else None)
