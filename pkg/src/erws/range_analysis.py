"""Range of lazy unit-increment sequences and its scaling diagnostics.

For increments in {-1, 0, +1} the visited set is an integer interval, so the
range is ``running max - running min + 1``.  The deterministic harness
checks both cases of the range lemma on staircase, oscillating, one-sided
and zigzag sequences; walk ensembles only produce diagnostics, since an
almost-sure limsup cannot be certified at finite n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

from .asymptotics import lil_constant, lil_normalizer
from .errors import IncrementError
from .model import ModelParams, Regime, classify
from .simulator import checkpoint_times, run_batch

GrowthFn = Callable[[np.ndarray], np.ndarray]


def sqrt_growth(n: np.ndarray) -> np.ndarray:
    return np.sqrt(n)


def range_of_sequence(x) -> np.ndarray:
    """``r_k = #{x_0, ..., x_k}`` for a sequence with unit increments."""
    x = np.asarray(x, dtype=np.int64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("need a non-empty 1-d sequence")
    if x.size > 1 and np.abs(np.diff(x)).max() > 1:
        k = int(np.argmax(np.abs(np.diff(x)) > 1)) + 1
        raise IncrementError(f"jump of {x[k] - x[k - 1]} at index {k}")
    return np.maximum.accumulate(x) - np.minimum.accumulate(x) + 1


def distinct_count_range(x) -> np.ndarray:
    """Set-based range count; independent check of :func:`range_of_sequence`."""
    seen: set[int] = set()
    out = []
    for v in x:
        seen.add(int(v))
        out.append(len(seen))
    return np.array(out, dtype=np.int64)


# --------------------------------------------------- deterministic sequences

@njit(cache=True)
def _chase(targets):
    """Unit-speed pursuit of integer targets, starting from 0."""
    n = targets.shape[0]
    x = np.zeros(n, dtype=np.int64)
    for k in range(1, n):
        d = targets[k] - x[k - 1]
        x[k] = x[k - 1] + (1 if d > 0 else (-1 if d < 0 else 0))
    return x


@njit(cache=True)
def _bounce(f, lo_scale, hi_scale):
    """Walk at unit speed back and forth between lo_scale*f and hi_scale*f."""
    n = f.shape[0]
    x = np.zeros(n, dtype=np.int64)
    up = True
    for k in range(1, n):
        hi = math.floor(hi_scale * f[k])
        lo = math.ceil(lo_scale * f[k])
        if up and x[k - 1] >= hi:
            up = False
        elif not up and x[k - 1] <= lo:
            up = True
        x[k] = x[k - 1] + (1 if up else -1)
    return x


def _grid(f: GrowthFn, n_max: int) -> np.ndarray:
    k = np.arange(n_max + 1, dtype=float)
    vals = np.asarray(f(k), dtype=float)
    return vals


def staircase(f: GrowthFn, c: float, n_max: int) -> np.ndarray:
    """Unit-increment sequence tracking ``round(c f(n))``."""
    return _chase(np.rint(c * _grid(f, n_max)).astype(np.int64))


def oscillating_staircase(f: GrowthFn, eps: float, n_max: int) -> np.ndarray:
    """Sequence bouncing inside [-eps f, eps f], so x_n / f(n) -> 0."""
    return _bounce(_grid(f, n_max), -eps, eps)


def one_sided_toucher(f: GrowthFn, n_max: int) -> np.ndarray:
    """Climbs to f(n), returns to 0, repeats: limsup x/f = 1, x >= 0."""
    return _bounce(_grid(f, n_max), 0.0, 1.0)


def zigzag(f: GrowthFn, n_max: int) -> np.ndarray:
    """Bounces between -f(n) and +f(n): limsup +-x/f = 1."""
    return _bounce(_grid(f, n_max), -1.0, 1.0)


@dataclass(frozen=True)
class ConvergenceReport:
    target: float
    max_deviation: float
    tolerance: float
    window: tuple[int, int]

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance


@dataclass(frozen=True)
class BandReport:
    limsup_estimate: float
    lower: float
    upper: float
    window: tuple[int, int]

    @property
    def passed(self) -> bool:
        return self.lower <= self.limsup_estimate <= self.upper


def _window(f: GrowthFn, x: np.ndarray, n_max: int):
    r = range_of_sequence(x)
    lo = n_max // 2
    ks = np.arange(lo, n_max + 1)
    fk = np.asarray(f(ks.astype(float)), dtype=float)
    slack = 2.0 / float(f(np.array([float(lo)]))[0])
    return r[lo:] / fk, slack, (lo, n_max)


def lemma31_case_i(f: GrowthFn, c: float, n_max: int, *,
                   sequence: np.ndarray | None = None) -> ConvergenceReport:
    """Case (i): x_n / f(n) -> c forces r_n / f(n) -> |c|.

    Uses the staircase for ``c`` unless a sequence is supplied; the
    deviation is measured over n in [n_max/2, n_max].
    """
    x = staircase(f, c, n_max) if sequence is None else np.asarray(sequence)
    ratio, slack, window = _window(f, x, n_max)
    dev = float(np.max(np.abs(ratio - abs(c))))
    return ConvergenceReport(abs(c), dev, slack + 1e-9, window)


def lemma31_case_ii(f: GrowthFn, n_max: int, kind: str = "zigzag", *,
                    sequence: np.ndarray | None = None) -> BandReport:
    """Case (ii): limsup +-x/f = 1 keeps limsup r_n / f(n) inside [1, 2]."""
    if sequence is None:
        gen = {"zigzag": zigzag, "toucher": one_sided_toucher}[kind]
        sequence = gen(f, n_max)
    ratio, slack, window = _window(f, np.asarray(sequence), n_max)
    return BandReport(float(ratio.max()), 1.0 - slack, 2.0 + slack, window)


# ------------------------------------------------------------- ensembles

@dataclass(frozen=True)
class RangeSeries:
    """Per-replica checkpoint data of a range ensemble."""
    params: ModelParams
    n: int
    seed: int
    checkpoints: np.ndarray      # (K,)
    s: np.ndarray                # (M, K)
    sigma: np.ndarray            # (M, K)
    r: np.ndarray                # (M, K)

    def normalizer(self) -> np.ndarray:
        """Regime normalization at each checkpoint; NaN where undefined."""
        regime = classify(self.params)
        sig = self.sigma.astype(float)
        out = np.full(sig.shape, np.nan)
        if regime is Regime.SUPERCRITICAL:
            out[:] = self.checkpoints[None, :].astype(float) ** self.params.a
            return out
        arg = sig * np.log(sig) if regime is Regime.CRITICAL else sig
        ok = arg > math.e
        out[ok] = np.sqrt(2 * arg[ok] * np.log(np.log(arg[ok])))
        return out

    def normalized(self) -> np.ndarray:
        return self.r / self.normalizer()

    def running_max(self, k_min: int | None = None) -> np.ndarray:
        """Max of the normalized range over checkpoints k >= k_min."""
        k_min = int(math.isqrt(self.n)) if k_min is None else k_min
        vals = self.normalized()[:, self.checkpoints >= k_min]
        return np.nanmax(np.where(np.isnan(vals), -np.inf, vals), axis=1)

    def csv_rows(self):
        norm = self.normalized()
        for i in range(self.r.shape[0]):
            for j, k in enumerate(self.checkpoints):
                v = norm[i, j]
                yield (i, int(k), int(self.r[i, j]), int(self.s[i, j]),
                       int(self.sigma[i, j]), "" if np.isnan(v) else repr(float(v)))

    CSV_HEADER = ("replica", "k", "r_k", "s_k", "sigma_k", "norm_value")


def simulate_range_series(params: ModelParams, n: int, replicas: int, seed: int,
                          parallelism: int = 1) -> RangeSeries:
    cps = checkpoint_times(n)
    _, cp = run_batch(params, n, seed, replicas, parallelism=parallelism,
                      checkpoints=cps)
    return RangeSeries(params, n, seed, cps, cp[:, :, 0], cp[:, :, 1],
                       cp[:, :, 3] - cp[:, :, 2] + 1)


def range_scaling_ensemble(params: ModelParams, n: int, replicas: int, seed: int,
                           parallelism: int = 1, *,
                           k_min: int | None = None) -> dict:
    """Regime-appropriate range diagnostics over an ensemble.

    Sub/critical: running max of R_k / phi(.) over checkpoints k >= k_min
    (default sqrt(n)) and the fraction inside the slack band
    [0.8 c, 2.4 c] around the [c, 2c] limsup band.  Supercritical: median
    of R_n / (|S_n| + 1) on replicas with |S_n| > n^a / 2.
    """
    series = simulate_range_series(params, n, replicas, seed, parallelism)
    regime = classify(params)
    quantiles = (0.05, 0.25, 0.5, 0.75, 0.95)
    out: dict = {"regime": regime.label, "n": n, "replicas": replicas, "seed": seed,
                 "series": series}
    if regime is Regime.SUPERCRITICAL:
        s_n = series.s[:, -1].astype(float)
        r_n = series.r[:, -1].astype(float)
        keep = np.abs(s_n) > n ** params.a / 2
        ratio = r_n[keep] / (np.abs(s_n[keep]) + 1)
        out.update(
            conditioned_count=int(keep.sum()),
            ratio_quantiles={str(q): float(np.quantile(ratio, q)) for q in quantiles}
            if ratio.size else {},
            median_ratio=float(np.median(ratio)) if ratio.size else math.nan,
            r_over_na_quantiles={str(q): float(np.quantile(r_n / n ** params.a, q))
                                 for q in quantiles},
        )
        return out
    c = lil_constant(params)
    rm = series.running_max(k_min)
    lo, hi = 0.8 * c, 2.4 * c
    out.update(
        band=(lo, hi),
        lil_constant=c,
        running_max_quantiles={str(q): float(np.quantile(rm, q)) for q in quantiles},
        fraction_in_band=float(np.mean((rm >= lo) & (rm <= hi))),
    )
    return out
