"""Exact finite-n moments of the position S_n and the move count Sigma_n.

All moments are built from

    c_n(x) = prod_{k=1}^{n-1} (1 + x/k) = Gamma(n+x) / (Gamma(n) Gamma(x+1)).

The primary route is the set of one-step recursions obtained from the
conditional law of X_{n+1}; they have no poles in (a, b).  The closed forms
are kept as independent cross-checks away from the critical lines
b = 2a and b = 4a.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np
from numba import njit

from .errors import DegenerateError, DomainError
from .model import ModelParams

GAMMA_ROUTE_N = 10_000
DIRECT_PRODUCT_N = 1_000
POLE_GUARD = 1e-6
AUTO_GUARD = 1e-3


class Method(enum.Enum):
    CLOSED_FORM = "ClosedForm"
    RECURSION = "Recursion"


@dataclass(frozen=True)
class MomentTable:
    n: int
    e_s: float
    e_sigma: float
    e_s_sigma: float
    e_s2: float
    e_sigma2: float
    e_s2_sigma: float
    e_s4: float
    method: Method = Method.RECURSION

    CSV_HEADER = ("n", "e_s", "e_sigma", "e_s_sigma", "e_s2", "e_sigma2",
                  "e_s2_sigma", "e_s4", "method")
    VALUE_FIELDS = CSV_HEADER[1:-1]

    def values(self) -> dict[str, float]:
        return {f: getattr(self, f) for f in self.VALUE_FIELDS}

    def csv_row(self) -> tuple:
        return (self.n, *(repr(v) for v in self.values().values()),
                self.method.value)


@dataclass(frozen=True)
class Covariances:
    cov_s_sigma: float
    var_s: float
    var_sigma: float
    cov_s2_sigma: float
    var_s2: float

    def values(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# ---------------------------------------------------------------- c_n(x)

def _stirling_tail(z: float) -> float:
    z2 = z * z
    return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / (1260.0 * z2)) / z2) / z


def log_gamma_ratio(n: float, x: float) -> float:
    """``log(Gamma(n + x) / Gamma(n))`` for large ``n``, cancellation-free."""
    return ((n - 0.5) * math.log1p(x / n) + x * math.log(n + x) - x
            + (_stirling_tail(n + x) - _stirling_tail(n)))


def c(n: int, x: float) -> float:
    """``c_n(x)``; exact empty product at n = 1, signed for x <= -1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1 or x == 0.0:
        return 1.0
    if x > -1.0 and n > GAMMA_ROUTE_N:
        return math.exp(log_gamma_ratio(n, x) - math.lgamma(x + 1.0))
    if n <= DIRECT_PRODUCT_N:
        return math.prod(1.0 + x / k for k in range(1, n))
    sign = 1.0
    logs = []
    for k in range(1, n):
        f = 1.0 + x / k
        if f == 0.0:
            return 0.0
        if f < 0.0:
            sign = -sign
        logs.append(math.log(abs(f)) if abs(x / k) > 0.5 else math.log1p(x / k))
    return sign * math.exp(math.fsum(logs))


# ------------------------------------------------------------ recursions

@njit(cache=True)
def _kahan_add(hi, lo, d):
    y = d - lo
    t = hi + y
    lo = (t - hi) - y
    return t, lo


@njit(cache=True)
def _recurse(a, b, s, targets, out):
    """Forward recursions for the seven moments, reported at ``targets``.

    Each moment M advances as M + (alpha M + g)/k with Kahan-compensated
    accumulation of the increments.
    """
    # order: e_s, e_sigma, e_s_sigma, e_s2, e_sigma2, e_s2_sigma, e_s4
    hi = np.empty(7)
    lo = np.zeros(7)
    hi[0] = 2.0 * s - 1.0
    hi[1] = 1.0
    hi[2] = 2.0 * s - 1.0
    hi[3] = 1.0
    hi[4] = 1.0
    hi[5] = 1.0
    hi[6] = 1.0
    m = np.empty(7)
    d = np.empty(7)
    ti = 0
    nt = targets.shape[0]
    k = 1
    while ti < nt:
        if targets[ti] == k:
            for j in range(7):
                out[ti, j] = hi[j] - lo[j]
            ti += 1
            continue
        for j in range(7):
            m[j] = hi[j] - lo[j]
        d[0] = a * m[0]
        d[1] = b * m[1]
        d[2] = (a + b) * m[2] + a * m[0]
        d[3] = 2.0 * a * m[3] + b * m[1]
        d[4] = 2.0 * b * m[4] + b * m[1]
        d[5] = (2.0 * a + b) * m[5] + 2.0 * a * m[3] + b * (m[4] + m[1])
        d[6] = 4.0 * a * m[6] + 6.0 * b * m[5] + 4.0 * a * m[3] + b * m[1]
        for j in range(7):
            hi[j], lo[j] = _kahan_add(hi[j], lo[j], d[j] / k)
        k += 1


@functools.lru_cache(maxsize=512)
def _recursion_cached(a: float, b: float, s: float,
                      ns: tuple[int, ...]) -> np.ndarray:
    targets = np.array(ns, dtype=np.int64)
    out = np.empty((len(ns), 7))
    _recurse(a, b, s, targets, out)
    out.setflags(write=False)
    return out


def _check_ns(ns: Sequence[int]) -> tuple[int, ...]:
    ns = tuple(int(n) for n in ns)
    if not ns or min(ns) < 1:
        raise ValueError("all n must be >= 1")
    if list(ns) != sorted(set(ns)):
        raise ValueError("checkpoints must be strictly increasing")
    return ns


def recursion_tables(params: ModelParams, ns: Sequence[int]) -> list[MomentTable]:
    """Moment tables at increasing checkpoints from one O(max n) pass."""
    ns = _check_ns(ns)
    out = _recursion_cached(params.a, params.b, params.s, ns)
    return [MomentTable(n, *map(float, row), method=Method.RECURSION)
            for n, row in zip(ns, out)]


# ----------------------------------------------------------- closed forms

def closed_form_e_s2(a: float, b: float, n: int) -> float:
    return (b * c(n, b) - 2.0 * a * c(n, 2.0 * a)) / (b - 2.0 * a)


def critical_e_s2(a: float, n: int) -> float:
    """Critical E[S_n^2] with the sum running over k = 0 .. n-1."""
    return 2.0 * a * c(n, 2.0 * a) * math.fsum(1.0 / (k + 2.0 * a) for k in range(n))


def critical_e_s2_displayed(a: float, n: int) -> float:
    """The same expression with the sum over k = 1 .. n.

    Kept only to document that it disagrees with the exact law at small n.
    """
    return 2.0 * a * c(n, 2.0 * a) * math.fsum(1.0 / (k + 2.0 * a) for k in range(1, n + 1))


def closed_form_e_s2_sigma(a: float, b: float, n: int) -> float:
    return (2.0 * b * c(n, 2.0 * b) - b * c(n, b)
            + (2.0 * a / b) * (2.0 * a * c(n, 2.0 * a)
                               - (2.0 * a + b) * c(n, 2.0 * a + b))) / (b - 2.0 * a)


def closed_form_e_s4(a: float, b: float, n: int) -> float:
    g = 2.0 * a - b
    h = 4.0 * a - b
    terms = (
        24.0 * a * (2.0 * a * a + 2.0 * a * b - b * b) / (g * g * h) * c(n, 4.0 * a),
        -12.0 * a * (2.0 * a + b) / (g * g) * c(n, 2.0 * a + b),
        8.0 * a / g * c(n, 2.0 * a),
        6.0 * b * b / (g * g) * c(n, 2.0 * b),
        -b * (5.0 * b - 2.0 * a) / (g * h) * c(n, b),
    )
    return math.fsum(terms)


def closed_form_admissible(a: float, b: float, guard: float = POLE_GUARD) -> bool:
    return abs(b - 2.0 * a) > guard and abs(4.0 * a - b) > guard


def closed_form_table(params: ModelParams, n: int) -> MomentTable:
    a, b, s = params.a, params.b, params.s
    if not closed_form_admissible(a, b):
        raise DomainError(f"closed forms suppressed near b=2a or b=4a (a={a}, b={b})")
    sgn = 2.0 * s - 1.0
    e_sigma = c(n, b)
    return MomentTable(
        n=n,
        e_s=sgn * c(n, a),
        e_sigma=e_sigma,
        e_s_sigma=sgn / b * ((a + b) * c(n, a + b) - a * c(n, a)),
        e_s2=closed_form_e_s2(a, b, n),
        e_sigma2=2.0 * c(n, 2.0 * b) - e_sigma,
        e_s2_sigma=closed_form_e_s2_sigma(a, b, n),
        e_s4=closed_form_e_s4(a, b, n),
        method=Method.CLOSED_FORM,
    )


# ------------------------------------------------------------ public API

def moment_table(params: ModelParams, n: int, method: str = "recursion") -> MomentTable:
    """All seven moments at time ``n``.

    ``method`` is ``"recursion"``, ``"closed_form"`` or ``"auto"`` (closed
    form when both poles are at least 1e-3 away, recursion otherwise).
    """
    if method == "auto":
        method = ("closed_form" if closed_form_admissible(params.a, params.b, AUTO_GUARD)
                  else "recursion")
    if method == "closed_form":
        return closed_form_table(params, n)
    if method == "recursion":
        return recursion_tables(params, [n])[0]
    raise ValueError(f"unknown method {method!r}")


def mean_S(params: ModelParams, n: int) -> float:
    return (2.0 * params.s - 1.0) * c(n, params.a)


def mean_Sigma(params: ModelParams, n: int) -> float:
    return c(n, params.b)


def second_moments(params: ModelParams, n: int) -> dict[str, float]:
    t = moment_table(params, n)
    return {"e_s_sigma": t.e_s_sigma, "e_s2": t.e_s2,
            "e_sigma_sigma1": t.e_sigma2 + t.e_sigma}


def higher_moments(params: ModelParams, n: int) -> dict[str, float]:
    t = moment_table(params, n)
    return {"e_s2_sigma": t.e_s2_sigma, "e_s4": t.e_s4}


def covariances_from_table(params: ModelParams, t: MomentTable) -> Covariances:
    if params.a == 0.0 or params.s == 0.5:
        cov = 0.0
    else:
        cov = t.e_s_sigma - t.e_s * t.e_sigma
    return Covariances(
        cov_s_sigma=cov,
        var_s=t.e_s2 - t.e_s * t.e_s,
        var_sigma=t.e_sigma2 - t.e_sigma * t.e_sigma,
        cov_s2_sigma=t.e_s2_sigma - t.e_s2 * t.e_sigma,
        var_s2=t.e_s4 - t.e_s2 * t.e_s2,
    )


def covariance_suite(params: ModelParams, n: int, method: str = "recursion") -> Covariances:
    return covariances_from_table(params, moment_table(params, n, method))


def _require_variances(params: ModelParams, t: MomentTable, *pairs) -> None:
    if params.b >= 1.0:
        raise DegenerateError("b = 1: Sigma_n = n is deterministic")
    for name, var, scale in pairs:
        if not var > 1e-13 * scale:
            raise DegenerateError(f"{name} vanishes at n={t.n}")


def rho_from_table(params: ModelParams, t: MomentTable) -> tuple[float, float]:
    """``(rho[S, Sigma], rho[S^2, Sigma])`` from a moment table."""
    cv = covariances_from_table(params, t)
    _require_variances(params, t, ("V[Sigma_n]", cv.var_sigma, t.e_sigma2),
                       ("V[S_n]", cv.var_s, t.e_s2),
                       ("V[S_n^2]", cv.var_s2, t.e_s4))
    r1 = cv.cov_s_sigma / math.sqrt(cv.var_s * cv.var_sigma)
    r2 = cv.cov_s2_sigma / math.sqrt(cv.var_s2 * cv.var_sigma)
    return r1, r2


def rho_S_Sigma(params: ModelParams, n: int, method: str = "recursion") -> float:
    if params.b >= 1.0:
        raise DegenerateError("b = 1: Sigma_n = n is deterministic")
    if params.a == 0.0 or params.s == 0.5:
        return 0.0
    t = moment_table(params, n, method)
    cv = covariances_from_table(params, t)
    _require_variances(params, t, ("V[Sigma_n]", cv.var_sigma, t.e_sigma2),
                       ("V[S_n]", cv.var_s, t.e_s2))
    return cv.cov_s_sigma / math.sqrt(cv.var_s * cv.var_sigma)


def rho_S2_Sigma(params: ModelParams, n: int, method: str = "recursion") -> float:
    t = moment_table(params, n, method)
    cv = covariances_from_table(params, t)
    _require_variances(params, t, ("V[Sigma_n]", cv.var_sigma, t.e_sigma2),
                       ("V[S_n^2]", cv.var_s2, t.e_s4))
    return cv.cov_s2_sigma / math.sqrt(cv.var_s2 * cv.var_sigma)


def partial_sum_identity_check(x: float, y: float, n: int) -> float:
    """Residual of sum_{k<n} c_k(x)/(k c_{k+1}(y)) = (c_n(x)/c_n(y) - 1)/(x - y)."""
    if x == y:
        raise DomainError("identity requires x != y")
    if x <= -1.0 or y <= -1.0:
        raise DomainError("identity requires x, y > -1")
    if n < 2:
        raise ValueError("n must be >= 2")
    k = np.arange(1, n, dtype=float)
    cx = np.exp(np.concatenate(([0.0], np.cumsum(np.log1p(x / k)))))  # c_1 .. c_n
    cy = np.exp(np.concatenate(([0.0], np.cumsum(np.log1p(y / k)))))
    lhs = math.fsum(cx[:-1] / (k * cy[1:]))
    rhs = (c(n, x) / c(n, y) - 1.0) / (x - y)
    return abs(lhs - rhs)
