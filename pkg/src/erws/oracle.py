"""Exact small-n laws used as ground truth.

The pair of step counts ``(N+, N-)`` is a Markov chain, so the joint law of
``(S_n, Sigma_n)`` follows from a forward recursion over O(n^2) states.  The
range is not a function of the counts; its law is obtained by enumerating
paths, aggregated by ``(N+, N-, min, max)``.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import CapError
from .model import ModelParams

JOINT_CAP = 4000
RANGE_CAP = 14


@dataclass(frozen=True)
class JointLaw:
    n: int
    table: dict[tuple[int, int], float]

    def total(self) -> float:
        return math.fsum(self.table.values())

    def entries(self) -> Iterator[tuple[int, int, float]]:
        for (i, j), pr in sorted(self.table.items()):
            yield i, j, pr

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "entries": [{"n_plus": i, "n_minus": j, "p": pr}
                        for i, j, pr in self.entries()],
        })

    @classmethod
    def from_json(cls, text: str) -> "JointLaw":
        obj = json.loads(text)
        table = {(int(e["n_plus"]), int(e["n_minus"])): float(e["p"])
                 for e in obj["entries"]}
        return cls(int(obj["n"]), table)

    def sigma_marginal(self) -> dict[int, float]:
        out: dict[int, list[float]] = defaultdict(list)
        for (i, j), pr in self.table.items():
            out[i + j].append(pr)
        return {k: math.fsum(v) for k, v in sorted(out.items())}


def _two_sum(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = x + y
    bp = s - x
    err = (x - (s - bp)) + (y - bp)
    return s, err


def exact_joint_law(params: ModelParams, n: int) -> JointLaw:
    """Law of ``(N+, N-)`` at time ``n`` by forward dynamic programming."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > JOINT_CAP:
        raise CapError(f"n={n} exceeds oracle cap {JOINT_CAP}")
    p, q, b = params.p, params.q, params.b
    prob = np.zeros((n + 1, n + 1))
    comp = np.zeros_like(prob)  # running compensation of each cell
    prob[1, 0] = params.s
    prob[0, 1] = 1.0 - params.s
    idx = np.arange(n + 1, dtype=float)
    for k in range(1, n):
        m = k + 1
        i = idx[:m, None]
        j = idx[None, :m]
        cur = prob[:m, :m] + comp[:m, :m]
        up = cur * ((p * i + q * j) / k)
        down = cur * ((q * i + p * j) / k)
        stay = cur * (1.0 - b * (i + j) / k)
        new = np.zeros((m + 1, m + 1))
        err = np.zeros((m + 1, m + 1))
        new[:m, :m] = stay
        new[1:, :m], e1 = _two_sum(new[1:, :m], up)
        new[:m, 1:], e2 = _two_sum(new[:m, 1:], down)
        err[1:, :m] += e1
        err[:m, 1:] += e2
        prob[: m + 1, : m + 1] = new
        comp[: m + 1, : m + 1] = err
    prob += comp
    table = {(int(a), int(c)): float(prob[a, c])
             for a, c in zip(*np.nonzero(prob))}
    return JointLaw(n, table)


def exact_moment(law: JointLaw, i: int, j: int) -> float:
    """``E[S^i Sigma^j]`` by compensated summation over the table."""
    if i + j > 8:
        raise ValueError("i + j must be <= 8")
    return math.fsum(pr * float((a - c) ** i * (a + c) ** j)
                     for (a, c), pr in law.table.items())


def exact_abs_moment(law: JointLaw, i: int, j: int) -> float:
    """``E[|S|^i Sigma^j]``; a natural magnitude for relative comparisons."""
    return math.fsum(pr * float(abs(a - c) ** i * (a + c) ** j)
                     for (a, c), pr in law.table.items())


def _check_range_cap(n: int) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > RANGE_CAP:
        raise CapError(f"n={n} exceeds range enumeration cap {RANGE_CAP}")


def _branches(params: ModelParams, k: int, npl: int, nmi: int):
    up = (params.p * npl + params.q * nmi) / k
    down = (params.q * npl + params.p * nmi) / k
    stay = 1.0 - params.b * (npl + nmi) / k
    return ((1, up), (-1, down), (0, stay))


def enumerate_paths(params: ModelParams, n: int) -> Iterator[tuple[tuple[int, ...], float]]:
    """Every increment sequence of positive probability, with its weight.

    Weights are products of the sequential conditional probabilities.
    """
    _check_range_cap(n)

    def rec(path, npl, nmi, w):
        k = len(path)
        if k == n:
            yield tuple(path), w
            return
        for x, pr in _branches(params, k, npl, nmi):
            if pr <= 0.0:
                continue
            path.append(x)
            yield from rec(path, npl + (x > 0), nmi + (x < 0), w * pr)
            path.pop()

    for x, w in ((1, params.s), (-1, 1.0 - params.s)):
        if w > 0.0:
            yield from rec([x], int(x > 0), int(x < 0), w)


def exact_range_law(params: ModelParams, n: int) -> dict[int, float]:
    """Exact law of ``R_n``; paths merged on ``(N+, N-, min, max)``."""
    _check_range_cap(n)
    states: dict[tuple[int, int, int, int], list[float]] = defaultdict(list)
    if params.s > 0:
        states[(1, 0, 0, 1)].append(params.s)
    if params.s < 1:
        states[(0, 1, -1, 0)].append(1.0 - params.s)
    for k in range(1, n):
        nxt: dict[tuple[int, int, int, int], list[float]] = defaultdict(list)
        for (npl, nmi, lo, hi), ws in states.items():
            w = math.fsum(ws)
            for x, pr in _branches(params, k, npl, nmi):
                if pr <= 0.0:
                    continue
                a, c = npl + (x > 0), nmi + (x < 0)
                pos = a - c
                nxt[(a, c, min(lo, pos), max(hi, pos))].append(w * pr)
        states = nxt
    law: dict[int, list[float]] = defaultdict(list)
    for (_, _, lo, hi), ws in states.items():
        law[hi - lo + 1].extend(ws)
    return {r: math.fsum(v) for r, v in sorted(law.items())}
