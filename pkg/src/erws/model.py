"""Model parameters of the elephant random walk with stops.

A walk is specified either by the step-choice probabilities ``(p, q, r)``
(copy, flip, stop) plus the first-step law ``s``, or by the memory
parameters ``a = p - q`` and ``b = 1 - r``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Mapping

from .errors import DomainError, SumError

SUM_TOL = 1e-12
CRITICAL_TOL = 1e-12


class Regime(enum.IntEnum):
    SUBCRITICAL = 0
    CRITICAL = 1
    SUPERCRITICAL = 2

    @property
    def label(self) -> str:
        return self.name.capitalize()


@dataclass(frozen=True)
class ModelParams:
    p: float
    q: float
    r: float
    s: float

    @property
    def a(self) -> float:
        return self.p - self.q

    @property
    def b(self) -> float:
        return 1.0 - self.r

    @property
    def regime(self) -> Regime:
        return classify(self)

    def as_dict(self) -> dict[str, float]:
        return {"p": self.p, "q": self.q, "r": self.r, "s": self.s,
                "a": self.a, "b": self.b}


def _check_unit(name: str, value: float, *, open_right: bool = False) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name}={value} is not finite")
    hi_ok = value < 1.0 if open_right else value <= 1.0
    if value < 0.0 or not hi_ok:
        bound = "[0, 1)" if open_right else "[0, 1]"
        raise DomainError(f"{name}={value} outside {bound}")
    return value


def make_params(p: float, q: float, r: float, s: float) -> ModelParams:
    """Validate ``(p, q, r, s)`` and return the parameter record."""
    p = _check_unit("p", p)
    q = _check_unit("q", q)
    r = _check_unit("r", r, open_right=True)
    s = _check_unit("s", s)
    total = p + q + r
    if abs(total - 1.0) > SUM_TOL:
        raise SumError(f"p+q+r={total!r} != 1")
    return ModelParams(p, q, r, s)


def from_ab(a: float, b: float, s: float) -> ModelParams:
    """Build parameters from the memory parameters ``(a, b)``."""
    a, b = float(a), float(b)
    if not (0.0 < b <= 1.0):
        raise DomainError(f"b={b} outside (0, 1]")
    if abs(a) > b + SUM_TOL:
        raise DomainError(f"|a|={abs(a)} exceeds b={b}")
    a = min(max(a, -b), b)
    s = _check_unit("s", s)
    p = (b + a) / 2.0
    q = (b - a) / 2.0
    r = 1.0 - b
    # clamp rounding noise at the corners a = +-b
    return ModelParams(max(p, 0.0), max(q, 0.0), r, s)


def classify(params: ModelParams) -> Regime:
    """Regime of the walk: compare ``a`` against the critical value ``b/2``."""
    gap = 2.0 * params.a - params.b
    if abs(gap) <= CRITICAL_TOL:
        return Regime.CRITICAL
    return Regime.SUBCRITICAL if gap < 0 else Regime.SUPERCRITICAL


def is_critical(a: float, b: float) -> bool:
    return abs(2.0 * a - b) <= CRITICAL_TOL


def params_from_mapping(cfg: Mapping[str, Any]) -> ModelParams:
    """Parse ``{p, q, r, s}`` or ``{a, b, s}`` (``s`` defaults to 1)."""
    s = cfg.get("s", 1.0)
    has_pqr = any(cfg.get(k) is not None for k in ("p", "q", "r"))
    has_ab = any(cfg.get(k) is not None for k in ("a", "b"))
    if has_pqr and has_ab:
        raise DomainError("give either (p, q, r) or (a, b), not both")
    if has_ab:
        if cfg.get("a") is None or cfg.get("b") is None:
            raise DomainError("both a and b are required")
        return from_ab(cfg["a"], cfg["b"], s)
    if has_pqr:
        missing = [k for k in ("p", "q", "r") if cfg.get(k) is None]
        if missing:
            raise DomainError(f"missing {', '.join(missing)}")
        return make_params(cfg["p"], cfg["q"], cfg["r"], s)
    raise DomainError("no model parameters given")
