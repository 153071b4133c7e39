"""Leading-order asymptotic constants for the three regimes."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .errors import DomainError
from .model import ModelParams, Regime, classify, is_critical


def beta(x: float, y: float) -> float:
    """Beta function through log-Gamma; positive arguments only."""
    if x <= 0 or y <= 0:
        raise DomainError(f"beta({x}, {y}) needs positive arguments")
    return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))


def gamma(x: float) -> float:
    return math.gamma(x)


def _open_unit_b(b: float) -> None:
    if not 0.0 < b < 1.0:
        raise DomainError(f"b={b} must lie in (0, 1)")


def const_P(a: float, b: float) -> float:
    _open_unit_b(b)
    if not (-b <= a < b / 2) or is_critical(a, b):
        raise DomainError(f"P needs a in [-b, b/2); got a={a}, b={b}")
    if a == 0.0:
        raise DomainError("P is not defined at a = 0 (the correlation vanishes)")
    num = math.sqrt((b - 2 * a) * gamma(b)) * ((a + b) * beta(a + 1, b) - 1)
    return num / (gamma(a + 1) * math.sqrt(b * beta(b, b) - 1))


def const_Q(a: float) -> float:
    if not 0.0 < a < 0.5:
        raise DomainError(f"Q needs a = b/2 with b in (0, 1); got a={a}")
    num = math.sqrt(gamma(2 * a)) * (a * beta(a, 2 * a) - 1)
    return num / (gamma(a + 1) * math.sqrt(2 * a * beta(2 * a, 2 * a) - 1))


def const_R(a: float, b: float, s: float) -> float:
    _open_unit_b(b)
    if not (b / 2 < a <= b) or is_critical(a, b):
        raise DomainError(f"R needs a in (b/2, b]; got a={a}, b={b}")
    var_part = a * a * beta(a, a) - (2 * s - 1) ** 2 * (2 * a - b)
    if not var_part > 0:
        raise AssertionError(f"non-positive denominator factor {var_part}")
    num = math.sqrt(2 * a - b) * (a * beta(a, b) - 1)
    return num / math.sqrt(var_part * (b * beta(b, b) - 1))


def const_Qprime(b: float) -> float:
    _open_unit_b(b)
    bb = b * beta(b, b)
    return math.sqrt((bb - 1) / (3 * bb - 1))


def const_Rprime(a: float, b: float) -> float:
    _open_unit_b(b)
    if not (b / 2 < a <= b) or is_critical(a, b):
        raise DomainError(f"R' needs a in (b/2, b]; got a={a}, b={b}")
    k4 = 6 * (2 * a * a + 2 * a * b - b * b) / (4 * a - b)
    den = (k4 * beta(2 * a, 2 * a) - 1) * (b * beta(b, b) - 1)
    return (2 * a * beta(2 * a, b) - 1) / math.sqrt(den)


def rho2_limit(a: float, b: float) -> float:
    """Limit of rho[S_n^2, Sigma_n]: flat at Q'_b up to a = b/2, R' above."""
    if not -b <= a <= b:
        raise DomainError(f"a={a} outside [-b, b]")
    if a <= b / 2 or is_critical(a, b):
        return const_Qprime(b)
    return const_Rprime(a, b)


def predicted_rho(params: ModelParams, n: int) -> float:
    """Leading-order approximant of rho[S_n, Sigma_n]."""
    a, b, s = params.a, params.b, params.s
    if a == 0.0 or s == 0.5:
        raise DomainError("rho[S_n, Sigma_n] is exactly 0 for a = 0 or s = 1/2")
    _open_unit_b(b)
    if n < 3:
        raise DomainError("n must be >= 3")
    sgn = 2 * s - 1
    regime = classify(params)
    if regime is Regime.SUBCRITICAL:
        return sgn * const_P(a, b) * n ** (-(b - 2 * a) / 2)
    if regime is Regime.CRITICAL:
        return sgn * const_Q(a) / math.sqrt(math.log(n))
    return sgn * const_R(a, b, s)


def phi(x: float) -> float:
    """LIL normalisation sqrt(2 x log log x), defined for x > e."""
    if not x > math.e:
        raise DomainError(f"phi needs x > e; got {x}")
    return math.sqrt(2 * x * math.log(math.log(x)))


def lil_constant(params: ModelParams) -> float:
    regime = classify(params)
    if regime is Regime.SUBCRITICAL:
        return math.sqrt(params.b / (params.b - 2 * params.a))
    if regime is Regime.CRITICAL:
        return 1.0
    raise DomainError("no LIL envelope in the supercritical regime")


def lil_normalizer(params: ModelParams, sigma_n: float) -> float:
    """phi(Sigma) subcritically, phi(Sigma log Sigma) at criticality."""
    if classify(params) is Regime.CRITICAL:
        if not sigma_n > 1:
            raise DomainError("Sigma log Sigma must exceed e")
        return phi(sigma_n * math.log(sigma_n))
    return phi(sigma_n)


def lil_envelope(params: ModelParams, sigma_n: float) -> float:
    return lil_constant(params) * lil_normalizer(params, sigma_n)


def predicted_sigma_scaling(b: float) -> dict[str, float]:
    """First two moments of lim Sigma_n / n^b (Mittag-Leffler law)."""
    if not 0.0 < b <= 1.0:
        raise DomainError(f"b={b} outside (0, 1]")
    return {"limit_mean": 1 / gamma(1 + b),
            "limit_second_moment": 2 / gamma(1 + 2 * b)}


def leading_terms(params: ModelParams, n: float) -> dict[str, float]:
    """Leading-order forms of the exact moments and (co)variances.

    Keys missing from the result have no nonzero leading term for these
    parameters (e.g. cov_s_sigma when a = 0 or s = 1/2).
    """
    a, b, s = params.a, params.b, params.s
    sgn = 2 * s - 1
    g = gamma
    regime = classify(params)
    out: dict[str, float] = {"e_sigma": n ** b / g(b + 1)}
    if a > -1:
        out["e_s"] = sgn * n ** a / g(a + 1)
    if b < 1:
        out["var_sigma"] = (b * beta(b, b) - 1) / g(b + 1) ** 2 * n ** (2 * b)
    if a != 0 and s != 0.5 and b < 1:
        out["cov_s_sigma"] = (sgn / (g(a + 1) * g(b + 1))
                              * ((a + b) * beta(a + 1, b) - 1) * n ** (a + b))
    logn = math.log(n)
    if regime is Regime.SUBCRITICAL:
        out["var_s"] = n ** b / ((b - 2 * a) * g(b))
        out["e_s4"] = 3 * b / ((b - 2 * a) ** 2 * g(2 * b)) * n ** (2 * b)
        out["var_s2"] = (3 * b * beta(b, b) - 1) / ((b - 2 * a) ** 2 * g(b) ** 2) * n ** (2 * b)
        if b < 1:
            out["cov_s2_sigma"] = (b * beta(b, b) - 1) / (b * (b - 2 * a) * g(b) ** 2) * n ** (2 * b)
    elif regime is Regime.CRITICAL:
        out["var_s"] = n ** (2 * a) * logn / g(2 * a)
        out["e_s4"] = 3 * b / g(2 * b) * n ** (2 * b) * logn ** 2
        out["var_s2"] = (3 * b * beta(b, b) - 1) / g(b) ** 2 * n ** (2 * b) * logn ** 2
        if b < 1:
            out["cov_s2_sigma"] = (b * beta(b, b) - 1) / (b * g(b) ** 2) * n ** (2 * b) * logn
    else:
        out["var_s"] = ((a * a * beta(a, a) - sgn ** 2 * (2 * a - b))
                        / ((2 * a - b) * g(a + 1) ** 2) * n ** (2 * a))
        k4 = 6 * (2 * a * a + 2 * a * b - b * b) / (4 * a - b)
        out["e_s4"] = k4 / ((2 * a - b) ** 2 * g(4 * a)) * n ** (4 * a)
        out["var_s2"] = (k4 * beta(2 * a, 2 * a) - 1) / ((2 * a - b) ** 2 * g(2 * a) ** 2) * n ** (4 * a)
        if b < 1:
            out["cov_s2_sigma"] = ((2 * a * beta(2 * a, b) - 1)
                                   / (b * (2 * a - b) * g(2 * a) * g(b)) * n ** (2 * a + b))
    return out


@dataclass(frozen=True)
class AsymptoticPrediction:
    regime: str
    quantity: str
    constant: float
    rate: str


def predictions(params: ModelParams) -> list[AsymptoticPrediction]:
    """Constants and rates that apply to ``params``."""
    a, b, s = params.a, params.b, params.s
    regime = classify(params)
    label = regime.label
    out = []
    if 0 < b < 1 and a != 0 and s != 0.5:
        if regime is Regime.SUBCRITICAL:
            out.append(AsymptoticPrediction(label, "rho_S_Sigma", (2 * s - 1) * const_P(a, b),
                                            f"n^-{(b - 2 * a) / 2:g}"))
        elif regime is Regime.CRITICAL:
            out.append(AsymptoticPrediction(label, "rho_S_Sigma", (2 * s - 1) * const_Q(a),
                                            "log(n)^-1/2"))
        else:
            out.append(AsymptoticPrediction(label, "rho_S_Sigma", (2 * s - 1) * const_R(a, b, s),
                                            "constant"))
    if 0 < b < 1:
        out.append(AsymptoticPrediction(label, "rho_S2_Sigma_limit", rho2_limit(a, b), "constant"))
    if regime is not Regime.SUPERCRITICAL:
        c = lil_constant(params)
        out.append(AsymptoticPrediction(label, "lil_bound", c,
                                        "phi(Sigma_n)" if regime is Regime.SUBCRITICAL
                                        else "phi(Sigma_n log Sigma_n)"))
        out.append(AsymptoticPrediction(label, "range_band_low", c, "limsup R_n / normalizer"))
        out.append(AsymptoticPrediction(label, "range_band_high", 2 * c, "limsup R_n / normalizer"))
    else:
        out.append(AsymptoticPrediction(label, "range_band_low", 1.0, "R_n / |S_n|"))
    return out


def constants_table_json(bs=(0.3, 0.6, 0.9)) -> str:
    rows = []
    for b in bs:
        rows.append({"b": b, "a_critical": b / 2, "Qprime": const_Qprime(b)})
    return json.dumps({"rho_S2_Sigma_limit": rows}, indent=2)


def as_dicts(preds: list[AsymptoticPrediction]) -> list[dict]:
    return [asdict(p) for p in preds]
