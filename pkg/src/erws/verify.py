"""Deterministic verification suite behind ``erws verify``.

Every check returns :class:`Check` records; the suite passes only if all of
them pass.  Monte Carlo checks are opt-in because they take minutes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from . import asymptotics as asy
from . import moments as mo
from .model import ModelParams, from_ab, is_critical
from .oracle import exact_joint_law, exact_range_law, enumerate_paths
from .range_analysis import lemma31_case_i, lemma31_case_ii, sqrt_growth

ORACLE_TOL = 1e-10
GRID_B = (0.3, 0.6, 0.9)
GRID_A_FRAC = (-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0)
GRID_S = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def standard_grid() -> list[ModelParams]:
    return [from_ab(f * b, b, s) for b in GRID_B for f in GRID_A_FRAC for s in GRID_S]


# ------------------------------------------------------------- oracle side

@dataclass(frozen=True)
class OracleValues:
    """Moments, (co)variances and correlations computed from a joint law."""
    moments: dict[str, float]
    scales: dict[str, float]
    cov: dict[str, float]
    cov_scales: dict[str, float]
    rho: dict[str, float]


_MOMENT_EXPONENTS = {"e_s": (1, 0), "e_sigma": (0, 1), "e_s_sigma": (1, 1),
                     "e_s2": (2, 0), "e_sigma2": (0, 2), "e_s2_sigma": (2, 1),
                     "e_s4": (4, 0)}


def oracle_values(params: ModelParams, n: int) -> OracleValues:
    law = exact_joint_law(params, n)
    pr = np.array([p for *_, p in law.entries()])
    npl = np.array([i for i, _, _ in law.entries()], dtype=float)
    nmi = np.array([j for _, j, _ in law.entries()], dtype=float)
    s, sig = npl - nmi, npl + nmi

    def E(v):
        return math.fsum(pr * v)

    moments, scales = {}, {}
    for name, (i, j) in _MOMENT_EXPONENTS.items():
        moments[name] = E(s ** i * sig ** j)
        scales[name] = E(np.abs(s) ** i * sig ** j)
    ms, msig, ms2 = moments["e_s"], moments["e_sigma"], moments["e_s2"]
    cs, csig, cs2 = s - ms, sig - msig, s * s - ms2
    cov = {"cov_s_sigma": E(cs * csig), "var_s": E(cs * cs),
           "var_sigma": E(csig * csig), "cov_s2_sigma": E(cs2 * csig),
           "var_s2": E(cs2 * cs2)}
    # magnitude of the uncentred second moments: floor for relative errors
    cov_scales = {"cov_s_sigma": math.sqrt(scales["e_s2"] * scales["e_sigma2"]),
                  "var_s": scales["e_s2"], "var_sigma": scales["e_sigma2"],
                  "cov_s2_sigma": math.sqrt(scales["e_s4"] * scales["e_sigma2"]),
                  "var_s2": scales["e_s4"]}
    rho = {}
    if cov["var_sigma"] > 1e-12 * cov_scales["var_sigma"]:
        if cov["var_s"] > 1e-12 * cov_scales["var_s"]:
            rho["rho_S_Sigma"] = cov["cov_s_sigma"] / math.sqrt(cov["var_s"] * cov["var_sigma"])
        if cov["var_s2"] > 1e-12 * cov_scales["var_s2"]:
            rho["rho_S2_Sigma"] = cov["cov_s2_sigma"] / math.sqrt(cov["var_s2"] * cov["var_sigma"])
    return OracleValues(moments, scales, cov, cov_scales, rho)


def rel_err(value: float, exact: float, scale: float) -> float:
    """Error relative to the natural magnitude ``scale`` of a quantity.

    ``scale`` is E|S^i Sigma^j| for raw moments (equal to |exact| for even
    i), the uncentred second-moment magnitude for (co)variances, and 1 for
    correlations.
    """
    return abs(value - exact) / max(scale, 1e-300)


def engine_values(params: ModelParams, table: mo.MomentTable) -> dict[str, float]:
    out = dict(table.values())
    out.update(mo.covariances_from_table(params, table).values())
    if params.b < 1:
        if params.a == 0.0 or params.s == 0.5:
            out["rho_S_Sigma"] = 0.0
        else:
            cv = mo.covariances_from_table(params, table)
            if cv.var_s > 0 and cv.var_sigma > 0:
                out["rho_S_Sigma"] = cv.cov_s_sigma / math.sqrt(cv.var_s * cv.var_sigma)
        cv = mo.covariances_from_table(params, table)
        if cv.var_s2 > 0 and cv.var_sigma > 0:
            out["rho_S2_Sigma"] = cv.cov_s2_sigma / math.sqrt(cv.var_s2 * cv.var_sigma)
    return out


def perturbed_closed_form(params: ModelParams, n: int, perturb: float) -> mo.MomentTable:
    t = mo.closed_form_table(params, n)
    if not perturb:
        return t
    vals = {k: v * (1 + perturb) if k == "e_s2" else v for k, v in t.values().items()}
    return mo.MomentTable(n, **vals, method=t.method)


def oracle_comparisons(params: ModelParams, n_max: int = 12, perturb: float = 0.0
                       ) -> Iterator[tuple[str, int, str, float]]:
    """Yield ``(method, n, quantity, relative error)`` against the DP oracle."""
    rec = mo.recursion_tables(params, list(range(1, n_max + 1)))
    for n in range(1, n_max + 1):
        ov = oracle_values(params, n)
        exact = {**ov.moments, **ov.cov, **ov.rho}
        scale = {**ov.scales, **ov.cov_scales, **{k: 1.0 for k in ov.rho}}
        tables = [("recursion", rec[n - 1])]
        if mo.closed_form_admissible(params.a, params.b):
            tables.append(("closed_form", perturbed_closed_form(params, n, perturb)))
        for method, table in tables:
            got = engine_values(params, table)
            for q, v in exact.items():
                if q not in got:
                    continue
                yield method, n, q, rel_err(got[q], v, scale[q])


def check_oracle_equivalence(grid: Iterable[ModelParams] | None = None, n_max: int = 12,
                             tol: float = ORACLE_TOL, perturb: float = 0.0) -> Check:
    worst = (0.0, None)
    count = 0
    for params in grid or standard_grid():
        for method, n, q, err in oracle_comparisons(params, n_max, perturb):
            count += 1
            if err > worst[0]:
                worst = (err, (params.a, params.b, params.s, n, q, method))
    ok = worst[0] <= tol
    return Check("oracle equivalence (n <= %d)" % n_max, ok,
                 f"{count} comparisons, worst rel err {worst[0]:.2e} at {worst[1]}, tol {tol:g}")


# ------------------------------------------------------- asymptotic checks

TREND_NS = (10**3, 10**4, 10**5, 10**6)


def check_subcritical_rho(a=0.2, b=0.8, s=1.0, tol=0.05) -> list[Check]:
    p = from_ab(a, b, s)
    P = asy.const_P(a, b)
    ratios = [mo.rho_S_Sigma(p, n) * n ** ((b - 2 * a) / 2) / ((2 * s - 1) * P)
              for n in TREND_NS]
    gaps = [abs(r - 1) for r in ratios]
    mono = all(x > y for x, y in zip(gaps, gaps[1:]))
    return [
        Check("rho[S,Sigma] subcritical n=1e6 vs P", gaps[-1] <= tol,
              f"ratio {ratios[-1]:.5f}, P={P:.6f}, tol {tol:.0%}"),
        Check("rho[S,Sigma] subcritical monotone trend", mono,
              "ratios " + ", ".join(f"{r:.5f}" for r in ratios)),
    ]


def check_critical_rho(a=0.3, s=1.0, tol=0.10) -> Check:
    p = from_ab(a, 2 * a, s)
    n = 10**6
    ratio = mo.rho_S_Sigma(p, n) * math.sqrt(math.log(n)) / ((2 * s - 1) * asy.const_Q(a))
    return Check("rho[S,Sigma] critical n=1e6 vs Q", abs(ratio - 1) <= tol,
                 f"ratio {ratio:.5f}, tol {tol:.0%}")


def check_supercritical_rho(a=0.4, b=0.5, s=1.0, tol=0.02) -> Check:
    p = from_ab(a, b, s)
    ratio = mo.rho_S_Sigma(p, 10**6) / ((2 * s - 1) * asy.const_R(a, b, s))
    return Check("rho[S,Sigma] supercritical n=1e6 vs R", abs(ratio - 1) <= tol,
                 f"ratio {ratio:.5f}, tol {tol:.0%}")


def rho2_a_grid(b: float, points: int = 201) -> np.ndarray:
    grid = np.linspace(-b, b, points)
    grid[(points - 1) * 3 // 4] = b / 2  # exact critical point on the grid
    return grid


def rho2_curve_rows(bs=GRID_B, points: int = 201, n: int = 10**6) -> list[dict]:
    rows = []
    for b in bs:
        for a in rho2_a_grid(b, points):
            a = float(a)
            rows.append({"b": b, "a": a, "limit": asy.rho2_limit(a, b),
                         "exact": mo.rho_S2_Sigma(from_ab(a, b, 1.0), n), "n": n})
    return rows


def check_rho2_curve(rows: list[dict] | None = None, tol: float = 0.02) -> list[Check]:
    rows = rows if rows is not None else rho2_curve_rows()
    out = []
    for b in sorted({r["b"] for r in rows}):
        sub = [r for r in rows if r["b"] == b]
        dev = max(abs(r["exact"] - r["limit"]) for r in sub)
        worst = max(sub, key=lambda r: abs(r["exact"] - r["limit"]))
        out.append(Check(f"rho[S^2,Sigma] overlay b={b}", dev < tol,
                         f"max |exact - limit| = {dev:.4f} at a={worst['a']:.4f}, tol {tol}"))
        flat = [r["limit"] for r in sub if r["a"] <= b / 2 or is_critical(r["a"], b)]
        var = (max(flat) - min(flat)) / asy.const_Qprime(b)
        out.append(Check(f"rho[S^2,Sigma] limit flat on [-b, b/2] b={b}", var < 0.02,
                         f"variation {var:.2e}"))
        gap = abs(asy.const_Rprime(b / 2 + 1e-6, b) - asy.const_Qprime(b))
        out.append(Check(f"rho[S^2,Sigma] limit continuous at a=b/2 b={b}", gap < 1e-4,
                         f"|R'(b/2+1e-6) - Q'| = {gap:.2e}"))
    return out


def check_range_lemma(n_max: int = 10**6) -> list[Check]:
    out = []
    for c in (-2, 0, 3):
        rep = lemma31_case_i(sqrt_growth, c, n_max)
        out.append(Check(f"lemma case (i) staircase c={c}", rep.passed,
                         f"max |r/f - {rep.target}| = {rep.max_deviation:.2e}, "
                         f"slack {rep.tolerance:.2e}"))
    for kind in ("toucher", "zigzag"):
        rep = lemma31_case_ii(sqrt_growth, n_max, kind)
        out.append(Check(f"lemma case (ii) {kind}", rep.passed,
                         f"limsup est {rep.limsup_estimate:.5f} in "
                         f"[{rep.lower:.5f}, {rep.upper:.5f}]"))
    return out


def check_critical_discrepancy(bs=GRID_B) -> Check:
    worst = 0.0
    shifted = True
    for b in bs:
        a = b / 2
        p = from_ab(a, b, 1.0)
        exact = oracle_values(p, 2).moments["e_s2"]
        expected = 1 + 2 * a + b
        worst = max(worst, abs(mo.moment_table(p, 2).e_s2 - expected),
                    abs(exact - expected))
        shifted &= abs(mo.critical_e_s2_displayed(a, 2) - expected) > 1e-6
    return Check("critical E[S_2^2] = 1 + 2a + b (recursion, not displayed branch)",
                 worst < 1e-12 and shifted,
                 f"max deviation {worst:.1e}; displayed k=1..n sum differs: {shifted}")


def check_partial_sum_identity() -> Check:
    res = mo.partial_sum_identity_check(0.9, 0.1, 10**4)
    return Check("partial-sum identity canary", res < 1e-10, f"residual {res:.2e}")


def check_range_law(n: int = 8) -> Check:
    worst = 0.0
    for params in (from_ab(0.5, 0.5, 1.0), from_ab(-0.3, 0.6, 0.5), from_ab(0.2, 0.9, 0.3)):
        law = exact_range_law(params, n)
        direct: dict[int, list[float]] = {}
        for path, w in enumerate_paths(params, n):
            pos = np.concatenate(([0], np.cumsum(path)))
            direct.setdefault(len(set(pos.tolist())), []).append(w)
        for r in set(law) | set(direct):
            worst = max(worst, abs(law.get(r, 0.0) - math.fsum(direct.get(r, []))))
    return Check(f"range law: state DP vs path enumeration (n={n})", worst < 1e-12,
                 f"max abs diff {worst:.1e}")


def run_suite(quick: bool = False, perturb: float = 0.0) -> list[Check]:
    checks = [check_oracle_equivalence(perturb=perturb)]
    if quick:
        return checks
    checks += check_subcritical_rho()
    checks += [check_critical_rho(), check_supercritical_rho()]
    checks += check_rho2_curve()
    checks += check_range_lemma()
    checks += [check_critical_discrepancy(), check_partial_sum_identity(), check_range_law()]
    return checks


# ------------------------------------------------------------ Monte Carlo

MC_SEED = 20261016


def monte_carlo_checks(parallelism: int = 1, seed: int = MC_SEED,
                       range_replicas: int = 1000) -> list[Check]:
    """Ensemble checks: CLT, Sigma scaling, range, reproducibility."""
    from .montecarlo import EnsembleSpec, clt_test, estimate, sigma_scaling_test
    from .range_analysis import range_scaling_ensemble

    out = []
    for label, (a, b, s) in (("subcritical", (0.2, 0.8, 1.0)), ("critical", (0.3, 0.6, 1.0))):
        res = clt_test(EnsembleSpec(from_ab(a, b, s), 10**5, 10**4, seed, parallelism))
        tried = ", ".join(f"seed {t['seed']}: D={t['ks_statistic']:.4f} p={t['p_value']:.3g}"
                          for t in res["attempts"])
        out.append(Check(f"CLT KS {label} (a,b,s)=({a},{b},{s})", res["passed"], tried))
    res = sigma_scaling_test(EnsembleSpec(from_ab(0.0, 0.5, 1.0), 10**6, 10**4, seed, parallelism))
    out.append(Check("Sigma_n/n^b moments b=0.5 n=1e6", res["passed"],
                     f"z(mean)={res['mean']['z']:.2f}, z(second)={res['second_moment']['z']:.2f}"))
    sup = range_scaling_ensemble(from_ab(0.75, 0.9, 1.0), 10**6, range_replicas, seed, parallelism)
    med = sup["median_ratio"]
    out.append(Check("range supercritical median R_n/(|S_n|+1)", 0.95 <= med <= 1.05,
                     f"median {med:.5f} over {sup['conditioned_count']} conditioned replicas"))
    sub = range_scaling_ensemble(from_ab(0.0, 0.8, 0.5), 10**6, range_replicas, seed, parallelism)
    out.append(Check("range subcritical running-max band (diagnostic)",
                     sub["fraction_in_band"] >= 0.9,
                     f"{sub['fraction_in_band']:.1%} of replicas in "
                     f"[{sub['band'][0]:.3f}, {sub['band'][1]:.3f}]"))
    spec = EnsembleSpec(from_ab(0.3, 0.8, 1.0), 10**4, 1000, seed, 1)
    one = estimate(spec).to_json()
    eight = estimate(EnsembleSpec(spec.params, spec.n, spec.replicas, spec.seed, 8)).to_json()
    out.append(Check("reproducibility parallelism 1 vs 8", one == eight,
                     f"{len(one)} bytes, identical={one == eight}"))
    return out
