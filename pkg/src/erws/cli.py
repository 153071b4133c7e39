"""Command-line front end: ``erws <command> [flags]``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 domain error.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import math
import shlex
import sys
from typing import Sequence

import numpy as np

from . import __version__
from . import asymptotics as asy
from . import moments as mo
from .errors import ERWSError
from .model import ModelParams, classify, from_ab, params_from_mapping
from .montecarlo import EnsembleSpec, clt_test, estimate, recurrence_diagnostic
from .range_analysis import (lemma31_case_i, lemma31_case_ii, range_scaling_ensemble,
                             sqrt_growth)
from .simulator import checkpoint_times, run, run_path
from .svg import line_plot
from .verify import check_rho2_curve, rho2_curve_rows, run_suite

log = logging.getLogger("erws")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


def _count(text: str) -> int:
    """Integer flag that also accepts ``1e6``."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v.is_integer() or v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(v)


# ----------------------------------------------------------------- output

class Output:
    """Collects one output artifact and its provenance header."""

    def __init__(self, args: argparse.Namespace, params: ModelParams | None):
        self.args = args
        self.meta = {
            "tool": f"erws {__version__}",
            "command": "erws " + shlex.join(args.argv),
            "params": params.as_dict() if params else None,
            "seed": getattr(args, "seed", None),
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        }

    def _header_lines(self) -> list[str]:
        return [f"{k}: {json.dumps(v) if isinstance(v, dict) else v}"
                for k, v in self.meta.items()]

    def csv(self, header: Sequence[str], rows) -> str:
        buf = io.StringIO()
        for line in self._header_lines():
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()

    def json(self, payload: dict) -> str:
        return json.dumps({"meta": self.meta, **payload}, indent=2) + "\n"

    def svg(self, body: str) -> str:
        comment = "\n".join(f"  {line.replace('--', '- -')}" for line in self._header_lines())
        return body.replace("\n", f"\n<!--\n{comment}\n-->\n", 1)

    def emit(self, text: str, suffix: str | None = None) -> None:
        path = self.args.out
        if path is None:
            sys.stdout.write(text)
            return
        if suffix:
            path = f"{path}{suffix}"
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
        log.info("wrote %s", path)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


# --------------------------------------------------------------- params

def resolve_params(args: argparse.Namespace, parser: argparse.ArgumentParser) -> ModelParams:
    cfg: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    for k in ("p", "q", "r", "a", "b", "s"):
        v = getattr(args, k)
        if v is not None:
            cfg[k] = v
    has_ab = cfg.get("a") is not None or cfg.get("b") is not None
    has_pqr = any(cfg.get(k) is not None for k in ("p", "q", "r"))
    if has_ab and (cfg.get("a") is None or cfg.get("b") is None):
        parser.error("both --a and --b are required")
    if not has_ab and not has_pqr:
        parser.error("model parameters required: --a/--b/--s or --p/--q/--r/--s or --config")
    if has_pqr and not has_ab and any(cfg.get(k) is None for k in ("p", "q", "r")):
        parser.error("--p, --q and --r are all required")
    return params_from_mapping(cfg)


# ------------------------------------------------------------- commands

def cmd_simulate(args, params: ModelParams) -> int:
    out = Output(args, params)
    if args.path:
        path = run_path(params, args.n, args.seed)
        pos = np.cumsum(path, dtype=np.int64)
        rows = ((k + 1, int(x), int(s)) for k, (x, s) in enumerate(zip(path, pos)))
        out.emit(out.csv(("k", "x_k", "s_k"), rows))
        return EXIT_OK
    summary = run(params, args.n, args.seed, checkpoints=True)
    rows = [(cp.k, args.seed, cp.s, cp.sigma, cp.range, cp.returns_to_zero)
            for cp in summary.checkpoints]
    out.emit(out.csv(summary.CSV_HEADER, rows))
    return EXIT_OK


def cmd_moments(args, params: ModelParams) -> int:
    out = Output(args, params)
    ns = [int(k) for k in checkpoint_times(args.n)]
    method = args.method.replace("-", "_")
    if method == "auto":
        method = ("closed_form" if mo.closed_form_admissible(params.a, params.b, mo.AUTO_GUARD)
                  else "recursion")
    if method == "recursion":
        tables = mo.recursion_tables(params, ns)
    else:
        tables = [mo.closed_form_table(params, n) for n in ns]
    header = list(mo.MomentTable.CSV_HEADER)
    rows = []
    if args.corr:
        header += ["cov_s_sigma", "var_s", "var_sigma", "cov_s2_sigma", "var_s2",
                   "rho_s_sigma", "rho_s2_sigma"]
        # correlations are undefined when Sigma_n is deterministic
        mo.rho_S2_Sigma(params, max(ns[-1], 2), method=method)
    for t in tables:
        row = [t.n, *(_fmt(v) for v in t.values().values()), t.method.value]
        if args.corr:
            cv = mo.covariances_from_table(params, t)
            row += [_fmt(v) for v in cv.values().values()]
            try:
                r1, r2 = mo.rho_from_table(params, t)
                if params.a == 0.0 or params.s == 0.5:
                    r1 = 0.0
                row += [_fmt(r1), _fmt(r2)]
            except ERWSError:
                row += ["", ""]
        rows.append(row)
    out.emit(out.csv(header, rows))
    return EXIT_OK


def cmd_corr(args, params: ModelParams) -> int:
    out = Output(args, params)
    ns = sorted({10**k for k in range(1, int(math.log10(args.n)) + 1)} | {args.n})
    tables = mo.recursion_tables(params, ns)
    regime = classify(params)
    rows = []
    for t in tables:
        r1, r2 = mo.rho_from_table(params, t)
        if params.a == 0.0 or params.s == 0.5:
            r1, pred = 0.0, 0.0
        else:
            pred = asy.predicted_rho(params, t.n) if t.n >= 3 else math.nan
        lim2 = asy.rho2_limit(params.a, params.b)
        rows.append((t.n, regime.label, _fmt(r1), _fmt(pred),
                     _fmt(r1 / pred) if pred else "", _fmt(r2), _fmt(lim2)))
    out.emit(out.csv(("n", "regime", "rho_s_sigma", "predicted", "ratio",
                      "rho_s2_sigma", "rho_s2_sigma_limit"), rows))
    return EXIT_OK


def cmd_figure1(args, params) -> int:
    out = Output(args, None)
    bs = tuple(args.b_values)
    rows = rho2_curve_rows(bs, args.points, args.n)
    checks = check_rho2_curve(rows)
    if args.format == "json":
        payload = {"constants": json.loads(asy.constants_table_json(bs)),
                   "rows": rows, "checks": [c.__dict__ for c in checks]}
        out.emit(out.json(payload))
    elif args.format == "svg":
        out.emit(out.svg(_rho2_curve_svg(rows, bs, args.n)))
    else:
        out.emit(out.csv(("b", "a", "limit", "exact", "n"),
                          ((r["b"], _fmt(r["a"]), _fmt(r["limit"]), _fmt(r["exact"]), r["n"])
                           for r in rows)))
        if args.out:
            out.emit(out.svg(_rho2_curve_svg(rows, bs, args.n)), suffix=".svg")
    for c in checks:
        log.info(c.line())
    return EXIT_OK


def _rho2_curve_svg(rows, bs, n) -> str:
    series, dashed = [], []
    for b in bs:
        sub = [r for r in rows if r["b"] == b]
        series.append((f"limit b={b:g}", [r["a"] for r in sub], [r["limit"] for r in sub]))
        dashed.append(False)
    for b in bs:
        sub = [r for r in rows if r["b"] == b]
        series.append((f"n={n:.0e} b={b:g}", [r["a"] for r in sub], [r["exact"] for r in sub]))
        dashed.append(True)
    return line_plot(series, title="lim rho[S_n^2, Sigma_n] against a",
                     xlabel="a", ylabel="rho", dashed=dashed)


def cmd_verify(args, params) -> int:
    checks = run_suite(quick=args.quick, perturb=args.perturb)
    if args.monte_carlo:
        from .verify import monte_carlo_checks
        checks += monte_carlo_checks(parallelism=args.parallelism)
    lines = [c.line() for c in checks]
    ok = all(c.passed for c in checks)
    lines.append(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    text = "\n".join(lines) + "\n"
    if args.out:
        Output(args, None).emit(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_range(args, params: ModelParams | None) -> int:
    out = Output(args, params)
    if args.lemma:
        checks = []
        for c in (-2, 0, 3):
            r = lemma31_case_i(sqrt_growth, c, args.n)
            checks.append({"case": "i", "c": c, "max_deviation": r.max_deviation,
                           "tolerance": r.tolerance, "passed": r.passed})
        for kind in ("toucher", "zigzag"):
            r = lemma31_case_ii(sqrt_growth, args.n, kind)
            checks.append({"case": "ii", "kind": kind, "limsup_estimate": r.limsup_estimate,
                           "band": [r.lower, r.upper], "passed": r.passed})
        out.emit(out.json({"lemma": checks}))
        return EXIT_OK if all(c["passed"] for c in checks) else EXIT_VERIFY
    if params is None:
        raise ERWSError("model parameters required unless --lemma")
    res = range_scaling_ensemble(params, args.n, args.replicas, args.seed, args.parallelism)
    series = res.pop("series")
    if args.format == "csv":
        out.emit(out.csv(series.CSV_HEADER, series.csv_rows()))
    else:
        out.emit(out.json({"summary": res}))
    return EXIT_OK


def cmd_clt(args, params: ModelParams) -> int:
    out = Output(args, params)
    res = clt_test(EnsembleSpec(params, args.n, args.replicas, args.seed, args.parallelism))
    out.emit(out.json({"clt": res}))
    return EXIT_OK


def cmd_ensemble(args, params: ModelParams) -> int:
    out = Output(args, params)
    spec = EnsembleSpec(params, args.n, args.replicas, args.seed, args.parallelism)
    rep = estimate(spec)
    exact = mo.moment_table(params, args.n)
    cv = mo.covariances_from_table(params, exact)
    payload = rep.to_dict()
    payload["exact"] = {**exact.values(), **cv.values()}
    payload["recurrence"] = recurrence_diagnostic(spec)
    out.emit(out.json({"report": payload}))
    return EXIT_OK


def cmd_sweep(args, params) -> int:
    out = Output(args, None)
    rows = []
    for b in args.b_values:
        for a in np.linspace(-b, b, args.points):
            a = float(a)
            p = from_ab(a, b, args.s if args.s is not None else 1.0)
            regime = classify(p).label
            r1 = r2 = pred = ""
            if b < 1:
                t = mo.moment_table(p, args.n)
                try:
                    x1, x2 = mo.rho_from_table(p, t)
                    r1 = _fmt(0.0 if (p.a == 0.0 or p.s == 0.5) else x1)
                    r2 = _fmt(x2)
                except ERWSError:
                    pass
                if p.a != 0.0 and p.s != 0.5:
                    pred = _fmt(asy.predicted_rho(p, args.n))
            rows.append((_fmt(a), _fmt(b), regime, r1, pred, r2,
                         _fmt(asy.rho2_limit(a, b)) if b < 1 else ""))
    out.emit(out.csv(("a", "b", "regime", "rho_s_sigma", "predicted_rho",
                      "rho_s2_sigma", "rho_s2_sigma_limit"), rows))
    return EXIT_OK


# ----------------------------------------------------------------- parser

def _add_common(p: argparse.ArgumentParser, *, n_default=None, model=True) -> None:
    if model:
        g = p.add_argument_group("model")
        for k in ("p", "q", "r", "a", "b", "s"):
            g.add_argument(f"--{k}", type=float)
        g.add_argument("--config", help="JSON file with {p,q,r,s} or {a,b,s}")
    p.add_argument("--n", type=_count, default=n_default, required=n_default is None)
    p.add_argument("--replicas", type=_count, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallelism", type=_count, default=1)
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json", "svg"))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="erws", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"erws {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one trajectory")
    _add_common(p)
    p.add_argument("--path", action="store_true", help="emit every increment")
    p.set_defaults(func=cmd_simulate, needs_params=True)

    p = sub.add_parser("moments", help="exact moment table at geometric checkpoints")
    _add_common(p)
    p.add_argument("--method", choices=("auto", "recursion", "closed-form"), default="auto")
    p.add_argument("--corr", action="store_true", help="add (co)variance and correlation columns")
    p.set_defaults(func=cmd_moments, needs_params=True)

    p = sub.add_parser("corr", help="exact correlations vs asymptotic predictions")
    _add_common(p, n_default=10**6)
    p.set_defaults(func=cmd_corr, needs_params=True)

    p = sub.add_parser("figure1", help="limit of rho[S^2, Sigma] against a, with overlay")
    _add_common(p, n_default=10**6, model=False)
    p.add_argument("--b-values", type=float, nargs="+", default=[0.3, 0.6, 0.9])
    p.add_argument("--points", type=_count, default=201)
    p.set_defaults(func=cmd_figure1, needs_params=False)

    p = sub.add_parser("verify", help="run the oracle and property suite")
    _add_common(p, n_default=12, model=False)
    p.add_argument("--quick", action="store_true", help="oracle checks for n <= 12 only")
    p.add_argument("--perturb", type=float, default=0.0,
                   help="relative perturbation injected into the closed-form E[S_n^2]")
    p.add_argument("--monte-carlo", action="store_true", help="include ensemble checks")
    p.set_defaults(func=cmd_verify, needs_params=False)

    p = sub.add_parser("range", help="range ensembles or the deterministic lemma harness")
    _add_common(p)
    p.add_argument("--lemma", action="store_true")
    p.set_defaults(func=cmd_range, needs_params=None)

    p = sub.add_parser("clt", help="Kolmogorov-Smirnov test of the Gaussian limit")
    _add_common(p, n_default=10**5)
    p.set_defaults(func=cmd_clt, needs_params=True)

    p = sub.add_parser("ensemble", help="Monte Carlo estimates with standard errors")
    _add_common(p)
    p.set_defaults(func=cmd_ensemble, needs_params=True)

    p = sub.add_parser("sweep", help="regime grid over (a, b)")
    _add_common(p, n_default=10**5, model=False)
    p.add_argument("--s", type=float)
    p.add_argument("--b-values", type=float, nargs="+", default=[0.3, 0.6, 0.9])
    p.add_argument("--points", type=_count, default=21)
    p.set_defaults(func=cmd_sweep, needs_params=False)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        params = None
        if args.needs_params or (args.needs_params is None and not getattr(args, "lemma", False)):
            params = resolve_params(args, sub)
        return args.func(args, params)
    except ERWSError as exc:
        print(f"erws: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
