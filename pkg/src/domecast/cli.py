"""Command-line surface: fit, gof, posterior, forecast, simulate,
recovery, empirical.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
All outputs land in --out DIR under fixed names and are written
atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from typing import Optional

import numpy as np

from . import bayes, fit, forecast, gof, simulate
from .catalog import Catalog, CatalogError, CompositionClass, parse_catalog, summarize
from .likelihood import RegressionParams
from .pareto import ExpParams, GPaParams, exp_quantile, quantile, survival

SCHEMA = "domecast/v1"
DAYS_PER_YEAR = 365.25

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract wants 1.
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class DataError(Exception):
    pass


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-domecast-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: str, doc: dict) -> None:
    doc = {"schema": SCHEMA, **doc}
    _atomic_write(path, json.dumps(doc, indent=2) + "\n")


def _load_catalog(path: str, days: bool = False) -> Catalog:
    try:
        with open(path) as fh:
            cat = parse_catalog(fh)
    except OSError as exc:
        raise DataError(f"cannot read catalog {path!r}: {exc}") from exc
    if days:
        from .catalog import EruptionRecord

        cat = Catalog(
            tuple(
                EruptionRecord(
                    r.volcano_name,
                    r.start_year,
                    r.duration / DAYS_PER_YEAR,
                    r.censored,
                    r.composition_class,
                    r.silica_pct,
                )
                for r in cat.records
            ),
            cat.as_of_date,
        )
    return cat


def _load_fit_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read fit JSON {path!r}: {exc}") from exc


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo_s, hi_s, n_s = spec.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError:
        raise DataError(f"bad grid spec {spec!r}; expected LO:HI:N") from None
    if n < 2 or hi <= lo:
        raise DataError(f"bad grid spec {spec!r}; need HI > LO and N >= 2")
    return np.linspace(lo, hi, n)


def cmd_fit(args) -> int:
    cat = _load_catalog(args.catalog, days=args.days)
    if args.completed_only:
        cat = cat.completed_only()
    if args.model == "aggregate":
        result = fit.fit_aggregate(cat)
    elif args.model == "grouped":
        if args.comp_class is None:
            raise DataError("--class is required for the grouped model")
        result = fit.fit_grouped(
            cat, CompositionClass(args.comp_class), family=args.family
        )
    else:
        result = fit.fit_regression(cat)
    _write_json(os.path.join(args.out, "fit.json"), result.to_dict())
    return EXIT_OK


def _model_from_fit_doc(doc: dict, silica: Optional[float] = None):
    """(quantile_fn, k_fitted, label) from a FitResult JSON document."""
    kind = doc.get("model_kind")
    est = doc.get("estimates", {})
    if kind in ("aggregate", "grouped"):
        p = GPaParams(est["alpha"], est["beta"])
        return (lambda q: float(quantile(p, q))), 2, p
    if kind in ("exponential", "grouped-exponential"):
        p = ExpParams(est["lambda"])
        return (lambda q: float(exp_quantile(p, q))), 1, p
    if kind == "regression":
        if silica is None:
            raise DataError("regression fit needs --silica to pin the model")
        rp = RegressionParams(
            est["alpha"], est["beta"], est["gamma_alpha"], est["gamma_beta"]
        )
        p = rp.at_silica(silica)
        return (lambda q: float(quantile(p, q))), 4, p
    raise DataError(f"unsupported model_kind {kind!r} in fit JSON")


def cmd_gof(args) -> int:
    cat = _load_catalog(args.catalog).completed_only()
    doc = _load_fit_json(args.fit)
    quantile_fn, k_fitted, _ = _model_from_fit_doc(doc, args.silica)
    try:
        report = gof.gof_test(cat, quantile_fn, k_fitted, n_bins=args.bins)
    except ValueError as exc:
        if "dof" in str(exc):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        raise DataError(str(exc)) from exc
    _write_json(os.path.join(args.out, "gof.json"), report.to_dict())
    return EXIT_OK


def cmd_posterior(args) -> int:
    cat = _load_catalog(args.catalog)
    config = bayes.McmcConfig(
        seed=args.seed,
        burn_in=args.burn_in,
        iterations=args.iters,
        thin=args.thin,
    )
    chain = bayes.run_mh(args.model, cat, bayes.PriorSpec(), config)
    csv_path = os.path.join(args.out, "chain.csv")
    meta_path = os.path.join(args.out, "chain_meta.json")
    bayes.save_chain(chain, csv_path, meta_path)
    return EXIT_OK


def cmd_forecast(args) -> int:
    s = args.age / DAYS_PER_YEAR if args.days else args.age
    if args.chain:
        meta_path = args.chain_meta or os.path.join(
            os.path.dirname(args.chain) or ".", "chain_meta.json"
        )
        try:
            chain = bayes.load_chain(args.chain, meta_path)
        except OSError as exc:
            raise DataError(f"cannot read chain: {exc}") from exc
        if chain.model_kind == "regression" and args.silica is None:
            print(
                "error: --silica is required for a regression chain",
                file=sys.stderr,
            )
            return EXIT_USAGE
        if args.quartiles:
            q25, q50, q75 = forecast.predictive_quartiles(
                chain, s, args.silica, per_draw=args.per_draw
            )
            _write_json(
                os.path.join(args.out, "quartiles.json"),
                {"mode": "bayes", "age_s": s, "q25": q25, "q50": q50, "q75": q75},
            )
        if args.grid:
            t_grid = _parse_grid(args.grid)
            curve = forecast.predictive_curve(chain, s, args.silica, t_grid)
            _write_curve(args.out, curve)
    else:
        doc = _load_fit_json(args.fit)
        _, _, model = _model_from_fit_doc(doc, args.silica)
        if isinstance(model, ExpParams):
            raise DataError("plug-in forecasts require a Pareto-family fit")
        if args.quartiles:
            q25, q50, q75 = (
                forecast.plugin_remaining_quantile(model, s, q)
                for q in (0.25, 0.50, 0.75)
            )
            _write_json(
                os.path.join(args.out, "quartiles.json"),
                {"mode": "plugin", "age_s": s, "q25": q25, "q50": q50, "q75": q75},
            )
        if args.grid:
            t_grid = _parse_grid(args.grid)
            probs = survival(GPaParams(model.alpha, model.beta + s), t_grid)
            lines = ["t,mean,low,high,plug_in"]
            for t, p in zip(t_grid, probs):
                lines.append(f"{t},{p},{p},{p},{p}")
            _atomic_write(
                os.path.join(args.out, "forecast.csv"), "\n".join(lines) + "\n"
            )
            _write_json(
                os.path.join(args.out, "forecast_meta.json"),
                {"mode": "plugin", "age_s": s, "band_level": None},
            )
    return EXIT_OK


def _write_curve(out_dir: str, curve: forecast.ForecastCurve) -> None:
    lines = ["t,mean,low,high,plug_in"]
    for i, t in enumerate(curve.t_grid):
        lines.append(
            f"{t},{curve.mean_probability[i]},{curve.band_low[i]},"
            f"{curve.band_high[i]},{curve.plug_in_probability[i]}"
        )
    _atomic_write(os.path.join(out_dir, "forecast.csv"), "\n".join(lines) + "\n")
    _write_json(
        os.path.join(out_dir, "forecast_meta.json"),
        {
            "mode": "bayes",
            "age_s": curve.eruption_age_s,
            "model_kind": curve.model_kind,
            "band_level": curve.band_level,
        },
    )
    draw_lines = [",".join(str(t) for t in curve.t_grid)]
    for row in curve.draw_curves:
        draw_lines.append(",".join(str(v) for v in row))
    _atomic_write(
        os.path.join(out_dir, "forecast_draws.csv"), "\n".join(draw_lines) + "\n"
    )


def _sim_spec_from_args(args) -> simulate.SimSpec:
    if args.lam is not None:
        model = ExpParams(args.lam)
    elif args.gamma_alpha is not None or args.gamma_beta is not None:
        model = RegressionParams(
            args.alpha, args.beta, args.gamma_alpha or 0.0, args.gamma_beta or 0.0
        )
    else:
        model = GPaParams(args.alpha, args.beta)
    return simulate.SimSpec(
        model=model,
        n=args.n,
        censoring=args.censoring,
        horizon=args.horizon,
        fraction=args.fraction,
        seed=args.seed,
    )


def cmd_simulate(args) -> int:
    from .catalog import serialize_catalog

    spec = _sim_spec_from_args(args)
    cat = simulate.generate(spec)
    _atomic_write(os.path.join(args.out, "catalog.csv"), serialize_catalog(cat))
    return EXIT_OK


def cmd_recovery(args) -> int:
    spec = _sim_spec_from_args(args)
    report = simulate.recovery_study(spec, args.reps)
    _write_json(os.path.join(args.out, "recovery.json"), report.to_dict())
    return EXIT_OK


def cmd_empirical(args) -> int:
    """Emit plain-CSV plotting data: per-class empirical exceedance
    fractions, fitted model curves, and median-shift segments for
    ongoing records."""
    cat = _load_catalog(args.catalog, days=args.days)
    doc = _load_fit_json(args.fit) if args.fit else None

    lines = ["class,duration,fraction_exceeding"]
    groups = {"all": list(cat.records)}
    for cls in CompositionClass:
        groups[cls.value] = [r for r in cat.records if r.composition_class is cls]
    for label, records in groups.items():
        durations = sorted(r.duration for r in records)
        n = len(durations)
        for i, d in enumerate(durations):
            lines.append(f"{label},{d},{(n - i) / n}")
    _atomic_write(os.path.join(args.out, "empirical.csv"), "\n".join(lines) + "\n")

    if doc is not None:
        est = doc.get("estimates", {})
        kind = doc.get("model_kind")
        curve_lines = ["t,survival"]
        seg_lines = ["volcano,class,age_s,median_shift"]
        t_grid = np.logspace(-3, math_log10_max(cat), 200)

        def params_for(record):
            if kind == "regression":
                if record.silica_pct is None:
                    raise DataError(
                        f"record {record.volcano_name!r} lacks silica for "
                        "regression median shift"
                    )
                return RegressionParams(
                    est["alpha"], est["beta"], est["gamma_alpha"], est["gamma_beta"]
                ).at_silica(record.silica_pct)
            return GPaParams(est["alpha"], est["beta"])

        base = GPaParams(est["alpha"], est["beta"]) if kind != "exponential" else None
        if base is not None:
            for t, p in zip(t_grid, survival(base, t_grid)):
                curve_lines.append(f"{t},{p}")
            for r in cat.records:
                if r.censored:
                    p = params_for(r)
                    shift = forecast.plugin_median_shift(p, r.duration)
                    seg_lines.append(
                        f"{r.volcano_name},{r.composition_class.value},"
                        f"{r.duration},{shift}"
                    )
        _atomic_write(
            os.path.join(args.out, "model_curve.csv"), "\n".join(curve_lines) + "\n"
        )
        _atomic_write(
            os.path.join(args.out, "segments.csv"), "\n".join(seg_lines) + "\n"
        )

    summary = summarize(cat)
    _write_json(
        os.path.join(args.out, "summary.json"),
        {
            "total": summary.total,
            "completed": summary.completed,
            "ongoing": summary.ongoing,
            "by_class": summary.by_class,
        },
    )
    return EXIT_OK


def math_log10_max(cat: Catalog) -> float:
    import math

    return math.log10(max(r.duration for r in cat.records) * 2)


def build_parser() -> _Parser:
    parser = _Parser(prog="domecast", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", default=".", help="output directory (default: .)")

    p_fit = sub.add_parser("fit", help="maximum-likelihood fit")
    p_fit.add_argument("catalog")
    p_fit.add_argument(
        "--model",
        choices=["aggregate", "grouped", "regression"],
        default="aggregate",
    )
    p_fit.add_argument(
        "--class",
        dest="comp_class",
        choices=[c.value for c in CompositionClass],
        help="composition class for the grouped model",
    )
    p_fit.add_argument("--family", choices=["gpa", "exponential"], default="gpa")
    p_fit.add_argument(
        "--completed-only", action="store_true", help="drop ongoing records first"
    )
    p_fit.add_argument(
        "--days",
        action="store_true",
        help=f"catalog durations are days; divide by {DAYS_PER_YEAR}",
    )
    add_out(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_gof = sub.add_parser("gof", help="chi-square goodness-of-fit test")
    p_gof.add_argument("catalog")
    p_gof.add_argument("--fit", required=True, help="FitResult JSON")
    p_gof.add_argument("--bins", type=int, default=gof.DEFAULT_BINS)
    p_gof.add_argument("--silica", type=float, help="pin a regression fit")
    add_out(p_gof)
    p_gof.set_defaults(func=cmd_gof)

    p_post = sub.add_parser("posterior", help="Metropolis-Hastings posterior chain")
    p_post.add_argument("catalog")
    p_post.add_argument(
        "--model", choices=["aggregate", "regression"], default="aggregate"
    )
    p_post.add_argument("--burn-in", type=int, default=10_000)
    p_post.add_argument("--iters", type=int, default=1_000_000)
    p_post.add_argument("--thin", type=int, default=1_000)
    p_post.add_argument("--seed", type=int, default=0)
    add_out(p_post)
    p_post.set_defaults(func=cmd_posterior)

    p_fc = sub.add_parser("forecast", help="remaining-duration forecast")
    src = p_fc.add_mutually_exclusive_group(required=True)
    src.add_argument("--chain", help="posterior chain CSV (Bayes mode)")
    src.add_argument("--fit", help="FitResult JSON (plug-in mode)")
    p_fc.add_argument("--chain-meta", help="chain provenance JSON sidecar")
    p_fc.add_argument("--age", type=float, required=True, help="eruption age s")
    p_fc.add_argument(
        "--days", action="store_true", help="--age is in days, not years"
    )
    p_fc.add_argument("--silica", type=float)
    p_fc.add_argument("--grid", help="time grid LO:HI:N (years)")
    p_fc.add_argument("--quartiles", action="store_true")
    p_fc.add_argument(
        "--per-draw",
        action="store_true",
        help="average per-draw quantiles instead of inverting the mean curve",
    )
    add_out(p_fc)
    p_fc.set_defaults(func=cmd_forecast)

    def add_sim_model(p):
        p.add_argument("--alpha", type=float, default=1.0)
        p.add_argument("--beta", type=float, default=1.0)
        p.add_argument("--lambda", dest="lam", type=float, help="exponential rate")
        p.add_argument("--gamma-alpha", type=float)
        p.add_argument("--gamma-beta", type=float)
        p.add_argument("--n", type=int, required=True)
        p.add_argument(
            "--censoring",
            choices=["none", "fixed_horizon", "random_fraction"],
            default="none",
        )
        p.add_argument("--horizon", type=float)
        p.add_argument("--fraction", type=float)
        p.add_argument("--seed", type=int, default=0)

    p_sim = sub.add_parser("simulate", help="generate a synthetic catalog")
    add_sim_model(p_sim)
    add_out(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser("recovery", help="estimator recovery study")
    add_sim_model(p_rec)
    p_rec.add_argument("--reps", type=int, required=True)
    add_out(p_rec)
    p_rec.set_defaults(func=cmd_recovery)

    p_emp = sub.add_parser(
        "empirical", help="empirical exceedance data for external plotting"
    )
    p_emp.add_argument("catalog")
    p_emp.add_argument("--fit", help="FitResult JSON for model curves/segments")
    p_emp.add_argument("--days", action="store_true")
    add_out(p_emp)
    p_emp.set_defaults(func=cmd_empirical)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        os.makedirs(args.out, exist_ok=True)
        return args.func(args)
    except (CatalogError, DataError, bayes.ImproperPosteriorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (
        fit.FitError,
        fit.HessianError,
        forecast.BracketError,
        bayes.McmcError,
        FloatingPointError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
