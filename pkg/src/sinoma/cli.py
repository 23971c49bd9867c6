"""Command-line front end.

Subcommands: ``generate`` (synthetic datasets from recipe files), ``fit``
(closed-form and noise-matching slope estimates), ``diagnose``
(explanatory-power curves over the slope bracket), ``recover`` (noise
variances and noiseless standard deviations, replicate table).

Exit codes: 0 success, 1 usage error, 2 data or precondition error,
3 non-convergence (the report is still written).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, io, streams
from .errors import MissingLambda, SinomaError, TooFewFluctuations
from .noise_matching import (
    ReplicateSummary,
    SinomaConfig,
    q_ep,
    run_replicates,
    whiteness_hazard,
)
from .regression import fit_evm, fit_inv, fit_ols, fit_rma, sign_normalize
from .series import PairedSeries, Series
from .synth import contaminate, gen_sine, gen_surrogate_climate

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NO_CONVERGENCE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sinoma", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="materialize a synthetic dataset from a recipe")
    gen.add_argument("recipe", help="flat key-value recipe file (YAML mapping)")
    gen.add_argument("out", help="output CSV path (index,x,y)")
    gen.add_argument("--no-plot", action="store_true", help="skip the preview figure")

    def matching_flags(p):
        p.add_argument("--seed", type=int, default=0, help="replicate stream seed (default 0)")
        p.add_argument("--iterations", type=int, default=50, help="matching iterations (default 50)")
        p.add_argument("--replicates", type=int, default=10, help="independent runs (default 10)")
        p.add_argument("--q-tol", type=float, default=0.01, help="|q - 1| stop tolerance (default 0.01)")
        p.add_argument("--slope-tol", type=float, default=0.01,
                       help="slope-vs-rma stop tolerance (default 0.01)")
        p.add_argument("--grid-points", type=int, default=21, help="slope grid size (default 21)")
        p.add_argument("--ep-mode", choices=["endpoints", "grid-max"], default="endpoints",
                       help="endpoint evaluation or curve maxima (default endpoints)")
        p.add_argument("--threads", type=int, default=1, help="replicate parallelism (default 1)")

    fit = sub.add_parser("fit", help="estimate slope/intercept from a paired CSV")
    fit.add_argument("input", help="paired-series CSV")
    fit.add_argument("--method", choices=["ols", "inv", "rma", "evm", "sinoma"], required=True)
    fit.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="noise-variance ratio (required for --method evm)")
    matching_flags(fit)
    fit.add_argument("--json", dest="json_out", default=None, help="write the JSON run report here")
    fit.add_argument("--no-plot", action="store_true", help="skip the trace figure")

    diag = sub.add_parser("diagnose", help="explanatory-power curves over the slope bracket")
    diag.add_argument("input", help="paired-series CSV")
    diag.add_argument("--out", required=True, help="curve CSV path")
    diag.add_argument("--grid-points", type=int, default=21)
    diag.add_argument("--no-plot", action="store_true", help="skip the curve figure")

    rec = sub.add_parser("recover", help="noise variances and noiseless sds (replicate table)")
    rec.add_argument("input", help="paired-series CSV")
    matching_flags(rec)
    rec.add_argument("--json", dest="json_out", default=None, help="write the JSON run report here")
    rec.add_argument("--no-plot", action="store_true", help="skip the trace figure")

    return parser


def _figure_path(out: str, suffix: str = ".png") -> Path:
    p = Path(out)
    return p.with_name(p.stem + suffix)


def _estimate_dict(est) -> dict:
    return {
        "slope": est.slope,
        "intercept": est.intercept,
        "method": est.method,
        "lambda_assumed": est.lambda_assumed,
    }


def _closed_form_table(pair: PairedSeries) -> tuple[dict, list[str]]:
    """ols/rma/inv estimates in the original frame, with sign handling."""
    warnings = []
    oriented, sign = sign_normalize(pair)
    if sign < 0:
        warnings.append("negative covariance: slopes reported with flipped sign")
    table = {
        "ols": _estimate_dict(fit_ols(oriented).with_sign(sign)),
        "rma": _estimate_dict(fit_rma(oriented).with_sign(sign)),
        "inv": _estimate_dict(fit_inv(oriented).with_sign(sign)),
    }
    return table, warnings


def _config_echo(args, extra: dict | None = None) -> dict:
    echo = {
        "command": args.command,
        "generator": streams.GENERATOR_NAME,
    }
    for key in ("seed", "iterations", "replicates", "q_tol", "slope_tol",
                "grid_points", "ep_mode", "threads", "method", "lam"):
        if hasattr(args, key):
            echo[key] = getattr(args, key)
    if extra:
        echo.update(extra)
    return echo


def _sinoma_config(args) -> SinomaConfig:
    return SinomaConfig(
        seed=args.seed,
        max_iterations=args.iterations,
        q_tolerance=args.q_tol,
        slope_tolerance=args.slope_tol,
        replicates=args.replicates,
        ep_eval_mode=args.ep_mode.replace("-", "_"),
        grid_points=args.grid_points,
    )


def _summary_dict(summary: ReplicateSummary) -> dict:
    return {
        "slope_mean": summary.slope_mean,
        "slope_sd": summary.slope_sd,
        "lambda_evm_mean": summary.lambda_evm_mean,
        "lambda_evm_sd": summary.lambda_evm_sd,
        "s2_epsilon_mean": summary.s2_epsilon_mean,
        "s2_delta_mean": summary.s2_delta_mean,
        "sd_x_noiseless_mean": summary.sd_x_noiseless_mean,
        "sd_y_noiseless_mean": summary.sd_y_noiseless_mean,
        "converged": summary.converged_count,
        "replicates": summary.replicates,
    }


def _cmd_generate(args) -> int:
    recipe = io.load_recipe(args.recipe)
    if recipe.signal_kind == "sine":
        x, y = gen_sine(recipe.n, recipe.true_slope, recipe.true_intercept)
    elif recipe.signal_kind == "surrogate_ar":
        signal = gen_surrogate_climate(recipe.n, recipe.ar_coefficient, recipe.seed)
        x = signal
        y = Series(recipe.true_slope * signal.values + recipe.true_intercept)
    elif recipe.signal_kind == "external":
        if recipe.signal_path is None:
            raise SinomaError("external recipes need signal_path")
        x = io.read_signal_csv(recipe.signal_path)
        y = Series(recipe.true_slope * x.values + recipe.true_intercept)
    else:
        raise SinomaError(f"unknown signal_kind {recipe.signal_kind!r}")
    pair = contaminate(x, y, recipe.noise, recipe.seed)
    io.write_pair_csv(args.out, pair.x, pair.y)

    # Realized noise/signal correlations in the warning band are reported,
    # not rejected: they mimic realistic measurement conditions.
    eps = pair.x.values - x.values
    dlt = pair.y.values - y.values
    for name, a, b in (("eps,delta", eps, dlt), ("eps,x", eps, x.values), ("delta,y", dlt, y.values)):
        if np.std(a) > 0 and np.std(b) > 0:
            cov = float(np.mean((a - a.mean()) * (b - b.mean())))
            if 0.001 <= abs(cov) <= 0.1:
                print(f"warning: realized cov({name}) = {cov:.4f}", file=sys.stderr)

    if not args.no_plot:
        from . import plots

        plots.render_pair(_figure_path(args.out), pair)
    print(f"wrote {args.out} ({pair.n} rows)")
    return EXIT_OK


def _cmd_fit(args) -> int:
    if args.method == "evm" and args.lam is None:
        raise MissingLambda("--method evm requires --lambda")
    pair = io.read_pair_csv(args.input)
    report: dict = {
        "config": _config_echo(args),
        "input": io.file_fingerprint(args.input),
    }
    table, warnings = _closed_form_table(pair)
    report["estimates"] = table

    exit_code = EXIT_OK
    if args.method == "evm":
        oriented, sign = sign_normalize(pair)
        report["estimates"]["evm"] = _estimate_dict(fit_evm(oriented, args.lam).with_sign(sign))
    elif args.method == "sinoma":
        config = _sinoma_config(args)
        summary = run_replicates(pair, config, threads=max(1, args.threads))
        report["sinoma"] = {
            "aggregate": _summary_dict(summary),
            "runs": list(summary.results),
        }
        for res in summary.results:
            for w in res.warnings:
                if w not in warnings:
                    warnings.append(w)
        if summary.converged_count < summary.replicates:
            exit_code = EXIT_NO_CONVERGENCE
        if args.json_out and not args.no_plot:
            from . import plots

            plots.render_trace(_figure_path(args.json_out), list(summary.results))
        if args.json_out:
            io.write_trace_csv(_figure_path(args.json_out, ".trace.csv"),
                               summary.results[0].trace)
    report["warnings"] = warnings

    text = io.dump_report(report)
    if args.json_out:
        Path(args.json_out).write_text(text)
    est = report["estimates"].get(args.method)
    if est is not None:
        print(f"{args.method}: slope = {est['slope']!r}, intercept = {est['intercept']!r}")
    else:
        agg = report["sinoma"]["aggregate"]
        print(
            f"sinoma: slope = {agg['slope_mean']!r} (sd {agg['slope_sd']!r}), "
            f"lambda = {agg['lambda_evm_mean']!r}, converged {agg['converged']}/{agg['replicates']}"
        )
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return exit_code


def _cmd_diagnose(args) -> int:
    pair = io.read_pair_csv(args.input)
    oriented, sign = sign_normalize(pair)
    try:
        diag = q_ep(oriented, mode="grid_max", grid_points=args.grid_points)
        endpoint = q_ep(oriented, mode="endpoints")
    except TooFewFluctuations as exc:
        raise TooFewFluctuations(
            f"{exc} (hint: the estimator needs noise-driven local fluctuations; "
            "a smooth or very short series cannot be diagnosed; consider the "
            "fit command with an explicit noise ratio instead)"
        ) from exc
    rows = list(diag.slope_grid or [])
    io.write_ep_curve_csv(args.out, rows)

    from .fluctuations import ep_records, joint_partition, segment
    from .regression import fit_inv as _fi, fit_ols as _fo, predict

    p_obs = segment(oriented.y)
    for tag, est in (("ols", _fo(oriented)), ("inv", _fi(oriented))):
        recs = ep_records(joint_partition(p_obs, segment(predict(oriented.x, est))))
        io.write_ep_records_csv(_figure_path(args.out, f".intervals_{tag}.csv"), recs)

    summary = {
        "config": {"command": "diagnose", "grid_points": args.grid_points, "sign": sign},
        "input": io.file_fingerprint(args.input),
        "q_ep": endpoint.q_ep,
        "delta_ep": endpoint.delta_ep,
        "ep_modeled_at_ols": endpoint.ep_modeled_at_ols,
        "ep_observed_at_inv": endpoint.ep_observed_at_inv,
        "q_ep_grid_max": diag.q_ep,
        "whiteness_hazard": whiteness_hazard(oriented),
    }
    _figure_path(args.out, ".summary.json").write_text(io.dump_report(summary))
    if not args.no_plot:
        from . import plots

        plots.render_ep_curves(_figure_path(args.out), rows, endpoint.q_ep, endpoint.delta_ep)
    print(f"q = {endpoint.q_ep!r}, delta = {endpoint.delta_ep!r} (curves in {args.out})")
    return EXIT_OK


def _cmd_recover(args) -> int:
    pair = io.read_pair_csv(args.input)
    config = _sinoma_config(args)
    summary = run_replicates(pair, config, threads=max(1, args.threads))
    report = {
        "config": _config_echo(args),
        "input": io.file_fingerprint(args.input),
        "sinoma": {"aggregate": _summary_dict(summary), "runs": list(summary.results)},
        "warnings": sorted({w for r in summary.results for w in r.warnings}),
    }
    if args.json_out:
        Path(args.json_out).write_text(io.dump_report(report))
        if not args.no_plot:
            from . import plots

            plots.render_trace(_figure_path(args.json_out), list(summary.results))

    def sd(v):
        return float(np.sqrt(v)) if v >= 0 else float("nan")

    print("replicate  slope    sd_eps_art  sd_del_art  lambda   sd_eps   sd_del   sd_x     sd_y")
    for r in summary.results:
        print(
            f"{r.replicate_index:9d}  {r.slope:7.3f}  {sd(r.s2_epsilon_artificial):10.3f}  "
            f"{sd(r.s2_delta_artificial):10.3f}  {r.lambda_evm:7.3f}  {sd(r.s2_epsilon):7.3f}  "
            f"{sd(r.s2_delta):7.3f}  {r.sd_x_noiseless:7.3f}  {r.sd_y_noiseless:7.3f}"
        )
    a = summary
    print(
        f"{'mean':>9}  {a.slope_mean:7.3f}  {'':10}  {'':10}  {a.lambda_evm_mean:7.3f}  "
        f"{sd(a.s2_epsilon_mean):7.3f}  {sd(a.s2_delta_mean):7.3f}  "
        f"{a.sd_x_noiseless_mean:7.3f}  {a.sd_y_noiseless_mean:7.3f}"
    )
    print(f"{'st.dev.':>9}  {a.slope_sd:7.3f}")
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_NO_CONVERGENCE if summary.converged_count < summary.replicates else EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "fit": _cmd_fit,
        "diagnose": _cmd_diagnose,
        "recover": _cmd_recover,
    }
    try:
        return handlers[args.command](args)
    except MissingLambda as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SinomaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
