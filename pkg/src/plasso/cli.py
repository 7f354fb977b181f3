"""Command-line interface: simulate, fit, cv, eval and replicate subcommands."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .bayes_glm import McmcConfig
from .families import FamilySpec, binomial, gaussian, poisson
from .selection import PriorConfig, fit_method, kfold_cv, pps_without_constant, pps
from .experiments import SimScenario, load_csv, run_replications, simulate_dataset
from .solver import FitResult


def _family(name: str, sigma2: float = 1.0) -> FamilySpec:
    if name == "gaussian":
        return gaussian(sigma2)
    if name == "binomial":
        return binomial()
    if name == "poisson":
        return poisson()
    raise SystemExit(f"unknown family {name!r}")


def _json_dump(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _dataset_to_csv(dataset, path):
    cols = {"y": dataset.y}
    for j in range(1, dataset.X.shape[1]):
        cols[f"x{j}"] = dataset.X[:, j]
    pd.DataFrame(cols).to_csv(path, index=False, float_format="%.12g")


def cmd_simulate(args):
    scenario = SimScenario(
        design=args.design, n_train=args.n_train, n_predict=args.n_predict,
        sigma=args.sigma, seed=args.seed,
    )
    train, predict = simulate_dataset(scenario, args.replication)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _dataset_to_csv(train, outdir / "train.csv")
    _dataset_to_csv(predict, outdir / "predict.csv")
    print(f"wrote {outdir / 'train.csv'} ({train.n} rows) and "
          f"{outdir / 'predict.csv'} ({predict.n} rows)")


def _prior_config(args) -> PriorConfig:
    mcmc = McmcConfig(
        n_draws=args.mcmc_draws, burn_in=args.mcmc_burn_in,
        step_scale=args.mcmc_step, seed=args.seed,
    )
    return PriorConfig(
        kind=args.prior, gprior_c=args.gprior_c,
        use_plugin=not args.mcmc, mcmc=mcmc,
    )


def _fit_to_dict(fit: FitResult, family: str, response: str):
    return {
        "beta": [float(b) for b in fit.beta],
        "active_set": list(fit.active_set),
        "lambda": fit.lam,
        "method": fit.method,
        "sigma2_hat": fit.sigma2_hat,
        "family": family,
        "response_column": response,
        "pilot_ridge": fit.pilot_ridge,
    }


def cmd_fit(args):
    dataset = load_csv(args.data, args.response, _family(args.family))
    config = _prior_config(args)
    fit = fit_method(
        dataset, args.method, lam=args.lam, config=config,
        k=args.k, seed=args.seed, n_lambda=args.n_lambda,
    )
    out = _fit_to_dict(fit, args.family, args.response)
    if args.out:
        _json_dump(out, args.out)
    print(json.dumps(out, sort_keys=True))


def cmd_cv(args):
    dataset = load_csv(args.data, args.response, _family(args.family))
    config = _prior_config(args)
    cv = kfold_cv(dataset, args.method, config, k=args.k, seed=args.seed,
                  n_lambda=args.n_lambda)
    out = {
        "lambda_grid": [float(v) for v in cv.lambda_grid],
        "cv_scores": [float(v) for v in cv.cv_scores],
        "lambda_star": cv.lambda_star,
        "fold_assignments": [int(v) for v in cv.fold_assignments],
        "method": args.method,
    }
    if args.out:
        _json_dump(out, args.out)
    print(f"lambda_star = {cv.lambda_star:.6g}")


def cmd_eval(args):
    spec = json.loads(Path(args.fit).read_text())
    family = _family(spec["family"])
    dataset = load_csv(args.data, spec["response_column"], family)
    fit = FitResult(
        beta=np.array(spec["beta"]), active_set=spec["active_set"],
        lam=spec["lambda"], method=spec["method"], sigma2_hat=spec["sigma2_hat"],
    )
    value = pps(fit, dataset)
    out = {
        "pps": value,
        "pps_without_constant": pps_without_constant(value, family),
        "n_prediction": dataset.n,
    }
    if args.out:
        _json_dump(out, args.out)
    print(f"PPS = {value:.6f} (without constant {out['pps_without_constant']:.6f})")


def _load_replicate_config(args):
    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
    sc = dict(cfg.get("scenario", {}))
    for key, flag in (
        ("design", args.design), ("n_train", args.n_train),
        ("n_predict", args.n_predict), ("sigma", args.sigma),
        ("n_replications", args.replications), ("seed", args.seed),
    ):
        if flag is not None:
            sc[key] = flag
    scenario = SimScenario(**sc)
    methods = args.methods.split(",") if args.methods else cfg.get(
        "methods", ["alasso", "plasso", "wplasso"]
    )
    prior_cfg = dict(cfg.get("prior", {}))
    if args.prior:
        prior_cfg["kind"] = args.prior
    mcmc_cfg = dict(cfg.get("mcmc", {}))
    config = PriorConfig(
        kind=prior_cfg.get("kind", "raftery"),
        gprior_c=prior_cfg.get("gprior_c"),
        use_plugin=prior_cfg.get("use_plugin", True),
        mcmc=McmcConfig(**mcmc_cfg) if mcmc_cfg else McmcConfig(),
    )
    k = args.k if args.k is not None else cfg.get("k", 5)
    n_lambda = args.n_lambda if args.n_lambda is not None else cfg.get("n_lambda", 50)
    return scenario, methods, config, k, n_lambda


def cmd_replicate(args):
    scenario, methods, config, k, n_lambda = _load_replicate_config(args)
    summaries, records = run_replications(
        scenario, methods, config, k=k, n_lambda=n_lambda, collect_records=True
    )
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    # Table-style CSV: one PPS row and one zero-count row, methods as columns
    by_method = {s.method: s for s in summaries}
    lines = ["row," + ",".join(methods)]
    lines.append("pps," + ",".join(f"{by_method[m].mean_pps_reduced:.6f}" for m in methods))
    lines.append("zero_count," + ",".join(f"{by_method[m].mean_zero_count:.6f}" for m in methods))
    (outdir / "summary.csv").write_text("\n".join(lines) + "\n")

    _json_dump(
        {
            "scenario": dataclasses.asdict(scenario),
            "summaries": [dataclasses.asdict(s) for s in summaries],
            "replications": [dataclasses.asdict(r) for r in records],
        },
        outdir / "summary.json",
    )
    for s in summaries:
        print(
            f"{s.method}: PPS {s.mean_pps_reduced:.4f} ({s.sd_pps:.4f}), "
            f"zeros {s.mean_zero_count:.3f} ({s.sd_zero_count:.3f}), "
            f"reps {s.n_replications}, failed {s.n_failed}"
        )


def _add_common(parser):
    parser.add_argument("--data", required=True, help="CSV file with a header row")
    parser.add_argument("--response", required=True, help="response column name")
    parser.add_argument("--family", default="gaussian",
                        choices=["gaussian", "binomial", "poisson"])
    parser.add_argument("--method", default="plasso",
                        choices=["alasso", "plasso", "wplasso"])
    parser.add_argument("--prior", default="raftery",
                        choices=["raftery", "gprior", "gelman", "chen_ibrahim"])
    parser.add_argument("--gprior-c", type=float, default=None)
    parser.add_argument("--mcmc", action="store_true",
                        help="use MCMC instead of the plug-in for GLM targets")
    parser.add_argument("--mcmc-draws", type=int, default=10_000)
    parser.add_argument("--mcmc-burn-in", type=int, default=1_000)
    parser.add_argument("--mcmc-step", type=float, default=0.5)
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-lambda", type=int, default=50)
    parser.add_argument("--out", default=None, help="write result JSON here")


def build_parser():
    parser = argparse.ArgumentParser(prog="plasso", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write one replication's datasets to disk")
    p.add_argument("--design", default="normal_ar",
                   choices=["normal_ar", "student_t", "large_p"])
    p.add_argument("--n-train", type=int, default=200)
    p.add_argument("--n-predict", type=int, default=200)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replication", type=int, default=0)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit one method at a fixed or CV-selected lambda")
    _add_common(p)
    p.add_argument("--lam", type=float, default=None,
                   help="fixed lambda; omit to select by CV")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("cv", help="cross-validated lambda selection")
    _add_common(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("eval", help="partial predictive score of a saved fit")
    p.add_argument("--fit", required=True, help="fit JSON from the fit subcommand")
    p.add_argument("--data", required=True, help="prediction-set CSV")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("replicate", help="replication study producing summary tables")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--design", default=None,
                   choices=["normal_ar", "student_t", "large_p"])
    p.add_argument("--n-train", type=int, default=None)
    p.add_argument("--n-predict", type=int, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--methods", default=None, help="comma-separated method list")
    p.add_argument("--prior", default=None,
                   choices=["raftery", "gprior", "gelman", "chen_ibrahim"])
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--n-lambda", type=int, default=None)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_replicate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    sys.exit(main())
