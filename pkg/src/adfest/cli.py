"""Command-line interface.

Subcommands: ``simulate``, ``estimate``, ``evaluate``, ``diagnose`` and
``return-curve``. Settings come from built-in defaults, then an optional JSON
config file (``--config``), then command-line flags. Every run writes a
``run_<command>.json`` sidecar holding the resolved configuration and the list
of files written.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 numerical failure.
"""

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

from adfest import __version__
from adfest.adf import AdfCurve
from adfest.copulas import sample_copula
from adfest.dataio import read_paired, write_xy
from adfest.diagnostics import chi_eta, global_qq, local_qq
from adfest.estimators import ESTIMATORS, QuantilePairGrid, make_estimator
from adfest.evalharness import parse_copula, run_study, write_reports
from adfest.exceptions import ConvergenceError, DataError, StudyError
from adfest.margins import SemiParametricMargins
from adfest.minproj import DEFAULT_N_RAYS, MinProjectionTable, angular_grid
from adfest.returncurve import (curve_diagnostic, curve_to_original, estimate_curve,
                                probability_from_period)

OUTPUT_ENV = "ADFEST_OUTPUT_DIR"
DIAGNOSTIC_RAYS = [0.1, 0.3, 0.5, 0.7, 0.9]

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _estimation_defaults():
    return {"q": 0.90, "k": 7, "n_rays": DEFAULT_N_RAYS, "q_cond": 0.90,
            "pairs": QuantilePairGrid.default().to_list(), "fit_stride_cl": 1,
            "fit_stride_pr": 20}


DEFAULTS = {
    "simulate": {"copula": None, "n": 10_000, "seed": 0},
    "estimate": dict(_estimation_defaults(), input=None, columns=None, estimators=["cl2"],
                     q_u=0.95),
    "evaluate": dict(_estimation_defaults(), estimators=list(ESTIMATORS),
                     copulas=list(range(1, 10)), n=10_000, n_rep=100, seed=0, n_jobs=1),
    "diagnose": {"input": None, "columns": None, "curve": None, "q": 0.90, "q_u": 0.95,
                 "rays": DIAGNOSTIC_RAYS, "seed": 0, "seeds": None, "n_boot": 500,
                 "block_size": 40},
    "return-curve": {"input": None, "columns": None, "curve": None, "p": None,
                     "period_years": None, "obs_per_year": None, "q": 0.90, "q_u": 0.95,
                     "n_angles": 150, "n_boot": 500, "block_size": 40, "seed": 0},
}


def _csv_list(kind):
    def parse(text):
        try:
            return [kind(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}") from None
    return parse


def build_parser():
    parser = argparse.ArgumentParser(prog="adfest", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"adfest {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file of settings; flags take precedence")
        p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./adfest-out)")

    def data_args(p):
        p.add_argument("--input", action="append",
                       help="CSV with x,y (exponential) or date plus value columns; "
                            "repeat to inner-join two dated files; '@case-study' "
                            "selects the shipped synthetic river flows")
        p.add_argument("--columns", type=_csv_list(str), help="two value column names")
        p.add_argument("--q-u", dest="q_u", type=float, help="marginal GPD threshold level")

    def fit_args(p):
        p.add_argument("--q", type=float, help="min-projection threshold level")
        p.add_argument("--k", type=int, help="Bernstein polynomial degree")
        p.add_argument("--n-rays", dest="n_rays", type=int, help="angular grid size (odd)")
        p.add_argument("--q-cond", dest="q_cond", type=float,
                       help="conditional extremes threshold level")

    p = sub.add_parser("simulate", help="simulate a copula sample on exponential margins")
    common(p)
    p.add_argument("--copula", help='study index 1-9 or JSON such as {"family":"gaussian","rho":0.6}')
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("estimate", help="estimate ADFs from paired data")
    common(p)
    data_args(p)
    fit_args(p)
    p.add_argument("--estimators", type=_csv_list(str), help=f"subset of {','.join(ESTIMATORS)}")

    p = sub.add_parser("evaluate", help="Monte-Carlo study over estimators and copulas")
    common(p)
    fit_args(p)
    p.add_argument("--estimators", type=_csv_list(str))
    p.add_argument("--copulas", type=_csv_list(int), help="study copula indices, e.g. 2,6,8")
    p.add_argument("--n", type=int, help="sample size")
    p.add_argument("--n-rep", dest="n_rep", type=int, help="number of replications")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-jobs", dest="n_jobs", type=int)

    p = sub.add_parser("diagnose", help="local and global QQ diagnostics for a fitted ADF")
    common(p)
    data_args(p)
    p.add_argument("--curve", help="ADF JSON written by 'estimate'")
    p.add_argument("--q", type=float)
    p.add_argument("--rays", type=_csv_list(float))
    p.add_argument("--seed", type=int)
    p.add_argument("--seeds", type=_csv_list(int), help="global QQ seeds (default seed..seed+2)")
    p.add_argument("--n-boot", dest="n_boot", type=int)
    p.add_argument("--block-size", dest="block_size", type=int)

    p = sub.add_parser("return-curve", help="return curve and its survival diagnostic")
    common(p)
    data_args(p)
    p.add_argument("--curve", help="ADF JSON written by 'estimate'")
    p.add_argument("--p", type=float, help="joint exceedance probability")
    p.add_argument("--period-years", dest="period_years", type=float,
                   help="return period in years; p = 1 / (years * observations per year)")
    p.add_argument("--obs-per-year", dest="obs_per_year", type=float,
                   help="observations per year for undated input")
    p.add_argument("--q", type=float)
    p.add_argument("--n-angles", dest="n_angles", type=int)
    p.add_argument("--n-boot", dest="n_boot", type=int)
    p.add_argument("--block-size", dest="block_size", type=int)
    p.add_argument("--seed", type=int)
    return parser


def resolve_config(args):
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    config = json.loads(json.dumps(DEFAULTS[args.command]))
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except FileNotFoundError:
            raise UsageError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from None
        unknown = set(loaded) - set(config) - {"out"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        config.update(loaded)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        config[key] = value
    config["out"] = config.get("out") or os.environ.get(OUTPUT_ENV) or "adfest-out"
    return config


class RunWriter:
    """Writes outputs into the run directory and records them for the sidecar."""

    def __init__(self, command, config):
        self.command = command
        self.config = config
        self.dir = Path(config["out"])
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files = []
        self.summary = {}

    def path(self, name):
        self.files.append(name)
        return self.dir / name

    def json(self, name, payload):
        self.path(name).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")

    def finish(self):
        sidecar = {"command": self.command, "version": __version__, "config": self.config,
                   "outputs": sorted(self.files), "summary": self.summary}
        (self.dir / f"run_{self.command}.json").write_text(
            json.dumps(sidecar, indent=1, sort_keys=True) + "\n")


def _require(config, key):
    if config.get(key) in (None, [], ""):
        raise UsageError(f"missing required setting {key!r}")
    return config[key]


def _estimator_params(name, config):
    params = {"q": config["q"], "n_rays": config["n_rays"], "q_cond": config["q_cond"]}
    base = name.rstrip("2")
    if base in ("cl", "pr"):
        params["k"] = config["k"]
        params["fit_stride"] = config[f"fit_stride_{base}"]
    if base == "pr":
        params["pairs"] = [tuple(p) for p in config["pairs"]]
    return params


def _check_estimators(names):
    bad = [e for e in names if e not in ESTIMATORS]
    if bad:
        raise UsageError(f"unknown estimator(s) {', '.join(bad)}; choose from {', '.join(ESTIMATORS)}")
    return names


def _load_exponential(config, run):
    """Read input data; fit margins when it is on the original scale."""
    data = read_paired(_require(config, "input"), config.get("columns"))
    run.summary["data"] = data.describe()
    if data.margin_tag == "exponential":
        return data, data.values, None
    margins = SemiParametricMargins(q_u=config["q_u"]).fit(data.values)
    return data, margins.transform(data.values), margins


def _load_curve(config):
    path = Path(_require(config, "curve"))
    if not path.is_file():
        raise DataError(f"curve file not found: {path}")
    try:
        return AdfCurve.from_json(path)
    except (ValueError, KeyError) as exc:
        raise DataError(f"cannot read curve file {path}: {exc}") from None


def cmd_simulate(config):
    run = RunWriter("simulate", config)
    try:
        spec = parse_copula(_require(config, "copula"))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid copula: {exc}") from None
    X = sample_copula(spec, config["n"], seed=config["seed"])
    write_xy(run.path("sample.csv"), X)
    run.summary["copula"] = spec.to_dict()
    run.finish()


def cmd_estimate(config):
    names = _check_estimators(list(config["estimators"]))
    run = RunWriter("estimate", config)
    data, X, margins = _load_exponential(config, run)
    if margins is not None:
        run.json("margins.json", {name: m.to_dict() for name, m in zip(data.names, margins.models_)})
    table = MinProjectionTable(X, angular_grid(config["n_rays"]))
    for name in names:
        est = make_estimator(name, **_estimator_params(name, config)).fit_table(table)
        curve = est.curve_.with_values(est.curve_.values, params=dict(
            est.curve_.params, margins=data.margin_tag, columns=list(data.names)))
        curve.to_csv(run.path(f"adf_{name}.csv"))
        curve.to_json(run.path(f"adf_{name}.json"))
        run.summary[name] = {"lambda_0.5": float(curve(0.5)),
                             "cond_fit": est.cond_fit_.to_dict() if est.cond_fit_ else None}
    run.finish()


def cmd_evaluate(config):
    names = _check_estimators(list(config["estimators"]))
    if config["n_rep"] < 2:
        raise UsageError("n_rep must be at least 2 for a Monte-Carlo error")
    run = RunWriter("evaluate", config)
    params = {name: {k: v for k, v in _estimator_params(name, config).items() if k != "n_rays"}
              for name in names}
    rows = []
    for c in config["copulas"]:
        try:
            spec = parse_copula(c)
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"invalid copula {c!r}: {exc}") from None
        reports = run_study(names, spec, n=config["n"], n_rep=config["n_rep"],
                            seed=config["seed"], n_rays=config["n_rays"],
                            estimator_params=params, n_jobs=config["n_jobs"])
        rows += [(str(c), reports[name]) for name in names]
    write_reports(rows, run.path("table.csv"), run.path("report.json"), config)
    run.finish()


def cmd_diagnose(config):
    run = RunWriter("diagnose", config)
    curve = _load_curve(config)
    _, X, _ = _load_exponential(config, run)
    seeds = config["seeds"] or [config["seed"] + i for i in range(3)]
    if len(seeds) < 3:
        raise UsageError("the global diagnostic needs at least three seeds")
    common = {"n_boot": config["n_boot"], "block_size": config["block_size"]}
    inside = {}
    for i, w in enumerate(config["rays"]):
        report = local_qq(X, curve, w, q=config["q"], seed=[config["seed"], i], **common)
        stem = f"qq_local_w{w:.3f}"
        report.to_csv(run.path(stem + ".csv"))
        report.to_json(run.path(stem + ".json"))
        inside[stem] = report.fraction_inside
    table = MinProjectionTable(X, curve.grid)
    for s in seeds:
        report = global_qq(X, curve, q=config["q"], seed=s, table=table, **common)
        stem = f"qq_global_seed{s}"
        report.to_csv(run.path(stem + ".csv"))
        report.to_json(run.path(stem + ".json"))
        inside[stem] = report.fraction_inside
    ce = chi_eta(X, q=config["q"], seed=config["seed"], **{"n_boot": config["n_boot"],
                                                             "block_size": config["block_size"]})
    run.json("chi_eta.json", ce.to_dict())
    run.summary["fraction_inside"] = inside
    run.finish()


def cmd_return_curve(config):
    run = RunWriter("return-curve", config)
    curve = _load_curve(config)
    data, X, margins = _load_exponential(config, run)
    p = config["p"]
    if p is None:
        years = _require(config, "period_years")
        if data.dates is not None:
            p = probability_from_period(years, X.shape[0], data.n_years)
        else:
            per_year = _require(config, "obs_per_year")
            p = 1.0 / (years * per_year)
    rc = estimate_curve(X, curve, p, q=config["q"])
    rc.to_csv(run.path("return_curve_exponential.csv"))
    rc.to_json(run.path("return_curve_exponential.json"))
    tag = "exponential"
    if margins is not None:
        orig = curve_to_original(rc, *margins.models_)
        orig.to_csv(run.path("return_curve_original.csv"))
        orig.to_json(run.path("return_curve_original.json"))
        tag = "original"
    diag = curve_diagnostic(X, rc, p, n_angles=config["n_angles"], n_boot=config["n_boot"],
                            block_size=config["block_size"], seed=config["seed"])
    diag.to_csv(run.path("return_curve_diagnostic.csv"))
    run.summary.update(p=p, curve_tag=tag, fraction_covered=diag.fraction_covered)
    run.finish()


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "evaluate": cmd_evaluate,
            "diagnose": cmd_diagnose, "return-curve": cmd_return_curve}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            COMMANDS[args.command](config)
    except UsageError as exc:
        print(f"adfest {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"adfest {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, StudyError, FloatingPointError) as exc:
        print(f"adfest {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"adfest {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
