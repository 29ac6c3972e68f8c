"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 input validation error,
3 numeric/inconclusive result (e.g. a lemma check with too few shell
hits).  Numeric output is in nats unless ``--units bits``; bit conversion
happens only at display time.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .dataio import ingest_csv, write_dataset_csv
from .errors import InconclusiveError, InvalidInputError
from .estimator import (EstimatorConfig, conditional_entropy, label_entropy,
                        mutual_information)
from .harness import (BASELINE_ESTIMATOR, KNN_ESTIMATOR, ExperimentPlan,
                      rank_features, run_convergence)
from .lemma_lab import (median_radius, verify_conditional_law,
                        verify_distance_distribution)
from .models import sample, spec_from_dict, spec_to_dict

_PLAN_SCHEMA = "condent-plan/1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        raise UsageError(message)


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _convert(value: float, units: str) -> float:
    return value / math.log(2.0) if units == "bits" else value


def _add_k_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=None, help="explicit neighbor count")
    p.add_argument("--alpha", type=float, default=None,
                   help="schedule exponent, k = round(c * n^alpha)")
    p.add_argument("--c", type=float, default=None, help="schedule constant")


def _config_from_args(args) -> EstimatorConfig:
    if args.k is not None and (args.alpha is not None or args.c is not None):
        raise UsageError("--k conflicts with --alpha/--c")
    if args.k is not None:
        return EstimatorConfig(k=args.k, clamp_nonnegative=getattr(args, "clamp_nonnegative", False))
    return EstimatorConfig(alpha=args.alpha if args.alpha is not None else 0.5,
                           c=args.c if args.c is not None else 1.0,
                           clamp_nonnegative=getattr(args, "clamp_nonnegative", False))


def _add_common_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--units", choices=("nats", "bits"), default="nats")
    p.add_argument("--output", choices=("text", "json", "csv"), default="text")


def _load_model(path: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InvalidInputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON: {exc}") from None
    return spec_from_dict(doc)


def _parse_point(text: str):
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise UsageError(f"--x must be comma-separated floats, got {text!r}") from None


def _label_mapping(dataset) -> dict:
    names = dataset.label_names or tuple(str(y) for y in range(dataset.m))
    return {name: i for i, name in enumerate(names)}


# ---------------------------------------------------------------------------
# subcommands

def _cmd_estimate(args) -> int:
    config = _config_from_args(args)
    dataset = ingest_csv(args.input, args.label)
    result = conditional_entropy(dataset, config)
    value = _convert(result.reported_value, args.units)
    if result.negative_flag:
        print("warning: raw estimate is negative "
              f"({_fmt(result.value)} nats); H(Y|X) >= 0 in truth", file=sys.stderr)
    if args.output == "json":
        print(json.dumps({
            "schema": "condent-estimate/1", "value": value, "units": args.units,
            "raw_value_nats": result.value, "k_used": result.k_used,
            "tie_events": result.tie_events, "negative_flag": result.negative_flag,
            "clamped": result.clamp_nonnegative, "n": dataset.n, "d": dataset.d,
            "label_mapping": _label_mapping(dataset),
        }))
    elif args.output == "csv":
        print("value,units,k_used,tie_events,negative_flag")
        print(f"{value!r},{args.units},{result.k_used},{result.tie_events},"
              f"{str(result.negative_flag).lower()}")
    else:
        print(f"labels: {_label_mapping(dataset)}", file=sys.stderr)
        print(_fmt(value))
    return 0


def _cmd_mi(args) -> int:
    config = _config_from_args(args)
    dataset = ingest_csv(args.input, args.label)
    mi = mutual_information(dataset, config)
    hy = label_entropy(dataset.labels)
    value = _convert(mi, args.units)
    if args.output == "json":
        print(json.dumps({
            "schema": "condent-mi/1", "value": value, "units": args.units,
            "label_entropy_nats": hy, "label_mapping": _label_mapping(dataset),
        }))
    elif args.output == "csv":
        print("value,units")
        print(f"{value!r},{args.units}")
    else:
        print(f"labels: {_label_mapping(dataset)}", file=sys.stderr)
        print(_fmt(value))
    return 0


def _cmd_generate(args) -> int:
    spec = _load_model(args.model)
    dataset = sample(spec, args.n, args.seed)
    write_dataset_csv(dataset, args.out, label_column=args.label)
    return 0


def _load_plan(args) -> ExperimentPlan:
    try:
        with open(args.plan) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InvalidInputError(f"no such file: {args.plan}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{args.plan}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema") != _PLAN_SCHEMA:
        raise InvalidInputError(f"plan document must declare schema {_PLAN_SCHEMA!r}")
    allowed = {"schema", "model", "n_grid", "replicates", "estimators",
               "k", "alpha", "c"}
    unknown = set(doc) - allowed
    if unknown:
        raise InvalidInputError(f"unknown plan keys: {sorted(unknown)}")
    try:
        spec = spec_from_dict(doc["model"])
        n_grid = tuple(doc["n_grid"])
        replicates = int(doc["replicates"])
    except KeyError as exc:
        raise InvalidInputError(f"missing plan key {exc}") from None
    if doc.get("k") is not None and (doc.get("alpha") is not None or doc.get("c") is not None):
        raise InvalidInputError("plan may give k or a schedule, not both")
    if doc.get("k") is not None:
        config = EstimatorConfig(k=int(doc["k"]))
    else:
        config = EstimatorConfig(alpha=float(doc.get("alpha", 0.5)),
                                 c=float(doc.get("c", 1.0)))
    estimators = tuple(doc.get("estimators", [KNN_ESTIMATOR]))
    return ExperimentPlan(spec=spec, n_grid=n_grid, k_rule=config,
                          replicates=replicates, base_seed=args.seed,
                          estimators=estimators)


def _cmd_convergence(args) -> int:
    plan = _load_plan(args)
    report = run_convergence(plan, workers=args.threads)
    if args.out_json:
        with open(args.out_json, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.out_csv:
        with open(args.out_csv, "w") as fh:
            fh.write(report.to_csv())
    if args.output == "json":
        print(json.dumps(report.to_dict(), sort_keys=True))
    elif args.output == "csv":
        sys.stdout.write(report.to_csv())
    else:
        gt = report.ground_truth
        print(f"ground truth H(Y|X) = {_fmt(gt.value)} nats "
              f"({gt.method}, error bound {gt.error_bound:.2e})")
        print(f"{'n':>7} {'estimator':>21} {'k':>5} {'mean':>12} {'bias':>12} "
              f"{'mse':>12} {'sem':>10}")
        for r in report.rows:
            print(f"{r.n:>7} {r.estimator:>21} {r.k:>5} {_fmt(r.mean):>12} "
                  f"{_fmt(r.bias):>12} {_fmt(r.mse):>12} {_fmt(r.sem):>10}")
    return 0


def _cmd_lemma_check(args) -> int:
    spec = _load_model(args.model)
    x = _parse_point(args.x)
    t = args.t if args.t is not None else median_radius(spec, x, args.n, args.k,
                                                       seed=args.seed)
    delta = args.delta if args.delta is not None else args.delta_frac * t
    report = verify_conditional_law(spec, x, args.y, args.n, args.k, t, delta,
                                    args.replicates, args.seed,
                                    threshold=args.threshold)
    doc = {
        "schema": "condent-lemma-check/1",
        "tv_distance": report.tv_distance, "threshold": report.threshold,
        "acceptance": report.acceptance, "shell_t": report.shell[0],
        "shell_delta": report.shell[1], "hits": report.replicates_used,
        "replicates": report.replicates_total, "p": report.p, "alpha": report.alpha,
        "empirical_pmf": report.empirical_pmf.tolist(),
        "analytic_pmf": report.analytic_pmf.tolist(),
    }
    if args.output == "json":
        print(json.dumps(doc))
    else:
        print(f"shell t={_fmt(report.shell[0])} delta={_fmt(report.shell[1])} "
              f"hits={report.replicates_used}/{report.replicates_total}")
        print(f"TV distance {_fmt(report.tv_distance)} "
              f"(threshold {_fmt(report.threshold)}): "
              + ("PASS" if report.acceptance else "FAIL"))
    return 0 if report.acceptance else 3


def _cmd_density_check(args) -> int:
    spec = _load_model(args.model)
    x = _parse_point(args.x)
    report = verify_distance_distribution(spec, x, args.n, args.k,
                                          args.samples, args.seed)
    doc = {
        "schema": "condent-density-check/1", "ks_statistic": report.statistic,
        "band95": report.band95, "within_band": report.within_band,
        "samples": report.samples, "n": report.n, "k": report.k,
    }
    if args.output == "json":
        print(json.dumps(doc))
    else:
        print(f"KS statistic {_fmt(report.statistic)} "
              f"(95% band {_fmt(report.band95)} at {report.samples} samples): "
              + ("PASS" if report.within_band else "FAIL"))
    return 0 if report.within_band else 3


def _cmd_rank_features(args) -> int:
    config = _config_from_args(args)
    dataset = ingest_csv(args.input, args.label)
    ranking = rank_features(dataset, config)
    if args.output == "json":
        print(json.dumps(ranking.to_dict()))
    elif args.output == "csv":
        print("rank,feature,mi,degenerate")
        for s in ranking.scores:
            print(f"{s.rank},{s.feature},{_convert(s.mi, args.units)!r},"
                  f"{str(s.degenerate).lower()}")
    else:
        print(f"{'rank':>5} {'feature':>8} {'mi':>12} degenerate")
        for s in ranking.scores:
            print(f"{s.rank:>5} {s.feature:>8} {_fmt(_convert(s.mi, args.units)):>12}"
                  f" {str(s.degenerate).lower()}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="condent",
                     description="k-NN conditional entropy estimation for "
                                 "mixed continuous/discrete data")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate H(Y|X) from a CSV dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--label", required=True, help="label column name")
    _add_k_flags(p)
    p.add_argument("--clamp-nonnegative", action="store_true")
    _add_common_output(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("mi", help="estimate mutual information I(X,Y)")
    p.add_argument("--input", required=True)
    p.add_argument("--label", required=True)
    _add_k_flags(p)
    _add_common_output(p)
    p.set_defaults(func=_cmd_mi)

    p = sub.add_parser("generate", help="draw a dataset from a model spec")
    p.add_argument("--model", required=True, help="model spec JSON file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--label", default="y", help="label column name in the output")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("convergence", help="run a bias/MSE convergence experiment")
    p.add_argument("--plan", required=True, help="experiment plan JSON file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-json", default=None)
    p.add_argument("--out-csv", default=None)
    _add_common_output(p)
    p.set_defaults(func=_cmd_convergence)

    p = sub.add_parser("lemma-check",
                       help="verify the binomial-mixture law of the ball count")
    p.add_argument("--model", required=True)
    p.add_argument("--x", required=True, help="query point, comma-separated")
    p.add_argument("--y", type=int, default=0, help="label id")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=float, default=None,
                   help="shell center radius (default: median k-NN radius)")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--delta-frac", type=float, default=0.1,
                   help="shell half-width as a fraction of t")
    p.add_argument("--replicates", type=int, default=20000)
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--seed", type=int, required=True)
    _add_common_output(p)
    p.set_defaults(func=_cmd_lemma_check)

    p = sub.add_parser("density-check",
                       help="verify the k-NN radius distribution formula")
    p.add_argument("--model", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, required=True)
    _add_common_output(p)
    p.set_defaults(func=_cmd_density_check)

    p = sub.add_parser("rank-features", help="rank features by marginal MI")
    p.add_argument("--input", required=True)
    p.add_argument("--label", required=True)
    _add_k_flags(p)
    _add_common_output(p)
    p.set_defaults(func=_cmd_rank_features)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"condent: usage error: {exc}", file=sys.stderr)
        return 1
    except InvalidInputError as exc:
        print(f"condent: invalid input: {exc}", file=sys.stderr)
        return 2
    except InconclusiveError as exc:
        print(f"condent: inconclusive: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
