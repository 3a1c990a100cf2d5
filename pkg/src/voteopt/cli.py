"""Command-line interface tying the three pipeline phases together.

Subcommands: optimize, baselines, evaluate, resample, tune, sweep,
validate. Every command is reproducible: the same inputs, flags and seed
produce byte-identical outputs (pass --no-timestamp to drop the one
timestamp line from reports).

Exit codes: 0 success (and, for validate, conformant), 2 configuration or
input error, 3 no feasible classifier subset, 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import io
from .baselines import SCHEMES, DeParams, baseline_with_selection
from .core import HyperParams, imbalance_ratio
from .ensemble import evaluate
from .metrics import improvement_pct
from .optimizer import (
    AllSubsetsInfeasible,
    solve_weighting,
    tune_hyperparams,
    validate_constraints,
)
from .sampling import (
    distribution_from_labels,
    ratio_targets,
    resample,
    step_targets,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NONCONFORMANT = 4

METRIC_FIELDS = (
    "balanced_accuracy",
    "macro_precision",
    "macro_recall",
    "macro_f1",
    "macro_auprc",
)


def _merge_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    with open(args.config) as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        raise ValueError(f"{args.config}: config must be a JSON object")
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"{args.config}: unknown setting {key!r}")
        if getattr(args, attr) is None:
            setattr(args, attr, value)


def _fill(args: argparse.Namespace, **defaults) -> None:
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _workers(args: argparse.Namespace) -> int:
    if getattr(args, "deterministic", False):
        return 1
    if getattr(args, "workers", None):
        return int(args.workers)
    return os.cpu_count() or 1


def _hyperparams(args: argparse.Namespace) -> HyperParams:
    return HyperParams(
        k=int(args.k),
        lam=float(args.lam),
        alpha=float(args.alpha),
        epsilon=float(args.epsilon),
        big_m=float(args.big_m),
    )


def _de_params(args: argparse.Namespace) -> DeParams:
    return DeParams(
        population_size=int(args.de_pop),
        max_generations=int(args.de_gens),
        differential_weight=float(args.de_f),
        crossover_rate=float(args.de_cr),
        rng_seed=int(args.de_seed),
    )


def _constraint_payload(report) -> list[dict]:
    return [
        {
            "constraint": check.constraint_id,
            "name": check.name,
            "satisfied": check.satisfied,
            "worst_violation": check.worst_violation,
            "location": check.location,
        }
        for check in report.checks
    ]


def cmd_optimize(args) -> int:
    _fill(args, lam=0.95, alpha=0.85, epsilon=1e-6, big_m=1e6, method="auto")
    v = io.read_accuracy_matrix(args.matrix)
    params = _hyperparams(args)
    solution = solve_weighting(
        v, params, workers=_workers(args), method=args.method
    )
    report = validate_constraints(v, solution.weights, solution.selection, params)
    io.write_weight_matrix(
        args.out_weights, solution.weights, solution.selection,
        v.classifiers, v.classes,
    )
    payload = {
        "hyperparams": {
            "k": params.k, "lam": params.lam, "alpha": params.alpha,
            "epsilon": params.epsilon, "big_m": params.big_m,
        },
        "selected": [
            v.classifiers.names[i] for i in solution.selection.indices
        ],
        "objective": {
            "accuracy_term": solution.objective.accuracy_term,
            "l1_term": solution.objective.l1_term,
            "l2_term": solution.objective.l2_term,
            "total": solution.objective.total,
        },
        "constraints": _constraint_payload(report),
        "subset_rank": [
            {
                "subset": [v.classifiers.names[i] for i in r.subset],
                "status": r.status.value,
                "objective": r.objective,
            }
            for r in solution.subset_rank
        ],
    }
    io.write_report(args.out_report, payload, timestamp=not args.no_timestamp)
    print(f"selected {payload['selected']} objective={solution.objective.total:.6f}")
    return EXIT_OK


def cmd_baselines(args) -> int:
    _fill(args, de_pop=50, de_gens=200, de_f=0.8, de_cr=0.9, de_seed=30)
    v = io.read_accuracy_matrix(args.matrix)
    k = int(args.k)
    de_params = _de_params(args)
    os.makedirs(args.out_dir, exist_ok=True)
    summary = {}
    for scheme in SCHEMES:
        selection, weights = baseline_with_selection(scheme, v, k, de_params)
        path = os.path.join(args.out_dir, f"{scheme}.csv")
        io.write_weight_matrix(path, weights, selection, v.classifiers, v.classes)
        score = float((weights.w * v.values).sum() / v.m)
        summary[scheme] = {
            "selected": [v.classifiers.names[i] for i in selection.indices],
            "weighted_accuracy": score,
            "weights_file": os.path.basename(path),
        }
        print(f"{scheme}: weighted accuracy {score:.6f}")
    io.write_report(
        os.path.join(args.out_dir, "baselines.json"), summary,
        timestamp=not args.no_timestamp,
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    weights, _, classifiers, classes = io.read_weight_matrix(args.weights)
    preds = io.read_predictions(args.predictions, classifiers, classes)
    report = evaluate(
        weights, preds, include_auprc=not args.no_auprc
    )
    io.write_report(args.out_report, report.as_dict(),
                    timestamp=not args.no_timestamp)
    print(
        f"balanced_accuracy={report.balanced_accuracy:.6f} "
        f"macro_f1={report.macro_f1:.6f}"
    )
    return EXIT_OK


def cmd_resample(args) -> int:
    _fill(args, seed=0)
    labels = io.read_labels(args.labels)
    dist = distribution_from_labels(labels)
    if args.target_rho is not None and args.step_r is not None:
        raise ValueError("choose either --target-rho or --step-r/--step-rho")
    if args.target_rho is not None:
        plan = ratio_targets(dist, float(args.target_rho), seed=int(args.seed))
    elif args.step_r is not None:
        if args.step_rho is None:
            raise ValueError("--step-r requires --step-rho")
        step = step_targets(
            dist.total, dist.m, int(args.step_r), float(args.step_rho)
        )
        plan = step.bind(dist, seed=int(args.seed))
    else:
        raise ValueError("either --target-rho or --step-r/--step-rho is required")
    indices = resample(labels, plan)
    io.write_indices(args.out_indices, indices)
    achieved = distribution_from_labels(labels[indices])
    payload = {
        "targets": plan.targets,
        "achieved": {
            name: int(count)
            for name, count in zip(achieved.class_names, achieved.counts)
        },
        "total": achieved.total,
        "imbalance_ratio": imbalance_ratio(achieved),
        "seed": int(args.seed),
    }
    io.write_report(args.out_distribution, payload,
                    timestamp=not args.no_timestamp)
    print(
        f"resampled {achieved.total} instances, "
        f"rho={payload['imbalance_ratio']:.2f}"
    )
    return EXIT_OK


def cmd_tune(args) -> int:
    _fill(args, lam0=0.95, alpha0=0.85, dlam=0.01, dalpha=0.01,
          epsilon=1e-6, big_m=1e6)
    v = io.read_accuracy_matrix(args.matrix)
    preds = io.read_predictions(args.predictions, v.classifiers, v.classes)

    def score(weights):
        return evaluate(weights, preds, include_auprc=False).balanced_accuracy

    result = tune_hyperparams(
        v, int(args.k),
        start=(float(args.lam0), float(args.alpha0)),
        steps=(float(args.dlam), float(args.dalpha)),
        score=score,
        epsilon=float(args.epsilon), big_m=float(args.big_m),
        workers=_workers(args),
    )
    payload = {
        "lam": result.lam,
        "alpha": result.alpha,
        "score": result.score,
        "selected": [
            v.classifiers.names[i] for i in result.solution.selection.indices
        ],
    }
    io.write_report(args.out_report, payload, timestamp=not args.no_timestamp)
    print(f"tuned lam={result.lam:.4f} alpha={result.alpha:.4f} "
          f"score={result.score:.6f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    _fill(args, lam=0.95, alpha=0.85, epsilon=1e-6, big_m=1e6,
          de_pop=50, de_gens=200, de_f=0.8, de_cr=0.9, de_seed=30)
    v = io.read_accuracy_matrix(args.matrix)
    preds = io.read_predictions(args.predictions, v.classifiers, v.classes)
    k_min, k_max = int(args.k_min), int(args.k_max)
    if not 2 <= k_min <= k_max <= v.n:
        raise ValueError(
            f"K range {k_min}..{k_max} must sit inside 2..{v.n}"
        )
    de_params = _de_params(args)
    workers = _workers(args)
    ks = list(range(k_min, k_max + 1))
    table: dict[tuple[str, str], dict[int, float]] = {
        (metric, scheme): {} for metric in METRIC_FIELDS for scheme in SCHEMES
    }
    for k in ks:
        params = HyperParams(k=k, lam=float(args.lam), alpha=float(args.alpha),
                             epsilon=float(args.epsilon), big_m=float(args.big_m))
        mip = solve_weighting(v, params, workers=workers)
        mip_report = evaluate(mip.weights, preds)
        for scheme in SCHEMES:
            _, weights = baseline_with_selection(scheme, v, k, de_params)
            base_report = evaluate(weights, preds)
            for metric in METRIC_FIELDS:
                ours = getattr(mip_report, metric)
                other = getattr(base_report, metric)
                table[(metric, scheme)][k] = improvement_pct(ours, other)
    with open(args.out_table, "w", newline="") as fh:
        fh.write("metric,scheme," + ",".join(f"K={k}" for k in ks) + "\n")
        for metric in METRIC_FIELDS:
            for scheme in SCHEMES:
                cells = ",".join(
                    format(table[(metric, scheme)][k], ".17g") for k in ks
                )
                fh.write(f"{metric},{scheme},{cells}\n")
    print(f"improvement table written to {args.out_table}")
    return EXIT_OK


def cmd_validate(args) -> int:
    _fill(args, lam=0.95, alpha=0.85, epsilon=1e-6, big_m=1e6, tol=1e-6)
    v = io.read_accuracy_matrix(args.matrix)
    weights, selection, classifiers, classes = io.read_weight_matrix(args.weights)
    if classifiers.names != v.classifiers.names:
        raise ValueError("weight file classifiers do not match the accuracy matrix")
    if classes.names != v.classes.names:
        raise ValueError("weight file classes do not match the accuracy matrix")
    k = int(args.k) if args.k is not None else selection.count
    params = HyperParams(k=max(k, 1), lam=float(args.lam), alpha=float(args.alpha),
                         epsilon=float(args.epsilon), big_m=float(args.big_m))
    report = validate_constraints(v, weights, selection, params,
                                  tol=float(args.tol))
    for check in report.checks:
        state = "ok" if check.satisfied else "VIOLATED"
        print(
            f"constraint ({check.constraint_id}) {check.name}: {state} "
            f"(worst violation {check.worst_violation:.3e} at {check.location})"
        )
    if report.conformant:
        print("conformant")
        return EXIT_OK
    worst = max(
        (c for c in report.checks if not c.satisfied),
        key=lambda c: c.worst_violation,
    )
    print(f"nonconformant: constraint ({worst.constraint_id}) {worst.name}")
    return EXIT_NONCONFORMANT


def _add_common(sub, *, workers=False, de=False, hyper=False):
    sub.add_argument("--config", help="JSON file supplying unset flags")
    sub.add_argument("--no-timestamp", action="store_true",
                     help="omit the timestamp line from reports")
    if workers:
        sub.add_argument("--workers", type=int, default=None)
        sub.add_argument("--deterministic", action="store_true",
                         help="force single-worker execution")
    if hyper:
        sub.add_argument("--lam", type=float, default=None)
        sub.add_argument("--alpha", type=float, default=None)
        sub.add_argument("--epsilon", type=float, default=None)
        sub.add_argument("--big-m", dest="big_m", type=float, default=None)
    if de:
        sub.add_argument("--de-pop", dest="de_pop", type=int, default=None)
        sub.add_argument("--de-gens", dest="de_gens", type=int, default=None)
        sub.add_argument("--de-f", dest="de_f", type=float, default=None)
        sub.add_argument("--de-cr", dest="de_cr", type=float, default=None)
        sub.add_argument("--de-seed", dest="de_seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voteopt",
        description="Per-class weighting for voting ensembles",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("optimize", help="select K classifiers and weights")
    p.add_argument("--matrix", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out-weights", required=True)
    p.add_argument("--out-report", required=True)
    p.add_argument("--method", choices=("auto", "enumerate", "bnb"), default=None)
    _add_common(p, workers=True, hyper=True)
    p.set_defaults(func=cmd_optimize)

    p = subs.add_parser("baselines", help="run the six reference schemes")
    p.add_argument("--matrix", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    _add_common(p, de=True)
    p.set_defaults(func=cmd_baselines)

    p = subs.add_parser("evaluate", help="score a weight matrix on predictions")
    p.add_argument("--weights", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out-report", required=True)
    p.add_argument("--no-auprc", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = subs.add_parser("resample", help="under/oversample labels to a target")
    p.add_argument("--labels", required=True)
    p.add_argument("--out-indices", required=True)
    p.add_argument("--out-distribution", required=True)
    p.add_argument("--target-rho", dest="target_rho", type=float, default=None)
    p.add_argument("--step-r", dest="step_r", type=int, default=None)
    p.add_argument("--step-rho", dest="step_rho", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_resample)

    p = subs.add_parser("tune", help="hill-climb lam/alpha against predictions")
    p.add_argument("--matrix", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out-report", required=True)
    p.add_argument("--lam0", type=float, default=None)
    p.add_argument("--alpha0", type=float, default=None)
    p.add_argument("--dlam", type=float, default=None)
    p.add_argument("--dalpha", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--big-m", dest="big_m", type=float, default=None)
    _add_common(p, workers=True)
    p.set_defaults(func=cmd_tune)

    p = subs.add_parser("sweep", help="K-range x scheme improvement table")
    p.add_argument("--matrix", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--k-min", dest="k_min", type=int, required=True)
    p.add_argument("--k-max", dest="k_max", type=int, required=True)
    p.add_argument("--out-table", required=True)
    _add_common(p, workers=True, de=True, hyper=True)
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("validate", help="check a weight file against the model")
    p.add_argument("--matrix", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    _add_common(p, hyper=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        return args.func(args)
    except AllSubsetsInfeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
