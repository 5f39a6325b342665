"""Command-line entry points.

Subcommands: train, audit, estimate, retrain, compare. Exit status is 0 on
success, 1 on runtime/model failure, 2 on usage or configuration errors.
FAIRPROBE_SEED is used whenever --seed is not given.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Sequence

import numpy as np

from .domain import format_domain, load_csv, load_domain
from .errors import FairprobeError, ProtocolError, TransportError
from .estimator import estimate_fraction
from .fairness import DiscriminationConfig
from .models import (
    ExternalModel,
    Model,
    connect_external,
    load_model,
    model_digest,
    save_model,
    train_logistic,
    train_tree,
)
from .report import (
    DEFAULT_FINDINGS_CAP,
    build_audit_report,
    build_compare_report,
    build_estimate_report,
    build_retrain_report,
    digest_text,
    findings_from_report,
    load_report,
    write_report,
)
from .retrain import retrain_loop
from .search import (
    STRATEGIES,
    SearchConfig,
    TestSuite,
    compare_strategies,
    run_audit,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("FAIRPROBE_SEED")
    return int(env) if env else 0


def _open_model(ref: str, domain) -> Model:
    """Resolve a model reference: 'external:<command>' or a model file path."""
    if ref.startswith("external:"):
        return connect_external(ref[len("external:"):], domain)
    model = load_model(ref)
    if model.n_params != domain.n:
        raise FairprobeError(
            f"model file declares {model.n_params} parameters, "
            f"domain has {domain.n}"
        )
    return model


def _close_model(model: Model) -> None:
    if isinstance(model, ExternalModel):
        model.close()


def _empty_suite() -> TestSuite:
    return TestSuite(
        findings=(), unique_inputs=(), inputs_generated=0, findings_count=0
    )


def _trainer_for(args) -> tuple:
    seed = _resolve_seed(args.seed)
    if args.model_kind == "logistic":
        hyper = {
            "epochs": args.epochs,
            "learning_rate": args.learning_rate,
            "seed": seed,
        }
        return (
            lambda ds: train_logistic(ds, args.epochs, args.learning_rate, seed),
            hyper,
        )
    hyper = {"max_depth": args.max_depth, "min_leaf": args.min_leaf, "seed": seed}
    return lambda ds: train_tree(ds, args.max_depth, args.min_leaf, seed), hyper


def _cmd_train(args) -> int:
    domain = load_domain(args.domain_file)
    data = load_csv(args.csv_file, domain, args.label_column)
    trainer, _ = _trainer_for(args)
    model = trainer(data)
    save_model(model, args.out_path)
    print(f"wrote {args.model_kind} model ({model_digest(model)[:12]}) to {args.out_path}")
    return EXIT_OK


def _cmd_audit(args) -> int:
    domain = load_domain(args.domain_file)
    cfg = SearchConfig(
        gamma=DiscriminationConfig(args.gamma),
        global_trials=args.global_trials,
        local_trials=args.local_trials,
        delta_v=args.delta_v,
        delta_pr=args.delta_pr,
        strategy=args.strategy,
        seed=_resolve_seed(args.seed),
        max_findings=args.max_findings,
        time_budget=args.time_budget,
        max_inputs=args.max_inputs,
    )
    model = _open_model(args.model_ref, domain)
    echo = dict(
        domain_file=args.domain_file,
        domain_digest=digest_text(format_domain(domain)),
        model_ref=args.model_ref,
        model_digest=model_digest(model),
        findings_cap=args.findings_cap,
    )
    try:
        suite = run_audit(model, domain, cfg, np.random.default_rng(cfg.seed))
    except (TransportError, ProtocolError) as exc:
        write_report(
            build_audit_report(cfg, _empty_suite(), error=str(exc), **echo),
            args.report_out,
        )
        print(f"error: {exc} (partial report written)", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        _close_model(model)
    write_report(build_audit_report(cfg, suite, **echo), args.report_out)
    print(
        f"{suite.findings_count} discriminatory inputs "
        f"({suite.percent_discriminatory:.2f}% of {suite.inputs_generated} tested); "
        f"report: {args.report_out}"
    )
    return EXIT_OK


def _cmd_estimate(args) -> int:
    domain = load_domain(args.domain_file)
    seed = _resolve_seed(args.seed)
    model = _open_model(args.model_ref, domain)
    try:
        start = time.perf_counter()
        result = estimate_fraction(
            model,
            domain,
            DiscriminationConfig(args.gamma),
            args.m,
            args.K,
            np.random.default_rng(seed),
        )
        wall = time.perf_counter() - start
    finally:
        _close_model(model)
    doc = build_estimate_report(
        result,
        gamma=args.gamma,
        seed=seed,
        domain_file=args.domain_file,
        domain_digest=digest_text(format_domain(domain)),
        model_ref=args.model_ref,
        model_digest=model_digest(model),
        wall_time=wall,
    )
    write_report(doc, args.report_out)
    print(
        f"estimated discriminatory fraction: {result.point_estimate:.4f}% "
        f"(95% CI [{result.ci_low:.4f}, {result.ci_high:.4f}]); "
        f"report: {args.report_out}"
    )
    return EXIT_OK


def _cmd_retrain(args) -> int:
    domain = load_domain(args.domain_file)
    domain_digest = digest_text(format_domain(domain))
    findings_doc = load_report(args.findings_file)
    if findings_doc["config"].get("domain_digest") != domain_digest:
        print(
            "error: findings file was produced for a different domain "
            f"(digest {findings_doc['config'].get('domain_digest')!r} != "
            f"{domain_digest!r})",
            file=sys.stderr,
        )
        return EXIT_USAGE
    findings = findings_from_report(findings_doc)
    if not findings:
        print(
            "error: findings file holds no discriminatory inputs; audit with "
            "a larger budget before retraining",
            file=sys.stderr,
        )
        return EXIT_USAGE

    data = load_csv(args.csv_file, domain, args.label_column)
    trainer, hyper = _trainer_for(args)
    seed = _resolve_seed(args.seed)
    unique: dict = {}
    for f in findings:
        unique.setdefault(f.input)
    suite = TestSuite(
        findings=tuple(findings),
        unique_inputs=tuple(unique),
        inputs_generated=len(findings),
        findings_count=len(findings),
    )
    start = time.perf_counter()
    outcome = retrain_loop(
        trainer,
        data,
        suite,
        (args.m, args.K, DiscriminationConfig(args.gamma)),
        np.random.default_rng(seed),
    )
    wall = time.perf_counter() - start
    model_path = args.report_out + ".model"
    save_model(outcome.final_model, model_path)
    doc = build_retrain_report(
        outcome,
        model_kind=args.model_kind,
        hyperparams=hyper,
        m=args.m,
        K=args.K,
        gamma=args.gamma,
        seed=seed,
        domain_file=args.domain_file,
        domain_digest=domain_digest,
        csv_file=args.csv_file,
        findings_file=args.findings_file,
        final_model_digest=model_digest(outcome.final_model),
        final_model_path=model_path,
        wall_time=wall,
    )
    write_report(doc, args.report_out)
    print(
        f"retraining: {outcome.initial_estimate:.4f}% -> "
        f"{outcome.final_estimate:.4f}% "
        f"({outcome.improvement_percent:.2f}% improvement, "
        f"{outcome.percent_added:.2f}% rows added); "
        f"model: {model_path}; report: {args.report_out}"
    )
    return EXIT_OK


def _cmd_compare(args) -> int:
    domain = load_domain(args.domain_file)
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    if not seeds:
        print("error: --seeds must list at least one integer", file=sys.stderr)
        return EXIT_USAGE
    model = _open_model(args.model_ref, domain)
    try:
        start = time.perf_counter()
        rows = compare_strategies(
            model,
            domain,
            seeds,
            args.budget,
            DiscriminationConfig(args.gamma),
            global_fraction=args.global_fraction,
        )
        wall = time.perf_counter() - start
    finally:
        _close_model(model)
    doc = build_compare_report(
        rows,
        seeds=seeds,
        budget=args.budget,
        gamma=args.gamma,
        global_fraction=args.global_fraction,
        domain_file=args.domain_file,
        domain_digest=digest_text(format_domain(domain)),
        model_ref=args.model_ref,
        model_digest=model_digest(model),
        wall_time=wall,
    )
    write_report(doc, args.report_out)
    width = max(len(s) for s in STRATEGIES)
    for row in rows:
        print(
            f"{row['strategy']:<{width}}  "
            f"median % discriminatory: {row['median_percent_discriminatory']:8.3f}  "
            f"median wall time: {row['median_wall_time']:.3f}s"
        )
    print(f"report: {args.report_out}")
    return EXIT_OK


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model-kind", required=True, choices=("logistic", "tree"))
    p.add_argument("--csv-file", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--learning-rate", type=float, default=5.0)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--min-leaf", type=int, default=1)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairprobe",
        description=(
            "Audit a black-box classifier for individual-fairness violations, "
            "estimate its discriminatory-input fraction, and retrain it with "
            "generated findings."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a native model from CSV data")
    train.add_argument("--domain-file", required=True)
    _add_train_flags(train)
    train.add_argument("--seed", type=int, default=None)
    train.add_argument("--out-path", required=True)
    train.set_defaults(func=_cmd_train)

    audit = sub.add_parser("audit", help="search for discriminatory inputs")
    audit.add_argument("--domain-file", required=True)
    audit.add_argument("--model-ref", required=True,
                       help="model file path, or external:<launch command>")
    audit.add_argument("--strategy", default="fully_directed", choices=STRATEGIES)
    audit.add_argument("--gamma", type=float, default=0.0)
    audit.add_argument("--delta-v", type=float, default=0.001)
    audit.add_argument("--delta-pr", type=float, default=0.001)
    audit.add_argument("--global-trials", type=int, default=1000)
    audit.add_argument("--local-trials", type=int, default=1000)
    audit.add_argument("--seed", type=int, default=None)
    audit.add_argument("--max-findings", type=int, default=None)
    audit.add_argument("--time-budget", type=float, default=None)
    audit.add_argument("--max-inputs", type=int, default=None)
    audit.add_argument("--findings-cap", type=int, default=DEFAULT_FINDINGS_CAP)
    audit.add_argument("--report-out", required=True)
    audit.set_defaults(func=_cmd_audit)

    estimate = sub.add_parser(
        "estimate", help="estimate the discriminatory-input fraction"
    )
    estimate.add_argument("--domain-file", required=True)
    estimate.add_argument("--model-ref", required=True)
    estimate.add_argument("--gamma", type=float, default=0.0)
    estimate.add_argument("--m", type=int, required=True,
                          help="uniform samples per trial")
    estimate.add_argument("--K", type=int, required=True, help="trial count")
    estimate.add_argument("--seed", type=int, default=None)
    estimate.add_argument("--report-out", required=True)
    estimate.set_defaults(func=_cmd_estimate)

    retrain = sub.add_parser(
        "retrain", help="retrain a model with audited discriminatory inputs"
    )
    retrain.add_argument("--domain-file", required=True)
    _add_train_flags(retrain)
    retrain.add_argument("--findings-file", required=True,
                         help="audit report holding the findings to reuse")
    retrain.add_argument("--m", type=int, default=500)
    retrain.add_argument("--K", type=int, default=20)
    retrain.add_argument("--gamma", type=float, default=0.0)
    retrain.add_argument("--seed", type=int, default=None)
    retrain.add_argument("--report-out", required=True)
    retrain.set_defaults(func=_cmd_retrain)

    compare = sub.add_parser(
        "compare", help="run all four strategies at an equal input budget"
    )
    compare.add_argument("--domain-file", required=True)
    compare.add_argument("--model-ref", required=True)
    compare.add_argument("--seeds", required=True, help="comma-separated seed list")
    compare.add_argument("--budget", type=int, required=True,
                         help="tested inputs per strategy per seed")
    compare.add_argument("--gamma", type=float, default=0.0)
    compare.add_argument("--global-fraction", type=float, default=0.1)
    compare.add_argument("--report-out", required=True)
    compare.set_defaults(func=_cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "estimate" and args.K < 2:
        parser.error("--K must be at least 2: the interval is undefined for one trial")
    try:
        return args.func(args)
    except (FairprobeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
