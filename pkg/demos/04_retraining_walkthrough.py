"""
Reducing discrimination by retraining
=====================================

End to end: sample training data from a biased ground truth, fit a
decision tree (which inherits the bias), audit it, then feed the audit's
unique discriminatory inputs back into training in exponentially growing
slices. Each slice is labeled by majority vote over protected variants,
which neutralizes the protected parameter's influence; a retrained model
is kept only while its estimated discrimination strictly falls.
"""

import numpy as np

from fairprobe import (
    DiscriminationConfig,
    LabeledDataset,
    PlantedBiasSpec,
    SearchConfig,
    estimate_fraction,
    make_planted,
    retrain_loop,
    run_audit,
    sample_uniform,
    train_tree,
)
from fairprobe.domain import InputDomain, ParameterSpec

domain = InputDomain([
    ParameterSpec("a", 0, 0, 49),
    ParameterSpec("b", 1, 0, 49),
    ParameterSpec("g", 2, 0, 1, protected=True),
])
truth = make_planted(
    domain,
    PlantedBiasSpec(region={0: (10, 34), 1: (5, 29)}, biased_protected_value=1),
)

rng = np.random.default_rng(42)
rows = []
for _ in range(500):
    v = sample_uniform(domain, rng)
    rows.append((v, truth.predict(v)))
training = LabeledDataset(domain, tuple(rows), source="demo")


def trainer(ds):
    return train_tree(ds, max_depth=10, min_leaf=1, seed=42)


subject = trainer(training)
gamma = DiscriminationConfig(0.0)
before = estimate_fraction(subject, domain, gamma, 300, 10, np.random.default_rng(1))
print(f"tree trained on biased labels: estimated {before.point_estimate:.2f}% discriminatory")

cfg = SearchConfig(global_trials=300, local_trials=100, strategy="fully_directed",
                   seed=42, max_inputs=900)
suite = run_audit(subject, domain, cfg, np.random.default_rng(42))
print(f"audit found {suite.findings_count} findings, {len(suite.unique_inputs)} unique inputs\n")

report = retrain_loop(trainer, training, suite, (300, 10, gamma), np.random.default_rng(42))
for it in report.iterations:
    verdict = "accepted" if it.accepted else "rejected (loop exits)"
    print(
        f"round i={it.index}: add {it.rows_added} rows ({it.p_percent:.2f}%) "
        f"-> estimate {it.estimate_before:.2f}% vs {it.estimate_after:.2f}%  [{verdict}]"
    )
print(
    f"\nkept model: {report.initial_estimate:.2f}% -> {report.final_estimate:.2f}% "
    f"({report.improvement_percent:.1f}% improvement, "
    f"{report.percent_added:.1f}% of the training rows added)"
)
