"""Retraining loop: augment training data with generated discriminatory
inputs in exponentially growing slices, keeping a retrained model only while
its estimated discrimination falls.

Each round i draws a percentage p_i uniformly from (2^(i-2), 2^(i-1)) and
stops once p_i exceeds 100, so the loop is bounded regardless of inputs.
Every round augments the *original* training data with a fresh sample of
floor(p_i * |data| / 100) generated inputs; augmentation is not cumulative.
The estimate of the currently kept model is carried forward from the
comparison that accepted it, which makes the accepted-estimate sequence
strictly decreasing by construction and the final estimate never worse than
the initial one.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .domain import InputDomain, LabeledDataset, PointInput, protected_variants
from .errors import ContractError
from .estimator import estimate_fraction
from .fairness import DiscriminationConfig
from .models import Model
from .search import TestSuite

Trainer = Callable[[LabeledDataset], Model]


@dataclass(frozen=True)
class RetrainIteration:
    """One augmentation round: slice size, both estimates, and the verdict."""

    index: int
    p_percent: float
    rows_added: int
    estimate_before: float
    estimate_after: float
    accepted: bool


@dataclass
class RetrainReport:
    """Outcome of the loop: kept model, per-round records, and headline numbers."""

    iterations: tuple[RetrainIteration, ...]
    final_model: Model
    initial_estimate: float
    final_estimate: float
    total_added: int
    percent_added: float
    improvement_percent: float


def label_generated(input: PointInput, model: Model, domain: InputDomain) -> int:
    """Label a generated input by majority vote over its protected variants.

    Neutralizes the protected parameters' influence on the new row. Exact
    ties go to the label whose variant appears first in enumeration order,
    i.e. toward the variant with the lowest protected values.
    """
    variants = protected_variants(input, domain)
    labels = model.predict_batch(variants)
    counts = Counter(labels)
    top = max(counts.values())
    for label in labels:
        if counts[label] == top:
            return label
    raise AssertionError("unreachable: labels is nonempty")


def _draw_inputs(
    pool: Sequence[PointInput], n: int, rng: np.random.Generator
) -> list[PointInput]:
    """Sample n inputs: without replacement while the pool lasts, then with."""
    order = rng.permutation(len(pool))
    picked = [pool[i] for i in order[: min(n, len(pool))]]
    if n > len(pool):
        extra = rng.integers(0, len(pool), size=n - len(pool))
        picked.extend(pool[i] for i in extra)
    return picked


def retrain_loop(
    trainer: Trainer,
    training_data: LabeledDataset,
    suite: TestSuite,
    est_params: tuple[int, int, DiscriminationConfig | float],
    rng: np.random.Generator,
) -> RetrainReport:
    """Run the bounded augment-retrain-estimate loop.

    `trainer` must be deterministic given its baked-in seed; `est_params`
    is (m, K, gamma) for the fraction estimator. Generated inputs are
    labeled with the currently kept model at selection time.
    """
    if not suite.unique_inputs:
        raise ContractError(
            "the audit suite holds no discriminatory inputs; run an audit "
            "that finds at least one before retraining"
        )
    m, K, gamma = est_params
    if not isinstance(gamma, DiscriminationConfig):
        gamma = DiscriminationConfig(float(gamma))

    domain = training_data.domain
    original_size = len(training_data)
    pool = suite.unique_inputs

    def estimate(model: Model) -> float:
        sub = rng.spawn(1)[0]
        return estimate_fraction(model, domain, gamma, m, K, sub).point_estimate

    current = trainer(training_data)
    current_estimate = estimate(current)
    initial_estimate = current_estimate

    iterations: list[RetrainIteration] = []
    total_added = 0
    for i in range(2, 10):
        low, high = 2.0 ** (i - 2), 2.0 ** (i - 1)
        p_i = float(rng.uniform(low, high))
        if p_i > 100.0:
            break
        n_addn = int(p_i * original_size / 100.0)
        picked = _draw_inputs(pool, n_addn, rng)
        additions = [
            (values, label_generated(values, current, domain)) for values in picked
        ]
        augmented = training_data.extend(
            additions, source=f"{training_data.source}+generated[{n_addn}]"
        )
        candidate = trainer(augmented)
        candidate_estimate = estimate(candidate)
        accepted = current_estimate > candidate_estimate
        iterations.append(
            RetrainIteration(
                index=i,
                p_percent=p_i,
                rows_added=n_addn,
                estimate_before=current_estimate,
                estimate_after=candidate_estimate,
                accepted=accepted,
            )
        )
        if not accepted:
            break
        current = candidate
        current_estimate = candidate_estimate
        total_added = n_addn

    improvement = (
        100.0 * (initial_estimate - current_estimate) / initial_estimate
        if initial_estimate > 0
        else 0.0
    )
    return RetrainReport(
        iterations=tuple(iterations),
        final_model=current,
        initial_estimate=initial_estimate,
        final_estimate=current_estimate,
        total_added=total_added,
        percent_added=100.0 * total_added / original_size,
        improvement_percent=improvement,
    )
