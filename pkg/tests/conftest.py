"""Shared fixtures: small domains and planted models used across the suite."""

import numpy as np
import pytest

from fairprobe import (
    InputDomain,
    LabeledDataset,
    ParameterSpec,
    PlantedBiasSpec,
    make_planted,
    sample_uniform,
)


def make_domain(specs):
    """specs: list of (name, lo, hi, protected)."""
    return InputDomain(
        [
            ParameterSpec(name=n, index=i, min_value=lo, max_value=hi, protected=p)
            for i, (n, lo, hi, p) in enumerate(specs)
        ]
    )


@pytest.fixture
def small_domain():
    """Two free parameters and one binary protected parameter, 5x5x2 points."""
    return make_domain(
        [("a", 0, 4, False), ("b", 0, 4, False), ("g", 0, 1, True)]
    )


@pytest.fixture
def wide_domain():
    """Desk-scale domain: 1000x1000 free space, binary protected parameter."""
    return make_domain(
        [("a", 0, 999, False), ("b", 0, 999, False), ("g", 0, 1, True)]
    )


@pytest.fixture
def clustered_model(wide_domain):
    """Planted model, 5% of the domain discriminatory: full range of `a`,
    five percent of `b`, contiguous in each non-protected parameter."""
    return make_planted(
        wide_domain, PlantedBiasSpec(region={1: (0, 49)}, biased_protected_value=1)
    )


def labeled_by(model, domain, count, rng_seed):
    """Sample a training set labeled by a ground-truth model."""
    rng = np.random.default_rng(rng_seed)
    rows = []
    for _ in range(count):
        values = sample_uniform(domain, rng)
        rows.append((values, model.predict(values)))
    return LabeledDataset(domain, tuple(rows), source=f"sampled[{count}]")


def build_retrain_scenario(seed):
    """One seeded (data, model, audit) scenario for retraining runs.

    Ground truth is a planted model with a biased quarter of a 50x50x2
    domain; a decision tree trained on sampled labels inherits the bias,
    and a directed audit of that tree supplies the findings.
    """
    from fairprobe import (
        DiscriminationConfig,
        SearchConfig,
        run_audit,
        train_tree,
    )

    domain = make_domain(
        [("a", 0, 49, False), ("b", 0, 49, False), ("g", 0, 1, True)]
    )
    rng = np.random.default_rng(seed)
    lo_a = int(rng.integers(0, 25))
    lo_b = int(rng.integers(0, 25))
    truth = make_planted(
        domain,
        PlantedBiasSpec(
            region={0: (lo_a, lo_a + 24), 1: (lo_b, lo_b + 24)},
            biased_protected_value=1,
        ),
    )
    training = labeled_by(truth, domain, 500, rng_seed=seed + 1000)

    def trainer(ds):
        # Depth 10 keeps leaves small enough that even the 1-2% first
        # augmentation round can flip leaf majorities.
        return train_tree(ds, max_depth=10, min_leaf=1, seed=seed)

    subject = trainer(training)
    cfg = SearchConfig(
        gamma=DiscriminationConfig(0.0),
        global_trials=300,
        local_trials=100,
        strategy="fully_directed",
        seed=seed,
        max_inputs=900,
    )
    suite = run_audit(subject, domain, cfg, np.random.default_rng(seed))
    return domain, training, trainer, suite
