"""
Estimating the discriminatory fraction
======================================

K independent trials of m uniform samples each yield per-trial
percentages; averaging them estimates the global discriminatory fraction,
with a 95% normal-approximation interval over the trials. The detection
curve answers the prior question: how many uniform samples does the global
phase need before it hits the discriminatory region at all?
"""

import numpy as np

from fairprobe import (
    DiscriminationConfig,
    PlantedBiasSpec,
    detection_probability,
    estimate_fraction,
    make_planted,
)
from fairprobe.domain import InputDomain, ParameterSpec

domain = InputDomain([
    ParameterSpec("a", 0, 0, 999),
    ParameterSpec("b", 1, 0, 999),
    ParameterSpec("g", 2, 0, 1, protected=True),
])

# Exactly 1% of the domain discriminates: 10% of `a` times 10% of `b`.
model = make_planted(
    domain,
    PlantedBiasSpec(region={0: (0, 99), 1: (0, 99)}, biased_protected_value=1),
)
print(f"true fraction: {100 * model.rho:.2f}%")

result = estimate_fraction(
    model, domain, DiscriminationConfig(0.0), m=1000, K=400,
    rng=np.random.default_rng(20),
)
print(
    f"estimate over K=400 trials of m=1000 samples: "
    f"{result.point_estimate:.3f}%  95% CI [{result.ci_low:.3f}, {result.ci_high:.3f}]"
)

# Running mean across trials: convergence is visible well before K=400.
running = np.cumsum(result.per_trial) / np.arange(1, len(result.per_trial) + 1)
for k in (1, 10, 50, 100, 200, 400):
    print(f"  running mean after {k:3d} trials: {running[k - 1]:.3f}%")

# Detection probability of at least one hit in n uniform samples at 1%.
print("\nchance the global phase finds a 1% region:")
for n in (10, 100, 500, 1000):
    print(f"  n={n:5d}: {detection_probability(0.01, n):.5f}")
