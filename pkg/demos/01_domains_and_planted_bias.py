"""
Input domains and the planted-bias oracle
=========================================

A domain is an ordered list of integer parameters, some flagged protected.
A planted-bias model is a synthetic classifier whose discriminatory-input
fraction is known in closed form; it anchors every statistical claim the
toolkit makes.
"""

import numpy as np

from fairprobe import (
    DiscriminationConfig,
    InputDomain,
    ParameterSpec,
    PlantedBiasSpec,
    check_discriminatory,
    make_planted,
    protected_variants,
    sample_uniform,
)

# A small census-flavoured domain: two free parameters plus a binary
# protected one ("gender"-like).
domain = InputDomain([
    ParameterSpec(name="age", index=0, min_value=17, max_value=90),
    ParameterSpec(name="hours", index=1, min_value=1, max_value=99),
    ParameterSpec(name="gender", index=2, min_value=0, max_value=1, protected=True),
])
print(f"domain with {domain.n} parameters, {domain.cardinality} points total")

# Uniform sampling is seeded and reproducible.
rng = np.random.default_rng(7)
person = sample_uniform(domain, rng)
print("sampled input:", person)

# Variant expansion: the same person under every protected value.
print("protected variants:", protected_variants(person, domain))

# Plant a biased region: ages 25..44 (any hours) get the opposite label
# when gender == 1. The exact discriminatory fraction comes for free.
model = make_planted(
    domain,
    PlantedBiasSpec(region={0: (25, 44)}, biased_protected_value=1),
)
print(f"planted discriminatory fraction rho = {model.rho:.4f}")

# The discrimination check compares a point against all its variants.
cfg = DiscriminationConfig(gamma=0.0)
inside = (30, 40, 0)
outside = (60, 40, 0)
print("check inside region: ", check_discriminatory(model, inside, domain, cfg))
print("check outside region:", check_discriminatory(model, outside, domain, cfg))
