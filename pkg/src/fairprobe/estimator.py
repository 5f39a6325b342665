"""Monte Carlo estimation of the discriminatory-input fraction.

K independent trials each draw m uniform inputs and record the percentage
that are discriminatory; the point estimate is the mean over trials and the
95% interval is the normal approximation over per-trial percentages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import InputDomain
from .errors import ContractError
from .fairness import DiscriminationConfig, check_discriminatory


@dataclass(frozen=True)
class EstimationResult:
    """Point estimate (percentage), 95% CI, and the per-trial percentages."""

    point_estimate: float
    ci_low: float
    ci_high: float
    trials: int
    samples_per_trial: int
    per_trial: tuple[float, ...]


def estimate_fraction(
    model,
    domain: InputDomain,
    gamma: DiscriminationConfig,
    m: int,
    K: int,
    rng: np.random.Generator,
) -> EstimationResult:
    """Estimate the percentage of discriminatory inputs in the domain.

    Each of the K trials draws from its own substream of `rng`, so trials
    are independent and the result is deterministic given the generator.
    The CI is mean +- 1.96 * s / sqrt(K) over per-trial percentages,
    clamped to [0, 100]; when all trials agree it collapses to a point.
    """
    if m < 1:
        raise ContractError(f"m must be at least 1, got {m}")
    if K < 2:
        raise ContractError(f"K must be at least 2 for an interval, got {K}")

    lows = np.array([p.min_value for p in domain.params])
    highs = np.array([p.max_value + 1 for p in domain.params])
    per_trial: list[float] = []
    for trial_rng in rng.spawn(K):
        columns = [
            trial_rng.integers(lows[j], highs[j], size=m) for j in range(domain.n)
        ]
        hits = 0
        for row in zip(*columns):
            values = tuple(int(v) for v in row)
            if check_discriminatory(model, values, domain, gamma) is not None:
                hits += 1
        per_trial.append(100.0 * hits / m)

    arr = np.array(per_trial)
    point = float(arr.mean())
    s = float(arr.std(ddof=1))
    half = 1.96 * s / np.sqrt(K)
    return EstimationResult(
        point_estimate=point,
        ci_low=max(0.0, point - half),
        ci_high=min(100.0, point + half),
        trials=K,
        samples_per_trial=m,
        per_trial=tuple(per_trial),
    )


def detection_probability(fraction: float, n: int) -> float:
    """Chance that n independent uniform samples hit at least one
    discriminatory input when `fraction` of the domain is discriminatory."""
    if not 0.0 <= fraction <= 1.0:
        raise ContractError(f"fraction must be in [0,1], got {fraction}")
    if n < 0:
        raise ContractError(f"n must be non-negative, got {n}")
    return 1.0 - (1.0 - fraction) ** n
