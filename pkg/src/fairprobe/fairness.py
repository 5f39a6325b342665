"""The discrimination check over protected variants and single-parameter perturbation."""

from __future__ import annotations

from dataclasses import dataclass

from .domain import InputDomain, PointInput, protected_variants
from .errors import ContractError


@dataclass(frozen=True)
class DiscriminationConfig:
    """Threshold gamma: two labels discriminate when their gap strictly exceeds it."""

    gamma: float = 0.0

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ContractError(f"gamma must be non-negative, got {self.gamma}")


@dataclass(frozen=True)
class Finding:
    """A verified discriminatory input together with its witness variant.

    The input and witness agree on every non-protected parameter and differ
    on at least one protected parameter; their labels differ by more than
    gamma at creation time and can be re-verified against the model.
    """

    input: PointInput
    witness: PointInput
    label_input: int
    label_witness: int
    origin: str = "global"
    step: int = 0

    @property
    def label_gap(self) -> int:
        return abs(self.label_input - self.label_witness)


def check_discriminatory(
    model,
    values: PointInput,
    domain: InputDomain,
    cfg: DiscriminationConfig,
    *,
    origin: str = "global",
    step: int = 0,
) -> Finding | None:
    """Test one input against every protected variant of itself.

    Evaluates the model once per variant (a single batch) and returns a
    Finding for the first variant, in enumeration order, whose label differs
    from the input's own label by strictly more than gamma; None when no
    variant does.
    """
    variants = protected_variants(values, domain)
    labels = model.predict_batch(variants)
    base_label = labels[variants.index(tuple(values))]
    for variant, label in zip(variants, labels):
        if abs(label - base_label) > cfg.gamma:
            return Finding(
                input=tuple(values),
                witness=variant,
                label_input=base_label,
                label_witness=label,
                origin=origin,
                step=step,
            )
    return None


def perturb(
    values: PointInput, param_index: int, delta: int, domain: InputDomain
) -> PointInput:
    """Shift one non-protected parameter by +-1, clamped to its bounds.

    A step that would leave the parameter's range is clamped, so the result
    always stays inside the domain; every other coordinate is unchanged.
    """
    if delta not in (-1, 1):
        raise ContractError(f"delta must be -1 or +1, got {delta}")
    if not 0 <= param_index < domain.n:
        raise ContractError(f"parameter index {param_index} out of range")
    spec = domain.params[param_index]
    if spec.protected:
        raise ContractError(
            f"cannot perturb protected parameter {spec.name!r}"
        )
    moved = min(max(values[param_index] + delta, spec.min_value), spec.max_value)
    out = list(values)
    out[param_index] = moved
    return tuple(out)
